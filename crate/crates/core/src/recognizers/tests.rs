use proptest::prelude::*;

use super::*;
use crate::domain::Span;

fn types_and_texts(dets: &[Detection]) -> Vec<(String, &str)> {
    dets.iter().map(|d| (d.entity_type.name(), d.text.as_str())).collect()
}

fn all_builtin(text: &str) -> Vec<Detection> {
    recognize_all(text, &builtin_registry(), &PolicyConfig::default()).unwrap()
}

#[test]
fn builtin_registry_shape() {
    let reg = builtin_registry();
    let ids = reg.ids();
    let unique: BTreeSet<_> = ids.iter().collect();
    assert_eq!(unique.len(), ids.len());
    let types = emitted_types(&reg);
    for t in EntityType::BUILTIN {
        assert!(types.contains(&t), "missing {t}");
    }
}

#[test]
fn ipv4_in_sentence() {
    let text = "login from 203.0.113.7 failed";
    let dets = all_builtin(text);
    assert_eq!(types_and_texts(&dets), [("IP_ADDRESS".into(), "203.0.113.7")]);
    assert_eq!(dets[0].span, Span { start: 11, end: 22 });
}

/// Independent oracle: a dotted quad is an address iff every part is a
/// decimal 0..=255 without a leading zero.
fn oracle_is_ipv4(s: &str) -> bool {
    let parts: Vec<&str> = s.split('.').collect();
    parts.len() == 4
        && parts.iter().all(|p| {
            !p.is_empty()
                && p.len() <= 3
                && p.bytes().all(|b| b.is_ascii_digit())
                && !(p.len() > 1 && p.starts_with('0'))
                && p.parse::<u32>().unwrap() <= 255
        })
}

#[test]
fn ipv4_octet_bounds_match_enumerator() {
    let grid: Vec<u32> = (0..=300).step_by(7).chain([0, 9, 10, 99, 100, 199, 200, 249, 250, 255, 256, 299, 999]).collect();
    let r = builtin::ipv4();
    for &a in &grid {
        for &b in &[0u32, 1, 255, 256] {
            let quad = format!("{a}.{b}.{}.{}", (a + b) % 260, 255 - (a % 256));
            let found = r.recognize(&format!(" {quad} ")).unwrap();
            let whole = found.len() == 1 && found[0].text == quad;
            assert_eq!(whole, oracle_is_ipv4(&quad), "{quad}");
        }
    }
}

#[test]
fn ipv4_rejects_version_like_strings() {
    assert!(builtin::ipv4().recognize("10.300.1.1").unwrap().is_empty());
    assert!(builtin::ipv4().recognize("v1.2.3.4").unwrap().is_empty());
    assert!(builtin::ipv4().recognize("1.2.3.4567").unwrap().is_empty());
}

#[test]
fn ipv4_ignores_oids_and_long_dotted_runs() {
    let r = builtin::ipv4();
    assert!(r.recognize("NVT 1.3.6.1.4.1.25623.1.0.10330").unwrap().is_empty());
    assert!(r.recognize("ver 10.2.3.4.5").unwrap().is_empty());
    let end = r.recognize("blocked 10.0.0.1. Then 10.0.0.2.").unwrap();
    assert_eq!(end.iter().map(|d| d.text.as_str()).collect::<Vec<_>>(), ["10.0.0.1", "10.0.0.2"]);
}

#[test]
fn ipv6_forms() {
    let r = builtin::ipv6();
    for ok in ["2001:0db8:85a3:0000:0000:8a2e:0370:7334", "fe80::1", "::1", "2001:db8::8a2e:370:7334"] {
        let found = r.recognize(&format!("addr {ok} up")).unwrap();
        assert_eq!(found.len(), 1, "{ok}");
        assert_eq!(found[0].text, ok);
    }
    for bad in ["std::vector", "::", "a::b", "12:30:45", "0A:1B:2C:3D:4E:5F:60:71"] {
        assert!(r.recognize(bad).unwrap().is_empty(), "{bad}");
    }
}

#[test]
fn email_url_hostname() {
    let dets = all_builtin("mail admin@corp.example.org or see https://portal.example.com/a?b=1. host db01.internal.lan");
    assert_eq!(
        types_and_texts(&dets),
        [
            ("EMAIL".into(), "admin@corp.example.org"),
            ("URL".into(), "https://portal.example.com/a?b=1"),
            ("HOSTNAME".into(), "db01.internal.lan"),
        ]
    );
}

#[test]
fn hostname_needs_a_dot_and_alphabetic_tld() {
    let r = builtin::hostname();
    assert!(r.recognize("servidor-web-01").unwrap().is_empty());
    assert!(r.recognize("1.3.6.1.4.1").unwrap().is_empty());
    assert!(r.recognize("host.lan-01").unwrap().is_empty());
    assert_eq!(r.recognize("WWW.Example.COM").unwrap().len(), 1);
}

#[test]
fn hash_lengths() {
    // MD5("") and SHA-256("") from an independent digest implementation.
    let md5 = "d41d8cd98f00b204e9800998ecf8427e";
    let sha256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
    let sha1 = "da39a3ee5e6b4b0d3255bfef95601890afd80709";
    for h in [md5, sha1, sha256] {
        let found = recognize_hash(&format!("file {h} seen"));
        assert_eq!(found.len(), 1, "{h}");
        assert_eq!(found[0].text, h);
        assert_eq!(found[0].score, 1.0);
    }
    assert!(recognize_hash("1700000000").is_empty());
    assert!(recognize_hash(&"1".repeat(32)).is_empty());
    assert!(recognize_hash(&"a".repeat(33)).is_empty());
    assert!(recognize_hash(&format!("{sha256}ab")).is_empty());
    assert!(recognize_hash(&"b".repeat(50)).is_empty());
}

#[test]
fn cert_serials() {
    assert_eq!(recognize_cert_serial("0A:1B:2C:3D:4E:5F").len(), 1);
    assert!(recognize_cert_serial("0A:1B:2C:3D:4E").is_empty());
    let mac = recognize_cert_serial("aa:bb:cc:dd:ee:ff");
    assert_eq!(mac.len(), 1);
    assert_eq!(mac[0].entity_type, EntityType::CertSerial);
    let long = "01:02:03:04:05:06:07:08";
    let dets = all_builtin(long);
    assert_eq!(types_and_texts(&dets), [("CERT_SERIAL".into(), long)]);
}

const PEM: &str = "-----BEGIN CERTIFICATE-----\nMIIBszCCAVmgAwIBAgIUe3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855\n-----END CERTIFICATE-----";

#[test]
fn cert_bodies() {
    let one = recognize_cert_body(&format!("cert:\n{PEM}\nend"));
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].text, PEM);
    let two = recognize_cert_body(&format!("{PEM}\n\n{PEM}"));
    assert_eq!(two.len(), 2);
    assert!(two[0].span.end <= two[1].span.start);
    assert!(recognize_cert_body("-----BEGIN CERTIFICATE-----\nMIIB\n").is_empty());
}

#[test]
fn cert_body_absorbs_embedded_hash() {
    let dets = all_builtin(PEM);
    assert_eq!(dets.len(), 1);
    assert_eq!(dets[0].entity_type, EntityType::CertBody);
}

#[test]
fn cpe_forms() {
    let dets = all_builtin("os cpe:/o:canonical:ubuntu_linux:22.04, app cpe:2.3:a:redis:redis:7.0.0:*:*:*:*:*:*:*.");
    assert_eq!(
        types_and_texts(&dets),
        [
            ("CPE_STRING".into(), "cpe:/o:canonical:ubuntu_linux:22.04"),
            ("CPE_STRING".into(), "cpe:2.3:a:redis:redis:7.0.0:*:*:*:*:*:*:*"),
        ]
    );
}

#[test]
fn credentials_report_only_the_value() {
    let dets = all_builtin("user=root password: S3cr3t! apikey=\"abc123\", pwd=<HASH_0a1b>");
    assert_eq!(
        types_and_texts(&dets),
        [("CREDENTIAL".into(), "S3cr3t!"), ("CREDENTIAL".into(), "abc123")]
    );
    assert!(all_builtin("SECRET_KEY=abc").is_empty());
}

#[test]
fn allow_list_suppresses_exact_matches() {
    let policy = PolicyConfig {
        allow_list: vec!["Greenbone".into(), "greenbone.net".into()],
        ..Default::default()
    };
    let reg = builtin_registry()
        .register_dictionary([("Greenbone".to_owned(), EntityType::custom("PRODUCT").unwrap())])
        .unwrap();
    let dets = recognize_all("Greenbone feed from greenbone.net", &reg, &policy).unwrap();
    assert!(dets.is_empty(), "{dets:?}");
}

#[test]
fn preserved_types_are_flagged_not_dropped() {
    let policy = PolicyConfig {
        preserve_entities: [EntityType::CpeString].into(),
        ..Default::default()
    };
    let dets = recognize_all("cpe:/o:canonical:ubuntu_linux:22.04", &builtin_registry(), &policy).unwrap();
    assert_eq!(dets.len(), 1);
    assert_eq!(dets[0].entity_type, EntityType::CpeString);
    assert!(dets[0].preserved);
}

#[test]
fn dictionary_terms_are_whole_word_and_case_sensitive() {
    let person = EntityType::custom("PERSON").unwrap();
    let reg = RecognizerRegistry::empty()
        .register_dictionary([("beatriz.machado".to_owned(), person.clone())])
        .unwrap();
    let text = "[beatriz.machado@servidor-web-01] ~ $ whoami\nbeatriz.machado\nxbeatriz.machado Beatriz.Machado";
    let dets = recognize_all(text, &reg, &PolicyConfig::default()).unwrap();
    assert_eq!(dets.len(), 2);
    assert!(dets.iter().all(|d| d.entity_type == person && d.text == "beatriz.machado"));
    assert!(recognize_all("nobody here", &reg, &PolicyConfig::default()).unwrap().is_empty());
    assert!(matches!(
        RecognizerRegistry::empty().register_dictionary([(String::new(), person)]),
        Err(RecognizerError::EmptyTerm)
    ));
}

#[test]
fn custom_patterns_from_policy() {
    let policy = PolicyConfig {
        custom_patterns: vec![crate::policy::CustomPattern {
            entity_type: EntityType::custom("TICKET").unwrap(),
            pattern: "INC-[0-9]{6}".into(),
        }],
        ..Default::default()
    };
    let reg = RecognizerRegistry::from_policy(&policy).unwrap();
    let dets = recognize_all("see INC-004211", &reg, &policy).unwrap();
    assert_eq!(types_and_texts(&dets), [("CUSTOM:TICKET".into(), "INC-004211")]);
}

#[test]
fn duplicate_ids_rejected() {
    let mut reg = builtin_registry();
    assert!(matches!(
        reg.register(Box::new(builtin::hash())),
        Err(RecognizerError::DuplicateId(_))
    ));
}

fn det(start: usize, end: usize, t: EntityType, priority: i32) -> Detection {
    Detection {
        entity_type: t,
        span: Span { start, end },
        text: "x".repeat(end - start),
        recognizer_id: "t".into(),
        score: 1.0,
        preserved: false,
        priority,
    }
}

#[test]
fn overlap_resolution_rules() {
    let out = resolve_overlaps(vec![
        det(10, 74, EntityType::Hash, 5),
        det(0, 200, EntityType::CertBody, 12),
    ]);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].entity_type, EntityType::CertBody);

    let out = resolve_overlaps(vec![det(5, 8, EntityType::Hash, 5), det(0, 3, EntityType::Email, 9)]);
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].span.start, 0);

    let custom = EntityType::custom("X").unwrap();
    let out = resolve_overlaps(vec![det(0, 32, custom, 1), det(0, 32, EntityType::Hash, 5)]);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].entity_type, EntityType::Hash);

    let out = resolve_overlaps(vec![det(2, 6, EntityType::Hash, 5), det(0, 4, EntityType::Hash, 5)]);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].span.start, 0);
}

const PLANTED: &[(&str, &str)] = &[
    ("IP_ADDRESS", "203.0.113.7"),
    ("IP_ADDRESS", "10.0.0.254"),
    ("IP_ADDRESS", "2001:db8::17"),
    ("EMAIL", "soc@cert.example.br"),
    ("URL", "http://evil.example.net/payload.sh"),
    ("HOSTNAME", "mail.corp.example"),
    ("HASH", "d41d8cd98f00b204e9800998ecf8427e"),
    ("HASH", "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"),
    ("CERT_SERIAL", "3a:9f:00:c1:7e:42:b8"),
    ("CPE_STRING", "cpe:/a:openbsd:openssh:8.9p1"),
];

const FILLER: &[&str] = &["login", "failed", "for", "user", "at", "2024-05-01", "port", "22", "ok", "-"];

prop_compose! {
    fn planted_text()(picks in prop::collection::vec((0..PLANTED.len(), 0..FILLER.len(), 1usize..3), 1..12))
        -> (String, Vec<(String, String)>) {
        let mut text = String::new();
        let mut planted = Vec::new();
        for (p, f, n) in picks {
            for _ in 0..n {
                text.push_str(FILLER[f]);
                text.push(' ');
            }
            text.push_str(PLANTED[p].1);
            text.push(' ');
            planted.push((PLANTED[p].0.to_owned(), PLANTED[p].1.to_owned()));
        }
        (text, planted)
    }
}

proptest! {
    #[test]
    fn planted_entities_are_all_found((text, planted) in planted_text()) {
        let dets = all_builtin(&text);
        let found: Vec<(String, String)> = dets.iter().map(|d| (d.entity_type.name(), d.text.clone())).collect();
        prop_assert_eq!(found, planted);
    }

    #[test]
    fn output_sorted_disjoint_and_faithful((text, _) in planted_text()) {
        let dets = all_builtin(&text);
        for d in &dets {
            prop_assert_eq!(&text[d.span.start..d.span.end], d.text.as_str());
        }
        for w in dets.windows(2) {
            prop_assert!(w[0].span.end <= w[1].span.start);
        }
    }

    #[test]
    fn allow_list_dominates((text, planted) in planted_text(), mask in prop::collection::vec(any::<bool>(), PLANTED.len())) {
        let allow: Vec<String> = PLANTED.iter().zip(&mask).filter(|(_, m)| **m).map(|(p, _)| p.1.to_owned()).collect();
        let policy = PolicyConfig { allow_list: allow.clone(), ..Default::default() };
        let dets = recognize_all(&text, &builtin_registry(), &policy).unwrap();
        for d in &dets {
            prop_assert!(!allow.contains(&d.text));
        }
        let expected = planted.iter().filter(|(_, v)| !allow.contains(v)).count();
        prop_assert_eq!(dets.len(), expected);
    }

    #[test]
    fn resolve_overlaps_is_idempotent(spans in prop::collection::vec((0usize..60, 1usize..20, 0i32..10), 0..30)) {
        let dets: Vec<Detection> = spans.into_iter().map(|(s, l, p)| det(s, s + l, EntityType::Hash, p)).collect();
        let once = resolve_overlaps(dets);
        for w in once.windows(2) {
            prop_assert!(w[0].span.end <= w[1].span.start);
        }
        let twice = resolve_overlaps(once.clone());
        prop_assert_eq!(once, twice);
    }
}
