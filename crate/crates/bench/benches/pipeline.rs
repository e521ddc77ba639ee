use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use csirt_pseudo_core::processors::{anonymize_xml, plan_document, Format};
use csirt_pseudo_core::{
    builtin_registry, compute_digest, pseudonymize, recognize_all, EntityType, PolicyConfig,
    RunContext, SecretKey, Vault,
};

fn log_text(lines: usize) -> String {
    (0..lines)
        .map(|i| {
            format!(
                "2024-03-01T10:{:02}:00Z sshd[{i}]: Failed password for admin from 203.0.{}.{} port 22 \
                 via gw{i}.corp.example; sample {:032x} see https://intel.example.net/ioc/{i}\n",
                i % 60,
                i / 250 % 256,
                i % 250 + 1,
                0xabcdef_u128 * (i as u128 + 1)
            )
        })
        .collect()
}

fn scan_xml(results: usize) -> String {
    let mut s = String::from("<report><results>");
    for r in 0..results {
        s.push_str(&format!(
            "<result id=\"{r}\"><host>10.1.{}.{}</host><nvt oid=\"1.3.6.1.4.1.25623.1.0.{r}\">\
             <name>Detection</name></nvt><description>Installed cpe:/a:vendor:product:{r} on \
             h{r}.lab.example, contact ops{r}@lab.example</description></result>",
            r / 250,
            r % 250 + 1
        ));
    }
    s.push_str("</results></report>");
    s
}

fn bench_recognize(c: &mut Criterion) {
    let registry = builtin_registry();
    let policy = PolicyConfig::default();
    let text = log_text(200);
    let mut g = c.benchmark_group("recognize");
    g.throughput(Throughput::Bytes(text.len() as u64));
    g.bench_function("log_200_lines", |b| {
        b.iter(|| recognize_all(black_box(&text), &registry, &policy).unwrap())
    });
    let xml = scan_xml(200);
    g.throughput(Throughput::Bytes(xml.len() as u64));
    g.bench_function("plan_xml_200_results", |b| {
        b.iter(|| plan_document(Format::Xml, black_box(xml.clone()), &registry, &policy).unwrap())
    });
    g.finish();
}

fn bench_pseudonym(c: &mut Criterion) {
    c.bench_function("compute_digest", |b| {
        b.iter(|| compute_digest(b"bench-key", &EntityType::IpAddress, black_box("203.0.113.7")).unwrap())
    });

    let values: Vec<String> = (0..500).map(|i| format!("10.{}.{}.{}", i / 65536, i / 256 % 256, i % 256)).collect();
    for slug_length in [64, 2] {
        c.bench_function(&format!("pseudonymize_500_new_slug{slug_length}"), |b| {
            b.iter_batched(
                || {
                    let dir = tempfile::tempdir().unwrap();
                    let path = dir.path().join("entities.ndjson");
                    let policy = PolicyConfig {
                        slug_length,
                        ..PolicyConfig::default()
                    };
                    let ctx = RunContext::new(SecretKey::new("bench-key").unwrap(), policy, &path, "bench");
                    let vault = Vault::open(&path).unwrap();
                    (dir, ctx, vault)
                },
                |(_dir, ctx, mut vault)| {
                    for v in &values {
                        pseudonymize(&ctx, &mut vault, &EntityType::IpAddress, v, "bench").unwrap();
                    }
                },
                BatchSize::PerIteration,
            )
        });
    }
}

fn bench_anonymize_xml(c: &mut Criterion) {
    let registry = builtin_registry();
    let xml = scan_xml(200);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("entities.ndjson");
    let policy = PolicyConfig {
        preserve_entities: [EntityType::CpeString].into_iter().collect(),
        ..PolicyConfig::default()
    };
    let ctx = RunContext::new(SecretKey::new("bench-key").unwrap(), policy, &path, "bench");
    let mut vault = Vault::open(&path).unwrap();
    // Warm vault: measures detection, lookup and splicing, not first inserts.
    anonymize_xml(&xml, &ctx, &mut vault, &registry).unwrap();
    let mut g = c.benchmark_group("anonymize");
    g.throughput(Throughput::Bytes(xml.len() as u64));
    g.bench_function("xml_200_results_warm_vault", |b| {
        b.iter(|| anonymize_xml(black_box(&xml), &ctx, &mut vault, &registry).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_recognize, bench_pseudonym, bench_anonymize_xml);
criterion_main!(benches);
