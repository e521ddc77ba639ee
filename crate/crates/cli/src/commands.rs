use std::fs;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use csirt_pseudo_core::eval::{evaluate, read_annotations, write_annotations, MetricsReport};
use csirt_pseudo_core::ocr::ocr_command_from_env;
use csirt_pseudo_core::processors::commit_file;
use csirt_pseudo_core::recognizers::parse_recognizer_config;
use csirt_pseudo_core::{
    prepare_files, restore_file, validate_policy, AuditAction, AuditEvent, EntityType,
    GoldAnnotation, PolicyConfig, ProcessError, RecognizerRegistry, RunContext, SecretKey, Vault,
};

use crate::{AnonymizeArgs, DeanonymizeArgs, EvalArgs, VaultListArgs};

const PARTIAL: u8 = 2;

fn actor() -> String {
    std::env::var("USER")
        .ok()
        .filter(|u| !u.is_empty())
        .unwrap_or_else(|| "unknown".to_owned())
}

fn csv_list(raw: &str) -> Vec<String> {
    raw.split(',').map(|s| s.trim().to_owned()).collect()
}

fn build_policy(args: &AnonymizeArgs) -> Result<PolicyConfig> {
    let mut policy = PolicyConfig {
        slug_length: args.slug_length,
        lang: args.lang.clone(),
        scan_json_keys: args.scan_json_keys,
        ..PolicyConfig::default()
    };
    if let Some(raw) = &args.allow_list {
        policy.allow_list = csv_list(raw);
    }
    if let Some(raw) = &args.preserve_entities {
        for name in csv_list(raw) {
            let t: EntityType = name
                .parse()
                .with_context(|| format!("--preserve-entities: {name:?}"))?;
            policy.preserve_entities.insert(t);
        }
    }
    if let Some(path) = &args.recognizers {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading recognizer file {}", path.display()))?;
        parse_recognizer_config(&text)
            .with_context(|| format!("recognizer file {}", path.display()))?
            .apply_to(&mut policy);
    }
    Ok(validate_policy(policy)?)
}

fn check_out(out: Option<&std::path::Path>, inputs: usize) -> Result<()> {
    if let Some(o) = out {
        if inputs > 1 && !o.is_dir() {
            bail!("--out must be an existing directory when several inputs are given");
        }
    }
    Ok(())
}

pub fn anonymize(args: AnonymizeArgs) -> Result<ExitCode> {
    let key = SecretKey::from_env()?;
    let policy = build_policy(&args)?;
    check_out(args.out.as_deref(), args.inputs.len())?;
    let registry = RecognizerRegistry::from_policy(&policy)?;
    let ctx = RunContext::new(key, policy, &args.vault.vault, actor());
    let mut vault = Vault::open(&ctx.vault_path)?;
    let ocr_cmd = args.ocr_cmd.clone().unwrap_or_else(ocr_command_from_env);

    let prepared = prepare_files(&args.inputs, &registry, &ctx.policy, &ocr_cmd, args.jobs);
    let (mut detections, mut replacements, mut failed) = (0, 0, 0);
    let mut exported = Vec::new();
    let stdout = std::io::stdout();
    for item in prepared {
        let result = item.and_then(|p| {
            commit_file(&p, &ctx, &mut vault, args.out.as_deref()).map_err(|e| e.in_file(&p.path))
        });
        let mut block = String::new();
        match result {
            Ok(report) => {
                block.push_str(&format!(
                    "{} -> {} [{}] detections={} replaced={}\n",
                    report.source.display(),
                    report.output.display(),
                    report.format,
                    report.detections.len(),
                    report.replacements
                ));
                for w in &report.warnings {
                    block.push_str(&format!("  warning: {w}\n"));
                }
                detections += report.detections.len();
                replacements += report.replacements;
                let doc = report.source.display().to_string();
                exported.extend(report.detections.iter().map(|d| GoldAnnotation::from_detection(&doc, d)));
            }
            Err(e) => {
                failed += 1;
                eprintln!("error: {e}");
            }
        }
        stdout.lock().write_all(block.as_bytes())?;
    }
    println!(
        "{} file(s), {detections} detection(s), {replacements} replacement(s), {failed} failed",
        args.inputs.len()
    );
    if let Some(path) = &args.detections {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_annotations(std::io::BufWriter::new(file), &exported)?;
    }
    Ok(if failed > 0 { ExitCode::from(PARTIAL) } else { ExitCode::SUCCESS })
}

pub fn deanonymize(args: DeanonymizeArgs) -> Result<ExitCode> {
    let key = SecretKey::from_env()?;
    check_out(args.out.as_deref(), args.inputs.len())?;
    let mut vault = Vault::open_existing(&args.vault.vault)?;
    let actor = actor();
    let mut partial = false;
    for input in &args.inputs {
        match restore_file(input, &key, &mut vault, &actor, args.out.as_deref()) {
            Ok((output, report)) => {
                println!(
                    "{} -> {} restored={} unknown={}",
                    input.display(),
                    output.display(),
                    report.restored,
                    report.unknown.len()
                );
                for tok in &report.unknown {
                    eprintln!("warning: {}: unknown token {tok} left in place", input.display());
                }
                partial |= !report.unknown.is_empty();
            }
            Err(e) if matches!(e.root(), ProcessError::KeyMismatch { .. }) => {
                bail!("{e}; nothing restored");
            }
            Err(e) => {
                eprintln!("error: {e}");
                partial = true;
            }
        }
    }
    Ok(if partial { ExitCode::from(PARTIAL) } else { ExitCode::SUCCESS })
}

fn metrics_row(scope: &str, m: &MetricsReport) -> String {
    format!(
        "{scope:<16} {:>5} {:>5} {:>5} {:>9.4} {:>7.4} {:>7.4}",
        m.tp, m.fp, m.fn_, m.precision, m.recall, m.f1
    )
}

pub fn eval(args: EvalArgs) -> Result<ExitCode> {
    let gold = read_annotations(&args.gold)?;
    let pred = read_annotations(&args.pred)?;
    let (overall, by_type) = evaluate(&gold, &pred)?;
    println!("{:<16} {:>5} {:>5} {:>5} {:>9} {:>7} {:>7}", "TYPE", "TP", "FP", "FN", "PRECISION", "RECALL", "F1");
    for (name, m) in &by_type {
        println!("{}", metrics_row(name, m));
    }
    println!("{}", metrics_row("ALL", &overall));
    for (scope, m) in by_type.iter().map(|(k, m)| (k.as_str(), m)).chain([("ALL", &overall)]) {
        let mut line = serde_json::to_value(m)?;
        line["scope"] = scope.into();
        println!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn vault_list(args: VaultListArgs) -> Result<ExitCode> {
    let filter: Option<EntityType> = args
        .entity_type
        .as_deref()
        .map(str::parse)
        .transpose()
        .context("--type")?;
    let mut vault = Vault::open_existing(&args.vault.vault)?;
    let records: Vec<_> = vault.list_entities(filter.as_ref()).into_iter().cloned().collect();
    if args.suggest_allowlist {
        let mut values: Vec<&str> = Vec::new();
        for r in &records {
            if r.original_value.contains(',') {
                eprintln!("warning: skipping {:?}: contains a comma", r.original_value);
            } else if !values.contains(&r.original_value.as_str()) {
                values.push(&r.original_value);
            }
        }
        println!("{}", values.join(","));
    } else {
        println!("TYPE\tSLUG\tVALUE\tFIRST_SEEN\tSOURCE");
        for r in &records {
            println!(
                "{}\t{}\t{}\t{}\t{}",
                r.entity_type, r.slug, r.original_value, r.first_seen, r.source
            );
        }
    }
    let detail = format!(
        "vault list{} ({} records)",
        filter.map(|t| format!(" --type {t}")).unwrap_or_default(),
        records.len()
    );
    vault.append_audit(&AuditEvent::now(AuditAction::Export, &actor(), "", detail))?;
    Ok(ExitCode::SUCCESS)
}
