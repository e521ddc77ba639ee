//! `csirt-pseudo`: anonymize, restore and score incident data.
//!
//! Exit codes: 0 success, 1 configuration error, 2 partial failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Debug, Parser)]
#[command(name = "csirt-pseudo", version, about = "Keyed reversible pseudonymization for incident data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replace identifiers in files with <TYPE_slug> tokens.
    Anonymize(AnonymizeArgs),
    /// Restore tokens to their original values (audited).
    Deanonymize(DeanonymizeArgs),
    /// Score predicted spans against gold annotations.
    Eval(EvalArgs),
    /// Inspect the vault.
    #[command(subcommand)]
    Vault(VaultCommand),
}

#[derive(Debug, Subcommand)]
enum VaultCommand {
    /// List stored pseudonyms, sorted by type and value.
    List(VaultListArgs),
}

#[derive(Debug, Args)]
struct VaultOpt {
    /// Vault file (entities.ndjson; audit.ndjson sits beside it).
    #[arg(long, default_value = "entities.ndjson")]
    vault: PathBuf,
}

#[derive(Debug, Args)]
struct AnonymizeArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Language tag, recorded only.
    #[arg(long, default_value = "en")]
    lang: String,
    /// Hex characters per slug (1-64).
    #[arg(long, default_value_t = 64)]
    slug_length: usize,
    /// Comma-separated entity types to detect but keep verbatim.
    #[arg(long, value_name = "TYPES")]
    preserve_entities: Option<String>,
    /// Comma-separated strings never to replace.
    #[arg(long, value_name = "TERMS")]
    allow_list: Option<String>,
    /// Output file (single input) or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    vault: VaultOpt,
    /// OCR command template containing {input} (default: $OCR_CMD, then tesseract).
    #[arg(long)]
    ocr_cmd: Option<String>,
    /// Recognizer file with TYPE<TAB>value lines.
    #[arg(long, value_name = "FILE")]
    recognizers: Option<PathBuf>,
    /// Also scan JSON object keys.
    #[arg(long)]
    scan_json_keys: bool,
    /// Write detections as line-JSON for `eval --pred`.
    #[arg(long, value_name = "FILE")]
    detections: Option<PathBuf>,
    /// Worker threads for reading and detection (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct DeanonymizeArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output file (single input) or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    vault: VaultOpt,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Gold annotations, one JSON object per line.
    #[arg(long)]
    gold: PathBuf,
    /// Predictions in the same format.
    #[arg(long)]
    pred: PathBuf,
}

#[derive(Debug, Args)]
struct VaultListArgs {
    #[command(flatten)]
    vault: VaultOpt,
    /// Only records of this type, e.g. HASH or CUSTOM:PRODUCT.
    #[arg(long = "type", value_name = "TYPE")]
    entity_type: Option<String>,
    /// Print distinct values as one comma-joined --allow-list line.
    #[arg(long)]
    suggest_allowlist: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Anonymize(a) => commands::anonymize(a),
        Command::Deanonymize(a) => commands::deanonymize(a),
        Command::Eval(a) => commands::eval(a),
        Command::Vault(VaultCommand::List(a)) => commands::vault_list(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
