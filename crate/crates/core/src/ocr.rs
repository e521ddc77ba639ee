//! Image input through an external OCR command.
//!
//! The command is a template such as `tesseract {input} stdout`; it is split
//! with shell quoting rules and `{input}` is replaced by the image path in
//! every argument. The transcript read from stdout is processed as TEXT.

use std::io::ErrorKind;
use std::path::Path;
use std::process::Command;

use crate::error::{OcrError, ProcessError};
use crate::policy::PolicyConfig;
use crate::processors::{plan_document, Format, PlannedDocument};
use crate::recognizers::RecognizerRegistry;

pub const DEFAULT_OCR_COMMAND: &str = "tesseract {input} stdout";
pub const OCR_CMD_ENV: &str = "OCR_CMD";
const PLACEHOLDER: &str = "{input}";

/// `$OCR_CMD` if set and non-empty, else the tesseract default.
pub fn ocr_command_from_env() -> String {
    std::env::var(OCR_CMD_ENV)
        .ok()
        .filter(|s| !s.trim().is_empty())
        .unwrap_or_else(|| DEFAULT_OCR_COMMAND.to_owned())
}

/// Runs the OCR template on `image` and returns its stdout.
pub fn run_ocr(image: &Path, template: &str) -> Result<String, OcrError> {
    if !template.contains(PLACEHOLDER) {
        return Err(OcrError::MissingPlaceholder(template.to_owned()));
    }
    let parts = shlex::split(template)
        .filter(|p| !p.is_empty())
        .ok_or_else(|| OcrError::BadTemplate(template.to_owned()))?;
    if !image.is_file() {
        return Err(OcrError::MissingImage(image.to_owned()));
    }
    let input = image.to_string_lossy();
    let args: Vec<String> = parts.iter().map(|p| p.replace(PLACEHOLDER, &input)).collect();
    let output = Command::new(&args[0])
        .args(&args[1..])
        .output()
        .map_err(|e| match e.kind() {
            ErrorKind::NotFound => OcrError::OcrEngineMissing(args[0].clone()),
            _ => OcrError::Io(e),
        })?;
    if !output.status.success() {
        return Err(OcrError::OcrEngineFailed {
            code: output.status.code(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
        });
    }
    Ok(String::from_utf8_lossy(&output.stdout).into_owned())
}

/// OCR then plan as TEXT. An empty transcript yields a warning, not an error.
pub fn plan_image(
    image: &Path,
    template: &str,
    registry: &RecognizerRegistry,
    policy: &PolicyConfig,
) -> Result<PlannedDocument, ProcessError> {
    let transcript = run_ocr(image, template)?;
    let mut plan = plan_document(Format::Text, transcript, registry, policy)?;
    plan.format = Format::Image;
    if plan.source.trim().is_empty() {
        plan.warnings
            .push(format!("OCR produced no text for {}", image.display()));
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recognizers::builtin_registry;
    use std::fs;

    #[test]
    fn template_checks() {
        let img = Path::new("/nonexistent.png");
        assert!(matches!(run_ocr(img, "cat x"), Err(OcrError::MissingPlaceholder(_))));
        assert!(matches!(run_ocr(img, "cat '{input}"), Err(OcrError::BadTemplate(_))));
        assert!(matches!(run_ocr(img, "cat {input}"), Err(OcrError::MissingImage(_))));
    }

    #[test]
    fn engine_errors_are_typed() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("a.png");
        fs::write(&img, b"png").unwrap();
        assert!(matches!(
            run_ocr(&img, "no-such-ocr-engine-xyz {input}"),
            Err(OcrError::OcrEngineMissing(_))
        ));
        assert!(matches!(
            run_ocr(&img, "sh -c 'echo boom >&2; exit 3' {input}"),
            Err(OcrError::OcrEngineFailed { code: Some(3), .. })
        ));
    }

    #[test]
    fn placeholder_substituted_inside_arguments() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("scan one.png");
        fs::write(&img, b"png").unwrap();
        fs::write(dir.path().join("scan one.png.txt"), "host 10.1.2.3\n").unwrap();
        assert_eq!(run_ocr(&img, "cat {input}.txt").unwrap(), "host 10.1.2.3\n");
    }

    #[test]
    fn empty_transcript_warns() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("blank.png");
        fs::write(&img, b"png").unwrap();
        fs::write(dir.path().join("blank.png.txt"), "  \n").unwrap();
        let plan = plan_image(&img, "cat {input}.txt", &builtin_registry(), &PolicyConfig::default())
            .unwrap();
        assert_eq!(plan.format, Format::Image);
        assert!(plan.detections.is_empty());
        assert_eq!(plan.warnings.len(), 1);
    }
}
