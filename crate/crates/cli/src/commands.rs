use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use moca_core::engine::{self, EvaluationContext};
use moca_core::kb::{self, codes, KnowledgeBase, ProfileRecord, ValidationReport};
use moca_core::model::CulturalProfile;
use moca_core::Thresholds;

use crate::args::{Cli, Command, CommonArgs, DiffArgs, EvaluateArgs, OutputFormat};
use crate::render;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::usage(format!("{e:#}"))
    }
}

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    let common = &cli.common;
    let format = common.format.unwrap_or(match cli.command {
        Command::Matrix => OutputFormat::Csv,
        _ => OutputFormat::Text,
    });
    if format == OutputFormat::Csv && !matches!(cli.command, Command::Matrix) {
        return Err(Failure::usage("csv output is only available for `matrix`"));
    }
    let paths = kb_paths(common)?;

    if let Command::Validate = cli.command {
        return validate(common, &paths, format);
    }

    let kb = load_kb(&paths)?;
    let output = match &cli.command {
        Command::Validate => unreachable!(),
        Command::Evaluate(a) => evaluate(common, &kb, a, format)?,
        Command::Explain { rule_id } => {
            let rule = kb
                .rule(rule_id)
                .ok_or_else(|| Failure::usage(format!("unknown rule `{rule_id}`")))?;
            render::explain(&kb, rule, format)?
        }
        Command::Matrix => render::matrix(&engine::export_matrix(&kb), format)?,
        Command::Diff(a) => diff(common, &kb, a, format)?,
    };
    emit(common, &output)?;
    Ok(EXIT_OK)
}

fn kb_paths(common: &CommonArgs) -> Result<Vec<PathBuf>, Failure> {
    if !common.kb.is_empty() {
        return Ok(common.kb.clone());
    }
    match std::env::var_os("MOCA_KB_PATH") {
        Some(v) if !v.is_empty() => Ok(std::env::split_paths(&v).collect()),
        _ => Err(Failure::usage(
            "no knowledge base given: pass --kb <path> or set MOCA_KB_PATH",
        )),
    }
}

fn emit(common: &CommonArgs, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::from),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .context("writing standard output")?;
            Ok(())
        }
    }
}

fn has_io_error(report: &ValidationReport) -> bool {
    report.errors().any(|f| f.code == codes::IO)
}

fn load_kb(paths: &[PathBuf]) -> Result<KnowledgeBase, Failure> {
    match kb::load(paths) {
        Ok(kb) => Ok(kb),
        Err(report) => {
            let code = if has_io_error(&report) {
                EXIT_USAGE
            } else {
                EXIT_VALIDATION
            };
            let mut message = String::from("knowledge base is invalid");
            for f in report.errors() {
                message.push_str(&format!("\n  {f}"));
            }
            Err(Failure { code, message })
        }
    }
}

fn validate(common: &CommonArgs, paths: &[PathBuf], format: OutputFormat) -> Result<u8, Failure> {
    let (kb, mut report) = kb::load_with_report(paths);
    if let Some(kb) = &kb {
        report.extend(kb::validate_completeness(kb));
    }
    emit(common, &render::validation(kb.as_ref(), &report, format)?)?;
    Ok(if has_io_error(&report) {
        EXIT_USAGE
    } else if report.has_errors() {
        EXIT_VALIDATION
    } else {
        EXIT_OK
    })
}

fn resolve_profile(
    common: &CommonArgs,
    kb: &KnowledgeBase,
    name: &str,
) -> Result<CulturalProfile, Failure> {
    let Some(path) = &common.profile_file else {
        return kb
            .profile(name)
            .cloned()
            .ok_or_else(|| Failure::usage(format!("unknown profile `{name}`")));
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading profile file {}", path.display()))?;
    let records: Vec<ProfileRecord> = serde_json::from_str(&text)
        .with_context(|| format!("parsing profile file {}", path.display()))?;
    let record = records
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Failure::usage(format!("unknown profile `{name}` in {}", path.display())))?;
    kb.validate_profile(record).map_err(|report| {
        let mut message = format!("profile `{name}` is invalid");
        for f in report.errors() {
            message.push_str(&format!("\n  {f}"));
        }
        Failure::usage(message)
    })
}

fn context(
    profile: CulturalProfile,
    flags: impl IntoIterator<Item = String>,
    thresholds: Thresholds,
    elements: &[String],
) -> EvaluationContext {
    let mut ctx = EvaluationContext::new(profile).with_thresholds(thresholds);
    ctx.flags = flags.into_iter().collect();
    if !elements.is_empty() {
        ctx = ctx.with_elements(elements.iter().cloned());
    }
    ctx
}

fn evaluate(
    common: &CommonArgs,
    kb: &KnowledgeBase,
    args: &EvaluateArgs,
    format: OutputFormat,
) -> Result<String, Failure> {
    let profile = resolve_profile(common, kb, &args.profile)?;
    let ctx = context(profile, args.flags.iter().cloned(), common.thresholds, &args.elements);
    let assessments = engine::evaluate(kb, &ctx).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(render::evaluation(kb, &ctx, &assessments, format)?)
}

fn diff(
    common: &CommonArgs,
    kb: &KnowledgeBase,
    args: &DiffArgs,
    format: OutputFormat,
) -> Result<String, Failure> {
    let profile_a = resolve_profile(common, kb, &args.profile)?;
    let profile_b = match &args.profile_b {
        Some(name) => resolve_profile(common, kb, name)?,
        None => profile_a.clone(),
    };
    let shared: BTreeSet<String> = args.flags.iter().cloned().collect();
    let ctx_a = context(
        profile_a,
        shared.iter().cloned().chain(args.flags_a.iter().cloned()),
        common.thresholds,
        &args.elements,
    );
    let ctx_b = context(
        profile_b,
        shared.iter().cloned().chain(args.flags_b.iter().cloned()),
        args.thresholds_b.unwrap_or(common.thresholds),
        &args.elements,
    );
    let diffs = engine::diff(kb, &ctx_a, &ctx_b).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(render::diff(&ctx_a, &ctx_b, &diffs, args.all, format)?)
}
