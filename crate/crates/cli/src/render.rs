//! Text, JSON and CSV renderings of command results.

use std::fmt::Write as _;

use anyhow::Result;
use moca_core::engine::{
    rule_outcome, Assessment, ConditionStatus, ElementDiff, EvaluationContext, MatrixExport,
    RuleOutcome,
};
use moca_core::kb::{KnowledgeBase, Severity, ValidationReport};
use moca_core::model::{normalize, ConditionTerm, ElementKind, ImpactCondition, ImpactRule, Level};
use serde::Serialize;
use serde_json::json;

use crate::args::OutputFormat;

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn flags_text(ctx: &EvaluationContext) -> String {
    if ctx.flags.is_empty() {
        "-".to_string()
    } else {
        ctx.flags.iter().cloned().collect::<Vec<_>>().join(",")
    }
}

fn term_text(term: &ConditionTerm) -> String {
    match term {
        ConditionTerm::Flag(f) => format!("FLAG {f}"),
        ConditionTerm::Metric { metric, level } => format!("{} {metric}", level.keyword()),
    }
}

fn unmet_terms(ctx: &EvaluationContext, cond: &ImpactCondition) -> Vec<String> {
    cond.terms
        .iter()
        .filter_map(|t| match t {
            ConditionTerm::Flag(f) if !ctx.flags.contains(f) => Some(format!("flag {f} absent")),
            ConditionTerm::Metric { metric, level } => match ctx.level(metric) {
                None => Some(format!("{metric} missing")),
                Some(l) if l != Level::from(*level) => {
                    Some(format!("{metric} is {l:?}, needs {level:?}"))
                }
                _ => None,
            },
            _ => None,
        })
        .collect()
}

pub fn validation(
    kb: Option<&KnowledgeBase>,
    report: &ValidationReport,
    format: OutputFormat,
) -> Result<String> {
    let errors = report.errors().count();
    let warnings = report.warnings().count();
    if format == OutputFormat::Json {
        let summary = kb.map(|kb| {
            json!({
                "metrics": kb.metrics().len(),
                "elements": kb.elements().count(),
                "practices": kb.count_kind(ElementKind::Practice),
                "roles": kb.count_kind(ElementKind::Role),
                "practice_categories": kb.practice_categories().len(),
                "conditions": kb.conditions().count(),
                "rules": kb.rules().count(),
                "profiles": kb.profiles().count(),
                "matrix_domain": kb.matrix_domain_size(),
                "manifest": kb.manifest(),
            })
        });
        return to_json(&json!({
            "valid": !report.has_errors(),
            "errors": errors,
            "warnings": warnings,
            "summary": summary,
            "findings": report.findings,
        }));
    }
    let mut out = String::new();
    if let Some(kb) = kb {
        let eligible = kb.rule_eligible_elements().count();
        writeln!(
            out,
            "knowledge base: {} metrics, {} elements ({} practices in {} categories, {} roles), {} conditions, {} rules, {} profiles",
            kb.metrics().len(),
            kb.elements().count(),
            kb.count_kind(ElementKind::Practice),
            kb.practice_categories().len(),
            kb.count_kind(ElementKind::Role),
            kb.conditions().count(),
            kb.rules().count(),
            kb.profiles().count(),
        )?;
        writeln!(
            out,
            "matrix domain: {} cells ({} metrics x {} elements)",
            kb.matrix_domain_size(),
            kb.metrics().len(),
            eligible
        )?;
        if let Some(m) = kb.manifest() {
            let verdict = if report.with_code(moca_core::kb::codes::MANIFEST_MISMATCH).next().is_some() {
                "MISMATCH"
            } else {
                "counts confirmed"
            };
            writeln!(
                out,
                "manifest: {} metrics, {} practices, {} roles, {} categories: {verdict}",
                m.metrics, m.practices, m.roles, m.practice_categories
            )?;
        }
    }
    for severity in [Severity::Error, Severity::Warning] {
        for f in report.findings.iter().filter(|f| f.severity == severity) {
            writeln!(out, "{f}")?;
        }
    }
    writeln!(out, "{errors} error(s), {warnings} warning(s)")?;
    Ok(out)
}

pub fn evaluation(
    kb: &KnowledgeBase,
    ctx: &EvaluationContext,
    assessments: &[Assessment],
    format: OutputFormat,
) -> Result<String> {
    if format == OutputFormat::Json {
        return to_json(&json!({
            "profile": ctx.profile.name,
            "flags": ctx.flags,
            "thresholds": ctx.thresholds,
            "assessments": assessments,
        }));
    }
    let mut out = String::new();
    writeln!(
        out,
        "profile: {}  flags: {}  thresholds: {}",
        ctx.profile.name,
        flags_text(ctx),
        ctx.thresholds
    )?;
    for a in assessments {
        let fired: Vec<&str> = a.contributions.iter().map(|c| c.rule_id.as_str()).collect();
        if fired.is_empty() {
            writeln!(out, "{}: {}  score {}", a.element_id, a.label, a.score)?;
        } else {
            writeln!(
                out,
                "{}: {} ({})  score {:+}",
                a.element_id,
                a.label,
                fired.join(", "),
                a.score
            )?;
        }
        for c in &a.contributions {
            let rule = kb.rule(&c.rule_id).expect("assessed rule exists");
            let mut line = format!(
                "  fired: {} {:+}  {} at {:?}; rule {} {} {}",
                c.rule_id,
                c.value,
                rule.metric,
                c.fired_level,
                rule.stated_level.keyword(),
                rule.metric,
                rule.sign.keyword()
            );
            if c.fired_level != rule.stated_level {
                line.push_str(" (inverted)");
            }
            if c.condition_status == ConditionStatus::Satisfied {
                if let Some(cond) = &rule.condition {
                    line.push_str(&format!(", {cond} satisfied"));
                }
            }
            if let Some(r) = &rule.rationale {
                line.push_str(&format!(" - {r}"));
            }
            writeln!(out, "{line}")?;
        }
        for id in &a.gated_rules {
            let rule = kb.rule(id).expect("gated rule exists");
            let cond_id = rule.condition.as_deref().unwrap_or("?");
            let detail = kb
                .condition(cond_id)
                .map(|c| unmet_terms(ctx, c).join(", "))
                .unwrap_or_default();
            writeln!(out, "  gated: {id} - {cond_id} not satisfied ({detail})")?;
        }
        for id in &a.indeterminate_rules {
            let rule = kb.rule(id).expect("indeterminate rule exists");
            writeln!(out, "  indeterminate: {id} - {} missing from profile", rule.metric)?;
        }
        for rule in kb.rules_for(&a.element_id) {
            if rule_outcome(kb, ctx, rule) == RuleOutcome::Inactive {
                writeln!(out, "  inactive: {} - {} in the medium band", rule.id, rule.metric)?;
            }
        }
    }
    Ok(out)
}

fn template(kb: &KnowledgeBase, rule: &ImpactRule) -> String {
    let arrow = format!(
        "{}({}) ->({}) {}",
        rule.stated_level.keyword(),
        rule.metric,
        rule.sign.symbol(),
        rule.element
    );
    match &rule.condition {
        Some(id) => {
            let desc = kb.condition(id).map(|c| c.description.as_str()).unwrap_or("");
            format!("IF ({id}: {desc}) THEN {arrow}")
        }
        None => arrow,
    }
}

pub fn explain(kb: &KnowledgeBase, rule: &ImpactRule, format: OutputFormat) -> Result<String> {
    let normalized = normalize(rule);
    let condition = rule.condition.as_deref().and_then(|c| kb.condition(c));
    let inverse_sign = if rule.sign.value() > 0 { '-' } else { '+' };
    let inverse = format!(
        "{}({}) ->({inverse_sign}) {}",
        rule.stated_level.opposite().keyword(),
        rule.metric,
        rule.element
    );
    if format == OutputFormat::Json {
        return to_json(&json!({
            "rule": rule,
            "template": template(kb, rule),
            "inverse": inverse,
            "normalized": normalized,
            "condition": condition,
            "origin": kb.origin_of(&rule.id),
        }));
    }
    let mut out = String::new();
    match &rule.title {
        Some(t) => writeln!(out, "{}  {t}", rule.id)?,
        None => writeln!(out, "{}", rule.id)?,
    }
    writeln!(out, "  {}", template(kb, rule))?;
    match condition {
        None => writeln!(out, "  condition: No precondition")?,
        Some(c) => {
            let terms: Vec<String> = c.terms.iter().map(term_text).collect();
            writeln!(out, "  condition: {} \"{}\": {}", c.id, c.description, terms.join(" AND "))?;
        }
    }
    writeln!(
        out,
        "  sign: {} on {}",
        format!("{:?}", rule.sign).to_lowercase(),
        rule.element
    )?;
    writeln!(out, "  inverse: {inverse}")?;
    writeln!(out, "  polarity: {:+}", normalized.polarity.value())?;
    if let Some(r) = &rule.rationale {
        writeln!(out, "  rationale: {r}")?;
    }
    if let Some(o) = kb.origin_of(&rule.id) {
        writeln!(out, "  declared at: {o}")?;
    }
    Ok(out)
}

pub fn matrix(m: &MatrixExport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(m),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["metric".to_string()];
            header.extend(m.columns.iter().cloned());
            w.write_record(&header)?;
            for (row, cells) in m.rows.iter().zip(&m.cells) {
                let mut record = vec![row.clone()];
                record.extend(cells.iter().map(|c| MatrixExport::cell_text(c)));
                w.write_record(&record)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let covered = m.cells.iter().flatten().filter(|c| !c.is_empty()).count();
            writeln!(
                out,
                "{} metrics x {} elements = {} cells, {} covered",
                m.rows.len(),
                m.columns.len(),
                m.cell_count(),
                covered
            )?;
            for (row, cells) in m.rows.iter().zip(&m.cells) {
                for (col, cell) in m.columns.iter().zip(cells) {
                    if !cell.is_empty() {
                        writeln!(out, "{row} x {col}: {}", MatrixExport::cell_text(cell))?;
                    }
                }
            }
            Ok(out)
        }
    }
}

pub fn diff(
    ctx_a: &EvaluationContext,
    ctx_b: &EvaluationContext,
    diffs: &[ElementDiff],
    all: bool,
    format: OutputFormat,
) -> Result<String> {
    let shown: Vec<&ElementDiff> = diffs.iter().filter(|d| all || d.is_changed()).collect();
    if format == OutputFormat::Json {
        let scenario = |c: &EvaluationContext| {
            json!({"profile": c.profile.name, "flags": c.flags, "thresholds": c.thresholds})
        };
        return to_json(&json!({
            "a": scenario(ctx_a),
            "b": scenario(ctx_b),
            "elements": shown,
        }));
    }
    let mut out = String::new();
    for (name, c) in [("A", ctx_a), ("B", ctx_b)] {
        writeln!(
            out,
            "scenario {name}: profile {}  flags: {}  thresholds: {}",
            c.profile.name,
            flags_text(c),
            c.thresholds
        )?;
    }
    if !diffs.iter().any(ElementDiff::is_changed) {
        writeln!(out, "no differences")?;
    }
    for d in shown {
        let mut line = format!(
            "{}: {:+} -> {:+} (delta {:+})",
            d.element_id, d.score_a, d.score_b, d.delta
        );
        if !d.rules_changed.is_empty() {
            line.push_str(&format!(" [{}]", d.rules_changed.join(", ")));
        }
        writeln!(out, "{line}")?;
    }
    Ok(out)
}
