//! Profile evaluation: rule firing, additive aggregation per element,
//! qualitative labels, what-if diffs and matrix export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_ordered, Execution};
use crate::kb::KnowledgeBase;
use crate::model::{
    level_of, ConditionTerm, CulturalProfile, ImpactRule, Level, Sign, StatedLevel,
    Thresholds,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvaluationContext {
    pub profile: CulturalProfile,
    pub flags: BTreeSet<String>,
    pub thresholds: Thresholds,
    pub element_selection: Option<BTreeSet<String>>,
}

impl EvaluationContext {
    pub fn new(profile: CulturalProfile) -> Self {
        EvaluationContext {
            profile,
            ..Default::default()
        }
    }

    pub fn with_flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.insert(flag.into());
        self
    }

    pub fn with_thresholds(mut self, thresholds: Thresholds) -> Self {
        self.thresholds = thresholds;
        self
    }

    pub fn with_elements<I, S>(mut self, elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.element_selection = Some(elements.into_iter().map(Into::into).collect());
        self
    }

    pub fn level(&self, metric: &str) -> Option<Level> {
        self.profile.get(metric).map(|v| level_of(v, self.thresholds))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionStatus {
    Satisfied,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Contribution {
    pub rule_id: String,
    pub value: i32,
    pub fired_level: StatedLevel,
    pub condition_status: ConditionStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    StronglyNegative,
    Negative,
    Neutral,
    Positive,
    StronglyPositive,
}

impl Label {
    pub fn from_score(score: i32) -> Label {
        match score {
            i32::MIN..=-2 => Label::StronglyNegative,
            -1 => Label::Negative,
            0 => Label::Neutral,
            1 => Label::Positive,
            _ => Label::StronglyPositive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::StronglyNegative => "strongly negative",
            Label::Negative => "negative",
            Label::Neutral => "neutral",
            Label::Positive => "positive",
            Label::StronglyPositive => "strongly positive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    pub element_id: String,
    pub contributions: Vec<Contribution>,
    pub score: i32,
    pub label: Label,
    pub indeterminate_rules: Vec<String>,
    pub gated_rules: Vec<String>,
}

/// What happened to one rule under one context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleOutcome {
    /// The profile has no value for the rule's metric.
    Indeterminate,
    /// A condition term does not hold.
    Gated,
    /// The metric sits in the Medium band.
    Inactive,
    Fired(Contribution),
}

impl RuleOutcome {
    pub fn value(&self) -> i32 {
        match self {
            RuleOutcome::Fired(c) => c.value,
            _ => 0,
        }
    }
}

/// True if every term of the rule's condition holds (or there is none).
/// A metric predicate over a missing metric does not hold.
pub fn condition_holds(kb: &KnowledgeBase, ctx: &EvaluationContext, rule: &ImpactRule) -> bool {
    let Some(cond_id) = &rule.condition else {
        return true;
    };
    let Some(cond) = kb.condition(cond_id) else {
        return false;
    };
    cond.terms.iter().all(|term| match term {
        ConditionTerm::Flag(flag) => ctx.flags.contains(flag),
        ConditionTerm::Metric { metric, level } => ctx.level(metric) == Some(Level::from(*level)),
    })
}

/// Order of checks: missing metric, then condition, then Medium band.
pub fn rule_outcome(kb: &KnowledgeBase, ctx: &EvaluationContext, rule: &ImpactRule) -> RuleOutcome {
    let Some(level) = ctx.level(&rule.metric) else {
        return RuleOutcome::Indeterminate;
    };
    if !condition_holds(kb, ctx, rule) {
        return RuleOutcome::Gated;
    }
    let Some(fired_level) = level.stated() else {
        return RuleOutcome::Inactive;
    };
    RuleOutcome::Fired(Contribution {
        rule_id: rule.id.clone(),
        value: rule.polarity().value() * fired_level.level_sign(),
        fired_level,
        condition_status: if rule.condition.is_some() {
            ConditionStatus::Satisfied
        } else {
            ConditionStatus::NotApplicable
        },
    })
}

pub fn evaluate_element(
    kb: &KnowledgeBase,
    ctx: &EvaluationContext,
    element: &str,
) -> Result<Assessment, EngineError> {
    if kb.element(element).is_none() {
        return Err(EngineError::UnknownElement(element.to_string()));
    }
    let mut assessment = Assessment {
        element_id: element.to_string(),
        contributions: Vec::new(),
        score: 0,
        label: Label::Neutral,
        indeterminate_rules: Vec::new(),
        gated_rules: Vec::new(),
    };
    for rule in kb.rules_for(element) {
        match rule_outcome(kb, ctx, rule) {
            RuleOutcome::Indeterminate => assessment.indeterminate_rules.push(rule.id.clone()),
            RuleOutcome::Gated => assessment.gated_rules.push(rule.id.clone()),
            RuleOutcome::Inactive => {}
            RuleOutcome::Fired(c) => {
                assessment.score += c.value;
                assessment.contributions.push(c);
            }
        }
    }
    assessment.label = Label::from_score(assessment.score);
    Ok(assessment)
}

/// Element ids the context selects, in lexicographic order.
pub fn selected_elements(
    kb: &KnowledgeBase,
    ctx: &EvaluationContext,
) -> Result<Vec<String>, EngineError> {
    match &ctx.element_selection {
        Some(sel) => {
            if let Some(missing) = sel.iter().find(|id| kb.element(id).is_none()) {
                return Err(EngineError::UnknownElement(missing.clone()));
            }
            Ok(sel.iter().cloned().collect())
        }
        None => Ok(kb.rule_eligible_elements().map(|e| e.id.clone()).collect()),
    }
}

pub fn evaluate(kb: &KnowledgeBase, ctx: &EvaluationContext) -> Result<Vec<Assessment>, EngineError> {
    evaluate_with(kb, ctx, Execution::default())
}

pub fn evaluate_with(
    kb: &KnowledgeBase,
    ctx: &EvaluationContext,
    exec: Execution,
) -> Result<Vec<Assessment>, EngineError> {
    let elements = selected_elements(kb, ctx)?;
    map_ordered(&elements, exec, |id| evaluate_element(kb, ctx, id)).into_iter().collect()
}

/// Evaluates many contexts against one knowledge base. The outer loop over
/// contexts is the parallel one; each context is evaluated sequentially.
pub fn evaluate_batch(
    kb: &KnowledgeBase,
    contexts: &[EvaluationContext],
    exec: Execution,
) -> Vec<Result<Vec<Assessment>, EngineError>> {
    map_ordered(contexts, exec, |ctx| evaluate_with(kb, ctx, Execution::Sequential))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDiff {
    pub element_id: String,
    pub score_a: i32,
    pub score_b: i32,
    pub delta: i32,
    pub rules_changed: Vec<String>,
}

impl ElementDiff {
    pub fn is_changed(&self) -> bool {
        self.delta != 0 || !self.rules_changed.is_empty()
    }
}

/// Compares two scenarios element by element. Elements are those selected
/// by either context.
pub fn diff(
    kb: &KnowledgeBase,
    ctx_a: &EvaluationContext,
    ctx_b: &EvaluationContext,
) -> Result<Vec<ElementDiff>, EngineError> {
    let mut elements: BTreeSet<String> = selected_elements(kb, ctx_a)?.into_iter().collect();
    elements.extend(selected_elements(kb, ctx_b)?);
    let elements: Vec<String> = elements.into_iter().collect();
    Ok(map_ordered(&elements, Execution::default(), |id| {
        let mut out = ElementDiff {
            element_id: id.clone(),
            score_a: 0,
            score_b: 0,
            delta: 0,
            rules_changed: Vec::new(),
        };
        for rule in kb.rules_for(id) {
            let a = rule_outcome(kb, ctx_a, rule);
            let b = rule_outcome(kb, ctx_b, rule);
            out.score_a += a.value();
            out.score_b += b.value();
            if a != b {
                out.rules_changed.push(rule.id.clone());
            }
        }
        out.delta = out.score_b - out.score_a;
        out
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub rule_id: String,
    pub stated_level: StatedLevel,
    pub sign: Sign,
    pub condition_id: Option<String>,
}

impl fmt::Display for MatrixEntry {
    /// `rule-id:LEVEL:SIGN[@condition]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.rule_id, self.stated_level.keyword(), self.sign.keyword())?;
        if let Some(c) = &self.condition_id {
            write!(f, "@{c}")?;
        }
        Ok(())
    }
}

/// Metric x element grid. `cells[row][column]` lists the rules in that cell
/// ordered by rule id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixExport {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Vec<MatrixEntry>>>,
}

impl MatrixExport {
    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn cell(&self, metric: &str, element: &str) -> Option<&[MatrixEntry]> {
        let r = self.rows.iter().position(|m| m == metric)?;
        let c = self.columns.iter().position(|e| e == element)?;
        Some(&self.cells[r][c])
    }

    pub fn cell_text(entries: &[MatrixEntry]) -> String {
        entries
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Rows follow metric declaration order; columns are the rule-eligible
/// elements in lexicographic order. Rules on other element kinds have no
/// column and are left out.
pub fn export_matrix(kb: &KnowledgeBase) -> MatrixExport {
    let rows: Vec<String> = kb.metrics().iter().map(|m| m.id.clone()).collect();
    let columns: Vec<String> = kb.rule_eligible_elements().map(|e| e.id.clone()).collect();
    let row_of: BTreeMap<&str, usize> = rows.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
    let col_of: BTreeMap<&str, usize> =
        columns.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    let mut cells = vec![vec![Vec::new(); columns.len()]; rows.len()];
    for rule in kb.rules() {
        if let (Some(&r), Some(&c)) = (row_of.get(rule.metric.as_str()), col_of.get(rule.element.as_str())) {
            cells[r][c].push(MatrixEntry {
                rule_id: rule.id.clone(),
                stated_level: rule.stated_level,
                sign: rule.sign,
                condition_id: rule.condition.clone(),
            });
        }
    }
    MatrixExport { rows, columns, cells }
}
