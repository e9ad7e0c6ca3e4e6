//! Domain types for the two dimensions of the model (cultural metrics and
//! agile elements), the impact relations between them, and the level and
//! polarity semantics used by the evaluator.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid thresholds {low},{high}: require 0 < low < high < 100")]
    InvalidThresholds { low: i64, high: i64 },
    #[error("malformed thresholds `{0}`: expected `<low>,<high>`")]
    MalformedThresholds(String),
    #[error("metric value {0} outside 0..=100")]
    ValueOutOfRange(i64),
}

/// Cultural level a metric is measured at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CultureLevel {
    National,
    Organizational,
}

/// Cultural model a metric comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricSource {
    Hofstede,
    #[serde(rename = "CVM")]
    Cvm,
}

impl MetricSource {
    pub fn expected_level(self) -> CultureLevel {
        match self {
            MetricSource::Hofstede => CultureLevel::National,
            MetricSource::Cvm => CultureLevel::Organizational,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CulturalMetric {
    pub id: String,
    pub name: String,
    pub level: CultureLevel,
    pub low_pole: String,
    pub high_pole: String,
    pub source: MetricSource,
}

/// Metric ids are short uppercase tokens: `[A-Z][A-Z0-9_]*`.
pub fn is_valid_metric_id(id: &str) -> bool {
    let mut chars = id.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// A measured value on the 0..=100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct MetricValue(u8);

impl MetricValue {
    pub const MAX: u8 = 100;

    pub fn new(value: i64) -> Result<Self, ModelError> {
        if (0..=Self::MAX as i64).contains(&value) {
            Ok(MetricValue(value as u8))
        } else {
            Err(ModelError::ValueOutOfRange(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl<'de> Deserialize<'de> for MetricValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = i64::deserialize(d)?;
        MetricValue::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Discretized metric level. Ordered `Low < Medium < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Low,
    Medium,
    High,
}

/// The level named in a rule or condition term. Medium is never stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StatedLevel {
    Low,
    High,
}

impl StatedLevel {
    /// +1 for High, -1 for Low.
    pub fn level_sign(self) -> i32 {
        match self {
            StatedLevel::High => 1,
            StatedLevel::Low => -1,
        }
    }

    pub fn opposite(self) -> StatedLevel {
        match self {
            StatedLevel::High => StatedLevel::Low,
            StatedLevel::Low => StatedLevel::High,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            StatedLevel::High => "HIGH",
            StatedLevel::Low => "LOW",
        }
    }
}

impl From<StatedLevel> for Level {
    fn from(l: StatedLevel) -> Level {
        match l {
            StatedLevel::Low => Level::Low,
            StatedLevel::High => Level::High,
        }
    }
}

impl Level {
    /// The stated form of this level, or `None` for Medium.
    pub fn stated(self) -> Option<StatedLevel> {
        match self {
            Level::Low => Some(StatedLevel::Low),
            Level::Medium => None,
            Level::High => Some(StatedLevel::High),
        }
    }
}

/// Band boundaries used to discretize a [`MetricValue`].
///
/// `value <= low` is Low, `value >= high` is High, anything strictly
/// between is Medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Thresholds {
    low: u8,
    high: u8,
}

impl Thresholds {
    pub fn new(low: i64, high: i64) -> Result<Self, ModelError> {
        if 0 < low && low < high && high < 100 {
            Ok(Thresholds {
                low: low as u8,
                high: high as u8,
            })
        } else {
            Err(ModelError::InvalidThresholds { low, high })
        }
    }

    pub fn low(&self) -> u8 {
        self.low
    }

    pub fn high(&self) -> u8 {
        self.high
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { low: 33, high: 67 }
    }
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.low, self.high)
    }
}

impl FromStr for Thresholds {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || ModelError::MalformedThresholds(s.to_string());
        let (low, high) = s.split_once(',').ok_or_else(malformed)?;
        let low = low.trim().parse::<i64>().map_err(|_| malformed())?;
        let high = high.trim().parse::<i64>().map_err(|_| malformed())?;
        Thresholds::new(low, high)
    }
}

pub fn level_of(value: MetricValue, thresholds: Thresholds) -> Level {
    if value.0 <= thresholds.low {
        Level::Low
    } else if value.0 >= thresholds.high {
        Level::High
    } else {
        Level::Medium
    }
}

/// A team's or organization's measured values. Metrics may be missing.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CulturalProfile {
    pub name: String,
    pub values: BTreeMap<String, MetricValue>,
}

impl CulturalProfile {
    pub fn new(name: impl Into<String>) -> Self {
        CulturalProfile {
            name: name.into(),
            values: BTreeMap::new(),
        }
    }

    /// Builder-style setter; panics on values outside 0..=100.
    pub fn with(mut self, metric: &str, value: i64) -> Self {
        let v = MetricValue::new(value).expect("metric value in range");
        self.values.insert(metric.to_string(), v);
        self
    }

    pub fn get(&self, metric: &str) -> Option<MetricValue> {
        self.values.get(metric).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKind {
    Practice,
    Role,
    Artifact,
    Technique,
    Tool,
}

impl ElementKind {
    /// Only practices and roles span the impact matrix.
    pub fn is_rule_eligible(self) -> bool {
        matches!(self, ElementKind::Practice | ElementKind::Role)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgileElement {
    pub id: String,
    pub name: String,
    pub kind: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default)]
    pub source_methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionTerm {
    /// Holds when the evaluation context carries the flag.
    Flag(String),
    /// Holds when the profile's value for `metric` falls in `level`.
    Metric { metric: String, level: StatedLevel },
}

/// A conjunctive precondition shared by one or more rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactCondition {
    pub id: String,
    pub description: String,
    pub terms: Vec<ConditionTerm>,
}

impl ImpactCondition {
    pub fn metric_refs(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().filter_map(|t| match t {
            ConditionTerm::Metric { metric, .. } => Some(metric.as_str()),
            ConditionTerm::Flag(_) => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Sign::Positive => "POSITIVE",
            Sign::Negative => "NEGATIVE",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// One authored causal relation: `IF cond THEN <level> <metric> -> (sign) element`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactRule {
    pub id: String,
    pub title: Option<String>,
    pub condition: Option<String>,
    pub metric: String,
    pub stated_level: StatedLevel,
    pub sign: Sign,
    pub element: String,
    pub rationale: Option<String>,
}

/// Direction of a rule once folded into "high value" form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    /// A high metric value helps the element, a low one hurts it.
    Aligned,
    /// A high metric value hurts the element, a low one helps it.
    Inverted,
}

impl Polarity {
    pub fn value(self) -> i32 {
        match self {
            Polarity::Aligned => 1,
            Polarity::Inverted => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedRule {
    pub rule_id: String,
    pub metric: String,
    pub polarity: Polarity,
    pub condition: Option<String>,
    pub element: String,
}

impl NormalizedRule {
    /// Contribution when the metric sits at `level` and the condition holds.
    pub fn contribution_at(&self, level: StatedLevel) -> i32 {
        self.polarity.value() * level.level_sign()
    }
}

impl ImpactRule {
    /// Aligned iff (High, Positive) or (Low, Negative).
    pub fn polarity(&self) -> Polarity {
        if self.stated_level.level_sign() * self.sign.value() > 0 {
            Polarity::Aligned
        } else {
            Polarity::Inverted
        }
    }
}

pub fn normalize(rule: &ImpactRule) -> NormalizedRule {
    let polarity = rule.polarity();
    NormalizedRule {
        rule_id: rule.id.clone(),
        metric: rule.metric.clone(),
        polarity,
        condition: rule.condition.clone(),
        element: rule.element.clone(),
    }
}
