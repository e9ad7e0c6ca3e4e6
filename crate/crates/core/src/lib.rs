//! Knowledge-based evaluation of cultural impact on agile elements.
//!
//! Cultural metrics (six Hofstede dimensions plus two Competing Values
//! Model dimensions, each on a 0..=100 scale) influence agile elements
//! (practices, roles, ...) through signed, optionally conditional impact
//! rules. Given a cultural profile, the engine fires the rules, sums unit
//! contributions per element and labels the result on a five-point scale.
//!
//! - [`model`]: domain types, level bands and polarity normalization
//! - [`dsl`]: the `.moca` rule language
//! - [`kb`]: loading and validating a knowledge base
//! - [`engine`]: evaluation, diffs and matrix export
//! - [`seed`]: the bundled example knowledge base

pub mod dsl;
pub mod engine;
pub mod exec;
pub mod kb;
pub mod model;
pub mod seed;

pub use dsl::{parse, serialize, Declaration, ParseError, RuleDocument};
pub use engine::{
    diff, evaluate, evaluate_batch, evaluate_element, evaluate_with, export_matrix, Assessment,
    Contribution, ElementDiff, EngineError, EvaluationContext, Label, MatrixExport,
};
pub use exec::Execution;
pub use kb::{load, validate_completeness, KnowledgeBase, ValidationReport};
pub use model::{
    level_of, normalize, CulturalMetric, CulturalProfile, ImpactCondition, ImpactRule, Level,
    Sign, StatedLevel, Thresholds,
};
