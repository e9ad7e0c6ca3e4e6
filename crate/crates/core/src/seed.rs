//! The bundled seed knowledge base: 8 metrics, 38 practices in 5
//! categories, 10 roles, 3 artifacts, relations H4/H5/H6 and condition IC1.
//!
//! The same files ship under `crates/core/seed/` for use with the CLI.

use crate::kb::{KnowledgeBase, KnowledgeBaseBuilder, ValidationReport};

pub const METRICS_JSON: &str = include_str!("../seed/metrics.json");
pub const ELEMENTS_JSON: &str = include_str!("../seed/elements.json");
pub const MANIFEST_JSON: &str = include_str!("../seed/manifest.json");
pub const PROFILES_JSON: &str = include_str!("../seed/profiles.json");
pub const RULES_MOCA: &str = include_str!("../seed/rules.moca");

/// Directory holding the seed files in a source checkout.
pub fn seed_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("seed")
}

/// A builder pre-loaded with the seed data files but no rules.
pub fn data_builder(with_manifest: bool) -> KnowledgeBaseBuilder {
    let mut b = KnowledgeBase::builder();
    b.add_data_source(METRICS_JSON, Some("seed/metrics.json"));
    b.add_data_source(ELEMENTS_JSON, Some("seed/elements.json"));
    b.add_data_source(PROFILES_JSON, Some("seed/profiles.json"));
    if with_manifest {
        b.add_data_source(MANIFEST_JSON, Some("seed/manifest.json"));
    }
    b
}

pub fn try_knowledge_base() -> Result<KnowledgeBase, ValidationReport> {
    let mut b = data_builder(true);
    b.add_rule_source(RULES_MOCA, Some("seed/rules.moca"));
    b.build()
}

/// The seed knowledge base. Panics only if the bundled files are broken.
pub fn knowledge_base() -> KnowledgeBase {
    try_knowledge_base().expect("bundled seed knowledge base is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{codes, validate_completeness};
    use crate::model::ElementKind;

    #[test]
    fn seed_contents() {
        let kb = knowledge_base();
        assert_eq!(kb.metrics().len(), 8);
        assert_eq!(kb.count_kind(ElementKind::Practice), 38);
        assert_eq!(kb.count_kind(ElementKind::Role), 10);
        assert_eq!(kb.practice_categories().len(), 5);
        let rules: Vec<_> = kb.rules().map(|r| r.id.as_str()).collect();
        assert_eq!(rules, vec!["H4", "H5", "H6"]);
        assert_eq!(kb.condition("IC1").unwrap().description, "manager attends the meeting");
        assert!(kb.load_report().is_empty());
        assert_eq!(kb.profile("team_a").unwrap().values.len(), 3);
    }

    #[test]
    fn seed_completeness() {
        let kb = knowledge_base();
        let report = validate_completeness(&kb);
        assert!(!report.has_errors());
        assert_eq!(kb.matrix_domain_size(), 384);
        // Oracle: enumerate the metric x eligible-element cross product and
        // subtract the cells any rule targets.
        let mut uncovered = 0;
        for m in kb.metrics() {
            for e in kb.elements().filter(|e| matches!(e.kind, ElementKind::Practice | ElementKind::Role)) {
                if !kb.rules().any(|r| r.metric == m.id && r.element == e.id) {
                    uncovered += 1;
                }
            }
        }
        assert_eq!(uncovered, 381);
        assert_eq!(report.with_code(codes::UNCOVERED_CELL).count(), uncovered);
    }

    #[test]
    fn seed_files_on_disk_match_embedded() {
        let kb = crate::kb::load(&[seed_dir()]).unwrap();
        let embedded = knowledge_base();
        assert_eq!(kb.metrics(), embedded.metrics());
        assert_eq!(kb.rules().count(), embedded.rules().count());
    }
}
