//! Random knowledge bases, random rule documents, document corruption, and
//! a brute-force evaluator that works on the generated data directly.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use moca_core::dsl::{self, Declaration, RuleDocument};
use moca_core::model::{
    AgileElement, ConditionTerm, CultureLevel, CulturalMetric, ElementKind, ImpactCondition,
    ImpactRule, Level, MetricSource, Sign, StatedLevel,
};
use moca_core::KnowledgeBase;
use proptest::prelude::*;

pub const FLAGS: [&str; 2] = ["f0", "f1"];

/// Value picked to represent each level under the default 33/67 bands.
pub fn representative(level: Level) -> i64 {
    match level {
        Level::Low => 10,
        Level::Medium => 50,
        Level::High => 90,
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedKb {
    pub metrics: Vec<String>,
    pub elements: Vec<String>,
    pub conditions: Vec<ImpactCondition>,
    pub rules: Vec<ImpactRule>,
}

impl GeneratedKb {
    pub fn metric_defs(&self) -> Vec<CulturalMetric> {
        self.metrics
            .iter()
            .map(|id| CulturalMetric {
                id: id.clone(),
                name: id.clone(),
                level: CultureLevel::National,
                low_pole: "low".into(),
                high_pole: "high".into(),
                source: MetricSource::Hofstede,
            })
            .collect()
    }

    pub fn element_defs(&self) -> Vec<AgileElement> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let practice = i % 2 == 0;
                AgileElement {
                    id: id.clone(),
                    name: id.clone(),
                    kind: if practice { ElementKind::Practice } else { ElementKind::Role },
                    category: practice.then(|| "General".to_string()),
                    source_methods: vec![],
                }
            })
            .collect()
    }

    pub fn build_with_rules(&self, rules: Vec<ImpactRule>) -> KnowledgeBase {
        KnowledgeBase::from_parts(
            self.metric_defs(),
            self.element_defs(),
            self.conditions.clone(),
            rules,
            None,
        )
        .expect("generated knowledge base is valid")
    }

    pub fn build(&self) -> KnowledgeBase {
        self.build_with_rules(self.rules.clone())
    }
}

fn arb_term(n_metrics: usize) -> impl Strategy<Value = ConditionTerm> {
    prop_oneof![
        (0..FLAGS.len()).prop_map(|i| ConditionTerm::Flag(FLAGS[i].to_string())),
        (0..n_metrics, any::<bool>()).prop_map(|(m, high)| ConditionTerm::Metric {
            metric: format!("M{m}"),
            level: if high { StatedLevel::High } else { StatedLevel::Low },
        }),
    ]
}

fn arb_level() -> impl Strategy<Value = StatedLevel> {
    prop_oneof![Just(StatedLevel::Low), Just(StatedLevel::High)]
}

fn arb_sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Positive), Just(Sign::Negative)]
}

/// Knowledge bases with 1..=max_metrics metrics, 1..=4 elements, up to 3
/// conditions and up to `max_rules` rules with distinct
/// (metric, element, condition) triples.
pub fn arb_kb(max_metrics: usize, max_rules: usize) -> impl Strategy<Value = GeneratedKb> {
    (1..=max_metrics, 1..=4usize, 0..=3usize).prop_flat_map(move |(nm, ne, nc)| {
        let conditions = prop::collection::vec(prop::collection::vec(arb_term(nm), 1..=3), nc);
        let rules = prop::collection::vec(
            (0..nm, 0..ne, prop::option::of(0..nc.max(1)), arb_level(), arb_sign()),
            0..=max_rules,
        );
        (Just((nm, ne, nc)), conditions, rules, any::<u64>())
    })
    .prop_map(|((nm, ne, nc), conditions, raw_rules, salt)| {
        let conditions: Vec<ImpactCondition> = conditions
            .into_iter()
            .enumerate()
            .map(|(i, terms)| ImpactCondition {
                id: format!("C{i}"),
                description: format!("condition {i}"),
                terms,
            })
            .collect();
        let mut seen = HashSet::new();
        let mut rules = Vec::new();
        for (m, e, c, stated_level, sign) in raw_rules {
            let condition = c.filter(|_| nc > 0).map(|c| format!("C{c}"));
            if !seen.insert((m, e, condition.clone())) {
                continue;
            }
            // Ids deliberately not in declaration order.
            let id = format!("R{:02}", (rules.len() as u64 * 7 + salt % 13) % 97);
            let id = if rules.iter().any(|r: &ImpactRule| r.id == id) {
                format!("{id}_{}", rules.len())
            } else {
                id
            };
            rules.push(ImpactRule {
                id,
                title: None,
                condition,
                metric: format!("M{m}"),
                stated_level,
                sign,
                element: format!("E{e}"),
                rationale: None,
            });
        }
        GeneratedKb {
            metrics: (0..nm).map(|i| format!("M{i}")).collect(),
            elements: (0..ne).map(|i| format!("E{i}")).collect(),
            conditions,
            rules,
        }
    })
}

/// Per-element result of the brute-force evaluator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleResult {
    pub score: i32,
    pub fired: BTreeSet<String>,
    pub gated: BTreeSet<String>,
}

fn oracle_value(stated: StatedLevel, sign: Sign, level: Level) -> Option<i32> {
    use Level as L;
    use Sign::*;
    use StatedLevel as S;
    match (stated, sign, level) {
        (_, _, L::Medium) => None,
        (S::High, Positive, L::High) => Some(1),
        (S::High, Positive, L::Low) => Some(-1),
        (S::High, Negative, L::High) => Some(-1),
        (S::High, Negative, L::Low) => Some(1),
        (S::Low, Positive, L::Low) => Some(1),
        (S::Low, Positive, L::High) => Some(-1),
        (S::Low, Negative, L::Low) => Some(-1),
        (S::Low, Negative, L::High) => Some(1),
    }
}

/// Direct case analysis over the generated data, with every metric present
/// at the given level.
pub fn brute_force(
    g: &GeneratedKb,
    levels: &BTreeMap<String, Level>,
    flags: &BTreeSet<String>,
) -> BTreeMap<String, OracleResult> {
    let mut out: BTreeMap<String, OracleResult> =
        g.elements.iter().map(|e| (e.clone(), OracleResult::default())).collect();
    for rule in &g.rules {
        let entry = out.get_mut(&rule.element).unwrap();
        let holds = match &rule.condition {
            None => true,
            Some(cid) => {
                let cond = g.conditions.iter().find(|c| &c.id == cid).unwrap();
                cond.terms.iter().all(|t| match t {
                    ConditionTerm::Flag(f) => flags.contains(f),
                    ConditionTerm::Metric { metric, level } => {
                        levels[metric] == Level::from(*level)
                    }
                })
            }
        };
        if !holds {
            entry.gated.insert(rule.id.clone());
            continue;
        }
        if let Some(v) = oracle_value(rule.stated_level, rule.sign, levels[&rule.metric]) {
            entry.score += v;
            entry.fired.insert(rule.id.clone());
        }
    }
    out
}

/// All 3^n level assignments over the given metrics.
pub fn all_level_assignments(metrics: &[String]) -> Vec<BTreeMap<String, Level>> {
    let mut out = vec![BTreeMap::new()];
    for m in metrics {
        out = out
            .into_iter()
            .flat_map(|a| {
                [Level::Low, Level::Medium, Level::High].into_iter().map(move |l| {
                    let mut a = a.clone();
                    a.insert(m.clone(), l);
                    a
                })
            })
            .collect();
    }
    out
}

pub fn all_flag_sets() -> Vec<BTreeSet<String>> {
    (0..1u32 << FLAGS.len())
        .map(|mask| {
            FLAGS
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, f)| f.to_string())
                .collect()
        })
        .collect()
}

pub fn arb_ident() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_]{0,8}".prop_filter("not a keyword", |s| !dsl::is_keyword(s))
}

pub fn arb_text() -> impl Strategy<Value = String> {
    "[^\"\r\n]{0,24}"
}

fn arb_rule_decl() -> impl Strategy<Value = Declaration> {
    (
        arb_ident(),
        prop::option::of(arb_text()),
        prop::option::of(arb_ident()),
        arb_level(),
        arb_ident(),
        arb_ident(),
        arb_sign(),
        prop::option::of(arb_text()),
    )
        .prop_map(|(id, title, condition, stated_level, metric, element, sign, rationale)| {
            Declaration::Rule(ImpactRule {
                id,
                title,
                condition,
                metric,
                stated_level,
                sign,
                element,
                rationale,
            })
        })
}

fn arb_doc_term() -> impl Strategy<Value = ConditionTerm> {
    prop_oneof![
        arb_ident().prop_map(ConditionTerm::Flag),
        (arb_ident(), arb_level()).prop_map(|(metric, level)| ConditionTerm::Metric { metric, level }),
    ]
}

fn arb_condition_decl() -> impl Strategy<Value = Declaration> {
    (arb_ident(), arb_text(), prop::collection::vec(arb_doc_term(), 1..4)).prop_map(
        |(id, description, terms)| {
            Declaration::Condition(ImpactCondition {
                id,
                description,
                terms,
            })
        },
    )
}

pub fn arb_declaration() -> impl Strategy<Value = Declaration> {
    prop_oneof![
        3 => arb_rule_decl(),
        2 => arb_condition_decl(),
        1 => "[^\r\n]{0,20}".prop_map(Declaration::Comment),
    ]
}

pub fn arb_document() -> impl Strategy<Value = RuleDocument> {
    prop::collection::vec(arb_declaration(), 0..12).prop_map(RuleDocument::from_declarations)
}

/// Ways of breaking a single declaration line that always leave it
/// ungrammatical.
#[derive(Debug, Clone, Copy)]
pub enum Corruption {
    DropMetric,
    DropImpacts,
    BadSign,
    DropColon,
    UnbalancedQuote,
    LowercaseKeyword,
    StrayCharacter,
    TruncateAfterIf,
    DropDescription,
    DanglingAnd,
}

pub const CORRUPTIONS: [Corruption; 10] = [
    Corruption::DropMetric,
    Corruption::DropImpacts,
    Corruption::BadSign,
    Corruption::DropColon,
    Corruption::UnbalancedQuote,
    Corruption::LowercaseKeyword,
    Corruption::StrayCharacter,
    Corruption::TruncateAfterIf,
    Corruption::DropDescription,
    Corruption::DanglingAnd,
];

fn quoted(s: &Option<String>) -> String {
    s.as_ref().map(|t| format!(" \"{t}\"")).unwrap_or_default()
}

/// Renders `decl` with a defect, or `None` for comments.
pub fn corrupt_line(decl: &Declaration, how: Corruption) -> Option<String> {
    match decl {
        Declaration::Comment(_) => None,
        Declaration::Rule(r) => {
            let cond = r
                .condition
                .as_ref()
                .map(|c| format!(" IF {c} THEN"))
                .unwrap_or_default();
            let because = r
                .rationale
                .as_ref()
                .map(|t| format!(" BECAUSE \"{t}\""))
                .unwrap_or_default();
            let lvl = r.stated_level.keyword();
            let sign = r.sign.keyword();
            let (id, title, m, e) = (&r.id, quoted(&r.title), &r.metric, &r.element);
            Some(match how {
                Corruption::DropMetric => format!("RULE {id}{title}:{cond} {lvl} IMPACTS {e} {sign}{because}"),
                Corruption::DropImpacts => format!("RULE {id}{title}:{cond} {lvl} {m} {e} {sign}{because}"),
                Corruption::BadSign => format!("RULE {id}{title}:{cond} {lvl} {m} IMPACTS {e} NEUTRAL{because}"),
                Corruption::DropColon => format!("RULE {id}{title}{cond} {lvl} {m} IMPACTS {e} {sign}{because}"),
                Corruption::UnbalancedQuote => format!("RULE {id}{title} \"{cond} {lvl} {m} IMPACTS {e} {sign}{because}"),
                Corruption::LowercaseKeyword => format!("RULE {id}{title}:{cond} {lvl} {m} impacts {e} {sign}{because}"),
                Corruption::StrayCharacter => format!("$RULE {id}{title}:{cond} {lvl} {m} IMPACTS {e} {sign}{because}"),
                Corruption::TruncateAfterIf => format!("RULE {id}{title}: IF"),
                Corruption::DropDescription | Corruption::DanglingAnd => {
                    format!("RULE {id}{title}:{cond} {lvl} {m} IMPACTS {e} {sign} AND{because}")
                }
            })
        }
        Declaration::Condition(c) => {
            let body = dsl::serialize_condition(&ImpactCondition {
                id: c.id.clone(),
                description: String::new(),
                terms: c.terms.clone(),
            })
            .split_once("\"\":")
            .map(|(_, b)| b.to_string())
            .unwrap();
            let (id, d) = (&c.id, &c.description);
            Some(match how {
                Corruption::DropDescription | Corruption::DropMetric => format!("CONDITION {id}:{body}"),
                Corruption::DropColon => format!("CONDITION {id} \"{d}\"{body}"),
                Corruption::UnbalancedQuote => format!("CONDITION {id} \"{d}:{body}"),
                Corruption::StrayCharacter => format!("CONDITION {id} \"{d}\":{body} %"),
                Corruption::LowercaseKeyword => format!("condition {id} \"{d}\":{body}"),
                Corruption::DanglingAnd | Corruption::TruncateAfterIf => {
                    format!("CONDITION {id} \"{d}\":{body} AND")
                }
                Corruption::DropImpacts | Corruption::BadSign => {
                    format!("CONDITION {id} \"{d}\":{body} OR FLAG x")
                }
            })
        }
    }
}

/// Every reported position must point into `source` (column may be one
/// past the end of the line).
pub fn errors_positioned(source: &str, errors: &[dsl::ParseError]) -> bool {
    let lines: Vec<&str> = source.split('\n').collect();
    !errors.is_empty()
        && errors.iter().all(|e| {
            e.line >= 1
                && e.line <= lines.len()
                && e.column >= 1
                && e.column <= lines[e.line - 1].trim_end_matches('\r').chars().count() + 1
        })
}
