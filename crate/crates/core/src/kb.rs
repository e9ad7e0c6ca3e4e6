//! Knowledge-base assembly and validation.
//!
//! A knowledge base is built from JSON data files (metrics, elements,
//! manifest, profiles) and `.moca` rule files. Every reference is resolved
//! at build time; the resulting [`KnowledgeBase`] is immutable.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dsl::{self, Declaration, RuleDocument};
use crate::model::{
    is_valid_metric_id, AgileElement, CulturalMetric, CulturalProfile, ElementKind,
    ImpactCondition, ImpactRule, MetricValue,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Where an entity was declared.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl Origin {
    pub fn file(path: impl Into<String>) -> Self {
        Origin {
            file: Some(path.into()),
            line: None,
            column: None,
        }
    }

    pub fn at(path: Option<&str>, line: usize, column: Option<usize>) -> Self {
        Origin {
            file: path.map(str::to_string),
            line: Some(line),
            column,
        }
    }

    fn is_empty(&self) -> bool {
        self.file.is_none() && self.line.is_none()
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file.as_deref().unwrap_or("<memory>"))?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
            if let Some(col) = self.column {
                write!(f, ":{col}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub entity_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}: {}", self.severity, self.code, self.entity_id, self.message)?;
        if let Some(origin) = &self.origin {
            write!(f, " ({origin})")?;
        }
        Ok(())
    }
}

pub mod codes {
    pub const IO: &str = "io_error";
    pub const PARSE: &str = "parse_error";
    pub const DATA_FORMAT: &str = "data_format";
    pub const INVALID_ID: &str = "invalid_id";
    pub const DUPLICATE_METRIC: &str = "duplicate_metric_id";
    pub const DUPLICATE_ELEMENT: &str = "duplicate_element_id";
    pub const DUPLICATE_CONDITION: &str = "duplicate_condition_id";
    pub const DUPLICATE_RULE: &str = "duplicate_rule_id";
    pub const DUPLICATE_TRIPLE: &str = "duplicate_rule_triple";
    pub const DUPLICATE_PROFILE: &str = "duplicate_profile";
    pub const SOURCE_LEVEL: &str = "source_level_mismatch";
    pub const MISSING_CATEGORY: &str = "missing_practice_category";
    pub const EMPTY_CONDITION: &str = "empty_condition";
    pub const DANGLING_METRIC: &str = "dangling_metric_reference";
    pub const DANGLING_ELEMENT: &str = "dangling_element_reference";
    pub const DANGLING_CONDITION: &str = "dangling_condition_reference";
    pub const VALUE_RANGE: &str = "value_out_of_range";
    pub const MULTIPLE_MANIFESTS: &str = "multiple_manifests";
    pub const INELIGIBLE_TARGET: &str = "ineligible_rule_target";
    pub const UNUSED_CONDITION: &str = "unused_condition";
    pub const MANIFEST_MISMATCH: &str = "manifest_mismatch";
    pub const UNCOVERED_CELL: &str = "uncovered_cell";
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn push(
        &mut self,
        severity: Severity,
        code: &str,
        entity_id: impl Into<String>,
        message: impl Into<String>,
        origin: Option<&Origin>,
    ) {
        self.findings.push(Finding {
            severity,
            code: code.to_string(),
            message: message.into(),
            entity_id: entity_id.into(),
            origin: origin.filter(|o| !o.is_empty()).cloned(),
        });
    }

    fn error(&mut self, code: &str, id: impl Into<String>, msg: impl Into<String>, origin: &Origin) {
        self.push(Severity::Error, code, id, msg, Some(origin));
    }

    fn warning(&mut self, code: &str, id: impl Into<String>, msg: impl Into<String>, origin: &Origin) {
        self.push(Severity::Warning, code, id, msg, Some(origin));
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn with_code<'a>(&'a self, code: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.findings.iter().filter(move |f| f.code == code)
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Entity counts a knowledge base is expected to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedCounts {
    pub metrics: usize,
    pub practices: usize,
    pub roles: usize,
    pub practice_categories: usize,
}

/// Profile as written in a profiles file, before range checking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRecord {
    pub name: String,
    #[serde(default)]
    pub values: BTreeMap<String, i64>,
}

impl From<&CulturalProfile> for ProfileRecord {
    fn from(p: &CulturalProfile) -> Self {
        ProfileRecord {
            name: p.name.clone(),
            values: p
                .values
                .iter()
                .map(|(k, v)| (k.clone(), v.get() as i64))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    metrics: Vec<CulturalMetric>,
    elements: BTreeMap<String, AgileElement>,
    conditions: BTreeMap<String, ImpactCondition>,
    // sorted by id
    rules: Vec<ImpactRule>,
    rule_index: BTreeMap<String, usize>,
    profiles: BTreeMap<String, CulturalProfile>,
    manifest: Option<ExpectedCounts>,
    // element id -> positions in `rules`, ascending
    by_element: BTreeMap<String, Vec<usize>>,
    origins: BTreeMap<String, Origin>,
    load_report: ValidationReport,
}

impl KnowledgeBase {
    pub fn builder() -> KnowledgeBaseBuilder {
        KnowledgeBaseBuilder::default()
    }

    /// Assembles a knowledge base from in-memory parts.
    pub fn from_parts(
        metrics: Vec<CulturalMetric>,
        elements: Vec<AgileElement>,
        conditions: Vec<ImpactCondition>,
        rules: Vec<ImpactRule>,
        manifest: Option<ExpectedCounts>,
    ) -> Result<KnowledgeBase, ValidationReport> {
        let mut b = KnowledgeBase::builder();
        metrics.into_iter().for_each(|m| b.add_metric(m, Origin::default()));
        elements.into_iter().for_each(|e| b.add_element(e, Origin::default()));
        conditions
            .into_iter()
            .for_each(|c| b.add_condition(c, Origin::default()));
        rules.into_iter().for_each(|r| b.add_rule(r, Origin::default()));
        if let Some(m) = manifest {
            b.add_manifest(m, Origin::default());
        }
        b.build()
    }

    /// Metrics in declaration order.
    pub fn metrics(&self) -> &[CulturalMetric] {
        &self.metrics
    }

    pub fn metric(&self, id: &str) -> Option<&CulturalMetric> {
        self.metrics.iter().find(|m| m.id == id)
    }

    /// Elements ordered by id.
    pub fn elements(&self) -> impl Iterator<Item = &AgileElement> {
        self.elements.values()
    }

    pub fn element(&self, id: &str) -> Option<&AgileElement> {
        self.elements.get(id)
    }

    /// Practices and roles, ordered by id.
    pub fn rule_eligible_elements(&self) -> impl Iterator<Item = &AgileElement> {
        self.elements.values().filter(|e| e.kind.is_rule_eligible())
    }

    pub fn conditions(&self) -> impl Iterator<Item = &ImpactCondition> {
        self.conditions.values()
    }

    pub fn condition(&self, id: &str) -> Option<&ImpactCondition> {
        self.conditions.get(id)
    }

    /// Rules ordered by id.
    pub fn rules(&self) -> impl Iterator<Item = &ImpactRule> {
        self.rules.iter()
    }

    pub fn rule(&self, id: &str) -> Option<&ImpactRule> {
        self.rule_index.get(id).map(|&i| &self.rules[i])
    }

    /// Rules targeting `element`, ordered by rule id.
    pub fn rules_for<'a>(&'a self, element: &str) -> impl Iterator<Item = &'a ImpactRule> + 'a {
        self.by_element
            .get(element)
            .into_iter()
            .flatten()
            .map(move |&i| &self.rules[i])
    }

    pub fn profiles(&self) -> impl Iterator<Item = &CulturalProfile> {
        self.profiles.values()
    }

    pub fn profile(&self, name: &str) -> Option<&CulturalProfile> {
        self.profiles.get(name)
    }

    pub fn manifest(&self) -> Option<&ExpectedCounts> {
        self.manifest.as_ref()
    }

    /// Declaration site of a rule or condition, when known.
    pub fn origin_of(&self, id: &str) -> Option<&Origin> {
        self.origins.get(id)
    }

    /// Warnings raised while the knowledge base was assembled.
    pub fn load_report(&self) -> &ValidationReport {
        &self.load_report
    }

    /// `|metrics| x |practices and roles|`, regardless of rule coverage.
    pub fn matrix_domain_size(&self) -> usize {
        self.metrics.len() * self.rule_eligible_elements().count()
    }

    pub fn count_kind(&self, kind: ElementKind) -> usize {
        self.elements.values().filter(|e| e.kind == kind).count()
    }

    pub fn practice_categories(&self) -> BTreeSet<&str> {
        self.elements
            .values()
            .filter(|e| e.kind == ElementKind::Practice)
            .filter_map(|e| e.category.as_deref())
            .collect()
    }

    /// Checks a profile record against the declared metrics.
    pub fn validate_profile(
        &self,
        record: &ProfileRecord,
    ) -> Result<CulturalProfile, ValidationReport> {
        let ids: HashSet<&str> = self.metrics.iter().map(|m| m.id.as_str()).collect();
        let mut report = ValidationReport::default();
        let profile = check_profile(record, &ids, &Origin::default(), &mut report);
        if report.has_errors() {
            Err(report)
        } else {
            Ok(profile)
        }
    }

    /// The knowledge base's rules and conditions as a rule document:
    /// conditions first, then rules, each ordered by id.
    pub fn to_document(&self) -> RuleDocument {
        RuleDocument::from_declarations(
            self.conditions
                .values()
                .cloned()
                .map(Declaration::Condition)
                .chain(self.rules.iter().cloned().map(Declaration::Rule)),
        )
    }
}

fn check_profile(
    record: &ProfileRecord,
    metric_ids: &HashSet<&str>,
    origin: &Origin,
    report: &mut ValidationReport,
) -> CulturalProfile {
    let mut profile = CulturalProfile::new(record.name.clone());
    for (metric, &raw) in &record.values {
        if !metric_ids.contains(metric.as_str()) {
            report.error(
                codes::DANGLING_METRIC,
                &record.name,
                format!("profile value for undeclared metric `{metric}`"),
                origin,
            );
            continue;
        }
        match MetricValue::new(raw) {
            Ok(v) => {
                profile.values.insert(metric.clone(), v);
            }
            Err(e) => report.error(
                codes::VALUE_RANGE,
                &record.name,
                format!("{metric}: {e}"),
                origin,
            ),
        }
    }
    profile
}

/// Collects entities from any number of sources, then validates them as a
/// whole in [`KnowledgeBaseBuilder::build`].
#[derive(Debug, Default)]
pub struct KnowledgeBaseBuilder {
    metrics: Vec<(CulturalMetric, Origin)>,
    elements: Vec<(AgileElement, Origin)>,
    conditions: Vec<(ImpactCondition, Origin)>,
    rules: Vec<(ImpactRule, Origin)>,
    profiles: Vec<(ProfileRecord, Origin)>,
    manifests: Vec<(ExpectedCounts, Origin)>,
    report: ValidationReport,
}

impl KnowledgeBaseBuilder {
    pub fn add_metric(&mut self, m: CulturalMetric, origin: Origin) {
        self.metrics.push((m, origin));
    }

    pub fn add_element(&mut self, e: AgileElement, origin: Origin) {
        self.elements.push((e, origin));
    }

    pub fn add_condition(&mut self, c: ImpactCondition, origin: Origin) {
        self.conditions.push((c, origin));
    }

    pub fn add_rule(&mut self, r: ImpactRule, origin: Origin) {
        self.rules.push((r, origin));
    }

    pub fn add_profile(&mut self, p: ProfileRecord, origin: Origin) {
        self.profiles.push((p, origin));
    }

    pub fn add_manifest(&mut self, m: ExpectedCounts, origin: Origin) {
        self.manifests.push((m, origin));
    }

    pub fn add_document(&mut self, doc: &RuleDocument, file: Option<&str>) {
        for decl in &doc.declarations {
            let origin = Origin::at(file, decl.line, None);
            match &decl.node {
                Declaration::Rule(r) => self.add_rule(r.clone(), origin),
                Declaration::Condition(c) => self.add_condition(c.clone(), origin),
                Declaration::Comment(_) => {}
            }
        }
    }

    /// Parses rule text and adds its declarations; parse errors become
    /// findings.
    pub fn add_rule_source(&mut self, source: &str, file: Option<&str>) {
        match dsl::parse(source) {
            Ok(doc) => self.add_document(&doc, file),
            Err(errors) => {
                let entity = file.unwrap_or("<memory>").to_string();
                for e in errors {
                    let origin = Origin::at(file, e.line, Some(e.column));
                    let mut message = e.message.clone();
                    if !e.expected.is_empty() {
                        message.push_str(&format!(" (expected {})", e.expected.join(" or ")));
                    }
                    self.report.error(codes::PARSE, entity.clone(), message, &origin);
                }
            }
        }
    }

    /// Adds a JSON data file. The file type is recognised from its
    /// structure: an object is a manifest; an array of objects with `kind`
    /// holds elements, with `low_pole`/`source` metrics, with `values`
    /// profiles. An empty array contributes nothing.
    pub fn add_data_source(&mut self, text: &str, file: Option<&str>) {
        let entity = file.unwrap_or("<memory>").to_string();
        let fail = |report: &mut ValidationReport, e: serde_json::Error| {
            let origin = Origin::at(file, e.line(), Some(e.column()));
            report.error(codes::DATA_FORMAT, entity.clone(), e.to_string(), &origin);
        };
        let value: Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(e) => return fail(&mut self.report, e),
        };
        let origin = Origin {
            file: file.map(str::to_string),
            ..Origin::default()
        };
        let kind = match &value {
            Value::Object(_) => Some("manifest"),
            Value::Array(items) if items.is_empty() => return,
            Value::Array(items) => match &items[0] {
                Value::Object(o) if o.contains_key("kind") => Some("elements"),
                Value::Object(o) if o.contains_key("low_pole") || o.contains_key("source") => {
                    Some("metrics")
                }
                Value::Object(o) if o.contains_key("values") => Some("profiles"),
                _ => None,
            },
            _ => None,
        };
        // Re-parse from text so serde errors carry line/column.
        match kind {
            Some("manifest") => match serde_json::from_str::<ExpectedCounts>(text) {
                Ok(m) => self.add_manifest(m, origin),
                Err(e) => fail(&mut self.report, e),
            },
            Some("elements") => match serde_json::from_str::<Vec<AgileElement>>(text) {
                Ok(list) => list
                    .into_iter()
                    .for_each(|e| self.add_element(e, origin.clone())),
                Err(e) => fail(&mut self.report, e),
            },
            Some("metrics") => match serde_json::from_str::<Vec<CulturalMetric>>(text) {
                Ok(list) => list
                    .into_iter()
                    .for_each(|m| self.add_metric(m, origin.clone())),
                Err(e) => fail(&mut self.report, e),
            },
            Some("profiles") => match serde_json::from_str::<Vec<ProfileRecord>>(text) {
                Ok(list) => list
                    .into_iter()
                    .for_each(|p| self.add_profile(p, origin.clone())),
                Err(e) => fail(&mut self.report, e),
            },
            _ => self.report.error(
                codes::DATA_FORMAT,
                entity.clone(),
                "unrecognised data file: expected metrics, elements, profiles or manifest",
                &origin,
            ),
        }
    }

    /// Reads one file, dispatching on its extension.
    pub fn add_file(&mut self, path: &Path) {
        let name = path.display().to_string();
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                self.report
                    .error(codes::IO, name.clone(), e.to_string(), &Origin::file(&name));
                return;
            }
        };
        match path.extension().and_then(|e| e.to_str()) {
            Some("moca") => self.add_rule_source(&text, Some(&name)),
            Some("json") => self.add_data_source(&text, Some(&name)),
            _ => self.report.error(
                codes::DATA_FORMAT,
                name.clone(),
                "unsupported file extension (expected .json or .moca)",
                &Origin::file(&name),
            ),
        }
    }

    pub fn build(self) -> Result<KnowledgeBase, ValidationReport> {
        let (kb, report) = self.build_with_report();
        kb.ok_or(report)
    }

    /// Validates everything collected. Returns the knowledge base when no
    /// Error finding was raised, together with all findings.
    pub fn build_with_report(self) -> (Option<KnowledgeBase>, ValidationReport) {
        let mut report = self.report;

        let mut metrics: Vec<CulturalMetric> = Vec::new();
        let mut metric_ids: HashSet<String> = HashSet::new();
        for (m, origin) in self.metrics {
            if !is_valid_metric_id(&m.id) {
                report.error(
                    codes::INVALID_ID,
                    &m.id,
                    "metric id must match [A-Z][A-Z0-9_]*",
                    &origin,
                );
            }
            if m.level != m.source.expected_level() {
                report.error(
                    codes::SOURCE_LEVEL,
                    &m.id,
                    format!("{:?} metrics must have level {:?}", m.source, m.source.expected_level()),
                    &origin,
                );
            }
            if !metric_ids.insert(m.id.clone()) {
                report.error(codes::DUPLICATE_METRIC, &m.id, "duplicate metric id", &origin);
                continue;
            }
            metrics.push(m);
        }

        let mut elements: BTreeMap<String, AgileElement> = BTreeMap::new();
        for (e, origin) in self.elements {
            if !dsl::is_identifier(&e.id) {
                report.error(codes::INVALID_ID, &e.id, "element id is not an identifier", &origin);
            }
            if e.kind == ElementKind::Practice && e.category.as_deref().unwrap_or("").is_empty() {
                report.error(
                    codes::MISSING_CATEGORY,
                    &e.id,
                    "practices must name a category",
                    &origin,
                );
            }
            if elements.contains_key(&e.id) {
                report.error(codes::DUPLICATE_ELEMENT, &e.id, "duplicate element id", &origin);
                continue;
            }
            elements.insert(e.id.clone(), e);
        }

        let mut origins: BTreeMap<String, Origin> = BTreeMap::new();
        let mut conditions: BTreeMap<String, ImpactCondition> = BTreeMap::new();
        for (c, origin) in self.conditions {
            if c.terms.is_empty() {
                report.error(codes::EMPTY_CONDITION, &c.id, "condition has no terms", &origin);
            }
            for metric in c.metric_refs() {
                if !metric_ids.contains(metric) {
                    report.error(
                        codes::DANGLING_METRIC,
                        &c.id,
                        format!("dangling metric reference `{metric}`"),
                        &origin,
                    );
                }
            }
            if conditions.contains_key(&c.id) {
                report.error(codes::DUPLICATE_CONDITION, &c.id, "duplicate condition id", &origin);
                continue;
            }
            origins.insert(c.id.clone(), origin);
            conditions.insert(c.id.clone(), c);
        }

        let mut rules: BTreeMap<String, ImpactRule> = BTreeMap::new();
        let mut triples: HashSet<(String, String, Option<String>)> = HashSet::new();
        let mut used_conditions: HashSet<String> = HashSet::new();
        for (r, origin) in self.rules {
            if rules.contains_key(&r.id) {
                report.error(codes::DUPLICATE_RULE, &r.id, "duplicate rule id", &origin);
                continue;
            }
            if !metric_ids.contains(&r.metric) {
                report.error(
                    codes::DANGLING_METRIC,
                    &r.id,
                    format!("dangling metric reference `{}`", r.metric),
                    &origin,
                );
            }
            match elements.get(&r.element) {
                None => report.error(
                    codes::DANGLING_ELEMENT,
                    &r.id,
                    format!("dangling element reference `{}`", r.element),
                    &origin,
                ),
                Some(e) if !e.kind.is_rule_eligible() => report.warning(
                    codes::INELIGIBLE_TARGET,
                    &r.id,
                    format!(
                        "rule targets {:?} `{}`, which is outside the impact matrix",
                        e.kind, e.id
                    ),
                    &origin,
                ),
                Some(_) => {}
            }
            if let Some(cond) = &r.condition {
                used_conditions.insert(cond.clone());
                if !conditions.contains_key(cond) {
                    report.error(
                        codes::DANGLING_CONDITION,
                        &r.id,
                        format!("dangling condition reference `{cond}`"),
                        &origin,
                    );
                }
            }
            let triple = (r.metric.clone(), r.element.clone(), r.condition.clone());
            if !triples.insert(triple) {
                report.error(
                    codes::DUPLICATE_TRIPLE,
                    &r.id,
                    format!(
                        "another rule already relates {} to {} under the same condition",
                        r.metric, r.element
                    ),
                    &origin,
                );
            }
            origins.insert(r.id.clone(), origin);
            rules.insert(r.id.clone(), r);
        }

        for (id, _) in conditions.iter().filter(|(id, _)| !used_conditions.contains(*id)) {
            report.warning(
                codes::UNUSED_CONDITION,
                id,
                "condition is not referenced by any rule",
                &origins[id],
            );
        }

        let id_refs: HashSet<&str> = metric_ids.iter().map(String::as_str).collect();
        let mut profiles: BTreeMap<String, CulturalProfile> = BTreeMap::new();
        for (record, origin) in &self.profiles {
            let profile = check_profile(record, &id_refs, origin, &mut report);
            if profiles.contains_key(&record.name) {
                report.error(codes::DUPLICATE_PROFILE, &record.name, "duplicate profile name", origin);
                continue;
            }
            profiles.insert(record.name.clone(), profile);
        }

        let mut manifests = self.manifests.into_iter();
        let manifest = manifests.next().map(|(m, _)| m);
        for (_, origin) in manifests {
            let name = origin.file.clone().unwrap_or_else(|| "manifest".into());
            report.error(codes::MULTIPLE_MANIFESTS, name, "more than one manifest supplied", &origin);
        }

        if report.has_errors() {
            return (None, report);
        }

        let rules: Vec<ImpactRule> = rules.into_values().collect();
        let rule_index = rules.iter().enumerate().map(|(i, r)| (r.id.clone(), i)).collect();
        let mut by_element: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_element.entry(r.element.clone()).or_default().push(i);
        }

        let kb = KnowledgeBase {
            metrics,
            elements,
            conditions,
            rules,
            rule_index,
            profiles,
            manifest,
            by_element,
            origins,
            load_report: report.clone(),
        };
        (Some(kb), report)
    }
}

/// Expands directories into their `.json`/`.moca` files, then sorts and
/// deduplicates so that load order does not depend on argument order.
pub fn expand_paths<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<PathBuf>, ValidationReport> {
    let mut files = BTreeSet::new();
    let mut report = ValidationReport::default();
    for p in paths {
        let p = p.as_ref();
        if p.is_dir() {
            match fs::read_dir(p) {
                Ok(entries) => {
                    for entry in entries.flatten() {
                        let path = entry.path();
                        let ext = path.extension().and_then(|e| e.to_str());
                        if path.is_file() && matches!(ext, Some("json") | Some("moca")) {
                            files.insert(path);
                        }
                    }
                }
                Err(e) => {
                    let name = p.display().to_string();
                    report.error(codes::IO, name.clone(), e.to_string(), &Origin::file(name));
                }
            }
        } else {
            files.insert(p.to_path_buf());
        }
    }
    if report.has_errors() {
        Err(report)
    } else {
        Ok(files.into_iter().collect())
    }
}

/// Loads and validates a knowledge base from files and directories.
pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<KnowledgeBase, ValidationReport> {
    let (kb, report) = load_with_report(paths);
    kb.ok_or(report)
}

pub fn load_with_report<P: AsRef<Path>>(paths: &[P]) -> (Option<KnowledgeBase>, ValidationReport) {
    let files = match expand_paths(paths) {
        Ok(f) => f,
        Err(report) => return (None, report),
    };
    let mut builder = KnowledgeBase::builder();
    for file in &files {
        builder.add_file(file);
    }
    builder.build_with_report()
}

/// Checks manifest counts and reports uncovered matrix cells. Produces no
/// findings when the knowledge base has no manifest.
pub fn validate_completeness(kb: &KnowledgeBase) -> ValidationReport {
    let mut report = ValidationReport::default();
    let Some(manifest) = kb.manifest() else {
        return report;
    };
    let origin = Origin::default();
    let mut check = |what: &str, expected: usize, actual: usize| {
        if expected != actual {
            report.error(
                codes::MANIFEST_MISMATCH,
                what,
                format!("manifest declares {expected} {what}, knowledge base has {actual}"),
                &origin,
            );
        }
    };
    check("metrics", manifest.metrics, kb.metrics().len());
    check("practices", manifest.practices, kb.count_kind(ElementKind::Practice));
    check("roles", manifest.roles, kb.count_kind(ElementKind::Role));
    check(
        "practice_categories",
        manifest.practice_categories,
        kb.practice_categories().len(),
    );
    let expected_domain = manifest.metrics * (manifest.practices + manifest.roles);
    check("matrix cells", expected_domain, kb.matrix_domain_size());

    let covered: HashSet<(&str, &str)> = kb
        .rules()
        .map(|r| (r.metric.as_str(), r.element.as_str()))
        .collect();
    for metric in kb.metrics() {
        for element in kb.rule_eligible_elements() {
            if !covered.contains(&(metric.id.as_str(), element.id.as_str())) {
                report.push(
                    Severity::Warning,
                    codes::UNCOVERED_CELL,
                    format!("{}/{}", metric.id, element.id),
                    "no rule relates this metric to this element",
                    None,
                );
            }
        }
    }
    report
}
