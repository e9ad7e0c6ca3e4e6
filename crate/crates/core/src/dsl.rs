//! Line-oriented rule language (`.moca` files).
//!
//! ```text
//! # comment
//! CONDITION IC1 "manager attends the meeting": FLAG manager_attends_meeting
//! RULE H6 "open communication": IF IC1 THEN HIGH PDI IMPACTS daily_meeting NEGATIVE BECAUSE "..."
//! ```
//!
//! Keywords are uppercase and reserved; identifiers are
//! `letter { letter | digit | "_" }`. Strings are double-quoted with no
//! escapes. Each declaration occupies exactly one line. Reference
//! resolution is left to the knowledge base loader.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ConditionTerm, ImpactCondition, ImpactRule, Sign, StatedLevel};

pub const KEYWORDS: &[&str] = &[
    "RULE", "CONDITION", "IF", "THEN", "HIGH", "LOW", "IMPACTS", "POSITIVE", "NEGATIVE",
    "BECAUSE", "FLAG", "AND",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// True if `s` is a legal, non-reserved identifier.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Declaration {
    Rule(ImpactRule),
    Condition(ImpactCondition),
    /// Text following `#`, without the line terminator.
    Comment(String),
}

/// A node tagged with the 1-based source line it came from.
///
/// Equality ignores the line so that documents compare structurally.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spanned<T> {
    pub node: T,
    pub line: usize,
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T: Eq> Eq for Spanned<T> {}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RuleDocument {
    pub declarations: Vec<Spanned<Declaration>>,
}

impl RuleDocument {
    /// Builds a document from bare declarations, numbering them as if
    /// serialized one per line.
    pub fn from_declarations(decls: impl IntoIterator<Item = Declaration>) -> Self {
        RuleDocument {
            declarations: decls
                .into_iter()
                .enumerate()
                .map(|(i, node)| Spanned { node, line: i + 1 })
                .collect(),
        }
    }

    pub fn rules(&self) -> impl Iterator<Item = &Spanned<Declaration>> {
        self.declarations
            .iter()
            .filter(|d| matches!(d.node, Declaration::Rule(_)))
    }

    pub fn conditions(&self) -> impl Iterator<Item = &Spanned<Declaration>> {
        self.declarations
            .iter()
            .filter(|d| matches!(d.node, Declaration::Condition(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenKind {
    Word(String),
    Str(String),
    Colon,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) if is_keyword(w) => format!("keyword {w}"),
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::Colon => "`:`".to_string(),
        }
    }
}

fn lex_line(text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == ' ' || c == '\t' {
            i += 1;
        } else if c == ':' {
            tokens.push(Token {
                kind: TokenKind::Colon,
                column,
            });
            i += 1;
        } else if c == '"' {
            let start = i + 1;
            let mut end = start;
            while end < chars.len() && chars[end] != '"' {
                end += 1;
            }
            if end == chars.len() {
                return Err(ParseError {
                    line,
                    column,
                    message: "unterminated string".into(),
                    expected: vec!["closing `\"`".into()],
                });
            }
            tokens.push(Token {
                kind: TokenKind::Str(chars[start..end].iter().collect()),
                column,
            });
            i = end + 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Word(chars[start..i].iter().collect()),
                column,
            });
        } else {
            return Err(ParseError {
                line,
                column,
                message: format!("unexpected character `{}`", c.escape_debug()),
                expected: Vec::new(),
            });
        }
    }
    Ok(tokens)
}

struct LineParser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    end_column: usize,
}

impl LineParser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Word(w), .. }) if w == kw)
    }

    fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let (column, found) = match self.peek() {
            Some(t) => (t.column, t.describe()),
            None => (self.end_column, "end of line".to_string()),
        };
        let message = message.into();
        ParseError {
            line: self.line,
            column,
            message: if message.is_empty() {
                format!("unexpected {found}")
            } else {
                format!("{message}, found {found}")
            },
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.peek_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("missing {kw}"), &[kw]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) if is_identifier(w) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) if !is_keyword(w) => Err(self.error(
                format!("invalid {what}: identifiers must start with a letter"),
                &[what],
            )),
            _ => Err(self.error(format!("missing {what}"), &[what])),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Str(s),
                ..
            }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("missing {what}"), &[what])),
        }
    }

    fn opt_string(&mut self) -> Option<String> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Str(s),
                ..
            }) => {
                let s = s.clone();
                self.pos += 1;
                Some(s)
            }
            _ => None,
        }
    }

    fn colon(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Colon,
                ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("missing `:`", &["`:`"])),
        }
    }

    fn level(&mut self) -> Result<StatedLevel, ParseError> {
        if self.peek_keyword("HIGH") {
            self.pos += 1;
            Ok(StatedLevel::High)
        } else if self.peek_keyword("LOW") {
            self.pos += 1;
            Ok(StatedLevel::Low)
        } else {
            Err(self.error("missing level", &["HIGH", "LOW"]))
        }
    }

    fn sign(&mut self) -> Result<Sign, ParseError> {
        if self.peek_keyword("POSITIVE") {
            self.pos += 1;
            Ok(Sign::Positive)
        } else if self.peek_keyword("NEGATIVE") {
            self.pos += 1;
            Ok(Sign::Negative)
        } else {
            Err(self.error("malformed sign", &["POSITIVE", "NEGATIVE"]))
        }
    }

    fn end(&self, expected: &[&str]) -> Result<(), ParseError> {
        if self.peek().is_none() {
            Ok(())
        } else {
            Err(self.error("trailing input", expected))
        }
    }

    fn term(&mut self) -> Result<ConditionTerm, ParseError> {
        if self.peek_keyword("FLAG") {
            self.pos += 1;
            Ok(ConditionTerm::Flag(self.ident("flag identifier")?))
        } else if self.peek_keyword("HIGH") || self.peek_keyword("LOW") {
            let level = self.level()?;
            let metric = self.ident("metric identifier")?;
            Ok(ConditionTerm::Metric { metric, level })
        } else {
            Err(self.error("missing condition term", &["FLAG", "HIGH", "LOW"]))
        }
    }

    fn condition(&mut self) -> Result<ImpactCondition, ParseError> {
        self.keyword("CONDITION")?;
        let id = self.ident("condition identifier")?;
        let description = self.string("condition description")?;
        self.colon()?;
        let mut terms = vec![self.term()?];
        while self.peek_keyword("AND") {
            self.pos += 1;
            terms.push(self.term()?);
        }
        self.end(&["AND", "end of line"])?;
        Ok(ImpactCondition {
            id,
            description,
            terms,
        })
    }

    fn rule(&mut self) -> Result<ImpactRule, ParseError> {
        self.keyword("RULE")?;
        let id = self.ident("rule identifier")?;
        let title = self.opt_string();
        self.colon()?;
        let condition = if self.peek_keyword("IF") {
            self.pos += 1;
            let c = self.ident("condition identifier")?;
            self.keyword("THEN")?;
            Some(c)
        } else {
            None
        };
        let stated_level = match self.level() {
            Ok(l) => l,
            Err(mut e) if condition.is_none() => {
                e.expected.insert(0, "IF".into());
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        let metric = self.ident("metric identifier")?;
        self.keyword("IMPACTS")?;
        let element = self.ident("element identifier")?;
        let sign = self.sign()?;
        let rationale = if self.peek_keyword("BECAUSE") {
            self.pos += 1;
            Some(self.string("rationale string")?)
        } else {
            None
        };
        self.end(&["BECAUSE", "end of line"])?;
        Ok(ImpactRule {
            id,
            title,
            condition,
            metric,
            stated_level,
            sign,
            element,
            rationale,
        })
    }
}

fn parse_line(text: &str, line: usize) -> Result<Option<Declaration>, ParseError> {
    let trimmed = text.trim_start_matches([' ', '\t']);
    if trimmed.trim_end_matches([' ', '\t']).is_empty() {
        return Ok(None);
    }
    if let Some(comment) = trimmed.strip_prefix('#') {
        return Ok(Some(Declaration::Comment(comment.to_string())));
    }
    let tokens = lex_line(text, line)?;
    let mut p = LineParser {
        tokens,
        pos: 0,
        line,
        end_column: text.chars().count() + 1,
    };
    if p.peek_keyword("RULE") {
        p.rule().map(|r| Some(Declaration::Rule(r)))
    } else if p.peek_keyword("CONDITION") {
        p.condition().map(|c| Some(Declaration::Condition(c)))
    } else {
        Err(p.error("unknown keyword", &["RULE", "CONDITION", "`#`"]))
    }
}

/// Parses a rule document. Errors are collected per line; a malformed line
/// does not stop parsing of later lines.
pub fn parse(source: &str) -> Result<RuleDocument, Vec<ParseError>> {
    let mut doc = RuleDocument::default();
    let mut errors = Vec::new();
    for (idx, raw) in source.split('\n').enumerate() {
        let line = idx + 1;
        let text = raw.strip_suffix('\r').unwrap_or(raw);
        match parse_line(text, line) {
            Ok(Some(node)) => doc.declarations.push(Spanned { node, line }),
            Ok(None) => {}
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(errors)
    }
}

fn write_term(out: &mut String, term: &ConditionTerm) {
    match term {
        ConditionTerm::Flag(f) => {
            out.push_str("FLAG ");
            out.push_str(f);
        }
        ConditionTerm::Metric { metric, level } => {
            out.push_str(level.keyword());
            out.push(' ');
            out.push_str(metric);
        }
    }
}

pub fn serialize_condition(c: &ImpactCondition) -> String {
    let mut out = format!("CONDITION {} \"{}\":", c.id, c.description);
    for (i, term) in c.terms.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { " AND " });
        write_term(&mut out, term);
    }
    out
}

pub fn serialize_rule(r: &ImpactRule) -> String {
    let mut out = format!("RULE {}", r.id);
    if let Some(title) = &r.title {
        out.push_str(&format!(" \"{title}\""));
    }
    out.push(':');
    if let Some(cond) = &r.condition {
        out.push_str(&format!(" IF {cond} THEN"));
    }
    out.push_str(&format!(
        " {} {} IMPACTS {} {}",
        r.stated_level.keyword(),
        r.metric,
        r.element,
        r.sign.keyword()
    ));
    if let Some(rationale) = &r.rationale {
        out.push_str(&format!(" BECAUSE \"{rationale}\""));
    }
    out
}

/// Canonical text form: one declaration per line, single spaces, LF endings.
pub fn serialize(doc: &RuleDocument) -> String {
    let mut out = String::new();
    for decl in &doc.declarations {
        match &decl.node {
            Declaration::Comment(text) => {
                out.push('#');
                out.push_str(text);
            }
            Declaration::Condition(c) => out.push_str(&serialize_condition(c)),
            Declaration::Rule(r) => out.push_str(&serialize_rule(r)),
        }
        out.push('\n');
    }
    out
}
