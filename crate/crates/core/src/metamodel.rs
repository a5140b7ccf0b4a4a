//! Generic process-model metamodel and its canonical `.pm` text format.
//!
//! A model is a set of typed entities carrying string attributes plus a set
//! of typed relations between entities. Entity and relation types are an
//! open vocabulary (`activity`, `artifact`, `role`, `requirement`, ...).
//!
//! ```text
//! remis-model 1
//! entity A1 activity
//!   name = Design
//! entity D1 artifact
//!   name = "Design Document, v2"
//! relation produces A1 D1
//! ```
//!
//! Serialization is canonical: entities sorted by id, attribute keys sorted,
//! relations sorted by `(type, source, target)`, so equal models always
//! produce identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::text::{self, LexError};

pub const MODEL_HEADER: &str = "remis-model";
pub const MODEL_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid token {0:?}: expected [A-Za-z0-9_.-]+")]
pub struct InvalidToken(pub String);

/// Stable identifier of a process entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(s: impl Into<String>) -> Result<Self, InvalidToken> {
        let s = s.into();
        if text::is_token(&s) {
            Ok(EntityId(s))
        } else {
            Err(InvalidToken(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for EntityId {
    type Err = InvalidToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityId::new(s)
    }
}

impl AsRef<str> for EntityId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for EntityId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessEntity {
    pub id: EntityId,
    /// Fixed for the lifetime of the entity; a type change is a remove plus an add.
    pub entity_type: String,
    /// The display name, when present, lives under `name`.
    pub attributes: BTreeMap<String, String>,
}

impl ProcessEntity {
    pub fn new(id: EntityId, entity_type: impl Into<String>) -> Self {
        ProcessEntity {
            id,
            entity_type: entity_type.into(),
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.attributes.get("name").map(String::as_str)
    }
}

/// Directed, typed edge. Ordering is `(type, source, target)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub relation_type: String,
    pub source: EntityId,
    pub target: EntityId,
}

impl Relation {
    pub fn new(relation_type: impl Into<String>, source: EntityId, target: EntityId) -> Self {
        Relation {
            relation_type: relation_type.into(),
            source,
            target,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.relation_type, self.source, self.target)
    }
}

/// One version of a process model.
///
/// Entities and relations are kept in canonical order at all times, so
/// derived equality is structural equality. Insertion is unchecked:
/// duplicates and dangling endpoints are representable and reported by
/// [`validate_model`]. [`ProcessModel::from_parts`] and [`parse_model`]
/// only ever return valid models.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcessModel {
    entities: Vec<ProcessEntity>,
    relations: Vec<Relation>,
}

impl ProcessModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a model and rejects it if any invariant is violated.
    pub fn from_parts(
        entities: impl IntoIterator<Item = ProcessEntity>,
        relations: impl IntoIterator<Item = Relation>,
    ) -> Result<Self, ModelError> {
        let mut m = ProcessModel::new();
        for e in entities {
            m.insert_entity(e);
        }
        for r in relations {
            m.insert_relation(r);
        }
        let diags = validate_model(&m);
        if diags.is_empty() {
            Ok(m)
        } else {
            Err(ModelError::Invalid(diags))
        }
    }

    pub fn with_entity(mut self, e: ProcessEntity) -> Self {
        self.insert_entity(e);
        self
    }

    pub fn with_relation(mut self, r: Relation) -> Self {
        self.insert_relation(r);
        self
    }

    pub fn insert_entity(&mut self, e: ProcessEntity) {
        let pos = self.entities.partition_point(|x| x.id <= e.id);
        self.entities.insert(pos, e);
    }

    pub fn insert_relation(&mut self, r: Relation) {
        let pos = self.relations.partition_point(|x| *x <= r);
        self.relations.insert(pos, r);
    }

    pub fn entities(&self) -> &[ProcessEntity] {
        &self.entities
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty()
    }

    fn entity_index(&self, id: &str) -> Option<usize> {
        let pos = self.entities.partition_point(|x| x.id.as_str() < id);
        (pos < self.entities.len() && self.entities[pos].id.as_str() == id).then_some(pos)
    }

    pub fn entity(&self, id: &str) -> Option<&ProcessEntity> {
        self.entity_index(id).map(|i| &self.entities[i])
    }

    pub(crate) fn entity_mut(&mut self, id: &str) -> Option<&mut ProcessEntity> {
        self.entity_index(id).map(move |i| &mut self.entities[i])
    }

    pub(crate) fn remove_entity(&mut self, id: &str) -> Option<ProcessEntity> {
        self.entity_index(id).map(|i| self.entities.remove(i))
    }

    pub fn has_relation(&self, r: &Relation) -> bool {
        self.relations.binary_search(r).is_ok()
    }

    pub(crate) fn remove_relation(&mut self, r: &Relation) -> bool {
        match self.relations.binary_search(r) {
            Ok(i) => {
                self.relations.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    /// Relations with `id` as either endpoint.
    pub fn relations_of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Relation> + 'a {
        self.relations
            .iter()
            .filter(move |r| r.source.as_str() == id || r.target.as_str() == id)
    }
}

/// Checks every model invariant. Empty iff the model is valid.
pub fn validate_model(m: &ProcessModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let err = |subject: &str, msg: String| Diagnostic::error(DiagnosticKind::Model, subject, msg);

    let mut ids = BTreeSet::new();
    let mut reported = BTreeSet::new();
    for e in &m.entities {
        if !ids.insert(e.id.as_str()) && reported.insert(e.id.as_str()) {
            diags.push(err(e.id.as_str(), format!("duplicate entity id {}", e.id)));
        }
        if !text::is_token(&e.entity_type) {
            diags.push(err(
                e.id.as_str(),
                format!("entity {} has invalid type {:?}", e.id, e.entity_type),
            ));
        }
        for key in e.attributes.keys() {
            if !text::is_token(key) {
                diags.push(err(
                    e.id.as_str(),
                    format!("entity {} has invalid attribute key {key:?}", e.id),
                ));
            }
        }
    }

    let mut prev: Option<&Relation> = None;
    for r in &m.relations {
        let subject = r.to_string();
        if prev == Some(r) {
            diags.push(err(&subject, format!("duplicate relation ({subject})")));
        }
        prev = Some(r);
        if !text::is_token(&r.relation_type) {
            diags.push(err(
                &subject,
                format!("relation ({subject}) has invalid type {:?}", r.relation_type),
            ));
        }
        for end in [&r.source, &r.target] {
            if !ids.contains(end.as_str()) {
                diags.push(err(
                    &subject,
                    format!("relation ({subject}) has dangling endpoint {end}"),
                ));
            }
        }
    }
    diags
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid model: {}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown model format version {0:?}")]
    UnknownVersion(String),
    #[error("duplicate entity id {0}")]
    DuplicateEntity(String),
    #[error("duplicate relation ({0})")]
    DuplicateRelation(String),
    #[error("relation ({relation}) has dangling endpoint {missing}")]
    DanglingEndpoint { relation: String, missing: String },
}

/// Parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn syntax(line: usize, column: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    pub(crate) fn from_lex(line: usize, base_col: usize, e: LexError) -> Self {
        Self::syntax(line, base_col + e.offset, e.message)
    }
}

/// Lines of a document split on LF only, so a CR inside a quoted value
/// survives. A trailing newline does not produce an extra empty line.
pub(crate) fn doc_lines(doc: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = doc.strip_suffix('\n').unwrap_or(doc);
    body.split('\n').enumerate().map(|(i, l)| (i + 1, l))
}

pub(crate) fn check_header(
    doc: &str,
    magic: &str,
    version: &str,
) -> Result<(), ParseError> {
    let first = doc.split('\n').next();
    match text::header_version(first, magic) {
        Some(v) if v == version => Ok(()),
        Some(v) => Err(ParseError {
            line: 1,
            column: magic.len() + 2,
            kind: ParseErrorKind::UnknownVersion(v.to_string()),
        }),
        None => Err(ParseError::syntax(1, 1, format!("expected header `{magic} {version}`"))),
    }
}

fn parse_id(tok: &text::Token, line: usize, what: &str) -> Result<EntityId, ParseError> {
    if tok.quoted {
        return Err(ParseError::syntax(line, tok.offset + 1, format!("{what} must be a bare token")));
    }
    EntityId::new(tok.text.clone())
        .map_err(|e| ParseError::syntax(line, tok.offset + 1, format!("{what}: {e}")))
}

fn parse_type_token(tok: &text::Token, line: usize, what: &str) -> Result<String, ParseError> {
    if tok.quoted || !text::is_token(&tok.text) {
        return Err(ParseError::syntax(
            line,
            tok.offset + 1,
            format!("{what} must match [A-Za-z0-9_.-]+"),
        ));
    }
    Ok(tok.text.clone())
}

/// Parses a `.pm` document. Comment lines (`#`) and blank lines are ignored.
pub fn parse_model(doc: &str) -> Result<ProcessModel, ParseError> {
    check_header(doc, MODEL_HEADER, MODEL_FORMAT_VERSION)?;

    let mut model = ProcessModel::new();
    let mut current: Option<ProcessEntity> = None;
    let mut last_was_entity = false;
    let mut seen = BTreeMap::<EntityId, usize>::new();
    let mut relations: Vec<(usize, Relation)> = Vec::new();

    for (lineno, line) in doc_lines(doc).skip(1) {
        let trimmed = line.trim_start_matches([' ', '\t']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = line.len() - trimmed.len();
        if indent > 0 {
            // attribute line
            let Some(entity) = current.as_mut().filter(|_| last_was_entity) else {
                return Err(ParseError::syntax(lineno, 1, "attribute line outside an entity block"));
            };
            let Some(eq) = trimmed.find('=') else {
                return Err(ParseError::syntax(lineno, indent + 1, "expected `key = value`"));
            };
            let key = trimmed[..eq].trim_end_matches([' ', '\t']);
            if !text::is_token(key) {
                return Err(ParseError::syntax(
                    lineno,
                    indent + 1,
                    format!("invalid attribute key {key:?}"),
                ));
            }
            let value_src = &trimmed[eq + 1..];
            let base = line[..indent + eq + 1].chars().count() + 1;
            let value = text::parse_value(value_src)
                .map_err(|e| ParseError::from_lex(lineno, base, e))?;
            if entity.attributes.insert(key.to_string(), value).is_some() {
                return Err(ParseError::syntax(
                    lineno,
                    indent + 1,
                    format!("duplicate attribute key {key:?} on entity {}", entity.id),
                ));
            }
            continue;
        }

        let toks = text::split_tokens(line).map_err(|e| ParseError::from_lex(lineno, 1, e))?;
        match toks[0].text.as_str() {
            "entity" if !toks[0].quoted => {
                if toks.len() != 3 {
                    return Err(ParseError::syntax(lineno, 1, "expected `entity <id> <type>`"));
                }
                let id = parse_id(&toks[1], lineno, "entity id")?;
                let entity_type = parse_type_token(&toks[2], lineno, "entity type")?;
                if let Some(e) = current.take() {
                    model.insert_entity(e);
                }
                if seen.insert(id.clone(), lineno).is_some() {
                    return Err(ParseError {
                        line: lineno,
                        column: toks[1].offset + 1,
                        kind: ParseErrorKind::DuplicateEntity(id.to_string()),
                    });
                }
                current = Some(ProcessEntity::new(id, entity_type));
                last_was_entity = true;
            }
            "relation" if !toks[0].quoted => {
                if toks.len() != 4 {
                    return Err(ParseError::syntax(
                        lineno,
                        1,
                        "expected `relation <type> <source> <target>`",
                    ));
                }
                let rel = Relation::new(
                    parse_type_token(&toks[1], lineno, "relation type")?,
                    parse_id(&toks[2], lineno, "relation source")?,
                    parse_id(&toks[3], lineno, "relation target")?,
                );
                relations.push((lineno, rel));
                last_was_entity = false;
            }
            other => {
                return Err(ParseError::syntax(
                    lineno,
                    1,
                    format!("unexpected {other:?}, expected `entity` or `relation`"),
                ));
            }
        }
    }
    if let Some(e) = current.take() {
        model.insert_entity(e);
    }

    let mut triples = BTreeSet::new();
    for (lineno, rel) in relations {
        for end in [&rel.source, &rel.target] {
            if !seen.contains_key(end) {
                return Err(ParseError {
                    line: lineno,
                    column: 1,
                    kind: ParseErrorKind::DanglingEndpoint {
                        relation: rel.to_string(),
                        missing: end.to_string(),
                    },
                });
            }
        }
        if !triples.insert(rel.clone()) {
            return Err(ParseError {
                line: lineno,
                column: 1,
                kind: ParseErrorKind::DuplicateRelation(rel.to_string()),
            });
        }
        model.insert_relation(rel);
    }
    Ok(model)
}

/// Canonical `.pm` text for a model.
pub fn serialize_model(m: &ProcessModel) -> String {
    let mut out = format!("{MODEL_HEADER} {MODEL_FORMAT_VERSION}\n");
    for e in &m.entities {
        out.push_str(&format!("entity {} {}\n", e.id, e.entity_type));
        for (k, v) in &e.attributes {
            out.push_str(&format!("  {k} = {}\n", text::format_value(v)));
        }
    }
    for r in &m.relations {
        out.push_str(&format!("relation {r}\n"));
    }
    out
}
