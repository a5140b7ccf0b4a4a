//! Structural diff and patch between process model versions.
//!
//! Entities are matched by id only. A matched entity whose type differs, or
//! that needs more than two attribute edits, is replaced (remove plus add);
//! otherwise its attributes are edited in place.
//! Every removal carries the removed content and every attribute edit
//! carries the old value, so a changeset can be inverted on its own and
//! stale application is detected.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::metamodel::{
    check_header, doc_lines, validate_model, EntityId, ParseError, ProcessEntity, ProcessModel,
    Relation,
};
use crate::rationale::{DeploymentLevel, LinkTarget, RationaleLink};
use crate::text::{self, Token};

pub const CHANGESET_HEADER: &str = "remis-changeset";
pub const CHANGESET_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChangeKind {
    AddEntity(ProcessEntity),
    /// Carries the entity exactly as it was before removal.
    DelEntity(ProcessEntity),
    SetAttr {
        entity: EntityId,
        key: String,
        /// `None` when the attribute did not exist.
        old: Option<String>,
        new: String,
    },
    DelAttr {
        entity: EntityId,
        key: String,
        old: String,
    },
    AddRel(Relation),
    DelRel(Relation),
}

impl ChangeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChangeKind::AddEntity(_) => "add-entity",
            ChangeKind::DelEntity(_) => "del-entity",
            ChangeKind::SetAttr { .. } => "set-attr",
            ChangeKind::DelAttr { .. } => "del-attr",
            ChangeKind::AddRel(_) => "add-rel",
            ChangeKind::DelRel(_) => "del-rel",
        }
    }

    /// Position of this kind in the canonical changeset order.
    fn group(&self) -> u8 {
        match self {
            ChangeKind::DelRel(_) => 0,
            ChangeKind::DelAttr { .. } => 1,
            ChangeKind::DelEntity(_) => 2,
            ChangeKind::AddEntity(_) => 3,
            ChangeKind::SetAttr { .. } => 4,
            ChangeKind::AddRel(_) => 5,
        }
    }

    fn sort_key(&self) -> (u8, &str, &str, &str) {
        match self {
            ChangeKind::AddEntity(e) | ChangeKind::DelEntity(e) => (self.group(), e.id.as_str(), "", ""),
            ChangeKind::SetAttr { entity, key, .. } | ChangeKind::DelAttr { entity, key, .. } => {
                (self.group(), entity.as_str(), key, "")
            }
            ChangeKind::AddRel(r) | ChangeKind::DelRel(r) => (
                self.group(),
                r.relation_type.as_str(),
                r.source.as_str(),
                r.target.as_str(),
            ),
        }
    }

    /// Entities named anywhere in the payload.
    pub fn touched_entities(&self) -> Vec<&EntityId> {
        match self {
            ChangeKind::AddEntity(e) | ChangeKind::DelEntity(e) => vec![&e.id],
            ChangeKind::SetAttr { entity, .. } | ChangeKind::DelAttr { entity, .. } => vec![entity],
            ChangeKind::AddRel(r) | ChangeKind::DelRel(r) => {
                if r.source == r.target {
                    vec![&r.source]
                } else {
                    vec![&r.source, &r.target]
                }
            }
        }
    }

    pub fn touches(&self, id: &str) -> bool {
        self.touched_entities().iter().any(|e| e.as_str() == id)
    }

    pub fn inverse(&self) -> ChangeKind {
        match self.clone() {
            ChangeKind::AddEntity(e) => ChangeKind::DelEntity(e),
            ChangeKind::DelEntity(e) => ChangeKind::AddEntity(e),
            ChangeKind::SetAttr {
                entity,
                key,
                old: Some(old),
                new,
            } => ChangeKind::SetAttr {
                entity,
                key,
                old: Some(new),
                new: old,
            },
            ChangeKind::SetAttr {
                entity,
                key,
                old: None,
                new,
            } => ChangeKind::DelAttr {
                entity,
                key,
                old: new,
            },
            ChangeKind::DelAttr { entity, key, old } => ChangeKind::SetAttr {
                entity,
                key,
                old: None,
                new: old,
            },
            ChangeKind::AddRel(r) => ChangeKind::DelRel(r),
            ChangeKind::DelRel(r) => ChangeKind::AddRel(r),
        }
    }
}

impl fmt::Display for ChangeKind {
    /// Payload in changeset-line syntax, starting with the kind name.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = text::format_token_value;
        write!(f, "{}", self.name())?;
        match self {
            ChangeKind::AddEntity(e) | ChangeKind::DelEntity(e) => {
                write!(f, " {} {}", e.id, e.entity_type)?;
                for (k, val) in &e.attributes {
                    write!(f, " {k} {}", v(val))?;
                }
                Ok(())
            }
            ChangeKind::SetAttr {
                entity,
                key,
                old,
                new,
            } => {
                let old = old.as_deref().map_or_else(|| "!none".to_string(), v);
                write!(f, " {entity} {key} {old} {}", v(new))
            }
            ChangeKind::DelAttr { entity, key, old } => write!(f, " {entity} {key} {}", v(old)),
            ChangeKind::AddRel(r) | ChangeKind::DelRel(r) => write!(f, " {r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Granularity {
    /// Attribute text only (misspellings, wording).
    Editorial,
    /// Entities or relations appear or disappear.
    Structural,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Editorial => "editorial",
            Granularity::Structural => "structural",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Change {
    pub change_id: String,
    pub kind: ChangeKind,
}

impl Change {
    pub fn new(change_id: impl Into<String>, kind: ChangeKind) -> Self {
        Change {
            change_id: change_id.into(),
            kind,
        }
    }
}

pub fn classify_change(c: &Change) -> Granularity {
    match c.kind {
        ChangeKind::SetAttr { .. } | ChangeKind::DelAttr { .. } => Granularity::Editorial,
        ChangeKind::AddEntity(_)
        | ChangeKind::DelEntity(_)
        | ChangeKind::AddRel(_)
        | ChangeKind::DelRel(_) => Granularity::Structural,
    }
}

/// Canonical order of two changes: kind group, then payload keys bytewise.
pub fn canonical_cmp(a: &ChangeKind, b: &ChangeKind) -> Ordering {
    a.sort_key().cmp(&b.sort_key())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeSet {
    pub from_version: u64,
    pub to_version: u64,
    pub changes: Vec<Change>,
    pub links: Vec<RationaleLink>,
    pub level_at_commit: DeploymentLevel,
    /// Change request the changeset was committed against, if any.
    pub request: Option<String>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn change(&self, id: &str) -> Option<&Change> {
        self.changes.iter().find(|c| c.change_id == id)
    }

    pub fn links_for<'a>(&'a self, change_id: &'a str) -> impl Iterator<Item = &'a RationaleLink> + 'a {
        self.links.iter().filter(move |l| l.change_id == change_id)
    }

    /// Change ids with no rationale link yet.
    pub fn unlinked(&self) -> Vec<&str> {
        self.changes
            .iter()
            .filter(|c| self.links_for(&c.change_id).next().is_none())
            .map(|c| c.change_id.as_str())
            .collect()
    }

    /// Stable sort into canonical order. Change ids are kept.
    pub fn canonicalize(&mut self) {
        self.changes.sort_by(|a, b| canonical_cmp(&a.kind, &b.kind));
    }
}

/// Structural invariants of a changeset (not its rationale).
pub fn validate_changeset(cs: &ChangeSet) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let err = |s: &str, m: String| Diagnostic::error(DiagnosticKind::Integrity, s, m);
    let mut ids = BTreeSet::new();
    for c in &cs.changes {
        if !text::is_token(&c.change_id) {
            diags.push(err(&c.change_id, format!("invalid change id {:?}", c.change_id)));
        }
        if !ids.insert(c.change_id.as_str()) {
            diags.push(err(&c.change_id, format!("duplicate change id {}", c.change_id)));
        }
        if let ChangeKind::SetAttr { old: Some(old), new, .. } = &c.kind {
            if old == new {
                diags.push(err(&c.change_id, format!("change {} sets an attribute to its current value", c.change_id)));
            }
        }
        if let ChangeKind::AddEntity(e) | ChangeKind::DelEntity(e) = &c.kind {
            if !text::is_token(&e.entity_type) || !e.attributes.keys().all(|k| text::is_token(k)) {
                diags.push(err(&c.change_id, format!("change {} has a malformed entity payload", c.change_id)));
            }
        }
    }
    for w in cs.changes.windows(2) {
        if canonical_cmp(&w[0].kind, &w[1].kind) == Ordering::Greater {
            diags.push(err(
                &w[1].change_id,
                format!("change {} is out of canonical order", w[1].change_id),
            ));
        }
    }
    for l in &cs.links {
        if !ids.contains(l.change_id.as_str()) {
            diags.push(err(
                &l.change_id,
                format!("link refers to unknown change {}", l.change_id),
            ));
        }
    }
    diags
}

/// Minimal changeset turning `a` into `b`, in canonical order with ids `C-1..`.
///
/// The result has `from_version = 0`, `to_version = 1`, level 0 and no links;
/// the repository fills those in.
pub fn diff(a: &ProcessModel, b: &ProcessModel) -> ChangeSet {
    let mut kinds = Vec::new();

    for r in a.relations() {
        if !b.has_relation(r) {
            kinds.push(ChangeKind::DelRel(r.clone()));
        }
    }
    for ea in a.entities() {
        match b.entity(ea.id.as_str()) {
            None => kinds.push(ChangeKind::DelEntity(ea.clone())),
            // Replacing costs two changes, so it also wins over three or
            // more attribute edits.
            Some(eb) if eb.entity_type != ea.entity_type || attr_edits(ea, eb) > 2 => {
                kinds.push(ChangeKind::DelEntity(ea.clone()));
                kinds.push(ChangeKind::AddEntity(eb.clone()));
            }
            Some(eb) => {
                for (k, old) in &ea.attributes {
                    if !eb.attributes.contains_key(k) {
                        kinds.push(ChangeKind::DelAttr {
                            entity: ea.id.clone(),
                            key: k.clone(),
                            old: old.clone(),
                        });
                    }
                }
                for (k, new) in &eb.attributes {
                    let old = ea.attributes.get(k);
                    if old != Some(new) {
                        kinds.push(ChangeKind::SetAttr {
                            entity: ea.id.clone(),
                            key: k.clone(),
                            old: old.cloned(),
                            new: new.clone(),
                        });
                    }
                }
            }
        }
    }
    for eb in b.entities() {
        if a.entity(eb.id.as_str()).is_none() {
            kinds.push(ChangeKind::AddEntity(eb.clone()));
        }
    }
    for r in b.relations() {
        if !a.has_relation(r) {
            kinds.push(ChangeKind::AddRel(r.clone()));
        }
    }

    kinds.sort_by(canonical_cmp);
    ChangeSet {
        from_version: 0,
        to_version: 1,
        changes: kinds
            .into_iter()
            .enumerate()
            .map(|(i, k)| Change::new(format!("C-{}", i + 1), k))
            .collect(),
        links: Vec::new(),
        level_at_commit: DeploymentLevel::L0,
        request: None,
    }
}

fn attr_edits(a: &ProcessEntity, b: &ProcessEntity) -> usize {
    let removed = a.attributes.keys().filter(|k| !b.attributes.contains_key(*k)).count();
    let set = b.attributes.iter().filter(|(k, v)| a.attributes.get(*k) != Some(*v)).count();
    removed + set
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("change {change_id} does not apply: {reason}")]
    Conflict { change_id: String, reason: String },
    #[error("result is not a valid model: {0}")]
    InvalidResult(String),
}

fn conflict(c: &Change, reason: impl Into<String>) -> ApplyError {
    ApplyError::Conflict {
        change_id: c.change_id.clone(),
        reason: reason.into(),
    }
}

/// Applies the changes in stored order to a copy of `a`.
///
/// Relations may dangle between steps (an entity replaced by one of another
/// type keeps its relations), but the final model must be valid.
pub fn apply(a: &ProcessModel, cs: &ChangeSet) -> Result<ProcessModel, ApplyError> {
    let mut m = a.clone();
    for c in &cs.changes {
        apply_one(&mut m, c)?;
    }
    let diags = validate_model(&m);
    if let Some(d) = diags.first() {
        return Err(ApplyError::InvalidResult(d.message.clone()));
    }
    Ok(m)
}

fn apply_one(m: &mut ProcessModel, c: &Change) -> Result<(), ApplyError> {
    match &c.kind {
        ChangeKind::AddEntity(e) => {
            if m.entity(e.id.as_str()).is_some() {
                return Err(conflict(c, format!("entity {} already exists", e.id)));
            }
            m.insert_entity(e.clone());
        }
        ChangeKind::DelEntity(e) => match m.entity(e.id.as_str()) {
            None => return Err(conflict(c, format!("entity {} does not exist", e.id))),
            Some(cur) if cur != e => {
                return Err(conflict(c, format!("entity {} differs from the recorded content", e.id)))
            }
            Some(_) => {
                m.remove_entity(e.id.as_str());
            }
        },
        ChangeKind::SetAttr {
            entity,
            key,
            old,
            new,
        } => {
            let Some(ent) = m.entity_mut(entity.as_str()) else {
                return Err(conflict(c, format!("entity {entity} does not exist")));
            };
            if ent.attributes.get(key) != old.as_ref() {
                return Err(conflict(
                    c,
                    format!("stale value for {entity}.{key}: expected {old:?}, found {:?}", ent.attributes.get(key)),
                ));
            }
            if old.as_ref() == Some(new) {
                return Err(conflict(c, "new value equals old value"));
            }
            ent.attributes.insert(key.clone(), new.clone());
        }
        ChangeKind::DelAttr { entity, key, old } => {
            let Some(ent) = m.entity_mut(entity.as_str()) else {
                return Err(conflict(c, format!("entity {entity} does not exist")));
            };
            if ent.attributes.get(key) != Some(old) {
                return Err(conflict(
                    c,
                    format!("stale value for {entity}.{key}: expected {old:?}, found {:?}", ent.attributes.get(key)),
                ));
            }
            ent.attributes.remove(key);
        }
        ChangeKind::AddRel(r) => {
            if m.has_relation(r) {
                return Err(conflict(c, format!("relation ({r}) already exists")));
            }
            for end in [&r.source, &r.target] {
                if m.entity(end.as_str()).is_none() {
                    return Err(conflict(c, format!("relation endpoint {end} does not exist")));
                }
            }
            m.insert_relation(r.clone());
        }
        ChangeKind::DelRel(r) => {
            if !m.remove_relation(r) {
                return Err(conflict(c, format!("relation ({r}) does not exist")));
            }
        }
    }
    Ok(())
}

/// Changeset that undoes `cs`. Change ids and links are kept; the result
/// is put back into canonical order.
pub fn invert(cs: &ChangeSet) -> ChangeSet {
    let mut out = ChangeSet {
        from_version: cs.to_version,
        to_version: cs.from_version,
        changes: cs
            .changes
            .iter()
            .rev()
            .map(|c| Change::new(c.change_id.clone(), c.kind.inverse()))
            .collect(),
        links: cs.links.clone(),
        level_at_commit: cs.level_at_commit,
        request: cs.request.clone(),
    };
    out.canonicalize();
    out
}

pub fn serialize_changeset(cs: &ChangeSet) -> String {
    let mut out = format!(
        "{CHANGESET_HEADER} {CHANGESET_FORMAT_VERSION}\nfrom {}\nto {}\nlevel {}\n",
        cs.from_version,
        cs.to_version,
        cs.level_at_commit.as_u8()
    );
    if let Some(req) = &cs.request {
        out.push_str(&format!("request {req}\n"));
    }
    for c in &cs.changes {
        out.push_str(&format!("change {} {}\n", c.change_id, c.kind));
    }
    for l in &cs.links {
        out.push_str(&link_line(l));
    }
    out
}

/// One `link` line, newline-terminated. Links are appended to stored
/// changesets one line at a time.
pub fn link_line(l: &RationaleLink) -> String {
    match &l.target {
        LinkTarget::Resolution(id) => format!("link {} resolution {id}\n", l.change_id),
        LinkTarget::Justification(t) => {
            format!("link {} justification {}\n", l.change_id, text::format_token_value(t))
        }
    }
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        let col = self
            .toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |t| t.offset + 1);
        ParseError::syntax(self.line, col, msg)
    }

    fn next_any(&mut self, what: &str) -> Result<&'a Token, ParseError> {
        let t = self
            .toks
            .get(self.pos)
            .ok_or_else(|| self.err(format!("missing {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn value(&mut self, what: &str) -> Result<String, ParseError> {
        let t = self.next_any(what)?;
        if t.is_none_marker() {
            self.pos -= 1;
            return Err(self.err(format!("{what} cannot be !none")));
        }
        Ok(t.text.clone())
    }

    fn token(&mut self, what: &str) -> Result<String, ParseError> {
        let t = self.next_any(what)?;
        if t.quoted || !text::is_token(&t.text) {
            self.pos -= 1;
            return Err(self.err(format!("{what} must match [A-Za-z0-9_.-]+")));
        }
        Ok(t.text.clone())
    }

    fn id(&mut self, what: &str) -> Result<EntityId, ParseError> {
        Ok(EntityId::new(self.token(what)?).expect("token checked"))
    }

    fn relation(&mut self) -> Result<Relation, ParseError> {
        Ok(Relation::new(
            self.token("relation type")?,
            self.id("relation source")?,
            self.id("relation target")?,
        ))
    }

    fn entity(&mut self) -> Result<ProcessEntity, ParseError> {
        let mut e = ProcessEntity::new(self.id("entity id")?, self.token("entity type")?);
        while self.pos < self.toks.len() {
            let key = self.token("attribute key")?;
            let value = self.value("attribute value")?;
            if e.attributes.insert(key.clone(), value).is_some() {
                return Err(self.err(format!("duplicate attribute key {key:?}")));
            }
        }
        Ok(e)
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected extra token"))
        } else {
            Ok(())
        }
    }
}

fn parse_number(line: usize, rest: &[Token], what: &str) -> Result<u64, ParseError> {
    match rest {
        [t] if !t.quoted => t
            .text
            .parse()
            .map_err(|_| ParseError::syntax(line, t.offset + 1, format!("{what} must be a natural number"))),
        _ => Err(ParseError::syntax(line, 1, format!("expected `{what} <n>`"))),
    }
}

/// Parses a `.cs` document and checks its structural invariants.
pub fn parse_changeset(doc: &str) -> Result<ChangeSet, ParseError> {
    check_header(doc, CHANGESET_HEADER, CHANGESET_FORMAT_VERSION)?;
    let mut from = None;
    let mut to = None;
    let mut level = None;
    let mut request = None;
    let mut changes = Vec::new();
    let mut links = Vec::new();

    for (lineno, line) in doc_lines(doc).skip(1) {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let toks = text::split_tokens(line).map_err(|e| ParseError::from_lex(lineno, 1, e))?;
        let head = &toks[0];
        if head.quoted {
            return Err(ParseError::syntax(lineno, 1, "line must start with a keyword"));
        }
        let header_done = from.is_some() && to.is_some() && level.is_some();
        match head.text.as_str() {
            "from" if from.is_none() => from = Some(parse_number(lineno, &toks[1..], "from")?),
            "to" if to.is_none() && from.is_some() => to = Some(parse_number(lineno, &toks[1..], "to")?),
            "level" if level.is_none() && to.is_some() => {
                let n = parse_number(lineno, &toks[1..], "level")?;
                level = Some(DeploymentLevel::from_u64(n).ok_or_else(|| {
                    ParseError::syntax(lineno, toks[1].offset + 1, format!("unknown level {n}"))
                })?);
            }
            "request" if header_done && request.is_none() && changes.is_empty() && links.is_empty() => {
                let mut cur = Cursor { line: lineno, toks: &toks, pos: 1 };
                request = Some(cur.token("request id")?);
                cur.end()?;
            }
            "change" if header_done && links.is_empty() => {
                let mut cur = Cursor { line: lineno, toks: &toks, pos: 1 };
                let id = cur.token("change id")?;
                let kind_tok = cur.token("change kind")?;
                let kind = match kind_tok.as_str() {
                    "add-entity" => ChangeKind::AddEntity(cur.entity()?),
                    "del-entity" => ChangeKind::DelEntity(cur.entity()?),
                    "set-attr" => {
                        let entity = cur.id("entity id")?;
                        let key = cur.token("attribute key")?;
                        let old_tok = cur.next_any("old value")?;
                        let old = (!old_tok.is_none_marker()).then(|| old_tok.text.clone());
                        let new = cur.value("new value")?;
                        ChangeKind::SetAttr { entity, key, old, new }
                    }
                    "del-attr" => ChangeKind::DelAttr {
                        entity: cur.id("entity id")?,
                        key: cur.token("attribute key")?,
                        old: cur.value("old value")?,
                    },
                    "add-rel" => ChangeKind::AddRel(cur.relation()?),
                    "del-rel" => ChangeKind::DelRel(cur.relation()?),
                    other => {
                        cur.pos -= 1;
                        return Err(cur.err(format!("unknown change kind {other:?}")));
                    }
                };
                cur.end()?;
                changes.push(Change::new(id, kind));
            }
            "link" if header_done => {
                let mut cur = Cursor { line: lineno, toks: &toks, pos: 1 };
                let change_id = cur.token("change id")?;
                let target = match cur.token("link target kind")?.as_str() {
                    "resolution" => LinkTarget::Resolution(cur.token("resolution id")?),
                    "justification" => LinkTarget::Justification(cur.value("justification")?),
                    other => {
                        cur.pos -= 1;
                        return Err(cur.err(format!("unknown link target {other:?}")));
                    }
                };
                cur.end()?;
                links.push(RationaleLink { change_id, target });
            }
            other => {
                return Err(ParseError::syntax(lineno, 1, format!("unexpected {other:?}")));
            }
        }
    }

    let (Some(from_version), Some(to_version), Some(level_at_commit)) = (from, to, level) else {
        return Err(ParseError::syntax(1, 1, "missing from/to/level lines"));
    };
    let cs = ChangeSet {
        from_version,
        to_version,
        changes,
        links,
        level_at_commit,
        request,
    };
    if let Some(d) = validate_changeset(&cs).into_iter().next() {
        return Err(ParseError::syntax(1, 1, d.message));
    }
    Ok(cs)
}
