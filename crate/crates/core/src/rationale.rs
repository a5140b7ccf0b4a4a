//! Rationale records and the level-dependent rationale schema.
//!
//! Records follow the rationale model: an [`Event`] triggers [`Issue`]s,
//! issues collect [`Alternative`]s that are [`Assessment`]-ed (optionally
//! against weighted [`Criterion`]s), and a [`Resolution`] settles an issue
//! and is enacted by model changes. How much of that structure a change
//! must carry depends on the [`DeploymentLevel`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::clock::{format_timestamp, parse_timestamp};
use crate::delta::ChangeSet;
use crate::diag::{Diagnostic, DiagnosticKind};
use crate::journal::Entry;
use crate::metamodel::EntityId;
use crate::text;

pub const RATIONALE_HEADER: &str = "remis-rationale";

/// Verdict anchor for a fully positive assessment.
pub const POSITIVE: f64 = 1.0;
/// Verdict anchor for a fully negative assessment.
pub const NEGATIVE: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeploymentLevel {
    /// Free-text justification per change.
    L0,
    /// Issues and the resolutions that generate changes.
    L1,
    /// Adds triggering events; alternatives optional.
    L2,
    /// Adds weighted criteria; criterion-based assessment optional.
    L3,
}

impl DeploymentLevel {
    pub const ALL: [DeploymentLevel; 4] = [
        DeploymentLevel::L0,
        DeploymentLevel::L1,
        DeploymentLevel::L2,
        DeploymentLevel::L3,
    ];

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u64(n: u64) -> Option<Self> {
        Self::ALL.get(usize::try_from(n).ok()?).copied()
    }
}

impl fmt::Display for DeploymentLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

impl FromStr for DeploymentLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u64>()
            .ok()
            .and_then(Self::from_u64)
            .ok_or_else(|| format!("invalid deployment level {s:?}: expected 0, 1, 2 or 3"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Open,
    Closed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Open => "open",
            Status::Closed => "closed",
        }
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(Status::Open),
            "closed" => Ok(Status::Closed),
            _ => Err(format!("invalid status {s:?}: expected open or closed")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventType {
    /// Corporate policy, business goals.
    Internal,
    /// New technology, tools, standards.
    External,
}

impl EventType {
    pub fn as_str(self) -> &'static str {
        match self {
            EventType::Internal => "internal",
            EventType::External => "external",
        }
    }
}

impl FromStr for EventType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "internal" => Ok(EventType::Internal),
            "external" => Ok(EventType::External),
            _ => Err(format!("invalid event type {s:?}: expected internal or external")),
        }
    }
}

/// Organization-independent issue classification, extensible via `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IssueType {
    Imprecision,
    Verbosity,
    Inaccuracy,
    NonCompliance,
    Inconsistency,
    Other(String),
}

impl IssueType {
    pub const STANDARD: [IssueType; 5] = [
        IssueType::Imprecision,
        IssueType::Verbosity,
        IssueType::Inaccuracy,
        IssueType::NonCompliance,
        IssueType::Inconsistency,
    ];
}

impl fmt::Display for IssueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IssueType::Imprecision => f.write_str("imprecision"),
            IssueType::Verbosity => f.write_str("verbosity"),
            IssueType::Inaccuracy => f.write_str("inaccuracy"),
            IssueType::NonCompliance => f.write_str("non_compliance"),
            IssueType::Inconsistency => f.write_str("inconsistency"),
            IssueType::Other(label) => write!(f, "other:{label}"),
        }
    }
}

impl FromStr for IssueType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "imprecision" => IssueType::Imprecision,
            "verbosity" => IssueType::Verbosity,
            "inaccuracy" => IssueType::Inaccuracy,
            "non_compliance" | "non-compliance" => IssueType::NonCompliance,
            "inconsistency" => IssueType::Inconsistency,
            other => match other.strip_prefix("other:") {
                Some(label) if !label.trim().is_empty() => IssueType::Other(label.to_string()),
                _ => {
                    return Err(format!(
                        "invalid issue type {s:?}: expected imprecision, verbosity, inaccuracy, \
                         non_compliance, inconsistency or other:<label>"
                    ))
                }
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub id: String,
    pub name: String,
    pub short_description: String,
    pub event_type: EventType,
    pub occurred_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub id: String,
    pub triggered_by: Option<String>,
    /// Synoptic description, ideally phrased as a question.
    pub question: String,
    pub issue_type: IssueType,
    pub status: Status,
    /// Minutes, mails, memos.
    pub detailed_discussion: String,
    pub affected_entities: BTreeSet<EntityId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alternative {
    pub id: String,
    pub issue_id: String,
    pub subject: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub description: String,
    pub weight: f64,
    /// Goal/question the criterion was derived from.
    pub gqm_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub id: String,
    pub alternative_id: String,
    /// `None` for a bare verdict not tied to any criterion.
    pub criterion_id: Option<String>,
    /// In `[-1, 1]`; see [`POSITIVE`] and [`NEGATIVE`].
    pub verdict: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub id: String,
    pub issue_id: String,
    pub chosen_alternative_id: Option<String>,
    pub short_description: String,
    pub long_description: String,
    pub justification: String,
    pub status: Status,
    pub opens_issues: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordKind {
    Event,
    Issue,
    Alternative,
    Criterion,
    Assessment,
    Resolution,
}

impl RecordKind {
    pub const ALL: [RecordKind; 6] = [
        RecordKind::Event,
        RecordKind::Issue,
        RecordKind::Alternative,
        RecordKind::Criterion,
        RecordKind::Assessment,
        RecordKind::Resolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecordKind::Event => "event",
            RecordKind::Issue => "issue",
            RecordKind::Alternative => "alternative",
            RecordKind::Criterion => "criterion",
            RecordKind::Assessment => "assessment",
            RecordKind::Resolution => "resolution",
        }
    }

    /// Prefix of generated ids, e.g. `IS` for `IS-1`.
    pub fn id_prefix(self) -> &'static str {
        match self {
            RecordKind::Event => "EV",
            RecordKind::Issue => "IS",
            RecordKind::Alternative => "AL",
            RecordKind::Criterion => "CR",
            RecordKind::Assessment => "AS",
            RecordKind::Resolution => "RS",
        }
    }

    pub fn has_status(self) -> bool {
        matches!(self, RecordKind::Issue | RecordKind::Resolution)
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RecordKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RecordKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown record kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RationaleRecord {
    Event(Event),
    Issue(Issue),
    Alternative(Alternative),
    Criterion(Criterion),
    Assessment(Assessment),
    Resolution(Resolution),
}

fn join_set<T: AsRef<str>>(set: &BTreeSet<T>) -> String {
    set.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",")
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

/// Typed access to a record's `key = value` fields.
struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn new(fields: &[(String, String)]) -> Self {
        Fields {
            map: fields.iter().cloned().collect(),
        }
    }

    fn req(&mut self, key: &str) -> Result<String, String> {
        self.map
            .remove(key)
            .ok_or_else(|| format!("missing field {key:?}"))
    }

    fn text(&mut self, key: &str) -> String {
        self.map.remove(key).unwrap_or_default()
    }

    fn opt(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).filter(|v| !v.is_empty())
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<T, String>
    where
        T::Err: fmt::Display,
    {
        let raw = self.req(key)?;
        raw.parse().map_err(|e| format!("field {key:?}: {e}"))
    }

    fn number(&mut self, key: &str) -> Result<f64, String> {
        let raw = self.req(key)?;
        raw.trim()
            .parse::<f64>()
            .map_err(|_| format!("field {key:?}: {raw:?} is not a number"))
    }

    fn finish(self) -> Result<(), String> {
        match self.map.keys().next() {
            Some(k) => Err(format!("unknown field {k:?}")),
            None => Ok(()),
        }
    }
}

impl RationaleRecord {
    pub fn kind(&self) -> RecordKind {
        match self {
            RationaleRecord::Event(_) => RecordKind::Event,
            RationaleRecord::Issue(_) => RecordKind::Issue,
            RationaleRecord::Alternative(_) => RecordKind::Alternative,
            RationaleRecord::Criterion(_) => RecordKind::Criterion,
            RationaleRecord::Assessment(_) => RecordKind::Assessment,
            RationaleRecord::Resolution(_) => RecordKind::Resolution,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            RationaleRecord::Event(r) => &r.id,
            RationaleRecord::Issue(r) => &r.id,
            RationaleRecord::Alternative(r) => &r.id,
            RationaleRecord::Criterion(r) => &r.id,
            RationaleRecord::Assessment(r) => &r.id,
            RationaleRecord::Resolution(r) => &r.id,
        }
    }

    pub fn set_id(&mut self, id: String) {
        match self {
            RationaleRecord::Event(r) => r.id = id,
            RationaleRecord::Issue(r) => r.id = id,
            RationaleRecord::Alternative(r) => r.id = id,
            RationaleRecord::Criterion(r) => r.id = id,
            RationaleRecord::Assessment(r) => r.id = id,
            RationaleRecord::Resolution(r) => r.id = id,
        }
    }

    pub fn status(&self) -> Option<Status> {
        match self {
            RationaleRecord::Issue(r) => Some(r.status),
            RationaleRecord::Resolution(r) => Some(r.status),
            _ => None,
        }
    }

    /// Journal fields in their fixed emission order.
    pub fn to_fields(&self) -> Vec<(String, String)> {
        let mut f: Vec<(&str, String)> = Vec::new();
        match self {
            RationaleRecord::Event(e) => {
                f.push(("name", e.name.clone()));
                f.push(("short_description", e.short_description.clone()));
                f.push(("event_type", e.event_type.as_str().into()));
                f.push(("occurred_at", format_timestamp(&e.occurred_at)));
            }
            RationaleRecord::Issue(i) => {
                if let Some(ev) = &i.triggered_by {
                    f.push(("triggered_by", ev.clone()));
                }
                f.push(("question", i.question.clone()));
                f.push(("issue_type", i.issue_type.to_string()));
                f.push(("status", i.status.as_str().into()));
                f.push(("detailed_discussion", i.detailed_discussion.clone()));
                if !i.affected_entities.is_empty() {
                    f.push(("affected_entities", join_set(&i.affected_entities)));
                }
            }
            RationaleRecord::Alternative(a) => {
                f.push(("issue", a.issue_id.clone()));
                f.push(("subject", a.subject.clone()));
                f.push(("description", a.description.clone()));
            }
            RationaleRecord::Criterion(c) => {
                f.push(("name", c.name.clone()));
                f.push(("description", c.description.clone()));
                f.push(("weight", c.weight.to_string()));
                if let Some(g) = &c.gqm_source {
                    f.push(("gqm_source", g.clone()));
                }
            }
            RationaleRecord::Assessment(a) => {
                f.push(("alternative", a.alternative_id.clone()));
                if let Some(c) = &a.criterion_id {
                    f.push(("criterion", c.clone()));
                }
                f.push(("verdict", a.verdict.to_string()));
                f.push(("note", a.note.clone()));
            }
            RationaleRecord::Resolution(r) => {
                f.push(("issue", r.issue_id.clone()));
                if let Some(a) = &r.chosen_alternative_id {
                    f.push(("chosen_alternative", a.clone()));
                }
                f.push(("short_description", r.short_description.clone()));
                f.push(("long_description", r.long_description.clone()));
                f.push(("justification", r.justification.clone()));
                f.push(("status", r.status.as_str().into()));
                if !r.opens_issues.is_empty() {
                    f.push(("opens_issues", join_set(&r.opens_issues)));
                }
            }
        }
        f.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn from_fields(kind: RecordKind, id: &str, fields: &[(String, String)]) -> Result<Self, String> {
        let mut f = Fields::new(fields);
        let id = id.to_string();
        let rec = match kind {
            RecordKind::Event => RationaleRecord::Event(Event {
                id,
                name: f.req("name")?,
                short_description: f.text("short_description"),
                event_type: f.parse("event_type")?,
                occurred_at: {
                    let raw = f.req("occurred_at")?;
                    parse_timestamp(&raw).ok_or_else(|| format!("field \"occurred_at\": invalid timestamp {raw:?}"))?
                },
            }),
            RecordKind::Issue => RationaleRecord::Issue(Issue {
                id,
                triggered_by: f.opt("triggered_by"),
                question: f.text("question"),
                issue_type: f.parse("issue_type")?,
                status: f.parse("status")?,
                detailed_discussion: f.text("detailed_discussion"),
                affected_entities: split_list(&f.text("affected_entities"))
                    .map(|s| EntityId::new(s).map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?,
            }),
            RecordKind::Alternative => RationaleRecord::Alternative(Alternative {
                id,
                issue_id: f.req("issue")?,
                subject: f.text("subject"),
                description: f.text("description"),
            }),
            RecordKind::Criterion => RationaleRecord::Criterion(Criterion {
                id,
                name: f.text("name"),
                description: f.text("description"),
                weight: f.number("weight")?,
                gqm_source: f.opt("gqm_source"),
            }),
            RecordKind::Assessment => RationaleRecord::Assessment(Assessment {
                id,
                alternative_id: f.req("alternative")?,
                criterion_id: f.opt("criterion"),
                verdict: f.number("verdict")?,
                note: f.text("note"),
            }),
            RecordKind::Resolution => RationaleRecord::Resolution(Resolution {
                id,
                issue_id: f.req("issue")?,
                chosen_alternative_id: f.opt("chosen_alternative"),
                short_description: f.text("short_description"),
                long_description: f.text("long_description"),
                justification: f.text("justification"),
                status: f.parse("status")?,
                opens_issues: split_list(&f.text("opens_issues")).map(String::from).collect(),
            }),
        };
        f.finish()?;
        Ok(rec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("journal line {line}: {message}")]
pub struct JournalError {
    pub line: usize,
    pub message: String,
}

/// Current state of every rationale record, obtained by replaying the journal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordStore {
    pub events: BTreeMap<String, Event>,
    pub issues: BTreeMap<String, Issue>,
    pub alternatives: BTreeMap<String, Alternative>,
    pub criteria: BTreeMap<String, Criterion>,
    pub assessments: BTreeMap<String, Assessment>,
    pub resolutions: BTreeMap<String, Resolution>,
    /// When each issue or resolution was closed, keyed by `(kind, id)`.
    pub closed_at: BTreeMap<(RecordKind, String), DateTime<Utc>>,
}

impl RecordStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn replay(entries: &[Entry]) -> Result<Self, JournalError> {
        let mut store = RecordStore::new();
        for e in entries {
            store.apply_entry(e)?;
        }
        Ok(store)
    }

    pub fn get(&self, kind: RecordKind, id: &str) -> Option<RationaleRecord> {
        match kind {
            RecordKind::Event => self.events.get(id).cloned().map(RationaleRecord::Event),
            RecordKind::Issue => self.issues.get(id).cloned().map(RationaleRecord::Issue),
            RecordKind::Alternative => self.alternatives.get(id).cloned().map(RationaleRecord::Alternative),
            RecordKind::Criterion => self.criteria.get(id).cloned().map(RationaleRecord::Criterion),
            RecordKind::Assessment => self.assessments.get(id).cloned().map(RationaleRecord::Assessment),
            RecordKind::Resolution => self.resolutions.get(id).cloned().map(RationaleRecord::Resolution),
        }
    }

    pub fn contains(&self, kind: RecordKind, id: &str) -> bool {
        match kind {
            RecordKind::Event => self.events.contains_key(id),
            RecordKind::Issue => self.issues.contains_key(id),
            RecordKind::Alternative => self.alternatives.contains_key(id),
            RecordKind::Criterion => self.criteria.contains_key(id),
            RecordKind::Assessment => self.assessments.contains_key(id),
            RecordKind::Resolution => self.resolutions.contains_key(id),
        }
    }

    /// All records of one kind, sorted by id.
    pub fn records(&self, kind: RecordKind) -> Vec<RationaleRecord> {
        fn all<T: Clone>(m: &BTreeMap<String, T>, f: fn(T) -> RationaleRecord) -> Vec<RationaleRecord> {
            m.values().cloned().map(f).collect()
        }
        match kind {
            RecordKind::Event => all(&self.events, RationaleRecord::Event),
            RecordKind::Issue => all(&self.issues, RationaleRecord::Issue),
            RecordKind::Alternative => all(&self.alternatives, RationaleRecord::Alternative),
            RecordKind::Criterion => all(&self.criteria, RationaleRecord::Criterion),
            RecordKind::Assessment => all(&self.assessments, RationaleRecord::Assessment),
            RecordKind::Resolution => all(&self.resolutions, RationaleRecord::Resolution),
        }
    }

    pub fn alternatives_of<'a>(&'a self, issue_id: &'a str) -> impl Iterator<Item = &'a Alternative> + 'a {
        self.alternatives.values().filter(move |a| a.issue_id == issue_id)
    }

    pub fn assessments_of<'a>(&'a self, alternative_id: &'a str) -> impl Iterator<Item = &'a Assessment> + 'a {
        self.assessments
            .values()
            .filter(move |a| a.alternative_id == alternative_id)
    }

    /// Unchecked insert or replace.
    pub fn insert(&mut self, r: RationaleRecord) {
        match r {
            RationaleRecord::Event(x) => {
                self.events.insert(x.id.clone(), x);
            }
            RationaleRecord::Issue(x) => {
                self.issues.insert(x.id.clone(), x);
            }
            RationaleRecord::Alternative(x) => {
                self.alternatives.insert(x.id.clone(), x);
            }
            RationaleRecord::Criterion(x) => {
                self.criteria.insert(x.id.clone(), x);
            }
            RationaleRecord::Assessment(x) => {
                self.assessments.insert(x.id.clone(), x);
            }
            RationaleRecord::Resolution(x) => {
                self.resolutions.insert(x.id.clone(), x);
            }
        }
    }

    /// Checks whether `r` may be appended as a new record or an amendment,
    /// given the status rules. Does not run [`validate_record`].
    pub fn check_append(&self, r: &RationaleRecord) -> Result<(), String> {
        let existing = self.get(r.kind(), r.id());
        match (existing, r) {
            (None, _) => {
                if r.status() == Some(Status::Closed) {
                    return Err(format!("{} {} cannot be created closed", r.kind(), r.id()));
                }
            }
            (Some(RationaleRecord::Issue(old)), RationaleRecord::Issue(new)) => {
                if old.status == Status::Closed {
                    return Err(format!("issue {} is closed and cannot be edited", old.id));
                }
                if new.status != old.status {
                    return Err(format!("issue {} status changes only through a transition", old.id));
                }
            }
            (Some(RationaleRecord::Resolution(old)), RationaleRecord::Resolution(new)) => {
                if new.status != old.status {
                    return Err(format!("resolution {} status changes only through a transition", old.id));
                }
                if old.status == Status::Closed {
                    let mut probe = new.clone();
                    probe.opens_issues = old.opens_issues.clone();
                    if probe != old {
                        return Err(format!(
                            "resolution {} is closed; only opens_issues may change",
                            old.id
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Checks whether `kind id` may be closed now.
    pub fn check_close(&self, kind: RecordKind, id: &str) -> Result<(), CloseError> {
        let status = match kind {
            RecordKind::Issue => self.issues.get(id).map(|i| i.status),
            RecordKind::Resolution => self.resolutions.get(id).map(|r| r.status),
            _ => return Err(CloseError::NoStatus(kind)),
        };
        match status {
            None => Err(CloseError::Unknown(kind, id.to_string())),
            Some(Status::Closed) => Err(CloseError::AlreadyClosed(kind, id.to_string())),
            Some(Status::Open) => Ok(()),
        }
    }

    fn close(&mut self, kind: RecordKind, id: &str, at: DateTime<Utc>) {
        match kind {
            RecordKind::Issue => {
                if let Some(i) = self.issues.get_mut(id) {
                    i.status = Status::Closed;
                }
            }
            RecordKind::Resolution => {
                if let Some(r) = self.resolutions.get_mut(id) {
                    r.status = Status::Closed;
                }
            }
            _ => return,
        }
        self.closed_at.insert((kind, id.to_string()), at);
    }

    /// Replays one journal entry, enforcing the append and status rules.
    pub fn apply_entry(&mut self, e: &Entry) -> Result<(), JournalError> {
        match e {
            Entry::Record { line, kind, id, fields } => {
                let err = |message: String| JournalError { line: *line, message };
                let kind: RecordKind = kind.parse().map_err(err)?;
                let rec = RationaleRecord::from_fields(kind, id, fields)
                    .map_err(|m| err(format!("{kind} {id}: {m}")))?;
                self.check_append(&rec).map_err(err)?;
                self.insert(rec);
            }
            Entry::Transition { line, kind, id, status, at } => {
                let err = |message: String| JournalError { line: *line, message };
                let kind: RecordKind = kind.parse().map_err(err)?;
                if status != "closed" {
                    return Err(err(format!("unsupported transition to {status:?}")));
                }
                self.check_close(kind, id).map_err(|e| err(e.to_string()))?;
                self.close(kind, id, *at);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CloseError {
    #[error("unknown {0} {1}")]
    Unknown(RecordKind, String),
    #[error("{0} {1} is already closed")]
    AlreadyClosed(RecordKind, String),
    #[error("{0} records have no status")]
    NoStatus(RecordKind),
}

/// Field-level and cross-reference checks for one record against a store.
/// The store may or may not already contain `r` itself.
pub fn validate_record(r: &RationaleRecord, store: &RecordStore) -> Vec<Diagnostic> {
    let id = r.id().to_string();
    let mut diags = Vec::new();
    let mut err = |m: String| diags.push(Diagnostic::error(DiagnosticKind::Record, &id, m));

    if !text::is_token(r.id()) {
        err(format!("invalid record id {:?}", r.id()));
    }
    match r {
        RationaleRecord::Event(e) => {
            if e.name.trim().is_empty() {
                err(format!("event {} has no name", e.id));
            }
        }
        RationaleRecord::Issue(i) => {
            if let Some(ev) = &i.triggered_by {
                if !store.events.contains_key(ev) {
                    err(format!("issue {} refers to unknown event {ev}", i.id));
                }
            }
            if let IssueType::Other(label) = &i.issue_type {
                if label.trim().is_empty() {
                    err(format!("issue {} has an empty classification label", i.id));
                }
            }
        }
        RationaleRecord::Alternative(a) => {
            if !store.issues.contains_key(&a.issue_id) {
                err(format!("alternative {} refers to unknown issue {}", a.id, a.issue_id));
            }
            if a.subject.trim().is_empty() {
                err(format!("alternative {} has no subject", a.id));
            }
        }
        RationaleRecord::Criterion(c) => {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                err(format!("criterion {} weight must be positive, got {}", c.id, c.weight));
            }
            if c.name.trim().is_empty() {
                err(format!("criterion {} has no name", c.id));
            }
        }
        RationaleRecord::Assessment(a) => {
            if !(a.verdict.is_finite() && (NEGATIVE..=POSITIVE).contains(&a.verdict)) {
                err(format!("verdict out of [-1,1]: {}", a.verdict));
            }
            if !store.alternatives.contains_key(&a.alternative_id) {
                err(format!("assessment {} refers to unknown alternative {}", a.id, a.alternative_id));
            }
            if let Some(c) = &a.criterion_id {
                if !store.criteria.contains_key(c) {
                    err(format!("assessment {} refers to unknown criterion {c}", a.id));
                }
            }
            let dup = store.assessments.values().find(|o| {
                o.id != a.id && o.alternative_id == a.alternative_id && o.criterion_id == a.criterion_id
            });
            if let Some(o) = dup {
                let crit = a.criterion_id.as_deref().unwrap_or("(no criterion)");
                err(format!(
                    "{} is already assessed against {crit} by {}",
                    a.alternative_id, o.id
                ));
            }
        }
        RationaleRecord::Resolution(res) => {
            if !store.issues.contains_key(&res.issue_id) {
                err(format!("resolution {} refers to unknown issue {}", res.id, res.issue_id));
            }
            if let Some(alt) = &res.chosen_alternative_id {
                match store.alternatives.get(alt) {
                    None => err(format!("resolution {} chooses unknown alternative {alt}", res.id)),
                    Some(a) if a.issue_id != res.issue_id => err(format!(
                        "resolution {} chooses {alt}, which belongs to issue {} instead of {}",
                        res.id, a.issue_id, res.issue_id
                    )),
                    Some(_) => {}
                }
            }
            for opened in &res.opens_issues {
                if !store.issues.contains_key(opened) {
                    err(format!("resolution {} opens unknown issue {opened}", res.id));
                }
            }
        }
    }
    diags
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    Required,
    Optional,
    NotCollected,
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Requirement::Required => "required",
            Requirement::Optional => "optional",
            Requirement::NotCollected => "not-collected",
        })
    }
}

/// What each level asks for, per element of the rationale model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelSchema {
    pub level: DeploymentLevel,
    pub justification: Requirement,
    pub issue: Requirement,
    pub resolution: Requirement,
    pub event: Requirement,
    pub alternative: Requirement,
    pub criterion: Requirement,
    pub assessment: Requirement,
    /// Assessments that are recorded must name a criterion.
    pub criterion_based_assessment: bool,
}

impl LevelSchema {
    pub fn rows(&self) -> [(&'static str, Requirement); 7] {
        [
            ("justification", self.justification),
            ("issue", self.issue),
            ("resolution", self.resolution),
            ("event", self.event),
            ("alternative", self.alternative),
            ("criterion", self.criterion),
            ("assessment", self.assessment),
        ]
    }
}

pub fn required_elements(level: DeploymentLevel) -> LevelSchema {
    use Requirement::*;
    let at = |k: DeploymentLevel, req: Requirement| if level >= k { req } else { NotCollected };
    LevelSchema {
        level,
        // A linked resolution's justification field satisfies this at every level.
        justification: Required,
        issue: at(DeploymentLevel::L1, Required),
        resolution: at(DeploymentLevel::L1, Required),
        event: at(DeploymentLevel::L2, Required),
        alternative: at(DeploymentLevel::L2, Optional),
        criterion: at(DeploymentLevel::L3, Optional),
        assessment: at(DeploymentLevel::L2, Optional),
        criterion_based_assessment: level >= DeploymentLevel::L3,
    }
}

/// A change's rationale: either a resolution or, at level 0, free text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkTarget {
    Resolution(String),
    Justification(String),
}

impl fmt::Display for LinkTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkTarget::Resolution(id) => f.write_str(id),
            LinkTarget::Justification(t) => write!(f, "{}", text::quote(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationaleLink {
    pub change_id: String,
    pub target: LinkTarget,
}

impl RationaleLink {
    pub fn new(change_id: impl Into<String>, target: LinkTarget) -> Self {
        RationaleLink {
            change_id: change_id.into(),
            target,
        }
    }
}

/// Checks that every change in `cs` carries exactly one link satisfying the
/// schema of `level`. Warnings are emitted for thin but admissible rationale
/// (no affected entities, no alternatives) from level 2 on.
pub fn validate_changeset_rationale(
    cs: &ChangeSet,
    store: &RecordStore,
    level: DeploymentLevel,
) -> Vec<Diagnostic> {
    let schema = required_elements(level);
    let mut diags = Vec::new();
    let rerr = |s: &str, m: String| Diagnostic::error(DiagnosticKind::Rationale, s, m);

    for c in &cs.changes {
        let links: Vec<_> = cs.links_for(&c.change_id).collect();
        match links.as_slice() {
            [] => diags.push(rerr(&c.change_id, format!("change {} has no rationale link", c.change_id))),
            [link] => check_link(&c.change_id, link, store, &schema, &mut diags),
            many => diags.push(rerr(
                &c.change_id,
                format!("change {} has {} rationale links", c.change_id, many.len()),
            )),
        }
    }
    for l in &cs.links {
        if cs.change(&l.change_id).is_none() {
            diags.push(rerr(&l.change_id, format!("link refers to unknown change {}", l.change_id)));
        }
    }

    let mut seen = BTreeSet::new();
    diags.retain(|d| seen.insert((d.severity, d.subject.clone(), d.message.clone())));
    diags
}

fn check_link(
    change_id: &str,
    link: &RationaleLink,
    store: &RecordStore,
    schema: &LevelSchema,
    diags: &mut Vec<Diagnostic>,
) {
    let level = schema.level;
    let rerr = |s: &str, m: String| Diagnostic::error(DiagnosticKind::Rationale, s, m);
    let warn = |s: &str, m: String| Diagnostic::warning(DiagnosticKind::Rationale, s, m);

    let res_id = match &link.target {
        LinkTarget::Justification(text) => {
            if text.trim().is_empty() {
                diags.push(rerr(change_id, format!("change {change_id} has an empty justification")));
            }
            if schema.resolution == Requirement::Required {
                diags.push(rerr(
                    change_id,
                    format!("change {change_id} needs a resolution link at level {level}, not a bare justification"),
                ));
            }
            return;
        }
        LinkTarget::Resolution(id) => id,
    };

    let Some(res) = store.resolutions.get(res_id) else {
        diags.push(rerr(change_id, format!("change {change_id} links unknown resolution {res_id}")));
        return;
    };
    if res.justification.trim().is_empty() {
        diags.push(rerr(res_id, format!("resolution {res_id} has an empty justification")));
    }
    if schema.issue != Requirement::Required {
        return;
    }

    let Some(issue) = store.issues.get(&res.issue_id) else {
        diags.push(rerr(res_id, format!("resolution {res_id} refers to unknown issue {}", res.issue_id)));
        return;
    };
    if issue.question.trim().is_empty() {
        diags.push(rerr(&issue.id, format!("issue {} has no question", issue.id)));
    }
    if schema.event != Requirement::Required {
        return;
    }

    match &issue.triggered_by {
        None => diags.push(rerr(&issue.id, format!("issue {} lacks event at level {level}", issue.id))),
        Some(ev) if !store.events.contains_key(ev) => diags.push(rerr(
            &issue.id,
            format!("issue {} refers to unknown event {ev}", issue.id),
        )),
        Some(_) => {}
    }
    if issue.affected_entities.is_empty() {
        diags.push(warn(&issue.id, format!("issue {} names no affected entities", issue.id)));
    }
    let alternatives: Vec<_> = store.alternatives_of(&issue.id).collect();
    if alternatives.is_empty() {
        diags.push(warn(&issue.id, format!("issue {} was resolved without alternatives", issue.id)));
    }
    if schema.criterion_based_assessment {
        for alt in &alternatives {
            for a in store.assessments_of(&alt.id) {
                if a.criterion_id.is_none() {
                    diags.push(rerr(
                        &a.id,
                        format!(
                            "assessment {} of {} has no criterion; level {level} assessments are criterion-based",
                            a.id, alt.id
                        ),
                    ));
                }
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::clock::parse_timestamp;
    use crate::delta::{Change, ChangeKind};
    use crate::metamodel::tests::id;

    pub fn ts() -> DateTime<Utc> {
        parse_timestamp("2009-05-16T10:30:00Z").unwrap()
    }

    pub fn event(id: &str) -> Event {
        Event {
            id: id.into(),
            name: "ECSS revision".into(),
            short_description: "new standard release".into(),
            event_type: EventType::External,
            occurred_at: ts(),
        }
    }

    pub fn issue(id: &str, ev: Option<&str>) -> Issue {
        Issue {
            id: id.into(),
            triggered_by: ev.map(String::from),
            question: "Is step 3 precise enough?".into(),
            issue_type: IssueType::Imprecision,
            status: Status::Open,
            detailed_discussion: String::new(),
            affected_entities: [id_of("A1")].into(),
        }
    }

    fn id_of(s: &str) -> EntityId {
        id(s)
    }

    pub fn alternative(id: &str, issue: &str) -> Alternative {
        Alternative {
            id: id.into(),
            issue_id: issue.into(),
            subject: "rewrite step".into(),
            description: String::new(),
        }
    }

    pub fn resolution(id: &str, issue: &str) -> Resolution {
        Resolution {
            id: id.into(),
            issue_id: issue.into(),
            chosen_alternative_id: None,
            short_description: "clarify".into(),
            long_description: String::new(),
            justification: "reviewers asked for it".into(),
            status: Status::Open,
            opens_issues: BTreeSet::new(),
        }
    }

    fn one_change(link: Option<LinkTarget>) -> ChangeSet {
        let mut cs = crate::delta::diff(&Default::default(), &Default::default());
        cs.changes.push(Change::new(
            "C-1",
            ChangeKind::SetAttr { entity: id("A1"), key: "name".into(), old: Some("Desing".into()), new: "Design".into() },
        ));
        if let Some(t) = link {
            cs.links.push(RationaleLink::new("C-1", t));
        }
        cs
    }

    #[test]
    fn schema_table() {
        let l0 = required_elements(DeploymentLevel::L0);
        assert_eq!(l0.justification, Requirement::Required);
        assert_eq!(l0.issue, Requirement::NotCollected);
        let l1 = required_elements(DeploymentLevel::L1);
        assert_eq!((l1.issue, l1.resolution, l1.event), (Requirement::Required, Requirement::Required, Requirement::NotCollected));
        let l2 = required_elements(DeploymentLevel::L2);
        assert_eq!(l2.event, Requirement::Required);
        assert_eq!(l2.alternative, Requirement::Optional);
        assert!(!l2.criterion_based_assessment);
        let l3 = required_elements(DeploymentLevel::L3);
        assert_eq!(l3.criterion, Requirement::Optional);
        assert!(l3.criterion_based_assessment);
    }

    #[test]
    fn record_validation() {
        let mut store = RecordStore::new();
        let ev = RationaleRecord::Event(Event { event_type: EventType::Internal, ..event("EV-1") });
        assert!(validate_record(&ev, &store).is_empty());
        store.insert(ev);
        store.insert(RationaleRecord::Issue(issue("IS-1", Some("EV-1"))));
        store.insert(RationaleRecord::Issue(issue("IS-2", None)));
        store.insert(RationaleRecord::Alternative(alternative("AL-1", "IS-1")));

        let bad_verdict = RationaleRecord::Assessment(Assessment {
            id: "AS-1".into(),
            alternative_id: "AL-1".into(),
            criterion_id: None,
            verdict: 1.5,
            note: String::new(),
        });
        let d = validate_record(&bad_verdict, &store);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "verdict out of [-1,1]: 1.5");

        let cross = RationaleRecord::Resolution(Resolution {
            chosen_alternative_id: Some("AL-1".into()),
            ..resolution("RS-1", "IS-2")
        });
        let d = validate_record(&cross, &store);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("belongs to issue IS-1"));

        let orphan = RationaleRecord::Alternative(alternative("AL-2", "IS-9"));
        assert_eq!(validate_record(&orphan, &store).len(), 1);

        let weightless = RationaleRecord::Criterion(Criterion {
            id: "CR-1".into(),
            name: "cost".into(),
            description: String::new(),
            weight: 0.0,
            gqm_source: None,
        });
        assert_eq!(validate_record(&weightless, &store).len(), 1);
    }

    #[test]
    fn duplicate_assessment_pair() {
        let mut store = RecordStore::new();
        store.insert(RationaleRecord::Issue(issue("IS-1", None)));
        store.insert(RationaleRecord::Alternative(alternative("AL-1", "IS-1")));
        let a = Assessment { id: "AS-1".into(), alternative_id: "AL-1".into(), criterion_id: None, verdict: 1.0, note: String::new() };
        store.insert(RationaleRecord::Assessment(a.clone()));
        assert!(validate_record(&RationaleRecord::Assessment(a.clone()), &store).is_empty());
        let again = Assessment { id: "AS-2".into(), ..a };
        assert_eq!(validate_record(&RationaleRecord::Assessment(again), &store).len(), 1);
    }

    #[test]
    fn level_zero_justification() {
        let cs = one_change(Some(LinkTarget::Justification("fix misspelling in step 3".into())));
        assert!(validate_changeset_rationale(&cs, &RecordStore::new(), DeploymentLevel::L0).is_empty());
        let d = validate_changeset_rationale(&cs, &RecordStore::new(), DeploymentLevel::L1);
        assert_eq!(d.len(), 1);
        let empty = one_change(Some(LinkTarget::Justification("  ".into())));
        assert_eq!(validate_changeset_rationale(&empty, &RecordStore::new(), DeploymentLevel::L0).len(), 1);
    }

    #[test]
    fn level_one_missing_link() {
        let cs = one_change(None);
        let d = validate_changeset_rationale(&cs, &RecordStore::new(), DeploymentLevel::L1);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].subject, "C-1");
        assert!(d[0].message.contains("C-1"));
    }

    #[test]
    fn level_two_needs_event() {
        let mut store = RecordStore::new();
        store.insert(RationaleRecord::Issue(issue("IS-2", None)));
        store.insert(RationaleRecord::Resolution(resolution("RS-1", "IS-2")));
        let cs = one_change(Some(LinkTarget::Resolution("RS-1".into())));
        assert!(crate::diag::is_clean(&validate_changeset_rationale(&cs, &store, DeploymentLevel::L1)));
        let d = validate_changeset_rationale(&cs, &store, DeploymentLevel::L2);
        let errors: Vec<_> = d.iter().filter(|d| d.is_error()).collect();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].message, "issue IS-2 lacks event at level 2");
        // no alternatives recorded: warning only
        assert!(d.iter().any(|d| !d.is_error() && d.message.contains("without alternatives")));
    }

    #[test]
    fn level_three_rejects_bare_verdicts() {
        let mut store = RecordStore::new();
        store.insert(RationaleRecord::Event(event("EV-1")));
        store.insert(RationaleRecord::Issue(issue("IS-1", Some("EV-1"))));
        store.insert(RationaleRecord::Alternative(alternative("AL-1", "IS-1")));
        store.insert(RationaleRecord::Assessment(Assessment {
            id: "AS-1".into(),
            alternative_id: "AL-1".into(),
            criterion_id: None,
            verdict: POSITIVE,
            note: String::new(),
        }));
        store.insert(RationaleRecord::Resolution(resolution("RS-1", "IS-1")));
        let cs = one_change(Some(LinkTarget::Resolution("RS-1".into())));
        assert!(validate_changeset_rationale(&cs, &store, DeploymentLevel::L2).is_empty());
        let d = validate_changeset_rationale(&cs, &store, DeploymentLevel::L3);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].subject, "AS-1");
    }

    #[test]
    fn closed_records_are_frozen() {
        let mut store = RecordStore::new();
        store.insert(RationaleRecord::Issue(issue("IS-1", None)));
        store.insert(RationaleRecord::Issue(issue("IS-2", None)));
        store.insert(RationaleRecord::Resolution(resolution("RS-1", "IS-1")));
        store.close(RecordKind::Resolution, "RS-1", ts());
        let mut edit = resolution("RS-1", "IS-1");
        edit.status = Status::Closed;
        edit.justification = "rewritten".into();
        assert!(store.check_append(&RationaleRecord::Resolution(edit.clone())).is_err());
        edit.justification = resolution("RS-1", "IS-1").justification;
        edit.opens_issues.insert("IS-2".into());
        assert!(store.check_append(&RationaleRecord::Resolution(edit)).is_ok());
        assert_eq!(
            store.check_close(RecordKind::Resolution, "RS-1"),
            Err(CloseError::AlreadyClosed(RecordKind::Resolution, "RS-1".into()))
        );
        let mut reopen = issue("IS-1", None);
        store.close(RecordKind::Issue, "IS-1", ts());
        reopen.status = Status::Open;
        assert!(store.check_append(&RationaleRecord::Issue(reopen)).is_err());
    }

    #[test]
    fn fields_roundtrip() {
        let recs = vec![
            RationaleRecord::Event(event("EV-1")),
            RationaleRecord::Issue(Issue {
                issue_type: IssueType::Other("tailoring gap".into()),
                ..issue("IS-1", Some("EV-1"))
            }),
            RationaleRecord::Alternative(alternative("AL-1", "IS-1")),
            RationaleRecord::Criterion(Criterion {
                id: "CR-1".into(),
                name: "cost".into(),
                description: "effort in days".into(),
                weight: 0.1,
                gqm_source: Some("G1/Q2".into()),
            }),
            RationaleRecord::Assessment(Assessment {
                id: "AS-1".into(),
                alternative_id: "AL-1".into(),
                criterion_id: Some("CR-1".into()),
                verdict: -0.25,
                note: "hm".into(),
            }),
            RationaleRecord::Resolution(Resolution {
                opens_issues: ["IS-2".to_string(), "IS-3".to_string()].into(),
                chosen_alternative_id: Some("AL-1".into()),
                ..resolution("RS-1", "IS-1")
            }),
        ];
        for r in recs {
            let back = RationaleRecord::from_fields(r.kind(), r.id(), &r.to_fields()).unwrap();
            assert_eq!(back, r);
        }
        assert!(RationaleRecord::from_fields(
            RecordKind::Alternative,
            "AL-1",
            &[("issue".into(), "IS-1".into()), ("colour".into(), "red".into())]
        )
        .is_err());
    }

    #[test]
    fn issue_type_names() {
        for t in IssueType::STANDARD {
            assert_eq!(t.to_string().parse::<IssueType>().unwrap(), t);
        }
        assert!("misc".parse::<IssueType>().is_err());
        assert!("other:".parse::<IssueType>().is_err());
    }
}
