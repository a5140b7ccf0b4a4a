//! Change requests, kept in `requests.rt` with the journal record syntax.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::journal::Entry;
use crate::metamodel::EntityId;
use crate::rationale::JournalError;

pub const REQUESTS_HEADER: &str = "remis-requests";
pub const REQUEST_KIND: &str = "request";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElicitationMode {
    /// Rationale is captured while the model is edited.
    Synchronous,
    /// Changes are committed first and linked to rationale afterwards.
    Asynchronous,
}

impl ElicitationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ElicitationMode::Synchronous => "synchronous",
            ElicitationMode::Asynchronous => "asynchronous",
        }
    }
}

impl fmt::Display for ElicitationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElicitationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synchronous" | "sync" => Ok(ElicitationMode::Synchronous),
            "asynchronous" | "async" => Ok(ElicitationMode::Asynchronous),
            _ => Err(format!("invalid elicitation mode {s:?}: expected synchronous or asynchronous")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequestStatus {
    Open,
    Accepted,
    Rejected,
    Done,
}

impl RequestStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RequestStatus::Open => "open",
            RequestStatus::Accepted => "accepted",
            RequestStatus::Rejected => "rejected",
            RequestStatus::Done => "done",
        }
    }

    pub fn can_become(self, next: RequestStatus) -> bool {
        use RequestStatus::*;
        matches!((self, next), (Open, Accepted) | (Open, Rejected) | (Accepted, Done))
    }

    pub fn is_active(self) -> bool {
        matches!(self, RequestStatus::Open | RequestStatus::Accepted)
    }
}

impl fmt::Display for RequestStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RequestStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(RequestStatus::Open),
            "accepted" => Ok(RequestStatus::Accepted),
            "rejected" => Ok(RequestStatus::Rejected),
            "done" => Ok(RequestStatus::Done),
            _ => Err(format!("invalid request status {s:?}: expected open, accepted, rejected or done")),
        }
    }
}

/// Free-text notes on the four prioritization factors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModeFactors {
    pub relevance: String,
    pub resources: String,
    pub infrastructure: String,
    pub maturity: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeRequest {
    pub id: String,
    pub description: String,
    pub proposer: String,
    /// 1..=5, 5 highest.
    pub priority: u8,
    pub scope: BTreeSet<EntityId>,
    pub elicitation_mode: ElicitationMode,
    pub mode_factors: ModeFactors,
    pub status: RequestStatus,
}

pub const PRIORITY_RANGE: std::ops::RangeInclusive<u8> = 1..=5;

impl ChangeRequest {
    pub fn new(description: impl Into<String>, mode: ElicitationMode) -> Self {
        ChangeRequest {
            id: String::new(),
            description: description.into(),
            proposer: String::new(),
            priority: 3,
            scope: BTreeSet::new(),
            elicitation_mode: mode,
            mode_factors: ModeFactors::default(),
            status: RequestStatus::Open,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if !PRIORITY_RANGE.contains(&self.priority) {
            return Err(format!("priority {} outside 1..5", self.priority));
        }
        if self.description.trim().is_empty() {
            return Err("change request has no description".into());
        }
        Ok(())
    }

    pub fn to_fields(&self) -> Vec<(String, String)> {
        let scope = self.scope.iter().map(EntityId::as_str).collect::<Vec<_>>().join(",");
        let f = &self.mode_factors;
        [
            ("description", self.description.clone()),
            ("proposer", self.proposer.clone()),
            ("priority", self.priority.to_string()),
            ("scope", scope),
            ("elicitation_mode", self.elicitation_mode.to_string()),
            ("relevance", f.relevance.clone()),
            ("resources", f.resources.clone()),
            ("infrastructure", f.infrastructure.clone()),
            ("maturity", f.maturity.clone()),
            ("status", self.status.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn from_fields(id: &str, fields: &[(String, String)]) -> Result<Self, String> {
        let mut map: BTreeMap<&str, &str> = fields.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let mut take = |k: &str| map.remove(k).unwrap_or_default().to_string();
        let priority = take("priority");
        let scope = take("scope");
        let mode = take("elicitation_mode");
        let status = take("status");
        let req = ChangeRequest {
            id: id.to_string(),
            description: take("description"),
            proposer: take("proposer"),
            priority: priority.parse().map_err(|_| format!("invalid priority {priority:?}"))?,
            scope: scope
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| EntityId::new(s).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?,
            elicitation_mode: mode.parse()?,
            mode_factors: ModeFactors {
                relevance: take("relevance"),
                resources: take("resources"),
                infrastructure: take("infrastructure"),
                maturity: take("maturity"),
            },
            status: status.parse()?,
        };
        if let Some(k) = map.keys().next() {
            return Err(format!("unknown field {k:?}"));
        }
        req.check()?;
        Ok(req)
    }
}

/// Replays a request journal. New requests start open; amendments may not
/// change the status or touch a finished request.
pub fn replay_requests(entries: &[Entry]) -> Result<BTreeMap<String, ChangeRequest>, JournalError> {
    let mut out: BTreeMap<String, ChangeRequest> = BTreeMap::new();
    for e in entries {
        match e {
            Entry::Record { line, kind, id, fields } => {
                let err = |message: String| JournalError { line: *line, message };
                if kind != REQUEST_KIND {
                    return Err(err(format!("unexpected record kind {kind:?}")));
                }
                let req = ChangeRequest::from_fields(id, fields).map_err(|m| err(format!("request {id}: {m}")))?;
                check_amend(out.get(id), &req).map_err(err)?;
                out.insert(id.clone(), req);
            }
            Entry::Transition { line, kind, id, status, .. } => {
                let err = |message: String| JournalError { line: *line, message };
                if kind != REQUEST_KIND {
                    return Err(err(format!("unexpected record kind {kind:?}")));
                }
                let next: RequestStatus = status.parse().map_err(err)?;
                let req = out.get_mut(id).ok_or_else(|| err(format!("unknown request {id}")))?;
                if !req.status.can_become(next) {
                    return Err(err(format!("request {id} cannot go from {} to {next}", req.status)));
                }
                req.status = next;
            }
        }
    }
    Ok(out)
}

pub fn check_amend(old: Option<&ChangeRequest>, new: &ChangeRequest) -> Result<(), String> {
    match old {
        None if new.status != RequestStatus::Open => Err(format!("request {} must be created open", new.id)),
        None => Ok(()),
        Some(old) if !old.status.is_active() => {
            Err(format!("request {} is {} and cannot be edited", old.id, old.status))
        }
        Some(old) if old.status != new.status => {
            Err(format!("request {} status changes only through a transition", old.id))
        }
        Some(_) => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::parse_timestamp;
    use crate::journal::{header, parse_journal, record_block, transition_line};

    #[test]
    fn status_machine() {
        use RequestStatus::*;
        assert!(Open.can_become(Accepted));
        assert!(Open.can_become(Rejected));
        assert!(Accepted.can_become(Done));
        assert!(!Open.can_become(Done));
        assert!(!Rejected.can_become(Accepted));
        assert!(!Done.can_become(Open));
    }

    #[test]
    fn journal_roundtrip() {
        let mut req = ChangeRequest::new("align reviews with ECSS", ElicitationMode::Asynchronous);
        req.id = "REQ-1".into();
        req.priority = 5;
        req.scope.insert(EntityId::new("A1").unwrap());
        req.mode_factors.resources = "two engineers".into();
        let at = parse_timestamp("2009-05-16T10:30:00Z").unwrap();
        let mut doc = header(REQUESTS_HEADER);
        doc.push_str(&record_block(REQUEST_KIND, "REQ-1", &req.to_fields()));
        doc.push_str(&transition_line(REQUEST_KIND, "REQ-1", "accepted", &at));
        let book = replay_requests(&parse_journal(&doc, REQUESTS_HEADER).unwrap()).unwrap();
        req.status = RequestStatus::Accepted;
        assert_eq!(book["REQ-1"], req);

        doc.push_str(&transition_line(REQUEST_KIND, "REQ-1", "rejected", &at));
        assert!(replay_requests(&parse_journal(&doc, REQUESTS_HEADER).unwrap()).is_err());
    }

    #[test]
    fn priority_bounds() {
        let mut req = ChangeRequest::new("x", ElicitationMode::Synchronous);
        req.priority = 0;
        assert!(req.check().is_err());
        req.priority = 6;
        assert!(req.check().is_err());
        req.priority = 1;
        assert!(req.check().is_ok());
    }
}
