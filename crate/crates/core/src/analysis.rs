//! Read-only queries over a committed repository: open issues, conflicts
//! with a proposal, per-entity rationale history, the requirement
//! traceability matrix, and DOT export.
//!
//! All of them work on a [`RepoView`] and are recomputed on every call.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::assessment::{rank_alternatives, ScoredAlternative};
use crate::delta::Change;
use crate::metamodel::EntityId;
use crate::rationale::{
    Alternative, DeploymentLevel, Event, Issue, LinkTarget, RationaleLink, RecordStore, Resolution, Status,
};
use crate::repository::{RepoView, VersionId};
use crate::text;

/// Everything recorded about why one change was made. Fields are filled
/// only as deep as the level the change was committed at.
#[derive(Debug, Clone, PartialEq)]
pub struct RationaleChain {
    pub version: VersionId,
    pub change: Change,
    /// `None` while the change awaits rationale.
    pub link: Option<RationaleLink>,
    pub resolution: Option<Resolution>,
    pub issue: Option<Issue>,
    pub event: Option<Event>,
    pub alternatives: Vec<(Alternative, ScoredAlternative)>,
}

impl RationaleChain {
    /// Short form for reports: the resolution id, `justified`, or `none`.
    pub fn summary(&self) -> String {
        match self.link.as_ref().map(|l| &l.target) {
            Some(LinkTarget::Resolution(id)) => id.clone(),
            Some(LinkTarget::Justification(_)) => "justified".into(),
            None => "none".into(),
        }
    }
}

pub fn open_issues(store: &RecordStore) -> Vec<Issue> {
    store.issues.values().filter(|i| i.status == Status::Open).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConflictSubject {
    Request(String),
    Entities(BTreeSet<EntityId>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IssueHit {
    pub issue_id: String,
    pub overlap: BTreeSet<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ResolutionHit {
    pub resolution_id: String,
    pub version: VersionId,
    pub overlap: BTreeSet<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictReport {
    pub subject: ConflictSubject,
    pub issue_hits: Vec<IssueHit>,
    pub resolution_hits: Vec<ResolutionHit>,
}

impl ConflictReport {
    pub fn is_empty(&self) -> bool {
        self.issue_hits.is_empty() && self.resolution_hits.is_empty()
    }
}

/// Open issues and past resolutions whose entities overlap `scope`.
pub fn conflicts(view: &RepoView, scope: &BTreeSet<EntityId>) -> ConflictReport {
    conflicts_for(view, ConflictSubject::Entities(scope.clone()), scope)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unknown version {0}")]
    UnknownVersion(u64),
    #[error("unknown request {0}")]
    UnknownRequest(String),
}

/// [`conflicts`] over the scope of a change request.
pub fn request_conflicts(view: &RepoView, request_id: &str) -> Result<ConflictReport, AnalysisError> {
    let req = view
        .requests
        .get(request_id)
        .ok_or_else(|| AnalysisError::UnknownRequest(request_id.into()))?;
    Ok(conflicts_for(view, ConflictSubject::Request(request_id.into()), &req.scope))
}

fn conflicts_for(view: &RepoView, subject: ConflictSubject, scope: &BTreeSet<EntityId>) -> ConflictReport {
    let issue_hits = open_issues(&view.store)
        .into_iter()
        .map(|i| IssueHit { overlap: i.affected_entities.intersection(scope).cloned().collect(), issue_id: i.id })
        .filter(|h| !h.overlap.is_empty())
        .collect();

    let mut by_key: BTreeMap<(String, VersionId), BTreeSet<EntityId>> = BTreeMap::new();
    for cs in &view.changesets {
        for link in &cs.links {
            let LinkTarget::Resolution(rs) = &link.target else { continue };
            let Some(change) = cs.change(&link.change_id) else { continue };
            let overlap: Vec<_> = change.kind.touched_entities().into_iter().filter(|e| scope.contains(*e)).collect();
            if !overlap.is_empty() {
                by_key
                    .entry((rs.clone(), VersionId(cs.to_version)))
                    .or_default()
                    .extend(overlap.into_iter().cloned());
            }
        }
    }
    let resolution_hits = by_key
        .into_iter()
        .map(|((resolution_id, version), overlap)| ResolutionHit { resolution_id, version, overlap })
        .collect();
    ConflictReport { subject, issue_hits, resolution_hits }
}

fn chain_for(view: &RepoView, version: u64, change: &Change) -> RationaleChain {
    let cs = view.changeset(version).expect("version in range");
    let level = cs.level_at_commit;
    let link = cs.links_for(&change.change_id).next().cloned();
    let store = &view.store;
    let mut chain = RationaleChain {
        version: VersionId(version),
        change: change.clone(),
        link: link.clone(),
        resolution: None,
        issue: None,
        event: None,
        alternatives: Vec::new(),
    };
    let Some(LinkTarget::Resolution(rs)) = link.map(|l| l.target) else {
        return chain;
    };
    chain.resolution = store.resolutions.get(&rs).cloned();
    if level < DeploymentLevel::L1 {
        return chain;
    }
    chain.issue = chain.resolution.as_ref().and_then(|r| store.issues.get(&r.issue_id)).cloned();
    if level < DeploymentLevel::L2 {
        return chain;
    }
    let Some(issue) = &chain.issue else { return chain };
    chain.event = issue.triggered_by.as_ref().and_then(|e| store.events.get(e)).cloned();
    if let Ok(ranked) = rank_alternatives(&issue.id, store) {
        chain.alternatives = ranked
            .into_iter()
            .filter_map(|s| store.alternatives.get(&s.alternative_id).cloned().map(|a| (a, s)))
            .collect();
    }
    chain
}

/// Every change that touched `id`, oldest first, with its rationale.
pub fn entity_history(view: &RepoView, id: &str) -> Vec<RationaleChain> {
    let mut out = Vec::new();
    for cs in &view.changesets {
        for c in cs.changes.iter().filter(|c| c.kind.touches(id)) {
            out.push(chain_for(view, cs.to_version, c));
        }
    }
    out
}

fn latest_chain(view: &RepoView, id: &str) -> Option<RationaleChain> {
    entity_history(view, id).pop()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub requirement: EntityId,
    /// Sources of `relation_type` edges into the requirement.
    pub implementers: Vec<EntityId>,
    /// Latest rationale per implementer, same order.
    pub rationale: Vec<Option<RationaleChain>>,
}

impl TraceRow {
    pub fn is_uncovered(&self) -> bool {
        self.implementers.is_empty()
    }

    /// `row <requirement> <impl,...> <resolution,...|UNCOVERED>`
    pub fn porcelain(&self) -> String {
        if self.is_uncovered() {
            return format!("row {} - UNCOVERED", self.requirement);
        }
        let impls: Vec<_> = self.implementers.iter().map(EntityId::as_str).collect();
        let why: Vec<_> = self
            .rationale
            .iter()
            .map(|c| c.as_ref().map_or_else(|| "none".to_string(), RationaleChain::summary))
            .collect();
        format!("row {} {} {}", self.requirement, impls.join(","), why.join(","))
    }
}

/// One row per head entity of `requirement_type`, sorted by id.
pub fn trace_report(view: &RepoView, requirement_type: &str, relation_type: &str) -> Vec<TraceRow> {
    let model = &view.head_model;
    model
        .entities()
        .iter()
        .filter(|e| e.entity_type == requirement_type)
        .map(|req| {
            let implementers: Vec<EntityId> = model
                .relations()
                .iter()
                .filter(|r| r.relation_type == relation_type && r.target == req.id)
                .map(|r| r.source.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let rationale = implementers.iter().map(|i| latest_chain(view, i.as_str())).collect();
            TraceRow { requirement: req.id.clone(), implementers, rationale }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DotScope {
    All,
    Versions(RangeInclusive<u64>),
    Entities(BTreeSet<EntityId>),
}

/// Graph of records, changes and entities in the DOT language. Nodes and
/// edges are sorted, so equal repositories give equal bytes.
pub fn export_dot(view: &RepoView, scope: &DotScope) -> Result<String, AnalysisError> {
    let store = &view.store;
    if let DotScope::Versions(r) = scope {
        for v in [*r.start(), *r.end()] {
            if v > view.head.0 {
                return Err(AnalysisError::UnknownVersion(v));
            }
        }
    }

    let mut nodes: BTreeMap<String, (String, &'static str)> = BTreeMap::new();
    let mut edges: BTreeSet<(String, String, &'static str)> = BTreeSet::new();
    let mut resolutions = BTreeSet::new();

    for cs in &view.changesets {
        let v = cs.to_version;
        if let DotScope::Versions(r) = scope {
            if !r.contains(&v) {
                continue;
            }
        }
        for c in &cs.changes {
            let touched = c.kind.touched_entities();
            if let DotScope::Entities(set) = scope {
                if !touched.iter().any(|e| set.contains(*e)) {
                    continue;
                }
            }
            let cid = format!("v{v}:{}", c.change_id);
            nodes.insert(cid.clone(), (format!("{cid}\n{}", c.kind.name()), "note"));
            for e in touched {
                let eid = format!("entity:{e}");
                nodes.insert(eid.clone(), (e.to_string(), "component"));
                edges.insert((cid.clone(), eid, "modifies"));
            }
            for l in cs.links_for(&c.change_id) {
                if let LinkTarget::Resolution(rs) = &l.target {
                    resolutions.insert(rs.clone());
                    edges.insert((rs.clone(), cid.clone(), "implements"));
                }
            }
        }
    }
    if *scope == DotScope::All {
        resolutions.extend(store.resolutions.keys().cloned());
    }

    let mut issues: BTreeSet<String> = BTreeSet::new();
    for rs in &resolutions {
        match store.resolutions.get(rs) {
            Some(r) => {
                nodes.insert(rs.clone(), (format!("{rs}\n{}", r.short_description), "hexagon"));
                edges.insert((rs.clone(), r.issue_id.clone(), "resolves"));
                issues.insert(r.issue_id.clone());
            }
            None => {
                nodes.insert(rs.clone(), (rs.clone(), "hexagon"));
            }
        }
    }
    if *scope == DotScope::All {
        issues.extend(store.issues.keys().cloned());
    }
    for is in &issues {
        let Some(i) = store.issues.get(is) else {
            nodes.insert(is.clone(), (is.clone(), "box"));
            continue;
        };
        nodes.insert(is.clone(), (format!("{is}\n{}", i.question), "box"));
        if let Some(ev) = &i.triggered_by {
            let label = store.events.get(ev).map_or_else(|| ev.clone(), |e| format!("{ev}\n{}", e.name));
            nodes.insert(ev.clone(), (label, "diamond"));
            edges.insert((ev.clone(), is.clone(), "triggers"));
        }
        for a in store.alternatives_of(is) {
            nodes.insert(a.id.clone(), (format!("{}\n{}", a.id, a.subject), "ellipse"));
            edges.insert((is.clone(), a.id.clone(), "has-alternative"));
        }
    }
    if *scope == DotScope::All {
        for (id, e) in &store.events {
            nodes.insert(id.clone(), (format!("{id}\n{}", e.name), "diamond"));
        }
    }

    let mut out = String::from("digraph remis {\n");
    for (id, (label, shape)) in &nodes {
        let _ = writeln!(out, "  {} [shape={shape}, label={}];", text::quote(id), text::quote(label));
    }
    for (from, to, label) in &edges {
        let _ = writeln!(out, "  {} -> {} [label={}];", text::quote(from), text::quote(to), text::quote(label));
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta::{diff, ChangeSet};
    use crate::metamodel::tests::id;
    use crate::metamodel::{ProcessEntity, ProcessModel, Relation};
    use crate::rationale::tests::{event, issue, resolution};
    use crate::rationale::RationaleRecord;

    fn view_with(changesets: Vec<ChangeSet>, store: RecordStore, head_model: ProcessModel) -> RepoView {
        RepoView {
            level: DeploymentLevel::L3,
            head: VersionId(changesets.len() as u64),
            store,
            requests: BTreeMap::new(),
            changesets,
            head_model,
        }
    }

    fn commit(from: &ProcessModel, to: &ProcessModel, v: u64, level: DeploymentLevel, target: LinkTarget) -> ChangeSet {
        let mut cs = diff(from, to);
        cs.from_version = v - 1;
        cs.to_version = v;
        cs.level_at_commit = level;
        cs.links = cs.changes.iter().map(|c| RationaleLink::new(c.change_id.clone(), target.clone())).collect();
        cs
    }

    fn scope(ids: &[&str]) -> BTreeSet<EntityId> {
        ids.iter().map(|s| id(s)).collect()
    }

    #[test]
    fn open_issue_scan() {
        let mut store = RecordStore::new();
        assert!(open_issues(&store).is_empty());
        store.insert(RationaleRecord::Issue(issue("IS-1", None)));
        store.insert(RationaleRecord::Issue(Issue { status: Status::Closed, ..issue("IS-2", None) }));
        let ids: Vec<_> = open_issues(&store).into_iter().map(|i| i.id).collect();
        assert_eq!(ids, ["IS-1"]);
    }

    fn two_versions() -> (RepoView, ProcessModel) {
        let m0 = ProcessModel::new();
        let m1 = m0.clone().with_entity(ProcessEntity::new(id("A1"), "activity"));
        let m2 = m1.clone().with_entity(ProcessEntity::new(id("A2"), "activity"));
        let mut store = RecordStore::new();
        store.insert(RationaleRecord::Event(event("EV-1")));
        store.insert(RationaleRecord::Issue(issue("IS-1", Some("EV-1"))));
        store.insert(RationaleRecord::Resolution(resolution("RS-1", "IS-1")));
        let cs1 = commit(&m0, &m1, 1, DeploymentLevel::L0, LinkTarget::Justification("seed".into()));
        let cs2 = commit(&m1, &m2, 2, DeploymentLevel::L2, LinkTarget::Resolution("RS-1".into()));
        (view_with(vec![cs1, cs2], store, m2.clone()), m2)
    }

    #[test]
    fn conflict_overlaps() {
        let (view, _) = two_versions();
        assert!(conflicts(&view, &scope(&["Z9"])).is_empty());
        let r = conflicts(&view, &scope(&["A1", "A2"]));
        assert_eq!(r.issue_hits, [IssueHit { issue_id: "IS-1".into(), overlap: scope(&["A1"]) }]);
        assert_eq!(
            r.resolution_hits,
            [ResolutionHit { resolution_id: "RS-1".into(), version: VersionId(2), overlap: scope(&["A2"]) }]
        );
    }

    #[test]
    fn history_depth_follows_level() {
        let (view, _) = two_versions();
        assert!(entity_history(&view, "Q9").is_empty());
        let a1 = entity_history(&view, "A1");
        assert_eq!(a1.len(), 1);
        assert_eq!(a1[0].summary(), "justified");
        assert!(a1[0].resolution.is_none() && a1[0].issue.is_none());
        let a2 = entity_history(&view, "A2");
        assert_eq!(a2[0].version, VersionId(2));
        assert_eq!(a2[0].resolution.as_ref().unwrap().id, "RS-1");
        assert_eq!(a2[0].issue.as_ref().unwrap().id, "IS-1");
        assert_eq!(a2[0].event.as_ref().unwrap().id, "EV-1");
    }

    #[test]
    fn trace_rows() {
        let (view, m2) = two_versions();
        assert!(trace_report(&view, "requirement", "implements").is_empty());
        let m = m2
            .with_entity(ProcessEntity::new(id("Q1"), "requirement"))
            .with_entity(ProcessEntity::new(id("Q2"), "requirement"))
            .with_relation(Relation::new("implements", id("A2"), id("Q1")));
        let view = RepoView { head_model: m, ..view };
        let rows = trace_report(&view, "requirement", "implements");
        let lines: Vec<_> = rows.iter().map(TraceRow::porcelain).collect();
        assert_eq!(lines, ["row Q1 A2 RS-1", "row Q2 - UNCOVERED"]);
    }

    #[test]
    fn dot_export() {
        let empty = view_with(vec![], RecordStore::new(), ProcessModel::new());
        assert_eq!(export_dot(&empty, &DotScope::All).unwrap(), "digraph remis {\n}\n");
        assert_eq!(export_dot(&empty, &DotScope::Versions(1..=1)), Err(AnalysisError::UnknownVersion(1)));

        let (view, _) = two_versions();
        let dot = export_dot(&view, &DotScope::Versions(2..=2)).unwrap();
        assert_eq!(dot, export_dot(&view, &DotScope::Versions(2..=2)).unwrap());
        for needle in [
            "\"RS-1\" -> \"v2:C-1\" [label=\"implements\"];",
            "\"RS-1\" -> \"IS-1\" [label=\"resolves\"];",
            "\"v2:C-1\" -> \"entity:A2\" [label=\"modifies\"];",
            "\"EV-1\" -> \"IS-1\" [label=\"triggers\"];",
        ] {
            assert!(dot.contains(needle), "{needle}\n{dot}");
        }
        assert!(!dot.contains("entity:A1"));
    }
}
