//! Versioned on-disk store: model snapshots, changesets, the rationale and
//! request journals, and the active deployment level.
//!
//! ```text
//! remis.cfg          level, head and id counters
//! versions/<x>.pm    canonical model of version x
//! changesets/<x>.cs  changes from x-1 to x with their rationale links
//! rationale.rt       rationale record journal
//! requests.rt        change request journal
//! lock               present while a writer holds the repository
//! ```
//!
//! Mutations take the lock, check everything first, and only then write.
//! Every file is replaced through a rename so readers never see a partial
//! write; if a later write fails the earlier ones are rolled back.

mod config;
mod lock;
mod requests;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::clock::{Clock, SystemClock};
use crate::delta::{apply, diff, link_line, parse_changeset, serialize_changeset, validate_changeset, ChangeSet};
use crate::diag::{is_clean, Diagnostic, DiagnosticKind};
use crate::journal::{self, parse_journal, record_block, transition_line};
use crate::metamodel::{parse_model, serialize_model, validate_model, ProcessModel};
use crate::rationale::{
    validate_changeset_rationale, validate_record, CloseError, DeploymentLevel, LinkTarget, RationaleLink,
    RationaleRecord, RecordKind, RecordStore, Status, RATIONALE_HEADER,
};

pub use config::{Config, CONFIG_FILE};
pub use lock::{LockGuard, LOCK_FILE};
pub use requests::{
    replay_requests, ChangeRequest, ElicitationMode, ModeFactors, RequestStatus, PRIORITY_RANGE, REQUESTS_HEADER,
    REQUEST_KIND,
};

pub const VERSIONS_DIR: &str = "versions";
pub const CHANGESETS_DIR: &str = "changesets";
pub const RATIONALE_FILE: &str = "rationale.rt";
pub const REQUESTS_FILE: &str = "requests.rt";

pub const DEFAULT_LOCK_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VersionId(pub u64);

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn join_messages(diags: &[Diagnostic]) -> String {
    let errors: Vec<_> = diags.iter().filter(|d| d.is_error()).map(|d| d.message.as_str()).collect();
    if errors.is_empty() {
        "validation failed".into()
    } else {
        errors.join("; ")
    }
}

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{} is not empty", .0.display())]
    Occupied(PathBuf),
    #[error("{} is not a repository (no {CONFIG_FILE})", .0.display())]
    NotARepository(PathBuf),
    #[error("repository is locked by another writer ({})", .0.display())]
    Locked(PathBuf),
    #[error("{}: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },
    #[error("invalid model: {}", join_messages(.0))]
    InvalidModel(Vec<Diagnostic>),
    #[error("{}", join_messages(.0))]
    Validation(Vec<Diagnostic>),
    #[error("no changes: the model equals version {0}")]
    NoChanges(VersionId),
    #[error("unknown version {0}")]
    UnknownVersion(u64),
    #[error("unknown {0} {1}")]
    UnknownRecord(String, String),
    #[error("version {version} has no change {change}")]
    UnknownChange { version: VersionId, change: String },
    #[error("change {change} of version {version} is already linked")]
    AlreadyLinked { version: VersionId, change: String },
    #[error("{0} {1} is already closed")]
    AlreadyClosed(String, String),
    #[error("level decrease forbidden: {from} to {to}")]
    LevelDecrease { from: DeploymentLevel, to: DeploymentLevel },
    #[error("{0}")]
    Rejected(String),
}

impl RepoError {
    fn io(path: &Path, source: io::Error) -> Self {
        RepoError::Io { path: path.to_path_buf(), source }
    }

    fn corrupt(path: &Path, message: impl fmt::Display) -> Self {
        RepoError::Corrupt { path: path.to_path_buf(), message: message.to_string() }
    }

    /// Diagnostics carried by the error, if any.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            RepoError::InvalidModel(d) | RepoError::Validation(d) => d,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommitReport {
    pub version: VersionId,
    pub changes: usize,
    /// Non-blocking diagnostics from rationale validation.
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionInfo {
    pub version: VersionId,
    pub changes: usize,
    pub pending: usize,
    /// `None` for the baseline.
    pub level_at_commit: Option<DeploymentLevel>,
    pub request: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordFilter {
    pub status: Option<Status>,
    pub ids: Option<BTreeSet<String>>,
}

impl RecordFilter {
    pub fn matches(&self, r: &RationaleRecord) -> bool {
        if let Some(s) = self.status {
            if r.status() != Some(s) {
                return false;
            }
        }
        self.ids.as_ref().is_none_or(|ids| ids.contains(r.id()))
    }
}

/// Everything committed, read in one pass, for queries.
#[derive(Debug, Clone)]
pub struct RepoView {
    pub level: DeploymentLevel,
    pub head: VersionId,
    pub store: RecordStore,
    pub requests: std::collections::BTreeMap<String, ChangeRequest>,
    /// `changesets[i]` leads to version `i + 1`.
    pub changesets: Vec<ChangeSet>,
    pub head_model: ProcessModel,
}

impl RepoView {
    pub fn changeset(&self, version: u64) -> Option<&ChangeSet> {
        let i = usize::try_from(version.checked_sub(1)?).ok()?;
        self.changesets.get(i)
    }
}

/// Files written by one mutation, with their previous bytes for rollback.
#[derive(Default)]
struct Txn {
    touched: Vec<(PathBuf, Option<Vec<u8>>)>,
}

impl Txn {
    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), RepoError> {
        let before = match fs::read(path) {
            Ok(b) => Some(b),
            Err(e) if e.kind() == io::ErrorKind::NotFound => None,
            Err(e) => return Err(RepoError::io(path, e)),
        };
        self.touched.push((path.to_path_buf(), before));
        write_atomic(path, bytes)
    }

    fn rollback(self) {
        for (path, before) in self.touched.into_iter().rev() {
            let _ = match before {
                Some(b) => write_atomic(&path, &b),
                None => fs::remove_file(&path).map_err(|e| RepoError::io(&path, e)),
            };
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RepoError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| RepoError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| RepoError::io(path, e))
}

fn read_text(path: &Path) -> Result<String, RepoError> {
    fs::read_to_string(path).map_err(|e| RepoError::io(path, e))
}

pub struct Repository {
    root: PathBuf,
    clock: Arc<dyn Clock>,
    lock_timeout: Duration,
}

impl fmt::Debug for Repository {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Repository").field("root", &self.root).finish_non_exhaustive()
    }
}

impl Repository {
    /// Creates a repository at `path` holding `baseline` as version 0.
    pub fn init(path: impl AsRef<Path>, level: DeploymentLevel, baseline: &ProcessModel) -> Result<Self, RepoError> {
        let root = path.as_ref().to_path_buf();
        match fs::read_dir(&root) {
            Ok(mut entries) => {
                if entries.next().is_some() {
                    return Err(RepoError::Occupied(root));
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) if e.kind() == io::ErrorKind::NotADirectory => return Err(RepoError::Occupied(root)),
            Err(e) => return Err(RepoError::io(&root, e)),
        }
        let diags = validate_model(baseline);
        if !diags.is_empty() {
            return Err(RepoError::InvalidModel(diags));
        }
        for dir in [VERSIONS_DIR, CHANGESETS_DIR] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(|e| RepoError::io(&p, e))?;
        }
        let repo = Repository::open_unchecked(root);
        write_atomic(&repo.version_path(0), serialize_model(baseline).as_bytes())?;
        write_atomic(&repo.root.join(RATIONALE_FILE), journal::header(RATIONALE_HEADER).as_bytes())?;
        write_atomic(&repo.root.join(REQUESTS_FILE), journal::header(REQUESTS_HEADER).as_bytes())?;
        write_atomic(&repo.root.join(CONFIG_FILE), Config::new(level).serialize().as_bytes())?;
        Ok(repo)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self, RepoError> {
        let root = path.as_ref().to_path_buf();
        if !root.join(CONFIG_FILE).is_file() {
            return Err(RepoError::NotARepository(root));
        }
        Ok(Repository::open_unchecked(root))
    }

    fn open_unchecked(root: PathBuf) -> Self {
        Repository {
            root,
            clock: Arc::new(SystemClock),
            lock_timeout: DEFAULT_LOCK_TIMEOUT,
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_lock_timeout(mut self, timeout: Duration) -> Self {
        self.lock_timeout = timeout;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn version_path(&self, x: u64) -> PathBuf {
        self.root.join(VERSIONS_DIR).join(format!("{x}.pm"))
    }

    fn changeset_path(&self, x: u64) -> PathBuf {
        self.root.join(CHANGESETS_DIR).join(format!("{x}.cs"))
    }

    fn lock(&self) -> Result<LockGuard, RepoError> {
        LockGuard::acquire(&self.root, self.lock_timeout)
    }

    // ---- reads -------------------------------------------------------------

    pub fn config(&self) -> Result<Config, RepoError> {
        let path = self.root.join(CONFIG_FILE);
        Config::parse(&read_text(&path)?).map_err(|m| RepoError::corrupt(&path, m))
    }

    pub fn level(&self) -> Result<DeploymentLevel, RepoError> {
        Ok(self.config()?.level)
    }

    pub fn head(&self) -> Result<VersionId, RepoError> {
        Ok(VersionId(self.config()?.head))
    }

    fn read_version(&self, x: u64) -> Result<ProcessModel, RepoError> {
        let path = self.version_path(x);
        parse_model(&read_text(&path)?).map_err(|e| RepoError::corrupt(&path, e))
    }

    fn read_changeset(&self, x: u64) -> Result<ChangeSet, RepoError> {
        let path = self.changeset_path(x);
        parse_changeset(&read_text(&path)?).map_err(|e| RepoError::corrupt(&path, e))
    }

    pub fn get_version(&self, x: u64) -> Result<ProcessModel, RepoError> {
        if x > self.config()?.head {
            return Err(RepoError::UnknownVersion(x));
        }
        self.read_version(x)
    }

    pub fn get_changeset(&self, x: u64) -> Result<ChangeSet, RepoError> {
        if x == 0 || x > self.config()?.head {
            return Err(RepoError::UnknownVersion(x));
        }
        self.read_changeset(x)
    }

    pub fn list_versions(&self) -> Result<Vec<VersionInfo>, RepoError> {
        let head = self.config()?.head;
        let mut out = vec![VersionInfo {
            version: VersionId(0),
            changes: 0,
            pending: 0,
            level_at_commit: None,
            request: None,
        }];
        for x in 1..=head {
            let cs = self.read_changeset(x)?;
            out.push(VersionInfo {
                version: VersionId(x),
                changes: cs.changes.len(),
                pending: cs.unlinked().len(),
                level_at_commit: Some(cs.level_at_commit),
                request: cs.request.clone(),
            });
        }
        Ok(out)
    }

    /// Number of committed changes still awaiting rationale.
    pub fn pending_count(&self) -> Result<usize, RepoError> {
        Ok(self.list_versions()?.iter().map(|v| v.pending).sum())
    }

    pub fn store(&self) -> Result<RecordStore, RepoError> {
        let path = self.root.join(RATIONALE_FILE);
        let entries = parse_journal(&read_text(&path)?, RATIONALE_HEADER).map_err(|e| RepoError::corrupt(&path, e))?;
        RecordStore::replay(&entries).map_err(|e| RepoError::corrupt(&path, e))
    }

    pub fn requests(&self) -> Result<std::collections::BTreeMap<String, ChangeRequest>, RepoError> {
        let path = self.root.join(REQUESTS_FILE);
        let entries = parse_journal(&read_text(&path)?, REQUESTS_HEADER).map_err(|e| RepoError::corrupt(&path, e))?;
        replay_requests(&entries).map_err(|e| RepoError::corrupt(&path, e))
    }

    pub fn get_request(&self, id: &str) -> Result<ChangeRequest, RepoError> {
        self.requests()?
            .remove(id)
            .ok_or_else(|| RepoError::UnknownRecord(REQUEST_KIND.into(), id.into()))
    }

    pub fn get_record(&self, kind: RecordKind, id: &str) -> Result<RationaleRecord, RepoError> {
        self.store()?
            .get(kind, id)
            .ok_or_else(|| RepoError::UnknownRecord(kind.name().into(), id.into()))
    }

    pub fn list_records(&self, kind: RecordKind, filter: &RecordFilter) -> Result<Vec<RationaleRecord>, RepoError> {
        Ok(self.store()?.records(kind).into_iter().filter(|r| filter.matches(r)).collect())
    }

    pub fn view(&self) -> Result<RepoView, RepoError> {
        let cfg = self.config()?;
        let changesets = (1..=cfg.head).map(|x| self.read_changeset(x)).collect::<Result<_, _>>()?;
        Ok(RepoView {
            level: cfg.level,
            head: VersionId(cfg.head),
            store: self.store()?,
            requests: self.requests()?,
            changesets,
            head_model: self.read_version(cfg.head)?,
        })
    }

    // ---- record writes -----------------------------------------------------

    /// Stores a new record under a freshly generated id, which is returned.
    /// The id already set on `r` is ignored.
    pub fn put_record(&self, mut r: RationaleRecord) -> Result<String, RepoError> {
        let _lock = self.lock()?;
        let mut cfg = self.config()?;
        let store = self.store()?;
        let id = cfg.allocate_record_id(r.kind());
        r.set_id(id.clone());
        self.check_record(&r, &store)?;
        let mut txn = Txn::default();
        let res = self
            .append_journal(&mut txn, RATIONALE_FILE, &record_block(r.kind().name(), &id, &r.to_fields()))
            .and_then(|_| txn.write(&self.root.join(CONFIG_FILE), cfg.serialize().as_bytes()));
        finish(txn, res).map(|_| id)
    }

    /// Appends a new state for an existing record.
    pub fn amend_record(&self, r: RationaleRecord) -> Result<(), RepoError> {
        let _lock = self.lock()?;
        let store = self.store()?;
        if !store.contains(r.kind(), r.id()) {
            return Err(RepoError::UnknownRecord(r.kind().name().into(), r.id().into()));
        }
        self.check_record(&r, &store)?;
        let mut txn = Txn::default();
        let res = self.append_journal(&mut txn, RATIONALE_FILE, &record_block(r.kind().name(), r.id(), &r.to_fields()));
        finish(txn, res)
    }

    fn check_record(&self, r: &RationaleRecord, store: &RecordStore) -> Result<(), RepoError> {
        store.check_append(r).map_err(RepoError::Rejected)?;
        let diags = validate_record(r, store);
        if !is_clean(&diags) {
            return Err(RepoError::Validation(diags));
        }
        Ok(())
    }

    pub fn close_record(&self, kind: RecordKind, id: &str) -> Result<Status, RepoError> {
        let _lock = self.lock()?;
        let store = self.store()?;
        store.check_close(kind, id).map_err(|e| match e {
            CloseError::Unknown(k, id) => RepoError::UnknownRecord(k.name().into(), id),
            CloseError::AlreadyClosed(k, id) => RepoError::AlreadyClosed(k.name().into(), id),
            e @ CloseError::NoStatus(_) => RepoError::Rejected(e.to_string()),
        })?;
        let mut txn = Txn::default();
        let line = transition_line(kind.name(), id, Status::Closed.as_str(), &self.clock.now());
        let res = self.append_journal(&mut txn, RATIONALE_FILE, &line);
        finish(txn, res).map(|_| Status::Closed)
    }

    fn append_journal(&self, txn: &mut Txn, file: &str, text: &str) -> Result<(), RepoError> {
        let path = self.root.join(file);
        let mut doc = read_text(&path)?;
        doc.push_str(text);
        txn.write(&path, doc.as_bytes())
    }

    // ---- change requests ---------------------------------------------------

    pub fn put_request(&self, mut req: ChangeRequest) -> Result<String, RepoError> {
        let _lock = self.lock()?;
        let mut cfg = self.config()?;
        self.requests()?;
        req.id = format!("REQ-{}", cfg.allocate(REQUEST_KIND));
        req.status = RequestStatus::Open;
        req.check().map_err(RepoError::Rejected)?;
        let mut txn = Txn::default();
        let res = self
            .append_journal(&mut txn, REQUESTS_FILE, &record_block(REQUEST_KIND, &req.id, &req.to_fields()))
            .and_then(|_| txn.write(&self.root.join(CONFIG_FILE), cfg.serialize().as_bytes()));
        finish(txn, res).map(|_| req.id)
    }

    pub fn amend_request(&self, req: ChangeRequest) -> Result<(), RepoError> {
        let _lock = self.lock()?;
        let book = self.requests()?;
        let old = book
            .get(&req.id)
            .ok_or_else(|| RepoError::UnknownRecord(REQUEST_KIND.into(), req.id.clone()))?;
        requests::check_amend(Some(old), &req).map_err(RepoError::Rejected)?;
        req.check().map_err(RepoError::Rejected)?;
        let mut txn = Txn::default();
        let res = self.append_journal(&mut txn, REQUESTS_FILE, &record_block(REQUEST_KIND, &req.id, &req.to_fields()));
        finish(txn, res)
    }

    pub fn set_request_status(&self, id: &str, status: RequestStatus) -> Result<(), RepoError> {
        let _lock = self.lock()?;
        let book = self.requests()?;
        let req = book
            .get(id)
            .ok_or_else(|| RepoError::UnknownRecord(REQUEST_KIND.into(), id.into()))?;
        if !req.status.can_become(status) {
            return Err(RepoError::Rejected(format!(
                "request {id} cannot go from {} to {status}",
                req.status
            )));
        }
        let mut txn = Txn::default();
        let line = transition_line(REQUEST_KIND, id, status.as_str(), &self.clock.now());
        let res = self.append_journal(&mut txn, REQUESTS_FILE, &line);
        finish(txn, res)
    }

    // ---- commits -----------------------------------------------------------

    /// Synchronous commit with explicit links (change ids follow the
    /// canonical diff of head and `new_model`).
    pub fn commit(&self, new_model: &ProcessModel, links: Vec<RationaleLink>) -> Result<CommitReport, RepoError> {
        self.commit_with(new_model, |_| links, None)
    }

    /// Synchronous commit linking every change to `target`.
    pub fn commit_all(
        &self,
        new_model: &ProcessModel,
        target: LinkTarget,
        request: Option<&str>,
    ) -> Result<CommitReport, RepoError> {
        self.commit_with(
            new_model,
            |cs| cs.changes.iter().map(|c| RationaleLink::new(c.change_id.clone(), target.clone())).collect(),
            request,
        )
    }

    fn commit_with(
        &self,
        new_model: &ProcessModel,
        links: impl FnOnce(&ChangeSet) -> Vec<RationaleLink>,
        request: Option<&str>,
    ) -> Result<CommitReport, RepoError> {
        let _lock = self.lock()?;
        let cfg = self.config()?;
        let mut cs = self.prepare(&cfg, new_model)?;
        cs.links = links(&cs);
        let store = self.store()?;
        if let Some(req) = request {
            let book = self.requests()?;
            match book.get(req) {
                None => return Err(RepoError::UnknownRecord(REQUEST_KIND.into(), req.into())),
                Some(r) if !r.status.is_active() => {
                    return Err(RepoError::Rejected(format!("request {req} is {}", r.status)))
                }
                Some(_) => cs.request = Some(req.to_string()),
            }
        }
        let diags = validate_changeset_rationale(&cs, &store, cfg.level);
        if !is_clean(&diags) {
            return Err(RepoError::Validation(diags));
        }
        self.write_commit(cfg, &cs, new_model, &store)?;
        Ok(CommitReport { version: VersionId(cs.to_version), changes: cs.changes.len(), warnings: diags })
    }

    /// Asynchronous commit: stores the changes without rationale. Needs an
    /// open or accepted asynchronous change request; when `request` is
    /// `None` the lowest-numbered such request is used.
    pub fn commit_unlinked(&self, new_model: &ProcessModel, request: Option<&str>) -> Result<CommitReport, RepoError> {
        let _lock = self.lock()?;
        let cfg = self.config()?;
        let mut cs = self.prepare(&cfg, new_model)?;
        let book = self.requests()?;
        let usable = |r: &ChangeRequest| r.status.is_active() && r.elicitation_mode == ElicitationMode::Asynchronous;
        let req = match request {
            Some(id) => {
                let r = book
                    .get(id)
                    .ok_or_else(|| RepoError::UnknownRecord(REQUEST_KIND.into(), id.into()))?;
                if !usable(r) {
                    return Err(RepoError::Rejected(format!(
                        "request {id} is not an active asynchronous request"
                    )));
                }
                r
            }
            None => book
                .values()
                .filter(|r| usable(r))
                .min_by_key(|r| request_number(&r.id))
                .ok_or_else(|| {
                    RepoError::Rejected("unlinked commits need an active asynchronous change request".into())
                })?,
        };
        cs.request = Some(req.id.clone());
        let store = self.store()?;
        self.write_commit(cfg, &cs, new_model, &store)?;
        Ok(CommitReport { version: VersionId(cs.to_version), changes: cs.changes.len(), warnings: Vec::new() })
    }

    fn prepare(&self, cfg: &Config, new_model: &ProcessModel) -> Result<ChangeSet, RepoError> {
        let diags = validate_model(new_model);
        if !diags.is_empty() {
            return Err(RepoError::InvalidModel(diags));
        }
        let head = self.read_version(cfg.head)?;
        let mut cs = diff(&head, new_model);
        if cs.is_empty() {
            return Err(RepoError::NoChanges(VersionId(cfg.head)));
        }
        cs.from_version = cfg.head;
        cs.to_version = cfg.head + 1;
        cs.level_at_commit = cfg.level;
        Ok(cs)
    }

    fn write_commit(
        &self,
        mut cfg: Config,
        cs: &ChangeSet,
        new_model: &ProcessModel,
        store: &RecordStore,
    ) -> Result<(), RepoError> {
        let x = cs.to_version;
        let mut txn = Txn::default();
        let res = (|| {
            txn.write(&self.version_path(x), serialize_model(new_model).as_bytes())?;
            txn.write(&self.changeset_path(x), serialize_changeset(cs).as_bytes())?;
            self.close_linked_resolutions(&mut txn, &cs.links, store)?;
            cfg.head = x;
            txn.write(&self.root.join(CONFIG_FILE), cfg.serialize().as_bytes())
        })();
        finish(txn, res)
    }

    fn close_linked_resolutions(
        &self,
        txn: &mut Txn,
        links: &[RationaleLink],
        store: &RecordStore,
    ) -> Result<(), RepoError> {
        let now = self.clock.now();
        let ids: BTreeSet<&str> = links
            .iter()
            .filter_map(|l| match &l.target {
                LinkTarget::Resolution(id) => Some(id.as_str()),
                LinkTarget::Justification(_) => None,
            })
            .filter(|id| store.resolutions.get(*id).is_some_and(|r| r.status == Status::Open))
            .collect();
        if ids.is_empty() {
            return Ok(());
        }
        let lines: String = ids
            .iter()
            .map(|id| transition_line(RecordKind::Resolution.name(), id, Status::Closed.as_str(), &now))
            .collect();
        self.append_journal(txn, RATIONALE_FILE, &lines)
    }

    /// Attaches rationale to changes committed without it.
    pub fn link_rationale(
        &self,
        version: u64,
        change_ids: &[String],
        target: LinkTarget,
    ) -> Result<ChangeSet, RepoError> {
        let _lock = self.lock()?;
        let cfg = self.config()?;
        if version == 0 || version > cfg.head {
            return Err(RepoError::UnknownVersion(version));
        }
        if change_ids.is_empty() {
            return Err(RepoError::Rejected("no change ids given".into()));
        }
        let mut cs = self.read_changeset(version)?;
        let v = VersionId(version);
        let mut seen = BTreeSet::new();
        for id in change_ids {
            if cs.change(id).is_none() {
                return Err(RepoError::UnknownChange { version: v, change: id.clone() });
            }
            if cs.links_for(id).next().is_some() || !seen.insert(id.as_str()) {
                return Err(RepoError::AlreadyLinked { version: v, change: id.clone() });
            }
        }
        let links: Vec<_> = change_ids.iter().map(|id| RationaleLink::new(id.clone(), target.clone())).collect();
        let store = self.store()?;
        let probe = ChangeSet {
            changes: cs.changes.iter().filter(|c| seen.contains(c.change_id.as_str())).cloned().collect(),
            links: links.clone(),
            ..cs.clone()
        };
        let diags = validate_changeset_rationale(&probe, &store, cfg.level);
        if !is_clean(&diags) {
            return Err(RepoError::Validation(diags));
        }

        let path = self.changeset_path(version);
        let mut doc = read_text(&path)?;
        for l in &links {
            doc.push_str(&link_line(l));
        }
        let mut txn = Txn::default();
        let res = txn
            .write(&path, doc.as_bytes())
            .and_then(|_| self.close_linked_resolutions(&mut txn, &links, &store));
        finish(txn, res)?;
        cs.links.extend(links);
        Ok(cs)
    }

    pub fn set_level(&self, level: DeploymentLevel) -> Result<DeploymentLevel, RepoError> {
        let _lock = self.lock()?;
        let mut cfg = self.config()?;
        if level < cfg.level {
            return Err(RepoError::LevelDecrease { from: cfg.level, to: level });
        }
        cfg.level = level;
        write_atomic(&self.root.join(CONFIG_FILE), cfg.serialize().as_bytes())?;
        Ok(level)
    }

    // ---- validation --------------------------------------------------------

    /// Full consistency check. Never fails; problems are diagnostics.
    pub fn validate_repository(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let integrity = |subject: String, message: String| Diagnostic::error(DiagnosticKind::Integrity, subject, message);
        let cfg = match self.config() {
            Ok(c) => c,
            Err(e) => return vec![integrity(CONFIG_FILE.into(), e.to_string())],
        };

        let mut models = Vec::new();
        for x in 0..=cfg.head {
            let path = self.version_path(x);
            let parsed = read_text(&path).and_then(|doc| {
                let m = parse_model(&doc).map_err(|e| RepoError::corrupt(&path, e))?;
                if serialize_model(&m) != doc {
                    return Err(RepoError::corrupt(&path, "not in canonical form"));
                }
                Ok(m)
            });
            models.push(match parsed {
                Ok(m) => Some(m),
                Err(e) => {
                    diags.push(integrity(format!("v{x}"), format!("version {x}: {e}")));
                    None
                }
            });
        }

        let store = match self.store() {
            Ok(s) => Some(s),
            Err(e) => {
                diags.push(integrity(RATIONALE_FILE.into(), e.to_string()));
                None
            }
        };
        let book = match self.requests() {
            Ok(b) => Some(b),
            Err(e) => {
                diags.push(integrity(REQUESTS_FILE.into(), e.to_string()));
                None
            }
        };

        let mut last_level = DeploymentLevel::L0;
        for x in 1..=cfg.head {
            let path = self.changeset_path(x);
            let cs = match read_text(&path).and_then(|doc| {
                let cs = parse_changeset(&doc).map_err(|e| RepoError::corrupt(&path, e))?;
                if serialize_changeset(&cs) != doc {
                    return Err(RepoError::corrupt(&path, "not in canonical form"));
                }
                Ok(cs)
            }) {
                Ok(cs) => cs,
                Err(e) => {
                    diags.push(integrity(format!("v{x}"), format!("changeset {x}: {e}")));
                    continue;
                }
            };
            let subject = format!("v{x}");
            if (cs.from_version, cs.to_version) != (x - 1, x) {
                diags.push(integrity(
                    subject.clone(),
                    format!("changeset {x} claims to lead from {} to {}", cs.from_version, cs.to_version),
                ));
            }
            for d in validate_changeset(&cs) {
                diags.push(integrity(subject.clone(), format!("changeset {x}: {}", d.message)));
            }
            if let (Some(prev), Some(this)) = (&models[(x - 1) as usize], &models[x as usize]) {
                match apply(prev, &cs) {
                    Ok(m) if serialize_model(&m) == serialize_model(this) => {}
                    Ok(_) => diags.push(integrity(
                        subject.clone(),
                        format!("version {x}: replaying changeset {x} on version {} does not reproduce it", x - 1),
                    )),
                    Err(e) => diags.push(integrity(
                        subject.clone(),
                        format!("version {x}: changeset {x} does not apply to version {}: {e}", x - 1),
                    )),
                }
            }
            if cs.level_at_commit < last_level || cs.level_at_commit > cfg.level {
                diags.push(integrity(
                    subject.clone(),
                    format!("version {x}: level {} breaks the non-decreasing level history", cs.level_at_commit),
                ));
            }
            last_level = last_level.max(cs.level_at_commit);
            if let (Some(req), Some(book)) = (&cs.request, &book) {
                if !book.contains_key(req) {
                    diags.push(integrity(subject.clone(), format!("version {x}: unknown change request {req}")));
                }
            }

            // Only asynchronous commits (made against a request) may lack links.
            let pending = cs.unlinked();
            for c in &pending {
                diags.push(if cs.request.is_some() {
                    Diagnostic::error(
                        DiagnosticKind::Pending,
                        format!("v{x}:{c}"),
                        format!("version {x}: change {c} awaits rationale"),
                    )
                } else {
                    integrity(format!("v{x}:{c}"), format!("version {x}: committed change {c} has lost its link"))
                });
            }
            if let Some(store) = &store {
                let linked = ChangeSet {
                    changes: cs.changes.iter().filter(|c| !pending.contains(&c.change_id.as_str())).cloned().collect(),
                    ..cs.clone()
                };
                for mut d in validate_changeset_rationale(&linked, store, cs.level_at_commit) {
                    d.message = format!("version {x}: {}", d.message);
                    diags.push(d);
                }
            }
        }

        if let Some(store) = &store {
            for kind in RecordKind::ALL {
                for r in store.records(kind) {
                    for d in validate_record(&r, store) {
                        diags.push(Diagnostic { kind: DiagnosticKind::Integrity, ..d });
                    }
                }
            }
        }
        diags
    }
}

fn request_number(id: &str) -> u64 {
    id.strip_prefix("REQ-").and_then(|n| n.parse().ok()).unwrap_or(u64::MAX)
}

fn finish(txn: Txn, res: Result<(), RepoError>) -> Result<(), RepoError> {
    if res.is_err() {
        txn.rollback();
    }
    res
}
