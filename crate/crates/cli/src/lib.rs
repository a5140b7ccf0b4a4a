//! The `remis` command line. [`run`] is the whole program minus process
//! plumbing, so tests drive it directly.

mod args;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{BufRead, IsTerminal, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::Parser;
use remis::analysis::{
    conflicts, entity_history, export_dot, open_issues, request_conflicts, trace_report, DotScope, RationaleChain,
};
use remis::assessment::rank_alternatives;
use remis::clock::{parse_timestamp, Clock, FixedClock, SystemClock};
use remis::delta::{diff, Change};
use remis::diag::Diagnostic;
use remis::metamodel::{parse_model, serialize_model, EntityId, ProcessModel};
use remis::rationale::{
    Alternative, Assessment, Criterion, DeploymentLevel, Event, Issue, LinkTarget, RationaleRecord, RecordKind,
    Resolution, Status,
};
use remis::repository::{ChangeRequest, ModeFactors, RecordFilter, RepoError, Repository};
use remis::text::format_token_value;
use remis::{Error, ErrorClass};

use args::*;

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    class: ErrorClass,
    message: String,
    diagnostics: Vec<Diagnostic>,
}

impl Failure {
    fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        Failure { class, message: message.into(), diagnostics: Vec::new() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(ErrorClass::Usage, message)
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e: Error = e.into();
        // Diagnostics are printed one per line, so the summary message that
        // joins them is replaced by a short header.
        let (message, diagnostics) = match &e {
            Error::Repo(RepoError::InvalidModel(d)) => ("invalid model".into(), d.clone()),
            Error::Repo(RepoError::Validation(d)) => (String::new(), d.clone()),
            _ => (e.to_string(), Vec::new()),
        };
        Failure { class: e.class(), message, diagnostics }
    }
}

type Res<T = ()> = Result<T, Failure>;

struct Ctx {
    root: PathBuf,
    porcelain: bool,
    clock: Arc<dyn Clock>,
    out: String,
    err: String,
}

impl Ctx {
    fn repo(&self) -> Res<Repository> {
        Ok(Repository::open(&self.root)?.with_clock(self.clock.clone()))
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    /// Porcelain line or human line, whichever mode is active.
    fn say(&mut self, porcelain: impl AsRef<str>, human: impl AsRef<str>) {
        let s = if self.porcelain { porcelain.as_ref() } else { human.as_ref() };
        self.line(s);
    }
}

/// Runs one invocation. `env_repo` is the value of `REMIS_REPO`, if set.
pub fn run<I, T>(argv: I, env_repo: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome { code: 0, stdout: text, stderr: String::new() },
                _ => Outcome { code: ErrorClass::Usage.exit_code(), stdout: String::new(), stderr: text },
            };
        }
    };
    let clock: Arc<dyn Clock> = match &cli.now {
        None => Arc::new(SystemClock),
        Some(s) => match parse_timestamp(s) {
            Some(t) => Arc::new(FixedClock(t)),
            None => {
                return Outcome {
                    code: ErrorClass::Usage.exit_code(),
                    stdout: String::new(),
                    stderr: format!("error: --now {s:?} is not an RFC 3339 timestamp\n"),
                }
            }
        },
    };
    let root = cli
        .repo
        .clone()
        .or_else(|| env_repo.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut ctx = Ctx { root, porcelain: cli.porcelain, clock, out: String::new(), err: String::new() };
    let code = match dispatch(&mut ctx, cli.command) {
        Ok(code) => code,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(ctx.err, "error: {}", f.message);
            }
            for d in &f.diagnostics {
                let _ = writeln!(ctx.err, "{d}");
            }
            f.class.exit_code()
        }
    };
    Outcome { code, stdout: ctx.out, stderr: ctx.err }
}

fn dispatch(ctx: &mut Ctx, cmd: Command) -> Res<i32> {
    match cmd {
        Command::Init { level, baseline } => init(ctx, &level, baseline.as_deref())?,
        Command::Import { file, out } => import(ctx, &file, out.as_deref())?,
        Command::Diff { a, b } => {
            let (a, b) = (read_model(&a)?, read_model(&b)?);
            print_changes(ctx, &diff(&a, &b).changes);
        }
        Command::Status { work } => status(ctx, &work)?,
        Command::Request(c) => request(ctx, c)?,
        Command::Event(EventCmd::Add { name, description, event_type, occurred_at }) => {
            let occurred_at = match occurred_at {
                Some(s) => parse_timestamp(&s).ok_or_else(|| Failure::usage(format!("--occurred-at {s:?} is not RFC 3339")))?,
                None => ctx.clock.now(),
            };
            let ev = Event {
                id: String::new(),
                name: required("name", name)?,
                short_description: description,
                event_type: parse_arg("type", &required("type", event_type)?)?,
                occurred_at,
            };
            put(ctx, RationaleRecord::Event(ev))?;
        }
        Command::Issue(c) => issue(ctx, c)?,
        Command::Alt(AltCmd::Add { issue, subject, description }) => {
            let alt = Alternative { id: String::new(), issue_id: issue, subject: required("subject", subject)?, description };
            put(ctx, RationaleRecord::Alternative(alt))?;
        }
        Command::Alt(AltCmd::Assess { alternative, verdict, criterion, note }) => {
            let a = Assessment {
                id: String::new(),
                alternative_id: alternative,
                criterion_id: criterion,
                verdict: parse_arg("verdict", &verdict)?,
                note,
            };
            put(ctx, RationaleRecord::Assessment(a))?;
        }
        Command::Criterion(CriterionCmd::Add { name, weight, description, gqm }) => {
            let c = Criterion {
                id: String::new(),
                name: required("name", name)?,
                description,
                weight: parse_arg("weight", &weight)?,
                gqm_source: gqm,
            };
            put(ctx, RationaleRecord::Criterion(c))?;
        }
        Command::Resolve(a) => {
            let r = Resolution {
                id: String::new(),
                issue_id: a.issue,
                chosen_alternative_id: a.alternative,
                short_description: a.summary,
                long_description: a.description,
                justification: required("justification", a.justification)?,
                status: Status::Open,
                opens_issues: split_list(&a.opens).into_iter().collect(),
            };
            put(ctx, RationaleRecord::Resolution(r))?;
        }
        Command::Rank { issue } => rank(ctx, &issue)?,
        Command::Commit(a) => commit(ctx, a)?,
        Command::Link(a) => link(ctx, a)?,
        Command::Level(LevelCmd::Show) => {
            let level = ctx.repo()?.level()?;
            ctx.say(format!("level {level}"), format!("deployment level {level}"));
        }
        Command::Level(LevelCmd::Set { level }) => {
            let level: DeploymentLevel = parse_arg("level", &level)?;
            ctx.repo()?.set_level(level)?;
            ctx.say(format!("level {level}"), format!("deployment level is now {level}"));
        }
        Command::Validate => return validate(ctx),
        Command::Query(q) => query(ctx, q)?,
        Command::Report(ReportCmd::Trace { requirement_type, relation }) => trace(ctx, &requirement_type, &relation)?,
        Command::Export(ExportCmd::Dot { version }) => {
            let view = ctx.repo()?.view()?;
            let scope = version.map_or(DotScope::All, |v| DotScope::Versions(v..=v));
            let dot = export_dot(&view, &scope)?;
            ctx.out.push_str(&dot);
        }
    }
    Ok(0)
}

// ---- helpers -----------------------------------------------------------------

fn read_file(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| {
        let class = if e.kind() == std::io::ErrorKind::NotFound { ErrorClass::NotFound } else { ErrorClass::Integrity };
        Failure::new(class, format!("{}: {e}", path.display()))
    })
}

fn read_model(path: &Path) -> Res<ProcessModel> {
    let doc = read_file(path)?;
    parse_model(&doc).map_err(|e| Failure::new(ErrorClass::Validation, format!("{}: {e}", path.display())))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn entity_set(s: &str) -> Res<BTreeSet<EntityId>> {
    split_list(s)
        .into_iter()
        .map(|x| EntityId::new(x).map_err(|e| Failure::usage(e.to_string())))
        .collect()
}

fn parse_arg<T: std::str::FromStr>(flag: &str, s: &str) -> Res<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

/// A required free-text field: taken from its flag, asked for on a
/// terminal, and a usage error otherwise.
fn required(flag: &str, value: Option<String>) -> Res<String> {
    if let Some(v) = value {
        return Ok(v);
    }
    let stdin = std::io::stdin();
    if stdin.is_terminal() {
        eprint!("{flag}: ");
        let _ = std::io::stderr().flush();
        let mut line = String::new();
        if stdin.lock().read_line(&mut line).is_ok() && !line.trim().is_empty() {
            return Ok(line.trim_end_matches(['\n', '\r']).to_string());
        }
    }
    Err(Failure::usage(format!("missing --{flag}")))
}

fn dash_list<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let v: Vec<_> = items.into_iter().collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(",")
    }
}

fn print_changes(ctx: &mut Ctx, changes: &[Change]) {
    if !ctx.porcelain {
        let n = changes.len();
        ctx.line(format!("{n} change{}", if n == 1 { "" } else { "s" }));
    }
    for c in changes {
        ctx.say(format!("change {} {}", c.change_id, c.kind), format!("  {} {}", c.change_id, c.kind));
    }
}

fn print_diags(ctx: &mut Ctx, diags: &[Diagnostic]) {
    for d in diags {
        let _ = writeln!(ctx.err, "{d}");
    }
}

// ---- commands ----------------------------------------------------------------

fn init(ctx: &mut Ctx, level: &str, baseline: Option<&Path>) -> Res {
    let level: DeploymentLevel = parse_arg("level", level)?;
    let model = match baseline {
        Some(p) => read_model(p)?,
        None => ProcessModel::new(),
    };
    let root = ctx.root.clone();
    Repository::init(&root, level, &model)?;
    ctx.say(
        format!("init level {level} head 0"),
        format!("initialized repository in {} at level {level} ({} entities)", root.display(), model.entities().len()),
    );
    Ok(())
}

fn import(ctx: &mut Ctx, file: &Path, out: Option<&Path>) -> Res {
    let model = read_model(file)?;
    let text = serialize_model(&model);
    match out {
        None => ctx.out.push_str(&text),
        Some(p) => {
            std::fs::write(p, &text)
                .map_err(|e| Failure::new(ErrorClass::Integrity, format!("{}: {e}", p.display())))?;
            ctx.say(
                format!("import {} entities {} relations", model.entities().len(), model.relations().len()),
                format!("wrote {} in canonical form", p.display()),
            );
        }
    }
    Ok(())
}

fn status(ctx: &mut Ctx, work: &Path) -> Res {
    let repo = ctx.repo()?;
    let head = repo.head()?;
    let model = read_model(work)?;
    let changes = diff(&repo.get_version(head.0)?, &model).changes;
    let pending = repo.pending_count()?;
    ctx.say(
        format!("head {head} level {} pending {pending}", repo.level()?),
        format!("head version {head}, level {}, {pending} change(s) awaiting rationale", repo.level()?),
    );
    print_changes(ctx, &changes);
    Ok(())
}

fn request(ctx: &mut Ctx, cmd: RequestCmd) -> Res {
    let repo = ctx.repo()?;
    match cmd {
        RequestCmd::New {
            description,
            proposer,
            priority,
            scope,
            mode,
            relevance,
            resources,
            infrastructure,
            maturity,
        } => {
            let mut req = ChangeRequest::new(required("description", description)?, parse_arg("mode", &mode)?);
            req.proposer = proposer;
            req.priority = priority;
            req.scope = entity_set(&scope)?;
            req.mode_factors = ModeFactors { relevance, resources, infrastructure, maturity };
            let id = repo.put_request(req)?;
            ctx.say(format!("request {id}"), format!("created change request {id}"));
        }
        RequestCmd::List => {
            let mut reqs: Vec<_> = repo.requests()?.into_values().collect();
            reqs.sort_by_key(|r| (std::cmp::Reverse(r.priority), request_number(&r.id)));
            for r in reqs {
                let scope = dash_list(r.scope.iter().map(EntityId::as_str));
                ctx.say(
                    format!(
                        "request {} {} {} {} {} {}",
                        r.id,
                        r.priority,
                        r.status,
                        r.elicitation_mode,
                        scope,
                        format_token_value(&r.description)
                    ),
                    format!(
                        "{:<7} p{} {:<9} {:<12} {:<12} {}",
                        r.id, r.priority, r.status, r.elicitation_mode, scope, r.description
                    ),
                );
            }
        }
        RequestCmd::SetPriority { id, priority } => {
            let mut req = repo.get_request(&id)?;
            req.priority = priority;
            repo.amend_request(req)?;
            ctx.say(format!("request {id} priority {priority}"), format!("{id} priority set to {priority}"));
        }
        RequestCmd::SetMode { id, mode } => {
            let mut req = repo.get_request(&id)?;
            req.elicitation_mode = parse_arg("mode", &mode)?;
            let mode = req.elicitation_mode;
            repo.amend_request(req)?;
            ctx.say(format!("request {id} mode {mode}"), format!("{id} elicitation mode set to {mode}"));
        }
        RequestCmd::SetStatus { id, status } => {
            let status = parse_arg("status", &status)?;
            repo.set_request_status(&id, status)?;
            ctx.say(format!("request {id} status {status}"), format!("{id} is now {status}"));
        }
    }
    Ok(())
}

fn request_number(id: &str) -> u64 {
    id.rsplit('-').next().and_then(|n| n.parse().ok()).unwrap_or(u64::MAX)
}

fn put(ctx: &mut Ctx, r: RationaleRecord) -> Res {
    let kind = r.kind();
    let id = ctx.repo()?.put_record(r)?;
    ctx.say(format!("{kind} {id}"), format!("recorded {kind} {id}"));
    Ok(())
}

fn issue_line(ctx: &mut Ctx, i: &Issue) {
    let ents = dash_list(i.affected_entities.iter().map(EntityId::as_str));
    let ev = i.triggered_by.as_deref().unwrap_or("-");
    ctx.say(
        format!(
            "issue {} {} {} {} {} {}",
            i.id,
            i.status.as_str(),
            i.issue_type,
            ev,
            ents,
            format_token_value(&i.question)
        ),
        format!("{:<6} {:<6} {:<15} {:<6} {:<12} {}", i.id, i.status.as_str(), i.issue_type.to_string(), ev, ents, i.question),
    );
}

fn issue(ctx: &mut Ctx, cmd: IssueCmd) -> Res {
    match cmd {
        IssueCmd::Open { question, issue_type, event, entities, discussion } => {
            let i = Issue {
                id: String::new(),
                triggered_by: event,
                question: required("question", question)?,
                issue_type: parse_arg("type", &required("type", issue_type)?)?,
                status: Status::Open,
                detailed_discussion: discussion,
                affected_entities: entity_set(&entities)?,
            };
            put(ctx, RationaleRecord::Issue(i))?;
        }
        IssueCmd::Close { id } => {
            ctx.repo()?.close_record(RecordKind::Issue, &id)?;
            ctx.say(format!("closed issue {id}"), format!("closed issue {id}"));
        }
        IssueCmd::List { status } => {
            let status = match status.as_str() {
                "all" => None,
                s => Some(parse_arg::<Status>("status", s)?),
            };
            let filter = RecordFilter { status, ..Default::default() };
            for r in ctx.repo()?.list_records(RecordKind::Issue, &filter)? {
                if let RationaleRecord::Issue(i) = r {
                    issue_line(ctx, &i);
                }
            }
        }
    }
    Ok(())
}

fn rank(ctx: &mut Ctx, issue: &str) -> Res {
    let store = ctx.repo()?.store()?;
    let ranked = rank_alternatives(issue, &store)?;
    let total = store.criteria.len();
    if !ctx.porcelain {
        ctx.line(format!("{:<4} {:<8} {:>8}  criteria  subject", "#", "id", "score"));
    }
    for (i, s) in ranked.iter().enumerate() {
        let subject = store.alternatives.get(&s.alternative_id).map_or("", |a| a.subject.as_str());
        ctx.say(
            format!("rank {} {} {} {}/{}", i + 1, s.alternative_id, s.score, s.covered_criteria, total),
            format!("{:<4} {:<8} {:>8}  {}/{}       {subject}", i + 1, s.alternative_id, s.score, s.covered_criteria, total),
        );
    }
    Ok(())
}

fn commit(ctx: &mut Ctx, a: CommitArgs) -> Res {
    let repo = ctx.repo()?;
    let model = read_model(&a.work)?;
    let report = if a.unlinked {
        repo.commit_unlinked(&model, a.request.as_deref())?
    } else {
        let target = match (a.resolution, a.justification) {
            (Some(r), _) => Some(LinkTarget::Resolution(r)),
            (None, Some(j)) => Some(LinkTarget::Justification(j)),
            (None, None) => None,
        };
        match target {
            Some(t) => repo.commit_all(&model, t, a.request.as_deref())?,
            None => repo.commit(&model, Vec::new())?,
        }
    };
    print_diags(ctx, &report.warnings);
    let v = report.version;
    let n = report.changes;
    if a.unlinked {
        ctx.say(
            format!("version {v} changes {n} pending {n}"),
            format!("committed version {v} ({n} changes awaiting rationale; use `remis link {v}`)"),
        );
    } else {
        ctx.say(format!("version {v} changes {n}"), format!("committed version {v} ({n} changes)"));
    }
    Ok(())
}

fn link(ctx: &mut Ctx, a: LinkArgs) -> Res {
    let repo = ctx.repo()?;
    let target = match (a.resolution, a.justification) {
        (Some(r), _) => LinkTarget::Resolution(r),
        (None, Some(j)) => LinkTarget::Justification(j),
        (None, None) => return Err(Failure::usage("need --resolution or --justification")),
    };
    let ids = split_list(&a.changes);
    let cs = repo.link_rationale(a.version, &ids, target.clone())?;
    let pending = repo.pending_count()?;
    let shown = match &target {
        LinkTarget::Resolution(r) => r.clone(),
        LinkTarget::Justification(_) => "justification".into(),
    };
    ctx.say(
        format!("linked {} {} {shown}", cs.to_version, ids.join(",")),
        format!("linked {} change(s) of version {} to {shown}", ids.len(), cs.to_version),
    );
    ctx.say(format!("pending {pending}"), format!("{pending} change(s) still await rationale"));
    Ok(())
}

fn validate(ctx: &mut Ctx) -> Res<i32> {
    let repo = ctx.repo()?;
    let diags = repo.validate_repository();
    let errors = diags.iter().filter(|d| d.is_error()).count();
    if ctx.porcelain {
        for d in &diags {
            let sev = if d.is_error() { "error" } else { "warning" };
            let kind = format!("{:?}", d.kind).to_lowercase();
            ctx.line(format!("diag {sev} {kind} {} {}", format_token_value(&d.subject), format_token_value(&d.message)));
        }
    } else {
        print_diags(ctx, &diags);
    }
    let class = ErrorClass::of_diagnostics(&diags);
    match class {
        None => ctx.say("clean", "repository is clean"),
        Some(_) => ctx.say(format!("failed {errors}"), format!("{errors} problem(s) found")),
    }
    Ok(class.map_or(0, ErrorClass::exit_code))
}

fn chain_line(ctx: &mut Ctx, c: &RationaleChain) {
    let issue = c.issue.as_ref().map_or("-", |i| i.id.as_str());
    let event = c.event.as_ref().map_or("-", |e| e.id.as_str());
    let alts = dash_list(c.alternatives.iter().map(|(a, _)| a.id.as_str()));
    if ctx.porcelain {
        ctx.line(format!(
            "history {} {} {} {} {issue} {event} {alts}",
            c.version,
            c.change.change_id,
            c.change.kind.name(),
            c.summary()
        ));
        return;
    }
    ctx.line(format!("version {} {} {}", c.version, c.change.change_id, c.change.kind));
    match c.link.as_ref().map(|l| &l.target) {
        None => ctx.line("  rationale: pending"),
        Some(LinkTarget::Justification(t)) => ctx.line(format!("  justification: {t}")),
        Some(LinkTarget::Resolution(id)) => {
            let text = c.resolution.as_ref().map_or("", |r| r.justification.as_str());
            ctx.line(format!("  resolution {id}: {text}"));
        }
    }
    if let Some(i) = &c.issue {
        ctx.line(format!("  issue {} ({}): {}", i.id, i.issue_type, i.question));
    }
    if let Some(e) = &c.event {
        ctx.line(format!("  event {} ({}): {}", e.id, e.event_type.as_str(), e.name));
    }
    for (a, s) in &c.alternatives {
        ctx.line(format!("  alternative {} score {}: {}", a.id, s.score, a.subject));
    }
}

fn query(ctx: &mut Ctx, q: QueryCmd) -> Res {
    let view = ctx.repo()?.view()?;
    match q {
        QueryCmd::OpenIssues => {
            for i in open_issues(&view.store) {
                issue_line(ctx, &i);
            }
        }
        QueryCmd::Conflicts { entities, request } => {
            let report = match (request, entities) {
                (Some(r), _) => request_conflicts(&view, &r)?,
                (None, Some(e)) => conflicts(&view, &entity_set(&e)?),
                (None, None) => return Err(Failure::usage("need --entities or --request")),
            };
            for h in &report.issue_hits {
                let o = dash_list(h.overlap.iter().map(EntityId::as_str));
                ctx.say(format!("issue {} {o}", h.issue_id), format!("open issue {} overlaps {o}", h.issue_id));
            }
            for h in &report.resolution_hits {
                let o = dash_list(h.overlap.iter().map(EntityId::as_str));
                ctx.say(
                    format!("resolution {} {} {o}", h.resolution_id, h.version),
                    format!("resolution {} changed {o} in version {}", h.resolution_id, h.version),
                );
            }
            if report.is_empty() && !ctx.porcelain {
                ctx.line("no conflicts");
            }
        }
        QueryCmd::History { entity } => {
            for c in entity_history(&view, &entity) {
                chain_line(ctx, &c);
            }
        }
    }
    Ok(())
}

fn trace(ctx: &mut Ctx, requirement_type: &str, relation: &str) -> Res {
    let view = ctx.repo()?.view()?;
    let rows = trace_report(&view, requirement_type, relation);
    if ctx.porcelain {
        for r in &rows {
            ctx.line(r.porcelain());
        }
        return Ok(());
    }
    let cells: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| {
            let impls = dash_list(r.implementers.iter().map(EntityId::as_str));
            let why = if r.is_uncovered() {
                "UNCOVERED".to_string()
            } else {
                r.rationale.iter().map(|c| c.as_ref().map_or("none".to_string(), RationaleChain::summary)).collect::<Vec<_>>().join(",")
            };
            (r.requirement.to_string(), impls, why)
        })
        .collect();
    let w0 = cells.iter().map(|c| c.0.len()).chain([11]).max().unwrap_or(11);
    let w1 = cells.iter().map(|c| c.1.len()).chain([14]).max().unwrap_or(14);
    ctx.line(format!("{:<w0$}  {:<w1$}  rationale", "requirement", "implemented by"));
    for (a, b, c) in cells {
        ctx.line(format!("{a:<w0$}  {b:<w1$}  {c}"));
    }
    Ok(())
}
