use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "remis", about = "Versioned process models with recorded change rationale", version)]
pub struct Cli {
    /// Repository root (default: $REMIS_REPO, then the current directory).
    #[arg(long, global = true, value_name = "PATH")]
    pub repo: Option<PathBuf>,
    /// Line-oriented machine output.
    #[arg(long, global = true)]
    pub porcelain: bool,
    /// Fixed clock for every timestamp written (RFC 3339).
    #[arg(long, global = true, value_name = "ISO8601")]
    pub now: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a repository with a baseline model as version 0.
    Init {
        #[arg(long, default_value = "0")]
        level: String,
        /// Baseline model (default: empty model).
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Rewrite a model file in canonical form.
    Import {
        file: PathBuf,
        /// Output path (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Changes between two model files.
    Diff { a: PathBuf, b: PathBuf },
    /// Changes between the head version and a working model.
    Status { work: PathBuf },
    #[command(subcommand)]
    Request(RequestCmd),
    #[command(subcommand)]
    Event(EventCmd),
    #[command(subcommand)]
    Issue(IssueCmd),
    #[command(subcommand)]
    Alt(AltCmd),
    #[command(subcommand)]
    Criterion(CriterionCmd),
    /// Record a resolution for an issue.
    Resolve(ResolveArgs),
    /// Rank an issue's alternatives by weighted criteria.
    Rank { issue: String },
    /// Store a working model as the next version.
    Commit(CommitArgs),
    /// Attach rationale to changes committed with --unlinked.
    Link(LinkArgs),
    #[command(subcommand)]
    Level(LevelCmd),
    /// Check history, rationale and journals.
    Validate,
    #[command(subcommand)]
    Query(QueryCmd),
    #[command(subcommand)]
    Report(ReportCmd),
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Debug, Subcommand)]
pub enum RequestCmd {
    New {
        #[arg(long)]
        description: Option<String>,
        #[arg(long, default_value = "")]
        proposer: String,
        #[arg(long, default_value = "3")]
        priority: u8,
        /// Comma-separated entity ids.
        #[arg(long, default_value = "")]
        scope: String,
        /// synchronous or asynchronous.
        #[arg(long, default_value = "synchronous")]
        mode: String,
        #[arg(long, default_value = "")]
        relevance: String,
        #[arg(long, default_value = "")]
        resources: String,
        #[arg(long, default_value = "")]
        infrastructure: String,
        #[arg(long, default_value = "")]
        maturity: String,
    },
    /// Requests by descending priority.
    List,
    SetPriority { id: String, priority: u8 },
    SetMode { id: String, mode: String },
    /// accepted, rejected or done.
    SetStatus { id: String, status: String },
}

#[derive(Debug, Subcommand)]
pub enum EventCmd {
    Add {
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "")]
        description: String,
        /// internal or external.
        #[arg(long = "type")]
        event_type: Option<String>,
        /// Default: now.
        #[arg(long)]
        occurred_at: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum IssueCmd {
    Open {
        #[arg(long)]
        question: Option<String>,
        /// imprecision, verbosity, inaccuracy, non_compliance, inconsistency or other:<label>.
        #[arg(long = "type")]
        issue_type: Option<String>,
        /// Triggering event id.
        #[arg(long)]
        event: Option<String>,
        /// Comma-separated affected entity ids.
        #[arg(long, default_value = "")]
        entities: String,
        #[arg(long, default_value = "")]
        discussion: String,
    },
    Close { id: String },
    List {
        /// open, closed or all.
        #[arg(long, default_value = "all")]
        status: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum AltCmd {
    Add {
        #[arg(long)]
        issue: String,
        #[arg(long)]
        subject: Option<String>,
        #[arg(long, default_value = "")]
        description: String,
    },
    Assess {
        alternative: String,
        /// In [-1, 1].
        #[arg(long, allow_hyphen_values = true)]
        verdict: String,
        #[arg(long)]
        criterion: Option<String>,
        #[arg(long, default_value = "")]
        note: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum CriterionCmd {
    Add {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        weight: String,
        #[arg(long, default_value = "")]
        description: String,
        /// Goal/question the criterion comes from.
        #[arg(long)]
        gqm: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct ResolveArgs {
    #[arg(long)]
    pub issue: String,
    #[arg(long)]
    pub justification: Option<String>,
    #[arg(long)]
    pub alternative: Option<String>,
    #[arg(long, default_value = "")]
    pub summary: String,
    #[arg(long, default_value = "")]
    pub description: String,
    /// Comma-separated follow-up issue ids.
    #[arg(long, default_value = "")]
    pub opens: String,
}

#[derive(Debug, Args)]
pub struct CommitArgs {
    pub work: PathBuf,
    #[arg(long, conflicts_with_all = ["justification", "unlinked"])]
    pub resolution: Option<String>,
    #[arg(long, conflicts_with = "unlinked")]
    pub justification: Option<String>,
    /// Commit now, link rationale later.
    #[arg(long)]
    pub unlinked: bool,
    /// Change request the commit belongs to.
    #[arg(long)]
    pub request: Option<String>,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    pub version: u64,
    /// Comma-separated change ids.
    #[arg(long, required = true)]
    pub changes: String,
    #[arg(long, conflicts_with = "justification", required_unless_present = "justification")]
    pub resolution: Option<String>,
    #[arg(long)]
    pub justification: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum LevelCmd {
    Show,
    Set { level: String },
}

#[derive(Debug, Subcommand)]
pub enum QueryCmd {
    OpenIssues,
    Conflicts {
        #[arg(long, required_unless_present = "request", conflicts_with = "request")]
        entities: Option<String>,
        /// Use the scope of a change request.
        #[arg(long)]
        request: Option<String>,
    },
    History { entity: String },
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    Trace {
        #[arg(long)]
        requirement_type: String,
        #[arg(long)]
        relation: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExportCmd {
    Dot {
        /// Only this version's changes (default: everything).
        #[arg(long)]
        version: Option<u64>,
    },
}
