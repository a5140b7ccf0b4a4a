use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::assessment::AssessmentError;
use crate::delta::ApplyError;
use crate::diag::{Diagnostic, DiagnosticKind};
use crate::metamodel::{ModelError, ParseError};
use crate::repository::RepoError;

/// Coarse outcome class of a failure, stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorClass {
    /// Input was understood but rejected by a rule.
    Validation,
    /// The command line itself was malformed.
    Usage,
    /// Stored files are unreadable, inconsistent or locked.
    Integrity,
    /// A named version, record or change does not exist.
    NotFound,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 4] = [
        ErrorClass::Validation,
        ErrorClass::Usage,
        ErrorClass::Integrity,
        ErrorClass::NotFound,
    ];

    /// Outcome of a repository check. Changes awaiting rationale are a
    /// validation failure; any other error means stored history does not
    /// hold up.
    pub fn of_diagnostics(diags: &[Diagnostic]) -> Option<ErrorClass> {
        let mut errors = diags.iter().filter(|d| d.is_error()).peekable();
        errors.peek()?;
        if errors.all(|d| d.kind == DiagnosticKind::Pending) {
            Some(ErrorClass::Validation)
        } else {
            Some(ErrorClass::Integrity)
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 1,
            ErrorClass::Usage => 2,
            ErrorClass::Integrity => 3,
            ErrorClass::NotFound => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Repo(e) => repo_class(e),
            // A user-supplied document that does not parse or is inconsistent.
            Error::Parse(_) | Error::Model(_) | Error::Apply(_) => ErrorClass::Validation,
            Error::Assessment(e) => match e {
                AssessmentError::UnknownIssue(_) => ErrorClass::NotFound,
                AssessmentError::DuplicateAssessment { .. }
                | AssessmentError::BadWeight(_)
                | AssessmentError::NoAlternatives(_) => ErrorClass::Validation,
            },
            Error::Analysis(e) => match e {
                AnalysisError::UnknownVersion(_) | AnalysisError::UnknownRequest(_) => ErrorClass::NotFound,
            },
            Error::Usage(_) => ErrorClass::Usage,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

fn repo_class(e: &RepoError) -> ErrorClass {
    match e {
        RepoError::Io { .. } | RepoError::Locked(_) | RepoError::Corrupt { .. } => ErrorClass::Integrity,
        RepoError::NotARepository(_)
        | RepoError::UnknownVersion(_)
        | RepoError::UnknownRecord(..)
        | RepoError::UnknownChange { .. } => ErrorClass::NotFound,
        RepoError::Occupied(_)
        | RepoError::InvalidModel(_)
        | RepoError::Validation(_)
        | RepoError::NoChanges(_)
        | RepoError::AlreadyLinked { .. }
        | RepoError::AlreadyClosed(..)
        | RepoError::LevelDecrease { .. }
        | RepoError::Rejected(_) => ErrorClass::Validation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rationale::DeploymentLevel;
    use crate::repository::VersionId;
    use std::path::PathBuf;

    #[test]
    fn exit_codes_are_distinct() {
        let codes: std::collections::BTreeSet<_> = ErrorClass::ALL.iter().map(|c| c.exit_code()).collect();
        assert_eq!(codes.into_iter().collect::<Vec<_>>(), [1, 2, 3, 4]);
    }

    #[test]
    fn diagnostics_class() {
        let pending = Diagnostic::error(DiagnosticKind::Pending, "v1:C-1", "x");
        let broken = Diagnostic::error(DiagnosticKind::Rationale, "C-1", "x");
        let warn = Diagnostic::warning(DiagnosticKind::Rationale, "IS-1", "x");
        assert_eq!(ErrorClass::of_diagnostics(&[]), None);
        assert_eq!(ErrorClass::of_diagnostics(std::slice::from_ref(&warn)), None);
        assert_eq!(ErrorClass::of_diagnostics(&[pending.clone(), warn]), Some(ErrorClass::Validation));
        assert_eq!(ErrorClass::of_diagnostics(&[pending, broken]), Some(ErrorClass::Integrity));
    }

    #[test]
    fn every_error_has_one_class() {
        let p = PathBuf::from("r");
        let cases: Vec<(Error, ErrorClass)> = vec![
            (RepoError::Io { path: p.clone(), source: std::io::Error::other("x") }.into(), ErrorClass::Integrity),
            (RepoError::Locked(p.clone()).into(), ErrorClass::Integrity),
            (RepoError::Corrupt { path: p.clone(), message: "x".into() }.into(), ErrorClass::Integrity),
            (RepoError::NotARepository(p.clone()).into(), ErrorClass::NotFound),
            (RepoError::UnknownVersion(9).into(), ErrorClass::NotFound),
            (RepoError::UnknownRecord("issue".into(), "IS-9".into()).into(), ErrorClass::NotFound),
            (RepoError::UnknownChange { version: VersionId(1), change: "C-9".into() }.into(), ErrorClass::NotFound),
            (RepoError::Occupied(p).into(), ErrorClass::Validation),
            (RepoError::InvalidModel(vec![]).into(), ErrorClass::Validation),
            (RepoError::Validation(vec![]).into(), ErrorClass::Validation),
            (RepoError::NoChanges(VersionId(0)).into(), ErrorClass::Validation),
            (RepoError::AlreadyLinked { version: VersionId(1), change: "C-1".into() }.into(), ErrorClass::Validation),
            (RepoError::AlreadyClosed("issue".into(), "IS-1".into()).into(), ErrorClass::Validation),
            (
                RepoError::LevelDecrease { from: DeploymentLevel::L2, to: DeploymentLevel::L1 }.into(),
                ErrorClass::Validation,
            ),
            (RepoError::Rejected("x".into()).into(), ErrorClass::Validation),
            (ParseError::syntax(1, 1, "x").into(), ErrorClass::Validation),
            (ModelError::Invalid(vec![]).into(), ErrorClass::Validation),
            (ApplyError::InvalidResult("x".into()).into(), ErrorClass::Validation),
            (AssessmentError::UnknownIssue("IS-9".into()).into(), ErrorClass::NotFound),
            (AssessmentError::NoAlternatives("IS-1".into()).into(), ErrorClass::Validation),
            (AssessmentError::BadWeight("CR-1".into()).into(), ErrorClass::Validation),
            (
                AssessmentError::DuplicateAssessment { alternative: "AL-1".into(), criterion: "CR-1".into() }.into(),
                ErrorClass::Validation,
            ),
            (AnalysisError::UnknownVersion(3).into(), ErrorClass::NotFound),
            (AnalysisError::UnknownRequest("REQ-9".into()).into(), ErrorClass::NotFound),
            (Error::Usage("x".into()), ErrorClass::Usage),
        ];
        for (e, class) in cases {
            assert_eq!(e.class(), class, "{e:?}");
        }
        assert!(RepoError::Locked("r".into()).to_string().contains("locked"));
    }
}
