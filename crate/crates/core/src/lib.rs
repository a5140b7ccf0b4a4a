//! Versioned process models with structured change rationale.
//!
//! A repository stores linear versions of a [`metamodel::ProcessModel`],
//! the [`delta::ChangeSet`] between consecutive versions, and a journal of
//! rationale records (events, issues, alternatives, criteria, assessments,
//! resolutions). How much rationale each change must carry is governed by
//! the repository's [`rationale::DeploymentLevel`], from a bare
//! justification at level 0 up to criteria-based assessment at level 3.

pub mod analysis;
pub mod assessment;
pub mod clock;
pub mod delta;
pub mod diag;
pub mod journal;
mod error;
pub mod metamodel;
pub mod rationale;
pub mod repository;
pub mod text;

pub use error::{Error, ErrorClass};
