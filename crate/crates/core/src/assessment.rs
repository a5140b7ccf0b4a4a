//! Weighted-criteria scoring and ranking of alternatives.
//!
//! The score of an alternative is `sum(weight(c) * verdict(alt, c))` over all
//! criteria. A criterion the alternative was not assessed against counts as
//! zero and is reported in `missing_criteria`. Bare verdicts (no criterion)
//! do not contribute.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::rationale::{Assessment, Criterion, RecordStore};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredAlternative {
    pub alternative_id: String,
    pub score: f64,
    pub covered_criteria: usize,
    pub missing_criteria: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssessmentError {
    #[error("{alternative} is assessed more than once against {criterion}")]
    DuplicateAssessment {
        alternative: String,
        criterion: String,
    },
    #[error("criterion {0} has a non-positive weight")]
    BadWeight(String),
    #[error("unknown issue {0}")]
    UnknownIssue(String),
    #[error("issue {0} has no alternatives to rank")]
    NoAlternatives(String),
}

pub fn score_alternative(
    alternative_id: &str,
    criteria: &[Criterion],
    assessments: &[Assessment],
) -> Result<ScoredAlternative, AssessmentError> {
    let mut verdicts: BTreeMap<&str, f64> = BTreeMap::new();
    for a in assessments.iter().filter(|a| a.alternative_id == alternative_id) {
        let Some(crit) = a.criterion_id.as_deref() else {
            continue;
        };
        if verdicts.insert(crit, a.verdict).is_some() {
            return Err(AssessmentError::DuplicateAssessment {
                alternative: alternative_id.to_string(),
                criterion: crit.to_string(),
            });
        }
    }

    let mut score = 0.0;
    let mut covered = 0;
    let mut missing = BTreeSet::new();
    for c in criteria {
        if !(c.weight.is_finite() && c.weight > 0.0) {
            return Err(AssessmentError::BadWeight(c.id.clone()));
        }
        match verdicts.get(c.id.as_str()) {
            Some(v) => {
                score += c.weight * v;
                covered += 1;
            }
            None => {
                missing.insert(c.id.clone());
            }
        }
    }
    Ok(ScoredAlternative {
        alternative_id: alternative_id.to_string(),
        score,
        covered_criteria: covered,
        missing_criteria: missing,
    })
}

/// Descending score; equal scores ordered by alternative id, bytewise.
pub fn ranking_order(a: &ScoredAlternative, b: &ScoredAlternative) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.alternative_id.as_bytes().cmp(b.alternative_id.as_bytes()))
}

/// Ranks the alternatives of `issue_id` against every criterion in the store.
pub fn rank_alternatives(
    issue_id: &str,
    store: &RecordStore,
) -> Result<Vec<ScoredAlternative>, AssessmentError> {
    if !store.issues.contains_key(issue_id) {
        return Err(AssessmentError::UnknownIssue(issue_id.to_string()));
    }
    let criteria: Vec<Criterion> = store.criteria.values().cloned().collect();
    let assessments: Vec<Assessment> = store.assessments.values().cloned().collect();
    let mut ranked = store
        .alternatives_of(issue_id)
        .map(|alt| score_alternative(&alt.id, &criteria, &assessments))
        .collect::<Result<Vec<_>, _>>()?;
    if ranked.is_empty() {
        return Err(AssessmentError::NoAlternatives(issue_id.to_string()));
    }
    ranked.sort_by(ranking_order);
    Ok(ranked)
}
