mod oracles;

use std::fs;
use std::sync::Arc;

use oracles::{faults_for, mutate, random_model, ModelShape, WIDE_VALUES};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use remis::clock::{parse_timestamp, FixedClock};
use remis::delta::apply;
use remis::metamodel::{serialize_model, ProcessModel};
use remis::rationale::{DeploymentLevel, LinkTarget};
use remis::repository::Repository;
use remis::ErrorClass;

const SHAPE: ModelShape<'static> = ModelShape {
    ids: &["A1", "A2", "A3", "A4", "R1", "R2", "Q1"],
    max_entities: 7,
    max_attrs: 3,
    max_relations: 6,
    types: &["activity", "artifact", "requirement"],
    keys: &["name", "owner", "doc"],
    values: WIDE_VALUES,
    relation_types: &["follows", "implements"],
};

fn scripted_repo(seed: u64, commits: usize) -> (tempfile::TempDir, Repository) {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let base = random_model(&mut rng, &SHAPE);
    let repo = Repository::init(dir.path().join("repo"), DeploymentLevel::L0, &base)
        .unwrap()
        .with_clock(Arc::new(FixedClock(parse_timestamp("2009-05-16T10:30:00Z").unwrap())));
    let mut cur = base;
    let mut done = 0;
    while done < commits {
        let next = mutate(&mut rng, &cur, &SHAPE);
        if remis::delta::diff(&cur, &next).is_empty() {
            continue;
        }
        let why = format!("step {done}: {}", WIDE_VALUES[rng.gen_range(0..WIDE_VALUES.len())]).trim().to_string();
        repo.commit_all(&next, LinkTarget::Justification(why), None).unwrap();
        cur = next;
        done += 1;
    }
    (dir, repo)
}

#[test]
fn replay_reproduces_head() {
    let (_d, repo) = scripted_repo(1, 50);
    let head = repo.head().unwrap().0;
    assert_eq!(head, 50);
    let mut m: ProcessModel = repo.get_version(0).unwrap();
    for x in 1..=head {
        m = apply(&m, &repo.get_changeset(x).unwrap()).unwrap();
    }
    let stored = fs::read_to_string(repo.root().join(format!("versions/{head}.pm"))).unwrap();
    assert_eq!(serialize_model(&m), stored);
    assert!(repo.validate_repository().is_empty());
}

#[test]
fn every_single_file_corruption_is_detected() {
    let (_d, repo) = scripted_repo(2, 8);
    let mut rng = StdRng::seed_from_u64(99);
    let mut files = Vec::new();
    for x in 0..=8u64 {
        files.push(repo.root().join(format!("versions/{x}.pm")));
        if x > 0 {
            files.push(repo.root().join(format!("changesets/{x}.cs")));
        }
    }
    let mut checked = 0;
    for path in files {
        let original = fs::read_to_string(&path).unwrap();
        for fault in faults_for(&mut rng, &original, 4) {
            if fault.content.as_deref() == Some(original.as_str()) {
                continue;
            }
            match &fault.content {
                Some(c) => fs::write(&path, c).unwrap(),
                None => fs::remove_file(&path).unwrap(),
            }
            let diags = repo.validate_repository();
            assert_eq!(
                ErrorClass::of_diagnostics(&diags),
                Some(ErrorClass::Integrity),
                "{}: {} undetected",
                path.display(),
                fault.description
            );
            fs::write(&path, &original).unwrap();
            checked += 1;
        }
    }
    assert!(repo.validate_repository().is_empty());
    assert!(checked > 100);
}
