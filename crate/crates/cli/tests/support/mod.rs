//! Shared helpers for driving the command line in-process.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use remis::metamodel::{serialize_model, EntityId, ProcessEntity, ProcessModel, Relation};
use remis_cli::{run, Outcome};

pub const NOW: &str = "2009-05-16T10:30:00Z";

pub struct Sandbox {
    pub dir: tempfile::TempDir,
    pub root: PathBuf,
}

impl Sandbox {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("repo");
        Sandbox { dir, root }
    }

    /// `remis --repo <root> --now NOW <args>`.
    pub fn remis(&self, args: &[&str]) -> Outcome {
        let mut argv = vec!["remis", "--repo", self.root.to_str().unwrap(), "--now", NOW];
        argv.extend_from_slice(args);
        run(argv, None)
    }

    /// Same as [`Sandbox::remis`] with `--porcelain`.
    pub fn porcelain(&self, args: &[&str]) -> Outcome {
        let mut argv = vec!["--porcelain"];
        argv.extend_from_slice(args);
        self.remis(&argv)
    }

    /// Runs and insists on exit 0, returning stdout.
    pub fn ok(&self, args: &[&str]) -> String {
        let out = self.porcelain(args);
        assert_eq!(out.code, 0, "remis {args:?}\nstdout: {}\nstderr: {}", out.stdout, out.stderr);
        out.stdout
    }

    /// Writes a model file next to the repository and returns its path.
    pub fn model(&self, name: &str, m: &ProcessModel) -> String {
        let p = self.dir.path().join(name);
        fs::write(&p, serialize_model(m)).unwrap();
        p.to_str().unwrap().to_string()
    }

    pub fn files(&self) -> Vec<(PathBuf, Vec<u8>)> {
        tree(&self.root)
    }
}

pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

pub fn eid(s: &str) -> EntityId {
    EntityId::new(s).unwrap()
}

pub fn entity(id: &str, ty: &str, attrs: &[(&str, &str)]) -> ProcessEntity {
    let mut e = ProcessEntity::new(eid(id), ty);
    for (k, v) in attrs {
        e.attributes.insert(k.to_string(), v.to_string());
    }
    e
}

pub fn rel(ty: &str, s: &str, t: &str) -> Relation {
    Relation::new(ty, eid(s), eid(t))
}

/// Two activities in sequence, one of them misspelled.
pub fn review_model() -> ProcessModel {
    ProcessModel::new()
        .with_entity(entity("A1", "activity", &[("name", "Desing review")]))
        .with_entity(entity("A2", "activity", &[("name", "Coding")]))
        .with_relation(rel("follows", "A2", "A1"))
}

/// `m` with one attribute of one entity set.
pub fn with_attr(m: &ProcessModel, id: &str, key: &str, value: &str) -> ProcessModel {
    let entities = m.entities().iter().cloned().map(|mut e| {
        if e.id.as_str() == id {
            e.attributes.insert(key.into(), value.into());
        }
        e
    });
    ProcessModel::from_parts(entities, m.relations().iter().cloned()).unwrap()
}

pub fn renamed(m: &ProcessModel, id: &str, name: &str) -> ProcessModel {
    with_attr(m, id, "name", name)
}
