//! `remis.cfg`: active level, head version and id counters.

use std::collections::BTreeMap;

use crate::rationale::{DeploymentLevel, RecordKind};

pub const CONFIG_FILE: &str = "remis.cfg";

/// Kinds with generated sequential ids. `request` ids live in `requests.rt`.
pub const COUNTER_KINDS: [&str; 7] = [
    "alternative",
    "assessment",
    "criterion",
    "event",
    "issue",
    "request",
    "resolution",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub level: DeploymentLevel,
    pub head: u64,
    /// Next number to hand out, per kind name.
    pub next: BTreeMap<String, u64>,
}

impl Config {
    pub fn new(level: DeploymentLevel) -> Self {
        Config {
            level,
            head: 0,
            next: COUNTER_KINDS.iter().map(|k| (k.to_string(), 1)).collect(),
        }
    }

    /// Takes the next number for `kind`.
    pub fn allocate(&mut self, kind: &str) -> u64 {
        let slot = self.next.entry(kind.to_string()).or_insert(1);
        let n = *slot;
        *slot += 1;
        n
    }

    pub fn allocate_record_id(&mut self, kind: RecordKind) -> String {
        format!("{}-{}", kind.id_prefix(), self.allocate(kind.name()))
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("level = {}\nhead = {}\n", self.level, self.head);
        for (k, n) in &self.next {
            out.push_str(&format!("next.{k} = {n}\n"));
        }
        out
    }

    pub fn parse(doc: &str) -> Result<Config, String> {
        let mut level = None;
        let mut head = None;
        let mut next = BTreeMap::new();
        for (i, line) in doc.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            let num = || v.parse::<u64>().map_err(|_| format!("line {}: {k} must be a natural number", i + 1));
            match k {
                "level" => level = Some(v.parse::<DeploymentLevel>().map_err(|e| format!("line {}: {e}", i + 1))?),
                "head" => head = Some(num()?),
                _ => match k.strip_prefix("next.") {
                    Some(kind) if COUNTER_KINDS.contains(&kind) => {
                        let n = num()?;
                        if n == 0 {
                            return Err(format!("line {}: counters start at 1", i + 1));
                        }
                        next.insert(kind.to_string(), n);
                    }
                    _ => return Err(format!("line {}: unknown key {k:?}", i + 1)),
                },
            }
        }
        let mut cfg = Config::new(level.ok_or("missing `level`")?);
        cfg.head = head.ok_or("missing `head`")?;
        cfg.next.extend(next);
        Ok(cfg)
    }
}
