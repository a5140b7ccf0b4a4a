//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into `remis::delta` or
//! `remis::assessment`; models are only read through public accessors.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use remis::metamodel::{EntityId, ProcessEntity, ProcessModel, Relation};

// ---------------------------------------------------------------------------
// random models

pub struct ModelShape<'a> {
    pub ids: &'a [&'a str],
    pub max_entities: usize,
    pub max_attrs: usize,
    pub max_relations: usize,
    pub types: &'a [&'a str],
    pub keys: &'a [&'a str],
    pub values: &'a [&'a str],
    pub relation_types: &'a [&'a str],
}

pub const WIDE_VALUES: &[&str] = &[
    "Design review",
    "x",
    "",
    " padded ",
    "say \"hi\"",
    "back\\slash",
    "two\nlines",
    "tab\there",
    "Überprüfung",
    "#not-a-comment",
    "a = b",
];

pub fn id(s: &str) -> EntityId {
    EntityId::new(s).unwrap()
}

pub fn random_model<R: Rng>(rng: &mut R, shape: &ModelShape) -> ProcessModel {
    let mut ids: Vec<&str> = shape.ids.to_vec();
    ids.shuffle(rng);
    ids.truncate(rng.gen_range(0..=shape.max_entities.min(ids.len())));
    let mut m = ProcessModel::new();
    for eid in &ids {
        let mut e = ProcessEntity::new(id(eid), *shape.types.choose(rng).unwrap());
        let mut keys: Vec<&str> = shape.keys.to_vec();
        keys.shuffle(rng);
        keys.truncate(rng.gen_range(0..=shape.max_attrs.min(keys.len())));
        for k in keys {
            e.attributes.insert(k.to_string(), shape.values.choose(rng).unwrap().to_string());
        }
        m.insert_entity(e);
    }
    if !ids.is_empty() {
        let mut rels = BTreeSet::new();
        for _ in 0..rng.gen_range(0..=shape.max_relations) {
            rels.insert((
                *shape.relation_types.choose(rng).unwrap(),
                *ids.choose(rng).unwrap(),
                *ids.choose(rng).unwrap(),
            ));
        }
        for (t, s, d) in rels {
            m.insert_relation(Relation::new(t, id(s), id(d)));
        }
    }
    m
}

/// A second model that shares most structure with `a`: entities are kept,
/// edited, retyped or dropped, some new ones appear, relations are
/// re-drawn partially.
pub fn mutate<R: Rng>(rng: &mut R, a: &ProcessModel, shape: &ModelShape) -> ProcessModel {
    if rng.gen_bool(0.15) {
        return random_model(rng, shape);
    }
    let mut b = ProcessModel::new();
    for e in a.entities() {
        match rng.gen_range(0..10) {
            0 => continue,
            1 => b.insert_entity(ProcessEntity { entity_type: shape.types.choose(rng).unwrap().to_string(), ..e.clone() }),
            2..=4 => {
                let mut e = e.clone();
                for k in shape.keys.iter().take(shape.max_attrs) {
                    match rng.gen_range(0..4) {
                        0 => {
                            e.attributes.remove(*k);
                        }
                        1 => {
                            e.attributes.insert(k.to_string(), shape.values.choose(rng).unwrap().to_string());
                        }
                        _ => {}
                    }
                }
                b.insert_entity(e);
            }
            _ => b.insert_entity(e.clone()),
        }
    }
    let extra = random_model(rng, shape);
    for e in extra.entities() {
        if b.entities().len() < shape.max_entities && b.entity(e.id.as_str()).is_none() && rng.gen_bool(0.5) {
            b.insert_entity(e.clone());
        }
    }
    let present: Vec<&str> = b.entities().iter().map(|e| e.id.as_str()).collect();
    let mut rels: BTreeSet<Relation> = a
        .relations()
        .iter()
        .filter(|r| present.contains(&r.source.as_str()) && present.contains(&r.target.as_str()))
        .filter(|_| rng.gen_bool(0.8))
        .cloned()
        .collect();
    if !present.is_empty() {
        for _ in 0..rng.gen_range(0..=3) {
            if rels.len() >= shape.max_relations {
                break;
            }
            rels.insert(Relation::new(
                *shape.relation_types.choose(rng).unwrap(),
                id(present.choose(rng).unwrap()),
                id(present.choose(rng).unwrap()),
            ));
        }
    }
    for r in rels {
        b.insert_relation(r);
    }
    b
}

// ---------------------------------------------------------------------------
// minimal edit count
//
// Edits, one slot each: add an entity with any type and attributes, delete
// an entity, set or delete one attribute, add or delete one relation. An
// added relation needs both endpoints present at that moment; deleting an
// entity leaves its relations dangling until they are removed.

type Attrs = BTreeMap<String, String>;
type Triple = (String, String, String);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct State {
    ents: BTreeMap<String, (String, Attrs)>,
    rels: BTreeSet<Triple>,
}

impl State {
    fn of(m: &ProcessModel) -> Self {
        State {
            ents: m
                .entities()
                .iter()
                .map(|e| (e.id.as_str().to_string(), (e.entity_type.clone(), e.attributes.clone())))
                .collect(),
            rels: m
                .relations()
                .iter()
                .map(|r| (r.relation_type.clone(), r.source.as_str().to_string(), r.target.as_str().to_string()))
                .collect(),
        }
    }
}

struct Domain {
    ids: Vec<String>,
    types: Vec<String>,
    keys: Vec<String>,
    values: Vec<String>,
    triples: Vec<Triple>,
}

impl Domain {
    fn of(a: &ProcessModel, b: &ProcessModel) -> Self {
        let mut ids = BTreeSet::new();
        let mut types = BTreeSet::new();
        let mut keys = BTreeSet::new();
        let mut values = BTreeSet::new();
        let mut rtypes = BTreeSet::new();
        for m in [a, b] {
            for e in m.entities() {
                ids.insert(e.id.as_str().to_string());
                types.insert(e.entity_type.clone());
                for (k, v) in &e.attributes {
                    keys.insert(k.clone());
                    values.insert(v.clone());
                }
            }
            for r in m.relations() {
                rtypes.insert(r.relation_type.clone());
            }
        }
        let mut triples = Vec::new();
        for t in &rtypes {
            for s in &ids {
                for d in &ids {
                    triples.push((t.clone(), s.clone(), d.clone()));
                }
            }
        }
        Domain {
            ids: ids.into_iter().collect(),
            types: types.into_iter().collect(),
            keys: keys.into_iter().collect(),
            values: values.into_iter().collect(),
            triples,
        }
    }

    /// Every attribute map over the domain keys and values.
    fn attr_maps(&self) -> Vec<Attrs> {
        let mut maps = vec![Attrs::new()];
        for k in &self.keys {
            let mut next = Vec::new();
            for m in &maps {
                next.push(m.clone());
                for v in &self.values {
                    let mut m = m.clone();
                    m.insert(k.clone(), v.clone());
                    next.push(m);
                }
            }
            maps = next;
        }
        maps
    }

    fn successors(&self, s: &State, maps: &[Attrs]) -> Vec<State> {
        let mut out = Vec::new();
        for eid in &self.ids {
            match s.ents.get(eid) {
                None => {
                    for t in &self.types {
                        for a in maps {
                            let mut n = s.clone();
                            n.ents.insert(eid.clone(), (t.clone(), a.clone()));
                            out.push(n);
                        }
                    }
                }
                Some((_, attrs)) => {
                    let mut n = s.clone();
                    n.ents.remove(eid);
                    out.push(n);
                    for k in &self.keys {
                        for v in &self.values {
                            if attrs.get(k) != Some(v) {
                                let mut n = s.clone();
                                n.ents.get_mut(eid).unwrap().1.insert(k.clone(), v.clone());
                                out.push(n);
                            }
                        }
                        if attrs.contains_key(k) {
                            let mut n = s.clone();
                            n.ents.get_mut(eid).unwrap().1.remove(k);
                            out.push(n);
                        }
                    }
                }
            }
        }
        for tr in &self.triples {
            let mut n = s.clone();
            if s.rels.contains(tr) {
                n.rels.remove(tr);
                out.push(n);
            } else if s.ents.contains_key(&tr.1) && s.ents.contains_key(&tr.2) {
                n.rels.insert(tr.clone());
                out.push(n);
            }
        }
        out
    }
}

/// Lower bound on the edits from `s` to `goal`. Each edit changes one slot
/// (an entity id or a relation triple). A slot whose entity changes type
/// needs a delete and an add. A slot with n differing attributes needs n
/// in-place edits or a delete and an add.
fn lower_bound(s: &State, goal: &State) -> usize {
    let mut h = s.rels.symmetric_difference(&goal.rels).count();
    let ids: BTreeSet<&String> = s.ents.keys().chain(goal.ents.keys()).collect();
    for eid in ids {
        h += match (s.ents.get(eid), goal.ents.get(eid)) {
            (None, None) => 0,
            (Some(_), None) | (None, Some(_)) => 1,
            (Some((t1, a1)), Some((t2, a2))) => {
                if t1 != t2 {
                    2
                } else {
                    let keys: BTreeSet<&String> = a1.keys().chain(a2.keys()).collect();
                    keys.into_iter().filter(|k| a1.get(*k) != a2.get(*k)).count().min(2)
                }
            }
        };
    }
    h
}

/// Fewest edits turning `a` into `b`, by iterative-deepening A* with
/// [`lower_bound`].
pub fn min_edits(a: &ProcessModel, b: &ProcessModel) -> usize {
    let dom = Domain::of(a, b);
    let maps = dom.attr_maps();
    let start = State::of(a);
    let goal = State::of(b);
    let mut bound = lower_bound(&start, &goal);
    loop {
        match dfs(&dom, &maps, &start, &goal, 0, bound) {
            Ok(()) => return bound,
            Err(next) => bound = next,
        }
    }
}

fn dfs(dom: &Domain, maps: &[Attrs], s: &State, goal: &State, g: usize, bound: usize) -> Result<(), usize> {
    let f = g + lower_bound(s, goal);
    if f > bound {
        return Err(f);
    }
    if s == goal {
        return Ok(());
    }
    let mut next = usize::MAX;
    for n in dom.successors(s, maps) {
        match dfs(dom, maps, &n, goal, g + 1, bound) {
            Ok(()) => return Ok(()),
            Err(t) => next = next.min(t),
        }
    }
    Err(next)
}

/// Plain breadth-first search; only for very small domains. Used to check
/// that [`lower_bound`] never overestimates.
pub fn min_edits_bfs(a: &ProcessModel, b: &ProcessModel) -> usize {
    let dom = Domain::of(a, b);
    let maps = dom.attr_maps();
    let goal = State::of(b);
    let start = State::of(a);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((s, d)) = queue.pop_front() {
        if s == goal {
            return d;
        }
        for n in dom.successors(&s, &maps) {
            if seen.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    unreachable!("goal is always reachable")
}

pub const SMALL_SHAPE: ModelShape<'static> = ModelShape {
    ids: &["E1", "E2", "E3"],
    max_entities: 3,
    max_attrs: 2,
    max_relations: 4,
    types: &["activity", "artifact"],
    keys: &["name", "owner"],
    values: &["x", "y"],
    relation_types: &["follows"],
};

pub const TINY_SHAPE: ModelShape<'static> = ModelShape {
    ids: &["E1", "E2"],
    max_entities: 2,
    max_attrs: 2,
    max_relations: 2,
    types: &["activity", "artifact"],
    keys: &["name", "owner"],
    values: &["x", "y"],
    relation_types: &["follows"],
};

// ---------------------------------------------------------------------------
// weighted scoring

/// Dense reference scorer: `verdicts[alt][crit]`, `None` meaning not assessed.
pub fn reference_scores(weights: &[f64], verdicts: &[Vec<Option<f64>>]) -> Vec<f64> {
    verdicts
        .iter()
        .map(|row| {
            let mut s = 0.0;
            for (w, v) in weights.iter().zip(row) {
                s += w * v.unwrap_or(0.0);
            }
            s
        })
        .collect()
}

// ---------------------------------------------------------------------------
// fault injection
//
// Structural corruptions of one stored file. Free-text justification
// contents are not mutated: nothing in the layout fingerprints them, so such
// an edit is indistinguishable from an honest one.

#[derive(Debug, Clone)]
pub struct Fault {
    pub description: String,
    /// `None` deletes the file.
    pub content: Option<String>,
}

const SUBSTITUTES: &[char] = &['q', 'Z', '7', ' ', '"', '=', '-', '\n'];

pub fn faults_for<R: Rng>(rng: &mut R, text: &str, per_kind: usize) -> Vec<Fault> {
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    let mut out = vec![
        Fault { description: "file deleted".into(), content: None },
        Fault { description: "file emptied".into(), content: Some(String::new()) },
        Fault { description: "truncated to half".into(), content: Some(text[..floor_char(text, text.len() / 2)].to_string()) },
    ];
    let mutable: Vec<usize> = (0..lines.len())
        .filter(|&i| !lines[i].starts_with("link ") && lines[i].trim_end() != "")
        .collect();
    for _ in 0..per_kind {
        let i = rng.gen_range(0..lines.len());
        let mut v: Vec<&str> = lines.clone();
        v.remove(i);
        out.push(Fault { description: format!("line {} deleted", i + 1), content: Some(v.concat()) });

        let mut v: Vec<&str> = lines.clone();
        v.insert(i, lines[i]);
        out.push(Fault { description: format!("line {} duplicated", i + 1), content: Some(v.concat()) });

        if let Some(&i) = mutable.choose(rng) {
            let chars: Vec<char> = lines[i].trim_end_matches('\n').chars().collect();
            let at = rng.gen_range(0..chars.len());
            let sub = *SUBSTITUTES.iter().filter(|c| **c != chars[at]).collect::<Vec<_>>().choose(rng).unwrap();
            let mut line: String = chars.iter().enumerate().map(|(j, c)| if j == at { *sub } else { *c }).collect();
            line.push('\n');
            let mut v: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
            v[i] = line;
            out.push(Fault {
                description: format!("line {} column {} replaced by {sub:?}", i + 1, at + 1),
                content: Some(v.concat()),
            });
        }
    }
    for (i, l) in lines.iter().enumerate() {
        if let Some(rest) = l.strip_prefix("link ") {
            let change = rest.split(' ').next().unwrap();
            let mut v: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
            v[i] = format!("link {change} resolution RS-999\n");
            out.push(Fault { description: format!("link on line {} retargeted", i + 1), content: Some(v.concat()) });
            break;
        }
    }
    out
}

fn floor_char(s: &str, mut i: usize) -> usize {
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}
