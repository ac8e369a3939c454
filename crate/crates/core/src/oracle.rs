//! Random bit-string colorings and local rules read off colored balls.
//!
//! A [`VertexRule`] selects the vertices whose colored r-ball key lies in an
//! accept set; a [`SubgraphRule`] maps colored balls to [`Symbol`]s naming
//! which incident edges to keep, with edges addressed by the colour order of
//! the neighbours.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balls::{canonical_key, extract_ball, BallError, CanonicalBallKey, RootedBall, VertexLabels};
use crate::graph::{EdgeSet, Graph};
use crate::partition::Partition;
use crate::seed::Seed;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("bit length must lie in 1..=64, got {0}")]
    BadBitLength(u32),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("coloring has colliding colors in {0} of the balls")]
    CollisionPresent(Rational),
    #[error(transparent)]
    Ball(#[from] BallError),
}

/// Independent uniform s-bit strings, one per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BColoring {
    pub s: u32,
    pub values: Vec<u64>,
    pub seed: Seed,
}

impl BColoring {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn labels(&self) -> VertexLabels {
        VertexLabels::bits(self.s, self.values.clone())
    }

    /// First `t` digits of every string.
    pub fn prefix(&self, t: u32) -> Result<BColoring, OracleError> {
        if t == 0 || t > self.s {
            return Err(OracleError::BadBitLength(t));
        }
        Ok(BColoring {
            s: t,
            values: self.values.iter().map(|&x| x >> (self.s - t)).collect(),
            seed: self.seed,
        })
    }
}

/// Each vertex draws 64 bits and keeps the top `s`, so colorings with the
/// same seed and growing `s` extend each other.
pub fn b_color(g: &Graph, s: u32, seed: Seed) -> Result<BColoring, OracleError> {
    if !(1..=64).contains(&s) {
        return Err(OracleError::BadBitLength(s));
    }
    let mut rng = seed.rng();
    let values = (0..g.n())
        .map(|_| {
            let x: u64 = rng.gen();
            if s == 64 {
                x
            } else {
                x >> (64 - s)
            }
        })
        .collect();
    Ok(BColoring { s, values, seed })
}

fn check_coloring(g: &Graph, c: &BColoring, s: u32) -> Result<(), OracleError> {
    if c.len() != g.n() {
        return Err(OracleError::ShapeMismatch(format!(
            "coloring has {} entries, graph has {} vertices",
            c.len(),
            g.n()
        )));
    }
    if c.s != s {
        return Err(OracleError::ShapeMismatch(format!("coloring has {} bits, rule uses {s}", c.s)));
    }
    Ok(())
}

/// Colored key and collision flag of every vertex's r-ball.
fn colored_balls(g: &Graph, c: &BColoring, r: u32) -> Result<Vec<(CanonicalBallKey, bool)>, OracleError> {
    let labels = c.labels();
    (0..g.n())
        .into_par_iter()
        .map(|v| {
            let b = extract_ball(g, v, r, Some(&labels))?;
            Ok((canonical_key(&b, None)?, b.has_label_collision()))
        })
        .collect()
}

/// Fraction of vertices whose colored r-ball repeats a color.
pub fn collision_mass(g: &Graph, c: &BColoring, r: u32) -> Result<Rational, OracleError> {
    check_coloring(g, c, c.s)?;
    let labels = c.labels();
    let hits = (0..g.n())
        .into_par_iter()
        .map(|v| extract_ball(g, v, r, Some(&labels)).map(|b| b.has_label_collision() as i128))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum::<i128>();
    Ok(Rational::new(hits, g.n().max(1) as i128))
}

/// Accept set over colored r-balls with s-bit colors. Balls with a repeated
/// color are accepted wholesale when `accept_collisions` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRule {
    pub r: u32,
    pub s: u32,
    pub accept_collisions: bool,
    pub accept: BTreeSet<CanonicalBallKey>,
}

impl VertexRule {
    pub fn empty(r: u32, s: u32) -> Self {
        VertexRule {
            r,
            s,
            accept_collisions: false,
            accept: BTreeSet::new(),
        }
    }

    /// Accepts exactly the keys of the balls of `g` satisfying `pred`.
    pub fn from_predicate(
        g: &Graph,
        c: &BColoring,
        r: u32,
        pred: impl Fn(&RootedBall) -> bool,
    ) -> Result<Self, OracleError> {
        check_coloring(g, c, c.s)?;
        let labels = c.labels();
        let mut rule = VertexRule::empty(r, c.s);
        for v in 0..g.n() {
            let b = extract_ball(g, v, r, Some(&labels))?;
            if pred(&b) {
                rule.accept.insert(canonical_key(&b, None)?);
            }
        }
        Ok(rule)
    }

    pub fn accepts(&self, key: &CanonicalBallKey, collision: bool) -> bool {
        (collision && self.accept_collisions) || self.accept.contains(key)
    }
}

/// Membership mask of V_A.
pub fn apply_vertex_rule(g: &Graph, c: &BColoring, rule: &VertexRule) -> Result<Vec<bool>, OracleError> {
    check_coloring(g, c, rule.s)?;
    Ok(colored_balls(g, c, rule.r)?
        .into_iter()
        .map(|(k, coll)| rule.accepts(&k, coll))
        .collect())
}

/// Every edge with an endpoint in the mask.
pub fn incident_edges(g: &Graph, mask: &[bool]) -> EdgeSet {
    g.edges().filter(|&(u, v)| mask[u] || mask[v]).collect()
}

/// A = keys of the endpoints of the cut, plus all collision balls.
pub fn learn_partition_rule(
    gref: &Graph,
    c: &BColoring,
    p: &Partition,
    r: u32,
    s: u32,
) -> Result<VertexRule, OracleError> {
    check_coloring(gref, c, s)?;
    let witness: BTreeSet<usize> = p.cut.endpoints().into_iter().collect();
    let balls = colored_balls(gref, c, r)?;
    let mut rule = VertexRule::empty(r, s);
    rule.accept_collisions = true;
    for (v, (key, coll)) in balls.into_iter().enumerate() {
        if coll || witness.contains(&v) {
            rule.accept.insert(key);
        }
    }
    Ok(rule)
}

/// Degree k and the increasing edge codes a₁ < … < a_l in 1..=k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub k: usize,
    pub codes: Vec<usize>,
}

impl Symbol {
    pub fn new(k: usize, codes: Vec<usize>) -> Option<Self> {
        let ok = codes.windows(2).all(|w| w[0] < w[1]) && codes.iter().all(|&a| (1..=k).contains(&a));
        ok.then_some(Symbol { k, codes })
    }
}

/// Neighbours of `v` sorted by color; `codes[j]` is the neighbour with edge code j+1.
fn color_order(g: &Graph, c: &BColoring, v: usize) -> Vec<usize> {
    let mut nb = g.neighbors(v).to_vec();
    nb.sort_by_key(|&w| (c.values[w], w));
    nb
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphRule {
    pub l: u32,
    pub s: u32,
    /// Keys dropped because two vertices with that key needed different symbols.
    pub conflicts: usize,
    pub symbols: BTreeMap<CanonicalBallKey, Symbol>,
}

pub fn encode_subgraph(gref: &Graph, c: &BColoring, hsub: &Graph, l: u32, s: u32) -> Result<SubgraphRule, OracleError> {
    check_coloring(gref, c, s)?;
    if hsub.n() != gref.n() || hsub.edges().any(|(u, v)| !gref.has_edge(u, v)) {
        return Err(OracleError::ShapeMismatch("subgraph is not a spanning subgraph of the reference".into()));
    }
    if l == 0 {
        return Err(OracleError::ShapeMismatch("radius must be at least 1".into()));
    }
    let balls = colored_balls(gref, c, l)?;
    let collisions = balls.iter().filter(|(_, coll)| *coll).count();
    if collisions > 0 {
        return Err(OracleError::CollisionPresent(Rational::new(
            collisions as i128,
            gref.n() as i128,
        )));
    }
    let mut symbols: BTreeMap<CanonicalBallKey, Symbol> = BTreeMap::new();
    let mut dropped: BTreeSet<CanonicalBallKey> = BTreeSet::new();
    for (v, (key, _)) in balls.into_iter().enumerate() {
        let order = color_order(gref, c, v);
        let codes = order
            .iter()
            .enumerate()
            .filter(|&(_, &w)| hsub.has_edge(v, w))
            .map(|(j, _)| j + 1)
            .collect();
        let sym = Symbol { k: order.len(), codes };
        if dropped.contains(&key) {
            continue;
        }
        match symbols.get(&key) {
            Some(old) if *old != sym => {
                symbols.remove(&key);
                dropped.insert(key);
            }
            Some(_) => {}
            None => {
                symbols.insert(key, sym);
            }
        }
    }
    Ok(SubgraphRule {
        l,
        s,
        conflicts: dropped.len(),
        symbols,
    })
}

#[derive(Debug, Clone)]
pub struct SubgraphApplication {
    pub graph: Graph,
    pub matched_vertices: usize,
    /// Kept edges selected by one endpoint while the other, also matched,
    /// did not select them.
    pub disagreements: usize,
}

/// Keeps an edge iff at least one endpoint's symbol selects it.
pub fn apply_subgraph_rule(g: &Graph, c: &BColoring, rule: &SubgraphRule) -> Result<SubgraphApplication, OracleError> {
    check_coloring(g, c, rule.s)?;
    let balls = colored_balls(g, c, rule.l)?;
    let mut matched = vec![false; g.n()];
    let mut chosen = EdgeSet::new();
    let mut votes: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    for (v, (key, _)) in balls.iter().enumerate() {
        let Some(sym) = rule.symbols.get(key) else {
            continue;
        };
        matched[v] = true;
        let order = color_order(g, c, v);
        if sym.k != order.len() {
            return Err(OracleError::ShapeMismatch(format!(
                "symbol degree {} at a vertex of degree {}",
                sym.k,
                order.len()
            )));
        }
        for &a in &sym.codes {
            let w = order[a - 1];
            chosen.insert(v, w);
            *votes.entry(crate::graph::edge(v, w)).or_insert(0) += 1;
        }
    }
    let disagreements = votes
        .iter()
        .filter(|&(&(u, v), &n)| n == 1 && matched[u] && matched[v])
        .count();
    Ok(SubgraphApplication {
        graph: g.spanning_subgraph(&chosen).expect("edges of g"),
        matched_vertices: matched.iter().filter(|&&m| m).count(),
        disagreements,
    })
}
