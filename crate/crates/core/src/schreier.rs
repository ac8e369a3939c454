//! Finite free-group actions, their Schreier graphs, and an unlabeled
//! marker-gadget encoding from which the action is read back locally.
//!
//! Encoding, for an action of F_n on m points:
//! 1. every point x gets a pendant path of n+1 edges (its gadget);
//! 2. every orbit edge {x, y} is subdivided twice, x – a – b – y;
//! 3. for every generator i with s_i x = y ≠ x a pendant path of i edges is
//!    attached to the subdivision vertex next to x.
//!
//! Decoding looks only at balls of radius max(n+2, 3) around each vertex.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::balls::{extract_ball_unchecked, RootedBall};
use crate::graph::{edge, Graph};
use crate::seed::Seed;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("generator {0} is not a permutation")]
    NotPermutation(usize),
    #[error("decode failure: {0}")]
    DecodeFailure(String),
}

/// F_n acting on 0..m; `gens[i-1]` is s_i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteAction {
    m: usize,
    gens: Vec<Vec<usize>>,
}

impl FiniteAction {
    pub fn new(m: usize, gens: Vec<Vec<usize>>) -> Result<Self, ActionError> {
        for (i, p) in gens.iter().enumerate() {
            let mut seen = vec![false; m];
            let ok = p.len() == m && p.iter().all(|&y| y < m && !std::mem::replace(&mut seen[y], true));
            if !ok {
                return Err(ActionError::NotPermutation(i + 1));
            }
        }
        Ok(FiniteAction { m, gens })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        FiniteAction {
            m,
            gens: vec![(0..m).collect(); n],
        }
    }

    /// n = 1, x ↦ x + 1 mod m.
    pub fn cyclic_shift(m: usize) -> Self {
        FiniteAction {
            m,
            gens: vec![(0..m).map(|x| (x + 1) % m).collect()],
        }
    }

    pub fn random(m: usize, n: usize, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let gens = (0..n)
            .map(|_| {
                let mut p: Vec<usize> = (0..m).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        FiniteAction { m, gens }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.gens.len()
    }

    /// s_i x with i 1-based.
    pub fn apply(&self, i: usize, x: usize) -> usize {
        self.gens[i - 1][x]
    }

    pub fn generator(&self, i: usize) -> &[usize] {
        &self.gens[i - 1]
    }

    /// Header "m n", then one line of m images per generator.
    pub fn parse(text: &str) -> Result<Self, ActionError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(ActionError::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        let nums = |line: usize, l: &str| -> Result<Vec<usize>, ActionError> {
            l.split_whitespace()
                .map(|t| {
                    t.parse().map_err(|_| ActionError::Parse {
                        line,
                        msg: format!("not a number: {t}"),
                    })
                })
                .collect()
        };
        let h = nums(hl, header)?;
        let [m, n] = h[..] else {
            return Err(ActionError::Parse {
                line: hl,
                msg: "header must be \"m n\"".into(),
            });
        };
        let mut gens = Vec::with_capacity(n);
        for _ in 0..n {
            let (l, text) = lines.next().ok_or(ActionError::Parse {
                line: hl,
                msg: format!("expected {n} permutation lines"),
            })?;
            let p = nums(l, text)?;
            if p.len() != m {
                return Err(ActionError::Parse {
                    line: l,
                    msg: format!("expected {m} entries, found {}", p.len()),
                });
            }
            gens.push(p);
        }
        if let Some((l, _)) = lines.next() {
            return Err(ActionError::Parse {
                line: l,
                msg: "trailing content".into(),
            });
        }
        FiniteAction::new(m, gens)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.n());
        for p in &self.gens {
            let line: Vec<String> = p.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Orbits of the generated group, each sorted, ordered by minimum.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let inv = self.inverses();
        let mut seen = vec![false; self.m];
        let mut out = Vec::new();
        for s in 0..self.m {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut orbit = vec![s];
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for p in self.gens.iter().chain(&inv) {
                    if !std::mem::replace(&mut seen[p[x]], true) {
                        orbit.push(p[x]);
                        q.push_back(p[x]);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    fn inverses(&self) -> Vec<Vec<usize>> {
        self.gens
            .iter()
            .map(|p| {
                let mut q = vec![0; self.m];
                for (x, &y) in p.iter().enumerate() {
                    q[y] = x;
                }
                q
            })
            .collect()
    }
}

/// Tries to extend x0 ↦ y0 to an equivariant map of x0's orbit.
fn map_orbit(a: &FiniteAction, b: &FiniteAction, x0: usize, y0: usize) -> Option<BTreeMap<usize, usize>> {
    let (ai, bi) = (a.inverses(), b.inverses());
    let mut phi = BTreeMap::from([(x0, y0)]);
    let mut used = BTreeSet::from([y0]);
    let mut q = VecDeque::from([x0]);
    while let Some(x) = q.pop_front() {
        let y = phi[&x];
        for (pa, pb) in a.gens.iter().zip(&b.gens).chain(ai.iter().zip(&bi)) {
            let (xn, yn) = (pa[x], pb[y]);
            match phi.get(&xn) {
                Some(&m) if m != yn => return None,
                Some(_) => {}
                None => {
                    if !used.insert(yn) {
                        return None;
                    }
                    phi.insert(xn, yn);
                    q.push_back(xn);
                }
            }
        }
    }
    Some(phi)
}

/// An equivariant bijection a → b, if one exists.
pub fn action_isomorphism(a: &FiniteAction, b: &FiniteAction) -> Option<Vec<usize>> {
    if a.m != b.m || a.n() != b.n() {
        return None;
    }
    let b_orbits = b.orbits();
    let mut taken = vec![false; b_orbits.len()];
    let mut phi = vec![usize::MAX; a.m];
    for orbit in a.orbits() {
        let x0 = orbit[0];
        let found = b_orbits.iter().enumerate().find_map(|(j, bo)| {
            if taken[j] || bo.len() != orbit.len() {
                return None;
            }
            bo.iter().find_map(|&y0| map_orbit(a, b, x0, y0)).map(|m| (j, m))
        });
        let (j, m) = found?;
        taken[j] = true;
        for (x, y) in m {
            phi[x] = y;
        }
    }
    Some(phi)
}

pub fn actions_isomorphic(a: &FiniteAction, b: &FiniteAction) -> bool {
    action_isomorphism(a, b).is_some()
}

/// Underlying graph plus, per arc (x, y), the generators i with s_i x = y.
#[derive(Debug, Clone)]
pub struct SchreierGraph {
    pub graph: Graph,
    pub arcs: BTreeMap<(usize, usize), BTreeSet<usize>>,
}

impl SchreierGraph {
    /// Generators labeling the undirected edge {u, v}, in either direction.
    pub fn edge_labels(&self, u: usize, v: usize) -> BTreeSet<usize> {
        let mut out = self.arcs.get(&(u, v)).cloned().unwrap_or_default();
        out.extend(self.arcs.get(&(v, u)).into_iter().flatten());
        out
    }
}

/// Loops (fixed points) give no edge; coincident edges are merged.
pub fn schreier_graph(a: &FiniteAction) -> SchreierGraph {
    let mut arcs: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for i in 1..=a.n() {
        for x in 0..a.m {
            let y = a.apply(i, x);
            if y != x {
                arcs.entry((x, y)).or_default().insert(i);
            }
        }
    }
    let edges: BTreeSet<(usize, usize)> = arcs.keys().map(|&(x, y)| edge(x, y)).collect();
    let graph = Graph::from_edges(a.m, (2 * a.n()).max(1), edges).expect("degree at most 2n");
    SchreierGraph { graph, arcs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "role")]
pub enum Role {
    Original { point: usize },
    /// Position 1..=n+1 along the gadget of `point`.
    Gadget { point: usize, position: usize },
    /// The vertex of x – a – b – y next to `near` on the edge to `far`.
    Subdivision { near: usize, far: usize },
    /// Position 1..=generator along the marker hung on `host`.
    Marker { generator: usize, host: usize, position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub after_step1: usize,
    pub after_step2: usize,
    pub after_step3: usize,
}

#[derive(Debug, Clone)]
pub struct MarkerGraph {
    pub graph: Graph,
    pub roles: Vec<Role>,
    pub stages: StageCounts,
    pub n: usize,
}

impl MarkerGraph {
    /// The graph alone, with the role tags dropped.
    pub fn strip(&self) -> Graph {
        self.graph.clone()
    }
}

/// Degree bound of encodings of F_n actions: 2n orbit edges plus the gadget
/// at an original vertex, 2 + n at a subdivision vertex.
pub fn encoding_degree_bound(n: usize) -> usize {
    (2 * n + 1).max(n + 2)
}

pub fn encode_action(a: &FiniteAction) -> MarkerGraph {
    let n = a.n();
    let mut roles: Vec<Role> = (0..a.m).map(|point| Role::Original { point }).collect();
    let mut edges = Vec::new();
    let add = |roles: &mut Vec<Role>, role: Role| {
        roles.push(role);
        roles.len() - 1
    };
    for x in 0..a.m {
        let mut prev = x;
        for position in 1..=n + 1 {
            let v = add(&mut roles, Role::Gadget { point: x, position });
            edges.push((prev, v));
            prev = v;
        }
    }
    let after_step1 = roles.len();
    let sg = schreier_graph(a);
    let mut near: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (x, y) in sg.graph.edges() {
        let sa = add(&mut roles, Role::Subdivision { near: x, far: y });
        let sb = add(&mut roles, Role::Subdivision { near: y, far: x });
        edges.extend([(x, sa), (sa, sb), (sb, y)]);
        near.insert((x, y), sa);
        near.insert((y, x), sb);
    }
    let after_step2 = roles.len();
    for (&(x, y), gens) in &sg.arcs {
        let host = near[&(x, y)];
        for &i in gens {
            let mut prev = host;
            for position in 1..=i {
                let v = add(
                    &mut roles,
                    Role::Marker {
                        generator: i,
                        host,
                        position,
                    },
                );
                edges.push((prev, v));
                prev = v;
            }
        }
    }
    let after_step3 = roles.len();
    let graph = Graph::from_edges(after_step3, encoding_degree_bound(n), edges).expect("encoding respects its bound");
    MarkerGraph {
        graph,
        roles,
        stages: StageCounts {
            after_step1,
            after_step2,
            after_step3,
        },
        n,
    }
}

/// Walks from the root through `first`, continuing while vertices have
/// degree 2; the number of edges if it ends at a leaf within `max_len`.
fn arm_length(ball: &RootedBall, from: usize, first: usize, max_len: usize) -> Option<usize> {
    let (mut prev, mut cur, mut len) = (from, first, 1);
    loop {
        match ball.degree(cur) {
            1 => return Some(len),
            2 if len < max_len => {
                let next = ball.neighbors(cur).iter().copied().find(|&w| w != prev).expect("degree 2");
                (prev, cur, len) = (cur, next, len + 1);
            }
            _ => return None,
        }
    }
}

/// Whether the root of `ball` (radius ≥ n+2) is an original vertex.
fn is_original(ball: &RootedBall, n: usize) -> bool {
    let gadget = |w: &usize| arm_length(ball, 0, *w, n + 1) == Some(n + 1);
    match ball.degree(0) {
        0 => false,
        // A fixed point: its component is a bare path of n+2 vertices and
        // the endpoint with the smaller id stands for the point.
        1 => {
            gadget(&ball.neighbors(0)[0])
                && (0..ball.len()).all(|v| v == 0 || ball.degree(v) != 1 || ball.origin(v) > ball.origin(0))
        }
        _ => ball.neighbors(0).iter().any(gadget),
    }
}

/// Reads the action back from the stripped encoding. `n` defaults to
/// (d − 1)/2 for the graph's degree bound d.
pub fn decode_action(g: &Graph, n: Option<usize>) -> Result<FiniteAction, ActionError> {
    let n = match n {
        Some(n) => n,
        None => {
            let d = g.degree_bound();
            if d < 3 || d % 2 == 0 {
                return Err(ActionError::DecodeFailure(format!("degree bound {d} is not 2n+1")));
            }
            (d - 1) / 2
        }
    };
    let radius = (n as u32 + 2).max(3);
    let balls: Vec<RootedBall> = (0..g.n()).map(|v| extract_ball_unchecked(g, v, radius, None)).collect();
    let originals: Vec<usize> = (0..g.n()).filter(|&v| is_original(&balls[v], n)).collect();
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in originals.iter().enumerate() {
        index[v] = i;
    }
    let m = originals.len();
    let mut gens: Vec<Vec<usize>> = vec![(0..m).collect(); n];
    let mut set = vec![vec![false; m]; n];
    for (xi, &x) in originals.iter().enumerate() {
        let ball = &balls[x];
        for &a in ball.neighbors(0) {
            if arm_length(ball, 0, a, n + 1) == Some(n + 1) {
                continue;
            }
            let mut labels = Vec::new();
            let mut far = None;
            for &w in ball.neighbors(a) {
                if w == 0 {
                    continue;
                }
                match arm_length(ball, a, w, n) {
                    Some(i) => labels.push(i),
                    None => {
                        if far.replace(w).is_some() {
                            return Err(ActionError::DecodeFailure(format!("vertex {} has two non-marker branches", ball.origin(a))));
                        }
                    }
                }
            }
            let b = far.ok_or_else(|| ActionError::DecodeFailure(format!("dangling subdivision at {}", ball.origin(a))))?;
            let ys: Vec<usize> = ball
                .neighbors(b)
                .iter()
                .copied()
                .filter(|&w| w != a && index[ball.origin(w)] != usize::MAX)
                .collect();
            let [y] = ys[..] else {
                return Err(ActionError::DecodeFailure(format!("subdivision {} does not reach one original", ball.origin(b))));
            };
            let yi = index[ball.origin(y)];
            for i in labels {
                if set[i - 1][xi] {
                    return Err(ActionError::DecodeFailure(format!("generator {i} defined twice at {x}")));
                }
                set[i - 1][xi] = true;
                gens[i - 1][xi] = yi;
            }
        }
    }
    FiniteAction::new(m, gens).map_err(|e| ActionError::DecodeFailure(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_shift_is_a_cycle() {
        let sg = schreier_graph(&FiniteAction::cyclic_shift(5));
        assert_eq!(sg.graph.edge_count(), 5);
        assert!((0..5).all(|v| sg.graph.degree(v) == 2));
        assert!(sg.graph.edges().all(|(u, v)| sg.edge_labels(u, v) == BTreeSet::from([1])));
    }

    #[test]
    fn identity_has_no_edges() {
        assert_eq!(schreier_graph(&FiniteAction::identity(6, 3)).graph.edge_count(), 0);
    }

    #[test]
    fn stage_counts() {
        let e = encode_action(&FiniteAction::random(10, 2, Seed(1)));
        assert_eq!(e.stages.after_step1, 40);
        let c = encode_action(&FiniteAction::cyclic_shift(9));
        assert_eq!(c.graph.n(), 6 * 9);
        let fixed = encode_action(&FiniteAction::identity(4, 1));
        assert_eq!(fixed.graph.n(), 12);
        assert_eq!(fixed.graph.components().len(), 4);
    }

    #[test]
    fn round_trips() {
        for a in [
            FiniteAction::cyclic_shift(7),
            FiniteAction::identity(1, 2),
            FiniteAction::cyclic_shift(2),
            FiniteAction::random(12, 3, Seed(4)),
        ] {
            let e = encode_action(&a);
            let d = decode_action(&e.strip(), None).unwrap();
            assert!(actions_isomorphic(&a, &d), "{a:?} vs {d:?}");
        }
    }

    #[test]
    fn isomorphism_detects_cycle_types() {
        let a = FiniteAction::new(4, vec![vec![1, 0, 3, 2]]).unwrap();
        let b = FiniteAction::new(4, vec![vec![1, 2, 3, 0]]).unwrap();
        assert!(!actions_isomorphic(&a, &b));
        let c = FiniteAction::new(4, vec![vec![0, 2, 1, 3]]).unwrap();
        assert!(!actions_isomorphic(&a, &c));
        let d = FiniteAction::new(4, vec![vec![2, 3, 0, 1]]).unwrap();
        assert!(actions_isomorphic(&a, &d));
    }

    #[test]
    fn text_format() {
        let a = FiniteAction::random(6, 2, Seed(2));
        assert_eq!(FiniteAction::parse(&a.to_text()).unwrap(), a);
        assert_eq!(FiniteAction::parse("2 1\n0 0\n"), Err(ActionError::NotPermutation(1)));
        assert!(matches!(FiniteAction::parse("2 1\n0\n"), Err(ActionError::Parse { line: 2, .. })));
    }
}
