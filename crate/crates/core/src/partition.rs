//! (ε, K)-partitions by isoperimetric peeling.
//!
//! Each round considers every BFS-order prefix (up to `K` vertices) grown
//! from every remaining vertex of the working graph, picks the candidate with
//! least i(F) = |∂F| / |F| among those below `eps` (ties: smaller |F|, then
//! smaller minimum vertex, then smaller start vertex), cuts its outgoing
//! edges and deletes it. `Infeasible` only means no candidate in this family
//! qualified.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{EdgeSet, Graph, GraphError};
use crate::seed::Seed;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("empty vertex set")]
    EmptySet,
    #[error("eps must lie in (0, d] and K must be positive")]
    BadParameters,
    #[error("no candidate set with i(F) < eps; {residual} vertices left unpeeled")]
    Infeasible {
        residual: usize,
        peel_log: Vec<PeelStep>,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Exact |∂F| / |F| for `F ⊆ V(G)`.
pub fn iso_constant(g: &Graph, set: &[usize]) -> Result<Rational, PartitionError> {
    if set.is_empty() {
        return Err(PartitionError::EmptySet);
    }
    let mut inside = vec![false; g.n()];
    for &v in set {
        inside[v] = true;
    }
    let size = inside.iter().filter(|&&b| b).count();
    let boundary: usize = (0..g.n())
        .filter(|&v| inside[v])
        .map(|v| g.neighbors(v).iter().filter(|&&w| !inside[w]).count())
        .sum();
    Ok(Rational::new(boundary as i128, size as i128))
}

/// Rational threshold from a user-facing `eps`; decimal inputs such as 0.4
/// become the exact fraction 2/5.
pub fn eps_to_rational(eps: f64) -> Rational {
    let r = num_rational::Ratio::<i64>::approximate_float(eps).expect("finite eps");
    Rational::new(*r.numer() as i128, *r.denom() as i128)
}

/// One peeled set together with its boundary in the working graph at peel time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeelStep {
    pub vertices: Vec<usize>,
    pub boundary: usize,
}

impl PeelStep {
    pub fn iso(&self) -> Rational {
        Rational::new(self.boundary as i128, self.vertices.len() as i128)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub cut: EdgeSet,
    pub k: usize,
    pub n: usize,
    pub edge_count: usize,
    pub peel_log: Vec<PeelStep>,
}

impl Partition {
    /// |Z| / |E(G)|.
    pub fn removed_fraction_edges(&self) -> Rational {
        Rational::new(self.cut.len() as i128, self.edge_count.max(1) as i128)
    }

    /// |Z| / n.
    pub fn removed_fraction_vertex_normalized(&self) -> Rational {
        Rational::new(self.cut.len() as i128, self.n.max(1) as i128)
    }
}

/// Rank-ordered adjacency: the seed only permutes the order in which BFS
/// visits neighbours at equal distance.
fn ranked_adjacency(g: &Graph, seed: Seed) -> Vec<Vec<usize>> {
    let mut rank: Vec<usize> = (0..g.n()).collect();
    rank.shuffle(&mut seed.rng());
    (0..g.n())
        .map(|v| {
            let mut l = g.neighbors(v).to_vec();
            l.sort_by_key(|&w| rank[w]);
            l
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    boundary: usize,
    size: usize,
    min_vertex: usize,
    start: usize,
}

impl Candidate {
    fn cmp_key(&self, o: &Candidate) -> Ordering {
        (self.boundary * o.size)
            .cmp(&(o.boundary * self.size))
            .then(self.size.cmp(&o.size))
            .then(self.min_vertex.cmp(&o.min_vertex))
            .then(self.start.cmp(&o.start))
    }
}

struct Working<'a> {
    adj: Vec<Vec<usize>>,
    alive: Vec<bool>,
    wdeg: Vec<usize>,
    stamp: Vec<u32>,
    round: u32,
    _g: &'a Graph,
}

impl Working<'_> {
    /// BFS order from `start` in the working graph, at most `k` vertices.
    fn bfs_prefix(&mut self, start: usize, k: usize, out: &mut Vec<usize>) {
        self.round += 1;
        out.clear();
        out.push(start);
        self.stamp[start] = self.round;
        let mut head = 0;
        while head < out.len() && out.len() < k {
            let u = out[head];
            head += 1;
            for &w in &self.adj[u] {
                if self.alive[w] && self.stamp[w] != self.round {
                    self.stamp[w] = self.round;
                    out.push(w);
                    if out.len() == k {
                        break;
                    }
                }
            }
        }
    }

    /// Best qualifying prefix of the BFS order from `start`.
    fn best_from(&mut self, start: usize, k: usize, eps: Rational, buf: &mut Vec<usize>) -> Option<Candidate> {
        self.bfs_prefix(start, k, buf);
        // Re-stamp incrementally to count edges into the growing prefix.
        self.round += 1;
        let mark = self.round;
        let (en, ed) = (*eps.numer() as usize, *eps.denom() as usize);
        let mut boundary = 0usize;
        let mut min_vertex = usize::MAX;
        let mut best: Option<Candidate> = None;
        for (i, &u) in buf.iter().enumerate() {
            let into = self.adj[u]
                .iter()
                .filter(|&&w| self.alive[w] && self.stamp[w] == mark)
                .count();
            self.stamp[u] = mark;
            boundary = boundary + self.wdeg[u] - 2 * into;
            min_vertex = min_vertex.min(u);
            let size = i + 1;
            // i(F) < eps  ⇔  boundary · den < num · size
            if boundary * ed < en * size {
                let c = Candidate {
                    boundary,
                    size,
                    min_vertex,
                    start,
                };
                if best.is_none_or(|b| c.cmp_key(&b) == Ordering::Less) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

/// Greedy isoperimetric peeling into pieces of at most `k` vertices.
pub fn iso_peel(g: &Graph, eps: f64, k: usize, seed: Seed) -> Result<Partition, PartitionError> {
    if !(eps > 0.0 && eps <= g.degree_bound() as f64) || k == 0 {
        return Err(PartitionError::BadParameters);
    }
    let eps_r = eps_to_rational(eps);
    let n = g.n();
    let mut w = Working {
        adj: ranked_adjacency(g, seed),
        alive: vec![true; n],
        wdeg: (0..n).map(|v| g.degree(v)).collect(),
        stamp: vec![0; n],
        round: 0,
        _g: g,
    };
    let mut remaining = n;
    let mut cut = EdgeSet::new();
    let mut log = Vec::new();
    let mut buf = Vec::with_capacity(k);
    while remaining > 0 {
        let mut best: Option<Candidate> = None;
        for v in 0..n {
            if !w.alive[v] {
                continue;
            }
            if let Some(c) = w.best_from(v, k, eps_r, &mut buf) {
                if best.is_none_or(|b| c.cmp_key(&b) == Ordering::Less) {
                    best = Some(c);
                }
            }
        }
        let Some(c) = best else {
            return Err(PartitionError::Infeasible {
                residual: remaining,
                peel_log: log,
            });
        };
        w.bfs_prefix(c.start, c.size, &mut buf);
        let mut set = buf.clone();
        set.sort_unstable();
        let mark = w.round;
        for &u in &set {
            for &x in g.neighbors(u) {
                if w.alive[x] && w.stamp[x] != mark {
                    cut.insert(u, x);
                    w.wdeg[x] -= 1;
                }
            }
        }
        for &u in &set {
            w.alive[u] = false;
        }
        remaining -= set.len();
        log.push(PeelStep {
            vertices: set,
            boundary: c.boundary,
        });
    }
    Ok(Partition {
        cut,
        k,
        n,
        edge_count: g.edge_count(),
        peel_log: log,
    })
}

/// Replays a peel log as a certificate at `(eps, k)`: sets are disjoint and
/// cover V(G), each has at most `k` vertices, and each has i(F) < eps in the
/// working graph at its turn. Returns the implied cut.
pub fn replay_peel_log(g: &Graph, log: &[PeelStep], eps: f64, k: usize) -> Result<EdgeSet, String> {
    let eps = eps_to_rational(eps);
    let mut alive = vec![true; g.n()];
    let mut cut = EdgeSet::new();
    for (i, step) in log.iter().enumerate() {
        if step.vertices.is_empty() || step.vertices.len() > k {
            return Err(format!("step {i}: size {} outside 1..={k}", step.vertices.len()));
        }
        let mut inside = vec![false; g.n()];
        for &v in &step.vertices {
            if v >= g.n() || !alive[v] || inside[v] {
                return Err(format!("step {i}: vertex {v} unavailable"));
            }
            inside[v] = true;
        }
        let mut boundary = 0;
        for &v in &step.vertices {
            for &x in g.neighbors(v) {
                if alive[x] && !inside[x] {
                    boundary += 1;
                    cut.insert(v, x);
                }
            }
        }
        if boundary != step.boundary {
            return Err(format!("step {i}: boundary {boundary}, logged {}", step.boundary));
        }
        if Rational::new(boundary as i128, step.vertices.len() as i128) >= eps {
            return Err(format!("step {i}: i(F) not below eps"));
        }
        for &v in &step.vertices {
            alive[v] = false;
        }
    }
    if alive.iter().any(|&a| a) {
        return Err("log does not cover every vertex".into());
    }
    Ok(cut)
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub pass: bool,
    pub k: usize,
    pub worst_component: usize,
    pub component_count: usize,
    /// component size → number of components
    pub size_histogram: BTreeMap<usize, usize>,
    pub cut_edges: usize,
    pub removed_fraction_edges: f64,
    pub removed_fraction_vertex_normalized: f64,
}

/// Recomputes components of G∖Z from the cut alone (the peel log is ignored).
pub fn verify_partition(g: &Graph, p: &Partition) -> Result<PartitionReport, GraphError> {
    let rest = g.remove_edges(&p.cut)?;
    let comps = rest.components();
    let mut hist = BTreeMap::new();
    for c in &comps {
        *hist.entry(c.len()).or_insert(0) += 1;
    }
    let worst = comps.iter().map(Vec::len).max().unwrap_or(0);
    let e = g.edge_count().max(1) as f64;
    Ok(PartitionReport {
        pass: worst <= p.k,
        k: p.k,
        worst_component: worst,
        component_count: comps.len(),
        size_histogram: hist,
        cut_edges: p.cut.len(),
        removed_fraction_edges: p.cut.len() as f64 / e,
        removed_fraction_vertex_normalized: p.cut.len() as f64 / g.n().max(1) as f64,
    })
}

/// Partition witness from an explicit cut (for hand-built cuts).
pub fn partition_from_cut(g: &Graph, cut: EdgeSet, k: usize) -> Partition {
    Partition {
        cut,
        k,
        n: g.n(),
        edge_count: g.edge_count(),
        peel_log: Vec::new(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileEntry {
    pub eps: f64,
    /// Least K found within budget, `None` when every K ≤ budget was infeasible.
    pub best_k: Option<usize>,
    pub removed_fraction_edges: Option<f64>,
    pub removed_fraction_vertex_normalized: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HyperfinitenessProfile {
    pub k_budget: usize,
    pub entries: Vec<ProfileEntry>,
}

/// For each eps, the least K ≤ `k_budget` at which peeling succeeds, found
/// by doubling and then bisecting between the last failure and first success.
pub fn hyperfiniteness_profile(g: &Graph, eps_grid: &[f64], k_budget: usize, seed: Seed) -> HyperfinitenessProfile {
    let entries = eps_grid
        .iter()
        .map(|&eps| {
            let attempt = |k: usize| iso_peel(g, eps, k, seed).ok();
            let mut lo = 0usize;
            let mut k = 1usize;
            let mut found = None;
            while k <= k_budget {
                if let Some(p) = attempt(k) {
                    found = Some((k, p));
                    break;
                }
                lo = k;
                k *= 2;
            }
            if found.is_none() && lo < k_budget {
                if let Some(p) = attempt(k_budget) {
                    found = Some((k_budget, p));
                }
            }
            if let Some((mut hi, mut best)) = found {
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    match attempt(mid) {
                        Some(p) => {
                            hi = mid;
                            best = p;
                        }
                        None => lo = mid,
                    }
                }
                ProfileEntry {
                    eps,
                    best_k: Some(hi),
                    removed_fraction_edges: Some(crate::stats::to_f64(best.removed_fraction_edges())),
                    removed_fraction_vertex_normalized: Some(crate::stats::to_f64(
                        best.removed_fraction_vertex_normalized(),
                    )),
                }
            } else {
                ProfileEntry {
                    eps,
                    best_k: None,
                    removed_fraction_edges: None,
                    removed_fraction_vertex_normalized: None,
                }
            }
        })
        .collect();
    HyperfinitenessProfile { k_budget, entries }
}

/// Breadth-first distances; used by tests and diagnostics.
pub fn bfs_distances(g: &Graph, s: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; g.n()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &w in g.neighbors(v) {
            if d[w] == usize::MAX {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, grid, random_regular, torus};

    #[test]
    fn iso_constant_cases() {
        let g = grid(5, 5).unwrap();
        let all: Vec<usize> = (0..25).collect();
        assert_eq!(iso_constant(&g, &all).unwrap(), Rational::from_integer(0));
        let c = cycle(10).unwrap();
        assert_eq!(iso_constant(&c, &[3, 4, 5]).unwrap(), Rational::new(2, 3));
        let block: Vec<usize> = (1..4).flat_map(|y| (1..4).map(move |x| y * 5 + x)).collect();
        assert_eq!(iso_constant(&g, &block).unwrap(), Rational::new(12, 9));
        assert_eq!(iso_constant(&g, &[]), Err(PartitionError::EmptySet));
    }

    #[test]
    fn already_small_components_need_no_cut() {
        let g = Graph::from_edges(7, 2, [(0, 1), (2, 3), (3, 4), (5, 6)]).unwrap();
        let p = iso_peel(&g, 0.5, 3, Seed(0)).unwrap();
        assert!(p.cut.is_empty());
        assert!(verify_partition(&g, &p).unwrap().pass);
    }

    /// Minimum cut leaving all components of C_n at most k vertices: a cycle
    /// needs ⌈n/k⌉ cuts (at least 2 unless n ≤ k).
    fn optimal_cycle_cut(n: usize, k: usize) -> usize {
        if n <= k {
            0
        } else {
            n.div_ceil(k).max(2)
        }
    }

    #[test]
    fn cycles_peel_long_segments() {
        for n in 10..=30 {
            let g = cycle(n).unwrap();
            let p = iso_peel(&g, 0.5, 10, Seed(n as u64)).unwrap();
            let rep = verify_partition(&g, &p).unwrap();
            assert!(rep.pass);
            // Every peeled segment has i < 1/2, so only a terminal piece is shorter than 5.
            assert!(p.cut.len() <= n / 5 + 2, "n={n} cut={}", p.cut.len());
            assert!(p.cut.len() >= optimal_cycle_cut(n, 10));
            assert!(p.peel_log.iter().all(|s| s.iso() < Rational::new(1, 2)));
        }
    }

    #[test]
    fn expander_is_infeasible() {
        let g = random_regular(200, 3, Seed(4)).unwrap();
        match iso_peel(&g, 0.05, 50, Seed(1)) {
            Err(PartitionError::Infeasible { residual, peel_log }) => {
                assert_eq!(residual, 200);
                assert!(peel_log.is_empty());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn block_cut_of_torus() {
        let g = torus(30, 30).unwrap();
        let block = |v: usize| ((v % 30) / 5, (v / 30) / 5);
        let cut: EdgeSet = g.edges().filter(|&(u, v)| block(u) != block(v)).collect();
        let p = partition_from_cut(&g, cut, 25);
        let rep = verify_partition(&g, &p).unwrap();
        assert!(rep.pass);
        assert_eq!(p.removed_fraction_edges(), Rational::new(1, 5));
        let mut short = p.cut.clone();
        let first = *short.iter().next().unwrap();
        let mut rebuilt = EdgeSet::new();
        for &(u, v) in short.iter().skip(1) {
            rebuilt.insert(u, v);
        }
        short = rebuilt;
        let bad = verify_partition(&g, &partition_from_cut(&g, short, 25)).unwrap();
        assert!(!bad.pass, "removing {first:?} from the cut must merge two blocks");
        assert_eq!(bad.worst_component, 50);
    }

    #[test]
    fn peel_log_replays_and_is_monotone() {
        let g = grid(12, 12).unwrap();
        let p = iso_peel(&g, 0.8, 20, Seed(3)).unwrap();
        assert_eq!(replay_peel_log(&g, &p.peel_log, 0.8, 20).unwrap(), p.cut);
        assert!(replay_peel_log(&g, &p.peel_log, 1.5, 40).is_ok());
        assert_eq!(iso_peel(&g, 0.8, 20, Seed(3)).unwrap(), p);
    }

    #[test]
    fn bad_parameters() {
        let g = cycle(5).unwrap();
        assert_eq!(iso_peel(&g, 0.0, 3, Seed(0)), Err(PartitionError::BadParameters));
        assert_eq!(iso_peel(&g, 2.5, 3, Seed(0)), Err(PartitionError::BadParameters));
        assert_eq!(iso_peel(&g, 0.5, 0, Seed(0)), Err(PartitionError::BadParameters));
    }

    #[test]
    fn profile_of_cycle_tracks_two_over_eps() {
        let g = cycle(1000).unwrap();
        let prof = hyperfiniteness_profile(&g, &[0.5, 0.25, 0.1], 100, Seed(0));
        for e in &prof.entries {
            let k = e.best_k.expect("cycle is hyperfinite") as f64;
            let target = (2.0 / e.eps).ceil();
            assert!(k <= 2.0 * target && k >= target / 2.0, "eps={} k={k}", e.eps);
        }
        let single = hyperfiniteness_profile(&Graph::empty(1, 1), &[0.1, 1.0], 10, Seed(0));
        assert!(single.entries.iter().all(|e| e.best_k == Some(1)));
    }
}
