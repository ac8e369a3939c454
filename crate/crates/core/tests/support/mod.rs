//! Independent oracles shared by the integration suites. Nothing here calls
//! into the canonicalizer or the census code it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use graphlimits::Graph;

/// Small graph as adjacency bit rows (n <= 8).
#[derive(Clone, Debug)]
pub struct Small {
    pub n: usize,
    pub rows: Vec<u8>,
}

impl Small {
    pub fn degree(&self, v: usize) -> u32 {
        self.rows[v].count_ones()
    }

    pub fn connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = 1u8;
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for w in 0..self.n {
                if self.rows[v] >> w & 1 == 1 && seen >> w & 1 == 0 {
                    seen |= 1 << w;
                    stack.push(w);
                }
            }
        }
        seen.count_ones() as usize == self.n
    }

    pub fn to_graph(&self, d: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.rows[u] >> v & 1 == 1 {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(self.n, d, edges).unwrap()
    }

    fn code_under(&self, perm: &[usize]) -> u64 {
        // Bit (i, j), i < j, of the relabeled graph.
        let mut code = 0u64;
        let mut bit = 0;
        let mut inv = vec![0; self.n];
        for (v, &p) in perm.iter().enumerate() {
            inv[p] = v;
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.rows[inv[i]] >> inv[j] & 1 == 1 {
                    code |= 1 << bit;
                }
                bit += 1;
            }
        }
        code
    }
}

/// Calls `f` on every permutation of `0..n` that fixes the first `fixed` points.
pub fn for_each_perm(n: usize, fixed: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(p, k + 1, f);
            p.swap(k, i);
        }
    }
    rec(&mut p, fixed, &mut f);
}

/// Unrooted brute-force canonical code: minimum over all n! relabelings.
pub fn brute_unrooted(g: &Small) -> (usize, u64) {
    let mut best = u64::MAX;
    for_each_perm(g.n, 0, |p| best = best.min(g.code_under(p)));
    (g.n, best)
}

/// Rooted brute-force canonical code for a small graph rooted at vertex 0.
pub fn brute_rooted(g: &Small) -> (usize, u64) {
    let mut best = u64::MAX;
    for_each_perm(g.n, 1, |p| best = best.min(g.code_under(p)));
    (g.n, best)
}

/// Every connected graph with at most `max_n` vertices and maximum degree
/// at most `d`, one representative per isomorphism class. Built by adding a
/// vertex to smaller representatives (every connected graph has a non-cut
/// vertex) and deduplicating by the brute-force code.
pub fn connected_graphs(max_n: usize, d: u32) -> Vec<Small> {
    let mut out = vec![Small { n: 1, rows: vec![0] }];
    let mut layer = out.clone();
    for n in 2..=max_n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &layer {
            for mask in 1u32..(1 << (n - 1)) {
                if mask.count_ones() > d {
                    continue;
                }
                if (0..n - 1).any(|v| mask >> v & 1 == 1 && g.degree(v) >= d) {
                    continue;
                }
                let mut rows = g.rows.clone();
                rows.push(mask as u8);
                for v in 0..n - 1 {
                    if mask >> v & 1 == 1 {
                        rows[v] |= 1 << (n - 1);
                    }
                }
                let h = Small { n, rows };
                if seen.insert(brute_unrooted(&h)) {
                    next.push(h);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Rooted r-ball of `root` as a `Small` with the root relabeled to 0.
pub fn small_ball(g: &Small, root: usize, r: usize) -> Small {
    let mut dist = vec![usize::MAX; g.n];
    dist[root] = 0;
    let mut q = VecDeque::from([root]);
    let mut order = vec![root];
    while let Some(v) = q.pop_front() {
        for w in 0..g.n {
            if g.rows[v] >> w & 1 == 1 && dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if dist[w] <= r {
                    order.push(w);
                    q.push_back(w);
                }
            }
        }
    }
    let mut rows = vec![0u8; order.len()];
    for (i, &v) in order.iter().enumerate() {
        for (j, &w) in order.iter().enumerate() {
            if g.rows[v] >> w & 1 == 1 {
                rows[i] |= 1 << j;
            }
        }
    }
    Small {
        n: order.len(),
        rows,
    }
}

/// Flood fill with an explicit stack; returns sorted component sizes.
pub fn flood_component_sizes(g: &Graph) -> Vec<usize> {
    let mut seen = vec![false; g.n()];
    let mut sizes = Vec::new();
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        let mut size = 0;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable();
    sizes
}

/// Components as sorted vertex sets, via flood fill.
pub fn flood_components(g: &Graph) -> BTreeSet<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = BTreeSet::new();
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        let mut comp = vec![];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.insert(comp);
    }
    out
}

/// Brute-force isomorphism class of a small connected graph given as a
/// `Graph` (n <= 8), for checking component censuses.
pub fn brute_graph_class(g: &Graph) -> (usize, u64) {
    assert!(g.n() <= 8);
    let mut rows = vec![0u8; g.n()];
    for (u, v) in g.edges() {
        rows[u] |= 1 << v;
        rows[v] |= 1 << u;
    }
    brute_unrooted(&Small { n: g.n(), rows })
}
