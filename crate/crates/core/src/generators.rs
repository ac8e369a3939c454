//! Standard graph families: hyperfinite exemplars (cycles, grids, tori,
//! Følner boxes, leafed lines) and random regular graphs as the expander control.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{edge, Graph};
use crate::seed::Seed;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("{family}: parameters too small ({detail})")]
    SizeTooSmall { family: &'static str, detail: String },
    #[error("random_regular: n*d must be even and n > d (n={n}, d={d})")]
    BadRegularParams { n: usize, d: usize },
    #[error("random_regular: no simple graph after {0} pairings")]
    GenerationFailed(usize),
}

/// Resample budget of the pairing model.
pub const PAIRING_RETRIES: usize = 1000;

fn too_small(family: &'static str, detail: String) -> GenerateError {
    GenerateError::SizeTooSmall { family, detail }
}

pub fn cycle(n: usize) -> Result<Graph, GenerateError> {
    if n < 3 {
        return Err(too_small("cycle", format!("n={n}, need n >= 3")));
    }
    Ok(Graph::from_edges(n, 2, (0..n).map(|i| (i, (i + 1) % n))).unwrap())
}

pub fn path(n: usize) -> Result<Graph, GenerateError> {
    if n < 1 {
        return Err(too_small("path", "n=0".into()));
    }
    Ok(Graph::from_edges(n, 2, (1..n).map(|i| (i - 1, i))).unwrap())
}

/// `w × h` grid; vertex `(x, y)` has id `y * w + x`.
pub fn grid(w: usize, h: usize) -> Result<Graph, GenerateError> {
    if w < 1 || h < 1 {
        return Err(too_small("grid", format!("w={w}, h={h}")));
    }
    let mut edges = Vec::with_capacity(2 * w * h);
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            if x + 1 < w {
                edges.push((v, v + 1));
            }
            if y + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    Ok(Graph::from_edges(w * h, 4, edges).unwrap())
}

/// `w × h` torus. For a side of length 2 the two wrap-around neighbours
/// coincide and the simple graph keeps a single edge.
pub fn torus(w: usize, h: usize) -> Result<Graph, GenerateError> {
    if w < 2 || h < 2 {
        return Err(too_small("torus", format!("w={w}, h={h}, need both >= 2")));
    }
    let mut edges = std::collections::BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            edges.insert(edge(v, y * w + (x + 1) % w));
            edges.insert(edge(v, ((y + 1) % h) * w + x));
        }
    }
    Ok(Graph::from_edges(w * h, 4, edges).unwrap())
}

/// The `k × k` box of the Cayley graph of Z² (same graph as `grid(k, k)`).
pub fn folner_box(k: usize) -> Result<Graph, GenerateError> {
    grid(k, k).map_err(|_| too_small("folner_box", format!("k={k}")))
}

/// Line with `n` edges (`n + 1` spine vertices), each spine vertex carrying
/// two pendant leaves. Spine vertex `i` has id `i`; its leaves are
/// `n + 1 + 2i` and `n + 2 + 2i`.
pub fn leafed_line(n: usize) -> Graph {
    let spine = n + 1;
    let mut edges: Vec<_> = (1..spine).map(|i| (i - 1, i)).collect();
    for i in 0..spine {
        edges.push((i, spine + 2 * i));
        edges.push((i, spine + 2 * i + 1));
    }
    Graph::from_edges(3 * spine, 4, edges).unwrap()
}

/// Uniform-ish simple `d`-regular graph via the pairing model, resampling
/// whenever a loop or multi-edge appears.
pub fn random_regular(n: usize, d: usize, seed: Seed) -> Result<Graph, GenerateError> {
    if d == 0 || n <= d || (n * d) % 2 == 1 {
        return Err(GenerateError::BadRegularParams { n, d });
    }
    let mut rng = seed.rng();
    let mut points: Vec<usize> = (0..n * d).map(|p| p / d).collect();
    'attempt: for _ in 0..PAIRING_RETRIES {
        points.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert(edge(u, v)) {
                continue 'attempt;
            }
        }
        return Ok(Graph::from_edges(n, d, seen).unwrap());
    }
    Err(GenerateError::GenerationFailed(PAIRING_RETRIES))
}

/// Applies up to `swaps` degree-preserving double-edge swaps
/// `{a,b},{c,d} -> {a,d},{c,b}`, skipping proposals that would create a loop
/// or a multi-edge. Returns the rewired graph and the number of swaps applied.
pub fn double_edge_swaps(g: &Graph, swaps: usize, seed: Seed) -> (Graph, usize) {
    let mut rng = seed.rng();
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    let mut set: std::collections::HashSet<(usize, usize)> = edges.iter().copied().collect();
    let mut done = 0;
    let mut attempts = 0;
    while done < swaps && edges.len() >= 2 && attempts < 1000 * swaps.max(1) {
        attempts += 1;
        let i = rng.gen_range(0..edges.len());
        let j = rng.gen_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, d) = if rng.gen::<bool>() {
            edges[j]
        } else {
            (edges[j].1, edges[j].0)
        };
        if a == d || c == b || a == c || b == d {
            continue;
        }
        let e1 = edge(a, d);
        let e2 = edge(c, b);
        if set.contains(&e1) || set.contains(&e2) {
            continue;
        }
        set.remove(&edges[i]);
        set.remove(&edges[j]);
        set.insert(e1);
        set.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
        done += 1;
    }
    (Graph::from_edges(g.n(), g.degree_bound(), edges).unwrap(), done)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_families() {
        let t = cycle(3).unwrap();
        assert_eq!(t.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(grid(2, 2).unwrap(), cycle(4).unwrap().with_degree_bound(4).unwrap().permuted(&[0, 1, 3, 2]));
        let t = torus(3, 3).unwrap();
        assert_eq!(t.n(), 9);
        assert_eq!(t.edge_count(), 18);
        assert!((0..9).all(|v| t.degree(v) == 4));
        assert!(cycle(2).is_err());
        assert!(torus(1, 5).is_err());
        assert_eq!(torus(2, 2).unwrap().edge_count(), 4);
    }

    #[test]
    fn folner_boxes() {
        assert_eq!(folner_box(2).unwrap().edge_count(), 4);
        let b = folner_box(10).unwrap();
        assert_eq!((b.n(), b.edge_count()), (100, 180));
        // Boundary vertices (degree < 4) of a k-box: 4(k-1), a vanishing fraction.
        let mut prev = f64::INFINITY;
        for k in [3, 5, 10, 20, 40] {
            let g = folner_box(k).unwrap();
            let boundary = (0..g.n()).filter(|&v| g.degree(v) < 4).count();
            assert_eq!(boundary, 4 * (k - 1));
            let frac = boundary as f64 / g.edge_count() as f64;
            assert!(frac <= 4.0 / k as f64);
            assert!(frac < prev);
            prev = frac;
        }
    }

    #[test]
    fn leafed_line_counts() {
        let g = leafed_line(5);
        assert_eq!((g.n(), g.edge_count()), (18, 17));
        let star = leafed_line(0);
        assert_eq!((star.n(), star.edge_count()), (3, 2));
        for n in [1, 2, 10, 77] {
            let g = leafed_line(n);
            let leaves = (0..g.n()).filter(|&v| g.degree(v) == 1).count();
            assert_eq!(3 * leaves, 2 * g.n());
        }
    }

    #[test]
    fn random_regular_cases() {
        let k4 = random_regular(4, 3, Seed(9)).unwrap();
        assert_eq!(k4.edge_count(), 6);
        let g = random_regular(100, 3, Seed(1)).unwrap();
        assert!((0..100).all(|v| g.degree(v) == 3));
        assert_eq!(g, random_regular(100, 3, Seed(1)).unwrap());
        assert_ne!(g, random_regular(100, 3, Seed(2)).unwrap());
        assert!(random_regular(5, 3, Seed(0)).is_err());
        assert!(random_regular(3, 3, Seed(0)).is_err());
    }

    #[test]
    fn swaps_preserve_degrees() {
        let g = grid(20, 20).unwrap();
        let (h, done) = double_edge_swaps(&g, 10, Seed(5));
        assert_eq!(done, 10);
        assert!((0..g.n()).all(|v| g.degree(v) == h.degree(v)));
        assert_ne!(g, h);
    }

    proptest! {
        #[test]
        fn generators_respect_invariants(w in 1usize..12, h in 2usize..12, seed in any::<u64>()) {
            for g in [grid(w, h).unwrap(), torus(w + 1, h).unwrap(), path(w).unwrap(), leafed_line(w)] {
                prop_assert!(g.max_degree() <= g.degree_bound());
                prop_assert_eq!(crate::graph::load_edge_list(&g.to_edge_list(), None).unwrap(), g);
            }
            let n = 2 * (w + h) + 4;
            let r = random_regular(n, 3, Seed(seed)).unwrap();
            prop_assert!((0..n).all(|v| r.degree(v) == 3));
        }
    }
}
