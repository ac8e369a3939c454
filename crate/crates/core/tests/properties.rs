mod support;

use std::collections::BTreeSet;

use graphlimits::balls::{ball_census, extract_ball};
use graphlimits::census::{census_from_balls, census_l1, component_census};
use graphlimits::generators::{cycle, grid, random_regular, torus};
use graphlimits::local_global::{
    directed_hausdorff, labeling_distribution, sample_cloud, Budget, LabelingCloud,
};
use graphlimits::matcher::{build_matching, edit_distance, Provenance};
use graphlimits::oracle::{apply_vertex_rule, b_color, VertexRule};
use graphlimits::partition::{bfs_distances, iso_peel};
use graphlimits::schreier::{decode_action, encode_action, encoding_degree_bound, FiniteAction};
use graphlimits::stats::stat_profile;
use graphlimits::{Graph, Rational, Seed};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use support::{brute_graph_class, flood_component_sizes, flood_components};

fn zero() -> Rational {
    Rational::from_integer(0)
}

/// Disjoint paths, cycles and stars on exactly `n` vertices, components <= 6.
fn bounded_graph(n: usize, seed: u64) -> Graph {
    let mut rng = Seed(seed).rng();
    let mut edges = Vec::new();
    let mut at = 0;
    while at < n {
        let size = rng.gen_range(1..=(n - at).min(6));
        match rng.gen_range(0..3) {
            0 if size >= 3 => edges.extend((0..size).map(|i| (at + i, at + (i + 1) % size))),
            1 => edges.extend((1..size.min(4)).map(|i| (at, at + i))),
            _ => edges.extend((1..size).map(|i| (at + i - 1, at + i))),
        }
        at += size;
    }
    Graph::from_edges(n, 3, edges).unwrap()
}

fn peeled(g: &Graph, eps: f64, k: usize, seed: u64) -> Graph {
    let p = iso_peel(g, eps, k, Seed(seed)).unwrap();
    g.remove_edges(&p.cut).unwrap()
}

#[test]
fn census_agrees_with_flood_fill() {
    for (i, g) in [grid(9, 7).unwrap(), torus(10, 10).unwrap(), cycle(50).unwrap()].iter().enumerate() {
        let gp = peeled(g, 1.2, 25, i as u64);
        let census = census_from_balls(&gp, 25).unwrap();
        assert_eq!(census, component_census(&gp, 25).unwrap());
        let total: u64 = census.types().values().map(|t| t.vertex_mass).sum();
        assert_eq!(total as usize, g.n());
        let comps: u64 = census.types().values().map(|t| t.components).sum();
        assert_eq!(comps as usize, flood_component_sizes(&gp).len());
        let mut sizes: Vec<usize> = census
            .types()
            .values()
            .flat_map(|t| std::iter::repeat(t.size as usize).take(t.components as usize))
            .collect();
        sizes.sort_unstable();
        assert_eq!(sizes, flood_component_sizes(&gp));
    }
}

#[test]
fn census_rejects_oversized_components() {
    let g = cycle(12).unwrap();
    assert!(census_from_balls(&g, 11).is_err());
    assert!(component_census(&g, 11).is_err());
    assert!(census_from_balls(&g, 12).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn census_l1_is_a_metric(a in 0u64..1000, b in 0u64..1000, c in 0u64..1000, n in 6usize..40) {
        let cs: Vec<_> = [a, b, c].iter().map(|&s| component_census(&bounded_graph(n, s), 6).unwrap()).collect();
        let d = |i: usize, j: usize| census_l1(&cs[i], &cs[j]).unwrap();
        prop_assert_eq!(d(0, 0), zero());
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2));
        prop_assert!(d(0, 1) <= Rational::from_integer(2));
    }

    #[test]
    fn matching_is_a_bijection_with_half_kappa_filler(a in 0u64..1000, b in 0u64..1000, n in 4usize..60) {
        let (g, h) = (bounded_graph(n, a), bounded_graph(n, b));
        let rho = build_matching(&g, &h, 6).unwrap();
        prop_assert!(rho.is_permutation());
        let kappa = census_l1(&component_census(&g, 6).unwrap(), &component_census(&h, 6).unwrap()).unwrap();
        prop_assert_eq!(Rational::from_integer(rho.filler_count() as i128), kappa * n as i128 / 2);
        // Matched vertices carry components onto isomorphic components.
        let comps = flood_components(&g);
        for comp in &comps {
            if !matches!(rho.provenance[comp[0]], Provenance::Matched(_)) {
                continue;
            }
            let image: Vec<usize> = comp.iter().map(|&v| rho.forward[v]).collect();
            prop_assert_eq!(brute_graph_class(&g.induced(comp)), brute_graph_class(&h.induced(&image)));
            for &u in comp {
                for &w in g.neighbors(u) {
                    prop_assert!(h.has_edge(rho.forward[u], rho.forward[w]));
                }
            }
        }
        prop_assert!(Rational::from_integer(edit_distance(&g, &h, &rho) as i128) <= kappa * 3 * n as i128);
    }

    #[test]
    fn matching_a_relabeled_copy_costs_nothing(a in 0u64..1000, n in 4usize..60) {
        let g = bounded_graph(n, a);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut Seed(a).rng());
        let h = g.permuted(&perm);
        let rho = build_matching(&g, &h, 6).unwrap();
        prop_assert_eq!(rho.filler_count(), 0);
        prop_assert_eq!(edit_distance(&g, &h, &rho), 0);
    }
}

#[test]
fn vertex_rules_are_local() {
    let g = grid(12, 12).unwrap();
    let c = b_color(&g, 3, Seed(4)).unwrap();
    let rule = VertexRule::from_predicate(&g, &c, 2, |b| b.label(0) == Some(0) || b.has_label_collision()).unwrap();
    let base = apply_vertex_rule(&g, &c, &rule).unwrap();
    let mut rng = Seed(9).rng();
    for _ in 0..30 {
        let u = rng.gen_range(0..g.n());
        let mut c2 = c.clone();
        c2.values[u] = (c2.values[u] + 1 + rng.gen_range(0..7)) % 8;
        let after = apply_vertex_rule(&g, &c2, &rule).unwrap();
        let dist = bfs_distances(&g, u);
        for v in 0..g.n() {
            if base[v] != after[v] {
                assert!(dist[v] <= 2, "vertex {v} at distance {} changed", dist[v]);
            }
        }
    }
}

#[test]
fn deleting_edges_moves_little_mass() {
    let mut rng = Seed(21).rng();
    for trial in 0..20u64 {
        let g = random_regular(60, 3, Seed(trial)).unwrap();
        let r = 1 + (trial % 3) as u32;
        let m = rng.gen_range(1..=5);
        let mut edges: Vec<_> = g.edges().collect();
        edges.shuffle(&mut rng);
        let kept = edges[m..].to_vec();
        let h = Graph::from_edges(g.n(), 3, kept).unwrap();
        let b = (0..g.n()).map(|v| extract_ball(&g, v, r, None).unwrap().len()).max().unwrap();
        let l1 = stat_profile(&g, r).unwrap().at(r).tv(stat_profile(&h, r).unwrap().at(r)) * 2;
        assert!(l1 <= Rational::new(2 * (m * b) as i128, g.n() as i128));
    }
}

#[test]
fn adding_points_never_increases_distance_to_a_cloud() {
    let budget = Budget {
        random: 6,
        optimized: 0,
        steps: 0,
    };
    let a = sample_cloud(&cycle(20).unwrap(), 2, 1, budget, Seed(1)).unwrap();
    let b = sample_cloud(&cycle(21).unwrap(), 2, 1, budget, Seed(2)).unwrap();
    let extra = sample_cloud(&cycle(21).unwrap(), 2, 1, budget, Seed(3)).unwrap();
    let mut points = b.points.clone();
    points.extend(extra.points);
    let bigger = LabelingCloud::from_points(1, 2, budget, Seed(2), points);
    assert!(directed_hausdorff(&a, &bigger) <= directed_hausdorff(&a, &b));
    assert!(directed_hausdorff(&bigger, &a) >= directed_hausdorff(&b, &a));
    assert_eq!(directed_hausdorff(&a, &a), zero());
}

#[test]
fn one_label_is_the_plain_distribution() {
    for g in [grid(5, 7).unwrap(), cycle(9).unwrap()] {
        let ones = vec![1; g.n()];
        let labeled = labeling_distribution(&g, &ones, 1, 2).unwrap();
        let plain: Vec<u64> = ball_census(&g, 2, None).unwrap().values().copied().collect();
        let mut a: Vec<u64> = labeled.counts.values().copied().collect();
        let mut b = plain;
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        let cloud = sample_cloud(&g, 1, 2, Budget { random: 4, optimized: 2, steps: 50 }, Seed(0)).unwrap();
        assert_eq!(cloud.len(), 1);
    }
}

/// Vertex and edge counts of the encoding, recounted from the permutations.
fn expected_size(a: &FiniteAction) -> (usize, usize) {
    let (m, n) = (a.m(), a.n());
    let mut pairs = BTreeSet::new();
    let mut marker = 0;
    for i in 1..=n {
        for x in 0..m {
            let y = a.apply(i, x);
            if y != x {
                pairs.insert((x.min(y), x.max(y)));
                marker += i;
            }
        }
    }
    let vertices = (n + 2) * m + 2 * pairs.len() + marker;
    let edges = (n + 1) * m + 3 * pairs.len() + marker;
    (vertices, edges)
}

#[test]
fn encoding_size_matches_a_recount() {
    for seed in 0..40u64 {
        let n = 1 + (seed % 3) as usize;
        let a = FiniteAction::random(1 + (seed as usize * 7) % 25, n, Seed(seed));
        let enc = encode_action(&a);
        assert_eq!((enc.graph.n(), enc.graph.edge_count()), expected_size(&a));
        assert_eq!(enc.graph.degree_bound(), encoding_degree_bound(n));
        assert!(enc.graph.max_degree() <= encoding_degree_bound(n));
    }
    assert_eq!(encoding_degree_bound(2), 5);
}

#[test]
fn decoding_ignores_vertex_names() {
    for seed in 0..20u64 {
        let a = FiniteAction::random(3 + seed as usize, 2, Seed(seed));
        let g = encode_action(&a).strip();
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut Seed(seed + 100).rng());
        let back = decode_action(&g.permuted(&perm), Some(2)).unwrap();
        assert!(graphlimits::schreier::actions_isomorphic(&a, &back));
        assert_eq!(back.m(), a.m());
    }
}
