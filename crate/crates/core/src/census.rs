//! Component-type censuses c_S of K-bounded graphs and the equipartition check.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::balls::{canonical_form, component_ball, count_keys, extract_ball_limited, CanonicalBallKey};
use crate::graph::Graph;
use crate::partition::{iso_peel, Partition, PartitionError};
use crate::seed::{stream, Seed};
use crate::stats::to_f64;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("component of size {0} exceeds the bound")]
    ComponentTooLarge(usize),
    #[error("censuses use different bounds K ({0} vs {1})")]
    KMismatch(usize, usize),
    #[error("graph {side}: {source} (hyperfinite-family hypothesis violated at these parameters)")]
    Infeasible {
        side: &'static str,
        #[source]
        source: PartitionError,
    },
}

/// Unrooted isomorphism type of a connected graph: the least rooted
/// canonical key over all choices of root.
pub type ComponentKey = CanonicalBallKey;

/// A component with its type and its vertices listed in canonical order, so
/// that two components of the same type are matched position by position.
#[derive(Debug, Clone)]
pub struct ComponentInfo {
    pub type_key: ComponentKey,
    pub canonical_vertices: Vec<usize>,
}

impl ComponentInfo {
    pub fn min_vertex(&self) -> usize {
        *self.canonical_vertices.iter().min().unwrap()
    }

    pub fn len(&self) -> usize {
        self.canonical_vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical_vertices.is_empty()
    }
}

/// Type and canonical vertex order of the component containing `comp`.
pub fn component_type(g: &Graph, comp: &[usize]) -> ComponentInfo {
    let mut best: Option<(CanonicalBallKey, Vec<usize>)> = None;
    for &root in comp {
        let ball = component_ball(g, root);
        let form = canonical_form(&ball, None).expect("unlabeled ball");
        if best.as_ref().is_none_or(|(k, _)| form.key < *k) {
            let global = form.order.iter().map(|&l| ball.origin(l)).collect();
            best = Some((form.key, global));
        }
    }
    let (type_key, canonical_vertices) = best.expect("nonempty component");
    ComponentInfo {
        type_key,
        canonical_vertices,
    }
}

/// Every component, typed, ordered by minimum vertex.
pub fn analyze_components(g: &Graph, k: usize) -> Result<Vec<ComponentInfo>, CensusError> {
    let comps = g.components();
    if let Some(c) = comps.iter().find(|c| c.len() > k) {
        return Err(CensusError::ComponentTooLarge(c.len()));
    }
    Ok(comps.iter().map(|c| component_type(g, c)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypeCount {
    /// Number of vertices in components of this type.
    pub vertex_mass: u64,
    pub components: u64,
    pub size: u64,
}

/// S ↦ c_S, vertex mass in components isomorphic to S over |V|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCensus {
    k: usize,
    n: u64,
    types: BTreeMap<ComponentKey, TypeCount>,
}

impl ComponentCensus {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn types(&self) -> &BTreeMap<ComponentKey, TypeCount> {
        &self.types
    }

    /// c_S as an exact fraction.
    pub fn mass(&self, key: &ComponentKey) -> Rational {
        let m = self.types.get(key).map_or(0, |t| t.vertex_mass);
        Rational::new(m as i128, self.n.max(1) as i128)
    }

    pub fn total_mass(&self) -> Rational {
        self.types.keys().map(|k| self.mass(k)).sum()
    }

    pub fn report(&self) -> CensusReport {
        CensusReport {
            k: self.k,
            n: self.n,
            entries: self
                .types
                .iter()
                .map(|(key, t)| CensusEntry {
                    key: key.to_hex(),
                    size: t.size,
                    components: t.components,
                    vertex_mass: t.vertex_mass,
                    c_s: t.vertex_mass as f64 / self.n.max(1) as f64,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub k: usize,
    pub n: u64,
    pub entries: Vec<CensusEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusEntry {
    pub key: String,
    pub size: u64,
    pub components: u64,
    pub vertex_mass: u64,
    pub c_s: f64,
}

pub fn census_from_components(n: usize, k: usize, comps: &[ComponentInfo]) -> ComponentCensus {
    let mut types: BTreeMap<ComponentKey, TypeCount> = BTreeMap::new();
    for c in comps {
        let t = types.entry(c.type_key.clone()).or_insert(TypeCount {
            vertex_mass: 0,
            components: 0,
            size: c.len() as u64,
        });
        t.vertex_mass += c.len() as u64;
        t.components += 1;
    }
    ComponentCensus {
        k,
        n: n as u64,
        types,
    }
}

/// Census from an explicit enumeration of the components.
pub fn component_census(g: &Graph, k: usize) -> Result<ComponentCensus, CensusError> {
    Ok(census_from_components(g.n(), k, &analyze_components(g, k)?))
}

/// Census read off the (K+1)-ball census alone: a ball with no vertex at
/// depth K+1 and at most K vertices is a whole component, whose type is
/// recovered from the decoded ball.
pub fn census_from_balls(g: &Graph, k: usize) -> Result<ComponentCensus, CensusError> {
    let radius = k as u32 + 1;
    let mut keys = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        // A ball with more than K vertices already violates the bound.
        let ball = extract_ball_limited(g, v, radius, k).ok_or(CensusError::ComponentTooLarge(k + 1))?;
        keys.push(canonical_form(&ball, None).expect("unlabeled ball").key);
    }
    let mut types: BTreeMap<ComponentKey, TypeCount> = BTreeMap::new();
    for (key, count) in count_keys(keys) {
        let ball = key.decode().expect("own key decodes");
        if ball.max_depth() > k as u32 || ball.len() > k {
            return Err(CensusError::ComponentTooLarge(ball.len()));
        }
        let whole = ball.to_graph(g.degree_bound());
        let all: Vec<usize> = (0..whole.n()).collect();
        let info = component_type(&whole, &all);
        let t = types.entry(info.type_key).or_insert(TypeCount {
            vertex_mass: 0,
            components: 0,
            size: ball.len() as u64,
        });
        t.vertex_mass += count;
    }
    for t in types.values_mut() {
        t.components = t.vertex_mass / t.size;
    }
    Ok(ComponentCensus {
        k,
        n: g.n() as u64,
        types,
    })
}

/// Σ_S |c_S − c′_S| over the union of supports, exact.
pub fn census_l1(a: &ComponentCensus, b: &ComponentCensus) -> Result<Rational, CensusError> {
    if a.k != b.k {
        return Err(CensusError::KMismatch(a.k, b.k));
    }
    let keys: BTreeSet<&ComponentKey> = a.types.keys().chain(b.types.keys()).collect();
    Ok(keys.into_iter().map(|k| (a.mass(k) - b.mass(k)).abs()).sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct SideReport {
    pub n: usize,
    pub edges: usize,
    pub removed_edges: usize,
    pub removed_fraction_edges: f64,
    /// |Z| < 2ε|E|
    pub below_two_eps: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquipartitionReport {
    pub eps: f64,
    pub k: usize,
    pub delta: f64,
    pub g: SideReport,
    pub h: SideReport,
    pub census_l1: f64,
    pub census_l1_exact: String,
    pub l1_below_delta: bool,
    pub pass: bool,
}

/// Peeled pieces of both graphs plus their censuses, under one strategy.
pub struct Equipartition {
    pub g_partition: Partition,
    pub h_partition: Partition,
    pub g_census: ComponentCensus,
    pub h_census: ComponentCensus,
    pub l1: Rational,
}

pub fn equipartition(g: &Graph, h: &Graph, eps: f64, k: usize, seed: Seed) -> Result<Equipartition, CensusError> {
    let seed = seed.derive(stream::PARTITION);
    let pg = iso_peel(g, eps, k, seed).map_err(|source| CensusError::Infeasible { side: "G", source })?;
    let ph = iso_peel(h, eps, k, seed).map_err(|source| CensusError::Infeasible { side: "H", source })?;
    let gc = component_census(&g.remove_edges(&pg.cut).expect("cut from G"), k)?;
    let hc = component_census(&h.remove_edges(&ph.cut).expect("cut from H"), k)?;
    let l1 = census_l1(&gc, &hc)?;
    Ok(Equipartition {
        g_partition: pg,
        h_partition: ph,
        g_census: gc,
        h_census: hc,
        l1,
    })
}

/// Checks the two removal clauses (|Z| < 2ε|E|) and the census clause (L1 < δ).
pub fn equipartition_check(
    g: &Graph,
    h: &Graph,
    eps: f64,
    k: usize,
    delta: f64,
    seed: Seed,
) -> Result<EquipartitionReport, CensusError> {
    let eq = equipartition(g, h, eps, k, seed)?;
    let two_eps = crate::partition::eps_to_rational(eps) * 2;
    let side = |gr: &Graph, p: &Partition| SideReport {
        n: gr.n(),
        edges: gr.edge_count(),
        removed_edges: p.cut.len(),
        removed_fraction_edges: to_f64(p.removed_fraction_edges()),
        below_two_eps: Rational::from_integer(p.cut.len() as i128) < two_eps * gr.edge_count() as i128,
    };
    let (gs, hs) = (side(g, &eq.g_partition), side(h, &eq.h_partition));
    let l1f = to_f64(eq.l1);
    let l1_below_delta = l1f < delta;
    Ok(EquipartitionReport {
        eps,
        k,
        delta,
        pass: gs.below_two_eps && hs.below_two_eps && l1_below_delta,
        g: gs,
        h: hs,
        census_l1: l1f,
        census_l1_exact: eq.l1.to_string(),
        l1_below_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, grid, path};

    fn triangles_and_points(tri: usize, points: usize) -> Graph {
        let mut g = Graph::empty(points, 2);
        for _ in 0..tri {
            g = cycle(3).unwrap().disjoint_union(&g);
        }
        g
    }

    #[test]
    fn isolated_vertices() {
        let c = component_census(&Graph::empty(5, 1), 1).unwrap();
        assert_eq!(c.types().len(), 1);
        assert_eq!(c.total_mass(), Rational::from_integer(1));
    }

    #[test]
    fn triangles_and_singletons() {
        let g = triangles_and_points(2, 3);
        let c = component_census(&g, 3).unwrap();
        let masses: BTreeSet<Rational> = c.types().keys().map(|k| c.mass(k)).collect();
        assert_eq!(masses, BTreeSet::from([Rational::new(6, 9), Rational::new(3, 9)]));
        assert_eq!(census_from_balls(&g, 3).unwrap(), c);
    }

    #[test]
    fn too_large_components_are_refused() {
        let g = path(6).unwrap();
        assert_eq!(component_census(&g, 5), Err(CensusError::ComponentTooLarge(6)));
        assert!(matches!(census_from_balls(&g, 5), Err(CensusError::ComponentTooLarge(_))));
        assert!(census_from_balls(&g, 6).is_ok());
    }

    #[test]
    fn l1_cases() {
        let a = component_census(&Graph::empty(4, 1), 2).unwrap();
        let b = component_census(&Graph::from_edges(4, 1, [(0, 1), (2, 3)]).unwrap(), 2).unwrap();
        assert_eq!(census_l1(&a, &a).unwrap(), Rational::from_integer(0));
        assert_eq!(census_l1(&a, &b).unwrap(), Rational::from_integer(2));
        let c = component_census(&Graph::empty(4, 1), 3).unwrap();
        assert_eq!(census_l1(&a, &c), Err(CensusError::KMismatch(2, 3)));
    }

    #[test]
    fn type_is_root_independent() {
        let g = grid(3, 2).unwrap().disjoint_union(&grid(2, 3).unwrap());
        let comps = analyze_components(&g, 6).unwrap();
        assert_eq!(comps[0].type_key, comps[1].type_key);
        assert_ne!(comps[0].type_key, component_type(&path(6).unwrap(), &[0, 1, 2, 3, 4, 5]).type_key);
    }

    #[test]
    fn equipartition_of_identical_graphs() {
        let g = grid(12, 12).unwrap();
        let rep = equipartition_check(&g, &g, 0.8, 20, 0.01, Seed(1)).unwrap();
        assert_eq!(rep.census_l1, 0.0);
        assert!(rep.pass);
    }
}
