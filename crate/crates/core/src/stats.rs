//! Ball-statistic vectors p(G, ·), the radius-weighted distance d_stat and
//! convergence diagnostics.
//!
//! `d_stat^(R)(G, H) = Σ_{r=1..R} 2^{-r} · ½ Σ_α |p(G,α) − p(H,α)|`, computed
//! in exact rational arithmetic.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::balls::{canonical_key, count_keys, extract_ball, BallError, CanonicalBallKey};
use crate::graph::Graph;
use crate::Rational;

/// Default truncation radius for d_stat.
pub const DEFAULT_RADIUS: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error("profiles reach radius {have}, distance needs radius {want}")]
    RadiusMismatch { have: u32, want: u32 },
    #[error("degree bounds differ ({0} vs {1})")]
    DegreeBoundMismatch(usize, usize),
    #[error("radius must be at least 1")]
    ZeroRadius,
}

/// Empirical distribution of r-ball types: exact counts over `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallDistribution {
    radius: u32,
    n: u64,
    degree_bound: usize,
    counts: BTreeMap<CanonicalBallKey, u64>,
}

impl BallDistribution {
    pub fn from_counts(
        radius: u32,
        degree_bound: usize,
        counts: BTreeMap<CanonicalBallKey, u64>,
    ) -> Self {
        let n = counts.values().sum();
        BallDistribution {
            radius,
            n,
            degree_bound,
            counts,
        }
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn counts(&self) -> &BTreeMap<CanonicalBallKey, u64> {
        &self.counts
    }

    pub fn count(&self, key: &CanonicalBallKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// p(G, α) as an exact fraction.
    pub fn prob(&self, key: &CanonicalBallKey) -> Rational {
        Rational::new(self.count(key) as i128, self.n.max(1) as i128)
    }

    pub fn support(&self) -> impl Iterator<Item = &CanonicalBallKey> {
        self.counts.keys()
    }

    /// Exact total-variation distance ½ Σ |p − q|.
    pub fn tv(&self, other: &BallDistribution) -> Rational {
        let keys: BTreeSet<&CanonicalBallKey> = self.support().chain(other.support()).collect();
        let sum = keys
            .into_iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .fold(Rational::from_integer(0), |a, b| a + b);
        sum / 2
    }

    /// Distribution of the (r′)-ball types obtained by truncating every
    /// r-ball type, computed from the keys alone.
    pub fn coarsen(&self, r: u32) -> Result<BallDistribution, BallError> {
        let mut counts = BTreeMap::new();
        for (k, &c) in &self.counts {
            let coarse = canonical_key(&k.decode()?.truncate(r), None)?;
            *counts.entry(coarse).or_insert(0) += c;
        }
        Ok(BallDistribution {
            radius: r,
            n: self.n,
            degree_bound: self.degree_bound,
            counts,
        })
    }

    pub fn report(&self) -> DistributionReport {
        DistributionReport {
            radius: self.radius,
            n: self.n,
            d: self.degree_bound,
            entries: self
                .counts
                .iter()
                .map(|(k, &c)| Entry {
                    key: k.to_hex(),
                    count: c,
                    prob: c as f64 / self.n.max(1) as f64,
                })
                .collect(),
        }
    }
}

/// JSON shape `{radius, entries: [{key, count, prob}], n, d}`.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    pub radius: u32,
    pub entries: Vec<Entry>,
    pub n: u64,
    pub d: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub key: String,
    pub count: u64,
    pub prob: f64,
}

/// Ball distributions for radii 1..=R.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatProfile {
    dists: Vec<BallDistribution>,
}

impl StatProfile {
    pub fn max_radius(&self) -> u32 {
        self.dists.len() as u32
    }

    /// Distribution at radius `r` (1-based).
    pub fn at(&self, r: u32) -> &BallDistribution {
        &self.dists[r as usize - 1]
    }

    pub fn distributions(&self) -> &[BallDistribution] {
        &self.dists
    }

    pub fn degree_bound(&self) -> usize {
        self.dists[0].degree_bound
    }

    /// Coarsening the r-ball census reproduces the (r−1)-ball census.
    pub fn is_consistent(&self) -> Result<bool, BallError> {
        for w in self.dists.windows(2) {
            if w[1].coarsen(w[0].radius)? != w[0] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Exact p(G, α) for every ball type at radii 1..=R. Each vertex's R-ball is
/// extracted once and truncated for the smaller radii.
pub fn stat_profile(g: &Graph, max_radius: u32) -> Result<StatProfile, StatsError> {
    if max_radius == 0 {
        return Err(StatsError::ZeroRadius);
    }
    let per_vertex: Vec<Vec<CanonicalBallKey>> = (0..g.n())
        .into_par_iter()
        .map(|v| {
            let ball = extract_ball(g, v, max_radius, None)?;
            (1..=max_radius)
                .map(|r| canonical_key(&ball.truncate(r), None))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, BallError>>()?;
    let dists = (0..max_radius as usize)
        .map(|i| {
            let keys = per_vertex.iter().map(|ks| ks[i].clone()).collect();
            BallDistribution {
                radius: i as u32 + 1,
                n: g.n() as u64,
                degree_bound: g.degree_bound(),
                counts: count_keys(keys),
            }
        })
        .collect();
    Ok(StatProfile { dists })
}

/// d_stat^(R) between two profiles, exact.
pub fn d_stat_profiles(a: &StatProfile, b: &StatProfile, radius: u32) -> Result<Rational, StatsError> {
    if radius == 0 {
        return Err(StatsError::ZeroRadius);
    }
    for p in [a, b] {
        if p.max_radius() < radius {
            return Err(StatsError::RadiusMismatch {
                have: p.max_radius(),
                want: radius,
            });
        }
    }
    if a.degree_bound() != b.degree_bound() {
        return Err(StatsError::DegreeBoundMismatch(a.degree_bound(), b.degree_bound()));
    }
    let mut total = Rational::from_integer(0);
    for r in 1..=radius {
        total += a.at(r).tv(b.at(r)) / Rational::from_integer(1i128 << r);
    }
    Ok(total)
}

/// d_stat^(R) between two graphs, exact.
pub fn d_stat(g: &Graph, h: &Graph, radius: u32) -> Result<Rational, StatsError> {
    d_stat_profiles(&stat_profile(g, radius)?, &stat_profile(h, radius)?, radius)
}

#[derive(Debug, Clone, Serialize)]
pub struct KeyTrace {
    pub radius: u32,
    pub key: String,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub radius: u32,
    pub metric: &'static str,
    pub traces: Vec<KeyTrace>,
    /// d_stat^(R)(G_i, G_{i+1}).
    pub successive: Vec<f64>,
    pub monotone_decreasing: bool,
}

pub const METRIC_NAME: &str = "d_stat^(R) = sum_{r=1..R} 2^-r * TV(p_r(G), p_r(H))";

/// Per-key probability traces and successive distances along a sequence.
pub fn convergence_report(seq: &[Graph], radius: u32) -> Result<ConvergenceReport, StatsError> {
    let profiles = seq
        .iter()
        .map(|g| stat_profile(g, radius))
        .collect::<Result<Vec<_>, _>>()?;
    let mut exact = Vec::new();
    for w in profiles.windows(2) {
        exact.push(d_stat_profiles(&w[0], &w[1], radius)?);
    }
    let mut traces = Vec::new();
    for r in 1..=radius {
        let keys: BTreeSet<&CanonicalBallKey> = profiles.iter().flat_map(|p| p.at(r).support()).collect();
        for k in keys {
            traces.push(KeyTrace {
                radius: r,
                key: k.to_hex(),
                probs: profiles.iter().map(|p| to_f64(p.at(r).prob(k))).collect(),
            });
        }
    }
    Ok(ConvergenceReport {
        radius,
        metric: METRIC_NAME,
        traces,
        successive: exact.iter().map(|&x| to_f64(x)).collect(),
        monotone_decreasing: exact.windows(2).all(|w| w[1] < w[0]),
    })
}

pub fn to_f64(x: Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, grid, leafed_line, path};

    #[test]
    fn cycle_profile_is_a_point_mass() {
        let p = stat_profile(&cycle(100).unwrap(), 3).unwrap();
        for d in p.distributions() {
            assert_eq!(d.counts().len(), 1);
            assert_eq!(d.prob(d.support().next().unwrap()), Rational::from_integer(1));
        }
        assert!(p.is_consistent().unwrap());
    }

    #[test]
    fn leaf_mass_is_two_thirds() {
        for n in [3, 10, 31] {
            let g = leafed_line(n);
            let p = stat_profile(&g, 1).unwrap();
            let leaf = canonical_key(&extract_ball(&g, g.n() - 1, 1, None).unwrap(), None).unwrap();
            assert_eq!(p.at(1).prob(&leaf), Rational::new(2, 3));
        }
    }

    #[test]
    fn union_mixes_keywise() {
        let g = grid(4, 3).unwrap();
        let h = leafed_line(4);
        let u = g.disjoint_union(&h);
        let (pg, ph, pu) = (
            stat_profile(&g, 2).unwrap(),
            stat_profile(&h, 2).unwrap(),
            stat_profile(&u, 2).unwrap(),
        );
        let (ng, nh) = (g.n() as i128, h.n() as i128);
        for r in 1..=2 {
            for k in pu.at(r).support() {
                let mix = (pg.at(r).prob(k) * ng + ph.at(r).prob(k) * nh) / (ng + nh);
                assert_eq!(pu.at(r).prob(k), mix);
            }
        }
    }

    #[test]
    fn path_versus_cycle_matches_boundary_count() {
        // At radius r, 2r end vertices of P_100 see a non-central ball.
        let d = d_stat(&path(100).unwrap(), &cycle(100).unwrap(), 3).unwrap();
        let hand: Rational = (1..=3)
            .map(|r| Rational::new(2 * r, 100) / Rational::from_integer(1 << r))
            .sum();
        assert_eq!(d, hand);
        assert_eq!(d, Rational::new(275, 10000));
    }

    #[test]
    fn copies_are_indistinguishable() {
        let k = grid(3, 5).unwrap();
        let kk = k.disjoint_union(&k);
        for r in 1..=4 {
            assert_eq!(d_stat(&k, &kk, r).unwrap(), Rational::from_integer(0));
        }
    }

    #[test]
    fn radius_errors() {
        let a = stat_profile(&cycle(5).unwrap(), 2).unwrap();
        assert!(matches!(
            d_stat_profiles(&a, &a, 3),
            Err(StatsError::RadiusMismatch { have: 2, want: 3 })
        ));
        let g = grid(3, 3).unwrap();
        let b = stat_profile(&g, 2).unwrap();
        assert!(matches!(d_stat_profiles(&a, &b, 2), Err(StatsError::DegreeBoundMismatch(2, 4))));
    }

    #[test]
    fn convergence_of_grids() {
        let seq = [grid(10, 10).unwrap(), grid(20, 20).unwrap(), grid(40, 40).unwrap()];
        let rep = convergence_report(&seq, 3).unwrap();
        assert_eq!(rep.successive.len(), 2);
        assert!(rep.monotone_decreasing, "{:?}", rep.successive);
        let flat = convergence_report(&[cycle(9).unwrap(), cycle(9).unwrap(), cycle(9).unwrap()], 2).unwrap();
        assert!(flat.successive.iter().all(|&x| x == 0.0));
        assert!(!flat.monotone_decreasing);
    }

    #[test]
    fn alternating_sequence_stays_apart() {
        // C_3 vs P_3 at R = 1: P_3's three 1-balls (two ends, one centre) are
        // all unlike the triangle's, so TV = 1 and d = 1/2.
        let (c, p) = (cycle(3).unwrap(), path(3).unwrap());
        let rep = convergence_report(&[c.clone(), p.clone(), c, p], 1).unwrap();
        assert!(rep.successive.iter().all(|&x| x == 0.5));
    }
}
