//! Clouds of k-labeling statistics and the distances d_k and d_LG built on
//! them.
//!
//! The full set of labeled-ball distributions of a graph is exponentially
//! large, so a [`LabelingCloud`] holds a sample: uniform labelings plus
//! hill-climbed ones. Every point keeps the labeling that produced it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::balls::{canonical_key, extract_ball, BallError, CanonicalBallKey, LabelKind, RootedBall, VertexLabels};
use crate::graph::Graph;
use crate::partition::bfs_distances;
use crate::seed::{stream, Seed};
use crate::stats::to_f64;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LgError {
    #[error("vertex {vertex} has label {label}, outside 1..={k}")]
    LabelOutOfRange { vertex: usize, label: u64, k: u64 },
    #[error("labeling has {got} entries, graph has {want} vertices")]
    LengthMismatch { got: usize, want: usize },
    #[error("clouds differ in shape: (r, k) = {0:?} vs {1:?}")]
    ShapeMismatch((u32, u64), (u32, u64)),
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Ball(#[from] BallError),
}

/// Exact census of labeled r-balls under one labeling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LabeledBallDistribution {
    pub r: u32,
    pub k: u64,
    pub n: u64,
    pub counts: BTreeMap<CanonicalBallKey, u64>,
}

impl LabeledBallDistribution {
    pub fn prob(&self, key: &CanonicalBallKey) -> Rational {
        Rational::new(*self.counts.get(key).unwrap_or(&0) as i128, self.n.max(1) as i128)
    }

    /// (1/2)·Σ|p − q|, exact.
    pub fn half_l1(&self, other: &LabeledBallDistribution) -> Rational {
        let keys: BTreeSet<&CanonicalBallKey> = self.counts.keys().chain(other.counts.keys()).collect();
        keys.into_iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .sum::<Rational>()
            / 2
    }

    /// Mass of balls containing an edge whose endpoints share a label.
    pub fn monochromatic_mass(&self) -> Rational {
        let hits: u64 = self
            .counts
            .iter()
            .filter(|(k, _)| {
                let b = k.decode().expect("own key decodes");
                (0..b.len()).any(|u| b.neighbors(u).iter().any(|&w| b.label(u) == b.label(w)))
            })
            .map(|(_, c)| c)
            .sum();
        Rational::new(hits as i128, self.n.max(1) as i128)
    }
}

fn check_labeling(g: &Graph, c: &[u64], k: u64) -> Result<(), LgError> {
    if k == 0 {
        return Err(LgError::ZeroK);
    }
    if c.len() != g.n() {
        return Err(LgError::LengthMismatch {
            got: c.len(),
            want: g.n(),
        });
    }
    match c.iter().position(|&x| x == 0 || x > k) {
        Some(v) => Err(LgError::LabelOutOfRange {
            vertex: v,
            label: c[v],
            k,
        }),
        None => Ok(()),
    }
}

/// P_c for a labeling `c` with values in 1..=k.
pub fn labeling_distribution(g: &Graph, c: &[u64], k: u64, r: u32) -> Result<LabeledBallDistribution, LgError> {
    check_labeling(g, c, k)?;
    let labels = VertexLabels::plain(c.to_vec());
    let counts = crate::balls::ball_census(g, r, Some(&labels))?;
    Ok(LabeledBallDistribution {
        r,
        k,
        n: g.n() as u64,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub random: usize,
    pub optimized: usize,
    /// Proposed single-vertex moves per hill-climb chain.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PointOrigin {
    Random { index: usize },
    /// Chain `index`; it starts from a uniform labeling when `layered` is
    /// false and from BFS layers mod k otherwise.
    Optimized { index: usize, layered: bool, accepted: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CloudPoint {
    pub distribution: LabeledBallDistribution,
    pub labeling: Vec<u64>,
    pub origin: PointOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelingCloud {
    pub r: u32,
    pub k: u64,
    pub budget: Budget,
    pub seed: Seed,
    /// Sorted by distribution; labelings with equal distributions are
    /// merged into the first one.
    pub points: Vec<CloudPoint>,
}

impl LabelingCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_monochromatic_mass(&self) -> Option<Rational> {
        self.points.iter().map(|p| p.distribution.monochromatic_mass()).min()
    }

    pub fn from_points(r: u32, k: u64, budget: Budget, seed: Seed, mut points: Vec<CloudPoint>) -> Self {
        points.sort();
        points.dedup_by(|a, b| a.distribution == b.distribution);
        LabelingCloud {
            r,
            k,
            budget,
            seed,
            points,
        }
    }
}

fn random_labeling(n: usize, k: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(1..=k)).collect()
}

fn layered_labeling(g: &Graph, k: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    if g.n() == 0 {
        return Vec::new();
    }
    let root = rng.gen_range(0..g.n());
    bfs_distances(g, root)
        .into_iter()
        .map(|d| if d == usize::MAX { 1 } else { d as u64 % k + 1 })
        .collect()
}

/// Single-vertex-move hill climb on Σ_key |P·count(key) − S(key)|, which is
/// 2nP times the (1/2)L1 distance from the mean of P cloud points whose
/// summed counts are S.
struct Climber<'a> {
    g: &'a Graph,
    balls: Vec<RootedBall>,
    labels: Vec<u64>,
    keys: Vec<CanonicalBallKey>,
    counts: HashMap<CanonicalBallKey, i64>,
    sums: &'a HashMap<CanonicalBallKey, i64>,
    points: i64,
}

impl Climber<'_> {
    fn key_of(&self, x: usize) -> CanonicalBallKey {
        canonical_key(&self.balls[x].with_host_labels(LabelKind::Plain, &self.labels), None).expect("plain labels")
    }

    fn term(&self, key: &CanonicalBallKey, count: i64) -> i64 {
        (self.points * count - self.sums.get(key).copied().unwrap_or(0)).abs()
    }

    /// Objective change if `v` took label `new`, plus the new keys.
    fn delta(&mut self, v: usize, new: u64) -> (i64, Vec<(usize, CanonicalBallKey)>) {
        let old = std::mem::replace(&mut self.labels[v], new);
        let affected: Vec<usize> = (0..self.balls[v].len()).map(|i| self.balls[v].origin(i)).collect();
        let fresh: Vec<(usize, CanonicalBallKey)> = affected.iter().map(|&x| (x, self.key_of(x))).collect();
        self.labels[v] = old;
        let mut change: HashMap<&CanonicalBallKey, i64> = HashMap::new();
        for (x, key) in &fresh {
            *change.entry(&self.keys[*x]).or_insert(0) -= 1;
            *change.entry(key).or_insert(0) += 1;
        }
        let d = change
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(key, c)| {
                let now = self.counts.get(key).copied().unwrap_or(0);
                self.term(key, now + c) - self.term(key, now)
            })
            .sum();
        (d, fresh)
    }

    fn apply(&mut self, v: usize, new: u64, fresh: Vec<(usize, CanonicalBallKey)>) {
        self.labels[v] = new;
        for (x, key) in fresh {
            let old = std::mem::replace(&mut self.keys[x], key.clone());
            *self.counts.get_mut(&old).expect("counted") -= 1;
            *self.counts.entry(key).or_insert(0) += 1;
        }
    }
}

fn climb(
    g: &Graph,
    balls: &[RootedBall],
    start: Vec<u64>,
    k: u64,
    steps: usize,
    sums: &HashMap<CanonicalBallKey, i64>,
    points: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<u64>, usize) {
    let mut c = Climber {
        g,
        balls: balls.to_vec(),
        labels: start,
        keys: Vec::new(),
        counts: HashMap::new(),
        sums,
        points: points as i64,
    };
    c.keys = (0..c.g.n()).map(|x| c.key_of(x)).collect();
    for key in &c.keys {
        *c.counts.entry(key.clone()).or_insert(0) += 1;
    }
    let mut accepted = 0;
    if k < 2 || g.n() == 0 {
        return (c.labels, 0);
    }
    for _ in 0..steps {
        let v = rng.gen_range(0..g.n());
        let mut new = rng.gen_range(1..k);
        if new >= c.labels[v] {
            new += 1;
        }
        let (d, fresh) = c.delta(v, new);
        if d > 0 {
            c.apply(v, new, fresh);
            accepted += 1;
        }
    }
    (c.labels, accepted)
}

/// Uniform labelings plus hill-climbed ones; chain i starts from a uniform
/// labeling for even i and from a BFS-layer labeling for odd i, and climbs
/// away from the mean of the points collected so far.
pub fn sample_cloud(g: &Graph, k: u64, r: u32, budget: Budget, seed: Seed) -> Result<LabelingCloud, LgError> {
    if k == 0 {
        return Err(LgError::ZeroK);
    }
    let random: Vec<Vec<u64>> = (0..budget.random)
        .map(|i| random_labeling(g.n(), k, &mut seed.derive(2 * i as u64).rng()))
        .collect();
    let mut points: Vec<CloudPoint> = random
        .into_par_iter()
        .enumerate()
        .map(|(index, c)| {
            Ok(CloudPoint {
                distribution: labeling_distribution(g, &c, k, r)?,
                labeling: c,
                origin: PointOrigin::Random { index },
            })
        })
        .collect::<Result<_, LgError>>()?;
    if budget.optimized > 0 {
        let balls: Vec<RootedBall> = (0..g.n())
            .into_par_iter()
            .map(|v| extract_ball(g, v, r, None))
            .collect::<Result<_, _>>()?;
        let mut sums: HashMap<CanonicalBallKey, i64> = HashMap::new();
        for p in &points {
            for (key, &c) in &p.distribution.counts {
                *sums.entry(key.clone()).or_insert(0) += c as i64;
            }
        }
        for index in 0..budget.optimized {
            let mut rng = seed.derive(2 * index as u64 + 1).rng();
            let layered = index % 2 == 1;
            let start = if layered {
                layered_labeling(g, k, &mut rng)
            } else {
                random_labeling(g.n(), k, &mut rng)
            };
            let (labeling, accepted) = climb(g, &balls, start, k, budget.steps, &sums, points.len(), &mut rng);
            let distribution = labeling_distribution(g, &labeling, k, r)?;
            for (key, &c) in &distribution.counts {
                *sums.entry(key.clone()).or_insert(0) += c as i64;
            }
            points.push(CloudPoint {
                distribution,
                labeling,
                origin: PointOrigin::Optimized {
                    index,
                    layered,
                    accepted,
                },
            });
        }
    }
    Ok(LabelingCloud::from_points(r, k, budget, seed, points))
}

/// max over `a` of the distance to the nearest point of `b`.
pub fn directed_hausdorff(a: &LabelingCloud, b: &LabelingCloud) -> Rational {
    a.points
        .par_iter()
        .map(|p| {
            b.points
                .iter()
                .map(|q| p.distribution.half_l1(&q.distribution))
                .min()
                .unwrap_or(Rational::from_integer(1))
        })
        .max()
        .unwrap_or(Rational::from_integer(0))
}

#[derive(Debug, Clone, Serialize)]
pub struct HausdorffReport {
    pub k: u64,
    pub r: u32,
    pub value: f64,
    pub value_exact: String,
    pub g_to_h: f64,
    pub h_to_g: f64,
    #[serde(skip)]
    pub exact: Rational,
}

/// Hausdorff distance of the two clouds under (1/2)L1; an estimate of d_k.
pub fn d_k(a: &LabelingCloud, b: &LabelingCloud) -> Result<HausdorffReport, LgError> {
    if (a.r, a.k) != (b.r, b.k) {
        return Err(LgError::ShapeMismatch((a.r, a.k), (b.r, b.k)));
    }
    let gh = directed_hausdorff(a, b);
    let hg = directed_hausdorff(b, a);
    let v = gh.max(hg);
    Ok(HausdorffReport {
        k: a.k,
        r: a.r,
        value: to_f64(v),
        value_exact: v.to_string(),
        g_to_h: to_f64(gh),
        h_to_g: to_f64(hg),
        exact: v,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalGlobalReport {
    pub k_max: u64,
    pub r: u32,
    pub budget: Budget,
    pub seed: u64,
    pub terms: Vec<HausdorffReport>,
    /// Σ 2^{-k} d_k over k ≤ k_max
    pub value: f64,
    pub value_exact: String,
    /// Σ_{k > k_max} 2^{-k} = 2^{-k_max}, each d_k being at most 1.
    pub truncation_bound: f64,
}

/// Both graphs use the same per-k seed streams.
pub fn d_lg(g: &Graph, h: &Graph, k_max: u64, r: u32, budget: Budget, seed: Seed) -> Result<LocalGlobalReport, LgError> {
    if k_max == 0 {
        return Err(LgError::ZeroK);
    }
    let mut terms = Vec::new();
    let mut total = Rational::from_integer(0);
    for k in 1..=k_max {
        let s = seed.derive(stream::LABELING).derive(k);
        let rep = d_k(&sample_cloud(g, k, r, budget, s)?, &sample_cloud(h, k, r, budget, s)?)?;
        total += rep.exact / Rational::from_integer(1i128 << k);
        terms.push(rep);
    }
    Ok(LocalGlobalReport {
        k_max,
        r,
        budget,
        seed: seed.0,
        terms,
        value: to_f64(total),
        value_exact: total.to_string(),
        truncation_bound: 0.5f64.powi(k_max as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cycle;

    const SMALL: Budget = Budget {
        random: 4,
        optimized: 4,
        steps: 400,
    };

    #[test]
    fn labels_are_checked() {
        let g = cycle(4).unwrap();
        assert_eq!(
            labeling_distribution(&g, &[1, 2, 3, 1], 2, 1),
            Err(LgError::LabelOutOfRange { vertex: 2, label: 3, k: 2 })
        );
        assert!(matches!(
            labeling_distribution(&g, &[1, 0, 1, 1], 2, 1),
            Err(LgError::LabelOutOfRange { vertex: 1, .. })
        ));
    }

    #[test]
    fn proper_coloring_of_even_cycle() {
        let g = cycle(100).unwrap();
        let c: Vec<u64> = (0..100).map(|i| i % 2 + 1).collect();
        let p = labeling_distribution(&g, &c, 2, 1).unwrap();
        assert_eq!(p.counts.len(), 2);
        assert!(p.counts.values().all(|&x| x == 50));
        assert_eq!(p.monochromatic_mass(), Rational::from_integer(0));
    }

    #[test]
    fn single_label_gives_single_point() {
        let g = cycle(12).unwrap();
        let cloud = sample_cloud(&g, 1, 2, SMALL, Seed(1)).unwrap();
        assert_eq!(cloud.len(), 1);
    }

    #[test]
    fn singleton_clouds_collapse_to_half_l1() {
        let g = cycle(10).unwrap();
        let one = |c: Vec<u64>| {
            let d = labeling_distribution(&g, &c, 2, 1).unwrap();
            LabelingCloud::from_points(
                1,
                2,
                SMALL,
                Seed(0),
                vec![CloudPoint {
                    distribution: d,
                    labeling: c,
                    origin: PointOrigin::Random { index: 0 },
                }],
            )
        };
        let a = one((0..10).map(|i| i % 2 + 1).collect());
        let b = one(vec![1; 10]);
        let rep = d_k(&a, &b).unwrap();
        assert_eq!(rep.exact, a.points[0].distribution.half_l1(&b.points[0].distribution));
        assert_eq!(rep.exact, Rational::from_integer(1));
    }

    #[test]
    fn self_distance_is_zero() {
        let g = cycle(30).unwrap();
        let rep = d_lg(&g, &g, 2, 1, SMALL, Seed(4)).unwrap();
        assert_eq!(rep.value_exact, "0");
        assert_eq!(rep.truncation_bound, 0.25);
    }

    #[test]
    fn cloud_replays() {
        let g = cycle(20).unwrap();
        assert_eq!(
            sample_cloud(&g, 3, 1, SMALL, Seed(8)).unwrap(),
            sample_cloud(&g, 3, 1, SMALL, Seed(8)).unwrap()
        );
    }
}
