//! Rooted r-balls and their exact canonical keys.
//!
//! A [`CanonicalBallKey`] is the byte encoding of a ball relabeled into
//! canonical order, so two keys are equal exactly when the balls are
//! rooted-isomorphic (respecting vertex labels). Canonical order comes from
//! colour refinement seeded with (depth, label) followed by an
//! individualization search for the lexicographically least encoding, with
//! automorphism pruning. Tree-shaped balls take a layered AHU shortcut.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::Graph;

/// Largest radius accepted by the public extraction API.
pub const MAX_RADIUS: u32 = 8;
/// Largest ball (vertex count) accepted by the public extraction API.
pub const MAX_BALL_SIZE: usize = 5000;
/// Bumped whenever the key encoding or the canonical order changes.
pub const KEY_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallError {
    #[error("radius {0} exceeds the limit {MAX_RADIUS}")]
    RadiusTooLarge(u32),
    #[error("ball around vertex {vertex} has more than {MAX_BALL_SIZE} vertices")]
    BallTooLarge { vertex: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("labeling has {got} entries, graph has {want} vertices")]
    LabelLengthMismatch { got: usize, want: usize },
    #[error("cannot truncate {have}-bit labels to {want} bits")]
    BadTruncation { have: u32, want: u32 },
    #[error("malformed key: {0}")]
    MalformedKey(String),
}

/// How vertex labels are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelKind {
    /// Integer labels, e.g. a k-labeling with values in 1..=k.
    Plain,
    /// Bit strings of the given length, stored most significant digit first
    /// so that numeric order is lexicographic order.
    Bits(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexLabels {
    kind: LabelKind,
    values: Vec<u64>,
}

impl VertexLabels {
    pub fn plain(values: Vec<u64>) -> Self {
        VertexLabels {
            kind: LabelKind::Plain,
            values,
        }
    }

    /// `values[v]` holds an `s`-bit string; higher bits are masked off.
    pub fn bits(s: u32, mut values: Vec<u64>) -> Self {
        assert!((1..=64).contains(&s));
        if s < 64 {
            for v in &mut values {
                *v &= (1u64 << s) - 1;
            }
        }
        VertexLabels {
            kind: LabelKind::Bits(s),
            values,
        }
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Rooted ball with local ids `0..m`, root `0`, in BFS order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedBall {
    radius: u32,
    adj: Vec<Vec<usize>>,
    depth: Vec<u32>,
    origin: Vec<usize>,
    labels: Option<(LabelKind, Vec<u64>)>,
}

impl RootedBall {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Host-graph id of local vertex `v` (identity for decoded balls).
    pub fn origin(&self, v: usize) -> usize {
        self.origin[v]
    }

    pub fn label(&self, v: usize) -> Option<u64> {
        self.labels.as_ref().map(|(_, l)| l[v])
    }

    pub fn label_kind(&self) -> Option<LabelKind> {
        self.labels.as_ref().map(|(k, _)| *k)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// True when two vertices carry the same label.
    pub fn has_label_collision(&self) -> bool {
        match &self.labels {
            None => false,
            Some((_, l)) => {
                let mut v = l.clone();
                v.sort_unstable();
                v.windows(2).any(|w| w[0] == w[1])
            }
        }
    }

    /// Same ball with labels dropped.
    pub fn unlabeled(&self) -> RootedBall {
        RootedBall {
            labels: None,
            ..self.clone()
        }
    }

    /// Restriction to depth `<= r`, preserving local order.
    pub fn truncate(&self, r: u32) -> RootedBall {
        let keep: Vec<usize> = (0..self.len()).filter(|&v| self.depth[v] <= r).collect();
        let mut local = vec![usize::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let adj = keep
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter(|&&w| local[w] != usize::MAX)
                    .map(|&w| local[w])
                    .collect()
            })
            .collect();
        RootedBall {
            radius: r.min(self.radius),
            adj,
            depth: keep.iter().map(|&v| self.depth[v]).collect(),
            origin: keep.iter().map(|&v| self.origin[v]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|(k, l)| (*k, keep.iter().map(|&v| l[v]).collect())),
        }
    }

    /// Same shape with labels read from `host[origin(v)]`.
    pub fn with_host_labels(&self, kind: LabelKind, host: &[u64]) -> RootedBall {
        RootedBall {
            labels: Some((kind, self.origin.iter().map(|&u| host[u]).collect())),
            ..self.clone()
        }
    }

    /// The ball as a plain graph on its local ids.
    pub fn to_graph(&self, degree_bound: usize) -> Graph {
        let edges = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| u < v).map(move |&v| (u, v)));
        Graph::from_edges(self.len(), degree_bound.max(1), edges.collect::<Vec<_>>())
            .expect("ball degree within bound")
    }

    /// Applies a permutation of the non-root local ids (`perm[0]` must be 0).
    pub fn relabeled(&self, perm: &[usize]) -> RootedBall {
        assert_eq!(perm[0], 0, "root must stay fixed");
        let m = self.len();
        let mut adj = vec![Vec::new(); m];
        let mut depth = vec![0; m];
        let mut origin = vec![0; m];
        for v in 0..m {
            let mut l: Vec<usize> = self.adj[v].iter().map(|&w| perm[w]).collect();
            l.sort_unstable();
            adj[perm[v]] = l;
            depth[perm[v]] = self.depth[v];
            origin[perm[v]] = self.origin[v];
        }
        let labels = self.labels.as_ref().map(|(k, l)| {
            let mut out = vec![0; m];
            for v in 0..m {
                out[perm[v]] = l[v];
            }
            (*k, out)
        });
        RootedBall {
            radius: self.radius,
            adj,
            depth,
            origin,
            labels,
        }
    }
}

fn check_labels(g: &Graph, labels: Option<&VertexLabels>) -> Result<(), BallError> {
    match labels {
        Some(l) if l.len() != g.n() => Err(BallError::LabelLengthMismatch {
            got: l.len(),
            want: g.n(),
        }),
        _ => Ok(()),
    }
}

/// Induced subgraph on `{u : dist(v, u) <= r}` rooted at `v`, within the
/// radius and size guardrails.
pub fn extract_ball(
    g: &Graph,
    v: usize,
    r: u32,
    labels: Option<&VertexLabels>,
) -> Result<RootedBall, BallError> {
    if r > MAX_RADIUS {
        return Err(BallError::RadiusTooLarge(r));
    }
    if v >= g.n() {
        return Err(BallError::VertexOutOfRange(v));
    }
    check_labels(g, labels)?;
    bfs_ball(g, v, r, labels, Some(MAX_BALL_SIZE)).ok_or(BallError::BallTooLarge { vertex: v })
}

/// Extraction without guardrails, for callers that bound size themselves
/// (bounded components, gadget decoding).
pub(crate) fn extract_ball_unchecked(
    g: &Graph,
    v: usize,
    r: u32,
    labels: Option<&VertexLabels>,
) -> RootedBall {
    bfs_ball(g, v, r, labels, None).expect("no size limit")
}

fn bfs_ball(
    g: &Graph,
    root: usize,
    r: u32,
    labels: Option<&VertexLabels>,
    limit: Option<usize>,
) -> Option<RootedBall> {
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut origin = vec![root];
    let mut depth = vec![0u32];
    local.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = depth[local[&u]];
        if du == r {
            continue;
        }
        for &w in g.neighbors(u) {
            if !local.contains_key(&w) {
                local.insert(w, origin.len());
                origin.push(w);
                depth.push(du + 1);
                if limit.is_some_and(|l| origin.len() > l) {
                    return None;
                }
                queue.push_back(w);
            }
        }
    }
    let adj = origin
        .iter()
        .map(|&u| {
            let mut l: Vec<usize> = g
                .neighbors(u)
                .iter()
                .filter_map(|w| local.get(w).copied())
                .collect();
            l.sort_unstable();
            l
        })
        .collect();
    let labels = labels.map(|l| (l.kind, origin.iter().map(|&u| l.values[u]).collect()));
    Some(RootedBall {
        radius: r,
        adj,
        depth,
        origin,
        labels,
    })
}

/// Ball with at most `limit` vertices, `None` when the limit is exceeded.
pub(crate) fn extract_ball_limited(g: &Graph, v: usize, r: u32, limit: usize) -> Option<RootedBall> {
    bfs_ball(g, v, r, None, Some(limit))
}

/// Whole connected component of `v`, rooted at `v`, radius = eccentricity.
pub(crate) fn component_ball(g: &Graph, v: usize) -> RootedBall {
    let mut b = extract_ball_unchecked(g, v, u32::MAX, None);
    b.radius = b.max_depth();
    b
}

/// Canonical byte encoding of a rooted (labeled) ball.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalBallKey(Box<[u8]>);

impl CanonicalBallKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, BallError> {
        let bytes = hex::decode(s).map_err(|e| BallError::MalformedKey(e.to_string()))?;
        let key = CanonicalBallKey(bytes.into_boxed_slice());
        key.decode()?;
        Ok(key)
    }

    pub fn radius(&self) -> u32 {
        let mut rd = Reader::new(&self.0[1..]);
        rd.varint().unwrap_or(0) as u32
    }

    /// Rebuilds the canonically ordered ball (root 0; origins are local ids).
    pub fn decode(&self) -> Result<RootedBall, BallError> {
        let bad = |m: &str| BallError::MalformedKey(m.to_string());
        let (&version, rest) = self.0.split_first().ok_or_else(|| bad("empty"))?;
        if version != KEY_VERSION {
            return Err(bad("unknown key version"));
        }
        let mut rd = Reader::new(rest);
        let radius = rd.varint().ok_or_else(|| bad("radius"))? as u32;
        let kind = match rd.byte().ok_or_else(|| bad("label tag"))? {
            0 => None,
            1 => Some(LabelKind::Plain),
            2 => Some(LabelKind::Bits(rd.byte().ok_or_else(|| bad("bits"))? as u32)),
            _ => return Err(bad("label tag")),
        };
        let m = rd.varint().ok_or_else(|| bad("size"))? as usize;
        let labels = match kind {
            None => None,
            Some(k) => {
                let mut l = Vec::with_capacity(m);
                for _ in 0..m {
                    l.push(rd.varint().ok_or_else(|| bad("label"))?);
                }
                Some((k, l))
            }
        };
        let mut adj = vec![Vec::new(); m];
        for i in 0..m {
            let cnt = rd.varint().ok_or_else(|| bad("degree"))? as usize;
            for _ in 0..cnt {
                let j = rd.varint().ok_or_else(|| bad("neighbor"))? as usize;
                if j <= i || j >= m {
                    return Err(bad("neighbor order"));
                }
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        if !rd.is_done() {
            return Err(bad("trailing bytes"));
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        let mut depth = vec![u32::MAX; m];
        if m > 0 {
            depth[0] = 0;
            let mut q = VecDeque::from([0]);
            while let Some(u) = q.pop_front() {
                for &w in &adj[u] {
                    if depth[w] == u32::MAX {
                        depth[w] = depth[u] + 1;
                        q.push_back(w);
                    }
                }
            }
        }
        if depth.iter().any(|&d| d == u32::MAX || d > radius) {
            return Err(bad("ball not connected within radius"));
        }
        Ok(RootedBall {
            radius,
            adj,
            depth,
            origin: (0..m).collect(),
            labels,
        })
    }
}

impl fmt::Debug for CanonicalBallKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key({})", self.to_hex())
    }
}

impl fmt::Display for CanonicalBallKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalBallKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CanonicalBallKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CanonicalBallKey::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn byte(&mut self) -> Option<u8> {
        let b = *self.buf.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    fn varint(&mut self) -> Option<u64> {
        let mut out = 0u64;
        for shift in (0..70).step_by(7) {
            let b = self.byte()?;
            if shift == 63 && b > 1 {
                return None;
            }
            out |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Some(out);
            }
        }
        None
    }

    fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Result of canonicalization: the key plus the canonical vertex order
/// (`order[position] = local vertex`).
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub key: CanonicalBallKey,
    pub order: Vec<usize>,
}

/// Canonical key; `truncate_bits` keeps the first digits of bit-string labels.
pub fn canonical_key(ball: &RootedBall, truncate_bits: Option<u32>) -> Result<CanonicalBallKey, BallError> {
    canonical_form(ball, truncate_bits).map(|f| f.key)
}

pub fn canonical_form(ball: &RootedBall, truncate_bits: Option<u32>) -> Result<CanonicalForm, BallError> {
    let labels = effective_labels(ball, truncate_bits)?;
    let ctx = Ctx {
        ball,
        kind: labels.as_ref().map(|(k, _)| *k),
        labels: labels.as_ref().map(|(_, l)| l.as_slice()),
    };
    let order = if ball.len() > 0 && ball.edge_count() + 1 == ball.len() {
        ctx.tree_order()
    } else {
        ctx.search_order()
    };
    Ok(CanonicalForm {
        key: CanonicalBallKey(ctx.encode(&order).into_boxed_slice()),
        order,
    })
}

fn effective_labels(
    ball: &RootedBall,
    truncate_bits: Option<u32>,
) -> Result<Option<(LabelKind, Vec<u64>)>, BallError> {
    match (&ball.labels, truncate_bits) {
        (None, _) => Ok(None),
        (Some((k, l)), None) => Ok(Some((*k, l.clone()))),
        (Some((LabelKind::Bits(s), l)), Some(t)) => {
            if t == 0 || t > *s {
                return Err(BallError::BadTruncation { have: *s, want: t });
            }
            Ok(Some((LabelKind::Bits(t), l.iter().map(|&x| x >> (s - t)).collect())))
        }
        (Some((LabelKind::Plain, _)), Some(t)) => Err(BallError::BadTruncation { have: 0, want: t }),
    }
}

struct Ctx<'a> {
    ball: &'a RootedBall,
    kind: Option<LabelKind>,
    labels: Option<&'a [u64]>,
}

impl Ctx<'_> {
    fn label(&self, v: usize) -> u64 {
        self.labels.map_or(0, |l| l[v])
    }

    fn encode(&self, order: &[usize]) -> Vec<u8> {
        let m = order.len();
        let mut pos = vec![0usize; m];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut out = Vec::with_capacity(8 + 3 * m);
        out.push(KEY_VERSION);
        put_varint(&mut out, u64::from(self.ball.radius));
        match self.kind {
            None => out.push(0),
            Some(LabelKind::Plain) => out.push(1),
            Some(LabelKind::Bits(s)) => {
                out.push(2);
                out.push(s as u8);
            }
        }
        put_varint(&mut out, m as u64);
        if self.labels.is_some() {
            for &v in order {
                put_varint(&mut out, self.label(v));
            }
        }
        let mut nb = Vec::new();
        for (i, &v) in order.iter().enumerate() {
            nb.clear();
            nb.extend(self.ball.adj[v].iter().map(|&w| pos[w]).filter(|&j| j > i));
            nb.sort_unstable();
            put_varint(&mut out, nb.len() as u64);
            for &j in &nb {
                put_varint(&mut out, j as u64);
            }
        }
        out
    }

    /// Layered AHU order for trees rooted at 0: classes are ranked bottom-up
    /// per depth, then a preorder visits children in class order.
    fn tree_order(&self) -> Vec<usize> {
        let b = self.ball;
        let m = b.len();
        let maxd = b.max_depth() as usize;
        let mut layers = vec![Vec::new(); maxd + 1];
        for v in 0..m {
            layers[b.depth[v] as usize].push(v);
        }
        let children = |v: usize| b.adj[v].iter().copied().filter(move |&w| b.depth[w] > b.depth[v]);
        let mut class = vec![0usize; m];
        for layer in layers.iter().rev() {
            let mut sigs: Vec<(u64, Vec<usize>, usize)> = layer
                .iter()
                .map(|&v| {
                    let mut c: Vec<usize> = children(v).map(|w| class[w]).collect();
                    c.sort_unstable();
                    (self.label(v), c, v)
                })
                .collect();
            sigs.sort_unstable();
            let mut rank = 0;
            for i in 0..sigs.len() {
                if i > 0 && (sigs[i].0, &sigs[i].1) != (sigs[i - 1].0, &sigs[i - 1].1) {
                    rank += 1;
                }
                class[sigs[i].2] = rank;
            }
        }
        // Breadth-first over canonical child order keeps positions depth-sorted.
        let mut order = Vec::with_capacity(m);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut c: Vec<usize> = children(v).collect();
            c.sort_by_key(|&w| class[w]);
            queue.extend(c);
        }
        order
    }

    fn initial_colors(&self) -> Vec<u32> {
        let b = self.ball;
        let keys: Vec<(u32, u64)> = (0..b.len()).map(|v| (b.depth[v], self.label(v))).collect();
        rank_by(&keys)
    }

    fn search_order(&self) -> Vec<usize> {
        let mut colors = self.initial_colors();
        refine(&self.ball.adj, &mut colors);
        let mut st = SearchState {
            ctx: self,
            best: None,
            autos: Vec::new(),
        };
        st.search(colors, &mut Vec::new());
        st.best.expect("search reaches a leaf").1
    }
}

fn rank_by<T: Ord>(keys: &[T]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut out = vec![0u32; keys.len()];
    let mut rank = 0u32;
    for i in 0..idx.len() {
        if i > 0 && keys[idx[i]] != keys[idx[i - 1]] {
            rank += 1;
        }
        out[idx[i]] = rank;
    }
    out
}

fn distinct(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |c| c as usize + 1)
}

/// Colour refinement to the coarsest equitable partition refining `colors`.
/// New colours are ranks of (old colour, sorted neighbour colours), so the
/// cell order is isomorphism-invariant.
fn refine(adj: &[Vec<usize>], colors: &mut Vec<u32>) {
    let mut count = distinct(colors);
    loop {
        let sigs: Vec<(u32, Vec<u32>)> = (0..adj.len())
            .map(|v| {
                let mut nc: Vec<u32> = adj[v].iter().map(|&w| colors[w]).collect();
                nc.sort_unstable();
                (colors[v], nc)
            })
            .collect();
        let next = rank_by(&sigs);
        let c = distinct(&next);
        *colors = next;
        if c == count {
            return;
        }
        count = c;
    }
}

struct SearchState<'a, 'b> {
    ctx: &'a Ctx<'b>,
    best: Option<(Vec<u8>, Vec<usize>)>,
    autos: Vec<Vec<usize>>,
}

impl SearchState<'_, '_> {
    fn search(&mut self, colors: Vec<u32>, prefix: &mut Vec<usize>) {
        let m = colors.len();
        if distinct(&colors) == m {
            let mut order = vec![0usize; m];
            for (v, &c) in colors.iter().enumerate() {
                order[c as usize] = v;
            }
            let enc = self.ctx.encode(&order);
            match &self.best {
                Some((b, _)) if enc > *b => {}
                Some((b, border)) if enc == *b => {
                    let mut gamma = vec![0usize; m];
                    for i in 0..m {
                        gamma[border[i]] = order[i];
                    }
                    if gamma.iter().enumerate().any(|(i, &g)| i != g) {
                        self.autos.push(gamma);
                    }
                }
                _ => self.best = Some((enc, order)),
            }
            return;
        }
        // Target cell: the first non-singleton cell in colour order.
        let mut size = vec![0usize; m];
        for &c in &colors {
            size[c as usize] += 1;
        }
        let target = (0..m).find(|&c| size[c] > 1).expect("non-discrete partition") as u32;
        let cell: Vec<usize> = (0..m).filter(|&v| colors[v] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &w in &cell {
            if !explored.is_empty() && self.same_orbit(prefix, &explored, w, m) {
                continue;
            }
            let mut next: Vec<u32> = colors
                .iter()
                .enumerate()
                .map(|(v, &c)| 2 * c + u32::from(v != w))
                .collect();
            next = rank_by(&next);
            refine(&self.ctx.ball.adj, &mut next);
            prefix.push(w);
            self.search(next, prefix);
            prefix.pop();
            explored.push(w);
        }
    }

    /// Whether `w` shares an orbit with an explored vertex under the known
    /// automorphisms that fix `prefix` pointwise.
    fn same_orbit(&self, prefix: &[usize], explored: &[usize], w: usize, m: usize) -> bool {
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut any = false;
        for g in &self.autos {
            if prefix.iter().all(|&p| g[p] == p) {
                any = true;
                for (x, &y) in g.iter().enumerate() {
                    let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        if !any {
            return false;
        }
        let rw = find(&mut parent, w);
        explored.iter().any(|&e| find(&mut parent, e) == rw)
    }
}

/// Canonical key of every vertex's r-ball, in vertex order.
pub fn ball_keys(
    g: &Graph,
    r: u32,
    labels: Option<&VertexLabels>,
) -> Result<Vec<CanonicalBallKey>, BallError> {
    if r > MAX_RADIUS {
        return Err(BallError::RadiusTooLarge(r));
    }
    check_labels(g, labels)?;
    (0..g.n())
        .into_par_iter()
        .map(|v| {
            let b = bfs_ball(g, v, r, labels, Some(MAX_BALL_SIZE)).ok_or(BallError::BallTooLarge { vertex: v })?;
            canonical_key(&b, None)
        })
        .collect()
}

/// Exact counts |T(G, α)| for every realized ball type α; counts sum to n.
pub fn ball_census(
    g: &Graph,
    r: u32,
    labels: Option<&VertexLabels>,
) -> Result<BTreeMap<CanonicalBallKey, u64>, BallError> {
    Ok(count_keys(ball_keys(g, r, labels)?))
}

pub(crate) fn count_keys(keys: Vec<CanonicalBallKey>) -> BTreeMap<CanonicalBallKey, u64> {
    let mut out = BTreeMap::new();
    for k in keys {
        *out.entry(k).or_insert(0) += 1;
    }
    out
}
