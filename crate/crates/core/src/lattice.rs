//! Real-valued sphere decoding over upper-triangular systems.
//!
//! Layers are numbered `0..L` from the top row of `R`; the search fixes layer
//! `L-1` first and layer `0` last. With `round_last` the final layer is not
//! enumerated: given the upper layers its cost `R₀₀²(c₀ − x₀)²` is a 1-D
//! quadratic, so the nearest level is optimal.

use crate::error::{Error, Result};

/// Metrics closer than this are treated as equal and resolved by the
/// lexicographically smaller index vector. Shared by the decoder and every
/// exhaustive reference so that both make identical decisions.
pub const METRIC_TIE_TOL: f64 = 1e-9;

/// `‖y − R x‖²` minimisation instance with a finite level set per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeProblem {
    r: Vec<Vec<f64>>,
    y: Vec<f64>,
    levels: Vec<Vec<f64>>,
}

impl LatticeProblem {
    /// Validates shape, triangularity, a positive diagonal and level lists
    /// (each sorted, at least two entries).
    pub fn new(r: Vec<Vec<f64>>, y: Vec<f64>, levels: Vec<Vec<f64>>) -> Result<Self> {
        let l = y.len();
        if l == 0 {
            return Err(Error::Config("lattice problem needs at least one layer".into()));
        }
        if r.len() != l || r.iter().any(|row| row.len() != l) || levels.len() != l {
            return Err(Error::Dimension(format!("lattice problem of {l} layers has mismatched R or levels")));
        }
        for (k, lv) in levels.iter().enumerate() {
            if lv.is_empty() {
                return Err(Error::Config(format!("layer {k} has no levels")));
            }
            if lv.len() < 2 {
                return Err(Error::Config(format!("layer {k} needs at least two levels")));
            }
            if lv.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config(format!("levels of layer {k} are not strictly increasing")));
            }
        }
        for k in 0..l {
            if !(r[k][k] > 0.0) {
                return Err(Error::Config(format!("R[{k}][{k}] = {} is not positive", r[k][k])));
            }
            if r[k][..k].iter().any(|&v| v != 0.0) {
                return Err(Error::Config(format!("R row {k} has entries below the diagonal")));
            }
        }
        if r.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lattice problem"));
        }
        Ok(Self { r, y, levels })
    }

    pub fn layers(&self) -> usize {
        self.y.len()
    }

    pub fn r(&self) -> &[Vec<f64>] {
        &self.r
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Level values for a vector of level indices.
    pub fn point(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().enumerate().map(|(k, &i)| self.levels[k][i]).collect()
    }

    /// `‖y − R x‖²` for `x` given by level indices.
    pub fn metric(&self, indices: &[usize]) -> f64 {
        let x = self.point(indices);
        (0..self.layers())
            .map(|k| {
                let rx: f64 = (k..self.layers()).map(|j| self.r[k][j] * x[j]).sum();
                (self.y[k] - rx).powi(2)
            })
            .sum()
    }

    /// Unconstrained target for layer `k` given the already fixed layers above it.
    fn center(&self, k: usize, indices: &[usize]) -> f64 {
        let interference: f64 = (k + 1..self.layers())
            .map(|j| self.r[k][j] * self.levels[j][indices[j]])
            .sum();
        (self.y[k] - interference) / self.r[k][k]
    }

    /// Successive rounding from the bottom row up (the Babai point).
    pub fn babai(&self) -> Vec<usize> {
        let l = self.layers();
        let mut idx = vec![0; l];
        for k in (0..l).rev() {
            idx[k] = round_to_levels(self.center(k, &idx), &self.levels[k]);
        }
        idx
    }
}

/// Search instrumentation.
///
/// `nodes_visited` counts the nodes examined on the deepest enumerated layer,
/// i.e. the candidate branches that are each completed into at most one full
/// point. It is bounded by the product of the level counts of the enumerated
/// layers. `tree_nodes` counts nodes on every enumerated layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_visited: u64,
    pub tree_nodes: u64,
    pub leaves_evaluated: u64,
    pub radius_updates: u64,
}

impl SearchStats {
    pub fn accumulate(&mut self, other: &SearchStats) {
        self.nodes_visited += other.nodes_visited;
        self.tree_nodes += other.tree_nodes;
        self.leaves_evaluated += other.leaves_evaluated;
        self.radius_updates += other.radius_updates;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdSolution {
    /// Level index per layer.
    pub indices: Vec<usize>,
    pub point: Vec<f64>,
    pub metric: f64,
    pub stats: SearchStats,
    /// Radius after each update, in order. Never increases.
    pub radius_trace: Vec<f64>,
    /// Index vector of the first complete candidate reached.
    pub first_leaf: Vec<usize>,
}

/// `true` if `(metric, key)` should replace the current best.
pub fn prefer<K: Ord + ?Sized>(metric: f64, key: &K, best_metric: f64, best_key: &K) -> bool {
    if metric < best_metric - METRIC_TIE_TOL {
        true
    } else if metric <= best_metric + METRIC_TIE_TOL {
        key < best_key
    } else {
        false
    }
}

/// Index of the level nearest to `v`; exact midpoints go to the smaller level.
pub fn round_to_levels(v: f64, levels: &[f64]) -> usize {
    debug_assert!(!levels.is_empty());
    // First level strictly greater than v.
    let above = levels.partition_point(|&l| l <= v);
    if above == 0 {
        return 0;
    }
    if above == levels.len() {
        return levels.len() - 1;
    }
    let below = above - 1;
    if v - levels[below] <= levels[above] - v {
        below
    } else {
        above
    }
}

/// Level indices in non-decreasing distance from `center` (Schnorr–Euchner order).
struct ZigZag<'a> {
    levels: &'a [f64],
    center: f64,
    lo: Option<usize>,
    hi: usize,
}

impl<'a> ZigZag<'a> {
    fn new(levels: &'a [f64], center: f64) -> Self {
        let start = round_to_levels(center, levels);
        Self {
            levels,
            center,
            lo: Some(start),
            hi: start + 1,
        }
    }
}

impl Iterator for ZigZag<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let pick_lo = match (self.lo, self.hi < self.levels.len()) {
            (None, false) => return None,
            (Some(_), false) => true,
            (None, true) => false,
            (Some(lo), true) => {
                self.center - self.levels[lo] <= self.levels[self.hi] - self.center
            }
        };
        if pick_lo {
            let lo = self.lo.unwrap();
            self.lo = lo.checked_sub(1);
            Some(lo)
        } else {
            self.hi += 1;
            Some(self.hi - 1)
        }
    }
}

struct Search<'a> {
    p: &'a LatticeProblem,
    round_last: bool,
    deepest: usize,
    current: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    radius: f64,
    first_leaf: Option<Vec<usize>>,
    radius_trace: Vec<f64>,
    stats: SearchStats,
}

impl Search<'_> {
    fn offer(&mut self, metric: f64) {
        self.stats.leaves_evaluated += 1;
        if self.first_leaf.is_none() {
            self.first_leaf = Some(self.current.clone());
        }
        let take = match &self.best {
            None => true,
            Some((m, key)) => prefer(metric, &self.current[..], *m, &key[..]),
        };
        if take {
            if metric < self.radius {
                self.radius = metric;
                self.stats.radius_updates += 1;
                self.radius_trace.push(metric);
            }
            self.best = Some((metric, self.current.clone()));
        }
    }

    fn descend(&mut self, k: usize, partial: f64) {
        let p = self.p;
        let center = p.center(k, &self.current);
        let rkk = p.r[k][k];
        let levels = &p.levels[k];

        if k == 0 && self.round_last {
            let idx = round_to_levels(center, levels);
            self.current[0] = idx;
            if p.layers() == 1 {
                self.stats.nodes_visited += 1;
            }
            let d = partial + (rkk * (center - levels[idx])).powi(2);
            if d <= self.radius + METRIC_TIE_TOL {
                self.offer(d);
            }
            return;
        }

        for idx in ZigZag::new(levels, center) {
            let d = partial + (rkk * (center - levels[idx])).powi(2);
            self.stats.tree_nodes += 1;
            if k == self.deepest {
                self.stats.nodes_visited += 1;
            }
            if d > self.radius + METRIC_TIE_TOL {
                break;
            }
            self.current[k] = idx;
            if k == 0 {
                self.offer(d);
            } else {
                self.descend(k - 1, d);
            }
        }
    }
}

/// Exact minimiser of `‖y − R x‖²` over the level grid.
///
/// Enumeration runs depth first in Schnorr–Euchner order with an initially
/// infinite radius, so the first complete candidate is the Babai point.
pub fn real_sd(p: &LatticeProblem, round_last: bool) -> SdSolution {
    let l = p.layers();
    let deepest = if round_last && l > 1 { 1 } else { 0 };
    let mut search = Search {
        p,
        round_last,
        deepest,
        current: vec![0; l],
        best: None,
        radius: f64::INFINITY,
        first_leaf: None,
        radius_trace: Vec::new(),
        stats: SearchStats::default(),
    };
    search.descend(l - 1, 0.0);
    let (_, indices) = search.best.expect("the first leaf is always accepted");
    SdSolution {
        point: p.point(&indices),
        metric: p.metric(&indices),
        indices,
        stats: search.stats,
        radius_trace: search.radius_trace,
        first_leaf: search.first_leaf.expect("at least one leaf"),
    }
}

/// Result of a brute-force search.
#[derive(Debug, Clone, PartialEq)]
pub struct MlChoice<T> {
    pub index: usize,
    pub candidate: T,
    pub metric: f64,
}

/// Global minimiser over an enumerated candidate set. Ties (within
/// [`METRIC_TIE_TOL`]) go to the lower candidate index.
pub fn exhaustive_ml<T>(
    candidates: impl IntoIterator<Item = T>,
    mut metric: impl FnMut(&T) -> f64,
) -> Result<MlChoice<T>> {
    let mut best: Option<MlChoice<T>> = None;
    for (index, candidate) in candidates.into_iter().enumerate() {
        let m = metric(&candidate);
        let take = match &best {
            None => true,
            Some(b) => prefer(m, &index, b.metric, &b.index),
        };
        if take {
            best = Some(MlChoice { index, candidate, metric: m });
        }
    }
    best.ok_or(Error::EmptyCandidates)
}

/// Brute-force solution of a lattice problem, candidates in lexicographic
/// order of their level-index vectors.
pub fn exhaustive_lattice(p: &LatticeProblem) -> MlChoice<Vec<usize>> {
    let sizes: Vec<usize> = p.levels.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let candidates = (0..total).map(|mut n| {
        let mut idx = vec![0; sizes.len()];
        for k in (0..sizes.len()).rev() {
            idx[k] = n % sizes[k];
            n /= sizes[k];
        }
        idx
    });
    exhaustive_ml(candidates, |idx| p.metric(idx)).expect("level lists are non-empty")
}
