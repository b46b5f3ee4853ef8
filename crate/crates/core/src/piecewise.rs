//! Two-piece linear structural equation fits and their goodness of fit.
//!
//! A fit of `child` on `parent` picks a cut point `tau` from a grid of parent
//! quantiles, fits one OLS line to the samples with `parent <= tau` and one
//! to the rest, and scores the result by the size-weighted mean of the two
//! squared segment correlations.

use alloc::vec::Vec;

use crate::stats::{is_degenerate, quantile_sorted};
use crate::{Error, Result};

/// Candidate cut points, given as probabilities of the parent's type-7
/// sample quantiles, plus the minimum number of samples per segment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantileGrid {
    probs: Vec<f64>,
    min_segment: Option<usize>,
}

impl Default for QuantileGrid {
    /// Probabilities 0.25, 0.30, ..., 0.75.
    fn default() -> Self {
        Self::evenly(11).expect("static grid")
    }
}

impl QuantileGrid {
    /// Grid from explicit probabilities, strictly increasing within (0, 1).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Config("quantile grid is empty"));
        }
        if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::Config("quantile probabilities must lie in (0, 1)"));
        }
        if probs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("quantile probabilities must be strictly increasing"));
        }
        Ok(Self { probs, min_segment: None })
    }

    /// `m` probabilities evenly spaced over [0.25, 0.75]; `m = 1` is the median.
    ///
    /// Cuts further out make the chosen cut, and with it the score, swing
    /// widely on linear data, which the normal approximation does not model.
    pub fn evenly(m: usize) -> Result<Self> {
        match m {
            0 => Err(Error::Config("quantile grid size must be positive")),
            1 => Self::new(alloc::vec![0.5]),
            _ => Self::new((0..m).map(|k| 0.25 + 0.5 * k as f64 / (m - 1) as f64).collect()),
        }
    }

    /// Overrides the default minimum segment size.
    pub fn with_min_segment(mut self, min_segment: usize) -> Self {
        self.min_segment = Some(min_segment.max(1));
        self
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Minimum points per segment for `n` samples: the override if set,
    /// otherwise `max(10, ceil(0.05 n))`.
    pub fn min_segment_for(&self, n: usize) -> usize {
        self.min_segment.unwrap_or_else(|| default_min_segment(n))
    }
}

pub fn default_min_segment(n: usize) -> usize {
    10usize.max(libm::ceil(0.05 * n as f64) as usize)
}

/// OLS line and correlation of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub intercept: f64,
    pub slope: f64,
    pub n: usize,
    /// Pearson correlation of parent and child inside the segment.
    pub r: f64,
    /// Parent range covered by the segment.
    pub parent_min: f64,
    pub parent_max: f64,
    /// Zero parent or child variance inside the segment (r and slope set to 0).
    pub degenerate: bool,
}

impl Segment {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// Range of the fitted line over the segment's parent values.
    pub fn value_range(&self) -> (f64, f64) {
        let (a, b) = (self.predict(self.parent_min), self.predict(self.parent_max));
        (a.min(b), a.max(b))
    }
}

struct SegmentStats {
    seg: Segment,
    rss: f64,
}

fn segment_stats(x: &[f64], y: &[f64]) -> SegmentStats {
    let n = x.len();
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxx += da * da;
        sxy += da * db;
        syy += db * db;
    }
    let x_flat = is_degenerate(x);
    let y_flat = is_degenerate(y);
    let slope = if x_flat { 0.0 } else { sxy / sxx };
    let r = if x_flat || y_flat { 0.0 } else { (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0) };
    let rss = if x_flat { syy } else { (syy - slope * sxy).max(0.0) };
    SegmentStats {
        seg: Segment {
            intercept: my - slope * mx,
            slope,
            n,
            r,
            parent_min: x[0],
            parent_max: x[n - 1],
            degenerate: x_flat || y_flat,
        },
        rss,
    }
}

/// Parent/child pairs sorted by parent value.
struct SortedPairs {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SortedPairs {
    fn new(parent: &[f64], child: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..parent.len()).collect();
        idx.sort_by(|&a, &b| parent[a].total_cmp(&parent[b]).then(a.cmp(&b)));
        Self {
            x: idx.iter().map(|&i| parent[i]).collect(),
            y: idx.iter().map(|&i| child[i]).collect(),
        }
    }

    /// Number of samples with parent <= t.
    fn split_at(&self, t: f64) -> usize {
        self.x.partition_point(|&v| v <= t)
    }
}

/// Chosen cut point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub tau: f64,
    /// Position of `tau` in the quantile grid.
    pub grid_index: usize,
    /// Total residual sum of squares of the two segment fits.
    pub rss: f64,
}

fn check_inputs(parent: &[f64], child: &[f64], grid: &QuantileGrid) -> Result<usize> {
    if parent.len() != child.len() {
        return Err(Error::Domain("parent and child differ in length"));
    }
    let n = parent.len();
    if n < 2 * grid.min_segment_for(n) {
        return Err(Error::InfeasibleFit("fewer samples than two minimum segments"));
    }
    Ok(n)
}

fn best_cut(pairs: &SortedPairs, grid: &QuantileGrid) -> Result<Cut> {
    let n = pairs.x.len();
    let min_seg = grid.min_segment_for(n);
    let my = pairs.y.iter().sum::<f64>() / n as f64;
    let total_ss: f64 = pairs.y.iter().map(|v| (v - my) * (v - my)).sum();
    // RSS differences below this are ties, resolved toward the lower index.
    let tie_tol = 1e-12 * total_ss;
    let mut best: Option<Cut> = None;
    for (k, &prob) in grid.probs().iter().enumerate() {
        let t = quantile_sorted(&pairs.x, prob);
        let n_low = pairs.split_at(t);
        if n_low < min_seg || n - n_low < min_seg {
            continue;
        }
        let rss = segment_stats(&pairs.x[..n_low], &pairs.y[..n_low]).rss
            + segment_stats(&pairs.x[n_low..], &pairs.y[n_low..]).rss;
        if best.is_none_or(|b| rss < b.rss - tie_tol) {
            best = Some(Cut { tau: t, grid_index: k, rss });
        }
    }
    best.ok_or(Error::InfeasibleFit("every grid cut leaves a segment below the minimum size"))
}

/// Grid cut point minimizing the total two-segment residual sum of squares.
/// Ties (within `1e-12` of the child's total sum of squares) go to the
/// earliest grid point.
pub fn find_cut(parent: &[f64], child: &[f64], grid: &QuantileGrid) -> Result<Cut> {
    check_inputs(parent, child, grid)?;
    best_cut(&SortedPairs::new(parent, child), grid)
}

/// A fitted two-piece linear model `child ≈ f(parent)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFit {
    pub tau: f64,
    pub low: Segment,
    pub high: Segment,
    /// `(n_l r_l² + n_h r_h²) / (n_l + n_h)`.
    pub rbar2: f64,
    /// `child - f(parent)` in input order.
    pub residuals: Vec<f64>,
    pub cut: Cut,
}

impl PiecewiseFit {
    pub fn predict(&self, x: f64) -> f64 {
        if x <= self.tau {
            self.low.predict(x)
        } else {
            self.high.predict(x)
        }
    }

    pub fn degenerate(&self) -> bool {
        self.low.degenerate || self.high.degenerate
    }

    pub fn n(&self) -> usize {
        self.low.n + self.high.n
    }
}

fn weighted_rbar2(low: &Segment, high: &Segment) -> f64 {
    let (nl, nh) = (low.n as f64, high.n as f64);
    ((nl * low.r * low.r + nh * high.r * high.r) / (nl + nh)).clamp(0.0, 1.0)
}

/// Fits the two-piece model of `child` on `parent`.
pub fn fit_direction(parent: &[f64], child: &[f64], grid: &QuantileGrid) -> Result<PiecewiseFit> {
    check_inputs(parent, child, grid)?;
    let pairs = SortedPairs::new(parent, child);
    let cut = best_cut(&pairs, grid)?;
    let n_low = pairs.split_at(cut.tau);
    let low = segment_stats(&pairs.x[..n_low], &pairs.y[..n_low]).seg;
    let high = segment_stats(&pairs.x[n_low..], &pairs.y[n_low..]).seg;
    let residuals = parent
        .iter()
        .zip(child)
        .map(|(&x, &y)| y - if x <= cut.tau { low.predict(x) } else { high.predict(x) })
        .collect();
    Ok(PiecewiseFit { tau: cut.tau, rbar2: weighted_rbar2(&low, &high), low, high, residuals, cut })
}

/// Goodness of fit only; skips residual assembly.
pub(crate) fn rbar2_only(parent: &[f64], child: &[f64], grid: &QuantileGrid) -> Result<f64> {
    check_inputs(parent, child, grid)?;
    let pairs = SortedPairs::new(parent, child);
    let cut = best_cut(&pairs, grid)?;
    let n_low = pairs.split_at(cut.tau);
    let low = segment_stats(&pairs.x[..n_low], &pairs.y[..n_low]).seg;
    let high = segment_stats(&pairs.x[n_low..], &pairs.y[n_low..]).seg;
    Ok(weighted_rbar2(&low, &high))
}

/// The comparison ratio `max(a / b, b / a)` of two goodness-of-fit scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eta {
    pub value: f64,
    /// A score was zero: `value` is `+inf` (or 1 when both are zero).
    pub degenerate: bool,
}

pub fn eta(rbar2_xy: f64, rbar2_yx: f64) -> Eta {
    match (rbar2_xy > 0.0, rbar2_yx > 0.0) {
        (true, true) => Eta { value: (rbar2_xy / rbar2_yx).max(rbar2_yx / rbar2_xy), degenerate: false },
        (false, false) => Eta { value: 1.0, degenerate: true },
        _ => Eta { value: f64::INFINITY, degenerate: true },
    }
}
