//! Significance of the preferred direction.
//!
//! Under the null hypothesis the relation is invertible. Null data are made
//! by shifting one segment of the preferred fit vertically until the two
//! fitted line segments no longer overlap in value; the distribution of the
//! comparison ratio on such data is then approximated either by resampling
//! or by sampling Fisher-transformed segment correlations.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::piecewise::{eta, fit_direction, rbar2_only, PiecewiseFit, QuantileGrid, Segment};
use crate::stats::{fisher_z, quantile_sorted, sorted, RngStream};
use crate::{Error, Result};

/// Which way the preferred model points for an input pair `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Orientation {
    /// `x -> y`
    Forward,
    /// `y -> x`
    Backward,
}

/// How the null distribution of the comparison ratio is approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    Bootstrap,
    Normal,
}

/// Settings of the direction test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub method: Method,
    /// Bootstrap replicates `B`.
    pub bootstrap_reps: usize,
    /// Normal-approximation draws `K`.
    pub normal_draws: usize,
    pub grid: QuantileGrid,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { method: Method::Normal, bootstrap_reps: 500, normal_draws: 100_000, grid: QuantileGrid::default() }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bootstrap_reps < 100 && self.method == Method::Bootstrap {
            return Err(Error::Config("bootstrap needs at least 100 replicates"));
        }
        if self.normal_draws == 0 {
            return Err(Error::Config("normal approximation needs at least one draw"));
        }
        Ok(())
    }
}

/// Segment that was moved to build the null data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ShiftedSegment {
    None,
    Low,
    High,
}

/// Data modified so that the preferred fit becomes invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct NullData {
    pub parent: Vec<f64>,
    pub child: Vec<f64>,
    /// Vertical offset added to the moved segment's child values.
    pub shift: f64,
    pub shifted: ShiftedSegment,
}

/// Fraction of the child's interquartile range added to the minimal shift.
const SHIFT_MARGIN: f64 = 0.01;

fn interquartile_range(x: &[f64]) -> f64 {
    let s = sorted(x);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

/// Minimal signed offset that separates `moving` from `fixed`, without margin.
/// Zero when the ranges are already disjoint.
fn separating_offset(moving: (f64, f64), fixed: (f64, f64)) -> f64 {
    if moving.1 < fixed.0 || fixed.1 < moving.0 {
        return 0.0;
    }
    let up = fixed.1 - moving.0;
    let down = moving.1 - fixed.0;
    if up <= down {
        up
    } else {
        -down
    }
}

/// Builds null data from the preferred fit of `child` on `parent`.
///
/// The segment with fewer points (the high one on a tie) is translated by the
/// smallest offset that makes the two fitted segments' value ranges
/// disjoint, plus 1% of the child's interquartile range. Parent values are
/// never changed.
pub fn make_null(parent: &[f64], child: &[f64], fit: &PiecewiseFit) -> Result<NullData> {
    if parent.len() != child.len() || parent.len() != fit.n() {
        return Err(Error::Domain("null data inputs do not match the fit"));
    }
    let move_low = fit.low.n < fit.high.n;
    let (moving, fixed): (&Segment, &Segment) = if move_low { (&fit.low, &fit.high) } else { (&fit.high, &fit.low) };
    let offset = separating_offset(moving.value_range(), fixed.value_range());
    if offset == 0.0 {
        return Ok(NullData { parent: parent.to_vec(), child: child.to_vec(), shift: 0.0, shifted: ShiftedSegment::None });
    }
    let mut margin = SHIFT_MARGIN * interquartile_range(child);
    if !(margin > 0.0) {
        margin = f64::EPSILON * (1.0 + libm::fabs(offset));
    }
    let shift = offset + libm::copysign(margin, offset);
    let in_moving = |x: f64| (x <= fit.tau) == move_low;
    let child0 = parent.iter().zip(child).map(|(&x, &y)| if in_moving(x) { y + shift } else { y }).collect();
    Ok(NullData {
        parent: parent.to_vec(),
        child: child0,
        shift,
        shifted: if move_low { ShiftedSegment::Low } else { ShiftedSegment::High },
    })
}

/// Resampling attempts per bootstrap replicate before it counts as `+inf`.
const MAX_REDRAWS: usize = 10;

/// Add-one empirical tail probability.
fn smoothed_p(exceed: usize, total: usize) -> f64 {
    (1 + exceed) as f64 / (total + 1) as f64
}

/// Bootstrap p-value `(1 + #{η₀ᵇ >= η̂}) / (B + 1)`.
///
/// Replicate `b` draws from `rng.child(b)`. A replicate whose resample
/// cannot be fitted is redrawn up to ten times, then counted as `η₀ᵇ = +inf`.
pub fn bootstrap_pvalue(null: &NullData, eta_hat: f64, reps: usize, grid: &QuantileGrid, rng: &RngStream) -> Result<f64> {
    if reps < 100 {
        return Err(Error::Config("bootstrap needs at least 100 replicates"));
    }
    let n = null.parent.len();
    let mut xb = alloc::vec![0.0; n];
    let mut yb = alloc::vec![0.0; n];
    let mut exceed = 0;
    for b in 0..reps {
        let mut r = rng.child(b as u64).rng();
        let mut eta0 = f64::INFINITY;
        for _ in 0..MAX_REDRAWS {
            for k in 0..n {
                let i = r.random_range(0..n);
                xb[k] = null.parent[i];
                yb[k] = null.child[i];
            }
            if let (Ok(f), Ok(g)) = (rbar2_only(&xb, &yb, grid), rbar2_only(&yb, &xb, grid)) {
                eta0 = eta(f, g).value;
                break;
            }
        }
        if eta0 >= eta_hat {
            exceed += 1;
        }
    }
    Ok(smoothed_p(exceed, reps))
}

/// Size and correlation of one segment, as used by the normal approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCorr {
    pub n: usize,
    pub rho: f64,
}

impl From<&Segment> for SegmentCorr {
    fn from(s: &Segment) -> Self {
        Self { n: s.n, rho: s.r }
    }
}

/// Largest |ρ| accepted by the normal approximation.
const RHO_CLAMP: f64 = 1.0 - 1e-6;

/// Normal-approximation tail probability from fixed segment summaries.
///
/// Each draw samples `z ~ N(artanh ρ, 1 / (n - 3))` for the four segments,
/// maps back through `tanh` into the two weighted scores and forms the ratio.
/// Returns the p-value and whether any |ρ| had to be clamped.
pub fn normal_null_pvalue(
    first: [SegmentCorr; 2],
    second: [SegmentCorr; 2],
    eta_hat: f64,
    draws: usize,
    rng: &RngStream,
) -> Result<(f64, bool)> {
    if draws == 0 {
        return Err(Error::Config("normal approximation needs at least one draw"));
    }
    let mut clamped = false;
    let mut params = [(0.0, 0.0, 0.0); 4];
    for (slot, seg) in params.iter_mut().zip(first.iter().chain(second.iter())) {
        if seg.n < 4 {
            return Err(Error::Domain("normal approximation needs n - 3 >= 1 in every segment"));
        }
        let rho = if libm::fabs(seg.rho) > RHO_CLAMP {
            clamped = true;
            libm::copysign(RHO_CLAMP, seg.rho)
        } else {
            seg.rho
        };
        *slot = (fisher_z(rho)?, 1.0 / libm::sqrt((seg.n - 3) as f64), seg.n as f64);
    }
    let score = |z_l: f64, z_h: f64, n_l: f64, n_h: f64| {
        let (t_l, t_h) = (libm::tanh(z_l), libm::tanh(z_h));
        (n_l * t_l * t_l + n_h * t_h * t_h) / (n_l + n_h)
    };
    let mut r = rng.rng();
    let mut exceed = 0;
    for _ in 0..draws {
        let mut z = [0.0; 4];
        for (zk, (mu, sd, _)) in z.iter_mut().zip(&params) {
            let e: f64 = StandardNormal.sample(&mut r);
            *zk = mu + sd * e;
        }
        let first_score = score(z[0], z[1], params[0].2, params[1].2);
        let second_score = score(z[2], z[3], params[2].2, params[3].2);
        if eta(first_score, second_score).value >= eta_hat {
            exceed += 1;
        }
    }
    Ok((smoothed_p(exceed, draws), clamped))
}

/// Normal-approximation p-value on null data: re-estimates the cut in both
/// directions of the null data, then samples segment correlations.
pub fn normal_pvalue(null: &NullData, eta_hat: f64, draws: usize, grid: &QuantileGrid, rng: &RngStream) -> Result<f64> {
    Ok(normal_pvalue_flagged(null, eta_hat, draws, grid, rng)?.0)
}

fn normal_pvalue_flagged(
    null: &NullData,
    eta_hat: f64,
    draws: usize,
    grid: &QuantileGrid,
    rng: &RngStream,
) -> Result<(f64, bool)> {
    let fwd = fit_direction(&null.parent, &null.child, grid)?;
    let bwd = fit_direction(&null.child, &null.parent, grid)?;
    normal_null_pvalue(
        [(&fwd.low).into(), (&fwd.high).into()],
        [(&bwd.low).into(), (&bwd.high).into()],
        eta_hat,
        draws,
        rng,
    )
}

/// Outcome of the direction test for a pair `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DirectionTest {
    pub preferred: Orientation,
    pub eta_hat: f64,
    pub p_value: f64,
    pub method: Method,
    /// `B` or `K` actually used.
    pub replicates: usize,
    pub rbar2_forward: f64,
    pub rbar2_backward: f64,
    /// The two scores were exactly equal; `Forward` was chosen.
    pub tie: bool,
    /// A zero score, a degenerate segment, or a clamped correlation occurred.
    pub degenerate: bool,
    /// Offset applied when building the null data.
    pub null_shift: f64,
}

/// Direction test together with the fits of both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionOutcome {
    pub test: DirectionTest,
    /// Fit of `y` on `x`.
    pub forward: PiecewiseFit,
    /// Fit of `x` on `y`.
    pub backward: PiecewiseFit,
}

impl DirectionOutcome {
    /// The fit of the preferred direction.
    pub fn preferred_fit(&self) -> &PiecewiseFit {
        match self.test.preferred {
            Orientation::Forward => &self.forward,
            Orientation::Backward => &self.backward,
        }
    }
}

/// Fits both directions, picks the one with the larger score (ties go to
/// `x -> y`) and computes the p-value of the observed ratio.
pub fn test_direction(x: &[f64], y: &[f64], cfg: &TestConfig, rng: &RngStream) -> Result<DirectionOutcome> {
    cfg.validate()?;
    let forward = fit_direction(x, y, &cfg.grid)?;
    let backward = fit_direction(y, x, &cfg.grid)?;
    let ratio = eta(forward.rbar2, backward.rbar2);
    let tie = forward.rbar2 == backward.rbar2;
    let preferred = if forward.rbar2 >= backward.rbar2 { Orientation::Forward } else { Orientation::Backward };
    let (parent, child, fit) = match preferred {
        Orientation::Forward => (x, y, &forward),
        Orientation::Backward => (y, x, &backward),
    };
    let null = make_null(parent, child, fit)?;
    let (p_value, clamped, replicates) = match cfg.method {
        Method::Bootstrap => (bootstrap_pvalue(&null, ratio.value, cfg.bootstrap_reps, &cfg.grid, rng)?, false, cfg.bootstrap_reps),
        Method::Normal => {
            let (p, c) = normal_pvalue_flagged(&null, ratio.value, cfg.normal_draws, &cfg.grid, rng)?;
            (p, c, cfg.normal_draws)
        }
    };
    let degenerate = ratio.degenerate || clamped || forward.degenerate() || backward.degenerate();
    Ok(DirectionOutcome {
        test: DirectionTest {
            preferred,
            eta_hat: ratio.value,
            p_value,
            method: cfg.method,
            replicates,
            rbar2_forward: forward.rbar2,
            rbar2_backward: backward.rbar2,
            tie,
            degenerate,
            null_shift: null.shift,
        },
        forward,
        backward,
    })
}
