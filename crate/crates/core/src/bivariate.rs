//! Causal verdict for a single pair of variables.

use alloc::vec::Vec;

use crate::direction::{test_direction, DirectionOutcome, DirectionTest, Orientation, TestConfig};
use crate::piecewise::{fit_direction, QuantileGrid};
use crate::stats::{ci_test, RngStream};
use crate::{Error, Result};

/// Verdict on the edge between two variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EdgeKind {
    /// Independent, no edge.
    None,
    Directed(Orientation),
    /// Dependent, direction not identified.
    Undirected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVerdict {
    pub kind: EdgeKind,
    pub test: Option<DirectionTest>,
    /// The fits could not be computed or a degenerate quantity was hit.
    pub degenerate: bool,
}

/// Dependence screen run before any fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Screen {
    /// Marginal Fisher-z correlation test only.
    FisherZ,
    /// Marginal Fisher-z test, or, failing that, a split test: the data are
    /// cut at the two-piece cut point of either direction and both segments
    /// must show significant correlation.
    #[default]
    FisherZOrSegmented,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BivariateConfig {
    /// Level of the direction test and, unless overridden, of the screen.
    pub alpha: f64,
    pub screen_alpha: Option<f64>,
    pub screen: Screen,
    pub test: TestConfig,
}

impl Default for BivariateConfig {
    fn default() -> Self {
        Self { alpha: 0.01, screen_alpha: None, screen: Screen::default(), test: TestConfig::default() }
    }
}

impl BivariateConfig {
    pub fn screen_level(&self) -> f64 {
        self.screen_alpha.unwrap_or(self.alpha)
    }
}

/// Result of a conditional independence test run separately on the two
/// segments of a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitCi {
    /// Both segments rejected independence.
    pub dependent: bool,
    /// A segment was below the minimum size; reported as independent.
    pub too_small: bool,
}

/// Splits the rows by `split_on <= tau` and runs `ci_test(parent, child |
/// cond)` inside each segment. Segments shorter than `min_segment` (or too
/// short for the conditioning set) count as independent.
pub fn split_ci(
    parent: &[f64],
    child: &[f64],
    cond: &[&[f64]],
    split_on: &[f64],
    tau: f64,
    min_segment: usize,
    alpha: f64,
) -> Result<SplitCi> {
    let mut dependent = true;
    for low in [true, false] {
        let rows: Vec<usize> = (0..split_on.len()).filter(|&i| (split_on[i] <= tau) == low).collect();
        if rows.len() < min_segment.max(cond.len() + 4) {
            return Ok(SplitCi { dependent: false, too_small: true });
        }
        let pick = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        let z: Vec<Vec<f64>> = cond.iter().map(|c| pick(c)).collect();
        let zr: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
        let out = ci_test(&pick(parent), &pick(child), &zr, alpha)?;
        dependent &= !out.independent;
    }
    Ok(SplitCi { dependent, too_small: false })
}

fn segmented_screen(x: &[f64], y: &[f64], grid: &QuantileGrid, alpha: f64) -> Result<bool> {
    let min_seg = grid.min_segment_for(x.len());
    for (parent, child) in [(x, y), (y, x)] {
        let fit = match fit_direction(parent, child, grid) {
            Ok(f) => f,
            Err(Error::InfeasibleFit(_)) => continue,
            Err(e) => return Err(e),
        };
        if split_ci(parent, child, &[], parent, fit.tau, min_seg, alpha)?.dependent {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Runs the configured built-in screen.
pub fn screen_dependent(x: &[f64], y: &[f64], cfg: &BivariateConfig) -> Result<bool> {
    let level = cfg.screen_level();
    if !ci_test(x, y, &[], level)?.independent {
        return Ok(true);
    }
    match cfg.screen {
        Screen::FisherZ => Ok(false),
        Screen::FisherZOrSegmented => segmented_screen(x, y, &cfg.test.grid, level),
    }
}

/// Verdict for `(x, y)` with the built-in screen.
pub fn bivariate_discover(x: &[f64], y: &[f64], cfg: &BivariateConfig, rng: &RngStream) -> Result<EdgeVerdict> {
    bivariate_discover_with(x, y, cfg, rng, |a, b| screen_dependent(a, b, cfg))
}

/// Verdict for `(x, y)` with a caller-supplied dependence screen.
///
/// An independent screen yields no edge. Otherwise both directions are fitted
/// and tested; a p-value at or below `alpha` yields the preferred arrow, a
/// larger one an undirected edge. Fits that cannot be computed also yield an
/// undirected edge, flagged degenerate.
pub fn bivariate_discover_with<F>(x: &[f64], y: &[f64], cfg: &BivariateConfig, rng: &RngStream, screen: F) -> Result<EdgeVerdict>
where
    F: FnOnce(&[f64], &[f64]) -> Result<bool>,
{
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Config("alpha must lie in (0, 1)"));
    }
    if x.len() != y.len() {
        return Err(Error::Domain("pair vectors differ in length"));
    }
    if !screen(x, y)? {
        return Ok(EdgeVerdict { kind: EdgeKind::None, test: None, degenerate: false });
    }
    let outcome: DirectionOutcome = match test_direction(x, y, &cfg.test, rng) {
        Ok(o) => o,
        Err(Error::InfeasibleFit(_)) | Err(Error::Degenerate(_)) => {
            return Ok(EdgeVerdict { kind: EdgeKind::Undirected, test: None, degenerate: true })
        }
        Err(e) => return Err(e),
    };
    let t = outcome.test;
    let kind = if t.p_value <= cfg.alpha { EdgeKind::Directed(t.preferred) } else { EdgeKind::Undirected };
    Ok(EdgeVerdict { kind, degenerate: t.degenerate, test: Some(t) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::sample_normal;

    fn pair(seed: u64, f: impl Fn(f64) -> f64, noise: f64) -> (Vec<f64>, Vec<f64>) {
        let s = RngStream::from_seed(seed);
        let x = sample_normal(&s.child(0), 0.0, 1.0, 1000).unwrap();
        let e = sample_normal(&s.child(1), 0.0, noise, 1000).unwrap();
        let y = x.iter().zip(&e).map(|(a, b)| f(*a) + b).collect();
        (x, y)
    }

    #[test]
    fn quadratic_gets_an_arrow() {
        let (x, y) = pair(1, |v| v * v, 0.5);
        let cfg = BivariateConfig::default();
        let v = bivariate_discover(&x, &y, &cfg, &RngStream::from_seed(2)).unwrap();
        assert_eq!(v.kind, EdgeKind::Directed(Orientation::Forward));
        let w = bivariate_discover(&y, &x, &cfg, &RngStream::from_seed(2)).unwrap();
        assert_eq!(w.kind, EdgeKind::Directed(Orientation::Backward));
        // the linear-only screen misses a symmetric quadratic
        let linear_only = BivariateConfig { screen: Screen::FisherZ, ..cfg };
        let v = bivariate_discover(&x, &y, &linear_only, &RngStream::from_seed(2)).unwrap();
        assert_eq!(v.kind, EdgeKind::None);
    }

    #[test]
    fn linear_is_undirected() {
        let (x, y) = pair(3, |v| 2.0 * v, 1.0);
        let v = bivariate_discover(&x, &y, &BivariateConfig::default(), &RngStream::from_seed(4)).unwrap();
        assert_eq!(v.kind, EdgeKind::Undirected);
        assert!(v.test.unwrap().p_value > 0.01);
    }

    #[test]
    fn independent_is_none() {
        let (x, y) = pair(5, |_| 0.0, 1.0);
        let v = bivariate_discover(&x, &y, &BivariateConfig::default(), &RngStream::from_seed(6)).unwrap();
        assert_eq!(v.kind, EdgeKind::None);
        assert!(v.test.is_none());
    }

    #[test]
    fn custom_screen_and_infeasible_fit() {
        let x: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let v = bivariate_discover_with(&x, &y, &BivariateConfig::default(), &RngStream::from_seed(0), |_, _| Ok(true)).unwrap();
        assert_eq!(v.kind, EdgeKind::Undirected);
        assert!(v.degenerate);
    }
}
