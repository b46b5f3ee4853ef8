use libm::{fabs, log, sqrt};

use super::linalg::residualize;
use super::normal::{gauss_quantile, gauss_two_sided_p};
use crate::{Error, Result};

/// Sample variance below `1e-12 * range^2` counts as zero variance.
const DEGENERATE_REL_VAR: f64 = 1e-12;

fn centered_moments(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ss = 0.0;
    for &v in x {
        ss += (v - mean) * (v - mean);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (mean, ss / n, hi - lo)
}

/// Whether a vector has (numerically) zero variance.
pub fn is_degenerate(x: &[f64]) -> bool {
    let (_, var, range) = centered_moments(x);
    var <= DEGENERATE_REL_VAR * range * range
}

/// Sample Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("pearson needs two vectors of equal length >= 2"));
    }
    if is_degenerate(x) || is_degenerate(y) {
        return Err(Error::Degenerate("zero-variance input to pearson"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    Ok((sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Fisher's transform `0.5 ln((1 + r) / (1 - r))`, i.e. `artanh(r)`.
pub fn fisher_z(r: f64) -> Result<f64> {
    if !(fabs(r) < 1.0) {
        return Err(Error::Domain("fisher transform needs |r| < 1"));
    }
    Ok(0.5 * log((1.0 + r) / (1.0 - r)))
}

/// A Fisher-transformed correlation together with the sample size behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherZ {
    pub z: f64,
    pub n: usize,
}

impl FisherZ {
    pub fn from_r(r: f64, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Domain("fisher z variance needs n >= 4"));
        }
        Ok(Self { z: fisher_z(r)?, n })
    }

    /// Approximate sampling standard deviation `1 / sqrt(n - 3)`.
    pub fn sd(&self) -> f64 {
        1.0 / sqrt((self.n - 3) as f64)
    }

    pub fn r(&self) -> f64 {
        libm::tanh(self.z)
    }
}

/// Outcome of a partial-correlation conditional independence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiOutcome {
    pub independent: bool,
    /// `sqrt(n - |Z| - 3) * |z(r)|`.
    pub statistic: f64,
    pub p_value: f64,
    pub partial_r: f64,
    /// Set when a residual vector had zero variance; reported as independent.
    pub degenerate: bool,
}

/// Tests `x ⟂ y | z` with Fisher's z of the partial correlation.
///
/// Rejects independence when `sqrt(n - |Z| - 3) |z(r)| > Φ⁻¹(1 - α/2)`.
pub fn ci_test(x: &[f64], y: &[f64], z: &[&[f64]], alpha: f64) -> Result<CiOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must lie in (0, 1)"));
    }
    let n = x.len();
    if y.len() != n || z.iter().any(|c| c.len() != n) {
        return Err(Error::Domain("ci_test vectors differ in length"));
    }
    if n < z.len() + 4 {
        return Err(Error::Domain("ci_test needs n - |Z| - 3 >= 1"));
    }
    let ex = residualize(x, z)?;
    let ey = residualize(y, z)?;
    let explained_away = |orig: &[f64], res: &[f64]| centered_moments(res).1 <= DEGENERATE_REL_VAR * centered_moments(orig).1;
    let r = if explained_away(x, &ex) || explained_away(y, &ey) {
        Err(Error::Degenerate("residual variance vanished"))
    } else {
        pearson(&ex, &ey)
    };
    let r = match r {
        Ok(r) => r,
        Err(Error::Degenerate(_)) => {
            return Ok(CiOutcome { independent: true, statistic: 0.0, p_value: 1.0, partial_r: 0.0, degenerate: true })
        }
        Err(e) => return Err(e),
    };
    let dof = (n - z.len() - 3) as f64;
    let statistic = match fisher_z(r) {
        Ok(zr) => sqrt(dof) * fabs(zr),
        Err(_) => f64::INFINITY,
    };
    let critical = gauss_quantile(1.0 - alpha / 2.0)?;
    Ok(CiOutcome {
        independent: !(statistic > critical),
        statistic,
        p_value: gauss_two_sided_p(statistic),
        partial_r: r,
        degenerate: false,
    })
}
