use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::mean;
use crate::{Error, Result};

/// Least-squares fit of `y` on an intercept plus regressor columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares with intercept, solved by SVD on centered data.
///
/// Rank-deficient designs get the minimum-norm slope vector: singular values
/// below `max(n, k) * eps * σ_max` are dropped. Residuals are the projection
/// of `y` off the column space and do not depend on that choice.
pub fn ols(y: &[f64], columns: &[&[f64]]) -> Result<OlsFit> {
    let n = y.len();
    if n == 0 {
        return Err(Error::Domain("ols needs at least one sample"));
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Domain("ols regressors differ in length from the response"));
    }
    if columns.len() + 1 > n {
        return Err(Error::Domain("ols needs n >= regressors + 1"));
    }
    let ybar = mean(y);
    if columns.is_empty() {
        return Ok(OlsFit {
            intercept: ybar,
            coefficients: Vec::new(),
            residuals: y.iter().map(|v| v - ybar).collect(),
        });
    }
    let k = columns.len();
    let means: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let design = DMatrix::from_fn(n, k, |i, j| columns[j][i] - means[j]);
    let target = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (n.max(k) as f64) * f64::EPSILON;
    let beta = if smax > 0.0 {
        svd.solve(&target, eps).map_err(|_| Error::Degenerate("svd solve failed"))?
    } else {
        DVector::zeros(k)
    };
    let fitted = &design * &beta;
    let residuals = target.iter().zip(fitted.iter()).map(|(t, f)| t - f).collect();
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let intercept = ybar - coefficients.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    Ok(OlsFit { intercept, coefficients, residuals })
}

/// OLS residuals of `y` on `(1, z...)`; with no regressors, `y` centered.
pub fn residualize(y: &[f64], z: &[&[f64]]) -> Result<Vec<f64>> {
    Ok(ols(y, z)?.residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{sample_normal, RngStream};
    use alloc::vec;

    #[test]
    fn exact_linear_gives_zero() {
        let z: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = z.iter().map(|v| 3.0 * v).collect();
        let r = residualize(&y, &[&z]).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn empty_design_centers() {
        assert_eq!(residualize(&[1.0, 2.0, 3.0], &[]).unwrap(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn residuals_orthogonal_and_idempotent() {
        let s = RngStream::from_seed(5);
        let n = 200;
        let y = sample_normal(&s.child(0), 1.0, 2.0, n).unwrap();
        let z1 = sample_normal(&s.child(1), 0.0, 1.0, n).unwrap();
        let z2 = sample_normal(&s.child(2), 3.0, 1.0, n).unwrap();
        let r = residualize(&y, &[&z1, &z2]).unwrap();
        for z in [&z1, &z2] {
            let dot: f64 = r.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-8 * n as f64);
        }
        let rr = residualize(&r, &[&z1, &z2]).unwrap();
        assert!(r.iter().zip(&rr).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn collinear_design_is_min_norm() {
        let z: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = z.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = ols(&y, &[&z, &z]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-10);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-10);
        assert!((fit.intercept - 1.0).abs() < 1e-10);
        assert!(fit.residuals.iter().all(|v| v.abs() < 1e-10));
    }
}
