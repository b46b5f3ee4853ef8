//! Statistical kernels shared by the direction test and the PC learner.

mod corr;
mod linalg;
mod normal;
mod rng;

pub use corr::{ci_test, fisher_z, is_degenerate, pearson, CiOutcome, FisherZ};
pub use linalg::{ols, residualize, OlsFit};
pub use normal::{gauss_cdf, gauss_quantile, gauss_two_sided_p};
pub use rng::{sample_normal, RngStream};

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Type-7 sample quantile (linear interpolation between order statistics)
/// of already sorted data.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * prob;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sorted copy, NaN-free input assumed.
pub(crate) fn sorted(x: &[f64]) -> alloc::vec::Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert!((quantile_sorted(&s, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_sorted(&s, 0.1) - 1.3).abs() < 1e-12);
    }
}
