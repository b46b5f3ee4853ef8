use nncl_core::direction::{normal_null_pvalue, SegmentCorr};
use nncl_core::piecewise::{find_cut, fit_direction, QuantileGrid};
use nncl_core::stats::{ci_test, RngStream};
use nncl_oracles::{brute_cut, normal_null_mc, pearson, SplitMix};

fn sample(rng: &mut SplitMix, n: usize, f: impl Fn(f64) -> f64, noise: f64) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let y = x.iter().map(|&v| f(v) + noise * rng.normal()).collect();
    (x, y)
}

#[test]
fn cut_search_matches_brute_force() {
    let mut rng = SplitMix(21);
    let fs: [fn(f64) -> f64; 4] = [|x| x * x, |x| x.abs(), |x| (2.0 * x).cos(), |x| 0.5 * x];
    for k in 0..120 {
        let n = 40 + rng.below(400);
        let noise = 0.2 + rng.uniform();
        let (x, y) = sample(&mut rng, n, fs[k % 4], noise);
        let grid = QuantileGrid::default();
        let min_seg = grid.min_segment_for(n);
        let (idx, tau, rbar2) = brute_cut(&x, &y, grid.probs(), min_seg).unwrap();
        let cut = find_cut(&x, &y, &grid).unwrap();
        assert_eq!(cut.grid_index, idx, "case {k}");
        assert!((cut.tau - tau).abs() < 1e-12);
        let fit = fit_direction(&x, &y, &grid).unwrap();
        assert!((fit.rbar2 - rbar2).abs() < 1e-9, "case {k}: {} vs {rbar2}", fit.rbar2);
    }
}

#[test]
fn cut_search_infeasible_when_segments_too_small() {
    let x: Vec<f64> = (0..15).map(f64::from).collect();
    let y = x.clone();
    assert!(brute_cut(&x, &y, QuantileGrid::default().probs(), 10).is_none());
    assert!(find_cut(&x, &y, &QuantileGrid::default()).is_err());
}

#[test]
fn normal_null_matches_independent_monte_carlo() {
    let mut rng = SplitMix(22);
    let draws = 200_000;
    for k in 0..12 {
        let segs: Vec<(usize, f64)> = (0..4).map(|_| (20 + rng.below(500), 1.8 * rng.uniform() - 0.9)).collect();
        let segs = [segs[0], segs[1], segs[2], segs[3]];
        let eta_hat = 1.0 + 0.3 * rng.uniform();
        let c = |i: usize| SegmentCorr { n: segs[i].0, rho: segs[i].1 };
        let (ours, _) = normal_null_pvalue([c(0), c(1)], [c(2), c(3)], eta_hat, draws, &RngStream::from_seed(k)).unwrap();
        let oracle = normal_null_mc(segs, eta_hat, draws, 1000 + k);
        let se = (oracle * (1.0 - oracle) / draws as f64).sqrt().max(1.0 / draws as f64);
        assert!((ours - oracle).abs() < 5.0 * std::f64::consts::SQRT_2 * se, "case {k}: {ours} vs {oracle}");
    }
}

#[test]
fn ci_test_matches_first_order_partial_correlation() {
    let mut rng = SplitMix(23);
    for _ in 0..40 {
        let n = 30 + rng.below(300);
        let z: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let (bx, by) = (rng.uniform() * 2.0, rng.uniform() * 2.0);
        let x: Vec<f64> = z.iter().map(|v| bx * v + rng.normal()).collect();
        let y: Vec<f64> = z.iter().zip(&x).map(|(v, xv)| by * v + 0.1 * xv + rng.normal()).collect();
        let (rxy, rxz, ryz) = (pearson(&x, &y), pearson(&x, &z), pearson(&y, &z));
        let r = (rxy - rxz * ryz) / ((1.0 - rxz * rxz) * (1.0 - ryz * ryz)).sqrt();
        let stat = ((n - 4) as f64).sqrt() * r.atanh().abs();
        let out = ci_test(&x, &y, &[&z], 0.01).unwrap();
        assert!((out.partial_r - r).abs() < 1e-10);
        assert!((out.statistic - stat).abs() < 1e-8);
        assert_eq!(out.independent, stat <= 2.5758293035489004);
    }
}
