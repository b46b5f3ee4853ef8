//! Structural accuracy of a learned graph and held-out likelihood.
//!
//! Edges are compared per unordered pair, with three possible marks
//! (`i -> j`, `j -> i`, `i -- j`). A true positive is an estimated edge with
//! the same pair and mark as in the truth; a false positive is an estimated
//! edge whose pair is absent from the truth. An edge on a true pair with the
//! wrong mark is neither, and shows up in SHD only.

use alloc::vec::Vec;

use crate::data::Dataset;
use crate::graph::Pdag;
use crate::orient::{pdag_to_dag, pdag_to_dag_lenient};
use crate::stats::ols;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairState {
    Absent,
    Forward,
    Backward,
    Undirected,
}

fn state(g: &Pdag, i: usize, j: usize) -> PairState {
    if g.has_directed(i, j) {
        PairState::Forward
    } else if g.has_directed(j, i) {
        PairState::Backward
    } else if g.has_undirected(i, j) {
        PairState::Undirected
    } else {
        PairState::Absent
    }
}

fn pair_states(g1: &Pdag, g2: &Pdag) -> Result<Vec<(PairState, PairState)>> {
    if g1.p() != g2.p() {
        return Err(Error::NodeCountMismatch(g1.p(), g2.p()));
    }
    let p = g1.p();
    Ok((0..p).flat_map(|i| (i + 1..p).map(move |j| (state(g1, i, j), state(g2, i, j)))).collect())
}

/// Structural Hamming distance: one per pair whose presence or mark differs.
pub fn shd(g1: &Pdag, g2: &Pdag) -> Result<usize> {
    Ok(pair_states(g1, g2)?.into_iter().filter(|(a, b)| a != b).count())
}

/// Exactly matching edges over the union of adjacent pairs; 1 when both
/// graphs are empty.
pub fn jaccard(g1: &Pdag, g2: &Pdag) -> Result<f64> {
    let states = pair_states(g1, g2)?;
    let union = states.iter().filter(|(a, b)| *a != PairState::Absent || *b != PairState::Absent).count();
    if union == 0 {
        return Ok(1.0);
    }
    let matched = states.iter().filter(|(a, b)| *a != PairState::Absent && a == b).count();
    Ok(matched as f64 / union as f64)
}

/// `(tp, fp)` of `estimate` against `truth`.
pub fn tp_fp(estimate: &Pdag, truth: &Pdag) -> Result<(usize, usize)> {
    let states = pair_states(estimate, truth)?;
    let tp = states.iter().filter(|(e, t)| *e != PairState::Absent && e == t).count();
    let fp = states.iter().filter(|(e, t)| *e != PairState::Absent && *t == PairState::Absent).count();
    Ok((tp, fp))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphScore {
    pub shd: usize,
    pub ji: f64,
    pub tp: usize,
    pub fp: usize,
}

pub fn score(estimate: &Pdag, truth: &Pdag) -> Result<GraphScore> {
    let (tp, fp) = tp_fp(estimate, truth)?;
    Ok(GraphScore { shd: shd(estimate, truth)?, ji: jaccard(estimate, truth)?, tp, fp })
}

const MIN_VARIANCE: f64 = 1e-8;

/// Gaussian log-likelihood of `test` under the graph fitted on `train`.
///
/// The graph is first extended to a DAG. Each node is regressed on its
/// parents by least squares, with a linear term per linear parent and
/// `(x, x²)` per nonlinear parent; the residual variance is the training
/// MLE, clamped below at `1e-8`. Returns the sum over nodes and test rows.
pub fn holdout_loglik(g: &Pdag, train: &Dataset, test: &Dataset) -> Result<f64> {
    dag_loglik(g, train, test, pdag_to_dag)
}

/// [`holdout_loglik`] with [`pdag_to_dag_lenient`] as the extension, so
/// PDAGs without a consistent extension still get a score.
pub fn holdout_loglik_lenient(g: &Pdag, train: &Dataset, test: &Dataset) -> Result<f64> {
    dag_loglik(g, train, test, pdag_to_dag_lenient)
}

fn dag_loglik(g: &Pdag, train: &Dataset, test: &Dataset, extend: fn(&Pdag) -> Result<Pdag>) -> Result<f64> {
    let p = g.p();
    if train.n_vars() != p || test.n_vars() != p {
        return Err(Error::NodeCountMismatch(train.n_vars().max(test.n_vars()), p));
    }
    if train.names() != test.names() {
        return Err(Error::InvalidData("train and test variables differ".into()));
    }
    let dag = extend(g)?;
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut total = 0.0;
    for v in 0..p {
        let parents = dag.parents(v)?;
        let design = |d: &Dataset| -> Vec<Vec<f64>> {
            let mut cols = Vec::new();
            for &q in &parents {
                cols.push(d.column(q).to_vec());
                if dag.is_nonlinear(q, v) {
                    cols.push(d.column(q).iter().map(|x| x * x).collect());
                }
            }
            cols
        };
        let train_cols = design(train);
        let refs: Vec<&[f64]> = train_cols.iter().map(Vec::as_slice).collect();
        let fit = ols(train.column(v), &refs)?;
        let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
        let var = (rss / train.n_samples() as f64).max(MIN_VARIANCE);
        let test_cols = design(test);
        let norm = -0.5 * libm::log(two_pi * var);
        for row in 0..test.n_samples() {
            let pred = fit.intercept + fit.coefficients.iter().zip(&test_cols).map(|(b, c)| b * c[row]).sum::<f64>();
            let r = test.column(v)[row] - pred;
            total += norm - r * r / (2.0 * var);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    #[test]
    fn shd_examples() {
        let g1 = Pdag::from_edges(3, &[(A, B)], &[(B, C)]).unwrap();
        let g2 = Pdag::from_edges(3, &[(A, B), (B, C), (A, C)], &[]).unwrap();
        assert_eq!(shd(&g1, &g2).unwrap(), 2);
        assert_eq!(shd(&g1, &g1).unwrap(), 0);
        assert_eq!(shd(&Pdag::new(2), &Pdag::from_edges(2, &[(0, 1)], &[]).unwrap()).unwrap(), 1);
        assert!(shd(&Pdag::new(2), &Pdag::new(3)).is_err());
    }

    #[test]
    fn jaccard_examples() {
        let g1 = Pdag::from_edges(3, &[(A, B), (B, C)], &[]).unwrap();
        let g2 = Pdag::from_edges(3, &[(A, B)], &[(B, C)]).unwrap();
        assert_eq!(jaccard(&g1, &g2).unwrap(), 0.5);
        assert_eq!(jaccard(&g1, &g1).unwrap(), 1.0);
        assert_eq!(jaccard(&Pdag::new(3), &Pdag::new(3)).unwrap(), 1.0);
        let g3 = Pdag::from_edges(3, &[(A, C)], &[]).unwrap();
        assert_eq!(jaccard(&g1, &g3).unwrap(), 0.0);
    }

    #[test]
    fn tp_fp_examples() {
        let truth = Pdag::from_edges(3, &[(A, B)], &[(B, C)]).unwrap();
        assert_eq!(tp_fp(&truth, &truth).unwrap(), (2, 0));
        assert_eq!(tp_fp(&Pdag::new(3), &truth).unwrap(), (0, 0));
        let rev = Pdag::from_edges(2, &[(B, A)], &[]).unwrap();
        assert_eq!(tp_fp(&rev, &Pdag::from_edges(2, &[(A, B)], &[]).unwrap()).unwrap(), (0, 0));
        let extra = Pdag::from_edges(3, &[(A, B), (A, C)], &[]).unwrap();
        assert_eq!(tp_fp(&extra, &truth).unwrap(), (1, 1));
    }

    #[test]
    fn empty_graph_loglik_is_marginal() {
        let train = Dataset::from_columns(vec![vec![-1.0, 1.0, -1.0, 1.0]]).unwrap();
        let test = Dataset::from_columns(vec![vec![0.0, 2.0]]).unwrap();
        // mean 0, MLE variance 1
        let expected = -(2.0 * core::f64::consts::PI).ln() - (0.0 + 4.0) / 2.0;
        assert!((holdout_loglik(&Pdag::new(1), &train, &test).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn quadratic_term_used_for_nonlinear_parent() {
        let x: Vec<f64> = (0..50).map(|i| -2.0 + 4.0 * i as f64 / 49.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let d = Dataset::from_columns(vec![x, y]).unwrap();
        let mut g = Pdag::from_edges(2, &[(0, 1)], &[]).unwrap();
        let linear = holdout_loglik(&g, &d, &d).unwrap();
        g.set_nonlinear(0, 1, true).unwrap();
        let quad = holdout_loglik(&g, &d, &d).unwrap();
        assert!(quad > linear + 100.0);
    }

    #[test]
    fn inextensible_rejected() {
        let g = Pdag::from_edges(4, &[], &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let d = Dataset::from_columns(vec![vec![0.0, 1.0, 2.0]; 4]).unwrap();
        assert!(matches!(holdout_loglik(&g, &d, &d), Err(Error::Inextensible)));
    }
}
