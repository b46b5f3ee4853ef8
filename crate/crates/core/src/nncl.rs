//! Non-invertible edge learning on top of an initial partially directed
//! graph: orientation of its undirected edges on residuals, a search for
//! edges outside its skeleton, and the end-to-end pipeline.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::bivariate::{split_ci, SplitCi};
use crate::data::Dataset;
use crate::direction::{test_direction, DirectionTest, Orientation, TestConfig};
use crate::exec::Executor;
use crate::graph::Pdag;
use crate::orient::{meek_close_logged, OrientationLog, Rule};
use crate::pc::pc_learn;
use crate::piecewise::Segment;
use crate::stats::{residualize, RngStream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NnclConfig {
    /// Level of the direction test.
    pub alpha: f64,
    /// Level of the per-segment conditional independence tests.
    pub ci_alpha: f64,
    pub test: TestConfig,
    pub seed: u64,
}

impl Default for NnclConfig {
    fn default() -> Self {
        Self { alpha: 0.01, ci_alpha: 0.01, test: TestConfig::default(), seed: 0 }
    }
}

impl NnclConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) || !(self.ci_alpha > 0.0 && self.ci_alpha < 1.0) {
            return Err(Error::Config("alpha levels must lie in (0, 1)"));
        }
        self.test.validate()
    }
}

/// Fitted contributions `f(parent residual)` of committed nonlinear edges,
/// evaluated at every sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitStore {
    values: BTreeMap<(usize, usize), Vec<f64>>,
}

impl FitStore {
    pub fn insert(&mut self, parent: usize, child: usize, values: Vec<f64>) {
        self.values.insert((parent, child), values);
    }

    pub fn get(&self, parent: usize, child: usize) -> Option<&[f64]> {
        self.values.get(&(parent, child)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which parents were removed from a node's residual, and how.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub node: usize,
    /// Regressed out jointly by OLS.
    pub linear_parents: Vec<usize>,
    /// Subtracted as stored two-piece contributions.
    pub nonlinear_parents: Vec<usize>,
}

pub fn provenance(node: usize, g: &Pdag, store: &FitStore) -> Provenance {
    let (nonlinear_parents, linear_parents) = g.parents_of(node).into_iter().partition(|&q| store.get(q, node).is_some());
    Provenance { node, linear_parents, nonlinear_parents }
}

/// Residual of `node` given its parents in `g`: stored nonlinear
/// contributions are subtracted, then the remaining (linear) parents are
/// regressed out by OLS. Without parents this is the centered column.
pub fn residuals_for(node: usize, g: &Pdag, data: &Dataset, store: &FitStore) -> Result<Vec<f64>> {
    let mut target = data.column(node).to_vec();
    let mut linear: Vec<&[f64]> = Vec::new();
    for q in g.parents(node)? {
        match store.get(q, node) {
            Some(c) => target.iter_mut().zip(c).for_each(|(t, v)| *t -= v),
            None => linear.push(data.column(q)),
        }
    }
    residualize(&target, &linear)
}

/// Dependence of `vc` on `vp` given `vc`'s parents, tested separately on the
/// rows with `split_on <= tau` and the rest. Dependent only if both segments
/// reject.
pub fn segmented_ci(
    vp: usize,
    vc: usize,
    g: &Pdag,
    data: &Dataset,
    split_on: &[f64],
    tau: f64,
    min_segment: usize,
    alpha: f64,
) -> Result<SplitCi> {
    let cond: Vec<&[f64]> = g.parents(vc)?.into_iter().filter(|&q| q != vp).map(|q| data.column(q)).collect();
    split_ci(data.column(vp), data.column(vc), &cond, split_on, tau, min_segment, alpha)
}

/// Cut point and segment lines of a two-piece fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitSummary {
    pub tau: f64,
    pub low: Segment,
    pub high: Segment,
}

impl FitSummary {
    pub fn predict(&self, x: f64) -> f64 {
        if x <= self.tau {
            self.low.predict(x)
        } else {
            self.high.predict(x)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Stage {
    /// Undirected edge of the initial graph.
    Orient,
    /// Pair outside the initial skeleton.
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Outcome {
    Committed,
    /// Direction p-value above the level.
    NotSignificant,
    /// A segment failed to reject independence.
    SplitIndependent,
    WouldCycle,
    /// The two-piece fits could not be computed.
    Infeasible,
}

/// A tested pair and what happened to it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeCandidate {
    pub stage: Stage,
    /// Preferred parent and child (the pair in index order when infeasible).
    pub from: usize,
    pub to: usize,
    pub test: Option<DirectionTest>,
    pub fit: Option<FitSummary>,
    pub parent_residual: Provenance,
    pub child_residual: Provenance,
    pub split: Option<SplitCi>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
struct Eval {
    from: usize,
    to: usize,
    test: Option<DirectionTest>,
    fit: Option<FitSummary>,
}

impl Eval {
    fn p_value(&self) -> f64 {
        self.test.as_ref().map_or(f64::INFINITY, |t| t.p_value)
    }

    fn eta(&self) -> f64 {
        self.test.as_ref().map_or(f64::NEG_INFINITY, |t| t.eta_hat)
    }
}

fn pair_index(i: usize, j: usize, p: usize) -> u64 {
    (i * p + j) as u64
}

fn evaluate(data: &Dataset, g: &Pdag, store: &FitStore, test: &TestConfig, i: usize, j: usize, rng: &RngStream) -> Result<Eval> {
    let ri = residuals_for(i, g, data, store)?;
    let rj = residuals_for(j, g, data, store)?;
    match test_direction(&ri, &rj, test, rng) {
        Ok(out) => {
            let fit = out.preferred_fit();
            let summary = FitSummary { tau: fit.tau, low: fit.low, high: fit.high };
            let (from, to) = match out.test.preferred {
                Orientation::Forward => (i, j),
                Orientation::Backward => (j, i),
            };
            Ok(Eval { from, to, test: Some(out.test), fit: Some(summary) })
        }
        Err(Error::InfeasibleFit(_)) | Err(Error::Degenerate(_)) => Ok(Eval { from: i, to: j, test: None, fit: None }),
        Err(e) => Err(e),
    }
}

type Signature = (Vec<usize>, Vec<usize>);

fn signature(node: usize, g: &Pdag, store: &FitStore) -> Signature {
    let pr = provenance(node, g, store);
    (pr.linear_parents, pr.nonlinear_parents)
}

/// Graph, stored nonlinear fits and reports of a learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct NnclState {
    pub graph: Pdag,
    pub log: OrientationLog,
    pub store: FitStore,
    /// Commits in order, plus the candidates that were tested and not
    /// committed in the final orientation round and in the outside search.
    pub candidates: Vec<EdgeCandidate>,
}

impl NnclState {
    /// Starts from an initial graph whose directed part must be acyclic.
    pub fn new(g0: Pdag, data: &Dataset) -> Result<Self> {
        if g0.p() != data.n_vars() {
            return Err(Error::NodeCountMismatch(g0.p(), data.n_vars()));
        }
        if !g0.is_acyclic() {
            return Err(Error::Cyclic);
        }
        Ok(Self { graph: g0, log: OrientationLog::default(), store: FitStore::default(), candidates: Vec::new() })
    }

    pub fn commits(&self) -> impl Iterator<Item = &EdgeCandidate> {
        self.candidates.iter().filter(|c| c.outcome == Outcome::Committed)
    }

    fn judge(&self, data: &Dataset, cfg: &NnclConfig, ev: &Eval, stage: Stage) -> Result<EdgeCandidate> {
        let (vp, vc) = (ev.from, ev.to);
        let mut split = None;
        let outcome = match (&ev.test, &ev.fit) {
            (Some(t), Some(fit)) => {
                if t.p_value > cfg.alpha {
                    Outcome::NotSignificant
                } else if self.graph.creates_cycle(vp, vc) {
                    Outcome::WouldCycle
                } else {
                    let split_on = residuals_for(vp, &self.graph, data, &self.store)?;
                    let min_seg = cfg.test.grid.min_segment_for(data.n_samples());
                    let s = segmented_ci(vp, vc, &self.graph, data, &split_on, fit.tau, min_seg, cfg.ci_alpha)?;
                    split = Some(s);
                    if s.dependent {
                        Outcome::Committed
                    } else {
                        Outcome::SplitIndependent
                    }
                }
            }
            _ => Outcome::Infeasible,
        };
        Ok(EdgeCandidate {
            stage,
            from: vp,
            to: vc,
            test: ev.test.clone(),
            fit: ev.fit,
            parent_residual: provenance(vp, &self.graph, &self.store),
            child_residual: provenance(vc, &self.graph, &self.store),
            split,
            outcome,
        })
    }

    fn commit(&mut self, data: &Dataset, vp: usize, vc: usize, fit: &FitSummary) -> Result<()> {
        let rp = residuals_for(vp, &self.graph, data, &self.store)?;
        let contribution = rp.iter().map(|&x| fit.predict(x)).collect();
        if self.graph.is_adjacent(vp, vc) {
            self.graph.orient(vp, vc);
        } else {
            self.graph.add_directed(vp, vc)?;
        }
        self.graph.set_nonlinear(vp, vc, true)?;
        self.store.insert(vp, vc, contribution);
        self.log.push(vp, vc, Rule::Commit);
        let (closed, log) = meek_close_logged(&self.graph)?;
        self.graph = closed;
        self.log.extend(log);
        Ok(())
    }

    /// Orients undirected edges found to be non-invertible.
    ///
    /// Each round tests every undirected pair on residuals, sorts by p-value
    /// (ties: larger η first, then pair order) and commits the first
    /// candidate with p at most `alpha`, a dependent split test and no cycle.
    /// Stops when a round commits nothing. A pair is retested only when the
    /// parent sets of its endpoints changed; each pair always uses its own
    /// random stream, so this equals retesting everything.
    pub fn orient<E: Executor>(&mut self, data: &Dataset, cfg: &NnclConfig, exec: &E) -> Result<()> {
        cfg.validate()?;
        let base = RngStream::from_seed(cfg.seed).child(0);
        let p = self.graph.p();
        let mut cache: BTreeMap<(usize, usize), (Signature, Signature, Eval)> = BTreeMap::new();
        loop {
            let pairs = self.graph.undirected_pairs();
            let sigs: Vec<(Signature, Signature)> =
                pairs.iter().map(|&(i, j)| (signature(i, &self.graph, &self.store), signature(j, &self.graph, &self.store))).collect();
            let stale: Vec<usize> = (0..pairs.len())
                .filter(|&k| cache.get(&pairs[k]).is_none_or(|(si, sj, _)| (si, sj) != (&sigs[k].0, &sigs[k].1)))
                .collect();
            let (graph, store) = (&self.graph, &self.store);
            let fresh = exec.map(stale.len(), |k| {
                let (i, j) = pairs[stale[k]];
                evaluate(data, graph, store, &cfg.test, i, j, &base.child(pair_index(i, j, p)))
            });
            for (k, ev) in stale.into_iter().zip(fresh) {
                let (si, sj) = sigs[k].clone();
                cache.insert(pairs[k], (si, sj, ev?));
            }
            let mut order: Vec<&Eval> = pairs.iter().map(|pr| &cache[pr].2).collect();
            order.sort_by(|a, b| {
                a.p_value()
                    .total_cmp(&b.p_value())
                    .then(b.eta().total_cmp(&a.eta()))
                    .then((a.from.min(a.to), a.from.max(a.to)).cmp(&(b.from.min(b.to), b.from.max(b.to))))
            });
            let mut round = Vec::new();
            let mut committed = None;
            for ev in order {
                let cand = self.judge(data, cfg, ev, Stage::Orient)?;
                if cand.outcome == Outcome::Committed {
                    committed = Some(cand);
                    break;
                }
                round.push(cand);
            }
            match committed {
                Some(cand) => {
                    let fit = cand.fit.ok_or(Error::Degenerate("committed candidate without a fit"))?;
                    self.commit(data, cand.from, cand.to, &fit)?;
                    self.candidates.push(cand);
                }
                None => {
                    self.candidates.extend(round);
                    return Ok(());
                }
            }
        }
    }

    /// Tests every pair non-adjacent at the start, in ascending order, and
    /// adds a nonlinear directed edge wherever the same three conditions as
    /// in [`NnclState::orient`] hold. Meek's rules run after each addition.
    pub fn outside_search<E: Executor>(&mut self, data: &Dataset, cfg: &NnclConfig, exec: &E) -> Result<()> {
        cfg.validate()?;
        let base = RngStream::from_seed(cfg.seed).child(1);
        let p = self.graph.p();
        let ne: Vec<(usize, usize)> =
            (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).filter(|&(i, j)| !self.graph.is_adjacent(i, j)).collect();
        let sig0: Vec<Signature> = (0..p).map(|v| signature(v, &self.graph, &self.store)).collect();
        let (graph, store) = (&self.graph, &self.store);
        let pre = exec.map(ne.len(), |k| {
            let (i, j) = ne[k];
            evaluate(data, graph, store, &cfg.test, i, j, &base.child(pair_index(i, j, p)))
        });
        for ((i, j), ev) in ne.into_iter().zip(pre) {
            let mut ev = ev?;
            if self.graph.is_adjacent(i, j) {
                continue;
            }
            if signature(i, &self.graph, &self.store) != sig0[i] || signature(j, &self.graph, &self.store) != sig0[j] {
                ev = evaluate(data, &self.graph, &self.store, &cfg.test, i, j, &base.child(pair_index(i, j, p)))?;
            }
            let cand = self.judge(data, cfg, &ev, Stage::Outside)?;
            if cand.outcome == Outcome::Committed {
                let fit = cand.fit.ok_or(Error::Degenerate("committed candidate without a fit"))?;
                self.commit(data, cand.from, cand.to, &fit)?;
            }
            self.candidates.push(cand);
        }
        Ok(())
    }
}

/// Orientation stage alone, from `g0`.
pub fn nncl_orient<E: Executor>(data: &Dataset, g0: &Pdag, cfg: &NnclConfig, exec: &E) -> Result<NnclState> {
    let mut st = NnclState::new(g0.clone(), data)?;
    st.orient(data, cfg, exec)?;
    Ok(st)
}

/// Outside search alone, from `g` (no stored nonlinear fits).
pub fn outside_search<E: Executor>(data: &Dataset, g: &Pdag, cfg: &NnclConfig, exec: &E) -> Result<NnclState> {
    let mut st = NnclState::new(g.clone(), data)?;
    st.outside_search(data, cfg, exec)?;
    Ok(st)
}

/// Source of the initial graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Learner {
    Pc { alpha: f64, max_cond: usize },
    /// A graph produced elsewhere.
    Initial(Pdag),
    /// Empty initial graph; the outside search always runs.
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub learner: Learner,
    pub nncl: NnclConfig,
    pub outside_search: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { learner: Learner::Pc { alpha: 0.01, max_cond: 3 }, nncl: NnclConfig::default(), outside_search: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub initial: Pdag,
    pub state: NnclState,
}

/// Initial graph, orientation stage, then (if configured) outside search.
pub fn run_pipeline<E: Executor>(data: &Dataset, cfg: &PipelineConfig, exec: &E) -> Result<PipelineOutput> {
    let initial = match &cfg.learner {
        Learner::Pc { alpha, max_cond } => pc_learn(data, *alpha, *max_cond)?,
        Learner::Initial(g) => g.clone(),
        Learner::Empty => Pdag::new(data.n_vars()),
    };
    let mut state = NnclState::new(initial.clone(), data)?;
    state.orient(data, &cfg.nncl, exec)?;
    if cfg.outside_search || cfg.learner == Learner::Empty {
        state.outside_search(data, &cfg.nncl, exec)?;
    }
    Ok(PipelineOutput { initial, state })
}

/// Orders candidates as the orientation stage does; exposed for reports.
pub fn candidate_order(a: &EdgeCandidate, b: &EdgeCandidate) -> Ordering {
    let p = |c: &EdgeCandidate| c.test.as_ref().map_or(f64::INFINITY, |t| t.p_value);
    let e = |c: &EdgeCandidate| c.test.as_ref().map_or(f64::NEG_INFINITY, |t| t.eta_hat);
    p(a).total_cmp(&p(b)).then(e(b).total_cmp(&e(a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::stats::{pearson, sample_normal};
    use alloc::vec;

    fn quad_pair(seed: u64, n: usize) -> Dataset {
        let s = RngStream::from_seed(seed);
        let x = sample_normal(&s.child(0), 0.0, 1.0, n).unwrap();
        let e = sample_normal(&s.child(1), 0.0, 0.5, n).unwrap();
        let y = x.iter().zip(&e).map(|(a, b)| a * a + b).collect();
        Dataset::from_columns(vec![x, y]).unwrap()
    }

    #[test]
    fn residuals_without_parents_are_centered() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 6.0]]).unwrap();
        let r = residuals_for(0, &Pdag::new(1), &d, &FitStore::default()).unwrap();
        assert_eq!(r, vec![-2.0, -1.0, 3.0]);
    }

    #[test]
    fn quadratic_edge_is_committed_and_residual_is_noise() {
        let d = quad_pair(7, 1000);
        let g0 = Pdag::from_edges(2, &[], &[(0, 1)]).unwrap();
        let st = nncl_orient(&d, &g0, &NnclConfig::default(), &Sequential).unwrap();
        assert!(st.graph.has_directed(0, 1));
        assert!(st.graph.is_nonlinear(0, 1));
        assert_eq!(st.log.entries[0].rule, Rule::Commit);
        let r = residuals_for(1, &st.graph, &d, &st.store).unwrap();
        let sq: Vec<f64> = d.column(0).iter().map(|v| v * v).collect();
        // A two-line fit of x² with the cut at the median leaves
        // x² - proj(x² | 1, |x|) per half; for standard normal x that part has
        // variance 2 - (2/π) / (1 - 2/π), the noise adds 0.25.
        let two_over_pi = 2.0 / core::f64::consts::PI;
        let left = 2.0 - two_over_pi / (1.0 - two_over_pi);
        let expected = left / libm::sqrt(2.0 * (left + 0.25));
        let c = pearson(&r, &sq).unwrap();
        assert!((c - expected).abs() < 0.05, "corr {c} vs {expected}");
        let noise: Vec<f64> = d.column(1).iter().zip(&sq).map(|(y, s)| y - s).collect();
        assert!(pearson(&r, &noise).unwrap() > 0.6);
    }

    #[test]
    fn nothing_to_orient_is_identity() {
        let d = quad_pair(8, 200);
        let g0 = Pdag::from_edges(2, &[(0, 1)], &[]).unwrap();
        let st = nncl_orient(&d, &g0, &NnclConfig::default(), &Sequential).unwrap();
        assert_eq!(st.graph, g0);
        assert!(st.candidates.is_empty());
    }

    #[test]
    fn invalid_start_rejected() {
        let d = quad_pair(9, 50);
        let mut g = Pdag::from_edges(2, &[(0, 1)], &[]).unwrap();
        g.remove(0, 1);
        g.add_directed(0, 1).unwrap();
        assert!(NnclState::new(g, &d).is_ok());
        assert!(matches!(NnclState::new(Pdag::new(3), &d), Err(Error::NodeCountMismatch(3, 2))));
        let d3 = Dataset::from_columns(vec![vec![0.0; 5]; 3]).unwrap();
        let cyc = Pdag::from_edges(3, &[(0, 1), (1, 2), (2, 0)], &[]).unwrap();
        assert!(matches!(NnclState::new(cyc, &d3), Err(Error::Cyclic)));
    }

    #[test]
    fn outside_search_finds_missed_quadratic() {
        let d = quad_pair(10, 1000);
        let st = outside_search(&d, &Pdag::new(2), &NnclConfig::default(), &Sequential).unwrap();
        assert!(st.graph.has_directed(0, 1));
        assert_eq!(st.candidates.len(), 1);
        assert_eq!(st.candidates[0].stage, Stage::Outside);
    }
}
