//! Bootstrap consensus: rerun the pipeline on resampled rows and keep the
//! edges of the point estimate that recur often enough.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::data::Dataset;
use crate::exec::{Executor, Sequential};
use crate::graph::Pdag;
use crate::nncl::{run_pipeline, PipelineConfig, PipelineOutput};
use crate::stats::RngStream;
use crate::{Error, Result};

/// Edge frequencies over replicate graphs. A directed `i -> j` counts 1
/// toward `w[i][j]`; an undirected `i -- j` counts ½ toward both `w[i][j]`
/// and `w[j][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusWeights {
    p: usize,
    /// Twice the raw counts, so that half-edges stay integral.
    halves: Vec<u64>,
    replicates: u64,
}

impl ConsensusWeights {
    pub fn new(p: usize) -> Self {
        Self { p, halves: vec![0; p * p], replicates: 0 }
    }

    pub fn from_graphs(p: usize, graphs: &[Pdag]) -> Result<Self> {
        let mut w = Self::new(p);
        for g in graphs {
            w.add(g)?;
        }
        Ok(w)
    }

    pub fn add(&mut self, g: &Pdag) -> Result<()> {
        if g.p() != self.p {
            return Err(Error::NodeCountMismatch(g.p(), self.p));
        }
        for (i, j) in g.directed_edges() {
            self.halves[i * self.p + j] += 2;
        }
        for (i, j) in g.undirected_pairs() {
            self.halves[i * self.p + j] += 1;
            self.halves[j * self.p + i] += 1;
        }
        self.replicates += 1;
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn replicates(&self) -> u64 {
        self.replicates
    }

    /// `w[i][j]`, a fraction of the replicates.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if self.replicates == 0 {
            return 0.0;
        }
        self.halves[i * self.p + j] as f64 / (2 * self.replicates) as f64
    }

    /// Row-major `p × p` matrix of weights.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.p).map(|i| (0..self.p).map(|j| self.weight(i, j)).collect()).collect()
    }

    fn clears(&self, halves: u64, threshold: f64) -> bool {
        halves as f64 >= threshold * (2 * self.replicates) as f64 - 1e-9
    }

    /// Filters `point`: a directed `i -> j` is kept if `w[i][j]` reaches the
    /// threshold, demoted to undirected if only `w[i][j] + w[j][i]` does, and
    /// deleted otherwise; an undirected edge is kept if the sum reaches it.
    pub fn filter(&self, point: &Pdag, threshold: f64) -> Result<Pdag> {
        if point.p() != self.p {
            return Err(Error::NodeCountMismatch(point.p(), self.p));
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::Config("threshold must lie in (0, 1]"));
        }
        if self.replicates == 0 {
            return Err(Error::Config("no replicates accumulated"));
        }
        let p = self.p;
        let mut out = Pdag::new(p);
        for (i, j) in point.directed_edges() {
            let one = self.halves[i * p + j];
            let both = one + self.halves[j * p + i];
            if self.clears(one, threshold) {
                out.add_directed(i, j)?;
                out.set_nonlinear(i, j, point.is_nonlinear(i, j))?;
            } else if self.clears(both, threshold) {
                out.add_undirected(i, j)?;
            }
        }
        for (i, j) in point.undirected_pairs() {
            if self.clears(self.halves[i * p + j] + self.halves[j * p + i], threshold) {
                out.add_undirected(i, j)?;
            }
        }
        Ok(out)
    }
}

/// Row indices of bootstrap replicate `b`.
pub fn bootstrap_rows(n: usize, rng: &RngStream) -> Vec<usize> {
    let mut r = rng.rng();
    (0..n).map(|_| r.random_range(0..n)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOutput {
    pub point: PipelineOutput,
    pub weights: ConsensusWeights,
    pub graph: Pdag,
    /// Replicates whose pipeline failed, by index.
    pub dropped: Vec<usize>,
}

/// Runs the pipeline on the full data and on `replicates` bootstrap
/// resamples, then filters the full-data graph by the replicate weights.
/// Replicate `b` resamples with `rng.child(b)` and seeds its own tests from
/// that stream. Failed replicates are dropped.
pub fn consensus<E: Executor>(
    data: &Dataset,
    cfg: &PipelineConfig,
    replicates: usize,
    threshold: f64,
    rng: &RngStream,
    exec: &E,
) -> Result<ConsensusOutput> {
    if replicates < 2 {
        return Err(Error::Config("consensus needs at least two replicates"));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config("threshold must lie in (0, 1]"));
    }
    let point = run_pipeline(data, cfg, exec)?;
    let runs = exec.map(replicates, |b| {
        let stream = rng.child(b as u64);
        let boot = data.select_rows(&bootstrap_rows(data.n_samples(), &stream))?;
        let mut rcfg = cfg.clone();
        rcfg.nncl.seed = stream.child(0).rng().next_u64();
        run_pipeline(&boot, &rcfg, &Sequential).map(|o| o.state.graph)
    });
    let mut weights = ConsensusWeights::new(data.n_vars());
    let mut dropped = Vec::new();
    for (b, run) in runs.into_iter().enumerate() {
        match run {
            Ok(g) => weights.add(&g)?,
            Err(e) => {
                log::warn!("consensus replicate {b} dropped: {e}");
                dropped.push(b);
            }
        }
    }
    if weights.replicates() < 2 {
        return Err(Error::Config("fewer than two consensus replicates succeeded"));
    }
    let graph = weights.filter(&point.state.graph, threshold)?;
    Ok(ConsensusOutput { point, weights, graph, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repeat(g: &Pdag, k: usize) -> Vec<Pdag> {
        vec![g.clone(); k]
    }

    #[test]
    fn identical_replicates_reproduce_point() {
        let mut g = Pdag::from_edges(3, &[(0, 1)], &[(1, 2)]).unwrap();
        g.set_nonlinear(0, 1, true).unwrap();
        let w = ConsensusWeights::from_graphs(3, &repeat(&g, 5)).unwrap();
        assert_eq!(w.filter(&g, 1.0).unwrap(), g);
        assert_eq!(w.weight(1, 2), 0.5);
        assert_eq!(w.weight(2, 1), 0.5);
        assert_eq!(w.weight(0, 1), 1.0);
    }

    #[test]
    fn keep_demote_delete() {
        let point = Pdag::from_edges(2, &[(0, 1)], &[]).unwrap();
        let fwd = point.clone();
        let back = Pdag::from_edges(2, &[(1, 0)], &[]).unwrap();
        let none = Pdag::new(2);

        let mut gs = repeat(&fwd, 70);
        gs.extend(repeat(&none, 30));
        let w = ConsensusWeights::from_graphs(2, &gs).unwrap();
        assert_eq!(w.filter(&point, 0.6).unwrap(), point);

        let mut gs = repeat(&fwd, 30);
        gs.extend(repeat(&back, 35));
        gs.extend(repeat(&none, 35));
        let w = ConsensusWeights::from_graphs(2, &gs).unwrap();
        assert_eq!(w.filter(&point, 0.6).unwrap(), Pdag::from_edges(2, &[], &[(0, 1)]).unwrap());

        let mut gs = repeat(&fwd, 30);
        gs.extend(repeat(&none, 70));
        let w = ConsensusWeights::from_graphs(2, &gs).unwrap();
        assert_eq!(w.filter(&point, 0.6).unwrap(), none);
    }

    #[test]
    fn exact_threshold_boundary() {
        let point = Pdag::from_edges(2, &[(0, 1)], &[]).unwrap();
        let mut gs = repeat(&point, 60);
        gs.extend(repeat(&Pdag::new(2), 40));
        let w = ConsensusWeights::from_graphs(2, &gs).unwrap();
        assert_eq!(w.filter(&point, 0.6).unwrap(), point);
    }

    #[test]
    fn bad_arguments() {
        let w = ConsensusWeights::new(2);
        assert!(w.filter(&Pdag::new(2), 0.5).is_err());
        assert!(ConsensusWeights::from_graphs(2, &[Pdag::new(3)]).is_err());
        let d = Dataset::from_columns(vec![vec![0.0, 1.0, 2.0, 3.0, 5.0]]).unwrap();
        let s = RngStream::from_seed(0);
        assert!(consensus(&d, &PipelineConfig::default(), 1, 0.6, &s, &Sequential).is_err());
        assert!(consensus(&d, &PipelineConfig::default(), 5, 0.0, &s, &Sequential).is_err());
    }
}
