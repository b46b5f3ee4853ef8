//! JSON reports. Node references are by name.

use serde::{Deserialize, Serialize};

use nncl_core::bivariate::SplitCi;
use nncl_core::consensus::ConsensusOutput;
use nncl_core::direction::{DirectionTest, Method};
use nncl_core::metrics::GraphScore;
use nncl_core::nncl::{EdgeCandidate, FitSummary, NnclState, Outcome, Provenance, Stage};
use nncl_core::orient::{OrientationLog, Rule};
use nncl_core::piecewise::PiecewiseFit;
use nncl_core::{EdgeKind, EdgeVerdict, Mark, Orientation, Pdag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub mark: Mark,
    pub nonlinear: bool,
}

pub fn edges_json(g: &Pdag, names: &[String]) -> Vec<EdgeJson> {
    g.edges()
        .into_iter()
        .map(|e| EdgeJson { from: names[e.from].clone(), to: names[e.to].clone(), mark: e.mark, nonlinear: e.nonlinear })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub tau: f64,
    pub rbar2: f64,
    pub low: SegmentJson,
    pub high: SegmentJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentJson {
    pub intercept: f64,
    pub slope: f64,
    pub n: usize,
    pub r: f64,
}

impl From<&PiecewiseFit> for FitJson {
    fn from(f: &PiecewiseFit) -> Self {
        let seg = |s: &nncl_core::piecewise::Segment| SegmentJson { intercept: s.intercept, slope: s.slope, n: s.n, r: s.r };
        Self { tau: f.tau, rbar2: f.rbar2, low: seg(&f.low), high: seg(&f.high) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub forward: Option<FitJson>,
    pub backward: Option<FitJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindJson {
    None,
    Directed,
    Undirected,
}

/// Output of `nncl bivariate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub kind: KindJson,
    pub x: String,
    pub y: String,
    pub from: Option<String>,
    pub to: Option<String>,
    pub degenerate: bool,
    pub test: Option<DirectionTest>,
    pub fits: Fits,
}

impl VerdictReport {
    pub fn new(v: &EdgeVerdict, x: &str, y: &str, fits: Fits) -> Self {
        let (kind, from, to) = match v.kind {
            EdgeKind::None => (KindJson::None, None, None),
            EdgeKind::Undirected => (KindJson::Undirected, None, None),
            EdgeKind::Directed(Orientation::Forward) => (KindJson::Directed, Some(x.to_string()), Some(y.to_string())),
            EdgeKind::Directed(Orientation::Backward) => (KindJson::Directed, Some(y.to_string()), Some(x.to_string())),
        };
        Self { kind, x: x.into(), y: y.into(), from, to, degenerate: v.degenerate, test: v.test.clone(), fits }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogJson {
    pub from: String,
    pub to: String,
    pub rule: Rule,
}

pub fn log_json(log: &OrientationLog, names: &[String]) -> Vec<LogJson> {
    log.entries.iter().map(|e| LogJson { from: names[e.from].clone(), to: names[e.to].clone(), rule: e.rule }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceJson {
    pub linear_parents: Vec<String>,
    pub nonlinear_parents: Vec<String>,
}

fn provenance_json(p: &Provenance, names: &[String]) -> ProvenanceJson {
    let map = |v: &[usize]| v.iter().map(|&i| names[i].clone()).collect();
    ProvenanceJson { linear_parents: map(&p.linear_parents), nonlinear_parents: map(&p.nonlinear_parents) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateJson {
    pub stage: Stage,
    pub from: String,
    pub to: String,
    pub outcome: Outcome,
    pub p_value: Option<f64>,
    pub eta_hat: Option<f64>,
    pub tau: Option<f64>,
    pub split: Option<SplitCi>,
    pub parent_residual: ProvenanceJson,
    pub child_residual: ProvenanceJson,
}

fn candidate_json(c: &EdgeCandidate, names: &[String]) -> CandidateJson {
    CandidateJson {
        stage: c.stage,
        from: names[c.from].clone(),
        to: names[c.to].clone(),
        outcome: c.outcome,
        p_value: c.test.as_ref().map(|t| t.p_value),
        eta_hat: c.test.as_ref().map(|t| t.eta_hat).filter(|e| e.is_finite()),
        tau: c.fit.as_ref().map(|f: &FitSummary| f.tau),
        split: c.split,
        parent_residual: provenance_json(&c.parent_residual, names),
        child_residual: provenance_json(&c.child_residual, names),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusJson {
    pub replicates: u64,
    pub dropped: Vec<usize>,
    pub threshold: f64,
    pub weights: Vec<Vec<f64>>,
    pub point_edges: Vec<EdgeJson>,
}

impl ConsensusJson {
    pub fn new(c: &ConsensusOutput, threshold: f64, names: &[String]) -> Self {
        Self {
            replicates: c.weights.replicates(),
            dropped: c.dropped.clone(),
            threshold,
            weights: c.weights.matrix(),
            point_edges: edges_json(&c.point.state.graph, names),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub learner: String,
    pub alpha: f64,
    pub ci_alpha: f64,
    pub pc_alpha: f64,
    pub max_cond: usize,
    pub method: Method,
    pub bootstrap_reps: usize,
    pub normal_draws: usize,
    pub outside_search: bool,
    pub seed: u64,
}

/// Output of `nncl learn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub nodes: Vec<String>,
    pub settings: RunSettings,
    pub initial_edges: Vec<EdgeJson>,
    pub edges: Vec<EdgeJson>,
    pub log: Vec<LogJson>,
    pub candidates: Vec<CandidateJson>,
    pub consensus: Option<ConsensusJson>,
}

impl LearnReport {
    pub fn new(
        names: &[String],
        settings: RunSettings,
        initial: &Pdag,
        state: &NnclState,
        final_graph: &Pdag,
        consensus: Option<ConsensusJson>,
    ) -> Self {
        Self {
            nodes: names.to_vec(),
            settings,
            initial_edges: edges_json(initial, names),
            edges: edges_json(final_graph, names),
            log: log_json(&state.log, names),
            candidates: state.candidates.iter().map(|c| candidate_json(c, names)).collect(),
            consensus,
        }
    }
}

/// Output of `nncl evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub shd: usize,
    pub ji: f64,
    pub tp: usize,
    pub fp: usize,
    pub holdout_loglik: Option<f64>,
}

impl ScoreReport {
    pub fn new(s: GraphScore, holdout_loglik: Option<f64>) -> Self {
        Self { shd: s.shd, ji: s.ji, tp: s.tp, fp: s.fp, holdout_loglik }
    }
}
