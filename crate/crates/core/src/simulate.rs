//! Synthetic data from DAG-structured structural equation models with a mix
//! of linear and nonlinear edges, and the matching ground-truth graphs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use crate::data::Dataset;
use crate::graph::Pdag;
use crate::orient::dag_to_cpdag;
use crate::stats::{sample_normal, RngStream};
use crate::{Error, Result};

/// Function family of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Family {
    Linear,
    /// `±a x² ± b x`
    TypeI,
    /// `±cos(a x)`
    TypeII,
    /// `±a x³ ± b x²`
    TypeIII,
    /// `±tanh x ± cos(a x) ± x²`
    TypeIV,
}

impl Family {
    pub const NONLINEAR: [Family; 4] = [Family::TypeI, Family::TypeII, Family::TypeIII, Family::TypeIV];
}

/// Edge function with its signs folded into the coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "kebab-case"))]
pub enum EdgeFn {
    Linear { beta: f64 },
    /// `a x² + b x`
    TypeI { a: f64, b: f64 },
    /// `sign · cos(a x)`
    TypeII { sign: f64, a: f64 },
    /// `a x³ + b x²`
    TypeIII { a: f64, b: f64 },
    /// `s1 tanh x + s2 cos(a x) + s3 x²`
    TypeIV { s1: f64, s2: f64, s3: f64, a: f64 },
}

impl EdgeFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            EdgeFn::Linear { beta } => beta * x,
            EdgeFn::TypeI { a, b } => a * x * x + b * x,
            EdgeFn::TypeII { sign, a } => sign * libm::cos(a * x),
            EdgeFn::TypeIII { a, b } => a * x * x * x + b * x * x,
            EdgeFn::TypeIV { s1, s2, s3, a } => s1 * libm::tanh(x) + s2 * libm::cos(a * x) + s3 * x * x,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            EdgeFn::Linear { .. } => Family::Linear,
            EdgeFn::TypeI { .. } => Family::TypeI,
            EdgeFn::TypeII { .. } => Family::TypeII,
            EdgeFn::TypeIII { .. } => Family::TypeIII,
            EdgeFn::TypeIV { .. } => Family::TypeIV,
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        self.family() != Family::Linear
    }

    /// Whether the function is monotone on `[lo, hi]`, judged on a grid of
    /// 2001 points.
    pub fn is_monotone_on(&self, lo: f64, hi: f64) -> bool {
        if self.family() == Family::Linear || !(hi > lo) {
            return true;
        }
        let k = 2000;
        let vals: Vec<f64> = (0..=k).map(|i| self.eval(lo + (hi - lo) * i as f64 / k as f64)).collect();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tol = 1e-12 * scale;
        let up = vals.windows(2).all(|w| w[1] >= w[0] - tol);
        let down = vals.windows(2).all(|w| w[1] <= w[0] + tol);
        up || down
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub f: EdgeFn,
}

/// A structural equation model over a DAG.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SemSpec {
    pub names: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub noise_sd: Vec<f64>,
}

impl SemSpec {
    pub fn new(names: Vec<String>, edges: Vec<EdgeSpec>, noise_sd: Vec<f64>) -> Result<Self> {
        let spec = Self { names, edges, noise_sd };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_sd.len() != self.names.len() {
            return Err(Error::NodeCountMismatch(self.noise_sd.len(), self.names.len()));
        }
        if self.noise_sd.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config("noise sd must be finite and non-negative"));
        }
        let g = self.build_dag()?;
        if !g.is_acyclic() {
            return Err(Error::Cyclic);
        }
        Ok(())
    }

    fn build_dag(&self) -> Result<Pdag> {
        let mut g = Pdag::new(self.names.len());
        for e in &self.edges {
            g.add_directed(e.from, e.to)?;
            g.set_nonlinear(e.from, e.to, e.f.is_nonlinear())?;
        }
        Ok(g)
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    /// The DAG, with nonlinear edges flagged.
    pub fn dag(&self) -> Pdag {
        self.build_dag().expect("validated at construction")
    }

    pub fn nonlinear_edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().filter(|e| e.f.is_nonlinear()).map(|e| (e.from, e.to)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Families drawn uniformly for nonlinear edges.
    pub families: Vec<Family>,
    /// Magnitudes of `a`, `b` and linear coefficients are `Unif(lo, hi)`,
    /// each with an independent random sign.
    pub coef_range: (f64, f64),
    pub noise_sd: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { families: vec![Family::TypeI], coef_range: (0.3, 4.0), noise_sd: 1.0 }
    }
}

fn signed<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let m = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

fn sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Draws a random member of `family`.
pub fn draw_edge_fn<R: Rng>(family: Family, range: (f64, f64), rng: &mut R) -> EdgeFn {
    let (lo, hi) = range;
    match family {
        Family::Linear => EdgeFn::Linear { beta: signed(rng, lo, hi) },
        Family::TypeI => {
            let a = signed(rng, lo, hi);
            EdgeFn::TypeI { a, b: signed(rng, lo, hi) }
        }
        Family::TypeII => {
            let s = sign(rng);
            EdgeFn::TypeII { sign: s, a: rng.random_range(lo..hi) }
        }
        Family::TypeIII => {
            let a = signed(rng, lo, hi);
            EdgeFn::TypeIII { a, b: signed(rng, lo, hi) }
        }
        Family::TypeIV => {
            let (s1, s2, s3) = (sign(rng), sign(rng), sign(rng));
            EdgeFn::TypeIV { s1, s2, s3, a: rng.random_range(lo..hi) }
        }
    }
}

/// Builds a model on `dag` where `round(fraction · |E|)` edges, chosen
/// uniformly without replacement, are nonlinear.
pub fn assign_nonlinear(dag: &Pdag, names: &[String], fraction: f64, cfg: &SimConfig, rng: &RngStream) -> Result<SemSpec> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Config("nonlinear fraction must lie in [0, 1]"));
    }
    if !dag.is_fully_directed() {
        return Err(Error::InvalidGraph("expected a fully directed graph".into()));
    }
    if names.len() != dag.p() {
        return Err(Error::NodeCountMismatch(names.len(), dag.p()));
    }
    if cfg.families.is_empty() && fraction > 0.0 {
        return Err(Error::Config("no nonlinear families configured"));
    }
    let (lo, hi) = cfg.coef_range;
    if !(lo.is_finite() && hi > lo) {
        return Err(Error::Config("coefficient range must satisfy lo < hi"));
    }
    let directed = dag.directed_edges();
    let k = libm::round(fraction * directed.len() as f64) as usize;
    let mut r = rng.rng();
    let mut nonlinear = vec![false; directed.len()];
    for idx in sample(&mut r, directed.len(), k) {
        nonlinear[idx] = true;
    }
    let edges = directed
        .iter()
        .zip(&nonlinear)
        .map(|(&(from, to), &nl)| {
            let family = if nl { cfg.families[r.random_range(0..cfg.families.len())] } else { Family::Linear };
            EdgeSpec { from, to, f: draw_edge_fn(family, cfg.coef_range, &mut r) }
        })
        .collect();
    SemSpec::new(names.to_vec(), edges, vec![cfg.noise_sd; dag.p()])
}

/// Draws `n` samples in topological order. Node `v`'s noise comes from
/// `rng.child(v)`.
pub fn simulate(spec: &SemSpec, n: usize, rng: &RngStream) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("need at least one sample"));
    }
    let dag = spec.dag();
    let order = dag.topological_order().ok_or(Error::Cyclic)?;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); spec.p()];
    for v in order {
        let mut x = if spec.noise_sd[v] > 0.0 { sample_normal(&rng.child(v as u64), 0.0, spec.noise_sd[v], n)? } else { vec![0.0; n] };
        for e in spec.edges.iter().filter(|e| e.to == v) {
            let parent = &cols[e.from];
            for (xi, &pi) in x.iter_mut().zip(parent) {
                *xi += e.f.eval(pi);
            }
        }
        cols[v] = x;
    }
    if cols.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("simulated values overflowed".to_string()));
    }
    Dataset::new(spec.names.clone(), cols)
}

/// Which nonlinear edges count as non-invertible in the ground truth.
#[derive(Debug, Clone, Copy)]
pub enum TruthPolicy<'a> {
    /// Every nonlinear edge.
    AllNonlinear,
    /// Nonlinear edges whose function is non-monotone over the parent's
    /// observed range in the given data.
    NonMonotoneOn(&'a Dataset),
}

/// Restricted CPDAG: the DAG's CPDAG with the non-invertible edges fixed.
pub fn ground_truth(spec: &SemSpec, policy: TruthPolicy<'_>) -> Result<Pdag> {
    let fixed: Vec<(usize, usize)> = match policy {
        TruthPolicy::AllNonlinear => spec.nonlinear_edges(),
        TruthPolicy::NonMonotoneOn(data) => {
            if data.n_vars() != spec.p() {
                return Err(Error::NodeCountMismatch(data.n_vars(), spec.p()));
            }
            spec.edges
                .iter()
                .filter(|e| {
                    let col = data.column(e.from);
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    e.f.is_nonlinear() && !e.f.is_monotone_on(lo, hi)
                })
                .map(|e| (e.from, e.to))
                .collect()
        }
    };
    dag_to_cpdag(&spec.dag(), &fixed)
}

/// A named built-in DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub names: Vec<String>,
    pub dag: Pdag,
}

fn network(names: &[&str], edges: &[(usize, usize)]) -> Network {
    Network {
        names: names.iter().map(|s| s.to_string()).collect(),
        dag: Pdag::from_edges(names.len(), edges, &[]).expect("built-in network is valid"),
    }
}

/// The 8-node, 8-edge Asia network.
pub fn asia() -> Network {
    network(
        &["asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"],
        &[(0, 1), (2, 3), (2, 4), (1, 5), (3, 5), (5, 6), (5, 7), (4, 7)],
    )
}

/// `X1 -> X2 -> … -> Xk`.
pub fn chain(k: usize) -> Network {
    let names: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
    let edges: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
    Network { dag: Pdag::from_edges(k, &edges, &[]).expect("chain is valid"), names }
}

/// `A -> C <- B`.
pub fn collider() -> Network {
    network(&["A", "B", "C"], &[(0, 2), (1, 2)])
}

/// Five nodes: `C -> A -> B -> D`, `C -> E <- D`.
pub fn five_node() -> Network {
    network(&["A", "B", "C", "D", "E"], &[(2, 0), (0, 1), (1, 3), (2, 4), (3, 4)])
}

pub fn builtin(name: &str) -> Option<Network> {
    match name {
        "asia" => Some(asia()),
        "collider" => Some(collider()),
        "five" => Some(five_node()),
        _ => name.strip_prefix("chain").and_then(|k| k.parse().ok()).filter(|&k| k >= 1).map(chain),
    }
}
