#![allow(dead_code)]

use nncl_core::pc::{CiDecision, CiTester};
use nncl_core::{Pdag, Result};
use nncl_oracles::{d_separated, Mixed};

pub fn to_mixed(g: &Pdag) -> Mixed {
    Mixed { p: g.p(), directed: g.directed_edges().into_iter().collect(), undirected: g.undirected_pairs().into_iter().collect() }
}

pub fn from_mixed(m: &Mixed) -> Pdag {
    let d: Vec<_> = m.directed.iter().copied().collect();
    let u: Vec<_> = m.undirected.iter().copied().collect();
    Pdag::from_edges(m.p, &d, &u).unwrap()
}

/// Answers CI queries by d-separation in a known DAG.
pub struct Dsep(pub Mixed);

impl CiTester for Dsep {
    fn test(&mut self, i: usize, j: usize, s: &[usize]) -> Result<CiDecision> {
        let independent = d_separated(&self.0, i, j, s);
        Ok(CiDecision { independent, p_value: if independent { 1.0 } else { 0.0 } })
    }
}
