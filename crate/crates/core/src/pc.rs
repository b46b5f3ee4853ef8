//! Order-independent ("stable") PC with Fisher-z partial-correlation tests.
//!
//! Within one conditioning-set size all adjacency sets are frozen before any
//! test runs, and removals are committed only after the level completes.
//! Among the separating sets found for a pair, the one with the largest
//! p-value is recorded. V-structures are proposed from all unshielded
//! triples at once; an edge receiving opposite proposals stays undirected.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::graph::Pdag;
use crate::orient::meek_close;
use crate::stats::ci_test;
use crate::{Error, Result};

/// Decision of a conditional independence query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiDecision {
    pub independent: bool,
    pub p_value: f64,
}

/// Source of conditional independence decisions `i ⟂ j | s`.
pub trait CiTester {
    fn test(&mut self, i: usize, j: usize, s: &[usize]) -> Result<CiDecision>;
}

/// Fisher-z partial-correlation tests on a dataset.
pub struct DataCiTester<'a> {
    data: &'a Dataset,
    alpha: f64,
}

impl<'a> DataCiTester<'a> {
    pub fn new(data: &'a Dataset, alpha: f64) -> Self {
        Self { data, alpha }
    }
}

impl CiTester for DataCiTester<'_> {
    fn test(&mut self, i: usize, j: usize, s: &[usize]) -> Result<CiDecision> {
        let z: Vec<&[f64]> = s.iter().map(|&k| self.data.column(k)).collect();
        let out = ci_test(self.data.column(i), self.data.column(j), &z, self.alpha)?;
        Ok(CiDecision { independent: out.independent, p_value: out.p_value })
    }
}

/// Separating sets of removed pairs, keyed by `(i, j)` with `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetTable {
    sets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SepsetTable {
    pub fn get(&self, i: usize, j: usize) -> Option<&[usize]> {
        self.sets.get(&(i.min(j), i.max(j))).map(Vec::as_slice)
    }

    fn insert(&mut self, i: usize, j: usize, s: Vec<usize>) {
        self.sets.insert((i.min(j), i.max(j)), s);
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Calls `f` on every `k`-subset of `items` in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if k > items.len() {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        f(&buf)?;
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + items.len() - k) else {
            return Ok(());
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Skeleton phase with an arbitrary tester over `p` variables.
pub fn skeleton_with<T: CiTester>(p: usize, tester: &mut T, max_cond: usize) -> Result<(Pdag, SepsetTable)> {
    let mut g = Pdag::new(p);
    for i in 0..p {
        for j in i + 1..p {
            g.unorient(i, j);
        }
    }
    let mut sepsets = SepsetTable::default();
    for level in 0..=max_cond {
        let frozen: Vec<Vec<usize>> = (0..p).map(|i| g.adjacent(i)).collect();
        if !frozen.iter().any(|a| a.len() > level) {
            break;
        }
        let mut removals = Vec::new();
        for (i, j) in g.skeleton() {
            let mut best: Option<(Vec<usize>, f64)> = None;
            let mut seen: Vec<Vec<usize>> = Vec::new();
            for (a, b) in [(i, j), (j, i)] {
                let pool: Vec<usize> = frozen[a].iter().copied().filter(|&k| k != b).collect();
                for_each_subset(&pool, level, &mut |s| {
                    if seen.iter().any(|t| t.as_slice() == s) {
                        return Ok(());
                    }
                    seen.push(s.to_vec());
                    let d = tester.test(i, j, s)?;
                    if d.independent && best.as_ref().is_none_or(|(_, p)| d.p_value > *p) {
                        best = Some((s.to_vec(), d.p_value));
                    }
                    Ok(())
                })?;
            }
            if let Some((s, _)) = best {
                removals.push((i, j, s));
            }
        }
        for (i, j, s) in removals {
            g.remove(i, j);
            sepsets.insert(i, j, s);
        }
    }
    Ok((g, sepsets))
}

/// Orients unshielded colliders `i -> k <- j` with `k` outside the sepset of
/// `(i, j)`. Conflicting proposals leave the edge undirected, and edges on a
/// directed cycle created by the proposals are reverted to undirected.
pub fn orient_v_structures(skeleton: &Pdag, sepsets: &SepsetTable) -> Pdag {
    let p = skeleton.p();
    // arrow[a][b]: some triple proposes a -> b
    let mut arrow = vec![vec![false; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            if skeleton.is_adjacent(i, j) {
                continue;
            }
            let sep = sepsets.get(i, j).unwrap_or(&[]);
            for k in 0..p {
                if skeleton.is_adjacent(i, k) && skeleton.is_adjacent(j, k) && !sep.contains(&k) {
                    arrow[i][k] = true;
                    arrow[j][k] = true;
                }
            }
        }
    }
    let mut g = skeleton.clone();
    for a in 0..p {
        for b in 0..p {
            if arrow[a][b] && !arrow[b][a] {
                g.orient(a, b);
            }
        }
    }
    if !g.is_acyclic() {
        let on_cycle: Vec<(usize, usize)> = g.directed_edges().into_iter().filter(|&(a, b)| g.reaches(b, a)).collect();
        for (a, b) in on_cycle {
            g.unorient(a, b);
        }
    }
    g
}

/// Skeleton phase on data.
pub fn skeleton_only(data: &Dataset, alpha: f64, max_cond: usize) -> Result<(Pdag, SepsetTable)> {
    check_inputs(data, alpha, max_cond)?;
    skeleton_with(data.n_vars(), &mut DataCiTester::new(data, alpha), max_cond)
}

/// Full PC with an arbitrary tester: skeleton, v-structures, Meek closure.
pub fn pc_with<T: CiTester>(p: usize, tester: &mut T, max_cond: usize) -> Result<Pdag> {
    let (skel, sepsets) = skeleton_with(p, tester, max_cond)?;
    meek_close(&orient_v_structures(&skel, &sepsets))
}

/// Full PC on data.
pub fn pc_learn(data: &Dataset, alpha: f64, max_cond: usize) -> Result<Pdag> {
    check_inputs(data, alpha, max_cond)?;
    pc_with(data.n_vars(), &mut DataCiTester::new(data, alpha), max_cond)
}

fn check_inputs(data: &Dataset, alpha: f64, max_cond: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config("alpha must lie in (0, 1)"));
    }
    if data.n_samples() <= max_cond + 3 {
        return Err(Error::Config("PC needs more samples than max conditioning size + 3"));
    }
    Ok(())
}
