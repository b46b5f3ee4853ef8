//! Orientation machinery: Meek's rules, CPDAG construction and DAG
//! extension of partially directed graphs.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Pdag;
use crate::{Error, Result};

/// Why an edge received its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Rule {
    Meek1,
    Meek2,
    Meek3,
    Meek4,
    VStructure,
    /// Orientation supplied from outside (white list).
    Fixed,
    /// Non-invertible edge committed by the learner.
    Commit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEntry {
    pub from: usize,
    pub to: usize,
    pub rule: Rule,
}

/// Ordered record of every orientation applied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrientationLog {
    pub entries: Vec<LogEntry>,
}

impl OrientationLog {
    pub fn push(&mut self, from: usize, to: usize, rule: Rule) {
        self.entries.push(LogEntry { from, to, rule });
    }

    pub fn extend(&mut self, other: OrientationLog) {
        self.entries.extend(other.entries);
    }

    /// Applies every logged orientation to `g` in order.
    pub fn replay(&self, g: &Pdag) -> Pdag {
        let mut out = g.clone();
        for e in &self.entries {
            out.orient(e.from, e.to);
        }
        out
    }
}

fn rule_applies(g: &Pdag, rule: Rule, a: usize, b: usize) -> bool {
    let p = g.p();
    match rule {
        // c -> a, a -- b, c and b non-adjacent
        Rule::Meek1 => (0..p).any(|c| g.has_directed(c, a) && c != b && !g.is_adjacent(c, b)),
        // a -> c -> b
        Rule::Meek2 => (0..p).any(|c| g.has_directed(a, c) && g.has_directed(c, b)),
        // a -- c -> b, a -- d -> b, c and d non-adjacent
        Rule::Meek3 => {
            let mids: Vec<usize> = (0..p).filter(|&c| g.has_undirected(a, c) && g.has_directed(c, b)).collect();
            mids.iter().enumerate().any(|(k, &c)| mids[k + 1..].iter().any(|&d| !g.is_adjacent(c, d)))
        }
        // a -- c -> d -> b, c and b non-adjacent, a adjacent to d
        Rule::Meek4 => (0..p).any(|c| {
            c != b
                && g.has_undirected(a, c)
                && !g.is_adjacent(c, b)
                && (0..p).any(|d| g.has_directed(c, d) && g.has_directed(d, b) && g.is_adjacent(a, d))
        }),
        _ => false,
    }
}

/// Applies Meek's four rules until none fires. Returns the closed graph and
/// the orientations applied, in order.
///
/// Each pass evaluates every rule on every undirected edge of the current
/// graph and applies all conclusions at once, so the result does not depend
/// on node labels. On an inconsistent input an edge can be concluded in both
/// directions, or a batch can close a directed cycle; such edges are left
/// undirected for the rest of the closure.
pub fn meek_close_logged(g: &Pdag) -> Result<(Pdag, OrientationLog)> {
    if !g.is_acyclic() {
        return Err(Error::Cyclic);
    }
    let p = g.p();
    let mut out = g.clone();
    let mut log = OrientationLog::default();
    let mut frozen = vec![false; p * p];
    loop {
        let mut batch: Vec<(usize, usize, Rule)> = Vec::new();
        for (i, j) in out.undirected_pairs() {
            if frozen[i * p + j] {
                continue;
            }
            let fires = |a: usize, b: usize| {
                [Rule::Meek1, Rule::Meek2, Rule::Meek3, Rule::Meek4].into_iter().find(|&r| rule_applies(&out, r, a, b))
            };
            match (fires(i, j), fires(j, i)) {
                (Some(r), None) => batch.push((i, j, r)),
                (None, Some(r)) => batch.push((j, i, r)),
                (Some(_), Some(_)) => frozen[i * p + j] = true,
                (None, None) => {}
            }
        }
        if batch.is_empty() {
            return Ok((out, log));
        }
        batch.sort_by_key(|&(a, b, r)| (r, a.min(b), a.max(b)));
        for &(a, b, _) in &batch {
            out.orient(a, b);
        }
        let on_cycle: Vec<(usize, usize)> =
            batch.iter().filter(|&&(a, b, _)| out.reaches(b, a)).map(|&(a, b, _)| (a, b)).collect();
        for &(a, b) in &on_cycle {
            out.unorient(a, b);
            frozen[a.min(b) * p + a.max(b)] = true;
        }
        for (a, b, r) in batch {
            if !on_cycle.contains(&(a, b)) {
                log.push(a, b, r);
            }
        }
    }
}

/// [`meek_close_logged`] without the log.
pub fn meek_close(g: &Pdag) -> Result<Pdag> {
    Ok(meek_close_logged(g)?.0)
}

/// CPDAG of a DAG's Markov equivalence class, or with `fixed` edges kept
/// oriented, the restricted CPDAG. Nonlinear flags of fixed edges carry over.
pub fn dag_to_cpdag(g: &Pdag, fixed: &[(usize, usize)]) -> Result<Pdag> {
    if !g.is_fully_directed() {
        return Err(Error::InvalidGraph("expected a fully directed graph".into()));
    }
    if !g.is_acyclic() {
        return Err(Error::Cyclic);
    }
    let mut out = g.skeleton_graph();
    for (a, c, b) in g.v_structures() {
        out.orient(a, c);
        out.orient(b, c);
    }
    for &(i, j) in fixed {
        if i >= g.p() || j >= g.p() || !g.has_directed(i, j) {
            return Err(Error::InvalidGraph(alloc::format!("fixed edge {i} -> {j} is not in the DAG")));
        }
        out.orient(i, j);
    }
    let mut out = meek_close(&out)?;
    for &(i, j) in fixed {
        out.set_nonlinear(i, j, g.is_nonlinear(i, j))?;
    }
    Ok(out)
}

/// Extends a PDAG to a DAG in its class: orients every undirected edge
/// without creating directed cycles or new v-structures (Dor and Tarsi's
/// sink-removal procedure, lowest-index admissible sink first). Existing
/// directed edges and their flags are kept.
pub fn pdag_to_dag(g: &Pdag) -> Result<Pdag> {
    extend(g, false)
}

/// Like [`pdag_to_dag`], but never fails on an acyclic input. When no
/// admissible sink is left, the lowest-index node without directed
/// out-edges among the remaining nodes is taken instead, which may add
/// v-structures. Finite-sample PC output often needs this.
pub fn pdag_to_dag_lenient(g: &Pdag) -> Result<Pdag> {
    extend(g, true)
}

fn extend(g: &Pdag, lenient: bool) -> Result<Pdag> {
    if !g.is_acyclic() {
        return Err(Error::Inextensible);
    }
    let p = g.p();
    let mut out = g.clone();
    let mut alive = vec![true; p];
    for _ in 0..p {
        let no_out = |x: usize| alive[x] && !(0..p).any(|y| alive[y] && g.has_directed(x, y));
        let sink = (0..p).find(|&x| {
            no_out(x) && {
                let adj: Vec<usize> = (0..p).filter(|&y| alive[y] && g.is_adjacent(x, y)).collect();
                adj.iter()
                    .filter(|&&y| g.has_undirected(x, y))
                    .all(|&y| adj.iter().all(|&z| z == y || g.is_adjacent(y, z)))
            }
        });
        let sink = match sink {
            None if lenient => (0..p).find(|&x| no_out(x)),
            s => s,
        };
        let x = sink.ok_or(Error::Inextensible)?;
        for y in 0..p {
            if alive[y] && g.has_undirected(x, y) {
                out.orient(y, x);
            }
        }
        alive[x] = false;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Five-node class:
    // chain C - A - B - D plus the v-structure C -> E <- D.
    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;
    const E: usize = 4;

    fn example_dag() -> Pdag {
        Pdag::from_edges(5, &[(C, A), (A, B), (B, D), (C, E), (D, E)], &[]).unwrap()
    }

    #[test]
    fn cpdag_of_example() {
        let cpdag = dag_to_cpdag(&example_dag(), &[]).unwrap();
        assert_eq!(cpdag.undirected_pairs(), vec![(A, B), (A, C), (B, D)]);
        assert_eq!(cpdag.directed_edges(), vec![(C, E), (D, E)]);
    }

    #[test]
    fn fixing_a_to_b_orients_b_to_d() {
        let cpdag = dag_to_cpdag(&example_dag(), &[]).unwrap();
        let mut g = cpdag.clone();
        g.orient(A, B);
        let (closed, log) = meek_close_logged(&g).unwrap();
        assert!(closed.has_directed(B, D));
        assert!(closed.has_undirected(A, C));
        assert_eq!(log.entries, vec![LogEntry { from: B, to: D, rule: Rule::Meek1 }]);
        assert_eq!(log.replay(&g), closed);
        assert_eq!(dag_to_cpdag(&example_dag(), &[(A, B)]).unwrap(), closed);
    }

    #[test]
    fn chain_and_collider() {
        let chain = Pdag::from_edges(3, &[(0, 1), (1, 2)], &[]).unwrap();
        let c = dag_to_cpdag(&chain, &[]).unwrap();
        assert_eq!(c.undirected_pairs(), vec![(0, 1), (1, 2)]);
        let collider = Pdag::from_edges(3, &[(0, 2), (1, 2)], &[]).unwrap();
        assert_eq!(dag_to_cpdag(&collider, &[]).unwrap(), collider);
        assert!(dag_to_cpdag(&chain, &[(1, 0)]).is_err());
    }

    #[test]
    fn fully_directed_is_a_fixpoint() {
        let g = example_dag();
        assert_eq!(meek_close(&g).unwrap(), g);
        assert_eq!(pdag_to_dag(&g).unwrap(), g);
    }

    #[test]
    fn cyclic_input_rejected() {
        let g = Pdag::from_edges(3, &[(0, 1), (1, 2), (2, 0)], &[]).unwrap();
        assert_eq!(meek_close(&g), Err(Error::Cyclic));
        assert_eq!(pdag_to_dag(&g), Err(Error::Inextensible));
    }

    #[test]
    fn triangle_extension() {
        let g = Pdag::from_edges(3, &[], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = pdag_to_dag(&g).unwrap();
        assert!(d.is_fully_directed() && d.is_acyclic());
        assert!(d.v_structures().is_empty());
    }

    #[test]
    fn inextensible_cycle_of_four() {
        // undirected 4-cycle: every orientation adds a v-structure or a cycle
        let g = Pdag::from_edges(4, &[], &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(pdag_to_dag(&g), Err(Error::Inextensible));
        let d = pdag_to_dag_lenient(&g).unwrap();
        assert!(d.is_fully_directed() && d.is_acyclic());
        assert_eq!(d.directed_edges().len(), 4);
    }
}
