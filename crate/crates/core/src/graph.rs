//! Partially directed graphs over dense node indices.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Empty,
    /// Row node points at column node.
    Out,
    /// Column node points at row node.
    In,
    Undirected,
}

/// Mark of an edge as listed by [`Pdag::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mark {
    Directed,
    Undirected,
}

/// One edge. For undirected edges `from < to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub mark: Mark,
    pub nonlinear: bool,
}

/// Partially directed graph: at most one edge per unordered pair, each either
/// directed or undirected, and a nonlinear flag on directed edges.
///
/// Acyclicity of the directed part is not enforced on construction; callers
/// that need it check with [`Pdag::is_acyclic`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pdag {
    p: usize,
    cells: Vec<Cell>,
    nonlinear: Vec<bool>,
}

impl Pdag {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            cells: vec![Cell::Empty; p * p],
            nonlinear: vec![false; p * p],
        }
    }

    /// Builds a graph from directed and undirected edge lists.
    pub fn from_edges(p: usize, directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(p);
        for &(i, j) in directed {
            g.add_directed(i, j)?;
        }
        for &(i, j) in undirected {
            g.add_undirected(i, j)?;
        }
        Ok(g)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.p + j]
    }

    fn set(&mut self, i: usize, j: usize, c: Cell) {
        let back = match c {
            Cell::Out => Cell::In,
            Cell::In => Cell::Out,
            other => other,
        };
        self.cells[i * self.p + j] = c;
        self.cells[j * self.p + i] = back;
        self.nonlinear[i * self.p + j] = false;
        self.nonlinear[j * self.p + i] = false;
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        for index in [i, j] {
            if index >= self.p {
                return Err(Error::NodeOutOfRange { index, p: self.p });
            }
        }
        if i == j {
            return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
        }
        Ok(())
    }

    fn check_new_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_pair(i, j)?;
        if self.is_adjacent(i, j) {
            return Err(Error::InvalidGraph(format!("duplicate edge between {i} and {j}")));
        }
        Ok(())
    }

    /// Adds `i -> j`. Fails if the pair is already adjacent.
    pub fn add_directed(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_new_pair(i, j)?;
        self.set(i, j, Cell::Out);
        Ok(())
    }

    /// Adds `i -- j`. Fails if the pair is already adjacent.
    pub fn add_undirected(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_new_pair(i, j)?;
        self.set(i, j, Cell::Undirected);
        Ok(())
    }

    /// Sets the edge between `i` and `j` to `i -> j`, adding it if absent.
    /// Clears the nonlinear flag.
    pub fn orient(&mut self, i: usize, j: usize) {
        self.set(i, j, Cell::Out);
    }

    /// Sets the edge between `i` and `j` to undirected, adding it if absent.
    pub fn unorient(&mut self, i: usize, j: usize) {
        self.set(i, j, Cell::Undirected);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.set(i, j, Cell::Empty);
    }

    /// Flags the directed edge `i -> j` as nonlinear.
    pub fn set_nonlinear(&mut self, i: usize, j: usize, flag: bool) -> Result<()> {
        self.check_pair(i, j)?;
        if !self.has_directed(i, j) {
            return Err(Error::InvalidGraph(format!("no directed edge {i} -> {j} to flag")));
        }
        self.nonlinear[i * self.p + j] = flag;
        Ok(())
    }

    pub fn is_nonlinear(&self, i: usize, j: usize) -> bool {
        self.nonlinear[i * self.p + j]
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.cell(i, j) != Cell::Empty
    }

    pub fn has_directed(&self, i: usize, j: usize) -> bool {
        self.cell(i, j) == Cell::Out
    }

    pub fn has_undirected(&self, i: usize, j: usize) -> bool {
        self.cell(i, j) == Cell::Undirected
    }

    /// Nodes `j` with `j -> i`.
    pub fn parents(&self, i: usize) -> Result<Vec<usize>> {
        if i >= self.p {
            return Err(Error::NodeOutOfRange { index: i, p: self.p });
        }
        Ok(self.parents_of(i))
    }

    pub(crate) fn parents_of(&self, i: usize) -> Vec<usize> {
        (0..self.p).filter(|&j| self.cell(i, j) == Cell::In).collect()
    }

    /// Nodes `j` with `i -> j`.
    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.p).filter(|&j| self.cell(i, j) == Cell::Out).collect()
    }

    /// Nodes joined to `i` by an undirected edge.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.p).filter(|&j| self.cell(i, j) == Cell::Undirected).collect()
    }

    /// Every node adjacent to `i`, whatever the mark.
    pub fn adjacent(&self, i: usize) -> Vec<usize> {
        (0..self.p).filter(|&j| self.cell(i, j) != Cell::Empty).collect()
    }

    /// Undirected edges as `(i, j)` with `i < j`, ascending.
    pub fn undirected_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in i + 1..self.p {
                if self.cell(i, j) == Cell::Undirected {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Directed edges `(from, to)` in ascending order.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in 0..self.p {
                if self.cell(i, j) == Cell::Out {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// All edges, one entry per adjacent pair, ordered by the smaller endpoint.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in i + 1..self.p {
                let edge = match self.cell(i, j) {
                    Cell::Empty => continue,
                    Cell::Out => Edge { from: i, to: j, mark: Mark::Directed, nonlinear: self.is_nonlinear(i, j) },
                    Cell::In => Edge { from: j, to: i, mark: Mark::Directed, nonlinear: self.is_nonlinear(j, i) },
                    Cell::Undirected => Edge { from: i, to: j, mark: Mark::Undirected, nonlinear: false },
                };
                out.push(edge);
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.cells.iter().filter(|c| **c != Cell::Empty).count() / 2
    }

    /// Unordered adjacent pairs `(i, j)`, `i < j`.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        self.edges().into_iter().map(|e| (e.from.min(e.to), e.from.max(e.to))).collect()
    }

    /// Whether `j` reaches `i` along directed edges, i.e. adding `i -> j`
    /// would close a directed cycle. Undirected edges carry no reachability.
    pub fn creates_cycle(&self, i: usize, j: usize) -> bool {
        self.reaches(j, i)
    }

    /// Directed-path reachability from `src` to `dst` (a node reaches itself).
    pub fn reaches(&self, src: usize, dst: usize) -> bool {
        let mut seen = vec![false; self.p];
        let mut stack = vec![src];
        seen[src] = true;
        while let Some(u) = stack.pop() {
            if u == dst {
                return true;
            }
            for v in 0..self.p {
                if !seen[v] && self.cell(u, v) == Cell::Out {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    /// Kahn topological sort of the directed part; `None` when cyclic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.p).map(|i| self.parents_of(i).len()).collect();
        let mut queue: VecDeque<usize> = (0..self.p).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.p);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for v in self.children(u) {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        (order.len() == self.p).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    pub fn is_fully_directed(&self) -> bool {
        !self.cells.contains(&Cell::Undirected)
    }

    /// Unshielded colliders `a -> c <- b` with `a < b` and `a`, `b` non-adjacent.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.p {
            let pa = self.parents_of(c);
            for (k, &a) in pa.iter().enumerate() {
                for &b in &pa[k + 1..] {
                    if !self.is_adjacent(a, b) {
                        out.push((a, c, b));
                    }
                }
            }
        }
        out
    }

    /// Relabels nodes: node `i` of `self` becomes node `map[i]` of the result.
    pub fn relabel(&self, map: &[usize]) -> Self {
        let mut g = Self::new(self.p);
        for e in self.edges() {
            let (a, b) = (map[e.from], map[e.to]);
            match e.mark {
                Mark::Directed => {
                    g.orient(a, b);
                    g.nonlinear[a * self.p + b] = e.nonlinear;
                }
                Mark::Undirected => g.unorient(a, b),
            }
        }
        g
    }

    /// Copy with every edge made undirected.
    pub fn skeleton_graph(&self) -> Self {
        let mut g = Self::new(self.p);
        for (i, j) in self.skeleton() {
            g.unorient(i, j);
        }
        g
    }
}
