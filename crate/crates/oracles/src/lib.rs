//! Slow, obviously-correct reference computations for the test suites.
//!
//! Nothing here depends on `nncl-core`; graphs are plain edge sets and all
//! randomness comes from a local splitmix64 generator.

use std::collections::{BTreeSet, VecDeque};

/// Directed plus undirected edges over `p` nodes. Undirected pairs are
/// stored as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mixed {
    pub p: usize,
    pub directed: BTreeSet<(usize, usize)>,
    pub undirected: BTreeSet<(usize, usize)>,
}

impl Mixed {
    pub fn new(p: usize) -> Self {
        Self { p, ..Self::default() }
    }

    pub fn dag(p: usize, edges: &[(usize, usize)]) -> Self {
        Self { p, directed: edges.iter().copied().collect(), undirected: BTreeSet::new() }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.directed.contains(&(a, b)) || self.directed.contains(&(b, a)) || self.undirected.contains(&(a.min(b), a.max(b)))
    }

    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.directed.iter().map(|&(a, b)| (a.min(b), a.max(b))).chain(self.undirected.iter().copied()).collect()
    }
}

/// Acyclicity of the directed edges by Kahn's algorithm.
pub fn is_acyclic(p: usize, edges: &BTreeSet<(usize, usize)>) -> bool {
    let mut indeg = vec![0usize; p];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    let mut queue: VecDeque<usize> = (0..p).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &(a, b) in edges {
            if a == v {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    queue.push_back(b);
                }
            }
        }
    }
    seen == p
}

/// Unshielded colliders `(a, c, b)` with `a < b`.
pub fn v_structures(g: &Mixed) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for &(a, c) in &g.directed {
        for &(b, c2) in &g.directed {
            if c == c2 && a < b && !g.adjacent(a, b) {
                out.insert((a, c, b));
            }
        }
    }
    out
}

/// Every fully directed acyclic orientation of `skeleton`.
pub fn orientations(p: usize, skeleton: &BTreeSet<(usize, usize)>) -> Vec<Mixed> {
    let pairs: Vec<(usize, usize)> = skeleton.iter().copied().collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: BTreeSet<(usize, usize)> =
            pairs.iter().enumerate().map(|(k, &(a, b))| if mask >> k & 1 == 1 { (b, a) } else { (a, b) }).collect();
        if is_acyclic(p, &edges) {
            out.push(Mixed { p, directed: edges, undirected: BTreeSet::new() });
        }
    }
    out
}

/// Every DAG on `p` labelled nodes.
pub fn all_dags(p: usize) -> Vec<Mixed> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    let mut state = vec![0u8; pairs.len()];
    loop {
        let edges: BTreeSet<(usize, usize)> = pairs
            .iter()
            .zip(&state)
            .filter_map(|(&(a, b), &s)| match s {
                1 => Some((a, b)),
                2 => Some((b, a)),
                _ => None,
            })
            .collect();
        if is_acyclic(p, &edges) {
            out.push(Mixed { p, directed: edges, undirected: BTreeSet::new() });
        }
        let Some(k) = state.iter().position(|&s| s < 2) else { return out };
        state[k] += 1;
        for s in &mut state[..k] {
            *s = 0;
        }
    }
}

/// Edges oriented the same way in every member of `members` stay directed;
/// the rest become undirected. All members must share a skeleton.
pub fn common_orientation(p: usize, members: &[Mixed]) -> Mixed {
    let first = &members[0];
    let mut out = Mixed::new(p);
    for &(a, b) in &first.directed {
        if members.iter().all(|m| m.directed.contains(&(a, b))) {
            out.directed.insert((a, b));
        } else {
            out.undirected.insert((a.min(b), a.max(b)));
        }
    }
    out
}

/// The Markov equivalence class of a DAG: all DAGs with its skeleton and
/// v-structures.
pub fn markov_class(dag: &Mixed) -> Vec<Mixed> {
    let vs = v_structures(dag);
    orientations(dag.p, &dag.skeleton()).into_iter().filter(|m| v_structures(m) == vs).collect()
}

/// CPDAG by enumerating the equivalence class.
pub fn cpdag(dag: &Mixed) -> Mixed {
    common_orientation(dag.p, &markov_class(dag))
}

/// Maximal orientation of a PDAG lying inside the class of `dag`: the edges
/// shared by every class member that agrees with the PDAG's directed edges.
pub fn maximal_orientation(pdag: &Mixed, dag: &Mixed) -> Mixed {
    let members: Vec<Mixed> =
        markov_class(dag).into_iter().filter(|m| pdag.directed.iter().all(|e| m.directed.contains(e))).collect();
    common_orientation(pdag.p, &members)
}

/// Fully directed acyclic graphs with the PDAG's skeleton, all its directed
/// edges, and no v-structures besides those already present among its
/// directed edges.
pub fn consistent_extensions(pdag: &Mixed) -> Vec<Mixed> {
    let vs = v_structures(&Mixed { p: pdag.p, directed: pdag.directed.clone(), undirected: pdag.undirected.clone() });
    orientations(pdag.p, &pdag.skeleton())
        .into_iter()
        .filter(|m| pdag.directed.iter().all(|e| m.directed.contains(e)) && v_structures(m) == vs)
        .collect()
}

/// d-separation of `x` and `y` given `z` in a DAG, via the moral graph of
/// the ancestral set.
pub fn d_separated(dag: &Mixed, x: usize, y: usize, z: &[usize]) -> bool {
    let p = dag.p;
    let mut anc = vec![false; p];
    let mut stack: Vec<usize> = z.iter().copied().chain([x, y]).collect();
    while let Some(v) = stack.pop() {
        if !anc[v] {
            anc[v] = true;
            stack.extend(dag.directed.iter().filter(|&&(_, b)| b == v).map(|&(a, _)| a));
        }
    }
    let mut und: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b) in &dag.directed {
        if anc[a] && anc[b] {
            und.insert((a.min(b), a.max(b)));
        }
    }
    for c in 0..p {
        if !anc[c] {
            continue;
        }
        let parents: Vec<usize> = dag.directed.iter().filter(|&&(_, b)| b == c).map(|&(a, _)| a).collect();
        for (i, &a) in parents.iter().enumerate() {
            for &b in &parents[i + 1..] {
                und.insert((a.min(b), a.max(b)));
            }
        }
    }
    let blocked: BTreeSet<usize> = z.iter().copied().collect();
    let mut seen = vec![false; p];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(v) = stack.pop() {
        if v == y {
            return false;
        }
        for &(a, b) in &und {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] && !blocked.contains(&w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

/// splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n.max(1)
    }

    /// Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let (u, v) = (self.uniform(), self.uniform());
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}

/// Random DAG over `p` nodes: a random permutation as causal order, each
/// forward pair joined with probability `density`.
pub fn random_dag(p: usize, density: f64, rng: &mut SplitMix) -> Mixed {
    let mut order: Vec<usize> = (0..p).collect();
    for i in (1..p).rev() {
        order.swap(i, rng.below(i + 1));
    }
    let mut g = Mixed::new(p);
    for i in 0..p {
        for j in i + 1..p {
            if rng.uniform() < density {
                g.directed.insert((order[i], order[j]));
            }
        }
    }
    g
}

/// Type-7 sample quantile of unsorted data.
pub fn quantile7(data: &[f64], prob: f64) -> f64 {
    let mut s = data.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (s.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Residual sum of squares and correlation of a simple regression, by the
/// textbook two-pass formulas.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 1e-300 {
        return (syy, 0.0);
    }
    let r = if syy <= 1e-300 { 0.0 } else { sxy / (sxx * syy).sqrt() };
    (syy - sxy * sxy / sxx, r)
}

/// Brute-force two-piece fit: every grid quantile is tried as cut, segments
/// `x <= tau` / `x > tau` must both reach `min_segment`. Returns
/// `(grid index, tau, rbar2)` of the smallest RSS; ties within
/// `1e-12 · total SS` keep the earliest index.
pub fn brute_cut(x: &[f64], y: &[f64], probs: &[f64], min_segment: usize) -> Option<(usize, f64, f64)> {
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for (k, &pr) in probs.iter().enumerate() {
        let tau = quantile7(x, pr);
        let (mut xl, mut yl, mut xh, mut yh) = (vec![], vec![], vec![], vec![]);
        for (&a, &b) in x.iter().zip(y) {
            if a <= tau {
                xl.push(a);
                yl.push(b);
            } else {
                xh.push(a);
                yh.push(b);
            }
        }
        if xl.len() < min_segment || xh.len() < min_segment {
            continue;
        }
        let (rl, cl) = line_fit(&xl, &yl);
        let (rh, ch) = line_fit(&xh, &yh);
        let rss = rl + rh;
        let rbar2 = (xl.len() as f64 * cl * cl + xh.len() as f64 * ch * ch) / x.len() as f64;
        match best {
            Some((_, _, _, b)) if rss >= b - 1e-12 * tss => {}
            _ => best = Some((k, tau, rbar2, rss)),
        }
    }
    best.map(|(k, t, r, _)| (k, t, r))
}

/// Monte Carlo tail probability of the normal-approximation null, with its
/// own generator: `(1 + #{η₀ >= eta_hat}) / (draws + 1)` where each draw
/// samples `z ~ N(artanh ρ, 1/(n-3))` for four segments `(n, ρ)`.
pub fn normal_null_mc(segs: [(usize, f64); 4], eta_hat: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = SplitMix(seed);
    let mut exceed = 0;
    for _ in 0..draws {
        let r: Vec<f64> =
            segs.iter().map(|&(n, rho)| (rho.atanh() + rng.normal() / ((n - 3) as f64).sqrt()).tanh()).collect();
        let score = |a: usize, b: usize| {
            let (na, nb) = (segs[a].0 as f64, segs[b].0 as f64);
            (na * r[a] * r[a] + nb * r[b] * r[b]) / (na + nb)
        };
        let (s1, s2) = (score(0, 1), score(2, 3));
        let eta0 = if s1 > 0.0 && s2 > 0.0 { (s1 / s2).max(s2 / s1) } else { f64::INFINITY };
        if eta0 >= eta_hat {
            exceed += 1;
        }
    }
    (1 + exceed) as f64 / (draws + 1) as f64
}

/// Kolmogorov–Smirnov distance of a sample to Unif(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &u)| {
            let u = u.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - u).max(u - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Pearson correlation, two-pass.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    line_fit(x, y).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dag_counts() {
        // OEIS A003024
        let counts: Vec<usize> = (1..=4).map(|p| all_dags(p).len()).collect();
        assert_eq!(counts, vec![1, 3, 25, 543]);
    }

    #[test]
    fn collider_and_chain_classes() {
        let chain = Mixed::dag(3, &[(0, 1), (1, 2)]);
        assert_eq!(markov_class(&chain).len(), 3);
        assert!(cpdag(&chain).directed.is_empty());
        let coll = Mixed::dag(3, &[(0, 2), (1, 2)]);
        assert_eq!(cpdag(&coll).directed, coll.directed);
    }

    #[test]
    fn dsep_basics() {
        let chain = Mixed::dag(3, &[(0, 1), (1, 2)]);
        assert!(!d_separated(&chain, 0, 2, &[]));
        assert!(d_separated(&chain, 0, 2, &[1]));
        let coll = Mixed::dag(3, &[(0, 2), (1, 2)]);
        assert!(d_separated(&coll, 0, 1, &[]));
        assert!(!d_separated(&coll, 0, 1, &[2]));
        // conditioning on a descendant of the collider also opens it
        let desc = Mixed::dag(4, &[(0, 2), (1, 2), (2, 3)]);
        assert!(!d_separated(&desc, 0, 1, &[3]));
    }

    #[test]
    fn quantile_and_ks() {
        assert_eq!(quantile7(&[3.0, 1.0, 2.0, 4.0], 0.5), 2.5);
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!(ks_uniform(&grid) <= 0.005 + 1e-12);
    }

    #[test]
    fn box_muller_moments() {
        let mut r = SplitMix(5);
        let xs: Vec<f64> = (0..100_000).map(|_| r.normal()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 0.01 && (v - 1.0).abs() < 0.02);
    }
}
