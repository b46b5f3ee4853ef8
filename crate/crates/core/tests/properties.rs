use nncl_core::consensus::ConsensusWeights;
use nncl_core::metrics::{jaccard, shd};
use nncl_core::orient::{dag_to_cpdag, meek_close};
use nncl_core::pc::pc_learn;
use nncl_core::simulate::{assign_nonlinear, asia, simulate, SimConfig};
use nncl_core::{Dataset, Pdag, RngStream};
use proptest::prelude::*;

/// Arbitrary PDAG: each pair absent, forward, backward or undirected.
fn pdag(p: usize) -> impl Strategy<Value = Pdag> {
    prop::collection::vec(0u8..4, p * (p - 1) / 2).prop_map(move |marks| {
        let mut g = Pdag::new(p);
        let pairs = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j)));
        for ((i, j), m) in pairs.zip(marks) {
            match m {
                1 => g.orient(i, j),
                2 => g.orient(j, i),
                3 => g.unorient(i, j),
                _ => {}
            }
        }
        g
    })
}

/// Random DAG from an order and a pair mask, with some edges undirected.
fn acyclic_pdag(p: usize) -> impl Strategy<Value = Pdag> {
    (Just(p).prop_shuffle_order(), prop::collection::vec(0u8..3, p * (p - 1) / 2)).prop_map(move |(order, marks)| {
        let mut g = Pdag::new(p);
        let pairs = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j)));
        for ((i, j), m) in pairs.zip(marks) {
            match m {
                1 => g.orient(order[i], order[j]),
                2 => g.unorient(order[i], order[j]),
                _ => {}
            }
        }
        g
    })
}

fn dag(p: usize) -> impl Strategy<Value = Pdag> {
    acyclic_pdag(p).prop_map(|g| {
        let mut d = g.clone();
        for (i, j) in g.undirected_pairs() {
            d.remove(i, j);
        }
        d
    })
}

trait ShuffleOrder {
    fn prop_shuffle_order(self) -> BoxedStrategy<Vec<usize>>;
}

impl ShuffleOrder for Just<usize> {
    fn prop_shuffle_order(self) -> BoxedStrategy<Vec<usize>> {
        let p = self.0;
        Just((0..p).collect::<Vec<usize>>()).prop_shuffle().boxed()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn shd_is_a_metric(a in pdag(5), b in pdag(5), c in pdag(5)) {
        let ab = shd(&a, &b).unwrap();
        prop_assert_eq!(ab, shd(&b, &a).unwrap());
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(shd(&a, &c).unwrap() <= ab + shd(&b, &c).unwrap());
    }

    #[test]
    fn jaccard_bounds_and_symmetry(a in pdag(5), b in pdag(5)) {
        let j = jaccard(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(&b, &a).unwrap());
        prop_assert_eq!(j == 1.0, shd(&a, &b).unwrap() == 0);
        let union = (0..5).flat_map(|i| (i + 1..5).map(move |k| (i, k))).filter(|&(i, k)| a.is_adjacent(i, k) || b.is_adjacent(i, k)).count();
        prop_assert!(shd(&a, &b).unwrap() <= union);
    }

    #[test]
    fn meek_closure_only_orients(g in acyclic_pdag(6)) {
        let c = meek_close(&g).unwrap();
        prop_assert!(c.is_acyclic());
        prop_assert_eq!(c.skeleton(), g.skeleton());
        for (i, j) in g.directed_edges() {
            prop_assert!(c.has_directed(i, j));
        }
    }

    #[test]
    fn meek_closure_idempotent_on_consistent_input(dag in dag(6), fix in prop::collection::vec(any::<bool>(), 15)) {
        let mut g = dag_to_cpdag(&dag, &[]).unwrap();
        for ((i, j), f) in g.undirected_pairs().into_iter().zip(fix) {
            if f {
                if dag.has_directed(i, j) { g.orient(i, j) } else { g.orient(j, i) }
            }
        }
        let c = meek_close(&g).unwrap();
        prop_assert_eq!(meek_close(&c).unwrap(), c.clone());
        for (i, j) in c.directed_edges() {
            prop_assert!(dag.has_directed(i, j));
        }
    }

    #[test]
    fn consensus_weights_are_fractions(gs in prop::collection::vec(pdag(4), 1..20)) {
        let w = ConsensusWeights::from_graphs(4, &gs).unwrap();
        for i in 0..4 {
            prop_assert_eq!(w.weight(i, i), 0.0);
            for j in 0..4 {
                prop_assert!((0.0..=1.0).contains(&w.weight(i, j)));
                prop_assert!(w.weight(i, j) + w.weight(j, i) <= 1.0 + 1e-12);
            }
        }
    }
}

fn asia_data(seed: u64, n: usize) -> Dataset {
    let net = asia();
    let spec = assign_nonlinear(&net.dag, &net.names, 0.0, &SimConfig::default(), &RngStream::from_seed(seed)).unwrap();
    simulate(&spec, n, &RngStream::from_seed(seed + 1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pc_is_order_independent(seed in 0u64..1000, order in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let d = asia_data(seed, 300);
        let g = pc_learn(&d, 0.01, 3).unwrap();
        let h = pc_learn(&d.permute_columns(&order).unwrap(), 0.01, 3).unwrap();
        prop_assert_eq!(h.relabel(&order), g);
    }
}

#[test]
fn simulation_is_reproducible() {
    assert_eq!(asia_data(5, 200), asia_data(5, 200));
    assert_ne!(asia_data(5, 200), asia_data(6, 200));
}
