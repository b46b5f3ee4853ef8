mod common;

use common::{from_mixed, to_mixed, Dsep};
use nncl_core::orient::{dag_to_cpdag, meek_close, pdag_to_dag};
use nncl_core::pc::pc_with;
use nncl_oracles::{consistent_extensions, cpdag, maximal_orientation, random_dag, SplitMix};

#[test]
fn cpdag_matches_equivalence_class_enumeration() {
    let mut rng = SplitMix(11);
    for _ in 0..150 {
        let p = 2 + rng.below(4);
        let dag = random_dag(p, 0.3 + 0.5 * rng.uniform(), &mut rng);
        let ours = dag_to_cpdag(&from_mixed(&dag), &[]).unwrap();
        assert_eq!(to_mixed(&ours), cpdag(&dag), "dag {dag:?}");
    }
}

#[test]
fn meek_closure_is_maximal() {
    let mut rng = SplitMix(12);
    for _ in 0..100 {
        let p = 3 + rng.below(3);
        let dag = random_dag(p, 0.5, &mut rng);
        let mut pdag = cpdag(&dag);
        let und: Vec<_> = pdag.undirected.iter().copied().collect();
        for (a, b) in und {
            if rng.uniform() < 0.3 {
                pdag.undirected.remove(&(a, b));
                let e = if dag.directed.contains(&(a, b)) { (a, b) } else { (b, a) };
                pdag.directed.insert(e);
            }
        }
        let closed = meek_close(&from_mixed(&pdag)).unwrap();
        assert_eq!(to_mixed(&closed), maximal_orientation(&pdag, &dag), "pdag {pdag:?}");
    }
}

#[test]
fn extension_is_consistent() {
    let mut rng = SplitMix(13);
    for _ in 0..100 {
        let p = 2 + rng.below(4);
        let dag = random_dag(p, 0.5, &mut rng);
        let c = cpdag(&dag);
        let ext = to_mixed(&pdag_to_dag(&from_mixed(&c)).unwrap());
        assert!(consistent_extensions(&c).contains(&ext));
    }
}

#[test]
fn pc_with_dsep_oracle_recovers_cpdag() {
    let mut rng = SplitMix(14);
    for _ in 0..60 {
        let p = 2 + rng.below(5);
        let dag = random_dag(p, 0.4, &mut rng);
        let g = pc_with(p, &mut Dsep(dag.clone()), p).unwrap();
        assert_eq!(to_mixed(&g), cpdag(&dag), "dag {dag:?}");
    }
}
