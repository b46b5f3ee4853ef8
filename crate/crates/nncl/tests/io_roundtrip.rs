use nncl::io::{parse_edge_list, read_csv, write_csv, write_edge_list, NamedGraph};
use nncl_core::{Dataset, Pdag};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..5, 1usize..20).prop_flat_map(|(p, n)| {
        let col = prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, n);
        prop::collection::vec(col, p).prop_map(move |cols| {
            let names = (0..p).map(|i| format!("v{i}")).collect();
            Dataset::new(names, cols).unwrap()
        })
    })
}

// Upper-triangular edges keep every draw acyclic.
fn graph() -> impl Strategy<Value = NamedGraph> {
    (1usize..7).prop_flat_map(|p| {
        let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
        prop::collection::vec(0u8..5, pairs.len()).prop_map(move |kinds| {
            let mut g = Pdag::new(p);
            for (&(i, j), k) in pairs.iter().zip(kinds) {
                match k {
                    1 => g.add_undirected(i, j).unwrap(),
                    2 => g.add_directed(i, j).unwrap(),
                    3 => {
                        g.add_directed(i, j).unwrap();
                        g.set_nonlinear(i, j, true).unwrap();
                    }
                    _ => {}
                }
            }
            NamedGraph { names: (0..p).map(|i| format!("n{i}")).collect(), graph: g }
        })
    })
}

proptest! {
    #[test]
    fn csv_roundtrip_is_exact(d in dataset()) {
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn edge_list_roundtrip(g in graph()) {
        let text = write_edge_list(&g);
        prop_assert_eq!(&parse_edge_list(&text, None).unwrap(), &g);
        prop_assert_eq!(&parse_edge_list(&text, Some(&g.names)).unwrap(), &g);
    }
}

#[test]
fn comments_and_blank_lines() {
    let g = parse_edge_list("# header\n\na -> b [nonlinear]  # note\nb -- c\n", None).unwrap();
    assert_eq!(g.names, ["a", "b", "c"]);
    assert!(g.graph.is_nonlinear(0, 1));
    assert!(g.graph.has_undirected(1, 2));
}

#[test]
fn malformed_inputs() {
    assert!(parse_edge_list("a -- b [nonlinear]\n", None).is_err());
    assert!(parse_edge_list("a => b\n", None).is_err());
    assert!(parse_edge_list("a -> b\nb -> a\n", None).is_err());
    assert!(read_csv("a,b\n1,NaN\n".as_bytes()).is_err());
    assert!(read_csv("a,b\n1\n".as_bytes()).is_err());
}
