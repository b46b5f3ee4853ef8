//! CSV datasets and edge-list graphs.
//!
//! Edge lists have one item per line: `A -> B`, `A -- B`, optionally
//! followed by `[nonlinear]` on directed edges, or a bare node name. Text
//! after `#` is a comment; blank lines are skipped.

use std::fmt::Write as _;
use std::io::{Read, Write};

use nncl_core::{Dataset, Pdag};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] nncl_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

/// Reads a header row of variable names followed by numeric rows.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut columns = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| parse_err(line, format!("`{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value `{field}`")));
            }
            columns[k].push(v);
        }
    }
    Ok(Dataset::new(names, columns)?)
}

pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(data.names())?;
    let mut buf = Vec::with_capacity(data.n_vars());
    for row in 0..data.n_samples() {
        buf.clear();
        buf.extend(data.columns().iter().map(|c| c[row].to_string()));
        w.write_record(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// A graph with node names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedGraph {
    pub names: Vec<String>,
    pub graph: Pdag,
}

enum Item {
    Node(String),
    Edge { from: String, to: String, directed: bool, nonlinear: bool },
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && !s.contains(char::is_whitespace) && !s.contains(['#', '[', ']']) && s != "->" && s != "--"
}

fn parse_line(line: usize, raw: &str) -> Result<Option<Item>, FormatError> {
    let text = raw.split('#').next().unwrap_or("").trim();
    if text.is_empty() {
        return Ok(None);
    }
    let (body, nonlinear) = match text.strip_suffix("[nonlinear]") {
        Some(b) => (b.trim_end(), true),
        None => (text, false),
    };
    let tokens: Vec<&str> = body.split_whitespace().collect();
    match tokens.as_slice() {
        [name] if !nonlinear && valid_name(name) => Ok(Some(Item::Node(name.to_string()))),
        [a, op @ ("->" | "--"), b] if valid_name(a) && valid_name(b) => {
            let directed = *op == "->";
            if nonlinear && !directed {
                return Err(parse_err(line, "only directed edges can be nonlinear"));
            }
            Ok(Some(Item::Edge { from: a.to_string(), to: b.to_string(), directed, nonlinear }))
        }
        _ => Err(parse_err(line, format!("cannot parse `{text}`"))),
    }
}

/// Parses an edge list. With `names`, every node must be one of them and the
/// result uses their order; without, nodes are numbered by first appearance.
pub fn parse_edge_list(text: &str, names: Option<&[String]>) -> Result<NamedGraph, FormatError> {
    let mut items = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        if let Some(item) = parse_line(k + 1, raw)? {
            items.push((k + 1, item));
        }
    }
    let mut order: Vec<String> = names.map(<[String]>::to_vec).unwrap_or_default();
    let fixed = names.is_some();
    let index = |line: usize, n: &str, order: &mut Vec<String>| -> Result<usize, FormatError> {
        if let Some(i) = order.iter().position(|x| x == n) {
            return Ok(i);
        }
        if fixed {
            return Err(parse_err(line, format!("unknown node `{n}`")));
        }
        order.push(n.to_string());
        Ok(order.len() - 1)
    };
    let mut edges = Vec::new();
    for (line, item) in &items {
        match item {
            Item::Node(n) => {
                index(*line, n, &mut order)?;
            }
            Item::Edge { from, to, directed, nonlinear } => {
                let a = index(*line, from, &mut order)?;
                let b = index(*line, to, &mut order)?;
                edges.push((*line, a, b, *directed, *nonlinear));
            }
        }
    }
    let mut g = Pdag::new(order.len());
    for (line, a, b, directed, nonlinear) in edges {
        let added = if directed { g.add_directed(a, b) } else { g.add_undirected(a, b) };
        added.map_err(|e| parse_err(line, e.to_string()))?;
        if nonlinear {
            g.set_nonlinear(a, b, true)?;
        }
    }
    Ok(NamedGraph { names: order, graph: g })
}

/// Writes every node on its own line, then every edge: directed edges in
/// index order, then undirected ones.
pub fn write_edge_list(g: &NamedGraph) -> String {
    let mut out = String::new();
    for n in &g.names {
        let _ = writeln!(out, "{n}");
    }
    for (i, j) in g.graph.directed_edges() {
        let tag = if g.graph.is_nonlinear(i, j) { " [nonlinear]" } else { "" };
        let _ = writeln!(out, "{} -> {}{tag}", g.names[i], g.names[j]);
    }
    for (i, j) in g.graph.undirected_pairs() {
        let _ = writeln!(out, "{} -- {}", g.names[i], g.names[j]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let d = Dataset::new(vec!["a".into(), "b".into()], vec![vec![0.1, -2.5e-17, 3.0], vec![1.0 / 3.0, 2.0, f64::MAX]]).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn csv_rejects_bad_values() {
        assert!(read_csv("a,b\n1,NaN\n".as_bytes()).is_err());
        assert!(read_csv("a,b\n1,x\n".as_bytes()).is_err());
        assert!(read_csv("a,b\n1,2,3\n".as_bytes()).is_err());
        assert!(read_csv("a,a\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn edge_list_parse_and_round_trip() {
        let text = "# header\nA -> B [nonlinear]\n\nB -- C   # trailing\nD\n";
        let g = parse_edge_list(text, None).unwrap();
        assert_eq!(g.names, vec!["A", "B", "C", "D"]);
        assert!(g.graph.has_directed(0, 1) && g.graph.is_nonlinear(0, 1));
        assert!(g.graph.has_undirected(1, 2));
        let again = parse_edge_list(&write_edge_list(&g), None).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(parse_edge_list("A -> B\nB -> A\n", None).is_err());
        assert!(parse_edge_list("A -> A\n", None).is_err());
        assert!(parse_edge_list("A => B\n", None).is_err());
        assert!(parse_edge_list("A -- B [nonlinear]\n", None).is_err());
        let names = vec!["A".to_string(), "B".to_string()];
        assert!(parse_edge_list("A -> C\n", Some(&names)).is_err());
        let g = parse_edge_list("B -> A\n", Some(&names)).unwrap();
        assert!(g.graph.has_directed(1, 0));
    }
}
