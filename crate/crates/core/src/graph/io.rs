use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{GraphError, SocialGraph};

/// JSON form of a graph: labels in index order and `[src, dst, weight]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedGraph {
    pub users: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl From<&SocialGraph> for SerializedGraph {
    fn from(g: &SocialGraph) -> Self {
        Self {
            users: g.labels().to_vec(),
            edges: g.edges().iter().map(|e| (e.src.0, e.dst.0, e.weight)).collect(),
        }
    }
}

impl TryFrom<SerializedGraph> for SocialGraph {
    type Error = GraphError;

    fn try_from(s: SerializedGraph) -> Result<Self, GraphError> {
        SocialGraph::from_parts(s.users, s.edges)
    }
}

/// Reads a headerless `src_label,dst_label,weight` edge list.
///
/// Users are numbered in order of first appearance.
pub fn read_edges_csv<R: Read>(reader: R) -> Result<SocialGraph, GraphError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |label: &str| -> usize {
        if let Some(&i) = index.get(label) {
            return i;
        }
        labels.push(label.to_string());
        index.insert(label.to_string(), labels.len() - 1);
        labels.len() - 1
    };

    let mut edges = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        let more = rdr.read_record(&mut record).map_err(|e| GraphError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(line),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(line);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let weight: f64 = record[2].parse().map_err(|_| GraphError::Parse {
            line,
            message: format!("invalid weight `{}`", &record[2]),
        })?;
        if !weight.is_finite() {
            return Err(GraphError::Parse { line, message: format!("non-finite weight `{}`", &record[2]) });
        }
        if weight < 0.0 {
            return Err(GraphError::NegativeWeight { line, weight });
        }
        if record[0] == record[1] {
            return Err(GraphError::SelfLoop { line, label: record[0].to_string() });
        }
        let s = intern(&record[0]);
        let d = intern(&record[1]);
        edges.push((s, d, weight));
    }
    SocialGraph::from_parts(labels, edges)
}

pub fn write_edges_csv<W: Write>(graph: &SocialGraph, writer: W) -> Result<(), GraphError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for e in graph.edges() {
        w.write_record([graph.label(e.src), graph.label(e.dst), &e.weight.to_string()])
            .map_err(|e| GraphError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| GraphError::Io(e.to_string()))
}

pub fn write_graph_json<W: Write>(graph: &SocialGraph, writer: W) -> Result<(), GraphError> {
    serde_json::to_writer(writer, &SerializedGraph::from(graph)).map_err(|e| GraphError::Io(e.to_string()))
}

pub fn read_graph_json<R: Read>(reader: R) -> Result<SocialGraph, GraphError> {
    let s: SerializedGraph =
        serde_json::from_reader(reader).map_err(|e| GraphError::Parse { line: e.line() as u64, message: e.to_string() })?;
    s.try_into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UserId;
    use proptest::prelude::*;

    #[test]
    fn loads_three_rows() {
        let g = read_edges_csv("A,B,4\nB,A,2\nB,C,1\n".as_bytes()).unwrap();
        assert_eq!(g.n_users(), 3);
        assert_eq!(g.n_edges(), 3);
        let f: Vec<_> = g.friends(g.user_id("B").unwrap()).map(|u| g.label(u).to_string()).collect();
        assert_eq!(f, ["A", "C"]);
    }

    #[test]
    fn duplicate_rows_sum() {
        let g = read_edges_csv("A,B,1\nA,B,2\n".as_bytes()).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.weight(UserId(0), UserId(1)), 3.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = read_edges_csv("A,B,1\nA,A,5\n".as_bytes()).unwrap_err();
        assert_eq!(e, GraphError::SelfLoop { line: 2, label: "A".into() });

        let e = read_edges_csv("A,B,1\nB,C,x\n".as_bytes()).unwrap_err();
        assert!(matches!(e, GraphError::Parse { line: 2, .. }), "{e:?}");

        let e = read_edges_csv("A,B\n".as_bytes()).unwrap_err();
        assert!(matches!(e, GraphError::Parse { line: 1, .. }), "{e:?}");

        let e = read_edges_csv("A,B,1\nC,D,1\nA,C,-0.5\n".as_bytes()).unwrap_err();
        assert_eq!(e, GraphError::NegativeWeight { line: 3, weight: -0.5 });
    }

    fn arb_graph() -> impl Strategy<Value = SocialGraph> {
        (2usize..12).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n, 0.0f64..100.0), 0..40).prop_map(move |raw| {
                let labels = (0..n).map(|i| format!("user{i}")).collect();
                let edges = raw.into_iter().filter(|(s, d, _)| s != d);
                SocialGraph::from_parts(labels, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(g in arb_graph()) {
            let mut buf = Vec::new();
            write_graph_json(&g, &mut buf).unwrap();
            let back = read_graph_json(buf.as_slice()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn csv_round_trip_preserves_edges(g in arb_graph()) {
            let mut buf = Vec::new();
            write_edges_csv(&g, &mut buf).unwrap();
            let back = read_edges_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.n_edges(), g.n_edges());
            for e in g.edges() {
                let s = back.user_id(g.label(e.src)).unwrap();
                let d = back.user_id(g.label(e.dst)).unwrap();
                prop_assert_eq!(back.weight(s, d), e.weight);
            }
        }

        #[test]
        fn adjacency_weights_match_edges(g in arb_graph()) {
            let total = g.total_weight();
            let out: f64 = g.users().flat_map(|u| g.out_edges(u).iter().map(|e| e.weight)).sum();
            let inc: f64 = g.users().flat_map(|u| g.in_edges(u).map(|e| e.weight).collect::<Vec<_>>()).sum();
            let nbr: f64 = g.users().flat_map(|u| g.neighbors(u).iter().map(|n| n.out_weight)).sum();
            prop_assert!((out - total).abs() <= 1e-9 * total.max(1.0));
            prop_assert!((inc - total).abs() <= 1e-9 * total.max(1.0));
            prop_assert!((nbr - total).abs() <= 1e-9 * total.max(1.0));
        }
    }
}
