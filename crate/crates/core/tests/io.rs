mod common;

use causeway::dataset::DropReason;
use causeway::io::{
    export_graph, graph_from_json, ingest, ingest_str, parse_tiers, to_dot, to_json, write_delimited, write_tiers,
    GraphFormat, IngestOptions, IoError,
};
use causeway::{Dataset, Edge, PartialDag};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn raw() -> IngestOptions {
    IngestOptions { standardize: false, ..Default::default() }
}

fn labelled(n: usize, edges: &[Edge]) -> PartialDag {
    let mut g = PartialDag::from_edges(n, edges).unwrap();
    g.set_labels((0..n).map(|i| format!("v{i}")).collect()).unwrap();
    g
}

fn random_graph(n: usize, seed: u64) -> PartialDag {
    let mut r = rng(seed);
    let arcs = random_dag(n, 0.4, &mut r);
    let edges: Vec<Edge> = arcs
        .iter()
        .map(|&(a, b)| if r.random_bool(0.5) { Edge::directed(a, b) } else { Edge::undirected(a, b) })
        .collect();
    labelled(n, &edges)
}

const TABLE: &str = "part_id,line,temp,pressure,label\n\
                     101,7,20.5,1.25,a\n\
                     102,7,21.0,1.5,b\n\
                     103,7,19.75,1.0,c\n\
                     104,7,22.25,1.75,d\n";

#[test]
fn keys_and_constants_are_dropped_with_provenance() {
    let d: Dataset<f64> = ingest_str(TABLE, Some("t.csv"), &raw()).unwrap();
    assert_eq!(d.names(), &["temp", "pressure"]);
    let p = d.provenance();
    assert_eq!(p.source.as_deref(), Some("t.csv"));
    let cols: Vec<&str> = p.entries.iter().map(|e| e.column.as_str()).collect();
    assert_eq!(cols, ["part_id", "line", "temp", "pressure", "label"]);
    let dropped: Vec<_> = p.dropped().collect();
    assert_eq!(
        dropped,
        [("part_id", DropReason::UniqueKey), ("line", DropReason::ZeroVariance), ("label", DropReason::UniqueKey)]
    );
}

#[test]
fn measurement_columns_are_kept() {
    // distinct non-integral values, no key-like name
    let d: Dataset<f64> = ingest_str("x\ty\n0.5\t1\n1.5\t1\n2.25\t3\n", None, &raw()).unwrap();
    assert_eq!(d.names(), &["x", "y"]);
    assert_eq!(d.column(0), &[0.5, 1.5, 2.25]);
}

#[test]
fn bad_cell_is_located() {
    match ingest_str::<f64>("a,b\n1.5,2\n2.5,oops\n3.5,2\n", None, &raw()) {
        Err(IoError::Cell { row, line, column, value }) => {
            assert_eq!((row, line, column.as_str(), value.as_str()), (2, 3, "b", "oops"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(ingest_str::<f64>("a,b\n", None, &raw()), Err(IoError::NoRows)));
    assert!(matches!(ingest_str::<f64>("k\n1\n1\n", None, &raw()), Err(IoError::Empty { .. })));
}

#[test]
fn ingest_standardizes_by_default() {
    let d: Dataset<f64> = ingest_str(TABLE, None, &IngestOptions::default()).unwrap();
    assert!(d.provenance().standardized);
    for j in 0..d.n_cols() {
        assert!(d.mean(j).abs() < 1e-12);
        assert!((d.std_dev(j) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn file_ingest_matches_string_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    std::fs::write(&path, TABLE).unwrap();
    let a: Dataset<f64> = ingest(&path, &raw()).unwrap();
    let b: Dataset<f64> = ingest_str(TABLE, None, &raw()).unwrap();
    assert_eq!(a.columns(), b.columns());
    assert!(matches!(ingest::<f64>(&dir.path().join("missing.csv"), &raw()), Err(IoError::File { .. })));
}

#[test]
fn tiers_parse_and_write() {
    let t = parse_tiers("column\ttier\n# stations\ntemp\t0\n\npressure\t2\n").unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t["pressure"], 2);
    assert!(parse_tiers("a\t0\na\t1\n").is_err());
    assert!(parse_tiers("a\t0\nb\tx\n").is_err());
    let names = vec!["temp".to_string(), "pressure".to_string(), "x".to_string()];
    let text = write_tiers(&names, &[Some(0), Some(2), None]);
    assert_eq!(parse_tiers(&text).unwrap(), t);
}

#[test]
fn dot_examples() {
    let undirected = labelled(2, &[Edge::undirected(0, 1)]);
    assert_eq!(to_dot(&undirected), "graph G {\n  \"v0\";\n  \"v1\";\n  \"v0\" -- \"v1\";\n}\n");
    let mixed = labelled(3, &[Edge::directed(0, 1), Edge::undirected(1, 2)]);
    let dot = to_dot(&mixed);
    assert!(dot.starts_with("digraph G {"));
    assert!(dot.contains("\"v0\" -> \"v1\";"));
    assert!(dot.contains("\"v1\" -> \"v2\" [dir=none];"));
}

#[test]
fn format_names_parse() {
    assert_eq!("DOT".parse::<GraphFormat>().unwrap(), GraphFormat::Dot);
    assert_eq!("graphml".parse::<GraphFormat>().unwrap().extension(), "graphml");
    assert!(matches!("svg".parse::<GraphFormat>(), Err(IoError::UnknownFormat(_))));
}

#[test]
fn exports_are_byte_stable() {
    let g = random_graph(9, 4);
    for f in [GraphFormat::Dot, GraphFormat::Graphml, GraphFormat::Json] {
        assert_eq!(export_graph(&g, f), export_graph(&g.clone(), f));
    }
    let graphml = export_graph(&g, GraphFormat::Graphml);
    assert_eq!(graphml.matches("<edge ").count(), g.edge_count());
    assert_eq!(graphml.matches("<node ").count(), 9);
}

#[test]
fn json_rejects_unknown_nodes() {
    let bad = r#"{"nodes":["a"],"edges":[{"from":"a","to":"b","mark":"directed"}]}"#;
    assert!(graph_from_json(bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_a_fixed_point(seed in any::<u64>(), n in 1usize..12) {
        let g = random_graph(n, seed);
        let text = to_json(&g);
        let back = graph_from_json(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(to_json(&back), text);
    }

    #[test]
    fn delimited_round_trip_is_exact(seed in any::<u64>(), d in 1usize..6, n in 2usize..40, tab in any::<bool>()) {
        let mut r = rng(seed);
        let cols: Vec<Vec<f64>> = (0..d).map(|_| normals(n, &mut r).iter().map(|v| v * 1e3).collect()).collect();
        let data = Dataset::with_default_names(cols).unwrap();
        let delim = if tab { b'\t' } else { b',' };
        let back: Dataset<f64> = ingest_str(&write_delimited(&data, delim), None, &raw()).unwrap();
        prop_assert_eq!(back.names(), data.names());
        prop_assert_eq!(back.columns(), data.columns());
    }

    #[test]
    fn reingest_is_idempotent(seed in any::<u64>(), d in 1usize..6, n in 3usize..40) {
        let mut r = rng(seed);
        let cols: Vec<Vec<f64>> = (0..d).map(|_| normals(n, &mut r)).collect();
        let text = write_delimited(&Dataset::with_default_names(cols).unwrap(), b',');
        let once: Dataset<f64> = ingest_str(&text, None, &IngestOptions::default()).unwrap();
        let twice: Dataset<f64> = ingest_str(&write_delimited(&once, b','), None, &IngestOptions::default()).unwrap();
        for j in 0..d {
            for (a, b) in once.column(j).iter().zip(twice.column(j)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
        prop_assert_eq!(once.provenance().entries.len(), d);
    }
}
