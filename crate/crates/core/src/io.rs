//! File formats: delimited data ingestion and export, tier files, and graph
//! export as DOT, GraphML or a JSON edge list.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, DropReason, Provenance, ProvenanceEntry};
use crate::graph::{Edge, GraphError, Mark, PartialDag};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("row {row} (line {line}), column `{column}`: cannot parse `{value}` as a number")]
    Cell { row: usize, line: usize, column: String, value: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("no usable columns left after dropping {dropped} of {total}")]
    Empty { dropped: usize, total: usize },
    #[error("no data rows")]
    NoRows,
    #[error("unknown graph format `{0}` (expected dot, graphml or json)")]
    UnknownFormat(String),
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl IoError {
    fn format(line: usize, message: impl Into<String>) -> Self {
        IoError::Format { line, message: message.into() }
    }
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path)
        .map_err(|source| IoError::File { path: path.display().to_string(), source })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    /// `None` picks tab if the header contains one, comma otherwise.
    pub delimiter: Option<u8>,
    /// Case-insensitive name tokens that mark a column as an identifier
    /// when its values are all distinct. A pattern matches the whole name or
    /// a `_`, `-`, `.` or space separated part of it.
    pub key_patterns: Vec<String>,
    pub standardize: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            delimiter: None,
            key_patterns: ["id", "key", "uuid", "guid", "serial", "index"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            standardize: true,
        }
    }
}

fn name_matches(name: &str, patterns: &[String]) -> bool {
    let lower = name.to_ascii_lowercase();
    patterns.iter().any(|p| {
        let p = p.to_ascii_lowercase();
        lower == p || lower.split(['_', '-', '.', ' ']).any(|part| part == p)
    })
}

pub fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

/// Reads a delimited table with a header row.
///
/// A column is dropped as a unique key when all its values are distinct and
/// its name matches a key pattern, or none of its values is a number, or
/// all of them are integers. Constant columns are dropped for zero
/// variance. Every other column must parse as numbers. Every source column
/// is recorded in the provenance.
pub fn ingest_str<F: Scalar>(text: &str, source: Option<&str>, opts: &IngestOptions) -> Result<Dataset<F>, IoError> {
    let delimiter = opts.delimiter.unwrap_or_else(|| detect_delimiter(text));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        IoError::format(line, e.to_string())
    };
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut lines = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        lines.push(rec.position().map_or(0, |p| p.line() as usize));
        for (col, v) in raw.iter_mut().zip(rec.iter()) {
            col.push(v.to_string());
        }
    }
    if lines.is_empty() {
        return Err(IoError::NoRows);
    }

    let mut names = Vec::new();
    let mut columns = Vec::new();
    let mut entries = Vec::with_capacity(header.len());
    for (name, values) in header.iter().zip(&raw) {
        let parsed: Vec<Option<f64>> = values.iter().map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
        let numeric = parsed.iter().all(Option::is_some);
        let textual = parsed.iter().all(Option::is_none);
        let distinct = values.iter().collect::<HashSet<_>>().len() == values.len();
        let integral = numeric && parsed.iter().all(|v| v.is_some_and(|x| x.fract() == 0.0));
        let is_key = values.len() > 1
            && distinct
            && (name_matches(name, &opts.key_patterns) || textual || integral);
        let dropped = if is_key {
            Some(DropReason::UniqueKey)
        } else if let Some(bad) = parsed.iter().position(Option::is_none) {
            return Err(IoError::Cell {
                row: bad + 1,
                line: lines[bad],
                column: name.clone(),
                value: values[bad].clone(),
            });
        } else if parsed.iter().all(|v| *v == parsed[0]) {
            Some(DropReason::ZeroVariance)
        } else {
            None
        };
        entries.push(ProvenanceEntry { column: name.clone(), dropped });
        if dropped.is_none() {
            names.push(name.clone());
            columns.push(parsed.into_iter().map(|v| F::lit(v.expect("checked numeric"))).collect());
        }
    }
    if names.is_empty() {
        return Err(IoError::Empty { dropped: header.len(), total: header.len() });
    }
    let mut data = Dataset::from_columns(names, columns)?;
    if opts.standardize {
        data.standardize()?;
    }
    data.set_provenance(Provenance {
        source: source.map(str::to_string),
        entries,
        standardized: opts.standardize,
    });
    Ok(data)
}

pub fn ingest<F: Scalar>(path: &Path, opts: &IngestOptions) -> Result<Dataset<F>, IoError> {
    let text = read_file(path)?;
    ingest_str(&text, Some(&path.display().to_string()), opts)
}

/// Writes the data with a header row. Numbers use their shortest
/// round-trip representation.
pub fn write_delimited<F: Scalar>(data: &Dataset<F>, delimiter: u8) -> String {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    w.write_record(data.names()).expect("in-memory write");
    for i in 0..data.n_rows() {
        w.write_record(data.row(i).iter().map(|v| v.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Two-column `name<TAB>rank` file. Blank lines and `#` comments are
/// ignored; a first line whose rank does not parse is taken as a header.
pub fn parse_tiers(text: &str) -> Result<BTreeMap<String, u32>, IoError> {
    let mut out = BTreeMap::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(IoError::format(i + 1, "expected `name<TAB>rank`"));
        }
        let rank = match fields[1].parse::<u32>() {
            Ok(r) => r,
            Err(_) if first => {
                first = false;
                continue;
            }
            Err(_) => return Err(IoError::format(i + 1, format!("invalid tier rank `{}`", fields[1]))),
        };
        first = false;
        if out.insert(fields[0].to_string(), rank).is_some() {
            return Err(IoError::format(i + 1, format!("column `{}` listed twice", fields[0])));
        }
    }
    Ok(out)
}

pub fn write_tiers(names: &[String], tiers: &[Option<u32>]) -> String {
    let mut out = String::from("column\ttier\n");
    for (n, t) in names.iter().zip(tiers) {
        if let Some(t) = t {
            let _ = writeln!(out, "{n}\t{t}");
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dot,
    Graphml,
    Json,
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Dot => "dot",
            GraphFormat::Graphml => "graphml",
            GraphFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for GraphFormat {
    type Err = IoError;
    fn from_str(s: &str) -> Result<Self, IoError> {
        match s.to_ascii_lowercase().as_str() {
            "dot" | "gv" => Ok(GraphFormat::Dot),
            "graphml" => Ok(GraphFormat::Graphml),
            "json" | "edge-list-json" => Ok(GraphFormat::Json),
            _ => Err(IoError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn export_graph(g: &PartialDag, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => to_dot(g),
        GraphFormat::Graphml => to_graphml(g),
        GraphFormat::Json => to_json(g),
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// An all-undirected graph is written as `graph` with `--` edges; anything
/// with a directed edge as `digraph`, where undirected edges carry
/// `[dir=none]` since DOT forbids `--` inside a digraph.
pub fn to_dot(g: &PartialDag) -> String {
    let undirected_only = g.edge_count() > 0 && g.directed_count() == 0;
    let mut out = String::from(if undirected_only { "graph G {\n" } else { "digraph G {\n" });
    for v in 0..g.node_count() {
        let _ = writeln!(out, "  {};", dot_quote(g.label(v)));
    }
    for e in g.edges() {
        let (a, b) = (dot_quote(g.label(e.a)), dot_quote(g.label(e.b)));
        match (e.mark, undirected_only) {
            (Mark::Directed, _) => writeln!(out, "  {a} -> {b};"),
            (Mark::Undirected, true) => writeln!(out, "  {a} -- {b};"),
            (Mark::Undirected, false) => writeln!(out, "  {a} -> {b} [dir=none];"),
        }
        .expect("string write");
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn to_graphml(g: &PartialDag) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n  \
         <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n  \
         <key id=\"directed\" for=\"edge\" attr.name=\"directed\" attr.type=\"boolean\"/>\n  \
         <graph id=\"G\" edgedefault=\"undirected\">\n",
    );
    for v in 0..g.node_count() {
        let _ = writeln!(out, "    <node id=\"n{v}\"><data key=\"label\">{}</data></node>", xml_escape(g.label(v)));
    }
    for e in g.edges() {
        let d = e.is_directed();
        let _ = writeln!(
            out,
            "    <edge source=\"n{}\" target=\"n{}\" directed=\"{d}\"><data key=\"directed\">{d}</data></edge>",
            e.a, e.b
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonGraph {
    nodes: Vec<String>,
    edges: Vec<JsonEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonEdge {
    from: String,
    to: String,
    mark: Mark,
}

pub fn to_json(g: &PartialDag) -> String {
    let doc = JsonGraph {
        nodes: g.labels().to_vec(),
        edges: g
            .edges()
            .map(|e| JsonEdge { from: g.label(e.a).to_string(), to: g.label(e.b).to_string(), mark: e.mark })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str) -> Result<PartialDag, IoError> {
    let doc: JsonGraph = serde_json::from_str(text)?;
    let index: BTreeMap<&str, usize> = doc.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    if index.len() != doc.nodes.len() {
        return Err(IoError::format(0, "duplicated node label"));
    }
    let lookup = |name: &str| {
        index.get(name).copied().ok_or_else(|| IoError::format(0, format!("unknown node `{name}`")))
    };
    let mut edges = Vec::with_capacity(doc.edges.len());
    for e in &doc.edges {
        let (a, b) = (lookup(&e.from)?, lookup(&e.to)?);
        edges.push(Edge { a, b, mark: e.mark });
    }
    let mut g = PartialDag::from_edges(doc.nodes.len(), &edges)?;
    g.set_labels(doc.nodes)?;
    Ok(g)
}
