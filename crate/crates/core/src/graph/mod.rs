//! Partially directed graphs over variable indices.
//!
//! Nodes are column indices `0..n`; labels only travel along for export.
//! Each unordered pair carries at most one edge, either undirected or
//! directed, and the directed part is kept acyclic by every mutation.

mod dsep;
mod extension;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extension::ExtensionError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("nodes {0} and {1} are already adjacent")]
    DuplicateEdge(usize, usize),
    #[error("nodes {0} and {1} are not adjacent")]
    MissingEdge(usize, usize),
    #[error("edge {from} -> {to} would reverse the existing orientation")]
    Reversal { from: usize, to: usize },
    #[error("edge {from} -> {to} would create a directed cycle")]
    Cycle { from: usize, to: usize },
    #[error("operation requires a fully directed graph, found undirected edge {0} - {1}")]
    NotFullyDirected(usize, usize),
    #[error("{0} labels given for {1} nodes")]
    LabelCount(usize, usize),
}

/// Orientation stored for the canonical pair `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Orient {
    Undirected,
    LoToHi,
    HiToLo,
}

/// Mark on an edge as seen from the outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Undirected,
    Directed,
}

/// An edge `a - b` or `a -> b`. Undirected edges are reported with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub mark: Mark,
}

impl Edge {
    pub fn undirected(a: usize, b: usize) -> Self {
        Self { a: a.min(b), b: a.max(b), mark: Mark::Undirected }
    }

    pub fn directed(from: usize, to: usize) -> Self {
        Self { a: from, b: to, mark: Mark::Directed }
    }

    pub fn is_directed(&self) -> bool {
        self.mark == Mark::Directed
    }
}

#[inline]
fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Mixed graph with undirected and directed edges (a PDAG).
#[derive(Clone, PartialEq, Eq)]
pub struct PartialDag {
    labels: Vec<String>,
    edges: BTreeMap<(usize, usize), Orient>,
    adj: Vec<BTreeSet<usize>>,
}

impl fmt::Debug for PartialDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialDag({} nodes;", self.node_count())?;
        for e in self.edges() {
            match e.mark {
                Mark::Undirected => write!(f, " {}-{}", e.a, e.b)?,
                Mark::Directed => write!(f, " {}->{}", e.a, e.b)?,
            }
        }
        write!(f, ")")
    }
}

impl PartialDag {
    /// Empty graph with labels `X0..X{n-1}`.
    pub fn new(n: usize) -> Self {
        Self::with_labels((0..n).map(|i| format!("X{i}")).collect())
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self { labels, edges: BTreeMap::new(), adj: vec![BTreeSet::new(); n] }
    }

    /// Complete undirected graph.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for a in 0..n {
            for b in a + 1..n {
                g.insert(a, b, Orient::Undirected);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for e in edges {
            match e.mark {
                Mark::Undirected => g.add_undirected(e.a, e.b)?,
                Mark::Directed => g.add_directed(e.a, e.b)?,
            }
        }
        Ok(g)
    }

    /// Fully directed graph from `(from, to)` pairs.
    pub fn from_directed(n: usize, arcs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(a, b) in arcs {
            g.add_directed(a, b)?;
        }
        Ok(g)
    }

    pub fn from_undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(a, b) in pairs {
            g.add_undirected(a, b)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn set_labels(&mut self, labels: Vec<String>) -> Result<(), GraphError> {
        if labels.len() != self.node_count() {
            return Err(GraphError::LabelCount(labels.len(), self.node_count()));
        }
        self.labels = labels;
        Ok(())
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.node_count() {
            Err(GraphError::IndexOutOfRange { index: v, len: self.node_count() })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), GraphError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        Ok(())
    }

    fn insert(&mut self, a: usize, b: usize, o: Orient) {
        self.edges.insert(key(a, b), o);
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        self.check_pair(a, b)?;
        if self.is_adjacent(a, b) {
            return Err(GraphError::DuplicateEdge(a, b));
        }
        self.insert(a, b, Orient::Undirected);
        Ok(())
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        self.check_pair(from, to)?;
        if self.is_adjacent(from, to) {
            return Err(GraphError::DuplicateEdge(from, to));
        }
        if self.has_directed_path(to, from) {
            return Err(GraphError::Cycle { from, to });
        }
        let o = if from < to { Orient::LoToHi } else { Orient::HiToLo };
        self.insert(from, to, o);
        Ok(())
    }

    /// Removes the edge between `a` and `b`, returning whether one existed.
    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        if self.edges.remove(&key(a, b)).is_some() {
            self.adj[a].remove(&b);
            self.adj[b].remove(&a);
            true
        } else {
            false
        }
    }

    /// Turns the existing edge between `from` and `to` into `from -> to`.
    ///
    /// Orienting an already correctly directed edge is a no-op; reversing
    /// one, or closing a directed cycle, is an error and leaves the graph
    /// unchanged.
    pub fn orient(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        self.check_pair(from, to)?;
        match self.edges.get(&key(from, to)) {
            None => Err(GraphError::MissingEdge(from, to)),
            Some(Orient::Undirected) => {
                if self.has_directed_path(to, from) {
                    return Err(GraphError::Cycle { from, to });
                }
                let o = if from < to { Orient::LoToHi } else { Orient::HiToLo };
                self.edges.insert(key(from, to), o);
                Ok(())
            }
            Some(_) if self.is_directed(from, to) => Ok(()),
            Some(_) => Err(GraphError::Reversal { from, to }),
        }
    }

    /// Drops the orientation of an edge, making it undirected.
    pub fn unorient(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        match self.edges.get_mut(&key(a, b)) {
            None => Err(GraphError::MissingEdge(a, b)),
            Some(o) => {
                *o = Orient::Undirected;
                Ok(())
            }
        }
    }

    #[inline]
    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains_key(&key(a, b))
    }

    /// True iff the graph has `from -> to`.
    #[inline]
    pub fn is_directed(&self, from: usize, to: usize) -> bool {
        match self.edges.get(&key(from, to)) {
            Some(Orient::LoToHi) => from < to,
            Some(Orient::HiToLo) => from > to,
            _ => false,
        }
    }

    #[inline]
    pub fn is_undirected(&self, a: usize, b: usize) -> bool {
        matches!(self.edges.get(&key(a, b)), Some(Orient::Undirected))
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<Edge> {
        let (lo, hi) = key(a, b);
        self.edges.get(&(lo, hi)).map(|o| match o {
            Orient::Undirected => Edge::undirected(lo, hi),
            Orient::LoToHi => Edge::directed(lo, hi),
            Orient::HiToLo => Edge::directed(hi, lo),
        })
    }

    /// All nodes joined to `v` by any edge.
    pub fn neighbors(&self, v: usize) -> Result<&BTreeSet<usize>, GraphError> {
        self.check(v)?;
        Ok(&self.adj[v])
    }

    /// Unchecked neighbor set for hot loops.
    #[inline]
    pub(crate) fn adj(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.adj[v].iter().copied().filter(|&u| self.is_directed(u, v)).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.adj[v].iter().copied().filter(|&u| self.is_directed(v, u)).collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        self.adj[v].iter().copied().filter(|&u| self.is_undirected(v, u)).collect()
    }

    /// Edges in canonical pair order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(lo, hi), o)| match o {
            Orient::Undirected => Edge::undirected(lo, hi),
            Orient::LoToHi => Edge::directed(lo, hi),
            Orient::HiToLo => Edge::directed(hi, lo),
        })
    }

    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter(|(_, o)| **o == Orient::Undirected)
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        self.edges().filter(Edge::is_directed).map(|e| (e.a, e.b)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn directed_count(&self) -> usize {
        self.edges.values().filter(|o| **o != Orient::Undirected).count()
    }

    pub fn is_fully_directed(&self) -> bool {
        self.edges.values().all(|o| *o != Orient::Undirected)
    }

    /// Copy of the graph with every mark dropped.
    pub fn skeleton(&self) -> Self {
        let mut g = self.clone();
        for o in g.edges.values_mut() {
            *o = Orient::Undirected;
        }
        g
    }

    /// Same node set and same adjacencies, ignoring marks.
    pub fn same_skeleton(&self, other: &Self) -> bool {
        self.node_count() == other.node_count()
            && self.edges.keys().eq(other.edges.keys())
    }

    /// True iff a directed path `from -> ... -> to` exists (length >= 1).
    pub fn has_directed_path(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                if self.is_directed(v, u) {
                    if u == to {
                        return true;
                    }
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        false
    }

    /// Topological order of the directed part (Kahn, smallest index first).
    /// `None` if the directed part has a cycle, which mutation prevents.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.node_count();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents(v).len()).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in self.children(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Nodes with a directed path to some member of `targets`, plus the
    /// targets themselves.
    pub fn ancestors_of(&self, targets: &[usize]) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = targets.iter().copied().collect();
        let mut queue: VecDeque<usize> = targets.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for p in self.parents(v) {
                if out.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        out
    }

    /// Triples `(x, z, y)` with `x - z - y` adjacent and `x`, `y` not,
    /// reported once per pair with `x < y`, sorted lexicographically.
    pub fn unshielded_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for z in 0..self.node_count() {
            let nb: Vec<usize> = self.adj[z].iter().copied().collect();
            for (i, &x) in nb.iter().enumerate() {
                for &y in &nb[i + 1..] {
                    if !self.is_adjacent(x, y) {
                        out.push((x, z, y));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Unshielded colliders `x -> z <- y`, with `x < y`.
    pub fn unshielded_colliders(&self) -> BTreeSet<(usize, usize, usize)> {
        self.unshielded_triples()
            .into_iter()
            .filter(|&(x, z, y)| self.is_directed(x, z) && self.is_directed(y, z))
            .collect()
    }

    /// Whether `x` and `y` are d-separated by `z` in this DAG.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize]) -> Result<bool, GraphError> {
        dsep::d_separated(self, x, y, z)
    }

    /// A DAG in the equivalence class described by this graph, picked with
    /// a seeded random sequence of orientations.
    pub fn random_consistent_extension(&self, seed: u64) -> Result<Self, ExtensionError> {
        extension::random_consistent_extension(self, seed)
    }

    /// Whether `dag` is a consistent extension of `self`: fully directed,
    /// same skeleton, keeps every directed edge, same unshielded colliders.
    pub fn is_consistent_extension(&self, dag: &Self) -> bool {
        dag.is_fully_directed()
            && self.same_skeleton(dag)
            && self.directed_edges().iter().all(|&(a, b)| dag.is_directed(a, b))
            && self.unshielded_colliders() == dag.unshielded_colliders()
            && dag.topological_order().is_some()
    }
}

/// Separating sets found during skeleton search, keyed by unordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap {
    entries: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SepsetMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `set` as separating `a` and `b`. The set is stored sorted.
    pub fn insert(&mut self, a: usize, b: usize, set: &[usize]) {
        debug_assert!(!set.contains(&a) && !set.contains(&b));
        let mut s = set.to_vec();
        s.sort_unstable();
        self.entries.insert(key(a, b), s);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.entries.get(&key(a, b)).map(Vec::as_slice)
    }

    pub fn contains_pair(&self, a: usize, b: usize) -> bool {
        self.entries.contains_key(&key(a, b))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<usize>)> {
        self.entries.iter()
    }
}
