//! Phase I: adjacency search from the complete graph.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{CandidatePool, PcConfig, SkeletonMode};
use crate::citest::{CiError, IndependenceTest};
use crate::graph::{PartialDag, SepsetMap};

/// A test that errored; the edge was kept.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFailure {
    pub x: usize,
    pub y: usize,
    pub cond: Vec<usize>,
    pub error: CiError,
}

#[derive(Debug, Clone)]
pub struct SkeletonResult {
    pub graph: PartialDag,
    pub sepsets: SepsetMap,
    pub failures: Vec<TestFailure>,
    pub tests_run: usize,
    /// Largest conditioning-set size that was attempted.
    pub max_depth_reached: usize,
}

/// Lexicographic `k`-subsets of `pool`.
pub(crate) struct Combinations<'a> {
    pool: &'a [usize],
    idx: Vec<usize>,
    done: bool,
}

impl<'a> Combinations<'a> {
    pub(crate) fn new(pool: &'a [usize], k: usize) -> Self {
        Self { pool, idx: (0..k).collect(), done: k > pool.len() }
    }
}

impl Iterator for Combinations<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.pool[i]).collect();
        let k = self.idx.len();
        let n = self.pool.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

fn pools(g: &PartialDag, x: usize, y: usize, mode: CandidatePool) -> Vec<Vec<usize>> {
    let without = |v: usize, other: usize| -> Vec<usize> {
        g.adj(v).iter().copied().filter(|&u| u != other).collect()
    };
    match mode {
        CandidatePool::TwoSided => vec![without(x, y), without(y, x)],
        CandidatePool::PaperStrict => vec![without(y, x)],
    }
}

enum Search {
    Independent(Vec<usize>),
    Kept,
}

/// Tries every size-`depth` conditioning set for `x - y` in pool order and
/// stops at the first independence.
fn search_edge<T: IndependenceTest + ?Sized>(
    test: &T,
    pools: &[Vec<usize>],
    x: usize,
    y: usize,
    depth: usize,
    failures: &mut Vec<TestFailure>,
    tests_run: &mut usize,
) -> Search {
    let first: BTreeSet<usize> = pools.first().map(|p| p.iter().copied().collect()).unwrap_or_default();
    for (pi, pool) in pools.iter().enumerate() {
        for cond in Combinations::new(pool, depth) {
            if pi > 0 && cond.iter().all(|v| first.contains(v)) {
                continue;
            }
            *tests_run += 1;
            match test.independent(x, y, &cond) {
                Ok(true) => return Search::Independent(cond),
                Ok(false) => {}
                Err(error) => failures.push(TestFailure { x, y, cond, error }),
            }
        }
    }
    Search::Kept
}

pub fn learn_skeleton<T: IndependenceTest + ?Sized>(test: &T, cfg: &PcConfig) -> SkeletonResult {
    match cfg.mode {
        SkeletonMode::Sequential => sequential(test, cfg),
        SkeletonMode::LevelParallel => level_parallel(test, cfg),
    }
}

fn sequential<T: IndependenceTest + ?Sized>(test: &T, cfg: &PcConfig) -> SkeletonResult {
    let n = test.n_vars();
    let mut g = PartialDag::complete(n);
    let mut sepsets = SepsetMap::new();
    let mut failures = Vec::new();
    let mut tests_run = 0;
    let max_depth = cfg.depth.unwrap_or(usize::MAX);
    let mut depth = 0;
    let mut reached = 0;

    while depth <= max_depth {
        let mut testable = false;
        for x in 0..n {
            for y in x + 1..n {
                if !g.is_adjacent(x, y) {
                    continue;
                }
                let pools = pools(&g, x, y, cfg.candidates);
                if pools.iter().all(|p| p.len() < depth) {
                    continue;
                }
                testable = true;
                reached = depth;
                if let Search::Independent(cond) =
                    search_edge(test, &pools, x, y, depth, &mut failures, &mut tests_run)
                {
                    g.remove_edge(x, y);
                    sepsets.insert(x, y, &cond);
                }
            }
        }
        if !testable {
            break;
        }
        depth += 1;
    }
    SkeletonResult { graph: g, sepsets, failures, tests_run, max_depth_reached: reached }
}

/// Every test at a level sees the graph as it was when the level started;
/// removals are applied together afterwards. Output does not depend on the
/// thread count.
fn level_parallel<T: IndependenceTest + ?Sized>(test: &T, cfg: &PcConfig) -> SkeletonResult {
    let n = test.n_vars();
    let mut g = PartialDag::complete(n);
    let mut sepsets = SepsetMap::new();
    let mut failures = Vec::new();
    let mut tests_run = 0;
    let max_depth = cfg.depth.unwrap_or(usize::MAX);
    let mut depth = 0;
    let mut reached = 0;

    while depth <= max_depth {
        let snapshot = g.clone();
        let work: Vec<(usize, usize, Vec<Vec<usize>>)> = snapshot
            .edges()
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .map(|(x, y)| (x, y, pools(&snapshot, x, y, cfg.candidates)))
            .filter(|(_, _, p)| p.iter().any(|p| p.len() >= depth))
            .collect();
        if work.is_empty() {
            break;
        }
        reached = depth;
        let results: Vec<(usize, usize, Search, Vec<TestFailure>, usize)> = work
            .par_iter()
            .map(|(x, y, pools)| {
                let mut f = Vec::new();
                let mut t = 0;
                let s = search_edge(test, pools, *x, *y, depth, &mut f, &mut t);
                (*x, *y, s, f, t)
            })
            .collect();
        for (x, y, s, f, t) in results {
            tests_run += t;
            failures.extend(f);
            if let Search::Independent(cond) = s {
                g.remove_edge(x, y);
                sepsets.insert(x, y, &cond);
            }
        }
        depth += 1;
    }
    SkeletonResult { graph: g, sepsets, failures, tests_run, max_depth_reached: reached }
}
