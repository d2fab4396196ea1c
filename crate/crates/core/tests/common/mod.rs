//! Brute-force references shared by the integration and acceptance tests.
//! Nothing here calls the library's own algorithms for the quantity it
//! checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use causeway::PartialDag;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Arc lists of every DAG on `n` labelled nodes.
pub fn all_dags(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut arcs = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => arcs.push((i, j)),
                2 => arcs.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        if is_acyclic(n, &arcs) {
            out.push(arcs);
        }
    }
    out
}

pub fn is_acyclic(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0; n];
    for &(_, b) in arcs {
        indeg[b] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &(a, b) in arcs {
            if a == v {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
    }
    seen == n
}

/// Random DAG: random order, each pair joined with probability `p`.
pub fn random_dag(n: usize, p: f64, r: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random_bool(p) {
                arcs.push((order[i], order[j]));
            }
        }
    }
    arcs.sort_unstable();
    arcs
}

fn adjacency(n: usize, arcs: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in arcs {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

/// Unshielded colliders `(min(a, c), b, max(a, c))` of `a -> b <- c`.
pub fn v_structures(n: usize, arcs: &[(usize, usize)]) -> BTreeSet<(usize, usize, usize)> {
    let adj = adjacency(n, arcs);
    let mut out = BTreeSet::new();
    for &(a, b) in arcs {
        for &(c, d) in arcs {
            if d == b && a < c && !adj[a][c] {
                out.insert((a, b, c));
            }
        }
    }
    out
}

/// Skeleton pairs `(min, max)`.
pub fn skeleton(arcs: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    arcs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
}

/// Intersection of a Markov equivalence class: a pair maps to `Some(dir)`
/// when every member orients it the same way, `None` otherwise.
pub type Pattern = BTreeMap<(usize, usize), Option<(usize, usize)>>;

pub fn intersect(members: &[Vec<(usize, usize)>]) -> Pattern {
    let mut out: Pattern = BTreeMap::new();
    for (k, m) in members.iter().enumerate() {
        for &(a, b) in m {
            let key = (a.min(b), a.max(b));
            if k == 0 {
                out.insert(key, Some((a, b)));
            } else if out[&key] != Some((a, b)) {
                out.insert(key, None);
            }
        }
    }
    out
}

/// Members of the equivalence class of `arcs` that also satisfy `allowed`,
/// found by backtracking over edge orientations with collider and
/// cycle pruning.
pub fn equivalent_dags(
    n: usize,
    arcs: &[(usize, usize)],
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = skeleton(arcs).into_iter().collect();
    let adj = adjacency(n, arcs);
    let target = v_structures(n, arcs);
    let mut out = Vec::new();
    let mut current: Vec<(usize, usize)> = Vec::new();
    fn reaches(arcs: &[(usize, usize)], from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if seen.insert(v) {
                stack.extend(arcs.iter().filter(|(a, _)| *a == v).map(|(_, b)| *b));
            }
        }
        false
    }
    fn rec(
        i: usize,
        pairs: &[(usize, usize)],
        adj: &[Vec<bool>],
        target: &BTreeSet<(usize, usize, usize)>,
        allowed: &dyn Fn(usize, usize) -> bool,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == pairs.len() {
            if v_structures(adj.len(), current) == *target {
                out.push(current.clone());
            }
            return;
        }
        let (x, y) = pairs[i];
        for (a, b) in [(x, y), (y, x)] {
            if !allowed(a, b) || reaches(current, b, a) {
                continue;
            }
            // no collider outside the target, no target arm reversed
            let new_collider = current
                .iter()
                .any(|&(c, d)| d == b && c != a && !adj[a][c] && !target.contains(&(a.min(c), b, a.max(c))));
            let breaks_target = target.iter().any(|&(p, m, q)| (p == b || q == b) && m == a);
            let ok = !new_collider && !breaks_target;
            if !ok {
                continue;
            }
            current.push((a, b));
            rec(i + 1, pairs, adj, target, allowed, current, out);
            current.pop();
        }
    }
    rec(0, &pairs, &adj, &target, allowed, &mut current, &mut out);
    out
}

/// Compares a learned graph with a pattern; returns a description of the
/// first difference.
pub fn pattern_mismatch(g: &PartialDag, p: &Pattern) -> Option<String> {
    let learned: BTreeMap<(usize, usize), Option<(usize, usize)>> = g
        .edges()
        .map(|e| ((e.a.min(e.b), e.a.max(e.b)), e.is_directed().then_some((e.a, e.b))))
        .collect();
    if &learned == p {
        None
    } else {
        Some(format!("learned {learned:?} expected {p:?}"))
    }
}

/// d-separation by enumerating every simple path of the skeleton.
pub fn d_separated_by_paths(n: usize, arcs: &[(usize, usize)], x: usize, y: usize, z: &[usize]) -> bool {
    let adj = adjacency(n, arcs);
    let is_arc = |a: usize, b: usize| arcs.contains(&(a, b));
    let descendants = |v: usize| {
        let mut seen = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &(a, b) in arcs {
                if a == u && seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        seen
    };
    let zset: BTreeSet<usize> = z.iter().copied().collect();
    let mut path = vec![x];
    let mut on_path = vec![false; n];
    on_path[x] = true;
    fn walk(
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        y: usize,
        adj: &[Vec<bool>],
        active: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        let last = *path.last().unwrap();
        if last == y {
            return active(path);
        }
        for next in 0..adj.len() {
            if adj[last][next] && !on_path[next] {
                path.push(next);
                on_path[next] = true;
                let found = walk(path, on_path, y, adj, active);
                path.pop();
                on_path[next] = false;
                if found {
                    return true;
                }
            }
        }
        false
    }
    let active = |p: &[usize]| {
        p.windows(3).all(|w| {
            let (a, m, b) = (w[0], w[1], w[2]);
            if is_arc(a, m) && is_arc(b, m) {
                descendants(m).iter().any(|d| zset.contains(d))
            } else {
                !zset.contains(&m)
            }
        })
    };
    !walk(&mut path, &mut on_path, y, &adj, &active)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// OLS with intercept via the normal equations; returns `(intercept, coefs)`.
pub fn normal_equations(x: &[&[f64]], y: &[f64]) -> (f64, Vec<f64>) {
    let n = y.len();
    let p = x.len() + 1;
    let col = |j: usize, i: usize| if j == 0 { 1.0 } else { x[j - 1][i] };
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for a in 0..p {
            xty[a] += col(a, i) * y[i];
            for b in 0..p {
                xtx[a][b] += col(a, i) * col(b, i);
            }
        }
    }
    let beta = solve(xtx, xty);
    (beta[0], beta[1..].to_vec())
}

pub fn residuals(x: &[&[f64]], y: &[f64]) -> Vec<f64> {
    let (c, b) = normal_equations(x, y);
    (0..y.len())
        .map(|i| y[i] - c - b.iter().zip(x).map(|(bj, xj)| bj * xj[i]).sum::<f64>())
        .collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Partial correlation as the correlation of regression residuals.
pub fn partial_corr_by_regression(cols: &[Vec<f64>], i: usize, j: usize, s: &[usize]) -> f64 {
    let x: Vec<&[f64]> = s.iter().map(|&k| cols[k].as_slice()).collect();
    pearson(&residuals(&x, &cols[i]), &residuals(&x, &cols[j]))
}

/// Two-pass sample covariance with an `n` denominator.
pub fn covariance(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = cols[0].len() as f64;
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let d = cols.len();
    let mut out = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            out[a][b] = cols[a]
                .iter()
                .zip(&cols[b])
                .map(|(x, y)| (x - means[a]) * (y - means[b]))
                .sum::<f64>()
                / n;
        }
    }
    out
}

/// Inverse, one solved column at a time.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m = vec![vec![0.0; n]; n];
    for c in 0..n {
        let e: Vec<f64> = (0..n).map(|r| if r == c { 1.0 } else { 0.0 }).collect();
        for (r, v) in solve(a.to_vec(), e).into_iter().enumerate() {
            m[r][c] = v;
        }
    }
    m
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Standard normals via Box-Muller (independent of the library sampler).
pub fn normals(n: usize, r: &mut impl Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - r.random::<f64>();
            let u2: f64 = r.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}
