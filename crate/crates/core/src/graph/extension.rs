//! Picking a DAG out of an equivalence class.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::PartialDag;
use crate::pc::{close_under_rules, OrientationLog, PriorKnowledge};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("graph admits no acyclic orientation without new unshielded colliders")]
    NoExtension,
}

pub(super) fn random_consistent_extension(
    g: &PartialDag,
    seed: u64,
) -> Result<PartialDag, ExtensionError> {
    let target = g.unshielded_colliders();
    let none = PriorKnowledge::none(g.node_count());
    let mut sink = OrientationLog::default();

    let mut cur = g.clone();
    close_under_rules(&mut cur, &none, &mut sink);
    if cur.unshielded_colliders() != target {
        return dor_tarsi(g);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let undirected = cur.undirected_edges();
        if undirected.is_empty() {
            break;
        }
        let (a, b) = undirected[rng.random_range(0..undirected.len())];
        let order = if rng.random_bool(0.5) { [(a, b), (b, a)] } else { [(b, a), (a, b)] };
        let mut advanced = false;
        for (from, to) in order {
            let mut cand = cur.clone();
            if cand.orient(from, to).is_err() {
                continue;
            }
            close_under_rules(&mut cand, &none, &mut sink);
            if cand.unshielded_colliders() == target {
                cur = cand;
                advanced = true;
                break;
            }
        }
        if !advanced {
            return dor_tarsi(g);
        }
        sink.clear();
    }

    if g.is_consistent_extension(&cur) {
        Ok(cur)
    } else {
        dor_tarsi(g)
    }
}

/// Deterministic extension: repeatedly peel a node that is a sink of the
/// directed part and whose undirected neighbors are adjacent to all its
/// other neighbors, directing its undirected edges into it.
fn dor_tarsi(g: &PartialDag) -> Result<PartialDag, ExtensionError> {
    let n = g.node_count();
    let mut work = g.clone();
    let mut out = g.clone();
    let mut alive: BTreeSet<usize> = (0..n).collect();
    while !alive.is_empty() {
        let pick = alive.iter().copied().find(|&x| {
            if !work.children(x).is_empty() {
                return false;
            }
            let nb: Vec<usize> = work.adj(x).iter().copied().collect();
            work.undirected_neighbors(x)
                .into_iter()
                .all(|y| nb.iter().all(|&w| w == y || work.is_adjacent(w, y)))
        });
        let Some(x) = pick else {
            return Err(ExtensionError::NoExtension);
        };
        for y in work.undirected_neighbors(x) {
            out.orient(y, x).map_err(|_| ExtensionError::NoExtension)?;
        }
        let nb: Vec<usize> = work.adj(x).iter().copied().collect();
        for y in nb {
            work.remove_edge(x, y);
        }
        alive.remove(&x);
    }
    if g.is_consistent_extension(&out) {
        Ok(out)
    } else {
        Err(ExtensionError::NoExtension)
    }
}
