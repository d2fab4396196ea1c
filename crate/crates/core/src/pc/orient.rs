//! Phase II: collider detection and the four orientation rules.

use std::collections::HashSet;

use super::knowledge::PriorKnowledge;
use super::log::{OrientationLog, Rule};
use crate::graph::{PartialDag, SepsetMap};

/// Orients `x -> z <- y` for every unshielded triple whose middle node is
/// missing from the recorded separating set of `x` and `y`.
///
/// Triples are visited in lexicographic order; a collider that would reverse
/// an existing orientation, contradict the knowledge or close a cycle is
/// skipped as a whole and logged.
pub fn orient_colliders(
    g: &PartialDag,
    sepsets: &SepsetMap,
    k: &PriorKnowledge,
) -> (PartialDag, OrientationLog) {
    let mut out = g.clone();
    let mut log = OrientationLog::default();
    orient_colliders_in_place(&mut out, sepsets, k, &mut log);
    (out, log)
}

pub(crate) fn orient_colliders_in_place(
    g: &mut PartialDag,
    sepsets: &SepsetMap,
    k: &PriorKnowledge,
    log: &mut OrientationLog,
) {
    for (x, z, y) in g.unshielded_triples() {
        let Some(sep) = sepsets.get(x, y) else {
            log.skipped(Rule::Collider, vec![x, z, y], "no separating set recorded");
            continue;
        };
        if sep.contains(&z) {
            continue;
        }
        if g.is_directed(x, z) && g.is_directed(y, z) {
            continue;
        }
        if let Some(reason) = [x, y].iter().find_map(|&arm| {
            if g.is_directed(z, arm) {
                Some(format!("{z} -> {arm} already oriented"))
            } else if !k.allows(arm, z) {
                Some(format!("{arm} -> {z} contradicts prior knowledge"))
            } else {
                None
            }
        }) {
            log.skipped(Rule::Collider, vec![x, z, y], reason);
            continue;
        }
        let before = g.clone();
        match g.orient(x, z).and_then(|_| g.orient(y, z)) {
            Ok(()) => log.applied(Rule::Collider, vec![x, z, y], ""),
            Err(e) => {
                *g = before;
                log.skipped(Rule::Collider, vec![x, z, y], e.to_string());
            }
        }
    }
}

/// Applies the orientation rules until a full pass changes nothing.
pub fn apply_orientation_rules(g: &PartialDag, k: &PriorKnowledge) -> (PartialDag, OrientationLog) {
    let mut out = g.clone();
    let mut log = OrientationLog::default();
    close_under_rules(&mut out, k, &mut log);
    (out, log)
}

/// In-place closure; returns the number of edges oriented.
pub fn close_under_rules(g: &mut PartialDag, k: &PriorKnowledge, log: &mut OrientationLog) -> usize {
    let mut oriented = 0;
    let mut reported: HashSet<(usize, usize, Rule)> = HashSet::new();
    loop {
        let mut changed = false;
        for (a, b) in g.undirected_edges() {
            if !g.is_undirected(a, b) {
                continue;
            }
            for (from, to) in [(a, b), (b, a)] {
                let Some((rule, witness)) = fired_rule(g, from, to) else {
                    continue;
                };
                let mut nodes = vec![from, to];
                nodes.extend(witness);
                if !k.allows(from, to) {
                    if reported.insert((from, to, rule)) {
                        log.skipped(rule, nodes, "contradicts prior knowledge");
                    }
                    continue;
                }
                match g.orient(from, to) {
                    Ok(()) => {
                        log.applied(rule, nodes, "");
                        oriented += 1;
                        changed = true;
                        break;
                    }
                    Err(e) => {
                        if reported.insert((from, to, rule)) {
                            log.skipped(rule, nodes, e.to_string());
                        }
                    }
                }
            }
        }
        if !changed {
            return oriented;
        }
    }
}

/// First rule that forces the undirected edge `x - y` into `x -> y`,
/// with the witnessing nodes.
fn fired_rule(g: &PartialDag, x: usize, y: usize) -> Option<(Rule, Vec<usize>)> {
    // R1: w -> x - y, w and y not adjacent.
    if let Some(w) = g.parents(x).into_iter().find(|&w| !g.is_adjacent(w, y)) {
        return Some((Rule::R1, vec![w]));
    }
    // R2: x -> w -> y.
    if let Some(w) = g.children(x).into_iter().find(|&w| g.is_directed(w, y)) {
        return Some((Rule::R2, vec![w]));
    }
    let y_parents = g.parents(y);
    // R3: x - w1 -> y, x - w2 -> y, w1 and w2 not adjacent.
    let und: Vec<usize> = g
        .undirected_neighbors(x)
        .into_iter()
        .filter(|w| y_parents.contains(w))
        .collect();
    for (i, &w1) in und.iter().enumerate() {
        for &w2 in &und[i + 1..] {
            if !g.is_adjacent(w1, w2) {
                return Some((Rule::R3, vec![w1, w2]));
            }
        }
    }
    // R4: c -> d -> y with x adjacent to both c and d, c and y not adjacent.
    for &d in &y_parents {
        if d == x || !g.is_adjacent(x, d) {
            continue;
        }
        for c in g.parents(d) {
            if c != x && c != y && g.is_adjacent(x, c) && !g.is_adjacent(c, y) {
                return Some((Rule::R4, vec![c, d]));
            }
        }
    }
    None
}
