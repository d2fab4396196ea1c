//! Reachability ("Bayes ball") d-separation.

use std::collections::VecDeque;

use super::{GraphError, PartialDag};

pub(super) fn d_separated(
    g: &PartialDag,
    x: usize,
    y: usize,
    z: &[usize],
) -> Result<bool, GraphError> {
    let n = g.node_count();
    for &v in z.iter().chain([&x, &y]) {
        g.check(v)?;
    }
    if let Some((a, b)) = g.undirected_edges().first() {
        return Err(GraphError::NotFullyDirected(*a, *b));
    }
    if x == y {
        return Ok(false);
    }

    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    // A collider is open iff it is in Z or has a descendant in Z, i.e. it
    // is an ancestor of Z.
    let mut anc_z = vec![false; n];
    for v in g.ancestors_of(z) {
        anc_z[v] = true;
    }

    // state: (node, arrived_from_child). `true` means we entered the node
    // travelling against an edge (from one of its children).
    let mut visited = vec![[false; 2]; n];
    let mut queue = VecDeque::new();
    queue.push_back((x, true));
    while let Some((v, from_child)) = queue.pop_front() {
        let slot = usize::from(from_child);
        if visited[v][slot] {
            continue;
        }
        visited[v][slot] = true;
        if v == y {
            return Ok(false);
        }
        if from_child {
            if !in_z[v] {
                for p in g.parents(v) {
                    queue.push_back((p, true));
                }
                for c in g.children(v) {
                    queue.push_back((c, false));
                }
            }
        } else {
            // arrived from a parent
            if !in_z[v] {
                for c in g.children(v) {
                    queue.push_back((c, false));
                }
            }
            if anc_z[v] {
                for p in g.parents(v) {
                    queue.push_back((p, true));
                }
            }
        }
    }
    Ok(true)
}
