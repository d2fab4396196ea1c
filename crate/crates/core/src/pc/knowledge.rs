use std::collections::BTreeSet;

use thiserror::Error;

use super::log::{OrientationLog, Rule};
use crate::graph::{GraphError, Mark, PartialDag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnowledgeError {
    #[error("edge {from} -> {to} is both required and forbidden")]
    RequiredAndForbidden { from: usize, to: usize },
    #[error("required edge {from} -> {to} points from tier {from_tier} back to tier {to_tier}")]
    RequiredAgainstTiers { from: usize, to: usize, from_tier: u32, to_tier: u32 },
    #[error("existing edge {from} -> {to} contradicts prior knowledge")]
    Conflict { from: usize, to: usize },
    #[error("cannot orient {from} -> {to}: {source}")]
    Orientation { from: usize, to: usize, source: GraphError },
    #[error("self-referential knowledge on node {0}")]
    SelfPair(usize),
}

/// Background knowledge: temporal tiers plus explicit required/forbidden
/// directed pairs.
///
/// Lower tier ranks come first; an edge may never point from a higher tier
/// to a lower one. Nodes without a tier are unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriorKnowledge {
    tiers: Vec<Option<u32>>,
    required: BTreeSet<(usize, usize)>,
    forbidden: BTreeSet<(usize, usize)>,
}

impl PriorKnowledge {
    pub fn none(n: usize) -> Self {
        Self { tiers: vec![None; n], ..Self::default() }
    }

    pub fn from_tiers(tiers: Vec<Option<u32>>) -> Self {
        Self { tiers, ..Self::default() }
    }

    /// Tier ranks for every node, e.g. `[0, 0, 1, 2]`.
    pub fn from_ranks(ranks: &[u32]) -> Self {
        Self::from_tiers(ranks.iter().map(|&r| Some(r)).collect())
    }

    pub fn require(&mut self, from: usize, to: usize) -> Result<(), KnowledgeError> {
        if from == to {
            return Err(KnowledgeError::SelfPair(from));
        }
        if self.forbidden.contains(&(from, to)) {
            return Err(KnowledgeError::RequiredAndForbidden { from, to });
        }
        if let (Some(a), Some(b)) = (self.tier(from), self.tier(to)) {
            if a > b {
                return Err(KnowledgeError::RequiredAgainstTiers {
                    from,
                    to,
                    from_tier: a,
                    to_tier: b,
                });
            }
        }
        self.required.insert((from, to));
        Ok(())
    }

    pub fn forbid(&mut self, from: usize, to: usize) -> Result<(), KnowledgeError> {
        if from == to {
            return Err(KnowledgeError::SelfPair(from));
        }
        if self.required.contains(&(from, to)) {
            return Err(KnowledgeError::RequiredAndForbidden { from, to });
        }
        self.forbidden.insert((from, to));
        Ok(())
    }

    pub fn tier(&self, v: usize) -> Option<u32> {
        self.tiers.get(v).copied().flatten()
    }

    pub fn tiers(&self) -> &[Option<u32>] {
        &self.tiers
    }

    pub fn is_required(&self, from: usize, to: usize) -> bool {
        self.required.contains(&(from, to))
    }

    pub fn is_empty(&self) -> bool {
        self.required.is_empty()
            && self.forbidden.is_empty()
            && self.tiers.iter().all(Option::is_none)
    }

    /// Whether `from -> to` is compatible with the knowledge.
    pub fn allows(&self, from: usize, to: usize) -> bool {
        if self.forbidden.contains(&(from, to)) || self.required.contains(&(to, from)) {
            return false;
        }
        !matches!((self.tier(from), self.tier(to)), (Some(a), Some(b)) if a > b)
    }

    /// Orientation the knowledge forces on an undirected `a - b`, if any.
    pub fn forced(&self, a: usize, b: usize) -> Option<(usize, usize, Rule)> {
        if self.required.contains(&(a, b)) {
            return Some((a, b, Rule::Required));
        }
        if self.required.contains(&(b, a)) {
            return Some((b, a, Rule::Required));
        }
        if let (Some(ta), Some(tb)) = (self.tier(a), self.tier(b)) {
            if ta < tb {
                return Some((a, b, Rule::Tier));
            }
            if tb < ta {
                return Some((b, a, Rule::Tier));
            }
        }
        match (self.forbidden.contains(&(a, b)), self.forbidden.contains(&(b, a))) {
            (true, false) => Some((b, a, Rule::Forbidden)),
            (false, true) => Some((a, b, Rule::Forbidden)),
            _ => None,
        }
    }
}

/// Orients every undirected edge whose direction the knowledge determines.
pub fn apply_tiers(g: &PartialDag, k: &PriorKnowledge) -> Result<PartialDag, KnowledgeError> {
    let mut out = g.clone();
    apply_knowledge(&mut out, k, &mut OrientationLog::default())?;
    Ok(out)
}

pub(crate) fn apply_knowledge(
    g: &mut PartialDag,
    k: &PriorKnowledge,
    log: &mut OrientationLog,
) -> Result<(), KnowledgeError> {
    let edges: Vec<_> = g.edges().collect();
    for e in edges {
        match e.mark {
            Mark::Directed => {
                if !k.allows(e.a, e.b) {
                    return Err(KnowledgeError::Conflict { from: e.a, to: e.b });
                }
            }
            Mark::Undirected => {
                if let Some((from, to, rule)) = k.forced(e.a, e.b) {
                    g.orient(from, to)
                        .map_err(|source| KnowledgeError::Orientation { from, to, source })?;
                    log.applied(rule, vec![from, to], "");
                }
            }
        }
    }
    Ok(())
}
