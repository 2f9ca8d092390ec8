//! Finite strategy profiles and brute-force ground truth: convertibility,
//! Nash and subgame perfection by enumeration, backward induction, and
//! truncation of (possibly infinite) systems.
//!
//! Nothing here calls into the coinductive engine; these functions are the
//! independent oracles the engine is checked against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affine::{AffineExpr, Valuation};
use crate::error::{Error, Result};
use crate::model::{
    unroll, AgentId, Choice, Graph, PrefOrder, ProfileDef, ProfileInstance, ProfileSystem, Unrolled, UtilityFn,
};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FiniteProfile {
    Leaf(BTreeMap<AgentId, i64>),
    Node {
        agent: AgentId,
        choice: Choice,
        left: Box<FiniteProfile>,
        right: Box<FiniteProfile>,
    },
}

impl FiniteProfile {
    pub fn leaf<A: Into<AgentId>>(entries: impl IntoIterator<Item = (A, i64)>) -> Self {
        FiniteProfile::Leaf(entries.into_iter().map(|(a, u)| (a.into(), u)).collect())
    }

    pub fn node(agent: impl Into<AgentId>, choice: Choice, left: FiniteProfile, right: FiniteProfile) -> Self {
        FiniteProfile::Node {
            agent: agent.into(),
            choice,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Utility along the recorded choices.
    pub fn utility(&self, agent: &AgentId) -> Option<i64> {
        match self {
            FiniteProfile::Leaf(f) => f.get(agent).copied(),
            FiniteProfile::Node {
                choice, left, right, ..
            } => match choice {
                Choice::Left => left.utility(agent),
                Choice::Right => right.utility(agent),
            },
        }
    }

    /// Node layers on the longest path; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            FiniteProfile::Leaf(_) => 0,
            FiniteProfile::Node { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            FiniteProfile::Leaf(_) => 0,
            FiniteProfile::Node { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    /// Every agent owning a node or named in a leaf.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<AgentId>) {
        match self {
            FiniteProfile::Leaf(f) => {
                for a in f.keys() {
                    if !out.contains(a) {
                        out.insert(a.clone());
                    }
                }
            }
            FiniteProfile::Node {
                agent, left, right, ..
            } => {
                if !out.contains(agent) {
                    out.insert(agent.clone());
                }
                left.collect_agents(out);
                right.collect_agents(out);
            }
        }
    }

    /// Number of nodes owned by `agent`.
    pub fn owned_by(&self, agent: &AgentId) -> usize {
        match self {
            FiniteProfile::Leaf(_) => 0,
            FiniteProfile::Node {
                agent: a, left, right, ..
            } => usize::from(a == agent) + left.owned_by(agent) + right.owned_by(agent),
        }
    }

    /// Rewrites the choices of `agent`'s nodes in pre-order from the bits of `mask`.
    pub fn with_agent_choices(&self, agent: &AgentId, mask: u64) -> FiniteProfile {
        let mut bit = 0;
        self.assign(agent, mask, &mut bit)
    }

    fn assign(&self, agent: &AgentId, mask: u64, bit: &mut u32) -> FiniteProfile {
        match self {
            FiniteProfile::Leaf(_) => self.clone(),
            FiniteProfile::Node {
                agent: a,
                choice,
                left,
                right,
            } => {
                let choice = if a == agent {
                    let c = if mask >> *bit & 1 == 1 { Choice::Right } else { Choice::Left };
                    *bit += 1;
                    c
                } else {
                    *choice
                };
                let left = left.assign(agent, mask, bit);
                let right = right.assign(agent, mask, bit);
                FiniteProfile::Node {
                    agent: a.clone(),
                    choice,
                    left: Box::new(left),
                    right: Box::new(right),
                }
            }
        }
    }
}

impl fmt::Display for FiniteProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteProfile::Leaf(u) => {
                write!(f, "<<")?;
                for (i, (a, x)) in u.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}:{x}")?;
                }
                write!(f, ">>")
            }
            FiniteProfile::Node {
                agent,
                choice,
                left,
                right,
            } => write!(f, "<<{agent},{choice},{left},{right}>>"),
        }
    }
}

/// `s` and `t` differ only in choices at nodes owned by `agent`.
pub fn convertible(s: &FiniteProfile, t: &FiniteProfile, agent: &AgentId) -> Result<bool> {
    match (s, t) {
        (FiniteProfile::Leaf(f), FiniteProfile::Leaf(g)) => {
            if f == g {
                Ok(true)
            } else {
                Err(Error::ShapeMismatch)
            }
        }
        (
            FiniteProfile::Node {
                agent: a1,
                choice: c1,
                left: l1,
                right: r1,
            },
            FiniteProfile::Node {
                agent: a2,
                choice: c2,
                left: l2,
                right: r2,
            },
        ) => {
            if a1 != a2 {
                return Err(Error::ShapeMismatch);
            }
            let here = a1 == agent || c1 == c2;
            let l = convertible(l1, l2, agent)?;
            let r = convertible(r1, r2, agent)?;
            Ok(here && l && r)
        }
        _ => Err(Error::ShapeMismatch),
    }
}

/// Nash by enumerating all choice reassignments at each agent's nodes.
pub fn brute_nash(s: &FiniteProfile, pref: PrefOrder) -> bool {
    for agent in s.agents() {
        let Some(current) = s.utility(&agent) else {
            continue;
        };
        let k = s.owned_by(&agent);
        assert!(k < 32, "enumeration over {k} nodes is out of desk scale");
        for mask in 0..(1u64 << k) {
            let t = s.with_agent_choices(&agent, mask);
            if let Some(u) = t.utility(&agent) {
                if pref.strictly_prefers(u, current) {
                    return false;
                }
            }
        }
    }
    true
}

/// Literal structural recursion over the three subgame-perfection clauses.
pub fn brute_sgpe(s: &FiniteProfile, pref: PrefOrder) -> bool {
    match s {
        FiniteProfile::Leaf(_) => true,
        FiniteProfile::Node {
            agent,
            choice,
            left,
            right,
        } => {
            if !brute_sgpe(left, pref) || !brute_sgpe(right, pref) {
                return false;
            }
            let (Some(u), Some(v)) = (left.utility(agent), right.utility(agent)) else {
                return false;
            };
            match choice {
                Choice::Left => pref.weakly_prefers(u, v),
                Choice::Right => pref.weakly_prefers(v, u),
            }
        }
    }
}

/// All profiles obtained by bottom-up optimal choice, branching on ties.
/// Recorded choices in `game` are ignored.
pub fn backward_induction(game: &FiniteProfile, pref: PrefOrder) -> BTreeSet<FiniteProfile> {
    match game {
        FiniteProfile::Leaf(_) => BTreeSet::from([game.clone()]),
        FiniteProfile::Node {
            agent, left, right, ..
        } => {
            let lefts = backward_induction(left, pref);
            let rights = backward_induction(right, pref);
            let mut out = BTreeSet::new();
            for l in &lefts {
                for r in &rights {
                    let (Some(u), Some(v)) = (l.utility(agent), r.utility(agent)) else {
                        continue;
                    };
                    for c in Choice::BOTH {
                        let ok = match c {
                            Choice::Left => pref.weakly_prefers(u, v),
                            Choice::Right => pref.weakly_prefers(v, u),
                        };
                        if ok {
                            out.insert(FiniteProfile::node(agent.clone(), c, l.clone(), r.clone()));
                        }
                    }
                }
            }
            out
        }
    }
}

/// How to cut an infinite profile: expand `depth` node layers and replace
/// each hole with `padding` evaluated at the hole's step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub depth: usize,
    pub padding: UtilityFn,
}

fn pad(tree: Unrolled, padding: &UtilityFn, values: &Valuation) -> Result<FiniteProfile> {
    Ok(match tree {
        Unrolled::Leaf { payoff, .. } => FiniteProfile::Leaf(payoff),
        Unrolled::Node {
            agent,
            choice,
            left,
            right,
            ..
        } => FiniteProfile::Node {
            agent,
            choice,
            left: Box::new(pad(*left, padding, values)?),
            right: Box::new(pad(*right, padding, values)?),
        },
        Unrolled::Hole(site) => FiniteProfile::Leaf(
            padding
                .iter()
                .map(|(a, e)| Ok((a.clone(), e.eval(site.n as i64, values)?)))
                .collect::<Result<_>>()?,
        ),
    })
}

/// The root of `graph` cut at `policy.depth`, with concrete parameters.
pub fn truncate(graph: &Graph, policy: &TruncationPolicy, values: &Valuation) -> Result<FiniteProfile> {
    for a in graph.agents() {
        if !policy.padding.contains_key(a) {
            return Err(Error::InvalidPadding(a.to_string()));
        }
    }
    let root = ProfileInstance::root(graph.system());
    let tree = unroll(graph, &root, policy.depth, values)?;
    pad(tree, &policy.padding, values)
}

/// Name of the single definition produced by [`embed`].
pub const EMBED_ROOT: &str = "root";

fn embed_def(s: &FiniteProfile) -> ProfileDef {
    match s {
        FiniteProfile::Leaf(f) => ProfileDef::Leaf(f.iter().map(|(a, u)| (a.clone(), AffineExpr::constant(*u))).collect()),
        FiniteProfile::Node {
            agent,
            choice,
            left,
            right,
        } => ProfileDef::node(agent.clone(), *choice, embed_def(left), embed_def(right)),
    }
}

/// A finite profile as a cycle-free, one-definition system `root(0)`.
pub fn embed(s: &FiniteProfile) -> ProfileSystem {
    let mut sys = ProfileSystem::new(s.agents(), EMBED_ROOT, 0);
    sys.defs.insert(EMBED_ROOT.to_string(), embed_def(s));
    sys
}
