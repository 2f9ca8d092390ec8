use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AgentId, Choice, Graph, ProfileInstance, StepIndex, VertexId, VertexKind};
use crate::affine::Valuation;
use crate::error::{Error, Result};

/// Where a subtree of the unrolling comes from: a body position at a step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub label: String,
    pub n: u64,
}

impl Site {
    pub fn new(label: impl Into<String>, n: u64) -> Self {
        Self {
            label: label.into(),
            n,
        }
    }
}

/// A finite expansion of a profile. Unexpanded nodes are explicit holes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unrolled {
    Leaf {
        site: Site,
        payoff: BTreeMap<AgentId, i64>,
    },
    Node {
        site: Site,
        agent: AgentId,
        choice: Choice,
        left: Box<Unrolled>,
        right: Box<Unrolled>,
    },
    Hole(Site),
}

impl Unrolled {
    pub fn site(&self) -> &Site {
        match self {
            Unrolled::Leaf { site, .. } | Unrolled::Node { site, .. } | Unrolled::Hole(site) => site,
        }
    }

    /// Cuts every node below `depth` node layers into a hole.
    pub fn restrict(&self, depth: usize) -> Unrolled {
        match self {
            Unrolled::Node { site, .. } if depth == 0 => Unrolled::Hole(site.clone()),
            Unrolled::Node {
                site,
                agent,
                choice,
                left,
                right,
            } => Unrolled::Node {
                site: site.clone(),
                agent: agent.clone(),
                choice: *choice,
                left: Box::new(left.restrict(depth - 1)),
                right: Box::new(right.restrict(depth - 1)),
            },
            other => other.clone(),
        }
    }

    pub fn count_nodes(&self) -> usize {
        match self {
            Unrolled::Node { left, right, .. } => 1 + left.count_nodes() + right.count_nodes(),
            _ => 0,
        }
    }

    pub fn count_holes(&self) -> usize {
        match self {
            Unrolled::Node { left, right, .. } => left.count_holes() + right.count_holes(),
            Unrolled::Hole(_) => 1,
            Unrolled::Leaf { .. } => 0,
        }
    }
}

/// Expands `instance` by `depth` node layers. Leaves are always expanded;
/// a node reached with no depth left becomes a hole.
pub fn unroll(
    graph: &Graph,
    instance: &ProfileInstance,
    depth: usize,
    values: &Valuation,
) -> Result<Unrolled> {
    let n = match instance.n {
        StepIndex::Concrete(n) => n,
        StepIndex::AtLeast(_) => return Err(Error::SymbolicStep),
    };
    graph.check_valuation(values)?;
    let v = graph.locate(instance)?;
    unroll_vertex(graph, v, n, depth, values)
}

pub(crate) fn unroll_vertex(
    graph: &Graph,
    v: VertexId,
    n: u64,
    depth: usize,
    values: &Valuation,
) -> Result<Unrolled> {
    let vertex = graph.vertex(v);
    let site = Site::new(vertex.label.to_string(), n);
    match &vertex.kind {
        VertexKind::Leaf(f) => {
            let payoff = f
                .iter()
                .map(|(a, e)| Ok((a.clone(), e.eval(n as i64, values)?)))
                .collect::<Result<_>>()?;
            Ok(Unrolled::Leaf { site, payoff })
        }
        VertexKind::Node { .. } if depth == 0 => Ok(Unrolled::Hole(site)),
        VertexKind::Node {
            agent,
            choice,
            left,
            right,
        } => Ok(Unrolled::Node {
            site,
            agent: agent.clone(),
            choice: *choice,
            left: Box::new(unroll_vertex(graph, left.target, n + left.shift, depth - 1, values)?),
            right: Box::new(unroll_vertex(graph, right.target, n + right.shift, depth - 1, values)?),
        }),
    }
}
