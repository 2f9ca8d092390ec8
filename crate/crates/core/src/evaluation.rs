//! Realized play, "leads to a leaf", the utility relation, and the
//! coinductive "always leads to a leaf".
//!
//! The successor of a node along its recorded choice depends only on the
//! body position, never on `n`. A repeated position on the realized path
//! therefore proves the play never ends, which turns the partial utility
//! relation into a total decision procedure.

use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::model::{AgentId, Choice, Graph, ProfileInstance, StepIndex, UtilityFn, VertexId, VertexKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub label: String,
    pub agent: AgentId,
    pub choice: Choice,
    /// Shift accumulated from the instance to this node.
    pub shift: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathEnd {
    /// Utilities are expressed in the instance's `n` (or substituted when it is concrete).
    Leaf {
        label: String,
        shift: u64,
        utilities: UtilityFn,
    },
    DivergenceCycle { label: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChosenPath {
    pub steps: Vec<PathStep>,
    pub end: PathEnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UtilityResult {
    Defined(AffineExpr),
    Diverges,
}

impl UtilityResult {
    pub fn defined(&self) -> Option<&AffineExpr> {
        match self {
            UtilityResult::Defined(e) => Some(e),
            UtilityResult::Diverges => None,
        }
    }
}

/// Where the realized play from a body position ends, independent of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Leaf { vertex: VertexId, shift: u64 },
    Diverges { repeat: VertexId },
}

fn walk(graph: &Graph, start: VertexId) -> (Vec<(VertexId, u64)>, Outcome) {
    let mut seen = vec![false; graph.len()];
    let mut steps = Vec::new();
    let mut v = start;
    let mut shift = 0;
    loop {
        if seen[v.0] {
            return (steps, Outcome::Diverges { repeat: v });
        }
        seen[v.0] = true;
        match graph.vertex(v).chosen_edge() {
            None => return (steps, Outcome::Leaf { vertex: v, shift }),
            Some(e) => {
                steps.push((v, shift));
                v = e.target;
                shift += e.shift;
            }
        }
    }
}

pub(crate) fn outcome(graph: &Graph, v: VertexId) -> Outcome {
    walk(graph, v).1
}

/// Outcomes for every vertex.
pub(crate) fn outcomes(graph: &Graph) -> Vec<Outcome> {
    let mut memo: Vec<Option<Outcome>> = vec![None; graph.len()];
    // marks left behind only sit on resolved vertices, which are checked first
    let mut on_chain = vec![false; graph.len()];
    let mut chain = Vec::new();
    for (id, _) in graph.vertices() {
        if memo[id.0].is_some() {
            continue;
        }
        // follow until a known vertex, a leaf or a repeat
        chain.clear();
        let mut v = id;
        let tail = loop {
            if let Some(o) = memo[v.0] {
                break o;
            }
            if on_chain[v.0] {
                break Outcome::Diverges { repeat: v };
            }
            on_chain[v.0] = true;
            match graph.vertex(v).chosen_edge() {
                None => {
                    memo[v.0] = Some(Outcome::Leaf { vertex: v, shift: 0 });
                    break Outcome::Leaf { vertex: v, shift: 0 };
                }
                Some(e) => {
                    chain.push((v, e.shift));
                    v = e.target;
                }
            }
        };
        let mut acc = tail;
        for &(u, s) in chain.iter().rev() {
            acc = match acc {
                Outcome::Leaf { vertex, shift } => Outcome::Leaf {
                    vertex,
                    shift: shift + s,
                },
                d => d,
            };
            memo[u.0] = Some(acc);
        }
    }
    memo.into_iter().map(|o| o.expect("all vertices resolved")).collect()
}

/// Utility of `agent` at the leaf an [`Outcome`] reaches, in the starting vertex's `n`.
pub(crate) fn leaf_utility(graph: &Graph, o: Outcome, agent: &AgentId) -> Option<AffineExpr> {
    match o {
        Outcome::Leaf { vertex, shift } => match &graph.vertex(vertex).kind {
            VertexKind::Leaf(f) => f.get(agent).map(|e| e.shift_n(shift)),
            VertexKind::Node { .. } => unreachable!("outcome ends at a leaf"),
        },
        Outcome::Diverges { .. } => None,
    }
}

fn concretize(e: &AffineExpr, n: StepIndex) -> AffineExpr {
    match n {
        StepIndex::Concrete(k) => e.substitute_n(k as i64),
        StepIndex::AtLeast(_) => e.clone(),
    }
}

pub fn chosen_path(graph: &Graph, instance: &ProfileInstance) -> Result<ChosenPath> {
    let start = graph.locate(instance)?;
    let (steps, end) = walk(graph, start);
    let steps = steps
        .into_iter()
        .map(|(v, shift)| {
            let vertex = graph.vertex(v);
            match &vertex.kind {
                VertexKind::Node { agent, choice, .. } => PathStep {
                    label: vertex.label.to_string(),
                    agent: agent.clone(),
                    choice: *choice,
                    shift,
                },
                VertexKind::Leaf(_) => unreachable!("leaves end the path"),
            }
        })
        .collect();
    let end = match end {
        Outcome::Leaf { vertex, shift } => {
            let v = graph.vertex(vertex);
            let VertexKind::Leaf(f) = &v.kind else {
                unreachable!("outcome ends at a leaf")
            };
            PathEnd::Leaf {
                label: v.label.to_string(),
                shift,
                utilities: f
                    .iter()
                    .map(|(a, e)| (a.clone(), concretize(&e.shift_n(shift), instance.n)))
                    .collect(),
            }
        }
        Outcome::Diverges { repeat } => PathEnd::DivergenceCycle {
            label: graph.vertex(repeat).label.to_string(),
        },
    };
    Ok(ChosenPath { steps, end })
}

pub fn leads_to_leaf(graph: &Graph, instance: &ProfileInstance) -> Result<bool> {
    let v = graph.locate(instance)?;
    Ok(matches!(outcome(graph, v), Outcome::Leaf { .. }))
}

pub fn utility(graph: &Graph, instance: &ProfileInstance, agent: &AgentId) -> Result<UtilityResult> {
    if !graph.has_agent(agent) {
        return Err(Error::AgentUnknown(agent.to_string()));
    }
    let v = graph.locate(instance)?;
    Ok(match leaf_utility(graph, outcome(graph, v), agent) {
        Some(e) => UtilityResult::Defined(concretize(&e, instance.n)),
        None => UtilityResult::Diverges,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlwaysLeadsToLeaf {
    pub holds: bool,
    /// A reachable position whose realized play never ends.
    pub failing: Option<String>,
    pub rounds: usize,
}

/// Also returns every vertex's outcome and the positions reachable from `start`.
pub(crate) fn always_leads_to_leaf_at(graph: &Graph, start: VertexId) -> (AlwaysLeadsToLeaf, Vec<Outcome>, Vec<VertexId>) {
    let outs = outcomes(graph);
    let reach = graph.reachable(start);
    let mut holds = vec![false; graph.len()];
    for v in &reach {
        holds[v.0] = true;
    }
    // greatest fixpoint: retract positions that do not lead to a leaf or have a retracted child
    let mut rounds = 0;
    let mut retract = Vec::new();
    loop {
        retract.extend(reach.iter().copied().filter(|v| holds[v.0]).filter(|v| {
            if matches!(outs[v.0], Outcome::Diverges { .. }) {
                return true;
            }
            match &graph.vertex(*v).kind {
                VertexKind::Node { left, right, .. } => !holds[left.target.0] || !holds[right.target.0],
                VertexKind::Leaf(_) => false,
            }
        }));
        if retract.is_empty() {
            break;
        }
        rounds += 1;
        for v in retract.drain(..) {
            holds[v.0] = false;
        }
    }
    let failing = reach
        .iter()
        .find(|v| matches!(outs[v.0], Outcome::Diverges { .. }))
        .map(|v| graph.vertex(*v).label.to_string());
    let result = AlwaysLeadsToLeaf {
        holds: holds[start.0],
        failing,
        rounds,
    };
    (result, outs, reach)
}

/// Every subprofile reachable through either child leads to a leaf.
pub fn always_leads_to_leaf(graph: &Graph, instance: &ProfileInstance) -> Result<AlwaysLeadsToLeaf> {
    let v = graph.locate(instance)?;
    Ok(always_leads_to_leaf_at(graph, v).0)
}

/// A choice override at a given depth of the realized path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathEdit {
    /// Number of nodes above the edited one on the path.
    pub depth: usize,
    pub label: String,
    pub n: u64,
    pub choice: Choice,
}

/// Concrete utility of `agent` after applying `edits` along the realized path
/// of `def(n)`. Each edit must land on the node the path actually reaches.
pub fn utility_with_edits(
    graph: &Graph,
    instance: &ProfileInstance,
    edits: &[PathEdit],
    agent: &AgentId,
) -> Result<UtilityResult> {
    if !graph.has_agent(agent) {
        return Err(Error::AgentUnknown(agent.to_string()));
    }
    let StepIndex::Concrete(n0) = instance.n else {
        return Err(Error::SymbolicStep);
    };
    let mut v = graph.locate(instance)?;
    let mut n = n0;
    let last_edit = edits.iter().map(|e| e.depth).max();
    let mut depth = 0;
    // edited prefix: bounded by the deepest edit
    while last_edit.is_some_and(|d| depth <= d) {
        let vertex = graph.vertex(v);
        let edit = edits.iter().find(|e| e.depth == depth);
        if let Some(e) = edit {
            if *e.label != *vertex.label || e.n != n || matches!(vertex.kind, VertexKind::Leaf(_)) {
                return Err(Error::EditMismatch { depth });
            }
        }
        let next = match (&vertex.kind, edit) {
            (VertexKind::Leaf(f), _) => {
                return Ok(match f.get(agent) {
                    Some(e) => UtilityResult::Defined(e.substitute_n(n as i64)),
                    None => UtilityResult::Diverges,
                })
            }
            (_, Some(e)) => vertex.edge(e.choice),
            (_, None) => vertex.chosen_edge(),
        }
        .expect("node has edges");
        v = next.target;
        n += next.shift;
        depth += 1;
    }
    Ok(match leaf_utility(graph, outcome(graph, v), agent) {
        Some(e) => UtilityResult::Defined(e.substitute_n(n as i64)),
        None => UtilityResult::Diverges,
    })
}
