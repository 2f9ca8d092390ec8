use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::affine::Valuation;
use crate::error::{Error, Result};
use crate::evaluation::{outcome, Outcome, PathEdit};
use crate::model::{AgentId, Graph, PrefOrder, ProfileInstance, Site, StepIndex, VertexId, VertexKind};

/// A finite set of choice edits by one agent along the realized path that
/// reaches a leaf strictly better for that agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationWitness {
    pub agent: AgentId,
    pub edits: Vec<PathEdit>,
    pub original: i64,
    pub deviation: i64,
    pub leaf: Site,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum NashVerdict {
    NotNash(DeviationWitness),
    /// No improving deviation with edits above `depth`. `exhaustive` is set
    /// when no deeper deviation exists at all, which makes the verdict exact.
    NashUpToDepth { depth: usize, exhaustive: bool },
    /// The realized play never ends, so the definition holds trivially.
    VacuouslyNash,
}

/// `4 * |defs|`.
pub fn default_depth_bound(graph: &Graph) -> usize {
    (4 * graph.system().defs.len()).max(1)
}

#[derive(Clone, Debug)]
struct Candidate {
    utility: i64,
    edits: Vec<PathEdit>,
    leaf: Site,
}

struct Search<'a> {
    graph: &'a Graph,
    agent: &'a AgentId,
    pref: PrefOrder,
    bound: usize,
    values: &'a Valuation,
    /// The recorded path from a position meets a node of `agent`.
    owns_ahead: Vec<bool>,
    memo: HashMap<(VertexId, u64, usize), Option<Candidate>>,
    cut: bool,
}

impl Search<'_> {
    fn better(&self, a: &Candidate, b: &Candidate) -> bool {
        self.pref.strictly_prefers(a.utility, b.utility) || (a.utility == b.utility && a.edits.len() < b.edits.len())
    }

    fn pick(&self, best: &mut Option<Candidate>, cand: Option<Candidate>) {
        if let Some(c) = cand {
            if best.as_ref().is_none_or(|b| self.better(&c, b)) {
                *best = Some(c);
            }
        }
    }

    fn recorded(&self, v: VertexId, n: u64) -> Result<Option<Candidate>> {
        let Outcome::Leaf { vertex, shift } = outcome(self.graph, v) else {
            return Ok(None);
        };
        let VertexKind::Leaf(f) = &self.graph.vertex(vertex).kind else {
            unreachable!("outcome ends at a leaf")
        };
        let Some(e) = f.get(self.agent) else {
            return Ok(None);
        };
        let at = n + shift;
        Ok(Some(Candidate {
            utility: e.eval(at as i64, self.values)?,
            edits: Vec::new(),
            leaf: Site::new(self.graph.vertex(vertex).label.to_string(), at),
        }))
    }

    fn best(&mut self, v: VertexId, n: u64, depth: usize) -> Result<Option<Candidate>> {
        if let Some(hit) = self.memo.get(&(v, n, depth)) {
            return Ok(hit.clone());
        }
        let graph = self.graph;
        let mut best = self.recorded(v, n)?;
        let vertex = graph.vertex(v);
        if let VertexKind::Node { agent, choice, .. } = &vertex.kind {
            if self.owns_ahead[v.0] {
                if depth >= self.bound {
                    self.cut = true;
                } else {
                    let e = vertex.chosen_edge().expect("node");
                    let stay = self.best(e.target, n + e.shift, depth + 1)?;
                    self.pick(&mut best, stay);
                    if agent == self.agent {
                        let flipped = choice.flip();
                        let e = vertex.edge(flipped).expect("node");
                        let dev = self.best(e.target, n + e.shift, depth + 1)?.map(|mut o| {
                            o.edits.insert(
                                0,
                                PathEdit {
                                    depth,
                                    label: vertex.label.to_string(),
                                    n,
                                    choice: flipped,
                                },
                            );
                            o
                        });
                        self.pick(&mut best, dev);
                    }
                }
            }
        }
        self.memo.insert((v, n, depth), best.clone());
        Ok(best)
    }
}

fn owns_ahead(graph: &Graph, agent: &AgentId) -> Vec<bool> {
    graph
        .vertices()
        .map(|(start, _)| {
            let mut seen = vec![false; graph.len()];
            let mut v = start;
            loop {
                if seen[v.0] {
                    return false;
                }
                seen[v.0] = true;
                let vertex = graph.vertex(v);
                match &vertex.kind {
                    VertexKind::Leaf(_) => return false,
                    VertexKind::Node { agent: a, .. } if a == agent => return true,
                    VertexKind::Node { .. } => v = vertex.chosen_edge().expect("node").target,
                }
            }
        })
        .collect()
}

/// Searches, agent by agent, for a strictly improving deviation whose edits
/// all sit at most `depth_bound - 1` nodes deep on the path.
pub fn check_nash(
    graph: &Graph,
    instance: &ProfileInstance,
    pref: PrefOrder,
    depth_bound: usize,
    values: &Valuation,
) -> Result<NashVerdict> {
    if depth_bound < 1 {
        return Err(Error::InvalidBound("depth bound must be at least 1".into()));
    }
    let StepIndex::Concrete(n0) = instance.n else {
        return Err(Error::SymbolicStep);
    };
    graph.check_valuation(values)?;
    let start = graph.locate(instance)?;
    if matches!(outcome(graph, start), Outcome::Diverges { .. }) {
        return Ok(NashVerdict::VacuouslyNash);
    }
    let mut exhaustive = true;
    for agent in graph.agents() {
        let mut search = Search {
            graph,
            agent,
            pref,
            bound: depth_bound,
            values,
            owns_ahead: owns_ahead(graph, agent),
            memo: HashMap::new(),
            cut: false,
        };
        let original = search.recorded(start, n0)?.expect("validated leaves are total").utility;
        let best = search.best(start, n0, 0)?;
        exhaustive &= !search.cut;
        if let Some(b) = best {
            if pref.strictly_prefers(b.utility, original) {
                return Ok(NashVerdict::NotNash(DeviationWitness {
                    agent: agent.clone(),
                    edits: b.edits,
                    original,
                    deviation: b.utility,
                    leaf: b.leaf,
                }));
            }
        }
    }
    Ok(NashVerdict::NashUpToDepth {
        depth: depth_bound,
        exhaustive,
    })
}
