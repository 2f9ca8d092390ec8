use std::collections::BTreeMap;
use std::sync::Arc;

use super::{AgentId, Child, Choice, ProfileDef, ProfileInstance, ProfileSystem, UtilityFn};
use crate::affine::Valuation;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// A child pointer: the target vertex evaluated at `n + shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub target: VertexId,
    pub shift: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Leaf(UtilityFn),
    Node {
        agent: AgentId,
        choice: Choice,
        left: Edge,
        right: Edge,
    },
}

/// One body position. Definition roots are labelled by the definition name,
/// inline positions by a dotted path such as `dolAcBs.l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub label: Arc<str>,
    pub def: Arc<str>,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn edge(&self, c: Choice) -> Option<Edge> {
        match &self.kind {
            VertexKind::Leaf(_) => None,
            VertexKind::Node { left, right, .. } => Some(match c {
                Choice::Left => *left,
                Choice::Right => *right,
            }),
        }
    }

    /// The edge along the recorded choice.
    pub fn chosen_edge(&self) -> Option<Edge> {
        match &self.kind {
            VertexKind::Leaf(_) => None,
            VertexKind::Node { choice, .. } => self.edge(*choice),
        }
    }
}

/// A validated system flattened into a finite graph of body positions.
///
/// Every reachable subtree of the unrolling is a pair `(vertex, n)`.
#[derive(Clone, Debug)]
pub struct Graph {
    system: ProfileSystem,
    vertices: Vec<Vertex>,
    def_roots: BTreeMap<String, VertexId>,
}

impl Graph {
    pub fn new(system: ProfileSystem) -> Result<Self> {
        let diags = system.validate();
        if !diags.is_empty() {
            return Err(Error::InvalidSystem(diags));
        }
        // definition roots come first in their pre-order block
        let mut def_roots = BTreeMap::new();
        let mut total = 0;
        for (name, def) in &system.defs {
            def_roots.insert(name.clone(), VertexId(total));
            total += positions(def);
        }
        let mut vertices = Vec::with_capacity(total);
        for (name, def) in &system.defs {
            flatten(name, &name.as_str().into(), def, &def_roots, &mut vertices);
        }
        Ok(Self {
            system,
            vertices,
            def_roots,
        })
    }

    pub fn system(&self) -> &ProfileSystem {
        &self.system
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.system.agents
    }

    pub fn has_agent(&self, a: &AgentId) -> bool {
        self.system.agents.contains(a)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex)> {
        self.vertices.iter().enumerate().map(|(i, v)| (VertexId(i), v))
    }

    pub fn def_vertex(&self, def: &str) -> Result<VertexId> {
        self.def_roots
            .get(def)
            .copied()
            .ok_or_else(|| Error::UnknownDef(def.to_string()))
    }

    pub fn locate(&self, instance: &ProfileInstance) -> Result<VertexId> {
        self.def_vertex(&instance.def)
    }

    pub fn root(&self) -> (VertexId, u64) {
        (self.def_roots[&self.system.root.def], self.system.root.n0)
    }

    pub fn max_shift(&self) -> u64 {
        self.vertices
            .iter()
            .filter_map(|v| match &v.kind {
                VertexKind::Node { left, right, .. } => Some(left.shift.max(right.shift)),
                VertexKind::Leaf(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Checks that `values` gives every declared parameter a value at or
    /// above its bound.
    pub fn check_valuation(&self, values: &Valuation) -> Result<()> {
        for (name, bound) in &self.system.params {
            let value = *values
                .get(name)
                .ok_or_else(|| Error::ParamUnbound(name.clone()))?;
            if value < *bound {
                return Err(Error::ParamBelowBound {
                    name: name.clone(),
                    value,
                    bound: *bound,
                });
            }
        }
        Ok(())
    }

    /// Vertices reachable from `start` through either child, in BFS order.
    pub fn reachable(&self, start: VertexId) -> Vec<VertexId> {
        let mut seen = vec![false; self.len()];
        let mut order = Vec::with_capacity(self.len());
        order.push(start);
        seen[start.0] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            if let VertexKind::Node { left, right, .. } = &self.vertex(v).kind {
                for e in [left, right] {
                    if !seen[e.target.0] {
                        seen[e.target.0] = true;
                        order.push(e.target);
                    }
                }
            }
        }
        order
    }
}

fn positions(body: &ProfileDef) -> usize {
    match body {
        ProfileDef::Leaf(_) => 1,
        ProfileDef::Node { left, right, .. } => {
            let inline = |c: &Child| match c {
                Child::Ref(_) => 0,
                Child::Inline(d) => positions(d),
            };
            1 + inline(left) + inline(right)
        }
    }
}

fn flatten(
    label: &str,
    def: &Arc<str>,
    body: &ProfileDef,
    roots: &BTreeMap<String, VertexId>,
    out: &mut Vec<Vertex>,
) -> VertexId {
    let id = VertexId(out.len());
    let vertex = |kind| Vertex {
        label: label.into(),
        def: def.clone(),
        kind,
    };
    match body {
        ProfileDef::Leaf(f) => out.push(vertex(VertexKind::Leaf(f.clone()))),
        ProfileDef::Node {
            agent,
            choice,
            left,
            right,
        } => {
            // edges are patched once the children have ids
            let here = Edge { target: id, shift: 0 };
            out.push(vertex(VertexKind::Node {
                agent: agent.clone(),
                choice: *choice,
                left: here,
                right: here,
            }));
            let mut edge = |child: &Child, side: &str| match child {
                Child::Ref(r) => Edge {
                    target: roots[&r.target],
                    shift: r.shift,
                },
                Child::Inline(d) => {
                    let mut sub = String::with_capacity(label.len() + 2);
                    sub.push_str(label);
                    sub.push('.');
                    sub.push_str(side);
                    Edge {
                        target: flatten(&sub, def, d, roots, out),
                        shift: 0,
                    }
                }
            };
            let (l, r) = (edge(left, "l"), edge(right, "r"));
            if let VertexKind::Node { left, right, .. } = &mut out[id.0].kind {
                *left = l;
                *right = r;
            }
        }
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dollar::{build_profile, DollarConfig, DollarProfile};

    #[test]
    fn dollar_profile_flattens_to_three_positions() {
        let g = Graph::new(build_profile(DollarProfile::AcBs, &DollarConfig::default())).unwrap();
        let labels: Vec<_> = g.vertices().map(|(_, v)| &*v.label).collect();
        assert_eq!(labels, ["dolAcBs", "dolAcBs.l", "dolAcBs.l.r", "dolAcBs.r"]);
        let bob = g.vertex(VertexId(1));
        let e = bob.edge(Choice::Left).unwrap();
        assert_eq!(e, Edge { target: VertexId(0), shift: 1 });
        assert_eq!(g.max_shift(), 1);
    }

    #[test]
    fn invalid_system_does_not_compile() {
        let sys = ProfileSystem::new(["A"], "x", 0);
        assert!(matches!(Graph::new(sys), Err(Error::InvalidSystem(_))));
    }
}
