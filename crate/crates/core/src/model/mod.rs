//! Agents, choices, utilities and the equation-system representation of
//! finite, cyclic and parametric strategy profiles.
//!
//! A [`ProfileSystem`] is a finite set of definitions `name(n) = body`. A body
//! is a leaf or a node whose children are either inline bodies or references
//! `other(n + k)` with `k >= 0`. The system denotes the (possibly infinite)
//! unrolling of its root. Analyses run on the compiled [`Graph`].

mod bisim;
mod graph;
mod unroll;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affine::{AffineExpr, ParamBounds};

pub use bisim::bisimilar;
pub use graph::{Edge, Graph, Vertex, VertexId, VertexKind};
pub use unroll::{unroll, Site, Unrolled};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(Arc<str>);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into().into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Choice {
    Left,
    Right,
}

impl Choice {
    pub const BOTH: [Choice; 2] = [Choice::Left, Choice::Right];

    pub fn flip(self) -> Self {
        match self {
            Choice::Left => Choice::Right,
            Choice::Right => Choice::Left,
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Choice::Left => "l",
            Choice::Right => "r",
        })
    }
}

/// How concrete utilities are ranked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrefOrder {
    HigherIsBetter,
    /// Utilities are costs.
    LowerIsBetter,
}

impl PrefOrder {
    /// `a` is at least as good as `b`.
    pub fn weakly_prefers(self, a: i64, b: i64) -> bool {
        match self {
            PrefOrder::HigherIsBetter => a >= b,
            PrefOrder::LowerIsBetter => a <= b,
        }
    }

    pub fn strictly_prefers(self, a: i64, b: i64) -> bool {
        !self.weakly_prefers(b, a)
    }

    /// An expression that is non-negative exactly when `chosen` is at least
    /// as good as `other`.
    pub fn margin(self, chosen: &AffineExpr, other: &AffineExpr) -> AffineExpr {
        match self {
            PrefOrder::HigherIsBetter => chosen - other,
            PrefOrder::LowerIsBetter => other - chosen,
        }
    }
}

pub type UtilityFn = BTreeMap<AgentId, AffineExpr>;

/// `target(n + shift)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ref {
    pub target: String,
    pub shift: u64,
}

impl Ref {
    pub fn new(target: impl Into<String>, shift: u64) -> Self {
        Self {
            target: target.into(),
            shift,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Child {
    Ref(Ref),
    Inline(ProfileDef),
}

impl From<Ref> for Child {
    fn from(r: Ref) -> Self {
        Child::Ref(r)
    }
}

impl From<ProfileDef> for Child {
    fn from(d: ProfileDef) -> Self {
        Child::Inline(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileDef {
    Leaf(UtilityFn),
    Node {
        agent: AgentId,
        choice: Choice,
        left: Box<Child>,
        right: Box<Child>,
    },
}

impl ProfileDef {
    pub fn leaf<A, E, I>(entries: I) -> Self
    where
        A: Into<AgentId>,
        E: Into<AffineExpr>,
        I: IntoIterator<Item = (A, E)>,
    {
        ProfileDef::Leaf(
            entries
                .into_iter()
                .map(|(a, e)| (a.into(), e.into()))
                .collect(),
        )
    }

    pub fn node(
        agent: impl Into<AgentId>,
        choice: Choice,
        left: impl Into<Child>,
        right: impl Into<Child>,
    ) -> Self {
        ProfileDef::Node {
            agent: agent.into(),
            choice,
            left: Box::new(left.into()),
            right: Box::new(right.into()),
        }
    }
}

/// The root of a system: `def(n0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Root {
    pub def: String,
    pub n0: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSystem {
    /// Declaration order is kept for rendering.
    pub agents: Vec<AgentId>,
    pub params: ParamBounds,
    pub defs: BTreeMap<String, ProfileDef>,
    pub root: Root,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Diagnostic {
    EmptyAgentSet,
    DuplicateAgent { agent: String },
    DanglingRef { def: String, target: String },
    DanglingRoot { target: String },
    UndeclaredAgent { def: String, agent: String },
    MissingUtility { def: String, agent: String },
    UndeclaredParam { def: String, param: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyAgentSet => write!(f, "empty-agent-set"),
            Diagnostic::DuplicateAgent { agent } => write!(f, "duplicate-agent \"{agent}\""),
            Diagnostic::DanglingRef { def, target } => {
                write!(f, "dangling-ref \"{target}\" in \"{def}\"")
            }
            Diagnostic::DanglingRoot { target } => write!(f, "dangling-root \"{target}\""),
            Diagnostic::UndeclaredAgent { def, agent } => {
                write!(f, "undeclared-agent \"{agent}\" in \"{def}\"")
            }
            Diagnostic::MissingUtility { def, agent } => {
                write!(f, "missing-utility for \"{agent}\" in \"{def}\"")
            }
            Diagnostic::UndeclaredParam { def, param } => {
                write!(f, "undeclared-param \"{param}\" in \"{def}\"")
            }
        }
    }
}

impl ProfileSystem {
    pub fn new<A: Into<AgentId>>(agents: impl IntoIterator<Item = A>, root: impl Into<String>, n0: u64) -> Self {
        Self {
            agents: agents.into_iter().map(Into::into).collect(),
            params: ParamBounds::new(),
            defs: BTreeMap::new(),
            root: Root {
                def: root.into(),
                n0,
            },
        }
    }

    pub fn with_param(mut self, name: impl Into<String>, lower_bound: i64) -> Self {
        self.params.insert(name.into(), lower_bound);
        self
    }

    pub fn with_def(mut self, name: impl Into<String>, def: ProfileDef) -> Self {
        self.defs.insert(name.into(), def);
        self
    }

    pub fn agent_set(&self) -> BTreeSet<&AgentId> {
        self.agents.iter().collect()
    }

    /// Every violated invariant, in a stable order; empty iff the system is well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.agents.is_empty() {
            out.push(Diagnostic::EmptyAgentSet);
        }
        for (i, a) in self.agents.iter().enumerate() {
            if self.agents[..i].contains(a) {
                out.push(Diagnostic::DuplicateAgent {
                    agent: a.to_string(),
                });
            }
        }
        for (name, def) in &self.defs {
            self.validate_def(name, def, &mut out);
        }
        if !self.defs.contains_key(&self.root.def) {
            out.push(Diagnostic::DanglingRoot {
                target: self.root.def.clone(),
            });
        }
        out
    }

    fn validate_def(&self, name: &str, def: &ProfileDef, out: &mut Vec<Diagnostic>) {
        let agents = &self.agents;
        match def {
            ProfileDef::Leaf(f) => {
                for a in f.keys() {
                    if !agents.contains(a) {
                        out.push(Diagnostic::UndeclaredAgent {
                            def: name.to_string(),
                            agent: a.to_string(),
                        });
                    }
                }
                for a in &self.agents {
                    if !f.contains_key(a) {
                        out.push(Diagnostic::MissingUtility {
                            def: name.to_string(),
                            agent: a.to_string(),
                        });
                    }
                }
                let mut params: BTreeSet<&str> = BTreeSet::new();
                for e in f.values() {
                    params.extend(e.params().map(|(p, _)| p));
                }
                for p in params {
                    if !self.params.contains_key(p) {
                        out.push(Diagnostic::UndeclaredParam {
                            def: name.to_string(),
                            param: p.to_string(),
                        });
                    }
                }
            }
            ProfileDef::Node {
                agent, left, right, ..
            } => {
                if !agents.contains(agent) {
                    out.push(Diagnostic::UndeclaredAgent {
                        def: name.to_string(),
                        agent: agent.to_string(),
                    });
                }
                for child in [left, right] {
                    match child.as_ref() {
                        Child::Ref(r) => {
                            if !self.defs.contains_key(&r.target) {
                                out.push(Diagnostic::DanglingRef {
                                    def: name.to_string(),
                                    target: r.target.clone(),
                                });
                            }
                        }
                        Child::Inline(d) => self.validate_def(name, d, out),
                    }
                }
            }
        }
    }
}

/// Either a concrete step index or the family "for all n >= min".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepIndex {
    Concrete(u64),
    AtLeast(u64),
}

/// One subtree of the unrolling: a definition evaluated at a step index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProfileInstance {
    pub def: String,
    pub n: StepIndex,
}

impl ProfileInstance {
    pub fn concrete(def: impl Into<String>, n: u64) -> Self {
        Self {
            def: def.into(),
            n: StepIndex::Concrete(n),
        }
    }

    pub fn symbolic(def: impl Into<String>, min: u64) -> Self {
        Self {
            def: def.into(),
            n: StepIndex::AtLeast(min),
        }
    }

    /// The system's root as a concrete instance.
    pub fn root(system: &ProfileSystem) -> Self {
        Self::concrete(system.root.def.clone(), system.root.n0)
    }
}
