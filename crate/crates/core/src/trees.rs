//! Lazy binary trees without agents or payoffs, and the coinductive
//! "is infinite" predicate computed as a greatest fixpoint over definitions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LazyDef {
    Nil,
    Node(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LazyTreeSystem {
    pub defs: BTreeMap<String, LazyDef>,
    pub root: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinTree {
    Zig,
    Zag,
    Backbone,
}

impl std::str::FromStr for BuiltinTree {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zig" => Ok(BuiltinTree::Zig),
            "zag" => Ok(BuiltinTree::Zag),
            "backbone" => Ok(BuiltinTree::Backbone),
            other => Err(format!("unknown tree `{other}`")),
        }
    }
}

pub const NIL: &str = "nil";

/// `zig = nil . zag`, `zag = zig . nil`, `backbone = backbone . nil`.
pub fn builtin_tree(which: BuiltinTree) -> LazyTreeSystem {
    let node = |l: &str, r: &str| LazyDef::Node(l.to_string(), r.to_string());
    let mut defs = BTreeMap::new();
    defs.insert(NIL.to_string(), LazyDef::Nil);
    let root = match which {
        BuiltinTree::Zig | BuiltinTree::Zag => {
            defs.insert("zig".into(), node(NIL, "zag"));
            defs.insert("zag".into(), node("zig", NIL));
            if which == BuiltinTree::Zig {
                "zig"
            } else {
                "zag"
            }
        }
        BuiltinTree::Backbone => {
            defs.insert("backbone".into(), node("backbone", NIL));
            "backbone"
        }
    };
    LazyTreeSystem {
        defs,
        root: root.to_string(),
    }
}

impl LazyTreeSystem {
    /// Names referenced but not defined, including a missing root.
    pub fn dangling(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .defs
            .values()
            .filter_map(|d| match d {
                LazyDef::Node(l, r) => Some([l, r]),
                LazyDef::Nil => None,
            })
            .flatten()
            .chain(std::iter::once(&self.root))
            .filter(|n| !self.defs.contains_key(*n))
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Expands `depth` node layers; deeper nodes become [`LazyTree::Cut`].
    pub fn unroll(&self, depth: usize) -> LazyTree {
        self.unroll_from(&self.root, depth)
    }

    fn unroll_from(&self, name: &str, depth: usize) -> LazyTree {
        match &self.defs[name] {
            LazyDef::Nil => LazyTree::Nil,
            LazyDef::Node(..) if depth == 0 => LazyTree::Cut,
            LazyDef::Node(l, r) => LazyTree::Node(
                Box::new(self.unroll_from(l, depth - 1)),
                Box::new(self.unroll_from(r, depth - 1)),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LazyTree {
    Nil,
    Node(Box<LazyTree>, Box<LazyTree>),
    Cut,
}

impl LazyTree {
    /// Number of edges on the longest root path.
    pub fn height(&self) -> usize {
        match self {
            LazyTree::Node(l, r) => 1 + l.height().max(r.height()),
            _ => 0,
        }
    }

    pub fn is_complete(&self) -> bool {
        match self {
            LazyTree::Nil => true,
            LazyTree::Cut => false,
            LazyTree::Node(l, r) => l.is_complete() && r.is_complete(),
        }
    }
}

impl fmt::Display for LazyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LazyTree::Nil => write!(f, "□"),
            LazyTree::Cut => write!(f, "…"),
            LazyTree::Node(l, r) => write!(f, "({l} · {r})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Infiniteness {
    pub root: bool,
    /// Stable assignment per definition.
    pub assignment: BTreeMap<String, bool>,
    /// Retraction rounds until stability (the final, quiet round excluded).
    pub rounds: usize,
}

/// Greatest fixpoint of "the left or the right subtree is infinite".
///
/// Every node definition starts out assumed infinite; each round retracts
/// the definitions whose children are both retracted or `Nil`.
pub fn is_infinite(system: &LazyTreeSystem) -> Infiniteness {
    let mut assignment: BTreeMap<String, bool> = system
        .defs
        .iter()
        .map(|(k, d)| (k.clone(), matches!(d, LazyDef::Node(..))))
        .collect();
    let holds = |a: &BTreeMap<String, bool>, name: &str| a.get(name).copied().unwrap_or(false);
    let mut rounds = 0;
    loop {
        let retract: Vec<String> = system
            .defs
            .iter()
            .filter(|(k, _)| assignment[*k])
            .filter(|(_, d)| match d {
                LazyDef::Node(l, r) => !holds(&assignment, l) && !holds(&assignment, r),
                LazyDef::Nil => true,
            })
            .map(|(k, _)| k.clone())
            .collect();
        if retract.is_empty() {
            break;
        }
        rounds += 1;
        for k in retract {
            assignment.insert(k, false);
        }
    }
    Infiniteness {
        root: holds(&assignment, &system.root),
        assignment,
        rounds,
    }
}
