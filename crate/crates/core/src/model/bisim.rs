use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{Graph, ProfileInstance, StepIndex, VertexId, VertexKind};
use crate::error::{Error, Result};

/// Up to three step pairs spanning the affine hull of every pair seen so far.
///
/// Leaf equality at a vertex pair is an affine condition in `(n1, n2)`, so it
/// holds on the whole hull once it holds on a spanning set. The hull of a
/// subset of the plane has at most three generators, which bounds the work.
#[derive(Default)]
struct Span(Vec<(i64, i64)>);

impl Span {
    fn contains(&self, p: (i64, i64)) -> bool {
        match self.0.as_slice() {
            [] => false,
            [a] => *a == p,
            [a, b] => {
                let (dx, dy) = (b.0 - a.0, b.1 - a.1);
                let (px, py) = (p.0 - a.0, p.1 - a.1);
                dx * py - dy * px == 0
            }
            _ => true,
        }
    }

    /// Adds `p` if it enlarges the hull.
    fn insert(&mut self, p: (i64, i64)) -> bool {
        if self.contains(p) {
            return false;
        }
        self.0.push(p);
        true
    }
}

/// Decides whether two instances denote the same infinite tree.
///
/// Symbolic instances are compared for every `n` at or above the larger of
/// the two minima. Leaf utilities are compared as affine expressions, so
/// named parameters stay symbolic.
pub fn bisimilar(
    g1: &Graph,
    i1: &ProfileInstance,
    g2: &Graph,
    i2: &ProfileInstance,
) -> Result<bool> {
    let a1: BTreeSet<_> = g1.agents().iter().collect();
    let a2: BTreeSet<_> = g2.agents().iter().collect();
    if a1 != a2 {
        return Err(Error::AgentMismatch);
    }
    let v1 = g1.locate(i1)?;
    let v2 = g2.locate(i2)?;
    let seeds: Vec<(i64, i64)> = match (i1.n, i2.n) {
        (StepIndex::Concrete(a), StepIndex::Concrete(b)) => vec![(a as i64, b as i64)],
        (StepIndex::AtLeast(a), StepIndex::AtLeast(b)) => {
            let m = a.max(b) as i64;
            vec![(m, m), (m + 1, m + 1)]
        }
        _ => return Err(Error::MixedSteps),
    };

    let mut spans: HashMap<(VertexId, VertexId), Span> = HashMap::new();
    let mut queue: VecDeque<(VertexId, VertexId, (i64, i64))> =
        seeds.into_iter().map(|p| (v1, v2, p)).collect();
    while let Some((x, y, p)) = queue.pop_front() {
        if !spans.entry((x, y)).or_default().insert(p) {
            continue;
        }
        match (&g1.vertex(x).kind, &g2.vertex(y).kind) {
            (VertexKind::Leaf(f1), VertexKind::Leaf(f2)) => {
                let equal = f1.len() == f2.len()
                    && f1.iter().all(|(a, e1)| {
                        f2.get(a)
                            .is_some_and(|e2| e1.substitute_n(p.0) == e2.substitute_n(p.1))
                    });
                if !equal {
                    return Ok(false);
                }
            }
            (
                VertexKind::Node {
                    agent: ag1,
                    choice: c1,
                    left: l1,
                    right: r1,
                },
                VertexKind::Node {
                    agent: ag2,
                    choice: c2,
                    left: l2,
                    right: r2,
                },
            ) => {
                if ag1 != ag2 || c1 != c2 {
                    return Ok(false);
                }
                for (e1, e2) in [(l1, l2), (r1, r2)] {
                    queue.push_back((
                        e1.target,
                        e2.target,
                        (p.0 + e1.shift as i64, p.1 + e2.shift as i64),
                    ));
                }
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}
