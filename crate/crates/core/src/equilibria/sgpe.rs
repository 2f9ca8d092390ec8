use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affine::{counterexample, nonneg_justification, AffineExpr, DomainPoint, NonnegJustification, Valuation};
use crate::error::Result;
use crate::evaluation::{always_leads_to_leaf_at, leaf_utility, Outcome};
use crate::model::{AgentId, Choice, Graph, PrefOrder, VertexId, VertexKind};

/// The side condition at one node: the chosen child's utility for the owner
/// is at least as good as the other child's, for every `n >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCondition {
    pub agent: AgentId,
    pub chosen: Choice,
    pub left_utility: AffineExpr,
    pub right_utility: AffineExpr,
    /// Non-negative exactly when the condition holds.
    pub margin: AffineExpr,
    pub justification: NonnegJustification,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ClaimStatus {
    Holds,
    RefutedLocally { witness: DomainPoint },
    Retracted { child: Arc<str> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub label: Arc<str>,
    pub def: Arc<str>,
    pub status: ClaimStatus,
    /// `None` for leaves.
    pub local: Option<LocalCondition>,
}

/// The stable assignment of the greatest-fixpoint iteration: one claim
/// "subgame perfect for all n >= 0" per reachable body position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SgpeCertificate {
    pub pref: PrefOrder,
    pub root: String,
    pub claims: Vec<Claim>,
    pub rounds: usize,
}

impl SgpeCertificate {
    pub fn claim(&self, label: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| &*c.label == label)
    }

    /// Local conditions of surviving claims.
    pub fn inequalities(&self) -> impl Iterator<Item = (&str, &LocalCondition)> {
        self.claims
            .iter()
            .filter(|c| c.status == ClaimStatus::Holds)
            .filter_map(|c| c.local.as_ref().map(|l| (&*c.label, l)))
    }

    pub fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.claims {
            let status = match &c.status {
                ClaimStatus::Holds => "holds for all n >= 0".to_string(),
                ClaimStatus::RefutedLocally { witness } => {
                    format!("fails at n = {}{}", witness.n, render_params(&witness.params))
                }
                ClaimStatus::Retracted { child } => format!("retracted (child {child})"),
            };
            match &c.local {
                Some(l) => out.push(format!(
                    "{} [{} {}]: l = {}, r = {}, margin {} >= 0: {}",
                    c.label, l.agent, l.chosen, l.left_utility, l.right_utility, l.margin, status
                )),
                None => out.push(format!("{} [leaf]: {}", c.label, status)),
            }
        }
        out
    }
}

fn render_params(p: &Valuation) -> String {
    p.iter().map(|(k, v)| format!(", {k} = {v}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Refutation {
    /// Some reachable subprofile never reaches a leaf.
    NotAlwaysLeadsToLeaf { label: String },
    /// A reachable node prefers the child it did not choose.
    LocalFailure {
        first_retracted: String,
        label: String,
        n: u64,
        params: Valuation,
        agent: AgentId,
        chosen: i64,
        alternative: i64,
        claims: SgpeCertificate,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SgpeVerdict {
    Certified(SgpeCertificate),
    Refuted(Refutation),
    /// The root's claim was retracted, but no reachable concrete failure was
    /// found within the search budget.
    Inconclusive(SgpeCertificate),
}

/// Steps above the root's index explored when looking for a concrete failure.
pub const WITNESS_SEARCH_SPAN: u64 = 64;

fn local_condition(graph: &Graph, outs: &[Outcome], v: VertexId, pref: PrefOrder) -> Result<Option<LocalCondition>> {
    let VertexKind::Node {
        agent,
        choice,
        left,
        right,
    } = &graph.vertex(v).kind
    else {
        return Ok(None);
    };
    let util = |e: &crate::model::Edge| {
        leaf_utility(graph, outs[e.target.0], agent)
            .expect("reachable positions lead to leaves")
            .shift_n(e.shift)
    };
    let (lu, ru) = (util(left), util(right));
    let margin = match choice {
        Choice::Left => pref.margin(&lu, &ru),
        Choice::Right => pref.margin(&ru, &lu),
    };
    let justification = nonneg_justification(&margin, &graph.system().params)?;
    Ok(Some(LocalCondition {
        agent: agent.clone(),
        chosen: *choice,
        left_utility: lu,
        right_utility: ru,
        margin,
        justification,
    }))
}

/// Subgame perfection of the system's root, by greatest fixpoint over body
/// positions with every claim quantified over `n >= 0`.
pub fn check_sgpe(graph: &Graph, pref: PrefOrder) -> Result<SgpeVerdict> {
    let (root, n0) = graph.root();
    let (all, outs, reach) = always_leads_to_leaf_at(graph, root);
    if !all.holds {
        return Ok(SgpeVerdict::Refuted(Refutation::NotAlwaysLeadsToLeaf {
            label: all.failing.expect("a failing position exists"),
        }));
    }
    let bounds = &graph.system().params;
    let mut local = vec![None; graph.len()];
    let mut status: Vec<Option<ClaimStatus>> = vec![None; graph.len()];
    for &v in &reach {
        local[v.0] = local_condition(graph, &outs, v, pref)?;
        status[v.0] = Some(ClaimStatus::Holds);
    }

    let mut rounds = 0;
    let mut first_retracted = None;
    let mut retract = Vec::new();
    loop {
        for &v in &reach {
            if status[v.0] != Some(ClaimStatus::Holds) {
                continue;
            }
            if let Some(l) = &local[v.0] {
                if !l.justification.holds {
                    let witness = counterexample(&l.margin, bounds)?.expect("failing condition has a counterexample");
                    retract.push((v, ClaimStatus::RefutedLocally { witness }));
                    continue;
                }
            }
            if let VertexKind::Node { left, right, .. } = &graph.vertex(v).kind {
                if let Some(e) = [left, right]
                    .into_iter()
                    .find(|e| status[e.target.0] != Some(ClaimStatus::Holds))
                {
                    let child = graph.vertex(e.target).label.clone();
                    retract.push((v, ClaimStatus::Retracted { child }));
                }
            }
        }
        if retract.is_empty() {
            break;
        }
        rounds += 1;
        for (v, s) in retract.drain(..) {
            first_retracted.get_or_insert(v);
            status[v.0] = Some(s);
        }
    }

    let claims = reach
        .iter()
        .map(|&v| Claim {
            label: graph.vertex(v).label.clone(),
            def: graph.vertex(v).def.clone(),
            status: status[v.0].clone().expect("reachable"),
            local: local[v.0].clone(),
        })
        .collect();
    let cert = SgpeCertificate {
        pref,
        root: graph.vertex(root).label.to_string(),
        claims,
        rounds,
    };
    if status[root.0] == Some(ClaimStatus::Holds) {
        return Ok(SgpeVerdict::Certified(cert));
    }

    // the retraction is sound but may come from unreachable steps; look for
    // a concrete reachable failure, nearest first
    let limit = n0 + WITNESS_SEARCH_SPAN;
    let width = WITNESS_SEARCH_SPAN as usize + 1;
    // (v, n) with n in n0..=limit, row-major by vertex
    let mut seen = vec![false; graph.len() * width];
    let mut queue = VecDeque::from([(root, n0)]);
    seen[root.0 * width] = true;
    while let Some((v, n)) = queue.pop_front() {
        let VertexKind::Node { left, right, .. } = &graph.vertex(v).kind else {
            continue;
        };
        if let Some(l) = &local[v.0] {
            if !l.justification.holds {
                let at_n = l.margin.substitute_n(n as i64);
                if let Some(point) = counterexample(&at_n, bounds)? {
                    let mut params: Valuation = bounds.clone();
                    params.extend(point.params);
                    let (chosen_e, other_e) = match l.chosen {
                        Choice::Left => (&l.left_utility, &l.right_utility),
                        Choice::Right => (&l.right_utility, &l.left_utility),
                    };
                    let first = first_retracted.expect("root was retracted");
                    return Ok(SgpeVerdict::Refuted(Refutation::LocalFailure {
                        first_retracted: graph.vertex(first).label.to_string(),
                        label: graph.vertex(v).label.to_string(),
                        n,
                        agent: l.agent.clone(),
                        chosen: chosen_e.eval(n as i64, &params)?,
                        alternative: other_e.eval(n as i64, &params)?,
                        params,
                        claims: cert,
                    }));
                }
            }
        }
        for e in [left, right] {
            let next = (e.target, n + e.shift);
            if next.1 <= limit {
                let slot = &mut seen[next.0 .0 * width + (next.1 - n0) as usize];
                if !*slot {
                    *slot = true;
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(SgpeVerdict::Inconclusive(cert))
}
