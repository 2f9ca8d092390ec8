//! The infinite dollar auction and its three profile families.
//!
//! At step `n` Alice moves first: continuing (`l`) hands the move to Bob,
//! stopping (`r`) ends with `{Alice: v+n, Bob: n}`. Bob continuing (`l`)
//! goes to step `n+1`, stopping ends with `{Alice: n+1, Bob: v+n}`. Numbers
//! are costs, so profiles are compared with [`PrefOrder::LowerIsBetter`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affine::{AffineExpr, Valuation};
use crate::equilibria::{check_nash, check_sgpe, default_depth_bound, NashVerdict, SgpeVerdict};
use crate::error::{Error, Result};
use crate::finite::{backward_induction, truncate, FiniteProfile, TruncationPolicy};
use crate::model::{Choice, Graph, PrefOrder, ProfileDef, ProfileInstance, ProfileSystem, Ref, UtilityFn};

pub const ALICE: &str = "Alice";
pub const BOB: &str = "Bob";
pub const VALUE: &str = "v";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DollarProfile {
    /// Both stop at every step.
    AsBs,
    /// Alice stops, Bob continues.
    AsBc,
    /// Alice continues, Bob stops.
    AcBs,
}

impl DollarProfile {
    pub const ALL: [DollarProfile; 3] = [DollarProfile::AsBs, DollarProfile::AsBc, DollarProfile::AcBs];

    pub fn def_name(self) -> &'static str {
        match self {
            DollarProfile::AsBs => "dolAsBs",
            DollarProfile::AsBc => "dolAsBc",
            DollarProfile::AcBs => "dolAcBs",
        }
    }

    /// Alice's and Bob's recorded choices.
    pub fn choices(self) -> (Choice, Choice) {
        match self {
            DollarProfile::AsBs => (Choice::Right, Choice::Right),
            DollarProfile::AsBc => (Choice::Right, Choice::Left),
            DollarProfile::AcBs => (Choice::Left, Choice::Right),
        }
    }
}

impl fmt::Display for DollarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.def_name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DollarConfig {
    /// Lower bound declared for the object value `v`.
    pub v_bound: i64,
}

impl Default for DollarConfig {
    fn default() -> Self {
        Self { v_bound: 1 }
    }
}

fn v_plus_n() -> AffineExpr {
    AffineExpr::param(VALUE) + AffineExpr::n()
}

/// `{Alice: v+n, Bob: n}`: Alice gives up at step `n`.
pub fn stop_leaf_alice() -> UtilityFn {
    [(ALICE.into(), v_plus_n()), (BOB.into(), AffineExpr::n())].into()
}

/// `{Alice: n+1, Bob: v+n}`: Bob gives up at step `n`.
pub fn stop_leaf_bob() -> UtilityFn {
    [(ALICE.into(), AffineExpr::n() + AffineExpr::constant(1)), (BOB.into(), v_plus_n())].into()
}

/// One round of the auction above the continuation `next`.
pub fn add_alice_bob_dol(alice: Choice, bob: Choice, next: Ref) -> ProfileDef {
    ProfileDef::node(
        ALICE,
        alice,
        ProfileDef::node(BOB, bob, next, ProfileDef::Leaf(stop_leaf_bob())),
        ProfileDef::Leaf(stop_leaf_alice()),
    )
}

/// `d(n) = add_alice_bob_dol(cA, cB, d(n+1))`, rooted at `d(0)`.
pub fn build_profile(which: DollarProfile, cfg: &DollarConfig) -> ProfileSystem {
    let (a, b) = which.choices();
    let name = which.def_name();
    ProfileSystem::new([ALICE, BOB], name, 0)
        .with_param(VALUE, cfg.v_bound)
        .with_def(name, add_alice_bob_dol(a, b, Ref::new(name, 1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub profile: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SgpeVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<NashVerdict>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSummary {
    pub profile: String,
    pub depth: usize,
    pub padding: String,
    pub equilibria: usize,
    pub root_choices: Vec<Choice>,
    pub contains_both_stop: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscalationReport {
    pub v: i64,
    pub convention: String,
    pub entries: Vec<ReportEntry>,
    pub truncation: TruncationSummary,
    /// Whether all three infinite-game results were reproduced.
    pub reproduced: bool,
}

pub const REPORT_TRUNCATION_DEPTH: usize = 4;

/// Runs the three checks behind the escalation results.
///
/// Subgame perfection of the two mixed profiles is certified symbolically for
/// every `v >= 1`; the both-stop profile is searched for a deviation at
/// `n = 0` with the given `v`.
pub fn escalation_report(v: i64) -> Result<EscalationReport> {
    if v < 1 {
        return Err(Error::InvalidBound(format!("v must be at least 1, got {v}")));
    }
    let cfg = DollarConfig::default();
    let pref = PrefOrder::LowerIsBetter;
    let mut entries = Vec::new();
    let mut reproduced = true;

    for which in [DollarProfile::AcBs, DollarProfile::AsBc] {
        let g = Graph::new(build_profile(which, &cfg))?;
        let verdict = check_sgpe(&g, pref)?;
        let certified = matches!(verdict, SgpeVerdict::Certified(_));
        reproduced &= certified;
        entries.push(ReportEntry {
            profile: which.def_name().into(),
            verdict: if certified { "sgpe-certified" } else { "sgpe-not-certified" }.into(),
            certificate: Some(verdict),
            witness: None,
            note: "subgame perfect for every n >= 0 and every v >= 1".into(),
        });
    }

    let which = DollarProfile::AsBs;
    let g = Graph::new(build_profile(which, &cfg))?;
    let values: Valuation = [(VALUE.to_string(), v)].into();
    let nash = check_nash(
        &g,
        &ProfileInstance::concrete(which.def_name(), 0),
        pref,
        default_depth_bound(&g),
        &values,
    )?;
    let (verdict, note) = match (&nash, v > 1) {
        (NashVerdict::NotNash(w), _) => (
            "not-nash",
            format!(
                "{} deviates at {} edit(s): cost {} instead of {}; hence not subgame perfect",
                w.agent,
                w.edits.len(),
                w.deviation,
                w.original
            ),
        ),
        (_, false) => (
            "unresolved",
            "hypothesis v > 1 not met; no improving deviation found".to_string(),
        ),
        (_, true) => ("unresolved", "no improving deviation found".to_string()),
    };
    reproduced &= matches!(nash, NashVerdict::NotNash(_));
    entries.push(ReportEntry {
        profile: which.def_name().into(),
        verdict: verdict.into(),
        certificate: None,
        witness: Some(nash),
        note,
    });

    let padding = stop_leaf_alice();
    let policy = TruncationPolicy {
        depth: REPORT_TRUNCATION_DEPTH,
        padding: padding.clone(),
    };
    let cut = truncate(&g, &policy, &values)?;
    let bi = backward_induction(&cut, pref);
    let mut root_choices: Vec<Choice> = bi
        .iter()
        .filter_map(|p| match p {
            FiniteProfile::Node { choice, .. } => Some(*choice),
            FiniteProfile::Leaf(_) => None,
        })
        .collect();
    root_choices.sort();
    root_choices.dedup();
    let truncation = TruncationSummary {
        profile: which.def_name().into(),
        depth: REPORT_TRUNCATION_DEPTH,
        padding: format!("Alice gives up at the cut: {{Alice: {}, Bob: {}}}", padding[&ALICE.into()], padding[&BOB.into()]),
        equilibria: bi.len(),
        root_choices,
        contains_both_stop: bi.contains(&cut),
    };

    Ok(EscalationReport {
        v,
        convention: "utilities are costs (lower is better); leaves {Alice: v+n, Bob: n} and {Alice: n+1, Bob: v+n}".into(),
        entries,
        truncation,
        reproduced,
    })
}

impl fmt::Display for EscalationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dollar auction, v = {}", self.v)?;
        writeln!(f, "convention: {}", self.convention)?;
        for e in &self.entries {
            writeln!(f, "{}: {} ({})", e.profile, e.verdict, e.note)?;
            if let Some(SgpeVerdict::Certified(c)) = &e.certificate {
                for line in c.describe() {
                    writeln!(f, "  {line}")?;
                }
            }
        }
        let t = &self.truncation;
        writeln!(
            f,
            "truncated {} at depth {}: {} backward-induction profile(s), root choices {:?}, both-stop among them: {}",
            t.profile, t.depth, t.equilibria, t.root_choices, t.contains_both_stop
        )?;
        write!(f, "reproduced: {}", self.reproduced)
    }
}
