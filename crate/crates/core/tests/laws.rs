//! Evaluation laws and certificate properties on random affine systems.

use std::collections::{BTreeSet, VecDeque};

use backcoind::affine::{AffineExpr, Valuation};
use backcoind::equilibria::{check_nash, check_sgpe, NashVerdict, SgpeVerdict};
use backcoind::evaluation::{always_leads_to_leaf, leads_to_leaf, utility, utility_with_edits, UtilityResult};
use backcoind::generate::random_affine_system;
use backcoind::model::{AgentId, Child, Graph, PrefOrder, ProfileDef, ProfileInstance, ProfileSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn systems(seed: u64, count: usize) -> Vec<ProfileSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_affine_system(&mut rng)).collect()
}

/// Utility of `def(n)` computed through its recorded child instead.
fn one_step(sys: &ProfileSystem, def: &str, n: u64, agent: &AgentId) -> Option<UtilityResult> {
    let ProfileDef::Node {
        choice, left, right, ..
    } = &sys.defs[def]
    else {
        return None;
    };
    let child = match choice {
        backcoind::model::Choice::Left => left,
        backcoind::model::Choice::Right => right,
    };
    let (g, inst) = match child.as_ref() {
        Child::Ref(r) => (Graph::new(sys.clone()).unwrap(), ProfileInstance::concrete(r.target.clone(), n + r.shift)),
        Child::Inline(b) => {
            let extended = sys.clone().with_def("step", b.clone());
            (Graph::new(extended).unwrap(), ProfileInstance::concrete("step", n))
        }
    };
    Some(utility(&g, &inst, agent).unwrap())
}

/// Definition instances reachable in at most `rounds` definition hops.
fn reachable_instances(sys: &ProfileSystem, rounds: usize) -> BTreeSet<(String, u64)> {
    fn refs(d: &ProfileDef, out: &mut Vec<(String, u64)>) {
        if let ProfileDef::Node { left, right, .. } = d {
            for c in [left, right] {
                match c.as_ref() {
                    Child::Ref(r) => out.push((r.target.clone(), r.shift)),
                    Child::Inline(b) => refs(b, out),
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    let start = (sys.root.def.clone(), sys.root.n0);
    let mut queue = VecDeque::from([(start.clone(), 0)]);
    seen.insert(start);
    while let Some(((def, n), k)) = queue.pop_front() {
        if k == rounds {
            continue;
        }
        let mut out = Vec::new();
        refs(&sys.defs[&def], &mut out);
        for (t, s) in out {
            if seen.insert((t.clone(), n + s)) {
                queue.push_back(((t, n + s), k + 1));
            }
        }
    }
    seen
}

#[test]
fn leads_to_leaf_iff_utility_defined() {
    for sys in systems(1, 500) {
        let g = Graph::new(sys.clone()).unwrap();
        for def in sys.defs.keys() {
            for n in 0..4 {
                let i = ProfileInstance::concrete(def.clone(), n);
                let leads = leads_to_leaf(&g, &i).unwrap();
                for a in &sys.agents {
                    let u = utility(&g, &i, a).unwrap();
                    assert_eq!(leads, u.defined().is_some(), "{sys:?}");
                }
            }
        }
    }
}

#[test]
fn utility_is_invariant_under_one_unrolling_step() {
    for sys in systems(2, 500) {
        let g = Graph::new(sys.clone()).unwrap();
        for def in sys.defs.keys() {
            for n in 0..4 {
                for a in &sys.agents {
                    let Some(stepped) = one_step(&sys, def, n, a) else {
                        continue;
                    };
                    let direct = utility(&g, &ProfileInstance::concrete(def.clone(), n), a).unwrap();
                    assert_eq!(direct, stepped, "{def}({n}) in {sys:?}");
                }
            }
        }
    }
}

#[test]
fn always_leads_to_leaf_covers_reachable_instances() {
    for sys in systems(3, 500) {
        let g = Graph::new(sys.clone()).unwrap();
        let root = ProfileInstance::root(&sys);
        if !always_leads_to_leaf(&g, &root).unwrap().holds {
            continue;
        }
        for (def, n) in reachable_instances(&sys, 2 * sys.defs.len()) {
            assert!(leads_to_leaf(&g, &ProfileInstance::concrete(def, n)).unwrap());
        }
    }
}

#[test]
fn certificates_survive_concrete_spot_checks() {
    let mut certified = 0;
    for sys in systems(4, 1500) {
        let g = Graph::new(sys.clone()).unwrap();
        for pref in [PrefOrder::HigherIsBetter, PrefOrder::LowerIsBetter] {
            let SgpeVerdict::Certified(c) = check_sgpe(&g, pref).unwrap() else {
                continue;
            };
            certified += 1;
            assert!(always_leads_to_leaf(&g, &ProfileInstance::root(&sys)).unwrap().holds);
            for (_, l) in c.inequalities() {
                for n in 0..=50 {
                    for v in 0..=10 {
                        let vals: Valuation = [("v".to_string(), v)].into();
                        let lu = l.left_utility.eval(n, &vals).unwrap();
                        let ru = l.right_utility.eval(n, &vals).unwrap();
                        let (chosen, other) = match l.chosen {
                            backcoind::model::Choice::Left => (lu, ru),
                            backcoind::model::Choice::Right => (ru, lu),
                        };
                        assert!(pref.weakly_prefers(chosen, other));
                    }
                }
            }
        }
    }
    assert!(certified > 20, "only {certified} certificates");
}

#[test]
fn refutations_point_at_reachable_failures() {
    for sys in systems(5, 500) {
        let g = Graph::new(sys.clone()).unwrap();
        for pref in [PrefOrder::HigherIsBetter, PrefOrder::LowerIsBetter] {
            if let SgpeVerdict::Refuted(backcoind::equilibria::Refutation::LocalFailure {
                chosen, alternative, ..
            }) = check_sgpe(&g, pref).unwrap()
            {
                assert!(pref.strictly_prefers(alternative, chosen));
            }
        }
    }
}

#[test]
fn nash_witnesses_replay_and_bounds_are_monotone() {
    let vals: Valuation = [("v".to_string(), 2)].into();
    for sys in systems(6, 300) {
        let g = Graph::new(sys.clone()).unwrap();
        let i = ProfileInstance::root(&sys);
        let pref = PrefOrder::HigherIsBetter;
        let mut best: Option<i64> = None;
        for d in 1..=8 {
            match check_nash(&g, &i, pref, d, &vals).unwrap() {
                NashVerdict::NotNash(w) => {
                    let u = utility_with_edits(&g, &i, &w.edits, &w.agent).unwrap();
                    let replay = u.defined().unwrap().eval(0, &vals).unwrap();
                    assert_eq!(replay, w.deviation);
                    assert!(pref.strictly_prefers(w.deviation, w.original));
                    assert!(w.edits.iter().all(|e| e.depth < d));
                    if let Some(b) = best {
                        assert!(pref.weakly_prefers(w.deviation, b));
                    }
                    best = Some(w.deviation);
                }
                other => assert!(best.is_none(), "lost the witness at {d}: {other:?}"),
            }
        }
    }
}

#[test]
fn symbolic_utility_matches_every_concrete_step() {
    for sys in systems(7, 200) {
        let g = Graph::new(sys.clone()).unwrap();
        for def in sys.defs.keys() {
            for a in &sys.agents {
                let sym = utility(&g, &ProfileInstance::symbolic(def.clone(), 0), a).unwrap();
                for n in 0..6u64 {
                    let conc = utility(&g, &ProfileInstance::concrete(def.clone(), n), a).unwrap();
                    let expect = sym.defined().map(|e: &AffineExpr| e.substitute_n(n as i64));
                    assert_eq!(conc.defined().cloned(), expect);
                }
            }
        }
    }
}
