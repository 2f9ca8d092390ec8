//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Criteria 4 and 8 are stated against the published values and fail on the
//! verbatim definitions; they are kept as stated.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use backcoind::affine::{AffineExpr, Valuation};
use backcoind::dollar::{build_profile, stop_leaf_alice, DollarConfig, DollarProfile};
use backcoind::dsl;
use backcoind::equilibria::{
    check_nash, check_sgpe, default_depth_bound, sgpe_implies_nash_suite, NashVerdict, SgpeCertificate, SgpeVerdict, SUITE_SHAPE,
};
use backcoind::evaluation::{always_leads_to_leaf, leads_to_leaf, utility, utility_with_edits, UtilityResult};
use backcoind::finite::{backward_induction, brute_nash, brute_sgpe, embed, truncate, FiniteProfile, TruncationPolicy};
use backcoind::generate::{all_profiles, enumerate_games, random_affine_system, EXHAUSTIVE_SHAPE};
use backcoind::model::{AgentId, Child, Choice, Graph, PrefOrder, ProfileDef, ProfileInstance, ProfileSystem};
use backcoind::samples;
use backcoind::trees::{builtin_tree, is_infinite, BuiltinTree, LazyDef, LazyTreeSystem, NIL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every criterion must finish within this budget.
const TIME_BUDGET: Duration = Duration::from_secs(5);
/// Step indices and object values swept through certificates.
const SWEEP_N: std::ops::RangeInclusive<i64> = 0..=50;
const SWEEP_V: std::ops::RangeInclusive<i64> = 1..=10;
/// Object values for which the both-stop profile must fail Nash.
const NOT_NASH_V: std::ops::RangeInclusive<i64> = 2..=10;
const MAX_WITNESS_DEPTH: usize = 2;
const PUBLISHED_S0_ALICE: i64 = 2;
const SUITE_SEED: u64 = 1;
const SUITE_COUNT: usize = 200;
const LAW_SYSTEMS: usize = 500;
const LAW_SEED: u64 = 9;
const TRUNCATION_DEPTHS: [usize; 2] = [2, 4];
const TRUNCATION_V: i64 = 2;
const PREFS: [PrefOrder; 2] = [PrefOrder::HigherIsBetter, PrefOrder::LowerIsBetter];

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn vals(v: i64) -> Valuation {
    [("v".to_string(), v)].into()
}

fn dollar(which: DollarProfile) -> Graph {
    Graph::new(build_profile(which, &DollarConfig::default())).unwrap()
}

fn sweep(c: &SgpeCertificate) -> Result<(), String> {
    for (label, l) in c.inequalities() {
        for n in SWEEP_N {
            for v in SWEEP_V {
                let lu = l.left_utility.eval(n, &vals(v)).unwrap();
                let ru = l.right_utility.eval(n, &vals(v)).unwrap();
                let (chosen, other) = match l.chosen {
                    Choice::Left => (lu, ru),
                    Choice::Right => (ru, lu),
                };
                ensure(c.pref.weakly_prefers(chosen, other), || {
                    format!("{label} fails at n={n}, v={v}: {chosen} vs {other}")
                })?;
            }
        }
    }
    Ok(())
}

fn certified(which: DollarProfile) -> Result<SgpeCertificate, String> {
    match check_sgpe(&dollar(which), PrefOrder::LowerIsBetter).unwrap() {
        SgpeVerdict::Certified(c) => Ok(c),
        other => Err(format!("{which}: {other:?}")),
    }
}

fn c1() -> Result<String, String> {
    let c = certified(DollarProfile::AcBs)?;
    let alice = c
        .claim("dolAcBs")
        .and_then(|cl| cl.local.clone())
        .ok_or("no Alice claim")?;
    let expected = AffineExpr::param("v") - AffineExpr::constant(1);
    ensure(alice.margin == expected, || format!("Alice margin is {}", alice.margin))?;
    ensure(alice.justification.holds, || "justification does not hold".into())?;
    sweep(&c)?;
    Ok(format!("Alice: {} >= 0; swept n 0..=50, v 1..=10", alice.margin))
}

fn c2() -> Result<String, String> {
    let c = certified(DollarProfile::AsBc)?;
    sweep(&c)?;
    Ok(format!("{} inequalities, swept n 0..=50, v 1..=10", c.inequalities().count()))
}

fn c3() -> Result<String, String> {
    let g = dollar(DollarProfile::AsBs);
    let i = ProfileInstance::concrete("dolAsBs", 0);
    let pref = PrefOrder::LowerIsBetter;
    for v in NOT_NASH_V {
        let NashVerdict::NotNash(w) = check_nash(&g, &i, pref, default_depth_bound(&g), &vals(v)).unwrap() else {
            return Err(format!("no deviation at v={v}"));
        };
        ensure(w.edits.iter().all(|e| e.depth <= MAX_WITNESS_DEPTH), || format!("deep edit at v={v}"))?;
        let replay = utility_with_edits(&g, &i, &w.edits, &w.agent).unwrap();
        let dev = replay.defined().ok_or("edited play diverges")?.eval(0, &vals(v)).unwrap();
        let orig = utility(&g, &i, &w.agent).unwrap().defined().unwrap().eval(0, &vals(v)).unwrap();
        ensure(dev == w.deviation && orig == w.original, || format!("replay mismatch at v={v}"))?;
        ensure(pref.strictly_prefers(dev, orig), || format!("no strict improvement at v={v}"))?;
    }
    let sgpe = check_sgpe(&g, pref).unwrap();
    ensure(matches!(sgpe, SgpeVerdict::Refuted(_)), || format!("sgpe not refuted: {sgpe:?}"))?;
    Ok("Alice deviates at the root for every v in 2..=10; sgpe refuted".into())
}

fn c4() -> Result<String, String> {
    let g = Graph::new(embed(&samples::s0())).unwrap();
    let u = utility(&g, &ProfileInstance::concrete("root", 0), &AgentId::from("Alice")).unwrap();
    let got = u.defined().map(|e| e.constant_term());
    ensure(got == Some(PUBLISHED_S0_ALICE), || {
        format!("utility(s0, Alice) = {got:?}, expected {PUBLISHED_S0_ALICE}")
    })?;
    Ok("utility(s0, Alice) = 2".into())
}

/// Whether the root of a lazy tree system reaches a cycle of node definitions.
fn reaches_cycle(sys: &LazyTreeSystem) -> bool {
    fn go(sys: &LazyTreeSystem, name: &str, stack: &mut Vec<String>) -> bool {
        if stack.iter().any(|s| s == name) {
            return true;
        }
        match &sys.defs[name] {
            LazyDef::Nil => false,
            LazyDef::Node(l, r) => {
                stack.push(name.to_string());
                let found = go(sys, l, stack) || go(sys, r, stack);
                stack.pop();
                found
            }
        }
    }
    go(sys, &sys.root, &mut Vec::new())
}

fn all_lazy_systems(k: usize) -> Vec<LazyTreeSystem> {
    let names: Vec<String> = std::iter::once(NIL.to_string()).chain((0..k).map(|i| format!("d{i}"))).collect();
    let options: Vec<LazyDef> = std::iter::once(LazyDef::Nil)
        .chain(names.iter().flat_map(|l| names.iter().map(move |r| LazyDef::Node(l.clone(), r.clone()))))
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|acc: Vec<LazyDef>| {
                options.iter().map(move |o| {
                    let mut next = acc.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|defs| LazyTreeSystem {
            defs: std::iter::once((NIL.to_string(), LazyDef::Nil))
                .chain(defs.into_iter().enumerate().map(|(i, d)| (format!("d{i}"), d)))
                .collect(),
            root: "d0".into(),
        })
        .collect()
}

fn c5() -> Result<String, String> {
    for t in [BuiltinTree::Zig, BuiltinTree::Zag, BuiltinTree::Backbone] {
        ensure(is_infinite(&builtin_tree(t)).root, || format!("{t:?} not infinite"))?;
    }
    let mut finite = 0;
    for k in 1..=3 {
        for sys in all_lazy_systems(k) {
            let cyclic = reaches_cycle(&sys);
            let inf = is_infinite(&sys).root;
            if !cyclic {
                finite += 1;
                ensure(!inf, || format!("finite system reported infinite: {sys:?}"))?;
            } else {
                ensure(inf, || format!("cyclic system reported finite: {sys:?}"))?;
            }
        }
    }
    Ok(format!("zig, zag, backbone infinite; {finite} finite systems (<= 3 defs) not infinite"))
}

fn c6() -> Result<String, String> {
    let mut checked = 0usize;
    for game in enumerate_games(&EXHAUSTIVE_SHAPE) {
        for s in all_profiles(&game) {
            for pref in PREFS {
                if brute_sgpe(&s, pref) {
                    checked += 1;
                    ensure(brute_nash(&s, pref), || format!("{s} is sgpe but not nash ({pref:?})"))?;
                }
            }
        }
    }
    let r = sgpe_implies_nash_suite(SUITE_SEED, SUITE_COUNT);
    ensure(r.generated == SUITE_COUNT && r.is_clean(), || format!("{} violations", r.violations.len()))?;
    ensure(SUITE_SHAPE.levels == 5, || "random profiles must have depth <= 5".into())?;
    Ok(format!(
        "{checked} subgame perfect profiles exhaustively, {} of {SUITE_COUNT} random ones, no violation",
        r.sgpe
    ))
}

fn engine_sgpe(g: &Graph, pref: PrefOrder) -> bool {
    match check_sgpe(g, pref).unwrap() {
        SgpeVerdict::Certified(_) => true,
        SgpeVerdict::Refuted(_) => false,
        SgpeVerdict::Inconclusive(_) => panic!("inconclusive on a finite profile"),
    }
}

fn c7() -> Result<String, String> {
    let games = enumerate_games(&EXHAUSTIVE_SHAPE);
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = games.len().div_ceil(threads);
    let results: Vec<Result<usize, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = games
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    let mut profiles = 0;
                    for game in part {
                        let all = all_profiles(game);
                        profiles += all.len();
                        let graphs: Vec<Graph> = all.iter().map(|s| Graph::new(embed(s)).unwrap()).collect();
                        for pref in PREFS {
                            let bi = backward_induction(game, pref);
                            let mut members = 0;
                            for (s, g) in all.iter().zip(&graphs) {
                                let in_bi = bi.contains(s);
                                members += usize::from(in_bi);
                                if in_bi != brute_sgpe(s, pref) || in_bi != engine_sgpe(g, pref) {
                                    return Err(format!("disagreement on {s} ({pref:?})"));
                                }
                            }
                            if members != bi.len() {
                                return Err(format!("backward induction left the profile space of {game}"));
                            }
                        }
                    }
                    Ok(profiles)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{} games, {total} profiles, both orders agree", games.len()))
}

fn c8() -> Result<String, String> {
    let g = dollar(DollarProfile::AsBs);
    let policy = |depth| TruncationPolicy {
        depth,
        padding: stop_leaf_alice(),
    };
    let mut notes = Vec::new();
    for depth in TRUNCATION_DEPTHS {
        let cut = truncate(&g, &policy(depth), &vals(TRUNCATION_V)).unwrap();
        let bi = backward_induction(&cut, PrefOrder::LowerIsBetter);
        let root_choices: BTreeSet<_> = bi
            .iter()
            .filter_map(|p| match p {
                FiniteProfile::Node { choice, .. } => Some(*choice),
                FiniteProfile::Leaf(_) => None,
            })
            .collect();
        ensure(bi.contains(&cut), || {
            format!(
                "depth {depth}: both-stop not among {} backward-induction profile(s) (root choices {root_choices:?})",
                bi.len()
            )
        })?;
        notes.push(format!("depth {depth} ok"));
    }
    c3()?;
    Ok(notes.join(", ") + "; untruncated profile not Nash")
}

/// Utility of `def(n)` read off its recorded child.
fn one_step(sys: &ProfileSystem, def: &str, n: u64, agent: &AgentId) -> Option<UtilityResult> {
    let ProfileDef::Node {
        choice, left, right, ..
    } = &sys.defs[def]
    else {
        return None;
    };
    let child = if *choice == Choice::Left { left } else { right };
    let (g, inst) = match child.as_ref() {
        Child::Ref(r) => (Graph::new(sys.clone()).unwrap(), ProfileInstance::concrete(r.target.clone(), n + r.shift)),
        Child::Inline(b) => (
            Graph::new(sys.clone().with_def("step", b.clone())).unwrap(),
            ProfileInstance::concrete("step", n),
        ),
    };
    Some(utility(&g, &inst, agent).unwrap())
}

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
    let mut seen = BTreeSet::from([(sys.root.def.clone(), sys.root.n0)]);
    let mut frontier: Vec<(String, u64)> = seen.iter().cloned().collect();
    for _ in 0..rounds {
        let mut next = Vec::new();
        for (def, n) in frontier {
            let mut out = Vec::new();
            refs(&sys.defs[&def], &mut out);
            for (t, s) in out {
                if seen.insert((t.clone(), n + s)) {
                    next.push((t, n + s));
                }
            }
        }
        frontier = next;
    }
    seen
}

fn c9() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(LAW_SEED);
    let mut always = 0;
    for _ in 0..LAW_SYSTEMS {
        let sys = random_affine_system(&mut rng);
        let g = Graph::new(sys.clone()).unwrap();
        for def in sys.defs.keys() {
            for n in 0..4u64 {
                let i = ProfileInstance::concrete(def.clone(), n);
                let leads = leads_to_leaf(&g, &i).unwrap();
                for a in &sys.agents {
                    let u = utility(&g, &i, a).unwrap();
                    ensure(!leads || u.defined().is_some(), || format!("leads but undefined: {def}({n})"))?;
                    if let Some(stepped) = one_step(&sys, def, n, a) {
                        ensure(stepped == u, || format!("unrolling changed the utility of {def}({n})"))?;
                    }
                }
            }
        }
        if always_leads_to_leaf(&g, &ProfileInstance::root(&sys)).unwrap().holds {
            always += 1;
            for (def, n) in reachable_instances(&sys, 2 * sys.defs.len()) {
                ensure(leads_to_leaf(&g, &ProfileInstance::concrete(def.clone(), n)).unwrap(), || {
                    format!("{def}({n}) reachable but diverges")
                })?;
            }
        }
    }
    Ok(format!("{LAW_SYSTEMS} systems, {always} always lead to a leaf"))
}

fn games_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games")
}

fn c10() -> Result<String, String> {
    let dir = games_dir();
    let game = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let golden: [(Vec<String>, i32); 4] = [
        (vec!["dollar".into(), "report".into(), "--v".into(), "2".into()], 0),
        (
            vec!["check".into(), "nash".into(), game("dolAsBs.game"), "--n".into(), "0".into(), "--param".into(), "v=2".into()],
            1,
        ),
        (
            vec!["check".into(), "nash".into(), game("dolAcBs.game"), "--n".into(), "0".into(), "--param".into(), "v=2".into()],
            2,
        ),
        (vec!["check".into(), "sgpe".into(), game("dolAcBs.game"), "--frobnicate".into()], 3),
    ];
    for (args, code) in &golden {
        let out = backcoind_cli::run(std::iter::once("backcoind".to_string()).chain(args.iter().cloned()));
        ensure(out.code == *code, || format!("{args:?} exited {} not {code}", out.code))?;
    }
    let mut files = 0;
    for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "game") {
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            let sys = dsl::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let printed = dsl::print(&sys);
            ensure(printed == text, || format!("{} is not in normal form", path.display()))?;
            ensure(dsl::parse(&printed).as_ref() == Ok(&sys), || format!("{} does not round-trip", path.display()))?;
            files += 1;
        }
    }
    ensure(files > 0, || "no shipped games".into())?;
    Ok(format!("exit codes 0/1/2/3; {files} game files round-trip"))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("sgpe certificate for the continue/stop profile", c1),
        ("sgpe certificate for the stop/continue profile", c2),
        ("both-stop profile is not Nash for v in 2..=10", c3),
        ("utility of Alice in s0 is 2", c4),
        ("infiniteness of the built-in trees", c5),
        ("subgame perfect implies Nash", c6),
        ("backward induction = brute force = engine", c7),
        ("truncated both-stop game keeps both-stop as an equilibrium", c8),
        ("evaluation laws on random affine systems", c9),
        ("command-line exit codes and format round-trip", c10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > TIME_BUDGET => Err(format!("{detail}; took {elapsed:.2?}, budget {TIME_BUDGET:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS criterion {:>2}: {name} [{elapsed:.2?}] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} [{elapsed:.2?}] {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
