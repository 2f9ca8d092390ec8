//! Exhaustive and random generators for finite games, profiles and small
//! affine systems.
//!
//! Sizes are counted in levels: a lone leaf has one level, a node over two
//! leaves has two.

use rand::Rng;

use crate::affine::AffineExpr;
use crate::finite::FiniteProfile;
use crate::model::{AgentId, Child, Choice, ProfileDef, ProfileSystem, Ref};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameShape {
    pub levels: usize,
    pub agents: usize,
    /// Utilities range over `0..=max_utility`.
    pub max_utility: i64,
}

/// The family the exhaustive oracle checks run over.
pub const EXHAUSTIVE_SHAPE: GameShape = GameShape {
    levels: 3,
    agents: 2,
    max_utility: 2,
};

pub fn agent_names(k: usize) -> Vec<AgentId> {
    (0..k).map(|i| AgentId::new(((b'A' + i as u8) as char).to_string())).collect()
}

fn all_leaves(shape: &GameShape) -> Vec<FiniteProfile> {
    let agents = agent_names(shape.agents);
    let mut out = vec![Vec::new()];
    for a in &agents {
        out = out
            .into_iter()
            .flat_map(|acc: Vec<(AgentId, i64)>| {
                (0..=shape.max_utility).map(move |u| {
                    let mut next = acc.clone();
                    next.push((a.clone(), u));
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(FiniteProfile::leaf).collect()
}

/// Every game (choices all `Left`) with at most `shape.levels` levels.
pub fn enumerate_games(shape: &GameShape) -> Vec<FiniteProfile> {
    let leaves = all_leaves(shape);
    let agents = agent_names(shape.agents);
    let mut games = leaves.clone();
    for _ in 1..shape.levels {
        let mut next = leaves.clone();
        for a in &agents {
            for l in &games {
                for r in &games {
                    next.push(FiniteProfile::node(a.clone(), Choice::Left, l.clone(), r.clone()));
                }
            }
        }
        games = next;
    }
    games
}

/// Every choice assignment over the nodes of `game`.
pub fn all_profiles(game: &FiniteProfile) -> Vec<FiniteProfile> {
    match game {
        FiniteProfile::Leaf(_) => vec![game.clone()],
        FiniteProfile::Node {
            agent, left, right, ..
        } => {
            let ls = all_profiles(left);
            let rs = all_profiles(right);
            let mut out = Vec::with_capacity(2 * ls.len() * rs.len());
            for c in Choice::BOTH {
                for l in &ls {
                    for r in &rs {
                        out.push(FiniteProfile::node(agent.clone(), c, l.clone(), r.clone()));
                    }
                }
            }
            out
        }
    }
}

fn random_choice(rng: &mut impl Rng) -> Choice {
    if rng.gen_bool(0.5) {
        Choice::Left
    } else {
        Choice::Right
    }
}

/// A random profile with at most `shape.levels` levels; the root is a node
/// whenever two levels are allowed.
pub fn random_game(rng: &mut impl Rng, shape: &GameShape) -> FiniteProfile {
    let agents = agent_names(shape.agents);
    fn go(rng: &mut impl Rng, shape: &GameShape, agents: &[AgentId], levels: usize, top: bool) -> FiniteProfile {
        if levels <= 1 || (!top && rng.gen_bool(0.25)) {
            return FiniteProfile::leaf(agents.iter().map(|a| (a.clone(), rng.gen_range(0..=shape.max_utility))));
        }
        let agent = agents[rng.gen_range(0..agents.len())].clone();
        let choice = random_choice(rng);
        let l = go(rng, shape, agents, levels - 1, false);
        let r = go(rng, shape, agents, levels - 1, false);
        FiniteProfile::node(agent, choice, l, r)
    }
    go(rng, shape, &agents, shape.levels, true)
}

pub const MAX_RANDOM_DEFS: usize = 4;

/// A well-formed system over agents `A`, `B` with up to four definitions,
/// inline bodies up to two levels deep, shifts in `0..=2` and a parameter
/// `v >= 0` that leaves may mention.
pub fn random_affine_system(rng: &mut impl Rng) -> ProfileSystem {
    let k = rng.gen_range(1..=MAX_RANDOM_DEFS);
    let names: Vec<String> = (0..k).map(|i| format!("d{i}")).collect();
    let agents = agent_names(2);

    fn leaf(rng: &mut impl Rng, agents: &[AgentId]) -> ProfileDef {
        ProfileDef::Leaf(
            agents
                .iter()
                .map(|a| {
                    let e = AffineExpr::n() * rng.gen_range(-2..=2)
                        + AffineExpr::param("v") * rng.gen_range(-1..=1)
                        + AffineExpr::constant(rng.gen_range(-3..=3));
                    (a.clone(), e)
                })
                .collect(),
        )
    }

    fn child(rng: &mut impl Rng, agents: &[AgentId], names: &[String], depth: usize) -> Child {
        if rng.gen_bool(0.5) {
            Child::Ref(Ref::new(names[rng.gen_range(0..names.len())].clone(), rng.gen_range(0..=2)))
        } else {
            Child::Inline(body(rng, agents, names, depth - 1))
        }
    }

    fn body(rng: &mut impl Rng, agents: &[AgentId], names: &[String], depth: usize) -> ProfileDef {
        if depth == 0 || rng.gen_bool(0.3) {
            return leaf(rng, agents);
        }
        let l = child(rng, agents, names, depth);
        let r = child(rng, agents, names, depth);
        let agent = agents[rng.gen_range(0..agents.len())].clone();
        ProfileDef::node(agent, random_choice(rng), l, r)
    }

    let mut sys = ProfileSystem::new(agents.clone(), names[0].clone(), rng.gen_range(0..=3)).with_param("v", 0);
    for name in &names {
        let b = body(rng, &agents, &names, 2);
        sys.defs.insert(name.clone(), b);
    }
    sys
}
