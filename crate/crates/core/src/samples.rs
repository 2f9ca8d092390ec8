//! Small named profiles used throughout the tests and the CLI.

use crate::affine::AffineExpr;
use crate::finite::FiniteProfile;
use crate::model::{Choice, ProfileDef, ProfileSystem, Ref};

fn pair(alice: i64, bob: i64) -> FiniteProfile {
    FiniteProfile::leaf([("Alice", alice), ("Bob", bob)])
}

/// `<<Alice, l, <<Bob, l, {Alice:0, Bob:1}, {Alice:2, Bob:0}>>, {Alice:1, Bob:2}>>`
pub fn s0() -> FiniteProfile {
    FiniteProfile::node(
        "Alice",
        Choice::Left,
        FiniteProfile::node("Bob", Choice::Left, pair(0, 1), pair(2, 0)),
        pair(1, 2),
    )
}

/// Same game as [`s0`], Alice choosing right.
pub fn s1() -> FiniteProfile {
    FiniteProfile::node(
        "Alice",
        Choice::Right,
        FiniteProfile::node("Bob", Choice::Left, pair(0, 1), pair(2, 0)),
        pair(1, 2),
    )
}

/// `t = <<Alice, r, {Alice:0, Bob:0}, <<Bob, r, t, t>>>>`
pub fn t_equation() -> ProfileSystem {
    ProfileSystem::new(["Alice", "Bob"], "t", 0).with_def(
        "t",
        ProfileDef::node(
            "Alice",
            Choice::Right,
            ProfileDef::leaf([("Alice", 0), ("Bob", 0)]),
            ProfileDef::node("Bob", Choice::Right, Ref::new("t", 0), Ref::new("t", 0)),
        ),
    )
}

/// Like [`t_equation`], but Alice goes left into a Bob node whose children
/// both re-enter `loop`, so the realized play never ends.
pub fn diverging() -> ProfileSystem {
    ProfileSystem::new(["Alice", "Bob"], "loop", 0).with_def(
        "loop",
        ProfileDef::node(
            "Alice",
            Choice::Left,
            ProfileDef::node("Bob", Choice::Right, Ref::new("loop", 0), Ref::new("loop", 0)),
            ProfileDef::leaf([("Alice", 0), ("Bob", 0)]),
        ),
    )
}

/// A root whose chosen branch is a leaf but whose other branch diverges.
pub fn diverging_off_path() -> ProfileSystem {
    diverging()
        .with_def(
            "top",
            ProfileDef::node(
                "Alice",
                Choice::Left,
                ProfileDef::leaf([("Alice", AffineExpr::n()), ("Bob", AffineExpr::zero())]),
                Ref::new("loop", 0),
            ),
        )
        .rooted_at("top", 0)
}

impl ProfileSystem {
    pub fn rooted_at(mut self, def: impl Into<String>, n0: u64) -> Self {
        self.root.def = def.into();
        self.root.n0 = n0;
        self
    }
}
