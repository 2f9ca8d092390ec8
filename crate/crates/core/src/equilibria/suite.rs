use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::finite::{backward_induction, brute_nash, brute_sgpe, FiniteProfile};
use crate::generate::{random_game, GameShape};
use crate::model::PrefOrder;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub generated: usize,
    /// Samples that passed the subgame-perfection filter.
    pub sgpe: usize,
    pub violations: Vec<(PrefOrder, FiniteProfile)>,
}

impl SuiteReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Random profiles of up to five levels over two agents, utilities in `0..=2`.
pub const SUITE_SHAPE: GameShape = GameShape {
    levels: 5,
    agents: 2,
    max_utility: 2,
};

/// Every sampled profile that passes `sgpe` must pass `nash`.
///
/// Half of the samples have their choices replaced by a random
/// backward-induction solution, so the filter keeps a fair share.
pub fn suite_with(
    seed: u64,
    count: usize,
    sgpe: impl Fn(&FiniteProfile, PrefOrder) -> bool,
    nash: impl Fn(&FiniteProfile, PrefOrder) -> bool,
) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport {
        seed,
        generated: 0,
        sgpe: 0,
        violations: Vec::new(),
    };
    for _ in 0..count {
        let pref = if rng.gen_bool(0.5) {
            PrefOrder::HigherIsBetter
        } else {
            PrefOrder::LowerIsBetter
        };
        let mut s = random_game(&mut rng, &SUITE_SHAPE);
        if rng.gen_bool(0.5) {
            let solved: Vec<_> = backward_induction(&s, pref).into_iter().collect();
            s = solved[rng.gen_range(0..solved.len())].clone();
        }
        report.generated += 1;
        if sgpe(&s, pref) {
            report.sgpe += 1;
            if !nash(&s, pref) {
                report.violations.push((pref, s));
            }
        }
    }
    report
}

pub fn sgpe_implies_nash_suite(seed: u64, count: usize) -> SuiteReport {
    suite_with(seed, count, brute_sgpe, brute_nash)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_on_the_oracles() {
        let r = sgpe_implies_nash_suite(1, 200);
        assert_eq!(r.generated, 200);
        assert!(r.sgpe > 50, "{}", r.sgpe);
        assert!(r.is_clean());
    }

    #[test]
    fn empty_run() {
        let r = sgpe_implies_nash_suite(1, 0);
        assert_eq!((r.generated, r.sgpe), (0, 0));
        assert!(r.is_clean());
    }

    #[test]
    fn corrupted_checker_is_caught() {
        let always = |_: &FiniteProfile, _: PrefOrder| true;
        assert!(!suite_with(1, 200, always, brute_nash).is_clean());
        // a Nash checker that reads the order backwards
        let flipped = |s: &FiniteProfile, p: PrefOrder| {
            brute_nash(
                s,
                match p {
                    PrefOrder::HigherIsBetter => PrefOrder::LowerIsBetter,
                    PrefOrder::LowerIsBetter => PrefOrder::HigherIsBetter,
                },
            )
        };
        assert!(!suite_with(1, 200, brute_sgpe, flipped).is_clean());
    }

    #[test]
    fn deterministic_for_a_seed() {
        assert_eq!(sgpe_implies_nash_suite(7, 50), sgpe_implies_nash_suite(7, 50));
    }
}
