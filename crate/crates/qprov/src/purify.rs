//! Entanglement purification.
//!
//! Two Bell pairs of fidelity `b1` and `b2` can be merged into a single pair
//! of fidelity `b1*b2 / (b1*b2 + (1-b1)(1-b2))`. Chaining the operation over
//! `k` equal-fidelity pairs spends `k - 1` rounds and yields one pair whose
//! fidelity improves monotonically with `k` whenever the base fidelity is
//! above 0.5 (and degrades below it). All pairs on a link share the link's
//! base fidelity, so a chain is fully described by `(base, pair_count)`.

use thiserror::Error;

/// Absolute slack used when comparing an achieved fidelity against a target,
/// so that exact thresholds do not flip on floating-point noise.
pub const FIDELITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PurifyError {
    #[error("fidelity {0} outside (0, 1]")]
    FidelityOutOfRange(f64),
    #[error("pair count must be at least 1")]
    ZeroPairs,
}

/// Outcome of running a purification chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PurificationChain {
    pub base_fidelity: f64,
    pub pair_count: u32,
    /// Fidelity of the single pair left after all rounds.
    pub achieved: f64,
    /// Rounds executed; always `pair_count - 1`.
    pub rounds: u32,
}

impl PurificationChain {
    pub fn run(base_fidelity: f64, pair_count: u32) -> Result<Self, PurifyError> {
        let achieved = purify_chain(base_fidelity, pair_count)?;
        Ok(Self {
            base_fidelity,
            pair_count,
            achieved,
            rounds: pair_count - 1,
        })
    }
}

fn check_fidelity(b: f64) -> Result<(), PurifyError> {
    if !(b > 0.0 && b <= 1.0) || !b.is_finite() {
        return Err(PurifyError::FidelityOutOfRange(b));
    }
    Ok(())
}

/// Merges two pairs into one of improved fidelity.
pub fn purify_pair(b1: f64, b2: f64) -> Result<f64, PurifyError> {
    check_fidelity(b1)?;
    check_fidelity(b2)?;
    let num = b1 * b2;
    let den = num + (1.0 - b1) * (1.0 - b2);
    Ok(num / den)
}

/// Folds `purify_pair` over `pair_count` equal-fidelity pairs.
///
/// One pair means zero rounds: the base fidelity is returned unchanged.
pub fn purify_chain(base: f64, pair_count: u32) -> Result<f64, PurifyError> {
    check_fidelity(base)?;
    if pair_count < 1 {
        return Err(PurifyError::ZeroPairs);
    }
    let mut achieved = base;
    for _ in 1..pair_count {
        achieved = purify_pair(achieved, base)?;
    }
    Ok(achieved)
}

/// Smallest pair count whose chain meets `target`, or `None` when no count up
/// to `max_pairs` does.
///
/// A linear scan is used: counts stay small in practice and monotonicity only
/// holds above base fidelity 0.5, where purification actually improves.
pub fn min_pairs_for_target(
    base: f64,
    target: f64,
    max_pairs: u32,
) -> Result<Option<u32>, PurifyError> {
    check_fidelity(base)?;
    check_fidelity(target)?;
    if max_pairs < 1 {
        return Err(PurifyError::ZeroPairs);
    }
    if base + FIDELITY_SLACK >= target {
        return Ok(Some(1));
    }
    if base <= 0.5 {
        // Chains at or below 0.5 never improve, so any target above base is out
        // of reach no matter how many pairs are spent.
        return Ok(None);
    }
    let mut achieved = base;
    for k in 2..=max_pairs {
        achieved = purify_pair(achieved, base)?;
        if achieved + FIDELITY_SLACK >= target {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_is_identity() {
        for b in [0.1, 0.3, 0.5, 0.7, 0.99] {
            let out = purify_pair(0.5, b).unwrap();
            assert!((out - b).abs() < 1e-12, "purify(0.5, {b}) = {out}");
        }
    }

    #[test]
    fn perfect_pair_stays_perfect() {
        assert_eq!(purify_pair(1.0, 0.6).unwrap(), 1.0);
        let near = purify_pair(1.0 - 1e-12, 0.6).unwrap();
        assert!(near > 1.0 - 1e-9);
    }

    #[test]
    fn published_single_round() {
        let out = purify_pair(0.8, 0.8).unwrap();
        assert!((out - 0.9411765).abs() < 1e-6, "got {out}");
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(purify_pair(0.0, 0.5).is_err());
        assert!(purify_pair(0.5, 1.5).is_err());
        assert!(purify_pair(-0.2, 0.5).is_err());
        assert!(purify_chain(f64::NAN, 2).is_err());
    }

    #[test]
    fn chain_of_one_is_base() {
        assert_eq!(purify_chain(0.42, 1).unwrap(), 0.42);
        assert!(purify_chain(0.42, 0).is_err());
    }

    #[test]
    fn chain_matches_published_figures() {
        let f = purify_chain(0.79, 4).unwrap();
        assert!((f - 0.995).abs() < 0.0005, "got {f}");
        let f = purify_chain(0.55, 7).unwrap();
        assert!(f >= 0.80, "got {f}");
        assert!((f - 0.803).abs() < 0.001, "got {f}");
    }

    #[test]
    fn chain_struct_tracks_rounds() {
        let chain = PurificationChain::run(0.79, 4).unwrap();
        assert_eq!(chain.rounds, 3);
        assert_eq!(chain.pair_count, 4);
        assert!((chain.achieved - 0.995).abs() < 0.0005);
    }

    #[test]
    fn min_pairs_examples() {
        assert_eq!(min_pairs_for_target(0.55, 0.80, 60).unwrap(), Some(7));
        assert_eq!(min_pairs_for_target(0.9, 0.8, 60).unwrap(), Some(1));
        assert_eq!(min_pairs_for_target(0.6, 0.8, 60).unwrap(), Some(4));
    }

    #[test]
    fn min_pairs_infeasible_cases() {
        // At or below 0.5 purification cannot improve.
        assert_eq!(min_pairs_for_target(0.5, 0.6, 60).unwrap(), None);
        assert_eq!(min_pairs_for_target(0.3, 0.4, 60).unwrap(), None);
        // Target 1.0 stays out of the comparison slack from a weak base.
        assert_eq!(min_pairs_for_target(0.55, 1.0, 60).unwrap(), None);
        // From a strong base the chain closes to within the slack of 1.0.
        assert_eq!(min_pairs_for_target(0.9, 1.0, 60).unwrap(), Some(10));
        // Degrading chains still satisfy targets at or below base.
        assert_eq!(min_pairs_for_target(0.3, 0.3, 60).unwrap(), Some(1));
    }

    #[test]
    fn min_pairs_respects_budget() {
        // 0.55 needs 7 pairs for 0.80; a budget of 6 cannot reach it.
        assert_eq!(min_pairs_for_target(0.55, 0.80, 6).unwrap(), None);
        assert_eq!(min_pairs_for_target(0.55, 0.80, 7).unwrap(), Some(7));
    }

    proptest! {
        #[test]
        fn pair_is_symmetric(a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let ab = purify_pair(a, b).unwrap();
            let ba = purify_pair(b, a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
        }

        #[test]
        fn chain_increases_above_half(base in 0.51f64..0.999, k in 1u32..20) {
            let lo = purify_chain(base, k).unwrap();
            let hi = purify_chain(base, k + 1).unwrap();
            prop_assert!(hi >= lo);
            // Strictness is only observable until f64 saturates at 1.
            if lo < 1.0 - 1e-9 {
                prop_assert!(hi > lo);
            }
            prop_assert!(hi <= 1.0);
        }

        #[test]
        fn chain_degrades_below_half(base in 0.01f64..0.4999, k in 1u32..20) {
            let lo = purify_chain(base, k).unwrap();
            let hi = purify_chain(base, k + 1).unwrap();
            prop_assert!(hi <= lo + 1e-15);
        }

        #[test]
        fn min_pairs_monotone_in_target(base in 0.55f64..0.95, t1 in 0.1f64..0.95, t2 in 0.1f64..0.95) {
            let (t1, t2) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let k1 = min_pairs_for_target(base, t1, 60).unwrap();
            let k2 = min_pairs_for_target(base, t2, 60).unwrap();
            if let (Some(k1), Some(k2)) = (k1, k2) {
                prop_assert!(k1 <= k2);
            }
        }

        #[test]
        fn min_pairs_antitone_in_base(b1 in 0.51f64..0.95, b2 in 0.51f64..0.95, t in 0.1f64..0.95) {
            let (b1, b2) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let k1 = min_pairs_for_target(b1, t, 60).unwrap();
            let k2 = min_pairs_for_target(b2, t, 60).unwrap();
            if let (Some(k1), Some(k2)) = (k1, k2) {
                prop_assert!(k1 >= k2);
            }
        }
    }
}
