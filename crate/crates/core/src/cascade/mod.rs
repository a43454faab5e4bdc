//! Multi-pass Cascade reconciliation with BINARY bisection and cross-pass
//! backtracking.
//!
//! Parity disclosures are one-way accounted: only Alice→Bob parities count
//! toward leakage. Bob's replies are logged but not charged.

mod binary;
mod plan;
mod session;
mod transcript;

pub use binary::{binary_locate, ceil_log2, ParityOracle};
pub use plan::{plan_passes, PassPlan};
pub use session::{run_cascade, CascadeSession};
pub use transcript::{
    parse_transcript_lines, BinaryCall, CascadeTranscript, Correction, Direction, MessageKind, ParityMessage,
    TranscriptEvent,
};

pub use crate::bits::BitString;

use crate::error::{Error, Result};
use crate::scalar::{binary_entropy, Scalar};

/// First-pass block size numerator: `k₁ = ⌈0.73 / Q⌉`.
pub const FIRST_BLOCK_FACTOR: f64 = 0.73;

/// Block sizes for `passes` passes: `k₁ = ⌈0.73/Q⌉` clamped to `[2, ⌈n/2⌉]`,
/// then doubling, capped at `n`. `Q = 0` takes the upper clamp.
pub fn block_schedule<T: Scalar>(qber_estimate: T, n: usize, passes: usize) -> Result<Vec<usize>> {
    if passes == 0 {
        return Err(Error::param("at least one pass is required"));
    }
    if n == 0 {
        return Err(Error::param("key length must be positive"));
    }
    if !(qber_estimate >= T::zero() && qber_estimate <= T::lit(0.5)) {
        return Err(Error::param(format!("QBER estimate {qber_estimate} outside [0, 0.5]")));
    }
    let ceiling = n.div_ceil(2);
    let first = if qber_estimate == T::zero() {
        ceiling
    } else {
        // relative slack keeps exact quotients such as 0.73/0.073 from rounding up
        let raw = T::lit(FIRST_BLOCK_FACTOR) / qber_estimate;
        let k = (raw * (T::one() - T::lit(1e-12))).ceil();
        k.to_usize().unwrap_or(usize::MAX).min(ceiling)
    };
    let first = first.max(2).min(ceiling.max(1)).min(n);
    let mut sizes = Vec::with_capacity(passes);
    let mut k = first;
    for _ in 0..passes {
        sizes.push(k);
        k = k.saturating_mul(2).min(n);
    }
    Ok(sizes)
}

/// `r / e`: current Hamming distance over the initial error count.
pub fn remaining_error_ratio<T: Scalar>(alice: &BitString, bob: &BitString, initial_errors: usize) -> Result<T> {
    if initial_errors == 0 {
        return Err(Error::UndefinedRatio);
    }
    if alice.len() != bob.len() {
        return Err(Error::param("key lengths differ"));
    }
    Ok(T::from_count(alice.hamming_distance(bob)) / T::from_count(initial_errors))
}

/// Reconciliation efficiency `f = leaked / (n·h(q))`.
pub fn leakage_efficiency<T: Scalar>(transcript: &CascadeTranscript, n: usize, q: T) -> Result<T> {
    if !(q > T::zero() && q < T::lit(0.5)) {
        return Err(Error::param(format!("error rate {q} outside (0, 0.5)")));
    }
    if n == 0 {
        return Err(Error::param("key length must be positive"));
    }
    Ok(efficiency_of(transcript.leaked_bits(), n, q))
}

pub(crate) fn efficiency_of<T: Scalar>(leaked: usize, n: usize, q: T) -> T {
    T::from_count(leaked) / (T::from_count(n) * binary_entropy(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};
    use rand::Rng;

    /// Recomputes every block parity of passes `0..=upto` directly.
    fn all_blocks_agree(alice: &BitString, bob: &BitString, plans: &[PassPlan], upto: usize) -> bool {
        plans[..=upto].iter().all(|plan| plan.blocks().iter().all(|b| alice.parity_of(b) == bob.parity_of(b)))
    }

    fn noisy_copy<R: Rng>(alice: &BitString, q: f64, rng: &mut R) -> BitString {
        let mut bob = alice.clone();
        for i in 0..bob.len() {
            if rng.gen::<f64>() < q {
                bob.flip(i);
            }
        }
        bob
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(block_schedule(0.073, 10_000, 4).unwrap(), vec![10, 20, 40, 80]);
        assert_eq!(block_schedule(0.5, 100, 2).unwrap(), vec![2, 4]);
        assert_eq!(block_schedule(1e-12, 100, 1).unwrap(), vec![50]);
        assert_eq!(block_schedule(0.0, 100, 1).unwrap(), vec![50]);
        assert_eq!(block_schedule(0.01f32, 60, 3).unwrap(), vec![30, 60, 60]);
    }

    #[test]
    fn schedule_errors() {
        assert!(block_schedule(0.6, 100, 2).is_err());
        assert!(block_schedule(0.1, 100, 0).is_err());
        assert!(block_schedule(-0.1, 100, 1).is_err());
    }

    #[test]
    fn schedule_tiny_keys() {
        assert_eq!(block_schedule(0.1, 1, 2).unwrap(), vec![1, 1]);
        assert_eq!(block_schedule(0.1, 3, 2).unwrap(), vec![2, 3]);
    }

    #[test]
    fn identical_strings_only_top_level_leakage() {
        let mut rng = substream(1, Purpose::BitSource, &[]);
        let alice = BitString::random(1000, &mut rng);
        let plans = plan_passes(&block_schedule(0.05, 1000, 4).unwrap(), 1000, &mut rng).unwrap();
        let (bob, t) = run_cascade(&alice, &alice, &plans).unwrap();
        assert_eq!(bob, alice);
        assert_eq!(t.corrections().count(), 0);
        let blocks: usize = plans.iter().map(|p| p.blocks().len()).sum();
        assert_eq!(t.leaked_bits(), blocks);
    }

    #[test]
    fn errors_in_different_first_pass_blocks_fixed_in_pass_one() {
        // errors at 1-based {2, 5}: one per pass-1 block
        let alice = BitString::zeros(8);
        let mut bob = alice.clone();
        bob.flip(1);
        bob.flip(4);
        let plans = vec![
            PassPlan::identity(1, 4, 8).unwrap(),
            PassPlan::from_blocks(2, &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap(),
        ];
        let (fixed, t) = run_cascade(&alice, &bob, &plans).unwrap();
        assert_eq!(fixed, alice);
        let corr: Vec<_> = t.corrections().copied().collect();
        assert_eq!(corr, vec![Correction { position: 1, pass: 1 }, Correction { position: 4, pass: 1 }]);
    }

    #[test]
    fn cascade_effect_hand_trace() {
        // errors at 1-based {2, 3} share pass-1 block {1..4} and escape pass 1;
        // pass 2 separates them, its correction reopens the pass-1 block.
        let alice = BitString::from(vec![1, 0, 1, 1, 0, 1, 0, 0]);
        let mut bob = alice.clone();
        bob.flip(1);
        bob.flip(2);
        let plans = vec![
            PassPlan::identity(1, 4, 8).unwrap(),
            PassPlan::from_blocks(2, &[vec![0, 2, 4, 6], vec![1, 3, 5, 7]]).unwrap(),
        ];
        let mut session = CascadeSession::new(&alice, bob.clone(), &plans).unwrap();
        session.run_pass().unwrap();
        assert_eq!(session.transcript().corrections().count(), 0);
        assert_eq!(session.bob().hamming_distance(&alice), 2);
        session.run_pass().unwrap();
        let (fixed, t) = session.finish();
        assert_eq!(fixed, alice);
        let corr: Vec<_> = t.corrections().copied().collect();
        assert_eq!(corr, vec![Correction { position: 2, pass: 2 }, Correction { position: 1, pass: 2 }]);
        // the second BINARY ran on the pass-1 block
        assert_eq!(t.binary_calls()[1].pass, 1);
        assert_eq!(t.binary_calls()[1].block, 0);
        // 4 top-level parities + two BINARY runs on 4-blocks
        assert_eq!(t.leaked_bits(), 4 + 2 + 2);
    }

    #[test]
    fn length_mismatch_and_bad_plan() {
        let a = BitString::zeros(8);
        let b = BitString::zeros(7);
        let plans = vec![PassPlan::identity(1, 4, 8).unwrap()];
        assert!(matches!(run_cascade(&a, &b, &plans), Err(Error::Parameter(_))));
        let plans = vec![PassPlan::identity(1, 4, 6).unwrap()];
        assert!(matches!(run_cascade(&a, &a, &plans), Err(Error::Plan(_))));
    }

    #[test]
    fn invariants_on_random_sessions() {
        let mut rng = substream(7, Purpose::ErrorChannel, &[]);
        for trial in 0..40 {
            let n = 500 + 37 * trial;
            let q = 0.01 + 0.004 * trial as f64;
            let alice = BitString::random(n, &mut rng);
            let bob = noisy_copy(&alice, q, &mut rng);
            let plans = plan_passes(&block_schedule(q, n, 6).unwrap(), n, &mut rng).unwrap();
            let mut session = CascadeSession::new(&alice, bob.clone(), &plans).unwrap();
            let alice_before = alice.clone();
            let mut distance = alice.hamming_distance(&bob);
            let mut seen = 0;
            while session.run_pass().unwrap() {
                let i = session.passes_done() - 1;
                assert!(all_blocks_agree(&alice, session.bob(), &plans, i), "trial {trial} pass {i}");
                // every new correction removed exactly one true error
                let corrections: Vec<_> = session.transcript().corrections().copied().collect();
                assert_eq!(session.bob().hamming_distance(&alice), distance - (corrections.len() - seen));
                distance = session.bob().hamming_distance(&alice);
                seen = corrections.len();
            }
            let (fixed, t) = session.finish();
            assert_eq!(alice, alice_before);
            assert_eq!(fixed.diff_positions(&bob).len(), t.corrections().count());
            let mut flipped: Vec<usize> = t.corrections().map(|c| c.position).collect();
            flipped.sort_unstable();
            assert_eq!(fixed.diff_positions(&bob), flipped);
            let expected: usize =
                t.top_level_disclosures() + t.binary_calls().iter().map(|c| c.disclosed as usize).sum::<usize>();
            assert_eq!(t.leaked_bits(), expected);
            assert!(t.binary_calls().iter().all(|c| c.disclosed <= ceil_log2(c.block_len)));
            let bisect = t
                .parity_messages()
                .filter(|m| m.kind == MessageKind::Bisect && m.direction == Direction::AliceToBob)
                .count();
            assert_eq!(bisect, t.binary_calls().iter().map(|c| c.disclosed as usize).sum::<usize>());
        }
    }

    #[test]
    fn deterministic_transcript() {
        let run = || {
            let mut rng = substream(3, Purpose::Shuffle, &[]);
            let alice = BitString::random(2000, &mut rng);
            let bob = noisy_copy(&alice, 0.06, &mut rng);
            let plans = plan_passes(&block_schedule(0.06, 2000, 4).unwrap(), 2000, &mut rng).unwrap();
            run_cascade(&alice, &bob, &plans).unwrap()
        };
        assert_eq!(run(), run());
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if prefix.len() == used.len() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    fn isolated_somewhere(errors: &[usize], plans: &[PassPlan]) -> bool {
        errors.iter().all(|&e| {
            plans.iter().any(|plan| {
                let b = plan.block_of(e);
                errors.iter().filter(|&&o| plan.block_of(o) == b).count() == 1
            })
        })
    }

    fn check_two_pass(alice: &BitString, plans: &[PassPlan]) -> usize {
        let n = alice.len();
        let mut isolated_cases = 0;
        for mask in 0u32..(1 << n) {
            let errors: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let mut bob = alice.clone();
            for &e in &errors {
                bob.flip(e);
            }
            let mut session = CascadeSession::new(alice, bob, plans).unwrap();
            session.run_to_end().unwrap();
            assert!(all_blocks_agree(alice, session.bob(), plans, 1));
            if isolated_somewhere(&errors, plans) {
                assert_eq!(session.bob(), alice, "errors {errors:?}");
                isolated_cases += 1;
            }
        }
        isolated_cases
    }

    #[test]
    fn brute_force_two_pass_all_shuffles_up_to_six() {
        let mut cases = 0;
        for n in 1..=6 {
            let alice = BitString::from((0..n).map(|i| (i % 3 == 0) as u8).collect::<Vec<_>>());
            for k1 in 1..=n {
                for perm in permutations(n) {
                    for k2 in [2, 3] {
                        let plans =
                            vec![PassPlan::identity(1, k1, n).unwrap(), PassPlan::new(2, k2, perm.clone()).unwrap()];
                        cases += check_two_pass(&alice, &plans);
                    }
                }
            }
        }
        assert!(cases > 10_000);
    }

    #[test]
    fn brute_force_two_pass_sampled_shuffles_up_to_ten() {
        let mut rng = substream(11, Purpose::Shuffle, &[]);
        for n in 7..=10 {
            let alice = BitString::random(n, &mut rng);
            for k1 in 1..=n {
                for _ in 0..6 {
                    let k2 = rng.gen_range(1..=n);
                    let plans =
                        vec![PassPlan::identity(1, k1, n).unwrap(), PassPlan::random(2, k2, n, &mut rng).unwrap()];
                    check_two_pass(&alice, &plans);
                }
            }
        }
    }

    #[test]
    fn seven_passes_leave_a_tenth_at_five_percent() {
        let (n, q) = (10_000, 0.05);
        let good = (0..100u64)
            .filter(|&t| {
                let mut rng = substream(t, Purpose::BitSource, &[5]);
                let alice = BitString::random(n, &mut rng);
                let bob = noisy_copy(&alice, q, &mut rng);
                let initial = alice.hamming_distance(&bob);
                let plans = plan_passes(&block_schedule(q, n, 7).unwrap(), n, &mut rng).unwrap();
                let (fixed, _) = run_cascade(&alice, &bob, &plans).unwrap();
                remaining_error_ratio::<f64>(&alice, &fixed, initial).unwrap() <= 0.1
            })
            .count();
        assert!(good >= 95, "{good}/100");
    }

    #[test]
    fn ratio_and_efficiency() {
        let a: BitString = "0000".parse().unwrap();
        let b: BitString = "0110".parse().unwrap();
        assert_eq!(remaining_error_ratio::<f64>(&a, &b, 2).unwrap(), 1.0);
        assert_eq!(remaining_error_ratio::<f64>(&a, &a, 2).unwrap(), 0.0);
        assert!(matches!(remaining_error_ratio::<f64>(&a, &b, 0), Err(Error::UndefinedRatio)));

        let t = CascadeTranscript::default();
        assert!(leakage_efficiency(&t, 100, 0.5).is_err());
        assert!(leakage_efficiency(&t, 100, 0.0).is_err());
        // leaked = n·h(q) exactly
        let n = 1000;
        let q = 0.11;
        let leaked = (n as f64 * binary_entropy(q)).round() as usize;
        let q_exact = {
            // bisect h(q) = leaked / n
            let (mut lo, mut hi) = (0.0f64, 0.5f64);
            for _ in 0..200 {
                let mid = (lo + hi) / 2.0;
                if binary_entropy(mid) * (n as f64) < (leaked as f64) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo + hi) / 2.0
        };
        assert!((efficiency_of(leaked, n, q_exact) - 1.0f64).abs() < 1e-12);
    }
}
