//! Round generation, round partitioning, CHSH estimation, sifting and QBER.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::statistics::{sample_outcome_pair, AngleMap, NoiseModel, Outcome, Party, OUTCOME_DRAWS};

pub type InputPair = (usize, usize);

const ROUND_DRAWS: usize = (rng::WORDS_PER_ROUND / 2) as usize;
const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoundType {
    Test,
    Key,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    /// 1-based, contiguous.
    pub index: usize,
    pub round_type: RoundType,
    pub x: usize,
    pub y: usize,
    pub a: Outcome,
    pub b: Outcome,
}

/// The four input pairs entering `S = E₀₀ + E₀₁ + E₁₀ − E₁₁`, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChshPairs(pub [InputPair; 4]);

impl Default for ChshPairs {
    fn default() -> Self {
        ChshPairs([(0, 0), (0, 1), (1, 0), (1, 1)])
    }
}

impl ChshPairs {
    const SIGNS: [f64; 4] = [1.0, 1.0, 1.0, -1.0];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig<T> {
    pub angles: AngleMap<T>,
    pub test_pairs: BTreeSet<InputPair>,
    pub key_pairs: BTreeSet<InputPair>,
    pub chsh_pairs: ChshPairs,
    /// Probability of each input pair per round.
    pub input_weights: Vec<(InputPair, T)>,
    pub noise: NoiseModel<T>,
    /// Abort when `S` is at or below this value.
    pub s_threshold: T,
    /// Optional abort when the key-round QBER exceeds this value.
    pub qber_abort: Option<T>,
}

impl<T: Scalar> ProtocolConfig<T> {
    /// Standard angle map, CHSH test pairs `{0,1}×{0,1}`, key pairs `(2,2)` and
    /// `(3,3)`, half of the rounds testing.
    pub fn standard(noise: NoiseModel<T>) -> Self {
        let test_pairs: BTreeSet<_> = [(0, 0), (0, 1), (1, 0), (1, 1)].into();
        let key_pairs: BTreeSet<_> = [(2, 2), (3, 3)].into();
        let mut cfg = Self {
            angles: AngleMap::standard(),
            test_pairs,
            key_pairs,
            chsh_pairs: ChshPairs::default(),
            input_weights: Vec::new(),
            noise,
            s_threshold: T::lit(2.0),
            qber_abort: None,
        };
        cfg.set_test_fraction(T::lit(0.5));
        cfg
    }

    /// Test rounds with probability `fraction`, uniform within each class.
    pub fn set_test_fraction(&mut self, fraction: T) {
        let class = |pairs: &BTreeSet<InputPair>, mass: T| {
            let w = if pairs.is_empty() { T::zero() } else { mass / T::from_count(pairs.len()) };
            pairs.iter().map(move |&p| (p, w)).collect::<Vec<_>>()
        };
        let mut weights = class(&self.test_pairs, fraction);
        weights.extend(class(&self.key_pairs, T::one() - fraction));
        weights.retain(|(_, w)| *w > T::zero());
        self.input_weights = weights;
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.input_weights.is_empty() {
            return Err(Error::config("input distribution is empty"));
        }
        if let Some(p) = self.test_pairs.intersection(&self.key_pairs).next() {
            return Err(Error::config(format!("input pair {p:?} is both a test and a key pair")));
        }
        let in_alphabet = |&(x, y): &InputPair| {
            x < self.angles.alphabet_size(Party::Alice) && y < self.angles.alphabet_size(Party::Bob)
        };
        for p in self.test_pairs.iter().chain(&self.key_pairs) {
            if !in_alphabet(p) {
                return Err(Error::config(format!("input pair {p:?} outside the input alphabets")));
            }
        }
        let mut total = T::zero();
        for (pair, w) in &self.input_weights {
            if w.is_nan() || *w < T::zero() {
                return Err(Error::config(format!("negative weight for input pair {pair:?}")));
            }
            if !self.test_pairs.contains(pair) && !self.key_pairs.contains(pair) {
                return Err(Error::config(format!("input pair {pair:?} is neither a test nor a key pair")));
            }
            total = total + *w;
        }
        if (total - T::one()).abs() > T::lit(WEIGHT_TOLERANCE) {
            return Err(Error::config(format!("input probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn round_type(&self, x: usize, y: usize) -> Option<RoundType> {
        if self.test_pairs.contains(&(x, y)) {
            Some(RoundType::Test)
        } else if self.key_pairs.contains(&(x, y)) {
            Some(RoundType::Key)
        } else {
            None
        }
    }

    fn pick_pair(&self, u: T) -> InputPair {
        let mut acc = T::zero();
        for (pair, w) in &self.input_weights {
            acc = acc + *w;
            if u < acc {
                return *pair;
            }
        }
        // u landed in the rounding slack above the last cumulative weight
        self.input_weights.last().expect("validated non-empty").0
    }
}

/// Generates one round. Consumes exactly eight `u64` draws.
pub fn generate_round<T: Scalar, R: Rng + ?Sized>(
    index: usize,
    config: &ProtocolConfig<T>,
    rng: &mut R,
) -> Result<RoundRecord> {
    let (x, y) = config.pick_pair(T::lit(rng.gen::<f64>()));
    let round_type = config.round_type(x, y).ok_or(Error::Classification { index, x, y })?;
    let sa = config.angles.setting(Party::Alice, x)?;
    let sb = config.angles.setting(Party::Bob, y)?;
    let pair = sample_outcome_pair(&sa, &sb, &config.noise, round_type == RoundType::Key, rng);
    for _ in 1 + OUTCOME_DRAWS..ROUND_DRAWS {
        rng.gen::<u64>();
    }
    Ok(RoundRecord { index, round_type, x, y, a: pair.a, b: pair.b })
}

/// Runs `n_rounds` protocol rounds, indexed `1..=n_rounds`.
///
/// Round `i` reads the generator's words `[(i−1)·16, i·16)`, so a
/// [`rng::round_rng`] seek reproduces any single round independently.
pub fn run_rounds<T: Scalar, R: Rng + ?Sized>(
    n_rounds: usize,
    config: &ProtocolConfig<T>,
    rng: &mut R,
) -> Result<Vec<RoundRecord>> {
    if n_rounds == 0 {
        return Err(Error::config("number of rounds must be at least 1"));
    }
    config.validate()?;
    (1..=n_rounds).map(|i| generate_round(i, config, rng)).collect()
}

/// Test and key round indices, recomputed from each record's inputs.
pub fn classify_rounds<T: Scalar>(
    records: &[RoundRecord],
    config: &ProtocolConfig<T>,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut test = Vec::new();
    let mut key = Vec::new();
    for r in records {
        match config.round_type(r.x, r.y) {
            Some(RoundType::Test) => test.push(r.index),
            Some(RoundType::Key) => key.push(r.index),
            None => return Err(Error::Classification { index: r.index, x: r.x, y: r.y }),
        }
    }
    Ok((test, key))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshEstimate<T> {
    pub s_value: T,
    pub correlator_values: BTreeMap<InputPair, T>,
    pub counts: BTreeMap<InputPair, usize>,
}

/// Sample mean of `a·b` and the sample count for every input pair present
/// among the test rounds.
pub fn test_correlators<T: Scalar>(records: &[RoundRecord]) -> BTreeMap<InputPair, (T, usize)> {
    let mut sums: BTreeMap<InputPair, (i64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.round_type == RoundType::Test) {
        let e = sums.entry((r.x, r.y)).or_default();
        e.0 += (r.a.value() * r.b.value()) as i64;
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (sum, n))| (k, (T::from_i64(sum).unwrap() / T::from_count(n), n))).collect()
}

/// CHSH value from the test rounds among `records`.
pub fn estimate_chsh<T: Scalar>(records: &[RoundRecord], pairs: &ChshPairs) -> Result<ChshEstimate<T>> {
    let stats = test_correlators::<T>(records);
    let missing: Vec<_> = pairs.0.iter().copied().filter(|p| !stats.contains_key(p)).collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteStatistics { missing });
    }
    let s_value =
        pairs.0.iter().zip(ChshPairs::SIGNS).fold(T::zero(), |acc, (p, sign)| acc + T::lit(sign) * stats[p].0);
    Ok(ChshEstimate {
        s_value,
        correlator_values: stats.iter().map(|(k, v)| (*k, v.0)).collect(),
        counts: stats.iter().map(|(k, v)| (*k, v.1)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SiftedKeys {
    pub alice_bits: BitString,
    pub bob_bits: BitString,
    pub source_round_indices: Vec<usize>,
}

impl SiftedKeys {
    pub fn len(&self) -> usize {
        self.alice_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice_bits.is_empty()
    }

    /// Round indices at which the two keys disagree.
    pub fn mismatch_rounds(&self) -> Vec<usize> {
        self.alice_bits.diff_positions(&self.bob_bits).into_iter().map(|i| self.source_round_indices[i]).collect()
    }
}

/// Keeps the key rounds, mapping outcomes to bits with `+1 ↦ 1`, `−1 ↦ 0`.
pub fn sift_keys(records: &[RoundRecord]) -> SiftedKeys {
    let mut keys = SiftedKeys::default();
    for r in records.iter().filter(|r| r.round_type == RoundType::Key) {
        keys.alice_bits.push(r.a.bit());
        keys.bob_bits.push(r.b.bit());
        keys.source_round_indices.push(r.index);
    }
    keys
}

pub fn estimate_qber<T: Scalar>(keys: &SiftedKeys) -> Result<T> {
    if keys.is_empty() {
        return Err(Error::UndefinedQber);
    }
    let errors = keys.alice_bits.hamming_distance(&keys.bob_bits);
    Ok(T::from_count(errors) / T::from_count(keys.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbortDecision {
    Proceed,
    Abort,
}

/// Abort iff `S ≤ threshold`.
pub fn abort_check<T: Scalar>(est: &ChshEstimate<T>, threshold: T) -> AbortDecision {
    if est.s_value <= threshold {
        AbortDecision::Abort
    } else {
        AbortDecision::Proceed
    }
}

/// Abort iff the QBER exceeds `threshold`.
pub fn qber_abort_check<T: Scalar>(qber: T, threshold: T) -> AbortDecision {
    if qber > threshold {
        AbortDecision::Abort
    } else {
        AbortDecision::Proceed
    }
}
