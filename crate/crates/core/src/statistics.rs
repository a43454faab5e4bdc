//! Black-box outcome statistics for an entangled pair under noise.
//!
//! Outcomes follow two-outcome projective statistics on a visibility-`v`
//! entangled state: for angles `θ_A`, `θ_B` the ideal correlator is
//! `v·cos(2(θ_A − θ_B))` and the joint law is `P(a, b) = (1 + a·b·E) / 4`.
//! A symmetric bit-flip channel acts on every round, and a readout error acts
//! on key rounds only. Each channel multiplies the correlator by `(1 − 2p)²`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `u64` draws consumed by one call to [`sample_outcome_pair`].
pub const OUTCOME_DRAWS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting<T> {
    pub party: Party,
    pub input_index: usize,
    /// Degrees, in `[-90, 90)`.
    pub angle: T,
}

impl<T: Scalar> MeasurementSetting<T> {
    pub fn new(party: Party, input_index: usize, angle: T) -> Result<Self> {
        if !(angle >= T::lit(-90.0) && angle < T::lit(90.0)) {
            return Err(Error::param(format!("angle {angle} for {party:?} input {input_index} outside [-90, 90)")));
        }
        Ok(Self { party, input_index, angle })
    }
}

/// Input index to measurement angle, per party.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleMap<T> {
    alice: Vec<T>,
    bob: Vec<T>,
}

impl<T: Scalar> AngleMap<T> {
    pub fn new(alice: Vec<T>, bob: Vec<T>) -> Result<Self> {
        if alice.is_empty() || bob.is_empty() {
            return Err(Error::config("input alphabets must be non-empty"));
        }
        let map = Self { alice, bob };
        for party in [Party::Alice, Party::Bob] {
            for i in 0..map.alphabet_size(party) {
                map.setting(party, i)?;
            }
        }
        Ok(map)
    }

    /// Alice `x ∈ {0: 0°, 1: −45°, 2: −22.5°, 3: +22.5°}`, Bob
    /// `y ∈ {0: −22.5°, 1: +22.5°, 2: −22.5°, 3: +22.5°}`. Inputs 0 and 1 are
    /// the CHSH-optimal test settings; `(2, 2)` and `(3, 3)` are aligned key
    /// settings.
    pub fn standard() -> Self {
        let alice = [0.0, -45.0, -22.5, 22.5].map(T::lit).to_vec();
        let bob = [-22.5, 22.5, -22.5, 22.5].map(T::lit).to_vec();
        Self { alice, bob }
    }

    pub fn alphabet_size(&self, party: Party) -> usize {
        match party {
            Party::Alice => self.alice.len(),
            Party::Bob => self.bob.len(),
        }
    }

    pub fn angles(&self, party: Party) -> &[T] {
        match party {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    pub fn setting(&self, party: Party, input_index: usize) -> Result<MeasurementSetting<T>> {
        let angle = *self
            .angles(party)
            .get(input_index)
            .ok_or_else(|| Error::config(format!("{party:?} input {input_index} has no configured angle")))?;
        MeasurementSetting::new(party, input_index, angle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel<T> {
    pub visibility: T,
    pub bitflip_prob: T,
    pub key_readout_error: T,
}

impl<T: Scalar> NoiseModel<T> {
    pub fn new(visibility: T, bitflip_prob: T, key_readout_error: T) -> Result<Self> {
        let noise = Self { visibility, bitflip_prob, key_readout_error };
        noise.validate()?;
        Ok(noise)
    }

    pub fn ideal() -> Self {
        Self { visibility: T::one(), bitflip_prob: T::zero(), key_readout_error: T::zero() }
    }

    /// Visibility and key-round readout error reproducing a target CHSH value
    /// (with CHSH-optimal test angles) and a target key-round QBER.
    ///
    /// `v = S / 2√2` and `(1 − 2ε)²·v = 1 − 2Q`.
    pub fn calibrated(s_target: T, qber_target: T) -> Result<Self> {
        let two = T::lit(2.0);
        let visibility = s_target / (two * T::SQRT_2());
        let ratio = (T::one() - two * qber_target) / visibility;
        if !(ratio > T::zero() && ratio <= T::one()) {
            return Err(Error::param(format!(
                "QBER {qber_target} is not reachable from S = {s_target} with a key-round readout error"
            )));
        }
        let key_readout_error = (T::one() - ratio.sqrt()) / two;
        Self::new(visibility, T::zero(), key_readout_error)
    }

    pub fn with_bitflip(self, bitflip_prob: T) -> Result<Self> {
        Self::new(self.visibility, bitflip_prob, self.key_readout_error)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.visibility) {
            return Err(Error::param(format!("visibility {} outside [0, 1]", self.visibility)));
        }
        if !unit(self.bitflip_prob) {
            return Err(Error::param(format!("bit-flip probability {} outside [0, 1]", self.bitflip_prob)));
        }
        if !(self.key_readout_error >= T::zero() && self.key_readout_error <= T::lit(0.5)) {
            return Err(Error::param(format!("key readout error {} outside [0, 0.5]", self.key_readout_error)));
        }
        Ok(())
    }
}

/// A ±1 measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Minus,
    Plus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Minus => -1,
            Outcome::Plus => 1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            -1 => Some(Outcome::Minus),
            1 => Some(Outcome::Plus),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Minus => Outcome::Plus,
            Outcome::Plus => Outcome::Minus,
        }
    }

    /// Key-bit convention: `+1 ↦ 1`, `−1 ↦ 0`.
    pub fn bit(self) -> u8 {
        match self {
            Outcome::Minus => 0,
            Outcome::Plus => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomePair {
    pub a: Outcome,
    pub b: Outcome,
}

impl OutcomePair {
    pub fn product(&self) -> i8 {
        self.a.value() * self.b.value()
    }
}

/// Analytic correlator `⟨A B⟩` for the given settings and noise.
pub fn correlator<T: Scalar>(
    setting_a: &MeasurementSetting<T>,
    setting_b: &MeasurementSetting<T>,
    noise: &NoiseModel<T>,
    is_key_round: bool,
) -> T {
    let two = T::lit(2.0);
    let delta = (setting_a.angle - setting_b.angle).to_radians();
    let flip = T::one() - two * noise.bitflip_prob;
    let mut e = noise.visibility * (two * delta).cos() * flip * flip;
    if is_key_round {
        let readout = T::one() - two * noise.key_readout_error;
        e = e * readout * readout;
    }
    e.max(-T::one()).min(T::one())
}

fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.gen::<f64>())
}

/// Draws one outcome pair. Always consumes exactly [`OUTCOME_DRAWS`] `u64`s.
pub fn sample_outcome_pair<T: Scalar, R: Rng + ?Sized>(
    setting_a: &MeasurementSetting<T>,
    setting_b: &MeasurementSetting<T>,
    noise: &NoiseModel<T>,
    is_key_round: bool,
    rng: &mut R,
) -> OutcomePair {
    let two = T::lit(2.0);
    let delta = (setting_a.angle - setting_b.angle).to_radians();
    let ideal = noise.visibility * (two * delta).cos();

    let a = if rng.gen::<u64>() & 1 == 1 { Outcome::Plus } else { Outcome::Minus };
    let agree: T = uniform(rng);
    let b = if agree < (T::one() + ideal) / two { a } else { a.flipped() };

    let pair = apply_bitflip(OutcomePair { a, b }, noise.bitflip_prob, rng);
    let readout = if is_key_round { noise.key_readout_error } else { T::zero() };
    apply_bitflip(pair, readout, rng)
}

/// Negates each outcome independently with probability `p`. Consumes two draws.
pub fn apply_bitflip<T: Scalar, R: Rng + ?Sized>(pair: OutcomePair, p: T, rng: &mut R) -> OutcomePair {
    let ua: T = uniform(rng);
    let ub: T = uniform(rng);
    OutcomePair { a: if ua < p { pair.a.flipped() } else { pair.a }, b: if ub < p { pair.b.flipped() } else { pair.b } }
}
