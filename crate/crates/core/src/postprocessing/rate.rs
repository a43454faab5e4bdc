use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binary_entropy, Scalar};

/// Correctness and secrecy parameters for the final key length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    pub eps_cor: f64,
    pub eps_sec: f64,
    /// Fixed safety margin in bits, on top of the leftover-hash term.
    pub base_margin: usize,
    /// Subtract the measured reconciliation leakage instead of `n·h(Q)`.
    pub leakage_accounting: bool,
}

impl Default for PrivacyParams {
    fn default() -> Self {
        Self { eps_cor: 2f64.powi(-64), eps_sec: 2f64.powi(-64), base_margin: 100, leakage_accounting: true }
    }
}

impl PrivacyParams {
    /// Verification tag length `⌈log₂(1/ε_cor)⌉`.
    pub fn tag_len(&self) -> usize {
        (-self.eps_cor.log2()).ceil().max(1.0) as usize
    }

    /// `base_margin + ⌈2·log₂(1/ε_sec)⌉`.
    pub fn margin(&self) -> usize {
        self.base_margin + (-2.0 * self.eps_sec.log2()).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport<T> {
    pub s_value: T,
    pub qber: T,
    pub leaked_bits: usize,
    pub sifted_len: usize,
    pub rate_per_bit: T,
    pub final_len: usize,
}

/// Eve's entropy penalty `h((1 + √(S²/4 − 1)) / 2)`.
fn eve_term<T: Scalar>(s: T) -> T {
    let two = T::lit(2.0);
    let arg = (s * s / T::lit(4.0) - T::one()).max(T::zero()).min(T::one());
    binary_entropy((T::one() + arg.sqrt()) / two)
}

fn check_inputs<T: Scalar>(s: T, q: T) -> Result<()> {
    if s.is_nan() || s <= T::lit(2.0) {
        return Err(Error::Abort { s_value: s.to_f64().unwrap_or(f64::NAN), threshold: 2.0 });
    }
    let tsirelson = T::lit(2.0) * T::SQRT_2();
    if s > tsirelson * (T::one() + T::lit(1e-12)) {
        return Err(Error::param(format!("S = {s} exceeds Tsirelson's bound")));
    }
    if !(q >= T::zero() && q < T::lit(0.5)) {
        return Err(Error::param(format!("QBER {q} outside [0, 0.5)")));
    }
    Ok(())
}

/// Asymptotic rate `1 − h(Q) − h((1 + √(S²/4 − 1)) / 2)` per sifted bit.
pub fn asymptotic_rate<T: Scalar>(s: T, q: T) -> Result<T> {
    check_inputs(s, q)?;
    Ok(T::one() - binary_entropy(q) - eve_term(s))
}

/// Rate and final key length after verification and privacy amplification.
pub fn key_rate<T: Scalar>(
    s: T,
    q: T,
    leaked_bits: usize,
    sifted_len: usize,
    params: &PrivacyParams,
) -> Result<KeyRateReport<T>> {
    let rate_per_bit = asymptotic_rate(s, q)?;
    let n = T::from_count(sifted_len);
    let charges = T::from_count(params.tag_len() + params.margin());
    let raw = if params.leakage_accounting {
        n * (T::one() - eve_term(s)) - T::from_count(leaked_bits) - charges
    } else {
        n * rate_per_bit - charges
    };
    let final_len = if rate_per_bit <= T::zero() || raw <= T::zero() { 0 } else { raw.floor().to_usize().unwrap_or(0) };
    Ok(KeyRateReport { s_value: s, qber: q, leaked_bits, sifted_len, rate_per_bit, final_len })
}
