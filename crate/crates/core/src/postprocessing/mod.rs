//! Key verification, privacy amplification and secret-key-rate accounting.

mod hash;
mod rate;

pub use hash::{toeplitz_hash, universal_hash, verify_keys, HashFamily, HashSpec, VerifyOutcome};
pub use rate::{asymptotic_rate, key_rate, KeyRateReport, PrivacyParams};
