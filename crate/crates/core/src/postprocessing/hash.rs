use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashFamily {
    /// `out_i = ⊕_j T[i][j]·x_j` with `T[i][j] = seed[i − j + n − 1]`.
    Toeplitz,
}

/// A member of a two-universal family, fixed by its seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashSpec {
    pub family: HashFamily,
    pub seed: BitString,
    pub input_len: usize,
    pub output_len: usize,
}

fn seed_len(input_len: usize, output_len: usize) -> usize {
    (input_len + output_len).saturating_sub(1)
}

impl HashSpec {
    pub fn new(input_len: usize, output_len: usize, seed: BitString) -> Result<Self> {
        if output_len > input_len {
            return Err(Error::param(format!("output length {output_len} exceeds input length {input_len}")));
        }
        if seed.len() != seed_len(input_len, output_len) {
            return Err(Error::param(format!(
                "Toeplitz seed has {} bits, expected {}",
                seed.len(),
                seed_len(input_len, output_len)
            )));
        }
        Ok(Self { family: HashFamily::Toeplitz, seed, input_len, output_len })
    }

    pub fn random<R: Rng + ?Sized>(input_len: usize, output_len: usize, rng: &mut R) -> Result<Self> {
        Self::new(input_len, output_len, BitString::random(seed_len(input_len, output_len), rng))
    }
}

/// Toeplitz product of `key` with the `output_len × key.len()` matrix whose
/// diagonals come from `seed` (length `key.len() + output_len − 1`).
pub fn toeplitz_hash(key: &BitString, seed: &BitString, output_len: usize) -> Result<BitString> {
    let n = key.len();
    if output_len == 0 || n == 0 {
        return Ok(BitString::zeros(output_len));
    }
    if seed.len() != seed_len(n, output_len) {
        return Err(Error::param("Toeplitz seed length does not match key and output lengths"));
    }
    // out_i = parity(seed[i .. i + n] & reverse(key))
    let reversed: BitString = (0..n).map(|j| key.get(n - 1 - j)).collect();
    let key_words = reversed.to_words();
    let mut seed_words = seed.to_words();
    seed_words.push(0);
    let window = |offset: usize, w: usize| -> u64 {
        let bit = offset + 64 * w;
        let (idx, shift) = (bit / 64, bit % 64);
        if shift == 0 {
            seed_words[idx]
        } else {
            (seed_words[idx] >> shift) | (seed_words[idx + 1] << (64 - shift))
        }
    };
    Ok((0..output_len)
        .map(|i| {
            let acc = key_words.iter().enumerate().fold(0u64, |acc, (w, &kw)| acc ^ (window(i, w) & kw));
            (acc.count_ones() & 1) as u8
        })
        .collect())
}

pub fn universal_hash(key: &BitString, spec: &HashSpec) -> Result<BitString> {
    if key.len() != spec.input_len {
        return Err(Error::param(format!("key has {} bits, hash expects {}", key.len(), spec.input_len)));
    }
    toeplitz_hash(key, &spec.seed, spec.output_len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Match,
    Mismatch,
}

/// Compares `tag_len`-bit Toeplitz digests of both keys under the hash
/// selected by `seed`.
pub fn verify_keys(k_a: &BitString, k_b: &BitString, tag_len: usize, seed: u64) -> Result<VerifyOutcome> {
    if k_a.len() != k_b.len() {
        return Err(Error::param(format!("key lengths differ: {} vs {}", k_a.len(), k_b.len())));
    }
    if tag_len == 0 {
        return Err(Error::param("tag length must be positive"));
    }
    let mut rng = substream(seed, Purpose::Verify, &[]);
    let matrix_seed = BitString::random(seed_len(k_a.len(), tag_len), &mut rng);
    let same = toeplitz_hash(k_a, &matrix_seed, tag_len)? == toeplitz_hash(k_b, &matrix_seed, tag_len)?;
    Ok(if same { VerifyOutcome::Match } else { VerifyOutcome::Mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    /// Direct matrix-vector product over GF(2).
    fn naive(key: &BitString, seed: &BitString, m: usize) -> BitString {
        let n = key.len();
        (0..m).map(|i| (0..n).fold(0u8, |acc, j| acc ^ (seed.get(i + n - 1 - j) & key.get(j)))).collect()
    }

    #[test]
    fn matches_naive_product() {
        let mut rng = substream(1, Purpose::Hash, &[]);
        for (n, m) in [(1, 1), (5, 3), (64, 64), (65, 1), (130, 70), (200, 129)] {
            let key = BitString::random(n, &mut rng);
            let seed = BitString::random(n + m - 1, &mut rng);
            assert_eq!(toeplitz_hash(&key, &seed, m).unwrap(), naive(&key, &seed, m), "n={n} m={m}");
        }
    }

    #[test]
    fn zero_output_and_zero_key() {
        let mut rng = substream(2, Purpose::Hash, &[]);
        let spec = HashSpec::random(40, 0, &mut rng).unwrap();
        assert!(universal_hash(&BitString::random(40, &mut rng), &spec).unwrap().is_empty());
        let spec = HashSpec::random(40, 20, &mut rng).unwrap();
        assert_eq!(universal_hash(&BitString::zeros(40), &spec).unwrap(), BitString::zeros(20));
    }

    #[test]
    fn linear_in_key() {
        let mut rng = substream(3, Purpose::Hash, &[]);
        let spec = HashSpec::random(100, 30, &mut rng).unwrap();
        let x = BitString::random(100, &mut rng);
        let y = BitString::random(100, &mut rng);
        let xy: BitString = x.iter().zip(y.iter()).map(|(a, b)| a ^ b).collect();
        let hx = universal_hash(&x, &spec).unwrap();
        let hy = universal_hash(&y, &spec).unwrap();
        let hxy: BitString = hx.iter().zip(hy.iter()).map(|(a, b)| a ^ b).collect();
        assert_eq!(universal_hash(&xy, &spec).unwrap(), hxy);
    }

    #[test]
    fn spec_validation() {
        assert!(HashSpec::new(10, 11, BitString::zeros(20)).is_err());
        assert!(HashSpec::new(10, 4, BitString::zeros(12)).is_err());
        let spec = HashSpec::new(10, 4, BitString::zeros(13)).unwrap();
        assert!(universal_hash(&BitString::zeros(9), &spec).is_err());
    }

    #[test]
    fn digest_uniform_over_seeds() {
        // chi-square critical value for 255 degrees of freedom at p = 1e-3
        const CRITICAL: f64 = 330.52;
        let (n, m, trials) = (40, 8, 256 * 40);
        let mut rng = substream(9, Purpose::BitSource, &[]);
        let mut inputs = vec![BitString::zeros(n), BitString::random(n, &mut rng)];
        inputs[0].set(n - 1, 1);
        for key in &inputs {
            let mut counts = [0usize; 256];
            for s in 0..trials {
                let seed = BitString::random(n + m - 1, &mut substream(9, Purpose::Hash, &[s as u64]));
                let digest = toeplitz_hash(key, &seed, m).unwrap();
                counts[digest.iter().fold(0, |acc, b| acc << 1 | b as usize)] += 1;
            }
            let expected = trials as f64 / 256.0;
            let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
            assert!(chi2 < CRITICAL, "chi-square {chi2}");
        }
    }

    #[test]
    fn verify_basics() {
        let mut rng = substream(4, Purpose::Hash, &[]);
        let k = BitString::random(300, &mut rng);
        for seed in 0..50 {
            assert_eq!(verify_keys(&k, &k, 64, seed).unwrap(), VerifyOutcome::Match);
        }
        assert_eq!(verify_keys(&BitString::new(), &BitString::new(), 8, 1).unwrap(), VerifyOutcome::Match);
        assert!(verify_keys(&k, &BitString::zeros(3), 8, 1).is_err());
    }

    #[test]
    fn verify_never_mismatches_equal_short_keys() {
        for n in 0..=12usize {
            for v in 0u32..(1 << n) {
                let k: BitString = (0..n).map(|i| (v >> i & 1) as u8).collect();
                assert_eq!(verify_keys(&k, &k, 16, v as u64).unwrap(), VerifyOutcome::Match);
            }
        }
    }
}
