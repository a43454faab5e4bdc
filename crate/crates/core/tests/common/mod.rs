//! A 20-round worked example of the protocol, transcribed column by column.

#![allow(dead_code)]

use diqkd::protocol::{ProtocolConfig, RoundRecord, RoundType};
use diqkd::statistics::{AngleMap, NoiseModel, Outcome};

pub const KEY_ROUNDS: [usize; 9] = [3, 4, 5, 6, 11, 13, 16, 17, 18];

const X: [usize; 20] = [1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1];
const Y: [usize; 20] = [0, 0, 2, 2, 2, 2, 1, 1, 0, 1, 2, 0, 2, 1, 1, 2, 2, 2, 1, 1];
const A: [i64; 20] = [1, 1, 1, 1, -1, 1, -1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, 1, -1, 1];
const B: [i64; 20] = [-1, -1, -1, 1, -1, -1, -1, 1, 1, -1, -1, -1, 1, -1, -1, -1, -1, -1, 1, 1];
/// Key-bit rows, in key-round order.
pub const KEY_A: &str = "110111001";
pub const KEY_B: &str = "010001001";

/// x ∈ {0,1}, y ∈ {0,1,2}; CHSH pairs test, (0,2) generates key.
pub fn example_config() -> ProtocolConfig<f64> {
    let mut cfg = ProtocolConfig::standard(NoiseModel::ideal());
    cfg.angles = AngleMap::new(vec![0.0, -45.0], vec![-22.5, 22.5, -22.5]).unwrap();
    cfg.key_pairs = [(0, 2)].into();
    cfg.set_test_fraction(0.5);
    cfg
}

fn round_type(x: usize, y: usize) -> RoundType {
    if y == 2 {
        RoundType::Key
    } else {
        assert!(x < 2, "unexpected input pair ({x},{y})");
        RoundType::Test
    }
}

/// Rounds with the raw a/b rows as printed.
pub fn raw_rounds() -> Vec<RoundRecord> {
    (0..20)
        .map(|i| RoundRecord {
            index: i + 1,
            round_type: round_type(X[i], Y[i]),
            x: X[i],
            y: Y[i],
            a: Outcome::from_value(A[i]).unwrap(),
            b: Outcome::from_value(B[i]).unwrap(),
        })
        .collect()
}

/// Rounds whose key-round outcomes follow the A/B key-bit rows.
pub fn key_row_rounds() -> Vec<RoundRecord> {
    let mut rounds = raw_rounds();
    let bits = |s: &str| s.bytes().map(|c| c - b'0').collect::<Vec<_>>();
    let (ka, kb) = (bits(KEY_A), bits(KEY_B));
    for (k, &idx) in KEY_ROUNDS.iter().enumerate() {
        rounds[idx - 1].a = Outcome::from_bit(ka[k]);
        rounds[idx - 1].b = Outcome::from_bit(kb[k]);
    }
    rounds
}
