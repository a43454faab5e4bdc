use crate::bits::BitString;
use crate::error::{Error, Result};

/// Alice's side of the parity exchange.
pub trait ParityOracle {
    /// Discloses the parity of Alice's bits at `positions`.
    fn disclose(&mut self, positions: &[usize]) -> u8;
}

impl<F: FnMut(&[usize]) -> u8> ParityOracle for F {
    fn disclose(&mut self, positions: &[usize]) -> u8 {
        self(positions)
    }
}

/// `⌈log₂ n⌉`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n > 0, "ceil_log2 of zero");
    usize::BITS - (n - 1).leading_zeros()
}

/// Bisection inside a parity-mismatched block.
///
/// Each step discloses Alice's parity of the first `⌈m/2⌉` positions of the
/// current range, so a call discloses at most `⌈log₂ |block|⌉` parities, and
/// exactly that many when `|block|` is a power of two.
/// `alice_block_parity` is the already-disclosed parity of the whole block.
/// Returns the located position and the number of parities disclosed.
pub fn binary_locate<O: ParityOracle + ?Sized>(
    block: &[usize],
    alice_block_parity: u8,
    alice: &mut O,
    bob: &BitString,
) -> Result<(usize, u32)> {
    if block.is_empty() {
        return Err(Error::Contract("BINARY on an empty block".into()));
    }
    if bob.parity_of(block) == alice_block_parity {
        return Err(Error::Contract("BINARY on a block whose parities match".into()));
    }
    let mut range = block;
    let mut disclosed = 0;
    while range.len() > 1 {
        let (left, right) = range.split_at(range.len().div_ceil(2));
        disclosed += 1;
        // matching left parity puts the odd error count in the right half
        range = if alice.disclose(left) == bob.parity_of(left) { right } else { left };
    }
    Ok((range[0], disclosed))
}
