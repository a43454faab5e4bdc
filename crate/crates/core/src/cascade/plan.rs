use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Block structure of one Cascade pass.
///
/// `shuffle[l]` is the shuffled slot of position `l`; position `l` belongs to
/// block `shuffle[l] / block_size`. Blocks list their positions in slot order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassPlan {
    pass_index: usize,
    block_size: usize,
    shuffle: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl PassPlan {
    pub fn new(pass_index: usize, block_size: usize, shuffle: Vec<usize>) -> Result<Self> {
        if pass_index == 0 {
            return Err(Error::Plan("pass indices start at 1".into()));
        }
        if block_size == 0 {
            return Err(Error::Plan("block size must be positive".into()));
        }
        let n = shuffle.len();
        let mut slots: Vec<Option<usize>> = vec![None; n];
        for (pos, &slot) in shuffle.iter().enumerate() {
            match slots.get_mut(slot) {
                Some(s @ None) => *s = Some(pos),
                Some(Some(_)) => return Err(Error::Plan(format!("slot {slot} assigned twice"))),
                None => return Err(Error::Plan(format!("slot {slot} out of range for length {n}"))),
            }
        }
        let blocks: Vec<Vec<usize>> =
            slots.chunks(block_size).map(|chunk| chunk.iter().map(|p| p.expect("bijection")).collect()).collect();
        let block_of = shuffle.iter().map(|&slot| slot / block_size).collect();
        Ok(Self { pass_index, block_size, shuffle, blocks, block_of })
    }

    pub fn identity(pass_index: usize, block_size: usize, n: usize) -> Result<Self> {
        Self::new(pass_index, block_size, (0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(pass_index: usize, block_size: usize, n: usize, rng: &mut R) -> Result<Self> {
        let mut shuffle: Vec<usize> = (0..n).collect();
        shuffle.shuffle(rng);
        Self::new(pass_index, block_size, shuffle)
    }

    /// Explicit block partition; positions within a block keep the given order.
    pub fn from_blocks(pass_index: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let block_size = blocks.iter().map(Vec::len).max().unwrap_or(1).max(1);
        if blocks.iter().rev().skip(1).any(|b| b.len() != block_size) {
            return Err(Error::Plan("only the last block may be shorter".into()));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut shuffle = vec![usize::MAX; n];
        for (j, block) in blocks.iter().enumerate() {
            for (k, &pos) in block.iter().enumerate() {
                if pos >= n || shuffle[pos] != usize::MAX {
                    return Err(Error::Plan(format!("position {pos} repeated or out of range")));
                }
                shuffle[pos] = j * block_size + k;
            }
        }
        Self::new(pass_index, block_size, shuffle)
    }

    pub fn pass_index(&self) -> usize {
        self.pass_index
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn len(&self) -> usize {
        self.shuffle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shuffle.is_empty()
    }

    pub fn shuffle(&self) -> &[usize] {
        &self.shuffle
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &[usize] {
        &self.blocks[j]
    }

    pub fn block_of(&self, position: usize) -> usize {
        self.block_of[position]
    }
}

/// Pass 1 keeps positions in order; later passes use uniform random shuffles.
pub fn plan_passes<R: Rng + ?Sized>(block_sizes: &[usize], n: usize, rng: &mut R) -> Result<Vec<PassPlan>> {
    block_sizes
        .iter()
        .enumerate()
        .map(|(i, &k)| if i == 0 { PassPlan::identity(1, k, n) } else { PassPlan::random(i + 1, k, n, rng) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    #[test]
    fn identity_blocks_are_contiguous() {
        let p = PassPlan::identity(1, 3, 8).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7]]);
        assert_eq!(p.block_of(4), 1);
    }

    #[test]
    fn random_plan_partitions_positions() {
        let mut rng = substream(1, Purpose::Shuffle, &[]);
        let p = PassPlan::random(2, 7, 100, &mut rng).unwrap();
        let mut seen: Vec<usize> = p.blocks().iter().flatten().copied().collect();
        assert!(p.blocks().iter().all(|b| b.len() <= 7));
        seen.sort_unstable();
        assert_eq!(seen, (0..100).collect::<Vec<_>>());
        for (j, b) in p.blocks().iter().enumerate() {
            assert!(b.iter().all(|&l| p.block_of(l) == j));
        }
    }

    #[test]
    fn malformed_shuffles_rejected() {
        assert!(matches!(PassPlan::new(1, 2, vec![0, 0, 1]), Err(Error::Plan(_))));
        assert!(matches!(PassPlan::new(1, 2, vec![0, 3, 1]), Err(Error::Plan(_))));
        assert!(matches!(PassPlan::new(1, 0, vec![0]), Err(Error::Plan(_))));
        assert!(matches!(PassPlan::from_blocks(2, &[vec![0], vec![1, 2]]), Err(Error::Plan(_))));
    }

    #[test]
    fn from_blocks_round_trips() {
        let p = PassPlan::from_blocks(2, &[vec![0, 4, 2, 6], vec![1, 5, 3, 7]]).unwrap();
        assert_eq!(p.block(0), &[0, 4, 2, 6]);
        assert_eq!(p.block(1), &[1, 5, 3, 7]);
    }
}
