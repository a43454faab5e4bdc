use std::collections::BTreeSet;

use super::binary::binary_locate;
use super::plan::PassPlan;
use super::transcript::{BinaryCall, CascadeTranscript, Correction, Direction, MessageKind, ParityMessage};
use crate::bits::BitString;
use crate::error::{Error, Result};

/// An interactive reconciliation in progress. Alice's string is the reference
/// and is only read; Bob's copy is corrected pass by pass.
#[derive(Debug, Clone)]
pub struct CascadeSession<'a> {
    alice: &'a BitString,
    bob: BitString,
    plans: &'a [PassPlan],
    /// Alice's disclosed parity for every block of every completed or running pass.
    alice_parities: Vec<Vec<u8>>,
    transcript: CascadeTranscript,
    passes_done: usize,
}

impl<'a> CascadeSession<'a> {
    pub fn new(alice: &'a BitString, bob: BitString, plans: &'a [PassPlan]) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(Error::param(format!("key lengths differ: Alice {} vs Bob {}", alice.len(), bob.len())));
        }
        for plan in plans {
            if plan.len() != alice.len() {
                return Err(Error::Plan(format!(
                    "pass {} covers {} positions, keys have {}",
                    plan.pass_index(),
                    plan.len(),
                    alice.len()
                )));
            }
        }
        Ok(Self {
            alice,
            bob,
            plans,
            alice_parities: Vec::with_capacity(plans.len()),
            transcript: CascadeTranscript::default(),
            passes_done: 0,
        })
    }

    pub fn bob(&self) -> &BitString {
        &self.bob
    }

    pub fn transcript(&self) -> &CascadeTranscript {
        &self.transcript
    }

    pub fn passes_done(&self) -> usize {
        self.passes_done
    }

    pub fn is_finished(&self) -> bool {
        self.passes_done == self.plans.len()
    }

    pub fn finish(self) -> (BitString, CascadeTranscript) {
        (self.bob, self.transcript)
    }

    /// Runs the next pass. Returns `false` once every pass has run.
    pub fn run_pass(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let p = self.passes_done;
        let plan = &self.plans[p];
        let pass = plan.pass_index();
        self.alice_parities.push(Vec::with_capacity(plan.blocks().len()));

        for (j, block) in plan.blocks().iter().enumerate() {
            let alice_parity = self.alice.parity_of(block);
            self.transcript.record(ParityMessage {
                pass,
                block: j,
                kind: MessageKind::Block,
                direction: Direction::AliceToBob,
                parity: alice_parity,
            });
            self.alice_parities[p].push(alice_parity);
            let bob_parity = self.bob.parity_of(block);
            self.transcript.record(ParityMessage {
                pass,
                block: j,
                kind: MessageKind::Block,
                direction: Direction::BobToAlice,
                parity: bob_parity,
            });
            if alice_parity != bob_parity {
                let l = self.locate_and_flip(p, j, pass)?;
                self.backtrack(p, j, l, pass)?;
            }
        }
        self.passes_done += 1;
        Ok(true)
    }

    /// Runs every remaining pass.
    pub fn run_to_end(&mut self) -> Result<()> {
        while self.run_pass()? {}
        Ok(())
    }

    fn locate_and_flip(&mut self, p: usize, j: usize, current_pass: usize) -> Result<usize> {
        let plan = &self.plans[p];
        let block = plan.block(j);
        let alice = self.alice;
        let transcript = &mut self.transcript;
        let bob = &self.bob;
        let mut oracle = |positions: &[usize]| {
            let parity = alice.parity_of(positions);
            transcript.record(ParityMessage {
                pass: plan.pass_index(),
                block: j,
                kind: MessageKind::Bisect,
                direction: Direction::AliceToBob,
                parity,
            });
            transcript.record(ParityMessage {
                pass: plan.pass_index(),
                block: j,
                kind: MessageKind::Bisect,
                direction: Direction::BobToAlice,
                parity: bob.parity_of(positions),
            });
            parity
        };
        let (l, disclosed) = binary_locate(block, self.alice_parities[p][j], &mut oracle, bob)?;
        self.transcript.record_binary(BinaryCall {
            pass: plan.pass_index(),
            block: j,
            block_len: block.len(),
            disclosed,
        });
        self.bob.flip(l);
        self.transcript.record_correction(Correction { position: l, pass: current_pass });
        Ok(l)
    }

    /// Re-examines every already-disclosed block containing a flipped position,
    /// smallest block first, until all of them agree again.
    fn backtrack(&mut self, p: usize, j: usize, first: usize, current_pass: usize) -> Result<()> {
        // (block size, pass offset, block index); ties go to the earlier pass, then lower block
        let mut work: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        let enqueue = |work: &mut BTreeSet<_>, l: usize, plans: &[PassPlan]| {
            for (m, plan) in plans.iter().enumerate().take(p + 1) {
                let n = plan.block_of(l);
                // current-pass blocks past `j` get their own top-level check later
                if m < p || n <= j {
                    work.insert((plan.block(n).len(), m, n));
                }
            }
        };
        enqueue(&mut work, first, self.plans);
        while let Some((_, m, n)) = work.pop_first() {
            let block = self.plans[m].block(n);
            if self.alice_parities[m][n] != self.bob.parity_of(block) {
                let l = self.locate_and_flip(m, n, current_pass)?;
                enqueue(&mut work, l, self.plans);
            }
        }
        Ok(())
    }
}

/// Reconciles `bob` toward `alice` over all `plans`.
pub fn run_cascade(alice: &BitString, bob: &BitString, plans: &[PassPlan]) -> Result<(BitString, CascadeTranscript)> {
    let mut session = CascadeSession::new(alice, bob.clone(), plans)?;
    session.run_to_end()?;
    Ok(session.finish())
}
