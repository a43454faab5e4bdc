use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

impl Direction {
    fn as_str(self) -> &'static str {
        match self {
            Direction::AliceToBob => "A>B",
            Direction::BobToAlice => "B>A",
        }
    }
}

/// Whether a parity covers a whole pass block or a bisection sub-block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Block,
    Bisect,
}

impl MessageKind {
    fn as_str(self) -> &'static str {
        match self {
            MessageKind::Block => "block",
            MessageKind::Bisect => "bisect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParityMessage {
    /// 1-based pass index of the block the message refers to.
    pub pass: usize,
    pub block: usize,
    pub kind: MessageKind,
    pub direction: Direction,
    pub parity: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Correction {
    pub position: usize,
    /// Pass during which the flip happened.
    pub pass: usize,
}

/// One BINARY run: the block it searched and how many parities it disclosed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryCall {
    pub pass: usize,
    pub block: usize,
    pub block_len: usize,
    pub disclosed: u32,
}

/// Ordered record of one reconciliation session.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CascadeTranscript {
    events: Vec<TranscriptEvent>,
    binary_calls: Vec<BinaryCall>,
    leaked_bits: usize,
}

impl CascadeTranscript {
    pub(crate) fn record(&mut self, msg: ParityMessage) {
        if msg.direction == Direction::AliceToBob {
            self.leaked_bits += 1;
        }
        self.events.push(TranscriptEvent::Parity(msg));
    }

    pub(crate) fn record_correction(&mut self, c: Correction) {
        self.events.push(TranscriptEvent::Correction(c));
    }

    pub(crate) fn record_binary(&mut self, call: BinaryCall) {
        self.binary_calls.push(call);
    }

    /// Parity bits disclosed by Alice.
    pub fn leaked_bits(&self) -> usize {
        self.leaked_bits
    }

    pub fn events(&self) -> &[TranscriptEvent] {
        &self.events
    }

    pub fn parity_messages(&self) -> impl Iterator<Item = &ParityMessage> {
        self.events.iter().filter_map(|e| match e {
            TranscriptEvent::Parity(m) => Some(m),
            TranscriptEvent::Correction(_) => None,
        })
    }

    pub fn corrections(&self) -> impl Iterator<Item = &Correction> {
        self.events.iter().filter_map(|e| match e {
            TranscriptEvent::Correction(c) => Some(c),
            TranscriptEvent::Parity(_) => None,
        })
    }

    pub fn binary_calls(&self) -> &[BinaryCall] {
        &self.binary_calls
    }

    pub fn top_level_disclosures(&self) -> usize {
        self.parity_messages().filter(|m| m.kind == MessageKind::Block && m.direction == Direction::AliceToBob).count()
    }

    /// Line-oriented export, one event per line in protocol order:
    /// `parity,<pass>,<block>,<A>B|B>A>,<bit>,<block|bisect>` and
    /// `correction,<pass>,<position>`.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{e}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptEvent {
    Parity(ParityMessage),
    Correction(Correction),
}

impl fmt::Display for TranscriptEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranscriptEvent::Parity(m) => {
                write!(f, "parity,{},{},{},{},{}", m.pass, m.block, m.direction.as_str(), m.parity, m.kind.as_str())
            }
            TranscriptEvent::Correction(c) => write!(f, "correction,{},{}", c.pass, c.position),
        }
    }
}

impl FromStr for TranscriptEvent {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        match fields.as_slice() {
            ["parity", pass, block, dir, bit, kind] => {
                let direction = match *dir {
                    "A>B" => Direction::AliceToBob,
                    "B>A" => Direction::BobToAlice,
                    other => return Err(Error::Parse(format!("unknown direction {other:?}"))),
                };
                let kind = match *kind {
                    "block" => MessageKind::Block,
                    "bisect" => MessageKind::Bisect,
                    other => return Err(Error::Parse(format!("unknown message kind {other:?}"))),
                };
                let parity = match *bit {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(Error::Parse(format!("invalid parity {other:?}"))),
                };
                Ok(TranscriptEvent::Parity(ParityMessage {
                    pass: num(pass)?,
                    block: num(block)?,
                    kind,
                    direction,
                    parity,
                }))
            }
            ["correction", pass, pos] => {
                Ok(TranscriptEvent::Correction(Correction { pass: num(pass)?, position: num(pos)? }))
            }
            _ => Err(Error::Parse(format!("unrecognised transcript line {line:?}"))),
        }
    }
}

pub fn parse_transcript_lines(text: &str) -> Result<Vec<TranscriptEvent>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(str::parse).collect()
}
