//! The quantum blockchain: two-bit records carried by temporal Bell pairs and
//! fused, block by block, into one GHZ state whose label is the concatenation
//! of every record.
//!
//! Fusing block `k` joins the late photon of block `k − 1` with the early
//! photon of block `k` at a polarizing beam splitter. A heralded success leaves
//! a GHZ basis state whose label differs from the target concatenation by a
//! known Pauli frame, which is undone on the two new photons. A failure is
//! recovered by measuring the new pair in the X basis, correcting the phase on
//! the chain tail, and emitting a fresh pair.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::qsim::{self, bell_state, theta_basis, QsimError, StateVector, Unitary2};
use crate::rng::RandomSource;
use crate::timeline::{PhotonId, PhotonRecord, Tick, Timeline, TimelineError};

/// Fusion attempts per block before giving up. Each attempt succeeds with
/// probability 1/2, so hitting this bound means the random source is broken.
pub const MAX_FUSION_ATTEMPTS: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("bad record {0:?}: blocks carry exactly two bits")]
    BadRecord(String),
    #[error("chain is empty")]
    EmptyChain,
    #[error("photon {photon} no longer exists (absorbed at {absorbed_at:?})")]
    TemporalAccess {
        photon: PhotonId,
        absorbed_at: Option<Tick>,
    },
    #[error("photon {0} is not part of this chain")]
    UnknownPhoton(PhotonId),
    #[error("expected {expected} bits, chain holds {actual}")]
    BadExpectation { expected: usize, actual: usize },
    #[error("fusion did not succeed after {0} attempts")]
    FusionRetriesExhausted(u32),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, ChainError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub index: u64,
    pub bits: BitString,
    pub stamps: (Tick, Tick),
    pub early: PhotonId,
    pub late: PhotonId,
    /// Fusion attempts spent on this block (1 for the first block).
    pub attempts: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    BitFlip,
    PhaseFlip,
    RandomUnitary,
    ZMeasure,
}

impl AttackKind {
    pub const ALL: [AttackKind; 4] = [
        AttackKind::BitFlip,
        AttackKind::PhaseFlip,
        AttackKind::RandomUnitary,
        AttackKind::ZMeasure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::BitFlip => "bit_flip",
            AttackKind::PhaseFlip => "phase_flip",
            AttackKind::RandomUnitary => "random_unitary",
            AttackKind::ZMeasure => "z_measure",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown attack kind {s:?}"))
    }
}

#[derive(Clone, Debug)]
pub struct TamperAttack {
    pub kind: AttackKind,
    pub target: PhotonId,
    pub rng: RandomSource,
}

impl TamperAttack {
    pub fn new(kind: AttackKind, target: PhotonId, rng: RandomSource) -> Self {
        Self { kind, target, rng }
    }
}

/// Chain history entries. Amplitudes are never recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ChainEvent {
    PairEmitted {
        tick: Tick,
        block: u64,
        pair: u64,
        early: PhotonId,
        late: PhotonId,
    },
    Fusion {
        tick: Tick,
        block: u64,
        pair: u64,
        success: bool,
        success_probability: f64,
    },
    PairDiscarded {
        tick: Tick,
        pair: u64,
        x_outcomes: (bool, bool),
        tail_phase_fixed: bool,
    },
    Appended {
        tick: Tick,
        block: u64,
        bits: BitString,
    },
    TamperApplied {
        tick: Tick,
        photon: PhotonId,
        kind: AttackKind,
    },
    TamperDenied {
        tick: Tick,
        photon: PhotonId,
        kind: AttackKind,
    },
}

/// Serializable view of a chain: blocks, photon stamps and history.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainMetadata {
    pub clock: Tick,
    pub blocks: Vec<BlockRecord>,
    pub photons: Vec<PhotonRecord>,
    pub events: Vec<ChainEvent>,
}

/// Encodes one record as `|β_{r₁r₂}⟩` on a freshly emitted photon pair.
///
/// The caller owns absorbing the early photon; the returned record reports
/// a single attempt.
pub fn encode_block(
    bits: &BitString,
    k: u64,
    timeline: &mut Timeline,
) -> Result<(BlockRecord, StateVector)> {
    if bits.len() != 2 {
        return Err(ChainError::BadRecord(bits.to_string()));
    }
    let pair = timeline.emit_block_pair(k)?;
    let block = BlockRecord {
        index: k,
        bits: bits.clone(),
        stamps: (Tick(k), Tick(k + 1)),
        early: pair.early.id,
        late: pair.late.id,
        attempts: 1,
    };
    Ok((block, bell_state(bits.bit(0), bits.bit(1))))
}

#[derive(Clone, Debug, Default)]
pub struct QuantumChain {
    state: Option<StateVector>,
    timeline: Timeline,
    blocks: Vec<BlockRecord>,
    qubits: Vec<PhotonId>,
    logical_bits: BitString,
    events: Vec<ChainEvent>,
}

impl QuantumChain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a chain from a record string, chunked into two-bit blocks.
    pub fn build(records: &BitString, rng: &mut RandomSource) -> Result<Self> {
        let mut chain = Self::new();
        for block in records.chunk_records() {
            chain.extend(&block, rng)?;
        }
        Ok(chain)
    }

    pub fn state(&self) -> Option<&StateVector> {
        self.state.as_ref()
    }

    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    pub fn blocks(&self) -> &[BlockRecord] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Photon carried by each qubit of the state, in creation order.
    pub fn qubit_photons(&self) -> &[PhotonId] {
        &self.qubits
    }

    /// Ground-truth concatenation of the appended records. Test and report
    /// use only; decoding never reads it.
    pub fn logical_bits(&self) -> &BitString {
        &self.logical_bits
    }

    pub fn events(&self) -> &[ChainEvent] {
        &self.events
    }

    /// Chain photons still reachable at the current clock.
    pub fn live_photons(&self) -> Vec<PhotonId> {
        self.qubits
            .iter()
            .copied()
            .filter(|&id| self.timeline.is_live(id).unwrap_or(false))
            .collect()
    }

    /// Newest chain photon, i.e. the late photon of the last block.
    pub fn last_photon(&self) -> Option<PhotonId> {
        self.qubits.last().copied()
    }

    pub fn metadata(&self) -> ChainMetadata {
        ChainMetadata {
            clock: self.timeline.clock(),
            blocks: self.blocks.clone(),
            photons: self
                .qubits
                .iter()
                .filter_map(|&id| self.timeline.photon(id).cloned())
                .collect(),
            events: self.events.clone(),
        }
    }

    /// Appends one two-bit record and advances the clock one tick.
    pub fn extend(&mut self, bits: &BitString, rng: &mut RandomSource) -> Result<()> {
        if bits.len() != 2 {
            return Err(ChainError::BadRecord(bits.to_string()));
        }
        let k = self.blocks.len() as u64;
        if self.timeline.clock() != Tick(k) {
            return Err(TimelineError::ClockViolation {
                current: self.timeline.clock(),
                requested: Tick(k),
            }
            .into());
        }
        let tick = Tick(k);

        let (block, state) = match self.state.take() {
            None => {
                let (block, bell) = encode_block(bits, k, &mut self.timeline)?;
                self.log_emission(&block);
                self.timeline.absorb(block.early)?;
                (block, bell)
            }
            Some(chain_state) => match self.fuse_block(chain_state.clone(), bits, k, rng) {
                Ok(fused) => fused,
                Err(err) => {
                    self.state = Some(chain_state);
                    return Err(err);
                }
            },
        };

        self.qubits.push(block.early);
        self.qubits.push(block.late);
        self.logical_bits = self.logical_bits.concat(bits);
        self.events.push(ChainEvent::Appended {
            tick,
            block: k,
            bits: bits.clone(),
        });
        self.blocks.push(block);
        self.state = Some(state);
        self.timeline.advance(tick.next())?;
        Ok(())
    }

    fn log_emission(&mut self, block: &BlockRecord) {
        let pair = self
            .timeline
            .photon(block.early)
            .map(|p| p.pair)
            .unwrap_or_default();
        self.events.push(ChainEvent::PairEmitted {
            tick: Tick(block.index),
            block: block.index,
            pair,
            early: block.early,
            late: block.late,
        });
    }

    /// Repeat-until-success fusion of a new block onto `chain_state`.
    fn fuse_block(
        &mut self,
        mut chain_state: StateVector,
        bits: &BitString,
        k: u64,
        rng: &mut RandomSource,
    ) -> Result<(BlockRecord, StateVector)> {
        let tick = Tick(k);
        let tail = chain_state.num_qubits() - 1;
        let (early_q, late_q) = (tail + 1, tail + 2);
        let tail_photon = *self.qubits.last().ok_or(ChainError::EmptyChain)?;
        // Value of the tail qubit in the |0…⟩ branch of the chain.
        let tail_bit = self
            .blocks
            .last()
            .ok_or(ChainError::EmptyChain)?
            .bits
            .bit(1);
        let phase_bit = bits.bit(0);
        let x_basis = theta_basis(0.0);

        for attempt in 1..=MAX_FUSION_ATTEMPTS {
            let (mut block, bell) = encode_block(bits, k, &mut self.timeline)?;
            block.attempts = attempt;
            self.log_emission(&block);
            let pair = self
                .timeline
                .photon(block.early)
                .map(|p| p.pair)
                .unwrap_or_default();

            let fusion = chain_state.tensor(&bell).fuse_pbs(tail, early_q, rng)?;
            self.events.push(ChainEvent::Fusion {
                tick,
                block: k,
                pair,
                success: fusion.success,
                success_probability: fusion.success_probability,
            });

            if fusion.success {
                // The fused state is GHZ-labelled (r₁⊕s₁, …, t, t⊕s₂) where t is
                // the tail bit; flip it to (r₁, …, s₁, s₂).
                let mut state = fusion.post_state;
                if tail_bit != phase_bit {
                    state = state.apply_single_qubit(early_q, &Unitary2::pauli_x())?;
                }
                if tail_bit {
                    state = state.apply_single_qubit(late_q, &Unitary2::pauli_x())?;
                }
                if phase_bit {
                    state = state.apply_single_qubit(late_q, &Unitary2::pauli_z())?;
                }
                self.timeline.absorb(tail_photon)?;
                self.timeline.absorb(block.early)?;
                return Ok((block, state));
            }

            // Failure: measure the new pair out in the X basis and restore the
            // chain's relative phase, which picks up (−1)^{s₁ ⊕ m_early ⊕ m_late}.
            let early_m = fusion.post_state.measure_theta_basis(early_q, 0.0, rng)?;
            let late_m = early_m.post_state.measure_theta_basis(late_q, 0.0, rng)?;
            let mut restored = late_m
                .post_state
                .remove_qubit(late_q, x_basis[late_m.outcome as usize])?
                .remove_qubit(early_q, x_basis[early_m.outcome as usize])?;
            let fix = phase_bit ^ early_m.outcome ^ late_m.outcome;
            if fix {
                restored = restored.apply_single_qubit(tail, &Unitary2::pauli_z())?;
            }
            self.timeline.absorb(block.early)?;
            self.timeline.absorb(block.late)?;
            self.events.push(ChainEvent::PairDiscarded {
                tick,
                pair,
                x_outcomes: (early_m.outcome, late_m.outcome),
                tail_phase_fixed: fix,
            });
            chain_state = restored;
        }
        Err(ChainError::FusionRetriesExhausted(MAX_FUSION_ATTEMPTS))
    }

    /// GHZ-basis decoding of the whole chain.
    pub fn decode(&self, rng: &mut RandomSource) -> Result<BitString> {
        let state = self.state.as_ref().ok_or(ChainError::EmptyChain)?;
        Ok(state.ghz_basis_measure(rng)?.label)
    }

    fn check_expected(&self, expected: &BitString) -> Result<()> {
        let actual = 2 * self.blocks.len();
        if expected.len() != actual {
            return Err(ChainError::BadExpectation {
                expected: expected.len(),
                actual,
            });
        }
        Ok(())
    }

    pub fn validate(&self, expected: &BitString, rng: &mut RandomSource) -> Result<bool> {
        self.check_expected(expected)?;
        Ok(self.decode(rng)? == *expected)
    }

    /// Probability that [`QuantumChain::validate`] accepts `expected`:
    /// |⟨GHZ_expected|ψ⟩|².
    pub fn validation_probability(&self, expected: &BitString) -> Result<f64> {
        self.check_expected(expected)?;
        let state = self.state.as_ref().ok_or(ChainError::EmptyChain)?;
        Ok(qsim::fidelity(&qsim::ghz_state(expected)?, state)?)
    }

    /// Applies an attack to one chain photon, provided it still exists.
    pub fn tamper(&mut self, attack: TamperAttack) -> Result<()> {
        let TamperAttack {
            kind,
            target,
            mut rng,
        } = attack;
        let tick = self.timeline.clock();
        let live = self
            .timeline
            .is_live(target)
            .map_err(|_| ChainError::UnknownPhoton(target))?;
        if !live {
            self.events.push(ChainEvent::TamperDenied {
                tick,
                photon: target,
                kind,
            });
            return Err(ChainError::TemporalAccess {
                photon: target,
                absorbed_at: self.timeline.photon(target).and_then(|p| p.absorbed_at),
            });
        }
        let qubit = self
            .qubits
            .iter()
            .position(|&id| id == target)
            .ok_or(ChainError::UnknownPhoton(target))?;
        let state = self.state.as_ref().ok_or(ChainError::EmptyChain)?;
        let tampered = match kind {
            AttackKind::BitFlip => state.apply_single_qubit(qubit, &Unitary2::pauli_x())?,
            AttackKind::PhaseFlip => state.apply_single_qubit(qubit, &Unitary2::pauli_z())?,
            AttackKind::RandomUnitary => {
                state.apply_single_qubit(qubit, &Unitary2::haar_random(&mut rng))?
            }
            AttackKind::ZMeasure => {
                let m = state.measure_computational(qubit, &mut rng)?;
                self.timeline.absorb(target)?;
                m.post_state
            }
        };
        self.state = Some(tampered);
        self.events.push(ChainEvent::TamperApplied {
            tick,
            photon: target,
            kind,
        });
        Ok(())
    }
}
