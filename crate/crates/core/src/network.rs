//! A synchronous network of nodes, each holding its own copy of the chain.
//!
//! An untrusted source proposes a block as an `n`-qubit state, one qubit per
//! node. A randomly selected verifier runs one θ-protocol round; on a pass
//! every node appends the claimed record to its local chain. Everything that
//! happens is written to an append-only event log.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::consensus::{self, ConsensusError, NodeStrategy, Verdict};
use crate::qchain::{AttackKind, ChainError, QuantumChain, TamperAttack};
use crate::qsim::StateVector;
use crate::rng::RandomSource;
use crate::timeline::{PhotonId, Tick};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node-{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network has no nodes")]
    NoNodes,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("proposal has {qubits} qubits for {nodes} nodes")]
    ArityMismatch { qubits: usize, nodes: usize },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

#[derive(Clone, Debug)]
pub struct Node {
    pub id: NodeId,
    pub strategy: NodeStrategy,
    pub local_chain: QuantumChain,
}

type StateFactory = Arc<dyn Fn() -> StateVector + Send + Sync>;

/// A candidate block: the claimed classical record and a source of fresh
/// copies of the quantum state the source says encodes it.
#[derive(Clone)]
pub struct BlockProposal {
    claimed_bits: BitString,
    factory: StateFactory,
}

impl BlockProposal {
    pub fn new(
        claimed_bits: BitString,
        factory: impl Fn() -> StateVector + Send + Sync + 'static,
    ) -> Self {
        Self {
            claimed_bits,
            factory: Arc::new(factory),
        }
    }

    /// The source knows the state, so it can hand out any number of copies.
    pub fn from_state(claimed_bits: BitString, state: StateVector) -> Self {
        Self::new(claimed_bits, move || state.clone())
    }

    pub fn claimed_bits(&self) -> &BitString {
        &self.claimed_bits
    }

    pub fn fresh_copy(&self) -> StateVector {
        (self.factory)()
    }
}

impl fmt::Debug for BlockProposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockProposal")
            .field("claimed_bits", &self.claimed_bits)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkEvent {
    pub tick: Tick,
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Proposal {
        claimed_bits: BitString,
        qubits: usize,
    },
    VerifierSelected {
        node: NodeId,
    },
    RoundResult {
        verifier: NodeId,
        thetas: Vec<f64>,
        reported: Vec<bool>,
        target_parity: bool,
        verdict: Verdict,
    },
    Appended {
        bits: BitString,
        chain_length: usize,
    },
    Rejected {
        bits: BitString,
    },
    TamperAttempt {
        node: NodeId,
        photon: PhotonId,
        attack: AttackKind,
    },
    TamperDenied {
        node: NodeId,
        photon: PhotonId,
        attack: AttackKind,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TamperOutcome {
    Applied,
    Denied,
}

#[derive(Clone, Debug, Default)]
pub struct Network {
    nodes: Vec<Node>,
    events: Vec<NetworkEvent>,
    tick: Tick,
}

impl Network {
    /// One node per strategy, with ids `0..n` and empty chains.
    pub fn new(strategies: &[NodeStrategy]) -> Self {
        let nodes = strategies
            .iter()
            .enumerate()
            .map(|(i, &strategy)| Node {
                id: NodeId(i as u32),
                strategy,
                local_chain: QuantumChain::new(),
            })
            .collect();
        Self {
            nodes,
            events: Vec::new(),
            tick: Tick(0),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .ok_or(NetworkError::UnknownNode(id))
    }

    pub fn events(&self) -> &[NetworkEvent] {
        &self.events
    }

    /// Count of committed blocks, which is also every local chain's clock.
    pub fn tick(&self) -> Tick {
        self.tick
    }

    fn log(&mut self, kind: EventKind) {
        let seq = self.events.len() as u64;
        self.events.push(NetworkEvent {
            tick: self.tick,
            seq,
            kind,
        });
    }

    /// Uniform choice of verifier. The seeded source stands in for a quantum
    /// random number generator.
    pub fn select_verifier(&self, rng: &mut RandomSource) -> Result<NodeId> {
        if self.nodes.is_empty() {
            return Err(NetworkError::NoNodes);
        }
        Ok(self.nodes[rng.below(self.nodes.len())].id)
    }

    /// Runs one verification round on the proposal and, if it passes, appends
    /// the claimed record to every node's chain.
    pub fn propose_and_commit(
        &mut self,
        proposal: &BlockProposal,
        rng: &mut RandomSource,
    ) -> Result<bool> {
        let copy = proposal.fresh_copy();
        if copy.num_qubits() != self.nodes.len() {
            return Err(NetworkError::ArityMismatch {
                qubits: copy.num_qubits(),
                nodes: self.nodes.len(),
            });
        }
        let bits = proposal.claimed_bits().clone();
        if bits.len() != 2 {
            return Err(ChainError::BadRecord(bits.to_string()).into());
        }
        self.log(EventKind::Proposal {
            claimed_bits: bits.clone(),
            qubits: copy.num_qubits(),
        });
        let verifier = self.select_verifier(rng)?;
        self.log(EventKind::VerifierSelected { node: verifier });

        let strategies: Vec<NodeStrategy> = self.nodes.iter().map(|n| n.strategy).collect();
        let round = consensus::run_round(&copy, &strategies, rng)?;
        self.log(EventKind::RoundResult {
            verifier,
            thetas: round.angles.thetas().to_vec(),
            reported: round.reported.clone(),
            target_parity: round.target_parity,
            verdict: round.verdict,
        });

        if !round.passed() {
            self.log(EventKind::Rejected { bits });
            return Ok(false);
        }
        for node in &mut self.nodes {
            node.local_chain.extend(&bits, rng)?;
        }
        let chain_length = self
            .nodes
            .first()
            .map_or(0, |n| n.local_chain.block_count());
        self.log(EventKind::Appended { bits, chain_length });
        self.tick = self.tick.next();
        Ok(true)
    }

    /// Tampers with one node's local copy only.
    pub fn node_tamper(&mut self, node_id: NodeId, attack: TamperAttack) -> Result<TamperOutcome> {
        let index = self
            .nodes
            .iter()
            .position(|n| n.id == node_id)
            .ok_or(NetworkError::UnknownNode(node_id))?;
        let (photon, kind) = (attack.target, attack.kind);
        self.log(EventKind::TamperAttempt {
            node: node_id,
            photon,
            attack: kind,
        });
        match self.nodes[index].local_chain.tamper(attack) {
            Ok(()) => Ok(TamperOutcome::Applied),
            Err(ChainError::TemporalAccess { .. }) => {
                self.log(EventKind::TamperDenied {
                    node: node_id,
                    photon,
                    attack: kind,
                });
                Ok(TamperOutcome::Denied)
            }
            Err(err) => Err(err.into()),
        }
    }

    /// The event log as JSON, one array, stable field order.
    pub fn event_log_json(&self) -> String {
        serde_json::to_string(&self.events).expect("event log serializes")
    }
}
