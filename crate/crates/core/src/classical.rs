//! Classical hash-linked chain used as the comparison baseline.
//!
//! Each block commits to its predecessor through
//! `SHA-256(index ‖ timestamp ‖ len(payload) ‖ payload ‖ prev_hash)`, with
//! integers as 8-byte big-endian values. Validation only checks links, so a
//! tampered block invalidates its successors while everything before it still
//! verifies.

use serde::Serialize;
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::timeline::Tick;

pub type Digest = [u8; 32];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassicalError {
    #[error("block index {index} out of range for chain of {len}")]
    BadIndex { index: usize, len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalBlock {
    pub index: u64,
    pub timestamp: Tick,
    #[serde(serialize_with = "hex_bytes")]
    pub payload: Vec<u8>,
    #[serde(serialize_with = "hex_bytes")]
    pub prev_hash: Digest,
}

fn hex_bytes<S: serde::Serializer, T: AsRef<[u8]>>(bytes: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(bytes))
}

impl ClassicalBlock {
    /// Bytes fed to the hash, in link order.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + self.payload.len() + 32);
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(&self.timestamp.0.to_be_bytes());
        out.extend_from_slice(&(self.payload.len() as u64).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.prev_hash);
        out
    }

    pub fn digest(&self) -> Digest {
        Sha256::digest(self.encode()).into()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassicalChain {
    blocks: Vec<ClassicalBlock>,
}

impl ClassicalChain {
    /// Links `payloads` in order with timestamps `0, 1, 2, …`.
    pub fn build<P: AsRef<[u8]>>(payloads: &[P]) -> Self {
        let mut blocks: Vec<ClassicalBlock> = Vec::with_capacity(payloads.len());
        for (i, payload) in payloads.iter().enumerate() {
            let prev_hash = blocks.last().map_or([0u8; 32], ClassicalBlock::digest);
            blocks.push(ClassicalBlock {
                index: i as u64,
                timestamp: Tick(i as u64),
                payload: payload.as_ref().to_vec(),
                prev_hash,
            });
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[ClassicalBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Replaces block `k`'s payload without repairing any downstream link.
    pub fn tamper_block(&self, k: usize, new_payload: &[u8]) -> Result<Self, ClassicalError> {
        if k >= self.blocks.len() {
            return Err(ClassicalError::BadIndex {
                index: k,
                len: self.blocks.len(),
            });
        }
        let mut out = self.clone();
        out.blocks[k].payload = new_payload.to_vec();
        Ok(out)
    }

    /// Smallest `k ≥ 1` whose stored `prev_hash` disagrees with the digest of
    /// block `k − 1`.
    pub fn validate_chain(&self) -> Option<usize> {
        self.blocks
            .windows(2)
            .position(|w| w[1].prev_hash != w[0].digest())
            .map(|i| i + 1)
    }

    /// Blocks whose incoming link still verifies, counted from the start.
    pub fn valid_prefix_len(&self) -> usize {
        self.validate_chain().unwrap_or(self.blocks.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payloads(n: usize) -> Vec<Vec<u8>> {
        (0..n).map(|i| format!("record-{i}").into_bytes()).collect()
    }

    #[test]
    fn build_examples() {
        assert!(ClassicalChain::build::<Vec<u8>>(&[]).is_empty());
        let one = ClassicalChain::build(&payloads(1));
        assert_eq!(one.blocks()[0].prev_hash, [0u8; 32]);
        assert_eq!(
            ClassicalChain::build(&payloads(4)),
            ClassicalChain::build(&payloads(4))
        );
    }

    #[test]
    fn digest_encoding_is_bit_exact() {
        let block = ClassicalBlock {
            index: 1,
            timestamp: Tick(2),
            payload: b"ab".to_vec(),
            prev_hash: [7u8; 32],
        };
        let mut expected = vec![0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 2];
        expected.extend_from_slice(&[0, 0, 0, 0, 0, 0, 0, 2]);
        expected.extend_from_slice(b"ab");
        expected.extend_from_slice(&[7u8; 32]);
        assert_eq!(block.encode(), expected);
        assert_eq!(block.digest(), <[u8; 32]>::from(Sha256::digest(&expected)));
    }

    #[test]
    fn sha256_known_vector() {
        let d: [u8; 32] = Sha256::digest(b"abc").into();
        assert_eq!(
            hex::encode(d),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn tamper_examples() {
        let chain = ClassicalChain::build(&payloads(5));
        assert_eq!(chain.validate_chain(), None);

        let last = chain.tamper_block(4, b"forged").unwrap();
        assert_ne!(last, chain);
        assert_eq!(last.validate_chain(), None);

        let first = chain.tamper_block(0, b"forged").unwrap();
        assert_eq!(first.validate_chain(), Some(1));
        assert_eq!(first.valid_prefix_len(), 1);
        // Relinking the forged payloads changes every later prev_hash.
        let forged: Vec<Vec<u8>> = first.blocks().iter().map(|b| b.payload.clone()).collect();
        let relinked = ClassicalChain::build(&forged);
        let broken: Vec<usize> = (1..5)
            .filter(|&k| first.blocks()[k].prev_hash != relinked.blocks()[k].prev_hash)
            .collect();
        assert_eq!(broken, [1, 2, 3, 4]);

        assert_eq!(chain.tamper_block(2, b"record-2").unwrap(), chain);
        assert_eq!(
            chain.tamper_block(5, b"x"),
            Err(ClassicalError::BadIndex { index: 5, len: 5 })
        );
    }

    #[test]
    fn first_invalid_is_successor_of_tampered_block() {
        for n in 2..=16 {
            let chain = ClassicalChain::build(&payloads(n));
            for k in 0..n - 1 {
                let t = chain.tamper_block(k, b"forged").unwrap();
                assert_eq!(t.validate_chain(), Some(k + 1));
                assert_eq!(t.valid_prefix_len(), k + 1);
                for j in 1..=k {
                    assert_eq!(t.blocks()[j].prev_hash, t.blocks()[j - 1].digest());
                }
            }
        }
    }
}
