//! Photon lifecycle on a discrete clock.
//!
//! Ticks count inter-block intervals. Each block emits two photons at tick `k`:
//! an early photon stamped `(k, k)` and a late photon that leaves the delay line
//! and is stamped `(k, k + 1)`. A photon stays reachable while the clock is at
//! or before its absorption tick, and is gone once the clock passes it or once
//! it is explicitly consumed by a fusion or a measurement.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Tick(pub u64);

impl Tick {
    pub fn next(self) -> Tick {
        Tick(self.0 + 1)
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}τ", self.0)
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct PhotonId(pub u64);

impl fmt::Display for PhotonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Spatial output mode of the pair source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhotonStatus {
    Live,
    Absorbed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotonRecord {
    pub id: PhotonId,
    pub pair: u64,
    pub mode: Mode,
    pub created_at: Tick,
    pub absorbed_at: Option<Tick>,
    pub status: PhotonStatus,
}

impl PhotonRecord {
    pub fn is_live(&self) -> bool {
        self.status == PhotonStatus::Live
    }

    /// `(created_at, absorbed_at)`; pending absorption reads as `None`.
    pub fn stamps(&self) -> (Tick, Option<Tick>) {
        (self.created_at, self.absorbed_at)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedPair {
    pub pair: u64,
    pub early: PhotonRecord,
    pub late: PhotonRecord,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimelineError {
    #[error("clock violation: clock is at {current}, requested {requested}")]
    ClockViolation { current: Tick, requested: Tick },
    #[error("unknown photon {0}")]
    UnknownPhoton(PhotonId),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Timeline {
    clock: Tick,
    photons: BTreeMap<PhotonId, PhotonRecord>,
    next_photon: u64,
    next_pair: u64,
}

impl Timeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&self) -> Tick {
        self.clock
    }

    pub fn photon(&self, id: PhotonId) -> Option<&PhotonRecord> {
        self.photons.get(&id)
    }

    pub fn photons(&self) -> impl Iterator<Item = &PhotonRecord> {
        self.photons.values()
    }

    /// Moves the clock forward, absorbing every photon whose absorption tick
    /// has already passed.
    pub fn advance(&mut self, to: Tick) -> Result<(), TimelineError> {
        if to < self.clock {
            return Err(TimelineError::ClockViolation {
                current: self.clock,
                requested: to,
            });
        }
        self.clock = to;
        for photon in self.photons.values_mut() {
            if matches!(photon.absorbed_at, Some(t) if t < to) {
                photon.status = PhotonStatus::Absorbed;
            }
        }
        Ok(())
    }

    /// Emits the two photons of block `k`; the clock must already be at `k`.
    pub fn emit_block_pair(&mut self, k: u64) -> Result<EmittedPair, TimelineError> {
        if self.clock != Tick(k) {
            return Err(TimelineError::ClockViolation {
                current: self.clock,
                requested: Tick(k),
            });
        }
        let pair = self.next_pair;
        self.next_pair += 1;
        let early = self.register(pair, Mode::A, Tick(k), Tick(k));
        let late = self.register(pair, Mode::B, Tick(k), Tick(k + 1));
        Ok(EmittedPair { pair, early, late })
    }

    fn register(&mut self, pair: u64, mode: Mode, created: Tick, absorbed: Tick) -> PhotonRecord {
        let record = PhotonRecord {
            id: PhotonId(self.next_photon),
            pair,
            mode,
            created_at: created,
            absorbed_at: Some(absorbed),
            status: PhotonStatus::Live,
        };
        self.next_photon += 1;
        self.photons.insert(record.id, record.clone());
        record
    }

    /// Consumes a photon now (detection at the fusion PBS or a measurement).
    pub fn absorb(&mut self, id: PhotonId) -> Result<(), TimelineError> {
        let clock = self.clock;
        let photon = self
            .photons
            .get_mut(&id)
            .ok_or(TimelineError::UnknownPhoton(id))?;
        if photon.status == PhotonStatus::Live {
            photon.status = PhotonStatus::Absorbed;
            photon.absorbed_at = Some(match photon.absorbed_at {
                Some(t) if t < clock => t,
                _ => clock,
            });
        }
        Ok(())
    }

    pub fn is_live(&self, id: PhotonId) -> Result<bool, TimelineError> {
        self.photons
            .get(&id)
            .map(PhotonRecord::is_live)
            .ok_or(TimelineError::UnknownPhoton(id))
    }

    /// Photons still reachable at the current clock, in id order.
    pub fn accessible_photons(&self) -> Vec<PhotonRecord> {
        self.photons
            .values()
            .filter(|p| p.is_live())
            .cloned()
            .collect()
    }
}
