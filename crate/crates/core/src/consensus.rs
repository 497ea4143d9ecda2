//! θ-protocol verification of a proposed GHZ block.
//!
//! Each of `n` parties holds one qubit and measures it in the basis
//! `{|+_θⱼ⟩, |−_θⱼ⟩}`. The angles lie in `[0, π)` and sum to `mπ`. On the
//! GHZ state `(|0…0⟩ + |1…1⟩)/√2` the XOR of the outcomes always equals
//! `m mod 2`, and the verifier accepts exactly when the reported bits satisfy
//! that parity.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{QsimError, StateVector};
use crate::rng::RandomSource;

/// Allowed distance of Σθ from the nearest multiple of π.
pub const ANGLE_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsensusError {
    #[error("need at least 2 parties, got {0}")]
    TooFewParties(usize),
    #[error("angle set invalid: {0}")]
    BadAngleSet(String),
    #[error("state has {qubits} qubits but {parties} parties were given")]
    ArityMismatch { qubits: usize, parties: usize },
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, ConsensusError>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleSet {
    thetas: Vec<f64>,
}

impl AngleSet {
    /// Validates that every angle lies in `[0, π)` and the sum is a multiple of π.
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.len() < 2 {
            return Err(ConsensusError::TooFewParties(thetas.len()));
        }
        if let Some(bad) = thetas.iter().find(|t| !(0.0..PI).contains(*t)) {
            return Err(ConsensusError::BadAngleSet(format!(
                "angle {bad} outside [0, π)"
            )));
        }
        let sum: f64 = thetas.iter().sum();
        let residue = sum.rem_euclid(PI);
        if residue.min(PI - residue) >= ANGLE_SUM_TOLERANCE {
            return Err(ConsensusError::BadAngleSet(format!(
                "sum {sum} is not a multiple of π"
            )));
        }
        Ok(Self { thetas })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.thetas.iter().sum()
    }

    /// `round(Σθ/π) mod 2`.
    pub fn target_parity(&self) -> bool {
        (self.sum() / PI).round() as i64 % 2 == 1
    }
}

/// Draws `n − 1` uniform angles and lets the last one close the sum to a
/// multiple of π.
pub fn generate_angles(n: usize, rng: &mut RandomSource) -> Result<AngleSet> {
    if n < 2 {
        return Err(ConsensusError::TooFewParties(n));
    }
    let mut thetas: Vec<f64> = (0..n - 1).map(|_| rng.uniform() * PI).collect();
    thetas.push(closing_angle(&thetas));
    AngleSet::new(thetas)
}

/// `(π − (Σ mod π)) mod π`, clamped into `[0, π)`.
pub fn closing_angle(partial: &[f64]) -> f64 {
    let last = (PI - partial.iter().sum::<f64>().rem_euclid(PI)).rem_euclid(PI);
    if last >= PI {
        0.0
    } else {
        last
    }
}

/// `round(Σθ/π) mod 2`, rejecting sets that break the multiple-of-π rule.
pub fn target_parity(thetas: &[f64]) -> Result<bool> {
    Ok(AngleSet::new(thetas.to_vec())?.target_parity())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStrategy {
    Honest,
    FlipReport,
    RandomReport,
}

impl NodeStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeStrategy::Honest => "honest",
            NodeStrategy::FlipReport => "flip_report",
            NodeStrategy::RandomReport => "random_report",
        }
    }

    /// The bit a node sends to the verifier after measuring `outcome`.
    pub fn report(self, outcome: bool, rng: &mut RandomSource) -> bool {
        match self {
            NodeStrategy::Honest => outcome,
            NodeStrategy::FlipReport => !outcome,
            NodeStrategy::RandomReport => rng.fair_bit(),
        }
    }
}

impl fmt::Display for NodeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [
            NodeStrategy::Honest,
            NodeStrategy::FlipReport,
            NodeStrategy::RandomReport,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationRound {
    pub angles: AngleSet,
    pub outcomes: Vec<bool>,
    pub reported: Vec<bool>,
    pub target_parity: bool,
    pub verdict: Verdict,
}

impl VerificationRound {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// One θ-protocol round with freshly generated angles.
pub fn run_round(
    block_state: &StateVector,
    strategies: &[NodeStrategy],
    rng: &mut RandomSource,
) -> Result<VerificationRound> {
    check_arity(block_state, strategies)?;
    let angles = generate_angles(strategies.len(), rng)?;
    run_round_with_angles(block_state, angles, strategies, rng)
}

/// One θ-protocol round with caller-chosen angles. Parties measure in index
/// order on the shared state.
pub fn run_round_with_angles(
    block_state: &StateVector,
    angles: AngleSet,
    strategies: &[NodeStrategy],
    rng: &mut RandomSource,
) -> Result<VerificationRound> {
    check_arity(block_state, strategies)?;
    if angles.len() != strategies.len() {
        return Err(ConsensusError::ArityMismatch {
            qubits: angles.len(),
            parties: strategies.len(),
        });
    }
    let mut state = block_state.clone();
    let mut outcomes = Vec::with_capacity(strategies.len());
    for (qubit, &theta) in angles.thetas().iter().enumerate() {
        let m = state.measure_theta_basis(qubit, theta, rng)?;
        outcomes.push(m.outcome);
        state = m.post_state;
    }
    let reported: Vec<bool> = outcomes
        .iter()
        .zip(strategies)
        .map(|(&y, s)| s.report(y, rng))
        .collect();
    let target_parity = angles.target_parity();
    let parity = reported.iter().fold(false, |acc, &b| acc ^ b);
    Ok(VerificationRound {
        angles,
        outcomes,
        reported,
        target_parity,
        verdict: if parity == target_parity {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

fn check_arity(state: &StateVector, strategies: &[NodeStrategy]) -> Result<()> {
    if state.num_qubits() != strategies.len() {
        return Err(ConsensusError::ArityMismatch {
            qubits: state.num_qubits(),
            parties: strategies.len(),
        });
    }
    Ok(())
}

/// Fraction of passing rounds over `trials` rounds, each on a fresh copy.
pub fn estimate_pass_rate(
    block_state: &StateVector,
    strategies: &[NodeStrategy],
    trials: usize,
    rng: &mut RandomSource,
) -> Result<f64> {
    let trials = trials.max(1);
    let mut passes = 0usize;
    for _ in 0..trials {
        if run_round(block_state, strategies, rng)?.passed() {
            passes += 1;
        }
    }
    Ok(passes as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::qsim::ghz_state;

    fn ghz_zero(n: usize) -> StateVector {
        ghz_state(&BitString::from_index(0, n)).unwrap()
    }

    #[test]
    fn closing_angle_examples() {
        assert_eq!(closing_angle(&[0.0]), 0.0);
        let third = closing_angle(&[PI / 2.0, PI / 2.0]);
        assert!(third.abs() < 1e-12 || (PI - third).abs() < 1e-12);
        let set = AngleSet::new(vec![PI / 2.0, PI / 2.0, 0.0]).unwrap();
        assert!(set.target_parity());
    }

    #[test]
    fn generated_angles_always_valid() {
        for seed in 0..10_000 {
            let mut rng = RandomSource::new(seed);
            let n = 2 + (seed as usize % 5);
            let set = generate_angles(n, &mut rng).unwrap();
            assert_eq!(set.len(), n);
            assert!(set.thetas().iter().all(|t| (0.0..PI).contains(t)));
        }
        assert_eq!(
            generate_angles(1, &mut RandomSource::new(0)),
            Err(ConsensusError::TooFewParties(1))
        );
    }

    #[test]
    fn target_parity_examples() {
        assert!(!target_parity(&[0.0, 0.0]).unwrap());
        assert!(target_parity(&[PI / 2.0, PI / 2.0]).unwrap());
        let two_pi = [2.5, 2.5, 2.0 * PI - 5.0];
        assert!(!target_parity(&two_pi).unwrap());
        assert!(matches!(
            target_parity(&[0.3, 0.4]),
            Err(ConsensusError::BadAngleSet(_))
        ));
    }

    #[test]
    fn honest_ghz_round_passes() {
        let mut rng = RandomSource::new(1);
        for n in 2..=4 {
            let strategies = vec![NodeStrategy::Honest; n];
            for _ in 0..200 {
                assert!(run_round(&ghz_zero(n), &strategies, &mut rng)
                    .unwrap()
                    .passed());
            }
        }
    }

    #[test]
    fn flipped_report_fails_deterministically() {
        let mut rng = RandomSource::new(2);
        let mut strategies = vec![NodeStrategy::Honest; 3];
        strategies[1] = NodeStrategy::FlipReport;
        for _ in 0..200 {
            let round = run_round(&ghz_zero(3), &strategies, &mut rng).unwrap();
            assert_eq!(round.verdict, Verdict::Fail);
            assert_ne!(round.outcomes[1], round.reported[1]);
        }
    }

    #[test]
    fn arity_mismatch() {
        let mut rng = RandomSource::new(0);
        assert_eq!(
            run_round(&ghz_zero(3), &[NodeStrategy::Honest; 2], &mut rng),
            Err(ConsensusError::ArityMismatch {
                qubits: 3,
                parties: 2
            })
        );
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [
            NodeStrategy::Honest,
            NodeStrategy::FlipReport,
            NodeStrategy::RandomReport,
        ] {
            assert_eq!(s.as_str().parse::<NodeStrategy>().unwrap(), s);
        }
        assert!("lazy".parse::<NodeStrategy>().is_err());
    }
}
