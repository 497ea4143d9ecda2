//! Dense state-vector core.
//!
//! Basis index `i` of an `n`-qubit state encodes qubit 0 in its most
//! significant bit. Horizontal polarization maps to `0` and vertical to `1`.
//! Every operation returns a fresh value; measurements draw from the caller's
//! [`RandomSource`].

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::rng::RandomSource;

pub type Amplitude = Complex64;

/// Allowed drift of ‖ψ‖ away from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Allowed deviation of U†U from the identity, entrywise.
pub const UNITARY_TOLERANCE: f64 = 1e-10;
/// Two-qubit states with |a₀₀a₁₁ − a₀₁a₁₀| below this are treated as products.
pub const SEPARABILITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("invalid arity: {0}")]
    InvalidArity(String),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("bad qubit index: {0}")]
    BadIndex(String),
    #[error("angle {0} outside [0, π)")]
    BadAngle(f64),
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("amplitudes are not a normalized state: {0}")]
    NotNormalized(String),
}

pub type Result<T> = std::result::Result<T, QsimError>;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

impl StateVector {
    /// Computational basis state `|index⟩` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits >= usize::BITS as usize {
            return Err(QsimError::InvalidArity(format!(
                "cannot build a state on {num_qubits} qubits"
            )));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QsimError::BadIndex(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let state = Self::from_raw(amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QsimError::NotNormalized(format!("norm is {norm}")));
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let mut state = Self::from_raw(amplitudes)?;
        let norm = state.norm();
        if norm == 0.0 {
            return Err(QsimError::NotNormalized("zero vector".into()));
        }
        state.scale(1.0 / norm);
        Ok(state)
    }

    fn from_raw(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(QsimError::InvalidArity(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(QsimError::NotNormalized("non-finite amplitude".into()));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn scale(&mut self, factor: f64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// Bit mask selecting `qubit` within a basis index.
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(QsimError::BadIndex(format!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(QsimError::BadIndex(format!("pair uses qubit {a} twice")));
        }
        Ok(())
    }

    /// `self ⊗ other`, with `self`'s qubits first.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes,
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        if self.num_qubits != other.num_qubits {
            return Err(QsimError::DimensionMismatch(
                self.num_qubits,
                other.num_qubits,
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply_single_qubit(&self, qubit: usize, gate: &Unitary2) -> Result<StateVector> {
        self.check_qubit(qubit)?;
        let m = gate.matrix();
        let mask = self.mask(qubit);
        let mut out = self.clone();
        for i0 in (0..self.dim()).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            out.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            out.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(out)
    }

    /// Projects `qubit` onto the orthonormal pair `{basis[0], basis[1]}`.
    ///
    /// Returns the sampled outcome, its probability, and the renormalized state.
    fn measure_in_basis(
        &self,
        qubit: usize,
        basis: &[[Amplitude; 2]; 2],
        rng: &mut RandomSource,
    ) -> Result<(usize, f64, StateVector)> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        // Overlap of each reduced amplitude pair with each basis vector.
        let overlaps: Vec<[Amplitude; 2]> = (0..self.dim())
            .filter(|i| i & mask == 0)
            .map(|i0| {
                let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i0 | mask]);
                [
                    basis[0][0].conj() * a0 + basis[0][1].conj() * a1,
                    basis[1][0].conj() * a0 + basis[1][1].conj() * a1,
                ]
            })
            .collect();
        let probs = [0, 1].map(|k| overlaps.iter().map(|c| c[k].norm_sqr()).sum::<f64>());
        let outcome = rng.sample_weighted(&probs);
        let p = probs[outcome];
        let inv = 1.0 / p.sqrt();
        let mut out = self.clone();
        for (i0, c) in (0..self.dim()).filter(|i| i & mask == 0).zip(&overlaps) {
            let c = c[outcome] * inv;
            out.amplitudes[i0] = c * basis[outcome][0];
            out.amplitudes[i0 | mask] = c * basis[outcome][1];
        }
        Ok((outcome, p, out))
    }

    /// Computational-basis measurement of one qubit.
    pub fn measure_computational(
        &self,
        qubit: usize,
        rng: &mut RandomSource,
    ) -> Result<QubitMeasurement> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (outcome, probability, post_state) =
            self.measure_in_basis(qubit, &[[one, zero], [zero, one]], rng)?;
        Ok(QubitMeasurement {
            outcome: outcome == 1,
            probability,
            post_state,
        })
    }

    /// Measures `qubit` in `{|+_θ⟩, |−_θ⟩}` with `|±_θ⟩ = (|0⟩ ± e^{iθ}|1⟩)/√2`.
    /// Outcome `false` is `|+_θ⟩`.
    pub fn measure_theta_basis(
        &self,
        qubit: usize,
        theta: f64,
        rng: &mut RandomSource,
    ) -> Result<QubitMeasurement> {
        if !(0.0..PI).contains(&theta) {
            return Err(QsimError::BadAngle(theta));
        }
        let (outcome, probability, post_state) =
            self.measure_in_basis(qubit, &theta_basis(theta), rng)?;
        Ok(QubitMeasurement {
            outcome: outcome == 1,
            probability,
            post_state,
        })
    }

    /// Removes `qubit`, which must be in the product state `factor`.
    ///
    /// Used to discard photons once they have been measured out of the chain.
    pub fn remove_qubit(&self, qubit: usize, factor: [Amplitude; 2]) -> Result<StateVector> {
        self.check_qubit(qubit)?;
        if self.num_qubits < 2 {
            return Err(QsimError::InvalidArity(
                "cannot remove the only qubit".into(),
            ));
        }
        let n = self.num_qubits;
        let low_bits = n - 1 - qubit;
        let low_mask = (1usize << low_bits) - 1;
        let mut reduced = Vec::with_capacity(self.dim() / 2);
        for j in 0..self.dim() / 2 {
            let i0 = ((j & !low_mask) << 1) | (j & low_mask);
            let i1 = i0 | (1 << low_bits);
            reduced.push(
                factor[0].conj() * self.amplitudes[i0] + factor[1].conj() * self.amplitudes[i1],
            );
        }
        let out = StateVector {
            num_qubits: n - 1,
            amplitudes: reduced,
        };
        let norm = out.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QsimError::NotNormalized(format!(
                "qubit {qubit} is not in the given product state (residual norm {norm})"
            )));
        }
        Ok(out)
    }

    /// Born probabilities of the four Bell labels on the pair `(a, b)`, in
    /// [`BellLabel::ALL`] order.
    pub fn bell_probabilities(&self, a: usize, b: usize) -> Result<[f64; 4]> {
        self.check_pair(a, b)?;
        Ok(BellLabel::ALL.map(|label| {
            self.pair_overlaps(a, b, &label.pair_amplitudes())
                .iter()
                .map(|c| c.norm_sqr())
                .sum()
        }))
    }

    /// For each assignment of the qubits outside `(a, b)` (in increasing base
    /// index order), the overlap of the pair with `pair` (amplitudes over
    /// `|ab⟩ = |00⟩,|01⟩,|10⟩,|11⟩`).
    fn pair_overlaps(&self, a: usize, b: usize, pair: &[Amplitude; 4]) -> Vec<Amplitude> {
        let (ma, mb) = (self.mask(a), self.mask(b));
        (0..self.dim())
            .filter(|i| i & (ma | mb) == 0)
            .map(|base| {
                (0..4)
                    .map(|k| {
                        let idx = base
                            | if k & 2 != 0 { ma } else { 0 }
                            | if k & 1 != 0 { mb } else { 0 };
                        pair[k].conj() * self.amplitudes[idx]
                    })
                    .sum()
            })
            .collect()
    }

    /// Bell-basis projection on the pair `(a, b)`; all qubits are kept, with
    /// the pair left in the sampled Bell state.
    pub fn project_bell(
        &self,
        a: usize,
        b: usize,
        rng: &mut RandomSource,
    ) -> Result<BellMeasurement> {
        let probs = self.bell_probabilities(a, b)?;
        let label = BellLabel::ALL[rng.sample_weighted(&probs)];
        let pair = label.pair_amplitudes();
        let overlaps = self.pair_overlaps(a, b, &pair);
        let probability = probs[label as usize];
        let inv = 1.0 / probability.sqrt();
        let (ma, mb) = (self.mask(a), self.mask(b));
        let mut out = self.clone();
        for (base, c) in (0..self.dim()).filter(|i| i & (ma | mb) == 0).zip(overlaps) {
            for (k, coeff) in pair.iter().enumerate() {
                let idx = base | if k & 2 != 0 { ma } else { 0 } | if k & 1 != 0 { mb } else { 0 };
                out.amplitudes[idx] = c * inv * coeff;
            }
        }
        Ok(BellMeasurement {
            label,
            probability,
            post_state: out,
        })
    }

    /// Probability that a PBS coincidence on `(a, b)` heralds success, i.e. the
    /// weight of the equal-polarization subspace span{|00⟩, |11⟩} of the pair.
    pub fn fusion_success_probability(&self, a: usize, b: usize) -> Result<f64> {
        self.check_pair(a, b)?;
        let (ma, mb) = (self.mask(a), self.mask(b));
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & ma == 0) == (i & mb == 0))
            .map(|(_, amp)| amp.norm_sqr())
            .sum())
    }

    /// Polarizing-beam-splitter fusion of qubits `a` and `b`.
    ///
    /// Success projects the pair onto equal polarization, failure onto the
    /// complement. Both branches keep every qubit.
    pub fn fuse_pbs(&self, a: usize, b: usize, rng: &mut RandomSource) -> Result<Fusion> {
        let p_success = self.fusion_success_probability(a, b)?;
        let branch = rng.sample_weighted(&[p_success, 1.0 - p_success]);
        let success = branch == 0;
        let (ma, mb) = (self.mask(a), self.mask(b));
        let kept = if success { p_success } else { 1.0 - p_success };
        let inv = 1.0 / kept.sqrt();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, amp)| {
                let equal = (i & ma == 0) == (i & mb == 0);
                if equal == success {
                    amp * inv
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(Fusion {
            success,
            success_probability: p_success,
            post_state: StateVector {
                num_qubits: self.num_qubits,
                amplitudes,
            },
        })
    }

    /// |⟨GHZ_r|ψ⟩|² for every label `r`, indexed by `r`'s integer value.
    pub fn ghz_basis_probabilities(&self) -> Result<Vec<f64>> {
        if self.num_qubits < 2 {
            return Err(QsimError::InvalidArity(
                "GHZ basis needs at least 2 qubits".into(),
            ));
        }
        let dim = self.dim();
        let half = dim / 2;
        Ok((0..dim)
            .map(|label| {
                let idx0 = label & (half - 1);
                let idx1 = idx0 ^ (dim - 1);
                let sign = if label & half != 0 { -1.0 } else { 1.0 };
                ((self.amplitudes[idx0] + self.amplitudes[idx1] * sign) * FRAC_1_SQRT_2).norm_sqr()
            })
            .collect())
    }

    /// Projective measurement in the complete GHZ basis.
    pub fn ghz_basis_measure(&self, rng: &mut RandomSource) -> Result<GhzMeasurement> {
        let probs = self.ghz_basis_probabilities()?;
        let index = rng.sample_weighted(&probs);
        let label = BitString::from_index(index, self.num_qubits);
        let post_state = ghz_state(&label)?;
        Ok(GhzMeasurement {
            label,
            probability: probs[index],
            post_state,
        })
    }
}

#[derive(Clone, Debug)]
pub struct QubitMeasurement {
    pub outcome: bool,
    pub probability: f64,
    pub post_state: StateVector,
}

#[derive(Clone, Debug)]
pub struct BellMeasurement {
    pub label: BellLabel,
    pub probability: f64,
    pub post_state: StateVector,
}

#[derive(Clone, Debug)]
pub struct Fusion {
    pub success: bool,
    pub success_probability: f64,
    pub post_state: StateVector,
}

#[derive(Clone, Debug)]
pub struct GhzMeasurement {
    pub label: BitString,
    pub probability: f64,
    pub post_state: StateVector,
}

/// The four Bell states, `|β_xy⟩ = (|0,y⟩ + (−1)^x |1,ȳ⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellLabel {
    PhiPlus = 0,
    PhiMinus = 1,
    PsiPlus = 2,
    PsiMinus = 3,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn from_bits(x: bool, y: bool) -> Self {
        match (x, y) {
            (false, false) => BellLabel::PhiPlus,
            (true, false) => BellLabel::PhiMinus,
            (false, true) => BellLabel::PsiPlus,
            (true, true) => BellLabel::PsiMinus,
        }
    }

    /// `(x, y)` superdense-coding bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            BellLabel::PhiPlus => (false, false),
            BellLabel::PhiMinus => (true, false),
            BellLabel::PsiPlus => (false, true),
            BellLabel::PsiMinus => (true, true),
        }
    }

    fn pair_amplitudes(self) -> [Amplitude; 4] {
        let (x, y) = self.bits();
        let mut amps = [Complex64::new(0.0, 0.0); 4];
        let sign = if x { -1.0 } else { 1.0 };
        amps[y as usize] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[2 | (!y) as usize] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
        amps
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        })
    }
}

/// A validated 2×2 unitary, rows first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2([[Amplitude; 2]; 2]);

impl Unitary2 {
    pub fn new(matrix: [[Amplitude; 2]; 2]) -> Result<Self> {
        let m = matrix;
        let mut deviation: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let entry: Amplitude = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((entry - target).norm());
            }
        }
        if deviation > UNITARY_TOLERANCE || !deviation.is_finite() {
            return Err(QsimError::NotUnitary(deviation));
        }
        Ok(Self(m))
    }

    fn real(m: [[f64; 2]; 2]) -> Self {
        Self(m.map(|row| row.map(|x| Complex64::new(x, 0.0))))
    }

    pub fn identity() -> Self {
        Self::real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn pauli_x() -> Self {
        Self::real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_z() -> Self {
        Self::real([[1.0, 0.0], [0.0, -1.0]])
    }

    /// `X·Z`, i.e. Z applied first.
    pub fn pauli_xz() -> Self {
        Self::real([[0.0, -1.0], [1.0, 0.0]])
    }

    pub fn hadamard() -> Self {
        Self::real([
            [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        ])
    }

    /// Haar-random element of U(2): a uniformly random point on S³ gives the
    /// SU(2) part, and an independent uniform global phase completes it.
    pub fn haar_random(rng: &mut RandomSource) -> Self {
        let g: [f64; 4] = std::array::from_fn(|_| rng.standard_normal());
        let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = Complex64::new(g[0] / r, g[1] / r);
        let b = Complex64::new(g[2] / r, g[3] / r);
        let phase = Complex64::from_polar(1.0, 2.0 * PI * rng.uniform());
        Self([
            [phase * a, -phase * b.conj()],
            [phase * b, phase * a.conj()],
        ])
    }

    pub fn matrix(&self) -> &[[Amplitude; 2]; 2] {
        &self.0
    }
}

/// `{|+_θ⟩, |−_θ⟩}` as amplitude pairs over `|0⟩, |1⟩`.
pub fn theta_basis(theta: f64) -> [[Amplitude; 2]; 2] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let phase = Complex64::from_polar(FRAC_1_SQRT_2, theta);
    [[h, phase], [h, -phase]]
}

/// Superdense-coding Bell state `|β_xy⟩` on two qubits.
pub fn bell_state(x: bool, y: bool) -> StateVector {
    let amplitudes = BellLabel::from_bits(x, y).pair_amplitudes().to_vec();
    StateVector {
        num_qubits: 2,
        amplitudes,
    }
}

/// `(|0, r₂…r_L⟩ + (−1)^{r₁} |1, r̄₂…r̄_L⟩)/√2`.
pub fn ghz_state(bits: &BitString) -> Result<StateVector> {
    let n = bits.len();
    if n < 2 {
        return Err(QsimError::InvalidArity(format!(
            "GHZ label needs at least 2 bits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let idx0 = bits.to_index() & (dim / 2 - 1);
    let idx1 = idx0 ^ (dim - 1);
    let sign = if bits.bit(0) { -1.0 } else { 1.0 };
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    amplitudes[idx0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[idx1] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
    Ok(StateVector {
        num_qubits: n,
        amplitudes,
    })
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Whether a two-qubit state factors as `|a⟩|b⟩`, decided by the determinant
/// of its 2×2 amplitude matrix.
pub fn is_separable_pair(state: &StateVector) -> Result<bool> {
    if state.num_qubits() != 2 {
        return Err(QsimError::InvalidArity(format!(
            "separability test needs 2 qubits, got {}",
            state.num_qubits()
        )));
    }
    let a = state.amplitudes();
    let det = a[0] * a[3] - a[1] * a[2];
    Ok(det.norm() < SEPARABILITY_THRESHOLD)
}
