//! Cluster-state preparation, single-qubit gates and post-selected
//! measurements in the x-y plane.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    self, check_qubits, hermitian_eigenvalues, kron_all, qubit_bit, register_qubits, ComplexMatrix, C64, I, ONE, ZERO,
};

/// Tolerance for Hermiticity, unit trace and positivity of a [`DensityState`].
pub const STATE_TOL: f64 = 1e-10;

/// Post-selected branches below this probability are rejected.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Outcome `-1` projects onto `(I - cos t X - sin t Y)/2`, outcome `+1` onto
/// `(I + cos t X + sin t Y)/2`. With this mapping the numeric pipeline
/// reproduces the analytic rotation fidelities of both cluster representations.
pub const MEASUREMENT_CONVENTION: &str = "minus-outcome=(I-cos(t)X-sin(t)Y)/2";

/// The two cluster-state representations studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    /// `(|0000> + |0011> + |1100> - |1111>)/2`
    C4,
    /// `H_1 H_4 |C4>`, the state grown from `|+>^4` by chain CZ gates.
    C4H,
}

impl Representation {
    pub const ALL: [Representation; 2] = [Representation::C4, Representation::C4H];

    pub fn label(self) -> &'static str {
        match self {
            Representation::C4 => "C4",
            Representation::C4H => "C4H",
        }
    }

    pub fn amplitudes(self) -> Vec<C64> {
        match self {
            Representation::C4 => c4_amplitudes(),
            Representation::C4H => c4h_amplitudes(),
        }
    }

    pub fn pure_state(self) -> DensityState {
        DensityState::pure(&self.amplitudes()).expect("cluster amplitudes are normalized")
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c4" => Ok(Representation::C4),
            "c4h" => Ok(Representation::C4H),
            other => Err(Error::Parse(format!("unknown representation '{other}' (expected c4 or c4h)"))),
        }
    }
}

/// A `2^n x 2^n` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityState {
    /// Validates Hermiticity, unit trace and positivity (all to [`STATE_TOL`]).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = register_qubits(&matrix)?;
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NonHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&matrix)?[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        let n_qubits = register_qubits(&matrix).expect("register-shaped matrix");
        Self { n_qubits, matrix }
    }

    /// Projector onto a normalized state vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state vector norm^2 {norm} is not 1")));
        }
        let m = ComplexMatrix::outer(amplitudes, amplitudes);
        register_qubits(&m)?;
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self::from_matrix_unchecked(ComplexMatrix::identity(dim).scale(C64::from(1.0 / dim as f64)))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        let n = m.rows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (m[(i, j)] * m[(j, i)]).re;
            }
        }
        s
    }

    /// `<psi| rho |psi>`.
    pub fn expectation_pure(&self, psi: &[C64]) -> Result<f64> {
        let rho_psi = self.matrix.apply(psi)?;
        Ok(psi.iter().zip(&rho_psi).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }

    pub fn partial_transpose(&self, subset: &[usize]) -> Result<ComplexMatrix> {
        tensor::partial_transpose(&self.matrix, subset)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityState> {
        Ok(Self::from_matrix_unchecked(tensor::partial_trace(&self.matrix, keep)?))
    }

    /// Convex combination `(1 - w) self + w other`.
    pub fn mix(&self, other: &DensityState, w: f64) -> Result<DensityState> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("mixing states of different size".into()));
        }
        let a = self.matrix.scale(C64::from(1.0 - w));
        let b = other.matrix.scale(C64::from(w));
        Ok(Self::from_matrix_unchecked(&a + &b))
    }
}

fn c4_amplitudes() -> Vec<C64> {
    let mut v = vec![ZERO; 16];
    v[0b0000] = C64::from(0.5);
    v[0b0011] = C64::from(0.5);
    v[0b1100] = C64::from(0.5);
    v[0b1111] = C64::from(-0.5);
    v
}

fn c4h_amplitudes() -> Vec<C64> {
    let h = hadamard();
    let i2 = ComplexMatrix::identity(2);
    let op = kron_all([&h, &i2, &i2, &h]);
    op.apply(&c4_amplitudes()).expect("16-dim operator")
}

/// `|C4>` as a density matrix.
pub fn cluster_c4() -> DensityState {
    Representation::C4.pure_state()
}

/// `H_1 H_4 |C4>` as a density matrix.
pub fn cluster_c4h() -> DensityState {
    Representation::C4H.pure_state()
}

/// `|+>^4` followed by `CZ_12 CZ_23 CZ_34`.
pub fn build_by_cz() -> DensityState {
    let plus = [C64::from(FRAC_1_SQRT_2), C64::from(FRAC_1_SQRT_2)];
    let mut psi = vec![ONE; 16];
    for (x, amp) in psi.iter_mut().enumerate() {
        *amp = (0..4).map(|q| plus[(x >> (3 - q)) & 1]).product();
    }
    let mut state = DensityState::pure(&psi).expect("normalized product state");
    for (a, b) in [(0, 1), (1, 2), (2, 3)] {
        state = apply_cz(&state, a, b).expect("valid chain indices");
    }
    state
}

pub fn hadamard() -> ComplexMatrix {
    let h = C64::from(FRAC_1_SQRT_2);
    ComplexMatrix::from_raw(2, 2, vec![h, h, h, -h])
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_raw(2, 2, vec![ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_raw(2, 2, vec![ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diag(&[1.0, -1.0])
}

/// `Z(a) = diag(1, e^{ia})`.
pub fn z_rotation(angle: f64) -> ComplexMatrix {
    ComplexMatrix::diag(&[ONE, C64::from_polar(1.0, angle)])
}

/// `X(a) = H Z(a) H`.
pub fn x_rotation(angle: f64) -> ComplexMatrix {
    let h = hadamard();
    &(&h * &z_rotation(angle)) * &h
}

/// Conjugates `state` by `gate` acting on one qubit.
pub fn apply_single_qubit_gate(state: &DensityState, qubit: usize, gate: &ComplexMatrix) -> Result<DensityState> {
    if gate.rows() != 2 || gate.cols() != 2 {
        return Err(Error::DimensionMismatch("single-qubit gate must be 2x2".into()));
    }
    let defect = gate.unitarity_defect();
    if defect > STATE_TOL {
        return Err(Error::NonUnitary(defect));
    }
    let n = state.n_qubits;
    check_qubits(&[qubit], n)?;
    let i2 = ComplexMatrix::identity(2);
    let op = kron_all((0..n).map(|q| if q == qubit { gate } else { &i2 }));
    Ok(DensityState::from_matrix_unchecked(op.conjugate(&state.matrix)?))
}

/// Controlled phase `diag(1,1,1,-1)` between qubits `a` and `b`.
pub fn apply_cz(state: &DensityState, a: usize, b: usize) -> Result<DensityState> {
    let n = state.n_qubits;
    check_qubits(&[a, b], n)?;
    let mask = qubit_bit(n, a) | qubit_bit(n, b);
    let sign = |x: usize| if x & mask == mask { -1.0 } else { 1.0 };
    let mut m = state.matrix.clone();
    for x in 0..state.dim() {
        for y in 0..state.dim() {
            m[(x, y)] *= sign(x) * sign(y);
        }
    }
    Ok(DensityState::from_matrix_unchecked(m))
}

/// Measurement outcome label in the x-y plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    MinusOne,
    PlusOne,
}

impl Outcome {
    fn sign(self) -> f64 {
        match self {
            Outcome::MinusOne => -1.0,
            Outcome::PlusOne => 1.0,
        }
    }
}

/// Normalized eigenvector of `cos t X + sin t Y` for `outcome`.
pub fn xy_eigenvector(theta: f64, outcome: Outcome) -> [C64; 2] {
    [
        C64::from(FRAC_1_SQRT_2),
        C64::from_polar(FRAC_1_SQRT_2, theta) * outcome.sign(),
    ]
}

/// Rank-one projector `(I ± (cos t X + sin t Y))/2`.
pub fn xy_projector(theta: f64, outcome: Outcome) -> ComplexMatrix {
    let v = xy_eigenvector(theta, outcome);
    ComplexMatrix::outer(&v, &v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementStep {
    pub qubit: usize,
    pub theta: f64,
    pub outcome: Outcome,
}

/// Ordered post-selected measurements; qubits are distinct.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasurementSpec {
    steps: Vec<MeasurementStep>,
}

impl MeasurementSpec {
    pub fn new(steps: Vec<MeasurementStep>) -> Result<Self> {
        for (k, s) in steps.iter().enumerate() {
            if !s.theta.is_finite() {
                return Err(Error::Parse(format!("measurement angle {} is not finite", s.theta)));
            }
            if steps[..k].iter().any(|t| t.qubit == s.qubit) {
                return Err(Error::RepeatedQubit(s.qubit));
            }
        }
        Ok(Self { steps })
    }

    /// All steps with outcome `-1`, the branch that needs no byproduct correction.
    pub fn minus_outcomes(pairs: &[(usize, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(qubit, theta)| MeasurementStep { qubit, theta, outcome: Outcome::MinusOne })
                .collect(),
        )
    }

    pub fn steps(&self) -> &[MeasurementStep] {
        &self.steps
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.qubit).collect()
    }
}

/// Unnormalized reduced operator `<phi| rho |phi>` on the unmeasured qubits
/// (ascending order), where `|phi>` is the product of the step eigenvectors.
pub(crate) fn project_unnormalized(state: &DensityState, spec: &MeasurementSpec) -> Result<ComplexMatrix> {
    let n = state.n_qubits;
    let measured = spec.measured_qubits();
    check_qubits(&measured, n)?;
    let kept: Vec<usize> = (0..n).filter(|q| !measured.contains(q)).collect();
    if kept.is_empty() {
        return Err(Error::DimensionMismatch("measurement leaves no qubit unmeasured".into()));
    }
    let vecs: Vec<[C64; 2]> = spec.steps.iter().map(|s| xy_eigenvector(s.theta, s.outcome)).collect();

    // basis offsets and amplitudes of |phi> over the measured qubits
    let k = measured.len();
    let mut phi: Vec<(usize, C64)> = Vec::with_capacity(1 << k);
    for bits in 0..1usize << k {
        let mut offset = 0;
        let mut amp = ONE;
        for (i, (&q, v)) in measured.iter().zip(&vecs).enumerate() {
            let b = (bits >> (k - 1 - i)) & 1;
            if b == 1 {
                offset |= qubit_bit(n, q);
            }
            amp *= v[b];
        }
        phi.push((offset, amp));
    }
    let kept_idx: Vec<usize> = (0..1usize << kept.len())
        .map(|a| {
            kept.iter()
                .enumerate()
                .filter(|&(i, _)| a & (1 << (kept.len() - 1 - i)) != 0)
                .fold(0, |acc, (_, &q)| acc | qubit_bit(n, q))
        })
        .collect();

    let m = &state.matrix;
    let d = kept_idx.len();
    let mut out = ComplexMatrix::zeros(d, d);
    for (a, &xa) in kept_idx.iter().enumerate() {
        for (b, &xb) in kept_idx.iter().enumerate() {
            let mut acc = ZERO;
            for &(s, phi_s) in &phi {
                let row = xa | s;
                let mut inner = ZERO;
                for &(t, phi_t) in &phi {
                    inner += m[(row, xb | t)] * phi_t;
                }
                acc += phi_s.conj() * inner;
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Post-selects every step of `spec`, traces out the measured qubits and
/// renormalizes. Returns the state on the unmeasured qubits (ascending
/// index order) and the joint probability of the branch.
pub fn measure_postselect(state: &DensityState, spec: &MeasurementSpec) -> Result<(DensityState, f64)> {
    let unnormalized = project_unnormalized(state, spec)?;
    let prob = unnormalized.trace().re;
    if !(prob >= ZERO_PROBABILITY) {
        return Err(Error::ZeroProbability(prob));
    }
    let rho = unnormalized.scale(C64::from(1.0 / prob));
    Ok((DensityState::from_matrix_unchecked(rho), prob))
}

/// `H Z(alpha) X(beta) Z(gamma)`.
pub fn euler_rotation(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let h = hadamard();
    &(&(&h * &z_rotation(alpha)) * &x_rotation(beta)) * &z_rotation(gamma)
}

/// Logical unitary implemented on the last qubit of `|C4H>` when qubits 1..3
/// are measured at `thetas` with outcome `-1`. This is
/// `H Z(pi - t3) X(pi - t2) Z(pi - t1)`, i.e. [`euler_rotation`] with
/// `(alpha, beta, gamma) = (pi - t3, pi - t2, pi - t1)`.
pub fn ideal_logical_rotation(theta1: f64, theta2: f64, theta3: f64) -> ComplexMatrix {
    euler_rotation(PI - theta3, PI - theta2, PI - theta1)
}

/// Same chain for arbitrary outcomes: the `+1` projector at `t` equals the
/// `-1` projector at `t + pi`.
pub fn logical_rotation_for_outcomes(thetas: [f64; 3], outcomes: [Outcome; 3]) -> ComplexMatrix {
    let shifted: Vec<f64> = thetas
        .iter()
        .zip(outcomes)
        .map(|(&t, o)| if o == Outcome::PlusOne { t + PI } else { t })
        .collect();
    ideal_logical_rotation(shifted[0], shifted[1], shifted[2])
}

/// Measurement angles realizing `H Z(alpha) X(beta) Z(gamma)` on `|C4H>`.
pub fn angles_for_euler(alpha: f64, beta: f64, gamma: f64) -> [f64; 3] {
    [PI - gamma, PI - beta, PI - alpha]
}
