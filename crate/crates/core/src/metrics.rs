//! Entanglement and fidelity metrics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::{DensityState, Representation};
use crate::tensor::{check_qubits, hermitian_eigen, hermitian_eigenvalues, singular_values, ComplexMatrix, C64, ZERO};

/// Qubits whose indices are transposed. The cuts used throughout are
/// `{0}`, `{0,1}`, `{0,2}` and `{0,3}`, labelled N1, N12, N13 and N14
/// (labels count qubits from 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    qubits: Vec<usize>,
}

impl Bipartition {
    pub fn new(qubits: &[usize]) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::DimensionMismatch("bipartition needs at least one transposed qubit".into()));
        }
        let mut qubits = qubits.to_vec();
        qubits.sort_unstable();
        if let Some(w) = qubits.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::RepeatedQubit(w[0]));
        }
        Ok(Self { qubits })
    }

    pub fn n1() -> Self {
        Self { qubits: vec![0] }
    }

    pub fn n12() -> Self {
        Self { qubits: vec![0, 1] }
    }

    pub fn n13() -> Self {
        Self { qubits: vec![0, 2] }
    }

    pub fn n14() -> Self {
        Self { qubits: vec![0, 3] }
    }

    /// N1, N12, N13, N14 in that order.
    pub fn standard_cuts() -> [Bipartition; 4] {
        [Self::n1(), Self::n12(), Self::n13(), Self::n14()]
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn complement(&self, n_qubits: usize) -> Vec<usize> {
        (0..n_qubits).filter(|q| !self.qubits.contains(q)).collect()
    }

    /// `N1`, `N12`, `N13`, `N14` for the standard cuts.
    pub fn label(&self) -> Option<&'static str> {
        match self.qubits.as_slice() {
            [0] => Some("N1"),
            [0, 1] => Some("N12"),
            [0, 2] => Some("N13"),
            [0, 3] => Some("N14"),
            _ => None,
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        match label.to_ascii_uppercase().as_str() {
            "N1" => Ok(Self::n1()),
            "N12" => Ok(Self::n12()),
            "N13" => Ok(Self::n13()),
            "N14" => Ok(Self::n14()),
            _ => Err(Error::UnknownMetric(label.to_string())),
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label() {
            Some(l) => f.write_str(l),
            None => write!(f, "{:?}", self.qubits),
        }
    }
}

/// Ascending spectrum of the partial transpose across `part`.
pub fn partial_transpose_spectrum(state: &DensityState, part: &Bipartition) -> Result<Vec<f64>> {
    check_qubits(part.qubits(), state.n_qubits())?;
    hermitian_eigenvalues(&state.partial_transpose(part.qubits())?)
}

/// Most negative eigenvalue of the partial transpose; negative values
/// certify entanglement across the cut.
pub fn negativity_min_eig(state: &DensityState, part: &Bipartition) -> Result<f64> {
    Ok(partial_transpose_spectrum(state, part)?[0])
}

/// `Tr[W rho]` with `W = I/2 - |C_r><C_r|`.
pub fn witness_expectation(state: &DensityState, representation: Representation) -> Result<f64> {
    if state.n_qubits() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "witness needs a 4-qubit state, got {} qubits",
            state.n_qubits()
        )));
    }
    Ok(0.5 * state.trace() - state.expectation_pure(&representation.amplitudes())?)
}

/// `x^T (Y⊗Y) y` without conjugation.
fn spin_flip_form(x: &[C64], y: &[C64]) -> C64 {
    -x[0] * y[3] + x[1] * y[2] + x[2] * y[1] - x[3] * y[0]
}

/// Square roots of the eigenvalues of `rho (Y⊗Y) rho* (Y⊗Y)`, descending.
///
/// These are the singular values of `tau = X^T (Y⊗Y) X` for any
/// factorization `rho = X X^dagger`. Taking them by one-sided Jacobi on
/// `tau` keeps the absolute error at roundoff level instead of its square
/// root.
pub fn wootters_singular_values(state: &DensityState) -> Result<[f64; 4]> {
    if state.n_qubits() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a 2-qubit state, got {} qubits",
            state.n_qubits()
        )));
    }
    let eig = hermitian_eigen(state.matrix())?;
    let columns: Vec<Vec<C64>> = (0..4)
        .filter(|&k| eig.values[k] > 0.0)
        .map(|k| {
            let r = eig.values[k].sqrt();
            (0..4).map(|i| eig.vectors[(i, k)] * r).collect()
        })
        .collect();
    let r = columns.len();
    let mut out = [0.0; 4];
    if r == 0 {
        return Ok(out);
    }
    let mut tau = ComplexMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            tau[(i, j)] = spin_flip_form(&columns[i], &columns[j]);
        }
    }
    for (slot, v) in out.iter_mut().zip(singular_values(&tau)) {
        *slot = v;
    }
    Ok(out)
}

/// `sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)`, unclamped.
pub fn concurrence_lambda(state: &DensityState) -> Result<f64> {
    let s = wootters_singular_values(state)?;
    Ok(s[0] - s[1] - s[2] - s[3])
}

/// Standard concurrence `max(0, Lambda)`.
pub fn concurrence(state: &DensityState) -> Result<f64> {
    Ok(concurrence_lambda(state)?.max(0.0))
}

/// `Re Tr[a b]`.
pub fn overlap_fidelity(a: &DensityState, b: &DensityState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "overlap of {}- and {}-dimensional states",
            a.dim(),
            b.dim()
        )));
    }
    let (ma, mb) = (a.matrix(), b.matrix());
    let n = a.dim();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            s += ma[(i, j)] * mb[(j, i)];
        }
    }
    Ok(s.re)
}
