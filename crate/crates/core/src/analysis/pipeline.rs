//! The numeric pipeline: initial state, dephasing, post-selected
//! measurement and a metric, for every quantity the analysis layer scans.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::threshold::CROSSING_MARGIN;
use crate::error::{Error, Result};
use crate::metrics::{concurrence_lambda, negativity_min_eig, overlap_fidelity, witness_expectation, Bipartition};
use crate::noise::{apply_dephasing, mixed_initial, DephasingProfile};
use crate::register::{measure_postselect, xy_eigenvector, DensityState, MeasurementSpec, Outcome, Representation};
use crate::tensor::{ComplexMatrix, C64, ZERO};

/// Unmeasured qubit pair, named by 1-based qubit numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    P34,
    P24,
    P23,
    P14,
}

impl Pair {
    pub const ALL: [Pair; 4] = [Pair::P34, Pair::P24, Pair::P23, Pair::P14];

    pub fn label(self) -> &'static str {
        match self {
            Pair::P34 => "34",
            Pair::P24 => "24",
            Pair::P23 => "23",
            Pair::P14 => "14",
        }
    }

    /// 0-based indices of the two measured qubits; each is measured at its
    /// own angle `theta_{q+1}`.
    pub fn measured(self) -> [usize; 2] {
        match self {
            Pair::P34 => [0, 1],
            Pair::P24 => [0, 2],
            Pair::P23 => [0, 3],
            Pair::P14 => [1, 2],
        }
    }

    pub fn kept(self) -> [usize; 2] {
        match self {
            Pair::P34 => [2, 3],
            Pair::P24 => [1, 3],
            Pair::P23 => [1, 2],
            Pair::P14 => [0, 3],
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        Pair::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown qubit pair '{s}'")))
    }
}

/// Partial-transpose eigenvalues above `-EIGEN_FLOOR` count as non-negative.
/// Past some thresholds the smallest eigenvalue grows only quadratically from
/// zero, and its sign is roundoff for a few 1e-9 in `p` without this floor.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// A scalar the pipeline can evaluate at `(p, angles)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Quantity {
    Witness,
    Negativity(Bipartition),
    /// Single-qubit output after measuring qubits 1..3.
    RotationFidelity,
    PairFidelity(Pair),
    PairConcurrence(Pair),
    Purity,
}

impl Quantity {
    /// Names accepted by [`FromStr`], one per quantity.
    pub fn supported_names() -> Vec<String> {
        let mut names = vec!["witness".to_string()];
        names.extend(["N1", "N12", "N13", "N14"].map(String::from));
        names.push("F_rotation".into());
        names.extend(Pair::ALL.map(|p| format!("F_pair({})", p.label())));
        names.extend(Pair::ALL.map(|p| format!("C_pair({})", p.label())));
        names.push("purity".into());
        names
    }

    pub fn name(&self) -> String {
        match self {
            Quantity::Witness => "witness".into(),
            Quantity::Negativity(cut) => cut.to_string(),
            Quantity::RotationFidelity => "F_rotation".into(),
            Quantity::PairFidelity(p) => format!("F_pair({})", p.label()),
            Quantity::PairConcurrence(p) => format!("C_pair({})", p.label()),
            Quantity::Purity => "purity".into(),
        }
    }

    /// Crossing level: .5 for fidelities, 0 for entanglement measures.
    pub fn level(&self) -> f64 {
        match self {
            Quantity::RotationFidelity | Quantity::PairFidelity(_) => 0.5,
            _ => 0.0,
        }
    }

    /// Positive while the quantity still certifies entanglement (or a
    /// fidelity above .5); its first zero in `p` is the threshold.
    pub fn signal(&self, value: f64) -> Result<f64> {
        match self {
            Quantity::Witness => Ok(-value),
            Quantity::Negativity(_) => Ok(-value - EIGEN_FLOOR),
            Quantity::RotationFidelity | Quantity::PairFidelity(_) => Ok(value - 0.5),
            Quantity::PairConcurrence(_) => Ok(value),
            Quantity::Purity => Err(Error::UnknownMetric("purity has no threshold".into())),
        }
    }

    /// How far below 0 the signal must fall for a crossing to count. A PPT
    /// cut has min eig at 0 up to roundoff, already covered by `EIGEN_FLOOR`.
    pub fn crossing_drop(&self) -> f64 {
        match self {
            Quantity::Negativity(_) => 0.0,
            _ => CROSSING_MARGIN,
        }
    }

    /// 0-based qubits measured before the metric is taken. The angle of
    /// qubit `q` is `theta[q]`.
    pub fn measured_qubits(&self) -> Vec<usize> {
        match self {
            Quantity::RotationFidelity => vec![0, 1, 2],
            Quantity::PairFidelity(p) | Quantity::PairConcurrence(p) => p.measured().to_vec(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        let pair_arg = |prefix: &str| -> Option<&str> {
            lower
                .strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
        };
        let q = match lower.as_str() {
            "witness" | "w" => Quantity::Witness,
            "n1" | "n12" | "n13" | "n14" => Quantity::Negativity(Bipartition::from_label(t)?),
            "f_rotation" | "f_r" | "fr" => Quantity::RotationFidelity,
            "purity" => Quantity::Purity,
            _ => {
                if let Some(arg) = pair_arg("f_pair") {
                    Quantity::PairFidelity(Pair::from_label(arg)?)
                } else if let Some(arg) = pair_arg("c_pair") {
                    Quantity::PairConcurrence(Pair::from_label(arg)?)
                } else if let Some(arg) = lower.strip_prefix('f').filter(|a| a.len() == 2) {
                    Quantity::PairFidelity(Pair::from_label(arg).map_err(|_| Error::UnknownMetric(t.into()))?)
                } else if let Some(arg) = lower.strip_prefix('c').filter(|a| a.len() == 2) {
                    Quantity::PairConcurrence(Pair::from_label(arg).map_err(|_| Error::UnknownMetric(t.into()))?)
                } else {
                    return Err(Error::UnknownMetric(t.into()));
                }
            }
        };
        Ok(q)
    }
}

/// Initial state (a cluster representation mixed with white noise at
/// weight `1 - q`) and the operations that turn it into metric values.
#[derive(Debug, Clone)]
pub struct Model {
    representation: Representation,
    q: f64,
    initial: DensityState,
}

impl Model {
    pub fn new(representation: Representation, q: f64) -> Result<Self> {
        Ok(Self { representation, q, initial: mixed_initial(q, representation)? })
    }

    pub fn pure(representation: Representation) -> Self {
        Self { representation, q: 1.0, initial: representation.pure_state() }
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn mix(&self) -> f64 {
        self.q
    }

    /// Undephased initial state, also the fidelity reference.
    pub fn initial(&self) -> &DensityState {
        &self.initial
    }

    pub fn dephased(&self, profile: &DephasingProfile) -> Result<DensityState> {
        apply_dephasing(&self.initial, profile)
    }

    pub fn dephased_uniform(&self, p: f64) -> Result<DensityState> {
        self.dephased(&DephasingProfile::uniform(p, 4)?)
    }

    /// Full pipeline at one point.
    pub fn evaluate(&self, quantity: &Quantity, profile: &DephasingProfile, theta: [f64; 4]) -> Result<f64> {
        self.evaluate_on(quantity, &self.dephased(profile)?, theta)
    }

    pub fn evaluate_uniform(&self, quantity: &Quantity, p: f64, theta: [f64; 4]) -> Result<f64> {
        self.evaluate(quantity, &DephasingProfile::uniform(p, 4)?, theta)
    }

    /// Metric of an already dephased state.
    pub fn evaluate_on(&self, quantity: &Quantity, dephased: &DensityState, theta: [f64; 4]) -> Result<f64> {
        match quantity {
            Quantity::Witness => witness_expectation(dephased, self.representation),
            Quantity::Negativity(cut) => negativity_min_eig(dephased, cut),
            Quantity::Purity => Ok(dephased.purity()),
            Quantity::RotationFidelity | Quantity::PairFidelity(_) | Quantity::PairConcurrence(_) => {
                let pairs: Vec<(usize, f64)> = quantity.measured_qubits().into_iter().map(|q| (q, theta[q])).collect();
                let spec = MeasurementSpec::minus_outcomes(&pairs)?;
                let (out, _) = measure_postselect(dephased, &spec)?;
                if let Quantity::PairConcurrence(_) = quantity {
                    return concurrence_lambda(&out);
                }
                let (reference, _) = measure_postselect(&self.initial, &spec)?;
                overlap_fidelity(&out, &reference)
            }
        }
    }
}

/// `<v|_q M |v>_q` for the qubit at position `q` of an `n`-qubit operator.
pub(crate) fn contract_qubit(m: &ComplexMatrix, n: usize, q: usize, v: &[C64; 2]) -> ComplexMatrix {
    let d = m.rows() / 2;
    let shift = n - 1 - q;
    let bit = 1usize << shift;
    let expand = |a: usize| ((a >> shift) << (shift + 1)) | (a & (bit - 1));
    let idx: Vec<usize> = (0..d).map(expand).collect();
    let w = [
        [v[0].conj() * v[0], v[0].conj() * v[1]],
        [v[1].conj() * v[0], v[1].conj() * v[1]],
    ];
    let mut out = ComplexMatrix::zeros(d, d);
    for (a, &x) in idx.iter().enumerate() {
        for (b, &y) in idx.iter().enumerate() {
            out[(a, b)] = w[0][0] * m[(x, y)]
                + w[0][1] * m[(x, y | bit)]
                + w[1][0] * m[(x | bit, y)]
                + w[1][1] * m[(x | bit, y | bit)];
        }
    }
    out
}

/// Calls `leaf(flat_index, unnormalized)` for every point of the Cartesian
/// angle grid `axes` (row-major, first axis slowest), where the leaf is the
/// state left after projecting `qubits[k]` onto the outcome `-1` eigenvector
/// at `axes[k][i_k]`. Shared prefixes are contracted once.
pub(crate) fn for_each_leaf(
    state: &ComplexMatrix,
    n_qubits: usize,
    qubits: &[usize],
    axes: &[Vec<f64>],
    leaf: &mut dyn FnMut(usize, &ComplexMatrix),
) {
    let vectors: Vec<Vec<[C64; 2]>> = axes
        .iter()
        .map(|axis| axis.iter().map(|&t| xy_eigenvector(t, Outcome::MinusOne)).collect())
        .collect();
    fn walk(
        m: &ComplexMatrix,
        n: usize,
        qubits: &[usize],
        done: &[usize],
        vectors: &[Vec<[C64; 2]>],
        flat: usize,
        leaf: &mut dyn FnMut(usize, &ComplexMatrix),
    ) {
        let Some((&q, rest)) = qubits.split_first() else {
            leaf(flat, m);
            return;
        };
        let pos = q - done.iter().filter(|&&d| d < q).count();
        let mut done_next = done.to_vec();
        done_next.push(q);
        let len = vectors[0].len();
        for (i, v) in vectors[0].iter().enumerate() {
            let reduced = contract_qubit(m, n - done.len(), pos, v);
            walk(&reduced, n, rest, &done_next, &vectors[1..], flat * len + i, leaf);
        }
    }
    walk(state, n_qubits, qubits, &[], &vectors, 0, leaf);
}

/// `Re Tr[a b] / (Tr a Tr b)` for unnormalized operators.
pub(crate) fn normalized_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s.re / (a.trace().re * b.trace().re)
}
