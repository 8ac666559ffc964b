//! Local dephasing channels and imperfect initial states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::{DensityState, Representation};
use crate::tensor::{kron_all, ComplexMatrix};

fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfUnitInterval { name, value })
    }
}

/// `K1 = diag(1, sqrt(1-p))`, `K2 = diag(0, sqrt(p))`.
pub fn dephasing_kraus(p: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let p = check_unit("p", p)?;
    Ok((
        ComplexMatrix::diag(&[1.0, (1.0 - p).sqrt()]),
        ComplexMatrix::diag(&[0.0, p.sqrt()]),
    ))
}

/// `p = 1 - exp(-kappa tau)`.
pub fn p_of_time(kappa: f64, tau: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::Negative { name: "kappa", value: kappa });
    }
    if !(tau >= 0.0) {
        return Err(Error::Negative { name: "tau", value: tau });
    }
    Ok(-(-kappa * tau).exp_m1())
}

/// Staggered strengths `clamp(base + k_q dp, 0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub base: f64,
    pub delta_p: f64,
    pub steps: Vec<i64>,
}

/// Per-qubit dephasing strengths, with the parameterization they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingProfile {
    p_per_qubit: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    kappa_tau: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    schedule: Option<Schedule>,
}

impl DephasingProfile {
    pub fn per_qubit(p_per_qubit: Vec<f64>) -> Result<Self> {
        if p_per_qubit.is_empty() {
            return Err(Error::DimensionMismatch("dephasing profile needs at least one qubit".into()));
        }
        for &p in &p_per_qubit {
            check_unit("p", p)?;
        }
        Ok(Self { p_per_qubit, kappa_tau: None, schedule: None })
    }

    pub fn uniform(p: f64, n_qubits: usize) -> Result<Self> {
        Self::per_qubit(vec![p; n_qubits])
    }

    pub fn noiseless(n_qubits: usize) -> Self {
        Self { p_per_qubit: vec![0.0; n_qubits], kappa_tau: None, schedule: None }
    }

    pub fn from_time(kappa: f64, tau: f64, n_qubits: usize) -> Result<Self> {
        let p = p_of_time(kappa, tau)?;
        let mut profile = Self::uniform(p, n_qubits)?;
        profile.kappa_tau = Some((kappa, tau));
        Ok(profile)
    }

    pub fn from_schedule(schedule: Schedule) -> Result<Self> {
        let p_per_qubit = schedule
            .steps
            .iter()
            .map(|&k| (schedule.base + k as f64 * schedule.delta_p).clamp(0.0, 1.0))
            .collect::<Vec<_>>();
        if p_per_qubit.iter().any(|p| p.is_nan()) {
            return Err(Error::Parse("schedule produced a NaN strength".into()));
        }
        let mut profile = Self::per_qubit(p_per_qubit)?;
        profile.schedule = Some(schedule);
        Ok(profile)
    }

    pub fn strengths(&self) -> &[f64] {
        &self.p_per_qubit
    }

    pub fn n_qubits(&self) -> usize {
        self.p_per_qubit.len()
    }

    pub fn kappa_tau(&self) -> Option<(f64, f64)> {
        self.kappa_tau
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        self.schedule.as_ref()
    }

    /// The `2^n` product operators `K_i ⊗ K_j ⊗ ...`, term `l` picking `K2`
    /// on qubit `q` when bit `q` of `l` (leftmost qubit first) is set.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        let singles: Vec<(ComplexMatrix, ComplexMatrix)> = self
            .p_per_qubit
            .iter()
            .map(|&p| dephasing_kraus(p).expect("validated strength"))
            .collect();
        let n = singles.len();
        (0..1usize << n)
            .map(|l| kron_all((0..n).map(|q| if (l >> (n - 1 - q)) & 1 == 0 { &singles[q].0 } else { &singles[q].1 })))
            .collect()
    }
}

/// `sum_l A_l rho A_l^dagger` over the `2^n` product Kraus operators.
///
/// Every `A_l` is diagonal in the computational basis, so each term is
/// evaluated entrywise as `a_l[x] rho[x][y] conj(a_l[y])`.
pub fn apply_dephasing(state: &DensityState, profile: &DephasingProfile) -> Result<DensityState> {
    let n = state.n_qubits();
    if profile.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "profile covers {} qubits, state has {n}",
            profile.n_qubits()
        )));
    }
    let dim = state.dim();
    // diag(K1), diag(K2) per qubit
    let diags: Vec<[[f64; 2]; 2]> = profile
        .strengths()
        .iter()
        .map(|&p| [[1.0, (1.0 - p).sqrt()], [0.0, p.sqrt()]])
        .collect();

    let rho = state.matrix();
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut a = vec![0.0f64; dim];
    for l in 0..1usize << n {
        let choice = |q: usize| (l >> (n - 1 - q)) & 1;
        if (0..n).any(|q| choice(q) == 1 && diags[q][1][1] == 0.0) {
            continue;
        }
        for (x, ax) in a.iter_mut().enumerate() {
            *ax = (0..n).map(|q| diags[q][choice(q)][(x >> (n - 1 - q)) & 1]).product();
        }
        for x in 0..dim {
            if a[x] == 0.0 {
                continue;
            }
            for y in 0..dim {
                let w = a[x] * a[y];
                if w != 0.0 {
                    out[(x, y)] += rho[(x, y)] * w;
                }
            }
        }
    }
    Ok(DensityState::from_matrix_unchecked(out))
}

/// Generic channel `sum_k A_k rho A_k^dagger` with dense operators.
pub fn apply_kraus(state: &DensityState, operators: &[ComplexMatrix]) -> Result<DensityState> {
    let dim = state.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for a in operators {
        out = &out + &a.conjugate(state.matrix())?;
    }
    Ok(DensityState::from_matrix_unchecked(out))
}

/// `sum_l A_l^dagger A_l`, which is the identity for a trace-preserving channel.
pub fn completeness_sum(operators: &[ComplexMatrix]) -> ComplexMatrix {
    let dim = operators.first().map_or(1, |a| a.cols());
    operators
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, a| &acc + &(&a.dagger() * a))
}

/// `(1 - q)/16 I + q |C_r><C_r|`.
pub fn mixed_initial(q: f64, representation: Representation) -> Result<DensityState> {
    let q = check_unit("q", q)?;
    DensityState::maximally_mixed(4).mix(&representation.pure_state(), q)
}

/// Off-diagonal damping factor `prod_{q: x_q != y_q} sqrt(1 - p_q)`.
pub fn coherence_factor(profile: &DephasingProfile, x: usize, y: usize) -> f64 {
    let n = profile.n_qubits();
    profile
        .strengths()
        .iter()
        .enumerate()
        .filter(|&(q, _)| ((x ^ y) >> (n - 1 - q)) & 1 == 1)
        .map(|(_, &p)| (1.0 - p).sqrt())
        .product()
}
