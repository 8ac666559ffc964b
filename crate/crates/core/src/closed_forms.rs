//! Analytic expressions for the dephased cluster states, evaluated directly.
//!
//! Notation: `p~ = sqrt(1 - p)`, `s = theta1 + theta2`. Angles carry the
//! qubit number of the measured qubit they belong to (1-based), so
//! `theta4` is only used when qubit 4 is measured.
//!
//! Two readings had to be fixed against the numeric pipeline:
//!
//! * The coefficient written `p'` in the rotation fidelity of `|C4H>` is
//!   `-p~^3`. With that substitution the expression matches the simulator
//!   to roundoff, including the constant term `4(11 + 5p~^3 + 3cos 2t3)`.
//! * In the (3,4) concurrence of `|C4>` the cosine multiplies the whole
//!   bracket: `A = 2 + p(p-2)(p-1)^2 - (p-1)^2 (2 + p(p-2)) cos 2s`.
//!   Placing it on `p(p-2)` alone makes `A - B` negative.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};

/// Radicands more negative than this are treated as transcription faults.
pub const RADICAND_TOL: f64 = 1e-10;

/// `2 - sqrt 2`: witness / N12 threshold of `|C4>`.
pub fn threshold_2_minus_sqrt2() -> f64 {
    2.0 - SQRT_2
}

/// `2 sqrt 2 - 2`: N1, N12, N14 threshold of `|C4H>`.
pub fn threshold_2sqrt2_minus_2() -> f64 {
    2.0 * SQRT_2 - 2.0
}

/// `2 (2^{3/4} - sqrt 2)`: witness threshold of `|C4H>`.
pub fn threshold_witness_c4h() -> f64 {
    2.0 * (2f64.powf(0.75) - SQRT_2)
}

/// `p~ = sqrt(1 - p)`.
pub fn p_tilde(p: f64) -> f64 {
    (1.0 - p).max(0.0).sqrt()
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Rotation fidelity of `|C4>`; depends on the angles only through `t1 + t2`.
pub fn f_c4(p: f64, theta_sum: f64) -> f64 {
    0.25 * (4.0 + p * (p - 3.0) + p * (1.0 - p) * (2.0 * theta_sum).cos())
}

/// Rotation fidelity of `|C4H>`.
pub fn f_c4h(p: f64, t1: f64, t2: f64, t3: f64) -> f64 {
    let pt = p_tilde(p);
    let pt3 = pt * pt * pt;
    let pp = -pt3;
    let c = |x: f64| x.cos();
    let s = |x: f64| x.sin();
    let sum = 2.0 * pt3 * c(2.0 * (t1 - t2))
        + 4.0 * pp * c(2.0 * t2)
        + 2.0 * pt3 * c(2.0 * (t1 + t2))
        + 2.0 * pp * c(2.0 * (t1 - t3))
        + pt3 * c(2.0 * (t1 - t2 - t3))
        + 2.0 * pp * c(2.0 * (t2 - t3))
        + pt3 * c(2.0 * (t1 + t2 - t3))
        + 4.0 * (p - 1.0) * c(2.0 * t1) * (pt - 2.0 * (p + 1.0) * sq(c(t3)))
        + 12.0 * pp * c(2.0 * t3)
        + 4.0 * (11.0 + 5.0 * pt3 + 3.0 * c(2.0 * t3))
        + 2.0 * pp * c(2.0 * (t1 + t3))
        + pt3 * c(2.0 * (t1 - t2 + t3))
        + 2.0 * pp * c(2.0 * (t2 + t3))
        + pt3 * c(2.0 * (t1 + t2 + t3))
        + 16.0 * c(2.0 * t2) * sq(c(t3)) * sq(s(t1))
        + 8.0 * p * p * (sq(c(t3)) * (1.0 + 2.0 * c(2.0 * t2) * sq(s(t1))) - c(t2) * s(2.0 * t1) * s(2.0 * t3))
        + 8.0 * p * (-4.0 * sq(c(t3)) * (1.0 + c(2.0 * t2) * sq(s(t1))) + c(t2) * s(2.0 * t1) * s(2.0 * t3));
    sum / 64.0
}

/// `Tr[W rho]` for dephased `|C4>`; also equals N12.
pub fn witness_c4(p: f64) -> f64 {
    -0.25 * (p * p - 4.0 * p + 2.0)
}

pub fn n1_c4(p: f64) -> f64 {
    -0.25 * (p * p - 3.0 * p + 2.0)
}

pub fn n12_c4(p: f64) -> f64 {
    witness_c4(p)
}

/// Fourfold degenerate minimum eigenvalue for the {0,2} and {0,3} cuts.
pub fn n13_c4(p: f64) -> f64 {
    (p - 1.0) / 4.0
}

pub fn n14_c4(p: f64) -> f64 {
    n13_c4(p)
}

pub fn witness_c4h(p: f64) -> f64 {
    let pt = p_tilde(p);
    (-8.0 * pt + p * (8.0 + 4.0 * pt - p)) / 16.0
}

pub fn n1_c4h(p: f64) -> f64 {
    let pt = p_tilde(p);
    (-4.0 - 4.0 * pt * pt * pt + 6.0 * p - p * p) / 16.0
}

pub fn n12_c4h(p: f64) -> f64 {
    n1_c4h(p)
}

pub fn n13_c4h(p: f64) -> f64 {
    (-4.0 * p_tilde(p) + 2.0 * p - p * p) / 16.0
}

pub fn n14_c4h(p: f64) -> f64 {
    (-4.0 + 4.0 * p + p * p) / 16.0
}

/// Concurrence of qubits 3,4 of `|C4>` after measuring qubits 1,2.
pub fn c34_c4(p: f64, theta_sum: f64) -> Result<f64> {
    let q2 = sq(p - 1.0);
    let c2s = (2.0 * theta_sum).cos();
    let a = 2.0 + p * (p - 2.0) * q2 - q2 * (2.0 + p * (p - 2.0)) * c2s;
    let b_rad = -2.0 * q2 * q2 * (-1.0 + p * (p - 2.0) + q2 * c2s) * sq(theta_sum.sin());
    if b_rad < -RADICAND_TOL {
        return Err(Error::TranscriptionFault { form: "c34_c4", detail: format!("B radicand {b_rad:e}") });
    }
    let b = 2.0 * b_rad.max(0.0).sqrt();
    if a - b < -RADICAND_TOL {
        return Err(Error::TranscriptionFault { form: "c34_c4", detail: format!("A - B = {:e}", a - b) });
    }
    // A^2 - B^2 = [p(p-2)(q2 cos 2s - (p^2 - 2p + 3))]^2, so sqrt(A - B) is
    // taken from that product; the direct root loses half the digits at A ~ B
    let sum = (a + b).max(0.0).sqrt();
    let diff = if sum > 0.0 { (p * (p - 2.0) * (q2 * c2s - (p * p - 2.0 * p + 3.0))).abs() / sum } else { 0.0 };
    Ok((sum - diff) / (2.0 * SQRT_2))
}

/// Fidelity of qubits 2,4 of `|C4>` after measuring 1,3; angle independent.
/// Pairs (2,3) and (1,4) give the same value.
pub fn f24_c4(p: f64) -> f64 {
    sq(p - 2.0) / 4.0
}

/// Concurrence of qubits 2,4 of `|C4>`; also pairs (2,3) and (1,4).
pub fn c24_c4(p: f64) -> f64 {
    (p * p - 4.0 * p + 2.0) / 2.0
}

/// Fidelity of qubits 3,4 of `|C4H>` after measuring 1,2.
pub fn f34_c4h(p: f64, t1: f64, t2: f64) -> f64 {
    let pt = p_tilde(p);
    (8.0 * (1.0 + pt) + p * (-5.0 - 4.0 * pt + p)
        - p * (p - 1.0) * ((2.0 * t1).cos() - 2.0 * (2.0 * t2).cos() * sq(t1.sin())))
        / 16.0
}

/// Fidelity of qubits 2,4 of `|C4H>` after measuring 1,3.
pub fn f24_c4h(p: f64, t1: f64, t3: f64) -> f64 {
    let pt = p_tilde(p);
    (8.0 * (1.0 + pt) + p * (-5.0 - 4.0 * pt + p)
        + p * (2.0 * t1).cos() * (1.0 + 2.0 * pt - p)
        + 2.0 * p * (2.0 * t3).cos() * (pt + (p - 1.0) * sq(t1.sin())))
        / 16.0
}

/// Fidelity of qubits 2,3 of `|C4H>` after measuring 1,4.
pub fn f23_c4h(p: f64, t1: f64, t4: f64) -> f64 {
    let pt = p_tilde(p);
    (10.0 + 6.0 * pt - p * (7.0 + 2.0 * pt - p)
        + (2.0 * t4).cos() * (-2.0 + 2.0 * pt + 3.0 * p - p * p)
        + 2.0 * (2.0 * t1).cos() * (pt - pt * pt * pt * (2.0 * t4).cos() - (p - 2.0) * (p - 1.0) * sq(t4.sin())))
        / 16.0
}

/// Fidelity of qubits 1,4 of `|C4H>` after measuring 2,3.
pub fn f14_c4h(p: f64, t2: f64, t3: f64) -> f64 {
    let pt = p_tilde(p);
    (10.0 + 6.0 * pt - p * (7.0 + 6.0 * pt - p)
        + (p - 1.0) * (-2.0 + 2.0 * pt + p) * ((2.0 * t2).cos() + 2.0 * sq(t2.cos()) * (2.0 * t3).cos()))
        / 16.0
}

/// The `c14` term of the (1,4) concurrence of `|C4H>`.
pub fn c14_term(p: f64, t2: f64, t3: f64) -> Result<f64> {
    let rad = sq(p - 1.0) * (16.0 + p * (p - 16.0) + p * p * ((2.0 * t2).cos() + 2.0 * sq(t2.cos()) * (2.0 * t3).cos()));
    if rad < -RADICAND_TOL {
        return Err(Error::TranscriptionFault { form: "c14_c4h", detail: format!("radicand {rad:e}") });
    }
    Ok(0.25 * rad.max(0.0).sqrt())
}

/// Concurrence of qubits 1,4 of `|C4H>` after measuring 2,3:
/// `max(-p/2 - c14, -p/2 + c14)`.
pub fn c14_c4h(p: f64, t2: f64, t3: f64) -> Result<f64> {
    let c = c14_term(p, t2, t3)?;
    Ok((-p / 2.0 - c).max(-p / 2.0 + c))
}

/// Parameters a closed form can depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Param {
    P,
    Theta1,
    Theta2,
    Theta3,
    Theta4,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::P => "p",
            Param::Theta1 => "theta1",
            Param::Theta2 => "theta2",
            Param::Theta3 => "theta3",
            Param::Theta4 => "theta4",
        }
    }
}

/// Evaluation point: `p` and the four angles `theta1..theta4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub p: f64,
    pub theta: [f64; 4],
}

impl Point {
    pub fn new(p: f64, theta: [f64; 4]) -> Self {
        Self { p, theta }
    }
}

/// A named closed form with its parameter list.
#[derive(Clone, Copy)]
pub struct ClosedForm {
    pub name: &'static str,
    pub params: &'static [Param],
    evaluator: fn(&Point) -> Result<f64>,
}

impl ClosedForm {
    pub fn evaluate(&self, point: &Point) -> Result<f64> {
        if !(0.0..=1.0).contains(&point.p) {
            return Err(Error::OutOfUnitInterval { name: "p", value: point.p });
        }
        (self.evaluator)(point)
    }
}

impl std::fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosedForm").field("name", &self.name).field("params", &self.params).finish()
    }
}

use Param::{Theta1 as T1, Theta2 as T2, Theta3 as T3, Theta4 as T4, P};

macro_rules! form {
    ($name:literal, [$($param:expr),*], |$x:ident| $body:expr) => {
        ClosedForm { name: $name, params: &[$($param),*], evaluator: |$x: &Point| $body }
    };
}

static CATALOG: [ClosedForm; 25] = [
    form!("f_c4", [P, T1, T2, T3], |x| Ok(f_c4(x.p, x.theta[0] + x.theta[1]))),
    form!("f_c4h", [P, T1, T2, T3], |x| Ok(f_c4h(x.p, x.theta[0], x.theta[1], x.theta[2]))),
    form!("witness_c4", [P], |x| Ok(witness_c4(x.p))),
    form!("n1_c4", [P], |x| Ok(n1_c4(x.p))),
    form!("n12_c4", [P], |x| Ok(n12_c4(x.p))),
    form!("n13_c4", [P], |x| Ok(n13_c4(x.p))),
    form!("n14_c4", [P], |x| Ok(n14_c4(x.p))),
    form!("witness_c4h", [P], |x| Ok(witness_c4h(x.p))),
    form!("n1_c4h", [P], |x| Ok(n1_c4h(x.p))),
    form!("n12_c4h", [P], |x| Ok(n12_c4h(x.p))),
    form!("n13_c4h", [P], |x| Ok(n13_c4h(x.p))),
    form!("n14_c4h", [P], |x| Ok(n14_c4h(x.p))),
    form!("f34_c4", [P, T1, T2], |x| Ok(f_c4(x.p, x.theta[0] + x.theta[1]))),
    form!("c34_c4", [P, T1, T2], |x| c34_c4(x.p, x.theta[0] + x.theta[1])),
    form!("f24_c4", [P, T1, T3], |x| Ok(f24_c4(x.p))),
    form!("c24_c4", [P, T1, T3], |x| Ok(c24_c4(x.p))),
    form!("f23_c4", [P, T1, T4], |x| Ok(f24_c4(x.p))),
    form!("c23_c4", [P, T1, T4], |x| Ok(c24_c4(x.p))),
    form!("f14_c4", [P, T2, T3], |x| Ok(f24_c4(x.p))),
    form!("c14_c4", [P, T2, T3], |x| Ok(c24_c4(x.p))),
    form!("f34_c4h", [P, T1, T2], |x| Ok(f34_c4h(x.p, x.theta[0], x.theta[1]))),
    form!("f24_c4h", [P, T1, T3], |x| Ok(f24_c4h(x.p, x.theta[0], x.theta[2]))),
    form!("f23_c4h", [P, T1, T4], |x| Ok(f23_c4h(x.p, x.theta[0], x.theta[3]))),
    form!("f14_c4h", [P, T2, T3], |x| Ok(f14_c4h(x.p, x.theta[1], x.theta[2]))),
    form!("c14_c4h", [P, T2, T3], |x| c14_c4h(x.p, x.theta[1], x.theta[2])),
];

/// Every closed form, in a fixed order.
pub fn catalog() -> &'static [ClosedForm] {
    &CATALOG
}

pub fn lookup(name: &str) -> Result<&'static ClosedForm> {
    CATALOG
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownMetric(name.to_string()))
}
