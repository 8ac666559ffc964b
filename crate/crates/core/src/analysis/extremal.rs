//! Extremes over measurement angles of the `p` at which a pair or rotation
//! quantity crosses its level.
//!
//! Each angle axis is sampled uniformly on `[0, 2 pi)`; for every angle
//! point the signal is sampled on a uniform `p` grid and the first crossing
//! bracketed. The best few candidates are bisected exactly, then each
//! extreme is refined on successively finer local grids (each level divides
//! the spacing by the refinement factor and spans one previous spacing on
//! either side).

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use super::pipeline::{for_each_leaf, normalized_overlap, Model, Quantity};
use super::threshold::{find_threshold, p_scan_grid, CROSSING_MARGIN};
use crate::error::{Error, Result};
use crate::metrics::concurrence_lambda;
use crate::register::DensityState;
use crate::tensor::{ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalConfig {
    /// Uniform points per angle on `[0, 2 pi)`.
    pub angle_points: usize,
    pub refine_levels: usize,
    pub refine_factor: usize,
    /// Uniform `p` samples used to bracket crossings.
    pub p_points: usize,
    /// Bisection tolerance for candidate roots.
    pub tol: f64,
    /// Candidates bisected per extreme and level.
    pub candidates: usize,
}

impl Default for ExtremalConfig {
    fn default() -> Self {
        Self { angle_points: 64, refine_levels: 3, refine_factor: 8, p_points: 64, tol: 1e-10, candidates: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleCrossing {
    pub root: f64,
    /// `theta1..theta4`; angles the quantity does not depend on are 0.
    pub theta: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalResult {
    pub quantity: String,
    pub representation: String,
    pub min: AngleCrossing,
    pub max: AngleCrossing,
    /// Coarse-grid points with a crossing, out of `grid_points`.
    pub crossing_points: usize,
    pub grid_points: usize,
}

#[derive(Debug, Clone, Copy)]
struct Track {
    alive: bool,
    last_pos: usize,
    last_pos_signal: f64,
    found: Option<(usize, usize, f64)>,
}

impl Track {
    const fn new() -> Self {
        Self { alive: true, last_pos: 0, last_pos_signal: 0.0, found: None }
    }

    fn pending(&self) -> bool {
        self.alive && self.found.is_none()
    }

    fn push(&mut self, k: usize, s: f64, grid: &[f64]) {
        if k == 0 {
            if s > CROSSING_MARGIN {
                self.last_pos_signal = s;
            } else {
                self.alive = false;
            }
        } else if s > 0.0 {
            self.last_pos = k;
            self.last_pos_signal = s;
        } else if s < -CROSSING_MARGIN {
            let (a, b) = (grid[self.last_pos], grid[k]);
            let est = a + (b - a) * self.last_pos_signal / (self.last_pos_signal - s);
            self.found = Some((self.last_pos, k, est));
        }
    }
}

struct Scanner<'a> {
    model: &'a Model,
    quantity: &'a Quantity,
    qubits: Vec<usize>,
    p_grid: Vec<f64>,
    dephased: Vec<DensityState>,
    config: ExtremalConfig,
}

/// A crossing bracketed on the coarse `p` grid.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    theta: [f64; 4],
    bracket: (f64, f64),
    estimate: f64,
}

impl<'a> Scanner<'a> {
    fn new(model: &'a Model, quantity: &'a Quantity, config: ExtremalConfig) -> Result<Self> {
        let qubits = quantity.measured_qubits();
        if qubits.is_empty() {
            return Err(Error::UnknownMetric(format!("{quantity} does not depend on measurement angles")));
        }
        if config.angle_points == 0 || config.p_points < 2 || config.refine_factor == 0 || config.candidates == 0 {
            return Err(Error::InvalidGrid(format!("{config:?}")));
        }
        let p_grid = p_scan_grid(config.p_points);
        let dephased = p_grid.iter().map(|&p| model.dephased_uniform(p)).collect::<Result<_>>()?;
        Ok(Self { model, quantity, qubits, p_grid, dephased, config })
    }

    fn leaf_signal(&self, leaf: &ComplexMatrix, reference: Option<&ComplexMatrix>) -> Result<f64> {
        let value = match (self.quantity, reference) {
            (Quantity::PairConcurrence(_), _) => {
                let prob = leaf.trace().re;
                concurrence_lambda(&DensityState::from_matrix_unchecked(leaf.scale(C64::from(1.0 / prob))))?
            }
            (_, Some(r)) => normalized_overlap(leaf, r),
            _ => unreachable!("fidelity leaves carry a reference"),
        };
        self.quantity.signal(value)
    }

    /// Brackets the first crossing at every point of the Cartesian grid
    /// `axes` (one axis per measured qubit).
    fn scan(&self, axes: &[Vec<f64>]) -> Result<Vec<Candidate>> {
        let needs_reference = !matches!(self.quantity, Quantity::PairConcurrence(_));
        let (first, rest_qubits) = self.qubits.split_first().expect("non-empty");
        let rest: Vec<usize> = rest_qubits.iter().map(|&q| if q > *first { q - 1 } else { q }).collect();
        let inner: usize = axes[1..].iter().map(Vec::len).product();
        let n = self.model.initial().n_qubits();

        let slices: Vec<Result<Vec<Candidate>>> = axes[0]
            .par_iter()
            .map(|&t0| -> Result<Vec<Candidate>> {
                let v0 = crate::register::xy_eigenvector(t0, crate::register::Outcome::MinusOne);
                let mut references = Vec::new();
                if needs_reference {
                    let r = super::pipeline::contract_qubit(self.model.initial().matrix(), n, *first, &v0);
                    for_each_leaf(&r, n - 1, &rest, &axes[1..], &mut |_, leaf| references.push(leaf.clone()));
                }
                let mut tracks = vec![Track::new(); inner];
                let mut failure = None;
                for (k, rho) in self.dephased.iter().enumerate() {
                    if tracks.iter().all(|t| !t.pending()) {
                        break;
                    }
                    let reduced = super::pipeline::contract_qubit(rho.matrix(), n, *first, &v0);
                    for_each_leaf(&reduced, n - 1, &rest, &axes[1..], &mut |flat, leaf| {
                        if !tracks[flat].pending() || failure.is_some() {
                            return;
                        }
                        match self.leaf_signal(leaf, references.get(flat)) {
                            Ok(s) => tracks[flat].push(k, s, &self.p_grid),
                            Err(e) => failure = Some(e),
                        }
                    });
                    if let Some(e) = failure.take() {
                        return Err(e);
                    }
                }
                Ok(tracks
                    .iter()
                    .enumerate()
                    .filter_map(|(flat, t)| {
                        let (i, j, estimate) = t.found?;
                        let mut theta = [0.0; 4];
                        theta[*first] = t0;
                        let mut rem = flat;
                        for (axis, &q) in axes[1..].iter().zip(rest_qubits).rev() {
                            theta[q] = axis[rem % axis.len()];
                            rem /= axis.len();
                        }
                        Some(Candidate { theta, bracket: (self.p_grid[i], self.p_grid[j]), estimate })
                    })
                    .collect())
            })
            .collect();
        let mut out = Vec::new();
        for s in slices {
            out.extend(s?);
        }
        Ok(out)
    }

    fn exact(&self, c: &Candidate) -> Result<AngleCrossing> {
        let signal = |p: f64| self.quantity.signal(self.model.evaluate_uniform(self.quantity, p, c.theta)?);
        let report = find_threshold(&self.quantity.name(), signal, c.bracket, self.config.tol)?;
        Ok(AngleCrossing { root: report.root, theta: c.theta })
    }

    /// Exact roots of the `candidates` best estimates; `smallest` selects
    /// the direction.
    fn best(&self, mut cands: Vec<Candidate>, smallest: bool) -> Result<Option<AngleCrossing>> {
        cands.sort_by(|a, b| a.estimate.total_cmp(&b.estimate));
        if !smallest {
            cands.reverse();
        }
        let mut best: Option<AngleCrossing> = None;
        for c in cands.iter().take(self.config.candidates) {
            let x = self.exact(c)?;
            let better = match best {
                None => true,
                Some(b) => (smallest && x.root < b.root) || (!smallest && x.root > b.root),
            };
            if better {
                best = Some(x);
            }
        }
        Ok(best)
    }

    fn refine(&self, seed: AngleCrossing, smallest: bool) -> Result<AngleCrossing> {
        let mut best = seed;
        let mut step = TAU / self.config.angle_points as f64;
        let half = self.config.refine_factor as i64;
        for _ in 0..self.config.refine_levels {
            step /= self.config.refine_factor as f64;
            let axes: Vec<Vec<f64>> = self
                .qubits
                .iter()
                .map(|&q| (-half..=half).map(|m| best.theta[q] + m as f64 * step).collect())
                .collect();
            if let Some(x) = self.best(self.scan(&axes)?, smallest)? {
                if (smallest && x.root < best.root) || (!smallest && x.root > best.root) {
                    best = x;
                }
            }
        }
        for t in best.theta.iter_mut() {
            *t = t.rem_euclid(TAU);
        }
        Ok(best)
    }
}

/// Uniform grid of `n` angles on `[0, 2 pi)`.
pub fn angle_axis(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Minimum and maximum crossing `p` over measurement angles, or `None` when
/// no angle point crosses.
pub fn extremal_crossing(model: &Model, quantity: &Quantity, config: ExtremalConfig) -> Result<Option<ExtremalResult>> {
    let scanner = Scanner::new(model, quantity, config)?;
    let axes: Vec<Vec<f64>> = scanner.qubits.iter().map(|_| angle_axis(config.angle_points)).collect();
    let grid_points = axes.iter().map(Vec::len).product();
    let cands = scanner.scan(&axes)?;
    if cands.is_empty() {
        return Ok(None);
    }
    let crossing_points = cands.len();
    let lo = scanner.best(cands.clone(), true)?.expect("non-empty");
    let hi = scanner.best(cands, false)?.expect("non-empty");
    Ok(Some(ExtremalResult {
        quantity: quantity.name(),
        representation: model.representation().label().to_string(),
        min: scanner.refine(lo, true)?,
        max: scanner.refine(hi, false)?,
        crossing_points,
        grid_points,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::pipeline::Pair;
    use crate::closed_forms::{threshold_2_minus_sqrt2, threshold_2sqrt2_minus_2};
    use crate::register::Representation;
    use approx::assert_abs_diff_eq;

    fn small() -> ExtremalConfig {
        ExtremalConfig { angle_points: 16, refine_levels: 2, p_points: 32, ..Default::default() }
    }

    #[test]
    fn angle_grid() {
        let a = angle_axis(4);
        assert_eq!(a.len(), 4);
        assert_eq!(a[0], 0.0);
        assert_abs_diff_eq!(a[1], std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn c4_pair_is_angle_independent() {
        let model = Model::pure(Representation::C4);
        let r = extremal_crossing(&model, &Quantity::PairFidelity(Pair::P24), small()).unwrap().unwrap();
        assert_abs_diff_eq!(r.min.root, threshold_2_minus_sqrt2(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.max.root, threshold_2_minus_sqrt2(), epsilon = 1e-9);
        assert_eq!(r.crossing_points, r.grid_points);
    }

    #[test]
    fn c4_pair_34_concurrence_never_dies() {
        let model = Model::pure(Representation::C4);
        assert!(extremal_crossing(&model, &Quantity::PairConcurrence(Pair::P34), small()).unwrap().is_none());
        assert!(extremal_crossing(&model, &Quantity::PairFidelity(Pair::P34), small()).unwrap().is_none());
    }

    #[test]
    fn c4h_pair_24_fidelity_maximum() {
        let model = Model::pure(Representation::C4H);
        let r = extremal_crossing(&model, &Quantity::PairFidelity(Pair::P24), small()).unwrap().unwrap();
        assert_abs_diff_eq!(r.max.root, threshold_2sqrt2_minus_2(), epsilon = 1e-6);
        assert!(r.min.root < 0.58);
    }

    #[test]
    fn rejects_angle_free_quantities() {
        let model = Model::pure(Representation::C4);
        assert!(extremal_crossing(&model, &Quantity::Witness, small()).is_err());
    }
}
