//! NPT/PPT classification across the four standard cuts.

use std::collections::BTreeMap;

use serde::Serialize;

use super::pipeline::Model;
use super::threshold::{find_threshold, P_MAX};
use crate::error::{Error, Result};
use crate::metrics::{negativity_min_eig, Bipartition};
use crate::register::DensityState;

/// A cut is NPT when the partial transpose has an eigenvalue below `-NPT_TOL`.
pub const NPT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PartialTransposeSign {
    #[serde(rename = "NPT")]
    Npt,
    #[serde(rename = "PPT")]
    Ppt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptPattern {
    /// Keyed by cut label (N1, N12, N13, N14).
    pub cuts: BTreeMap<String, PartialTransposeSign>,
    pub min_eigenvalues: BTreeMap<String, f64>,
    /// Some cuts NPT while others are PPT. This is the labelling used for
    /// "bound entanglement" in the dephasing literature; it is not the
    /// standard definition (undistillable yet entangled).
    pub bound_entanglement_flag: bool,
}

impl PptPattern {
    pub fn sign(&self, label: &str) -> Option<PartialTransposeSign> {
        self.cuts.get(label).copied()
    }

    /// `NPT,PPT,NPT,NPT` in N1, N12, N13, N14 order.
    pub fn signature(&self) -> String {
        Bipartition::standard_cuts()
            .iter()
            .map(|c| match self.cuts[c.label().expect("standard cut")] {
                PartialTransposeSign::Npt => "NPT",
                PartialTransposeSign::Ppt => "PPT",
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn ppt_pattern(state: &DensityState) -> Result<PptPattern> {
    if state.n_qubits() != 4 {
        return Err(Error::DimensionMismatch(format!("PPT pattern needs 4 qubits, got {}", state.n_qubits())));
    }
    let mut cuts = BTreeMap::new();
    let mut min_eigenvalues = BTreeMap::new();
    for cut in Bipartition::standard_cuts() {
        let label = cut.label().expect("standard cut").to_string();
        let m = negativity_min_eig(state, &cut)?;
        let sign = if m < -NPT_TOL { PartialTransposeSign::Npt } else { PartialTransposeSign::Ppt };
        cuts.insert(label.clone(), sign);
        min_eigenvalues.insert(label, m);
    }
    let npt = cuts.values().filter(|&&s| s == PartialTransposeSign::Npt).count();
    Ok(PptPattern { bound_entanglement_flag: npt > 0 && npt < cuts.len(), cuts, min_eigenvalues })
}

/// A change of pattern between neighbouring `p` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternTransition {
    pub cut: String,
    pub p: f64,
    pub before: String,
    pub after: String,
}

/// Pattern changes of the uniformly dephased model on `[0, P_MAX]`, located by
/// bisecting each cut's `min eig + NPT_TOL` between grid points that differ.
pub fn pattern_transitions(model: &Model, grid_points: usize, tol: f64) -> Result<Vec<PatternTransition>> {
    if grid_points < 2 {
        return Err(Error::InvalidGrid("need at least two p points".into()));
    }
    let grid: Vec<f64> = (0..grid_points).map(|i| P_MAX * i as f64 / (grid_points - 1) as f64).collect();
    let patterns = grid
        .iter()
        .map(|&p| ppt_pattern(&model.dephased_uniform(p)?))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (w, ps) in patterns.windows(2).zip(grid.windows(2)) {
        for cut in Bipartition::standard_cuts() {
            let label = cut.label().expect("standard cut");
            if w[0].cuts[label] == w[1].cuts[label] {
                continue;
            }
            let f = |p: f64| Ok(negativity_min_eig(&model.dephased_uniform(p)?, &cut)? + NPT_TOL);
            let root = find_threshold(label, f, (ps[0], ps[1]), tol)?.root;
            let after = ppt_pattern(&model.dephased_uniform((root + tol).min(P_MAX))?)?;
            out.push(PatternTransition {
                cut: label.to_string(),
                p: root,
                before: w[0].signature(),
                after: after.signature(),
            });
        }
    }
    out.sort_by(|a, b| a.p.total_cmp(&b.p));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{threshold_2_minus_sqrt2, threshold_2sqrt2_minus_2};
    use crate::register::{cluster_c4, Representation};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_cluster_is_npt_everywhere() {
        let p = ppt_pattern(&cluster_c4()).unwrap();
        assert_eq!(p.signature(), "NPT,NPT,NPT,NPT");
        assert!(!p.bound_entanglement_flag);
    }

    #[test]
    fn dephased_patterns() {
        let c4 = Model::pure(Representation::C4);
        let p = ppt_pattern(&c4.dephased_uniform(0.7).unwrap()).unwrap();
        assert_eq!(p.signature(), "NPT,PPT,NPT,NPT");
        assert!(p.bound_entanglement_flag);
        let c4h = Model::pure(Representation::C4H);
        let p = ppt_pattern(&c4h.dephased_uniform(0.9).unwrap()).unwrap();
        assert_eq!(p.signature(), "PPT,PPT,NPT,PPT");
        assert_eq!(p.sign("N13"), Some(PartialTransposeSign::Npt));
        assert!(ppt_pattern(&DensityState::maximally_mixed(2)).is_err());
    }

    #[test]
    fn transitions_match_thresholds() {
        let t = pattern_transitions(&Model::pure(Representation::C4), 21, 1e-10).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].cut, "N12");
        assert_abs_diff_eq!(t[0].p, threshold_2_minus_sqrt2(), epsilon = 1e-6);
        let t = pattern_transitions(&Model::pure(Representation::C4H), 21, 1e-10).unwrap();
        let n13 = t.iter().find(|x| x.cut == "N13").unwrap();
        assert_abs_diff_eq!(n13.p, 0.938, epsilon = 1e-3);
        for cut in ["N1", "N12", "N14"] {
            let x = t.iter().find(|x| x.cut == cut).unwrap();
            assert_abs_diff_eq!(x.p, threshold_2sqrt2_minus_2(), epsilon = 1e-6);
        }
    }
}
