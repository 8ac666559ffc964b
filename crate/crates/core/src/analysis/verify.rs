//! Closed forms against the numeric pipeline, and the golden table against
//! the closed forms.
//!
//! Each form is checked on `samples` seeded random points plus the grid
//! `p in {0, .1, .., 1}` times `k pi / 8` for every angle the form takes
//! (full product, so up to 11 * 16^3 points for the rotation fidelities).

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{Model, Pair, Quantity};
use crate::closed_forms::{catalog, lookup, ClosedForm, Param, Point};
use crate::error::{Error, Result};
use crate::metrics::Bipartition;
use crate::register::{DensityState, Representation};

/// Largest accepted |closed form - pipeline|.
pub const VERIFY_TOL: f64 = 1e-8;
/// Largest accepted |golden - closed form|.
pub const GOLDEN_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_SEED: u64 = 20_240_917;

/// The golden table shipped with the crate.
pub const EMBEDDED_GOLDEN: &str = include_str!("../../golden/closed_forms.csv");

const GRID_P: usize = 11;
const GRID_ANGLES: usize = 16;

/// Pipeline counterpart of a closed form.
pub fn target(name: &str) -> Result<(Representation, Quantity)> {
    let (stem, rep) = if let Some(s) = name.strip_suffix("_c4h") {
        (s, Representation::C4H)
    } else if let Some(s) = name.strip_suffix("_c4") {
        (s, Representation::C4)
    } else {
        return Err(Error::UnknownMetric(name.to_string()));
    };
    let quantity = match stem {
        "f" => Quantity::RotationFidelity,
        "witness" => Quantity::Witness,
        "n1" => Quantity::Negativity(Bipartition::n1()),
        "n12" => Quantity::Negativity(Bipartition::n12()),
        "n13" => Quantity::Negativity(Bipartition::n13()),
        "n14" => Quantity::Negativity(Bipartition::n14()),
        _ => {
            let (kind, pair) = stem.split_at(1);
            let pair = Pair::from_label(pair)?;
            match kind {
                "f" => Quantity::PairFidelity(pair),
                "c" => Quantity::PairConcurrence(pair),
                _ => return Err(Error::UnknownMetric(name.to_string())),
            }
        }
    };
    Ok((rep, quantity))
}

/// Value as compared. Negativity forms are the branch of the most negative
/// eigenvalue; once that branch turns positive the cut is PPT and the
/// negativity is 0, so both sides are clipped at 0.
pub fn reported(name: &str, value: f64) -> f64 {
    if name.starts_with('n') {
        value.min(0.0)
    } else {
        value
    }
}

fn angle_slot(param: Param) -> Option<usize> {
    match param {
        Param::P => None,
        Param::Theta1 => Some(0),
        Param::Theta2 => Some(1),
        Param::Theta3 => Some(2),
        Param::Theta4 => Some(3),
    }
}

/// Grid points of one form; unused angles stay at 0.
fn grid_points(form: &ClosedForm) -> Vec<Point> {
    let slots: Vec<usize> = form.params.iter().filter_map(|&p| angle_slot(p)).collect();
    let combos = GRID_ANGLES.pow(slots.len() as u32);
    let mut out = Vec::with_capacity(GRID_P * combos);
    for i in 0..GRID_P {
        let p = i as f64 / (GRID_P - 1) as f64;
        for mut c in 0..combos {
            let mut theta = [0.0; 4];
            for &s in &slots {
                theta[s] = (c % GRID_ANGLES) as f64 * PI / 8.0;
                c /= GRID_ANGLES;
            }
            out.push(Point::new(p, theta));
        }
    }
    out
}

fn random_points(form: &ClosedForm, samples: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let slots: Vec<usize> = form.params.iter().filter_map(|&p| angle_slot(p)).collect();
    (0..samples)
        .map(|_| {
            let p = rng.gen_range(0.0..=1.0);
            let mut theta = [0.0; 4];
            for &s in &slots {
                theta[s] = rng.gen_range(0.0..2.0 * PI);
            }
            Point::new(p, theta)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FormCheck {
    pub name: String,
    pub points: usize,
    pub max_deviation: f64,
    pub worst: Point,
    /// First evaluation error, if any; counts as a failure.
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldenCheck {
    pub rows: usize,
    pub max_deviation: f64,
    pub worst_row: Option<usize>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub forms: Vec<FormCheck>,
    pub golden: GoldenCheck,
    pub tolerance: f64,
    pub golden_tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub pass: bool,
}

/// Pipeline value at every point; dephased states are shared per `p`.
fn pipeline_values(model: &Model, quantity: &Quantity, points: &[Point]) -> Result<Vec<f64>> {
    let mut cache: Vec<(f64, DensityState)> = Vec::new();
    for pt in points {
        if !cache.iter().any(|(p, _)| *p == pt.p) {
            cache.push((pt.p, model.dephased_uniform(pt.p)?));
        }
    }
    points
        .par_iter()
        .map(|pt| {
            let state = &cache.iter().find(|(p, _)| *p == pt.p).expect("cached").1;
            model.evaluate_on(quantity, state, pt.theta)
        })
        .collect()
}

pub fn check_form(form: &ClosedForm, samples: usize, rng: &mut ChaCha8Rng) -> FormCheck {
    let mut points = random_points(form, samples, rng);
    points.extend(grid_points(form));
    let mut check = FormCheck {
        name: form.name.to_string(),
        points: points.len(),
        max_deviation: 0.0,
        worst: points[0],
        error: None,
        pass: false,
    };
    let numeric = target(form.name).and_then(|(rep, q)| pipeline_values(&Model::pure(rep), &q, &points));
    let numeric = match numeric {
        Ok(v) => v,
        Err(e) => {
            check.error = Some(e.to_string());
            return check;
        }
    };
    for (pt, x) in points.iter().zip(numeric) {
        match form.evaluate(pt) {
            Ok(y) => {
                let d = (reported(form.name, x) - reported(form.name, y)).abs();
                // NaN compares false, so test the negation
                if !(d <= check.max_deviation) {
                    check.max_deviation = d;
                    check.worst = *pt;
                }
            }
            Err(e) => {
                check.error.get_or_insert_with(|| format!("{e} at {pt:?}"));
            }
        }
    }
    check.pass = check.error.is_none() && check.max_deviation <= VERIFY_TOL;
    check
}

/// One row of the golden table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub form_name: String,
    pub p: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub value: f64,
}

impl GoldenRow {
    fn point(&self) -> Point {
        Point::new(self.p, [self.theta1, self.theta2, self.theta3, self.theta4])
    }
}

pub fn parse_golden(text: &str) -> Result<Vec<GoldenRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn check_golden(rows: &[GoldenRow]) -> GoldenCheck {
    let mut check = GoldenCheck { rows: rows.len(), max_deviation: 0.0, worst_row: None, error: None, pass: false };
    if rows.is_empty() {
        check.error = Some("golden table is empty".into());
        return check;
    }
    for (i, row) in rows.iter().enumerate() {
        match lookup(&row.form_name).and_then(|f| f.evaluate(&row.point())) {
            Ok(y) => {
                let d = (row.value - reported(&row.form_name, y)).abs();
                if !(d <= check.max_deviation) {
                    check.max_deviation = d;
                    check.worst_row = Some(i);
                }
            }
            Err(e) => {
                check.error.get_or_insert_with(|| format!("row {i}: {e}"));
            }
        }
    }
    check.pass = check.error.is_none() && check.max_deviation <= GOLDEN_TOL;
    check
}

/// Runs every closed form and the golden table. `golden` replaces the
/// embedded table when given.
pub fn verify(samples: usize, seed: u64, golden: Option<&Path>) -> Result<VerifyReport> {
    let text = match golden {
        Some(path) => std::fs::read_to_string(path)?,
        None => EMBEDDED_GOLDEN.to_string(),
    };
    let golden = match parse_golden(&text) {
        Ok(rows) => check_golden(&rows),
        Err(e) => GoldenCheck { rows: 0, max_deviation: f64::NAN, worst_row: None, error: Some(e.to_string()), pass: false },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forms: Vec<FormCheck> = catalog().iter().map(|f| check_form(f, samples, &mut rng)).collect();
    let pass = golden.pass && forms.iter().all(|f| f.pass);
    Ok(VerifyReport { forms, golden, tolerance: VERIFY_TOL, golden_tolerance: GOLDEN_TOL, samples, seed, pass })
}

pub fn render(report: &VerifyReport) -> String {
    let mut s = String::new();
    for f in &report.forms {
        s.push_str(&format!(
            "{:<14} points {:>6}  max |dev| {:.3e}  {}",
            f.name,
            f.points,
            f.max_deviation,
            if f.pass { "PASS" } else { "FAIL" }
        ));
        if let Some(e) = &f.error {
            s.push_str(&format!("  ({e})"));
        }
        s.push('\n');
    }
    let g = &report.golden;
    s.push_str(&format!(
        "golden         rows   {:>6}  max |dev| {:.3e}  {}",
        g.rows,
        g.max_deviation,
        if g.pass { "PASS" } else { "FAIL" }
    ));
    if let Some(e) = &g.error {
        s.push_str(&format!("  ({e})"));
    }
    s.push('\n');
    s
}

/// Points stored in the golden table for each form.
fn golden_points(form: &ClosedForm) -> Vec<Point> {
    const PS: [f64; 6] = [0.0, 0.1, 0.35, 0.6, 0.85, 1.0];
    const ANGLES: [[f64; 4]; 3] = [[0.0; 4], [0.3, 1.1, 2.0, 0.7], [5.0 * PI / 8.0, 0.25, 4.4, 3.0 * PI / 2.0]];
    let used: Vec<usize> = form.params.iter().filter_map(|&p| angle_slot(p)).collect();
    let mut out = Vec::new();
    for p in PS {
        for a in ANGLES {
            let mut theta = [0.0; 4];
            for &s in &used {
                theta[s] = a[s];
            }
            out.push(Point::new(p, theta));
        }
    }
    out
}

/// Golden rows computed with the numeric pipeline, negativities clipped at 0.
pub fn generate_golden() -> Result<Vec<GoldenRow>> {
    let mut rows = Vec::new();
    for form in catalog() {
        let (rep, quantity) = target(form.name)?;
        let points = golden_points(form);
        let values = pipeline_values(&Model::pure(rep), &quantity, &points)?;
        for (pt, value) in points.iter().zip(values) {
            rows.push(GoldenRow {
                form_name: form.name.to_string(),
                p: pt.p,
                theta1: pt.theta[0],
                theta2: pt.theta[1],
                theta3: pt.theta[2],
                theta4: pt.theta[3],
                value: reported(form.name, value),
            });
        }
    }
    Ok(rows)
}

/// CSV text of golden rows, values to 15 decimals.
pub fn golden_csv(rows: &[GoldenRow]) -> String {
    let mut s = String::from("form_name,p,theta1,theta2,theta3,theta4,value\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.15}\n",
            r.form_name, r.p, r.theta1, r.theta2, r.theta3, r.theta4, r.value
        ));
    }
    s
}
