//! Dense parameter sweeps and their CSV / JSON forms.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{Model, Quantity};
use crate::error::{Error, Result};
use crate::noise::DephasingProfile;
use crate::register::{Representation, MEASUREMENT_CONVENTION};

/// Inclusive uniform grid `lo:hi:n`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(Error::InvalidGrid(format!("'{spec}' is not lo:hi:n")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::InvalidGrid(format!("bad number '{s}' in '{spec}'")));
    let (lo, hi) = (num(lo)?, num(hi)?);
    let n: usize = n.trim().parse().map_err(|_| Error::InvalidGrid(format!("bad point count in '{spec}'")))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || (n > 1 && lo == hi) {
        return Err(Error::InvalidGrid(format!("'{spec}' describes no usable grid")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub point: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Metadata {
    pub representation: Option<String>,
    pub mix_q: Option<f64>,
    /// Fixed profile when `p` is not swept.
    pub dephasing_profile: Option<DephasingProfile>,
    /// Angles held fixed, `theta1..theta4`.
    pub fixed_theta: Option<[f64; 4]>,
    /// Measured qubits (1-based) per metric, outcome `-1` throughout.
    pub measurements: Vec<(String, Vec<usize>)>,
    pub measurement_convention: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub metrics: Vec<String>,
    pub records: Vec<Record>,
    pub metadata: Metadata,
}

/// How the dephasing profile of each grid point is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    /// Equal strength on every qubit, swept over a `p` axis.
    UniformGrid(Vec<f64>),
    /// The same profile at every grid point.
    Fixed(DephasingProfile),
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub representation: Representation,
    pub mix_q: f64,
    pub metrics: Vec<Quantity>,
    pub noise: Noise,
    /// Swept angles as (0-based angle index, values).
    pub theta_axes: Vec<(usize, Vec<f64>)>,
    pub fixed_theta: [f64; 4],
}

impl SweepConfig {
    pub fn new(representation: Representation, metrics: Vec<Quantity>, noise: Noise) -> Self {
        Self { representation, mix_q: 1.0, metrics, noise, theta_axes: Vec::new(), fixed_theta: [0.0; 4] }
    }

    fn axes(&self) -> Vec<Axis> {
        let mut axes = Vec::new();
        if let Noise::UniformGrid(ps) = &self.noise {
            axes.push(Axis { name: "p".into(), values: ps.clone() });
        }
        for (k, values) in &self.theta_axes {
            axes.push(Axis { name: format!("theta{}", k + 1), values: values.clone() });
        }
        axes
    }

    fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::UnknownMetric("no metric requested".into()));
        }
        let names: Vec<String> = self.metrics.iter().map(Quantity::name).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidGrid(format!("metric '{n}' requested twice")));
            }
        }
        for (i, (k, values)) in self.theta_axes.iter().enumerate() {
            if *k > 3 {
                return Err(Error::InvalidGrid(format!("theta index {} out of range", k + 1)));
            }
            if self.theta_axes[..i].iter().any(|(j, _)| j == k) {
                return Err(Error::InvalidGrid(format!("theta{} swept twice", k + 1)));
            }
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!("theta{} grid is empty or non-finite", k + 1)));
            }
        }
        match &self.noise {
            Noise::UniformGrid(ps) => {
                if ps.is_empty() {
                    return Err(Error::InvalidGrid("p grid is empty".into()));
                }
                if let Some(&p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::OutOfUnitInterval { name: "p", value: p });
                }
            }
            Noise::Fixed(profile) => {
                if profile.n_qubits() != 4 {
                    return Err(Error::DimensionMismatch("dephasing profile must cover 4 qubits".into()));
                }
            }
        }
        Ok(())
    }
}

/// Evaluates every metric at every grid point (row-major, first axis
/// slowest). Points run in parallel; records come back in index order.
pub fn sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let model = Model::new(config.representation, config.mix_q)?;
    let axes = config.axes();
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let has_p = matches!(config.noise, Noise::UniformGrid(_));

    let records = (0..total)
        .into_par_iter()
        .map(|flat| -> Result<Record> {
            let mut point = vec![0.0; axes.len()];
            let mut rem = flat;
            for (slot, axis) in point.iter_mut().zip(&axes).rev() {
                *slot = axis.values[rem % axis.values.len()];
                rem /= axis.values.len();
            }
            let mut theta = config.fixed_theta;
            let offset = usize::from(has_p);
            for (i, (k, _)) in config.theta_axes.iter().enumerate() {
                theta[*k] = point[offset + i];
            }
            let profile = match &config.noise {
                Noise::UniformGrid(_) => DephasingProfile::uniform(point[0], 4)?,
                Noise::Fixed(p) => p.clone(),
            };
            let rho = model.dephased(&profile)?;
            let values = config
                .metrics
                .iter()
                .map(|q| model.evaluate_on(q, &rho, theta))
                .collect::<Result<Vec<_>>>()?;
            Ok(Record { point, values })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        axes,
        metrics: config.metrics.iter().map(Quantity::name).collect(),
        records,
        metadata: Metadata {
            representation: Some(config.representation.label().into()),
            mix_q: Some(config.mix_q),
            dephasing_profile: match &config.noise {
                Noise::Fixed(p) => Some(p.clone()),
                Noise::UniformGrid(_) => None,
            },
            fixed_theta: Some(config.fixed_theta),
            measurements: config
                .metrics
                .iter()
                .filter(|q| !q.measured_qubits().is_empty())
                .map(|q| (q.name(), q.measured_qubits().iter().map(|x| x + 1).collect()))
                .collect(),
            measurement_convention: MEASUREMENT_CONVENTION.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        },
    })
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepResult {
    /// Header of axis names then metric names; one row per record.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let header: Vec<&str> = self.axes.iter().map(|a| a.name.as_str()).chain(self.metrics.iter().map(String::as_str)).collect();
        w.write_record(&header)?;
        for r in &self.records {
            w.write_record(r.point.iter().chain(&r.values).map(|&x| format_value(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Inverse of [`write_csv`](Self::write_csv). The first `n_axes`
    /// columns are parameters; axis values are recovered in order of first
    /// appearance. Metadata is not carried by CSV.
    pub fn read_csv<R: Read>(input: R, n_axes: usize) -> Result<SweepResult> {
        let mut rd = csv::ReaderBuilder::new().from_reader(input);
        let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        if n_axes > header.len() {
            return Err(Error::Parse(format!("{n_axes} axes but only {} columns", header.len())));
        }
        let mut axes: Vec<Axis> = header[..n_axes].iter().map(|n| Axis { name: n.clone(), values: Vec::new() }).collect();
        let mut records = Vec::new();
        for row in rd.records() {
            let row = row?;
            let nums = row
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}'"))))
                .collect::<Result<Vec<_>>>()?;
            if nums.len() != header.len() {
                return Err(Error::Parse(format!("row has {} fields, header {}", nums.len(), header.len())));
            }
            for (axis, &v) in axes.iter_mut().zip(&nums) {
                if !axis.values.iter().any(|&x| x.to_bits() == v.to_bits()) {
                    axis.values.push(v);
                }
            }
            records.push(Record { point: nums[..n_axes].to_vec(), values: nums[n_axes..].to_vec() });
        }
        Ok(SweepResult { axes, metrics: header[n_axes..].to_vec(), records, metadata: Metadata::default() })
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
