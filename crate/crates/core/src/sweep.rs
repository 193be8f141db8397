//! One-dimensional parameter scans with per-point stability filtering.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::solve_lyapunov;
use crate::dynamics::LinearModel;
use crate::entanglement::analyze;
use crate::error::{Error, Result, ValidationErrors};
use crate::model::{AtomicInjection, Config, Detuning};
use crate::spectra::{default_grid, linspace, squeezing_spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Bare cavity detuning as a multiple of each mirror frequency.
    DetuningRatio,
    /// Atom-field coupling, both modes (Hz).
    CouplingHz,
    /// Mechanical frequency, both mirrors (Hz).
    MechFreqHz,
    InjectRate,
    Rho0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Scalar(f64),
    Injection(AtomicInjection),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Scalar(x) => write!(f, "{x}"),
            AxisValue::Injection(r) => write!(f, "{}/{}/{}", r.rho_aa, r.rho_cc, r.rho_ca),
        }
    }
}

/// Requested per-row outputs; declaration order is the column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    DuanMirrors,
    DuanFields,
    SimonMirrors,
    SimonFields,
    SOutMin,
    Stability,
}

impl Output {
    pub const fn column(self) -> &'static str {
        match self {
            Output::DuanMirrors => "duan_mirrors",
            Output::DuanFields => "duan_fields",
            Output::SimonMirrors => "simon_mirrors",
            Output::SimonFields => "simon_fields",
            Output::SOutMin => "s_out_min",
            Output::Stability => "max_real_part",
        }
    }
}

/// Spectrum grid for `s_out_min`; defaults to the module default grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    /// Half-width of the symmetric grid (Hz).
    pub omega_max_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: Config,
    pub axis: Axis,
    pub values: Vec<AxisValue>,
    pub outputs: Vec<Output>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = ValidationErrors::default();
        if self.values.is_empty() {
            errors.push("values", "must contain at least one value");
        }
        for (k, v) in self.values.iter().enumerate() {
            match (self.axis, v) {
                (Axis::Rho0, AxisValue::Scalar(_)) => {
                    errors.push(format!("values[{k}]"), "rho0 axis needs {aa, cc, ca} objects")
                }
                (Axis::Rho0, AxisValue::Injection(r)) => r.check(&format!("values[{k}]"), &mut errors),
                (_, AxisValue::Injection(_)) => errors.push(format!("values[{k}]"), "expected a number"),
                (_, AxisValue::Scalar(x)) if !x.is_finite() => errors.push(format!("values[{k}]"), "must be finite"),
                _ => {}
            }
        }
        let mut seen = self.outputs.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.outputs.len() {
            errors.push("outputs", "duplicate entries");
        }
        if let Some(g) = self.grid {
            if g.points < 2 {
                errors.push("grid.points", "must be at least 2");
            }
            if !(g.omega_max_hz > 0.0 && g.omega_max_hz.is_finite()) {
                errors.push("grid.omega_max_hz", "must be positive and finite");
            }
        }
        errors.into_result(())
    }

    /// Outputs in canonical column order.
    pub fn ordered_outputs(&self) -> Vec<Output> {
        let mut out = self.outputs.clone();
        out.sort();
        out.dedup();
        out
    }
}

/// Applies one axis value to a copy of the base configuration.
pub fn apply_axis(base: &Config, axis: Axis, value: AxisValue) -> Result<Config> {
    let mut c = base.clone();
    match (axis, value) {
        (Axis::DetuningRatio, AxisValue::Scalar(x)) => c.cavity_detuning = Detuning::Ratio(x),
        (Axis::CouplingHz, AxisValue::Scalar(x)) => c.coupling = [x, x],
        (Axis::MechFreqHz, AxisValue::Scalar(x)) => c.mech_freq = [x, x],
        (Axis::InjectRate, AxisValue::Scalar(x)) => c.inject_rate = x,
        (Axis::Rho0, AxisValue::Injection(r)) => c.rho0 = r,
        _ => {
            return Err(Error::InvalidArgument { arg: "value", reason: format!("{value} does not fit axis {axis:?}") })
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: AxisValue,
    pub stable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duan_mirrors: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duan_fields: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simon_mirrors: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simon_fields: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_out_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_real_part: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(axis_value: AxisValue) -> Self {
        Self {
            axis_value,
            stable: false,
            duan_mirrors: None,
            duan_fields: None,
            simon_mirrors: None,
            simon_fields: None,
            s_out_min: None,
            max_real_part: None,
            error: None,
        }
    }

    pub fn get(&self, output: Output) -> Option<f64> {
        match output {
            Output::DuanMirrors => self.duan_mirrors,
            Output::DuanFields => self.duan_fields,
            Output::SimonMirrors => self.simon_mirrors,
            Output::SimonFields => self.simon_fields,
            Output::SOutMin => self.s_out_min,
            Output::Stability => self.max_real_part,
        }
    }
}

/// Runs one point; every failure is recorded in the row.
pub fn evaluate_point(spec: &SweepSpec, value: AxisValue) -> SweepRow {
    let mut row = SweepRow::empty(value);
    if let Err(e) = fill_row(spec, value, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill_row(spec: &SweepSpec, value: AxisValue, row: &mut SweepRow) -> Result<()> {
    let outputs = spec.ordered_outputs();
    let wants = |o: Output| outputs.contains(&o);
    let params = apply_axis(&spec.base, spec.axis, value)?.validate()?;
    let (_, model) = LinearModel::from_params(&params)?;
    let report = model.stability()?;
    if wants(Output::Stability) {
        row.max_real_part = Some(report.max_real_part);
    }
    if !report.stable {
        return Err(Error::Unstable { max_real_part: report.max_real_part });
    }
    row.stable = true;

    let needs_cm =
        [Output::DuanMirrors, Output::DuanFields, Output::SimonMirrors, Output::SimonFields].into_iter().any(wants);
    if needs_cm {
        let cm = solve_lyapunov(&model.a_mat, &model.d_mat)?;
        let ent = analyze(&cm)?;
        if wants(Output::DuanMirrors) {
            row.duan_mirrors = Some(ent.mirrors.duan.total);
        }
        if wants(Output::DuanFields) {
            row.duan_fields = Some(ent.fields.duan.total);
        }
        if wants(Output::SimonMirrors) {
            row.simon_mirrors = Some(ent.mirrors.simon.nu_min);
        }
        if wants(Output::SimonFields) {
            row.simon_fields = Some(ent.fields.simon.nu_min);
        }
    }
    if wants(Output::SOutMin) {
        let grid = match spec.grid {
            Some(g) => {
                let w = std::f64::consts::TAU * g.omega_max_hz;
                linspace(-w, w, g.points)
            }
            None => default_grid(params.omega_m),
        };
        let series = squeezing_spectrum(&model, &grid, false)?;
        row.s_out_min = series.minimum().map(|(_, v)| v);
    }
    Ok(())
}

/// Parallel sweep; rows come back in the order of `spec.values`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.values.par_iter().map(|&v| evaluate_point(spec, v)).collect())
}

pub fn run_sweep_serial(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.values.iter().map(|&v| evaluate_point(spec, v)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// CSV columns: axis_value, stable, then one per requested output in
/// canonical order. Missing values are empty cells.
pub fn emit<W: Write>(rows: &[SweepRow], outputs: &[Output], format: Format, writer: W) -> Result<()> {
    let mut cols: Vec<Output> = outputs.to_vec();
    cols.sort();
    cols.dedup();
    match format {
        Format::Json => {
            let mut w = writer;
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n").map_err(serde_json::Error::io)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            let mut header = vec!["axis_value", "stable"];
            header.extend(cols.iter().map(|o| o.column()));
            w.write_record(&header)?;
            for row in rows {
                let mut record = vec![row.axis_value.to_string(), row.stable.to_string()];
                record.extend(cols.iter().map(|&o| row.get(o).map(|x| x.to_string()).unwrap_or_default()));
                w.write_record(&record)?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
    }
    Ok(())
}

pub fn emit_to_path(rows: &[SweepRow], outputs: &[Output], format: Format, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    emit(rows, outputs, format, &mut buf)?;
    std::fs::write(path, buf).map_err(|source| Error::Io { path: path.to_owned(), source })
}
