//! Parameter sweeps, optimum search, temperature thresholds, and
//! persistence of sweep records.
//!
//! Swept values are held in external units (Hz for rates and detunings,
//! kelvin, seconds) and converted to angular units where the model is
//! built, so persisted files carry the same numbers the CLI accepts.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::constants::TWO_PI;
use crate::covariance::ModePair;
use crate::dynamics::LinearModel;
use crate::entanglement::log_negativity;
use crate::filters::FilterPair;
use crate::params::SystemParams;
use crate::spectrum::{extract_bipartite, output_cm, QuadratureSettings, SpectrumError};

/// E_N at or below this value counts as "no entanglement" in threshold
/// searches; E_N is a max(0, .) and dips through zero smoothly, so an exact
/// zero test would sit on quadrature noise.
pub const EN_ZERO_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown axis '{0}' (expected G_a, G_b, kappa_m, T, tau, detuning_a2, detuning_b1)")]
    UnknownAxis(String),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("no stable point in the search bracket")]
    NoStablePoint,
    #[error("entanglement already below {EN_ZERO_THRESHOLD} at the low-temperature end")]
    AlreadyZero,
    #[error("E_N still above {EN_ZERO_THRESHOLD} at T_max = {0} K; threshold not bracketed")]
    NotBracketed(f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Entanglement(#[from] crate::entanglement::EntanglementError),
}

/// Sweepable parameters. External units: Hz for the angular quantities
/// (converted by 2 pi on application), kelvin for T, seconds for tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    GA,
    GB,
    KappaM,
    Temperature,
    Tau,
    DetuningA2,
    DetuningB1,
}

impl AxisName {
    /// Column header used in persisted files.
    pub fn column_name(self) -> &'static str {
        match self {
            AxisName::GA => "G_a_hz",
            AxisName::GB => "G_b_hz",
            AxisName::KappaM => "kappa_m_hz",
            AxisName::Temperature => "T_kelvin",
            AxisName::Tau => "tau_s",
            AxisName::DetuningA2 => "detuning_a2_hz",
            AxisName::DetuningB1 => "detuning_b1_hz",
        }
    }

    fn from_column(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.column_name() == name)
    }

    const ALL: [AxisName; 7] = [
        AxisName::GA,
        AxisName::GB,
        AxisName::KappaM,
        AxisName::Temperature,
        AxisName::Tau,
        AxisName::DetuningA2,
        AxisName::DetuningB1,
    ];

    /// Apply an external-unit value to the parameter set / filters.
    fn apply(self, value: f64, params: &mut SystemParams, filters: &mut FilterPair) {
        match self {
            AxisName::GA => params.g_a = TWO_PI * value,
            AxisName::GB => params.g_b = TWO_PI * value,
            AxisName::KappaM => params.kappa_m = TWO_PI * value,
            AxisName::Temperature => params.temperature = value,
            AxisName::Tau => {
                filters.a2.tau = value;
                filters.b1.tau = value;
            }
            AxisName::DetuningA2 => filters.a2.detuning = TWO_PI * value,
            AxisName::DetuningB1 => filters.b1.detuning = TWO_PI * value,
        }
    }
}

impl std::str::FromStr for AxisName {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "G_a" | "G_a_hz" => Ok(AxisName::GA),
            "G_b" | "G_b_hz" => Ok(AxisName::GB),
            "kappa_m" | "kappa_m_hz" => Ok(AxisName::KappaM),
            "T" | "T_kelvin" => Ok(AxisName::Temperature),
            "tau" | "tau_s" => Ok(AxisName::Tau),
            "detuning_a2" | "detuning_a2_hz" => Ok(AxisName::DetuningA2),
            "detuning_b1" | "detuning_b1_hz" => Ok(AxisName::DetuningB1),
            other => Err(SweepError::UnknownAxis(other.to_owned())),
        }
    }
}

impl std::fmt::Display for AxisName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.column_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log,
}

/// One sweep axis in external units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.points == 0 {
            return Err(SweepError::BadGrid("axis needs at least 1 point".into()));
        }
        if self.points >= 2 && !(self.start < self.stop) {
            return Err(SweepError::BadGrid(format!(
                "{}: start {} must be below stop {}",
                self.name, self.start, self.stop
            )));
        }
        if self.scale == AxisScale::Log && !(self.start > 0.0) {
            return Err(SweepError::BadGrid(format!(
                "{}: log scale requires start > 0",
                self.name
            )));
        }
        Ok(())
    }

    pub fn value_at(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.start;
        }
        let f = i as f64 / (self.points - 1) as f64;
        match self.scale {
            AxisScale::Linear => self.start + (self.stop - self.start) * f,
            AxisScale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * f).exp(),
        }
    }
}

/// Up to two sweep axes; records iterate the first axis outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self, SweepError> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(SweepError::BadGrid(format!(
                "expected 1 or 2 axes, got {}",
                axes.len()
            )));
        }
        for ax in &axes {
            ax.validate()?;
        }
        Ok(Self { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the flattened row-major index.
    pub fn coords(&self, idx: usize) -> Vec<(AxisName, f64)> {
        match self.axes.len() {
            1 => vec![(self.axes[0].name, self.axes[0].value_at(idx))],
            2 => {
                let inner = self.axes[1].points;
                vec![
                    (self.axes[0].name, self.axes[0].value_at(idx / inner)),
                    (self.axes[1].name, self.axes[1].value_at(idx % inner)),
                ]
            }
            _ => unreachable!("GridSpec::new enforces 1..=2 axes"),
        }
    }
}

/// One evaluated parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    /// Swept values in external units, ordered as the grid axes.
    pub coords: Vec<(String, f64)>,
    pub stable: bool,
    pub marginal: bool,
    /// Logarithmic negativity; None for unstable points (never 0).
    pub e_n: Option<f64>,
    pub integral_error: f64,
    pub panels: usize,
    /// Wall-clock seconds; only populated when timing is requested.
    pub runtime_s: Option<f64>,
}

/// Everything needed to evaluate one parameter point.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub base: SystemParams,
    pub filters: FilterPair,
    /// Fixed quadrature settings; None derives defaults per point (the
    /// window scales with the point's rates).
    pub quad: Option<QuadratureSettings>,
    pub timing: bool,
}

impl SweepContext {
    pub fn new(base: SystemParams, filters: FilterPair) -> Self {
        Self {
            base,
            filters,
            quad: None,
            timing: false,
        }
    }

    fn settings_for(&self, model: &LinearModel, filters: &FilterPair) -> QuadratureSettings {
        self.quad.unwrap_or_else(|| {
            let mut s = QuadratureSettings::for_model(model, filters);
            // narrow filters push sinc oscillation far past the seeded
            // lobes; give those points a deeper panel budget
            if filters.a2.tau.max(filters.b1.tau) > 1.2e-5 {
                s.max_panels = 1_000_000;
            }
            s
        })
    }

    /// Evaluate E_N of the output bipartition at one point. Unstable points
    /// are data (E_N = None), not errors. A quadrature that exhausts its
    /// panel budget degrades to its best estimate; the recorded
    /// integral_error exposes it.
    pub fn evaluate(&self, coords: &[(AxisName, f64)]) -> Result<SweepRecord, SweepError> {
        let t0 = self.timing.then(std::time::Instant::now);
        let mut params = self.base;
        let mut filters = self.filters;
        for (name, value) in coords {
            name.apply(*value, &mut params, &mut filters);
        }
        let named: Vec<(String, f64)> = coords
            .iter()
            .map(|(n, v)| (n.column_name().to_owned(), *v))
            .collect();

        let model = LinearModel::new(&params)?;
        let stability = model.stability()?;
        if !stability.stable {
            return Ok(SweepRecord {
                coords: named,
                stable: false,
                marginal: false,
                e_n: None,
                integral_error: 0.0,
                panels: 0,
                runtime_s: t0.map(|t| t.elapsed().as_secs_f64()),
            });
        }
        let settings = self.settings_for(&model, &filters);
        let (v6, diags) = match output_cm(&model, &filters, &settings) {
            Ok(pair) => pair,
            Err(SpectrumError::Convergence { best, .. }) => *best,
            Err(other) => return Err(other.into()),
        };
        let v4 = extract_bipartite(&v6, ModePair::A2B1)?;
        let e_n = log_negativity(&v4)?;
        Ok(SweepRecord {
            coords: named,
            stable: true,
            marginal: stability.marginal,
            e_n: Some(e_n),
            integral_error: diags.integral_error,
            panels: diags.panels,
            runtime_s: t0.map(|t| t.elapsed().as_secs_f64()),
        })
    }
}

/// Evaluate every grid point (in parallel; output order is row-major and
/// independent of the worker count).
pub fn sweep_grid(ctx: &SweepContext, grid: &GridSpec) -> Result<Vec<SweepRecord>, SweepError> {
    (0..grid.len())
        .into_par_iter()
        .map(|idx| ctx.evaluate(&grid.coords(idx)))
        .collect()
}

/// Log-spaced sweep over the shared filter duration.
pub fn sweep_tau(
    ctx: &SweepContext,
    tau_start: f64,
    tau_stop: f64,
    points: usize,
) -> Result<Vec<SweepRecord>, SweepError> {
    let grid = GridSpec::new(vec![Axis {
        name: AxisName::Tau,
        start: tau_start,
        stop: tau_stop,
        points,
        scale: AxisScale::Log,
    }])?;
    sweep_grid(ctx, &grid)
}

fn en_at_gb(ctx: &SweepContext, g_b_hz: f64) -> Result<Option<f64>, SweepError> {
    let rec = ctx.evaluate(&[(AxisName::GB, g_b_hz)])?;
    Ok(rec.e_n)
}

/// Maximize E_N over G_b at fixed everything else: 21-point coarse scan of
/// the bracket, then golden-section refinement to 0.01 MHz (external), with
/// ties broken toward smaller G_b. Bracket in external Hz.
pub fn optimize_gb(
    ctx: &SweepContext,
    bracket_hz: (f64, f64),
) -> Result<(f64, f64), SweepError> {
    let (lo, hi) = bracket_hz;
    if !(lo < hi) {
        return Err(SweepError::BadGrid(format!(
            "bracket ({lo}, {hi}) is empty"
        )));
    }
    const COARSE: usize = 21;
    let coarse: Vec<(f64, Option<f64>)> = (0..COARSE)
        .into_par_iter()
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (COARSE - 1) as f64;
            en_at_gb(ctx, x).map(|en| (x, en))
        })
        .collect::<Result<_, _>>()?;
    let mut best_i = None;
    let mut best_en = f64::NEG_INFINITY;
    for (i, (_, en)) in coarse.iter().enumerate() {
        if let Some(en) = en {
            // strictly-greater keeps the smallest argmax on ties
            if *en > best_en {
                best_en = *en;
                best_i = Some(i);
            }
        }
    }
    let Some(best_i) = best_i else {
        return Err(SweepError::NoStablePoint);
    };

    // golden-section on the interval spanned by the coarse neighbours
    let mut a = if best_i == 0 {
        coarse[0].0
    } else {
        coarse[best_i - 1].0
    };
    let mut b = if best_i + 1 == COARSE {
        coarse[COARSE - 1].0
    } else {
        coarse[best_i + 1].0
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let tol = 0.01e6; // 0.01 MHz on G_b
    let f = |x: f64, ctx: &SweepContext| -> Result<f64, SweepError> {
        Ok(en_at_gb(ctx, x)?.unwrap_or(f64::NEG_INFINITY))
    };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1, ctx)?;
    let mut f2 = f(x2, ctx)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1, ctx)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2, ctx)?;
        }
    }
    let (x_star, f_star) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    let (x_star, f_star) = if best_en > f_star {
        (coarse[best_i].0, best_en)
    } else {
        (x_star, f_star)
    };
    if !f_star.is_finite() {
        return Err(SweepError::NoStablePoint);
    }
    Ok((x_star, f_star))
}

/// Bisect the temperature at which E_N first drops to zero (to within
/// [`EN_ZERO_THRESHOLD`]); `tol` kelvin on the returned threshold.
pub fn temperature_threshold(
    ctx: &SweepContext,
    t_max: f64,
    tol: f64,
) -> Result<f64, SweepError> {
    let en_at = |t: f64| -> Result<f64, SweepError> {
        let rec = ctx.evaluate(&[(AxisName::Temperature, t)])?;
        Ok(rec.e_n.unwrap_or(0.0))
    };
    let t_lo0 = ctx.base.temperature;
    if en_at(t_lo0)? <= EN_ZERO_THRESHOLD {
        return Err(SweepError::AlreadyZero);
    }
    if en_at(t_max)? > EN_ZERO_THRESHOLD {
        return Err(SweepError::NotBracketed(t_max));
    }
    let (mut lo, mut hi) = (t_lo0, t_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if en_at(mid)? > EN_ZERO_THRESHOLD {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PersistFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for PersistFormat {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(PersistFormat::Csv),
            "jsonl" | "json-lines" | "jsonlines" => Ok(PersistFormat::JsonLines),
            other => Err(SweepError::BadGrid(format!("unknown format '{other}'"))),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> SweepError {
    SweepError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write records to disk. CSV: header of axis columns plus the fixed
/// fields, one record per row, E_N empty for unstable points. JSON lines:
/// one object per record, E_N null. Floats are written in Rust's shortest
/// round-trip form, so read_records recovers them exactly.
pub fn persist(
    path: &Path,
    axes: &[AxisName],
    records: &[SweepRecord],
    format: PersistFormat,
) -> Result<(), SweepError> {
    let timing = records.iter().any(|r| r.runtime_s.is_some());
    let mut out = String::new();
    match format {
        PersistFormat::Csv => {
            let mut header: Vec<String> =
                axes.iter().map(|a| a.column_name().to_owned()).collect();
            header.extend(
                ["stable", "marginal", "E_N", "integral_error", "panels"]
                    .iter()
                    .map(|s| s.to_string()),
            );
            if timing {
                header.push("runtime_s".into());
            }
            out.push_str(&header.join(","));
            out.push('\n');
            for r in records {
                let mut row: Vec<String> = r.coords.iter().map(|(_, v)| v.to_string()).collect();
                row.push(r.stable.to_string());
                row.push(r.marginal.to_string());
                row.push(r.e_n.map(|v| v.to_string()).unwrap_or_default());
                row.push(r.integral_error.to_string());
                row.push(r.panels.to_string());
                if timing {
                    row.push(r.runtime_s.map(|v| v.to_string()).unwrap_or_default());
                }
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        PersistFormat::JsonLines => {
            for r in records {
                let mut obj = serde_json::Map::new();
                for (name, v) in &r.coords {
                    obj.insert(name.clone(), serde_json::json!(v));
                }
                obj.insert("stable".into(), serde_json::json!(r.stable));
                obj.insert("marginal".into(), serde_json::json!(r.marginal));
                obj.insert("E_N".into(), serde_json::json!(r.e_n));
                obj.insert("integral_error".into(), serde_json::json!(r.integral_error));
                obj.insert("panels".into(), serde_json::json!(r.panels));
                if let Some(rt) = r.runtime_s {
                    obj.insert("runtime_s".into(), serde_json::json!(rt));
                }
                out.push_str(&serde_json::Value::Object(obj).to_string());
                out.push('\n');
            }
        }
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read records back; the inverse of [`persist`].
pub fn read_records(
    path: &Path,
    format: PersistFormat,
) -> Result<(Vec<AxisName>, Vec<SweepRecord>), SweepError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let parse_err = |message: String| SweepError::Parse {
        path: path.display().to_string(),
        message,
    };
    match format {
        PersistFormat::Csv => {
            let mut lines = text.lines();
            let header = lines
                .next()
                .ok_or_else(|| parse_err("empty file".into()))?;
            let cols: Vec<&str> = header.split(',').collect();
            let mut axes = Vec::new();
            for c in &cols {
                if let Some(a) = AxisName::from_column(c) {
                    axes.push(a);
                } else {
                    break;
                }
            }
            let n_axes = axes.len();
            let timing = cols.last() == Some(&"runtime_s");
            let mut records = Vec::new();
            for (lineno, line) in lines.enumerate() {
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != cols.len() {
                    return Err(parse_err(format!(
                        "line {}: {} fields, expected {}",
                        lineno + 2,
                        fields.len(),
                        cols.len()
                    )));
                }
                let fval = |s: &str| -> Result<f64, SweepError> {
                    s.parse()
                        .map_err(|e| parse_err(format!("line {}: {e}", lineno + 2)))
                };
                let coords = axes
                    .iter()
                    .zip(&fields[..n_axes])
                    .map(|(a, s)| Ok((a.column_name().to_owned(), fval(s)?)))
                    .collect::<Result<Vec<_>, SweepError>>()?;
                let e_n_field = fields[n_axes + 2];
                records.push(SweepRecord {
                    coords,
                    stable: fields[n_axes] == "true",
                    marginal: fields[n_axes + 1] == "true",
                    e_n: if e_n_field.is_empty() {
                        None
                    } else {
                        Some(fval(e_n_field)?)
                    },
                    integral_error: fval(fields[n_axes + 3])?,
                    panels: fields[n_axes + 4]
                        .parse()
                        .map_err(|e| parse_err(format!("line {}: {e}", lineno + 2)))?,
                    runtime_s: if timing && !fields[n_axes + 5].is_empty() {
                        Some(fval(fields[n_axes + 5])?)
                    } else {
                        None
                    },
                });
            }
            Ok((axes, records))
        }
        PersistFormat::JsonLines => {
            let mut axes: Vec<AxisName> = Vec::new();
            let mut records = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let v: serde_json::Value = serde_json::from_str(line)
                    .map_err(|e| parse_err(format!("line {}: {e}", lineno + 1)))?;
                let obj = v
                    .as_object()
                    .ok_or_else(|| parse_err(format!("line {}: not an object", lineno + 1)))?;
                let mut coords = Vec::new();
                for (key, val) in obj {
                    if let Some(a) = AxisName::from_column(key) {
                        coords.push((a.column_name().to_owned(), val.as_f64().unwrap_or(f64::NAN)));
                        if records.is_empty() && !axes.contains(&a) {
                            axes.push(a);
                        }
                    }
                }
                records.push(SweepRecord {
                    coords,
                    stable: obj["stable"].as_bool().unwrap_or(false),
                    marginal: obj["marginal"].as_bool().unwrap_or(false),
                    e_n: obj["E_N"].as_f64(),
                    integral_error: obj["integral_error"].as_f64().unwrap_or(f64::NAN),
                    panels: obj["panels"].as_u64().unwrap_or(0) as usize,
                    runtime_s: obj.get("runtime_s").and_then(|v| v.as_f64()),
                });
            }
            Ok((axes, records))
        }
    }
}

/// gnuplot-compatible nonuniform matrix block for a 2-axis grid:
/// first row holds the first-axis (column) coordinates, each following row
/// starts with the second-axis (row) coordinate. Unstable cells are "nan".
pub fn write_grid_matrix(
    path: &Path,
    grid: &GridSpec,
    records: &[SweepRecord],
) -> Result<(), SweepError> {
    if grid.axes.len() != 2 {
        return Err(SweepError::BadGrid(
            "matrix output needs a 2-axis grid".into(),
        ));
    }
    let (n0, n1) = (grid.axes[0].points, grid.axes[1].points);
    if records.len() != n0 * n1 {
        return Err(SweepError::BadGrid(format!(
            "{} records for a {}x{} grid",
            records.len(),
            n0,
            n1
        )));
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut line = vec![n0.to_string()];
    line.extend((0..n0).map(|i| grid.axes[0].value_at(i).to_string()));
    writeln!(f, "{}", line.join(" ")).map_err(|e| io_err(path, e))?;
    for j in 0..n1 {
        let mut row = vec![grid.axes[1].value_at(j).to_string()];
        for i in 0..n0 {
            let rec = &records[i * n1 + j];
            row.push(rec.e_n.map(|v| v.to_string()).unwrap_or_else(|| "nan".into()));
        }
        writeln!(f, "{}", row.join(" ")).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}
