//! Grid sweeps over the absorber's parameters with deterministic CSV
//! output.
//!
//! A sweep names its axes, holds the remaining parameters fixed, and
//! evaluates one quantity per grid cell. Cells are independent, so they can
//! run on any number of workers; records are assembled in row-major axis
//! order regardless, and the emitted CSV is byte-identical across worker
//! counts. A failing cell becomes a sentinel record instead of aborting the
//! scan.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::iter::{IntoParallelIterator, ParallelIterator};

use crate::asymptotics::search_max_pe;
use crate::entanglement::{filter_project, lnp, split_state};
use crate::error::{Error, Result};
use crate::fock::{required_dim, thermal_state, DEFAULT_TAIL_TOL};
use crate::ion::{robust_first_violation, MeasurementModel};
use crate::jc::{apply, output_number_stats, repeated_absorption};
use crate::klyshko::detect;

/// Axis names a sweep may scan over.
pub const AXIS_NAMES: [&str; 7] = ["nbar", "gt", "pe", "D_f", "M", "order", "sigma"];

/// Pulse-area search window and grid resolution used by the asymptotic
/// quantity.
const ASYMPTOTIC_GT_RANGE: (f64, f64) = (0.0, 10.0);
const ASYMPTOTIC_GT_RESOLUTION: f64 = 1e-3;

/// One inclusive linearly spaced axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisSpec {
    pub fn new(name: &str, start: f64, stop: f64, step: f64) -> Result<Self> {
        if !AXIS_NAMES.contains(&name) {
            return Err(Error::InvalidSpec(format!(
                "unknown axis {name}; expected one of {}",
                AXIS_NAMES.join(", ")
            )));
        }
        if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
            return Err(Error::InvalidSpec(format!("axis {name} has non-finite bounds")));
        }
        if step <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "axis {name} needs a positive step, got {step}"
            )));
        }
        if start > stop {
            return Err(Error::InvalidSpec(format!(
                "axis {name} runs backwards: {start} > {stop}"
            )));
        }
        Ok(Self { name: name.into(), start, stop, step })
    }

    /// Number of grid points, endpoint included.
    pub fn len(&self) -> usize {
        // tolerate one part in 1e12 of rounding so inclusive endpoints
        // such as 0:5:0.1 keep their last point
        let q = (self.stop - self.start) / self.step;
        (q * (1.0 + 1e-12) + 1e-12).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid points start, start+step, ... computed directly from the index
    /// so no rounding accumulates.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.start + self.step * k as f64)
            .collect()
    }
}

/// What each grid cell evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Nonclassicality potential of the absorbed thermal state.
    Lnp,
    /// Potential after projecting both split modes below a cutoff.
    LnpFiltered,
    /// Potential after M ground-state absorption passes.
    LnpRepeat,
    /// Smallest violated witness order, if any.
    KlyshkoMinOrder,
    /// Smallest order violated under worst-case measurement shifts.
    KlyshkoRobustMinOrder,
    /// Largest detectable excitation probability at one Fock order.
    AsymptoticPeStar,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Lnp => "lnp",
            Quantity::LnpFiltered => "lnp_filtered",
            Quantity::LnpRepeat => "lnp_repeat",
            Quantity::KlyshkoMinOrder => "klyshko_min_order",
            Quantity::KlyshkoRobustMinOrder => "klyshko_robust_min_order",
            Quantity::AsymptoticPeStar => "asymptotic_pe_star",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "lnp" => Quantity::Lnp,
            "lnp_filtered" => Quantity::LnpFiltered,
            "lnp_repeat" => Quantity::LnpRepeat,
            "klyshko_min_order" => Quantity::KlyshkoMinOrder,
            "klyshko_robust_min_order" => Quantity::KlyshkoRobustMinOrder,
            "asymptotic_pe_star" => Quantity::AsymptoticPeStar,
            other => {
                return Err(Error::InvalidSpec(format!("unknown quantity {other}")));
            }
        })
    }

    /// Parameters the quantity reads, each of which must be an axis or
    /// fixed.
    pub fn needed_params(&self) -> &'static [&'static str] {
        match self {
            Quantity::Lnp => &["nbar", "gt", "pe"],
            Quantity::LnpFiltered => &["nbar", "gt", "pe", "D_f"],
            Quantity::LnpRepeat => &["nbar", "gt", "M"],
            Quantity::KlyshkoMinOrder => &["nbar", "gt", "pe", "order"],
            Quantity::KlyshkoRobustMinOrder => &["nbar", "gt", "sigma", "order"],
            Quantity::AsymptoticPeStar => &["order"],
        }
    }
}

/// A full sweep description: scanned axes, fixed parameters, quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<AxisSpec>,
    pub fixed: BTreeMap<String, f64>,
    pub quantity: Quantity,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for axis in &self.axes {
            if seen.contains(&axis.name.as_str()) {
                return Err(Error::InvalidSpec(format!("axis {} listed twice", axis.name)));
            }
            if self.fixed.contains_key(&axis.name) {
                return Err(Error::InvalidSpec(format!(
                    "{} is both an axis and fixed",
                    axis.name
                )));
            }
            seen.push(&axis.name);
            AxisSpec::new(&axis.name, axis.start, axis.stop, axis.step)?;
        }
        let needed = self.quantity.needed_params();
        for name in needed {
            if !seen.contains(name) && !self.fixed.contains_key(*name) {
                return Err(Error::InvalidSpec(format!(
                    "{} requires parameter {name}",
                    self.quantity.as_str()
                )));
            }
        }
        // the robust witness additionally accepts the measured-window size
        let extra_ok = |k: &str| {
            k == "populations" && self.quantity == Quantity::KlyshkoRobustMinOrder
        };
        for name in seen {
            if !needed.contains(&name) {
                return Err(Error::InvalidSpec(format!(
                    "{} does not use axis {name}",
                    self.quantity.as_str()
                )));
            }
        }
        for key in self.fixed.keys() {
            if !needed.contains(&key.as_str()) && !extra_ok(key) {
                return Err(Error::InvalidSpec(format!(
                    "{} does not use parameter {key}",
                    self.quantity.as_str()
                )));
            }
        }
        for (key, value) in &self.fixed {
            if !value.is_finite() {
                return Err(Error::InvalidSpec(format!("fixed {key} is not finite")));
            }
        }
        Ok(())
    }

    /// Total number of grid cells.
    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(AxisSpec::len).product()
    }
}

/// Auxiliary output attached to a record: a number or a short slug.
#[derive(Debug, Clone, PartialEq)]
pub enum AuxValue {
    Real(f64),
    Text(String),
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Axis coordinates in the order the `SweepSpec` listed them.
    pub coordinates: Vec<(String, f64)>,
    /// The evaluated quantity; None both for "no detection" results and
    /// for failed cells (which also carry an error aux entry).
    pub value: Option<f64>,
    pub aux: BTreeMap<String, AuxValue>,
}

fn error_slug(e: &Error) -> &'static str {
    match e {
        Error::InvalidDimension(_) => "invalid-dimension",
        Error::CorruptedState(_) => "corrupted-state",
        Error::TruncationLeakage { .. } => "truncation-leakage",
        Error::DistributionTooShort { .. } => "distribution-too-short",
        Error::UndefinedRatio => "undefined-ratio",
        Error::EigenNonConvergence { .. } => "eigen-non-convergence",
        Error::EmptyFilter { .. } => "empty-filter",
        Error::UnmeasurableOrder { .. } => "unmeasurable-order",
        Error::InvalidParameter(_) => "invalid-parameter",
        Error::InvalidSpec(_) => "invalid-spec",
        Error::Io(_) => "io",
    }
}

fn as_index(name: &str, x: f64, min: usize) -> Result<usize> {
    let rounded = x.round();
    if !x.is_finite() || (x - rounded).abs() > 1e-6 || rounded < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{name} must be a nonnegative integer, got {x}"
        )));
    }
    let idx = rounded as usize;
    if idx < min {
        return Err(Error::InvalidParameter(format!(
            "{name} must be at least {min}, got {x}"
        )));
    }
    Ok(idx)
}

struct Cell<'a> {
    coordinates: &'a [(String, f64)],
    fixed: &'a BTreeMap<String, f64>,
}

impl Cell<'_> {
    fn param(&self, name: &str) -> Result<f64> {
        self.coordinates
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .or_else(|| self.fixed.get(name).copied())
            .ok_or_else(|| Error::InvalidSpec(format!("missing parameter {name}")))
    }
}

type CellOutput = (Option<f64>, BTreeMap<String, AuxValue>);

/// The absorber enlarges its workspace by one level, so an input truncated
/// at the default tail tolerance stays below the leakage gate.
fn absorbed_thermal(nbar: f64, pe: f64, gt: f64) -> Result<crate::fock::DensityMatrix<f64>> {
    let dim = required_dim(nbar, DEFAULT_TAIL_TOL)?;
    apply(&thermal_state(nbar, dim)?, pe, gt)
}

fn evaluate(quantity: Quantity, cell: &Cell) -> Result<CellOutput> {
    let mut aux = BTreeMap::new();
    let value = match quantity {
        Quantity::Lnp => {
            let out = absorbed_thermal(cell.param("nbar")?, cell.param("pe")?, cell.param("gt")?)?;
            Some(lnp(&out)?)
        }
        Quantity::LnpFiltered => {
            let out = absorbed_thermal(cell.param("nbar")?, cell.param("pe")?, cell.param("gt")?)?;
            let max_level = as_index("D_f", cell.param("D_f")?, 0)?;
            let (kept, success) = filter_project(&split_state(&out)?, max_level)?;
            aux.insert("p_success".into(), AuxValue::Real(success));
            Some(kept.lnp()?)
        }
        Quantity::LnpRepeat => {
            let nbar = cell.param("nbar")?;
            let m = as_index("M", cell.param("M")?, 0)?;
            let dim = required_dim(nbar, DEFAULT_TAIL_TOL)?;
            let out = repeated_absorption(&thermal_state(nbar, dim)?, cell.param("gt")?, m)?;
            Some(lnp(&out)?)
        }
        Quantity::KlyshkoMinOrder => {
            let nbar = cell.param("nbar")?;
            let max_order = as_index("order", cell.param("order")?, 1)?;
            let dim = required_dim(nbar, DEFAULT_TAIL_TOL)?.max(max_order + 2);
            let stats = output_number_stats(nbar, cell.param("pe")?, cell.param("gt")?, dim)?;
            detect(&stats, max_order)?.first_violation.map(|o| o as f64)
        }
        Quantity::KlyshkoRobustMinOrder => {
            let nbar = cell.param("nbar")?;
            let max_order = as_index("order", cell.param("order")?, 1)?;
            let populations = match cell.fixed.get("populations") {
                Some(&p) => as_index("populations", p, max_order + 2)?,
                None => max_order + 2,
            };
            let model = MeasurementModel::new(
                cell.param("sigma")?,
                populations,
                (1..=max_order).collect(),
            )?;
            let dim = required_dim(nbar, DEFAULT_TAIL_TOL)?.max(max_order + 2);
            // the atom is reset to the ground state before every pass
            let stats = output_number_stats(nbar, 0.0, cell.param("gt")?, dim)?;
            robust_first_violation(&stats, &model)?.map(|o| o as f64)
        }
        Quantity::AsymptoticPeStar => {
            let n = as_index("order", cell.param("order")?, 1)?;
            let result = search_max_pe(n, ASYMPTOTIC_GT_RANGE, ASYMPTOTIC_GT_RESOLUTION)?;
            aux.insert("bound".into(), AuxValue::Real(result.bound));
            aux.insert("gt_star".into(), AuxValue::Real(result.gt_star));
            result.detected.then_some(result.pe_star)
        }
    };
    Ok((value, aux))
}

fn evaluate_cell(spec: &SweepSpec, grids: &[Vec<f64>], index: usize) -> SweepRecord {
    let mut rest = index;
    let mut coordinates = Vec::with_capacity(spec.axes.len());
    // row-major: the last axis varies fastest
    for (axis, grid) in spec.axes.iter().zip(grids).rev() {
        let k = rest % grid.len();
        rest /= grid.len();
        coordinates.push((axis.name.clone(), grid[k]));
    }
    coordinates.reverse();
    let cell = Cell { coordinates: &coordinates, fixed: &spec.fixed };
    match evaluate(spec.quantity, &cell) {
        Ok((value, aux)) => SweepRecord { coordinates, value, aux },
        Err(e) => {
            let mut aux = BTreeMap::new();
            aux.insert("error".into(), AuxValue::Text(error_slug(&e).into()));
            SweepRecord { coordinates, value: None, aux }
        }
    }
}

/// Evaluates the quantity at every grid point on `workers` threads.
///
/// Output order is row-major over the axes as listed and does not depend on
/// the worker count. Failing cells yield records with an empty value and an
/// error slug in the aux map; the sweep always completes.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    if workers == 0 {
        return Err(Error::InvalidParameter("worker count must be positive".into()));
    }
    let grids: Vec<Vec<f64>> = spec.axes.iter().map(AxisSpec::values).collect();
    let total = spec.cell_count();
    let records = if workers == 1 {
        (0..total).map(|i| evaluate_cell(spec, &grids, i)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        pool.install(|| {
            (0..total)
                .into_par_iter()
                .map(|i| evaluate_cell(spec, &grids, i))
                .collect()
        })
    };
    Ok(records)
}

/// Prints a real with 12 significant digits, plain decimal notation where
/// it fits, trimmed of trailing zeros.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let epos = sci.find('e').expect("exponent marker");
    let exp: i32 = sci[epos + 1..].parse().expect("exponent digits");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        let plain = format!("{x:.decimals$}");
        let trimmed = plain.trim_end_matches('0').trim_end_matches('.');
        trimmed.into()
    } else {
        let mantissa = sci[..epos].trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

/// Writes records as CSV: axis columns, then "value", then every aux key
/// seen anywhere, sorted. Empty fields stand for absent values. LF line
/// endings, trailing newline.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: &mut W) -> Result<()> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidSpec("no records to write".into()))?;
    let mut aux_keys: Vec<&str> = Vec::new();
    for record in records {
        for key in record.aux.keys() {
            if !aux_keys.contains(&key.as_str()) {
                aux_keys.push(key);
            }
        }
    }
    aux_keys.sort_unstable();
    let mut header: Vec<&str> = first.coordinates.iter().map(|(n, _)| n.as_str()).collect();
    header.push("value");
    header.extend(&aux_keys);
    out.write_all(header.join(",").as_bytes())?;
    out.write_all(b"\n")?;
    for record in records {
        let mut fields: Vec<String> =
            record.coordinates.iter().map(|(_, v)| format_real(*v)).collect();
        fields.push(record.value.map(format_real).unwrap_or_default());
        for key in &aux_keys {
            fields.push(match record.aux.get(*key) {
                Some(AuxValue::Real(v)) => format_real(*v),
                Some(AuxValue::Text(s)) => s.clone(),
                None => String::new(),
            });
        }
        out.write_all(fields.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// CSV bytes for a finished sweep; convenience over run_sweep + write_csv.
pub fn sweep_to_csv(spec: &SweepSpec, workers: usize) -> Result<Vec<u8>> {
    let records = run_sweep(spec, workers)?;
    let mut bytes = Vec::new();
    write_csv(&records, &mut bytes)?;
    Ok(bytes)
}
