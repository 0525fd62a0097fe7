//! Budget sweeps comparing interdiction with and without restructuring.
//!
//! `results.csv` holds only values that are reproducible from the inputs;
//! wall-clock times go to a separate timings table.

use std::io::Write;
use std::time::Duration;

use crate::ccg::{self, CcgConfig, CcgStatus, Mode};
use crate::error::{Error, Result};
use crate::instance::{Instance, Variant};
use crate::milp::MipLimits;

pub const RESULT_HEADER: [&str; 13] = [
    "dataset",
    "variant",
    "budget",
    "mode",
    "mfnip_flow",
    "mfnip_after_restructure",
    "mfnipr_lower",
    "mfnipr_upper",
    "gap",
    "iterations",
    "plans_visited",
    "status",
    "mfnip_status",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub variant: Variant,
    pub budget: f64,
    pub mode: Mode,
    pub mfnip_flow: f64,
    pub mfnip_after_restructure: f64,
    pub mfnipr_lower: f64,
    pub mfnipr_upper: f64,
    pub iterations: usize,
    pub plans_visited: usize,
    pub wall_seconds: f64,
    pub status: CcgStatus,
    /// Whether the restructuring-free model was solved to optimality.
    pub mfnip_optimal: bool,
}

impl ResultRow {
    /// `(U - L) / U`, 0 when `U` is 0.
    pub fn gap(&self) -> f64 {
        if self.mfnipr_upper.abs() <= f64::EPSILON {
            0.0
        } else {
            (self.mfnipr_upper - self.mfnipr_lower).max(0.0) / self.mfnipr_upper
        }
    }

    /// Extra flow the defender recovers by restructuring after the
    /// restructuring-free interdiction.
    pub fn restructuring_gain(&self) -> f64 {
        self.mfnip_after_restructure - self.mfnip_flow
    }

    /// MFNIP flow <= MFNIP-R bounds <= flow after restructuring the MFNIP plan.
    pub fn ordering_holds(&self, tol: f64) -> bool {
        self.mfnip_flow <= self.mfnipr_lower + tol
            && self.mfnipr_lower <= self.mfnipr_upper + tol
            && self.mfnipr_upper <= self.mfnip_after_restructure + tol
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            self.variant.to_string(),
            fmt_num(self.budget),
            self.mode.to_string(),
            fmt_num(self.mfnip_flow),
            fmt_num(self.mfnip_after_restructure),
            fmt_num(self.mfnipr_lower),
            fmt_num(self.mfnipr_upper),
            fmt_num(self.gap()),
            self.iterations.to_string(),
            self.plans_visited.to_string(),
            self.status.to_string(),
            if self.mfnip_optimal { "optimal" } else { "time_limit" }.to_string(),
        ]
    }
}

/// Nine significant digits, shortest form; round-off below 1e-9 prints as 0.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.abs() < 1e-9 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_budgets(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| Error::validation(format!("invalid budget {s:?}")))
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(Error::validation(format!("budget range {spec:?} must be start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step <= 0.0 || stop < start {
            return Err(Error::validation(format!("budget range {spec:?} is empty or has a non-positive step")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    spec.split(',').map(num).collect()
}

pub fn parse_modes(spec: &str) -> Result<Vec<Mode>> {
    spec.split(',').map(|m| m.trim().parse()).collect()
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub dataset: String,
    pub budgets: Vec<f64>,
    pub modes: Vec<Mode>,
    pub epsilon: f64,
    pub time_limit: Option<Duration>,
    pub leadership: bool,
}

/// Per-budget run times and plan counts with one column pair per mode.
pub struct TimingTable {
    modes: Vec<Mode>,
    rows: Vec<(f64, Vec<(f64, usize)>)>,
}

impl TimingTable {
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["budget".to_string()];
        header.extend(self.modes.iter().map(|m| format!("{m}_seconds")));
        header.extend(self.modes.iter().map(|m| format!("{m}_plans")));
        w.write_record(&header).map_err(csv_err)?;
        for (budget, cells) in &self.rows {
            let mut rec = vec![fmt_num(*budget)];
            rec.extend(cells.iter().map(|(s, _)| format!("{s:.3}")));
            rec.extend(cells.iter().map(|(_, p)| p.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Internal(format!("csv output failed: {e}"))
}

/// Runs every budget and mode, writing each result row as soon as it is known.
pub fn run_sweep<W: Write>(
    instance: &Instance,
    config: &SweepConfig,
    results: W,
) -> Result<(Vec<ResultRow>, TimingTable)> {
    let net = &instance.network;
    let rrules = instance.restructure_rules();
    let mut writer = csv::Writer::from_writer(results);
    writer.write_record(RESULT_HEADER).map_err(csv_err)?;
    writer.flush().map_err(|e| Error::Internal(e.to_string()))?;
    let mut rows = Vec::new();
    let mut timings = TimingTable {
        modes: config.modes.clone(),
        rows: Vec::new(),
    };
    for &budget in &config.budgets {
        let irules = instance.interdiction_rules(budget, config.leadership);
        let limits = MipLimits {
            time: config.time_limit,
            ..Default::default()
        };
        let (mfnip_flow, y_mfnip, mfnip_status) = ccg::solve_mfnip(net, &irules, &limits)?;
        let (after, _) = ccg::evaluate_after_plan(net, &rrules, &y_mfnip, &limits)?;
        let mut cells = Vec::new();
        for &mode in &config.modes {
            let ccg_config = CcgConfig {
                mode,
                epsilon: config.epsilon,
                time_limit: config.time_limit,
                ..Default::default()
            };
            let res = ccg::solve(net, &irules, &rrules, &ccg_config)?;
            let row = ResultRow {
                dataset: config.dataset.clone(),
                variant: instance.meta.variant,
                budget,
                mode,
                mfnip_flow,
                mfnip_after_restructure: after,
                mfnipr_lower: res.lower,
                mfnipr_upper: res.upper,
                iterations: res.iterations.len(),
                plans_visited: res.plans_visited,
                wall_seconds: res.wall_seconds,
                status: res.status,
                mfnip_optimal: mfnip_status == crate::milp::Status::Optimal,
            };
            writer.write_record(row.record()).map_err(csv_err)?;
            writer.flush().map_err(|e| Error::Internal(e.to_string()))?;
            cells.push((res.wall_seconds, res.plans_visited));
            rows.push(row);
        }
        timings.rows.push((budget, cells));
    }
    Ok((rows, timings))
}
