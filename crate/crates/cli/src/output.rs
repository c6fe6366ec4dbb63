//! CSV and JSON emission.
//!
//! Floats go through the csv serializer, which prints the shortest decimal
//! that round-trips to the same binary64 value.

use std::fs::File;
use std::path::Path;

use evapsbp::{EnergyLedger, Regime, RunReport, SimState, Snapshot};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const AUDIT_FILE: &str = "audit_ledger.csv";

pub const LEDGER_COLUMNS: [&str; 10] = [
    "time",
    "energy",
    "dissipation",
    "it_direct",
    "sat_direct",
    "itsat_closed",
    "bt_outer",
    "rate_measured",
    "identity_residual",
    "gcl_residual",
];

const SNAPSHOT_LEAD: [&str; 4] = ["time", "x_delta", "u_tilde", "a_v_delta"];

pub fn snapshot_header(n_v: usize, n_l: usize) -> Vec<String> {
    SNAPSHOT_LEAD
        .iter()
        .map(|s| s.to_string())
        .chain((0..n_v).map(|i| format!("T_v_{i}")))
        .chain((0..n_l).map(|i| format!("T_l_{i}")))
        .collect()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(CliError::csv(path))
}

pub fn write_snapshots(path: &Path, snapshots: &[Snapshot<f64>], n_v: usize, n_l: usize) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(snapshot_header(n_v, n_l)).map_err(CliError::csv(path))?;
    for s in snapshots {
        let row: Vec<f64> = [s.state.time, s.state.x_delta, s.u_tilde, s.a_v_delta]
            .into_iter()
            .chain(s.state.t_v.iter().copied())
            .chain(s.state.t_l.iter().copied())
            .collect();
        w.serialize(row).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

fn ledger_row(l: &EnergyLedger<f64>) -> [f64; 10] {
    [
        l.time,
        l.energy,
        l.dissipation,
        l.it_direct,
        l.sat_direct,
        l.itsat_closed,
        l.bt_outer,
        l.rate_measured,
        l.identity_residual,
        l.gcl_residual,
    ]
}

pub fn write_ledger(path: &Path, ledger: &[EnergyLedger<f64>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(LEDGER_COLUMNS).map_err(CliError::csv(path))?;
    for l in ledger {
        w.serialize(ledger_row(l)).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// A snapshot row read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow {
    pub state: SimState<f64>,
    pub u_tilde: f64,
    pub a_v_delta: f64,
}

/// Reads a snapshots file written by [`write_snapshots`].
pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRow>> {
    let malformed = |message: String| CliError::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(CliError::csv(path))?;
    let header = r.headers().map_err(CliError::csv(path))?.clone();
    if header.len() < SNAPSHOT_LEAD.len() || header.iter().zip(SNAPSHOT_LEAD).any(|(a, b)| a != b) {
        return Err(malformed(format!("header must start with {}", SNAPSHOT_LEAD.join(","))));
    }
    let n_v = header.iter().filter(|h| h.starts_with("T_v_")).count();
    let n_l = header.iter().filter(|h| h.starts_with("T_l_")).count();
    if SNAPSHOT_LEAD.len() + n_v + n_l != header.len() {
        return Err(malformed("unexpected columns".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<Vec<f64>>().enumerate() {
        let v = rec.map_err(CliError::csv(path))?;
        if v.len() != header.len() {
            return Err(malformed(format!("row {} has {} fields, expected {}", i + 1, v.len(), header.len())));
        }
        let (lead, temps) = v.split_at(SNAPSHOT_LEAD.len());
        rows.push(SnapshotRow {
            state: SimState {
                t_v: temps[..n_v].to_vec(),
                t_l: temps[n_v..].to_vec(),
                x_delta: lead[1],
                time: lead[0],
            },
            u_tilde: lead[2],
            a_v_delta: lead[3],
        });
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct FailureRecord {
    pub step: usize,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct FinalState {
    pub time: f64,
    pub x_delta: f64,
    pub t_v: Vec<f64>,
    pub t_l: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub status: &'static str,
    pub failure: Option<FailureRecord>,
    pub preset: String,
    pub seed: u64,
    pub steps_requested: usize,
    pub steps_taken: usize,
    pub dt: f64,
    pub final_state: Option<FinalState>,
    pub t_min: f64,
    pub t_max: f64,
    pub max_identity_residual: f64,
    pub max_closed_form_residual: f64,
    pub max_gcl_residual: f64,
    pub max_energy_increase: f64,
    pub max_bound_excess: f64,
    pub regimes: Vec<&'static str>,
    pub audit_violations: usize,
    pub wall_time_s: f64,
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Dissipative => "dissipative",
        Regime::Bounded => "bounded",
    }
}

impl Summary {
    pub fn new(report: &RunReport<f64>, preset: String, seed: u64, wall_time_s: f64) -> Self {
        let s = &report.summary;
        Summary {
            status: if report.is_success() { "ok" } else { "failed" },
            failure: report.failure.as_ref().map(|f| FailureRecord {
                step: f.step,
                error: f.error.to_string(),
            }),
            preset,
            seed,
            steps_requested: s.steps_requested,
            steps_taken: s.steps_taken,
            dt: s.dt,
            final_state: report.snapshots.last().map(|sn| FinalState {
                time: sn.state.time,
                x_delta: sn.state.x_delta,
                t_v: sn.state.t_v.clone(),
                t_l: sn.state.t_l.clone(),
            }),
            t_min: s.t_min,
            t_max: s.t_max,
            max_identity_residual: s.max_identity_residual,
            max_closed_form_residual: s.max_closed_form_residual,
            max_gcl_residual: s.max_gcl_residual,
            max_energy_increase: s.max_energy_increase,
            max_bound_excess: s.max_bound_excess,
            regimes: s.regimes.iter().map(|&r| regime_name(r)).collect(),
            audit_violations: s.audit_violations,
            wall_time_s,
        }
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    serde_json::to_writer_pretty(file, summary)?;
    Ok(())
}
