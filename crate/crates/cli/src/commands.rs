//! Subcommand implementations. Each returns structured results; printing
//! and exit codes live in the binary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use evapsbp::energy::{CLOSED_FORM_TOL, GCL_TOL, IDENTITY_TOL};
use evapsbp::verify::{run_property_suite, Mutation, PropertyReport, VerifyOptions};
use evapsbp::{assemble_rhs, audit_step, manufactured_error, run_simulation, EnergyLedger, RunReport};

use crate::config::RunManifest;
use crate::error::{CliError, Result};
use crate::output::{self, Summary};

pub const DEFAULT_LEVELS: [usize; 3] = [33, 65, 129];

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Result of `run`: the in-memory report plus where it was written.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport<f64>,
    pub output_dir: PathBuf,
    pub wall_time_s: f64,
}

/// Runs the manifest's problem and writes the requested outputs. Partial
/// outputs are written when the solver fails mid-run.
pub fn cmd_run(manifest: &RunManifest) -> Result<RunOutcome> {
    prepare_dir(&manifest.output_dir)?;
    let setup = &manifest.setup;
    let problem = setup.problem()?;
    let init = setup.initial_state(&problem)?;
    let start = Instant::now();
    let report = run_simulation(&problem, &init)?;
    let wall = start.elapsed().as_secs_f64();

    let dir = &manifest.output_dir;
    if manifest.emit.snapshots {
        output::write_snapshots(
            &dir.join(output::SNAPSHOTS_FILE),
            &report.snapshots,
            setup.config.n_v,
            setup.config.n_l,
        )?;
    }
    if manifest.emit.ledger {
        output::write_ledger(&dir.join(output::LEDGER_FILE), &report.ledger)?;
    }
    if manifest.emit.summary {
        let summary = Summary::new(&report, manifest.preset.to_string(), manifest.seed, wall);
        output::write_summary(&dir.join(output::SUMMARY_FILE), &summary)?;
    }
    if let Some(f) = &report.failure {
        log::error!("run stopped at step {}: {}", f.step, f.error);
    }
    Ok(RunOutcome {
        report,
        output_dir: dir.clone(),
        wall_time_s: wall,
    })
}

/// Runs the property suite.
pub fn cmd_verify(seed: u64, samples: usize, mutation: Option<Mutation>) -> Result<Vec<PropertyReport>> {
    let opts = VerifyOptions {
        seed,
        samples,
        mutation,
        ..VerifyOptions::default()
    };
    Ok(run_property_suite(&opts)?)
}

pub fn format_property(p: &PropertyReport) -> String {
    format!(
        "{:<24} {}  max residual {:.3e} (tolerance {:.0e})",
        p.name,
        if p.passed { "PASS" } else { "FAIL" },
        p.max_residual,
        p.tolerance
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub nodes: usize,
    pub steps: usize,
    pub error: f64,
    /// Observed order against the previous (coarser) level.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub sbp_order: usize,
    pub levels: Vec<LevelResult>,
}

impl ConvergenceTable {
    pub fn min_order(&self) -> Option<f64> {
        self.levels.iter().filter_map(|l| l.order).reduce(f64::min)
    }
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sbp order {}", self.sbp_order)?;
        writeln!(f, "{:>6} {:>8} {:>14} {:>8}", "nodes", "steps", "error", "order")?;
        for l in &self.levels {
            let order = l.order.map_or("-".to_string(), |o| format!("{o:.3}"));
            writeln!(f, "{:>6} {:>8} {:>14.6e} {:>8}", l.nodes, l.steps, l.error, order)?;
        }
        Ok(())
    }
}

fn run_level(manifest: &RunManifest, n: usize) -> Result<LevelResult> {
    let mut setup = manifest.setup.clone();
    setup.config.n_v = n;
    setup.config.n_l = n;
    setup.config.snapshot_every = usize::MAX;
    let problem = setup.problem()?;
    let init = setup.initial_state(&problem)?;
    let report = run_simulation(&problem, &init)?;
    if let Some(f) = report.failure {
        return Err(CliError::Solver(f.error));
    }
    let last = report
        .snapshots
        .last()
        .expect("a run always records its final state");
    Ok(LevelResult {
        nodes: n,
        steps: report.summary.steps_taken,
        error: manufactured_error(&problem, &last.state)?,
        order: None,
    })
}

/// Runs the manufactured problem on every level (concurrently) and
/// reports observed orders between consecutive levels.
pub fn cmd_converge(manifest: &RunManifest, levels: &[usize]) -> Result<ConvergenceTable> {
    if levels.len() < 2 {
        return Err(CliError::Usage("converge needs at least two grid levels".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("grid levels must be strictly increasing".into()));
    }
    if manifest.setup.config.mms.is_none() {
        return Err(CliError::invalid("mms", "is required for converge"));
    }
    let results: Vec<Result<LevelResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&n| scope.spawn(move || run_level(manifest, n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("level thread panicked"))
            .collect()
    });
    let mut out: Vec<LevelResult> = results.into_iter().collect::<Result<_>>()?;
    for i in 1..out.len() {
        let (c, f) = (&out[i - 1], &out[i]);
        let ratio = (f.nodes - 1) as f64 / (c.nodes - 1) as f64;
        out[i].order = Some((c.error / f.error).ln() / ratio.ln());
    }
    Ok(ConvergenceTable {
        sbp_order: manifest.setup.config.sbp_order,
        levels: out,
    })
}

#[derive(Debug)]
pub struct AuditOutcome {
    pub ledger: Vec<EnergyLedger<f64>>,
    pub path: PathBuf,
    pub max_identity_residual: f64,
    pub max_closed_form_residual: f64,
    pub max_gcl_residual: f64,
    /// Rows whose audit flagged a violation, with its description.
    pub violations: Vec<(usize, String)>,
}

impl AuditOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
            && self.max_identity_residual <= IDENTITY_TOL
            && self.max_closed_form_residual <= CLOSED_FORM_TOL
            && self.max_gcl_residual <= GCL_TOL
    }
}

/// Re-runs the energy audit on every row of an existing snapshots file
/// and writes the resulting ledger next to the run's other outputs.
pub fn cmd_audit(manifest: &RunManifest, snapshots: &Path) -> Result<AuditOutcome> {
    let rows = output::read_snapshots(snapshots)?;
    let problem = manifest.setup.problem()?;
    let (n_v, n_l) = (problem.config.n_v, problem.config.n_l);
    let mut ledger = Vec::with_capacity(rows.len());
    let mut violations = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.state.t_v.len() != n_v || row.state.t_l.len() != n_l {
            return Err(CliError::Malformed {
                path: snapshots.to_path_buf(),
                message: format!(
                    "snapshot has {}+{} nodes but the configuration has {n_v}+{n_l}",
                    row.state.t_v.len(),
                    row.state.t_l.len()
                ),
            });
        }
        let rhs = assemble_rhs(&row.state, &problem).map_err(|e| evapsbp::Error::AtStep {
            step: i,
            source: Box::new(e),
        })?;
        let led = audit_step(&row.state, &rhs, &problem)?;
        if !led.violations.is_empty() {
            violations.push((i, led.violations.join("; ")));
        }
        ledger.push(led);
    }
    prepare_dir(&manifest.output_dir)?;
    let path = manifest.output_dir.join(output::AUDIT_FILE);
    output::write_ledger(&path, &ledger)?;
    let max = |f: fn(&EnergyLedger<f64>) -> f64| ledger.iter().map(f).fold(0.0, f64::max);
    Ok(AuditOutcome {
        max_identity_residual: max(|l| l.identity_residual),
        max_closed_form_residual: max(|l| l.closed_form_residual),
        max_gcl_residual: max(|l| l.gcl_residual),
        ledger,
        path,
        violations,
    })
}
