//! Time-marching driver with snapshots and energy audits.

use crate::energy::{audit_step, discrete_energy, envelope_rate, EnergyLedger, PhaseView};
use crate::error::{Error, Result};
use crate::interface::Regime;
use crate::problem::{Problem, SimState};
use crate::scalar::Scalar;
use crate::solver::{assemble_rhs, rk4_step_from, stable_dt, RhsOutput};

/// State plus the interface diagnostics at that instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    pub state: SimState<T>,
    pub u_tilde: T,
    pub a_v_delta: T,
}

/// Energy after each step and the data-only bound integrated alongside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint<T> {
    pub time: T,
    pub energy: T,
    /// `E(0) + ∫ envelope rate`, integrated with the step's own stage weights.
    pub bound: T,
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    /// Index of the step that could not be completed.
    pub step: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary<T> {
    pub steps_requested: usize,
    pub steps_taken: usize,
    pub dt: T,
    pub final_time: T,
    pub final_x_delta: T,
    pub t_min: T,
    pub t_max: T,
    pub max_gcl_residual: T,
    pub max_identity_residual: T,
    pub max_closed_form_residual: T,
    /// Largest single-step energy increase (negative when energy always drops).
    pub max_energy_increase: T,
    /// Largest `E - bound` over the run.
    pub max_bound_excess: T,
    pub regimes: Vec<Regime>,
    pub audit_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub ledger: Vec<EnergyLedger<T>>,
    pub energy_trace: Vec<EnergyPoint<T>>,
    pub summary: RunSummary<T>,
    pub failure: Option<RunFailure>,
}

impl<T> RunReport<T> {
    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }
}

/// Step count and effective step for reaching `t_end` with steps no larger than `dt`.
pub fn step_plan<T: Scalar>(t_end: T, dt: T) -> (usize, T) {
    if t_end <= T::zero() {
        return (0, dt);
    }
    let ratio = (t_end / dt).to_f64().unwrap_or(f64::INFINITY);
    let n = (ratio - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / T::from_usize_lossy(n))
}

fn energy_of<T: Scalar>(state: &SimState<T>, rhs: &RhsOutput<T>, problem: &Problem<T>) -> Result<T> {
    discrete_energy(
        &PhaseView {
            temps: &state.t_v,
            op: &problem.op_v,
            beta: problem.vapor.beta(),
            k: problem.vapor.k,
            jacobian: rhs.j_v,
        },
        &PhaseView {
            temps: &state.t_l,
            op: &problem.op_l,
            beta: problem.liquid.beta(),
            k: problem.liquid.k,
            jacobian: rhs.j_l,
        },
    )
}

fn snapshot<T: Scalar>(step: usize, state: &SimState<T>, rhs: &RhsOutput<T>) -> Snapshot<T> {
    Snapshot {
        step,
        state: state.clone(),
        u_tilde: rhs.interface.u_tilde,
        a_v_delta: rhs.interface.a_v_delta,
    }
}

struct Tracker<T> {
    t_min: T,
    t_max: T,
    max_gcl: T,
    max_identity: T,
    max_closed: T,
    max_increase: T,
    max_excess: T,
    regimes: Vec<Regime>,
    violations: usize,
}

impl<T: Scalar> Tracker<T> {
    fn observe_state(&mut self, s: &SimState<T>) {
        for &v in s.t_v.iter().chain(&s.t_l) {
            self.t_min = self.t_min.min(v);
            self.t_max = self.t_max.max(v);
        }
    }

    fn observe_audit(&mut self, led: &EnergyLedger<T>) {
        self.max_gcl = self.max_gcl.max(led.gcl_residual);
        self.max_identity = self.max_identity.max(led.identity_residual);
        self.max_closed = self.max_closed.max(led.closed_form_residual);
        if !self.regimes.contains(&led.regime) {
            self.regimes.push(led.regime);
            self.regimes.sort();
        }
        if !led.violations.is_empty() {
            log::warn!("audit at t = {}: {}", led.time, led.violations.join("; "));
            self.violations += 1;
        }
    }
}

/// Advances `initial` to `t_end`, recording snapshots every
/// `snapshot_every` steps, audits every `audit_every` steps (both always at
/// the first and last step) and the energy after every step.
///
/// Errors are returned only for an invalid set-up; failures during the run
/// are reported in [`RunReport::failure`] alongside the partial records.
pub fn run_simulation<T: Scalar>(problem: &Problem<T>, initial: &SimState<T>) -> Result<RunReport<T>> {
    let cfg = &problem.config;
    cfg.validate()?;
    let dt_max = match cfg.dt {
        Some(dt) => dt,
        None => stable_dt(problem, initial)?,
    };
    let (n_steps, dt) = step_plan(cfg.t_end, dt_max);
    log::info!("{n_steps} steps of dt = {dt}");
    let margin = problem.depletion_margin();

    let mut tr = Tracker {
        t_min: T::infinity(),
        t_max: T::neg_infinity(),
        max_gcl: T::zero(),
        max_identity: T::zero(),
        max_closed: T::zero(),
        max_increase: T::neg_infinity(),
        max_excess: T::neg_infinity(),
        regimes: Vec::new(),
        violations: 0,
    };
    let mut snapshots = Vec::new();
    let mut ledger = Vec::new();
    let mut trace = Vec::with_capacity(n_steps + 1);
    let mut failure = None;

    let mut state = initial.clone();
    let mut rhs = assemble_rhs(&state, problem)?;
    let e0 = energy_of(&state, &rhs, problem)?;
    let mut bound = e0;
    let mut energy = e0;
    trace.push(EnergyPoint {
        time: state.time,
        energy: e0,
        bound,
    });
    tr.observe_state(&state);

    let mut step = 0;
    loop {
        let last = step == n_steps;
        if step % cfg.snapshot_every == 0 || last {
            snapshots.push(snapshot(step, &state, &rhs));
        }
        if step % cfg.audit_every == 0 || last {
            let led = audit_step(&state, &rhs, problem)?;
            tr.observe_audit(&led);
            ledger.push(led);
        }
        if last {
            break;
        }

        let outcome = match rk4_step_from(&state, Some(rhs.clone()), dt, problem) {
            Ok(o) => o,
            Err(e) => {
                failure = Some(RunFailure {
                    step,
                    error: e.at_step(step),
                });
                break;
            }
        };
        let weights = [T::one(), T::two(), T::two(), T::one()];
        let mut rate = T::zero();
        for (w, (s, r)) in weights.iter().zip(&outcome.stages) {
            rate += *w * envelope_rate(s, r, problem);
        }
        bound += dt / T::lit(6.0) * rate;

        let next = outcome.state;
        if next.x_delta - problem.x0 < margin || problem.xn - next.x_delta < margin {
            let phase = if next.x_delta - problem.x0 < margin { "vapor" } else { "liquid" };
            failure = Some(RunFailure {
                step,
                error: Error::PhaseDepletion {
                    phase,
                    x_delta: next.x_delta.to_f64().unwrap_or(f64::NAN),
                }
                .at_step(step),
            });
            break;
        }
        rhs = match assemble_rhs(&next, problem) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(RunFailure {
                    step,
                    error: e.at_step(step),
                });
                break;
            }
        };
        state = next;
        step += 1;

        let e = energy_of(&state, &rhs, problem)?;
        tr.max_increase = tr.max_increase.max(e - energy);
        tr.max_excess = tr.max_excess.max(e - bound);
        energy = e;
        trace.push(EnergyPoint {
            time: state.time,
            energy: e,
            bound,
        });
        tr.observe_state(&state);
    }
    if let Some(f) = &failure {
        log::error!("run stopped at step {}: {}", f.step, f.error);
    }

    let summary = RunSummary {
        steps_requested: n_steps,
        steps_taken: step,
        dt,
        final_time: state.time,
        final_x_delta: state.x_delta,
        t_min: tr.t_min,
        t_max: tr.t_max,
        max_gcl_residual: tr.max_gcl,
        max_identity_residual: tr.max_identity,
        max_closed_form_residual: tr.max_closed,
        max_energy_increase: if step == 0 { T::zero() } else { tr.max_increase },
        max_bound_excess: if step == 0 { T::zero() } else { tr.max_excess },
        regimes: tr.regimes,
        audit_violations: tr.violations,
    };
    Ok(RunReport {
        snapshots,
        ledger,
        energy_trace: trace,
        summary,
        failure,
    })
}

/// `sqrt(Σ J P (T - T*)²)` over both phases, against the manufactured
/// solution of `problem` at the state's own time.
pub fn manufactured_error<T: Scalar>(problem: &Problem<T>, state: &SimState<T>) -> Result<T> {
    let desc = problem
        .config
        .mms
        .as_ref()
        .ok_or_else(|| Error::Precondition("problem has no manufactured solution".into()))?;
    let exact = SimState::manufactured(problem, desc, state.time)?;
    let mesh = crate::mesh::build_mesh(
        problem.x0,
        problem.xn,
        state.x_delta,
        problem.config.n_v,
        problem.config.n_l,
    )?;
    let phase = |op: &crate::sbp::SbpOperator<T>, j: T, a: &[T], b: &[T]| -> T {
        let diff: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
        j * op.inner(&diff, &diff)
    };
    let e2 = phase(&problem.op_v, mesh.j_v, &state.t_v, &exact.t_v)
        + phase(&problem.op_l, mesh.j_l, &state.t_l, &exact.t_l);
    Ok(e2.sqrt())
}
