//! Semi-discrete right-hand side and explicit time stepping.
//!
//! Each phase is advanced in skew-symmetric split form
//!
//! ```text
//! β/2 ((J T)_τ + J T_τ + D A T + A D T) = k D (J⁻¹ D T) + SAT_interface + SAT_outer
//! ```
//!
//! with `A` the nodal transformed speeds `u - x_τ`. Because `J` is uniform
//! per phase, `(J T)_τ + J T_τ = J_τ T + 2 J T_τ`, which is solved for `T_τ`.

use crate::error::{Error, Result};
use crate::interface::{
    mesh_velocity, penalize, sat_contribution, select_penalties, wave_speeds,
    InterfaceState, PenaltySet,
};
use crate::mesh::{build_mesh, MeshState};
use crate::mms::{mms_source, Phase};
use crate::physics::MaterialProps;
use crate::problem::{Problem, SimState};
use crate::sbp::{SbpOperator, Side};
use crate::scalar::{max_abs, Scalar};

/// Time derivatives of the coupled system plus the interface snapshot they
/// were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsOutput<T> {
    pub dt_v: Vec<T>,
    pub dt_l: Vec<T>,
    pub dx_delta: T,
    pub interface: InterfaceState<T>,
    pub penalties: PenaltySet<T>,
    pub j_v: T,
    pub j_l: T,
    pub j_tau_v: T,
    pub j_tau_l: T,
    /// Nodal transformed speeds `u - x_τ`.
    pub speeds_v: Vec<T>,
    pub speeds_l: Vec<T>,
    /// Outer Dirichlet data used in this evaluation.
    pub bc_v: T,
    pub bc_l: T,
    /// Manufactured-solution forcing added to the spatial right-hand side.
    pub forcing_v: Option<Vec<T>>,
    pub forcing_l: Option<Vec<T>>,
}

/// Coefficients `(τ0, τ1)` of the outer weak Dirichlet condition.
///
/// `τ0 = -(β|a|/2 + c_stab k J⁻¹ / h)`; `τ1` cancels the boundary diffusive
/// flux term of the energy rate (`+k J⁻¹` at the first node, `-k J⁻¹` at the last).
pub fn outer_penalty_coefficients<T: Scalar>(
    beta: T,
    a_boundary: T,
    k: T,
    j_inv: T,
    spacing: T,
    c_stab: T,
    side: Side,
) -> (T, T) {
    let tau0 = -(a_boundary.abs() * beta / T::two() + c_stab * k * j_inv / spacing);
    let tau1 = match side {
        Side::First => k * j_inv,
        Side::Last => -k * j_inv,
    };
    (tau0, tau1)
}

/// Outer-boundary SAT vector `P⁻¹[τ0 e (T_b - g) + τ1 Dᵀ e (T_b - g)]`.
#[allow(clippy::too_many_arguments)]
pub fn outer_bc_sat<T: Scalar>(
    temps: &[T],
    bc_value: T,
    op: &SbpOperator<T>,
    beta: T,
    a_boundary: T,
    k: T,
    j_inv: T,
    side: Side,
    c_stab: T,
) -> Vec<T> {
    let (tau0, tau1) =
        outer_penalty_coefficients(beta, a_boundary, k, j_inv, op.spacing(), c_stab, side);
    let mismatch = temps[side.index(temps.len())] - bc_value;
    let mut out = vec![T::zero(); temps.len()];
    penalize(&mut out, op, side, tau0 * mismatch, tau1 * mismatch);
    out
}

struct PhaseInputs<'a, T> {
    name: &'static str,
    temps: &'a [T],
    grad: &'a [T],
    op: &'a SbpOperator<T>,
    mat: &'a MaterialProps<T>,
    jacobian: T,
    j_tau: T,
    speeds: &'a [T],
    sat: &'a [T],
    outer: &'a [T],
    forcing: Option<&'a [T]>,
}

fn first_non_finite<T: Scalar>(v: &[T]) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

fn phase_rate<T: Scalar>(p: PhaseInputs<'_, T>) -> Result<Vec<T>> {
    let n = p.temps.len();
    let fail = |term, node| Error::NumericalFailure {
        term,
        phase: p.name,
        node,
    };
    let half_beta = p.mat.beta() / T::two();

    let at: Vec<T> = p.speeds.iter().zip(p.temps).map(|(&a, &t)| a * t).collect();
    let mut d_at = vec![T::zero(); n];
    p.op.derivative_into(&at, &mut d_at);
    let adv: Vec<T> = (0..n).map(|i| d_at[i] + p.speeds[i] * p.grad[i]).collect();
    if let Some(i) = first_non_finite(&adv) {
        return Err(fail("advection", i));
    }

    let scaled: Vec<T> = p.grad.iter().map(|&g| g / p.jacobian).collect();
    let mut diff = vec![T::zero(); n];
    p.op.derivative_into(&scaled, &mut diff);
    if let Some(i) = first_non_finite(&diff) {
        return Err(fail("diffusion", i));
    }
    if let Some(i) = first_non_finite(p.sat) {
        return Err(fail("interface SAT", i));
    }
    if let Some(i) = first_non_finite(p.outer) {
        return Err(fail("outer SAT", i));
    }

    let inv_mass = T::one() / (p.mat.beta() * p.jacobian);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = -half_beta * adv[i] + p.mat.k * diff[i] + p.sat[i] + p.outer[i]
            - half_beta * p.j_tau * p.temps[i];
        if let Some(f) = p.forcing {
            r += f[i];
        }
        let v = r * inv_mass;
        if !v.is_finite() {
            return Err(fail("time derivative", i));
        }
        out.push(v);
    }
    Ok(out)
}

/// Evaluates the semi-discrete right-hand side at `state`.
pub fn assemble_rhs<T: Scalar>(state: &SimState<T>, problem: &Problem<T>) -> Result<RhsOutput<T>> {
    let cfg = &problem.config;
    crate::error::check_len("state.t_v", cfg.n_v, state.t_v.len())?;
    crate::error::check_len("state.t_l", cfg.n_l, state.t_l.len())?;
    if !state.is_finite() {
        return Err(Error::NumericalFailure {
            term: "state",
            phase: "coupled",
            node: first_non_finite(&state.t_v)
                .or_else(|| first_non_finite(&state.t_l))
                .unwrap_or(0),
        });
    }
    if !(state.x_delta > problem.x0) {
        return Err(Error::PhaseDepletion {
            phase: "vapor",
            x_delta: state.x_delta.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(state.x_delta < problem.xn) {
        return Err(Error::PhaseDepletion {
            phase: "liquid",
            x_delta: state.x_delta.to_f64().unwrap_or(f64::NAN),
        });
    }

    let (vap, liq, ip) = (&problem.vapor, &problem.liquid, &problem.interface);
    let (op_v, op_l) = (&problem.op_v, &problem.op_l);
    let mut mesh: MeshState<T> = build_mesh(problem.x0, problem.xn, state.x_delta, cfg.n_v, cfg.n_l)?;

    let grad_v = op_v.apply_derivative(&state.t_v)?;
    let grad_l = op_l.apply_derivative(&state.t_l)?;
    let flux_v = vap.k / mesh.j_v * grad_v[cfg.n_v - 1];
    let flux_l = liq.k / mesh.j_l * grad_l[0];
    let u_tilde_flux = mesh_velocity(flux_v, flux_l, ip.rho_v, ip.h_lv)?;

    let u_tilde = match &cfg.mms {
        Some(m) if m.free_interface => {
            let exact = m.balance_velocity(ip.t_delta, vap.k, liq.k, ip.rho_v, ip.h_lv, state.time);
            u_tilde_flux + (m.x_delta_rate(state.time) - exact)
        }
        Some(m) => m.x_delta_rate(state.time),
        None => u_tilde_flux,
    };

    mesh.set_velocity(u_tilde);
    let (j_tau_v, j_tau_l) = MeshState::<T>::jacobian_rates(u_tilde);
    let (a_v_delta, a_l_delta, u_l) = wave_speeds(cfg.u_v, u_tilde, ip.gamma);
    let speeds_v: Vec<T> = mesh.x_tau_v.iter().map(|&x| cfg.u_v - x).collect();
    let speeds_l: Vec<T> = mesh.x_tau_l.iter().map(|&x| u_l - x).collect();

    let penalties = select_penalties(
        a_v_delta,
        vap.beta(),
        liq.beta(),
        ip.gamma,
        vap.k,
        liq.k,
        mesh.j_v,
        mesh.j_l,
        cfg.sigma_free,
    );
    let (sat_v, sat_l) = sat_contribution(&state.t_v, &state.t_l, ip.t_delta, &penalties, op_v, op_l)?;

    let (bc_v, bc_l) = problem.outer_data(state.time);
    let outer_v = outer_bc_sat(
        &state.t_v,
        bc_v,
        op_v,
        vap.beta(),
        speeds_v[0],
        vap.k,
        T::one() / mesh.j_v,
        Side::First,
        cfg.c_stab,
    );
    let outer_l = outer_bc_sat(
        &state.t_l,
        bc_l,
        op_l,
        liq.beta(),
        speeds_l[cfg.n_l - 1],
        liq.k,
        T::one() / mesh.j_l,
        Side::Last,
        cfg.c_stab,
    );

    let (forcing_v, forcing_l) = match &cfg.mms {
        Some(m) => (
            Some(mms_source(
                m,
                Phase::Vapor,
                state.time,
                &mesh.vapor_nodes(),
                ip.t_delta,
                vap.beta(),
                vap.k,
                cfg.u_v,
                mesh.j_v,
            )),
            Some(mms_source(
                m,
                Phase::Liquid,
                state.time,
                &mesh.liquid_nodes(),
                ip.t_delta,
                liq.beta(),
                liq.k,
                ip.gamma * cfg.u_v + (T::one() - ip.gamma) * m.x_delta_rate(state.time),
                mesh.j_l,
            )),
        ),
        None => (None, None),
    };

    let dt_v = phase_rate(PhaseInputs {
        name: "vapor",
        temps: &state.t_v,
        grad: &grad_v,
        op: op_v,
        mat: vap,
        jacobian: mesh.j_v,
        j_tau: j_tau_v,
        speeds: &speeds_v,
        sat: &sat_v,
        outer: &outer_v,
        forcing: forcing_v.as_deref(),
    })?;
    let dt_l = phase_rate(PhaseInputs {
        name: "liquid",
        temps: &state.t_l,
        grad: &grad_l,
        op: op_l,
        mat: liq,
        jacobian: mesh.j_l,
        j_tau: j_tau_l,
        speeds: &speeds_l,
        sat: &sat_l,
        outer: &outer_l,
        forcing: forcing_l.as_deref(),
    })?;

    Ok(RhsOutput {
        dt_v,
        dt_l,
        dx_delta: u_tilde,
        interface: InterfaceState {
            flux_v,
            flux_l,
            u_tilde,
            u_tilde_flux,
            a_v_delta,
            a_l_delta,
            u_v_delta: cfg.u_v,
            u_l_delta: u_l,
        },
        penalties,
        j_v: mesh.j_v,
        j_l: mesh.j_l,
        j_tau_v,
        j_tau_l,
        speeds_v,
        speeds_l,
        bc_v,
        bc_l,
        forcing_v,
        forcing_l,
    })
}

/// Largest explicit rate scale of either phase: diffusive `α‖D‖²/J²`, advective
/// `|a|‖D‖/J`, and the boundary penalty strengths `|σ|/(β J P_b)`.
pub fn stiffness<T: Scalar>(problem: &Problem<T>, rhs: &RhsOutput<T>) -> T {
    let cfg = &problem.config;
    let pen = &rhs.penalties;
    let phase = |op: &SbpOperator<T>, mat: &MaterialProps<T>, j: T, speeds: &[T], interface_pen: T, side: Side| {
        let dn = op.derivative_inf_norm();
        let a = max_abs(speeds);
        let (tau0, _) = outer_penalty_coefficients(
            mat.beta(),
            a,
            mat.k,
            T::one() / j,
            op.spacing(),
            cfg.c_stab,
            side,
        );
        let p_min = op.norm().iter().fold(T::infinity(), |m, &p| m.min(p));
        mat.diffusivity() * dn * dn / (j * j)
            + a * dn / j
            + (interface_pen.abs() + tau0.abs()) / (mat.beta() * j * p_min)
    };
    let lv = phase(
        &problem.op_v,
        &problem.vapor,
        rhs.j_v,
        &rhs.speeds_v,
        pen.sigma_v1.abs() + pen.sigma_v2.abs(),
        Side::First,
    );
    let ll = phase(
        &problem.op_l,
        &problem.liquid,
        rhs.j_l,
        &rhs.speeds_l,
        pen.sigma_l1.abs() + pen.sigma_l2.abs(),
        Side::Last,
    );
    lv.max(ll)
}

/// Safety factor applied to `1 / stiffness` when choosing the time step.
pub const DT_SAFETY: f64 = 0.5;

/// Stable explicit step for the state (`DT_SAFETY / stiffness`).
pub fn stable_dt<T: Scalar>(problem: &Problem<T>, state: &SimState<T>) -> Result<T> {
    let rhs = assemble_rhs(state, problem)?;
    Ok(T::lit(DT_SAFETY) / stiffness(problem, &rhs))
}

/// One classical four-stage Runge–Kutta step for a flat ODE system.
/// `f(stage, t, y)` returns `y'`.
pub fn rk4_integrate<T, F>(y0: &[T], t0: T, dt: T, mut f: F) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(usize, T, &[T]) -> Result<Vec<T>>,
{
    let half = dt / T::two();
    let axpy = |a: T, k: &[T]| -> Vec<T> { y0.iter().zip(k).map(|(&y, &kk)| y + a * kk).collect() };
    let k1 = f(0, t0, y0)?;
    let k2 = f(1, t0 + half, &axpy(half, &k1))?;
    let k3 = f(2, t0 + half, &axpy(half, &k2))?;
    let k4 = f(3, t0 + dt, &axpy(dt, &k3))?;
    let sixth = dt / T::lit(6.0);
    Ok((0..y0.len())
        .map(|i| y0[i] + sixth * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]))
        .collect())
}

/// Result of one coupled step, including every stage evaluation.
#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub state: SimState<T>,
    pub stages: Vec<(SimState<T>, RhsOutput<T>)>,
}

fn pack<T: Scalar>(s: &SimState<T>) -> Vec<T> {
    let mut y = Vec::with_capacity(s.t_v.len() + s.t_l.len() + 1);
    y.extend_from_slice(&s.t_v);
    y.extend_from_slice(&s.t_l);
    y.push(s.x_delta);
    y
}

fn unpack<T: Scalar>(y: &[T], n_v: usize, time: T) -> SimState<T> {
    let n = y.len();
    SimState {
        t_v: y[..n_v].to_vec(),
        t_l: y[n_v..n - 1].to_vec(),
        x_delta: y[n - 1],
        time,
    }
}

fn pack_rhs<T: Scalar>(r: &RhsOutput<T>) -> Vec<T> {
    let mut y = Vec::with_capacity(r.dt_v.len() + r.dt_l.len() + 1);
    y.extend_from_slice(&r.dt_v);
    y.extend_from_slice(&r.dt_l);
    y.push(r.dx_delta);
    y
}

/// Advances the coupled state by `dt`; every stage re-evaluates the full
/// right-hand side with its own interface position.
pub fn rk4_step<T: Scalar>(state: &SimState<T>, dt: T, problem: &Problem<T>) -> Result<StepOutcome<T>> {
    rk4_step_from(state, None, dt, problem)
}

/// As [`rk4_step`], reusing an already assembled first-stage right-hand side.
pub fn rk4_step_from<T: Scalar>(
    state: &SimState<T>,
    first: Option<RhsOutput<T>>,
    dt: T,
    problem: &Problem<T>,
) -> Result<StepOutcome<T>> {
    if !(dt > T::zero()) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let n_v = state.t_v.len();
    let mut first = first;
    let mut stages = Vec::with_capacity(4);
    let y = rk4_integrate(&pack(state), state.time, dt, |stage, t, y| {
        let s = unpack(y, n_v, t);
        let rhs = match (stage, first.take()) {
            (0, Some(r)) => r,
            _ => assemble_rhs(&s, problem)?,
        };
        let dy = pack_rhs(&rhs);
        stages.push((s, rhs));
        Ok(dy)
    })?;
    let next = unpack(&y, n_v, state.time + dt);
    if !next.is_finite() {
        return Err(Error::NumericalFailure {
            term: "step",
            phase: "coupled",
            node: first_non_finite(&next.t_v)
                .or_else(|| first_non_finite(&next.t_l).map(|i| n_v + i))
                .unwrap_or(next.t_v.len() + next.t_l.len()),
        });
    }
    Ok(StepOutcome { state: next, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset, PresetName};
    use crate::problem::ProblemSetup;

    fn steady(order: usize, u_v: f64) -> (Problem<f64>, SimState<f64>) {
        let mut s: ProblemSetup<f64> = preset(PresetName::Steady);
        s.config.sbp_order = order;
        s.config.u_v = u_v;
        let p = s.problem().unwrap();
        let st = s.initial_state(&p).unwrap();
        (p, st)
    }

    #[test]
    fn uniform_saturated_state_is_steady() {
        for order in [2, 4, 6] {
            for u_v in [0.0, 0.02] {
                let (p, st) = steady(order, u_v);
                let r = assemble_rhs(&st, &p).unwrap();
                let scale = 373.15 * stiffness(&p, &r);
                assert!(max_abs(&r.dt_v) <= 1e-13 * scale, "order {order}");
                assert!(max_abs(&r.dt_l) <= 1e-13 * scale);
                assert!(r.dx_delta.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn frozen_mesh_without_transport_is_static() {
        let op = SbpOperator::<f64>::unit_interval(4, 16).unwrap();
        let mat = MaterialProps { rho: 2.0, cp: 3.0, k: 0.0 };
        let t: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let grad = op.apply_derivative(&t).unwrap();
        let zeros = vec![0.0; 16];
        let rate = phase_rate(PhaseInputs {
            name: "vapor",
            temps: &t,
            grad: &grad,
            op: &op,
            mat: &mat,
            jacobian: 0.4,
            j_tau: 0.0,
            speeds: &zeros,
            sat: &zeros,
            outer: &zeros,
            forcing: None,
        })
        .unwrap();
        assert!(rate.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rk4_matches_taylor_polynomial() {
        for lambda in [-0.7, 0.3, -2.0] {
            let dt = 0.37;
            let y = rk4_integrate(&[1.0f64], 0.0, dt, |_, _, y| Ok(vec![lambda * y[0]])).unwrap();
            let z: f64 = lambda * dt;
            let taylor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
            assert!((y[0] - taylor).abs() <= 1e-14);
        }
    }

    #[test]
    fn step_of_steady_state_is_identity() {
        let (p, st) = steady(4, 0.0);
        let dt = stable_dt(&p, &st).unwrap();
        let out = rk4_step(&st, dt, &p).unwrap();
        assert_eq!(out.stages.len(), 4);
        for (a, b) in out.state.t_v.iter().zip(&st.t_v) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert!((out.state.x_delta - st.x_delta).abs() <= 1e-15);
        assert!(rk4_step(&st, 0.0, &p).is_err());
    }

    #[test]
    fn outer_sat_vanishes_on_matching_data() {
        let op = SbpOperator::<f64>::unit_interval(4, 16).unwrap();
        let mut t = vec![1.0; 16];
        t[3] = 4.0;
        for side in [Side::First, Side::Last] {
            let v = outer_bc_sat(&t, 1.0, &op, 2.0, -0.5, 0.3, 2.0, side, 1.0);
            assert!(v.iter().all(|x| *x == 0.0));
        }
        let v = outer_bc_sat(&[5.0; 16], 5.0, &op, 2.0, 0.5, 0.3, 2.0, Side::Last, 1.0);
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn stefan_interface_advances() {
        let s: ProblemSetup<f64> = preset(PresetName::Stefan);
        let p = s.problem().unwrap();
        let st = s.initial_state(&p).unwrap();
        let r = assemble_rhs(&st, &p).unwrap();
        assert!(r.dx_delta > 0.0);
        assert!(r.interface.a_v_delta < 0.0);
        assert_eq!(r.dx_delta, mesh_velocity(r.interface.flux_v, r.interface.flux_l, p.interface.rho_v, p.interface.h_lv).unwrap());
        assert!((r.interface.a_l_delta - (r.interface.u_l_delta - r.interface.u_tilde)).abs() <= 1e-15);
    }

    #[test]
    fn rejects_depleted_state() {
        let (p, mut st) = steady(2, 0.0);
        st.x_delta = p.xn;
        assert!(matches!(assemble_rhs(&st, &p), Err(Error::PhaseDepletion { phase: "liquid", .. })));
        st.x_delta = p.x0 - 1.0;
        assert!(matches!(assemble_rhs(&st, &p), Err(Error::PhaseDepletion { phase: "vapor", .. })));
        st.x_delta = 5e-4;
        st.t_v[2] = f64::NAN;
        assert!(matches!(assemble_rhs(&st, &p), Err(Error::NumericalFailure { node: 2, .. })));
    }
}
