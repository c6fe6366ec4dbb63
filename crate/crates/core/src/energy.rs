//! Discrete energy bookkeeping.
//!
//! With `E = β_v T_vᵀ P J_v T_v + β_l T_lᵀ P J_l T_l`, the scheme satisfies
//! exactly
//!
//! ```text
//! dE/dτ = -Diss + IT + SAT + BT (+ 2 Tᵀ f for manufactured forcing)
//! ```
//!
//! where `Diss = 2k J⁻¹ (DT)ᵀ P (DT)` summed over phases, `IT` and `SAT` are
//! the interface-node terms and `BT` collects the outer boundary. The audit
//! evaluates every term independently and compares against the rate obtained
//! from the assembled time derivative.

use crate::error::{check_len, Error, Result};
use crate::interface::{classify_strong_regime, PenaltySet, Regime};
use crate::mesh::{build_mesh, gcl_residual};
use crate::problem::{Problem, SimState};
use crate::sbp::{SbpOperator, Side};
use crate::scalar::Scalar;
use crate::solver::{outer_penalty_coefficients, stiffness, RhsOutput};

/// One phase's temperatures together with what is needed to weigh them.
#[derive(Debug, Clone, Copy)]
pub struct PhaseView<'a, T> {
    pub temps: &'a [T],
    pub op: &'a SbpOperator<T>,
    pub beta: T,
    pub k: T,
    pub jacobian: T,
}

impl<'a, T: Scalar> PhaseView<'a, T> {
    fn check(&self, context: &'static str) -> Result<()> {
        check_len(context, self.op.n_points(), self.temps.len())?;
        if !(self.jacobian > T::zero()) {
            return Err(Error::invalid("jacobian", "must be positive"));
        }
        Ok(())
    }

    fn node(&self, side: Side) -> T {
        self.temps[side.index(self.temps.len())]
    }

    /// `(D T)` at a boundary node.
    fn grad(&self, side: Side) -> Result<T> {
        self.op.derivative_at(self.temps, side.index(self.temps.len()))
    }

    /// `k J⁻¹ (D T)` at a boundary node.
    fn flux(&self, side: Side) -> Result<T> {
        Ok(self.k / self.jacobian * self.grad(side)?)
    }
}

/// `β_v T_vᵀ P J_v T_v + β_l T_lᵀ P J_l T_l`.
pub fn discrete_energy<T: Scalar>(v: &PhaseView<'_, T>, l: &PhaseView<'_, T>) -> Result<T> {
    v.check("discrete_energy (vapor)")?;
    l.check("discrete_energy (liquid)")?;
    Ok(v.beta * v.jacobian * v.op.inner(v.temps, v.temps)
        + l.beta * l.jacobian * l.op.inner(l.temps, l.temps))
}

/// `2 k J⁻¹ (DT)ᵀ P (DT)` summed over both phases.
pub fn dissipation<T: Scalar>(v: &PhaseView<'_, T>, l: &PhaseView<'_, T>) -> Result<T> {
    let mut total = T::zero();
    for (ph, ctx) in [(v, "dissipation (vapor)"), (l, "dissipation (liquid)")] {
        ph.check(ctx)?;
        let g = ph.op.apply_derivative(ph.temps)?;
        total += T::two() * ph.k / ph.jacobian * ph.op.inner(&g, &g);
    }
    Ok(total)
}

/// Interface terms: `-β_v a_v T_N² + 2 T_N F_v + β_l a_l T_0² - 2 T_0 F_l`.
pub fn it_direct<T: Scalar>(
    v: &PhaseView<'_, T>,
    l: &PhaseView<'_, T>,
    a_v_delta: T,
    a_l_delta: T,
) -> Result<T> {
    v.check("it_direct (vapor)")?;
    l.check("it_direct (liquid)")?;
    let (tv, tl) = (v.node(Side::Last), l.node(Side::First));
    Ok(-v.beta * a_v_delta * tv * tv + T::two() * tv * v.flux(Side::Last)?
        + l.beta * a_l_delta * tl * tl
        - T::two() * tl * l.flux(Side::First)?)
}

/// Energy contribution of the interface penalties.
pub fn sat_direct<T: Scalar>(
    v: &PhaseView<'_, T>,
    l: &PhaseView<'_, T>,
    t_delta: T,
    pen: &PenaltySet<T>,
) -> Result<T> {
    v.check("sat_direct (vapor)")?;
    l.check("sat_direct (liquid)")?;
    let (tv, tl) = (v.node(Side::Last), l.node(Side::First));
    let sv = pen.sigma_v1 * tv * (tv - t_delta)
        + pen.sigma_v2 * tv * (tv - tl)
        + pen.sigma_v3 * v.grad(Side::Last)? * (tv - t_delta);
    let sl = pen.sigma_l1 * tl * (tl - t_delta)
        + pen.sigma_l2 * tl * (tl - tv)
        + pen.sigma_l3 * l.grad(Side::First)? * (tl - t_delta);
    Ok(T::two() * (sv + sl))
}

/// Interface-node data entering the closed form of `IT + SAT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceValues<T> {
    /// Vapor temperature at its interface node.
    pub t_v: T,
    /// Liquid temperature at its interface node.
    pub t_l: T,
    pub t_delta: T,
    pub a_v: T,
    pub a_l: T,
    pub beta_v: T,
    pub beta_l: T,
    /// Interface velocity implied by the flux jump.
    pub u_tilde: T,
    pub c1: T,
    pub sigma_free: T,
}

/// Closed form of `IT + SAT` under the standard penalty selection.
pub fn itsat_closed_form<T: Scalar>(iv: &InterfaceValues<T>) -> T {
    let z = T::zero();
    let common = -iv.c1 * iv.u_tilde - iv.sigma_free * (iv.t_v - iv.t_l).powi(2);
    let td2 = iv.t_delta * iv.t_delta;
    let bv = iv.beta_v * iv.a_v;
    let bl = iv.beta_l * iv.a_l;
    if iv.a_v < z {
        common - bv * td2 + bv * (iv.t_v - iv.t_delta).powi(2) + bl * iv.t_l * iv.t_l
    } else if iv.a_v > z {
        common + bl * td2 - bl * (iv.t_l - iv.t_delta).powi(2) - bv * iv.t_v * iv.t_v
    } else {
        common
    }
}

/// Data-only upper bound on `IT + SAT`:
/// `(β_l a_l - β_v a_v) T_δ² - c1 ũ + |β a| T_δ²`, where the last term uses
/// the liquid when the flow enters the vapor (`a_v < 0`) and the vapor otherwise.
pub fn itsat_envelope<T: Scalar>(iv: &InterfaceValues<T>) -> T {
    let td2 = iv.t_delta * iv.t_delta;
    let bv = iv.beta_v * iv.a_v;
    let bl = iv.beta_l * iv.a_l;
    let extra = if iv.a_v < T::zero() {
        bl.abs() * td2
    } else {
        bv.abs() * td2
    };
    (bl - bv) * td2 - iv.c1 * iv.u_tilde + extra
}

/// Gradient and point-value groupings of `IT + SAT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradPval<T> {
    /// `2 T_δ (F_v - F_l)`.
    pub grad: T,
    /// Full point-value quadratic form in `(T_v, T_l, T_δ)`.
    pub pval: T,
    /// `-σ (T_v - T_l)²`.
    pub pval2: T,
    pub pval_v: T,
    pub pval_l: T,
}

/// Symmetric matrix `M` of the point-value form `zᵀ M z`, `z = (T_v, T_l, T_δ)`.
pub fn pval_matrix<T: Scalar>(
    a_v: T,
    a_l: T,
    beta_v: T,
    beta_l: T,
    pen: &PenaltySet<T>,
) -> [[T; 3]; 3] {
    let s = pen.sigma_free;
    let two = T::two();
    [
        [-beta_v * a_v + two * pen.sigma_v1 - s, s, -pen.sigma_v1],
        [s, beta_l * a_l + two * pen.sigma_l1 - s, -pen.sigma_l1],
        [-pen.sigma_v1, -pen.sigma_l1, T::zero()],
    ]
}

pub fn quadratic_form<T: Scalar>(m: &[[T; 3]; 3], z: [T; 3]) -> T {
    let mut acc = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            acc += z[i] * m[i][j] * z[j];
        }
    }
    acc
}

/// Three-part split `(pval2, pval_v, pval_l)` of the point-value form.
#[allow(clippy::too_many_arguments)]
pub fn pval_split<T: Scalar>(
    t_v: T,
    t_l: T,
    t_delta: T,
    a_v: T,
    a_l: T,
    beta_v: T,
    beta_l: T,
    pen: &PenaltySet<T>,
) -> (T, T, T) {
    let two = T::two();
    (
        -pen.sigma_free * (t_v - t_l).powi(2),
        -beta_v * a_v * t_v * t_v + two * pen.sigma_v1 * t_v * (t_v - t_delta),
        beta_l * a_l * t_l * t_l + two * pen.sigma_l1 * t_l * (t_l - t_delta),
    )
}

/// Splits `IT + SAT` into its gradient and point-value parts. The transposed
/// penalties must cancel the interface fluxes (`σ_v3 = -k_v/J_v`,
/// `σ_l3 = k_l/J_l`) and the coupling penalties must be `-σ/2`.
pub fn grad_pval_diagnostics<T: Scalar>(
    v: &PhaseView<'_, T>,
    l: &PhaseView<'_, T>,
    t_delta: T,
    a_v: T,
    a_l: T,
    pen: &PenaltySet<T>,
) -> Result<GradPval<T>> {
    v.check("grad_pval_diagnostics (vapor)")?;
    l.check("grad_pval_diagnostics (liquid)")?;
    let tol = T::lit(1e-12);
    let close = |a: T, b: T| (a - b).abs() <= tol * (T::one() + b.abs());
    let half_sigma = -pen.sigma_free / T::two();
    for (name, got, want) in [
        ("sigma_v3", pen.sigma_v3, -v.k / v.jacobian),
        ("sigma_l3", pen.sigma_l3, l.k / l.jacobian),
        ("sigma_v2", pen.sigma_v2, half_sigma),
        ("sigma_l2", pen.sigma_l2, half_sigma),
    ] {
        if !close(got, want) {
            return Err(Error::Precondition(format!("{name} = {got}, expected {want}")));
        }
    }
    let (tv, tl) = (v.node(Side::Last), l.node(Side::First));
    let grad = T::two() * t_delta * (v.flux(Side::Last)? - l.flux(Side::First)?);
    let m = pval_matrix(a_v, a_l, v.beta, l.beta, pen);
    let pval = quadratic_form(&m, [tv, tl, t_delta]);
    let (pval2, pval_v, pval_l) = pval_split(tv, tl, t_delta, a_v, a_l, v.beta, l.beta, pen);
    Ok(GradPval {
        grad,
        pval,
        pval2,
        pval_v,
        pval_l,
    })
}

/// Energy contribution of one outer boundary: the boundary advective and
/// diffusive terms plus the outer SAT.
#[allow(clippy::too_many_arguments)]
pub fn bt_side<T: Scalar>(ph: &PhaseView<'_, T>, side: Side, a_boundary: T, bc: T, c_stab: T) -> Result<T> {
    ph.check("bt_side")?;
    let j_inv = T::one() / ph.jacobian;
    let (tau0, tau1) =
        outer_penalty_coefficients(ph.beta, a_boundary, ph.k, j_inv, ph.op.spacing(), c_stab, side);
    let t = ph.node(side);
    let g = ph.grad(side)?;
    let sign = match side {
        Side::First => T::one(),
        Side::Last => -T::one(),
    };
    let boundary = sign * (ph.beta * a_boundary * t * t - T::two() * ph.k * j_inv * t * g);
    let sat = T::two() * (tau0 * t + tau1 * g) * (t - bc);
    Ok(boundary + sat)
}

/// Coefficient `c` of the data bound `BT_side ≤ c g² + 2 k J⁻¹ P_b (DT)_b²`.
pub fn outer_data_bound<T: Scalar>(ph: &PhaseView<'_, T>, side: Side, a_boundary: T, c_stab: T) -> T {
    let j_inv = T::one() / ph.jacobian;
    let (tau0, _) =
        outer_penalty_coefficients(ph.beta, a_boundary, ph.k, j_inv, ph.op.spacing(), c_stab, side);
    let sign = match side {
        Side::First => T::one(),
        Side::Last => -T::one(),
    };
    let curvature = (sign * ph.beta * a_boundary + T::two() * tau0).abs();
    let p_b = ph.op.norm()[side.index(ph.op.n_points())];
    tau0 * tau0 / curvature + ph.k * j_inv / (T::two() * p_b)
}

/// One audit record.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger<T> {
    pub time: T,
    pub energy: T,
    pub dissipation: T,
    pub it_direct: T,
    pub sat_direct: T,
    pub itsat_closed: T,
    pub bt_outer: T,
    /// `2 Tᵀ P f` of the manufactured forcing (zero otherwise).
    pub forcing_work: T,
    pub rate_measured: T,
    pub identity_residual: T,
    pub closed_form_residual: T,
    pub grad_term: T,
    pub pval_term: T,
    pub gcl_residual: T,
    /// Upper bound on `dE/dτ` that depends on data only.
    pub envelope_rate: T,
    pub regime: Regime,
    pub violations: Vec<String>,
}

/// Tolerance on the relative energy-identity residual.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance on the relative closed-form residual.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Tolerance on the GCL residual.
pub const GCL_TOL: f64 = 1e-12;

fn views<'a, T: Scalar>(
    state: &'a SimState<T>,
    rhs: &RhsOutput<T>,
    problem: &'a Problem<T>,
) -> (PhaseView<'a, T>, PhaseView<'a, T>) {
    (
        PhaseView {
            temps: &state.t_v,
            op: &problem.op_v,
            beta: problem.vapor.beta(),
            k: problem.vapor.k,
            jacobian: rhs.j_v,
        },
        PhaseView {
            temps: &state.t_l,
            op: &problem.op_l,
            beta: problem.liquid.beta(),
            k: problem.liquid.k,
            jacobian: rhs.j_l,
        },
    )
}

/// `dE/dτ` from the assembled derivative, including Jacobian motion.
pub fn measured_rate<T: Scalar>(state: &SimState<T>, rhs: &RhsOutput<T>, problem: &Problem<T>) -> T {
    let (v, l) = views(state, rhs, problem);
    let phase = |ph: &PhaseView<'_, T>, dt: &[T], j_tau: T| {
        T::two() * ph.beta * ph.jacobian * ph.op.inner(ph.temps, dt)
            + ph.beta * j_tau * ph.op.inner(ph.temps, ph.temps)
    };
    phase(&v, &rhs.dt_v, rhs.j_tau_v) + phase(&l, &rhs.dt_l, rhs.j_tau_l)
}

/// Interface values for the closed form at `state`.
pub fn interface_values<T: Scalar>(
    state: &SimState<T>,
    rhs: &RhsOutput<T>,
    problem: &Problem<T>,
) -> InterfaceValues<T> {
    InterfaceValues {
        t_v: state.t_v[state.t_v.len() - 1],
        t_l: state.t_l[0],
        t_delta: problem.interface.t_delta,
        a_v: rhs.interface.a_v_delta,
        a_l: rhs.interface.a_l_delta,
        beta_v: problem.vapor.beta(),
        beta_l: problem.liquid.beta(),
        u_tilde: rhs.interface.u_tilde_flux,
        c1: problem.interface.c1,
        sigma_free: rhs.penalties.sigma_free,
    }
}

/// Data-only bound on the energy rate: interface envelope plus the outer
/// data bounds (the outer gradient terms are paid for by dissipation).
pub fn envelope_rate<T: Scalar>(state: &SimState<T>, rhs: &RhsOutput<T>, problem: &Problem<T>) -> T {
    let (v, l) = views(state, rhs, problem);
    let c = problem.config.c_stab;
    let cv = outer_data_bound(&v, Side::First, rhs.speeds_v[0], c);
    let cl = outer_data_bound(&l, Side::Last, rhs.speeds_l[rhs.speeds_l.len() - 1], c);
    itsat_envelope(&interface_values(state, rhs, problem)) + cv * rhs.bc_v * rhs.bc_v + cl * rhs.bc_l * rhs.bc_l
}

/// Evaluates every energy term at `state` and checks the identities.
pub fn audit_step<T: Scalar>(state: &SimState<T>, rhs: &RhsOutput<T>, problem: &Problem<T>) -> Result<EnergyLedger<T>> {
    let (v, l) = views(state, rhs, problem);
    let iface = &rhs.interface;
    let energy = discrete_energy(&v, &l)?;
    let diss = dissipation(&v, &l)?;
    let it = it_direct(&v, &l, iface.a_v_delta, iface.a_l_delta)?;
    let sat = sat_direct(&v, &l, problem.interface.t_delta, &rhs.penalties)?;
    let iv = interface_values(state, rhs, problem);
    let closed = itsat_closed_form(&iv);
    let c = problem.config.c_stab;
    let bt = bt_side(&v, Side::First, rhs.speeds_v[0], rhs.bc_v, c)?
        + bt_side(&l, Side::Last, rhs.speeds_l[rhs.speeds_l.len() - 1], rhs.bc_l, c)?;
    let forcing = match (&rhs.forcing_v, &rhs.forcing_l) {
        (Some(fv), Some(fl)) => T::two() * (v.op.inner(v.temps, fv) + l.op.inner(l.temps, fl)),
        _ => T::zero(),
    };
    let rate = measured_rate(state, rhs, problem);
    let gp = grad_pval_diagnostics(&v, &l, problem.interface.t_delta, iface.a_v_delta, iface.a_l_delta, &rhs.penalties)?;

    let predicted = -diss + it + sat + bt + forcing;
    // Rounding in the assembled rate scales with stiffness times energy.
    let floor = T::lit(64.0) * T::epsilon() * energy * stiffness(problem, rhs);
    let scale = [rate, diss, it, sat, bt, forcing]
        .iter()
        .fold(floor, |m, x| m.max(x.abs()));
    let identity_residual = if scale > T::zero() {
        (rate - predicted).abs() / scale
    } else {
        T::zero()
    };
    let closed_form_residual = (it + sat - closed).abs() / T::one().max(closed.abs());

    let mesh = build_mesh(problem.x0, problem.xn, state.x_delta, problem.config.n_v, problem.config.n_l)?;
    let (gv, gl) = gcl_residual(&mesh, iface.u_tilde, &problem.op_v, &problem.op_l)?;
    let gcl = gv.max(gl);

    let mut violations = Vec::new();
    if energy < T::zero() {
        violations.push(format!("energy negative: {energy}"));
    }
    if diss < T::zero() {
        violations.push(format!("dissipation negative: {diss}"));
    }
    if !(identity_residual <= T::lit(IDENTITY_TOL)) {
        violations.push(format!(
            "energy identity residual {identity_residual}: rate {rate}, diss {diss}, it {it}, sat {sat}, bt {bt}, forcing {forcing}"
        ));
    }
    if !(closed_form_residual <= T::lit(CLOSED_FORM_TOL)) {
        violations.push(format!(
            "closed form residual {closed_form_residual}: it+sat {} vs {closed}",
            it + sat
        ));
    }
    if !(gcl <= T::lit(GCL_TOL)) {
        violations.push(format!("gcl residual {gcl}"));
    }

    Ok(EnergyLedger {
        time: state.time,
        energy,
        dissipation: diss,
        it_direct: it,
        sat_direct: sat,
        itsat_closed: closed,
        bt_outer: bt,
        forcing_work: forcing,
        rate_measured: rate,
        identity_residual,
        closed_form_residual,
        grad_term: gp.grad,
        pval_term: gp.pval,
        gcl_residual: gcl,
        envelope_rate: envelope_rate(state, rhs, problem),
        regime: classify_strong_regime(iface.a_v_delta, iface.u_tilde),
        violations,
    })
}
