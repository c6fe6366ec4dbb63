//! Interface quantities and the weak (SAT) interface treatment.
//!
//! The vapor phase meets the interface at its last node, the liquid phase at
//! its first node. Penalty coefficients follow the energy-stable selection:
//! the advective penalty acts on the phase the transformed flow leaves
//! through the interface, the coupling penalties are `-sigma/2`, and the
//! transposed-derivative penalties cancel the interface diffusive fluxes.

use crate::error::{check_len, Error, Result};
use crate::sbp::{SbpOperator, Side};
use crate::scalar::Scalar;

/// Snapshot of the interface state at one right-hand-side evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceState<T> {
    /// `k_v J_v⁻¹ (D T_v)` at the vapor interface node.
    pub flux_v: T,
    /// `k_l J_l⁻¹ (D T_l)` at the liquid interface node.
    pub flux_l: T,
    /// Interface (mesh) velocity driving the coordinate maps.
    pub u_tilde: T,
    /// Interface velocity implied by the latent-heat balance of the fluxes.
    /// Equal to `u_tilde` except when the trajectory is prescribed.
    pub u_tilde_flux: T,
    pub a_v_delta: T,
    pub a_l_delta: T,
    pub u_v_delta: T,
    pub u_l_delta: T,
}

/// The six SAT coefficients plus the free coupling parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySet<T> {
    pub sigma_v1: T,
    pub sigma_l1: T,
    pub sigma_v2: T,
    pub sigma_l2: T,
    pub sigma_v3: T,
    pub sigma_l3: T,
    pub sigma_free: T,
}

/// Classification of the strong interface treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Dissipative,
    Bounded,
}

/// `k * j_inv * (D T)` at the requested boundary node.
pub fn boundary_flux<T: Scalar>(
    temps: &[T],
    op: &SbpOperator<T>,
    k: T,
    j_inv: T,
    side: Side,
) -> Result<T> {
    let g = op.derivative_at(temps, side.index(op.n_points()))?;
    Ok(k * j_inv * g)
}

/// Interface velocity from the latent-heat balance
/// `rho_v h_lv u = flux_l - flux_v`.
pub fn mesh_velocity<T: Scalar>(flux_v: T, flux_l: T, rho_v: T, h_lv: T) -> Result<T> {
    let denom = rho_v * h_lv;
    if denom == T::zero() || !denom.is_finite() {
        return Err(Error::invalid("rho_v * h_lv", "must be nonzero and finite"));
    }
    Ok((flux_l - flux_v) / denom)
}

/// Transformed interface wave speeds and the liquid interface velocity:
/// `(a_v, a_l, u_l)` with `a_v = u_v - u_tilde`, `a_l = gamma a_v`,
/// `u_l = gamma u_v + (1 - gamma) u_tilde`.
pub fn wave_speeds<T: Scalar>(u_v_delta: T, u_tilde: T, gamma: T) -> (T, T, T) {
    let a_v = u_v_delta - u_tilde;
    (
        a_v,
        gamma * a_v,
        gamma * u_v_delta + (T::one() - gamma) * u_tilde,
    )
}

/// Energy-stable penalty selection.
#[allow(clippy::too_many_arguments)]
pub fn select_penalties<T: Scalar>(
    a_v_delta: T,
    beta_v: T,
    beta_l: T,
    gamma: T,
    k_v: T,
    k_l: T,
    j_v: T,
    j_l: T,
    sigma_free: T,
) -> PenaltySet<T> {
    let zero = T::zero();
    let (sigma_v1, sigma_l1) = if a_v_delta < zero {
        (beta_v * a_v_delta, zero)
    } else if a_v_delta > zero {
        (zero, -beta_l * gamma * a_v_delta)
    } else {
        (zero, zero)
    };
    let coupling = -sigma_free / T::two();
    PenaltySet {
        sigma_v1,
        sigma_l1,
        sigma_v2: coupling,
        sigma_l2: coupling,
        sigma_v3: -k_v / j_v,
        sigma_l3: k_l / j_l,
        sigma_free,
    }
}

/// Interface penalty right-hand sides (before division by `beta J`).
///
/// Vapor: `P⁻¹(σ_v1 e_N (T_N - T_δ) + σ_v2 e_N (T_N - T_l,0) + σ_v3 Dᵀ e_N (T_N - T_δ))`,
/// liquid mirrored at node 0.
pub fn sat_contribution<T: Scalar>(
    t_v: &[T],
    t_l: &[T],
    t_delta: T,
    pen: &PenaltySet<T>,
    op_v: &SbpOperator<T>,
    op_l: &SbpOperator<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    check_len("sat_contribution (vapor)", op_v.n_points(), t_v.len())?;
    check_len("sat_contribution (liquid)", op_l.n_points(), t_l.len())?;
    let nv = t_v.len();
    let tv_n = t_v[nv - 1];
    let tl_0 = t_l[0];

    let mut sat_v = vec![T::zero(); nv];
    penalize(
        &mut sat_v,
        op_v,
        Side::Last,
        pen.sigma_v1 * (tv_n - t_delta) + pen.sigma_v2 * (tv_n - tl_0),
        pen.sigma_v3 * (tv_n - t_delta),
    );
    let mut sat_l = vec![T::zero(); t_l.len()];
    penalize(
        &mut sat_l,
        op_l,
        Side::First,
        pen.sigma_l1 * (tl_0 - t_delta) + pen.sigma_l2 * (tl_0 - tv_n),
        pen.sigma_l3 * (tl_0 - t_delta),
    );
    Ok((sat_v, sat_l))
}

/// Adds `P⁻¹(point e_b + grad Dᵀ e_b)` to `out`.
pub(crate) fn penalize<T: Scalar>(out: &mut [T], op: &SbpOperator<T>, side: Side, point: T, grad: T) {
    let b = side.index(op.n_points());
    let p = op.norm();
    if grad != T::zero() {
        for (j, &dbj) in op.d_row(b).iter().enumerate() {
            if dbj != T::zero() {
                out[j] += grad * dbj / p[j];
            }
        }
    }
    out[b] += point / p[b];
}

/// Strong-treatment classification: dissipative iff `a_v < 0` and `u_tilde >= 0`.
pub fn classify_strong_regime<T: Scalar>(a_v_delta: T, u_tilde: T) -> Regime {
    if a_v_delta < T::zero() && u_tilde >= T::zero() {
        Regime::Dissipative
    } else {
        Regime::Bounded
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(n: usize) -> (SbpOperator<f64>, SbpOperator<f64>) {
        (
            SbpOperator::unit_interval(4, n).unwrap(),
            SbpOperator::unit_interval(4, n + 3).unwrap(),
        )
    }

    #[test]
    fn flux_of_constant_and_linear() {
        let op = SbpOperator::<f64>::unit_interval(4, 17).unwrap();
        let c = vec![4.0; 17];
        assert!(boundary_flux(&c, &op, 2.0, 3.0, Side::Last).unwrap().abs() <= 1e-12);
        let lin: Vec<f64> = op.grid().iter().map(|x| 1.0 - 2.5 * x).collect();
        for side in [Side::First, Side::Last] {
            let f = boundary_flux(&lin, &op, 1.0, 1.0, side).unwrap();
            assert!((f + 2.5).abs() <= 1e-12);
        }
        assert!(boundary_flux(&lin[..5], &op, 1.0, 1.0, Side::First).is_err());
    }

    #[test]
    fn mesh_velocity_examples() {
        assert_eq!(mesh_velocity(2.0, 2.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(mesh_velocity(1.0, 3.0, 0.5, 4.0).unwrap(), 1.0);
        assert_eq!(mesh_velocity(-1.0, -3.0, 0.5, 4.0).unwrap(), -1.0);
        assert!(mesh_velocity(1.0, 2.0, 0.0, 4.0).is_err());
    }

    #[test]
    fn wave_speed_examples() {
        let (a_v, a_l, u_l) = wave_speeds(2.0, 0.0, 0.3);
        assert_eq!((a_v, u_l), (2.0, 0.3 * 2.0));
        assert_eq!(a_l, 0.3 * 2.0);
        let (a_v, a_l, u_l) = wave_speeds(1.3, -0.4, 1.0);
        assert_eq!((a_l, u_l), (a_v, 1.3));
        let (a_v, a_l, u_l) = wave_speeds(2.0f64, 0.5, 0.1);
        assert!((a_v - 1.5).abs() < 1e-15);
        assert!((a_l - 0.15).abs() < 1e-15);
        assert!((u_l - 0.65).abs() < 1e-15);
        assert!((a_l - (u_l - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn penalty_examples() {
        let p = select_penalties(-1.5, 2.0, 7.0, 0.2, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!((p.sigma_v1, p.sigma_l1), (-3.0, 0.0));
        let p = select_penalties(2.0f64, 5.0, 3.0, 0.1, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(p.sigma_v1, 0.0);
        assert!((p.sigma_l1 + 0.6).abs() < 1e-15);
        let p = select_penalties(0.0, 5.0, 3.0, 0.1, 2.0, 3.0, 0.5, 0.25, 4.0);
        assert_eq!((p.sigma_v1, p.sigma_l1), (0.0, 0.0));
        assert_eq!((p.sigma_v2, p.sigma_l2), (-2.0, -2.0));
        assert_eq!((p.sigma_v3, p.sigma_l3), (-4.0, 12.0));
    }

    #[test]
    fn sat_vanishes_for_matched_interface() {
        let (ov, ol) = ops(12);
        let mut tv: Vec<f64> = (0..12).map(|i| i as f64).collect();
        tv[11] = 5.0;
        let mut tl = vec![9.0; 15];
        tl[0] = 5.0;
        let pen = select_penalties(-1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0);
        let (sv, sl) = sat_contribution(&tv, &tl, 5.0, &pen, &ov, &ol).unwrap();
        assert!(sv.iter().chain(&sl).all(|v| *v == 0.0));
    }

    #[test]
    fn single_point_penalty() {
        let (ov, ol) = ops(12);
        let mut tv = vec![1.0; 12];
        tv[11] = 1.25;
        let tl = vec![1.0; 15];
        let pen = PenaltySet {
            sigma_v1: 1.0,
            sigma_l1: 0.0,
            sigma_v2: 0.0,
            sigma_l2: 0.0,
            sigma_v3: 0.0,
            sigma_l3: 0.0,
            sigma_free: 0.0,
        };
        let (sv, sl) = sat_contribution(&tv, &tl, 1.0, &pen, &ov, &ol).unwrap();
        for (i, v) in sv.iter().enumerate() {
            if i == 11 {
                assert!((v - 0.25 / ov.norm()[11]).abs() < 1e-12);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(sl.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn regime_grid() {
        assert_eq!(classify_strong_regime(-1.0, 0.5), Regime::Dissipative);
        assert_eq!(classify_strong_regime(1.0, 0.5), Regime::Bounded);
        assert_eq!(classify_strong_regime(0.0, 0.0), Regime::Bounded);
        assert_eq!(classify_strong_regime(-1.0, 0.0), Regime::Dissipative);
        assert_eq!(classify_strong_regime(-1.0, -1e-300), Regime::Bounded);
    }
}
