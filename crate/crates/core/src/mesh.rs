//! Moving-domain to fixed-frame coordinate maps.
//!
//! Each phase is mapped linearly onto the reference interval `[0, 1]`:
//! vapor `x = x0 + (x_delta - x0) ξ`, liquid `x = x_delta + (xn - x_delta) η`.
//! The Jacobians are therefore spatially uniform and the metric identity
//! `J ξ_x = 1` holds by construction.

use crate::error::{check_len, Error, Result};
use crate::sbp::SbpOperator;
use crate::scalar::{max_abs, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct MeshState<T> {
    pub x0: T,
    pub xn: T,
    pub x_delta: T,
    pub xi_grid: Vec<T>,
    pub eta_grid: Vec<T>,
    /// `x_delta - x0`.
    pub j_v: T,
    /// `xn - x_delta`.
    pub j_l: T,
    /// Mesh velocity at vapor nodes (zero until a velocity is applied).
    pub x_tau_v: Vec<T>,
    /// Mesh velocity at liquid nodes.
    pub x_tau_l: Vec<T>,
}

fn unit_grid<T: Scalar>(n: usize) -> Vec<T> {
    let h = T::one() / T::from_usize_lossy(n - 1);
    let mut g: Vec<T> = (0..n).map(|i| T::from_usize_lossy(i) * h).collect();
    g[n - 1] = T::one();
    g
}

pub fn build_mesh<T: Scalar>(x0: T, xn: T, x_delta: T, n_v: usize, n_l: usize) -> Result<MeshState<T>> {
    if !(x0 < x_delta && x_delta < xn) {
        return Err(Error::Geometry(format!(
            "need x0 < x_delta < xn, got {x0} / {x_delta} / {xn}"
        )));
    }
    if n_v < 2 || n_l < 2 {
        return Err(Error::Geometry("each phase needs at least two nodes".into()));
    }
    Ok(MeshState {
        x0,
        xn,
        x_delta,
        xi_grid: unit_grid(n_v),
        eta_grid: unit_grid(n_l),
        j_v: x_delta - x0,
        j_l: xn - x_delta,
        x_tau_v: vec![T::zero(); n_v],
        x_tau_l: vec![T::zero(); n_l],
    })
}

impl<T: Scalar> MeshState<T> {
    /// Physical coordinates of the vapor nodes.
    pub fn vapor_nodes(&self) -> Vec<T> {
        self.xi_grid.iter().map(|&s| self.x0 + self.j_v * s).collect()
    }

    /// Physical coordinates of the liquid nodes.
    pub fn liquid_nodes(&self) -> Vec<T> {
        self.eta_grid
            .iter()
            .map(|&s| self.x_delta + self.j_l * s)
            .collect()
    }

    /// Stores the mesh-velocity fields for `interface_velocity`.
    pub fn set_velocity(&mut self, interface_velocity: T) {
        let (v, l) = mesh_velocity_field(self, interface_velocity);
        self.x_tau_v = v;
        self.x_tau_l = l;
    }

    /// Time derivatives of the two Jacobians for a given interface velocity.
    pub fn jacobian_rates(interface_velocity: T) -> (T, T) {
        (interface_velocity, -interface_velocity)
    }
}

/// Node velocities of the linear maps: the outer endpoints are fixed and the
/// interface node moves with `interface_velocity`.
pub fn mesh_velocity_field<T: Scalar>(mesh: &MeshState<T>, interface_velocity: T) -> (Vec<T>, Vec<T>) {
    let v = mesh.xi_grid.iter().map(|&s| s * interface_velocity).collect();
    let l = mesh
        .eta_grid
        .iter()
        .map(|&s| (T::one() - s) * interface_velocity)
        .collect();
    (v, l)
}

/// Max-norm residual of the discrete geometric conservation law
/// `J_τ + D(J ξ_t) = 0` (with `J ξ_t = -x_τ`) for each phase.
pub fn gcl_residual<T: Scalar>(
    mesh: &MeshState<T>,
    interface_velocity: T,
    op_v: &SbpOperator<T>,
    op_l: &SbpOperator<T>,
) -> Result<(T, T)> {
    check_len("gcl_residual (vapor)", op_v.n_points(), mesh.xi_grid.len())?;
    check_len("gcl_residual (liquid)", op_l.n_points(), mesh.eta_grid.len())?;
    let (xv, xl) = mesh_velocity_field(mesh, interface_velocity);
    let (jt_v, jt_l) = MeshState::<T>::jacobian_rates(interface_velocity);
    Ok((
        residual_from(&xv, jt_v, op_v)?,
        residual_from(&xl, jt_l, op_l)?,
    ))
}

/// GCL residual for an arbitrary mesh-velocity field.
pub fn residual_from<T: Scalar>(x_tau: &[T], j_tau: T, op: &SbpOperator<T>) -> Result<T> {
    let flux: Vec<T> = x_tau.iter().map(|&v| -v).collect();
    let d = op.apply_derivative(&flux)?;
    let r: Vec<T> = d.iter().map(|&v| j_tau + v).collect();
    Ok(max_abs(&r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobians_of_linear_map() {
        let m = build_mesh(0.0, 1.0, 0.25, 9, 9).unwrap();
        assert_eq!((m.j_v, m.j_l), (0.25, 0.75));
        let mid = build_mesh(-1.0, 3.0, 1.0, 5, 7).unwrap();
        assert_eq!(mid.j_v, mid.j_l);
    }

    #[test]
    fn interface_collocation() {
        let m = build_mesh(0.1, 2.0, 0.7, 6, 8).unwrap();
        assert_eq!(*m.vapor_nodes().last().unwrap(), 0.7);
        assert_eq!(m.liquid_nodes()[0], 0.7);
        assert_eq!(m.vapor_nodes()[0], 0.1);
        assert_eq!(*m.liquid_nodes().last().unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_ordering() {
        assert!(matches!(build_mesh(0.0, 1.0, 1.0, 5, 5), Err(Error::Geometry(_))));
        assert!(build_mesh(0.0, 1.0, 0.0, 5, 5).is_err());
        assert!(build_mesh(1.0, 0.0, 0.5, 5, 5).is_err());
    }

    #[test]
    fn velocity_field() {
        let m = build_mesh(0.0, 1.0, 0.5, 5, 5).unwrap();
        let (v, l) = mesh_velocity_field(&m, 0.0);
        assert!(v.iter().chain(&l).all(|x| *x == 0.0));
        let (v, l) = mesh_velocity_field(&m, 2.0);
        assert_eq!(v[4], 2.0);
        assert_eq!(l[0], 2.0);
        assert_eq!(v[2], 1.0);
        assert_eq!((v[0], l[4]), (0.0, 0.0));
    }

    #[test]
    fn gcl_holds_for_linear_map() {
        for order in [2, 4, 6] {
            let n = 33;
            let ov = SbpOperator::unit_interval(order, n).unwrap();
            let ol = SbpOperator::unit_interval(order, n).unwrap();
            let m = build_mesh(0.0, 1.0, 0.3, n, n).unwrap();
            assert_eq!(gcl_residual(&m, 0.0, &ov, &ol).unwrap(), (0.0, 0.0));
            let (rv, rl) = gcl_residual(&m, -3.7, &ov, &ol).unwrap();
            assert!(rv <= 1e-12 && rl <= 1e-12, "order {order}: {rv} {rl}");
        }
    }

    #[test]
    fn gcl_detects_quadratic_velocity() {
        let op = SbpOperator::unit_interval(2, 11).unwrap();
        let m = build_mesh(0.0, 1.0, 0.5, 11, 11).unwrap();
        let bad: Vec<f64> = m.xi_grid.iter().map(|s| s * s).collect();
        assert!(residual_from(&bad, 1.0, &op).unwrap() > 1e-3);
    }
}
