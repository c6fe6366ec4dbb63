//! Material and interface parameters of the two-phase model.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Constant properties of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProps<T> {
    /// Density (kg/m³).
    pub rho: T,
    /// Specific heat at constant pressure (J/(kg·K)).
    pub cp: T,
    /// Heat conduction coefficient.
    pub k: T,
}

impl<T: Scalar> MaterialProps<T> {
    pub fn new(rho: T, cp: T, k: T) -> Result<Self> {
        let m = MaterialProps { rho, cp, k };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho", self.rho), ("cp", self.cp), ("k", self.k)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        Ok(())
    }

    /// Volumetric heat capacity `rho * cp`.
    #[inline]
    pub fn beta(&self) -> T {
        self.rho * self.cp
    }

    /// Thermal diffusivity `k / beta`.
    #[inline]
    pub fn diffusivity(&self) -> T {
        self.k / self.beta()
    }
}

/// Interface data and the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePhysics<T> {
    /// Evaporation temperature imposed at the interface (K).
    pub t_delta: T,
    /// Latent heat of vaporization (J/kg).
    pub h_lv: T,
    /// Vapor density, cached because the mass-flow relation needs it.
    pub rho_v: T,
    /// Density ratio `rho_v / rho_l`.
    pub gamma: T,
    /// `(beta_l * gamma - beta_v) * t_delta²`, equal to `rho_v (cp_l - cp_v) t_delta²`.
    pub c0: T,
    /// `2 * t_delta * rho_v * h_lv`.
    pub c1: T,
}

/// Physically unusual, but admissible, parameter combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysicsWarning {
    /// `rho_v >= rho_l`.
    VaporNotLighter,
    /// `cp_l <= cp_v`, so `c0 <= 0`: the strong interface treatment is
    /// only bounded, never dissipative through the advective term.
    NonPositiveC0,
}

/// Builds the interface constants, rejecting a non-positive `t_delta` or `h_lv`.
pub fn derive_interface_constants<T: Scalar>(
    vapor: &MaterialProps<T>,
    liquid: &MaterialProps<T>,
    t_delta: T,
    h_lv: T,
) -> Result<InterfacePhysics<T>> {
    if !(t_delta > T::zero()) || !t_delta.is_finite() {
        return Err(Error::invalid(
            "t_delta",
            "must be positive (c1 = 2 t_delta rho_v h_lv > 0)",
        ));
    }
    let iphys = build_constants(vapor, liquid, t_delta, h_lv)?;
    for w in sign_warnings(vapor, liquid) {
        log::warn!("interface physics: {w:?}");
    }
    Ok(iphys)
}

/// Interface constants for zero interface data (`t_delta = 0`), used for
/// the homogeneous-data stability variants. `c0 = c1 = 0`.
pub fn homogeneous_interface<T: Scalar>(
    vapor: &MaterialProps<T>,
    liquid: &MaterialProps<T>,
    h_lv: T,
) -> Result<InterfacePhysics<T>> {
    build_constants(vapor, liquid, T::zero(), h_lv)
}

fn build_constants<T: Scalar>(
    vapor: &MaterialProps<T>,
    liquid: &MaterialProps<T>,
    t_delta: T,
    h_lv: T,
) -> Result<InterfacePhysics<T>> {
    vapor.validate()?;
    liquid.validate()?;
    if !(h_lv > T::zero()) || !h_lv.is_finite() {
        return Err(Error::invalid("h_lv", "must be positive and finite"));
    }
    let gamma = vapor.rho / liquid.rho;
    Ok(InterfacePhysics {
        t_delta,
        h_lv,
        rho_v: vapor.rho,
        gamma,
        c0: (liquid.beta() * gamma - vapor.beta()) * t_delta * t_delta,
        c1: T::two() * t_delta * vapor.rho * h_lv,
    })
}

pub fn sign_warnings<T: Scalar>(
    vapor: &MaterialProps<T>,
    liquid: &MaterialProps<T>,
) -> Vec<PhysicsWarning> {
    let mut out = Vec::new();
    if vapor.rho >= liquid.rho {
        out.push(PhysicsWarning::VaporNotLighter);
    }
    if liquid.cp <= vapor.cp {
        out.push(PhysicsWarning::NonPositiveC0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rho: f64, cp: f64) -> MaterialProps<f64> {
        MaterialProps::new(rho, cp, 1.0).unwrap()
    }

    #[test]
    fn worked_example() {
        let ip = derive_interface_constants(&mat(1.0, 1.0), &mat(2.0, 3.0), 2.0, 5.0).unwrap();
        assert_eq!(ip.gamma, 0.5);
        assert_eq!(ip.c0, 8.0);
        assert_eq!(ip.c1, 20.0);
    }

    #[test]
    fn c0_matches_alternative_form() {
        let v = mat(0.6, 2030.0);
        let l = mat(958.0, 4216.0);
        let ip = derive_interface_constants(&v, &l, 373.15, 2.257e6).unwrap();
        let alt = v.rho * (l.cp - v.cp) * 373.15 * 373.15;
        assert!((ip.c0 - alt).abs() <= 1e-12 * alt);
    }

    #[test]
    fn equal_heat_capacities_give_zero_c0() {
        let ip = derive_interface_constants(&mat(1.0, 2.0), &mat(4.0, 2.0), 3.0, 1.0).unwrap();
        assert_eq!(ip.c0, 0.0);
        assert_eq!(
            sign_warnings(&mat(1.0, 2.0), &mat(4.0, 2.0)),
            vec![PhysicsWarning::NonPositiveC0]
        );
    }

    #[test]
    fn equal_densities_give_unit_gamma() {
        let ip = derive_interface_constants(&mat(3.0, 1.0), &mat(3.0, 2.0), 1.0, 1.0).unwrap();
        assert_eq!(ip.gamma, 1.0);
        assert!(sign_warnings(&mat(3.0, 1.0), &mat(3.0, 2.0)).contains(&PhysicsWarning::VaporNotLighter));
    }

    #[test]
    fn rejects_invalid_data() {
        assert!(derive_interface_constants(&mat(1.0, 1.0), &mat(2.0, 3.0), 0.0, 5.0).is_err());
        assert!(derive_interface_constants(&mat(1.0, 1.0), &mat(2.0, 3.0), 1.0, 0.0).is_err());
        assert!(MaterialProps::new(-1.0, 1.0, 1.0).is_err());
        assert!(MaterialProps::new(1.0, 1.0, f64::NAN).is_err());
        let h = homogeneous_interface(&mat(1.0, 1.0), &mat(2.0, 3.0), 5.0).unwrap();
        assert_eq!((h.t_delta, h.c0, h.c1), (0.0, 0.0, 0.0));
    }
}
