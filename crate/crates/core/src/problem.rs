//! Problem definition: solver configuration, assembled operators, state.

use crate::error::{Error, Result};
use crate::mesh::build_mesh;
use crate::mms::{MmsDescriptor, Phase};
use crate::physics::{derive_interface_constants, homogeneous_interface, InterfacePhysics, MaterialProps};
use crate::sbp::{min_points, SbpOperator};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub n_v: usize,
    pub n_l: usize,
    pub sbp_order: usize,
    /// Fixed time step; `None` picks a stable step from the initial state.
    pub dt: Option<T>,
    pub t_end: T,
    /// Dirichlet data at the vapor's outer boundary (ξ = 0).
    pub outer_bc_v: T,
    /// Dirichlet data at the liquid's outer boundary (η = 1).
    pub outer_bc_l: T,
    /// Uniform vapor material velocity.
    pub u_v: T,
    pub sigma_free: T,
    /// Point-penalty multiplier of the outer Dirichlet SAT.
    pub c_stab: T,
    pub audit_every: usize,
    pub snapshot_every: usize,
    pub mms: Option<MmsDescriptor<T>>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            n_v: 33,
            n_l: 33,
            sbp_order: 4,
            dt: None,
            t_end: T::zero(),
            outer_bc_v: T::zero(),
            outer_bc_l: T::zero(),
            u_v: T::zero(),
            sigma_free: T::one(),
            c_stab: T::one(),
            audit_every: 10,
            snapshot_every: 10,
            mms: None,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let min = min_points(self.sbp_order)?;
        for (name, n) in [("n_v", self.n_v), ("n_l", self.n_l)] {
            if n < min {
                return Err(Error::invalid(
                    name,
                    format!("order-{} operators need at least {min} nodes", self.sbp_order),
                ));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > T::zero()) || !dt.is_finite() {
                return Err(Error::invalid("dt", "must be positive"));
            }
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::invalid("t_end", "must be non-negative"));
        }
        if !(self.sigma_free >= T::zero()) {
            return Err(Error::invalid("sigma_free", "must be non-negative"));
        }
        if !(self.c_stab > T::zero()) {
            return Err(Error::invalid("c_stab", "must be positive"));
        }
        for (name, v) in [
            ("outer_bc_v", self.outer_bc_v),
            ("outer_bc_l", self.outer_bc_l),
            ("u_v", self.u_v),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.audit_every == 0 {
            return Err(Error::invalid("audit_every", "must be at least 1"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::invalid("snapshot_every", "must be at least 1"));
        }
        Ok(())
    }
}

/// Everything a right-hand-side evaluation needs, immutable during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<T> {
    pub vapor: MaterialProps<T>,
    pub liquid: MaterialProps<T>,
    pub interface: InterfacePhysics<T>,
    pub x0: T,
    pub xn: T,
    pub config: SolverConfig<T>,
    pub op_v: SbpOperator<T>,
    pub op_l: SbpOperator<T>,
}

impl<T: Scalar> Problem<T> {
    pub fn new(
        vapor: MaterialProps<T>,
        liquid: MaterialProps<T>,
        interface: InterfacePhysics<T>,
        x0: T,
        xn: T,
        config: SolverConfig<T>,
    ) -> Result<Self> {
        vapor.validate()?;
        liquid.validate()?;
        config.validate()?;
        if !(x0 < xn) {
            return Err(Error::Geometry(format!("need x0 < xn, got {x0} / {xn}")));
        }
        let op_v = SbpOperator::unit_interval(config.sbp_order, config.n_v)?;
        let op_l = SbpOperator::unit_interval(config.sbp_order, config.n_l)?;
        Ok(Problem {
            vapor,
            liquid,
            interface,
            x0,
            xn,
            config,
            op_v,
            op_l,
        })
    }

    /// Outer Dirichlet data at time `t` (manufactured values in MMS mode).
    pub fn outer_data(&self, t: T) -> (T, T) {
        match &self.config.mms {
            Some(m) => (
                m.sample(Phase::Vapor, self.interface.t_delta, self.x0, t).value,
                m.sample(Phase::Liquid, self.interface.t_delta, self.xn, t).value,
            ),
            None => (self.config.outer_bc_v, self.config.outer_bc_l),
        }
    }

    /// Minimum distance kept between the interface and an outer boundary.
    pub fn depletion_margin(&self) -> T {
        let cells = T::from_usize_lossy(self.config.n_v + self.config.n_l - 2);
        T::two() * (self.xn - self.x0) / cells
    }
}

/// Coupled semi-discrete state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState<T> {
    pub t_v: Vec<T>,
    pub t_l: Vec<T>,
    pub x_delta: T,
    pub time: T,
}

impl<T: Scalar> SimState<T> {
    pub fn is_finite(&self) -> bool {
        self.x_delta.is_finite()
            && self.time.is_finite()
            && self.t_v.iter().chain(&self.t_l).all(|v| v.is_finite())
    }

    /// Manufactured solution sampled on the grid at time `t`.
    pub fn manufactured(problem: &Problem<T>, desc: &MmsDescriptor<T>, t: T) -> Result<Self> {
        let x_delta = desc.x_delta(t);
        let mesh = build_mesh(problem.x0, problem.xn, x_delta, problem.config.n_v, problem.config.n_l)?;
        let td = problem.interface.t_delta;
        Ok(SimState {
            t_v: desc.values(Phase::Vapor, td, &mesh.vapor_nodes(), t),
            t_l: desc.values(Phase::Liquid, td, &mesh.liquid_nodes(), t),
            x_delta,
            time: t,
        })
    }
}

/// Initial temperature profile over a phase's reference interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialProfile<T> {
    Uniform(T),
    /// Linear from `left` (reference coordinate 0) to `right` (coordinate 1).
    Linear { left: T, right: T },
}

impl<T: Scalar> InitialProfile<T> {
    pub fn sample(&self, n: usize) -> Vec<T> {
        let h = T::one() / T::from_usize_lossy(n - 1);
        (0..n)
            .map(|i| match *self {
                InitialProfile::Uniform(v) => v,
                InitialProfile::Linear { left, right } => {
                    let s = T::from_usize_lossy(i) * h;
                    left + (right - left) * s
                }
            })
            .collect()
    }

    pub fn min_max(&self) -> (T, T) {
        match *self {
            InitialProfile::Uniform(v) => (v, v),
            InitialProfile::Linear { left, right } => (left.min(right), left.max(right)),
        }
    }

    fn shifted(&self, by: T) -> Self {
        match *self {
            InitialProfile::Uniform(v) => InitialProfile::Uniform(v + by),
            InitialProfile::Linear { left, right } => InitialProfile::Linear {
                left: left + by,
                right: right + by,
            },
        }
    }

    fn is_finite(&self) -> bool {
        let (a, b) = self.min_max();
        a.is_finite() && b.is_finite()
    }
}

/// A complete, unassembled problem description.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSetup<T> {
    pub vapor: MaterialProps<T>,
    pub liquid: MaterialProps<T>,
    pub t_delta: T,
    pub h_lv: T,
    pub x0: T,
    pub xn: T,
    pub x_delta0: T,
    pub initial_v: InitialProfile<T>,
    pub initial_l: InitialProfile<T>,
    pub config: SolverConfig<T>,
    /// Zero interface temperature is only accepted for homogeneous-data variants.
    pub homogeneous: bool,
}

impl<T: Scalar> ProblemSetup<T> {
    pub fn interface_physics(&self) -> Result<InterfacePhysics<T>> {
        if self.homogeneous && self.t_delta == T::zero() {
            homogeneous_interface(&self.vapor, &self.liquid, self.h_lv)
        } else {
            derive_interface_constants(&self.vapor, &self.liquid, self.t_delta, self.h_lv)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.vapor
            .validate()
            .map_err(|e| prefix(e, "materials.vapor"))?;
        self.liquid
            .validate()
            .map_err(|e| prefix(e, "materials.liquid"))?;
        self.interface_physics().map_err(|e| prefix(e, "interface"))?;
        self.config.validate().map_err(|e| prefix(e, "solver"))?;
        if !(self.x0 < self.x_delta0 && self.x_delta0 < self.xn) {
            return Err(Error::invalid(
                "domain.x_delta",
                "must lie strictly between domain.x0 and domain.xn",
            ));
        }
        if !self.initial_v.is_finite() || !self.initial_l.is_finite() {
            return Err(Error::invalid("initial", "profiles must be finite"));
        }
        if let Some(m) = &self.config.mms {
            let xd = m.x_delta(T::zero());
            let swing = m.amplitude.abs();
            if !(self.x0 < xd - swing && xd + swing < self.xn) {
                return Err(Error::invalid(
                    "mms",
                    "prescribed interface trajectory must stay inside the domain",
                ));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem<T>> {
        self.validate()?;
        Problem::new(
            self.vapor,
            self.liquid,
            self.interface_physics()?,
            self.x0,
            self.xn,
            self.config.clone(),
        )
    }

    pub fn initial_state(&self, problem: &Problem<T>) -> Result<SimState<T>> {
        if let Some(m) = &problem.config.mms {
            return SimState::manufactured(problem, m, T::zero());
        }
        Ok(SimState {
            t_v: self.initial_v.sample(self.config.n_v),
            t_l: self.initial_l.sample(self.config.n_l),
            x_delta: self.x_delta0,
            time: T::zero(),
        })
    }

    /// Same problem with every temperature shifted so that the interface
    /// temperature and the outer data vanish.
    pub fn homogeneous(&self) -> Self {
        let shift = -self.t_delta;
        let mut out = self.clone();
        out.t_delta = T::zero();
        out.initial_v = self.initial_v.shifted(shift);
        out.initial_l = self.initial_l.shifted(shift);
        out.config.outer_bc_v = T::zero();
        out.config.outer_bc_l = T::zero();
        out.homogeneous = true;
        out
    }
}

fn prefix(e: Error, section: &str) -> Error {
    match e {
        Error::InvalidParameter { name, constraint } => Error::InvalidParameter {
            name: format!("{section}.{name}"),
            constraint,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset, PresetName};

    #[test]
    fn validation_names_fields() {
        let mut s = preset::<f64>(PresetName::Stefan);
        s.vapor.rho = -1.0;
        match s.validate() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "materials.vapor.rho"),
            other => panic!("unexpected {other:?}"),
        }
        let mut s = preset::<f64>(PresetName::Stefan);
        s.config.n_v = 5;
        assert!(matches!(s.validate(), Err(Error::InvalidParameter { name, .. }) if name == "solver.n_v"));
        let mut s = preset::<f64>(PresetName::Stefan);
        s.x_delta0 = s.xn;
        assert!(s.validate().is_err());
        let mut s = preset::<f64>(PresetName::Stefan);
        s.t_delta = 0.0;
        assert!(s.validate().is_err());
        assert!(preset::<f64>(PresetName::Stefan).homogeneous().validate().is_ok());
    }

    #[test]
    fn profiles() {
        let p = InitialProfile::Linear { left: 2.0, right: 0.0 };
        assert_eq!(p.sample(5), vec![2.0, 1.5, 1.0, 0.5, 0.0]);
        assert_eq!(InitialProfile::Uniform(3.0).sample(3), vec![3.0; 3]);
    }
}
