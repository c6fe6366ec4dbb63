//! Canonical evaporation set-ups.
//!
//! Property values are saturated water and steam at 1 atm (IAPWS-IF97
//! steam tables, 100 °C): steam rho 0.5976 kg/m³, cp 2080 J/(kg·K),
//! k 0.02509 W/(m·K); water rho 958.35 kg/m³, cp 4215.7 J/(kg·K),
//! k 0.6791 W/(m·K); latent heat 2.2564e6 J/kg; saturation 373.15 K.
//!
//! The vapor occupies `[x0, x_delta]` next to the left wall and the liquid
//! `[x_delta, xn]`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::physics::MaterialProps;
use crate::problem::{InitialProfile, ProblemSetup, SolverConfig};
use crate::scalar::Scalar;

pub const T_SAT: f64 = 373.15;
pub const SUPERHEAT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    /// Superheated vapor at a heated wall, liquid at saturation.
    Stefan,
    /// Saturated vapor, superheated liquid feeding the interface.
    Sucking,
    /// Everything at saturation, no flow: a fixed point of the scheme.
    Steady,
}

impl PresetName {
    pub const ALL: [PresetName; 3] = [PresetName::Stefan, PresetName::Sucking, PresetName::Steady];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Stefan => "stefan",
            PresetName::Sucking => "sucking",
            PresetName::Steady => "steady",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::invalid("preset", format!("unknown preset `{s}` (stefan, sucking, steady)")))
    }
}

pub fn steam<T: Scalar>() -> MaterialProps<T> {
    MaterialProps {
        rho: T::lit(0.5976),
        cp: T::lit(2080.0),
        k: T::lit(0.02509),
    }
}

pub fn water<T: Scalar>() -> MaterialProps<T> {
    MaterialProps {
        rho: T::lit(958.35),
        cp: T::lit(4215.7),
        k: T::lit(0.6791),
    }
}

pub fn preset<T: Scalar>(name: PresetName) -> ProblemSetup<T> {
    let t_sat = T::lit(T_SAT);
    let hot = T::lit(T_SAT + SUPERHEAT);
    let base = ProblemSetup {
        vapor: steam(),
        liquid: water(),
        t_delta: t_sat,
        h_lv: T::lit(2.2564e6),
        x0: T::zero(),
        xn: T::lit(1.0e-3),
        x_delta0: T::lit(1.0e-4),
        initial_v: InitialProfile::Uniform(t_sat),
        initial_l: InitialProfile::Uniform(t_sat),
        config: SolverConfig {
            n_v: 33,
            n_l: 33,
            sbp_order: 4,
            t_end: T::lit(2.0e-5),
            outer_bc_v: t_sat,
            outer_bc_l: t_sat,
            ..SolverConfig::default()
        },
        homogeneous: false,
    };
    match name {
        PresetName::Stefan => ProblemSetup {
            initial_v: InitialProfile::Linear { left: hot, right: t_sat },
            config: SolverConfig {
                outer_bc_v: hot,
                ..base.config.clone()
            },
            ..base
        },
        PresetName::Sucking => ProblemSetup {
            x_delta0: T::lit(5.0e-4),
            initial_l: InitialProfile::Linear { left: t_sat, right: hot },
            config: SolverConfig {
                outer_bc_l: hot,
                ..base.config.clone()
            },
            ..base
        },
        PresetName::Steady => base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for p in PresetName::ALL {
            preset::<f64>(p).validate().unwrap();
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
        }
        assert!("boiling".parse::<PresetName>().is_err());
    }

    #[test]
    fn sucking_liquid_is_superheated() {
        let s = preset::<f64>(PresetName::Sucking);
        let (lo, _) = s.initial_l.min_max();
        assert!(lo >= s.t_delta);
        assert_eq!(s.initial_v, InitialProfile::Uniform(s.t_delta));
    }

    #[test]
    fn stefan_layout() {
        let s = preset::<f64>(PresetName::Stefan);
        assert!(s.x0 < s.x_delta0 && s.x_delta0 < s.xn);
        let (lo, hi) = s.initial_v.min_max();
        assert_eq!(lo, s.t_delta);
        assert!(hi > s.t_delta);
        assert_eq!(s.initial_l, InitialProfile::Uniform(s.t_delta));
    }
}
