//! Manufactured solutions for convergence studies.
//!
//! Each phase field has the form `T*(x, t) = T_δ + g(x - X(t), t)` with
//! `g(0, t) = 0`, so the interface conditions hold exactly along the
//! prescribed trajectory `X(t) = center + amplitude · sin(frequency · t)`.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MmsField<T> {
    /// `g = amplitude · sin(wavenumber · s) · (1 + temporal_amp · sin(temporal_freq · t))`.
    Sinusoidal {
        amplitude: T,
        wavenumber: T,
        temporal_amp: T,
        temporal_freq: T,
    },
    /// `g = slope · s`.
    Linear { slope: T },
}

/// Phase selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Vapor,
    Liquid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsDescriptor<T> {
    pub vapor: MmsField<T>,
    pub liquid: MmsField<T>,
    pub center: T,
    pub amplitude: T,
    pub frequency: T,
    /// Integrate the interface from the latent-heat balance (plus a forcing
    /// correction) instead of prescribing it.
    pub free_interface: bool,
}

/// Value and derivatives of a manufactured field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub value: T,
    pub dt: T,
    pub dx: T,
    pub dxx: T,
}

impl<T: Scalar> MmsDescriptor<T> {
    pub fn x_delta(&self, t: T) -> T {
        self.center + self.amplitude * (self.frequency * t).sin()
    }

    pub fn x_delta_rate(&self, t: T) -> T {
        self.amplitude * self.frequency * (self.frequency * t).cos()
    }

    pub fn field(&self, phase: Phase) -> &MmsField<T> {
        match phase {
            Phase::Vapor => &self.vapor,
            Phase::Liquid => &self.liquid,
        }
    }

    /// `T*` and its derivatives at physical position `x`.
    pub fn sample(&self, phase: Phase, t_delta: T, x: T, t: T) -> FieldSample<T> {
        let s = x - self.x_delta(t);
        let xr = self.x_delta_rate(t);
        match *self.field(phase) {
            MmsField::Sinusoidal {
                amplitude,
                wavenumber,
                temporal_amp,
                temporal_freq,
            } => {
                let m = T::one() + temporal_amp * (temporal_freq * t).sin();
                let mt = temporal_amp * temporal_freq * (temporal_freq * t).cos();
                let (sn, cs) = (wavenumber * s).sin_cos();
                FieldSample {
                    value: t_delta + amplitude * sn * m,
                    dt: amplitude * (-wavenumber * xr * cs * m + sn * mt),
                    dx: amplitude * wavenumber * cs * m,
                    dxx: -amplitude * wavenumber * wavenumber * sn * m,
                }
            }
            MmsField::Linear { slope } => FieldSample {
                value: t_delta + slope * s,
                dt: -slope * xr,
                dx: slope,
                dxx: T::zero(),
            },
        }
    }

    /// Nodal values of `T*` at the given physical nodes.
    pub fn values(&self, phase: Phase, t_delta: T, nodes: &[T], t: T) -> Vec<T> {
        nodes
            .iter()
            .map(|&x| self.sample(phase, t_delta, x, t).value)
            .collect()
    }

    /// Interface velocity implied by the latent-heat balance of `T*`.
    pub fn balance_velocity(&self, t_delta: T, k_v: T, k_l: T, rho_v: T, h_lv: T, t: T) -> T {
        let xd = self.x_delta(t);
        let gv = self.sample(Phase::Vapor, t_delta, xd, t).dx;
        let gl = self.sample(Phase::Liquid, t_delta, xd, t).dx;
        (k_l * gl - k_v * gv) / (rho_v * h_lv)
    }
}

/// Residual of the transformed transport equation under `T*`:
/// `J · (beta (T*_t + u T*_x) - k T*_xx)` at every node. Adding it to the
/// semi-discrete right-hand side makes `T*` an exact solution.
#[allow(clippy::too_many_arguments)]
pub fn mms_source<T: Scalar>(
    desc: &MmsDescriptor<T>,
    phase: Phase,
    time: T,
    nodes: &[T],
    t_delta: T,
    beta: T,
    k: T,
    velocity: T,
    jacobian: T,
) -> Vec<T> {
    nodes
        .iter()
        .map(|&x| {
            let f = desc.sample(phase, t_delta, x, time);
            jacobian * (beta * (f.dt + velocity * f.dx) - k * f.dxx)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sinus() -> MmsDescriptor<f64> {
        MmsDescriptor {
            vapor: MmsField::Sinusoidal {
                amplitude: 0.7,
                wavenumber: 3.0,
                temporal_amp: 0.4,
                temporal_freq: 2.0,
            },
            liquid: MmsField::Linear { slope: -1.5 },
            center: 0.45,
            amplitude: 0.05,
            frequency: 4.0,
            free_interface: false,
        }
    }

    #[test]
    fn interface_values_match_t_delta() {
        let d = sinus();
        for t in [0.0, 0.3, 1.7] {
            let xd = d.x_delta(t);
            for ph in [Phase::Vapor, Phase::Liquid] {
                assert!((d.sample(ph, 2.0, xd, t).value - 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let d = sinus();
        let (x, t, e) = (0.31, 0.4, 1e-5);
        for ph in [Phase::Vapor, Phase::Liquid] {
            let s = d.sample(ph, 1.0, x, t);
            let v = |x, t| d.sample(ph, 1.0, x, t).value;
            let ft = (v(x, t + e) - v(x, t - e)) / (2.0 * e);
            let fx = (v(x + e, t) - v(x - e, t)) / (2.0 * e);
            let fxx = (v(x + e, t) - 2.0 * v(x, t) + v(x - e, t)) / (e * e);
            assert!((s.dt - ft).abs() < 1e-8);
            assert!((s.dx - fx).abs() < 1e-8);
            assert!((s.dxx - fxx).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_field_static_interface_has_zero_source() {
        let d = MmsDescriptor {
            vapor: MmsField::Linear { slope: 0.0 },
            liquid: MmsField::Linear { slope: 0.0 },
            center: 0.5,
            amplitude: 0.0,
            frequency: 1.0,
            free_interface: false,
        };
        let nodes = [0.1, 0.2, 0.3];
        let src = mms_source(&d, Phase::Vapor, 0.7, &nodes, 3.0, 2.0, 5.0, 1.3, 0.5);
        assert!(src.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_field_without_flow_has_zero_source() {
        let d = MmsDescriptor {
            vapor: MmsField::Linear { slope: 4.0 },
            liquid: MmsField::Linear { slope: -2.0 },
            center: 0.5,
            amplitude: 0.0,
            frequency: 1.0,
            free_interface: false,
        };
        let src = mms_source(&d, Phase::Liquid, 0.0, &[0.6, 0.9], 1.0, 3.0, 7.0, 0.0, 0.5);
        assert!(src.iter().all(|v| *v == 0.0));
    }
}
