//! Seeded property suite backing the `verify` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{
    grad_pval_diagnostics, it_direct, itsat_closed_form, itsat_envelope, pval_matrix, pval_split,
    quadratic_form, sat_direct, InterfaceValues, PhaseView,
};
use crate::error::Result;
use crate::interface::{classify_strong_regime, mesh_velocity, select_penalties, PenaltySet, Regime};
use crate::mesh::{build_mesh, gcl_residual};
use crate::presets::{preset, PresetName};
use crate::run::run_simulation;
use crate::sbp::{min_points, SbpOperator};

/// Deliberate defects used to check that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Flip the sign of the advective interface penalties.
    PenaltySignFlip,
    /// Perturb one off-diagonal entry of `Q`.
    QPerturbation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random samples per sign regime.
    pub samples: usize,
    /// Steps of the steady-state preservation check.
    pub steady_steps: usize,
    pub mutation: Option<Mutation>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            samples: 10_000,
            steady_steps: 1000,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: &'static str,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl PropertyReport {
    fn new(name: &'static str, max_residual: f64, tolerance: f64) -> Self {
        PropertyReport {
            name,
            passed: max_residual <= tolerance,
            max_residual,
            tolerance,
        }
    }
}

pub const ORDERS: [usize; 3] = [2, 4, 6];

fn operator(order: usize, n: usize, mutation: Option<Mutation>) -> Result<SbpOperator<f64>> {
    let op = SbpOperator::unit_interval(order, n)?;
    Ok(match mutation {
        Some(Mutation::QPerturbation) => op.perturbed(1, 2, 1e-6),
        _ => op,
    })
}

fn sizes(order: usize) -> Result<[usize; 3]> {
    Ok([min_points(order)?, 33, 101])
}

/// `max |Q + Qᵀ - B|` over all orders and sizes.
pub fn sbp_identity(mutation: Option<Mutation>) -> Result<PropertyReport> {
    let mut worst = 0.0f64;
    for order in ORDERS {
        for n in sizes(order)? {
            worst = worst.max(operator(order, n, mutation)?.sbp_property_residual());
        }
    }
    Ok(PropertyReport::new("sbp_identity", worst, 1e-13))
}

/// Relative error of `D` on monomials: interior rows up to the interior
/// order, closure rows up to half of it.
pub fn derivative_accuracy(mutation: Option<Mutation>) -> Result<PropertyReport> {
    let mut worst = 0.0f64;
    for order in ORDERS {
        for n in sizes(order)? {
            let op = operator(order, n, mutation)?;
            let x = op.grid();
            let rows = op.closure_rows();
            for p in 0..=order {
                let f: Vec<f64> = x.iter().map(|&xi| xi.powi(p as i32)).collect();
                let d = op.apply_derivative(&f)?;
                for i in 0..n {
                    let boundary = i < rows || i >= n - rows;
                    if boundary && p > order / 2 {
                        continue;
                    }
                    let exact = if p == 0 { 0.0 } else { p as f64 * x[i].powi(p as i32 - 1) };
                    worst = worst.max((d[i] - exact).abs() / exact.abs().max(1.0));
                }
            }
        }
    }
    Ok(PropertyReport::new("derivative_accuracy", worst, 1e-10))
}

/// A random interface configuration in a prescribed sign regime of `a_v`.
#[derive(Debug, Clone)]
pub struct RandomInterface {
    pub op_v: SbpOperator<f64>,
    pub op_l: SbpOperator<f64>,
    pub t_v: Vec<f64>,
    pub t_l: Vec<f64>,
    pub beta_v: f64,
    pub beta_l: f64,
    pub k_v: f64,
    pub k_l: f64,
    pub j_v: f64,
    pub j_l: f64,
    pub gamma: f64,
    pub t_delta: f64,
    pub rho_v: f64,
    pub h_lv: f64,
    pub a_v: f64,
    pub sigma_free: f64,
}

impl RandomInterface {
    pub fn sample<R: Rng>(rng: &mut R, regime: std::cmp::Ordering) -> Self {
        let order = ORDERS[rng.gen_range(0..3)];
        let min = min_points(order).unwrap_or(12);
        let n_v = rng.gen_range(min..min + 20);
        let n_l = rng.gen_range(min..min + 20);
        let t_delta = rng.gen_range(0.5..2.0);
        let mut field = |n: usize| -> Vec<f64> { (0..n).map(|_| t_delta + rng.gen_range(-1.0..1.0)).collect() };
        let t_v = field(n_v);
        let t_l = field(n_l);
        let beta_v = rng.gen_range(0.1..2.0);
        let beta_l = rng.gen_range(beta_v..4.0);
        let magnitude = rng.gen_range(0.05..2.0);
        let a_v = match regime {
            std::cmp::Ordering::Less => -magnitude,
            std::cmp::Ordering::Greater => magnitude,
            std::cmp::Ordering::Equal => 0.0,
        };
        RandomInterface {
            op_v: SbpOperator::unit_interval(order, n_v).expect("valid size"),
            op_l: SbpOperator::unit_interval(order, n_l).expect("valid size"),
            t_v,
            t_l,
            beta_v,
            beta_l,
            k_v: rng.gen_range(0.01..1.0),
            k_l: rng.gen_range(0.01..1.0),
            j_v: rng.gen_range(0.1..1.0),
            j_l: rng.gen_range(0.1..1.0),
            gamma: rng.gen_range(0.05..1.0),
            t_delta,
            rho_v: rng.gen_range(0.2..2.0),
            h_lv: rng.gen_range(0.5..3.0),
            a_v,
            sigma_free: rng.gen_range(0.0..2.0),
        }
    }

    pub fn views(&self) -> (PhaseView<'_, f64>, PhaseView<'_, f64>) {
        (
            PhaseView {
                temps: &self.t_v,
                op: &self.op_v,
                beta: self.beta_v,
                k: self.k_v,
                jacobian: self.j_v,
            },
            PhaseView {
                temps: &self.t_l,
                op: &self.op_l,
                beta: self.beta_l,
                k: self.k_l,
                jacobian: self.j_l,
            },
        )
    }

    pub fn penalties(&self) -> PenaltySet<f64> {
        select_penalties(
            self.a_v,
            self.beta_v,
            self.beta_l,
            self.gamma,
            self.k_v,
            self.k_l,
            self.j_v,
            self.j_l,
            self.sigma_free,
        )
    }

    pub fn a_l(&self) -> f64 {
        self.gamma * self.a_v
    }

    /// Interface speed implied by the flux jump of this state.
    pub fn u_tilde(&self) -> Result<f64> {
        let fv = self.k_v / self.j_v * self.op_v.derivative_at(&self.t_v, self.t_v.len() - 1)?;
        let fl = self.k_l / self.j_l * self.op_l.derivative_at(&self.t_l, 0)?;
        mesh_velocity(fv, fl, self.rho_v, self.h_lv)
    }

    pub fn interface_values(&self) -> Result<InterfaceValues<f64>> {
        Ok(InterfaceValues {
            t_v: self.t_v[self.t_v.len() - 1],
            t_l: self.t_l[0],
            t_delta: self.t_delta,
            a_v: self.a_v,
            a_l: self.a_l(),
            beta_v: self.beta_v,
            beta_l: self.beta_l,
            u_tilde: self.u_tilde()?,
            c1: 2.0 * self.t_delta * self.rho_v * self.h_lv,
            sigma_free: self.sigma_free,
        })
    }
}

const REGIMES: [std::cmp::Ordering; 3] = [
    std::cmp::Ordering::Less,
    std::cmp::Ordering::Greater,
    std::cmp::Ordering::Equal,
];

/// `|IT + SAT - closed form| / max(1, |closed form|)`, worst over the samples,
/// and the worst amount by which `IT + SAT` exceeds the data envelope.
pub fn closed_form_equivalence(
    seed: u64,
    samples: usize,
    mutation: Option<Mutation>,
) -> Result<(PropertyReport, PropertyReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut excess) = (0.0f64, f64::NEG_INFINITY);
    for regime in REGIMES {
        for _ in 0..samples {
            let s = RandomInterface::sample(&mut rng, regime);
            let mut pen = s.penalties();
            if mutation == Some(Mutation::PenaltySignFlip) {
                pen.sigma_v1 = -pen.sigma_v1;
                pen.sigma_l1 = -pen.sigma_l1;
            }
            let (v, l) = s.views();
            let total = it_direct(&v, &l, s.a_v, s.a_l())? + sat_direct(&v, &l, s.t_delta, &pen)?;
            let iv = s.interface_values()?;
            let closed = itsat_closed_form(&iv);
            worst = worst.max((total - closed).abs() / closed.abs().max(1.0));
            excess = excess.max((total - itsat_envelope(&iv)) / closed.abs().max(1.0));
        }
    }
    Ok((
        PropertyReport::new("closed_form_equivalence", worst, 1e-10),
        PropertyReport::new("interface_envelope", excess.max(0.0), 1e-12),
    ))
}

/// Point-value quadratic form versus its three-part split, on random triples.
pub fn pval_decomposition(seed: u64, samples: usize) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst = 0.0f64;
    for regime in REGIMES {
        for _ in 0..samples {
            let s = RandomInterface::sample(&mut rng, regime);
            let pen = s.penalties();
            let z = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            let m = pval_matrix(s.a_v, s.a_l(), s.beta_v, s.beta_l, &pen);
            let q = quadratic_form(&m, z);
            let (p2, pv, pl) = pval_split(z[0], z[1], z[2], s.a_v, s.a_l(), s.beta_v, s.beta_l, &pen);
            worst = worst.max((q - (p2 + pv + pl)).abs() / q.abs().max(1.0));
            let (v, l) = s.views();
            grad_pval_diagnostics(&v, &l, s.t_delta, s.a_v, s.a_l(), &pen)?;
        }
    }
    Ok(PropertyReport::new("pval_decomposition", worst, 1e-12))
}

/// GCL residual over random meshes and interface velocities.
pub fn gcl(seed: u64, samples: usize) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c);
    let mut worst = 0.0f64;
    for _ in 0..samples.min(1000) {
        let order = ORDERS[rng.gen_range(0..3)];
        let min = min_points(order)?;
        let (n_v, n_l) = (rng.gen_range(min..101), rng.gen_range(min..101));
        let x_delta = rng.gen_range(0.05..0.95);
        let u = rng.gen_range(-1.0..1.0);
        let mesh = build_mesh(0.0, 1.0, x_delta, n_v, n_l)?;
        let (ov, ol) = (SbpOperator::unit_interval(order, n_v)?, SbpOperator::unit_interval(order, n_l)?);
        let (rv, rl) = gcl_residual(&mesh, u, &ov, &ol)?;
        worst = worst.max(rv).max(rl);
    }
    Ok(PropertyReport::new("gcl", worst, 1e-12))
}

/// Max-norm drift of the all-saturated preset.
pub fn steady_state(steps: usize) -> Result<PropertyReport> {
    let mut setup = preset::<f64>(PresetName::Steady);
    let p0 = setup.problem()?;
    let init = setup.initial_state(&p0)?;
    let dt = crate::solver::stable_dt(&p0, &init)?;
    setup.config.dt = Some(dt);
    setup.config.t_end = dt * steps as f64;
    setup.config.snapshot_every = steps.max(1);
    let p = setup.problem()?;
    let report = run_simulation(&p, &init)?;
    let mut drift = if report.is_success() { 0.0f64 } else { f64::INFINITY };
    for snap in &report.snapshots {
        for (a, b) in snap.state.t_v.iter().chain(&snap.state.t_l).zip(init.t_v.iter().chain(&init.t_l)) {
            drift = drift.max((a - b).abs());
        }
        drift = drift.max((snap.state.x_delta - init.x_delta).abs());
    }
    Ok(PropertyReport::new("steady_state", drift, 1e-12))
}

/// Classifier against `a_v < 0 && u >= 0` on the sign grid.
pub fn regime_grid() -> PropertyReport {
    let mut mismatches = 0;
    for a in [-1.0, 0.0, 1.0] {
        for u in [-1.0, 0.0, 1.0] {
            let expect = if a < 0.0 && u >= 0.0 {
                Regime::Dissipative
            } else {
                Regime::Bounded
            };
            if classify_strong_regime(a, u) != expect {
                mismatches += 1;
            }
        }
    }
    PropertyReport::new("regime_classifier", mismatches as f64, 0.0)
}

/// Runs every property.
pub fn run_property_suite(opts: &VerifyOptions) -> Result<Vec<PropertyReport>> {
    let (closed, envelope) = closed_form_equivalence(opts.seed, opts.samples, opts.mutation)?;
    Ok(vec![
        sbp_identity(opts.mutation)?,
        derivative_accuracy(opts.mutation)?,
        closed,
        envelope,
        pval_decomposition(opts.seed, opts.samples)?,
        gcl(opts.seed, opts.samples)?,
        steady_state(opts.steady_steps)?,
        regime_grid(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(mutation: Option<Mutation>) -> Vec<PropertyReport> {
        run_property_suite(&VerifyOptions {
            seed: 7,
            samples: 200,
            steady_steps: 20,
            mutation,
        })
        .unwrap()
    }

    #[test]
    fn clean_suite_passes() {
        for r in quick(None) {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn penalty_flip_is_caught() {
        let r = quick(Some(Mutation::PenaltySignFlip));
        let c = r.iter().find(|r| r.name == "closed_form_equivalence").unwrap();
        assert!(!c.passed);
    }

    #[test]
    fn q_perturbation_is_caught() {
        let r = quick(Some(Mutation::QPerturbation));
        assert!(!r.iter().find(|r| r.name == "sbp_identity").unwrap().passed);
    }
}
