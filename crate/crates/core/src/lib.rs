//! Energy-stable summation-by-parts discretization of one-dimensional
//! two-phase evaporation with a sharp, moving interface.
//!
//! The vapor occupies `[x0, x_δ(t)]` and the liquid `[x_δ(t), xn]`. Each
//! phase is mapped onto a fixed reference interval, discretized with a
//! diagonal-norm SBP operator, and coupled to the other phase through
//! penalty (SAT) terms at the interface. The interface moves with the
//! latent-heat balance of the two heat fluxes.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below fix the usual choice.
//!
//! ```
//! use evapsbp::{preset, run_simulation, PresetName};
//!
//! let mut setup = preset::<f64>(PresetName::Stefan);
//! setup.config.t_end = 1e-6;
//! let problem = setup.problem().unwrap();
//! let init = setup.initial_state(&problem).unwrap();
//! let report = run_simulation(&problem, &init).unwrap();
//! assert!(report.summary.final_x_delta > setup.x_delta0);
//! ```

// `!(x > 0)` style guards are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod interface;
pub mod mesh;
pub mod mms;
pub mod physics;
pub mod presets;
pub mod problem;
pub mod run;
pub mod sbp;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use energy::{audit_step, EnergyLedger, InterfaceValues, PhaseView};
pub use error::{Error, Result};
pub use interface::{classify_strong_regime, InterfaceState, PenaltySet, Regime};
pub use mesh::{build_mesh, MeshState};
pub use mms::{MmsDescriptor, MmsField, Phase};
pub use physics::{derive_interface_constants, InterfacePhysics, MaterialProps};
pub use presets::{preset, PresetName};
pub use problem::{InitialProfile, Problem, ProblemSetup, SimState, SolverConfig};
pub use run::{manufactured_error, run_simulation, EnergyPoint, RunFailure, RunReport, RunSummary, Snapshot};
pub use sbp::{SbpOperator, Side};
pub use scalar::Scalar;
pub use solver::{assemble_rhs, rk4_step, stable_dt, RhsOutput};

pub type SbpOperatorF64 = SbpOperator<f64>;
pub type ProblemF64 = Problem<f64>;
pub type ProblemSetupF64 = ProblemSetup<f64>;
pub type SimStateF64 = SimState<f64>;
pub type RunReportF64 = RunReport<f64>;
pub type EnergyLedgerF64 = EnergyLedger<f64>;

pub type SbpOperatorF32 = SbpOperator<f32>;
pub type ProblemF32 = Problem<f32>;
pub type SimStateF32 = SimState<f32>;
