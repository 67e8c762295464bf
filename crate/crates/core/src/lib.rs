//! Traveling-wave speeds and profiles for Fisher–KPP equations with
//! gradient-dependent diffusion, plus a front-tracking PDE simulator to
//! check them against.

pub mod diffusion;
pub mod error;
pub mod numerics;
pub mod pdesim;
pub mod profile;
pub mod reaction;
pub mod shooting;

pub use diffusion::{regularize, DiffusionKind, DiffusionLaw, PowerTerm};
pub use error::{Error, Result};
pub use pdesim::{
    epsilon_sweep, fit_speed, interface_width, run_front, FrontOptions, FrontRun, FrontTrace, Geometry, Grid1D,
    InitialProfile, SimState, Stepper,
};
pub use profile::{ode_residual, reconstruct, tail_report, wave_mass, ProfileOptions, WaveSample, WaveSolution};
pub use reaction::{validate_kpp, validate_kpp_with, ReactionKind, ReactionLaw, Table, ValidationReport};
pub use shooting::{
    find_critical_speed, shoot, speed_identity_residual, CriticalSpeedResult, IntegratorOptions, ShootTrajectory,
    SolverOptions,
};
