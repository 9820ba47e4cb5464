//! Numerical laboratory for the radial semilinear wave equation
//! `∂ₜ²u = Δu + |u|^p` at the critical exponent: a finite-difference
//! solver plus the functionals, integral transforms, and comparison ODE
//! used to check each estimate of the finite-time blow-up argument.

pub mod criticality;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod io;
pub mod ode_blowup;
pub mod quadrature;
pub mod radon;
pub mod sharp_transform;
pub mod special_fn;
pub mod wave_solver;

pub use criticality::{critical_exponent, exponent_set, verify_critical_identities, ExponentSet};
pub use error::{Error, Result};
pub use special_fn::TestFunctionContext;
pub use wave_solver::{
    make_initial_state, simulate, BlowupReport, InitialDataKind, InitialDataSpec, RadialState,
    SimulationConfig, SimulationOptions, Verdict,
};
