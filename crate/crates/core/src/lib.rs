//! Pseudo-spectral solver for the hydrostatic Boussinesq channel flow with
//! partial vertical heat diffusion, plus the machinery that certifies the
//! a priori bounds satisfied along computed trajectories: functional
//! monitors, the K-bound ladder, a maximum-principle check, randomized
//! verification of the functional-inequality toolkit, and a twin-run
//! continuous-dependence experiment.
//!
//! Layout
//! - [`grid`], [`field`], [`calculus`], [`norms`]: the discrete vocabulary
//!   (Fourier x cosine/sine collocation, operators, quadratures).
//! - [`model`]: right-hand sides, diagnostics, and the barotropic projection.
//! - [`stepper`]: IMEX time integration and trajectory runs.
//! - [`monitor`]: derived variables, functionals, bound evaluation,
//!   certification, twin runs.
//! - [`ineq`]: randomized inequality verification.

pub use ndarray;

pub mod calculus;
pub mod error;
pub mod field;
pub mod grid;
pub mod ineq;
pub mod model;
pub mod monitor;
pub mod norms;
pub mod stepper;

pub use error::{CoreError, Result};
pub use field::{ScalarField2, ScalarField3, VectorField2, VectorFieldH};
pub use grid::{BasisTag, Grid, GridSpec};
pub use model::{ModelParams, PeModel, State, Tendency, TermToggles};
pub use monitor::{
    certify, eval_bound, max_principle_check, sample_functionals, twin_run, BoundName,
    CertificateReport, DerivedVars, FunctionalSample, InitNorms, TwinReport,
};
pub use stepper::{run, RunOutcome, RunSummary, Scheme, Stepper, StepperConfig};
