//! Shared fixtures for the kernel benchmarks.

use std::sync::Arc;

use pe_core::ineq::{trial_scalar_3d, TrialSpec};
use pe_core::model::barotropic_project;
use pe_core::{BasisTag, Grid, GridSpec, ModelParams, PeModel, ScalarField3, State, VectorFieldH};

pub fn bench_grid(nx: usize, nz: usize) -> Arc<Grid> {
    Grid::new(GridSpec::new(nx, nx, nz, 1.0, true)).expect("valid bench grid")
}

pub fn bench_state(grid: &Arc<Grid>, seed: u64) -> State {
    let spec = |s: u64| TrialSpec { seed: s, band_limit: 5, decay: 1.5 };
    let v = VectorFieldH::new(
        trial_scalar_3d(grid, &spec(seed), BasisTag::Cosine),
        trial_scalar_3d(grid, &spec(seed + 1), BasisTag::Cosine),
    )
    .expect("components on one grid");
    let temp = trial_scalar_3d(grid, &spec(seed + 2), BasisTag::Sine);
    let v = barotropic_project(&v);
    State::new(v, temp, 0.0).expect("valid state")
}

pub fn bench_model(grid: &Arc<Grid>) -> PeModel {
    let q = ScalarField3::zeros(grid, BasisTag::Sine);
    let params = ModelParams::new(1.0, 1.0, 1.0, 0.5, grid, q).expect("valid params");
    PeModel::new(params).expect("valid model")
}
