//! Named analytic initial conditions and heat-source profiles.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Result};
use pe_core::ineq::{trial_scalar_3d, TrialSpec};
use pe_core::{BasisTag, Grid, ScalarField3, VectorFieldH};

use crate::config::{IcSpec, QSpec, RunConfig};
use crate::snapshot;

/// Build the (not yet projected) initial prognostic fields.
pub fn initial_fields(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<(VectorFieldH, ScalarField3, f64)> {
    let h = grid.h();
    match &cfg.ic {
        IcSpec::Zero => Ok((
            VectorFieldH::zeros(grid, BasisTag::Cosine),
            ScalarField3::zeros(grid, BasisTag::Sine),
            0.0,
        )),
        IcSpec::Taylor { amplitude, temp_amplitude, kx, ky, m } => {
            let (a, at) = (*amplitude, *temp_amplitude);
            let (kx, ky, m) = (*kx as f64, *ky as f64, *m as f64);
            let v = VectorFieldH {
                u1: ScalarField3::from_fn(grid, BasisTag::Cosine, move |x, y, z| {
                    a * (2.0 * PI * kx * x).sin()
                        * (2.0 * PI * ky * y).cos()
                        * (m * PI * (z + h) / h).cos()
                }),
                u2: ScalarField3::from_fn(grid, BasisTag::Cosine, move |x, y, z| {
                    -a * (2.0 * PI * kx * x).cos()
                        * (2.0 * PI * ky * y).sin()
                        * (m * PI * (z + h) / h).cos()
                }),
            };
            let temp = ScalarField3::from_fn(grid, BasisTag::Sine, move |x, y, z| {
                at * (2.0 * PI * kx * x).cos()
                    * (2.0 * PI * ky * y).cos()
                    * (m * PI * (z + h) / h).sin()
            });
            Ok((v, temp, 0.0))
        }
        IcSpec::SingleModeT { temp_amplitude, m } => {
            let at = *temp_amplitude;
            let m = *m as f64;
            let temp = ScalarField3::from_fn(grid, BasisTag::Sine, move |_, _, z| {
                at * (m * PI * (z + h) / h).sin()
            });
            Ok((VectorFieldH::zeros(grid, BasisTag::Cosine), temp, 0.0))
        }
        IcSpec::Random { amplitude, temp_amplitude, band } => {
            let spec = |seed: u64| TrialSpec {
                seed,
                band_limit: *band as usize,
                decay: 1.5,
            };
            let v = VectorFieldH::new(
                trial_scalar_3d(grid, &spec(cfg.seed), BasisTag::Cosine).scaled(*amplitude),
                trial_scalar_3d(grid, &spec(cfg.seed.wrapping_add(1)), BasisTag::Cosine)
                    .scaled(*amplitude),
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            let temp = trial_scalar_3d(grid, &spec(cfg.seed.wrapping_add(2)), BasisTag::Sine)
                .scaled(*temp_amplitude);
            Ok((v, temp, 0.0))
        }
        IcSpec::Snapshot { path } => {
            let state = snapshot::read_snapshot(Path::new(path), cfg.grid.dealias)?;
            let sg = state.grid();
            if sg.nx() != grid.nx() || sg.ny() != grid.ny() || sg.nz() != grid.nz() {
                bail!(
                    "snapshot grid {}x{}x{} does not match config grid {}x{}x{}",
                    sg.nx(), sg.ny(), sg.nz(), grid.nx(), grid.ny(), grid.nz()
                );
            }
            if (sg.h() - grid.h()).abs() > 1e-14 * grid.h() {
                bail!("snapshot depth {} does not match config depth {}", sg.h(), grid.h());
            }
            Ok((state.v, state.temp, state.t))
        }
    }
}

/// Build the heat source on the grid.
pub fn heat_source(cfg: &RunConfig, grid: &Arc<Grid>) -> ScalarField3 {
    let h = grid.h();
    match &cfg.q {
        QSpec::Zero => ScalarField3::zeros(grid, BasisTag::Sine),
        QSpec::WarmPool { amplitude, kx, ky, m } => {
            let (a, kx, ky, m) = (*amplitude, *kx as f64, *ky as f64, *m as f64);
            ScalarField3::from_fn(grid, BasisTag::Sine, move |x, y, z| {
                a * (2.0 * PI * kx * x).cos()
                    * (2.0 * PI * ky * y).cos()
                    * (m * PI * (z + h) / h).sin()
            })
        }
    }
}

/// Perturbation spec for twin runs: `FIELD:KX,KY,M:EPS` with FIELD one of
/// `v1`, `v2`, `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub field: PerturbField,
    pub kx: u32,
    pub ky: u32,
    pub m: u32,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbField {
    V1,
    V2,
    Temp,
}

impl std::str::FromStr for Perturbation {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("perturbation must look like `T:1,0,1:1e-8`, got `{s}`");
        }
        let field = match parts[0] {
            "v1" => PerturbField::V1,
            "v2" => PerturbField::V2,
            "T" => PerturbField::Temp,
            other => bail!("perturbation field must be v1, v2 or T, got `{other}`"),
        };
        let modes: Vec<&str> = parts[1].split(',').collect();
        if modes.len() != 3 {
            bail!("perturbation modes must be `kx,ky,m`, got `{}`", parts[1]);
        }
        let kx = modes[0].trim().parse()?;
        let ky = modes[1].trim().parse()?;
        let m = modes[2].trim().parse()?;
        let eps: f64 = parts[2].trim().parse()?;
        Ok(Perturbation { field, kx, ky, m, eps })
    }
}

/// Single-mode bump matching the tag of the perturbed field.
pub fn perturbation_field(p: &Perturbation, grid: &Arc<Grid>) -> ScalarField3 {
    let h = grid.h();
    let (kx, ky, m, eps) = (p.kx as f64, p.ky as f64, p.m as f64, p.eps);
    let tag = match p.field {
        PerturbField::Temp => BasisTag::Sine,
        _ => BasisTag::Cosine,
    };
    ScalarField3::from_fn(grid, tag, move |x, y, z| {
        let vert = match tag {
            BasisTag::Sine => (m * PI * (z + h) / h).sin(),
            _ => (m * PI * (z + h) / h).cos(),
        };
        eps * (2.0 * PI * kx * x).cos() * (2.0 * PI * ky * y).cos() * vert
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_parsing() {
        let p: Perturbation = "T:1,0,1:1e-8".parse().unwrap();
        assert_eq!(p.field, PerturbField::Temp);
        assert_eq!((p.kx, p.ky, p.m), (1, 0, 1));
        assert_eq!(p.eps, 1e-8);
        assert!("T:1,0:1e-8".parse::<Perturbation>().is_err());
        assert!("w:1,0,1:1e-8".parse::<Perturbation>().is_err());
    }
}
