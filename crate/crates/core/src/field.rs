//! Field containers: scalar/vector fields on the channel and on the torus.

use std::sync::Arc;

use ndarray::{Array2, Array3};

use crate::error::{CoreError, Result};
use crate::grid::{BasisTag, Grid};

/// Scalar field on `Omega = M x (-h, 0)`, stored as physical values on the
/// collocation points, together with its vertical basis tag.
#[derive(Clone)]
pub struct ScalarField3 {
    grid: Arc<Grid>,
    pub tag: BasisTag,
    data: Array3<f64>,
}

impl ScalarField3 {
    pub fn zeros(grid: &Arc<Grid>, tag: BasisTag) -> Self {
        let d = Array3::zeros((grid.nz(), grid.ny(), grid.nx()));
        Self { grid: grid.clone(), tag, data: d }
    }

    /// Evaluate `f(x, y, z)` at every collocation point.
    pub fn from_fn<F: Fn(f64, f64, f64) -> f64>(grid: &Arc<Grid>, tag: BasisTag, f: F) -> Self {
        let mut out = Self::zeros(grid, tag);
        let (nz, ny, nx) = out.data.dim();
        for iz in 0..nz {
            let z = grid.z[iz];
            for iy in 0..ny {
                let y = grid.y(iy);
                for ix in 0..nx {
                    out.data[(iz, iy, ix)] = f(grid.x(ix), y, z);
                }
            }
        }
        out
    }

    pub fn from_values(grid: &Arc<Grid>, tag: BasisTag, data: Array3<f64>) -> Result<Self> {
        if data.dim() != (grid.nz(), grid.ny(), grid.nx()) {
            return Err(CoreError::GridMismatch(format!(
                "field shape {:?} does not match grid ({}, {}, {})",
                data.dim(),
                grid.nz(),
                grid.ny(),
                grid.nx()
            )));
        }
        Ok(Self { grid: grid.clone(), tag, data })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn into_values(self) -> Array3<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: self.grid.clone(), tag: self.tag, data: &self.data * a }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert!(self.grid.same_as(&other.grid) && self.tag == other.tag);
        Self { grid: self.grid.clone(), tag: self.tag, data: &self.data + &other.data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert!(self.grid.same_as(&other.grid) && self.tag == other.tag);
        Self { grid: self.grid.clone(), tag: self.tag, data: &self.data - &other.data }
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert!(self.grid.same_as(&other.grid));
        self.data += &other.data;
    }

    pub fn add_scaled_assign(&mut self, other: &Self, a: f64) {
        debug_assert!(self.grid.same_as(&other.grid));
        self.data.zip_mut_with(&other.data, |x, &y| *x += a * y);
    }

    /// Pointwise product; the tag follows the parity algebra.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        Self {
            grid: self.grid.clone(),
            tag: self.tag.product(other.tag),
            data: &self.data * &other.data,
        }
    }
}

/// Scalar field on the torus `M`.
#[derive(Clone)]
pub struct ScalarField2 {
    grid: Arc<Grid>,
    data: Array2<f64>,
}

impl ScalarField2 {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { grid: grid.clone(), data: Array2::zeros((grid.ny(), grid.nx())) }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &Arc<Grid>, f: F) -> Self {
        let mut out = Self::zeros(grid);
        let (ny, nx) = out.data.dim();
        for iy in 0..ny {
            for ix in 0..nx {
                out.data[(iy, ix)] = f(grid.x(ix), grid.y(iy));
            }
        }
        out
    }

    pub fn from_values(grid: &Arc<Grid>, data: Array2<f64>) -> Result<Self> {
        if data.dim() != (grid.ny(), grid.nx()) {
            return Err(CoreError::GridMismatch(format!(
                "field shape {:?} does not match grid ({}, {})",
                data.dim(),
                grid.ny(),
                grid.nx()
            )));
        }
        Ok(Self { grid: grid.clone(), data })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: self.grid.clone(), data: &self.data * a }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        Self { grid: self.grid.clone(), data: &self.data + &other.data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        Self { grid: self.grid.clone(), data: &self.data - &other.data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        Self { grid: self.grid.clone(), data: &self.data * &other.data }
    }

    /// Lift to a 3D field constant in z (cosine mode 0).
    pub fn lift(&self) -> ScalarField3 {
        let (ny, nx) = self.data.dim();
        let nz = self.grid.nz();
        let mut out = ScalarField3::zeros(&self.grid, BasisTag::Cosine);
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    out.values_mut()[(iz, iy, ix)] = self.data[(iy, ix)];
                }
            }
        }
        out
    }
}

/// Horizontal velocity-like vector field on the channel.
#[derive(Clone)]
pub struct VectorFieldH {
    pub u1: ScalarField3,
    pub u2: ScalarField3,
}

impl VectorFieldH {
    pub fn new(u1: ScalarField3, u2: ScalarField3) -> Result<Self> {
        if !u1.grid().same_as(u2.grid()) {
            return Err(CoreError::GridMismatch("vector components on different grids".into()));
        }
        if u1.tag != u2.tag {
            return Err(CoreError::GridMismatch("vector components carry different tags".into()));
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: &Arc<Grid>, tag: BasisTag) -> Self {
        Self { u1: ScalarField3::zeros(grid, tag), u2: ScalarField3::zeros(grid, tag) }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u1.grid()
    }

    pub fn tag(&self) -> BasisTag {
        self.u1.tag
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { u1: self.u1.scaled(a), u2: self.u2.scaled(a) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { u1: self.u1.add(&other.u1), u2: self.u2.add(&other.u2) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { u1: self.u1.sub(&other.u1), u2: self.u2.sub(&other.u2) }
    }

    pub fn add_scaled_assign(&mut self, other: &Self, a: f64) {
        self.u1.add_scaled_assign(&other.u1, a);
        self.u2.add_scaled_assign(&other.u2, a);
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    /// Grid maximum of the pointwise Euclidean magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .zip(self.u2.values().iter())
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }
}

/// Vector field on the torus (barotropic parts, elliptic solves per level).
#[derive(Clone)]
pub struct VectorField2 {
    pub u1: ScalarField2,
    pub u2: ScalarField2,
}

impl VectorField2 {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { u1: ScalarField2::zeros(grid), u2: ScalarField2::zeros(grid) }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u1.grid()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { u1: self.u1.sub(&other.u1), u2: self.u2.sub(&other.u2) }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .zip(self.u2.values().iter())
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Debug for ScalarField3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField3")
            .field("tag", &self.tag)
            .field("shape", &self.data.dim())
            .finish()
    }
}

impl std::fmt::Debug for ScalarField2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField2").field("shape", &self.data.dim()).finish()
    }
}

impl std::fmt::Debug for VectorFieldH {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorFieldH").field("tag", &self.tag()).finish()
    }
}

impl std::fmt::Debug for VectorField2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField2").finish()
    }
}
