//! Grid geometry and spectral transform machinery.
//!
//! The domain is the unit torus `M = (0,1)^2` in the horizontal, discretized
//! with `nx * ny` equispaced points and Fourier modes `exp(2*pi*i*(kx*x + ky*y))`,
//! times the channel `(-h, 0)` in the vertical, discretized on midpoint
//! collocation levels `z_j = -h + (j + 1/2) h/nz`. The midpoint levels carry
//! both a cosine expansion `cos(m*pi*(z+h)/h)` (Neumann walls) and a sine
//! expansion `sin(m*pi*(z+h)/h)` (Dirichlet walls), so a single point set
//! serves both parities. Vertical analysis/synthesis are exact matrix
//! transforms; derivatives, second derivatives and antiderivatives act
//! diagonally on the modal coefficients.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2, Array3};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};

/// Vertical expansion parity of a 3D field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// `cos(m*pi*(z+h)/h)`: vanishing z-derivative at both walls.
    Cosine,
    /// `sin(m*pi*(z+h)/h)`: vanishing value at both walls.
    Sine,
    /// No vertical modal basis (e.g. a reconstructed physical temperature);
    /// pointwise and horizontal operations only.
    General,
}

impl BasisTag {
    /// Parity of the pointwise product of two tagged fields.
    pub fn product(self, other: BasisTag) -> BasisTag {
        match (self, other) {
            (BasisTag::General, _) | (_, BasisTag::General) => BasisTag::General,
            (a, b) if a == b => BasisTag::Cosine,
            _ => BasisTag::Sine,
        }
    }

    /// Parity after one vertical derivative.
    pub fn flipped(self) -> BasisTag {
        match self {
            BasisTag::Cosine => BasisTag::Sine,
            BasisTag::Sine => BasisTag::Cosine,
            BasisTag::General => BasisTag::General,
        }
    }
}

/// Static description of the discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Fourier points in x (even, >= 4).
    pub nx: usize,
    /// Fourier points in y (even, >= 4).
    pub ny: usize,
    /// Vertical collocation levels (>= 3).
    pub nz: usize,
    /// Channel depth; the vertical domain is `(-h, 0)`.
    pub h: f64,
    /// Apply the 2/3-rule truncation to quadratic products.
    pub dealias: bool,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, nz: usize, h: f64, dealias: bool) -> Self {
        Self { nx, ny, nz, h, dealias }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 4 || self.nx % 2 != 0 {
            return Err(CoreError::InvalidConfig(format!(
                "grid.nx must be even and >= 4, got {}",
                self.nx
            )));
        }
        if self.ny < 4 || self.ny % 2 != 0 {
            return Err(CoreError::InvalidConfig(format!(
                "grid.ny must be even and >= 4, got {}",
                self.ny
            )));
        }
        if self.nz < 3 {
            return Err(CoreError::InvalidConfig(format!(
                "grid.nz must be >= 3, got {}",
                self.nz
            )));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "grid.h must be > 0, got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// A validated grid together with its transform plans and modal tables.
///
/// Cheap to share: fields hold an `Arc<Grid>`.
pub struct Grid {
    pub spec: GridSpec,
    /// Midpoint collocation levels, `z[j] = -h + (j + 1/2) h/nz`.
    pub z: Vec<f64>,
    /// Derivative multipliers `2*pi*i*k` per x bin (Nyquist zeroed).
    dx_mult: Vec<Complex<f64>>,
    dy_mult: Vec<Complex<f64>>,
    /// Signed integer wavenumber per bin.
    kx_int: Vec<i64>,
    ky_int: Vec<i64>,
    /// 2/3-rule keep flags per bin.
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    /// cos_synth[(j, m)] = cos(m*pi*(j+1/2)/nz), m = 0..nz-1.
    cos_synth: Array2<f64>,
    /// cos_anal[(m, j)]: DCT-II analysis with exact round trip.
    cos_anal: Array2<f64>,
    /// sin_synth[(j, m-1)] = sin(m*pi*(j+1/2)/nz), m = 1..nz.
    sin_synth: Array2<f64>,
    sin_anal: Array2<f64>,
    /// Exact integrals of the basis functions over (-h, 0).
    cos_mode_integral: Vec<f64>,
    sin_mode_integral: Vec<f64>,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let (nx, ny, nz, h) = (spec.nx, spec.ny, spec.nz, spec.h);

        let mut planner = FftPlanner::<f64>::new();
        let fwd_x = planner.plan_fft_forward(nx);
        let inv_x = planner.plan_fft_inverse(nx);
        let fwd_y = planner.plan_fft_forward(ny);
        let inv_y = planner.plan_fft_inverse(ny);

        let signed = |i: usize, n: usize| -> i64 {
            if i <= n / 2 {
                i as i64
            } else {
                i as i64 - n as i64
            }
        };
        let kx_int: Vec<i64> = (0..nx).map(|i| signed(i, nx)).collect();
        let ky_int: Vec<i64> = (0..ny).map(|i| signed(i, ny)).collect();
        let deriv = |k: i64, i: usize, n: usize| -> Complex<f64> {
            // The Nyquist bin has no well-defined odd derivative; zero it.
            if n % 2 == 0 && i == n / 2 {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, 2.0 * PI * k as f64)
            }
        };
        let dx_mult: Vec<Complex<f64>> =
            kx_int.iter().enumerate().map(|(i, &k)| deriv(k, i, nx)).collect();
        let dy_mult: Vec<Complex<f64>> =
            ky_int.iter().enumerate().map(|(i, &k)| deriv(k, i, ny)).collect();

        // Strict alias-free band for quadratic products: |k| <= floor((n-1)/3).
        let kmax_x = ((nx - 1) / 3) as i64;
        let kmax_y = ((ny - 1) / 3) as i64;
        let keep_x: Vec<bool> = kx_int.iter().map(|&k| k.abs() <= kmax_x).collect();
        let keep_y: Vec<bool> = ky_int.iter().map(|&k| k.abs() <= kmax_y).collect();

        let z: Vec<f64> = (0..nz)
            .map(|j| -h + (j as f64 + 0.5) * h / nz as f64)
            .collect();

        let mut cos_synth = Array2::zeros((nz, nz));
        let mut cos_anal = Array2::zeros((nz, nz));
        let mut sin_synth = Array2::zeros((nz, nz));
        let mut sin_anal = Array2::zeros((nz, nz));
        for j in 0..nz {
            let arg = (j as f64 + 0.5) * PI / nz as f64;
            for m in 0..nz {
                cos_synth[(j, m)] = (m as f64 * arg).cos();
                let scale = if m == 0 { 1.0 } else { 2.0 } / nz as f64;
                cos_anal[(m, j)] = scale * (m as f64 * arg).cos();
            }
            for m in 1..=nz {
                let s = (m as f64 * arg).sin();
                sin_synth[(j, m - 1)] = s;
                let scale = if m == nz { 1.0 } else { 2.0 } / nz as f64;
                sin_anal[(m - 1, j)] = scale * s;
            }
        }

        let cos_mode_integral: Vec<f64> = (0..nz).map(|m| if m == 0 { h } else { 0.0 }).collect();
        let sin_mode_integral: Vec<f64> = (1..=nz)
            .map(|m| {
                let mf = m as f64;
                h * (1.0 - (-1.0f64).powi(m as i32)) / (mf * PI)
            })
            .collect();

        Ok(Arc::new(Self {
            spec,
            z,
            dx_mult,
            dy_mult,
            kx_int,
            ky_int,
            keep_x,
            keep_y,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            cos_synth,
            cos_anal,
            sin_synth,
            sin_anal,
            cos_mode_integral,
            sin_mode_integral,
        }))
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }
    pub fn ny(&self) -> usize {
        self.spec.ny
    }
    pub fn nz(&self) -> usize {
        self.spec.nz
    }
    pub fn h(&self) -> f64 {
        self.spec.h
    }

    /// Horizontal grid coordinates.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.spec.nx as f64
    }
    pub fn y(&self, j: usize) -> f64 {
        j as f64 / self.spec.ny as f64
    }

    /// Signed wavenumbers (for callers assembling custom spectra).
    pub fn kx(&self) -> &[i64] {
        &self.kx_int
    }
    pub fn ky(&self) -> &[i64] {
        &self.ky_int
    }

    /// Largest mode kept by the 2/3-rule band in x and y.
    pub fn dealias_band(&self) -> (i64, i64) {
        (((self.spec.nx - 1) / 3) as i64, ((self.spec.ny - 1) / 3) as i64)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || self.spec == other.spec
    }

    // ---------------------------------------------------------------- FFT --

    fn fft_lanes_x(&self, data: &mut Array3<Complex<f64>>, inverse: bool) {
        let plan = if inverse { &self.inv_x } else { &self.fwd_x };
        let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
        let slice = data.as_slice_mut().expect("contiguous");
        for chunk in slice.chunks_exact_mut(self.spec.nx) {
            plan.process_with_scratch(chunk, &mut scratch);
        }
    }

    fn fft_lanes_y(&self, data: &mut Array3<Complex<f64>>, inverse: bool) {
        let plan = if inverse { &self.inv_y } else { &self.fwd_y };
        let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
        let (nz, ny, nx) = data.dim();
        let mut lane = vec![Complex::default(); ny];
        for iz in 0..nz {
            for ix in 0..nx {
                for iy in 0..ny {
                    lane[iy] = data[(iz, iy, ix)];
                }
                plan.process_with_scratch(&mut lane, &mut scratch);
                for iy in 0..ny {
                    data[(iz, iy, ix)] = lane[iy];
                }
            }
        }
    }

    /// Horizontal spectrum per level; coefficients of `exp(2*pi*i*k.x)`.
    pub fn h_forward(&self, phys: &Array3<f64>) -> Array3<Complex<f64>> {
        let mut spec = phys.mapv(|v| Complex::new(v, 0.0));
        self.fft_lanes_x(&mut spec, false);
        self.fft_lanes_y(&mut spec, false);
        let scale = 1.0 / (self.spec.nx * self.spec.ny) as f64;
        spec.mapv_inplace(|c| c * scale);
        spec
    }

    /// Inverse of [`Grid::h_forward`]; imaginary round-off is discarded.
    pub fn h_inverse(&self, spec: &Array3<Complex<f64>>) -> Array3<f64> {
        let mut work = spec.clone();
        self.fft_lanes_y(&mut work, true);
        self.fft_lanes_x(&mut work, true);
        work.mapv(|c| c.re)
    }

    /// 2D variants for fields on the torus `M`.
    pub fn h_forward2(&self, phys: &Array2<f64>) -> Array2<Complex<f64>> {
        let (ny, nx) = phys.dim();
        let as3 = phys
            .to_owned()
            .into_shape_with_order((1, ny, nx))
            .expect("reshape");
        let spec = self.h_forward(&as3);
        spec.into_shape_with_order((ny, nx)).expect("reshape")
    }

    pub fn h_inverse2(&self, spec: &Array2<Complex<f64>>) -> Array2<f64> {
        let (ny, nx) = spec.dim();
        let as3 = spec
            .to_owned()
            .into_shape_with_order((1, ny, nx))
            .expect("reshape");
        let phys = self.h_inverse(&as3);
        phys.into_shape_with_order((ny, nx)).expect("reshape")
    }

    /// Apply a per-bin multiplier to a horizontal spectrum.
    pub fn apply_spectral<F>(&self, spec: &mut Array3<Complex<f64>>, f: F)
    where
        F: Fn(usize, usize) -> Complex<f64>,
    {
        let (nz, ny, nx) = spec.dim();
        let mut row = Array2::<Complex<f64>>::zeros((ny, nx));
        for iy in 0..ny {
            for ix in 0..nx {
                row[(iy, ix)] = f(ix, iy);
            }
        }
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    spec[(iz, iy, ix)] *= row[(iy, ix)];
                }
            }
        }
    }

    /// Derivative multiplier lookup.
    pub fn dx_mult(&self, ix: usize) -> Complex<f64> {
        self.dx_mult[ix]
    }
    pub fn dy_mult(&self, iy: usize) -> Complex<f64> {
        self.dy_mult[iy]
    }

    /// Zero every bin outside the 2/3-rule band (unconditionally).
    pub fn truncate_spectrum(&self, spec: &mut Array3<Complex<f64>>) {
        let (nz, ny, nx) = spec.dim();
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    if !(self.keep_x[ix] && self.keep_y[iy]) {
                        spec[(iz, iy, ix)] = Complex::new(0.0, 0.0);
                    }
                }
            }
        }
    }

    // ------------------------------------------------------ vertical modal --

    fn vert_apply(&self, mat: &Array2<f64>, data: &Array3<f64>) -> Array3<f64> {
        let (nz, ny, nx) = data.dim();
        let flat = data
            .view()
            .into_shape_with_order((nz, ny * nx))
            .expect("contiguous");
        let out = mat.dot(&flat);
        out.into_shape_with_order((nz, ny, nx)).expect("reshape")
    }

    /// Vertical modal coefficients in the tagged basis (axis 0 = mode index;
    /// for the sine tag, row `m-1` holds mode `m`).
    pub fn vert_analyze(&self, data: &Array3<f64>, tag: BasisTag) -> Array3<f64> {
        match tag {
            BasisTag::Cosine => self.vert_apply(&self.cos_anal, data),
            BasisTag::Sine => self.vert_apply(&self.sin_anal, data),
            BasisTag::General => panic!("general fields carry no vertical modal basis"),
        }
    }

    /// Synthesis from vertical modal coefficients back to level values.
    pub fn vert_synthesize(&self, coef: &Array3<f64>, tag: BasisTag) -> Array3<f64> {
        match tag {
            BasisTag::Cosine => self.vert_apply(&self.cos_synth, coef),
            BasisTag::Sine => self.vert_apply(&self.sin_synth, coef),
            BasisTag::General => panic!("general fields carry no vertical modal basis"),
        }
    }

    /// Exact integral over `(-h, 0)` of each basis mode in the tagged basis.
    pub fn mode_integrals(&self, tag: BasisTag) -> &[f64] {
        match tag {
            BasisTag::Cosine => &self.cos_mode_integral,
            BasisTag::Sine => &self.sin_mode_integral,
            BasisTag::General => panic!("general fields carry no vertical modal basis"),
        }
    }

    /// Evaluate a modal coefficient stack at a wall. Sine modes vanish at
    /// both walls; cosine mode `m` takes value `(-1)^m` at `z = 0` and `1`
    /// at `z = -h`.
    pub fn mode_wall_values(&self, tag: BasisTag, top: bool) -> Array1<f64> {
        let nz = self.spec.nz;
        match tag {
            BasisTag::General => panic!("general fields carry no vertical modal basis"),
            BasisTag::Sine => Array1::zeros(nz),
            BasisTag::Cosine => {
                Array1::from_iter((0..nz).map(|m| {
                    if top {
                        (-1.0f64).powi(m as i32)
                    } else {
                        1.0
                    }
                }))
            }
        }
    }

    /// Quadrature weight of one collocation cell, `h / (nx*ny*nz)`.
    pub fn cell_volume(&self) -> f64 {
        self.spec.h / (self.spec.nx * self.spec.ny * self.spec.nz) as f64
    }

    /// Quadrature weight of one horizontal cell, `1 / (nx*ny)`.
    pub fn cell_area(&self) -> f64 {
        1.0 / (self.spec.nx * self.spec.ny) as f64
    }
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize, nz: usize, h: f64) -> Arc<Grid> {
        Grid::new(GridSpec::new(nx, ny, nz, h, true)).unwrap()
    }

    #[test]
    fn spec_validation_rejects_bad_dims() {
        assert!(Grid::new(GridSpec::new(5, 8, 9, 1.0, true)).is_err());
        assert!(Grid::new(GridSpec::new(8, 2, 9, 1.0, true)).is_err());
        assert!(Grid::new(GridSpec::new(8, 8, 2, 1.0, true)).is_err());
        assert!(Grid::new(GridSpec::new(8, 8, 9, 0.0, true)).is_err());
        assert!(Grid::new(GridSpec::new(8, 8, 9, 1.0, true)).is_ok());
    }

    #[test]
    fn horizontal_round_trip_is_tight() {
        let g = grid(16, 12, 5, 0.7);
        let mut phys = Array3::zeros((5, 12, 16));
        for iz in 0..5 {
            for iy in 0..12 {
                for ix in 0..16 {
                    phys[(iz, iy, ix)] = ((ix * 7 + iy * 3 + iz) as f64 * 0.37).sin();
                }
            }
        }
        let spec = g.h_forward(&phys);
        let back = g.h_inverse(&spec);
        let err = (&back - &phys).iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn vertical_round_trip_both_tags() {
        let g = grid(4, 4, 9, 1.3);
        let mut data = Array3::zeros((9, 4, 4));
        for iz in 0..9 {
            for iy in 0..4 {
                for ix in 0..4 {
                    data[(iz, iy, ix)] = ((iz * 5 + iy * 2 + ix) as f64 * 0.51).cos();
                }
            }
        }
        for tag in [BasisTag::Cosine, BasisTag::Sine] {
            let coef = g.vert_analyze(&data, tag);
            let back = g.vert_synthesize(&coef, tag);
            let err = (&back - &data).iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "{tag:?} round trip error {err}");
        }
    }

    #[test]
    fn single_cosine_mode_is_resolved_exactly() {
        let g = grid(4, 4, 8, 2.0);
        let mut data = Array3::zeros((8, 4, 4));
        for iz in 0..8 {
            let c = (3.0 * PI * (g.z[iz] + 2.0) / 2.0).cos();
            for iy in 0..4 {
                for ix in 0..4 {
                    data[(iz, iy, ix)] = 2.5 * c;
                }
            }
        }
        let coef = g.vert_analyze(&data, BasisTag::Cosine);
        for m in 0..8 {
            let expect = if m == 3 { 2.5 } else { 0.0 };
            assert!((coef[(m, 0, 0)] - expect).abs() < 1e-12);
        }
    }
}
