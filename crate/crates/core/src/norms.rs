//! Lebesgue and Sobolev norms by collocation quadrature.
//!
//! `L^q` norms and inner products are collocation quadratures of the defining
//! integrals (cell volume `h/(nx*ny*nz)` on the channel, cell area
//! `1/(nx*ny)` on the torus); `L^inf` is the grid maximum. Sobolev norms sum
//! `L^2` norms of all multi-index derivatives computed spectrally, each
//! multi-index counted once.

use crate::calculus::{ddz, grad_h, grad_h_2d};
use crate::error::{CoreError, Result};
use crate::field::{ScalarField2, ScalarField3, VectorField2, VectorFieldH};

fn check_same_3(f: &ScalarField3, g: &ScalarField3) -> Result<()> {
    if !f.grid().same_as(g.grid()) {
        return Err(CoreError::GridMismatch("inner product operands on different grids".into()));
    }
    Ok(())
}

fn check_same_2(f: &ScalarField2, g: &ScalarField2) -> Result<()> {
    if !f.grid().same_as(g.grid()) {
        return Err(CoreError::GridMismatch("inner product operands on different grids".into()));
    }
    Ok(())
}

/// `L^q(Omega)` norm; pass `f64::INFINITY` for the grid maximum.
pub fn norm_lq(f: &ScalarField3, q: f64) -> f64 {
    assert!(q >= 1.0 || q.is_infinite(), "L^q norms require q >= 1");
    if q.is_infinite() {
        return f.max_abs();
    }
    let w = f.grid().cell_volume();
    let s: f64 = f.values().iter().map(|v| v.abs().powf(q)).sum();
    (w * s).powf(1.0 / q)
}

/// `L^q(M)` norm of a 2D field.
pub fn norm_lq_2d(f: &ScalarField2, q: f64) -> f64 {
    assert!(q >= 1.0 || q.is_infinite(), "L^q norms require q >= 1");
    if q.is_infinite() {
        return f.max_abs();
    }
    let w = f.grid().cell_area();
    let s: f64 = f.values().iter().map(|v| v.abs().powf(q)).sum();
    (w * s).powf(1.0 / q)
}

/// `L^q` norm of the pointwise Euclidean magnitude of a vector field.
pub fn vec_norm_lq(u: &VectorFieldH, q: f64) -> f64 {
    if q.is_infinite() {
        return u.max_magnitude();
    }
    assert!(q >= 1.0, "L^q norms require q >= 1");
    let w = u.grid().cell_volume();
    let s: f64 = u
        .u1
        .values()
        .iter()
        .zip(u.u2.values().iter())
        .map(|(a, b)| (a * a + b * b).sqrt().powf(q))
        .sum();
    (w * s).powf(1.0 / q)
}

pub fn vec_norm_lq_2d(u: &VectorField2, q: f64) -> f64 {
    if q.is_infinite() {
        return u.max_magnitude();
    }
    assert!(q >= 1.0, "L^q norms require q >= 1");
    let w = u.grid().cell_area();
    let s: f64 = u
        .u1
        .values()
        .iter()
        .zip(u.u2.values().iter())
        .map(|(a, b)| (a * a + b * b).sqrt().powf(q))
        .sum();
    (w * s).powf(1.0 / q)
}

/// `L^2(Omega)` inner product.
pub fn inner_l2(f: &ScalarField3, g: &ScalarField3) -> Result<f64> {
    check_same_3(f, g)?;
    let w = f.grid().cell_volume();
    let s: f64 = f.values().iter().zip(g.values().iter()).map(|(a, b)| a * b).sum();
    Ok(w * s)
}

/// `L^2(M)` inner product.
pub fn inner_l2_2d(f: &ScalarField2, g: &ScalarField2) -> Result<f64> {
    check_same_2(f, g)?;
    let w = f.grid().cell_area();
    let s: f64 = f.values().iter().zip(g.values().iter()).map(|(a, b)| a * b).sum();
    Ok(w * s)
}

/// Componentwise `L^2` inner product of vector fields.
pub fn inner_l2_vec(u: &VectorFieldH, v: &VectorFieldH) -> Result<f64> {
    Ok(inner_l2(&u.u1, &v.u1)? + inner_l2(&u.u2, &v.u2)?)
}

pub fn inner_l2_vec_2d(u: &VectorField2, v: &VectorField2) -> Result<f64> {
    Ok(inner_l2_2d(&u.u1, &v.u1)? + inner_l2_2d(&u.u2, &v.u2)?)
}

/// `H^1` seminorm: `L^2` norm of the full gradient (horizontal + vertical).
pub fn seminorm_h1(f: &ScalarField3) -> f64 {
    let gh = grad_h(f);
    let fz = ddz(f);
    (norm_lq(&gh.u1, 2.0).powi(2) + norm_lq(&gh.u2, 2.0).powi(2) + norm_lq(&fz, 2.0).powi(2))
        .sqrt()
}

/// `H^2` seminorm: `L^2` norms of all order-2 derivatives.
pub fn seminorm_h2(f: &ScalarField3) -> f64 {
    let mut acc = 0.0;
    for (ax, ay, az) in [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)] {
        let d = derivative_multi(f, ax, ay, az);
        acc += norm_lq(&d, 2.0).powi(2);
    }
    acc.sqrt()
}

/// Apply `d^ax/dx^ax d^ay/dy^ay d^az/dz^az` spectrally.
pub fn derivative_multi(f: &ScalarField3, ax: usize, ay: usize, az: usize) -> ScalarField3 {
    let mut out = f.clone();
    for _ in 0..az {
        out = ddz(&out);
    }
    if ax > 0 || ay > 0 {
        let g = out.grid().clone();
        let mut spec = g.h_forward(out.values());
        g.apply_spectral(&mut spec, |ix, iy| {
            let mut m = rustfft::num_complex::Complex::new(1.0, 0.0);
            for _ in 0..ax {
                m *= g.dx_mult(ix);
            }
            for _ in 0..ay {
                m *= g.dy_mult(iy);
            }
            m
        });
        out = ScalarField3::from_values(&g, out.tag, g.h_inverse(&spec)).expect("same grid");
    }
    out
}

pub fn derivative_multi_2d(f: &ScalarField2, ax: usize, ay: usize) -> ScalarField2 {
    let g = f.grid().clone();
    let mut spec = g.h_forward2(f.values());
    for ((iy, ix), v) in spec.indexed_iter_mut() {
        let mut m = rustfft::num_complex::Complex::new(1.0, 0.0);
        for _ in 0..ax {
            m *= g.dx_mult(ix);
        }
        for _ in 0..ay {
            m *= g.dy_mult(iy);
        }
        *v *= m;
    }
    ScalarField2::from_values(&g, g.h_inverse2(&spec)).expect("same grid")
}

/// Full Sobolev norm `H^m(Omega)`: every multi-index up to order `m` once.
pub fn sobolev_norm(f: &ScalarField3, m: usize) -> f64 {
    let mut acc = 0.0;
    for total in 0..=m {
        for ax in 0..=total {
            for ay in 0..=(total - ax) {
                let az = total - ax - ay;
                let d = derivative_multi(f, ax, ay, az);
                acc += norm_lq(&d, 2.0).powi(2);
            }
        }
    }
    acc.sqrt()
}

/// Full Sobolev norm `H^m(M)` of a 2D field.
pub fn sobolev_norm_2d(f: &ScalarField2, m: usize) -> f64 {
    let mut acc = 0.0;
    for total in 0..=m {
        for ax in 0..=total {
            let ay = total - ax;
            let d = derivative_multi_2d(f, ax, ay);
            acc += norm_lq_2d(&d, 2.0).powi(2);
        }
    }
    acc.sqrt()
}

/// `W^{m,q}(M)` norm of a 2D field: `(sum_{|a|<=m} |D^a f|_q^q)^{1/q}`.
pub fn sobolev_wmq_2d(f: &ScalarField2, m: usize, q: f64) -> f64 {
    let mut acc = 0.0;
    for total in 0..=m {
        for ax in 0..=total {
            let ay = total - ax;
            let d = derivative_multi_2d(f, ax, ay);
            acc += norm_lq_2d(&d, q).powf(q);
        }
    }
    acc.powf(1.0 / q)
}

/// Sobolev norm of a vector field (components summed in quadrature).
pub fn sobolev_norm_vec(u: &VectorFieldH, m: usize) -> f64 {
    (sobolev_norm(&u.u1, m).powi(2) + sobolev_norm(&u.u2, m).powi(2)).sqrt()
}

pub fn sobolev_norm_vec_2d(u: &VectorField2, m: usize) -> f64 {
    (sobolev_norm_2d(&u.u1, m).powi(2) + sobolev_norm_2d(&u.u2, m).powi(2)).sqrt()
}

/// `L^2` norm of the horizontal gradient of every component of `u`.
pub fn grad_h_norm_vec(u: &VectorFieldH) -> f64 {
    let g1 = grad_h(&u.u1);
    let g2 = grad_h(&u.u2);
    (norm_lq(&g1.u1, 2.0).powi(2)
        + norm_lq(&g1.u2, 2.0).powi(2)
        + norm_lq(&g2.u1, 2.0).powi(2)
        + norm_lq(&g2.u2, 2.0).powi(2))
    .sqrt()
}

pub fn grad_h_norm_vec_2d(u: &VectorField2) -> f64 {
    let g1 = grad_h_2d(&u.u1);
    let g2 = grad_h_2d(&u.u2);
    (norm_lq_2d(&g1.u1, 2.0).powi(2)
        + norm_lq_2d(&g1.u2, 2.0).powi(2)
        + norm_lq_2d(&g2.u1, 2.0).powi(2)
        + norm_lq_2d(&g2.u2, 2.0).powi(2))
    .sqrt()
}
