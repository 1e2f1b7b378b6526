//! Differential and integral operators on tagged fields.
//!
//! Horizontal operators differentiate in Fourier space and are exact on
//! band-limited fields. Vertical operators act diagonally on the cosine/sine
//! modal coefficients; the antiderivative and the vertical mean are the exact
//! integrals of the modal interpolant, which keeps identities such as
//! "antiderivative evaluated at the surface equals depth times the vertical
//! mean" at round-off.

use ndarray::{Array2, Array3};

use crate::field::{ScalarField2, ScalarField3, VectorField2, VectorFieldH};
use crate::grid::BasisTag;

// ------------------------------------------------------------- horizontal --

/// Horizontal gradient `(d/dx, d/dy)`; preserves the vertical tag.
pub fn grad_h(f: &ScalarField3) -> VectorFieldH {
    let g = f.grid();
    let spec = g.h_forward(f.values());
    let mut sx = spec.clone();
    g.apply_spectral(&mut sx, |ix, _| g.dx_mult(ix));
    let mut sy = spec;
    g.apply_spectral(&mut sy, |_, iy| g.dy_mult(iy));
    VectorFieldH {
        u1: ScalarField3::from_values(g, f.tag, g.h_inverse(&sx)).expect("same grid"),
        u2: ScalarField3::from_values(g, f.tag, g.h_inverse(&sy)).expect("same grid"),
    }
}

/// Horizontal divergence `d(u1)/dx + d(u2)/dy`.
pub fn div_h(u: &VectorFieldH) -> ScalarField3 {
    let g = u.grid();
    let mut s1 = g.h_forward(u.u1.values());
    g.apply_spectral(&mut s1, |ix, _| g.dx_mult(ix));
    let mut s2 = g.h_forward(u.u2.values());
    g.apply_spectral(&mut s2, |_, iy| g.dy_mult(iy));
    let sum = &s1 + &s2;
    ScalarField3::from_values(g, u.tag(), g.h_inverse(&sum)).expect("same grid")
}

/// Horizontal curl `d(u2)/dx - d(u1)/dy`.
pub fn curl_h(u: &VectorFieldH) -> ScalarField3 {
    let g = u.grid();
    let mut s1 = g.h_forward(u.u2.values());
    g.apply_spectral(&mut s1, |ix, _| g.dx_mult(ix));
    let mut s2 = g.h_forward(u.u1.values());
    g.apply_spectral(&mut s2, |_, iy| g.dy_mult(iy));
    let diff = &s1 - &s2;
    ScalarField3::from_values(g, u.tag(), g.h_inverse(&diff)).expect("same grid")
}

/// Horizontal Laplacian.
pub fn lap_h(f: &ScalarField3) -> ScalarField3 {
    let g = f.grid();
    let mut spec = g.h_forward(f.values());
    g.apply_spectral(&mut spec, |ix, iy| {
        let dx = g.dx_mult(ix);
        let dy = g.dy_mult(iy);
        dx * dx + dy * dy
    });
    ScalarField3::from_values(g, f.tag, g.h_inverse(&spec)).expect("same grid")
}

// ------------------------------------------------- horizontal, 2D variants --

pub fn grad_h_2d(f: &ScalarField2) -> VectorField2 {
    let g = f.grid();
    let spec = g.h_forward2(f.values());
    let mut sx = spec.clone();
    let mut sy = spec;
    for ((iy, ix), v) in sx.indexed_iter_mut() {
        let _ = iy;
        *v *= g.dx_mult(ix);
    }
    for ((iy, ix), v) in sy.indexed_iter_mut() {
        let _ = ix;
        *v *= g.dy_mult(iy);
    }
    VectorField2 {
        u1: ScalarField2::from_values(g, g.h_inverse2(&sx)).expect("same grid"),
        u2: ScalarField2::from_values(g, g.h_inverse2(&sy)).expect("same grid"),
    }
}

pub fn div_h_2d(u: &VectorField2) -> ScalarField2 {
    let g = u.grid();
    let mut s1 = g.h_forward2(u.u1.values());
    let mut s2 = g.h_forward2(u.u2.values());
    for ((_, ix), v) in s1.indexed_iter_mut() {
        *v *= g.dx_mult(ix);
    }
    for ((iy, _), v) in s2.indexed_iter_mut() {
        *v *= g.dy_mult(iy);
    }
    let sum = &s1 + &s2;
    ScalarField2::from_values(g, g.h_inverse2(&sum)).expect("same grid")
}

pub fn curl_h_2d(u: &VectorField2) -> ScalarField2 {
    let g = u.grid();
    let mut s1 = g.h_forward2(u.u2.values());
    let mut s2 = g.h_forward2(u.u1.values());
    for ((_, ix), v) in s1.indexed_iter_mut() {
        *v *= g.dx_mult(ix);
    }
    for ((iy, _), v) in s2.indexed_iter_mut() {
        *v *= g.dy_mult(iy);
    }
    let diff = &s1 - &s2;
    ScalarField2::from_values(g, g.h_inverse2(&diff)).expect("same grid")
}

pub fn lap_h_2d(f: &ScalarField2) -> ScalarField2 {
    let g = f.grid();
    let mut spec = g.h_forward2(f.values());
    for ((iy, ix), v) in spec.indexed_iter_mut() {
        let dx = g.dx_mult(ix);
        let dy = g.dy_mult(iy);
        *v *= dx * dx + dy * dy;
    }
    ScalarField2::from_values(g, g.h_inverse2(&spec)).expect("same grid")
}

// --------------------------------------------------------------- vertical --

/// Vertical derivative; flips the basis tag. The top sine mode has no
/// representable derivative and is dropped (its values vanish on the grid).
pub fn ddz(f: &ScalarField3) -> ScalarField3 {
    let g = f.grid();
    let nz = g.nz();
    let h = g.h();
    let pi = std::f64::consts::PI;
    assert!(f.tag != BasisTag::General, "general fields carry no vertical modal basis");
    let coef = g.vert_analyze(f.values(), f.tag);
    let mut out = Array3::<f64>::zeros(coef.dim());
    match f.tag {
        BasisTag::General => unreachable!(),
        BasisTag::Cosine => {
            // d/dz cos_m = -(m pi / h) sin_m
            for m in 1..nz {
                let s = -(m as f64) * pi / h;
                out.index_axis_mut(ndarray::Axis(0), m - 1)
                    .assign(&coef.index_axis(ndarray::Axis(0), m).mapv(|v| v * s));
            }
            let vals = g.vert_synthesize(&out, BasisTag::Sine);
            ScalarField3::from_values(g, BasisTag::Sine, vals).expect("same grid")
        }
        BasisTag::Sine => {
            // d/dz sin_m = (m pi / h) cos_m
            for m in 1..nz {
                let s = (m as f64) * pi / h;
                out.index_axis_mut(ndarray::Axis(0), m)
                    .assign(&coef.index_axis(ndarray::Axis(0), m - 1).mapv(|v| v * s));
            }
            let vals = g.vert_synthesize(&out, BasisTag::Cosine);
            ScalarField3::from_values(g, BasisTag::Cosine, vals).expect("same grid")
        }
    }
}

/// Second vertical derivative; preserves the tag.
pub fn d2dz2(f: &ScalarField3) -> ScalarField3 {
    let g = f.grid();
    let nz = g.nz();
    let h = g.h();
    let pi = std::f64::consts::PI;
    let mut coef = g.vert_analyze(f.values(), f.tag);
    match f.tag {
        BasisTag::General => unreachable!("vert_analyze rejects general fields"),
        BasisTag::Cosine => {
            for m in 0..nz {
                let s = -((m as f64) * pi / h).powi(2);
                coef.index_axis_mut(ndarray::Axis(0), m).mapv_inplace(|v| v * s);
            }
        }
        BasisTag::Sine => {
            for row in 0..nz {
                let m = row + 1;
                let s = -((m as f64) * pi / h).powi(2);
                coef.index_axis_mut(ndarray::Axis(0), row).mapv_inplace(|v| v * s);
            }
        }
    }
    let vals = g.vert_synthesize(&coef, f.tag);
    ScalarField3::from_values(g, f.tag, vals).expect("same grid")
}

/// Antiderivative from the bottom wall, `F(z) = int_{-h}^{z} f dxi`,
/// computed mode by mode; `F(-h) = 0` exactly.
///
/// For a cosine-tagged input the mean mode integrates to the linear ramp
/// `a0 * (z + h)`, which is added pointwise; the result is tagged sine and is
/// exactly representable whenever the input has zero vertical mean. For a
/// sine-tagged input the result is an exactly representable cosine series.
pub fn vint_from_bottom(f: &ScalarField3) -> ScalarField3 {
    let g = f.grid();
    let nz = g.nz();
    let h = g.h();
    let pi = std::f64::consts::PI;
    let coef = g.vert_analyze(f.values(), f.tag);
    match f.tag {
        BasisTag::General => unreachable!("vert_analyze rejects general fields"),
        BasisTag::Cosine => {
            // int cos_m = (h / m pi) sin_m  (m >= 1); mean mode -> a0 (z + h).
            let mut sine = Array3::<f64>::zeros(coef.dim());
            for m in 1..nz {
                let s = h / (m as f64 * pi);
                sine.index_axis_mut(ndarray::Axis(0), m - 1)
                    .assign(&coef.index_axis(ndarray::Axis(0), m).mapv(|v| v * s));
            }
            let mut vals = g.vert_synthesize(&sine, BasisTag::Sine);
            let a0 = coef.index_axis(ndarray::Axis(0), 0);
            for iz in 0..nz {
                let ramp = g.z[iz] + h;
                let mut level = vals.index_axis_mut(ndarray::Axis(0), iz);
                level.zip_mut_with(&a0, |v, &a| *v += a * ramp);
            }
            ScalarField3::from_values(g, BasisTag::Sine, vals).expect("same grid")
        }
        BasisTag::Sine => {
            // int sin_m = (h / m pi) (1 - cos_m).
            let mut cosine = Array3::<f64>::zeros(coef.dim());
            {
                let (mut head, _) = cosine.view_mut().split_at(ndarray::Axis(0), 1);
                let mut mean = head.index_axis_mut(ndarray::Axis(0), 0);
                for row in 0..nz {
                    let m = row + 1;
                    let s = h / (m as f64 * pi);
                    mean.zip_mut_with(&coef.index_axis(ndarray::Axis(0), row), |v, &b| {
                        *v += s * b
                    });
                }
            }
            for m in 1..nz {
                let s = -h / (m as f64 * pi);
                cosine
                    .index_axis_mut(ndarray::Axis(0), m)
                    .assign(&coef.index_axis(ndarray::Axis(0), m - 1).mapv(|v| v * s));
            }
            let vals = g.vert_synthesize(&cosine, BasisTag::Cosine);
            ScalarField3::from_values(g, BasisTag::Cosine, vals).expect("same grid")
        }
    }
}

/// Vertical mean `(1/h) int_{-h}^{0} f dz`, as the exact integral of the
/// tagged modal interpolant.
pub fn vertical_average(f: &ScalarField3) -> ScalarField2 {
    let g = f.grid();
    let coef = g.vert_analyze(f.values(), f.tag);
    let weights = g.mode_integrals(f.tag);
    let (nz, ny, nx) = coef.dim();
    let mut out = Array2::<f64>::zeros((ny, nx));
    for m in 0..nz {
        let w = weights[m] / g.h();
        if w == 0.0 {
            continue;
        }
        out.zip_mut_with(&coef.index_axis(ndarray::Axis(0), m), |o, &c| *o += w * c);
    }
    ScalarField2::from_values(g, out).expect("same grid")
}

/// Fluctuation `f - mean(f)`; keeps the input tag (exact for cosine tags,
/// where the mean lives in mode 0).
pub fn fluctuation(f: &ScalarField3) -> ScalarField3 {
    let avg = vertical_average(f);
    let g = f.grid();
    let (nz, ny, nx) = f.values().dim();
    let mut data = f.values().clone();
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                data[(iz, iy, ix)] -= avg.values()[(iy, ix)];
            }
        }
    }
    ScalarField3::from_values(g, f.tag, data).expect("same grid")
}

pub fn vertical_average_vec(u: &VectorFieldH) -> VectorField2 {
    VectorField2 { u1: vertical_average(&u.u1), u2: vertical_average(&u.u2) }
}

pub fn fluctuation_vec(u: &VectorFieldH) -> VectorFieldH {
    VectorFieldH { u1: fluctuation(&u.u1), u2: fluctuation(&u.u2) }
}

/// Evaluate the tagged modal interpolant at a wall (`top`: z = 0).
pub fn eval_wall(f: &ScalarField3, top: bool) -> ScalarField2 {
    let g = f.grid();
    let coef = g.vert_analyze(f.values(), f.tag);
    let wall = g.mode_wall_values(f.tag, top);
    let (nz, ny, nx) = coef.dim();
    let mut out = Array2::<f64>::zeros((ny, nx));
    for m in 0..nz {
        if wall[m] == 0.0 {
            continue;
        }
        out.zip_mut_with(&coef.index_axis(ndarray::Axis(0), m), |o, &c| *o += wall[m] * c);
    }
    ScalarField2::from_values(g, out).expect("same grid")
}

// -------------------------------------------------------------- dealiasing --

/// Pointwise product re-projected through the 2/3-rule truncation when the
/// grid requests dealiasing.
pub fn dealiased_product(a: &ScalarField3, b: &ScalarField3) -> ScalarField3 {
    let prod = a.mul(b);
    dealias(&prod)
}

/// Truncate the horizontal spectrum to the 2/3-rule band (no-op when the
/// grid was built with `dealias: false`).
pub fn dealias(f: &ScalarField3) -> ScalarField3 {
    let g = f.grid();
    if !g.spec.dealias {
        return f.clone();
    }
    let mut spec = g.h_forward(f.values());
    g.truncate_spectrum(&mut spec);
    ScalarField3::from_values(g, f.tag, g.h_inverse(&spec)).expect("same grid")
}

pub fn dealias_vec(u: &VectorFieldH) -> VectorFieldH {
    VectorFieldH { u1: dealias(&u.u1), u2: dealias(&u.u2) }
}
