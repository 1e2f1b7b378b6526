//! Right-hand sides of the reformulated hydrostatic system, diagnostic
//! fields, and the barotropic divergence-free projection.
//!
//! Prognostic variables are the horizontal velocity `v` (cosine tag) and the
//! shifted temperature `T` (sine tag, homogeneous Dirichlet walls). Vertical
//! velocity and the baroclinic pressure are diagnostics, recomputed from the
//! prognostics via vertical integration. The surface pressure never appears:
//! its gradient is eliminated by projecting the barotropic velocity mean onto
//! the divergence-free constraint.

use std::sync::Arc;

use crate::calculus::{
    dealias, dealias_vec, ddz, div_h, div_h_2d, grad_h, lap_h, vertical_average_vec,
    vint_from_bottom,
};
use crate::error::{CoreError, Result};
use crate::field::{ScalarField3, VectorFieldH};
use crate::grid::{BasisTag, Grid};

/// Physical run parameters.
#[derive(Clone)]
pub struct ModelParams {
    /// Horizontal Reynolds number.
    pub r1: f64,
    /// Vertical Reynolds number.
    pub r2: f64,
    /// Vertical eddy heat diffusivity coefficient.
    pub r3: f64,
    /// Coriolis parameter.
    pub f0: f64,
    /// Channel depth (must match the grid).
    pub h: f64,
    /// Time-independent heat source, sine tag.
    pub q: ScalarField3,
}

impl ModelParams {
    /// Validate positivity and project `q` onto the sine basis. Inputs that
    /// are not wall-compatible are projected with a logged warning.
    pub fn new(r1: f64, r2: f64, r3: f64, f0: f64, grid: &Arc<Grid>, q: ScalarField3) -> Result<Self> {
        for (name, v) in [("R1", r1), ("R2", r2), ("R3", r3)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidConfig(format!("params.{name} must be > 0, got {v}")));
            }
        }
        if !f0.is_finite() {
            return Err(CoreError::InvalidConfig(format!("params.f0 must be finite, got {f0}")));
        }
        if !q.grid().same_as(grid) {
            return Err(CoreError::GridMismatch("heat source on a different grid".into()));
        }
        let coef = grid.vert_analyze(q.values(), BasisTag::Sine);
        let proj = grid.vert_synthesize(&coef, BasisTag::Sine);
        let defect = (&proj - q.values()).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if defect > 1e-10 * q.max_abs().max(1.0) {
            log::warn!(
                "heat source is not wall-compatible (defect {defect:.3e}); projected onto the sine basis"
            );
        }
        let q = dealias(&ScalarField3::from_values(grid, BasisTag::Sine, proj)?);
        Ok(Self { r1, r2, r3, f0, h: grid.h(), q })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.q.grid()
    }
}

/// Individual right-hand-side terms; all enabled for the physical model.
/// Tests zero selected terms to isolate identities.
#[derive(Debug, Clone, Copy)]
pub struct TermToggles {
    /// Horizontal + vertical advection of velocity and temperature.
    pub advection: bool,
    /// Rotation `-f0 k x v`.
    pub coriolis: bool,
    /// Baroclinic pressure gradient in the momentum equation.
    pub buoyancy: bool,
    /// The `(1/h) int div v` source in the temperature equation.
    pub coupling: bool,
    /// The prescribed heat source.
    pub heat_source: bool,
}

impl TermToggles {
    pub const ALL: Self = Self {
        advection: true,
        coriolis: true,
        buoyancy: true,
        coupling: true,
        heat_source: true,
    };
}

impl Default for TermToggles {
    fn default() -> Self {
        Self::ALL
    }
}

/// Prognostic state plus cached diagnostics.
#[derive(Clone, Debug)]
pub struct State {
    pub t: f64,
    /// Horizontal velocity, cosine tag.
    pub v: VectorFieldH,
    /// Shifted temperature, sine tag.
    pub temp: ScalarField3,
    /// Diagnosed vertical velocity.
    pub w: ScalarField3,
    /// Diagnosed baroclinic pressure `p - p_s`.
    pub p_baroclinic: ScalarField3,
}

impl State {
    pub fn new(v: VectorFieldH, temp: ScalarField3, t: f64) -> Result<Self> {
        if v.tag() != BasisTag::Cosine {
            return Err(CoreError::InvalidConfig("velocity must carry the cosine tag".into()));
        }
        if temp.tag != BasisTag::Sine {
            return Err(CoreError::InvalidConfig("temperature must carry the sine tag".into()));
        }
        if !v.grid().same_as(temp.grid()) {
            return Err(CoreError::GridMismatch("state fields on different grids".into()));
        }
        let w = diagnose_w(&v);
        let p_baroclinic = diagnose_pressure(&temp);
        Ok(Self { t, v, temp, w, p_baroclinic })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.v.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.temp.is_finite()
    }

    /// Residual of the barotropic constraint, `max |div vbar| / max(1, |v|)`.
    pub fn constraint_residual(&self) -> f64 {
        let vbar = vertical_average_vec(&self.v);
        let div = div_h_2d(&vbar);
        div.max_abs() / self.v.max_magnitude().max(1.0)
    }
}

/// Vertical velocity diagnosed from the divergence of `v`:
/// `w = -int_{-h}^{z} div_h v`. Vanishes at the bottom exactly and at the
/// top whenever the barotropic mean is divergence-free.
pub fn diagnose_w(v: &VectorFieldH) -> ScalarField3 {
    vint_from_bottom(&div_h(v)).scaled(-1.0)
}

/// Baroclinic pressure `p - p_s = -int_{-h}^{z} T`.
pub fn diagnose_pressure(temp: &ScalarField3) -> ScalarField3 {
    vint_from_bottom(temp).scaled(-1.0)
}

/// Recover the physical temperature from the shifted variable:
/// `T_phys = T - z/h`. The result carries no modal tag.
pub fn reconstruct_physical_t(temp: &ScalarField3, h: f64) -> ScalarField3 {
    let g = temp.grid();
    let mut data = temp.values().clone();
    let (nz, ny, nx) = data.dim();
    for iz in 0..nz {
        let shift = g.z[iz] / h;
        for iy in 0..ny {
            for ix in 0..nx {
                data[(iz, iy, ix)] -= shift;
            }
        }
    }
    ScalarField3::from_values(g, BasisTag::General, data).expect("same grid")
}

/// Forward shift, the inverse of [`reconstruct_physical_t`]; the result is
/// tagged sine (exact when the physical field satisfies the wall values).
pub fn shift_physical_t(t_phys: &ScalarField3, h: f64) -> ScalarField3 {
    let g = t_phys.grid();
    let mut data = t_phys.values().clone();
    let (nz, ny, nx) = data.dim();
    for iz in 0..nz {
        let shift = g.z[iz] / h;
        for iy in 0..ny {
            for ix in 0..nx {
                data[(iz, iy, ix)] += shift;
            }
        }
    }
    ScalarField3::from_values(g, BasisTag::Sine, data).expect("same grid")
}

/// Replace the barotropic (vertical-mean) part of `dv` by its 2D
/// divergence-free projection; the baroclinic part is untouched. This is the
/// discrete elimination of the surface-pressure gradient.
pub fn barotropic_project(dv: &VectorFieldH) -> VectorFieldH {
    let g = dv.grid().clone();
    let vbar = vertical_average_vec(dv);
    let div = div_h_2d(&vbar);
    let mut dhat = g.h_forward2(div.values());
    // The mean of a divergence vanishes on the torus.
    debug_assert!(dhat[(0, 0)].norm() <= 1e-10 * dv.max_magnitude().max(1.0));
    // chi solves lap chi = div vbar with zero mean; correction is grad chi.
    for ((iy, ix), c) in dhat.indexed_iter_mut() {
        let dx = g.dx_mult(ix);
        let dy = g.dy_mult(iy);
        let lam = (dx * dx + dy * dy).re;
        if lam == 0.0 {
            *c = rustfft::num_complex::Complex::new(0.0, 0.0);
        } else {
            *c /= lam;
        }
    }
    let mut cx = dhat.clone();
    let mut cy = dhat;
    for ((_, ix), v) in cx.indexed_iter_mut() {
        *v *= g.dx_mult(ix);
    }
    for ((iy, _), v) in cy.indexed_iter_mut() {
        *v *= g.dy_mult(iy);
    }
    let corr1 = g.h_inverse2(&cx);
    let corr2 = g.h_inverse2(&cy);
    let mut out = dv.clone();
    let (nz, ny, nx) = out.u1.values().dim();
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                out.u1.values_mut()[(iz, iy, ix)] -= corr1[(iy, ix)];
                out.u2.values_mut()[(iz, iy, ix)] -= corr2[(iy, ix)];
            }
        }
    }
    out
}

/// Explicit/implicit split of the right-hand side at one state.
pub struct Tendency {
    pub dv_explicit: VectorFieldH,
    pub dtemp_explicit: ScalarField3,
    /// Diffusion applied as a field, `-L1 v`.
    pub dv_implicit: VectorFieldH,
    /// Diffusion applied as a field, `-L2 T`.
    pub dtemp_implicit: ScalarField3,
}

impl Tendency {
    pub fn dv_total(&self) -> VectorFieldH {
        self.dv_explicit.add(&self.dv_implicit)
    }

    pub fn dtemp_total(&self) -> ScalarField3 {
        self.dtemp_explicit.add(&self.dtemp_implicit)
    }
}

/// Explicit momentum tendency
/// `-(v . grad_h) v + (int_{-h}^{z} div_h v) dv/dz - f0 k x v + grad_h int_{-h}^{z} T`,
/// with every quadratic product dealiased, plus the diffusion `-L1 v` as the
/// implicit part. The surface-pressure gradient is omitted here; the
/// projection enforces the constraint it would maintain.
pub fn momentum_tendency(
    s: &State,
    p: &ModelParams,
    toggles: &TermToggles,
) -> (VectorFieldH, VectorFieldH) {
    let g = s.grid().clone();
    let mut dv = VectorFieldH::zeros(&g, BasisTag::Cosine);

    if toggles.advection {
        // int_{-h}^{z} div_h v = -w
        let int_div = s.w.scaled(-1.0);
        let g1 = grad_h(&s.v.u1);
        let g2 = grad_h(&s.v.u2);
        let vz1 = ddz(&s.v.u1);
        let vz2 = ddz(&s.v.u2);
        let adv1 = s.v.u1.mul(&g1.u1).add(&s.v.u2.mul(&g1.u2)).sub(&int_div.mul(&vz1));
        let adv2 = s.v.u1.mul(&g2.u1).add(&s.v.u2.mul(&g2.u2)).sub(&int_div.mul(&vz2));
        dv.u1.add_scaled_assign(&dealias(&adv1), -1.0);
        dv.u2.add_scaled_assign(&dealias(&adv2), -1.0);
    }
    if toggles.coriolis {
        // -f0 k x v = (f0 v2, -f0 v1)
        dv.u1.add_scaled_assign(&s.v.u2, p.f0);
        dv.u2.add_scaled_assign(&s.v.u1, -p.f0);
    }
    if toggles.buoyancy {
        // grad_h int_{-h}^{z} T = -grad_h p_baroclinic
        let bp = grad_h(&s.p_baroclinic);
        dv.u1.add_scaled_assign(&bp.u1, -1.0);
        dv.u2.add_scaled_assign(&bp.u2, -1.0);
    }

    let dv_imp = VectorFieldH {
        u1: lap_h(&s.v.u1).scaled(1.0 / p.r1).add(&d2dz2_scaled(&s.v.u1, 1.0 / p.r2)),
        u2: lap_h(&s.v.u2).scaled(1.0 / p.r1).add(&d2dz2_scaled(&s.v.u2, 1.0 / p.r2)),
    };
    (dv, dv_imp)
}

/// Explicit temperature tendency
/// `-v . grad_h T + (int_{-h}^{z} div_h v)(dT/dz + 1/h) + Q`,
/// plus the implicit vertical diffusion `(1/R3) d2T/dz2`.
pub fn temperature_tendency(
    s: &State,
    p: &ModelParams,
    toggles: &TermToggles,
) -> (ScalarField3, ScalarField3) {
    let g = s.grid().clone();
    let mut dt = ScalarField3::zeros(&g, BasisTag::Sine);
    let int_div = s.w.scaled(-1.0);

    if toggles.advection {
        let gt = grad_h(&s.temp);
        let tz = ddz(&s.temp);
        let adv = s.v.u1.mul(&gt.u1).add(&s.v.u2.mul(&gt.u2)).sub(&int_div.mul(&tz));
        dt.add_scaled_assign(&dealias(&adv), -1.0);
    }
    if toggles.coupling {
        dt.add_scaled_assign(&int_div, 1.0 / p.h);
    }
    if toggles.heat_source {
        dt.add_assign(&p.q);
    }

    let dt_imp = d2dz2_scaled(&s.temp, 1.0 / p.r3);
    (dt, dt_imp)
}

fn d2dz2_scaled(f: &ScalarField3, a: f64) -> ScalarField3 {
    crate::calculus::d2dz2(f).scaled(a)
}

/// The assembled model: parameters, term toggles and an optional extra
/// explicit forcing (used e.g. by manufactured-solution runs).
pub struct PeModel {
    pub params: ModelParams,
    pub toggles: TermToggles,
    /// When set, the velocity is held fixed and only `T` evolves.
    pub freeze_velocity: bool,
    /// Extra explicit forcing `(F_v, F_T)(t)` added to the tendencies.
    pub forcing: Option<Box<dyn Fn(f64) -> (VectorFieldH, ScalarField3) + Send + Sync>>,
}

impl PeModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        if (params.h - params.grid().h()).abs() > 1e-14 * params.h.max(1.0) {
            return Err(CoreError::InvalidConfig(
                "params.h must match the grid depth".into(),
            ));
        }
        Ok(Self { params, toggles: TermToggles::ALL, freeze_velocity: false, forcing: None })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.params.grid()
    }

    /// Explicit and implicit tendency parts at the given state.
    pub fn tendency(&self, s: &State) -> Tendency {
        let (mut dv_explicit, dv_implicit) = momentum_tendency(s, &self.params, &self.toggles);
        let (mut dtemp_explicit, dtemp_implicit) =
            temperature_tendency(s, &self.params, &self.toggles);
        if let Some(f) = &self.forcing {
            let (fv, ft) = f(s.t);
            dv_explicit.add_scaled_assign(&fv, 1.0);
            dtemp_explicit.add_assign(&ft);
        }
        Tendency { dv_explicit, dtemp_explicit, dv_implicit, dtemp_implicit }
    }

    /// Prepare an initial state: dealias, enforce the barotropic constraint
    /// on `v`, and attach diagnostics.
    pub fn prepare_initial(&self, v: VectorFieldH, temp: ScalarField3, t: f64) -> Result<State> {
        let v = barotropic_project(&dealias_vec(&v));
        let temp = dealias(&temp);
        State::new(v, temp, t)
    }
}
