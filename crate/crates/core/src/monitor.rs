//! Functional monitors and runtime bound certification.
//!
//! Every functional used by the global-regularity estimate ladder is sampled
//! along trajectories, each named bound formula is evaluated with a generic
//! constant `C`, and a certificate pairs the two: the report carries the
//! smallest constant that validates the bound over the run, plus a pass flag
//! at a user-supplied constant. A twin-run experiment measures continuous
//! dependence on initial data against its Gronwall envelope.

use std::collections::BTreeMap;

use crate::calculus::{
    curl_h, ddz, div_h, div_h_2d, grad_h, grad_h_2d, lap_h, lap_h_2d, vertical_average_vec,
    vint_from_bottom, fluctuation_vec,
};
use crate::error::{CoreError, Result};
use crate::field::{ScalarField2, ScalarField3, VectorField2, VectorFieldH};
use crate::model::{
    momentum_tendency, reconstruct_physical_t, temperature_tendency, ModelParams, PeModel, State,
    TermToggles,
};
use crate::norms::{
    grad_h_norm_vec, inner_l2, inner_l2_vec, norm_lq, norm_lq_2d, sobolev_norm, sobolev_norm_vec,
    vec_norm_lq,
};
use crate::stepper::{run, RunOutcome, RunSummary, Stepper, StepperConfig};

// ---------------------------------------------------------- derived fields --

/// Shear-based derived variables feeding the higher-order monitors.
pub struct DerivedVars {
    /// Vertical shear `u = dv/dz` (sine tag).
    pub u: VectorFieldH,
    /// Per-level solution of `lap beta = grad T` with zero horizontal mean.
    pub beta: VectorFieldH,
    /// `zeta = u + R1 beta`.
    pub zeta: VectorFieldH,
    /// Perpendicular divergence (curl) of `zeta`.
    pub eta: ScalarField3,
    /// `theta = div u + R1 T`.
    pub theta: ScalarField3,
}

/// Per-level elliptic solve `lap_h beta = grad_h T`, zero-mean gauge:
/// modal division by the Laplacian symbol with the mean mode pinned to zero.
pub fn solve_beta(temp: &ScalarField3) -> VectorFieldH {
    let g = temp.grid().clone();
    let spec = g.h_forward(temp.values());
    let mut bx = spec.clone();
    let mut by = spec;
    let (nz, ny, nx) = bx.dim();
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let dx = g.dx_mult(ix);
                let dy = g.dy_mult(iy);
                let lam = (dx * dx + dy * dy).re;
                if lam == 0.0 {
                    bx[(iz, iy, ix)] = Default::default();
                    by[(iz, iy, ix)] = Default::default();
                } else {
                    let t = bx[(iz, iy, ix)];
                    bx[(iz, iy, ix)] = t * dx / lam;
                    by[(iz, iy, ix)] = t * dy / lam;
                }
            }
        }
    }
    VectorFieldH {
        u1: ScalarField3::from_values(&g, temp.tag, g.h_inverse(&bx)).expect("same grid"),
        u2: ScalarField3::from_values(&g, temp.tag, g.h_inverse(&by)).expect("same grid"),
    }
}

/// Assemble the derived variables from a state.
pub fn derived_vars(s: &State, p: &ModelParams) -> DerivedVars {
    let u = VectorFieldH { u1: ddz(&s.v.u1), u2: ddz(&s.v.u2) };
    let beta = solve_beta(&s.temp);
    let zeta = u.add(&beta.scaled(p.r1));
    let eta = curl_h(&zeta);
    let theta = div_h(&u).add(&s.temp.scaled(p.r1));
    DerivedVars { u, beta, zeta, eta, theta }
}

// ------------------------------------------------------------- functionals --

/// One monitor sample: every functional the certificate ladder consumes.
#[derive(Debug, Clone)]
pub struct FunctionalSample {
    pub t: f64,
    pub norm_v_l2: f64,
    pub norm_t_l2: f64,
    pub norm_tphys_inf: f64,
    pub norm_vtilde_l6: f64,
    pub norm_gradh_vbar_l2: f64,
    pub norm_u_l6: f64,
    pub norm_uz_l2: f64,
    pub eta_l2: f64,
    pub theta_l2: f64,
    pub laph_t_l2: f64,
    pub gradh_tz_l2: f64,
    pub laph_eta_l2: f64,
    pub laph_theta_l2: f64,
    /// Composite `X >= 1` and `Z = log X`; `Y` is its dissipation partner.
    pub x_comp: f64,
    pub z_comp: f64,
    pub y_comp: f64,
    pub div_vbar_inf: f64,
    /// `d/dt (|v|^2 + |T|^2)` evaluated from the assembled tendencies.
    pub energy_ddt: f64,
    /// `(1/R1)|grad_H v|^2 + (1/R2)|v_z|^2 + (1/R3)|T_z|^2`.
    pub energy_diss: f64,
    /// Relative residual of the discrete energy budget identity.
    pub energy_residual: f64,
    /// Margin of the energy inequality (bound minus left-hand side).
    pub energy_ineq_margin: f64,
    /// Dissipation integrands accumulated by the certificates.
    pub diss_k1: f64,
    pub diss_k3: f64,
    pub diss_k4: f64,
    pub diss_k5: f64,
    pub diss_k6: f64,
    pub diss_k7: f64,
}

impl FunctionalSample {
    /// Stable name/value listing (CSV schema order, spec columns first).
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("t", self.t),
            ("norm_v_L2", self.norm_v_l2),
            ("norm_T_L2", self.norm_t_l2),
            ("norm_Tphys_inf", self.norm_tphys_inf),
            ("norm_vtilde_L6", self.norm_vtilde_l6),
            ("norm_gradH_vbar_L2", self.norm_gradh_vbar_l2),
            ("norm_u_L6", self.norm_u_l6),
            ("norm_uz_L2", self.norm_uz_l2),
            ("eta_L2", self.eta_l2),
            ("theta_L2", self.theta_l2),
            ("lapH_T_L2", self.laph_t_l2),
            ("gradH_Tz_L2", self.gradh_tz_l2),
            ("X", self.x_comp),
            ("Z", self.z_comp),
            ("div_vbar_inf", self.div_vbar_inf),
            ("energy_residual", self.energy_residual),
            ("Y", self.y_comp),
            ("lapH_eta_L2", self.laph_eta_l2),
            ("lapH_theta_L2", self.laph_theta_l2),
            ("energy_ddt", self.energy_ddt),
            ("energy_diss", self.energy_diss),
            ("energy_ineq_margin", self.energy_ineq_margin),
            ("diss_K1", self.diss_k1),
            ("diss_K3", self.diss_k3),
            ("diss_K4", self.diss_k4),
            ("diss_K5", self.diss_k5),
            ("diss_K6", self.diss_k6),
            ("diss_K7", self.diss_k7),
        ]
    }
}

fn l2sq(f: &ScalarField3) -> f64 {
    let n = norm_lq(f, 2.0);
    n * n
}

fn l2sq_2d(f: &ScalarField2) -> f64 {
    let n = norm_lq_2d(f, 2.0);
    n * n
}

fn vec_l2sq(u: &VectorFieldH) -> f64 {
    l2sq(&u.u1) + l2sq(&u.u2)
}

fn vec_l2sq_2d(u: &VectorField2) -> f64 {
    l2sq_2d(&u.u1) + l2sq_2d(&u.u2)
}

fn grad_l2sq_2d(u: &VectorField2) -> f64 {
    let g1 = grad_h_2d(&u.u1);
    let g2 = grad_h_2d(&u.u2);
    vec_l2sq_2d(&g1) + vec_l2sq_2d(&g2)
}

/// `X` as displayed: `1 + |grad lap vbar|^2 + C_R |lap T|^2 + C_R |grad T_z|^2
/// + |lap eta|^2 + |grad eta_z|^2 + |lap theta|^2 + |grad theta_z|^2`,
/// with `C_R = 2 R1^2 (R1 + R2)(R2 - R3)^2 / (R2^2 R3)`.
pub fn coefficient_cr(p: &ModelParams) -> f64 {
    2.0 * p.r1 * p.r1 * (p.r1 + p.r2) * (p.r2 - p.r3).powi(2) / (p.r2 * p.r2 * p.r3)
}

/// Evaluate every monitored functional at a state.
pub fn sample_functionals(s: &State, p: &ModelParams) -> FunctionalSample {
    let dv = derived_vars(s, p);
    let vbar = vertical_average_vec(&s.v);
    let vtilde = fluctuation_vec(&s.v);

    let norm_v_l2 = vec_l2sq(&s.v).sqrt();
    let norm_t_l2 = norm_lq(&s.temp, 2.0);
    let tphys = reconstruct_physical_t(&s.temp, p.h);
    let norm_tphys_inf = tphys.max_abs();
    let norm_vtilde_l6 = vec_norm_lq(&vtilde, 6.0);
    let norm_gradh_vbar_l2 = grad_l2sq_2d(&vbar).sqrt();
    let norm_u_l6 = vec_norm_lq(&dv.u, 6.0);
    let uz = VectorFieldH { u1: ddz(&dv.u.u1), u2: ddz(&dv.u.u2) };
    let norm_uz_l2 = vec_l2sq(&uz).sqrt();
    let eta_l2 = norm_lq(&dv.eta, 2.0);
    let theta_l2 = norm_lq(&dv.theta, 2.0);
    let lap_t = lap_h(&s.temp);
    let laph_t_l2 = norm_lq(&lap_t, 2.0);
    let tz = ddz(&s.temp);
    let grad_tz = grad_h(&tz);
    let gradh_tz_l2 = vec_l2sq(&grad_tz).sqrt();
    let lap_eta = lap_h(&dv.eta);
    let lap_theta = lap_h(&dv.theta);
    let laph_eta_l2 = norm_lq(&lap_eta, 2.0);
    let laph_theta_l2 = norm_lq(&lap_theta, 2.0);

    // composites
    let cr = coefficient_cr(p);
    let lap_vbar = VectorField2 { u1: lap_h_2d(&vbar.u1), u2: lap_h_2d(&vbar.u2) };
    let grad_lap_vbar_sq = grad_l2sq_2d(&lap_vbar);
    let eta_z = ddz(&dv.eta);
    let theta_z = ddz(&dv.theta);
    let grad_eta_z = grad_h(&eta_z);
    let grad_theta_z = grad_h(&theta_z);
    let x_comp = 1.0
        + grad_lap_vbar_sq
        + cr * laph_t_l2 * laph_t_l2
        + cr * gradh_tz_l2 * gradh_tz_l2
        + laph_eta_l2 * laph_eta_l2
        + vec_l2sq(&grad_eta_z)
        + laph_theta_l2 * laph_theta_l2
        + vec_l2sq(&grad_theta_z);
    let z_comp = x_comp.ln();

    let lap_lap_vbar = VectorField2 { u1: lap_h_2d(&lap_vbar.u1), u2: lap_h_2d(&lap_vbar.u2) };
    let lap_tz = lap_h(&tz);
    let tzz = ddz(&tz);
    let grad_tzz = grad_h(&tzz);
    let grad_lap_eta = grad_h(&lap_eta);
    let grad_lap_theta = grad_h(&lap_theta);
    let lap_eta_z = lap_h(&eta_z);
    let lap_theta_z = lap_h(&theta_z);
    let y_comp = vec_l2sq_2d(&lap_lap_vbar)
        + l2sq(&lap_tz)
        + vec_l2sq(&grad_tzz)
        + vec_l2sq(&grad_lap_eta)
        + l2sq(&lap_eta_z)
        + vec_l2sq(&grad_lap_theta)
        + l2sq(&lap_theta_z);

    let div_vbar_inf = div_h_2d(&vbar).max_abs();

    // energy budget from the assembled tendencies
    let (dv_e, dv_i) = momentum_tendency(s, p, &TermToggles::ALL);
    let (dt_e, dt_i) = temperature_tendency(s, p, &TermToggles::ALL);
    let dv_tot = dv_e.add(&dv_i);
    let dt_tot = dt_e.add(&dt_i);
    let energy_ddt = 2.0
        * (inner_l2_vec(&dv_tot, &s.v).expect("same grid")
            + inner_l2(&dt_tot, &s.temp).expect("same grid"));

    let gn = grad_h_norm_vec(&s.v);
    let vz = VectorFieldH { u1: ddz(&s.v.u1), u2: ddz(&s.v.u2) };
    let vz2 = vec_l2sq(&vz);
    let tz2 = l2sq(&tz);
    let energy_diss = gn * gn / p.r1 + vz2 / p.r2 + tz2 / p.r3;

    let int_div = s.w.scaled(-1.0);
    let buoy = grad_h(&vint_from_bottom(&s.temp));
    let src = 2.0
        * (inner_l2(&p.q, &s.temp).expect("same grid")
            + inner_l2(&int_div, &s.temp).expect("same grid") / p.h
            + inner_l2_vec(&buoy, &s.v).expect("same grid"));
    let resid_abs = energy_ddt + 2.0 * energy_diss - src;
    let scale = energy_ddt.abs() + 2.0 * energy_diss + src.abs() + 1e-30;
    let energy_residual = resid_abs / scale;

    let q_l2 = norm_lq(&p.q, 2.0);
    let bound = q_l2 * q_l2 + (1.0 + p.r1) * (1.0 + p.h).powi(2) * norm_t_l2 * norm_t_l2;
    let energy_ineq_margin = bound - (energy_ddt + energy_diss);

    // dissipation integrands
    let diss_k1 = gn * gn + vz2 + tz2;

    let gt1 = grad_h(&vtilde.u1);
    let gt2 = grad_h(&vtilde.u2);
    let vt_z = VectorFieldH { u1: ddz(&vtilde.u1), u2: ddz(&vtilde.u2) };
    let w3 = s.grid().cell_volume();
    let mut i_grad_t4 = 0.0;
    let mut i_tz6 = 0.0;
    {
        let a1 = vtilde.u1.values();
        let a2 = vtilde.u2.values();
        let g11 = gt1.u1.values();
        let g12 = gt1.u2.values();
        let g21 = gt2.u1.values();
        let g22 = gt2.u2.values();
        let z1 = vt_z.u1.values();
        let z2 = vt_z.u2.values();
        for i in 0..a1.len() {
            let m2 = a1.as_slice().unwrap()[i].powi(2) + a2.as_slice().unwrap()[i].powi(2);
            let gmag2 = g11.as_slice().unwrap()[i].powi(2)
                + g12.as_slice().unwrap()[i].powi(2)
                + g21.as_slice().unwrap()[i].powi(2)
                + g22.as_slice().unwrap()[i].powi(2);
            let zn2 = z1.as_slice().unwrap()[i].powi(2) + z2.as_slice().unwrap()[i].powi(2);
            i_grad_t4 += gmag2 * m2 * m2;
            i_tz6 += zn2 * zn2 * zn2; // |vz|^6 as printed in the ladder
        }
        i_grad_t4 *= w3;
        i_tz6 *= w3;
    }
    let diss_k3 = i_grad_t4 / p.r1 + i_tz6 / p.r2;

    let diss_k4 = vec_l2sq_2d(&lap_vbar) / p.r1;

    let gu1 = grad_h(&dv.u.u1);
    let gu2 = grad_h(&dv.u.u2);
    let mut i_u4_gu2 = 0.0;
    let mut i_u4_uz2 = 0.0;
    {
        let a1 = dv.u.u1.values().as_slice().unwrap();
        let a2 = dv.u.u2.values().as_slice().unwrap();
        let g11 = gu1.u1.values().as_slice().unwrap();
        let g12 = gu1.u2.values().as_slice().unwrap();
        let g21 = gu2.u1.values().as_slice().unwrap();
        let g22 = gu2.u2.values().as_slice().unwrap();
        let z1 = uz.u1.values().as_slice().unwrap();
        let z2 = uz.u2.values().as_slice().unwrap();
        for i in 0..a1.len() {
            let m4 = (a1[i] * a1[i] + a2[i] * a2[i]).powi(2);
            let gmag2 = g11[i] * g11[i] + g12[i] * g12[i] + g21[i] * g21[i] + g22[i] * g22[i];
            let zn2 = z1[i] * z1[i] + z2[i] * z2[i];
            i_u4_gu2 += m4 * gmag2;
            i_u4_uz2 += m4 * zn2;
        }
        i_u4_gu2 *= w3;
        i_u4_uz2 *= w3;
    }
    let diss_k5 = i_u4_gu2 / p.r1 + i_u4_uz2 / p.r2;

    let guz1 = grad_h(&uz.u1);
    let guz2 = grad_h(&uz.u2);
    let uzz = VectorFieldH { u1: ddz(&uz.u1), u2: ddz(&uz.u2) };
    let diss_k6 = (vec_l2sq(&guz1) + vec_l2sq(&guz2)) / p.r1 + vec_l2sq(&uzz) / p.r2;

    let g_eta = grad_h(&dv.eta);
    let g_theta = grad_h(&dv.theta);
    let diss_k7 = (vec_l2sq(&g_eta) + vec_l2sq(&g_theta)) / p.r1
        + (l2sq(&eta_z) + l2sq(&theta_z)) / p.r2;

    FunctionalSample {
        t: s.t,
        norm_v_l2,
        norm_t_l2,
        norm_tphys_inf,
        norm_vtilde_l6,
        norm_gradh_vbar_l2,
        norm_u_l6,
        norm_uz_l2,
        eta_l2,
        theta_l2,
        laph_t_l2,
        gradh_tz_l2,
        laph_eta_l2,
        laph_theta_l2,
        x_comp,
        z_comp,
        y_comp,
        div_vbar_inf,
        energy_ddt,
        energy_diss,
        energy_residual,
        energy_ineq_margin,
        diss_k1,
        diss_k3,
        diss_k4,
        diss_k5,
        diss_k6,
        diss_k7,
    }
}

// -------------------------------------------------------------- init norms --

/// Initial-data norms consumed by the bound formulas, keyed by name.
#[derive(Debug, Clone)]
pub struct InitNorms {
    map: BTreeMap<String, f64>,
}

pub const INIT_NORM_KEYS: [&str; 11] = [
    "v0_L2",
    "T0_L2",
    "v0_H1",
    "dz_v0_H1",
    "v0_H4",
    "T0_H2",
    "Q_L2",
    "Q_inf",
    "lapH_Q_L2",
    "gradH_Qz_L2",
    "T0_inf",
];

impl InitNorms {
    pub fn from_map(map: BTreeMap<String, f64>) -> Self {
        Self { map }
    }

    /// Compute every key from the initial state and parameters. `T0_inf` is
    /// the sup of the reconstructed physical temperature.
    pub fn compute(s0: &State, p: &ModelParams) -> Self {
        let mut map = BTreeMap::new();
        map.insert("v0_L2".into(), vec_l2sq(&s0.v).sqrt());
        map.insert("T0_L2".into(), norm_lq(&s0.temp, 2.0));
        map.insert("v0_H1".into(), sobolev_norm_vec(&s0.v, 1));
        let dzv = VectorFieldH { u1: ddz(&s0.v.u1), u2: ddz(&s0.v.u2) };
        map.insert("dz_v0_H1".into(), sobolev_norm_vec(&dzv, 1));
        map.insert("v0_H4".into(), sobolev_norm_vec(&s0.v, 4));
        map.insert("T0_H2".into(), sobolev_norm(&s0.temp, 2));
        map.insert("Q_L2".into(), norm_lq(&p.q, 2.0));
        map.insert("Q_inf".into(), p.q.max_abs());
        map.insert("lapH_Q_L2".into(), norm_lq(&lap_h(&p.q), 2.0));
        let qz = ddz(&p.q);
        map.insert("gradH_Qz_L2".into(), vec_l2sq(&grad_h(&qz)).sqrt());
        map.insert(
            "T0_inf".into(),
            reconstruct_physical_t(&s0.temp, p.h).max_abs(),
        );
        Self { map }
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| CoreError::MissingNorm(key.to_string()))
    }

    pub fn insert(&mut self, key: &str, value: f64) {
        self.map.insert(key.to_string(), value);
    }
}

// ------------------------------------------------------------------ bounds --

/// Names of the certified bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundName {
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
    K7,
    K8,
    /// The composite bound certified in log form: `Z <= K`.
    K,
}

impl BoundName {
    pub const ALL: [BoundName; 9] = [
        BoundName::K1,
        BoundName::K2,
        BoundName::K3,
        BoundName::K4,
        BoundName::K5,
        BoundName::K6,
        BoundName::K7,
        BoundName::K8,
        BoundName::K,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::K1 => "K1",
            BoundName::K2 => "K2",
            BoundName::K3 => "K3",
            BoundName::K4 => "K4",
            BoundName::K5 => "K5",
            BoundName::K6 => "K6",
            BoundName::K7 => "K7",
            BoundName::K8 => "K8",
            BoundName::K => "K",
        }
    }

    /// Whether the bound is a plain multiple of a C-free expression
    /// (the deeper ladder formulas feed C through nested bounds).
    fn linear_in_c(&self) -> bool {
        matches!(self, BoundName::K1)
    }
}

impl std::str::FromStr for BoundName {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K1" => Ok(BoundName::K1),
            "K2" => Ok(BoundName::K2),
            "K3" => Ok(BoundName::K3),
            "K4" => Ok(BoundName::K4),
            "K5" => Ok(BoundName::K5),
            "K6" => Ok(BoundName::K6),
            "K7" => Ok(BoundName::K7),
            "K8" => Ok(BoundName::K8),
            "K" => Ok(BoundName::K),
            other => Err(CoreError::UnknownBound(other.to_string())),
        }
    }
}

/// Guard `a * t` so that `t = 0` yields 0 even when `a` overflows.
fn texp(a: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        a * t
    }
}

/// Bracket-times-growth with a zero bracket winning over an overflowed
/// exponential (the formulas multiply data norms by Gronwall factors).
fn prod(bracket: f64, growth: f64) -> f64 {
    if bracket == 0.0 {
        0.0
    } else {
        bracket * growth
    }
}

/// Evaluate a named bound at time `t` with generic constant `c`. The ladder
/// is nested: lower bounds are evaluated at the same `(c, t)` wherever a
/// formula references them.
pub fn eval_bound(name: BoundName, p: &ModelParams, init: &InitNorms, t: f64, c: f64) -> Result<f64> {
    let v0 = init.get("v0_L2")?;
    let t0 = init.get("T0_L2")?;
    let q2 = init.get("Q_L2")?;
    let e0 = v0 * v0 + t0 * t0;
    let growth = ((1.0 + p.r1) * (1.0 + p.h).powi(2) * t).exp();
    let k1 = c * (prod(e0, growth) + q2 * q2 * t);
    if name == BoundName::K1 {
        return Ok(k1);
    }

    let k2 = 1.0 + init.get("T0_inf")? + init.get("Q_inf")? * t;
    if name == BoundName::K2 {
        return Ok(k2);
    }

    let v0h1 = init.get("v0_H1")?;
    let k3 = prod(v0h1.powi(6) + k2.powi(4) * t, texp(k1 * k1, t).exp());
    if name == BoundName::K3 {
        return Ok(k3);
    }

    let k4 = prod(v0h1 * v0h1 + k2 + k3, texp(k2 * k2, t).exp());
    if name == BoundName::K4 {
        return Ok(k4);
    }

    let dzv0h1 = init.get("dz_v0_H1")?;
    let k5 = prod(
        dzv0h1.powi(6) + k2.powi(6) * t,
        texp(1.0 + k3.powf(2.0 / 3.0) + k4 * k4, t).exp(),
    );
    if name == BoundName::K5 {
        return Ok(k5);
    }

    let b6 = if c == 0.0 { 0.0 } else { c * (v0h1 * v0h1 + k1) };
    let k6 = prod(b6, texp(k3.powf(2.0 / 3.0) + k5.powf(2.0 / 3.0), t).exp());
    if name == BoundName::K6 {
        return Ok(k6);
    }

    let b7 = if c == 0.0 {
        0.0
    } else {
        c * (v0h1 * v0h1
            + k1
            + q2 * q2
            + k2 * k2 * (k2 + k3.powf(1.0 / 3.0) + k5.powf(1.0 / 3.0) + k6))
    };
    let k7 = prod(b7, texp(k1 + k3.powf(2.0 / 3.0) + k5.powf(2.0 / 3.0) + k6 * k6, t).exp());
    if name == BoundName::K7 {
        return Ok(k7);
    }

    // K and K8 share one expression.
    let v0h4 = init.get("v0_H4")?;
    let t0h2 = init.get("T0_H2")?;
    let lapq = init.get("lapH_Q_L2")?;
    let gqz = init.get("gradH_Qz_L2")?;
    let k = prod(
        1.0 + v0h4 * v0h4 + t0h2 * t0h2 + t + lapq * lapq * t + gqz * gqz * t,
        (c * (k1 + k2 + k7)).exp(),
    );
    Ok(k)
}

// ------------------------------------------------------------ certificates --

/// One certified (monitored, bound) pair over a run.
#[derive(Debug, Clone)]
pub struct CertSample {
    pub t: f64,
    pub monitored: f64,
    pub bound: f64,
}

/// Certificate: monitored series against a bound, the smallest generic
/// constant validating it, and the pass flag at the supplied constant.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub name: String,
    pub series: Vec<CertSample>,
    pub empirical_c: f64,
    pub pass: bool,
}

/// Tolerance of the maximum-principle certificate.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-5;
/// Tolerance of the energy-inequality certificate.
pub const ENERGY_INEQ_TOL: f64 = 1e-6;
/// Relative slack absorbing round-off in monitored-vs-bound comparisons.
const PASS_SLACK: f64 = 4.0 * f64::EPSILON;

fn passes(monitored: f64, bound: f64, abs_tol: f64) -> bool {
    monitored <= bound * (1.0 + PASS_SLACK) + abs_tol
}

/// Maximum-principle check at one sample: the reconstructed physical
/// temperature never exceeds `1 + |T0|_inf + |Q|_inf t` (plus `tol`).
pub fn max_principle_check(s: &State, p: &ModelParams, t0_inf: f64, tol: f64) -> CertSample {
    let monitored = reconstruct_physical_t(&s.temp, p.h).max_abs();
    let bound = 1.0 + t0_inf + p.q.max_abs() * s.t + tol;
    CertSample { t: s.t, monitored, bound }
}

/// Trapezoid cumulative integral of `f` over the sample times.
fn cumulative_trapezoid(ts: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; ts.len()];
    for i in 1..ts.len() {
        out[i] = out[i - 1] + 0.5 * (f[i] + f[i - 1]) * (ts[i] - ts[i - 1]);
    }
    out
}

/// Monitored quantity per bound name at each sample.
fn monitored_series(name: BoundName, samples: &[FunctionalSample]) -> Vec<f64> {
    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    match name {
        BoundName::K1 => {
            let d: Vec<f64> = samples.iter().map(|s| s.diss_k1).collect();
            let i = cumulative_trapezoid(&ts, &d);
            samples
                .iter()
                .zip(i)
                .map(|(s, acc)| s.norm_v_l2 * s.norm_v_l2 + s.norm_t_l2 * s.norm_t_l2 + acc)
                .collect()
        }
        BoundName::K2 => samples.iter().map(|s| s.norm_tphys_inf).collect(),
        BoundName::K3 => {
            let d: Vec<f64> = samples.iter().map(|s| s.diss_k3).collect();
            let i = cumulative_trapezoid(&ts, &d);
            samples
                .iter()
                .zip(i)
                .map(|(s, acc)| s.norm_vtilde_l6.powi(6) + acc)
                .collect()
        }
        BoundName::K4 => {
            let d: Vec<f64> = samples.iter().map(|s| s.diss_k4).collect();
            let i = cumulative_trapezoid(&ts, &d);
            samples
                .iter()
                .zip(i)
                .map(|(s, acc)| s.norm_gradh_vbar_l2.powi(2) + acc)
                .collect()
        }
        BoundName::K5 => {
            let d: Vec<f64> = samples.iter().map(|s| s.diss_k5).collect();
            let i = cumulative_trapezoid(&ts, &d);
            samples
                .iter()
                .zip(i)
                .map(|(s, acc)| s.norm_u_l6.powi(6) + acc)
                .collect()
        }
        BoundName::K6 => {
            let d: Vec<f64> = samples.iter().map(|s| s.diss_k6).collect();
            let i = cumulative_trapezoid(&ts, &d);
            samples
                .iter()
                .zip(i)
                .map(|(s, acc)| s.norm_uz_l2.powi(2) + acc)
                .collect()
        }
        BoundName::K7 => {
            let d: Vec<f64> = samples.iter().map(|s| s.diss_k7).collect();
            let i = cumulative_trapezoid(&ts, &d);
            samples
                .iter()
                .zip(i)
                .map(|(s, acc)| s.eta_l2.powi(2) + s.theta_l2.powi(2) + acc)
                .collect()
        }
        BoundName::K8 => {
            let d: Vec<f64> = samples.iter().map(|s| s.y_comp).collect();
            cumulative_trapezoid(&ts, &d)
        }
        BoundName::K => samples.iter().map(|s| s.z_comp).collect(),
    }
}

fn ratio(m: f64, b: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        m / b
    }
}

/// Smallest `c >= 0` for which `ok(c)` holds (monotone predicate);
/// deterministic bisection, infinity when no tried constant works.
fn minimal_c(ok: impl Fn(f64) -> bool) -> f64 {
    if ok(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut tries = 0;
    while !ok(hi) {
        hi *= 4.0;
        tries += 1;
        if tries > 120 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Certify one named bound over an ordered sample series.
pub fn certify_bound(
    name: BoundName,
    samples: &[FunctionalSample],
    p: &ModelParams,
    init: &InitNorms,
    c_user: f64,
) -> Result<CertificateReport> {
    let monitored = monitored_series(name, samples);
    let bound_at = |c: f64| -> Result<Vec<f64>> {
        samples.iter().map(|s| eval_bound(name, p, init, s.t, c)).collect()
    };
    let bounds_user = bound_at(c_user)?;
    let pass = monitored
        .iter()
        .zip(bounds_user.iter())
        .all(|(&m, &b)| passes(m, b, 0.0));

    let empirical_c = if name == BoundName::K2 {
        let b1 = bound_at(1.0)?;
        monitored.iter().zip(b1.iter()).map(|(&m, &b)| ratio(m, b)).fold(0.0, f64::max)
    } else if name.linear_in_c() {
        let b1 = bound_at(1.0)?;
        monitored.iter().zip(b1.iter()).map(|(&m, &b)| ratio(m, b)).fold(0.0, f64::max)
    } else {
        let mon = monitored.clone();
        let ok = |c: f64| -> bool {
            match bound_at(c) {
                Ok(bs) => mon.iter().zip(bs.iter()).all(|(&m, &b)| passes(m, b, 0.0)),
                Err(_) => false,
            }
        };
        minimal_c(ok)
    };

    let series = samples
        .iter()
        .zip(monitored.iter().zip(bounds_user.iter()))
        .map(|(s, (&m, &b))| CertSample { t: s.t, monitored: m, bound: b })
        .collect();
    Ok(CertificateReport { name: name.as_str().to_string(), series, empirical_c, pass })
}

/// Certify every K-bound plus the maximum principle and the energy
/// inequality over a time-ordered sample series.
pub fn certify(
    samples: &[FunctionalSample],
    p: &ModelParams,
    init: &InitNorms,
    c_user: f64,
) -> Result<Vec<CertificateReport>> {
    if samples.is_empty() {
        return Err(CoreError::InvalidConfig("empty monitor series".into()));
    }
    if samples.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(CoreError::UnorderedSeries);
    }

    let mut out = Vec::new();
    for name in BoundName::ALL {
        out.push(certify_bound(name, samples, p, init, c_user)?);
    }

    // maximum principle on the reconstructed physical temperature
    let t0_inf = init.get("T0_inf")?;
    let q_inf = init.get("Q_inf")?;
    let mp: Vec<CertSample> = samples
        .iter()
        .map(|s| CertSample {
            t: s.t,
            monitored: s.norm_tphys_inf,
            bound: 1.0 + t0_inf + q_inf * s.t,
        })
        .collect();
    let mp_pass = mp.iter().all(|c| passes(c.monitored, c.bound, MAX_PRINCIPLE_TOL));
    let mp_c = mp.iter().map(|c| ratio(c.monitored, c.bound)).fold(0.0, f64::max);
    out.push(CertificateReport {
        name: "max_principle".into(),
        series: mp,
        empirical_c: mp_c,
        pass: mp_pass,
    });

    // pointwise energy inequality
    let q_l2 = init.get("Q_L2")?;
    let en: Vec<CertSample> = samples
        .iter()
        .map(|s| CertSample {
            t: s.t,
            monitored: s.energy_ddt + s.energy_diss,
            bound: q_l2 * q_l2 + (1.0 + p.r1) * (1.0 + p.h).powi(2) * s.norm_t_l2 * s.norm_t_l2,
        })
        .collect();
    let en_pass = en.iter().all(|c| passes(c.monitored, c.bound, ENERGY_INEQ_TOL));
    let en_c = en
        .iter()
        .map(|c| if c.monitored <= 0.0 { 0.0 } else { ratio(c.monitored, c.bound) })
        .fold(0.0, f64::max);
    out.push(CertificateReport {
        name: "energy_inequality".into(),
        series: en,
        empirical_c: en_c,
        pass: en_pass,
    });

    Ok(out)
}

// -------------------------------------------------------------- run driver --

/// Full monitored trajectory: samples plus the run summary.
pub struct MonitoredRun {
    pub summary: RunSummary<FunctionalSample>,
}

/// Integrate and sample the functionals every `cadence` steps.
pub fn run_monitored(
    s0: &State,
    model: &PeModel,
    cfg: &StepperConfig,
    cadence: usize,
) -> Result<MonitoredRun> {
    let p = model.params.clone();
    let summary = run(s0, model, cfg, cadence, move |s| sample_functionals(s, &p))?;
    Ok(MonitoredRun { summary })
}

// ---------------------------------------------------------------- twin run --

/// One sample of the twin-run experiment.
#[derive(Debug, Clone)]
pub struct TwinSample {
    pub t: f64,
    /// Squared distance `|v_a - v_b|^2 + |T_a - T_b|^2`.
    pub d: f64,
    /// Accumulated Gronwall exponent integrand along the second trajectory.
    pub e: f64,
}

/// Continuous-dependence experiment report.
#[derive(Debug, Clone)]
pub struct TwinReport {
    pub rows: Vec<TwinSample>,
    pub d0: f64,
    /// Empirical growth constant `max_t log(D/D0) / E` (0 when undefined).
    pub c_hat: f64,
    pub outcome: RunOutcome,
}

impl TwinReport {
    /// Envelope `D0 exp(c_hat E(t))`.
    pub fn envelope(&self, e: f64) -> f64 {
        self.d0 * (self.c_hat * e).exp()
    }
}

fn twin_distance(a: &State, b: &State) -> f64 {
    let dv = a.v.sub(&b.v);
    let dt = a.temp.sub(&b.temp);
    vec_l2sq(&dv) + l2sq(&dt)
}

/// Gronwall exponent integrand on the reference trajectory:
/// `|v|_6^4 + |grad_H T|_{H1}^2 + |v_z|_6^4 + |dz lap_H T|_2^2`.
fn twin_integrand(s: &State) -> f64 {
    let v6 = vec_norm_lq(&s.v, 6.0);
    let gt = grad_h(&s.temp);
    let gt_h1 = sobolev_norm(&gt.u1, 1).powi(2) + sobolev_norm(&gt.u2, 1).powi(2);
    let vz = VectorFieldH { u1: ddz(&s.v.u1), u2: ddz(&s.v.u2) };
    let vz6 = vec_norm_lq(&vz, 6.0);
    let dzlap = ddz(&lap_h(&s.temp));
    v6.powi(4) + gt_h1 + vz6.powi(4) + l2sq(&dzlap)
}

/// Integrate two trajectories with identical configuration and report the
/// squared distance `D(t)` against its Gronwall envelope. The exponent is
/// accumulated by trapezoid on the monitor cadence along the second
/// trajectory.
pub fn twin_run(
    s0a: &State,
    s0b: &State,
    model: &PeModel,
    cfg: &StepperConfig,
    cadence: usize,
) -> Result<TwinReport> {
    if !s0a.grid().same_as(s0b.grid()) {
        return Err(CoreError::GridMismatch("twin states on different grids".into()));
    }
    if cadence == 0 {
        return Err(CoreError::InvalidConfig("monitor cadence must be >= 1".into()));
    }
    cfg.validate()?;

    let mut stepper_a = Stepper::new(model, cfg.clone())?;
    let mut stepper_b = Stepper::new(model, cfg.clone())?;
    let mut a = s0a.clone();
    let mut b = s0b.clone();

    let d0 = twin_distance(&a, &b);
    let mut last_integrand = twin_integrand(&b);
    let mut last_t = b.t;
    let mut e_acc = 0.0;
    let mut rows = vec![TwinSample { t: a.t, d: d0, e: 0.0 }];

    let eps = 1e-12 * cfg.t_end.max(1.0);
    let mut steps = 0usize;
    let outcome = loop {
        if a.t >= cfg.t_end - eps {
            break RunOutcome::Completed;
        }
        if steps >= cfg.max_steps {
            break RunOutcome::Truncated;
        }
        let mut dt = stepper_a.next_dt(&a);
        if a.t + dt > cfg.t_end {
            dt = cfg.t_end - a.t;
        }
        let ra = stepper_a.step_by(&a, dt);
        let rb = stepper_b.step_by(&b, dt);
        match (ra, rb) {
            (Ok(na), Ok(nb)) => {
                a = na;
                b = nb;
                steps += 1;
                let done = a.t >= cfg.t_end - eps;
                if steps % cadence == 0 || done {
                    let integ = twin_integrand(&b);
                    e_acc += 0.5 * (integ + last_integrand) * (b.t - last_t);
                    last_integrand = integ;
                    last_t = b.t;
                    rows.push(TwinSample { t: a.t, d: twin_distance(&a, &b), e: e_acc });
                }
            }
            (Err(CoreError::BlowUp { time, .. }), _) | (_, Err(CoreError::BlowUp { time, .. })) => {
                break RunOutcome::BlewUp { time };
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    };

    let mut c_hat = f64::NEG_INFINITY;
    if d0 > 0.0 {
        for r in rows.iter().skip(1) {
            if r.e > 0.0 && r.d > 0.0 {
                let v = (r.d / d0).ln() / r.e;
                if v.is_finite() {
                    c_hat = c_hat.max(v);
                }
            }
        }
    }
    if !c_hat.is_finite() {
        c_hat = 0.0;
    }

    Ok(TwinReport { rows, d0, c_hat, outcome })
}
