//! IMEX time integration: implicit (diagonal-in-modal-space) treatment of
//! the stiff diffusion operators, explicit treatment of advection, rotation,
//! buoyancy and sources, and the barotropic projection after every step.

use ndarray::Array3;
use rustfft::num_complex::Complex;

use crate::error::{CoreError, Result};
use crate::field::{ScalarField3, VectorFieldH};
use crate::grid::{BasisTag, Grid};
use crate::model::{barotropic_project, PeModel, State};

/// Time-integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Forward Euler explicit terms, backward Euler diffusion.
    ImexEuler,
    /// Adams-Bashforth 2 explicit terms, Crank-Nicolson diffusion;
    /// bootstrapped with one Euler step.
    ImexCnAb2,
}

impl std::str::FromStr for Scheme {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex_euler" => Ok(Scheme::ImexEuler),
            "imex_cnab2" => Ok(Scheme::ImexCnAb2),
            other => Err(CoreError::InvalidConfig(format!(
                "stepper.scheme must be imex_euler or imex_cnab2, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::ImexEuler => write!(f, "imex_euler"),
            Scheme::ImexCnAb2 => write!(f, "imex_cnab2"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// When set, the step size shrinks to `cfl * min(dx/|v|, dz/|w|)`.
    pub cfl_target: Option<f64>,
    pub max_steps: usize,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64, scheme: Scheme) -> Self {
        Self { dt, t_end, scheme, cfl_target: None, max_steps: 10_000_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "stepper.dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "stepper.t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        if let Some(c) = self.cfl_target {
            if !(c > 0.0 && c < 1.0) {
                return Err(CoreError::InvalidConfig(format!(
                    "stepper.cfl_target must lie in (0,1), got {c}"
                )));
            }
        }
        Ok(())
    }
}

struct PrevExplicit {
    dv: VectorFieldH,
    dtemp: ScalarField3,
    dt: f64,
}

/// One-trajectory integrator; owns the Adams-Bashforth history.
pub struct Stepper<'m> {
    model: &'m PeModel,
    cfg: StepperConfig,
    prev: Option<PrevExplicit>,
    /// Greatest `dt / cfl-bound` ratio seen (<= 1 when the cap is honored).
    pub max_cfl_fraction: f64,
}

impl<'m> Stepper<'m> {
    pub fn new(model: &'m PeModel, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { model, cfg, prev: None, max_cfl_fraction: 0.0 })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// Step size for the next step from this state (CFL-capped when enabled).
    pub fn next_dt(&self, s: &State) -> f64 {
        let mut dt = self.cfg.dt;
        if let Some(cfl) = self.cfg.cfl_target {
            let g = s.grid();
            let dx = (1.0 / g.nx() as f64).min(1.0 / g.ny() as f64);
            let dz = g.h() / g.nz() as f64;
            let vmax = s.v.max_magnitude();
            let wmax = s.w.max_abs();
            let mut cap = f64::INFINITY;
            if vmax > 0.0 {
                cap = cap.min(dx / vmax);
            }
            if wmax > 0.0 {
                cap = cap.min(dz / wmax);
            }
            if cap.is_finite() {
                dt = dt.min(cfl * cap);
            }
        }
        dt
    }

    /// Advance one step of size `dt` (callers usually let [`Stepper::step`]
    /// choose it). The barotropic constraint holds on the output.
    pub fn step_by(&mut self, s: &State, dt: f64) -> Result<State> {
        if !(dt > 0.0) {
            return Err(CoreError::InvalidConfig(format!("step size must be > 0, got {dt}")));
        }
        let p = &self.model.params;
        let ten = self.model.tendency(s);

        // Adams-Bashforth weights, adjusted for a varying step size.
        let (c_now, c_prev) = match (self.cfg.scheme, &self.prev) {
            (Scheme::ImexCnAb2, Some(prev)) => {
                let r = dt / prev.dt;
                (1.0 + r / 2.0, -r / 2.0)
            }
            _ => (1.0, 0.0),
        };
        let crank_nicolson = matches!(self.cfg.scheme, Scheme::ImexCnAb2) && self.prev.is_some();

        let mut fv = ten.dv_explicit.scaled(c_now);
        let mut ft = ten.dtemp_explicit.scaled(c_now);
        if c_prev != 0.0 {
            let prev = self.prev.as_ref().expect("history");
            fv.add_scaled_assign(&prev.dv, c_prev);
            ft.add_scaled_assign(&prev.dtemp, c_prev);
        }

        let new_v = if self.model.freeze_velocity {
            s.v.clone()
        } else {
            let u1 = implicit_update(&s.v.u1, &fv.u1, dt, crank_nicolson, |g, m, lx, ly| {
                lx / p.r1 + ly / p.r1 + vertical_eig(g, BasisTag::Cosine, m) / p.r2
            });
            let u2 = implicit_update(&s.v.u2, &fv.u2, dt, crank_nicolson, |g, m, lx, ly| {
                lx / p.r1 + ly / p.r1 + vertical_eig(g, BasisTag::Cosine, m) / p.r2
            });
            if !(u1.is_finite() && u2.is_finite()) {
                return Err(CoreError::BlowUp { time: s.t + dt, field: "v" });
            }
            barotropic_project(&VectorFieldH { u1, u2 })
        };
        let new_t = implicit_update(&s.temp, &ft, dt, crank_nicolson, |g, m, _lx, _ly| {
            vertical_eig(g, BasisTag::Sine, m) / p.r3
        });

        let t_new = s.t + dt;
        if !new_v.is_finite() {
            return Err(CoreError::BlowUp { time: t_new, field: "v" });
        }
        if !new_t.is_finite() {
            return Err(CoreError::BlowUp { time: t_new, field: "T" });
        }

        self.prev = Some(PrevExplicit { dv: ten.dv_explicit, dtemp: ten.dtemp_explicit, dt });
        State::new(new_v, new_t, t_new)
    }

    /// Advance one step; the size is the configured `dt`, shrunk by the CFL
    /// cap when one is set.
    pub fn step(&mut self, s: &State) -> Result<State> {
        let dt = self.next_dt(s);
        if let Some(cfl) = self.cfg.cfl_target {
            let g = s.grid();
            let dx = (1.0 / g.nx() as f64).min(1.0 / g.ny() as f64);
            let dz = g.h() / g.nz() as f64;
            let vmax = s.v.max_magnitude();
            let wmax = s.w.max_abs();
            let mut cap = f64::INFINITY;
            if vmax > 0.0 {
                cap = cap.min(dx / vmax);
            }
            if wmax > 0.0 {
                cap = cap.min(dz / wmax);
            }
            if cap.is_finite() {
                self.max_cfl_fraction = self.max_cfl_fraction.max(dt / (cfl * cap));
            }
        }
        self.step_by(s, dt)
    }
}

/// Diffusion eigenvalue of one vertical mode row (`-d2/dz2` restricted to
/// the tagged basis).
fn vertical_eig(g: &Grid, tag: BasisTag, row: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let m = match tag {
        BasisTag::Cosine => row,
        BasisTag::Sine => row + 1,
        BasisTag::General => unreachable!("prognostic fields are tagged"),
    };
    ((m as f64) * pi / g.h()).powi(2)
}

/// Solve the scalar implicit relation per mode:
/// backward Euler `(1 + dt lam) x' = x + dt f`, or Crank-Nicolson
/// `(1 + dt lam / 2) x' = (1 - dt lam / 2) x + dt f`.
fn implicit_update<F>(
    x: &ScalarField3,
    f: &ScalarField3,
    dt: f64,
    crank_nicolson: bool,
    lam: F,
) -> ScalarField3
where
    F: Fn(&Grid, usize, f64, f64) -> f64,
{
    let g = x.grid().clone();
    let tag = x.tag;
    let xm = modal_forward(&g, x);
    let fm = modal_forward(&g, f);
    let (nz, ny, nx) = xm.dim();
    let mut out = Array3::<Complex<f64>>::zeros((nz, ny, nx));
    for m in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let dx = g.dx_mult(ix);
                let dy = g.dy_mult(iy);
                // -(i 2 pi k)^2 = (2 pi k)^2
                let lx = -(dx * dx).re;
                let ly = -(dy * dy).re;
                let l = lam(&g, m, lx, ly);
                let num;
                let den;
                if crank_nicolson {
                    num = xm[(m, iy, ix)] * (1.0 - 0.5 * dt * l) + fm[(m, iy, ix)] * dt;
                    den = 1.0 + 0.5 * dt * l;
                } else {
                    num = xm[(m, iy, ix)] + fm[(m, iy, ix)] * dt;
                    den = 1.0 + dt * l;
                }
                out[(m, iy, ix)] = num / den;
            }
        }
    }
    modal_inverse(&g, &out, tag)
}

fn modal_forward(g: &Grid, f: &ScalarField3) -> Array3<Complex<f64>> {
    let coef = g.vert_analyze(f.values(), f.tag);
    g.h_forward(&coef)
}

fn modal_inverse(g: &std::sync::Arc<Grid>, modal: &Array3<Complex<f64>>, tag: BasisTag) -> ScalarField3 {
    let coef = g.h_inverse(modal);
    let vals = g.vert_synthesize(&coef, tag);
    ScalarField3::from_values(g, tag, vals).expect("same grid")
}

/// Why a run loop stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    /// Reached `t_end`.
    Completed,
    /// Hit the step cap before `t_end`.
    Truncated,
    /// A prognostic field left the finite range.
    BlewUp { time: f64 },
}

/// Trajectory summary with caller-defined samples.
pub struct RunSummary<S> {
    pub final_state: State,
    pub samples: Vec<S>,
    pub outcome: RunOutcome,
    pub steps: usize,
    /// Worst per-step barotropic constraint residual (scaled by `|v|`).
    pub max_constraint_residual: f64,
    /// Worst observed `dt / cfl-bound`; stays <= 1 under adaptive stepping.
    pub max_cfl_fraction: f64,
}

/// Integrate from `s0` to `t_end`, sampling every `cadence` steps (and at
/// the first and final step). Deterministic for identical inputs; a blow-up
/// ends the loop with the samples collected so far.
pub fn run<S>(
    s0: &State,
    model: &PeModel,
    cfg: &StepperConfig,
    cadence: usize,
    mut sample: impl FnMut(&State) -> S,
) -> Result<RunSummary<S>> {
    if cadence == 0 {
        return Err(CoreError::InvalidConfig("monitor cadence must be >= 1".into()));
    }
    cfg.validate()?;
    let mut stepper = Stepper::new(model, cfg.clone())?;
    let mut state = s0.clone();
    let mut samples = vec![sample(&state)];
    let mut steps = 0usize;
    let mut max_resid = state.constraint_residual();
    let eps = 1e-12 * cfg.t_end.max(1.0);

    let outcome = loop {
        if state.t >= cfg.t_end - eps {
            break RunOutcome::Completed;
        }
        if steps >= cfg.max_steps {
            break RunOutcome::Truncated;
        }
        let mut dt = stepper.next_dt(&state);
        if state.t + dt > cfg.t_end {
            dt = cfg.t_end - state.t;
        }
        match stepper.step_by(&state, dt) {
            Ok(next) => {
                state = next;
                steps += 1;
                max_resid = max_resid.max(state.constraint_residual());
                let done = state.t >= cfg.t_end - eps;
                if steps % cadence == 0 || done {
                    samples.push(sample(&state));
                }
            }
            Err(CoreError::BlowUp { time, .. }) => {
                break RunOutcome::BlewUp { time };
            }
            Err(e) => return Err(e),
        }
    };

    Ok(RunSummary {
        final_state: state,
        samples,
        outcome,
        steps,
        max_constraint_residual: max_resid,
        max_cfl_fraction: stepper.max_cfl_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::model::ModelParams;
    use crate::norms::norm_lq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn setup(nx: usize, nz: usize, h: f64, r3: f64) -> (Arc<Grid>, PeModel) {
        let g = Grid::new(GridSpec::new(nx, nx, nz, h, true)).unwrap();
        let q = ScalarField3::zeros(&g, BasisTag::Sine);
        let p = ModelParams::new(1.0, 1.0, r3, 0.3, &g, q).unwrap();
        (g.clone(), PeModel::new(p).unwrap())
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let (g, model) = setup(8, 9, 1.0, 1.0);
        let s0 = State::new(
            VectorFieldH::zeros(&g, BasisTag::Cosine),
            ScalarField3::zeros(&g, BasisTag::Sine),
            0.0,
        )
        .unwrap();
        let cfg = StepperConfig::new(1e-2, 0.1, Scheme::ImexCnAb2);
        let summary = run(&s0, &model, &cfg, 1, |s| norm_lq(&s.temp, 2.0)).unwrap();
        assert_eq!(summary.outcome, RunOutcome::Completed);
        for v in summary.samples {
            assert_eq!(v, 0.0);
        }
        assert!(summary.final_state.v.max_magnitude() == 0.0);
    }

    #[test]
    fn heat_mode_decay_matches_closed_form() {
        let h = 1.0;
        let r3 = 1.0;
        let (g, mut model) = setup(8, 17, h, r3);
        model.freeze_velocity = true;
        for m in [1usize, 2] {
            let temp = ScalarField3::from_fn(&g, BasisTag::Sine, |_, _, z| {
                (m as f64 * PI * (z + h) / h).sin()
            });
            let s0 = State::new(VectorFieldH::zeros(&g, BasisTag::Cosine), temp, 0.0).unwrap();
            let cfg = StepperConfig::new(1e-4, 0.1, Scheme::ImexCnAb2);
            let summary = run(&s0, &model, &cfg, 1000, |s| norm_lq(&s.temp, 2.0)).unwrap();
            let got = *summary.samples.last().unwrap();
            let lam = ((m as f64) * PI / h).powi(2) / r3;
            let expect = norm_lq(&s0.temp, 2.0) * (-lam * 0.1).exp();
            let rel = ((got - expect) / expect).abs();
            assert!(rel < 1e-3, "mode {m}: rel err {rel}");
        }
    }

    #[test]
    fn t_end_zero_returns_initial_state() {
        let (g, model) = setup(8, 9, 1.0, 1.0);
        let s0 = State::new(
            VectorFieldH::zeros(&g, BasisTag::Cosine),
            ScalarField3::from_fn(&g, BasisTag::Sine, |_, _, z| (PI * (z + 1.0)).sin()),
            0.0,
        )
        .unwrap();
        let cfg = StepperConfig::new(1e-2, 0.0, Scheme::ImexEuler);
        let summary = run(&s0, &model, &cfg, 1, |s| s.t).unwrap();
        assert_eq!(summary.steps, 0);
        assert_eq!(summary.samples, vec![0.0]);
    }

    #[test]
    fn blow_up_is_reported_with_finite_time() {
        let (g, model) = setup(8, 9, 1.0, 1.0);
        let v = VectorFieldH {
            u1: ScalarField3::from_fn(&g, BasisTag::Cosine, |_, y, z| {
                1e3 * (2.0 * PI * y).sin() * (PI * (z + 1.0)).cos()
            }),
            u2: ScalarField3::from_fn(&g, BasisTag::Cosine, |x, _, z| {
                1e3 * (2.0 * PI * x).sin() * (PI * (z + 1.0)).cos()
            }),
        };
        let s0 = model.prepare_initial(v, ScalarField3::zeros(&g, BasisTag::Sine), 0.0).unwrap();
        let cfg = StepperConfig::new(10.0, 400.0, Scheme::ImexCnAb2);
        let summary = run(&s0, &model, &cfg, 1, |s| s.t).unwrap();
        match summary.outcome {
            RunOutcome::BlewUp { time } => assert!(time.is_finite()),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn unforced_rotating_flow_has_nonincreasing_energy() {
        let (g, mut model) = setup(16, 9, 1.0, 1.0);
        model.toggles.advection = false;
        model.toggles.buoyancy = false;
        model.toggles.coupling = false;
        let v = VectorFieldH {
            u1: ScalarField3::from_fn(&g, BasisTag::Cosine, |_, y, z| {
                (2.0 * PI * y).sin() * (1.0 + 0.3 * (PI * (z + 1.0)).cos())
            }),
            u2: ScalarField3::from_fn(&g, BasisTag::Cosine, |x, _, _| (2.0 * PI * x).sin()),
        };
        let s0 = model.prepare_initial(v, ScalarField3::zeros(&g, BasisTag::Sine), 0.0).unwrap();
        let cfg = StepperConfig::new(5e-3, 0.2, Scheme::ImexEuler);
        let summary = run(&s0, &model, &cfg, 1, |s| {
            (norm_lq(&s.v.u1, 2.0).powi(2) + norm_lq(&s.v.u2, 2.0).powi(2)).sqrt()
        })
        .unwrap();
        for pair in summary.samples.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn constraint_residual_stays_at_round_off() {
        let (g, model) = setup(16, 9, 1.0, 1.0);
        let v = VectorFieldH {
            u1: ScalarField3::from_fn(&g, BasisTag::Cosine, |x, y, z| {
                (2.0 * PI * y).sin() + 0.5 * (2.0 * PI * x).cos() * (PI * (z + 1.0)).cos()
            }),
            u2: ScalarField3::from_fn(&g, BasisTag::Cosine, |x, _, _| 0.3 * (2.0 * PI * x).sin()),
        };
        let temp = ScalarField3::from_fn(&g, BasisTag::Sine, |x, _, z| {
            0.2 * (2.0 * PI * x).cos() * (PI * (z + 1.0)).sin()
        });
        let s0 = model.prepare_initial(v, temp, 0.0).unwrap();
        let cfg = StepperConfig::new(2e-3, 0.1, Scheme::ImexCnAb2);
        let summary = run(&s0, &model, &cfg, 10, |s| s.t).unwrap();
        assert!(summary.max_constraint_residual < 1e-10);
    }

    #[test]
    fn config_validation_and_truncation() {
        let (g, model) = setup(8, 9, 1.0, 1.0);
        let s0 = State::new(
            VectorFieldH::zeros(&g, BasisTag::Cosine),
            ScalarField3::from_fn(&g, BasisTag::Sine, |_, _, z| (PI * (z + 1.0)).sin()),
            0.0,
        )
        .unwrap();

        // nonpositive step size is a configuration error
        let bad = StepperConfig::new(0.0, 1.0, Scheme::ImexEuler);
        assert!(matches!(Stepper::new(&model, bad), Err(CoreError::InvalidConfig(_))));
        let bad_cfl = StepperConfig { cfl_target: Some(1.5), ..StepperConfig::new(1e-3, 1.0, Scheme::ImexEuler) };
        assert!(bad_cfl.validate().is_err());

        // hitting the step cap reports truncation and keeps the samples
        let mut cfg = StepperConfig::new(1e-3, 1.0, Scheme::ImexCnAb2);
        cfg.max_steps = 3;
        let summary = run(&s0, &model, &cfg, 1, |s| s.t).unwrap();
        assert_eq!(summary.outcome, RunOutcome::Truncated);
        assert_eq!(summary.steps, 3);
        assert_eq!(summary.samples.len(), 4);
    }

    #[test]
    fn one_step_activates_the_coupling_source_exactly() {
        // frozen velocity with level-dependent divergence, T0 = 0, Q = 0:
        // a single backward-Euler step must produce T = dt W / h with the
        // single-mode implicit division applied, and a level-wise
        // divergence-free velocity must keep T at zero
        let h = 1.0;
        let (g, mut model) = setup(16, 17, h, 2.0);
        model.freeze_velocity = true;
        let v = VectorFieldH {
            u1: ScalarField3::from_fn(&g, BasisTag::Cosine, |x, _, z| {
                (2.0 * PI * x).sin() * (PI * (z + 1.0)).cos()
            }),
            u2: ScalarField3::zeros(&g, BasisTag::Cosine),
        };
        let s0 = State::new(v, ScalarField3::zeros(&g, BasisTag::Sine), 0.0).unwrap();
        let dt = 1e-3;
        let cfg = StepperConfig::new(dt, dt, Scheme::ImexEuler);
        let mut stepper = Stepper::new(&model, cfg).unwrap();
        let s1 = stepper.step(&s0).unwrap();
        // oracle: W = int div v is a pure m = 1 sine mode, so the implicit
        // solve divides by (1 + dt (pi/h)^2 / R3)
        let r3 = 2.0;
        let lam = (PI / h).powi(2) / r3;
        let expected = ScalarField3::from_fn(&g, BasisTag::Sine, move |x, _, z| {
            let int_div = 2.0 * PI * (2.0 * PI * x).cos() * (h / PI) * (PI * (z + h) / h).sin();
            dt * (int_div / h) / (1.0 + dt * lam)
        });
        let err = (s1.temp.values() - expected.values())
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * expected.max_abs(), "one-step oracle mismatch {err}");
        assert!(s1.temp.max_abs() > 1e-5);

        // level-wise divergence-free velocity keeps T identically zero
        let shear = VectorFieldH {
            u1: ScalarField3::from_fn(&g, BasisTag::Cosine, |_, y, z| {
                (2.0 * PI * y).sin() * (PI * (z + 1.0)).cos()
            }),
            u2: ScalarField3::zeros(&g, BasisTag::Cosine),
        };
        let s0 = State::new(shear, ScalarField3::zeros(&g, BasisTag::Sine), 0.0).unwrap();
        let cfg = StepperConfig::new(dt, 10.0 * dt, Scheme::ImexCnAb2);
        let summary = run(&s0, &model, &cfg, 1, |s| s.temp.max_abs()).unwrap();
        for v in summary.samples {
            assert!(v <= 1e-13);
        }
    }

    #[test]
    fn adaptive_dt_honors_the_cfl_cap() {
        let (g, model) = setup(16, 9, 1.0, 1.0);
        let v = VectorFieldH {
            u1: ScalarField3::from_fn(&g, BasisTag::Cosine, |_, y, _| 3.0 * (2.0 * PI * y).sin()),
            u2: ScalarField3::zeros(&g, BasisTag::Cosine),
        };
        let s0 = model.prepare_initial(v, ScalarField3::zeros(&g, BasisTag::Sine), 0.0).unwrap();
        let mut cfg = StepperConfig::new(0.05, 0.1, Scheme::ImexCnAb2);
        cfg.cfl_target = Some(0.5);
        let summary = run(&s0, &model, &cfg, 1, |s| s.t).unwrap();
        assert!(summary.max_cfl_fraction <= 1.0 + 1e-12);
        assert!(summary.steps > 2);
    }
}
