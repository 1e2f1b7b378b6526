//! Subcommand implementations: simulate, twin, ineqlab, snapshot-info.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use pe_core::ineq::{run_lab, LabConfig};
use pe_core::monitor::run_monitored;
use pe_core::stepper::RunOutcome;
use pe_core::{certify, twin_run, Grid, InitNorms, ModelParams, PeModel, State, StepperConfig};

use crate::config::RunConfig;
use crate::output;
use crate::profiles::{self, Perturbation, PerturbField};
use crate::snapshot;

/// Env var overriding `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "PECH_OUTPUT_DIR";

fn out_dir(cfg: &RunConfig) -> PathBuf {
    match std::env::var(OUTPUT_DIR_ENV) {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(&cfg.out_dir),
    }
}

fn build_model(cfg: &RunConfig) -> Result<(Arc<Grid>, PeModel)> {
    let grid = Grid::new(cfg.grid.clone()).map_err(|e| anyhow::anyhow!("{e}"))?;
    let q = profiles::heat_source(cfg, &grid);
    let params = ModelParams::new(cfg.r1, cfg.r2, cfg.r3, cfg.f0, &grid, q)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let model = PeModel::new(params).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((grid, model))
}

fn stepper_config(cfg: &RunConfig) -> StepperConfig {
    StepperConfig {
        dt: cfg.dt,
        t_end: cfg.t_end,
        scheme: cfg.scheme,
        cfl_target: cfg.cfl_target,
        max_steps: cfg.max_steps,
    }
}

fn initial_state(cfg: &RunConfig, grid: &Arc<Grid>, model: &PeModel) -> Result<State> {
    let (v, temp, t) = profiles::initial_fields(cfg, grid)?;
    model.prepare_initial(v, temp, t).map_err(|e| anyhow::anyhow!("{e}"))
}

/// Run a simulation, write `series.csv`, `certificates.csv`, `config.echo`
/// and optionally a final snapshot; print one summary line per certificate.
pub fn cmd_simulate(config_path: &Path) -> Result<i32> {
    let cfg = crate::config::parse_config(config_path)?;
    let dir = out_dir(&cfg);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output dir `{}`", dir.display()))?;
    output::write(&dir.join("config.echo"), &cfg.echo())?;

    let (grid, model) = build_model(&cfg)?;
    let s0 = initial_state(&cfg, &grid, &model)?;
    let init = InitNorms::compute(&s0, &model.params);
    let run = run_monitored(&s0, &model, &stepper_config(&cfg), cfg.cadence)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    // series rows are flushed even when the run blew up mid-way
    output::write(&dir.join("series.csv"), &output::series_csv(&run.summary.samples, &init)?)?;

    let reports = certify(&run.summary.samples, &model.params, &init, cfg.certificate_c)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    output::write(&dir.join("certificates.csv"), &output::certificates_csv(&reports))?;
    for r in &reports {
        println!("certificate {}: empirical_C={:.6e} pass={}", r.name, r.empirical_c, r.pass);
    }

    if cfg.write_final_snapshot {
        snapshot::write_snapshot(&run.summary.final_state, &dir.join("final.snap"))?;
    }

    match run.summary.outcome {
        RunOutcome::Completed => {
            println!(
                "completed: {} steps to t = {}, worst constraint residual {:.3e}",
                run.summary.steps, run.summary.final_state.t, run.summary.max_constraint_residual
            );
            Ok(0)
        }
        RunOutcome::Truncated => {
            println!(
                "truncated: step cap {} reached at t = {} (partial outputs written)",
                cfg.max_steps, run.summary.final_state.t
            );
            Ok(0)
        }
        RunOutcome::BlewUp { time } => {
            eprintln!("blow-up detected at t = {time:.6e}; partial series flushed");
            Ok(2)
        }
    }
}

/// Twin-run experiment; `perturb` follows `FIELD:KX,KY,M:EPS`.
pub fn cmd_twin(config_path: &Path, perturb: Option<&str>) -> Result<i32> {
    let cfg = crate::config::parse_config(config_path)?;
    let dir = out_dir(&cfg);
    std::fs::create_dir_all(&dir)?;
    output::write(&dir.join("config.echo"), &cfg.echo())?;

    let (grid, model) = build_model(&cfg)?;
    let s0a = initial_state(&cfg, &grid, &model)?;
    let s0b = match perturb {
        None => s0a.clone(),
        Some(spec) => {
            let p: Perturbation = spec.parse()?;
            let bump = profiles::perturbation_field(&p, &grid);
            let mut v = s0a.v.clone();
            let mut temp = s0a.temp.clone();
            match p.field {
                PerturbField::V1 => v.u1.add_assign(&bump),
                PerturbField::V2 => v.u2.add_assign(&bump),
                PerturbField::Temp => temp.add_assign(&bump),
            }
            // velocity perturbations are re-projected onto the constraint
            model.prepare_initial(v, temp, s0a.t).map_err(|e| anyhow::anyhow!("{e}"))?
        }
    };

    let rep = twin_run(&s0a, &s0b, &model, &stepper_config(&cfg), cfg.cadence)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    output::write(&dir.join("twin.csv"), &output::twin_csv(&rep))?;
    println!(
        "twin run: D(0) = {:.6e}, empirical growth constant C-hat = {:.6e}",
        rep.d0, rep.c_hat
    );
    match rep.outcome {
        RunOutcome::BlewUp { time } => {
            eprintln!("blow-up detected at t = {time:.6e}; partial twin series flushed");
            Ok(2)
        }
        _ => Ok(0),
    }
}

/// Inequality sweep; nonzero exit when a constant-free inequality fails.
pub fn cmd_ineqlab(config_path: &Path) -> Result<i32> {
    let cfg = crate::config::parse_config(config_path)?;
    let dir = out_dir(&cfg);
    std::fs::create_dir_all(&dir)?;
    output::write(&dir.join("config.echo"), &cfg.echo())?;

    let lab = LabConfig {
        samples: cfg.lab.samples,
        band_limit: cfg.lab.band_limit,
        decay: cfg.lab.decay,
        rough_decay: cfg.lab.rough_decay,
        base_seed: cfg.seed,
        nx: cfg.lab.nx,
        nz: cfg.lab.nz,
        h: cfg.grid.h,
    };
    let rep = run_lab(&lab).map_err(|e| anyhow::anyhow!("{e}"))?;
    output::write(&dir.join("inequalities.csv"), &output::inequalities_csv(&rep.results))?;
    for r in &rep.results {
        println!(
            "inequality {}: empirical_C={:.6e} drift={:.3} {}",
            r.name,
            r.empirical_c,
            r.drift,
            if r.constant_free {
                if r.failures == 0 { "pass" } else { "FAIL" }
            } else {
                "reported"
            }
        );
    }
    let hard = rep.hard_failures();
    if hard > 0 {
        eprintln!("{hard} constant-free inequality violations");
        Ok(1)
    } else {
        Ok(0)
    }
}

/// Print the header of a snapshot file.
pub fn cmd_snapshot_info(path: &Path) -> Result<i32> {
    let info = snapshot::info(path)?;
    println!(
        "snapshot version {} grid {}x{}x{} h {} t {}",
        info.version, info.nx, info.ny, info.nz, info.h, info.t
    );
    let state = snapshot::read_snapshot(path, true)?;
    println!(
        "|v|_inf = {:.6e}  |T|_inf = {:.6e}  constraint residual = {:.3e}",
        state.v.max_magnitude(),
        state.temp.max_abs(),
        state.constraint_residual()
    );
    Ok(0)
}
