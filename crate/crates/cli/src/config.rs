//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment, keys are dotted (`params.R3`).
//! Unknown keys are rejected with their line number; missing required keys
//! and constraint violations name the offending key.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pe_core::{GridSpec, Scheme};

/// Named analytic initial profiles (plus snapshot restart).
#[derive(Debug, Clone, PartialEq)]
pub enum IcSpec {
    Zero,
    /// Low-order trigonometric products with configurable mode numbers.
    Taylor { amplitude: f64, temp_amplitude: f64, kx: u32, ky: u32, m: u32 },
    /// Single vertical temperature mode, velocity at rest.
    SingleModeT { temp_amplitude: f64, m: u32 },
    /// Band-limited random state drawn from `rng.seed`.
    Random { amplitude: f64, temp_amplitude: f64, band: u32 },
    /// Restart from a snapshot file.
    Snapshot { path: String },
}

/// Heat-source profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum QSpec {
    Zero,
    /// `A cos(2 pi kx x) cos(2 pi ky y) sin(m pi (z+h)/h)`.
    WarmPool { amplitude: f64, kx: u32, ky: u32, m: u32 },
}

/// Inequality-lab keys.
#[derive(Debug, Clone, PartialEq)]
pub struct LabKeys {
    pub samples: usize,
    pub band_limit: usize,
    pub decay: f64,
    pub rough_decay: f64,
    pub nx: usize,
    pub nz: usize,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub f0: f64,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub cfl_target: Option<f64>,
    pub max_steps: usize,
    pub ic: IcSpec,
    pub q: QSpec,
    pub cadence: usize,
    pub certificate_c: f64,
    pub out_dir: String,
    pub write_final_snapshot: bool,
    pub seed: u64,
    pub lab: LabKeys,
}

struct Reader {
    entries: BTreeMap<String, (usize, String)>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn required(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| anyhow!("missing required key `{key}`"))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, raw: String) -> Result<T> {
        raw.parse::<T>().map_err(|_| anyhow!("key `{key}`: cannot parse `{raw}`"))
    }

    fn required_t<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.required(key)?;
        self.parse(key, raw)
    }

    fn optional_t<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            Some(raw) => self.parse(key, raw),
            None => Ok(default),
        }
    }
}

fn parse_lines(text: &str) -> Result<Reader> {
    let mut entries = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`, got `{body}`"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            bail!("line {line_no}: expected `key = value`, got `{body}`");
        }
        if let Some((prev, _)) = entries.insert(key.clone(), (line_no, value)) {
            bail!("line {line_no}: duplicate key `{key}` (first set on line {prev})");
        }
    }
    Ok(Reader { entries })
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bail!("{key} must be > 0, got {v}")
    }
}

/// Parse and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config `{}`", path.display()))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut r = parse_lines(text)?;

    let grid = GridSpec::new(
        r.required_t("grid.nx")?,
        r.required_t("grid.ny")?,
        r.required_t("grid.nz")?,
        r.required_t("grid.h")?,
        r.optional_t("grid.dealias", true)?,
    );
    grid.validate().map_err(|e| anyhow!("{e}"))?;

    let r1 = positive("params.R1", r.required_t("params.R1")?)?;
    let r2 = positive("params.R2", r.required_t("params.R2")?)?;
    let r3 = positive("params.R3", r.required_t("params.R3")?)?;
    let f0: f64 = r.required_t("params.f0")?;
    if !f0.is_finite() {
        bail!("params.f0 must be finite, got {f0}");
    }

    let scheme: Scheme = match r.take("stepper.scheme") {
        Some(raw) => raw.parse().map_err(|e| anyhow!("stepper.scheme: {e}"))?,
        None => Scheme::ImexCnAb2,
    };
    let dt = positive("stepper.dt", r.required_t("stepper.dt")?)?;
    let t_end: f64 = r.required_t("stepper.t_end")?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        bail!("stepper.t_end must be >= 0, got {t_end}");
    }
    let cfl_target = match r.take("stepper.cfl_target") {
        Some(raw) => {
            let v: f64 = raw.parse().map_err(|_| anyhow!("stepper.cfl_target: cannot parse `{raw}`"))?;
            if !(v > 0.0 && v < 1.0) {
                bail!("stepper.cfl_target must lie in (0,1), got {v}");
            }
            Some(v)
        }
        None => None,
    };
    let max_steps: usize = r.optional_t("stepper.max_steps", 10_000_000)?;

    let ic = match r.take("ic.profile").as_deref().unwrap_or("zero") {
        "zero" => IcSpec::Zero,
        "taylor" => IcSpec::Taylor {
            amplitude: r.optional_t("ic.amplitude", 0.1)?,
            temp_amplitude: r.optional_t("ic.temp_amplitude", 0.1)?,
            kx: r.optional_t("ic.kx", 1u32)?,
            ky: r.optional_t("ic.ky", 1u32)?,
            m: r.optional_t("ic.m", 1u32)?,
        },
        "single-mode-T" => IcSpec::SingleModeT {
            temp_amplitude: r.optional_t("ic.temp_amplitude", 0.1)?,
            m: r.optional_t("ic.m", 1u32)?,
        },
        "random" => IcSpec::Random {
            amplitude: r.optional_t("ic.amplitude", 0.1)?,
            temp_amplitude: r.optional_t("ic.temp_amplitude", 0.1)?,
            band: r.optional_t("ic.band", 4u32)?,
        },
        "snapshot" => IcSpec::Snapshot { path: r.required("ic.path")? },
        other => bail!("ic.profile: unknown profile `{other}`"),
    };

    let q = match r.take("q.profile").as_deref().unwrap_or("zero") {
        "zero" => QSpec::Zero,
        "warmpool" => QSpec::WarmPool {
            amplitude: r.optional_t("q.amplitude", 0.1)?,
            kx: r.optional_t("q.kx", 1u32)?,
            ky: r.optional_t("q.ky", 1u32)?,
            m: r.optional_t("q.m", 1u32)?,
        },
        other => bail!("q.profile: unknown profile `{other}`"),
    };

    let cadence: usize = r.optional_t("monitor.cadence", 1)?;
    if cadence == 0 {
        bail!("monitor.cadence must be >= 1, got 0");
    }
    let certificate_c = positive("certificate.C", r.optional_t("certificate.C", 1.0)?)?;
    let out_dir: String = r.take("output.dir").unwrap_or_else(|| "out".to_string());
    let write_final_snapshot: bool = r.optional_t("output.snapshot", true)?;
    let seed: u64 = r.optional_t("rng.seed", 0u64)?;

    let lab = LabKeys {
        samples: r.optional_t("lab.samples", 100usize)?,
        band_limit: r.optional_t("lab.band_limit", 6usize)?,
        decay: r.optional_t("lab.decay", 2.0)?,
        rough_decay: r.optional_t("lab.rough_decay", 1.0)?,
        nx: r.optional_t("lab.nx", 16usize)?,
        nz: r.optional_t("lab.nz", 16usize)?,
    };

    if let Some((key, (line, _))) = r.entries.iter().next() {
        bail!("line {line}: unknown key `{key}`");
    }

    Ok(RunConfig {
        grid,
        r1,
        r2,
        r3,
        f0,
        scheme,
        dt,
        t_end,
        cfl_target,
        max_steps,
        ic,
        q,
        cadence,
        certificate_c,
        out_dir,
        write_final_snapshot,
        seed,
        lab,
    })
}

impl RunConfig {
    /// Canonical echo of the effective configuration (defaults made
    /// explicit); re-parsing it reproduces the run.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("grid.nx", self.grid.nx.to_string());
        kv("grid.ny", self.grid.ny.to_string());
        kv("grid.nz", self.grid.nz.to_string());
        kv("grid.h", format!("{}", self.grid.h));
        kv("grid.dealias", self.grid.dealias.to_string());
        kv("params.R1", format!("{}", self.r1));
        kv("params.R2", format!("{}", self.r2));
        kv("params.R3", format!("{}", self.r3));
        kv("params.f0", format!("{}", self.f0));
        kv("stepper.scheme", self.scheme.to_string());
        kv("stepper.dt", format!("{}", self.dt));
        kv("stepper.t_end", format!("{}", self.t_end));
        if let Some(c) = self.cfl_target {
            kv("stepper.cfl_target", format!("{c}"));
        }
        kv("stepper.max_steps", self.max_steps.to_string());
        match &self.ic {
            IcSpec::Zero => kv("ic.profile", "zero".into()),
            IcSpec::Taylor { amplitude, temp_amplitude, kx, ky, m } => {
                kv("ic.profile", "taylor".into());
                kv("ic.amplitude", format!("{amplitude}"));
                kv("ic.temp_amplitude", format!("{temp_amplitude}"));
                kv("ic.kx", kx.to_string());
                kv("ic.ky", ky.to_string());
                kv("ic.m", m.to_string());
            }
            IcSpec::SingleModeT { temp_amplitude, m } => {
                kv("ic.profile", "single-mode-T".into());
                kv("ic.temp_amplitude", format!("{temp_amplitude}"));
                kv("ic.m", m.to_string());
            }
            IcSpec::Random { amplitude, temp_amplitude, band } => {
                kv("ic.profile", "random".into());
                kv("ic.amplitude", format!("{amplitude}"));
                kv("ic.temp_amplitude", format!("{temp_amplitude}"));
                kv("ic.band", band.to_string());
            }
            IcSpec::Snapshot { path } => {
                kv("ic.profile", "snapshot".into());
                kv("ic.path", path.clone());
            }
        }
        match &self.q {
            QSpec::Zero => kv("q.profile", "zero".into()),
            QSpec::WarmPool { amplitude, kx, ky, m } => {
                kv("q.profile", "warmpool".into());
                kv("q.amplitude", format!("{amplitude}"));
                kv("q.kx", kx.to_string());
                kv("q.ky", ky.to_string());
                kv("q.m", m.to_string());
            }
        }
        kv("monitor.cadence", self.cadence.to_string());
        kv("certificate.C", format!("{}", self.certificate_c));
        kv("output.dir", self.out_dir.clone());
        kv("output.snapshot", self.write_final_snapshot.to_string());
        kv("rng.seed", self.seed.to_string());
        kv("lab.samples", self.lab.samples.to_string());
        kv("lab.band_limit", self.lab.band_limit.to_string());
        kv("lab.decay", format!("{}", self.lab.decay));
        kv("lab.rough_decay", format!("{}", self.lab.rough_decay));
        kv("lab.nx", self.lab.nx.to_string());
        kv("lab.nz", self.lab.nz.to_string());
        s
    }
}
