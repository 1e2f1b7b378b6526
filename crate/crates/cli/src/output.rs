//! Deterministic CSV writers; floats are rendered with 17 significant
//! digits so identical runs produce bitwise-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use pe_core::monitor::TwinReport;
use pe_core::{CertificateReport, FunctionalSample, InitNorms};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// `series.csv`: fixed schema, the sampled functionals plus the
/// maximum-principle margin.
pub fn series_csv(samples: &[FunctionalSample], init: &InitNorms) -> Result<String> {
    let t0_inf = init.get("T0_inf").map_err(|e| anyhow::anyhow!("{e}"))?;
    let q_inf = init.get("Q_inf").map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut out = String::new();
    if let Some(first) = samples.first() {
        let mut header: Vec<&str> = Vec::new();
        for (name, _) in first.values() {
            header.push(name);
            if name == "energy_residual" {
                header.push("maxprin_margin");
            }
        }
        out.push_str(&header.join(","));
        out.push('\n');
    }
    for s in samples {
        let margin = (1.0 + t0_inf + q_inf * s.t) - s.norm_tphys_inf;
        let mut row: Vec<String> = Vec::new();
        for (name, v) in s.values() {
            row.push(fmt_f64(v));
            if name == "energy_residual" {
                row.push(fmt_f64(margin));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// `certificates.csv`: one row per certificate.
pub fn certificates_csv(reports: &[CertificateReport]) -> String {
    let mut out = String::from("name,samples,empirical_C,pass\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.name,
            r.series.len(),
            fmt_f64(r.empirical_c),
            r.pass
        );
    }
    out
}

/// `twin.csv`: distance, accumulated exponent and the Gronwall envelope.
pub fn twin_csv(rep: &TwinReport) -> String {
    let mut out = String::from("t,D,E,envelope\n");
    for r in &rep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.d),
            fmt_f64(r.e),
            fmt_f64(rep.envelope(r.e))
        );
    }
    out
}

/// `inequalities.csv`: empirical constants and resolution drift.
pub fn inequalities_csv(results: &[pe_core::ineq::InequalityResult]) -> String {
    let mut out = String::from("name,samples,empirical_C,drift,constant_free,failures\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            r.samples,
            fmt_f64(r.empirical_c),
            fmt_f64(r.drift),
            r.constant_free,
            r.failures
        );
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| anyhow::anyhow!("cannot write `{}`: {e}", path.display()))
}
