//! Result-table and Wigner-field writers. Every text file starts with the
//! fully resolved configuration as a commented header block so runs can be
//! reproduced from their outputs alone.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chi2phase::chi2::Regime;
use chi2phase::phasespace::WignerGrid;
use chi2phase::scenario::{Experiment, SweepRecord};
use chi2phase::units::angular_to_thz;

use crate::config::Config;

fn config_header<W: Write>(mut w: W, config: &Config) -> std::io::Result<()> {
    writeln!(w, "# resolved configuration:")?;
    for line in config.to_toml().lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:e}")
    }
}

fn regime_str(r: Option<Regime>) -> String {
    match r {
        Some(r) => r.to_string(),
        None => "nan".to_string(),
    }
}

/// Write the sweep table. Column sets differ per experiment; the row count
/// always equals the grid size, with degenerate points flagged in place.
pub fn write_sweep_csv(
    path: &Path,
    config: &Config,
    experiment: Experiment,
    records: &[SweepRecord],
) -> std::io::Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    config_header(&mut w, config)?;
    match experiment {
        Experiment::FockSingleMode { .. } => {
            writeln!(
                w,
                "omega_out_thz,alpha,flag,theta_k,theta_j,theta,regime,a11,a22,sigma_x,sigma_p,covb11,covb22,nu_min"
            )?;
            for r in records {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt(angular_to_thz(r.omega_out)),
                    fmt(r.alpha),
                    r.flag,
                    fmt(r.theta_k),
                    fmt(r.theta_j),
                    fmt(r.theta),
                    regime_str(r.regime),
                    fmt(r.a11),
                    fmt(r.a22),
                    fmt(r.sigma_x),
                    fmt(r.sigma_p),
                    fmt(r.covb11),
                    fmt(r.covb22),
                    fmt(r.nu_min),
                )?;
            }
        }
        Experiment::TwoModeSqueezed { .. } => {
            writeln!(
                w,
                "omega_out_thz,alpha,flag,theta_k,theta_j,theta,regime,core11,core22,covb11,covb22,\
                 sr11,sr12,sr13,sr14,sr31,sr32,sr33,sr34,entropy_in_s,entropy_out,entropy_rescaled,nu_min"
            )?;
            for r in records {
                let sr = r.s_r.unwrap_or([f64::NAN; 8]);
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt(angular_to_thz(r.omega_out)),
                    fmt(r.alpha),
                    r.flag,
                    fmt(r.theta_k),
                    fmt(r.theta_j),
                    fmt(r.theta),
                    regime_str(r.regime),
                    fmt(r.a11),
                    fmt(r.a22),
                    fmt(r.covb11),
                    fmt(r.covb22),
                    fmt(sr[0]),
                    fmt(sr[1]),
                    fmt(sr[2]),
                    fmt(sr[3]),
                    fmt(sr[4]),
                    fmt(sr[5]),
                    fmt(sr[6]),
                    fmt(sr[7]),
                    fmt(r.entropy_in_s),
                    fmt(r.entropy_out),
                    fmt(r.entropy_rescaled),
                    fmt(r.nu_min),
                )?;
            }
        }
    }
    w.flush()
}

/// Write one Wigner field as CSV (with config header) and as the compact
/// binary layout.
pub fn write_wigner_pair(
    dir: &Path,
    stem: &str,
    config: &Config,
    grid: &WignerGrid,
) -> std::io::Result<()> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let file = File::create(&csv_path)?;
    let mut w = BufWriter::new(file);
    config_header(&mut w, config)?;
    grid.write_csv(&mut w)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    w.flush()?;

    let bin_path = dir.join(format!("{stem}.bin"));
    let file = File::create(&bin_path)?;
    let mut w = BufWriter::new(file);
    grid.write_binary(&mut w)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    w.flush()
}
