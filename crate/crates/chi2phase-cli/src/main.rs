//! Batch CLI: parameter sweeps and Wigner-field exports for the pulsed
//! chi^(2) up-conversion experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy
//! (every sweep point flagged).

mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chi2phase::scenario::{
    eval_point, fock_wigner_bundle, run_sweep, two_mode_wigner_bundle, Experiment, PointFlag,
    Setup, WignerBundle,
};
use chi2phase::units::thz_to_angular;

use config::Config;

#[derive(Parser)]
#[command(
    name = "chi2phase",
    about = "Phase-space sweeps of pulsed chi^(2) up-conversion",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured (omega_out, alpha) sweep and write the result table.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (default: config output_dir or "out").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Emit input/output Wigner fields at one parameter point.
    Wigner {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Parameter point "omega_thz,alpha", e.g. "200,1.4e6".
        #[arg(long)]
        point: String,
    },
    /// Parse and validate a configuration, printing the resolved values.
    ValidateConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the built-in property suite.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, Box<dyn std::error::Error>> {
    match path {
        Some(p) => Ok(Config::load(p)?),
        None => Ok(Config::default()),
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::ValidateConfig { config } => {
            let config = load_config(&config)?;
            println!("{}", config.to_toml());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { threads } => {
            init_threads(threads);
            if selftest::run() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Sweep {
            config,
            out,
            threads,
        } => {
            init_threads(threads);
            let config = load_config(&config)?;
            let out_dir = resolve_out_dir(out, &config)?;
            let grid = config.sweep_grid()?;
            let experiment = config.experiment();
            let setup = Setup::compile(config.setup_params(), config.n_inputs())?;
            warn_on_truncation(&setup);
            let records = run_sweep(&setup, experiment, &grid)?;
            let name = match experiment {
                Experiment::FockSingleMode { .. } => "sweep_fock_single_mode.csv",
                Experiment::TwoModeSqueezed { .. } => "sweep_two_mode_squeezed.csv",
            };
            let path = out_dir.join(name);
            output::write_sweep_csv(&path, &config, experiment, &records)?;
            let flagged = records.iter().filter(|r| r.flag != PointFlag::Ok).count();
            println!(
                "wrote {} ({} points, {} flagged)",
                path.display(),
                records.len(),
                flagged
            );
            if flagged == records.len() {
                eprintln!("all sweep points are degenerate");
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Wigner {
            config,
            out,
            threads,
            point,
        } => {
            init_threads(threads);
            let config = load_config(&config)?;
            let out_dir = resolve_out_dir(out, &config)?;
            let (omega_thz, alpha) = parse_point(&point)?;
            let experiment = config.experiment();
            let setup = Setup::compile(config.setup_params(), config.n_inputs())?;
            warn_on_truncation(&setup);
            let ctx = setup.output_context(thz_to_angular(omega_thz))?;

            let bundle: WignerBundle = match experiment {
                Experiment::FockSingleMode { n } => fock_wigner_bundle(&setup, &ctx, alpha, n)?,
                Experiment::TwoModeSqueezed { r } => {
                    two_mode_wigner_bundle(&setup, &ctx, alpha, r)?
                }
            };
            for (label, grid) in &bundle.inputs {
                output::write_wigner_pair(&out_dir, &format!("wigner_{label}"), &config, grid)?;
            }
            output::write_wigner_pair(&out_dir, "wigner_output", &config, &bundle.output)?;
            match &bundle.rescaled {
                Some(grid) => {
                    output::write_wigner_pair(&out_dir, "wigner_output_rescaled", &config, grid)?
                }
                None => {
                    if matches!(experiment, Experiment::TwoModeSqueezed { .. }) {
                        eprintln!(
                            "rescaled output skipped: singular core at this parameter point"
                        );
                    }
                }
            }
            // Record the point itself for reproducibility.
            let rec = eval_point(&setup, &ctx, alpha, experiment);
            output::write_sweep_csv(
                &out_dir.join("wigner_point.csv"),
                &config,
                experiment,
                std::slice::from_ref(&rec),
            )?;
            println!("wrote Wigner fields to {}", out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve_out_dir(
    flag: Option<PathBuf>,
    config: &Config,
) -> Result<PathBuf, Box<dyn std::error::Error>> {
    let dir = flag
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn parse_point(text: &str) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let mut parts = text.split(',');
    let omega = parts
        .next()
        .ok_or("expected --point omega_thz,alpha")?
        .trim()
        .parse::<f64>()?;
    let alpha = parts
        .next()
        .ok_or("expected --point omega_thz,alpha")?
        .trim()
        .parse::<f64>()?;
    if parts.next().is_some() {
        return Err("expected exactly two comma-separated values".into());
    }
    Ok((omega, alpha))
}

fn warn_on_truncation(setup: &Setup) {
    let p = &setup.params;
    if chi2phase::spectral::gaussian_is_truncated(p.input_center, p.input_width, &setup.grid) {
        eprintln!("warning: input mode is truncated by the grid edges");
    }
}
