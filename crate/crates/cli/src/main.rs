use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use darkfield::io::config::{parse_angle, parse_length};
use darkfield::io::runner::{
    describe_presets, selftest, PresetParameters, RunReport, SELFTEST_TOLERANCE,
};
use darkfield::io::{psf, run, RunOptions};
use darkfield::Error;

/// Bright-field and dark-field imaging through aberrated LSI systems.
#[derive(Parser)]
#[command(name = "darkfield", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation config and write its image (and field dump)
    Simulate {
        config: PathBuf,
        /// Directory for relative output paths (default: current directory)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write the Green function of the config's aberration set
    Psf {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the preset coefficient formulas
    Presets {
        #[arg(long, default_value = "632.8nm", value_parser = length)]
        wavelength: f64,
        #[arg(long, default_value = "10mm", value_parser = length, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value = "3um", value_parser = length)]
        tilt: f64,
        #[arg(long, default_value = "0.5pi", value_parser = angle, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value = "5mm", value_parser = length, allow_hyphen_values = true)]
        cs: f64,
    },
    /// Compare FFT propagation with the direct-DFT oracle
    Selftest {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
    },
}

fn length(s: &str) -> Result<f64, String> {
    parse_length(s).map_err(|e| e.to_string())
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn print_report(report: &RunReport) {
    println!("{}", report.diagnostics);
    println!("wrote {}", report.intensity_path.display());
    if let Some(p) = &report.field_path {
        println!("wrote {}", p.display());
    }
}

/// `Ok(false)` means the selftest ran but found a mismatch.
fn execute(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Simulate { config, out_dir } => {
            print_report(&run(
                &config,
                &RunOptions {
                    output_dir: out_dir,
                },
            )?);
        }
        Command::Psf { config, out_dir } => {
            print_report(&psf(
                &config,
                &RunOptions {
                    output_dir: out_dir,
                },
            )?);
        }
        Command::Presets {
            wavelength,
            z,
            tilt,
            alpha,
            cs,
        } => {
            let p = PresetParameters {
                wavelength,
                defocus: z,
                tilt_amplitude: tilt,
                tilt_angle: alpha,
                spherical: cs,
            };
            println!(
                "{}",
                describe_presets(&p).map_err(|e| Error::Config(e.to_string()))?
            );
        }
        Command::Selftest { seeds } => {
            let cases = selftest(seeds, &[8, 16])?;
            let mut failed = 0;
            for c in &cases {
                let ok = c.max_abs_diff < SELFTEST_TOLERANCE;
                failed += usize::from(!ok);
                println!(
                    "{} {:>2}x{:<2} {:<9} seeds={} max|fast-direct|={:.3e}",
                    if ok { "PASS" } else { "FAIL" },
                    c.grid,
                    c.grid,
                    c.preset,
                    c.seeds,
                    c.max_abs_diff
                );
            }
            if failed > 0 {
                eprintln!("{failed} selftest case(s) exceeded {SELFTEST_TOLERANCE:e}");
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
