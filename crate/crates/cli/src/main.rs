//! `holocal` — generate binary-phase holograms, simulate their replay
//! fields, calibrate the projection gamma from a captured ramp, and apply
//! the resulting correction to images.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::GlobalArgs;

/// Exit codes: 0 success, 1 input or validation failure, 2 unwritable
/// output, 3 fiducial not found, 4 degenerate curve, 5 profile error.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<holocal_core::Error> for CliError {
    fn from(err: holocal_core::Error) -> Self {
        use holocal_core::Error;
        let code = match &err {
            Error::FiducialNotFound(_) => 3,
            Error::DegenerateCurve(_) => 4,
            Error::Profile(_) => 5,
            _ => 1,
        };
        CliError { code, message: err.to_string() }
    }
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

#[derive(Parser)]
#[command(
    name = "holocal",
    version,
    about = "Binary-phase Fourier holography with display gamma calibration"
)]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the calibration stimulus: a linear grey ramp with a fiducial strip
    Ramp {
        /// Image width in pixels (fiducial column + ramp columns)
        width: usize,
        /// Image height in pixels
        height: usize,
        /// Output image path (.pgm or .png)
        out: PathBuf,
    },
    /// Generate OSPR holograms for a target and write the simulated replay
    Simulate {
        /// Target image path
        target: PathBuf,
        /// Output replay image path; a JSON manifest is written next to it
        out: PathBuf,
        /// Also write each binary subframe hologram into this directory
        #[arg(long, value_name = "DIR")]
        dump_subframes: Option<PathBuf>,
    },
    /// Measure the gamma response of a captured ramp and build a correction profile
    Calibrate {
        /// Captured ramp image
        capture: PathBuf,
        /// Output profile JSON path
        profile: PathBuf,
        /// Output CSV for the measured response (default: <profile>.response.csv)
        #[arg(long, value_name = "PATH")]
        response_csv: Option<PathBuf>,
        /// Output CSV for the correction curve (default: <profile>.correction.csv)
        #[arg(long, value_name = "PATH")]
        correction_csv: Option<PathBuf>,
        /// Contrast factor the fiducial column must exceed over the roi mean
        #[arg(long, default_value_t = holocal_core::calibration::DEFAULT_FIDUCIAL_FACTOR)]
        fiducial_factor: f64,
        /// Free-text source label stored in the profile (default: capture path)
        #[arg(long)]
        source: Option<String>,
        /// ISO-8601 timestamp stored in the profile (default: now; pass a
        /// fixed value for reproducible output files)
        #[arg(long)]
        created: Option<String>,
    },
    /// Apply a calibration profile's correction curve to an image
    Correct {
        /// Input image
        image: PathBuf,
        /// Calibration profile JSON
        profile: PathBuf,
        /// Output image path
        out: PathBuf,
    },
    /// Report the MSE between two images as JSON on stdout
    Evaluate {
        a: PathBuf,
        b: PathBuf,
        /// Baseline MSE; adds normalized error (100 * mse / baseline) to the report
        #[arg(long, value_name = "MSE")]
        before: Option<f64>,
    },
    /// Closed loop on a simulated distorted system: project a ramp,
    /// calibrate, correct, re-project, and report before/after metrics
    Pipeline {
        /// Optional test image corrected and evaluated with the fresh profile
        #[arg(long)]
        target: Option<PathBuf>,
        /// Directory for intermediate artifacts (images, profile, CSVs, summary)
        #[arg(long)]
        outdir: Option<PathBuf>,
        /// Contrast factor for fiducial detection
        #[arg(long, default_value_t = holocal_core::calibration::DEFAULT_FIDUCIAL_FACTOR)]
        fiducial_factor: f64,
        /// ISO-8601 timestamp stored in the emitted profile (default: now)
        #[arg(long)]
        created: Option<String>,
    },
    /// Render curve CSVs (input,output[,output2...]) as an SVG line chart
    Plot {
        /// Input CSV path
        csv: PathBuf,
        /// Output SVG path
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ramp { width, height, out } => commands::ramp(width, height, &out),
        Command::Simulate { target, out, dump_subframes } => {
            let cfg = config::Resolved::from_args(&cli.globals)?;
            commands::simulate(&cfg, &target, &out, dump_subframes.as_deref())
        }
        Command::Calibrate {
            capture,
            profile,
            response_csv,
            correction_csv,
            fiducial_factor,
            source,
            created,
        } => {
            let cfg = config::Resolved::from_args(&cli.globals)?;
            commands::calibrate(commands::CalibrateSpec {
                cfg: &cfg,
                capture: &capture,
                profile_out: &profile,
                response_csv,
                correction_csv,
                fiducial_factor,
                source,
                created,
            })
        }
        Command::Correct { image, profile, out } => commands::correct(&image, &profile, &out),
        Command::Evaluate { a, b, before } => {
            let cfg = config::Resolved::from_args(&cli.globals)?;
            commands::evaluate(&cfg, &a, &b, before)
        }
        Command::Pipeline { target, outdir, fiducial_factor, created } => {
            let cfg = config::Resolved::from_args(&cli.globals)?;
            commands::pipeline(
                &cfg,
                target.as_deref(),
                outdir.as_deref(),
                fiducial_factor,
                created,
            )
        }
        Command::Plot { csv, out } => commands::plot(&csv, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
