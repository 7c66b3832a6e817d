use std::path::{Path, PathBuf};

use serde::Serialize;

use holocal_core::calibration::{
    apply_correction, fit_response, invert_curve, locate_fiducial, make_ramp, measure_response,
    CalibrationProfile,
};
use holocal_core::imaging::{GreyImage, Roi};
use holocal_core::io;
use holocal_core::metrics::{format_percent, image_mse, normalized_error};
use holocal_core::ospr::{OsprConfig, TargetPlacement};
use holocal_core::pipeline::{
    capture_replay, evaluate_target_correction, run_closed_loop, ClosedLoopConfig, SystemModel,
};

use crate::config::Resolved;
use crate::plot as plotting;
use crate::CliError;

/// Fraction of saturated ramp columns above which a warning is printed.
const SATURATION_WARN_FRACTION: f64 = 0.2;

/// Maps an output-side failure to exit code 2.
fn write_failed(err: impl std::fmt::Display) -> CliError {
    CliError { code: 2, message: err.to_string() }
}

fn write_grey(path: &Path, image: &GreyImage) -> Result<(), CliError> {
    io::save_grey(path, image).map_err(write_failed)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| write_failed(format!("{}: {}", path.display(), e)))
}

fn timestamp_or_now(created: Option<String>) -> String {
    created.unwrap_or_else(|| {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    })
}

fn placement_name(placement: TargetPlacement) -> &'static str {
    match placement {
        TargetPlacement::HalfPlane => "half-plane",
        TargetPlacement::FullPlane => "full-plane",
    }
}

fn system_model(cfg: &Resolved) -> SystemModel {
    SystemModel {
        ospr: OsprConfig {
            subframes: cfg.subframes,
            seed: cfg.seed,
            placement: cfg.placement,
        },
        distortion: cfg.distortion,
        noise_sigma: cfg.noise_sigma,
    }
}

pub fn ramp(width: usize, height: usize, out: &Path) -> Result<(), CliError> {
    let image = make_ramp(width, height)?;
    write_grey(out, &image)
}

#[derive(Serialize)]
struct SimulateManifest<'a> {
    version: u32,
    seed: u64,
    subframes: u32,
    placement: &'a str,
    width: usize,
    height: usize,
    noise_sigma: f64,
    /// Injected transfer curve; [0, 1, 0, 0] means none.
    distortion: [f64; 4],
}

#[derive(Serialize)]
struct SubframeManifest<'a> {
    seed: u64,
    subframes: u32,
    placement: &'a str,
    width: usize,
    height: usize,
    files: Vec<String>,
}

pub fn simulate(
    cfg: &Resolved,
    target_path: &Path,
    out: &Path,
    dump_subframes: Option<&Path>,
) -> Result<(), CliError> {
    let target = io::load_grey(target_path)?;
    let system = system_model(cfg);
    let capture = capture_replay(&target, &system, 0)?;

    write_grey(out, &capture.image)?;
    let manifest = SimulateManifest {
        version: 1,
        seed: cfg.seed,
        subframes: cfg.subframes,
        placement: placement_name(cfg.placement),
        width: capture.image.width(),
        height: capture.image.height(),
        noise_sigma: cfg.noise_sigma,
        distortion: cfg.distortion.coefficients(),
    };
    let manifest_path = out.with_extension("json");
    write_text(&manifest_path, &to_pretty_json(&manifest))?;

    if let Some(dir) = dump_subframes {
        std::fs::create_dir_all(dir)
            .map_err(|e| write_failed(format!("{}: {}", dir.display(), e)))?;
        let mut files = Vec::new();
        for (k, hologram) in capture.subframes.iter().enumerate() {
            let name = format!("subframe_{:02}.pgm", k);
            write_grey(&dir.join(&name), &hologram.to_grey())?;
            files.push(name);
        }
        let manifest = SubframeManifest {
            seed: cfg.seed,
            subframes: cfg.subframes,
            placement: placement_name(cfg.placement),
            width: capture.image.width(),
            height: capture.image.height(),
            files,
        };
        write_text(&dir.join("manifest.json"), &to_pretty_json(&manifest))?;
    }
    Ok(())
}

pub struct CalibrateSpec<'a> {
    pub cfg: &'a Resolved,
    pub capture: &'a Path,
    pub profile_out: &'a Path,
    pub response_csv: Option<PathBuf>,
    pub correction_csv: Option<PathBuf>,
    pub fiducial_factor: f64,
    pub source: Option<String>,
    pub created: Option<String>,
}

pub fn calibrate(spec: CalibrateSpec<'_>) -> Result<(), CliError> {
    let capture = io::load_grey(spec.capture)?;
    let roi = spec
        .cfg
        .roi
        .unwrap_or_else(|| Roi::full(capture.width(), capture.height()));

    let fiducial = locate_fiducial(&capture, roi, spec.fiducial_factor)?;
    let measured = measure_response(&capture, roi, fiducial + 1)?;
    if measured.saturated_fraction > SATURATION_WARN_FRACTION {
        eprintln!(
            "warning: {} of ramp columns are saturated; consider reducing exposure",
            format_percent(measured.saturated_fraction * 100.0)
        );
    }
    let mse_before = measured.curve.mse_vs_linear();

    let poly = fit_response(&measured.curve)?;
    let residual = poly.residual_norm(&measured.curve);
    let inversion = invert_curve(&poly, spec.cfg.lut_size)?;
    if inversion.projected_fraction > 0.0 {
        eprintln!(
            "warning: fitted response was locally decreasing; monotone projection altered {} of samples",
            format_percent(inversion.projected_fraction * 100.0)
        );
    }

    let profile = CalibrationProfile::new(
        poly,
        inversion.lut,
        mse_before,
        timestamp_or_now(spec.created),
        spec.source
            .unwrap_or_else(|| spec.capture.display().to_string()),
    );
    profile.save(spec.profile_out).map_err(write_failed)?;

    let response_path = spec
        .response_csv
        .unwrap_or_else(|| spec.profile_out.with_extension("response.csv"));
    write_text(&response_path, &measured.curve.to_csv())?;
    let correction_path = spec
        .correction_csv
        .unwrap_or_else(|| spec.profile_out.with_extension("correction.csv"));
    write_text(&correction_path, &profile.lut.to_csv())?;

    println!("mse_before = {}", mse_before);
    println!("fit_residual = {}", residual);
    Ok(())
}

pub fn correct(image_path: &Path, profile_path: &Path, out: &Path) -> Result<(), CliError> {
    let image = io::load_grey(image_path)?;
    let profile = CalibrationProfile::load(profile_path)?;
    let corrected = apply_correction(&image, &profile.lut);
    write_grey(out, &corrected)
}

pub fn evaluate(
    cfg: &Resolved,
    a_path: &Path,
    b_path: &Path,
    before: Option<f64>,
) -> Result<(), CliError> {
    let a = io::load_grey(a_path)?;
    let b = io::load_grey(b_path)?;
    let mut report = image_mse(&a, &b, cfg.roi)?;
    if let Some(baseline) = before {
        let percent = normalized_error(report.mse, baseline)?;
        report.normalized_error_percent = Some(percent);
        eprintln!("normalized error: {}", format_percent(percent));
    }
    println!("{}", to_pretty_json(&report));
    Ok(())
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    width: usize,
    height: usize,
    subframes: u32,
    seed: u64,
    placement: &'a str,
    noise_sigma: f64,
    distortion: [f64; 4],
    lut_resolution: usize,
}

#[derive(Serialize)]
struct PipelineSummary<'a> {
    config: ConfigEcho<'a>,
    ramp: &'a holocal_core::pipeline::ClosedLoopSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    image: Option<holocal_core::pipeline::TargetCorrectionSummary>,
}

pub fn pipeline(
    cfg: &Resolved,
    target: Option<&Path>,
    outdir: Option<&Path>,
    fiducial_factor: f64,
    created: Option<String>,
) -> Result<(), CliError> {
    let system = system_model(cfg);
    let loop_config = ClosedLoopConfig {
        width: cfg.width,
        height: cfg.height,
        system: system.clone(),
        lut_resolution: cfg.lut_size,
        fiducial_factor,
        created: timestamp_or_now(created),
        source: "closed-loop simulation".into(),
    };
    let outcome = run_closed_loop(&loop_config)?;

    let image_summary = match target {
        Some(path) => {
            let target_image = io::load_grey(path)?;
            Some(evaluate_target_correction(
                &target_image,
                &system,
                &outcome.profile.lut,
            )?)
        }
        None => None,
    };

    let summary = PipelineSummary {
        config: ConfigEcho {
            width: cfg.width,
            height: cfg.height,
            subframes: cfg.subframes,
            seed: cfg.seed,
            placement: placement_name(cfg.placement),
            noise_sigma: cfg.noise_sigma,
            distortion: cfg.distortion.coefficients(),
            lut_resolution: cfg.lut_size,
        },
        ramp: &outcome.summary,
        image: image_summary,
    };
    let summary_json = to_pretty_json(&summary);

    eprintln!(
        "ramp response: mse {} -> {} ({})",
        outcome.summary.mse_before,
        outcome.summary.mse_after,
        format_percent(outcome.summary.normalized_error_percent)
    );

    if let Some(dir) = outdir {
        std::fs::create_dir_all(dir)
            .map_err(|e| write_failed(format!("{}: {}", dir.display(), e)))?;
        write_grey(&dir.join("ramp.pgm"), &outcome.ramp)?;
        write_grey(&dir.join("corrected_ramp.pgm"), &outcome.corrected_ramp)?;
        write_grey(&dir.join("capture_before.pgm"), &outcome.capture_before)?;
        write_grey(&dir.join("capture_after.pgm"), &outcome.capture_after)?;
        outcome
            .profile
            .save(dir.join("profile.json"))
            .map_err(write_failed)?;
        write_text(&dir.join("response_before.csv"), &outcome.response_before.to_csv())?;
        write_text(&dir.join("response_after.csv"), &outcome.response_after.to_csv())?;
        write_text(&dir.join("correction.csv"), &outcome.profile.lut.to_csv())?;
        write_text(&dir.join("summary.json"), &summary_json)?;
    }

    println!("{}", summary_json);
    Ok(())
}

pub fn plot(csv_path: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| CliError::input(format!("{}: {}", csv_path.display(), e)))?;
    let chart = plotting::parse_curve_csv(&text).map_err(CliError::input)?;
    write_text(out, &plotting::render_svg(&chart))
}

fn to_pretty_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serialization of plain data cannot fail")
}
