//! End-to-end composition: simulated projection with an injected
//! non-linearity, closed-loop calibration over a ramp, and before/after
//! evaluation of corrected test images.
//!
//! A pure numerical replay has no gamma of its own, so the simulator
//! applies a configurable pointwise transfer curve to the replay intensity
//! to stand in for the hardware response. Captures are deterministic for a
//! fixed seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::calibration::{
    apply_correction, fit_response, invert_curve, locate_fiducial, make_ramp, measure_response,
    CalibrationProfile, CorrectionLut, PolynomialCurve, ResponseCurve,
};
use crate::error::{Error, Result};
use crate::imaging::{GreyImage, Roi};
use crate::metrics::{image_mse, normalized_error};
use crate::ospr::{ospr_frame, splitmix64, OsprConfig, TargetPlacement};

/// Salt separating the noise RNG stream from the subframe seed stream.
const NOISE_STREAM_SALT: u64 = 0xA5A5_5A5A_D00D_FEED;

/// A simulated projection system: OSPR replay followed by a pointwise
/// intensity distortion and optional additive Gaussian noise.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub ospr: OsprConfig,
    /// Transfer curve applied to normalized replay intensity (the injected
    /// "hardware" gamma); identity leaves the replay untouched.
    pub distortion: PolynomialCurve,
    /// Standard deviation of additive Gaussian intensity noise.
    pub noise_sigma: f64,
}

impl SystemModel {
    pub fn validate(&self) -> Result<()> {
        self.ospr.validate()?;
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::Config(format!(
                "noise sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// A simulated camera capture of one projected frame.
#[derive(Debug, Clone)]
pub struct Capture {
    /// Full replay plane after distortion and noise, in `[0, 1]`.
    pub image: GreyImage,
    /// Region of the plane holding the target (excludes the conjugate twin).
    pub target_region: Roi,
    /// The binary holograms that produced the frame.
    pub subframes: Vec<crate::ospr::BinaryHologram>,
}

/// Projects `target` through the simulated system and captures the replay.
///
/// `capture_index` selects an independent noise stream so repeated captures
/// of one scene see fresh noise while remaining reproducible.
pub fn capture_replay(
    target: &GreyImage,
    system: &SystemModel,
    capture_index: u64,
) -> Result<Capture> {
    system.validate()?;
    let frame = ospr_frame(target, &system.ospr)?;
    let (w, h) = (frame.averaged_replay.width(), frame.averaged_replay.height());

    let mut data: Vec<f64> = frame
        .averaged_replay
        .data()
        .iter()
        .map(|&v| system.distortion.eval(v).clamp(0.0, 1.0))
        .collect();

    if system.noise_sigma > 0.0 {
        let seed = splitmix64(system.ospr.seed ^ NOISE_STREAM_SALT, capture_index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, system.noise_sigma)
            .map_err(|e| Error::Config(format!("noise model: {}", e)))?;
        for v in &mut data {
            *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }

    Ok(Capture {
        image: GreyImage::new(w, h, data)?,
        target_region: frame.target_region,
        subframes: frame.subframes,
    })
}

/// Closed-loop calibration parameters.
#[derive(Debug, Clone)]
pub struct ClosedLoopConfig {
    /// Hologram plane width in pixels.
    pub width: usize,
    /// Hologram plane height in pixels.
    pub height: usize,
    pub system: SystemModel,
    pub lut_resolution: usize,
    /// Contrast factor for fiducial detection.
    pub fiducial_factor: f64,
    /// ISO-8601 timestamp recorded in the emitted profile.
    pub created: String,
    /// Free-text source label recorded in the emitted profile.
    pub source: String,
}

/// Metrics of one closed calibration loop.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedLoopSummary {
    pub mse_before: f64,
    pub mse_after: f64,
    pub normalized_error_percent: f64,
    pub fit_residual: f64,
    pub projected_fraction: f64,
    pub saturated_fraction: f64,
    pub n_samples: usize,
}

/// Everything produced by one closed loop, for persistence and inspection.
#[derive(Debug, Clone)]
pub struct ClosedLoopOutcome {
    pub summary: ClosedLoopSummary,
    pub profile: CalibrationProfile,
    pub ramp: GreyImage,
    pub corrected_ramp: GreyImage,
    /// Captured replay of the uncorrected ramp, cropped to the target region.
    pub capture_before: GreyImage,
    /// Captured replay of the corrected ramp, cropped to the target region.
    pub capture_after: GreyImage,
    pub response_before: ResponseCurve,
    pub response_after: ResponseCurve,
}

/// Runs the full calibration experiment on the simulated system:
/// project a ramp, measure the gamma response, fit and invert it, correct
/// the ramp, re-project, and compare both responses to the linear
/// reference.
pub fn run_closed_loop(config: &ClosedLoopConfig) -> Result<ClosedLoopOutcome> {
    let (tw, th) = target_dims(config.width, config.height, config.system.ospr.placement)?;
    let ramp = make_ramp(tw, th)?;

    let before = capture_replay(&ramp, &config.system, 0)?;
    let capture_before = before.image.crop(before.target_region)?;
    let roi = Roi::full(capture_before.width(), capture_before.height());
    let fiducial = locate_fiducial(&capture_before, roi, config.fiducial_factor)?;
    let measured = measure_response(&capture_before, roi, fiducial + 1)?;
    let mse_before = measured.curve.mse_vs_linear();

    let poly = fit_response(&measured.curve)?;
    let fit_residual = poly.residual_norm(&measured.curve);
    let inversion = invert_curve(&poly, config.lut_resolution)?;
    let profile = CalibrationProfile::new(
        poly,
        inversion.lut.clone(),
        mse_before,
        config.created.clone(),
        config.source.clone(),
    );

    let corrected_ramp = apply_correction(&ramp, &inversion.lut);
    let after = capture_replay(&corrected_ramp, &config.system, 1)?;
    let capture_after = after.image.crop(after.target_region)?;
    let fiducial_after = locate_fiducial(&capture_after, roi, config.fiducial_factor)?;
    let measured_after = measure_response(&capture_after, roi, fiducial_after + 1)?;
    let mse_after = measured_after.curve.mse_vs_linear();

    let summary = ClosedLoopSummary {
        mse_before,
        mse_after,
        normalized_error_percent: normalized_error(mse_after, mse_before)?,
        fit_residual,
        projected_fraction: inversion.projected_fraction,
        saturated_fraction: measured.saturated_fraction,
        n_samples: measured.curve.len(),
    };
    Ok(ClosedLoopOutcome {
        summary,
        profile,
        ramp,
        corrected_ramp,
        capture_before,
        capture_after,
        response_before: measured.curve,
        response_after: measured_after.curve,
    })
}

/// Before/after replay fidelity of one corrected test image.
#[derive(Debug, Clone, Serialize)]
pub struct TargetCorrectionSummary {
    pub mse_before: f64,
    pub mse_after: f64,
    pub normalized_error_percent: f64,
}

/// Projects a test image uncorrected and corrected, and reports the replay
/// MSE against the original target in both cases.
pub fn evaluate_target_correction(
    target: &GreyImage,
    system: &SystemModel,
    lut: &CorrectionLut,
) -> Result<TargetCorrectionSummary> {
    let before = capture_replay(target, system, 2)?;
    let mse_before = image_mse(&before.image.crop(before.target_region)?, target, None)?.mse;

    let corrected = apply_correction(target, lut);
    let after = capture_replay(&corrected, system, 3)?;
    let mse_after = image_mse(&after.image.crop(after.target_region)?, target, None)?.mse;

    Ok(TargetCorrectionSummary {
        mse_before,
        mse_after,
        normalized_error_percent: normalized_error(mse_after, mse_before)?,
    })
}

/// Target dimensions that embed into a `width x height` hologram plane.
pub fn target_dims(
    width: usize,
    height: usize,
    placement: TargetPlacement,
) -> Result<(usize, usize)> {
    match placement {
        TargetPlacement::FullPlane => Ok((width, height)),
        TargetPlacement::HalfPlane => {
            if !height.is_multiple_of(2) {
                return Err(Error::Dimension(format!(
                    "half-plane placement needs an even plane height, got {}",
                    height
                )));
            }
            Ok((width, height / 2))
        }
    }
}
