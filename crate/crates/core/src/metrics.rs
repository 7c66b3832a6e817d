//! Mean-squared-error metrics over sequences and images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{GreyImage, Roi};

/// MSE and optional error-vs-baseline report.
///
/// Stored values keep full precision; percentages are rounded only by
/// [`format_percent`] at display time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: f64,
    pub normalized_error_percent: Option<f64>,
    pub n_samples: usize,
}

/// `(1/n) * sum((a_i - b_i)^2)` over two equal-length sequences.
///
/// Not invariant to intensity offsets: callers comparing captures with
/// different exposure must normalize first (`measure_response` already
/// min-max normalizes its samples).
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "mse needs equal non-empty sequences, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// MSE after correction as a percentage of the MSE before: `100 * after / before`.
pub fn normalized_error(mse_after: f64, mse_before: f64) -> Result<f64> {
    if mse_before.is_nan() || mse_before <= 0.0 {
        return Err(Error::Division(format!(
            "baseline mse must be positive, got {}",
            mse_before
        )));
    }
    Ok(100.0 * mse_after / mse_before)
}

/// Per-pixel MSE between two images, optionally restricted to a shared roi.
pub fn image_mse(a: &GreyImage, b: &GreyImage, roi: Option<Roi>) -> Result<MetricReport> {
    let (a, b) = match roi {
        Some(roi) => (a.crop(roi)?, b.crop(roi)?),
        None => (a.clone(), b.clone()),
    };
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Dimension(format!(
            "image dimensions differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let value = mse(a.data(), b.data())?;
    Ok(MetricReport {
        mse: value,
        normalized_error_percent: None,
        n_samples: a.data().len(),
    })
}

/// Formats a percentage rounded half-up to two decimals, e.g. `6.24%`.
pub fn format_percent(percent: f64) -> String {
    // f64::round is half-away-from-zero, i.e. half-up for non-negative input.
    format!("{:.2}%", (percent * 100.0).round() / 100.0)
}
