//! Display gamma calibration: ramp stimulus, response measurement, cubic
//! fitting, curve inversion, and per-pixel correction.
//!
//! The calibration loop measures how a projection system maps input grey
//! levels to output intensity, fits a degree-3 polynomial to the measured
//! response, inverts the fit into a monotone lookup table, and applies that
//! table to input images so the end-to-end response becomes linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{GreyImage, Roi, LUMA_WEIGHTS};
use crate::metrics;

/// Profile JSON schema version written by this crate.
pub const PROFILE_VERSION: u32 = 1;

/// Default contrast factor a fiducial column must exceed over the roi mean.
pub const DEFAULT_FIDUCIAL_FACTOR: f64 = 1.5;

/// Relative tolerance below which the fit's triangular factor is treated
/// as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

/// Fraction of roi columns searched for the fiducial marker.
const FIDUCIAL_SEARCH_FRACTION: f64 = 0.10;

/// Column means at or above `1 - SATURATION_EPS` count as saturated.
const SATURATION_EPS: f64 = 1e-6;

/// Measured input-level to output-level mapping on `[0, 1]`.
///
/// Inputs are strictly increasing; all values lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    samples: Vec<(f64, f64)>,
}

impl ResponseCurve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Dimension(format!(
                "response curve needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for &(x, y) in &samples {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::Value(format!(
                    "response sample ({}, {}) outside [0, 1]",
                    x, y
                )));
            }
        }
        if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Value(
                "response input levels must be strictly increasing".into(),
            ));
        }
        Ok(ResponseCurve { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn inputs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn outputs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// MSE of the measured outputs against the linear reference `output = input`.
    pub fn mse_vs_linear(&self) -> f64 {
        let inputs = self.inputs();
        let outputs = self.outputs();
        metrics::mse(&outputs, &inputs).expect("curve has >= 2 samples")
    }

    /// CSV with header `input,output`, one sample per line, `\n` endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input,output\n");
        for &(x, y) in &self.samples {
            out.push_str(&format!("{},{}\n", x, y));
        }
        out
    }
}

/// Cubic polynomial `c0 + c1*x + c2*x^2 + c3*x^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCurve {
    coefficients: [f64; 4],
}

impl PolynomialCurve {
    pub fn new(coefficients: [f64; 4]) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Value("polynomial coefficients must be finite".into()));
        }
        Ok(PolynomialCurve { coefficients })
    }

    /// The identity map `x`.
    pub fn identity() -> Self {
        PolynomialCurve { coefficients: [0.0, 1.0, 0.0, 0.0] }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coefficients;
        ((c3 * x + c2) * x + c1) * x + c0
    }

    /// Euclidean norm of the fit residuals over a response curve.
    pub fn residual_norm(&self, curve: &ResponseCurve) -> f64 {
        curve
            .samples()
            .iter()
            .map(|&(x, y)| {
                let r = self.eval(x) - y;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// CSV with header `c0,c1,c2,c3` and one coefficient row.
    pub fn to_csv(&self) -> String {
        let [c0, c1, c2, c3] = self.coefficients;
        format!("c0,c1,c2,c3\n{},{},{},{}\n", c0, c1, c2, c3)
    }
}

/// Monotone correction table: entry `i` is the corrected level for input
/// `i / (K - 1)`. Entries are non-decreasing with first 0 and last 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionLut {
    entries: Vec<f64>,
}

impl CorrectionLut {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Dimension(format!(
                "lut needs at least 2 entries, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::Value("lut entries must lie in [0, 1]".into()));
        }
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Value("lut entries must be non-decreasing".into()));
        }
        if entries[0] != 0.0 || *entries.last().unwrap() != 1.0 {
            return Err(Error::Value(
                "lut must start at 0 and end at 1 after range normalization".into(),
            ));
        }
        Ok(CorrectionLut { entries })
    }

    pub fn resolution(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Evaluates the table at `v` with linear interpolation between entries.
    pub fn apply(&self, v: f64) -> f64 {
        let k = self.entries.len();
        let pos = v.clamp(0.0, 1.0) * (k - 1) as f64;
        let idx = pos.floor() as usize;
        if idx >= k - 1 {
            return self.entries[k - 1];
        }
        let frac = pos - idx as f64;
        let a = self.entries[idx];
        let b = self.entries[idx + 1];
        (a + (b - a) * frac).clamp(0.0, 1.0)
    }

    /// CSV with header `input,output`, one entry per line.
    pub fn to_csv(&self) -> String {
        let k = self.entries.len();
        let mut out = String::from("input,output\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i as f64 / (k - 1) as f64, e));
        }
        out
    }
}

/// Generates the calibration stimulus: column 0 is the full-brightness
/// fiducial strip, columns `1..width` ramp linearly from 0 to 1.
/// Every row is identical.
pub fn make_ramp(width: usize, height: usize) -> Result<GreyImage> {
    if width < 3 {
        return Err(Error::Dimension(format!(
            "ramp width must be at least 3 (fiducial + 2 ramp columns), got {}",
            width
        )));
    }
    if height < 1 {
        return Err(Error::Dimension("ramp height must be positive".into()));
    }
    GreyImage::from_fn(width, height, |x, _| {
        if x == 0 {
            1.0
        } else {
            (x - 1) as f64 / (width - 2) as f64
        }
    })
}

/// Locates the fiducial strip inside `roi`: the column with maximal mean
/// intensity among the leftmost 10% of roi columns. The ramp region starts
/// at the next column. Returns the roi-relative column index.
///
/// Errors with [`Error::FiducialNotFound`] when the best candidate does not
/// exceed `min_contrast` times the roi mean (default
/// [`DEFAULT_FIDUCIAL_FACTOR`]).
pub fn locate_fiducial(captured: &GreyImage, roi: Roi, min_contrast: f64) -> Result<usize> {
    roi.check_within(captured.width(), captured.height())?;
    if min_contrast.is_nan() || min_contrast <= 0.0 {
        return Err(Error::Config(format!(
            "fiducial contrast factor must be positive, got {}",
            min_contrast
        )));
    }

    let search_cols = ((roi.width as f64 * FIDUCIAL_SEARCH_FRACTION).ceil() as usize)
        .clamp(1, roi.width);
    let mut best_col = 0;
    let mut best_mean = f64::NEG_INFINITY;
    for col in 0..search_cols {
        let mean = captured.roi_column_mean(roi, col);
        if mean > best_mean {
            best_mean = mean;
            best_col = col;
        }
    }

    let roi_sum: f64 = (0..roi.width)
        .map(|col| captured.roi_column_mean(roi, col))
        .sum();
    let roi_mean = roi_sum / roi.width as f64;

    if best_mean > min_contrast * roi_mean {
        Ok(best_col)
    } else {
        Err(Error::FiducialNotFound(format!(
            "brightest candidate column {} (mean {:.4}) does not exceed {} x roi mean {:.4}",
            best_col, best_mean, min_contrast, roi_mean
        )))
    }
}

/// A measured response plus capture-quality diagnostics.
#[derive(Debug, Clone)]
pub struct MeasuredResponse {
    pub curve: ResponseCurve,
    /// Fraction of ramp columns whose raw mean was saturated (>= 1 - 1e-6).
    pub saturated_fraction: f64,
}

/// Measures the system response from a captured ramp: averages each ramp
/// column over its rows, then min-max normalizes the means to `[0, 1]`.
/// Input levels are spaced linearly on `[0, 1]` across the ramp columns.
///
/// `ramp_start` is the roi-relative column where the ramp begins (one past
/// the fiducial); the fiducial column itself is excluded.
pub fn measure_response(
    captured: &GreyImage,
    roi: Roi,
    ramp_start: usize,
) -> Result<MeasuredResponse> {
    roi.check_within(captured.width(), captured.height())?;
    if ramp_start >= roi.width {
        return Err(Error::Bounds(format!(
            "ramp start column {} outside roi width {}",
            ramp_start, roi.width
        )));
    }
    let n = roi.width - ramp_start;
    if n < 2 {
        return Err(Error::Dimension(
            "ramp region must span at least 2 columns".into(),
        ));
    }

    let means: Vec<f64> = (ramp_start..roi.width)
        .map(|col| captured.roi_column_mean(roi, col))
        .collect();
    let saturated = means.iter().filter(|&&m| m >= 1.0 - SATURATION_EPS).count();

    let min = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range < 1e-12 {
        return Err(Error::DegenerateCurve(
            "captured ramp columns have no intensity variation".into(),
        ));
    }

    let samples = means
        .iter()
        .enumerate()
        .map(|(i, &m)| (i as f64 / (n - 1) as f64, (m - min) / range))
        .collect();
    Ok(MeasuredResponse {
        curve: ResponseCurve::new(samples)?,
        saturated_fraction: saturated as f64 / n as f64,
    })
}

/// Least-squares cubic fit of a response curve.
///
/// Solves the `n x 4` Vandermonde system by Householder QR; diagonal
/// entries of the triangular factor below `1e-10` of the largest flag the
/// system as rank deficient.
pub fn fit_response(curve: &ResponseCurve) -> Result<PolynomialCurve> {
    if curve.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "cubic fit needs at least 4 samples, got {}",
            curve.len()
        )));
    }
    let coefficients = householder_lsq(&curve.inputs(), &curve.outputs())?;
    PolynomialCurve::new(coefficients)
}

fn householder_lsq(xs: &[f64], ys: &[f64]) -> Result<[f64; 4]> {
    const M: usize = 4;
    let n = xs.len();
    let mut a = vec![0.0f64; n * M];
    for (i, &x) in xs.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..M {
            a[i * M + j] = p;
            p *= x;
        }
    }
    let mut rhs = ys.to_vec();

    let mut v = vec![0.0f64; n];
    for j in 0..M {
        let sigma = a[j * M + j..]
            .iter()
            .step_by(M)
            .map(|e| e * e)
            .sum::<f64>()
            .sqrt();
        if sigma == 0.0 {
            continue; // column already zero below the diagonal
        }
        let alpha = if a[j * M + j] >= 0.0 { -sigma } else { sigma };
        v[j] = a[j * M + j] - alpha;
        for i in j + 1..n {
            v[i] = a[i * M + j];
        }
        let vtv: f64 = (j..n).map(|i| v[i] * v[i]).sum();
        for k in j..M {
            let dot: f64 = (j..n).map(|i| v[i] * a[i * M + k]).sum();
            let tau = 2.0 * dot / vtv;
            for i in j..n {
                a[i * M + k] -= tau * v[i];
            }
        }
        let dot: f64 = (j..n).map(|i| v[i] * rhs[i]).sum();
        let tau = 2.0 * dot / vtv;
        for i in j..n {
            rhs[i] -= tau * v[i];
        }
    }

    let diag_max = (0..M).map(|j| a[j * M + j].abs()).fold(0.0, f64::max);
    if diag_max == 0.0 || (0..M).any(|j| a[j * M + j].abs() < RANK_TOLERANCE * diag_max) {
        return Err(Error::Conditioning(
            "Vandermonde system is rank deficient; inputs may be too clustered".into(),
        ));
    }

    let mut c = [0.0f64; M];
    for j in (0..M).rev() {
        let mut acc = rhs[j];
        for k in j + 1..M {
            acc -= a[j * M + k] * c[k];
        }
        c[j] = acc / a[j * M + j];
    }
    Ok(c)
}

/// Result of inverting a fitted response into a correction table.
#[derive(Debug, Clone)]
pub struct Inversion {
    pub lut: CorrectionLut,
    /// Fraction of dense samples altered by the monotone projection;
    /// nonzero when the fitted cubic was locally decreasing.
    pub projected_fraction: f64,
}

/// Inverts a fitted response curve into a `resolution`-entry correction LUT.
///
/// The polynomial is sampled densely on `[0, 1]`, clamped to `[0, 1]`, made
/// non-decreasing by a running-maximum projection, and range-normalized.
/// Each LUT entry is then the smallest `x` with `g(x) >= t`, located by
/// binary search over the monotone samples with linear interpolation inside
/// the bracketing cell. The finished table is range-normalized so its first
/// entry is 0 and its last is 1.
pub fn invert_curve(poly: &PolynomialCurve, resolution: usize) -> Result<Inversion> {
    if resolution < 2 {
        return Err(Error::Config(format!(
            "lut resolution must be at least 2, got {}",
            resolution
        )));
    }
    let dense = (4 * resolution).max(4096);

    let xs: Vec<f64> = (0..dense).map(|i| i as f64 / (dense - 1) as f64).collect();
    let mut g: Vec<f64> = xs.iter().map(|&x| poly.eval(x).clamp(0.0, 1.0)).collect();

    let mut projected = 0usize;
    let mut running = g[0];
    for s in g.iter_mut().skip(1) {
        if *s < running {
            *s = running;
            projected += 1;
        } else {
            running = *s;
        }
    }
    let projected_fraction = projected as f64 / dense as f64;

    let (lo, hi) = (g[0], g[dense - 1]);
    if hi - lo < 1e-6 {
        return Err(Error::DegenerateCurve(format!(
            "fitted curve spans only {:.2e} over [0, 1]",
            hi - lo
        )));
    }
    for s in &mut g {
        *s = (*s - lo) / (hi - lo);
    }

    let mut entries = Vec::with_capacity(resolution);
    for i in 0..resolution {
        let t = i as f64 / (resolution - 1) as f64;
        let idx = g.partition_point(|&v| v < t);
        let x = if idx == 0 {
            xs[0]
        } else {
            // g[idx-1] < t <= g[idx], so the cell is strictly increasing.
            let (x0, x1) = (xs[idx - 1], xs[idx]);
            let (g0, g1) = (g[idx - 1], g[idx]);
            x0 + (t - g0) / (g1 - g0) * (x1 - x0)
        };
        entries.push(x);
    }

    let first = entries[0];
    let span = entries[resolution - 1] - first;
    if span <= 0.0 {
        return Err(Error::DegenerateCurve(
            "inverted curve collapsed to a single level".into(),
        ));
    }
    for e in &mut entries {
        *e = ((*e - first) / span).clamp(0.0, 1.0);
    }

    Ok(Inversion {
        lut: CorrectionLut::new(entries)?,
        projected_fraction,
    })
}

/// Applies a correction LUT to every pixel of an image.
pub fn apply_correction(image: &GreyImage, lut: &CorrectionLut) -> GreyImage {
    let data: Vec<f64> = image.data().iter().map(|&v| lut.apply(v)).collect();
    GreyImage::new(image.width(), image.height(), data)
        .expect("lut output stays within [0, 1]")
}

/// The ideal linear response: `n` samples with output equal to input.
pub fn linear_reference(n: usize) -> Result<ResponseCurve> {
    if n < 2 {
        return Err(Error::Dimension(format!(
            "linear reference needs at least 2 samples, got {}",
            n
        )));
    }
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            (t, t)
        })
        .collect();
    ResponseCurve::new(samples)
}

/// Persisted artifact of one calibration session.
#[derive(Debug, Clone)]
pub struct CalibrationProfile {
    pub polynomial: PolynomialCurve,
    pub lut: CorrectionLut,
    /// MSE of the measured (uncorrected) response against the linear reference.
    pub mse_before: f64,
    /// Luma weights in force when captures were converted to grey.
    pub luma_weights: [f64; 3],
    /// ISO-8601 creation timestamp.
    pub created: String,
    /// Free-text description of the capture source.
    pub source: String,
}

#[derive(Serialize, Deserialize)]
struct ProfileJson {
    version: u32,
    coefficients: [f64; 4],
    lut: Vec<f64>,
    lut_resolution: usize,
    mse_before: f64,
    luma_weights: [f64; 3],
    created: String,
    source: String,
}

impl CalibrationProfile {
    pub fn new(
        polynomial: PolynomialCurve,
        lut: CorrectionLut,
        mse_before: f64,
        created: String,
        source: String,
    ) -> Self {
        CalibrationProfile {
            polynomial,
            lut,
            mse_before,
            luma_weights: LUMA_WEIGHTS,
            created,
            source,
        }
    }

    pub fn to_json(&self) -> String {
        let json = ProfileJson {
            version: PROFILE_VERSION,
            coefficients: self.polynomial.coefficients(),
            lut: self.lut.entries().to_vec(),
            lut_resolution: self.lut.resolution(),
            mse_before: self.mse_before,
            luma_weights: self.luma_weights,
            created: self.created.clone(),
            source: self.source.clone(),
        };
        serde_json::to_string_pretty(&json).expect("profile serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: ProfileJson =
            serde_json::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
        if json.version != PROFILE_VERSION {
            return Err(Error::Profile(format!(
                "unsupported profile version {} (expected {})",
                json.version, PROFILE_VERSION
            )));
        }
        if json.lut.len() != json.lut_resolution {
            return Err(Error::Profile(format!(
                "lut length {} does not match lut_resolution {}",
                json.lut.len(),
                json.lut_resolution
            )));
        }
        let polynomial =
            PolynomialCurve::new(json.coefficients).map_err(|e| Error::Profile(e.to_string()))?;
        let lut = CorrectionLut::new(json.lut).map_err(|e| Error::Profile(e.to_string()))?;
        Ok(CalibrationProfile {
            polynomial,
            lut,
            mse_before: json.mse_before,
            luma_weights: json.luma_weights,
            created: json.created,
            source: json.source,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(Error::Io)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_columns(img: &GreyImage) -> Vec<f64> {
        (0..img.width()).map(|x| img.get(x, 0)).collect()
    }

    #[test]
    fn ramp_width_4() {
        let ramp = make_ramp(4, 2).unwrap();
        assert_eq!(ramp_columns(&ramp), vec![1.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn ramp_width_3() {
        let ramp = make_ramp(3, 1).unwrap();
        assert_eq!(ramp_columns(&ramp), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn ramp_fiducial_is_full_brightness() {
        for width in [3usize, 16, 257] {
            let ramp = make_ramp(width, 2).unwrap();
            assert_eq!(ramp.get(0, 0), 1.0);
        }
    }

    #[test]
    fn ramp_rows_identical_and_strictly_increasing() {
        let ramp = make_ramp(64, 8).unwrap();
        for y in 1..8 {
            for x in 0..64 {
                assert_eq!(ramp.get(x, y), ramp.get(x, 0));
            }
        }
        for x in 2..64 {
            assert!(ramp.get(x, 0) > ramp.get(x - 1, 0));
        }
    }

    #[test]
    fn ramp_too_narrow() {
        assert!(matches!(make_ramp(2, 8), Err(Error::Dimension(_))));
    }

    #[test]
    fn fiducial_on_ideal_ramp() {
        let ramp = make_ramp(64, 4).unwrap();
        let roi = Roi::full(64, 4);
        assert_eq!(locate_fiducial(&ramp, roi, DEFAULT_FIDUCIAL_FACTOR).unwrap(), 0);
    }

    #[test]
    fn fiducial_shifted_capture() {
        // Five dark columns, then the fiducial, then the ramp.
        let ramp = make_ramp(95, 4).unwrap();
        let capture = GreyImage::from_fn(100, 4, |x, y| {
            if x < 5 {
                0.0
            } else {
                ramp.get(x - 5, y)
            }
        })
        .unwrap();
        let roi = Roi::full(100, 4);
        assert_eq!(
            locate_fiducial(&capture, roi, DEFAULT_FIDUCIAL_FACTOR).unwrap(),
            5
        );
    }

    #[test]
    fn fiducial_missing_on_uniform_capture() {
        let flat = GreyImage::filled(64, 4, 0.4).unwrap();
        let roi = Roi::full(64, 4);
        assert!(matches!(
            locate_fiducial(&flat, roi, DEFAULT_FIDUCIAL_FACTOR),
            Err(Error::FiducialNotFound(_))
        ));
    }

    #[test]
    fn measure_ideal_ramp_is_identity() {
        let ramp = make_ramp(130, 8).unwrap();
        let roi = Roi::full(130, 8);
        let measured = measure_response(&ramp, roi, 1).unwrap();
        for &(x, y) in measured.curve.samples() {
            assert!((y - x).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_square_law_capture() {
        let width = 130;
        let ramp = make_ramp(width, 4).unwrap();
        let squared = GreyImage::from_fn(width, 4, |x, y| {
            let v = ramp.get(x, y);
            v * v
        })
        .unwrap();
        let measured = measure_response(&squared, Roi::full(width, 4), 1).unwrap();
        for &(x, y) in measured.curve.samples() {
            assert!((y - x * x).abs() < 1e-12, "at {} got {}", x, y);
        }
    }

    #[test]
    fn measure_is_offset_invariant() {
        let width = 66;
        let ramp = make_ramp(width, 4).unwrap();
        // Compress to 60% gain plus 0.2 offset; min-max normalization removes both.
        let offset = GreyImage::from_fn(width, 4, |x, y| 0.2 + 0.6 * ramp.get(x, y)).unwrap();
        let a = measure_response(&ramp, Roi::full(width, 4), 1).unwrap();
        let b = measure_response(&offset, Roi::full(width, 4), 1).unwrap();
        for (sa, sb) in a.curve.samples().iter().zip(b.curve.samples()) {
            assert!((sa.1 - sb.1).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_single_column_is_error() {
        let ramp = make_ramp(16, 4).unwrap();
        assert!(matches!(
            measure_response(&ramp, Roi::full(16, 4), 15),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn measure_flat_capture_is_degenerate() {
        let flat = GreyImage::filled(16, 4, 0.25).unwrap();
        assert!(matches!(
            measure_response(&flat, Roi::full(16, 4), 1),
            Err(Error::DegenerateCurve(_))
        ));
    }

    #[test]
    fn measure_reports_saturation() {
        let img = GreyImage::from_fn(10, 2, |x, _| if x >= 5 { 1.0 } else { x as f64 / 10.0 })
            .unwrap();
        let measured = measure_response(&img, Roi::full(10, 2), 0).unwrap();
        assert!((measured.saturated_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_known_cubic() {
        let truth = [0.2, 0.3, -0.1, 0.6];
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = i as f64 / 49.0;
                let y = truth[0] + truth[1] * x + truth[2] * x * x + truth[3] * x * x * x;
                (x, y)
            })
            .collect();
        let curve = ResponseCurve::new(samples).unwrap();
        let poly = fit_response(&curve).unwrap();
        for (got, want) in poly.coefficients().iter().zip(truth) {
            assert!((got - want).abs() < 1e-9, "got {} want {}", got, want);
        }
    }

    #[test]
    fn fit_linear_data_is_exact() {
        let curve = linear_reference(20).unwrap();
        let poly = fit_response(&curve).unwrap();
        let c = poly.coefficients();
        assert!(c[0].abs() < 1e-9);
        assert!((c[1] - 1.0).abs() < 1e-9);
        assert!(c[2].abs() < 1e-9);
        assert!(c[3].abs() < 1e-9);
    }

    #[test]
    fn fit_needs_four_samples() {
        let curve =
            ResponseCurve::new(vec![(0.0, 0.0), (0.5, 0.4), (1.0, 1.0)]).unwrap();
        assert!(matches!(fit_response(&curve), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn invert_identity() {
        let inv = invert_curve(&PolynomialCurve::identity(), 256).unwrap();
        let k = inv.lut.resolution();
        for (i, &e) in inv.lut.entries().iter().enumerate() {
            let t = i as f64 / (k - 1) as f64;
            assert!((e - t).abs() <= 1.0 / (2.0 * k as f64));
        }
        assert_eq!(inv.projected_fraction, 0.0);
    }

    #[test]
    fn invert_square_law_gives_sqrt() {
        let poly = PolynomialCurve::new([0.0, 0.0, 1.0, 0.0]).unwrap();
        let inv = invert_curve(&poly, 256).unwrap();
        let k = inv.lut.resolution();
        let bound = 1.0 / (2.0 * k as f64) + 1e-9;
        for (i, &e) in inv.lut.entries().iter().enumerate() {
            let t = i as f64 / (k - 1) as f64;
            assert!(
                (e - t.sqrt()).abs() <= bound,
                "entry {} deviates: {} vs {}",
                i,
                e,
                t.sqrt()
            );
        }
    }

    #[test]
    fn invert_constant_curve_is_degenerate() {
        let poly = PolynomialCurve::new([0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            invert_curve(&poly, 256),
            Err(Error::DegenerateCurve(_))
        ));
    }

    #[test]
    fn invert_reports_projection_on_non_monotone_fit() {
        // 6x^3 - 9x^2 + 4x decreases on (1/3, 2/3).
        let poly = PolynomialCurve::new([0.0, 4.0, -9.0, 6.0]).unwrap();
        let inv = invert_curve(&poly, 64).unwrap();
        assert!(inv.projected_fraction > 0.0);
        let entries = inv.lut.entries();
        assert!(entries.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn apply_identity_lut_preserves_image() {
        let inv = invert_curve(&PolynomialCurve::identity(), 256).unwrap();
        let img = GreyImage::from_fn(16, 4, |x, y| ((x + y) % 16) as f64 / 15.0).unwrap();
        let out = apply_correction(&img, &inv.lut);
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((a - b).abs() <= 1.0 / 256.0);
        }
    }

    #[test]
    fn apply_square_law_lut_on_quarter_grey() {
        let poly = PolynomialCurve::new([0.0, 0.0, 1.0, 0.0]).unwrap();
        let inv = invert_curve(&poly, 256).unwrap();
        let img = GreyImage::filled(2, 2, 0.25).unwrap();
        let out = apply_correction(&img, &inv.lut);
        assert!((out.get(0, 0) - 0.5).abs() < 3e-3);
    }

    #[test]
    fn apply_full_scale_maps_to_one() {
        let poly = PolynomialCurve::new([0.1, 0.2, 0.3, 0.4]).unwrap();
        let inv = invert_curve(&poly, 128).unwrap();
        let img = GreyImage::filled(1, 1, 1.0).unwrap();
        assert_eq!(apply_correction(&img, &inv.lut).get(0, 0), 1.0);
    }

    #[test]
    fn linear_reference_examples() {
        let two = linear_reference(2).unwrap();
        assert_eq!(two.samples(), &[(0.0, 0.0), (1.0, 1.0)]);
        let three = linear_reference(3).unwrap();
        assert_eq!(three.samples(), &[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        assert_eq!(three.mse_vs_linear(), 0.0);
        assert!(matches!(linear_reference(1), Err(Error::Dimension(_))));
    }

    #[test]
    fn profile_json_round_trip() {
        let poly = PolynomialCurve::new([0.01, 0.9, 0.05, 0.04]).unwrap();
        let inv = invert_curve(&poly, 32).unwrap();
        let profile = CalibrationProfile::new(
            poly,
            inv.lut,
            0.0123,
            "2026-01-01T00:00:00Z".into(),
            "unit test".into(),
        );
        let json = profile.to_json();
        let back = CalibrationProfile::from_json(&json).unwrap();
        assert_eq!(back.polynomial, profile.polynomial);
        assert_eq!(back.lut, profile.lut);
        assert_eq!(back.mse_before, profile.mse_before);
        assert_eq!(back.luma_weights, LUMA_WEIGHTS);
        assert_eq!(back.created, profile.created);
    }

    #[test]
    fn profile_rejects_bad_version_and_garbage() {
        let poly = PolynomialCurve::identity();
        let inv = invert_curve(&poly, 16).unwrap();
        let profile =
            CalibrationProfile::new(poly, inv.lut, 0.0, "t".into(), "s".into());
        let json = profile.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            CalibrationProfile::from_json(&json),
            Err(Error::Profile(_))
        ));
        assert!(matches!(
            CalibrationProfile::from_json("{not json"),
            Err(Error::Profile(_))
        ));
    }

    #[test]
    fn response_curve_validation() {
        assert!(matches!(
            ResponseCurve::new(vec![(0.0, 0.0)]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            ResponseCurve::new(vec![(0.0, 0.0), (0.0, 1.0)]),
            Err(Error::Value(_))
        ));
        assert!(matches!(
            ResponseCurve::new(vec![(0.0, 0.0), (0.5, 1.2)]),
            Err(Error::Value(_))
        ));
    }

    #[test]
    fn curve_csv_format() {
        let curve = ResponseCurve::new(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
        assert_eq!(curve.to_csv(), "input,output\n0,0\n1,0.5\n");
        let poly = PolynomialCurve::new([0.25, 1.0, 0.0, -0.5]).unwrap();
        assert_eq!(poly.to_csv(), "c0,c1,c2,c3\n0.25,1,0,-0.5\n");
    }
}
