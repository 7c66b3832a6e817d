//! Closed-loop calibration properties on synthetic distorted systems.
//!
//! These tests bypass the hologram engine: the "system" distorts a ramp
//! pointwise by a known transfer curve, which isolates the measure -> fit
//! -> invert -> apply chain.

use holocal_core::calibration::{
    apply_correction, fit_response, invert_curve, linear_reference, make_ramp, measure_response,
    CorrectionLut, PolynomialCurve,
};
use holocal_core::imaging::{GreyImage, Roi};
use proptest::prelude::*;

/// Ramp with 256 ramp columns plus the fiducial strip.
const RAMP_WIDTH: usize = 257;
const RAMP_HEIGHT: usize = 4;
const LUT_SIZE: usize = 256;

/// Applies a transfer curve `g` pointwise, rescaled so outputs span [0, 1].
fn distort(image: &GreyImage, g: impl Fn(f64) -> f64) -> GreyImage {
    let g0 = g(0.0);
    let g1 = g(1.0);
    let data = image
        .data()
        .iter()
        .map(|&v| ((g(v) - g0) / (g1 - g0)).clamp(0.0, 1.0))
        .collect();
    GreyImage::new(image.width(), image.height(), data).unwrap()
}

/// Measures the response of a synthetic system `g`, calibrates it, and
/// returns (mse_before, mse_after) against the linear reference.
fn calibrate_synthetic(g: impl Fn(f64) -> f64 + Copy) -> (f64, f64) {
    let ramp = make_ramp(RAMP_WIDTH, RAMP_HEIGHT).unwrap();
    let roi = Roi::full(RAMP_WIDTH, RAMP_HEIGHT);

    let captured = distort(&ramp, g);
    let measured = measure_response(&captured, roi, 1).unwrap();
    let mse_before = measured.curve.mse_vs_linear();

    let poly = fit_response(&measured.curve).unwrap();
    let inversion = invert_curve(&poly, LUT_SIZE).unwrap();

    let corrected = apply_correction(&ramp, &inversion.lut);
    let recaptured = distort(&corrected, g);
    let measured_after = measure_response(&recaptured, roi, 1).unwrap();
    (mse_before, measured_after.curve.mse_vs_linear())
}

/// Minimum of `d/dx (c1*x + c2*x^2 + c3*x^3)` over [0, 1].
fn min_derivative(c1: f64, c2: f64, c3: f64) -> f64 {
    let d = |x: f64| c1 + 2.0 * c2 * x + 3.0 * c3 * x * x;
    let mut min = d(0.0).min(d(1.0));
    if c3.abs() > 1e-12 {
        let critical = -c2 / (3.0 * c3);
        if (0.0..=1.0).contains(&critical) {
            min = min.min(d(critical));
        }
    }
    min
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// For any strictly increasing, meaningfully non-linear cubic system,
    /// one calibration pass removes at least 95% of the response MSE.
    #[test]
    fn closed_loop_reduces_mse_to_5_percent(
        c1 in 0.2f64..1.5,
        c2 in -0.8f64..0.8,
        c3 in -0.8f64..0.8,
    ) {
        prop_assume!(min_derivative(c1, c2, c3) > 0.05);
        prop_assume!(c2.abs() + c3.abs() > 0.1);

        let g = move |x: f64| c1 * x + c2 * x * x + c3 * x * x * x;
        let (before, after) = calibrate_synthetic(g);
        prop_assert!(before > 0.0);
        prop_assert!(
            after <= 0.05 * before,
            "after {} not within 5% of before {}",
            after,
            before
        );
    }

    /// Correction preserves pixel ordering for any monotone table.
    #[test]
    fn apply_correction_is_monotone(
        raw in proptest::collection::vec(0.0f64..=1.0, 8..64),
        pairs in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 50),
    ) {
        let mut entries = raw;
        entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
        entries[0] = 0.0;
        let k = entries.len();
        entries[k - 1] = 1.0;
        let lut = CorrectionLut::new(entries).unwrap();

        for (a, b) in pairs {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(lut.apply(lo) <= lut.apply(hi));
        }
    }

    /// Min-max normalization makes the measured response invariant to
    /// affine gain/offset changes in the capture.
    #[test]
    fn measurement_invariant_under_affine_intensity_change(
        gain in 0.05f64..0.95,
        offset in 0.0f64..0.05,
    ) {
        let ramp = make_ramp(66, 3).unwrap();
        let roi = Roi::full(66, 3);
        let baseline = measure_response(&ramp, roi, 1).unwrap();

        let scaled = GreyImage::from_fn(66, 3, |x, y| offset + gain * ramp.get(x, y)).unwrap();
        let measured = measure_response(&scaled, roi, 1).unwrap();

        for (a, b) in baseline.curve.samples().iter().zip(measured.curve.samples()) {
            prop_assert!((a.1 - b.1).abs() < 1e-9);
        }
    }
}

#[test]
fn round_trip_square_and_cube_within_lut_bound() {
    for coeffs in [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]] {
        let poly = PolynomialCurve::new(coeffs).unwrap();
        let inversion = invert_curve(&poly, LUT_SIZE).unwrap();
        let bound = 1.0 / (2.0 * LUT_SIZE as f64) + 1e-6;
        for (i, &entry) in inversion.lut.entries().iter().enumerate() {
            let t = i as f64 / (LUT_SIZE - 1) as f64;
            let back = poly.eval(entry);
            assert!(
                (back - t).abs() <= bound,
                "level {}: g(lut) = {} vs {}",
                i,
                back,
                t
            );
        }
    }
}

#[test]
fn identity_system_stays_identity() {
    let (before, after) = calibrate_synthetic(|x| x);
    // A perfect system measures as the identity up to accumulation rounding...
    assert!(before < 1e-24, "before = {}", before);
    // ...and correction through a 256-entry table cannot add visible error.
    assert!(after < 1e-9, "after = {}", after);
}

#[test]
fn distortion_strength_orders_uncorrected_mse() {
    let (linear, _) = calibrate_synthetic(|x| x);
    let (square, sq_after) = calibrate_synthetic(|x| x * x);
    let (cube, cu_after) = calibrate_synthetic(|x| x * x * x);
    assert!(linear < square && square < cube);
    // Corrected error stays below a fixed ceiling regardless of strength.
    assert!(sq_after < 0.005 && cu_after < 0.005);
}

#[test]
fn fit_matches_normal_equations_oracle() {
    // Independent route: assemble and solve the 4x4 normal equations
    // directly by Gaussian elimination with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    fn normal_equations(xs: &[f64], ys: &[f64]) -> [f64; 4] {
        let mut ata = [[0.0f64; 4]; 4];
        let mut aty = [0.0f64; 4];
        for (&x, &y) in xs.iter().zip(ys) {
            let powers = [1.0, x, x * x, x * x * x];
            for i in 0..4 {
                for j in 0..4 {
                    ata[i][j] += powers[i] * powers[j];
                }
                aty[i] += powers[i] * y;
            }
        }
        // Gaussian elimination on the augmented system.
        let mut m = [[0.0f64; 5]; 4];
        for i in 0..4 {
            m[i][..4].copy_from_slice(&ata[i]);
            m[i][4] = aty[i];
        }
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
                .unwrap();
            m.swap(col, pivot);
            for row in col + 1..4 {
                let factor = m[row][col] / m[col][col];
                for k in col..5 {
                    m[row][k] -= factor * m[col][k];
                }
            }
        }
        let mut c = [0.0f64; 4];
        for row in (0..4).rev() {
            let mut acc = m[row][4];
            for k in row + 1..4 {
                acc -= m[row][k] * c[k];
            }
            c[row] = acc / m[row][row];
        }
        c
    }

    let truth = [0.2, 0.3, -0.1, 0.6];
    let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| truth[0] + truth[1] * x + truth[2] * x * x + truth[3] * x * x * x)
        .collect();

    let curve = holocal_core::calibration::ResponseCurve::new(
        xs.iter().cloned().zip(ys.iter().cloned()).collect(),
    )
    .unwrap();
    let poly = fit_response(&curve).unwrap();
    let oracle = normal_equations(&xs, &ys);

    for i in 0..4 {
        assert!((poly.coefficients()[i] - oracle[i]).abs() < 1e-9);
        assert!((poly.coefficients()[i] - truth[i]).abs() < 1e-9);
    }
}

#[test]
fn linear_reference_matches_measured_identity() {
    let reference = linear_reference(256).unwrap();
    assert_eq!(reference.mse_vs_linear(), 0.0);
    let ramp = make_ramp(257, 2).unwrap();
    let measured = measure_response(&ramp, Roi::full(257, 2), 1).unwrap();
    for (a, b) in reference.samples().iter().zip(measured.curve.samples()) {
        assert!((a.0 - b.0).abs() < 1e-12);
        assert!((a.1 - b.1).abs() < 1e-12);
    }
}
