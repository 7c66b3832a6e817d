//! Shared test oracles, independent of the library's transform path.
#![allow(dead_code)] // not every test target uses every helper

use holocal_core::spectral::{ComplexField, Direction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use std::f64::consts::TAU;

/// Direct O(N^4) evaluation of the 2D DFT definition:
/// forward kernel `exp(-2*pi*i*(u*x/W + v*y/H))`, inverse conjugate kernel
/// with `1/(W*H)` normalization.
pub fn naive_dft2(field: &ComplexField, direction: Direction) -> ComplexField {
    let (w, h) = (field.width(), field.height());
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let mut out = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let mut acc = Complex64::default();
            for y in 0..h {
                for x in 0..w {
                    let angle = sign
                        * TAU
                        * (u as f64 * x as f64 / w as f64 + v as f64 * y as f64 / h as f64);
                    acc += field.get(x, y) * Complex64::new(angle.cos(), angle.sin());
                }
            }
            if direction == Direction::Inverse {
                acc /= (w * h) as f64;
            }
            out.push(acc);
        }
    }
    ComplexField::new(w, h, out).unwrap()
}

/// Deterministic random complex field with components in `[-1, 1)`.
pub fn random_field(width: usize, height: usize, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_fn(width, height, |_, _| {
        Complex64::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    })
    .unwrap()
}

pub fn max_abs_diff(a: &ComplexField, b: &ComplexField) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
