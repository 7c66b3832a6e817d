//! 2D discrete Fourier transforms and centering shifts.
//!
//! Convention: the forward transform is unnormalized with kernel
//! `exp(-2*pi*i*(u*x/W + v*y/H))`; the inverse uses the conjugate kernel
//! scaled by `1/(W*H)`, so `inverse(forward(f)) == f` up to rounding.
//! Arbitrary (non-power-of-two) dimensions are supported.

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Row-major 2D field of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

/// Transform direction for [`dft2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl ComplexField {
    /// Builds a field from row-major data; dimensions must be positive,
    /// the length must match, and every component must be finite.
    pub fn new(width: usize, height: usize, data: Vec<Complex64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "field dimensions {}x{} must be positive",
                width, height
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Dimension("field dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Value("field contains NaN or Inf".into()));
        }
        Ok(ComplexField { width, height, data })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }
}

/// 2D DFT, computed as row transforms followed by column transforms.
pub fn dft2(field: &ComplexField, direction: Direction) -> ComplexField {
    let (w, h) = (field.width, field.height);
    let dir = match direction {
        Direction::Forward => FftDirection::Forward,
        Direction::Inverse => FftDirection::Inverse,
    };
    let mut planner = FftPlanner::new();
    let mut data = field.data.clone();

    let row_fft = planner.plan_fft(w, dir);
    let mut scratch = vec![Complex64::default(); row_fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(w) {
        row_fft.process_with_scratch(row, &mut scratch);
    }

    let mut transposed = transpose(w, h, &data);
    let col_fft = planner.plan_fft(h, dir);
    scratch.resize(col_fft.get_inplace_scratch_len(), Complex64::default());
    for col in transposed.chunks_exact_mut(h) {
        col_fft.process_with_scratch(col, &mut scratch);
    }
    let mut out = transpose(h, w, &transposed);

    if direction == Direction::Inverse {
        let scale = 1.0 / (w as f64 * h as f64);
        for c in &mut out {
            *c *= scale;
        }
    }
    ComplexField { width: w, height: h, data: out }
}

/// Swaps quadrants so the DC bin moves to `(W/2, H/2)`. Applying it twice
/// on even dimensions is the identity.
pub fn center_shift(field: &ComplexField) -> ComplexField {
    let (w, h) = (field.width, field.height);
    let mut data = vec![Complex64::default(); w * h];
    for y in 0..h {
        let sy = (y + h / 2) % h;
        for x in 0..w {
            let sx = (x + w / 2) % w;
            data[y * w + x] = field.data[sy * w + sx];
        }
    }
    ComplexField { width: w, height: h, data }
}

fn transpose(width: usize, height: usize, matrix: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); matrix.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = matrix[y * width + x];
        }
    }
    out
}
