//! Normalized grey-scale images, 8-bit RGB images, and bit-depth conversion.
//!
//! `GreyImage` is the universal currency of the toolkit: every target,
//! capture, and ramp is a row-major field of intensities in `[0, 1]`,
//! held in double precision. 8-bit values exist only at I/O boundaries.

use crate::error::{Error, Result};

/// BT.709 luma weights used for every RGB to grey conversion.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Rectangular region of interest; `(x0, y0)` is the top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Roi { x0, y0, width, height }
    }

    /// Roi covering the whole of an image with the given dimensions.
    pub fn full(width: usize, height: usize) -> Self {
        Roi { x0: 0, y0: 0, width, height }
    }

    /// Checks that the roi is non-empty and lies entirely inside a
    /// `host_width` x `host_height` image.
    pub fn check_within(&self, host_width: usize, host_height: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Bounds(format!(
                "roi {}x{} is empty",
                self.width, self.height
            )));
        }
        let x_ok = self
            .x0
            .checked_add(self.width)
            .map(|x1| x1 <= host_width)
            .unwrap_or(false);
        let y_ok = self
            .y0
            .checked_add(self.height)
            .map(|y1| y1 <= host_height)
            .unwrap_or(false);
        if !x_ok || !y_ok {
            return Err(Error::Bounds(format!(
                "roi +{}+{} {}x{} exceeds host {}x{}",
                self.x0, self.y0, self.width, self.height, host_width, host_height
            )));
        }
        Ok(())
    }
}

/// 2D field of normalized intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GreyImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GreyImage {
    /// Builds an image from row-major data, validating dimensions and range.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions {}x{} must be positive",
                width, height
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Dimension("image dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Value(format!(
                "intensity {} outside [0, 1]",
                v
            )));
        }
        Ok(GreyImage { width, height, data })
    }

    /// Image of constant intensity `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Quantizes to 8 bits with round-half-up on `v * 255`.
    pub fn quantize8(&self) -> Vec<u8> {
        // f64::round is half-away-from-zero, which is half-up for v >= 0.
        self.data.iter().map(|v| (v * 255.0).round() as u8).collect()
    }

    /// Dequantizes an 8-bit raster: `v = byte / 255`.
    pub fn from_bytes8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Self::new(width, height, data)
    }

    /// Copies out the pixels under `roi`.
    pub fn crop(&self, roi: Roi) -> Result<GreyImage> {
        roi.check_within(self.width, self.height)?;
        let mut data = Vec::with_capacity(roi.width * roi.height);
        for y in roi.y0..roi.y0 + roi.height {
            let start = y * self.width + roi.x0;
            data.extend_from_slice(&self.data[start..start + roi.width]);
        }
        GreyImage::new(roi.width, roi.height, data)
    }

    /// Mean intensity of one column restricted to `roi` rows.
    /// `col` is roi-relative.
    pub(crate) fn roi_column_mean(&self, roi: Roi, col: usize) -> f64 {
        let x = roi.x0 + col;
        let sum: f64 = (roi.y0..roi.y0 + roi.height)
            .map(|y| self.get(x, y))
            .sum();
        sum / roi.height as f64
    }
}

/// Row-major 24-bit RGB image.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions {}x{} must be positive",
                width, height
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Dimension("image dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[u8; 3]] {
        &self.data
    }

    /// Converts to grey with BT.709 luma, clamped to `[0, 1]`.
    ///
    /// The weights are applied as integers scaled by 10^4 so that grey
    /// pixels (r=g=b=k) map to exactly `k / 255`.
    pub fn to_grey(&self) -> GreyImage {
        let data = self
            .data
            .iter()
            .map(|&[r, g, b]| {
                let num =
                    2126.0 * f64::from(r) + 7152.0 * f64::from(g) + 722.0 * f64::from(b);
                (num / 2_550_000.0).clamp(0.0, 1.0)
            })
            .collect();
        GreyImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}
