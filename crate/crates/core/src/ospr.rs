//! One-step phase retrieval: binary-phase hologram generation and replay
//! simulation with temporal subframe averaging.
//!
//! A subframe is generated in one pass: take the target amplitude, assign
//! each pixel an independent uniform random phase, inverse-transform to the
//! hologram plane, and quantize each pixel's phase to the nearer of 0 or pi.
//! Displaying many subframes in quick succession averages out the
//! quantization speckle, so the perceived image is modelled as the mean of
//! the per-subframe replay intensities.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{GreyImage, Roi};
use crate::spectral::{dft2, ComplexField, Direction};

/// 2D field of binary phases; bit `b` means phase `b * pi` radians.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryHologram {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryHologram {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "hologram dimensions {}x{} must be positive",
                width, height
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Dimension("hologram dimensions overflow".into()))?;
        if bits.len() != expected {
            return Err(Error::Dimension(format!(
                "bit count {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(BinaryHologram { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Phase of one pixel in radians: 0 or pi.
    pub fn phase(&self, x: usize, y: usize) -> f64 {
        if self.bits[y * self.width + x] {
            PI
        } else {
            0.0
        }
    }

    /// The modulated field the SLM applies: `exp(i*pi*b)`, i.e. +1 or -1.
    pub fn to_field(&self) -> ComplexField {
        let data = self
            .bits
            .iter()
            .map(|&b| Complex64::new(if b { -1.0 } else { 1.0 }, 0.0))
            .collect();
        ComplexField::new(self.width, self.height, data)
            .expect("hologram dimensions are valid")
    }

    /// Renders the hologram for inspection: phase 0 maps to black,
    /// phase pi to white.
    pub fn to_grey(&self) -> GreyImage {
        let data = self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        GreyImage::new(self.width, self.height, data).expect("hologram dimensions are valid")
    }
}

/// Where the target sits in the replay plane.
///
/// A binary (real-valued) hologram always produces a point-symmetric twin
/// of the target. With `HalfPlane` the target occupies the upper half of
/// the plane and the twin lands in the lower half, so the upper-half region
/// holds a faithful image. `FullPlane` lets target and twin overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetPlacement {
    HalfPlane,
    FullPlane,
}

/// Hologram generation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OsprConfig {
    /// Number of binary holograms averaged per frame.
    pub subframes: u32,
    /// Seed for the per-subframe phase randomization.
    pub seed: u64,
    pub placement: TargetPlacement,
}

impl Default for OsprConfig {
    fn default() -> Self {
        OsprConfig {
            subframes: 24,
            seed: 0,
            placement: TargetPlacement::HalfPlane,
        }
    }
}

impl OsprConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subframes == 0 {
            return Err(Error::Config("subframe count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Deterministic per-subframe seed: the `index + 1`-th output of a
/// splitmix64 stream seeded with `seed`.
pub fn subframe_seed(seed: u64, index: u32) -> u64 {
    splitmix64(seed, u64::from(index))
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// `k`-th output of the splitmix64 sequence started at `state`.
pub(crate) fn splitmix64(state: u64, k: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN_GAMMA.wrapping_mul(k.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Embeds a target into the hologram plane according to `placement`.
///
/// `HalfPlane` returns a canvas twice the target height with the target in
/// rows `0..target.height()` and zeros below; `FullPlane` returns the
/// target unchanged.
pub fn embed_target(target: &GreyImage, placement: TargetPlacement) -> GreyImage {
    match placement {
        TargetPlacement::FullPlane => target.clone(),
        TargetPlacement::HalfPlane => {
            let (w, th) = (target.width(), target.height());
            GreyImage::from_fn(w, th * 2, |x, y| if y < th { target.get(x, y) } else { 0.0 })
                .expect("doubling the height preserves validity")
        }
    }
}

/// The replay-plane region occupied by the embedded target.
pub fn target_region(target: &GreyImage, placement: TargetPlacement) -> Roi {
    match placement {
        TargetPlacement::FullPlane => Roi::full(target.width(), target.height()),
        TargetPlacement::HalfPlane => Roi::new(0, 0, target.width(), target.height()),
    }
}

/// Generates one binary-phase hologram for an already-embedded target.
///
/// Steps: amplitude `sqrt(intensity)`, unit-modulus random phase
/// `exp(i*phi)` with `phi` uniform on `[0, 2*pi)` drawn row-major from a
/// ChaCha8 generator seeded with `seed`, inverse transform to the hologram
/// plane, then per-pixel phase quantization (`re >= 0` maps to phase 0,
/// otherwise pi). Bit-for-bit deterministic for a fixed seed.
pub fn ospr_subframe(embedded_target: &GreyImage, seed: u64) -> BinaryHologram {
    let (w, h) = (embedded_target.width(), embedded_target.height());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Complex64> = embedded_target
        .data()
        .iter()
        .map(|&v| {
            let phi = rng.random::<f64>() * TAU;
            Complex64::from_polar(v.sqrt(), phi)
        })
        .collect();
    let replay_field = ComplexField::new(w, h, data).expect("dimensions from a valid image");
    let hologram_field = dft2(&replay_field, Direction::Inverse);
    let bits = hologram_field.data().iter().map(|c| c.re < 0.0).collect();
    BinaryHologram::new(w, h, bits).expect("dimensions from a valid field")
}

/// Simulates the far-field replay of a hologram: forward-transform the
/// `+/-1` field, take `|amplitude|^2`, and normalize by the maximum.
///
/// The hologram field is real, so its spectrum is Hermitian and the
/// intensity is point-symmetric about DC; symmetric bins are averaged in a
/// fixed order so the symmetry holds bitwise despite rounding.
pub fn simulate_replay(hologram: &BinaryHologram) -> GreyImage {
    let (w, h) = (hologram.width, hologram.height);
    let spectrum = dft2(&hologram.to_field(), Direction::Forward);
    let mut intensity: Vec<f64> = spectrum.data().iter().map(|c| c.norm_sqr()).collect();

    for y in 0..h {
        let sy = (h - y) % h;
        for x in 0..w {
            let sx = (w - x) % w;
            let i = y * w + x;
            let j = sy * w + sx;
            if i < j {
                let v = (intensity[i] + intensity[j]) / 2.0;
                intensity[i] = v;
                intensity[j] = v;
            }
        }
    }

    let max = intensity.iter().cloned().fold(0.0f64, f64::max);
    debug_assert!(max > 0.0, "a +/-1 field always carries energy");
    for v in &mut intensity {
        *v /= max;
    }
    GreyImage::new(w, h, intensity).expect("normalized intensity lies in [0, 1]")
}

/// One OSPR frame: the generated subframes and their averaged replay.
#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub subframes: Vec<BinaryHologram>,
    /// Mean of the per-subframe replay intensities, max-normalized.
    pub averaged_replay: GreyImage,
    /// Replay-plane region holding the (non-conjugate) target image.
    pub target_region: Roi,
}

/// Generates `config.subframes` holograms with per-subframe seeds derived
/// from `config.seed` and averages their replay intensities in subframe
/// order.
pub fn ospr_frame(target: &GreyImage, config: &OsprConfig) -> Result<FrameOutput> {
    config.validate()?;
    let embedded = embed_target(target, config.placement);
    let (w, h) = (embedded.width(), embedded.height());

    let mut acc = vec![0.0f64; w * h];
    let mut subframes = Vec::with_capacity(config.subframes as usize);
    for k in 0..config.subframes {
        let hologram = ospr_subframe(&embedded, subframe_seed(config.seed, k));
        let replay = simulate_replay(&hologram);
        for (a, &v) in acc.iter_mut().zip(replay.data()) {
            *a += v;
        }
        subframes.push(hologram);
    }

    let n = config.subframes as f64;
    for a in &mut acc {
        *a /= n;
    }
    let max = acc.iter().cloned().fold(0.0f64, f64::max);
    for a in &mut acc {
        *a /= max;
    }
    let averaged_replay = GreyImage::new(w, h, acc)?;

    Ok(FrameOutput {
        subframes,
        averaged_replay,
        target_region: target_region(target, config.placement),
    })
}
