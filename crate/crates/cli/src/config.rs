//! Global options shared by the subcommands, with precedence
//! CLI flags > config file > built-in defaults.
//!
//! The config file is plain `key = value` text (one pair per line,
//! `#` comments); keys match the long flag names.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use holocal_core::calibration::PolynomialCurve;
use holocal_core::imaging::Roi;
use holocal_core::ospr::TargetPlacement;

use crate::CliError;

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// RNG seed for hologram phases and simulated noise
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Binary subframes averaged per frame
    #[arg(long, global = true)]
    pub subframes: Option<u32>,

    /// Hologram plane width in pixels
    #[arg(long, global = true)]
    pub width: Option<usize>,

    /// Hologram plane height in pixels
    #[arg(long, global = true)]
    pub height: Option<usize>,

    /// Region of interest within a capture
    #[arg(long, global = true, value_name = "X0,Y0,W,H", value_parser = parse_roi)]
    pub roi: Option<Roi>,

    /// Correction LUT resolution
    #[arg(long, global = true)]
    pub lut_size: Option<usize>,

    /// Additive Gaussian noise sigma on the simulated replay intensity
    #[arg(long, global = true)]
    pub noise_sigma: Option<f64>,

    /// Injected transfer-curve coefficients c0,c1,c2,c3 (simulation only)
    #[arg(long, global = true, value_name = "C0,C1,..", value_parser = parse_poly)]
    pub distortion: Option<PolynomialCurve>,

    /// Where the target sits in the replay plane
    #[arg(long, global = true, value_enum)]
    pub placement: Option<PlacementArg>,

    /// Config file with `key = value` lines; flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    /// Target in the upper half of the plane, conjugate twin below
    HalfPlane,
    /// Target covers the whole plane and overlaps its twin
    FullPlane,
}

impl From<PlacementArg> for TargetPlacement {
    fn from(arg: PlacementArg) -> Self {
        match arg {
            PlacementArg::HalfPlane => TargetPlacement::HalfPlane,
            PlacementArg::FullPlane => TargetPlacement::FullPlane,
        }
    }
}

/// Fully resolved options with defaults applied.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub subframes: u32,
    pub width: usize,
    pub height: usize,
    pub roi: Option<Roi>,
    pub lut_size: usize,
    pub noise_sigma: f64,
    pub distortion: PolynomialCurve,
    pub placement: TargetPlacement,
}

impl Resolved {
    pub fn from_args(args: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let resolved = Resolved {
            seed: args.seed.or(file.seed).unwrap_or(0),
            subframes: args.subframes.or(file.subframes).unwrap_or(24),
            width: args.width.or(file.width).unwrap_or(1280),
            height: args.height.or(file.height).unwrap_or(1024),
            roi: args.roi.or(file.roi),
            lut_size: args.lut_size.or(file.lut_size).unwrap_or(256),
            noise_sigma: args.noise_sigma.or(file.noise_sigma).unwrap_or(0.0),
            distortion: args
                .distortion
                .or(file.distortion)
                .unwrap_or_else(PolynomialCurve::identity),
            placement: args
                .placement
                .or(file.placement)
                .map(TargetPlacement::from)
                .unwrap_or(TargetPlacement::HalfPlane),
        };
        resolved.validate()?;
        Ok(resolved)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.width == 0 || self.height == 0 {
            return Err(CliError::input("width and height must be positive"));
        }
        if self.subframes == 0 {
            return Err(CliError::input("subframes must be at least 1"));
        }
        if self.lut_size < 2 {
            return Err(CliError::input("lut-size must be at least 2"));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(CliError::input("noise-sigma must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct FileConfig {
    seed: Option<u64>,
    subframes: Option<u32>,
    width: Option<usize>,
    height: Option<usize>,
    roi: Option<Roi>,
    lut_size: Option<usize>,
    noise_sigma: Option<f64>,
    distortion: Option<PolynomialCurve>,
    placement: Option<PlacementArg>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
        let mut cfg = FileConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::input(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            let value = value.trim().trim_matches('"');
            let fail = |msg: String| {
                CliError::input(format!("{}:{}: {}", path.display(), lineno + 1, msg))
            };
            match key.as_str() {
                "seed" => cfg.seed = Some(value.parse().map_err(|_| fail(format!("bad seed {}", value)))?),
                "subframes" => {
                    cfg.subframes =
                        Some(value.parse().map_err(|_| fail(format!("bad subframes {}", value)))?)
                }
                "width" => {
                    cfg.width = Some(value.parse().map_err(|_| fail(format!("bad width {}", value)))?)
                }
                "height" => {
                    cfg.height =
                        Some(value.parse().map_err(|_| fail(format!("bad height {}", value)))?)
                }
                "roi" => cfg.roi = Some(parse_roi(value).map_err(fail)?),
                "lut_size" => {
                    cfg.lut_size =
                        Some(value.parse().map_err(|_| fail(format!("bad lut_size {}", value)))?)
                }
                "noise_sigma" => {
                    cfg.noise_sigma = Some(
                        value.parse().map_err(|_| fail(format!("bad noise_sigma {}", value)))?,
                    )
                }
                "distortion" => cfg.distortion = Some(parse_poly(value).map_err(fail)?),
                "placement" => {
                    cfg.placement = Some(
                        PlacementArg::from_str(value, true)
                            .map_err(|e| fail(format!("bad placement {}: {}", value, e)))?,
                    )
                }
                other => return Err(fail(format!("unknown key `{}`", other))),
            }
        }
        Ok(cfg)
    }
}

pub fn parse_roi(text: &str) -> Result<Roi, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected x0,y0,w,h, got `{}`", text));
    }
    let mut nums = [0usize; 4];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("bad roi component `{}`", part))?;
    }
    Ok(Roi::new(nums[0], nums[1], nums[2], nums[3]))
}

pub fn parse_poly(text: &str) -> Result<PolynomialCurve, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.is_empty() || parts.len() > 4 {
        return Err(format!("expected 1 to 4 coefficients, got `{}`", text));
    }
    let mut coeffs = [0.0f64; 4];
    for (slot, part) in coeffs.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("bad coefficient `{}`", part))?;
    }
    PolynomialCurve::new(coeffs).map_err(|e| e.to_string())
}
