//! Image file I/O: PNG plus binary PGM/PPM (P5/P6).
//!
//! PGM/PPM are written with maxval 255 and a single whitespace byte after
//! each header token, so output files are byte-stable across runs.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{GreyImage, RgbImage};

const PNG_MAGIC: [u8; 4] = [0x89, b'P', b'N', b'G'];

/// Loads a grey image from PNG or PNM, converting RGB inputs with BT.709 luma.
pub fn load_grey(path: impl AsRef<Path>) -> Result<GreyImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else if bytes.starts_with(b"P6") {
        Ok(decode_ppm(&bytes)?.to_grey())
    } else if bytes.starts_with(&PNG_MAGIC) {
        decode_png_grey(&bytes)
    } else {
        Err(Error::Format(format!(
            "{}: not a PNG, PGM, or PPM file",
            path.display()
        )))
    }
}

/// Loads an RGB image from PNG or PNM; grey inputs replicate their channel.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P6") {
        decode_ppm(&bytes)
    } else if bytes.starts_with(b"P5") {
        let grey = decode_pgm(&bytes)?;
        let data = grey.quantize8().iter().map(|&v| [v, v, v]).collect();
        RgbImage::new(grey.width(), grey.height(), data)
    } else if bytes.starts_with(&PNG_MAGIC) {
        decode_png_rgb(&bytes)
    } else {
        Err(Error::Format(format!(
            "{}: not a PNG, PGM, or PPM file",
            path.display()
        )))
    }
}

/// Saves a grey image as 8-bit PNG or PGM, chosen by file extension.
pub fn save_grey(path: impl AsRef<Path>, image: &GreyImage) -> Result<()> {
    let path = path.as_ref();
    match extension(path)?.as_str() {
        "pgm" => fs::write(path, encode_pgm(image)).map_err(Error::Io),
        "png" => {
            image::save_buffer(
                path,
                &image.quantize8(),
                image.width() as u32,
                image.height() as u32,
                image::ExtendedColorType::L8,
            )
            .map_err(png_error)
        }
        other => Err(Error::Format(format!(
            "cannot write grey image with extension .{}",
            other
        ))),
    }
}

/// Saves an RGB image as 24-bit PNG or PPM, chosen by file extension.
pub fn save_rgb(path: impl AsRef<Path>, image: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    match extension(path)?.as_str() {
        "ppm" => fs::write(path, encode_ppm(image)).map_err(Error::Io),
        "png" => {
            let flat: Vec<u8> = image.data().iter().flatten().copied().collect();
            image::save_buffer(
                path,
                &flat,
                image.width() as u32,
                image.height() as u32,
                image::ExtendedColorType::Rgb8,
            )
            .map_err(png_error)
        }
        other => Err(Error::Format(format!(
            "cannot write RGB image with extension .{}",
            other
        ))),
    }
}

fn extension(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| Error::Format(format!("{}: missing file extension", path.display())))
}

fn png_error(err: image::ImageError) -> Error {
    match err {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Format(other.to_string()),
    }
}

pub(crate) fn encode_pgm(image: &GreyImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.quantize8());
    out
}

fn encode_ppm(image: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.data().iter().flatten());
    out
}

fn decode_pgm(bytes: &[u8]) -> Result<GreyImage> {
    let (width, height, data) = decode_pnm_body(bytes, b"P5", 1)?;
    GreyImage::from_bytes8(width, height, data)
}

fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let (width, height, data) = decode_pnm_body(bytes, b"P6", 3)?;
    let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    RgbImage::new(width, height, pixels)
}

/// Parses a binary PNM header (magic, width, height, maxval) and returns the
/// raster. Whitespace runs and `#` comments are accepted between tokens;
/// exactly one whitespace byte separates the maxval from the raster.
fn decode_pnm_body<'a>(
    bytes: &'a [u8],
    magic: &[u8],
    samples_per_pixel: usize,
) -> Result<(usize, usize, &'a [u8])> {
    if !bytes.starts_with(magic) {
        return Err(Error::Format("bad PNM magic".into()));
    }
    let mut pos = magic.len();
    let width = read_pnm_number(bytes, &mut pos)?;
    let height = read_pnm_number(bytes, &mut pos)?;
    let maxval = read_pnm_number(bytes, &mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "unsupported PNM maxval {} (expected 1..=255)",
            maxval
        )));
    }
    // read_pnm_number consumed the single whitespace byte after maxval.
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(samples_per_pixel))
        .ok_or_else(|| Error::Format("PNM dimensions overflow".into()))?;
    let raster = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| Error::Format("PNM raster truncated".into()))?;
    Ok((width, height, raster))
}

fn read_pnm_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    // Skip whitespace and comment lines.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("PNM header: expected a number".into()));
    }
    let text = std::str::from_utf8(&bytes[start..*pos]).expect("digits are ascii");
    let value: usize = text
        .parse()
        .map_err(|_| Error::Format(format!("PNM header: bad number {}", text)))?;
    // Consume the single whitespace terminating the token.
    if matches!(bytes.get(*pos), Some(b) if b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(value)
}

fn decode_png_grey(bytes: &[u8]) -> Result<GreyImage> {
    let dynamic = image::load_from_memory(bytes).map_err(png_error)?;
    match dynamic {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            GreyImage::from_bytes8(w as usize, h as usize, buf.as_raw())
        }
        image::DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            let data = buf.as_raw().iter().map(|&v| f64::from(v) / 65535.0).collect();
            GreyImage::new(w as usize, h as usize, data)
        }
        other => Ok(dynamic_to_rgb(other)?.to_grey()),
    }
}

fn decode_png_rgb(bytes: &[u8]) -> Result<RgbImage> {
    let dynamic = image::load_from_memory(bytes).map_err(png_error)?;
    dynamic_to_rgb(dynamic)
}

fn dynamic_to_rgb(dynamic: image::DynamicImage) -> Result<RgbImage> {
    let buf = dynamic.to_rgb8();
    let (w, h) = buf.dimensions();
    let pixels = buf
        .as_raw()
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    RgbImage::new(w as usize, h as usize, pixels)
}
