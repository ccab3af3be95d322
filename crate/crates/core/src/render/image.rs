use std::io::{Read, Write};
use std::path::Path;

use super::RenderError;
use crate::color::Rgb;

/// Linear RGB image, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

const RAW_MAGIC: &[u8; 4] = b"RGBF";

fn srgb_encode(v: f64) -> u8 {
    let v = v.clamp(0.0, 1.0);
    let s = if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    };
    (s * 255.0 + 0.5).floor() as u8
}

impl Image {
    pub fn new(width: u32, height: u32) -> Image {
        Image {
            width,
            height,
            pixels: vec![Rgb::BLACK; width as usize * height as usize],
        }
    }

    pub fn filled(width: u32, height: u32, c: Rgb) -> Image {
        Image {
            width,
            height,
            pixels: vec![c; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let w = self.width;
        self.pixels[(y * w + x) as usize] = c;
    }

    pub fn luminance(&self) -> Vec<f64> {
        self.pixels.iter().map(|p| p.luminance()).collect()
    }

    pub fn mean_luminance(&self) -> f64 {
        self.luminance().iter().sum::<f64>() / self.pixels.len().max(1) as f64
    }

    pub fn max_value(&self) -> f64 {
        self.pixels
            .iter()
            .map(|p| p.max_channel())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.pixels.iter().all(|p| p.is_finite())
    }

    /// 8-bit sRGB encoding, clamped to [0, 1] linear.
    pub fn to_srgb8(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() * 3);
        for p in &self.pixels {
            for c in p.0 {
                out.push(srgb_encode(c));
            }
        }
        out
    }

    pub fn write_png(&self, path: &Path) -> Result<(), RenderError> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut enc = png::Encoder::new(file, self.width, self.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc
            .write_header()
            .map_err(|e| RenderError::Output(e.to_string()))?;
        w.write_image_data(&self.to_srgb8())
            .map_err(|e| RenderError::Output(e.to_string()))?;
        Ok(())
    }

    /// Raw float dump: `RGBF`, little-endian u32 width, height, channels (3),
    /// then row-major little-endian f32 samples.
    pub fn write_raw<W: Write>(&self, mut out: W) -> Result<(), RenderError> {
        out.write_all(RAW_MAGIC)?;
        for v in [self.width, self.height, 3] {
            out.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.pixels.len() * 12);
        for p in &self.pixels {
            for c in p.0 {
                buf.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_raw<R: Read>(mut input: R) -> Result<Image, RenderError> {
        let mut head = [0u8; 16];
        input.read_exact(&mut head)?;
        if &head[..4] != RAW_MAGIC {
            return Err(RenderError::Output("not a raw float image".into()));
        }
        let word =
            |k: usize| u32::from_le_bytes(head[4 + 4 * k..8 + 4 * k].try_into().expect("4 bytes"));
        let (w, h, ch) = (word(0), word(1), word(2));
        if ch != 3 {
            return Err(RenderError::Output(format!(
                "unsupported channel count {ch}"
            )));
        }
        let n = w as usize * h as usize;
        let mut data = vec![0u8; n * 12];
        input.read_exact(&mut data)?;
        let pixels = data
            .chunks_exact(12)
            .map(|c| {
                let f = |k: usize| {
                    f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().expect("4 bytes")) as f64
                };
                Rgb([f(0), f(1), f(2)])
            })
            .collect();
        Ok(Image {
            width: w,
            height: h,
            pixels,
        })
    }
}

/// Mean luminance over a `window × window` square centred on `(x, y)`.
pub fn probe_intensity(image: &Image, x: u32, y: u32, window: u32) -> Result<f64, RenderError> {
    if window == 0 {
        return Err(RenderError::Probe("window must be at least 1 pixel".into()));
    }
    let half = window / 2;
    let (x0, y0) = (x as i64 - half as i64, y as i64 - half as i64);
    let (x1, y1) = (x0 + window as i64, y0 + window as i64);
    if x0 < 0 || y0 < 0 || x1 > image.width as i64 || y1 > image.height as i64 {
        return Err(RenderError::Probe(format!(
            "{window}×{window} window at ({x}, {y}) leaves the {}×{} image",
            image.width, image.height
        )));
    }
    let mut s = 0.0;
    for yy in y0..y1 {
        for xx in x0..x1 {
            s += image.get(xx as u32, yy as u32).luminance();
        }
    }
    Ok(s / (window * window) as f64)
}

/// Mean and coefficient of variation of luminance over masked pixels.
pub fn masked_stats(image: &Image, mask: &[bool]) -> Result<(f64, f64), RenderError> {
    if mask.len() != image.pixels.len() {
        return Err(RenderError::Probe(
            "region mask does not match the image".into(),
        ));
    }
    let vals: Vec<f64> = image
        .pixels
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(p, _)| p.luminance())
        .collect();
    if vals.is_empty() {
        return Err(RenderError::Probe("region mask is empty".into()));
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, if mean > 0.0 { var.sqrt() / mean } else { 0.0 }))
}
