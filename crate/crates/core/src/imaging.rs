//! 8-bit raster images, resampling, cropping and synthetic test images.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Row-major interleaved 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resample {
    #[default]
    Nearest,
    Bilinear,
}

impl std::str::FromStr for Resample {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Resample::Nearest),
            "bilinear" => Ok(Resample::Bilinear),
            other => Err(invalid(format!("unknown resampling '{other}'"))),
        }
    }
}

impl ByteImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(invalid(format!("expected 1 or 3 channels, got {channels}")));
        }
        if width == 0 || height == 0 {
            return Err(invalid("image has no pixels"));
        }
        if data.len() != width * height * channels {
            return Err(invalid(format!(
                "buffer holds {} bytes, {width}x{height}x{channels} needs {}",
                data.len(),
                width * height * channels
            )));
        }
        Ok(ByteImage { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// One channel as a `height x width` matrix.
    pub fn plane(&self, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.height, self.width, |r, col| self.get(col, r, c) as f64)
    }

    /// Rebuilds an image from planes, rounding and clamping to `[0, 255]`.
    pub fn from_planes(planes: &[DMatrix<f64>]) -> Result<Self> {
        let first = planes.first().ok_or_else(|| invalid("no planes"))?;
        let (h, w) = first.shape();
        if planes.iter().any(|p| p.shape() != (h, w)) {
            return Err(invalid("planes differ in shape"));
        }
        let ch = planes.len();
        let mut data = vec![0u8; w * h * ch];
        for (c, p) in planes.iter().enumerate() {
            for r in 0..h {
                for col in 0..w {
                    data[(r * w + col) * ch + c] = to_byte(p[(r, col)]);
                }
            }
        }
        Self::new(w, h, ch, data)
    }

    /// ITU-R BT.601 luma; gray images are returned unchanged.
    pub fn to_gray(&self) -> ByteImage {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| to_byte(0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64))
            .collect();
        ByteImage { width: self.width, height: self.height, channels: 1, data }
    }

    pub fn to_rgb(&self) -> ByteImage {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        ByteImage { width: self.width, height: self.height, channels: 3, data }
    }

    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || x + width > self.width || y + height > self.height {
            return Err(invalid(format!(
                "crop {width}x{height}+{x}+{y} outside {}x{}",
                self.width, self.height
            )));
        }
        let ch = self.channels;
        let mut data = Vec::with_capacity(width * height * ch);
        for r in y..y + height {
            let start = (r * self.width + x) * ch;
            data.extend_from_slice(&self.data[start..start + width * ch]);
        }
        Self::new(width, height, ch, data)
    }

    pub fn resize(&self, width: usize, height: usize, method: Resample) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid("target size must be positive"));
        }
        let ch = self.channels;
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut data = vec![0u8; width * height * ch];
        for r in 0..height {
            for col in 0..width {
                for c in 0..ch {
                    let v = match method {
                        Resample::Nearest => {
                            let xs = (((col as f64 + 0.5) * sx) as usize).min(self.width - 1);
                            let ys = (((r as f64 + 0.5) * sy) as usize).min(self.height - 1);
                            self.get(xs, ys, c)
                        }
                        Resample::Bilinear => {
                            let fx = ((col as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                            let fy = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
                            let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
                            let (x1, y1) = ((x0 + 1).min(self.width - 1), (y0 + 1).min(self.height - 1));
                            let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
                            let top = self.get(x0, y0, c) as f64 * (1.0 - tx) + self.get(x1, y0, c) as f64 * tx;
                            let bot = self.get(x0, y1, c) as f64 * (1.0 - tx) + self.get(x1, y1, c) as f64 * tx;
                            to_byte(top * (1.0 - ty) + bot * ty)
                        }
                    };
                    data[(r * width + col) * ch + c] = v;
                }
            }
        }
        Self::new(width, height, ch, data)
    }
}

pub fn to_byte(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}

/// Smooth gray test scene: a low-frequency wave, a bright disc and a ramp.
pub fn synthetic_gray(size: usize) -> DMatrix<f64> {
    let s = (size.max(2) - 1) as f64;
    DMatrix::from_fn(size, size, |r, c| {
        let (x, y) = (c as f64 / s, r as f64 / s);
        let disc = if (x - 0.55).powi(2) + (y - 0.45).powi(2) < 0.07 { 50.0 } else { 0.0 };
        (100.0 + 60.0 * (6.0 * x).sin() * (4.0 * y).cos() + 40.0 * x + disc).clamp(0.0, 255.0)
    })
}

/// Smooth RGB scene with strongly correlated neighbouring pixels.
pub fn synthetic_rgb(width: usize, height: usize) -> ByteImage {
    let g = synthetic_gray(width.max(height));
    let mut data = Vec::with_capacity(width * height * 3);
    for r in 0..height {
        for c in 0..width {
            let v = g[(r, c)];
            data.push(to_byte(v));
            data.push(to_byte(255.0 - v * 0.8));
            data.push(to_byte(0.5 * v + 60.0 * (c as f64 / width as f64)));
        }
    }
    ByteImage { width, height, channels: 3, data }
}

/// Uniformly random RGB bytes.
pub fn random_rgb(width: usize, height: usize, seed: u64) -> ByteImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height * 3).map(|_| rng.random()).collect();
    ByteImage { width, height, channels: 3, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_and_nearest_resize() {
        let img = ByteImage::new(4, 2, 1, (0..8).collect()).unwrap();
        let c = img.crop(1, 0, 2, 2).unwrap();
        assert_eq!(c.data, vec![1, 2, 5, 6]);
        assert!(img.crop(3, 0, 2, 1).is_err());
        let up = img.resize(8, 4, Resample::Nearest).unwrap();
        assert_eq!(up.get(0, 0, 0), 0);
        assert_eq!(up.get(7, 3, 0), 7);
        assert_eq!(up.resize(4, 2, Resample::Nearest).unwrap(), img);
    }

    #[test]
    fn bilinear_keeps_constants_and_ramps() {
        let flat = ByteImage::filled(5, 3, 3, 77).unwrap();
        assert!(flat.resize(9, 7, Resample::Bilinear).unwrap().data.iter().all(|&v| v == 77));
        let ramp = ByteImage::new(4, 1, 1, vec![0, 10, 20, 30]).unwrap();
        let same = ramp.resize(4, 1, Resample::Bilinear).unwrap();
        assert_eq!(same, ramp);
    }

    #[test]
    fn planes_round_trip() {
        let img = random_rgb(5, 4, 1);
        let planes: Vec<_> = (0..3).map(|c| img.plane(c)).collect();
        assert_eq!(ByteImage::from_planes(&planes).unwrap(), img);
        assert_eq!(img.to_gray().channels, 1);
        assert_eq!(img.to_gray().to_rgb().channels, 3);
    }

    #[test]
    fn buffer_size_checked() {
        assert!(ByteImage::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(ByteImage::new(2, 2, 2, vec![0; 8]).is_err());
        assert_eq!(to_byte(300.0), 255);
        assert_eq!(to_byte(-4.0), 0);
        assert_eq!(to_byte(12.5), 13);
    }
}
