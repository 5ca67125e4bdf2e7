use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cipher::{decrypt_with_layout, encrypt_with_layout, CipherKey, GroupLayout};
use crate::denoise::{mse, psnr_db};
use crate::error::{invalid, Result};
use crate::imaging::ByteImage;
use crate::spectral::{OrderVector, TransformKind};

pub const DEFAULT_PAIRS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Horizontal, Direction::Vertical, Direction::Diagonal];

    fn step(self) -> (usize, usize) {
        match self {
            Direction::Horizontal => (1, 0),
            Direction::Vertical => (0, 1),
            Direction::Diagonal => (1, 1),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "horizontal" | "h" => Ok(Direction::Horizontal),
            "vertical" | "v" => Ok(Direction::Vertical),
            "diagonal" | "d" => Ok(Direction::Diagonal),
            other => Err(invalid(format!("unknown direction '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub direction: Direction,
    /// Mean over channels; channels without variance count as 0.
    pub rho: f64,
    /// Set when some channel had zero variance.
    pub degenerate: bool,
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

/// Pearson correlation of randomly sampled neighbouring pixel pairs, drawn
/// with replacement.
pub fn adjacent_correlation(img: &ByteImage, direction: Direction, pairs: usize, seed: u64) -> Result<Correlation> {
    let (dx, dy) = direction.step();
    if img.width <= dx || img.height <= dy || pairs < 2 {
        return Err(invalid("image too small for adjacent pairs"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<(usize, usize)> = (0..pairs)
        .map(|_| (rng.random_range(0..img.width - dx), rng.random_range(0..img.height - dy)))
        .collect();
    let mut total = 0.0;
    let mut degenerate = false;
    for c in 0..img.channels {
        let a: Vec<f64> = pos.iter().map(|&(x, y)| img.get(x, y, c) as f64).collect();
        let b: Vec<f64> = pos.iter().map(|&(x, y)| img.get(x + dx, y + dy, c) as f64).collect();
        match pearson(&a, &b) {
            Some(r) => total += r,
            None => degenerate = true,
        }
    }
    Ok(Correlation { direction, rho: total / img.channels as f64, degenerate })
}

/// Encrypts once, then decrypts with `b = a + delta` for every delta.
/// Returns `(delta, mse)` on the 8-bit scale.
pub fn sensitivity_sweep(img: &ByteImage, key: &CipherKey, deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let layout = GroupLayout::new(img.width, img.height, key)?;
    let ct = encrypt_with_layout(img, key, &layout)?;
    deltas
        .iter()
        .map(|&d| {
            let out = decrypt_with_layout(&ct, &key.with_orders(key.orders.offset(d)), &layout)?;
            Ok((d, byte_mse(img, &out)))
        })
        .collect()
}

pub fn byte_mse(a: &ByteImage, b: &ByteImage) -> f64 {
    let fa: Vec<f64> = a.data.iter().map(|&v| v as f64).collect();
    let fb: Vec<f64> = b.data.iter().map(|&v| v as f64).collect();
    mse(&fa, &fb)
}

pub fn byte_psnr(a: &ByteImage, b: &ByteImage) -> f64 {
    let fa: Vec<f64> = a.data.iter().map(|&v| v as f64).collect();
    let fb: Vec<f64> = b.data.iter().map(|&v| v as f64).collect();
    psnr_db(&fa, &fb, 255.0)
}

/// Decrypts with every single order on `grid` as a GFRFT key, everything else
/// known. Returns `(order, psnr)`.
pub fn gfrft_brute_force(img: &ByteImage, key: &CipherKey, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let layout = GroupLayout::new(img.width, img.height, key)?;
    let ct = encrypt_with_layout(img, key, &layout)?;
    grid.iter()
        .map(|&a| {
            let mut guess = key.with_orders(OrderVector::constant(key.group_size, a));
            guess.kind = TransformKind::Gfrft;
            let out = decrypt_with_layout(&ct, &guess, &layout)?;
            Ok((a, byte_psnr(img, &out)))
        })
        .collect()
}

/// `lo, lo + step, ..., hi` with values rounded to 1e-12.
pub fn delta_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("range needs lo <= hi and a positive step"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::cipher::{encrypt_image, magnitude_image};
    use crate::imaging::{synthetic_rgb, ByteImage};

    #[test]
    fn gradient_and_constant_images() {
        let data: Vec<u8> = (0..20 * 10).flat_map(|p| { let v = (p % 20) as u8 * 10; [v, v, v] }).collect();
        let img = ByteImage::new(20, 10, 3, data).unwrap();
        let h = adjacent_correlation(&img, Direction::Horizontal, 500, 1).unwrap();
        assert!((h.rho - 1.0).abs() < 1e-6 && !h.degenerate);
        let v = adjacent_correlation(&img, Direction::Vertical, 500, 1).unwrap();
        assert!((v.rho - 1.0).abs() < 1e-6);
        let flat = ByteImage::filled(8, 8, 3, 9).unwrap();
        let c = adjacent_correlation(&flat, Direction::Diagonal, 100, 0).unwrap();
        assert_eq!(c.rho, 0.0);
        assert!(c.degenerate);
    }

    #[test]
    fn cipher_image_decorrelates() {
        let img = synthetic_rgb(32, 32);
        for d in Direction::ALL {
            assert!(adjacent_correlation(&img, d, DEFAULT_PAIRS, 3).unwrap().rho > 0.8);
        }
        for (kind, g) in [(TransformKind::MpgfrftI, 64), (TransformKind::MpgfrftII, 16)] {
            let key = CipherKey::generate(kind, g, 4).unwrap();
            let cipher = magnitude_image(&encrypt_image(&img, &key).unwrap(), &key).unwrap();
            for d in Direction::ALL {
                let r = adjacent_correlation(&cipher, d, DEFAULT_PAIRS, 3).unwrap().rho;
                assert!(r.abs() < 0.05, "{kind} {d:?}: {r}");
            }
        }
    }

    #[test]
    fn sweep_is_minimal_at_zero() {
        let img = synthetic_rgb(8, 8);
        let key = CipherKey::generate(TransformKind::MpgfrftII, 64, 6).unwrap();
        let deltas = delta_range(-0.2, 0.2, 0.1).unwrap();
        assert_eq!(deltas, vec![-0.2, -0.1, 0.0, 0.1, 0.2]);
        let sweep = sensitivity_sweep(&img, &key, &deltas).unwrap();
        assert_eq!(sweep[2], (0.0, 0.0));
        assert!(sweep.iter().filter(|(d, _)| d.abs() >= 0.1).all(|&(_, m)| m > 0.0));
    }
}
