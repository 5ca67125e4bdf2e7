//! Spectral filtering, synthetic bandlimited signals with structured noise,
//! quality metrics and the per-block image denoising pipeline.
//!
//! Training is supervised by the clean signal: this measures how well a
//! transform family can separate signal from noise, it is not a blind
//! denoiser.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::compression::{assemble_blocks, block_basis, image_blocks};
use crate::error::{invalid, Error, Result};
use crate::learn::{self, DiagonalFilter, FilterMode, OrderTying, TrainConfig};
use crate::linalg::{self, CVec, ZERO};
use crate::spectral::{
    multipliers, FractionalOperator, OrderVector, SpectralBasis, TransformKind, INVERTIBILITY_TOL,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Stand-in for an infinite SNR or PSNR.
pub const INFINITE_DB: f64 = f64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    /// Number of noise coefficients inside the signal band.
    pub overlap: usize,
    /// Signal band width `K`.
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub snr_db: f64,
    pub mse: f64,
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
}

fn inverse_multipliers(basis: &SpectralBasis, kind: TransformKind, a: &OrderVector) -> Result<CVec> {
    let m = multipliers(basis, kind, a)?;
    let min = m.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    if !(min > INVERTIBILITY_TOL) {
        return Err(Error::NotInvertible { min_abs_diag: min });
    }
    Ok(m.map(|c| c.inv()))
}

fn complex_gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> Complex64 {
    let s = sigma / std::f64::consts::SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Unit-norm signal whose transform under `a_ori` vanishes outside the
/// first `k` entries.
pub fn make_bandlimited_signal(
    basis: &SpectralBasis,
    kind: TransformKind,
    a_ori: &OrderVector,
    k: usize,
    seed: u64,
) -> Result<CVec> {
    let n = basis.n();
    if k == 0 || k > n {
        return Err(invalid(format!("band width must be in 1..={n}, got {k}")));
    }
    let inv = inverse_multipliers(basis, kind, a_ori)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = CVec::from_fn(n, |i, _| if i < k { complex_gaussian(&mut rng, 1.0) } else { ZERO });
    let x = basis.apply_multipliers(&inv, &spec);
    let norm = linalg::norm2(&x);
    Ok(x / Complex64::new(norm, 0.0))
}

/// Noise whose transform under `a_ori` is supported on `{K - c0, ..., N - 1}`
/// with complex gaussian coefficients of standard deviation `sigma`.
pub fn make_structured_noise(
    basis: &SpectralBasis,
    kind: TransformKind,
    a_ori: &OrderVector,
    spec: &NoiseSpec,
) -> Result<CVec> {
    let n = basis.n();
    if spec.overlap > spec.k || spec.k > n {
        return Err(invalid("need overlap <= K <= N"));
    }
    if !(spec.sigma >= 0.0) {
        return Err(invalid("sigma must be non-negative"));
    }
    let inv = inverse_multipliers(basis, kind, a_ori)?;
    let start = spec.k - spec.overlap;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coeffs =
        CVec::from_fn(n, |i, _| if i >= start { complex_gaussian(&mut rng, spec.sigma) } else { ZERO });
    Ok(basis.apply_multipliers(&inv, &coeffs))
}

/// `F^{-1} H F y`.
pub fn spectral_filter(op: &FractionalOperator, h: &DiagonalFilter, y: &CVec) -> Result<CVec> {
    if h.len() != op.n() {
        return Err(invalid("filter length does not match operator"));
    }
    let t = op.apply(y)?;
    let u = CVec::from_iterator(t.len(), t.iter().zip(&h.h).map(|(ti, &hi)| ti * hi));
    op.inverse_apply(&u)
}

/// `20 log10(||x|| / ||x - x~||)`; [`INFINITE_DB`] for an exact match.
pub fn snr_db(x: &CVec, x_hat: &CVec) -> f64 {
    let err = linalg::norm2(&(x - x_hat));
    if err == 0.0 {
        return INFINITE_DB;
    }
    20.0 * (linalg::norm2(x) / err).log10()
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "mse length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len().max(1) as f64
}

/// `10 log10(peak^2 / MSE)`; [`INFINITE_DB`] for identical inputs.
pub fn psnr_db(a: &[f64], b: &[f64], peak: f64) -> f64 {
    let m = mse(a, b);
    if m == 0.0 {
        return INFINITE_DB;
    }
    10.0 * (peak * peak / m).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams { window: 8, k1: 0.01, k2: 0.03, dynamic_range: 255.0 }
    }
}

/// Mean SSIM over non-overlapping windows, population statistics.
pub fn ssim(a: &DMatrix<f64>, b: &DMatrix<f64>, p: SsimParams) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(invalid("images differ in shape"));
    }
    let (h, w) = a.shape();
    let win = p.window;
    if win == 0 || h < win || w < win {
        return Err(invalid(format!("image {h}x{w} is smaller than the {win}x{win} window")));
    }
    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let count = (win * win) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for r0 in (0..=h - win).step_by(win) {
        for c0 in (0..=w - win).step_by(win) {
            let va = a.view((r0, c0), (win, win));
            let vb = b.view((r0, c0), (win, win));
            let ma = va.sum() / count;
            let mb = vb.sum() / count;
            let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
            for (x, y) in va.iter().zip(vb.iter()) {
                saa += (x - ma) * (x - ma);
                sbb += (y - mb) * (y - mb);
                sab += (x - ma) * (y - mb);
            }
            let (saa, sbb, sab) = (saa / count, sbb / count, sab / count);
            total += ((2.0 * ma * mb + c1) * (2.0 * sab + c2))
                / ((ma * ma + mb * mb + c1) * (saa + sbb + c2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Image quality of `out` against `clean`, 8-bit scale.
pub fn image_quality(clean: &DMatrix<f64>, out: &DMatrix<f64>) -> Result<QualityReport> {
    let x = linalg::cvec_from_real(clean.as_slice());
    let y = linalg::cvec_from_real(out.as_slice());
    Ok(QualityReport {
        snr_db: snr_db(&x, &y),
        mse: mse(clean.as_slice(), out.as_slice()),
        psnr_db: Some(psnr_db(clean.as_slice(), out.as_slice(), 255.0)),
        ssim: Some(ssim(clean, out, SsimParams::default())?),
    })
}

/// Settings for [`block_denoise_image`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenoiseConfig {
    pub block: usize,
    pub knn: usize,
    pub kind: TransformKind,
    pub init_order: f64,
    pub train: TrainConfig,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            block: 8,
            knn: 4,
            kind: TransformKind::MpgfrftI,
            init_order: 0.5,
            train: TrainConfig { learning_rate: 0.005, epochs: 300, ..TrainConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub input: QualityReport,
    pub output: QualityReport,
    /// Learned order vector of each block.
    pub block_orders: Vec<OrderVector>,
}

/// Trains orders and a learnable filter per block against the clean image
/// and reassembles the filtered blocks.
pub fn block_denoise_image(
    noisy: &DMatrix<f64>,
    clean: &DMatrix<f64>,
    cfg: &DenoiseConfig,
) -> Result<(DMatrix<f64>, DenoiseReport)> {
    if noisy.shape() != clean.shape() {
        return Err(invalid("noisy and clean images differ in shape"));
    }
    let (h, w) = noisy.shape();
    let ys = image_blocks(noisy, cfg.block)?;
    let xs = image_blocks(clean, cfg.block)?;
    let basis = block_basis(cfg.block, cfg.knn)?;
    let n = basis.n();
    let a0 = OrderVector::constant(n, cfg.init_order);
    let work = |(y, x): (&CVec, &CVec)| -> Result<(CVec, OrderVector)> {
        denoise_block(&basis, cfg, &a0, y, x)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(CVec, OrderVector)>> = ys.par_iter().zip(xs.par_iter()).map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(CVec, OrderVector)>> = ys.iter().zip(xs.iter()).map(work).collect();
    let mut outs = Vec::with_capacity(results.len());
    let mut orders = Vec::with_capacity(results.len());
    for r in results {
        let (o, a) = r?;
        outs.push(o);
        orders.push(a);
    }
    let out = assemble_blocks(&outs, h, w, cfg.block).map(|c| c.re);
    let report = DenoiseReport {
        input: image_quality(clean, noisy)?,
        output: image_quality(clean, &out)?,
        block_orders: orders,
    };
    Ok((out, report))
}

fn denoise_block(
    basis: &Arc<SpectralBasis>,
    cfg: &DenoiseConfig,
    a0: &OrderVector,
    y: &CVec,
    x: &CVec,
) -> Result<(CVec, OrderVector)> {
    let res = learn::train_order_and_filter(
        basis,
        cfg.kind,
        y,
        x,
        FilterMode::Learnable,
        a0,
        &OrderTying::Free,
        &cfg.train,
    )?;
    let a = res.orders.into_iter().next().expect("one order vector");
    let filter = res.filter.expect("filter is always returned");
    let out = learn::apply_learned_filter(basis, cfg.kind, &a, &filter, y)?;
    Ok((out, a))
}

/// Adds i.i.d. gaussian noise of standard deviation `sigma` (no clipping).
pub fn add_gaussian_noise(img: &DMatrix<f64>, sigma: f64, seed: u64) -> Result<DMatrix<f64>> {
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(img.map(|v| v + normal.sample(&mut rng)))
}
