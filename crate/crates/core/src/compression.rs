//! Coefficient-truncation compression: the signal-adapted unitary basis,
//! fixed and learned fractional bases, block image pipelines, and the
//! RE / NRMS / CC metrics.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{build_knn_graph, pixel_coords, shift_operator, ShiftKind, WeightScheme};
use crate::learn::{self, OrderTying, TrainConfig};
use crate::linalg::{self, CMat, CVec, ONE, ZERO};
use crate::spectral::{
    gft_basis, multipliers, OrderVector, SpectralBasis, TransformKind, DISTINCTNESS_TOL,
    INVERTIBILITY_TOL,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// NRMS denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NrmsMode {
    /// `||x - x_com||_2 / ||x - mean(x)||_1`.
    #[default]
    AsPrinted,
    /// `||x - x_com||_2 / ||x - mean(x)||_2`.
    Euclidean,
}

/// CC numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcMode {
    /// `sum |(x - mu) (x_com - mu_com)|`, always non-negative.
    #[default]
    AsPrinted,
    /// Signed `Re sum conj(x - mu) (x_com - mu_com)`.
    Pearson,
}

fn centered(x: &CVec) -> CVec {
    let mu = x.sum() / Complex64::new(x.len().max(1) as f64, 0.0);
    x.map(|c| c - mu)
}

fn l1(x: &CVec) -> f64 {
    x.iter().map(|c| c.norm()).sum()
}

/// Spread indistinguishable from rounding in the mean of values of size `scale`.
fn negligible(spread: f64, scale: f64) -> bool {
    spread <= 64.0 * f64::EPSILON * scale
}

fn undefined(what: &str) -> Error {
    Error::UndefinedMetric(format!("{what} has a zero denominator"))
}

/// `||x - x_com||_1 / ||x||_1`.
pub fn relative_error(x: &CVec, x_com: &CVec) -> Result<f64> {
    let d = l1(x);
    if d == 0.0 {
        return Err(undefined("RE"));
    }
    Ok(l1(&(x - x_com)) / d)
}

pub fn nrms(x: &CVec, x_com: &CVec, mode: NrmsMode) -> Result<f64> {
    let c = centered(x);
    let (d, scale) = match mode {
        NrmsMode::AsPrinted => (l1(&c), l1(x)),
        NrmsMode::Euclidean => (linalg::norm2(&c), linalg::norm2(x)),
    };
    if negligible(d, scale) {
        return Err(undefined("NRMS"));
    }
    Ok(linalg::norm2(&(x - x_com)) / d)
}

pub fn corr_coeff(x: &CVec, x_com: &CVec, mode: CcMode) -> Result<f64> {
    let a = centered(x);
    let b = centered(x_com);
    let (na, nb) = (linalg::norm2(&a), linalg::norm2(&b));
    if negligible(na, linalg::norm2(x)) || negligible(nb, linalg::norm2(x_com)) {
        return Err(undefined("CC"));
    }
    let d = na * nb;
    let num = match mode {
        CcMode::AsPrinted => a.iter().zip(b.iter()).map(|(p, q)| (p * q).norm()).sum(),
        CcMode::Pearson => linalg::inner(&a, &b).re,
    };
    // Rounding can push a perfect match a few ulps past 1.
    Ok((num / d).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub re: f64,
    /// As printed (l1 denominator).
    pub nrms: f64,
    pub nrms_euclidean: f64,
    /// As printed (absolute products).
    pub cc: f64,
    pub cc_pearson: f64,
    pub retained: usize,
    pub ratio: f64,
}

impl CompressionReport {
    pub fn new(x: &CVec, x_com: &CVec, ratio: f64) -> Result<Self> {
        Ok(CompressionReport {
            re: relative_error(x, x_com)?,
            nrms: nrms(x, x_com, NrmsMode::AsPrinted)?,
            nrms_euclidean: nrms(x, x_com, NrmsMode::Euclidean)?,
            cc: corr_coeff(x, x_com, CcMode::AsPrinted)?,
            cc_pearson: corr_coeff(x, x_com, CcMode::Pearson)?,
            retained: retained_count(x.len(), ratio),
            ratio,
        })
    }
}

/// `max(1, floor(rN))`.
pub fn retained_count(n: usize, r: f64) -> usize {
    ((r * n as f64).floor() as usize).clamp(1, n.max(1))
}

/// Indices of the `keep` largest moduli, ties toward lower index, ascending.
pub fn top_indices(x: &CVec, keep: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].norm().total_cmp(&x[i].norm()).then(i.cmp(&j)));
    idx.truncate(keep);
    idx.sort_unstable();
    idx
}

/// Zeroes everything outside the top `max(1, floor(rN))` magnitudes.
pub fn truncate_top(x: &CVec, r: f64) -> (CVec, Vec<usize>) {
    let keep = retained_count(x.len(), r);
    let idx = top_indices(x, keep);
    let mut out = CVec::from_element(x.len(), ZERO);
    for &i in &idx {
        out[i] = x[i];
    }
    (out, idx)
}

fn check_ratio(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid(format!("ratio must be in (0, 1], got {r}")));
    }
    Ok(())
}

/// Forward transform, truncation, inverse transform.
pub fn compress(forward: &CMat, inverse: &CMat, x: &CVec, r: f64) -> Result<(CVec, CompressionReport)> {
    check_ratio(r)?;
    let n = x.len();
    if forward.shape() != (n, n) || inverse.shape() != (n, n) {
        return Err(invalid("operator shape does not match signal"));
    }
    let err = linalg::max_abs_diff(&(inverse * forward), &CMat::identity(n, n));
    if !(err < 1e-8) {
        return Err(invalid(format!("inverse does not invert forward (error {err:e})")));
    }
    let (kept, _) = truncate_top(&(forward * x), r);
    let rec = inverse * kept;
    let rep = CompressionReport::new(x, &rec, r)?;
    Ok((rec, rep))
}

/// Compression through a fractional operator given by its multipliers.
pub fn compress_spectral(basis: &SpectralBasis, m: &CVec, x: &CVec, r: f64) -> Result<(CVec, CompressionReport)> {
    check_ratio(r)?;
    let min = m.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    if !(min > INVERTIBILITY_TOL) {
        return Err(Error::NotInvertible { min_abs_diag: min });
    }
    let (kept, _) = truncate_top(&basis.apply_multipliers(m, x), r);
    let rec = basis.apply_multipliers(&m.map(|c| c.inv()), &kept);
    let rep = CompressionReport::new(x, &rec, r)?;
    Ok((rec, rep))
}

/// Unitary `Q` whose first column is `x / ||x||`; the forward transform is
/// `Q^H`, which maps `x` to `(||x||, 0, ..., 0)`.
#[derive(Debug, Clone)]
pub struct AdaptedBasis {
    pub q: CMat,
    pub forward: CMat,
    pub seed: u64,
}

impl AdaptedBasis {
    pub fn inverse(&self) -> &CMat {
        &self.q
    }
}

fn random_cvec(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Completes `x / ||x||` to a unitary basis by modified Gram-Schmidt with
/// one re-orthogonalization sweep over seeded random complex vectors.
pub fn signal_adapted_basis(x: &CVec, seed: u64) -> Result<AdaptedBasis> {
    let n = x.len();
    let norm = linalg::norm2(x);
    if n == 0 || !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid("signal must be nonzero and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = CMat::zeros(n, n);
    q.set_column(0, &(x / Complex64::new(norm, 0.0)));
    for i in 1..n {
        let mut redraws = 0;
        loop {
            let mut v = random_cvec(n, &mut rng);
            let start = linalg::norm2(&v);
            for _ in 0..2 {
                for j in 0..i {
                    let qj = q.column(j);
                    let c = qj.dotc(&v);
                    v.axpy(-c, &qj, ONE);
                }
            }
            let nv = linalg::norm2(&v);
            if nv >= 1e-12 * start.max(1.0) {
                q.set_column(i, &(v / Complex64::new(nv, 0.0)));
                break;
            }
            redraws += 1;
            if redraws >= 50 {
                return Err(Error::ConstructionFailed("Gram-Schmidt broke down 50 times".into()));
            }
        }
    }
    let forward = q.adjoint();
    Ok(AdaptedBasis { q, forward, seed })
}

/// Adapted-basis compression of one signal.
pub fn compress_adapted(x: &CVec, r: f64, seed: u64) -> Result<(CVec, CompressionReport)> {
    let b = signal_adapted_basis(x, seed)?;
    compress(&b.forward, &b.q, x, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMetric {
    #[default]
    Re,
    Nrms,
    Cc,
}

impl GridMetric {
    fn score(&self, r: &CompressionReport) -> f64 {
        match self {
            GridMetric::Re => r.re,
            GridMetric::Nrms => r.nrms,
            GridMetric::Cc => -r.cc,
        }
    }
}

/// Value range for [`grid_search_orders`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for GridRange {
    fn default() -> Self {
        GridRange { lo: 0.1, hi: 1.0, step: 0.1 }
    }
}

impl GridRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.hi >= self.lo) {
            return Err(invalid("grid needs step > 0 and hi >= lo"));
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        // Rounded to the step's decimals so 0.1 + 2 * 0.1 prints as 0.3.
        Ok((0..count).map(|i| round12(self.lo + i as f64 * self.step)).collect())
    }
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Exhaustive search over block-constant order vectors. Returns the best
/// order vector and its report; non-invertible type-II candidates are skipped.
pub fn grid_search_orders(
    basis: &SpectralBasis,
    kind: TransformKind,
    x: &CVec,
    r: f64,
    blocks: usize,
    range: GridRange,
    metric: GridMetric,
) -> Result<(OrderVector, CompressionReport)> {
    check_ratio(r)?;
    let n = basis.n();
    if x.len() != n {
        return Err(invalid("signal length does not match basis"));
    }
    let blocks = if kind == TransformKind::Gfrft { 1 } else { blocks };
    if blocks == 0 || blocks > n {
        return Err(invalid(format!("blocks must be in 1..={n}")));
    }
    let vals = range.values()?;
    let total = (vals.len() as f64).powi(blocks as i32);
    if total > 1e8 {
        return Err(invalid(format!("grid has {total:e} points; use a coarser step or fewer blocks")));
    }
    let mut best: Option<(f64, OrderVector, CompressionReport)> = None;
    let mut digits = vec![0usize; blocks];
    loop {
        let bv: Vec<f64> = digits.iter().map(|&d| vals[d]).collect();
        let a = OrderVector::blocks(n, &bv)?;
        let m = multipliers(basis, kind, &a)?;
        match compress_spectral(basis, &m, x, r) {
            Ok((_, rep)) => {
                let s = metric.score(&rep);
                if best.as_ref().is_none_or(|b| s < b.0) {
                    best = Some((s, a, rep));
                }
            }
            Err(Error::NotInvertible { .. }) => {}
            Err(e) => return Err(e),
        }
        // Odometer increment over the block digits.
        let mut k = blocks;
        loop {
            if k == 0 {
                let (_, a, rep) = best.ok_or_else(|| invalid("no invertible grid point"))?;
                return Ok((a, rep));
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < vals.len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// How each image block is compressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum BlockMethod {
    /// Signal-adapted basis per block, seeded with `seed + block index`.
    Adapted { seed: u64 },
    /// One fractional operator on the block graph for every block.
    FixedOperator { kind: TransformKind, orders: OrderVector },
    /// Orders trained per block to maximize retained energy.
    Learned { kind: TransformKind, init: f64, cfg: TrainConfig },
}

/// Per-block and whole-image results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageCompressionReport {
    pub aggregate: CompressionReport,
    pub blocks: Vec<CompressionReport>,
    /// Largest `|Re x_com - x|` over all pixels.
    pub max_abs_error: f64,
    /// Largest imaginary residue of the reconstruction.
    pub max_imag: f64,
}

/// Basis for square pixel blocks: symmetrized gaussian k-NN on the pixel
/// grid, combinatorial Laplacian as the shift.
pub fn block_basis(block: usize, knn: usize) -> Result<Arc<SpectralBasis>> {
    let g = build_knn_graph(&pixel_coords(block, block), knn, true, WeightScheme::default())?;
    Ok(Arc::new(gft_basis(&shift_operator(&g, ShiftKind::Laplacian), DISTINCTNESS_TOL)?))
}

/// Extracts the row-major blocks of an image plane.
pub fn image_blocks(img: &DMatrix<f64>, block: usize) -> Result<Vec<CVec>> {
    let (h, w) = img.shape();
    if block == 0 || h % block != 0 || w % block != 0 {
        return Err(invalid(format!("{h}x{w} image is not divisible into {block}x{block} blocks")));
    }
    let mut out = Vec::with_capacity((h / block) * (w / block));
    for br in 0..h / block {
        for bc in 0..w / block {
            let v = CVec::from_fn(block * block, |i, _| {
                Complex64::new(img[(br * block + i / block, bc * block + i % block)], 0.0)
            });
            out.push(v);
        }
    }
    Ok(out)
}

/// Inverse of [`image_blocks`] for complex block data.
pub fn assemble_blocks(blocks: &[CVec], h: usize, w: usize, block: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(h, w, ZERO);
    let per_row = w / block;
    for (b, v) in blocks.iter().enumerate() {
        let (br, bc) = (b / per_row, b % per_row);
        for i in 0..block * block {
            out[(br * block + i / block, bc * block + i % block)] = v[i];
        }
    }
    out
}

fn compress_block(
    method: &BlockMethod,
    basis: Option<&Arc<SpectralBasis>>,
    fixed_m: Option<&CVec>,
    x: &CVec,
    r: f64,
    index: usize,
) -> Result<(CVec, CompressionReport)> {
    // Constant blocks make the centered metrics undefined: NRMS is then
    // reported as 0 and CC as 1, and the aggregate is computed separately.
    // All-zero blocks reconstruct exactly, so their RE is 0.
    let rep_or_zero = |x: &CVec, rec: CVec| -> Result<(CVec, CompressionReport)> {
        match CompressionReport::new(x, &rec, r) {
            Ok(rep) => Ok((rec, rep)),
            Err(Error::UndefinedMetric(_)) => {
                let rep = CompressionReport {
                    re: relative_error(x, &rec).unwrap_or(0.0),
                    nrms: 0.0,
                    nrms_euclidean: 0.0,
                    cc: 1.0,
                    cc_pearson: 1.0,
                    retained: retained_count(x.len(), r),
                    ratio: r,
                };
                Ok((rec, rep))
            }
            Err(e) => Err(e),
        }
    };
    match method {
        BlockMethod::Adapted { seed } => {
            if linalg::norm2(x) == 0.0 {
                return rep_or_zero(x, x.clone());
            }
            let b = signal_adapted_basis(x, seed.wrapping_add(index as u64))?;
            let (kept, _) = truncate_top(&(&b.forward * x), r);
            rep_or_zero(x, &b.q * kept)
        }
        BlockMethod::FixedOperator { .. } => {
            let (basis, m) = (basis.expect("basis"), fixed_m.expect("multipliers"));
            let (kept, _) = truncate_top(&basis.apply_multipliers(m, x), r);
            rep_or_zero(x, basis.apply_multipliers(&m.map(|c| c.inv()), &kept))
        }
        BlockMethod::Learned { kind, init, cfg } => {
            let basis = basis.expect("basis");
            let n = basis.n();
            let a0 = OrderVector::constant(n, *init);
            let a = if linalg::norm2(x) == 0.0 || retained_count(n, r) == n {
                a0
            } else {
                let res = learn::train_compression_orders(basis, *kind, x, r, &a0, &OrderTying::Free, cfg)?;
                res.orders.into_iter().next().expect("one layer")
            };
            let m = multipliers(basis, *kind, &a)?;
            let (kept, _) = truncate_top(&basis.apply_multipliers(&m, x), r);
            rep_or_zero(x, basis.apply_multipliers(&m.map(|c| c.inv()), &kept))
        }
    }
}

/// Compresses each `block x block` tile independently and reassembles.
/// Returns the real part of the reconstruction.
pub fn block_compress_image(
    img: &DMatrix<f64>,
    block: usize,
    r: f64,
    method: &BlockMethod,
) -> Result<(DMatrix<f64>, ImageCompressionReport)> {
    check_ratio(r)?;
    let (h, w) = img.shape();
    let blocks = image_blocks(img, block)?;
    let basis = match method {
        BlockMethod::Adapted { .. } => None,
        _ => Some(block_basis(block, 4.min(block * block - 1))?),
    };
    let fixed_m = match method {
        BlockMethod::FixedOperator { kind, orders } => {
            let b = basis.as_ref().expect("basis");
            let m = multipliers(b, *kind, orders)?;
            let min = m.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
            if !(min > INVERTIBILITY_TOL) {
                return Err(Error::NotInvertible { min_abs_diag: min });
            }
            Some(m)
        }
        _ => None,
    };
    let work = |(i, x): (usize, &CVec)| compress_block(method, basis.as_ref(), fixed_m.as_ref(), x, r, i);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(CVec, CompressionReport)>> = blocks.par_iter().enumerate().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(CVec, CompressionReport)>> = blocks.iter().enumerate().map(work).collect();
    let mut recs = Vec::with_capacity(results.len());
    let mut reps = Vec::with_capacity(results.len());
    for res in results {
        let (rec, rep) = res?;
        recs.push(rec);
        reps.push(rep);
    }
    let all_x = CVec::from_iterator(h * w, blocks.iter().flat_map(|b| b.iter().copied()));
    let all_rec = CVec::from_iterator(h * w, recs.iter().flat_map(|b| b.iter().copied()));
    let mut aggregate = CompressionReport::new(&all_x, &all_rec, r)?;
    aggregate.retained = reps.iter().map(|b| b.retained).sum();
    let rec = assemble_blocks(&recs, h, w, block);
    let real = rec.map(|c| c.re);
    let max_abs_error = (&real - img).iter().map(|v| v.abs()).fold(0.0, f64::max);
    let max_imag = rec.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    Ok((real, ImageCompressionReport { aggregate, blocks: reps, max_abs_error, max_imag }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cvec_from_real;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn metric_examples() {
        let x = cvec_from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(relative_error(&x, &x).unwrap(), 0.0);
        assert_eq!(nrms(&x, &x, NrmsMode::AsPrinted).unwrap(), 0.0);
        assert!((corr_coeff(&x, &x, CcMode::Pearson).unwrap() - 1.0).abs() < 1e-15);
        let y = cvec_from_real(&[1.0, 2.0, 4.0]);
        assert!((relative_error(&x, &y).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let p = cvec_from_real(&[1.0, -1.0]);
        let q = cvec_from_real(&[-1.0, 1.0]);
        assert!((corr_coeff(&p, &q, CcMode::Pearson).unwrap() + 1.0).abs() < 1e-15);
        assert!((corr_coeff(&p, &q, CcMode::AsPrinted).unwrap() - 1.0).abs() < 1e-15);
        let zero = CVec::zeros(3);
        assert_eq!(relative_error(&zero, &x).unwrap_err().kind(), "undefined-metric");
        // ||e||_2 = 1, ||x - mu||_1 = 2, ||x - mu||_2 = sqrt 2.
        assert!((nrms(&x, &y, NrmsMode::AsPrinted).unwrap() - 0.5).abs() < 1e-15);
        assert!((nrms(&x, &y, NrmsMode::Euclidean).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn truncation_rules() {
        let x = CVec::from_vec(vec![c(3.0, 0.0), c(0.0, -4.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let (t, idx) = truncate_top(&x, 0.5);
        assert_eq!(idx, vec![0, 1]);
        assert_eq!(t[2], ZERO);
        let (full, _) = truncate_top(&x, 1.0);
        assert_eq!(full, x);
        let ones = CVec::from_element(4, c(1.0, 0.0));
        assert_eq!(truncate_top(&ones, 0.25).1, vec![0]);
        assert_eq!(retained_count(10, 0.01), 1);
        // Idempotent.
        let (tt, _) = truncate_top(&t, 0.5);
        assert_eq!(tt, t);
    }

    #[test]
    fn adapted_basis_concentrates() {
        let mut e = CVec::zeros(6);
        e[0] = c(5.0, 0.0);
        let b = signal_adapted_basis(&e, 3).unwrap();
        assert!((b.q[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let y = &b.forward * &e;
        assert!((y[0] - c(5.0, 0.0)).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [2usize, 17, 64] {
            let x = CVec::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, 0.0));
            let b = signal_adapted_basis(&x, n as u64).unwrap();
            let qhq = b.q.adjoint() * &b.q;
            assert!(linalg::max_abs_diff(&qhq, &CMat::identity(n, n)) < 1e-10);
            let y = &b.forward * &x;
            let tail: f64 = y.iter().skip(1).map(|v| v.norm_sqr()).sum();
            assert!(tail < 1e-20 * x.norm_squared());
            assert!((y[0].norm() - linalg::norm2(&x)).abs() < 1e-12);
        }
        assert!(signal_adapted_basis(&CVec::zeros(3), 0).is_err());
    }

    #[test]
    fn one_coefficient_is_near_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = CVec::from_fn(100, |_, _| c(rng.random::<f64>() * 10.0 - 3.0, 0.0));
        let (_, rep) = compress_adapted(&x, 0.01, 1).unwrap();
        assert_eq!(rep.retained, 1);
        assert!(rep.re < 1e-10);
        assert!(rep.cc_pearson > 1.0 - 1e-8);
    }

    #[test]
    fn compress_checks_operator_pair() {
        let f = CMat::identity(3, 3);
        let x = cvec_from_real(&[1.0, 2.0, 3.0]);
        let (rec, rep) = compress(&f, &f, &x, 1.0).unwrap();
        assert_eq!(rec, x);
        assert_eq!(rep.re, 0.0);
        let bad = CMat::identity(3, 3) * c(2.0, 0.0);
        assert_eq!(compress(&f, &bad, &x, 1.0).unwrap_err().kind(), "invalid-parameter");
    }

    #[test]
    fn grid_values_and_limits() {
        assert_eq!(GridRange::default().values().unwrap().len(), 10);
        assert_eq!(GridRange::default().values().unwrap()[2], 0.3);
        let b = block_basis(4, 4).unwrap();
        let x = CVec::from_fn(16, |i, _| c(i as f64, 0.0));
        let err = grid_search_orders(&b, TransformKind::MpgfrftI, &x, 0.5, 16, GridRange::default(), GridMetric::Re)
            .unwrap_err();
        assert_eq!(err.kind(), "invalid-parameter");
    }

    #[test]
    fn image_full_ratio_identity() {
        let img = DMatrix::from_fn(8, 8, |r, c| ((r * 31 + c * 17) % 255) as f64);
        let (out, rep) = block_compress_image(&img, 4, 1.0, &BlockMethod::Adapted { seed: 0 }).unwrap();
        assert!((out - &img).iter().all(|v| v.abs() < 1e-9));
        assert!((rep.aggregate.cc - 1.0).abs() < 1e-12);
        let fixed = BlockMethod::FixedOperator { kind: TransformKind::MpgfrftI, orders: OrderVector::constant(16, 0.4) };
        let (out, _) = block_compress_image(&img, 4, 1.0, &fixed).unwrap();
        assert!((out - &img).iter().all(|v| v.abs() < 1e-9));
        assert!(block_compress_image(&DMatrix::zeros(6, 8), 4, 1.0, &fixed).is_err());
    }
}
