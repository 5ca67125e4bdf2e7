//! Invariant suites shared by the `selftest` command and the acceptance
//! tests. Every check reports the worst observed value next to the
//! threshold it was held to.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compression::{block_compress_image, compress_adapted, BlockMethod};
use crate::crypto::{self, chaos, CipherKey};
use crate::error::Result;
use crate::graph::{build_knn_graph, build_random_sensor_graph, build_random_weighted_graph, shift_operator, Graph, ShiftKind, WeightScheme};
use crate::imaging::{random_rgb, synthetic_gray, synthetic_rgb};
use crate::learn::{loss_grad_wrt_orders, mse_grad, mse_loss, Activation};
use crate::linalg::{max_abs, max_abs_diff, CMat, CVec};
use crate::spectral::{
    gft_basis, gradient, multipliers, type_ii_coefficients, FractionalOperator, OrderVector, SpectralBasis,
    TransformKind, DISTINCTNESS_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    /// Worst observed value.
    pub value: f64,
    pub threshold: f64,
    pub seconds: f64,
}

impl CheckOutcome {
    fn below(suite: &str, check: &str, value: f64, threshold: f64, t: Instant) -> Self {
        CheckOutcome {
            suite: suite.into(),
            check: check.into(),
            passed: value < threshold,
            value,
            threshold,
            seconds: t.elapsed().as_secs_f64(),
        }
    }

    fn above(suite: &str, check: &str, value: f64, threshold: f64, t: Instant) -> Self {
        CheckOutcome { passed: value > threshold, ..Self::below(suite, check, value, threshold, t) }
    }
}

const KINDS: [TransformKind; 2] = [TransformKind::MpgfrftI, TransformKind::MpgfrftII];

/// Random symmetric graph with a basis of distinct eigenvalues. Degenerate
/// draws are skipped.
pub fn random_symmetric_basis(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize) -> Arc<SpectralBasis> {
    loop {
        let n = rng.random_range(n_min..=n_max);
        let seed: u64 = rng.random();
        let g: Result<Graph> = match rng.random_range(0..3) {
            0 => build_random_sensor_graph(n, seed),
            1 => build_random_weighted_graph(n, 0.3, seed),
            _ => {
                let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
                build_knn_graph(&pts, 3.min(n - 1), true, WeightScheme::default())
            }
        };
        let kind = [ShiftKind::Adjacency, ShiftKind::Laplacian, ShiftKind::NormalizedLaplacian][rng.random_range(0..3)];
        if let Ok(b) = g.and_then(|g| gft_basis(&shift_operator(&g, kind), DISTINCTNESS_TOL)) {
            return Arc::new(b);
        }
    }
}

fn random_orders(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> OrderVector {
    OrderVector::new((0..n).map(|_| rng.random_range(lo..hi)).collect()).expect("finite")
}

fn op(b: &Arc<SpectralBasis>, kind: TransformKind, a: &OrderVector) -> Result<CMat> {
    Ok(FractionalOperator::new(b, kind, a)?.matrix().clone())
}

/// a = 0 gives I, a = 1 gives F, constant a gives the GFRFT, for both kinds.
pub fn reductions(seed: u64, graphs: usize) -> Result<Vec<CheckOutcome>> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut e0, mut e1, mut ec) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..graphs {
        let b = random_symmetric_basis(&mut rng, 4, 32);
        let n = b.n();
        let c = rng.random_range(-1.5..1.5);
        let g = FractionalOperator::new(&b, TransformKind::Gfrft, &OrderVector::constant(n, c))?;
        for kind in KINDS {
            e0 = e0.max(max_abs_diff(&op(&b, kind, &OrderVector::zeros(n))?, &CMat::identity(n, n)));
            e1 = e1.max(max_abs_diff(&op(&b, kind, &OrderVector::constant(n, 1.0))?, b.gft()));
            ec = ec.max(max_abs_diff(&op(&b, kind, &OrderVector::constant(n, c))?, g.matrix()));
        }
    }
    let s = "reductions";
    Ok(vec![
        CheckOutcome::below(s, "a=0 is identity", e0, 1e-8, t),
        CheckOutcome::below(s, "a=1 is the GFT", e1, 1e-8, t),
        CheckOutcome::below(s, "constant a is the GFRFT", ec, 1e-8, t),
    ])
}

/// Type-I unitarity, index additivity and inverse by negation; a type-II
/// additivity counterexample on N = 6.
pub fn unitarity_additivity(seed: u64, triples: usize) -> Result<Vec<CheckOutcome>> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut eu, mut ea, mut ei) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..triples {
        let b = random_symmetric_basis(&mut rng, 4, 64);
        let n = b.n();
        let a = random_orders(&mut rng, n, -1.0, 2.0);
        let c = random_orders(&mut rng, n, -1.0, 2.0);
        let fa = op(&b, TransformKind::MpgfrftI, &a)?;
        let fc = op(&b, TransformKind::MpgfrftI, &c)?;
        let fac = op(&b, TransformKind::MpgfrftI, &a.add(&c)?)?;
        eu = eu.max(max_abs_diff(&(&fa * fa.adjoint()), &CMat::identity(n, n)));
        ea = ea.max(max_abs_diff(&(&fa * &fc), &fac));
        let fneg = op(&b, TransformKind::MpgfrftI, &a.neg())?;
        ei = ei.max(max_abs_diff(&(&fa * fneg), &CMat::identity(n, n)));
    }
    let mut worst_ii = 0.0f64;
    for _ in 0..20 {
        let b = random_symmetric_basis(&mut rng, 6, 6);
        let a = random_orders(&mut rng, 6, 0.0, 1.0);
        let c = random_orders(&mut rng, 6, 0.0, 1.0);
        let lhs = op(&b, TransformKind::MpgfrftII, &a)? * op(&b, TransformKind::MpgfrftII, &c)?;
        worst_ii = worst_ii.max(max_abs_diff(&lhs, &op(&b, TransformKind::MpgfrftII, &a.add(&c)?)?));
        if worst_ii > 1e-3 {
            break;
        }
    }
    let s = "unitarity-additivity";
    Ok(vec![
        CheckOutcome::below(s, "type I is unitary", eu, 1e-8, t),
        CheckOutcome::below(s, "type I is index additive", ea, 1e-8, t),
        CheckOutcome::below(s, "type I inverse is order negation", ei, 1e-8, t),
        CheckOutcome::above(s, "type II additivity fails on N=6", worst_ii, 1e-3, t),
    ])
}

/// Cyclic shift on `n` nodes: a unitary GFT whose eigenvalues are the
/// `n`-th roots of unity.
pub fn cyclic_shift_basis(n: usize) -> Result<SpectralBasis> {
    let f = CMat::from_fn(n, n, |i, j| if (i + 1) % n == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    SpectralBasis::from_gft_matrix(f, DISTINCTNESS_TOL)
}

/// Inverse DFT of `lambda^{a_n}` evaluated entry by entry: with
/// `lambda_j = exp(-2 pi i k_j / N)`, entry `n` is
/// `(1/N) sum_j lambda_j^{a_n} exp(2 pi i k_j n / N)`.
pub fn idft_coefficients(eigvals: &[Complex64], a: &OrderVector) -> Result<CVec> {
    let n = eigvals.len();
    let mut out = CVec::zeros(n);
    for (row, &an) in a.as_slice().iter().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for &l in eigvals {
            let k = (-l.arg() * n as f64 / (2.0 * PI)).round();
            s += crate::spectral::frac_power(l, an)? * Complex64::from_polar(1.0, 2.0 * PI * k * row as f64 / n as f64);
        }
        out[row] = s / n as f64;
    }
    Ok(out)
}

/// Spectral vs polynomial construction, and type-II coefficients on the
/// cycle against the inverse DFT.
pub fn form_equivalence(seed: u64, cases: usize) -> Result<Vec<CheckOutcome>> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for _ in 0..cases {
        let b = random_symmetric_basis(&mut rng, 3, 16);
        let a = random_orders(&mut rng, b.n(), -1.0, 2.0);
        let spec_i = op(&b, TransformKind::MpgfrftI, &a)?;
        e1 = e1.max(max_abs_diff(&spec_i, crate::spectral::mpgfrft_i_poly(&b, &a)?.matrix()));
        let spec_ii = op(&b, TransformKind::MpgfrftII, &a)?;
        e2 = e2.max(max_abs_diff(&spec_ii, crate::spectral::mpgfrft_ii_poly(&b, &a)?.matrix()));
    }
    let mut ec = 0.0f64;
    for n in 3..=16 {
        let b = cyclic_shift_basis(n)?;
        let a = random_orders(&mut rng, n, -1.0, 2.0);
        let c = type_ii_coefficients(&b, &a)?;
        let oracle = idft_coefficients(b.eigvals(), &a)?;
        ec = ec.max(crate::linalg::vec_max_abs_diff(&c, &oracle));
    }
    let s = "form-equivalence";
    Ok(vec![
        CheckOutcome::below(s, "type I spectral = polynomial", e1, 1e-6, t),
        CheckOutcome::below(s, "type II spectral = polynomial", e2, 1e-6, t),
        CheckOutcome::below(s, "cycle type-II coefficients = inverse DFT", ec, 1e-8, t),
    ])
}

fn fd_tensor_error(b: &Arc<SpectralBasis>, kind: TransformKind, a: &OrderVector) -> Result<f64> {
    let h = 1e-5;
    let g = gradient(b, kind, a)?;
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for k in 0..b.n() {
        let mut ap = a.clone().into_vec();
        let mut am = ap.clone();
        ap[k] += h;
        am[k] -= h;
        let fd = (op(b, kind, &OrderVector::new(ap)?)? - op(b, kind, &OrderVector::new(am)?)?) / Complex64::new(2.0 * h, 0.0);
        num = num.max(max_abs_diff(&g.slices[k], &fd));
        den = den.max(max_abs(&fd));
    }
    Ok(num / den.max(1e-300))
}

fn fd_loss_error(b: &Arc<SpectralBasis>, kind: TransformKind, a: &OrderVector, x: &CVec, y: &CVec, act: Activation) -> Result<f64> {
    let h = 1e-5;
    let loss = |a: &OrderVector| -> Result<f64> {
        let m = multipliers(b, kind, a)?;
        Ok(mse_loss(&act.forward(&b.apply_multipliers(&m, x)), y))
    };
    let m = multipliers(b, kind, a)?;
    let u = b.apply_multipliers(&m, x);
    let g = loss_grad_wrt_orders(b, kind, a, &mse_grad(&act.forward(&u), y), x, act)?;
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for k in 0..b.n() {
        let mut ap = a.clone().into_vec();
        let mut am = ap.clone();
        ap[k] += h;
        am[k] -= h;
        let fd = (loss(&OrderVector::new(ap)?)? - loss(&OrderVector::new(am)?)?) / (2.0 * h);
        num = num.max((g[k] - fd).abs());
        den = den.max(fd.abs());
    }
    Ok(num / den.max(1e-300))
}

/// Analytical gradient tensors and end-to-end loss gradients against
/// central differences with step 1e-5.
pub fn gradients(seed: u64, pairs: usize) -> Result<Vec<CheckOutcome>> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut et, mut el) = (0.0f64, 0.0f64);
    for i in 0..pairs {
        let b = random_symmetric_basis(&mut rng, 3, 12);
        let n = b.n();
        let a = random_orders(&mut rng, n, -1.0, 2.0);
        let x = CVec::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let y = CVec::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let act = if i % 2 == 0 { Activation::Identity } else { Activation::Tanh };
        for kind in KINDS {
            et = et.max(fd_tensor_error(&b, kind, &a)?);
            el = el.max(fd_loss_error(&b, kind, &a, &x, &y, act)?);
        }
    }
    let s = "gradients";
    Ok(vec![
        CheckOutcome::below(s, "gradient tensors match finite differences", et, 1e-4, t),
        CheckOutcome::below(s, "loss gradients match finite differences", el, 1e-4, t),
    ])
}

/// One retained coefficient of the signal-adapted basis reconstructs the
/// signal; the block image variant keeps every pixel.
pub fn adapted_compression(seed: u64, signals: usize, image_size: usize, block: usize) -> Result<Vec<CheckOutcome>> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut re, mut cc) = (0.0f64, 1.0f64);
    for i in 0..signals {
        let n = rng.random_range(2..=128);
        let x = CVec::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (_, rep) = compress_adapted(&x, 1.0 / n as f64, seed.wrapping_add(i as u64))?;
        re = re.max(rep.re);
        cc = cc.min(rep.cc_pearson);
    }
    let mut out = vec![
        CheckOutcome::below("adapted-compression", "relative error with one coefficient", re, 1e-10, t),
        CheckOutcome::above("adapted-compression", "pearson correlation with one coefficient", cc, 1.0 - 1e-8, t),
    ];
    let t = Instant::now();
    let img = synthetic_gray(image_size);
    let range = img.max() - img.min();
    let (rec, _) = block_compress_image(&img, block, 0.005, &BlockMethod::Adapted { seed })?;
    let err = (rec - &img).amax() / range;
    out.push(CheckOutcome::below("adapted-compression", "block image max error / range", err, 1e-6, t));
    Ok(out)
}

/// DNA coding, logistic permutations and the confusion layer.
pub fn dna_chaos(seed: u64) -> Result<Vec<CheckOutcome>> {
    let t = Instant::now();
    let s = "dna-chaos";
    let all: Vec<u8> = (0..=255).collect();
    let mut failures = 0.0;
    for rule in 1..=8 {
        if crypto::dna_decode(&crypto::dna_encode(&all, rule)?, rule)? != all {
            failures += 1.0;
        }
        let m = crypto::dna_encode(&all.iter().rev().copied().collect::<Vec<_>>(), rule)?;
        let x = crypto::dna_encode(&all, rule)?;
        if crypto::dna_xor(&crypto::dna_xor(&x, &m, rule)?, &m, rule)? != x {
            failures += 1.0;
        }
    }
    let mut out = vec![CheckOutcome::below(s, "DNA round trip and XOR involution failures", failures, 0.5, t)];

    let t = Instant::now();
    let mut bad = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [1usize, 2, 10, 1000, 10_000] {
        let key = crypto::ChaosKey::new(rng.random_range(0.05..0.45), rng.random_range(3.9..4.0))?;
        let p = crypto::chaotic_permutation(&key, n)?;
        if !chaos::is_permutation(&p) {
            bad += 1.0;
        }
    }
    let hand = crypto::ChaosKey { x0: 0.3, eta: 3.99, burn_in: 0 };
    if crypto::chaotic_permutation(&hand, 4)? != vec![3, 1, 0, 2] {
        bad += 1.0;
    }
    out.push(CheckOutcome::below(s, "chaotic permutation failures", bad, 0.5, t));

    let t = Instant::now();
    let img = synthetic_rgb(16, 16);
    let key = CipherKey::generate(TransformKind::MpgfrftI, 64, seed)?;
    let flat = crypto::cipher::confuse(&img, &key)?;
    let back = crypto::cipher::unconfuse(&flat, 16, 16, &key)?;
    let diff = img.data.iter().zip(&back.data).filter(|(a, b)| a != b).count() as f64;
    out.push(CheckOutcome::below(s, "confusion layer inverse mismatches", diff, 0.5, t));

    let t = Instant::now();
    let img = random_rgb(8, 8, seed);
    let mut mism = 0.0;
    for kind in KINDS {
        let key = CipherKey::generate(kind, 64, seed ^ 0x5eed)?;
        let ct = crypto::encrypt_image(&img, &key)?;
        let dec = crypto::decrypt_image(&ct, &key)?;
        mism += img.data.iter().zip(&dec.data).filter(|(a, b)| a != b).count() as f64;
    }
    out.push(CheckOutcome::below(s, "encryption round trip mismatches", mism, 0.5, t));
    Ok(out)
}

/// Suites 1-4, the adapted compression suite and the DNA/chaos checks.
pub fn run_selftest(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = reductions(seed, 50)?;
    out.extend(unitarity_additivity(seed.wrapping_add(1), 100)?);
    out.extend(form_equivalence(seed.wrapping_add(2), 40)?);
    out.extend(gradients(seed.wrapping_add(3), 20)?);
    out.extend(adapted_compression(seed.wrapping_add(4), 500, 256, 16)?);
    out.extend(dna_chaos(seed.wrapping_add(5))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let mut all = reductions(1, 5).unwrap();
        all.extend(unitarity_additivity(2, 5).unwrap());
        all.extend(form_equivalence(3, 5).unwrap());
        all.extend(gradients(4, 2).unwrap());
        all.extend(adapted_compression(5, 20, 32, 8).unwrap());
        all.extend(dna_chaos(6).unwrap());
        for c in &all {
            assert!(c.passed, "{} / {}: {} vs {}", c.suite, c.check, c.value, c.threshold);
        }
    }

    #[test]
    fn cyclic_shift_has_roots_of_unity() {
        let b = cyclic_shift_basis(5).unwrap();
        assert!(b.is_unitary());
        for l in b.eigvals() {
            assert!((l.powu(5) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
