//! Dense complex linear-algebra helpers shared by the transform modules.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn cvec_from_real(x: &[f64]) -> CVec {
    CVec::from_iterator(x.len(), x.iter().map(|&v| Complex64::new(v, 0.0)))
}

/// Real signal with i.i.d. standard normal entries.
pub fn random_signal(n: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CVec::from_fn(n, |_, _| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
}

pub fn real_parts(x: &CVec) -> Vec<f64> {
    x.iter().map(|c| c.re).collect()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn vec_max_abs_diff(a: &CVec, b: &CVec) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn norm2(x: &CVec) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a, b> = sum conj(a_i) b_i`.
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Lexicographic order on (re, im); the canonical eigenvalue ordering.
pub fn cmp_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Rotates `v` so its first maximal-modulus entry is real and positive.
pub fn fix_phase(v: &mut CVec) {
    let peak = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    let idx = v.iter().position(|c| c.norm() >= peak * (1.0 - 1e-9)).unwrap_or(0);
    let phase = v[idx] / v[idx].norm();
    let rot = phase.conj();
    for c in v.iter_mut() {
        *c *= rot;
    }
}

pub fn invert(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Eigensolver("matrix is singular".into()))
}

/// 1-norm condition estimate `||A||_1 ||A^{-1}||_1` from an explicit inverse.
pub fn cond1(a: &CMat, a_inv: &CMat) -> f64 {
    norm1(a) * norm1(a_inv)
}

pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a diagonalizable complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors as columns, in the order of `values`.
    pub vectors: CMat,
    pub vectors_inv: CMat,
    /// True when the Schur factor was diagonal, i.e. the matrix is normal and
    /// `vectors` is unitary.
    pub unitary: bool,
}

/// Eigendecomposition through the complex Schur form, sorted ascending by
/// real then imaginary part. Near-real eigenvalues are snapped onto the
/// real axis so that `-1` keeps the principal argument `pi`.
pub fn eigen_general(m: &CMat) -> Result<Eigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Eigensolver("matrix has non-finite entries".into()));
    }
    let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, 10_000) else {
        return normal_eigen(m);
    };
    let (q, t) = schur.unpack();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let mut off = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            off = off.max(t[(i, j)].norm());
        }
    }
    let unitary = off <= 1e-10 * scale;

    let mut raw: Vec<(Complex64, CVec)> = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let v = if unitary {
            q.column(k).into_owned()
        } else {
            let y = triangular_eigvec(&t, k, scale);
            let v = &q * y;
            let nv = norm2(&v);
            v / Complex64::new(nv, 0.0)
        };
        raw.push((snap_real(lambda), v));
    }
    finish(raw, unitary)
}

fn finish(mut raw: Vec<(Complex64, CVec)>, unitary: bool) -> Result<Eigen> {
    let n = raw.len();
    raw.sort_by(|a, b| cmp_re_im(&a.0, &b.0));
    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, (lambda, mut v)) in raw.into_iter().enumerate() {
        fix_phase(&mut v);
        vectors.set_column(k, &v);
        values.push(lambda);
    }
    let vectors_inv = if unitary {
        vectors.adjoint()
    } else {
        invert(&vectors).map_err(|_| {
            Error::Eigensolver("eigenvector matrix is singular (not diagonalizable)".into())
        })?
    };
    Ok(Eigen { values, vectors, vectors_inv, unitary })
}

/// Fallback for normal matrices on which the Schur iteration stalls (cyclic
/// permutations are the classic case): `M` shares its eigenvectors with the
/// Hermitian matrix `H + alpha K`, `H = (M + M^H)/2`, `K = (M - M^H)/2i`.
fn normal_eigen(m: &CMat) -> Result<Eigen> {
    let n = m.nrows();
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let mh = m.adjoint();
    if max_abs_diff(&(m * &mh), &(&mh * m)) > 1e-10 * scale * scale {
        return Err(Error::Eigensolver("Schur iteration did not converge".into()));
    }
    let h = (m + &mh) * Complex64::new(0.5, 0.0);
    let k = (m - &mh) * Complex64::new(0.0, -0.5);
    // Slopes whose angles are not rational multiples of pi, so symmetric
    // eigenvalue sets such as roots of unity stay separated.
    'alpha: for alpha in [0.577_215_664_901_532_9, 1.324_717_957_244_746] {
        let g = &h + &k * Complex64::new(alpha, 0.0);
        let Some(eig) = nalgebra::SymmetricEigen::try_new(g, f64::EPSILON, 10_000) else {
            continue;
        };
        let mut raw = Vec::with_capacity(n);
        for j in 0..n {
            let v = eig.eigenvectors.column(j).into_owned();
            let lambda = (v.adjoint() * m * &v)[(0, 0)];
            if norm2(&(m * &v - &v * lambda)) > 1e-9 * scale {
                continue 'alpha;
            }
            raw.push((snap_real(lambda), v));
        }
        return finish(raw, true);
    }
    Err(Error::Eigensolver("normal-matrix eigenvectors are not separated".into()))
}

fn snap_real(z: Complex64) -> Complex64 {
    if z.im.abs() <= 64.0 * f64::EPSILON * z.norm() {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Solves `(T - t_kk I) y = 0` with `y_k = 1` and `y_j = 0` for `j > k`.
fn triangular_eigvec(t: &CMat, k: usize, scale: f64) -> CVec {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let floor = f64::EPSILON * scale;
    let mut y = CVec::zeros(n);
    y[k] = ONE;
    for i in (0..k).rev() {
        let mut s = ZERO;
        for j in i + 1..=k {
            s += t[(i, j)] * y[j];
        }
        let mut d = t[(i, i)] - lambda;
        if d.norm() < floor {
            d = Complex64::new(floor, 0.0);
        }
        y[i] = -s / d;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_upper_triangular_nonnormal() {
        let m = CMat::from_row_slice(
            3,
            3,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(0.5, 0.0),
                ZERO,
                Complex64::new(3.0, 0.0),
                Complex64::new(1.0, 0.0),
                ZERO,
                ZERO,
                Complex64::new(-2.0, 0.0),
            ],
        );
        let e = eigen_general(&m).unwrap();
        assert!(!e.unitary);
        let lam = CMat::from_diagonal(&CVec::from_vec(e.values.clone()));
        let recon = &e.vectors * lam * &e.vectors_inv;
        assert!(max_abs_diff(&recon, &m) < 1e-12);
        assert!((e.values[0].re + 2.0).abs() < 1e-12);
        assert!((e.values[2].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_normal_with_conjugate_pair() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let m = to_complex(&DMatrix::from_row_slice(2, 2, &[c, -s, s, c]));
        let e = eigen_general(&m).unwrap();
        assert!(e.unitary);
        assert!((e.values[0] - e.values[1].conj()).norm() < 1e-14);
        assert!(e.values[0].im < 0.0);
    }

    #[test]
    fn minus_one_is_snapped_real() {
        let m = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let e = eigen_general(&m).unwrap();
        assert_eq!(e.values[0].im, 0.0);
        assert!((e.values[0].re + 1.0).abs() < 1e-14);
    }
}
