use num_complex::Complex64;

use super::basis::{frac_power, principal_ln, SpectralBasis};
use super::operator::{OrderVector, TransformKind};
use crate::error::{invalid, Error, Result};
use crate::linalg::{CMat, CVec, ZERO};

/// Order derivatives of an operator: slice `k` is `dF^a / da_k`.
#[derive(Debug, Clone)]
pub struct GradientTensor {
    pub slices: Vec<CMat>,
}

impl GradientTensor {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// `sum_k dir_k * slice_k`, the directional derivative.
    pub fn contract(&self, dir: &[f64]) -> CMat {
        let n = self.slices.first().map_or(0, |s| s.nrows());
        let mut out = CMat::zeros(n, n);
        for (s, &d) in self.slices.iter().zip(dir) {
            out += s * Complex64::new(d, 0.0);
        }
        out
    }
}

fn check(basis: &SpectralBasis, a: &OrderVector) -> Result<()> {
    if a.len() != basis.n() {
        return Err(invalid(format!(
            "dimension mismatch: expected {}, got {}",
            basis.n(),
            a.len()
        )));
    }
    Ok(())
}

fn ln_nonzero(l: Complex64, order: f64) -> Result<Complex64> {
    if l == ZERO {
        return Err(Error::ZeroEigenvalue { order });
    }
    Ok(principal_ln(l))
}

/// `lambda_k^{a_k} ln lambda_k`, the derivative of each type-I multiplier.
pub fn type_i_multiplier_derivs(basis: &SpectralBasis, a: &OrderVector) -> Result<CVec> {
    check(basis, a)?;
    let v: Result<Vec<_>> = basis
        .eigvals()
        .iter()
        .zip(a.as_slice())
        .map(|(&l, &ak)| Ok(frac_power(l, ak)? * ln_nonzero(l, ak)?))
        .collect();
    Ok(CVec::from_vec(v?))
}

/// `g_k = sum_j P[k, j] lambda_j^{a_k} ln lambda_j`; slice `k` of the
/// type-II gradient is `g_k F^k`.
pub fn type_ii_slice_coeffs(basis: &SpectralBasis, a: &OrderVector) -> Result<CVec> {
    check(basis, a)?;
    let p = basis.vandermonde_coeffs();
    let lam = basis.eigvals();
    let mut g = CVec::zeros(basis.n());
    for (k, &ak) in a.as_slice().iter().enumerate() {
        let mut s = ZERO;
        for (j, &l) in lam.iter().enumerate() {
            s += p[(k, j)] * frac_power(l, ak)? * ln_nonzero(l, ak)?;
        }
        g[k] = s;
    }
    Ok(g)
}

/// Type-I gradient. Slice `k` equals `lambda_k^{a_k} ln lambda_k v_k w_k^T`
/// where `w_k` is row `k` of `V^{-1}`; this is the same matrix as
/// `(sum_n P[n, k] F^n) lambda_k^{a_k} ln lambda_k` since the Lagrange
/// polynomial of node `k` evaluated at `F` is the spectral projector.
pub fn grad_mpgfrft_i(basis: &SpectralBasis, a: &OrderVector) -> Result<GradientTensor> {
    let dm = type_i_multiplier_derivs(basis, a)?;
    let v = basis.eigvecs();
    let w = basis.eigvecs_inv();
    let slices = (0..basis.n())
        .map(|k| (v.column(k) * w.row(k)) * dm[k])
        .collect();
    Ok(GradientTensor { slices })
}

/// Type-I gradient through the cached powers of `F`.
pub fn grad_mpgfrft_i_poly(basis: &SpectralBasis, a: &OrderVector) -> Result<GradientTensor> {
    let dm = type_i_multiplier_derivs(basis, a)?;
    let p = basis.vandermonde_coeffs();
    let n = basis.n();
    let slices = (0..n)
        .map(|k| basis.polynomial(&p.column(k).into_owned()) * dm[k])
        .collect();
    Ok(GradientTensor { slices })
}

/// Type-II gradient: slice `k` is `g_k F^k`.
pub fn grad_mpgfrft_ii(basis: &SpectralBasis, a: &OrderVector) -> Result<GradientTensor> {
    let g = type_ii_slice_coeffs(basis, a)?;
    let slices = basis.gft_powers().iter().enumerate().map(|(k, fk)| fk * g[k]).collect();
    Ok(GradientTensor { slices })
}

/// Gradient tensor for any kind. GFRFT uses the type-I slices; tying the
/// orders sums them.
pub fn gradient(basis: &SpectralBasis, kind: TransformKind, a: &OrderVector) -> Result<GradientTensor> {
    match kind {
        TransformKind::Gfrft | TransformKind::MpgfrftI => grad_mpgfrft_i(basis, a),
        TransformKind::MpgfrftII => grad_mpgfrft_ii(basis, a),
    }
}

/// `d/da F^a` for the scalar order.
pub fn grad_gfrft_scalar(basis: &SpectralBasis, a: f64) -> Result<CMat> {
    let dm = type_i_multiplier_derivs(basis, &OrderVector::constant(basis.n(), a))?;
    Ok(basis.assemble(&dm))
}

/// Chain rule from multiplier space to orders: entry `k` is
/// `Re sum_j gm_j dm_j / da_k`, where `gm` satisfies `dL = Re sum_j gm_j dm_j`.
pub fn orders_grad_from_multiplier_grad(
    basis: &SpectralBasis,
    kind: TransformKind,
    a: &OrderVector,
    gm: &CVec,
) -> Result<Vec<f64>> {
    check(basis, a)?;
    match kind {
        TransformKind::Gfrft | TransformKind::MpgfrftI => {
            let dm = type_i_multiplier_derivs(basis, a)?;
            Ok(gm.iter().zip(dm.iter()).map(|(g, d)| (g * d).re).collect())
        }
        TransformKind::MpgfrftII => {
            let g = type_ii_slice_coeffs(basis, a)?;
            // sum_j gm_j lambda_j^k is (Vand^T gm)_k.
            let s = basis.vandermonde().transpose() * gm;
            Ok(g.iter().zip(s.iter()).map(|(gk, sk)| (gk * sk).re).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_random_sensor_graph, shift_operator, ShiftKind};
    use crate::linalg::{max_abs, max_abs_diff};
    use crate::spectral::basis::{gft_basis, DISTINCTNESS_TOL};
    use crate::spectral::operator::FractionalOperator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn basis(n: usize, seed: u64) -> Arc<SpectralBasis> {
        let g = build_random_sensor_graph(n, seed).unwrap();
        Arc::new(gft_basis(&shift_operator(&g, ShiftKind::Laplacian), DISTINCTNESS_TOL).unwrap())
    }

    fn fd_slice(b: &Arc<SpectralBasis>, kind: TransformKind, a: &OrderVector, k: usize) -> CMat {
        let h = 1e-5;
        let mut ap = a.clone().into_vec();
        let mut am = ap.clone();
        ap[k] += h;
        am[k] -= h;
        let fp = FractionalOperator::new(b, kind, &OrderVector::new(ap).unwrap()).unwrap();
        let fm = FractionalOperator::new(b, kind, &OrderVector::new(am).unwrap()).unwrap();
        (fp.matrix() - fm.matrix()) / Complex64::new(2.0 * h, 0.0)
    }

    #[test]
    fn slices_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n, seed) in [(5, 1), (8, 2), (11, 3)] {
            let b = basis(n, seed);
            let a = OrderVector::new((0..n).map(|_| rng.random_range(-1.0..2.0)).collect()).unwrap();
            for kind in [TransformKind::MpgfrftI, TransformKind::MpgfrftII] {
                let gt = gradient(&b, kind, &a).unwrap();
                assert_eq!(gt.len(), n);
                for k in 0..n {
                    let fd = fd_slice(&b, kind, &a, k);
                    let err = max_abs_diff(&gt.slices[k], &fd) / max_abs(&fd).max(1e-12);
                    assert!(err < 1e-4, "kind {kind} n {n} slice {k}: rel err {err}");
                }
            }
        }
    }

    #[test]
    fn projector_form_equals_polynomial_form() {
        let b = basis(9, 4);
        let a = OrderVector::blocks(9, &[0.2, 0.9, -0.4]).unwrap();
        let p = grad_mpgfrft_i(&b, &a).unwrap();
        let q = grad_mpgfrft_i_poly(&b, &a).unwrap();
        for (x, y) in p.slices.iter().zip(&q.slices) {
            assert!(max_abs_diff(x, y) < 1e-6);
        }
    }

    #[test]
    fn type_ii_slices_are_multiples_of_powers() {
        let b = basis(6, 8);
        let a = OrderVector::new(vec![0.1, 0.5, 0.9, 1.3, -0.2, 0.7]).unwrap();
        let gt = grad_mpgfrft_ii(&b, &a).unwrap();
        let powers = b.gft_powers();
        for k in 0..6 {
            let mut ratio: Option<Complex64> = None;
            for (s, f) in gt.slices[k].iter().zip(powers[k].iter()) {
                if f.norm() > 1e-6 {
                    let r = s / f;
                    if let Some(r0) = ratio {
                        assert!((r - r0).norm() < 1e-8);
                    } else {
                        ratio = Some(r);
                    }
                }
            }
        }
    }

    #[test]
    fn unit_eigenvalue_gives_zero_slice() {
        let f = CMat::from_diagonal(&CVec::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ]));
        let b = SpectralBasis::from_gft_matrix(f, DISTINCTNESS_TOL).unwrap();
        let gt = grad_mpgfrft_i(&b, &OrderVector::constant(3, 0.4)).unwrap();
        let k = b.eigvals().iter().position(|l| *l == Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(max_abs(&gt.slices[k]), 0.0);
    }

    #[test]
    fn scalar_chain_rule() {
        let b = basis(7, 10);
        let a = 0.43;
        let gt = grad_mpgfrft_i(&b, &OrderVector::constant(7, a)).unwrap();
        let summed = gt.contract(&[1.0; 7]);
        let h = 1e-5;
        let bp = super::super::operator::gfrft(&b, a + h).unwrap();
        let bm = super::super::operator::gfrft(&b, a - h).unwrap();
        let fd = (bp.matrix() - bm.matrix()) / Complex64::new(2.0 * h, 0.0);
        assert!(max_abs_diff(&summed, &fd) / max_abs(&fd) < 1e-4);
        assert!(max_abs_diff(&summed, &grad_gfrft_scalar(&b, a).unwrap()) < 1e-10);
    }
}
