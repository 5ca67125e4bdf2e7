use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::ShiftOperator;
use crate::linalg::{self, CMat, CVec, ONE};

/// Default eigenvalue distinctness tolerance, relative to the spectral radius.
pub const DISTINCTNESS_TOL: f64 = 1e-8;

/// Vandermonde condition estimates above this attach a warning to operators.
pub const CONDITION_WARNING: f64 = 1e12;

/// Principal logarithm with `Arg` in `(-pi, pi]`.
pub fn principal_ln(z: Complex64) -> Complex64 {
    let arg = if z.im == 0.0 && z.re < 0.0 { std::f64::consts::PI } else { z.arg() };
    Complex64::new(z.norm().ln(), arg)
}

/// `z^a` on the principal branch.
pub fn frac_power(z: Complex64, a: f64) -> Result<Complex64> {
    if z == linalg::ZERO {
        return if a > 0.0 {
            Ok(linalg::ZERO)
        } else if a == 0.0 {
            Ok(ONE)
        } else {
            Err(Error::ZeroEigenvalue { order: a })
        };
    }
    Ok((principal_ln(z) * a).exp())
}

/// Eigendecomposition of a graph Fourier matrix `F = V diag(lambda) V^{-1}`
/// together with the Vandermonde data used by the polynomial forms.
#[derive(Debug)]
pub struct SpectralBasis {
    gft: CMat,
    eigvecs: CMat,
    eigvecs_inv: CMat,
    eigvals: Vec<Complex64>,
    unitary: bool,
    gso_eigvals: Option<Vec<Complex64>>,
    /// `vand[(j, n)] = lambda_j^n`.
    vand: CMat,
    coeffs: CMat,
    vand_cond: f64,
    powers: OnceLock<Vec<CMat>>,
}

impl SpectralBasis {
    /// Builds the basis from a shift operator: `F = U^{-1}` with the
    /// columns of `U` ordered by ascending eigenvalue of `Z`.
    ///
    /// For a symmetric `Z` every eigenvector is signed so its largest entry
    /// is positive, then the last column is flipped if needed so that
    /// `det U = (-1)^N`. This keeps `+1` out of the spectrum of `F`, which
    /// would otherwise pin one order (its logarithm vanishes).
    pub fn from_shift(z: &ShiftOperator, tol: f64) -> Result<Self> {
        let n = z.n();
        if n == 0 {
            return Err(Error::InvalidParameter("empty shift operator".into()));
        }
        if z.is_symmetric() {
            let eig = z.matrix.clone().symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| {
                eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j))
            });
            let mut u = DMatrix::<f64>::zeros(n, n);
            for (k, &src) in order.iter().enumerate() {
                let mut col = eig.eigenvectors.column(src).into_owned();
                let peak = col.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let first = col.iter().position(|v| v.abs() >= peak * (1.0 - 1e-9)).unwrap_or(0);
                if col[first] < 0.0 {
                    col = -col;
                }
                u.set_column(k, &col);
            }
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            if u.determinant() * want < 0.0 {
                let last = -u.column(n - 1).into_owned();
                u.set_column(n - 1, &last);
            }
            let gso: Vec<Complex64> =
                order.iter().map(|&i| Complex64::new(eig.eigenvalues[i], 0.0)).collect();
            let f = linalg::to_complex(&u.transpose());
            let mut basis = Self::from_gft_matrix(f, tol)?;
            basis.gso_eigvals = Some(gso);
            Ok(basis)
        } else {
            let e = linalg::eigen_general(&linalg::to_complex(&z.matrix))?;
            let mut basis = Self::from_gft_matrix(e.vectors_inv, tol)?;
            basis.gso_eigvals = Some(e.values);
            Ok(basis)
        }
    }

    /// Builds the basis from an explicit transform matrix `F`.
    pub fn from_gft_matrix(f: CMat, tol: f64) -> Result<Self> {
        let n = f.nrows();
        let e = linalg::eigen_general(&f)?;
        let lam = &e.values;
        let radius = lam.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let gap = (lam[i] - lam[j]).norm();
                if gap <= tol * radius && worst.is_none_or(|w| gap < w.2) {
                    worst = Some((i, j, gap));
                }
            }
        }
        if let Some((i, j, gap)) = worst {
            return Err(Error::DegenerateSpectrum { i, j, gap });
        }
        let vand = CMat::from_fn(n, n, |j, k| ipow(lam[j], k));
        let coeffs = vand
            .clone()
            .lu()
            .solve(&CMat::identity(n, n))
            .ok_or(Error::DegenerateSpectrum { i: 0, j: 0, gap: 0.0 })?;
        let vand_cond = linalg::cond1(&vand, &coeffs);
        Ok(SpectralBasis {
            gft: f,
            eigvecs: e.vectors,
            eigvecs_inv: e.vectors_inv,
            eigvals: e.values,
            unitary: e.unitary,
            gso_eigvals: None,
            vand,
            coeffs,
            vand_cond,
            powers: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.eigvals.len()
    }

    /// The graph Fourier matrix `F`.
    pub fn gft(&self) -> &CMat {
        &self.gft
    }

    /// Eigenvectors `V` of `F` as columns.
    pub fn eigvecs(&self) -> &CMat {
        &self.eigvecs
    }

    pub fn eigvecs_inv(&self) -> &CMat {
        &self.eigvecs_inv
    }

    pub fn eigvals(&self) -> &[Complex64] {
        &self.eigvals
    }

    /// Whether `V` is unitary (F normal, e.g. for symmetric shift operators).
    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Sorted eigenvalues of the shift operator, when built from one.
    pub fn gso_eigvals(&self) -> Option<&[Complex64]> {
        self.gso_eigvals.as_deref()
    }

    /// Vandermonde matrix with `[j, n] = lambda_j^n`.
    pub fn vandermonde(&self) -> &CMat {
        &self.vand
    }

    /// `P`, the inverse of the Vandermonde matrix.
    pub fn vandermonde_coeffs(&self) -> &CMat {
        &self.coeffs
    }

    /// 1-norm condition estimate of the Vandermonde matrix.
    pub fn vandermonde_condition(&self) -> f64 {
        self.vand_cond
    }

    /// `[F^0, ..., F^{N-1}]`, computed on first use.
    pub fn gft_powers(&self) -> &[CMat] {
        self.powers.get_or_init(|| {
            let n = self.n();
            let mut out = Vec::with_capacity(n);
            let mut cur = CMat::identity(n, n);
            for _ in 0..n {
                let next = &cur * &self.gft;
                out.push(cur);
                cur = next;
            }
            out
        })
    }

    /// `V diag(m) V^{-1}`.
    pub fn assemble(&self, m: &CVec) -> CMat {
        let mut scaled = self.eigvecs.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= m[j];
        }
        scaled * &self.eigvecs_inv
    }

    /// `V diag(m) V^{-1} x` without forming the matrix.
    pub fn apply_multipliers(&self, m: &CVec, x: &CVec) -> CVec {
        let z = &self.eigvecs_inv * x;
        &self.eigvecs * z.component_mul(m)
    }

    /// `sum_n c_n F^n` from the cached powers.
    pub fn polynomial(&self, c: &CVec) -> CMat {
        let n = self.n();
        let mut out = CMat::zeros(n, n);
        for (k, p) in self.gft_powers().iter().enumerate() {
            out += p * c[k];
        }
        out
    }
}

/// `z^k` by repeated multiplication.
pub(crate) fn ipow(z: Complex64, k: usize) -> Complex64 {
    let mut out = ONE;
    for _ in 0..k {
        out *= z;
    }
    out
}

/// Convenience wrapper matching the usual call shape.
pub fn gft_basis(z: &ShiftOperator, tol: f64) -> Result<SpectralBasis> {
    SpectralBasis::from_shift(z, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle_graph, build_random_sensor_graph, shift_operator, Graph, ShiftKind};
    use std::f64::consts::PI;

    #[test]
    fn frac_power_branch() {
        assert_eq!(frac_power(ONE, 0.37).unwrap(), ONE);
        let i = frac_power(Complex64::new(-1.0, 0.0), 0.5).unwrap();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let neg_zero = frac_power(Complex64::new(-1.0, -0.0), 0.5).unwrap();
        assert!((neg_zero - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let z = Complex64::from_polar(1.0, PI / 3.0);
        assert!((frac_power(z, 3.0).unwrap() + ONE).norm() < 1e-12);
        assert_eq!(frac_power(linalg::ZERO, 0.0).unwrap(), ONE);
        assert_eq!(frac_power(linalg::ZERO, 2.0).unwrap(), linalg::ZERO);
        assert_eq!(frac_power(linalg::ZERO, -1.0).unwrap_err().kind(), "zero-eigenvalue");
    }

    #[test]
    fn symmetric_basis_is_orthogonal_and_consistent() {
        let g = build_random_sensor_graph(16, 3).unwrap();
        let b = gft_basis(&shift_operator(&g, ShiftKind::Laplacian), DISTINCTNESS_TOL).unwrap();
        let f = b.gft();
        let n = b.n();
        assert!(linalg::max_abs_diff(&(f * f.transpose()), &CMat::identity(n, n)) < 1e-8);
        assert!(f.iter().all(|c| c.im == 0.0));
        let lam = CVec::from_vec(b.eigvals().to_vec());
        let lhs = f * b.eigvecs();
        let rhs = b.eigvecs() * CMat::from_diagonal(&lam);
        assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-8);
        let vp = b.vandermonde() * b.vandermonde_coeffs();
        assert!(linalg::max_abs_diff(&vp, &CMat::identity(n, n)) < 1e-6);
        assert!(b.eigvals().iter().all(|l| (l - ONE).norm() > 1e-6));
        let gso = b.gso_eigvals().unwrap();
        assert!(gso.windows(2).all(|w| w[0].re <= w[1].re));
    }

    #[test]
    fn odd_symmetric_basis_has_minus_one() {
        let g = build_random_sensor_graph(9, 5).unwrap();
        let b = gft_basis(&shift_operator(&g, ShiftKind::Laplacian), DISTINCTNESS_TOL).unwrap();
        assert!(b.eigvals().iter().any(|l| l.im == 0.0 && (l.re + 1.0).abs() < 1e-10));
        assert!(b.eigvals().iter().all(|l| (l - ONE).norm() > 1e-6));
    }

    #[test]
    fn edgeless_graph_is_degenerate() {
        let g = Graph::from_weights(DMatrix::zeros(5, 5)).unwrap();
        let err = gft_basis(&shift_operator(&g, ShiftKind::Adjacency), DISTINCTNESS_TOL)
            .unwrap_err();
        assert_eq!(err.kind(), "degenerate-spectrum");
    }

    #[test]
    fn star_graph_matches_brute_force_distinctness() {
        let n = 6;
        let mut w = DMatrix::zeros(n, n);
        for j in 1..n {
            w[(0, j)] = 1.0;
            w[(j, 0)] = 1.0;
        }
        let z = shift_operator(&Graph::from_weights(w).unwrap(), ShiftKind::Laplacian);
        match gft_basis(&z, DISTINCTNESS_TOL) {
            Ok(b) => {
                let lam = b.eigvals();
                for i in 0..n {
                    for j in i + 1..n {
                        assert!((lam[i] - lam[j]).norm() > 1e-8);
                    }
                }
            }
            Err(e) => assert_eq!(e.kind(), "degenerate-spectrum"),
        }
    }

    #[test]
    fn cycle4_rows_span_dft_eigenspaces() {
        let n = 4;
        let g = build_cycle_graph(n).unwrap();
        let b = gft_basis(&shift_operator(&g, ShiftKind::Adjacency), DISTINCTNESS_TOL).unwrap();
        let gso = b.gso_eigvals().unwrap();
        // DFT row k is an eigenvector of the cycle adjacency with eigenvalue 2 cos(2 pi k / n).
        let dft = CMat::from_fn(n, n, |k, t| {
            Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * PI * (k * t) as f64 / n as f64)
        });
        let f = b.gft();
        // Projector onto the span of rows of F with eigenvalue mu equals the DFT one.
        let mut mus: Vec<f64> = gso.iter().map(|c| c.re).collect();
        mus.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        for mu in mus {
            let rows_f: Vec<usize> = (0..n).filter(|&i| (gso[i].re - mu).abs() < 1e-9).collect();
            let rows_d: Vec<usize> = (0..n)
                .filter(|&k| (2.0 * (2.0 * PI * k as f64 / n as f64).cos() - mu).abs() < 1e-9)
                .collect();
            assert_eq!(rows_f.len(), rows_d.len());
            let proj = |m: &CMat, rows: &[usize]| {
                let mut p = CMat::zeros(n, n);
                for &r in rows {
                    let v = m.row(r).adjoint();
                    p += &v * v.adjoint();
                }
                p
            };
            assert!(linalg::max_abs_diff(&proj(f, &rows_f), &proj(&dft, &rows_d)) < 1e-10);
        }
    }

    #[test]
    fn powers_are_cached_products() {
        let g = build_random_sensor_graph(6, 1).unwrap();
        let b = gft_basis(&shift_operator(&g, ShiftKind::Laplacian), DISTINCTNESS_TOL).unwrap();
        let p = b.gft_powers();
        assert_eq!(p.len(), 6);
        assert!(linalg::max_abs_diff(&p[0], &CMat::identity(6, 6)) == 0.0);
        assert!(linalg::max_abs_diff(&p[3], &(b.gft() * b.gft() * b.gft())) < 1e-12);
    }
}
