use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{frac_power, SpectralBasis, CONDITION_WARNING};
use crate::error::{invalid, Error, Result};
use crate::linalg::{CMat, CVec};

/// Smallest `|d_j|` for which a type-II operator counts as invertible.
pub const INVERTIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformKind {
    #[serde(rename = "gfrft")]
    Gfrft,
    #[serde(rename = "mpgfrft-i")]
    MpgfrftI,
    #[serde(rename = "mpgfrft-ii")]
    MpgfrftII,
}

impl TransformKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransformKind::Gfrft => "gfrft",
            TransformKind::MpgfrftI => "mpgfrft-i",
            TransformKind::MpgfrftII => "mpgfrft-ii",
        }
    }
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gfrft" => Ok(TransformKind::Gfrft),
            "i" | "mpgfrft-i" | "mpgfrft_i" => Ok(TransformKind::MpgfrftI),
            "ii" | "mpgfrft-ii" | "mpgfrft_ii" => Ok(TransformKind::MpgfrftII),
            other => Err(invalid(format!("unknown transform kind '{other}'"))),
        }
    }
}

/// Per-frequency fractional orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderVector(Vec<f64>);

impl OrderVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("order vector has non-finite entries"));
        }
        Ok(OrderVector(values))
    }

    pub fn constant(n: usize, a: f64) -> Self {
        OrderVector(vec![a; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    /// Expands one value per block over `n` entries. Blocks have length
    /// `n / blocks`; the last block absorbs the remainder.
    pub fn blocks(n: usize, values: &[f64]) -> Result<Self> {
        let b = values.len();
        if b == 0 || b > n {
            return Err(invalid(format!("need 1..={n} block values, got {b}")));
        }
        let len = n / b;
        let v = (0..n).map(|i| values[(i / len).min(b - 1)]).collect();
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn add(&self, other: &OrderVector) -> Result<OrderVector> {
        check_len(other.len(), self.len())?;
        Ok(OrderVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn offset(&self, delta: f64) -> OrderVector {
        OrderVector(self.0.iter().map(|a| a + delta).collect())
    }

    pub fn neg(&self) -> OrderVector {
        OrderVector(self.0.iter().map(|a| -a).collect())
    }
}

impl From<OrderVector> for Vec<f64> {
    fn from(a: OrderVector) -> Self {
        a.0
    }
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(invalid(format!("dimension mismatch: expected {want}, got {got}")));
    }
    Ok(())
}

/// `lambda_j^{a_j}`.
pub fn type_i_multipliers(basis: &SpectralBasis, a: &OrderVector) -> Result<CVec> {
    check_len(a.len(), basis.n())?;
    let m: Result<Vec<_>> =
        basis.eigvals().iter().zip(a.as_slice()).map(|(&l, &ak)| frac_power(l, ak)).collect();
    Ok(CVec::from_vec(m?))
}

/// Polynomial coefficients `C^I = P mu` with `mu_j = lambda_j^{a_j}`.
pub fn type_i_coefficients(basis: &SpectralBasis, a: &OrderVector) -> Result<CVec> {
    Ok(basis.vandermonde_coeffs() * type_i_multipliers(basis, a)?)
}

/// `C^II_n = sum_j P[n, j] lambda_j^{a_n}`.
pub fn type_ii_coefficients(basis: &SpectralBasis, a: &OrderVector) -> Result<CVec> {
    check_len(a.len(), basis.n())?;
    let p = basis.vandermonde_coeffs();
    let lam = basis.eigvals();
    let mut c = CVec::zeros(basis.n());
    for (n, &an) in a.as_slice().iter().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for (j, &l) in lam.iter().enumerate() {
            s += p[(n, j)] * frac_power(l, an)?;
        }
        c[n] = s;
    }
    Ok(c)
}

/// Eigenvalues `d_j = sum_n C^II_n lambda_j^n` of the type-II operator.
pub fn type_ii_multipliers(basis: &SpectralBasis, a: &OrderVector) -> Result<CVec> {
    Ok(basis.vandermonde() * type_ii_coefficients(basis, a)?)
}

/// Invertibility flag of the type-II operator and `min_j |d_j|`.
pub fn type_ii_invertibility(basis: &SpectralBasis, a: &OrderVector) -> Result<(bool, f64)> {
    let d = type_ii_multipliers(basis, a)?;
    let min = d.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    Ok((min > INVERTIBILITY_TOL, min))
}

/// Eigenvalues of the operator of the given kind on the basis eigenvectors.
pub fn multipliers(basis: &SpectralBasis, kind: TransformKind, a: &OrderVector) -> Result<CVec> {
    match kind {
        TransformKind::Gfrft => {
            if !a.is_constant() {
                return Err(invalid("gfrft needs a constant order vector"));
            }
            type_i_multipliers(basis, a)
        }
        TransformKind::MpgfrftI => type_i_multipliers(basis, a),
        TransformKind::MpgfrftII => type_ii_multipliers(basis, a),
    }
}

/// A dense transform matrix tagged with its kind, order and basis.
#[derive(Debug, Clone)]
pub struct FractionalOperator {
    basis: Arc<SpectralBasis>,
    kind: TransformKind,
    order: OrderVector,
    matrix: CMat,
    multipliers: CVec,
    conditioning_warning: Option<f64>,
}

impl FractionalOperator {
    /// Builds `V diag(m) V^{-1}` for the kind's spectral multipliers `m`.
    pub fn new(basis: &Arc<SpectralBasis>, kind: TransformKind, a: &OrderVector) -> Result<Self> {
        let m = multipliers(basis, kind, a)?;
        let matrix = basis.assemble(&m);
        let warn = kind == TransformKind::MpgfrftII;
        Ok(Self::wrap(basis, kind, a, matrix, m, warn))
    }

    fn wrap(
        basis: &Arc<SpectralBasis>,
        kind: TransformKind,
        a: &OrderVector,
        matrix: CMat,
        multipliers: CVec,
        uses_vandermonde: bool,
    ) -> Self {
        let cond = basis.vandermonde_condition();
        let conditioning_warning =
            (uses_vandermonde && !(cond <= CONDITION_WARNING)).then_some(cond);
        FractionalOperator {
            basis: Arc::clone(basis),
            kind,
            order: a.clone(),
            matrix,
            multipliers,
            conditioning_warning,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn order(&self) -> &OrderVector {
        &self.order
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    /// Eigenvalues of the operator, one per basis eigenvector.
    pub fn multipliers(&self) -> &CVec {
        &self.multipliers
    }

    /// Vandermonde condition estimate when it exceeded the warning level.
    pub fn conditioning_warning(&self) -> Option<f64> {
        self.conditioning_warning
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        check_len(x.len(), self.n())?;
        Ok(&self.matrix * x)
    }

    /// Inverts [`apply`](Self::apply). Type I and GFRFT use the operator of
    /// order `-a`; type II solves against the matrix.
    pub fn inverse_apply(&self, y: &CVec) -> Result<CVec> {
        check_len(y.len(), self.n())?;
        match self.kind {
            TransformKind::Gfrft | TransformKind::MpgfrftI => {
                let m = type_i_multipliers(&self.basis, &self.order.neg())?;
                Ok(self.basis.apply_multipliers(&m, y))
            }
            TransformKind::MpgfrftII => {
                let min = self.multipliers.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
                if !(min > INVERTIBILITY_TOL) {
                    return Err(Error::NotInvertible { min_abs_diag: min });
                }
                self.matrix
                    .clone()
                    .lu()
                    .solve(y)
                    .ok_or(Error::NotInvertible { min_abs_diag: min })
            }
        }
    }

    /// The inverse as an explicit matrix.
    pub fn inverse_matrix(&self) -> Result<CMat> {
        let m = match self.kind {
            TransformKind::Gfrft | TransformKind::MpgfrftI => {
                type_i_multipliers(&self.basis, &self.order.neg())?
            }
            TransformKind::MpgfrftII => {
                let min = self.multipliers.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
                if !(min > INVERTIBILITY_TOL) {
                    return Err(Error::NotInvertible { min_abs_diag: min });
                }
                self.multipliers.map(|d| d.inv())
            }
        };
        Ok(self.basis.assemble(&m))
    }
}

/// Scalar-order GFRFT `F^a`.
pub fn gfrft(basis: &Arc<SpectralBasis>, a: f64) -> Result<FractionalOperator> {
    FractionalOperator::new(basis, TransformKind::Gfrft, &OrderVector::constant(basis.n(), a))
}

/// Type-I operator `V diag(lambda_k^{a_k}) V^{-1}`.
pub fn mpgfrft_i(basis: &Arc<SpectralBasis>, a: &OrderVector) -> Result<FractionalOperator> {
    FractionalOperator::new(basis, TransformKind::MpgfrftI, a)
}

/// Type-I operator assembled as the polynomial `sum_n C^I_n F^n`.
pub fn mpgfrft_i_poly(basis: &Arc<SpectralBasis>, a: &OrderVector) -> Result<FractionalOperator> {
    let m = type_i_multipliers(basis, a)?;
    let c = basis.vandermonde_coeffs() * &m;
    let matrix = basis.polynomial(&c);
    Ok(FractionalOperator::wrap(basis, TransformKind::MpgfrftI, a, matrix, m, true))
}

/// Type-II operator, assembled on the eigenbasis as `V diag(d) V^{-1}` with
/// `d = Vandermonde * C^II`.
pub fn mpgfrft_ii(basis: &Arc<SpectralBasis>, a: &OrderVector) -> Result<FractionalOperator> {
    FractionalOperator::new(basis, TransformKind::MpgfrftII, a)
}

/// Type-II operator assembled literally as `sum_n C^II_n F^n`.
pub fn mpgfrft_ii_poly(basis: &Arc<SpectralBasis>, a: &OrderVector) -> Result<FractionalOperator> {
    let c = type_ii_coefficients(basis, a)?;
    let matrix = basis.polynomial(&c);
    let d = basis.vandermonde() * &c;
    Ok(FractionalOperator::wrap(basis, TransformKind::MpgfrftII, a, matrix, d, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_random_sensor_graph, shift_operator, ShiftKind};
    use crate::linalg::{max_abs_diff, vec_max_abs_diff};
    use crate::spectral::basis::{gft_basis, DISTINCTNESS_TOL};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(n: usize, seed: u64) -> Arc<SpectralBasis> {
        let g = build_random_sensor_graph(n, seed).unwrap();
        Arc::new(gft_basis(&shift_operator(&g, ShiftKind::Laplacian), DISTINCTNESS_TOL).unwrap())
    }

    fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> CVec {
        CVec::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn reductions() {
        let b = basis(8, 2);
        let n = b.n();
        let id = CMat::identity(n, n);
        for kind in [TransformKind::MpgfrftI, TransformKind::MpgfrftII] {
            let op0 = FractionalOperator::new(&b, kind, &OrderVector::zeros(n)).unwrap();
            assert!(max_abs_diff(op0.matrix(), &id) < 1e-10);
            let op1 = FractionalOperator::new(&b, kind, &OrderVector::constant(n, 1.0)).unwrap();
            assert!(max_abs_diff(op1.matrix(), b.gft()) < 1e-8);
            let opc = FractionalOperator::new(&b, kind, &OrderVector::constant(n, 0.37)).unwrap();
            assert!(max_abs_diff(opc.matrix(), gfrft(&b, 0.37).unwrap().matrix()) < 1e-8);
        }
    }

    #[test]
    fn block_orders_unitary_and_match_polynomial() {
        let b = basis(8, 4);
        let a = OrderVector::blocks(8, &[0.35, 0.65]).unwrap();
        let op = mpgfrft_i(&b, &a).unwrap();
        let m = op.matrix();
        assert!(max_abs_diff(&(m * m.adjoint()), &CMat::identity(8, 8)) < 1e-8);
        let poly = mpgfrft_i_poly(&b, &a).unwrap();
        assert!(max_abs_diff(m, poly.matrix()) < 1e-6);
    }

    #[test]
    fn two_by_two_vandermonde() {
        let f = CMat::from_row_slice(
            2,
            2,
            &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        );
        let b = Arc::new(SpectralBasis::from_gft_matrix(f.clone(), DISTINCTNESS_TOL).unwrap());
        // Canonical ordering puts lambda = (-1, 1).
        assert!((b.eigvals()[0] + Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let p = b.vandermonde_coeffs();
        let want = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, -0.5, 0.5]);
        assert!(max_abs_diff(p, &crate::linalg::to_complex(&want)) < 1e-14);
        let c = type_i_coefficients(&b, &OrderVector::constant(2, 1.0)).unwrap();
        assert!((c[0]).norm() < 1e-14 && (c[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let op = mpgfrft_i_poly(&b, &OrderVector::constant(2, 1.0)).unwrap();
        assert!(max_abs_diff(op.matrix(), &f) < 1e-14);
    }

    #[test]
    fn type_ii_literal_matches_spectral_assembly() {
        let b = basis(10, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = OrderVector::new((0..10).map(|_| rng.random_range(-1.0..2.0)).collect()).unwrap();
        let lit = mpgfrft_ii_poly(&b, &a).unwrap();
        let spec = mpgfrft_ii(&b, &a).unwrap();
        assert!(max_abs_diff(lit.matrix(), spec.matrix()) < 1e-6);
    }

    #[test]
    fn invertibility_trivial_cases() {
        let b = basis(6, 5);
        let (ok, min) = type_ii_invertibility(&b, &OrderVector::zeros(6)).unwrap();
        assert!(ok && (min - 1.0).abs() < 1e-10);
        let (ok, min) = type_ii_invertibility(&b, &OrderVector::constant(6, 1.0)).unwrap();
        assert!(ok && (min - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linearity_and_round_trip() {
        let b = basis(12, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = OrderVector::new((0..12).map(|_| rng.random_range(-1.0..2.0)).collect()).unwrap();
        for kind in [TransformKind::MpgfrftI, TransformKind::MpgfrftII] {
            let op = FractionalOperator::new(&b, kind, &a).unwrap();
            let x = rand_vec(12, &mut rng);
            let y = rand_vec(12, &mut rng);
            let two = Complex64::new(2.0, 0.0);
            let three = Complex64::new(3.0, 0.0);
            let lhs = op.apply(&(&x * two + &y * three)).unwrap();
            let rhs = op.apply(&x).unwrap() * two + op.apply(&y).unwrap() * three;
            assert!(vec_max_abs_diff(&lhs, &rhs) < 1e-10);
            let back = op.inverse_apply(&op.apply(&x).unwrap()).unwrap();
            assert!(vec_max_abs_diff(&back, &x) < 1e-8);
            let inv = op.inverse_matrix().unwrap();
            assert!(max_abs_diff(&(&inv * op.matrix()), &CMat::identity(12, 12)) < 1e-8);
        }
        assert!(op_dimension_error(&b));
    }

    fn op_dimension_error(b: &Arc<SpectralBasis>) -> bool {
        let op = gfrft(b, 0.5).unwrap();
        op.apply(&CVec::zeros(3)).is_err() && mpgfrft_i(b, &OrderVector::zeros(3)).is_err()
    }

    #[test]
    fn blocks_absorb_remainder() {
        let a = OrderVector::blocks(10, &[0.7, 0.2, 0.5]).unwrap();
        assert_eq!(a.as_slice(), &[0.7, 0.7, 0.7, 0.2, 0.2, 0.2, 0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("i".parse::<TransformKind>().unwrap(), TransformKind::MpgfrftI);
        assert_eq!("ii".parse::<TransformKind>().unwrap(), TransformKind::MpgfrftII);
        assert_eq!("gfrft".parse::<TransformKind>().unwrap(), TransformKind::Gfrft);
        assert!("iii".parse::<TransformKind>().is_err());
    }
}
