//! Dense complex operators and the spectral toolbox built on them.
//!
//! Every operator in the crate (frame blocks, frame operators, controllers,
//! multipliers) is a [`LinOp`]: a dense `rows x cols` complex matrix acting
//! on column vectors. Inner products are linear in the first argument,
//! `<x, y> = sum_k x_k conj(y_k)`.
//!
//! Positivity and ordering are decided spectrally through the Hermitian part
//! `(T + T*)/2`, with an absolute tolerance supplied by the caller.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CVec = DVector<Complex64>;

/// `<x, y> = sum_k x_k conj(y_k)`.
pub fn inner(x: &CVec, y: &CVec) -> Complex64 {
    y.dotc(x)
}

/// A dense complex matrix viewed as a bounded operator `C^cols -> C^rows`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp {
    mat: DMatrix<Complex64>,
}

/// Certified spectral enclosure `m I <= U <= M I` of a positive operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveCert {
    /// Smallest eigenvalue of the Hermitian part.
    #[serde(rename = "m")]
    pub lower: f64,
    /// Largest eigenvalue of the Hermitian part.
    #[serde(rename = "M")]
    pub upper: f64,
}

impl PositiveCert {
    /// Enclosure of the inverse: `M^-1 <= U^-1 <= m^-1`.
    pub fn inverse(&self) -> PositiveCert {
        PositiveCert {
            lower: 1.0 / self.upper,
            upper: 1.0 / self.lower,
        }
    }
}

impl LinOp {
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Self {
        assert!(mat.nrows() > 0 && mat.ncols() > 0, "operators must be non-empty");
        Self { mat }
    }

    /// Builds from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} operator",
                entries.len()
            )));
        }
        Ok(Self::from_matrix(DMatrix::from_row_slice(rows, cols, entries)))
    }

    /// Builds from nested real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows[0].len();
        let entries: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                r.iter().map(|&x| Complex64::new(x, 0.0))
            })
            .collect();
        Self::from_matrix(DMatrix::from_row_slice(rows.len(), cols, &entries))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(rows, cols))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::from_matrix(DMatrix::from_diagonal(&d))
    }

    /// Rank-one-per-row operator `f -> (<f, v>)`: one row per vector, holding `conj(v)`.
    pub fn from_functional(v: &CVec) -> Self {
        let row = v.adjoint();
        Self::from_matrix(DMatrix::from_row_slice(1, row.len(), row.as_slice()))
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.mat[(r, c)]
    }

    /// Entries in row-major order.
    pub fn row_major_entries(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.mat[(r, c)]);
            }
        }
        out
    }

    pub fn apply(&self, f: &CVec) -> Result<CVec> {
        if f.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} applied to {}x{} operator",
                f.len(),
                self.rows(),
                self.cols()
            )));
        }
        Ok(&self.mat * f)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_matrix(self.mat.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_matrix(&self.mat * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn compose(&self, rhs: &LinOp) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self::from_matrix(&self.mat * &rhs.mat))
    }

    pub fn try_add(&self, rhs: &LinOp) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self::from_matrix(&self.mat + &rhs.mat))
    }

    pub fn try_sub(&self, rhs: &LinOp) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self::from_matrix(&self.mat - &rhs.mat))
    }

    fn same_shape(&self, rhs: &LinOp) -> Result<()> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(())
    }

    fn require_square(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        Ok(self.rows())
    }

    /// `(T + T*)/2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        self.require_square()?;
        Ok(Self::from_matrix((&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0)))
    }

    /// Largest entrywise modulus of `T - T*`.
    pub fn hermitian_defect(&self) -> Result<f64> {
        self.require_square()?;
        let d = &self.mat - self.mat.adjoint();
        Ok(d.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise `sqrt(sum |t_ij|^2)`.
    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> Result<bool> {
        Ok(self.hermitian_defect()? <= tol)
    }

    /// Default absolute tolerance `1e-10 * dim * ||T||` for spectral decisions.
    pub fn default_tol(&self) -> f64 {
        1e-10 * self.rows().max(self.cols()) as f64 * self.op_norm()
    }

    /// Ascending eigenvalues and matching orthonormal eigenvectors of the Hermitian part.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let h = self.hermitian_part()?;
        let eig = SymmetricEigen::new(h.mat);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok((values, vectors))
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitian_part()?;
        let mut values: Vec<f64> = h.mat.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// `(lambda_min, lambda_max)` of the Hermitian part.
    pub fn hermitian_extremes(&self) -> Result<(f64, f64)> {
        let ev = self.hermitian_eigenvalues()?;
        Ok((ev[0], ev[ev.len() - 1]))
    }

    /// `V diag(f(lambda)) V*` over the eigen-decomposition of the Hermitian part.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (values, vectors) = self.hermitian_eigen()?;
        let scaled = DVector::from_iterator(values.len(), values.iter().map(|&l| Complex64::new(f(l), 0.0)));
        let mut left = vectors.clone();
        for (c, s) in scaled.iter().enumerate() {
            left.column_mut(c).scale_mut(s.re);
        }
        Ok(Self::from_matrix(&left * vectors.adjoint()))
    }

    /// `T1 <= T2` in the operator order: `lambda_min(herm(T2 - T1)) >= -tol`.
    pub fn op_order_leq(&self, other: &LinOp, tol: f64) -> Result<bool> {
        self.require_square()?;
        let diff = other.try_sub(self)?;
        let (lo, _) = diff.hermitian_extremes()?;
        Ok(lo >= -tol)
    }

    /// Certifies membership in GL+: self-adjoint within `tol` and
    /// `lambda_min > tol`. Returns the extreme eigenvalues.
    pub fn certify_glplus(&self, tol: f64) -> Result<PositiveCert> {
        self.require_square()?;
        let defect = self.hermitian_defect()?;
        if defect > tol {
            return Err(Error::NotSelfAdjoint { defect, tol });
        }
        let (lower, upper) = self.hermitian_extremes()?;
        if lower <= tol {
            return Err(Error::NotPositiveDefinite { min_eig: lower, tol });
        }
        Ok(PositiveCert { lower, upper })
    }

    /// The unique non-negative square root, eigenvalues below tolerance clamped to zero.
    pub fn sqrt(&self) -> Result<Self> {
        self.sqrt_with_tol(self.default_tol())
    }

    pub fn sqrt_with_tol(&self, tol: f64) -> Result<Self> {
        let n = self.require_square()?;
        let defect = self.hermitian_defect()?;
        if defect > tol.max(1e-14 * n as f64 * self.max_abs_entry()) {
            return Err(Error::NotSelfAdjoint { defect, tol });
        }
        let (lo, _) = self.hermitian_extremes()?;
        if lo < -tol {
            return Err(Error::NotNonNegative { min_eig: lo });
        }
        self.hermitian_map(|l| if l <= tol { 0.0 } else { l.sqrt() })
    }

    /// Inverse of a Hermitian positive-definite operator via its spectrum.
    pub fn hermitian_inverse(&self, tol: f64) -> Result<Self> {
        self.certify_glplus(tol)?;
        self.hermitian_map(|l| 1.0 / l)
    }

    /// Singular values in descending order, `min(rows, cols)` of them.
    pub fn singular_values(&self) -> Vec<f64> {
        let svd = SVD::new(self.mat.clone(), false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().map(|x| x.max(0.0)).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `(sum_n s_n^p)^(1/p)` for finite `p >= 1`.
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        let s = self.singular_values();
        let top = s[0];
        if top == 0.0 {
            return Ok(0.0);
        }
        // scaled to avoid overflow for large p
        let sum: f64 = s.iter().map(|&x| (x / top).powf(p)).sum();
        Ok(top * sum.powf(1.0 / p))
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// `||XY - YX|| <= tol (||X|| ||Y|| + 1)`.
    pub fn commutes(&self, other: &LinOp, tol: f64) -> Result<bool> {
        self.require_square()?;
        self.same_shape(other)?;
        let xy = &self.mat * &other.mat;
        let yx = &other.mat * &self.mat;
        let defect = LinOp::from_matrix(xy - yx).op_norm();
        Ok(defect <= tol * (self.op_norm() * other.op_norm() + 1.0))
    }

    /// `max_ij |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &LinOp) -> Result<f64> {
        self.same_shape(other)?;
        Ok((&self.mat - &other.mat).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

impl<'a> Mul<&'a LinOp> for &'a LinOp {
    type Output = LinOp;

    fn mul(self, rhs: &'a LinOp) -> LinOp {
        self.compose(rhs).expect("operator shapes must agree")
    }
}

impl<'a> Add<&'a LinOp> for &'a LinOp {
    type Output = LinOp;

    fn add(self, rhs: &'a LinOp) -> LinOp {
        self.try_add(rhs).expect("operator shapes must agree")
    }
}

impl<'a> Sub<&'a LinOp> for &'a LinOp {
    type Output = LinOp;

    fn sub(self, rhs: &'a LinOp) -> LinOp {
        self.try_sub(rhs).expect("operator shapes must agree")
    }
}

/// JSON form of an operator: row-major real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinOpRecord {
    pub rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub entries_re: Vec<f64>,
    pub entries_im: Vec<f64>,
}

impl LinOpRecord {
    pub fn from_op(op: &LinOp, with_cols: bool) -> Self {
        let entries = op.row_major_entries();
        Self {
            rows: op.rows(),
            cols: with_cols.then_some(op.cols()),
            entries_re: entries.iter().map(|z| z.re).collect(),
            entries_im: entries.iter().map(|z| z.im).collect(),
        }
    }

    /// Rebuilds the operator; `cols` falls back to `default_cols` when absent.
    pub fn to_op(&self, default_cols: Option<usize>) -> Result<LinOp> {
        let cols = self
            .cols
            .or(default_cols)
            .ok_or_else(|| Error::InvalidArgument("operator record without column count".into()))?;
        if self.entries_re.len() != self.entries_im.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} real parts vs {} imaginary parts",
                self.entries_re.len(),
                self.entries_im.len()
            )));
        }
        let entries: Vec<Complex64> = self
            .entries_re
            .iter()
            .zip(&self.entries_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        LinOp::from_row_slice(self.rows, cols, &entries)
    }
}
