//! g-frames for a finite-dimensional space `H = C^n`.
//!
//! A [`GFrame`] is an ordered family of blocks `Lambda_i: H -> H_i`, block `i`
//! stored as a `d_i x n` operator. Coefficients live in the direct sum of the
//! `H_i`, represented by [`BlockVector`].

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{inner, CVec, LinOp, LinOpRecord};
use crate::random::hermitize;

/// Element of the direct sum `(sum_i H_i)_{l2}`: one vector per block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector {
    parts: Vec<CVec>,
}

impl BlockVector {
    pub fn new(parts: Vec<CVec>) -> Self {
        Self { parts }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self::new(dims.iter().map(|&d| DVector::zeros(d)).collect())
    }

    pub fn parts(&self) -> &[CVec] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<CVec> {
        self.parts
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.len()).collect()
    }

    /// `sum_i ||f_i||^2`.
    pub fn norm_sq(&self) -> f64 {
        self.parts.iter().map(|p| p.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `sum_i <f_i, g_i>`.
    pub fn inner(&self, other: &BlockVector) -> Result<Complex64> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch("block vectors with different block dimensions".into()));
        }
        Ok(self.parts.iter().zip(&other.parts).map(|(a, b)| inner(a, b)).sum())
    }

    /// The diagonal action `(xi_i) -> (w_i xi_i)`.
    pub fn scale_blocks(&self, weights: &[Complex64]) -> Result<BlockVector> {
        if weights.len() != self.parts.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} blocks",
                weights.len(),
                self.parts.len()
            )));
        }
        Ok(Self::new(self.parts.iter().zip(weights).map(|(p, &w)| p * w).collect()))
    }
}

/// Frame bounds `A <= B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    /// `B / A`; infinite when `A <= 0`.
    pub fn ratio(&self) -> f64 {
        if self.lower <= 0.0 {
            f64::INFINITY
        } else {
            self.upper / self.lower
        }
    }

    /// True when `[inner.lower, inner.upper]` sits inside these bounds up to `slack`.
    pub fn encloses(&self, inner: &FrameBounds, slack: f64) -> bool {
        self.lower <= inner.lower + slack && inner.upper <= self.upper + slack
    }
}

/// A finite g-frame (or g-Bessel family) `{Lambda_i}` for `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GFrame {
    dim_h: usize,
    blocks: Vec<LinOp>,
}

impl GFrame {
    pub fn new(dim_h: usize, blocks: Vec<LinOp>) -> Result<Self> {
        if dim_h == 0 {
            return Err(Error::InvalidArgument("dim_h must be positive".into()));
        }
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("a g-frame needs at least one block".into()));
        }
        if let Some((i, b)) = blocks.iter().enumerate().find(|(_, b)| b.cols() != dim_h) {
            return Err(Error::DimensionMismatch(format!(
                "block {i} has {} columns, expected {dim_h}",
                b.cols()
            )));
        }
        Ok(Self { dim_h, blocks })
    }

    /// Scalar frame `{f_i}` as the g-frame `Lambda_i = <., f_i>`, `H_i = C`.
    pub fn from_vector_frame(vectors: &[CVec]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty vector system".into()))?;
        let n = first.len();
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("vectors of unequal length".into()));
        }
        Self::new(n, vectors.iter().map(LinOp::from_functional).collect())
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn blocks(&self) -> &[LinOp] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(LinOp::rows).collect()
    }

    /// Maps every block through `f`, keeping `dim_h`.
    pub fn map_blocks(&self, f: impl Fn(usize, &LinOp) -> LinOp) -> Result<GFrame> {
        GFrame::new(self.dim_h, self.blocks.iter().enumerate().map(|(i, b)| f(i, b)).collect())
    }

    fn check_vector(&self, f: &CVec) -> Result<()> {
        if f.len() != self.dim_h {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {}, frame acts on C^{}",
                f.len(),
                self.dim_h
            )));
        }
        Ok(())
    }

    /// Analysis operator: `f -> (Lambda_i f)_i`.
    pub fn analysis(&self, f: &CVec) -> Result<BlockVector> {
        self.check_vector(f)?;
        Ok(BlockVector::new(self.blocks.iter().map(|b| b.matrix() * f).collect()))
    }

    /// Synthesis operator: `(c_i) -> sum_i Lambda_i^* c_i`.
    pub fn synthesis(&self, c: &BlockVector) -> Result<CVec> {
        if c.dims() != self.block_dims() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient blocks {:?}, frame blocks {:?}",
                c.dims(),
                self.block_dims()
            )));
        }
        let mut out = DVector::zeros(self.dim_h);
        for (b, part) in self.blocks.iter().zip(c.parts()) {
            out += b.matrix().ad_mul(part);
        }
        Ok(out)
    }

    /// The analysis operator as a stacked `(sum_i d_i) x n` matrix.
    pub fn analysis_matrix(&self) -> LinOp {
        let total: usize = self.block_dims().iter().sum();
        let mut m = DMatrix::zeros(total, self.dim_h);
        let mut row = 0;
        for b in &self.blocks {
            m.view_mut((row, 0), (b.rows(), self.dim_h)).copy_from(b.matrix());
            row += b.rows();
        }
        LinOp::from_matrix(m)
    }

    /// The synthesis operator as an `n x (sum_i d_i)` matrix.
    pub fn synthesis_matrix(&self) -> LinOp {
        self.analysis_matrix().adjoint()
    }

    /// `S = sum_i Lambda_i^* Lambda_i`.
    pub fn frame_operator(&self) -> LinOp {
        let mut s = DMatrix::zeros(self.dim_h, self.dim_h);
        for b in &self.blocks {
            s += b.matrix().ad_mul(b.matrix());
        }
        hermitize(&LinOp::from_matrix(s))
    }

    /// Optimal bounds `A = lambda_min(S)`, `B = lambda_max(S)`.
    pub fn frame_bounds(&self) -> FrameBounds {
        let (lo, hi) = self
            .frame_operator()
            .hermitian_extremes()
            .expect("frame operator is square");
        FrameBounds::new(lo.max(0.0), hi)
    }

    /// `1e-10 * B_opt`, the default threshold for deciding `A > 0`.
    pub fn default_tol(&self) -> f64 {
        1e-10 * self.frame_bounds().upper
    }

    pub fn is_g_frame(&self, tol: f64) -> bool {
        self.frame_bounds().lower > tol
    }

    pub fn is_tight(&self, tol: f64) -> bool {
        let b = self.frame_bounds();
        self.is_g_frame(tol) && (b.upper - b.lower) <= tol
    }

    pub fn is_parseval(&self, tol: f64) -> bool {
        let b = self.frame_bounds();
        (b.lower - 1.0).abs() <= tol && (b.upper - 1.0).abs() <= tol
    }

    /// Dimension of the closed span of `Lambda_i^*(H_i)`, i.e. the numerical rank of `S`.
    /// A family with full rank is a g-frame; otherwise it is a g-frame sequence for that span.
    pub fn span_rank(&self, tol: f64) -> usize {
        self.frame_operator()
            .hermitian_eigenvalues()
            .expect("square")
            .iter()
            .filter(|&&l| l > tol)
            .count()
    }

    /// Cholesky factor of `S`, or `NotAFrame` when `A <= tol`.
    pub fn frame_operator_factor(&self) -> Result<Cholesky<Complex64, Dyn>> {
        let bounds = self.frame_bounds();
        let tol = self.default_tol();
        if bounds.lower <= tol {
            return Err(Error::NotAFrame { lower: bounds.lower, tol });
        }
        Cholesky::new(self.frame_operator().into_matrix()).ok_or(Error::NotAFrame {
            lower: bounds.lower,
            tol,
        })
    }

    /// Canonical dual `{Lambda_i S^-1}`.
    pub fn canonical_dual(&self) -> Result<GFrame> {
        let chol = self.frame_operator_factor()?;
        // Lambda_i S^-1 = (S^-1 Lambda_i^*)^*
        let blocks = self
            .blocks
            .iter()
            .map(|b| LinOp::from_matrix(chol.solve(&b.matrix().adjoint()).adjoint()))
            .collect();
        GFrame::new(self.dim_h, blocks)
    }

    /// `S^-1 T_Lambda c`; inverts `analysis` exactly on its range.
    pub fn reconstruct(&self, c: &BlockVector) -> Result<CVec> {
        let chol = self.frame_operator_factor()?;
        let g = self.synthesis(c)?;
        Ok(chol.solve(&g))
    }

    /// `S^-1 g` through the Cholesky factor.
    pub fn solve_frame_operator(&self, g: &CVec) -> Result<CVec> {
        self.check_vector(g)?;
        Ok(self.frame_operator_factor()?.solve(g))
    }

    pub fn to_record(&self) -> FrameRecord {
        FrameRecord {
            dim_h: self.dim_h,
            blocks: self.blocks.iter().map(|b| LinOpRecord::from_op(b, false)).collect(),
        }
    }

    pub fn from_record(rec: &FrameRecord) -> Result<Self> {
        let blocks = rec
            .blocks
            .iter()
            .map(|b| b.to_op(Some(rec.dim_h)))
            .collect::<Result<Vec<_>>>()?;
        GFrame::new(rec.dim_h, blocks)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("frame records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk frame: `{"dim_h": n, "blocks": [{"rows", "entries_re", "entries_im"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameRecord {
    pub dim_h: usize,
    pub blocks: Vec<LinOpRecord>,
}
