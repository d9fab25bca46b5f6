//! Controlled g-frames.
//!
//! A pair of controllers `C, C'` in GL+(H) turns the frame energy into the
//! controlled form `sum_i <Lambda_i C f, Lambda_i C' f>`, whose operator is
//! `L = sum_i C' Lambda_i^* Lambda_i C = C' S C`. When `C` and `C'` do not
//! commute with `S` the operator `L` is not self-adjoint; its bounds are then
//! read off the Hermitian part and the defect is reported alongside.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gframe::{FrameBounds, GFrame};
use crate::linop::{inner, CVec, LinOp, LinOpRecord, PositiveCert};

/// A self-adjoint positive-definite operator with its certified spectral enclosure.
#[derive(Clone, Debug, PartialEq)]
pub struct Controller {
    op: LinOp,
    cert: PositiveCert,
}

impl Controller {
    /// Certifies `op` with the default tolerance `1e-10 * n * ||op||`.
    pub fn new(op: LinOp) -> Result<Self> {
        let tol = op.default_tol();
        Self::with_tol(op, tol)
    }

    /// Certifies `op` and stores its Hermitian part.
    pub fn with_tol(op: LinOp, tol: f64) -> Result<Self> {
        let cert = op.certify_glplus(tol)?;
        Ok(Self {
            op: op.hermitian_part()?,
            cert,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            op: LinOp::identity(n),
            cert: PositiveCert { lower: 1.0, upper: 1.0 },
        }
    }

    pub fn scalar(n: usize, c: f64) -> Result<Self> {
        Self::new(LinOp::identity(n).scale_real(c))
    }

    pub fn op(&self) -> &LinOp {
        &self.op
    }

    pub fn cert(&self) -> PositiveCert {
        self.cert
    }

    pub fn dim(&self) -> usize {
        self.op.rows()
    }

    /// `||C|| = M`.
    pub fn norm(&self) -> f64 {
        self.cert.upper
    }

    /// `||C^-1|| = 1/m`.
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.cert.lower
    }

    pub fn condition(&self) -> f64 {
        self.cert.upper / self.cert.lower
    }

    pub fn inverse(&self) -> Result<Controller> {
        Controller::new(self.op.hermitian_map(|l| 1.0 / l)?)
    }

    pub fn to_record(&self) -> ControllerRecord {
        ControllerRecord {
            op: LinOpRecord::from_op(&self.op, true),
            cert: self.cert,
        }
    }

    /// Rebuilds from a record, recomputing the certificate and checking it against the stored one.
    pub fn from_record(rec: &ControllerRecord) -> Result<Self> {
        let c = Controller::new(rec.op.to_op(None)?)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        if !close(c.cert.lower, rec.cert.lower) || !close(c.cert.upper, rec.cert.upper) {
            return Err(Error::CertificateMismatch {
                stored_m: rec.cert.lower,
                stored_upper: rec.cert.upper,
                m: c.cert.lower,
                upper: c.cert.upper,
            });
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("controller records always serialize")
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

/// Operator record plus a `"cert": {"m", "M"}` annex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControllerRecord {
    #[serde(flatten)]
    pub op: LinOpRecord,
    pub cert: PositiveCert,
}

/// Optimal controlled bounds and the relative non-self-adjointness of `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlledBounds {
    pub lower: f64,
    pub upper: f64,
    /// `||L - L^*|| / ||L||`.
    pub hermitian_defect: f64,
}

impl ControlledBounds {
    pub fn as_frame_bounds(&self) -> FrameBounds {
        FrameBounds::new(self.lower, self.upper)
    }
}

fn check_dims(f: &GFrame, c: &Controller, c2: &Controller) -> Result<()> {
    if c.dim() != f.dim_h() || c2.dim() != f.dim_h() {
        return Err(Error::DimensionMismatch(format!(
            "controllers of size {} and {} for a frame on C^{}",
            c.dim(),
            c2.dim(),
            f.dim_h()
        )));
    }
    Ok(())
}

/// `L f = sum_i C' Lambda_i^* Lambda_i C f`, assembled term by term.
pub fn controlled_frame_operator(f: &GFrame, c: &Controller, c2: &Controller) -> Result<LinOp> {
    check_dims(f, c, c2)?;
    let n = f.dim_h();
    let mut l = LinOp::zeros(n, n).into_matrix();
    for block in f.blocks() {
        let right = block.matrix() * c.op().matrix();
        let left = c2.op().matrix() * block.matrix().adjoint();
        l += left * right;
    }
    Ok(LinOp::from_matrix(l))
}

/// `sum_i <Lambda_i C f, Lambda_i C' f>`; the imaginary part is kept.
pub fn controlled_quadratic_form(f: &GFrame, c: &Controller, c2: &Controller, x: &CVec) -> Result<Complex64> {
    check_dims(f, c, c2)?;
    let cx = c.op().apply(x)?;
    let c2x = c2.op().apply(x)?;
    Ok(f
        .blocks()
        .iter()
        .map(|b| inner(&(b.matrix() * &cx), &(b.matrix() * &c2x)))
        .sum())
}

/// Extreme eigenvalues of `herm(L)` and the relative Hermitian defect of `L`.
pub fn controlled_bounds(f: &GFrame, c: &Controller, c2: &Controller) -> Result<ControlledBounds> {
    let l = controlled_frame_operator(f, c, c2)?;
    let (lower, upper) = l.hermitian_extremes()?;
    let norm = l.op_norm();
    let skew = LinOp::from_matrix(l.matrix() - l.matrix().adjoint()).op_norm();
    Ok(ControlledBounds {
        lower,
        upper,
        hermitian_defect: if norm > 0.0 { skew / norm } else { 0.0 },
    })
}

/// `Lambda` is g-Bessel (always, at finite size) and the controlled lower bound exceeds `tol`.
pub fn is_controlled_g_frame(f: &GFrame, c: &Controller, c2: &Controller, tol: f64) -> Result<bool> {
    let bessel = f.frame_bounds().upper.is_finite();
    Ok(bessel && controlled_bounds(f, c, c2)?.lower > tol)
}

/// From `C^2`-controlled bounds `(A, B)` to g-frame bounds `(A ||C||^-2, B ||C^-1||^2)`.
pub fn c2_bounds_from_controlled(a: f64, b: f64, c: &Controller) -> Result<FrameBounds> {
    if !(a > 0.0) {
        return Err(Error::InvalidBounds { lower: a, upper: b });
    }
    let norm = c.norm();
    let inv = c.inverse_norm();
    Ok(FrameBounds::new(a / (norm * norm), b * inv * inv))
}

/// From g-frame bounds `(A', B')` to `C^2`-controlled bounds `(A' ||C^-1||^-2, B' ||C||^2)`.
pub fn controlled_bounds_from_c2(a2: f64, b2: f64, c: &Controller) -> Result<FrameBounds> {
    if !(a2 > 0.0) {
        return Err(Error::InvalidBounds { lower: a2, upper: b2 });
    }
    let m = c.cert().lower;
    let big_m = c.cert().upper;
    Ok(FrameBounds::new(a2 * m * m, b2 * big_m * big_m))
}

/// `(m m' A, M M' B)` for controllers commuting with each other and with `S`.
///
/// Fails with `CommutationViolated` when any of the three commutation
/// hypotheses fails at relative tolerance `tol`.
pub fn commuting_controlled_bounds(f: &GFrame, c: &Controller, c2: &Controller, tol: f64) -> Result<FrameBounds> {
    check_dims(f, c, c2)?;
    let s = f.frame_operator();
    if !c.op().commutes(c2.op(), tol)? {
        return Err(Error::CommutationViolated("C and C' do not commute".into()));
    }
    if !c.op().commutes(&s, tol)? {
        return Err(Error::CommutationViolated("C does not commute with S".into()));
    }
    if !c2.op().commutes(&s, tol)? {
        return Err(Error::CommutationViolated("C' does not commute with S".into()));
    }
    let b = f.frame_bounds();
    let (m, big_m) = (c.cert().lower, c.cert().upper);
    let (m2, big_m2) = (c2.cert().lower, c2.cert().upper);
    Ok(FrameBounds::new(m * m2 * b.lower, big_m * big_m2 * b.upper))
}
