//! Iterative inversion of the frame operator.
//!
//! The frame algorithm is Richardson iteration
//! `f_{k+1} = f_k + 2/(A+B) (g - S f_k)` started from zero; its residual
//! contracts by `(B-A)/(B+A)` per step. Preconditioning replaces `S` by the
//! controlled operator `L = C S C`, iterates on `L h = C g` and maps back
//! with `f = C h`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controlled::{controlled_bounds, controlled_frame_operator, Controller};
use crate::error::{Error, Result};
use crate::gframe::GFrame;
use crate::linop::{CVec, LinOp};

/// Outcome of one iterative solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual for `k = 0..=iterations`, tracked by the recurrence `r_{k+1} = (I - w S) r_k`.
    /// If the true residual disagrees at the stopping test the recurrence restarts from it.
    pub residual_history: Vec<f64>,
    /// `||g - S f|| / ||g||` for the returned `f`.
    pub true_residual: f64,
    pub converged: bool,
    /// `B / A` of the operator actually iterated.
    pub condition_estimate: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.true_residual
    }

    /// Largest ratio between consecutive residuals.
    pub fn max_contraction(&self) -> f64 {
        self.residual_history
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

/// Richardson iteration that always returns, reporting non-convergence in the report.
pub fn richardson(s: &LinOp, a: f64, b: f64, g: &CVec, tol: f64, max_iter: usize) -> Result<(CVec, SolveReport)> {
    if !(a > 0.0) || a > b || !b.is_finite() {
        return Err(Error::InvalidBounds { lower: a, upper: b });
    }
    if !s.is_square() || s.cols() != g.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator with right-hand side of length {}",
            s.rows(),
            s.cols(),
            g.len()
        )));
    }
    let mut f = CVec::zeros(g.len());
    let g_norm = g.norm();
    let mut report = SolveReport {
        iterations: 0,
        residual_history: vec![if g_norm > 0.0 { 1.0 } else { 0.0 }],
        true_residual: if g_norm > 0.0 { 1.0 } else { 0.0 },
        converged: g_norm == 0.0,
        condition_estimate: b / a,
    };
    if report.converged {
        return Ok((f, report));
    }
    let one = Complex64::new(1.0, 0.0);
    let relax = Complex64::new(2.0 / (a + b), 0.0);
    let mut r = g.clone();
    while report.iterations < max_iter {
        f.axpy(relax, &r, one);
        // r_{k+1} = (I - w S) r_k
        let sr = s.matrix() * &r;
        r.axpy(-relax, &sr, one);
        report.iterations += 1;
        let mut rel = r.norm() / g_norm;
        if rel <= tol {
            let true_r = g - s.matrix() * &f;
            let true_rel = true_r.norm() / g_norm;
            if true_rel > tol {
                r = true_r;
                rel = true_rel;
            } else {
                report.residual_history.push(rel);
                report.true_residual = true_rel;
                report.converged = true;
                return Ok((f, report));
            }
        }
        report.residual_history.push(rel);
    }
    report.true_residual = (g - s.matrix() * &f).norm() / g_norm;
    Ok((f, report))
}

/// The frame algorithm for `S f = g` with bounds `A <= S <= B`.
pub fn frame_algorithm(s: &LinOp, a: f64, b: f64, g: &CVec, tol: f64, max_iter: usize) -> Result<(CVec, SolveReport)> {
    let (f, report) = richardson(s, a, b, g, tol, max_iter)?;
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            residual: report.final_residual(),
        });
    }
    Ok((f, report))
}

/// `lambda_max / lambda_min` of a positive-definite operator.
pub fn condition_number(s: &LinOp) -> Result<f64> {
    let (lo, hi) = s.hermitian_extremes()?;
    let tol = s.default_tol();
    if lo <= tol {
        return Err(Error::NotPositiveDefinite { min_eig: lo, tol });
    }
    Ok(hi / lo)
}

/// Unpreconditioned frame algorithm on `S_Lambda` with its optimal bounds.
pub fn plain_solve(frame: &GFrame, g: &CVec, tol: f64, max_iter: usize) -> Result<(CVec, SolveReport)> {
    let bounds = frame.frame_bounds();
    let ftol = frame.default_tol();
    if bounds.lower <= ftol {
        return Err(Error::NotAFrame { lower: bounds.lower, tol: ftol });
    }
    frame_algorithm(&frame.frame_operator(), bounds.lower, bounds.upper, g, tol, max_iter)
}

/// Everything [`preconditioned_solve`] needs, prepared once per controller.
#[derive(Clone, Debug)]
pub struct PreconditionedSystem {
    /// Hermitian part of `C S C`.
    pub operator: LinOp,
    pub lower: f64,
    pub upper: f64,
    /// Tolerance on the `L`-residual that guarantees `||S f - g|| <= 10 tol ||g||`.
    pub inner_tol: f64,
}

impl PreconditionedSystem {
    pub fn new(frame: &GFrame, c: &Controller, c2: &Controller, tol: f64) -> Result<Self> {
        let scale = c.norm().max(c2.norm());
        if c.op().max_abs_diff(c2.op())? > 1e-12 * scale {
            return Err(Error::AsymmetricController);
        }
        let bounds = controlled_bounds(frame, c, c)?;
        let ftol = 1e-10 * bounds.upper;
        if !(bounds.lower > ftol) {
            return Err(Error::NotAFrame { lower: bounds.lower, tol: ftol });
        }
        let operator = controlled_frame_operator(frame, c, c)?.hermitian_part()?;
        // ||S f - g|| <= kappa(C) ||L h - C g|| / ||C g|| * ||g||
        let inner_tol = tol * (10.0 / c.condition()).min(1.0);
        Ok(Self {
            operator,
            lower: bounds.lower,
            upper: bounds.upper,
            inner_tol,
        })
    }
}

/// Frame algorithm on `C S C h = C g`, returning `f = C h`.
///
/// Only the symmetric pair `C' = C` is accepted. The report describes the
/// iteration on the controlled operator.
pub fn preconditioned_solve(
    frame: &GFrame,
    c: &Controller,
    c2: &Controller,
    g: &CVec,
    tol: f64,
    max_iter: usize,
) -> Result<(CVec, SolveReport)> {
    let system = PreconditionedSystem::new(frame, c, c2, tol)?;
    let rhs = c.op().apply(g)?;
    let (h, report) = frame_algorithm(&system.operator, system.lower, system.upper, &rhs, system.inner_tol, max_iter)?;
    Ok((c.op().apply(&h)?, report))
}

/// `||S f - g|| / ||g||` on the original frame operator.
pub fn relative_residual(s: &LinOp, f: &CVec, g: &CVec) -> f64 {
    let g_norm = g.norm();
    let r = (g - s.matrix() * f).norm();
    if g_norm > 0.0 {
        r / g_norm
    } else {
        r
    }
}
