//! g-multipliers `M = sum_i m_i Lambda_i^* Theta_i` and their controlled form
//! `sum_i m_i C Theta_i^* Lambda_i C'`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controlled::{controlled_bounds, Controller};
use crate::error::{Error, Result};
use crate::gframe::{BlockVector, GFrame};
use crate::linop::{CVec, LinOp};

/// Finite complex weight sequence, one weight per frame block.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    weights: Vec<Complex64>,
}

impl Symbol {
    pub fn new(weights: Vec<Complex64>) -> Self {
        Self { weights }
    }

    pub fn from_real(weights: &[f64]) -> Self {
        Self::new(weights.iter().map(|&w| Complex64::new(w, 0.0)).collect())
    }

    pub fn ones(n: usize) -> Self {
        Self::from_real(&vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_real(&vec![0.0; n])
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn conj(&self) -> Symbol {
        Symbol::new(self.weights.iter().map(Complex64::conj).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(self.weights.iter().map(|w| w.norm().powf(p)).sum::<f64>().powf(1.0 / p))
    }

    pub fn try_add(&self, other: &Symbol) -> Result<Symbol> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!("symbols of length {} and {}", self.len(), other.len())));
        }
        Ok(Symbol::new(self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect()))
    }

    pub fn to_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.weights.iter().map(|w| [w.re, w.im]).collect();
        serde_json::to_string(&pairs).expect("pairs always serialize")
    }

    /// Parses a JSON array of `[re, im]` pairs.
    pub fn from_json(s: &str) -> Result<Self> {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(s)?;
        Ok(Symbol::new(pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.weights.iter().map(|w| [w.re, w.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(Symbol::new(pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
    }
}

fn check_compatible(m: &Symbol, synth: &GFrame, anal: &GFrame) -> Result<()> {
    if synth.dim_h() != anal.dim_h() {
        return Err(Error::DimensionMismatch(format!(
            "frames on C^{} and C^{}",
            synth.dim_h(),
            anal.dim_h()
        )));
    }
    if synth.block_dims() != anal.block_dims() {
        return Err(Error::DimensionMismatch(format!(
            "block dimensions {:?} and {:?}",
            synth.block_dims(),
            anal.block_dims()
        )));
    }
    if m.len() != synth.len() {
        return Err(Error::DimensionMismatch(format!(
            "symbol of length {} for {} blocks",
            m.len(),
            synth.len()
        )));
    }
    Ok(())
}

/// `M_{m, Lambda, Theta} = sum_i m_i Lambda_i^* Theta_i`, summed directly.
pub fn multiplier(m: &Symbol, synth: &GFrame, anal: &GFrame) -> Result<LinOp> {
    check_compatible(m, synth, anal)?;
    let n = synth.dim_h();
    let mut acc = LinOp::zeros(n, n).into_matrix();
    for ((l, t), &w) in synth.blocks().iter().zip(anal.blocks()).zip(m.weights()) {
        acc += l.matrix().ad_mul(t.matrix()) * w;
    }
    Ok(LinOp::from_matrix(acc))
}

/// `T_Lambda D_m T_Theta^*`: analysis by `anal`, blockwise scaling, synthesis by `synth`,
/// applied to each standard basis vector.
pub fn multiplier_factored(m: &Symbol, synth: &GFrame, anal: &GFrame) -> Result<LinOp> {
    check_compatible(m, synth, anal)?;
    let n = synth.dim_h();
    let mut out = LinOp::zeros(n, n).into_matrix();
    for j in 0..n {
        let mut e = CVec::zeros(n);
        e[j] = Complex64::new(1.0, 0.0);
        let coeffs = anal.analysis(&e)?.scale_blocks(m.weights())?;
        out.set_column(j, &synth.synthesis(&coeffs)?);
    }
    Ok(LinOp::from_matrix(out))
}

/// Applies `T_Lambda D_m T_Theta^*` to a single vector without assembling anything.
pub fn apply_multiplier(m: &Symbol, synth: &GFrame, anal: &GFrame, f: &CVec) -> Result<CVec> {
    check_compatible(m, synth, anal)?;
    let coeffs: BlockVector = anal.analysis(f)?.scale_blocks(m.weights())?;
    synth.synthesis(&coeffs)
}

/// The weighted family `{m_i Theta_i}`.
pub fn weighted(m: &Symbol, g: &GFrame) -> Result<GFrame> {
    if m.len() != g.len() {
        return Err(Error::DimensionMismatch(format!("symbol of length {} for {} blocks", m.len(), g.len())));
    }
    g.map_blocks(|i, b| b.scale(m.weights()[i]))
}

/// `||M_{m,Lambda,Theta}^* - M_{conj m, Theta, Lambda}||` in operator norm.
pub fn multiplier_adjoint_check(m: &Symbol, synth: &GFrame, anal: &GFrame) -> Result<f64> {
    let lhs = multiplier(m, synth, anal)?.adjoint();
    let rhs = multiplier(&m.conj(), anal, synth)?;
    Ok(lhs.try_sub(&rhs)?.op_norm())
}

fn check_controllers(c: &Controller, c2: &Controller, n: usize) -> Result<()> {
    if c.dim() != n || c2.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "controllers of size {} and {} for frames on C^{n}",
            c.dim(),
            c2.dim()
        )));
    }
    Ok(())
}

/// `M_{m C Theta Lambda C'} = sum_i m_i C Theta_i^* Lambda_i C'`, summed directly.
pub fn controlled_multiplier(
    m: &Symbol,
    c: &Controller,
    theta: &GFrame,
    lambda: &GFrame,
    c2: &Controller,
) -> Result<LinOp> {
    check_compatible(m, theta, lambda)?;
    check_controllers(c, c2, theta.dim_h())?;
    let n = theta.dim_h();
    let mut acc = LinOp::zeros(n, n).into_matrix();
    for ((t, l), &w) in theta.blocks().iter().zip(lambda.blocks()).zip(m.weights()) {
        let left = c.op().matrix() * t.matrix().adjoint();
        let right = l.matrix() * c2.op().matrix();
        acc += left * right * w;
    }
    Ok(LinOp::from_matrix(acc))
}

/// `C M_{m, Theta, Lambda} C'` through the factored multiplier.
pub fn controlled_multiplier_product(
    m: &Symbol,
    c: &Controller,
    theta: &GFrame,
    lambda: &GFrame,
    c2: &Controller,
) -> Result<LinOp> {
    check_controllers(c, c2, theta.dim_h())?;
    let inner = multiplier_factored(m, theta, lambda)?;
    Ok(&(c.op() * &inner) * c2.op())
}

/// Operator norm of a controlled multiplier next to its a-priori bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBound {
    /// `||M_{m C Theta Lambda C'}||`.
    pub norm: f64,
    /// `||m||_inf sqrt(B B')`.
    pub bound: f64,
    /// Optimal `C^2`-controlled Bessel bound of `Theta`.
    pub theta_bessel: f64,
    /// Optimal `C'^2`-controlled Bessel bound of `Lambda`.
    pub lambda_bessel: f64,
}

impl NormBound {
    pub fn slack(&self) -> f64 {
        self.bound - self.norm
    }
}

/// `(||M||, ||m||_inf sqrt(B B'))` with `B` the `C^2`-controlled Bessel bound of `theta`
/// and `B'` the `C'^2`-controlled Bessel bound of `lambda`.
pub fn controlled_multiplier_norm_bound(
    m: &Symbol,
    c: &Controller,
    theta: &GFrame,
    lambda: &GFrame,
    c2: &Controller,
) -> Result<NormBound> {
    let op = controlled_multiplier(m, c, theta, lambda, c2)?;
    let theta_bessel = controlled_bounds(theta, c, c)?.upper;
    let lambda_bessel = controlled_bounds(lambda, c2, c2)?.upper;
    if !(theta_bessel.is_finite() && lambda_bessel.is_finite()) {
        return Err(Error::InvalidArgument("families are not controlled g-Bessel".into()));
    }
    Ok(NormBound {
        norm: op.op_norm(),
        bound: m.sup_norm() * (theta_bessel.max(0.0) * lambda_bessel.max(0.0)).sqrt(),
        theta_bessel,
        lambda_bessel,
    })
}

/// Schatten norm of the blockwise scaling `D_m`: `(sum_i d_i |m_i|^p)^(1/p)`.
pub fn diagonal_schatten_norm(m: &Symbol, block_dims: &[usize], p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if m.len() != block_dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "symbol of length {} for {} blocks",
            m.len(),
            block_dims.len()
        )));
    }
    let sum: f64 = m
        .weights()
        .iter()
        .zip(block_dims)
        .map(|(w, &d)| d as f64 * w.norm().powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Schatten norm of a controlled multiplier next to the ideal-property bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchattenEstimate {
    pub p: f64,
    /// `||M_{m C Theta Lambda C'}||_p`.
    pub norm: f64,
    /// `||C|| ||C'|| ||T_Theta|| ||T_Lambda|| ||D_m||_p`.
    pub bound: f64,
}

pub fn multiplier_schatten(
    m: &Symbol,
    c: &Controller,
    theta: &GFrame,
    lambda: &GFrame,
    c2: &Controller,
    p: f64,
) -> Result<SchattenEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let op = controlled_multiplier(m, c, theta, lambda, c2)?;
    let norm = op.schatten_norm(p)?;
    let d_m = diagonal_schatten_norm(m, &theta.block_dims(), p)?;
    let bound = c.norm() * c2.norm() * theta.synthesis_matrix().op_norm() * lambda.synthesis_matrix().op_norm() * d_m;
    Ok(SchattenEstimate { p, norm, bound })
}
