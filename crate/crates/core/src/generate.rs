//! Seeded generation of frames, controllers and symbols from an [`ExperimentConfig`].

use std::path::Path;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::controlled::Controller;
use crate::error::{Error, Result};
use crate::gframe::GFrame;
use crate::linop::{CVec, LinOp};
use crate::multiplier::Symbol;
use crate::random::{complex_gaussian, derive_seed, random_matrix, random_spd, random_vector, rng, LabRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Identity,
    Scalar,
    Jacobi,
    ExactSqrtInverse,
    RandomCommuting,
    RandomNoncommuting,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 6] = [
        ControllerKind::Identity,
        ControllerKind::Scalar,
        ControllerKind::Jacobi,
        ControllerKind::ExactSqrtInverse,
        ControllerKind::RandomCommuting,
        ControllerKind::RandomNoncommuting,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Identity => "identity",
            ControllerKind::Scalar => "scalar",
            ControllerKind::Jacobi => "jacobi",
            ControllerKind::ExactSqrtInverse => "exact_sqrt_inverse",
            ControllerKind::RandomCommuting => "random_commuting",
            ControllerKind::RandomNoncommuting => "random_noncommuting",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolKind {
    /// `m_i = 1`.
    Ones,
    /// Complex Gaussian weights normalized to unit `l^p` norm.
    RandomLp { p: f64 },
    /// `m_i = 1/(i+1)^2`.
    Decaying,
}

fn default_diag_scale() -> f64 {
    1.0
}

fn default_max_iter() -> usize {
    2_000_000
}

fn default_instances() -> usize {
    1
}

/// Parameters of one experiment. Loaded from JSON by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dim_h: usize,
    pub block_dims: Vec<usize>,
    /// Target `B/A` of the generated frame operator (before diagonal scaling).
    pub condition_target: f64,
    pub controller_kind: ControllerKind,
    pub symbol_kind: SymbolKind,
    pub tol: f64,
    /// Dynamic range of the diagonal scaling `Lambda_i -> Lambda_i D`; 1 disables it.
    #[serde(default = "default_diag_scale")]
    pub diag_scale: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Number of generated instances checked by `verify`.
    #[serde(default = "default_instances")]
    pub instances: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            dim_h: 8,
            block_dims: vec![3, 3, 3, 3],
            condition_target: 10.0,
            controller_kind: ControllerKind::Identity,
            symbol_kind: SymbolKind::Ones,
            tol: 1e-10,
            diag_scale: 1.0,
            max_iter: default_max_iter(),
            instances: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.dim_h == 0 {
            return bad("dim_h must be at least 1".into());
        }
        if self.block_dims.is_empty() || self.block_dims.contains(&0) {
            return bad("block_dims must be non-empty with positive entries".into());
        }
        if !(self.condition_target >= 1.0 && self.condition_target.is_finite()) {
            return bad(format!("condition_target must be >= 1, got {}", self.condition_target));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.diag_scale >= 1.0 && self.diag_scale.is_finite()) {
            return bad(format!("diag_scale must be >= 1, got {}", self.diag_scale));
        }
        let total: usize = self.block_dims.iter().sum();
        if total < self.dim_h {
            return bad(format!(
                "blocks of total dimension {total} cannot form a g-frame for C^{}",
                self.dim_h
            ));
        }
        if let SymbolKind::RandomLp { p } = self.symbol_kind {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::InvalidExponent(p));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration for the `index`-th instance of a multi-instance run.
    pub fn instance(&self, index: usize) -> ExperimentConfig {
        ExperimentConfig {
            seed: derive_seed(self.seed, 1000 + index as u64),
            ..self.clone()
        }
    }
}

/// Sub-stream indices of a single instance.
mod stream {
    pub const FRAME: u64 = 0;
    pub const CONTROLLER: u64 = 1;
    pub const SYMBOL: u64 = 2;
    pub const PARTNER: u64 = 3;
    pub const RHS: u64 = 4;
}

pub fn stream_rng(seed: u64, stream: u64) -> LabRng {
    rng(derive_seed(seed, stream))
}

/// Geometric spectrum from 1 to `kappa` with `n` points.
fn spectrum(n: usize, kappa: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|j| kappa.powf(j as f64 / (n - 1) as f64)).collect()
}

/// Random g-frame whose frame operator has spectrum `{kappa^(j/(n-1))}`.
///
/// Blocks are i.i.d. complex Gaussian; the stacked analysis matrix
/// `U Sigma V^*` then has its singular values replaced by the square roots
/// of the target spectrum, so `S = V diag(lambda) V^*` and `B/A = kappa`.
pub fn conditioned_frame<R: Rng + ?Sized>(rng: &mut R, dim_h: usize, block_dims: &[usize], kappa: f64) -> Result<GFrame> {
    let total: usize = block_dims.iter().sum();
    if total < dim_h {
        return Err(Error::InvalidArgument(format!(
            "blocks of total dimension {total} cannot form a g-frame for C^{dim_h}"
        )));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("condition target {kappa} < 1")));
    }
    let stacked = random_matrix(rng, total, dim_h).into_matrix();
    let svd = SVD::new(stacked, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^*");
    let sigma: Vec<Complex64> = spectrum(dim_h, kappa)
        .iter()
        .map(|l| Complex64::new(l.sqrt(), 0.0))
        .collect();
    let mut us = u.clone();
    for (j, s) in sigma.iter().enumerate() {
        for i in 0..us.nrows() {
            us[(i, j)] *= s;
        }
    }
    let analysis: DMatrix<Complex64> = us * v_t;
    let mut blocks = Vec::with_capacity(block_dims.len());
    let mut row = 0;
    for &d in block_dims {
        blocks.push(LinOp::from_matrix(analysis.rows(row, d).into_owned()));
        row += d;
    }
    GFrame::new(dim_h, blocks)
}

/// `Lambda_i -> Lambda_i D` with `D = diag(range^(j/(n-1)))`, so `S -> D S D`.
pub fn diagonally_scaled(frame: &GFrame, range: f64) -> Result<GFrame> {
    let d = LinOp::diag_real(&spectrum(frame.dim_h(), range));
    frame.map_blocks(|_, b| b * &d)
}

pub fn generate_frame(cfg: &ExperimentConfig) -> Result<GFrame> {
    cfg.validate()?;
    let mut r = stream_rng(cfg.seed, stream::FRAME);
    let frame = conditioned_frame(&mut r, cfg.dim_h, &cfg.block_dims, cfg.condition_target)?;
    if cfg.diag_scale > 1.0 {
        diagonally_scaled(&frame, cfg.diag_scale)
    } else {
        Ok(frame)
    }
}

/// A second frame with the same block structure, for multiplier experiments.
pub fn generate_partner(cfg: &ExperimentConfig) -> Result<GFrame> {
    cfg.validate()?;
    let mut r = stream_rng(cfg.seed, stream::PARTNER);
    conditioned_frame(&mut r, cfg.dim_h, &cfg.block_dims, cfg.condition_target)
}

/// `p(S / ||S||)` with positive coefficients, degree at most 3.
pub fn positive_polynomial<R: Rng + ?Sized>(rng: &mut R, s: &LinOp) -> Result<Controller> {
    let n = s.rows();
    let x = s.scale_real(1.0 / s.op_norm());
    let mut acc = LinOp::identity(n).scale_real(rng.random_range(0.1..1.0));
    let mut power = LinOp::identity(n);
    for _ in 0..3 {
        power = &power * &x;
        acc = &acc + &power.scale_real(rng.random_range(0.0..1.0));
    }
    Controller::new(crate::random::hermitize(&acc))
}

pub fn generate_controller(kind: ControllerKind, frame: &GFrame, seed: u64) -> Result<Controller> {
    let n = frame.dim_h();
    let mut r = stream_rng(seed, stream::CONTROLLER);
    let s = frame.frame_operator();
    match kind {
        ControllerKind::Identity => Ok(Controller::identity(n)),
        ControllerKind::Scalar => Controller::scalar(n, r.random_range(0.5..4.0)),
        ControllerKind::Jacobi => {
            let diag: Vec<f64> = (0..n).map(|i| 1.0 / s.get(i, i).re.sqrt()).collect();
            Controller::new(LinOp::diag_real(&diag))
        }
        ControllerKind::ExactSqrtInverse => {
            let tol = s.default_tol();
            s.certify_glplus(tol)?;
            Controller::new(s.hermitian_map(|l| 1.0 / l.sqrt())?)
        }
        ControllerKind::RandomCommuting => positive_polynomial(&mut r, &s),
        ControllerKind::RandomNoncommuting => Controller::new(random_spd(&mut r, n, 0.5, 2.0)),
    }
}

pub fn generate_symbol(kind: SymbolKind, len: usize, seed: u64) -> Result<Symbol> {
    let mut r = stream_rng(seed, stream::SYMBOL);
    match kind {
        SymbolKind::Ones => Ok(Symbol::ones(len)),
        SymbolKind::Decaying => Ok(Symbol::from_real(
            &(0..len).map(|i| 1.0 / ((i + 1) * (i + 1)) as f64).collect::<Vec<_>>(),
        )),
        SymbolKind::RandomLp { p } => {
            let raw = Symbol::new((0..len).map(|_| complex_gaussian(&mut r)).collect());
            let norm = raw.lp_norm(p)?;
            Ok(Symbol::new(raw.weights().iter().map(|w| w / norm).collect()))
        }
    }
}

pub fn generate_rhs(cfg: &ExperimentConfig) -> CVec {
    let mut r = stream_rng(cfg.seed, stream::RHS);
    random_vector(&mut r, cfg.dim_h)
}

/// Frame, partner frame, controller and symbol for one configuration.
#[derive(Clone, Debug)]
pub struct Instance {
    pub frame: GFrame,
    pub partner: GFrame,
    pub controller: Controller,
    pub symbol: Symbol,
}

pub fn generate_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let frame = generate_frame(cfg)?;
    let partner = generate_partner(cfg)?;
    let controller = generate_controller(cfg.controller_kind, &frame, cfg.seed)?;
    let symbol = generate_symbol(cfg.symbol_kind, frame.len(), cfg.seed)?;
    Ok(Instance {
        frame,
        partner,
        controller,
        symbol,
    })
}
