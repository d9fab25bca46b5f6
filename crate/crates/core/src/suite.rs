//! The invariant suite run by `gframe-lab verify`.
//!
//! Each [`Check`] records the worst measured violation over its samples and
//! the tolerance it is held to; it passes iff `measured <= tolerance`.

use serde::Serialize;

use crate::controlled::{
    c2_bounds_from_controlled, commuting_controlled_bounds, controlled_bounds, controlled_bounds_from_c2,
    controlled_frame_operator, controlled_quadratic_form, Controller,
};
use crate::error::{Error, Result};
use crate::gframe::GFrame;
use crate::generate::positive_polynomial;
use crate::linop::LinOp;
use crate::multiplier::{
    controlled_multiplier, controlled_multiplier_norm_bound, controlled_multiplier_product, multiplier,
    multiplier_adjoint_check, multiplier_factored, multiplier_schatten, weighted, Symbol,
};
use crate::random::{random_unit_vector, rng, LabRng};

pub const UNIT_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst violation observed (negative when the inequality holds with margin).
    pub measured: f64,
    pub tolerance: f64,
    /// `tolerance - measured`.
    pub slack: f64,
}

impl Check {
    pub fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            slack: tolerance - measured,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

/// Per-check aggregate over instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: bool,
    pub failures: usize,
    pub runs: usize,
    pub worst_measured: f64,
    pub tolerance: f64,
    pub min_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub instances: usize,
    pub passed: bool,
    pub summary: Vec<CheckSummary>,
    pub checks: Vec<Vec<Check>>,
}

impl Report {
    pub fn from_instances(checks: Vec<Vec<Check>>) -> Self {
        let mut summary: Vec<CheckSummary> = Vec::new();
        for inst in &checks {
            for c in inst {
                match summary.iter_mut().find(|s| s.name == c.name) {
                    Some(s) => {
                        s.runs += 1;
                        s.failures += usize::from(!c.passed);
                        s.passed &= c.passed;
                        s.worst_measured = s.worst_measured.max(c.measured);
                        s.min_slack = s.min_slack.min(c.slack);
                    }
                    None => summary.push(CheckSummary {
                        name: c.name.clone(),
                        passed: c.passed,
                        failures: usize::from(!c.passed),
                        runs: 1,
                        worst_measured: c.measured,
                        tolerance: c.tolerance,
                        min_slack: c.slack,
                    }),
                }
            }
        }
        Self {
            instances: checks.len(),
            passed: summary.iter().all(|s| s.passed),
            summary,
            checks,
        }
    }
}

fn unit_samples(r: &mut LabRng, n: usize) -> Vec<crate::linop::CVec> {
    (0..UNIT_SAMPLES).map(|_| random_unit_vector(r, n)).collect()
}

fn rel(defect: f64, scale: f64) -> f64 {
    defect / scale.max(1.0)
}

/// All checks on one (frame, partner, controller, symbol) instance.
///
/// `partner` must share the block structure of `frame`; `seed` drives the
/// random probe vectors and the internally generated commuting controllers.
pub fn run_instance(frame: &GFrame, partner: &GFrame, c: &Controller, m: &Symbol, seed: u64) -> Result<Vec<Check>> {
    let n = frame.dim_h();
    let mut r = rng(seed);
    let mut out = Vec::new();
    let fb = frame.frame_bounds();
    let s = frame.frame_operator();
    let id = Controller::identity(n);
    let probes = unit_samples(&mut r, n);

    // g-frame inequality with optimal bounds
    let mut worst = f64::NEG_INFINITY;
    for f in &probes {
        let e = frame.analysis(f)?.norm_sq();
        worst = worst.max(fb.lower - e).max(e - fb.upper);
    }
    out.push(Check::new("frame_inequality", worst, 1e-9));
    out.push(Check::flag("is_g_frame", frame.is_g_frame(frame.default_tol())));

    let t = frame.synthesis_matrix();
    out.push(Check::new(
        "frame_operator_is_synthesis_analysis",
        rel(s.max_abs_diff(&(&t * &t.adjoint()))?, fb.upper),
        1e-12,
    ));
    out.push(Check::new("synthesis_norm", t.op_norm() - fb.upper.sqrt(), 1e-9));

    let dual = frame.canonical_dual()?;
    let mut mixed = LinOp::zeros(n, n);
    for (l, d) in frame.blocks().iter().zip(dual.blocks()) {
        mixed = &mixed + &(&l.adjoint() * d);
    }
    out.push(Check::new(
        "resolution_of_identity",
        mixed.try_sub(&LinOp::identity(n))?.op_norm(),
        1e-9,
    ));
    let mut worst = 0.0f64;
    for f in probes.iter().take(10) {
        let back = frame.reconstruct(&frame.analysis(f)?)?;
        worst = worst.max((&back - f).norm());
    }
    out.push(Check::new("reconstruction", worst, 1e-9));
    let db = dual.frame_bounds();
    out.push(Check::new(
        "dual_bounds",
        (db.lower * fb.upper - 1.0).abs().max((db.upper * fb.lower - 1.0).abs()),
        1e-8,
    ));

    // controller certificate and square root
    let cert = c.cert();
    let cop = c.op();
    let ctol = 1e-10 * cert.upper.max(1.0);
    out.push(Check::flag(
        "glplus_order",
        LinOp::identity(n).scale_real(cert.lower).op_order_leq(cop, ctol)?
            && cop.op_order_leq(&LinOp::identity(n).scale_real(cert.upper), ctol)?,
    ));
    let inv = c.inverse()?;
    out.push(Check::new(
        "glplus_inverse_bounds",
        (inv.cert().lower * cert.upper - 1.0)
            .abs()
            .max((inv.cert().upper * cert.lower - 1.0).abs()),
        1e-8,
    ));
    let root = s.sqrt()?;
    out.push(Check::new(
        "sqrt_squares_back",
        (&(&root * &root) - &s).op_norm() / s.op_norm(),
        1e-10,
    ));
    out.push(Check::flag("sqrt_commutes", root.commutes(&s, 1e-10)?));

    // controlled operator, both C^2 directions
    let l = controlled_frame_operator(frame, c, c)?;
    out.push(Check::new(
        "controlled_product_identity",
        rel(l.max_abs_diff(&(&(cop * &s) * cop))?, l.max_abs_entry()),
        1e-12,
    ));
    let cc = controlled_bounds(frame, c, c)?;
    let mut worst = 0.0f64;
    for f in &probes {
        let q = controlled_quadratic_form(frame, c, c, f)?.re;
        let direct = frame.analysis(&cop.apply(f)?)?.norm_sq();
        worst = worst.max((q - direct).abs() / direct.max(1.0));
    }
    out.push(Check::new("c2_form_is_energy_of_c_f", worst, 1e-10));
    let derived = c2_bounds_from_controlled(cc.lower, cc.upper, c)?;
    out.push(Check::new(
        "c2_equivalence_controlled_to_frame",
        (derived.lower - fb.lower).max(fb.upper - derived.upper),
        1e-9,
    ));
    let outer = controlled_bounds_from_c2(fb.lower, fb.upper, c)?;
    out.push(Check::new(
        "c2_equivalence_frame_to_controlled",
        (outer.lower - cc.lower).max(cc.upper - outer.upper),
        1e-9,
    ));
    for (name, c2) in [("controlled_order_cc", c), ("controlled_order_c_identity", &id)] {
        let b = controlled_bounds(frame, c, c2)?;
        let herm = controlled_frame_operator(frame, c, c2)?.hermitian_part()?;
        let tol = 1e-10 * b.upper.abs().max(1.0);
        let ok = LinOp::identity(n).scale_real(b.lower).op_order_leq(&herm, tol)?
            && herm.op_order_leq(&LinOp::identity(n).scale_real(b.upper), tol)?;
        out.push(Check::flag(name, ok));
        let mut worst = f64::NEG_INFINITY;
        for f in &probes {
            let q = controlled_quadratic_form(frame, c, c2, f)?.re;
            worst = worst.max(b.lower - q).max(q - b.upper);
        }
        out.push(Check::new(&format!("{name}_inequality"), rel(worst, b.upper), 1e-9));
    }

    // commuting bounds: supplied controller (either branch) and polynomial controllers
    match commuting_controlled_bounds(frame, c, c, 1e-10) {
        Ok(b) => out.push(Check::new(
            "commuting_sandwich_supplied",
            rel((b.lower - cc.lower).max(cc.upper - b.upper), cc.upper),
            1e-9,
        )),
        Err(Error::CommutationViolated(_)) => {
            out.push(Check::flag("commuting_sandwich_supplied", !cop.commutes(&s, 1e-10)?))
        }
        Err(e) => return Err(e),
    }
    let p1 = positive_polynomial(&mut r, &s)?;
    let p2 = positive_polynomial(&mut r, &s)?;
    let b = commuting_controlled_bounds(frame, &p1, &p2, 1e-10)?;
    let pb = controlled_bounds(frame, &p1, &p2)?;
    out.push(Check::new(
        "commuting_sandwich_polynomial",
        rel((b.lower - pb.lower).max(pb.upper - b.upper), pb.upper),
        1e-9,
    ));
    out.push(Check::new("commuting_hermitian_defect", pb.hermitian_defect, 1e-9));

    // multipliers
    let direct = multiplier(m, frame, partner)?;
    let scale = direct.max_abs_entry();
    out.push(Check::new(
        "multiplier_factorization",
        rel(direct.max_abs_diff(&multiplier_factored(m, frame, partner)?)?, scale),
        1e-12,
    ));
    out.push(Check::new(
        "multiplier_adjoint",
        rel(multiplier_adjoint_check(m, frame, partner)?, direct.op_norm()),
        1e-12,
    ));
    let pair = multiplier(&Symbol::ones(frame.len()), frame, &dual)?;
    out.push(Check::new(
        "pair_dual_identity",
        pair.try_sub(&LinOp::identity(n))?.op_norm(),
        1e-9,
    ));
    let wb = weighted(m, partner)?.frame_bounds();
    let pbounds = partner.frame_bounds();
    out.push(Check::new(
        "weighted_bessel_bound",
        rel(wb.upper - m.sup_norm().powi(2) * pbounds.upper, wb.upper),
        1e-9,
    ));
    let cm = controlled_multiplier(m, c, partner, frame, c)?;
    out.push(Check::new(
        "controlled_multiplier_factorization",
        rel(
            cm.max_abs_diff(&controlled_multiplier_product(m, c, partner, frame, c)?)?,
            cm.max_abs_entry(),
        ),
        1e-12,
    ));
    let nb = controlled_multiplier_norm_bound(m, c, partner, frame, c)?;
    out.push(Check::new("controlled_multiplier_norm_bound", rel(nb.norm - nb.bound, nb.bound), 1e-9));
    for p in [1.0, 2.0] {
        let est = multiplier_schatten(m, c, partner, frame, c, p)?;
        out.push(Check::new(
            &format!("multiplier_schatten_bound_p{p}"),
            rel(est.norm - est.bound, est.bound),
            1e-9,
        ));
    }

    // Schatten identities on the controlled multiplier
    let norms: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&p| cm.schatten_norm(p))
        .collect::<Result<_>>()?;
    let top = norms[0].max(1.0);
    out.push(Check::new("schatten_frobenius", rel((norms[1] - cm.frobenius_norm()).abs(), top), 1e-10));
    let adj = cm.adjoint();
    let gram = &adj * &cm;
    let abs = gram.sqrt_with_tol(0.0)?;
    let mut worst_adj = 0.0f64;
    let mut worst_gram = 0.0f64;
    let mut worst_abs = 0.0f64;
    for (k, &p) in [1.0, 2.0, 4.0].iter().enumerate() {
        worst_adj = worst_adj.max((norms[k] - adj.schatten_norm(p)?).abs() / top);
        if p >= 2.0 {
            let g = gram.schatten_norm(p / 2.0)?;
            worst_gram = worst_gram.max((norms[k].powi(2) - g).abs() / top.powi(2));
        }
        let abs_p = abs.hermitian_map(|x| x.max(0.0).powf(p))?;
        worst_abs = worst_abs.max((norms[k].powf(p) - abs_p.schatten_norm(1.0)?).abs() / top.powf(p));
    }
    out.push(Check::new("schatten_adjoint", worst_adj, 1e-10));
    out.push(Check::new("schatten_gram", worst_gram, 1e-10));
    out.push(Check::new("schatten_abs_power", worst_abs, 1e-10));
    let op = cm.op_norm();
    let mono = (norms[1] - norms[0]).max(norms[2] - norms[1]).max(op - norms[2]);
    out.push(Check::new("schatten_monotone", rel(mono, top), 1e-10));

    Ok(out)
}
