// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
// Reference quantities are assembled here from raw nalgebra matrices (direct sums,
// LU inverses, SVD and Hermitian eigendecompositions) rather than through the
// library routines being checked.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gframe_lab::cli::bench;
use gframe_lab::controlled::{
    c2_bounds_from_controlled, commuting_controlled_bounds, controlled_bounds_from_c2,
};
use gframe_lab::generate::{
    generate_controller, generate_instance, generate_rhs, generate_frame, positive_polynomial, ControllerKind,
    ExperimentConfig, SymbolKind,
};
use gframe_lab::multiplier::{
    controlled_multiplier, controlled_multiplier_norm_bound, multiplier, multiplier_factored,
};
use gframe_lab::random::{derive_seed, random_matrix, random_spd, random_unit_vector, rng};
use gframe_lab::recon::{plain_solve, preconditioned_solve, relative_residual};
use gframe_lab::{Complex64, Controller, Error, GFrame, Symbol};
use nalgebra::DMatrix;
use rand::Rng;

type M = DMatrix<Complex64>;

const INSTANCES: usize = 50;
const SEED: u64 = 0x5eed_0001;

struct Case {
    frame: GFrame,
    partner: GFrame,
    controller: Controller,
    symbol: Symbol,
    seed: u64,
}

fn cases() -> Vec<Case> {
    let kinds = ControllerKind::ALL;
    let symbols = [
        SymbolKind::Ones,
        SymbolKind::RandomLp { p: 1.0 },
        SymbolKind::RandomLp { p: 2.0 },
        SymbolKind::Decaying,
    ];
    (0..INSTANCES)
        .map(|i| {
            let seed = derive_seed(SEED, i as u64);
            let mut r = rng(seed);
            let dim_h = r.random_range(2..=32);
            let block_dims = loop {
                let k = r.random_range(1..=16);
                let dims: Vec<usize> = (0..k).map(|_| r.random_range(1..=8)).collect();
                if dims.iter().sum::<usize>() >= dim_h {
                    break dims;
                }
            };
            let cfg = ExperimentConfig {
                seed,
                dim_h,
                block_dims,
                condition_target: r.random_range(1.0..30.0),
                controller_kind: kinds[i % kinds.len()],
                symbol_kind: symbols[i % symbols.len()],
                ..ExperimentConfig::default()
            };
            let inst = generate_instance(&cfg).expect("instance");
            Case {
                frame: inst.frame,
                partner: inst.partner,
                controller: inst.controller,
                symbol: inst.symbol,
                seed,
            }
        })
        .collect()
}

fn frame_op(f: &GFrame) -> M {
    let n = f.dim_h();
    let mut s = M::zeros(n, n);
    for b in f.blocks() {
        s += b.matrix().adjoint() * b.matrix();
    }
    s
}

fn herm(a: &M) -> M {
    (a + a.adjoint()).scale(0.5)
}

fn eig_extremes(a: &M) -> (f64, f64) {
    let ev = herm(a).symmetric_eigen().eigenvalues;
    (ev.min(), ev.max())
}

fn spec_norm(a: &M) -> f64 {
    a.clone().svd(false, false).singular_values.max()
}

fn schatten_ref(a: &M, p: f64) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
}

struct Outcome {
    worst: f64,
    tol: f64,
    note: String,
}

impl Outcome {
    fn new(worst: f64, tol: f64) -> Self {
        Self {
            worst,
            tol,
            note: String::new(),
        }
    }

    fn passed(&self) -> bool {
        self.worst <= self.tol
    }
}

fn flag(ok: bool, note: String) -> Outcome {
    Outcome {
        worst: if ok { 0.0 } else { 1.0 },
        tol: 0.0,
        note,
    }
}

fn frame_inequality(cases: &[Case]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for c in cases {
        let fb = c.frame.frame_bounds();
        let mut r = rng(derive_seed(c.seed, 11));
        for _ in 0..100 {
            let f = random_unit_vector(&mut r, c.frame.dim_h());
            let e: f64 = c.frame.blocks().iter().map(|b| (b.matrix() * &f).norm_squared()).sum();
            worst = worst.max(fb.lower - e).max(e - fb.upper);
        }
    }
    Outcome::new(worst, 1e-9)
}

fn resolution_of_identity(cases: &[Case]) -> Outcome {
    let mut worst = 0.0f64;
    for c in cases {
        let n = c.frame.dim_h();
        let s_inv = frame_op(&c.frame).try_inverse().expect("invertible frame operator");
        let mut acc = M::zeros(n, n);
        for b in c.frame.blocks() {
            acc += b.matrix().adjoint() * b.matrix() * &s_inv;
        }
        worst = worst.max(spec_norm(&(acc - M::identity(n, n))));
        let dual = c.frame.canonical_dual().expect("dual");
        let mut mixed = M::zeros(n, n);
        for (l, d) in c.frame.blocks().iter().zip(dual.blocks()) {
            mixed += l.matrix().adjoint() * d.matrix();
        }
        worst = worst.max(spec_norm(&(mixed - M::identity(n, n))));
    }
    Outcome::new(worst, 1e-9)
}

fn synthesis_norm(cases: &[Case]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for c in cases {
        let n = c.frame.dim_h();
        let total: usize = c.frame.block_dims().iter().sum();
        let mut t = M::zeros(n, total);
        let mut col = 0;
        for b in c.frame.blocks() {
            t.view_mut((0, col), (n, b.rows())).copy_from(&b.matrix().adjoint());
            col += b.rows();
        }
        let b_opt = c.frame.frame_bounds().upper;
        worst = worst.max(spec_norm(&t) - b_opt.sqrt());
        worst = worst.max((c.frame.synthesis_matrix().op_norm() - spec_norm(&t)).abs() - 1e-12);
    }
    Outcome::new(worst, 1e-9)
}

fn c2_equivalence(cases: &[Case]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for c in cases {
        let s = frame_op(&c.frame);
        let cm = c.controller.op().matrix();
        let (a_fr, b_fr) = eig_extremes(&s);
        let (a_cc, b_cc) = eig_extremes(&(cm * &s * cm));
        let (m_c, big_m_c) = eig_extremes(cm);
        let (c_norm, c_inv_norm) = (big_m_c, 1.0 / m_c);
        // controlled bounds to frame bounds
        let (lo, hi) = (a_cc / c_norm.powi(2), b_cc * c_inv_norm.powi(2));
        worst = worst.max(lo - a_fr).max(b_fr - hi);
        // frame bounds to controlled bounds
        let (lo, hi) = (a_fr / c_inv_norm.powi(2), b_fr * c_norm.powi(2));
        worst = worst.max(lo - a_cc).max(b_cc - hi);
        // the library transfers agree with the formulas
        let fwd = c2_bounds_from_controlled(a_cc, b_cc, &c.controller).expect("positive bound");
        let back = controlled_bounds_from_c2(a_fr, b_fr, &c.controller).expect("positive bound");
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        worst = worst.max(
            (rel(fwd.lower, a_cc / c_norm.powi(2)) + rel(fwd.upper, b_cc * c_inv_norm.powi(2))
                + rel(back.lower, a_fr / c_inv_norm.powi(2))
                + rel(back.upper, b_fr * c_norm.powi(2)))
                - 1e-9,
        );
    }
    Outcome::new(worst, 1e-9)
}

fn commuting_sandwich(cases: &[Case]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut violations_detected = 0;
    for c in cases {
        let s = c.frame.frame_operator();
        let mut r = rng(derive_seed(c.seed, 12));
        let p1 = positive_polynomial(&mut r, &s).expect("polynomial controller");
        let p2 = positive_polynomial(&mut r, &s).expect("polynomial controller");
        let sm = frame_op(&c.frame);
        let l = p2.op().matrix() * &sm * p1.op().matrix();
        let (lmin, lmax) = eig_extremes(&l);
        let (a, b) = eig_extremes(&sm);
        let (m1, big_m1) = eig_extremes(p1.op().matrix());
        let (m2, big_m2) = eig_extremes(p2.op().matrix());
        worst = worst.max(m1 * m2 * a - lmin).max(lmax - big_m1 * big_m2 * b);
        let got = commuting_controlled_bounds(&c.frame, &p1, &p2, 1e-10).expect("commuting controllers");
        worst = worst.max((got.lower - m1 * m2 * a).abs().max((got.upper - big_m1 * big_m2 * b).abs()) - 1e-9);

        let noncomm = Controller::new(random_spd(&mut r, c.frame.dim_h(), 0.5, 2.0)).expect("spd");
        if c.frame.dim_h() > 1 && !c.frame.is_tight(c.frame.default_tol()) {
            match commuting_controlled_bounds(&c.frame, &noncomm, &noncomm, 1e-10) {
                Err(Error::CommutationViolated(_)) => violations_detected += 1,
                _ => worst = worst.max(1.0),
            }
        }
    }
    let mut o = Outcome::new(worst, 1e-9);
    o.note = format!("CommutationViolated raised on {violations_detected} non-commuting pairs");
    o
}

fn stacked_synthesis(f: &GFrame) -> M {
    let n = f.dim_h();
    let total: usize = f.block_dims().iter().sum();
    let mut t = M::zeros(n, total);
    let mut col = 0;
    for b in f.blocks() {
        t.view_mut((0, col), (n, b.rows())).copy_from(&b.matrix().adjoint());
        col += b.rows();
    }
    t
}

fn block_diag(m: &Symbol, dims: &[usize]) -> M {
    let total: usize = dims.iter().sum();
    let mut d = M::zeros(total, total);
    let mut k = 0;
    for (w, &dim) in m.weights().iter().zip(dims) {
        for _ in 0..dim {
            d[(k, k)] = *w;
            k += 1;
        }
    }
    d
}

fn multiplier_identities(cases: &[Case]) -> Outcome {
    let mut worst = 0.0f64;
    for c in cases {
        let (lam, theta) = (&c.frame, &c.partner);
        let n = lam.dim_h();
        let mut direct = M::zeros(n, n);
        for ((l, t), w) in lam.blocks().iter().zip(theta.blocks()).zip(c.symbol.weights()) {
            direct += l.matrix().adjoint() * t.matrix() * *w;
        }
        let factored = stacked_synthesis(lam) * block_diag(&c.symbol, &lam.block_dims()) * stacked_synthesis(theta).adjoint();
        let lib_direct = multiplier(&c.symbol, lam, theta).unwrap();
        let lib_factored = multiplier_factored(&c.symbol, lam, theta).unwrap();
        worst = worst.max(spec_norm(&(&direct - &factored)));
        worst = worst.max(spec_norm(&(lib_direct.matrix() - &direct)));
        worst = worst.max(spec_norm(&(lib_factored.matrix() - &factored)));
        worst = worst.max(spec_norm(&(lib_direct.matrix() - lib_factored.matrix())));

        let adj = multiplier(&c.symbol.conj(), theta, lam).unwrap();
        worst = worst.max(spec_norm(&(lib_direct.matrix().adjoint() - adj.matrix())));

        let cm = c.controller.op().matrix();
        let c2 = generate_controller(ControllerKind::RandomNoncommuting, lam, derive_seed(c.seed, 13)).unwrap();
        let c2m = c2.op().matrix();
        let controlled = controlled_multiplier(&c.symbol, &c.controller, lam, theta, &c2).unwrap();
        let product = cm * lib_factored.matrix() * c2m;
        worst = worst.max(spec_norm(&(controlled.matrix() - product)));
    }
    Outcome::new(worst, 1e-12)
}

fn multiplier_norm_bound(cases: &[Case]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for c in cases {
        let (theta, lam) = (&c.frame, &c.partner);
        let c2 = generate_controller(ControllerKind::RandomNoncommuting, lam, derive_seed(c.seed, 14)).unwrap();
        let (cm, c2m) = (c.controller.op().matrix(), c2.op().matrix());
        let n = theta.dim_h();
        let mut op = M::zeros(n, n);
        for ((t, l), w) in theta.blocks().iter().zip(lam.blocks()).zip(c.symbol.weights()) {
            op += cm * t.matrix().adjoint() * l.matrix() * c2m * *w;
        }
        let b = eig_extremes(&(cm * frame_op(theta) * cm)).1;
        let b2 = eig_extremes(&(c2m * frame_op(lam) * c2m)).1;
        let sup = c.symbol.weights().iter().map(|w| w.norm()).fold(0.0, f64::max);
        let bound = sup * (b * b2).sqrt();
        worst = worst.max(spec_norm(&op) - bound);
        let lib = controlled_multiplier_norm_bound(&c.symbol, &c.controller, theta, lam, &c2).unwrap();
        worst = worst.max(lib.norm - lib.bound);
        worst = worst.max((lib.bound - bound).abs() / bound.max(1.0) - 1e-9);
    }
    Outcome::new(worst, 1e-9)
}

fn schatten_suite(cases: &[Case]) -> Outcome {
    let mut worst = 0.0f64;
    for c in cases {
        let mut r = rng(derive_seed(c.seed, 15));
        let n = c.frame.dim_h();
        let rows = r.random_range(1..=32);
        let ops = [
            multiplier(&c.symbol, &c.frame, &c.partner).unwrap(),
            controlled_multiplier(&c.symbol, &c.controller, &c.frame, &c.partner, &c.controller).unwrap(),
            random_matrix(&mut r, rows, n),
        ];
        for t in &ops {
            let fro = t.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max((t.schatten_norm(2.0).unwrap() - fro).abs());
            for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
                let tp = t.schatten_norm(p).unwrap();
                worst = worst.max((tp - t.adjoint().schatten_norm(p).unwrap()).abs());
                worst = worst.max((tp - schatten_ref(t.matrix(), p)).abs());
            }
            let gram = &t.adjoint() * t;
            for p in [2.0, 4.0] {
                let lhs = t.schatten_norm(p).unwrap().powi(2);
                worst = worst.max((lhs - gram.schatten_norm(p / 2.0).unwrap()).abs());
            }
        }
    }
    Outcome::new(worst, 1e-10)
}

fn preconditioning() -> Outcome {
    let cfg = ExperimentConfig {
        seed: 9001,
        dim_h: 16,
        block_dims: vec![4; 8],
        condition_target: 1e4,
        tol: 1e-10,
        ..ExperimentConfig::default()
    };
    let frame = generate_frame(&cfg).unwrap();
    let g = generate_rhs(&cfg);
    let sm = frame_op(&frame);
    let (a, b) = eig_extremes(&sm);
    let kappa_s = b / a;

    let exact = generate_controller(ControllerKind::ExactSqrtInverse, &frame, cfg.seed).unwrap();
    let cm = exact.op().matrix();
    let (la, lb) = eig_extremes(&(cm * &sm * cm));
    let kappa_l = lb / la;
    let (f, pre) = preconditioned_solve(&frame, &exact, &exact, &g, cfg.tol, cfg.max_iter).unwrap();
    let (_, plain) = plain_solve(&frame, &g, cfg.tol, cfg.max_iter).unwrap();
    let res = relative_residual(&frame.frame_operator(), &f, &g);

    let mut ok = (kappa_s / 1e4 - 1.0).abs() < 1e-6
        && (kappa_l - 1.0).abs() <= 1e-6
        && pre.iterations <= 2
        && pre.converged
        && res <= 10.0 * cfg.tol
        && plain.converged
        && plain.iterations >= 100;
    let mut note = format!(
        "kappa_S={kappa_s:.6e} kappa_L-1={:.2e} precond_iters={} plain_iters={}",
        kappa_l - 1.0,
        pre.iterations,
        plain.iterations
    );

    let mut jacobi_pairs = Vec::new();
    for (k, range) in [10.0, 30.0, 100.0].iter().enumerate() {
        let scaled = ExperimentConfig {
            seed: 4242 + k as u64,
            dim_h: 12,
            block_dims: vec![3; 6],
            condition_target: 5.0,
            diag_scale: *range,
            tol: 1e-8,
            ..ExperimentConfig::default()
        };
        let rows = bench(&scaled).unwrap();
        let row = rows.iter().find(|r| r.kind == "jacobi").unwrap();
        ok &= row.status == "ok" && row.iterations_precond < row.iterations_plain;
        jacobi_pairs.push(format!("{}->{}", row.iterations_plain, row.iterations_precond));
    }
    note.push_str(&format!(" jacobi {}", jacobi_pairs.join(",")));
    flag(ok, note)
}

fn run_bin(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gframe-lab"))
        .args(args)
        .env("GFRAME_LAB_THREADS", "4")
        .output()
        .expect("spawn gframe-lab");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 77, "dim_h": 10, "block_dims": [4, 4, 4], "condition_target": 200.0,
            "controller_kind": "random_commuting", "symbol_kind": {"kind": "random_lp", "p": 2.0},
            "tol": 1e-9}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let mut ok = true;
    let mut gens = Vec::new();
    let mut benches = Vec::new();
    for run in 0..2 {
        let dir = tmp.path().join(format!("gen{run}"));
        let (code, _) = run_bin(&["gen", "--config", cfg, "--out", dir.to_str().unwrap()]);
        ok &= code == 0;
        gens.push(read_all(&dir));
        let (code, csv) = run_bin(&["bench", "--config", cfg, "--format", "csv"]);
        ok &= code == 0;
        let (code, json) = run_bin(&["bench", "--config", cfg, "--format", "json"]);
        ok &= code == 0;
        benches.push((csv, json));
    }
    ok &= gens[0].len() == 3 && gens[0] == gens[1];
    ok &= !benches[0].0.is_empty() && benches[0] == benches[1];
    flag(ok, format!("{} gen files, {} csv bytes", gens[0].len(), benches[0].0.len()))
}

fn main() {
    let start = Instant::now();
    let cases = cases();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 frame inequality", frame_inequality(&cases)),
        ("2 resolution of identity", resolution_of_identity(&cases)),
        ("3 synthesis norm", synthesis_norm(&cases)),
        ("4 C^2 equivalence sandwich", c2_equivalence(&cases)),
        ("5 commuting controllers", commuting_sandwich(&cases)),
        ("6 multiplier identities", multiplier_identities(&cases)),
        ("7 controlled multiplier norm bound", multiplier_norm_bound(&cases)),
        ("8 Schatten identities", schatten_suite(&cases)),
        ("9 preconditioning", preconditioning()),
        ("10 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!o.passed());
        println!(
            "criterion {name:<38} {status}  worst={:.3e} tol={:.0e} {}",
            o.worst, o.tol, o.note
        );
    }
    println!(
        "acceptance: {} of {} criteria passed on {INSTANCES} instances in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
