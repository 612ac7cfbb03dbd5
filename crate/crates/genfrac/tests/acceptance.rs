//! Acceptance suite. Criteria run in order on one thread so the reported
//! timings are honest; the binary prints one line per criterion and fails if
//! any of them fails.

use std::process::Command;
use std::time::{Duration, Instant};

use genfrac_core::identities::{
    corpus, run_corpus, verify_green, verify_ibp_1d, CorpusEntry, IdentityKind, VerificationReport, CORPUS_ALPHAS,
    CORPUS_FUNCTIONS, CORPUS_KERNELS, CORPUS_SHAPES,
};
use genfrac_core::ops1d::kernel_l1_norm;
use genfrac_core::quad::{contour_integral, gauss_legendre};
use genfrac_core::specfun::{euler_oracle, OracleKind, Side};
use genfrac_core::{
    aop, bop, kop, DifferenceKernel, FuncSpec, KernelFamily, KernelSpec, OperatorKind, OperatorRequest, ParameterSet,
    QuadratureRule, Rectangle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn rel_err(x: f64, want: f64) -> f64 {
    if want == 0.0 {
        x.abs()
    } else {
        (x - want).abs() / want.abs()
    }
}

fn request(kind: OperatorKind, alpha: f64, pset: ParameterSet, kernel: KernelSpec) -> OperatorRequest {
    OperatorRequest::new(kind, alpha, pset, kernel, QuadratureRule::default()).unwrap()
}

fn f1(src: &str) -> FuncSpec {
    FuncSpec::parse(src, 1).unwrap()
}

fn f2(src: &str) -> FuncSpec {
    FuncSpec::parse(src, 2).unwrap()
}

fn interior(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * (i as f64 + 0.5) / n as f64)
}

fn reduction_suite() -> Outcome {
    let (a, b) = (-0.5, 1.5);
    let (mut worst_kb, mut worst_a) = (0.0f64, 0.0f64);
    let rl = KernelSpec::RiemannLiouville;
    for (side, p, sign) in [
        (Side::Left, ParameterSet::standard_left(a, b).unwrap(), 1.0),
        (Side::Right, ParameterSet::standard_right(a, b).unwrap(), -1.0),
    ] {
        for beta in [0.0, 1.0, 2.0, 2.5] {
            let f = match side {
                Side::Left => f1(&format!("(t + 0.5)^{beta}")),
                Side::Right => f1(&format!("(1.5 - t)^{beta}")),
            };
            for alpha in [0.25, 0.5, 0.75] {
                let (rk, ra, rb) = (
                    request(OperatorKind::K, alpha, p, rl),
                    request(OperatorKind::A, alpha, p, rl),
                    request(OperatorKind::B, alpha, p, rl),
                );
                for t in interior(a, b, 20) {
                    let ok = euler_oracle(side, OracleKind::Integral, alpha, beta, a, b, t).unwrap();
                    let oa = sign * euler_oracle(side, OracleKind::RlDerivative, alpha, beta, a, b, t).unwrap();
                    let ob = sign * euler_oracle(side, OracleKind::CaputoDerivative, alpha, beta, a, b, t).unwrap();
                    worst_kb =
                        worst_kb.max(rel_err(kop(&rk, &f, t).unwrap(), ok)).max(rel_err(bop(&rb, &f, t).unwrap(), ob));
                    worst_a = worst_a.max(rel_err(aop(&ra, &f, t).unwrap(), oa));
                }
            }
        }
    }
    Outcome::new(worst_kb <= 1e-8 && worst_a <= 1e-5, format!("max rel err K/B {worst_kb:.2e}, A {worst_a:.2e}"))
}

fn caputo_of_constant() -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0;
    for c in ["0", "1", "-3.7"] {
        let f = f1(c);
        for fs in CORPUS_FUNCTIONS {
            let [a1, b1, a2, b2] = fs.rect;
            for (a, b) in [(a1, b1), (a2, b2)] {
                for shape in CORPUS_SHAPES {
                    let p = shape.on(a, b).unwrap();
                    for kernel in CORPUS_KERNELS {
                        for alpha in CORPUS_ALPHAS {
                            let r = request(OperatorKind::B, alpha, p, kernel);
                            for t in [a, 0.5 * (a + b), b].into_iter().chain(interior(a, b, 4)) {
                                worst = worst.max(bop(&r, &f, t).unwrap().abs());
                                n += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Outcome::new(worst <= 1e-12, format!("max |B c| {worst:.2e} over {n} evaluations"))
}

fn dual_involution() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = true;
    for _ in 0..1000 {
        let a: f64 = rng.random_range(-10.0..10.0);
        let p = ParameterSet::new(
            a,
            a + rng.random_range(1e-3..10.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        )
        .unwrap();
        let back = p.dual().dual();
        ok &= [back.a(), back.b(), back.p(), back.q()].map(f64::to_bits)
            == [p.a(), p.b(), p.p(), p.q()].map(f64::to_bits);
    }
    let (l, r) = (ParameterSet::standard_left(0.0, 1.0).unwrap(), ParameterSet::standard_right(0.0, 1.0).unwrap());
    ok &= l.dual() == r && r.dual() == l;
    Outcome::new(ok, "1000 random p-sets, standard left/right")
}

fn ibp_1d() -> Outcome {
    let pairs = [
        ("1", "t"),
        ("t", "t^2"),
        ("t^2 - t", "1 + t^3"),
        ("3*t^3 - 2", "t - 1"),
        ("t^4", "t^2 + 2*t"),
        ("1 - t^5", "t^3"),
    ];
    let rule = QuadratureRule::default();
    let mut worst = 0.0f64;
    let mut n = 0;
    for (g, eta) in pairs {
        for alpha in [0.25, 0.5, 0.75] {
            for kernel in CORPUS_KERNELS {
                for p in [
                    ParameterSet::standard_left(0.0, 1.0),
                    ParameterSet::new(-1.0, 2.0, 0.5, 0.5),
                    ParameterSet::new(0.5, 2.0, 1.3, -0.4),
                ] {
                    let r = verify_ibp_1d(&f1(g), &f1(eta), alpha, &p.unwrap(), &kernel, &rule).unwrap();
                    worst = worst.max(r.rel_residual);
                    n += 1;
                }
            }
        }
    }
    Outcome::new(worst <= 1e-8, format!("max rel residual {worst:.2e} over {n} checks"))
}

fn worst_of(reports: &[VerificationReport]) -> f64 {
    reports.iter().fold(0.0f64, |m, r| m.max(r.rel_residual))
}

fn ibp_2d(entries: &[CorpusEntry]) -> Outcome {
    let want = 8.0 / (3.0 * std::f64::consts::PI.sqrt());
    let reports = run_corpus(entries, IdentityKind::Ibp2d, &QuadratureRule::default()).unwrap();
    let constant = entries
        .iter()
        .zip(&reports)
        .find(|(e, _)| {
            e.functions.f == "1"
                && e.alpha == 0.5
                && e.kernel == KernelSpec::RiemannLiouville
                && e.shape == CORPUS_SHAPES[0]
        })
        .map(|(_, r)| r)
        .unwrap();
    let const_ok = (constant.lhs - want).abs() <= 1e-6 && (constant.rhs_area - want).abs() <= 1e-6;
    let worst = worst_of(&reports);
    Outcome::new(
        const_ok && worst <= 1e-5,
        format!(
            "constant case lhs {:.10} rhs {:.10}; corpus max rel residual {worst:.2e} over {}",
            constant.lhs,
            constant.rhs_area,
            reports.len()
        ),
    )
}

fn green(entries: &[CorpusEntry]) -> Outcome {
    let coarse = run_corpus(entries, IdentityKind::Green, &QuadratureRule::default()).unwrap();
    let fine = run_corpus(entries, IdentityKind::Green, &QuadratureRule::default().with_panels(32).unwrap()).unwrap();
    let worst = worst_of(&coarse);
    let increases = coarse.iter().zip(&fine).filter(|(c, f)| f.rel_residual > c.rel_residual).count();
    let vanishing = entries
        .iter()
        .zip(&coarse)
        .filter(|(e, _)| e.functions.eta1 == "t1*(1 - t1)*t2*(1 - t2)")
        .fold(0.0f64, |m, (_, r)| m.max(r.rhs_boundary.abs()));
    let rule = QuadratureRule::default();
    let (mut two_term_min, mut three_term_max) = (f64::INFINITY, 0.0f64);
    for alpha in CORPUS_ALPHAS {
        for kernel in CORPUS_KERNELS {
            for shape in CORPUS_SHAPES {
                let p = shape.on(0.0, 1.0).unwrap();
                let r = verify_green(
                    &f2("t1 + t2"),
                    &f2("t1*t2"),
                    &f2("1"),
                    alpha,
                    &p,
                    &p,
                    &kernel,
                    &Rectangle::unit(),
                    &rule,
                )
                .unwrap();
                two_term_min = two_term_min.min(r.two_term_rel_residual());
                three_term_max = three_term_max.max(r.rel_residual);
            }
        }
    }
    let pass =
        worst <= 1e-4 && increases == 0 && vanishing <= 1e-10 && two_term_min > 10.0 * 1e-4 && three_term_max <= 1e-4;
    Outcome::new(
        pass,
        format!(
            "corpus max rel residual {worst:.2e}; {increases} of {} entries worse at 32 panels; vanishing-η |boundary| {vanishing:.2e}; η≡1 two-term min {two_term_min:.2e}, three-term max {three_term_max:.2e}",
            coarse.len()
        ),
    )
}

fn corollary(entries: &[CorpusEntry]) -> Outcome {
    let selected: Vec<CorpusEntry> = genfrac::corollary_entries(entries);
    let rule = QuadratureRule::default();
    let g = run_corpus(&selected, IdentityKind::Green, &rule).unwrap();
    let c = run_corpus(&selected, IdentityKind::GreenRlCorollary, &rule).unwrap();
    let worst = g.iter().zip(&c).fold(0.0f64, |m, (g, c)| {
        m.max((g.lhs - c.lhs).abs()).max((g.rhs_area - c.rhs_area).abs()).max((g.rhs_boundary - c.rhs_boundary).abs())
    });
    Outcome::new(worst <= 1e-12, format!("max term difference {worst:.2e} over {} entries", selected.len()))
}

fn l1_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, b) = (0.0, 2.0);
    let gl = gauss_legendre(8).unwrap();
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for _ in 0..20 {
        let pieces = rng.random_range(2..8);
        let knots: Vec<f64> = (0..=pieces).map(|i| a + (b - a) * i as f64 / pieces as f64).collect();
        let values: Vec<f64> = (0..=pieces).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f_l1: f64 = (0..pieces)
            .map(|i| {
                let (y0, y1, h) = (values[i], values[i + 1], knots[i + 1] - knots[i]);
                if y0 * y1 >= 0.0 {
                    0.5 * h * (y0.abs() + y1.abs())
                } else {
                    0.5 * h * (y0 * y0 + y1 * y1) / (y0.abs() + y1.abs())
                }
            })
            .sum();
        let (kx, kv) = (knots.clone(), values.clone());
        let f = FuncSpec::callable("piecewise linear", 1, move |v| {
            let i = kx.partition_point(|&k| k <= v[0]).clamp(1, kx.len() - 1) - 1;
            kv[i] + (v[0] - kx[i]) / (kx[i + 1] - kx[i]) * (kv[i + 1] - kv[i])
        })
        .unwrap();
        let p = ParameterSet::new(a, b, rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)).unwrap();
        for alpha in CORPUS_ALPHAS {
            for kernel in CORPUS_KERNELS {
                let r = request(OperatorKind::K, alpha, p, kernel);
                let panels = 4 * pieces;
                let mut kf_l1 = 0.0;
                for j in 0..panels {
                    let (lo, hi) =
                        (a + (b - a) * j as f64 / panels as f64, a + (b - a) * (j + 1) as f64 / panels as f64);
                    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                        kf_l1 +=
                            0.5 * (hi - lo) * w * kop(&r, &f, 0.5 * (lo + hi) + 0.5 * (hi - lo) * x).unwrap().abs();
                    }
                }
                let k_l1 =
                    kernel_l1_norm(&kernel.instantiate(alpha).unwrap(), b - a, &QuadratureRule::default()).unwrap();
                let bound = (p.p().abs() + p.q().abs()) * k_l1 * f_l1;
                ok &= kf_l1 <= bound + 1e-9;
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(kf_l1 / bound);
                }
            }
        }
    }
    Outcome::new(ok, format!("largest ‖Kf‖₁ / bound {worst_ratio:.4} over 120 cases"))
}

fn a_equals_b_plus_boundary() -> Outcome {
    let smooth = ["exp(t)", "sin(t) + 2", "t^3 - t + 1", "cos(2*t)", "1/(3 + t)", "t*exp(-t)"];
    let mut worst = 0.0f64;
    for src in smooth {
        let f = f1(src);
        for (a, b) in [(0.0, 1.0), (-1.0, 0.5)] {
            let p = ParameterSet::standard_left(a, b).unwrap();
            for alpha in CORPUS_ALPHAS {
                for kernel in CORPUS_KERNELS {
                    let (ra, rb) =
                        (request(OperatorKind::A, alpha, p, kernel), request(OperatorKind::B, alpha, p, kernel));
                    let k = kernel.instantiate(1.0 - alpha).unwrap();
                    for t in interior(a, b, 10) {
                        let av = aop(&ra, &f, t).unwrap();
                        let rhs = bop(&rb, &f, t).unwrap() + f.eval1(a) * k.evaluate(t - a);
                        worst = worst.max((av - rhs).abs() / av.abs().max(rhs.abs()));
                    }
                }
            }
        }
    }
    Outcome::new(worst <= 1e-5, format!("max rel residual {worst:.2e}"))
}

fn contour_sanity() -> Outcome {
    type Field = (fn(f64, f64) -> f64, fn(f64, f64) -> f64, fn(&Rectangle) -> f64);
    // (P, Q, ∬ (∂Q/∂t1 - ∂P/∂t2)) with the area integral in closed form
    fn m(k: i32, a: f64, b: f64) -> f64 {
        (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64
    }
    let fields: [Field; 5] = [
        (|_, y| y, |x, _| x, |_| 0.0),
        (|x, y| x * y * y, |x, y| x * x * y, |_| 0.0),
        (|x, y| -x * y, |x, y| x * x + y, |r| 3.0 * m(1, r.a1, r.b1) * m(0, r.a2, r.b2)),
        (
            |_, y| y.powi(3),
            |x, _| x.powi(3),
            |r| 3.0 * (m(2, r.a1, r.b1) * m(0, r.a2, r.b2) - m(0, r.a1, r.b1) * m(2, r.a2, r.b2)),
        ),
        (|x, y| x * x - 2.0 * y, |x, y| x * y * y, |r| m(0, r.a1, r.b1) * m(2, r.a2, r.b2) + 2.0 * r.area()),
    ];
    let rects = [
        Rectangle::unit(),
        Rectangle::new(-1.0, 0.5, 0.25, 2.0).unwrap(),
        Rectangle::new(1.0, 3.0, -2.0, -0.5).unwrap(),
    ];
    let rule = QuadratureRule::default();
    let mut worst = 0.0f64;
    for (p, q, area) in fields {
        for r in &rects {
            let got = contour_integral(|x, y| Ok(p(x, y)), |x, y| Ok(q(x, y)), r, &rule).unwrap();
            let want = area(r);
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    let mut twice = 0.0f64;
    for r in &rects {
        let c = contour_integral(|_, y| Ok(-y), |x, _| Ok(x), r, &rule).unwrap();
        twice = twice.max((c - 2.0 * r.area()).abs());
    }
    Outcome::new(worst <= 1e-10 && twice <= 1e-10, format!("max rel err {worst:.2e}; |∮ - 2·Area| {twice:.2e}"))
}

fn determinism(suite_start: Instant) -> Outcome {
    let run = || Command::new(env!("CARGO_BIN_EXE_genfrac")).arg("corpus").output().expect("genfrac runs");
    let first = run();
    let second = run();
    let same = first.stdout == second.stdout && !first.stdout.is_empty();
    let ok = first.status.success() && second.status.success();
    let total = suite_start.elapsed();
    Outcome::new(
        same && ok && total <= Duration::from_secs(60),
        format!(
            "{} bytes identical: {same}, exit ok: {ok}; suite wall-clock {:.1} s",
            first.stdout.len(),
            total.as_secs_f64()
        ),
    )
}

fn main() {
    let suite_start = Instant::now();
    let entries = corpus();
    let budgets: [(&str, Option<f64>); 11] = [
        ("reduction suite", Some(5.0)),
        ("Caputo derivative of a constant", None),
        ("dual involution", None),
        ("1D integration by parts", None),
        ("2D integration by parts", Some(15.0)),
        ("generalized Green formula", Some(30.0)),
        ("Riemann-Liouville corollary", None),
        ("L1 bound", None),
        ("A-op = B-op + end term", None),
        ("classical contour", None),
        ("determinism and total time", None),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget)) in budgets.iter().enumerate() {
        let t = Instant::now();
        let mut out = match i {
            0 => reduction_suite(),
            1 => caputo_of_constant(),
            2 => dual_involution(),
            3 => ibp_1d(),
            4 => ibp_2d(&entries),
            5 => green(&entries),
            6 => corollary(&entries),
            7 => l1_bound(),
            8 => a_equals_b_plus_boundary(),
            9 => contour_sanity(),
            _ => determinism(suite_start),
        };
        let secs = t.elapsed().as_secs_f64();
        if let Some(limit) = budget {
            if secs > *limit {
                out.pass = false;
                out.detail.push_str(&format!("; over the {limit} s budget"));
            }
        }
        println!("[{}] {:>2}. {name}: {} ({secs:.2} s)", if out.pass { "PASS" } else { "FAIL" }, i + 1, out.detail);
        if !out.pass {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {} of {} criteria passed", budgets.len() - failed.len(), budgets.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
