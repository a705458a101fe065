//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. The full-size simulator run is skipped unless
//! `PAM_FULL_SIM=1` is set; a reduced run of the same checks always executes.

use std::time::{Duration, Instant};

use pam_core::contour::{bc_contour_moment, contour_shift_check, ContourConfig};
use pam_core::front::{
    empirical_front, finite_time_rate, fit_inverse_t, growth_index, uniform_grid,
};
use pam_core::lambda::{gauss_linear_integral, lambda_n, LambdaArgs, LambdaMode, MAX_CLOSED_ORDER};
use pam_core::moments::{
    antideriv_i, antideriv_i_integrand, asymptotic_rate, second_moment_two_point, third_moment,
    third_moment_bounds, third_moment_log, third_moment_three_point, ModelParams, TriplePoint,
};
use pam_core::quadrature::{integrate_semi_infinite, GaussianDecay, QuadratureConfig};
use pam_core::sim::{estimate_moment, simulate_field, SimGrid};
use pam_core::specfun::heat_kernel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn params(nu: f64, lambda: f64, t: f64) -> ModelParams {
    ModelParams::new(nu, lambda, t).unwrap()
}

fn c1_no_noise() -> Outcome {
    let nus = [0.25, 0.5, 1.0, 2.0, 4.0];
    let ts = [0.1, 0.5, 1.0, 2.0, 5.0];
    let xs = [-2.0, -1.0, 0.0, 0.5, 1.5];
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for &nu in &nus {
        for &t in &ts {
            for &x in &xs {
                let p = params(nu, 0.0, t);
                let g = heat_kernel(nu, t, x).unwrap();
                let g2 = heat_kernel(nu, t, 0.3 - x).unwrap();
                worst = worst.max(rel(
                    second_moment_two_point(&p, x, 0.3 - x).unwrap(),
                    g * g2,
                ));
                worst = worst.max(rel(third_moment(&p, x, &cfg).unwrap(), g * g * g));
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("max rel err {worst:.2e} (tol 1e-12)"),
    )
}

fn c2_lemmas(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = QuadratureConfig::with_rel_tol(1e-12);
    let mut worst_lambda: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(0..=5usize);
        let beta = rng.random_range(-4.0..4.0);
        let t = rng.random_range(0.1..3.0);
        let args = LambdaArgs::new(n, beta, t).unwrap();
        let center = (beta * t / 2.0).max(0.0);
        let brute = integrate_semi_infinite(
            |s| (-s * s / t + beta * s).exp() * s.powi(n as i32),
            GaussianDecay::new(center, (t / 2.0).sqrt()),
            &cfg,
        )
        .unwrap()
        .value;
        let rec = lambda_n(args, LambdaMode::Recursion).unwrap();
        worst_lambda = worst_lambda.max(rel(rec, brute));
        if n <= MAX_CLOSED_ORDER {
            worst_lambda =
                worst_lambda.max(rel(lambda_n(args, LambdaMode::ClosedForm).unwrap(), brute));
        }
    }
    let mut worst_gl: f64 = 0.0;
    for _ in 0..50 {
        let a = rng.random_range(0.0..2.0);
        let b = rng.random_range(0.1..2.0);
        let c: f64 = rng.random_range(0.2..3.0);
        let d: f64 = rng.random_range(-3.0..3.0);
        let brute = integrate_semi_infinite(
            |s| (a * s + b) * (-c * s * (s - d)).exp(),
            GaussianDecay::new((d / 2.0).max(0.0), (1.0 / c).sqrt()),
            &cfg,
        )
        .unwrap()
        .value;
        worst_gl = worst_gl.max(rel(gauss_linear_integral(a, b, c, d).unwrap(), brute));
    }
    check(
        worst_lambda <= 1e-8 && worst_gl <= 1e-8,
        format!("Lambda_n max rel {worst_lambda:.2e}, Gaussian-linear max rel {worst_gl:.2e} (tol 1e-8)"),
    )
}

fn c3_routes() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (nu, lambda, t) in [(1.0, 1.0, 1.0), (0.5, 1.5, 0.5), (2.0, 0.8, 2.0)] {
        let p = params(nu, lambda, t);
        let one = third_moment(&p, 0.0, &cfg).unwrap();
        let three =
            third_moment_three_point(&p, &TriplePoint::coincident(0.0).unwrap(), &cfg).unwrap();
        let cc = ContourConfig::auto(3, &p, &[0.0; 3], 1e-7).unwrap();
        let contour = bc_contour_moment(3, &p, &[0.0; 3], &cc).unwrap().value;
        let d13 = rel(three, one);
        let dc = rel(contour, one).max(rel(contour, three));
        ok &= d13 <= 1e-6 && dc <= 1e-4;
        parts.push(format!(
            "({nu},{lambda},{t}): 1D {one:.10e} 1D/3D {d13:.1e} contour {dc:.1e}"
        ));
    }
    check(ok, parts.join("; "))
}

fn c4_two_point_oracle(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = params(
            rng.random_range(0.5..2.0),
            rng.random_range(0.3..1.5),
            rng.random_range(0.3..2.0),
        );
        let mut xs = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        xs.sort_by(f64::total_cmp);
        let cc = ContourConfig::auto(2, &p, &xs, 1e-10).unwrap();
        let v = bc_contour_moment(2, &p, &xs, &cc).unwrap().value;
        worst = worst.max(rel(v, second_moment_two_point(&p, xs[0], xs[1]).unwrap()));
    }
    let p = params(1.0, 1.0, 1.0);
    let xs = [0.0, 0.0];
    let a = ContourConfig::for_alphas(vec![2.5, 0.0], &p, &xs, 1e-10).unwrap();
    let b = ContourConfig::for_alphas(vec![3.0, 0.5], &p, &xs, 1e-10).unwrap();
    let shift = contour_shift_check(2, &p, &xs, &a, &b).unwrap();
    check(
        worst <= 1e-8 && shift <= 1e-7,
        format!("max rel err {worst:.2e} (tol 1e-8), shift deviation {shift:.2e} (tol 1e-7)"),
    )
}

fn c5_bracketing(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut failures = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..100 {
        let p = params(
            rng.random_range(0.3..3.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..5.0),
        );
        let x = rng.random_range(-2.0..2.0);
        let m = third_moment_log(&p, x, &cfg).unwrap();
        let b = third_moment_bounds(&p, x).unwrap();
        let lo = m.ln() - b.lower.log_abs();
        let hi = b.upper.log_abs() - m.ln();
        tightest = tightest.min(lo).min(hi);
        // bounds and moment coincide to rounding when λ is small
        let slack = m.rel_err + 64.0 * f64::EPSILON * m.ln().abs().max(1.0);
        if lo < -slack || hi < -slack {
            failures += 1;
        }
    }
    check(
        failures == 0,
        format!(
            "{failures}/100 outside, smallest log margin {tightest:.2e} (rounding slack allowed)"
        ),
    )
}

fn c6_antiderivative(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_zero: f64 = 0.0;
    for _ in 0..20 {
        let p = params(
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..1.5),
            rng.random_range(0.5..2.0),
        );
        let r = rng.random_range(0.1..2.0);
        let s1 = rng.random_range(0.0..2.0);
        let h = 1e-3;
        let i = |r: f64| antideriv_i(r, s1, &p).unwrap();
        let fd = (i(r - 2.0 * h) - 8.0 * i(r - h) + 8.0 * i(r + h) - i(r + 2.0 * h)) / (12.0 * h);
        worst = worst.max(rel(fd, antideriv_i_integrand(r, s1, &p).unwrap()));
        worst_zero = worst_zero.max(i(0.0).abs());
    }
    check(
        worst <= 1e-6 && worst_zero <= 1e-10,
        format!("max rel err {worst:.2e} (tol 1e-6), max |I(0)| {worst_zero:.2e} (tol 1e-10)"),
    )
}

fn c7_rate() -> Outcome {
    let cfg = QuadratureConfig::default();
    let ts = [10.0, 20.0, 40.0];
    let p = params(1.0, 1.0, 1.0);
    let rs: Vec<f64> = ts
        .iter()
        .map(|&t| finite_time_rate(&p.at_time(t).unwrap(), 0.0, &cfg).unwrap())
        .collect();
    let (r_inf, c) = fit_inverse_t(&ts, &rs);
    let target = asymptotic_rate(3, &p).unwrap();
    let err = rel(r_inf, target);
    check(
        err <= 0.02,
        format!("fit r_inf {r_inf:.6} c {c:.4} vs {target} rel err {err:.4} (tol 0.02)"),
    )
}

fn c8_front() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        let l4 = lambda * lambda * lambda * lambda;
        // same dimensionless times λ⁴t/ν = 80, 160, 320 for every λ
        let ts: Vec<f64> = [80.0, 160.0, 320.0].iter().map(|tau| tau / l4).collect();
        let grid = uniform_grid(0.0, 1.5 * lambda * lambda, 0.01).unwrap();
        let f = empirical_front(&params(1.0, lambda, 1.0), &ts, &grid, &cfg).unwrap();
        let want = growth_index(3, lambda).unwrap();
        let d = (f.lambda_p - want).abs();
        ok &= d <= 0.01;
        parts.push(format!("lambda {lambda}: {:.5} vs {want:.5}", f.lambda_p));
    }
    for lambda in [0.5, 1.0, 2.0, 3.7] {
        let l2 = lambda * lambda;
        ok &= growth_index(2, lambda).unwrap() == l2 / 2.0;
        ok &= growth_index(3, lambda).unwrap() == (2.0f64 / 3.0).sqrt() * l2;
    }
    check(ok, parts.join("; "))
}

fn sim_check(nx: usize, replicas: usize, seed: u64) -> Outcome {
    let p = params(1.0, 0.5, 0.05);
    let g = SimGrid::with_stable_dt(&p, 2.0, nx, 0.05, 0.5, replicas, seed);
    let a = simulate_field(&p, &g).unwrap();
    let m1 = estimate_moment(&a, 0.0, 1).unwrap();
    let m2 = estimate_moment(&a, 0.0, 2).unwrap();
    let z1 = m1.z_score(heat_kernel(1.0, 0.05, 0.0).unwrap());
    let z2 = m2.z_score(second_moment_two_point(&p, 0.0, 0.0).unwrap());
    let mut g_small = g;
    g_small.replicas = 8;
    let same = simulate_field(&p, &g_small).unwrap() == simulate_field(&p, &g_small).unwrap();
    check(
        z1 <= 3.0 && z2 <= 4.0 && same,
        format!("nx {nx}, {replicas} replicas: z1 {z1:.2} (tol 3), z2 {z2:.2} (tol 4), deterministic {same}"),
    )
}

fn c10_factorization(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = params(
            rng.random_range(0.5..2.0),
            rng.random_range(0.3..1.5),
            rng.random_range(0.2..2.0),
        );
        let q2 = p.nu * p.t;
        let reduced = |x: f64| third_moment_log(&p, x, &cfg).unwrap().ln() + 1.5 * x * x / q2;
        let base = reduced(0.0);
        for k in 0..=20 {
            let x = -5.0 + 0.5 * k as f64;
            worst = worst.max((reduced(x) - base).exp_m1().abs());
        }
    }
    check(
        worst <= 1e-11,
        format!("max rel deviation {worst:.2e} (tol 1e-11)"),
    )
}

fn run(label: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let in_time = took <= limit;
    let ok = out.ok && in_time;
    println!(
        "{} {label}: {} [{:.2?}, limit {:?}{}]",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        took,
        limit,
        if in_time { "" } else { ", too slow" }
    );
    ok
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let full_sim = std::env::var("PAM_FULL_SIM").is_ok_and(|v| v == "1");
    let mut ok = true;
    ok &= run(
        "criterion 1 (lambda=0 reductions)",
        Duration::from_secs(1),
        c1_no_noise,
    );
    ok &= run(
        "criterion 2 (Lambda_n and Gaussian-linear lemmas)",
        Duration::from_secs(10),
        || c2_lemmas(&mut rng),
    );
    ok &= run(
        "criterion 3 (1D, 3D and contour routes)",
        Duration::from_secs(300),
        c3_routes,
    );
    ok &= run(
        "criterion 4 (two-point contour oracle)",
        Duration::from_secs(30),
        || c4_two_point_oracle(&mut rng),
    );
    ok &= run(
        "criterion 5 (bounds bracket the third moment)",
        Duration::from_secs(60),
        || c5_bracketing(&mut rng),
    );
    ok &= run(
        "criterion 6 (antiderivative identity)",
        Duration::from_secs(5),
        || c6_antiderivative(&mut rng),
    );
    ok &= run(
        "criterion 7 (asymptotic rate from t=10,20,40)",
        Duration::from_secs(60),
        c7_rate,
    );
    ok &= run(
        "criterion 8 (third-moment front)",
        Duration::from_secs(120),
        c8_front,
    );
    if full_sim {
        ok &= run(
            "criterion 9 (simulator, nx=2001, 10^4 replicas)",
            Duration::from_secs(600),
            || sim_check(2001, 10_000, 1),
        );
    } else {
        println!("SKIP criterion 9 full size (set PAM_FULL_SIM=1 to run it)");
        ok &= run(
            "criterion 9 reduced (nx=401, 2000 replicas)",
            Duration::from_secs(600),
            || sim_check(401, 2000, 1),
        );
    }
    ok &= run(
        "criterion 10 (x-factorization)",
        Duration::from_secs(30),
        || c10_factorization(&mut rng),
    );
    if !ok {
        std::process::exit(1);
    }
}
