//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use circlekit::arith::{
    exact_s_convolution, exact_s_direct, ConvolutionMethod, DivisorTable, ProblemInstance,
};
use circlekit::circle::{
    arc_contract_sweep, dirichlet_approx, divisor_residual_scan, hua_count, vk_residual_scan,
    ArcParameters, DEFAULT_SLACK, DIVISOR_SPAN,
};
use circlekit::exponents::derive_delta;
use circlekit::expsums::{crt_factorization_check, roots_of_unity, PowerResidues};
use circlekit::integrals::{j_density, j_values, j_volume_oracle, Which, DEFAULT_B};
use circlekit::series::{local_density, sigma_truncated};
use circlekit::verify::{
    residual_trend, verification_record, MainTermConstants, Method, DEFAULT_Q_SERIES,
};
use circlekit::DEFAULT_BUDGET;

// tolerances and limits
const DELTA_TIME: Duration = Duration::from_secs(1);
const ORACLE_TIME: Duration = Duration::from_secs(300);
const GAUSS_TOL: f64 = 1e-6;
const CRT_TOL: f64 = 1e-8;
const J1_TOL: f64 = 1e-3;
const J2_TOL: f64 = 5e-3;
const DENSITY_TOL: f64 = 1e-9;
const TAIL_CONST: f64 = 10.0;
const DENSITY_EXACT_TOL: f64 = 1e-12;
const VK_CONST: f64 = 10.0;
const STABILITY_FACTOR: f64 = 4.0;
const HUA_SLACK: f64 = 0.05;
const ORACLE_GRID: usize = 128;
const RANDOM_ALPHAS: usize = 10_000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn fmt_wrong(w: &[String]) -> String {
    if w.is_empty() {
        String::new()
    } else {
        format!("; {}", w.join("; "))
    }
}

fn delta_table() -> Outcome {
    let start = Instant::now();
    let mut expected = vec![
        rat(19, 60),
        rat(5, 24),
        rat(19, 140),
        rat(25, 192),
        rat(457, 4032),
    ];
    for k in 8..=12i64 {
        expected.push(rat(1, k + 2) + rat(1, 2 * k * k * (k - 1)));
    }
    let mut wrong = Vec::new();
    for (k, want) in (3..=12).zip(&expected) {
        match derive_delta(k) {
            Ok(d) if &d.delta == want => {}
            Ok(d) => wrong.push(format!("k={k}: {} != {want}", d.delta)),
            Err(e) => wrong.push(format!("k={k}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        wrong.is_empty() && elapsed < DELTA_TIME,
        format!(
            "k=3..12 exact, {:.3} s{}",
            elapsed.as_secs_f64(),
            fmt_wrong(&wrong)
        ),
    )
}

fn dual_oracle() -> Outcome {
    let start = Instant::now();
    let mut wrong = Vec::new();
    let mut check = |x: u64, k: u32, want: Option<u128>| {
        let inst = ProblemInstance::new(x, k).expect("valid instance");
        let d = exact_s_direct(&inst, DEFAULT_BUDGET).expect("direct within budget");
        let c = exact_s_convolution(&inst, ConvolutionMethod::Auto, DEFAULT_BUDGET)
            .expect("convolution");
        let m = exact_s_convolution(&inst, ConvolutionMethod::Modular, DEFAULT_BUDGET)
            .expect("modular");
        if d != c || d != m || want.is_some_and(|w| w != d) {
            wrong.push(format!("x={x} k={k}: direct {d}, conv {c}, modular {m}"));
        }
    };
    check(1, 3, Some(3));
    check(4, 3, Some(23));
    for x in [10, 100, 1000, 10_000] {
        for k in [3, 4, 5, 8] {
            check(x, k, None);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        wrong.is_empty() && elapsed < ORACLE_TIME,
        format!(
            "16 instances plus hand values, {:.1} s{}",
            elapsed.as_secs_f64(),
            fmt_wrong(&wrong)
        ),
    )
}

fn gauss_sums() -> Outcome {
    let mut worst = 0.0f64;
    for q in (1..=499u64).step_by(2) {
        let residues = PowerResidues::new(q, 2);
        let roots = roots_of_unity(q);
        for a in (1..=q).filter(|a| a.gcd(&q) == 1) {
            let s = residues.sum_with(a % q, &roots);
            worst = worst.max((s.norm_sqr() - q as f64).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut crt = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let q1 = rng.gen_range(2..=60u64);
        let q2 = rng.gen_range(2..=60u64);
        if q1.gcd(&q2) != 1 {
            continue;
        }
        let a = rng.gen_range(1..q1 * q2);
        if a.gcd(&(q1 * q2)) != 1 {
            continue;
        }
        let k = rng.gen_range(2..=8u32);
        crt = crt.max(crt_factorization_check(q1, q2, a, k).expect("valid instance"));
        n += 1;
    }
    outcome(
        worst < GAUSS_TOL && crt < CRT_TOL,
        format!("max ||S_2|^2 - q| = {worst:.2e} (tol {GAUSS_TOL:.0e}), max CRT residual = {crt:.2e} (tol {CRT_TOL:.0e})"),
    )
}

fn singular_integrals() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [3, 4, 5] {
        let [j1, j2] = j_values(k, DEFAULT_B).expect("integral converges");
        let o1 = j_volume_oracle(k, Which::Plain, ORACLE_GRID).expect("oracle");
        let o2 = j_volume_oracle(k, Which::LogWeighted, ORACLE_GRID).expect("oracle");
        let (d1, d2) = ((j1.value - o1).abs(), (j2.value - o2).abs());
        pass &= d1 < J1_TOL && d2 < J2_TOL;
        parts.push(format!("k={k}: |dJ1| = {d1:.1e}, |dJ2| = {d2:.1e}"));
    }
    let mut density = 0.0f64;
    for k in 3..=8 {
        let a = j_density(0.0, k, Which::Plain).unwrap();
        let b = j_density(0.0, k, Which::LogWeighted).unwrap();
        density = density
            .max((a.re - 3.0).abs() + a.im.abs())
            .max((b.re - (3.0 * 3f64.ln() - 3.0)).abs() + b.im.abs());
    }
    pass &= density < DENSITY_TOL;
    parts.push(format!("density at 0 off by {density:.1e}"));
    outcome(pass, parts.join(", "))
}

fn series_tail() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut exact = 0.0f64;
    for k in [3, 4, 5] {
        let full = sigma_truncated(400, k).expect("series");
        let running = full.running();
        for q in [25usize, 50, 100, 200] {
            let diff = (running[2 * q - 1].2 - running[q - 1].2).abs();
            let scale = (q as f64).powf(-0.5 - 1.0 / k as f64);
            pass &= diff <= TAIL_CONST * scale;
            worst = worst.max(diff / scale);
        }
        exact = exact
            .max((local_density(1, k).unwrap() - 1.0).abs())
            .max(local_density(2, k).unwrap().abs());
    }
    pass &= exact < DENSITY_EXACT_TOL;
    outcome(
        pass,
        format!("largest fitted tail constant {worst:.3} (limit {TAIL_CONST}), |A(1)-1|, |A(2)| <= {exact:.1e}"),
    )
}

fn lemma_envelopes() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();

    let vk = vk_residual_scan(10_000, 3, 50, DEFAULT_SLACK).expect("vk scan");
    pass &= vk.fitted_constant <= VK_CONST;
    parts.push(format!("V_k C = {:.3}", vk.fitted_constant));

    let fit = |x: u64| {
        let p = ArcParameters::standard(x, 3).expect("params");
        let t = DivisorTable::new(4 * x as usize).expect("table");
        divisor_residual_scan(&p, &t, DEFAULT_SLACK, DIVISOR_SPAN)
            .expect("scan")
            .fitted_constant
    };
    let (c3, c4) = (fit(1000), fit(10_000));
    let ratio = c4 / c3;
    pass &= (1.0 / STABILITY_FACTOR..=STABILITY_FACTOR).contains(&ratio);
    parts.push(format!("divisor C {c3:.3} -> {c4:.3} (x{ratio:.2})"));

    let diagonal = [1u64, 2, 17, 100, 10_000]
        .iter()
        .all(|&y| hua_count(y, 3, 1, DEFAULT_BUDGET).unwrap() == y as u128);
    pass &= diagonal;

    let normalized: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&y| {
            let c = hua_count(y, 3, 2, DEFAULT_BUDGET).expect("count") as f64;
            c / (y as f64).powi(2) / (y as f64).powf(HUA_SLACK)
        })
        .collect();
    let c = normalized[0];
    pass &= normalized.iter().all(|&n| n <= c);
    parts.push(format!(
        "hua j=1 diagonal {}, j=2 count/Y^2.05 = {:.3}, {:.3}, {:.3}",
        if diagonal { "ok" } else { "WRONG" },
        normalized[0],
        normalized[1],
        normalized[2]
    ));
    outcome(pass, parts.join(", "))
}

fn main_term() -> Outcome {
    let constants = MainTermConstants::compute(3, DEFAULT_Q_SERIES, DEFAULT_B).expect("constants");
    let records: Vec<_> = [100u64, 1000, 10_000]
        .iter()
        .map(|&x| verification_record(x, &constants, Method::Both, DEFAULT_BUDGET).expect("record"))
        .collect();
    let trend = residual_trend(&records);
    let seq: Vec<String> = trend.sequence.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        trend.decreasing,
        format!(
            "C1 = {:.6}, C2 = {:.6}, |normalized| = {}",
            constants.c1,
            constants.c2,
            seq.join(" > ")
        ),
    )
}

fn arc_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = 0;
    for tau in [100.0, 1000.0, 10_000.0] {
        for _ in 0..RANDOM_ALPHAS {
            let alpha: f64 = rng.gen();
            let r = dirichlet_approx(alpha, tau).expect("approximation");
            if !(r.q as f64 <= tau
                && r.lambda.abs() <= 1.0 / (r.q as f64 * tau)
                && r.a.gcd(&(r.q as i64)) == 1)
            {
                failures += 1;
            }
        }
    }
    let p = ArcParameters::standard(10_000, 3).expect("params");
    let sweep = arc_contract_sweep(&p, RANDOM_ALPHAS, 2).expect("sweep");
    outcome(
        failures == 0 && sweep.contract_failures == 0 && sweep.classify_failures == 0,
        format!(
            "{failures} Dirichlet failures over 3 x {RANDOM_ALPHAS}, {} contract / {} classification failures \
             over {RANDOM_ALPHAS} window samples (major fraction {:.4}, measure {:.4})",
            sweep.contract_failures, sweep.classify_failures, sweep.major_fraction, sweep.major_measure
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exponent table", delta_table),
        ("exact sum, two evaluators", dual_oracle),
        ("Gauss sums and CRT factorization", gauss_sums),
        ("singular integrals vs volume oracle", singular_integrals),
        ("singular series tail", series_tail),
        ("residual envelopes", lemma_envelopes),
        ("main term residual decay", main_term),
        ("Dirichlet and arc contracts", arc_contracts),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {name}: {} [{:.1} s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
