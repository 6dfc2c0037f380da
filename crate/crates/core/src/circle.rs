//! Dirichlet approximation, the major/minor arc partition, and the residual
//! profiles of the major-arc approximations.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::iroot;
use crate::arith::DivisorTable;
use crate::expsums::{complete_power_sum, divisor_exp_sum_rational, weyl_sum, weyl_sum_rational};
use crate::integrals::{
    linear_phase_integral_on, log_weighted_integral_on, unit_power_phase_integral,
};
use crate::{fmt_sig, Error, Result, EULER_GAMMA};

/// Default slack exponent standing in for `x^epsilon`.
pub const DEFAULT_SLACK: f64 = 0.05;

/// Slacks reported alongside the default.
pub const SLACK_SENSITIVITY: [f64; 2] = [0.02, 0.10];

/// Upper end of the linear factors in the divisor-sum expansion; matches the
/// `n <= 4x` range of the sum.
pub const DIVISOR_SPAN: f64 = 4.0;

/// `alpha = a/q + lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalApproximation {
    pub a: i64,
    pub q: u64,
    pub lambda: f64,
}

/// Last continued-fraction convergent of `alpha` with denominator at most `tau`.
pub fn dirichlet_approx(alpha: f64, tau: f64) -> Result<RationalApproximation> {
    if !(tau >= 1.0) || !tau.is_finite() {
        return Err(Error::Domain(format!(
            "tau must be finite and >= 1, got {tau}"
        )));
    }
    let exact = BigRational::from_float(alpha)
        .ok_or_else(|| Error::Domain(format!("alpha must be finite, got {alpha}")))?;
    let limit = BigInt::from(tau.floor() as u64);

    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (exact.floor().to_integer(), BigInt::one());
    let mut rest = exact.clone() - exact.floor();
    while !rest.is_zero() {
        let inv = rest.recip();
        let digit = inv.floor().to_integer();
        let q2 = &digit * &q1 + &q0;
        if q2 > limit {
            break;
        }
        let p2 = &digit * &p1 + &p0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        rest = inv.clone() - inv.floor();
    }
    let lambda = exact - BigRational::new(p1.clone(), q1.clone());
    Ok(RationalApproximation {
        a: p1
            .to_i64()
            .ok_or_else(|| Error::Domain("numerator overflows i64".into()))?,
        q: q1.to_u64().expect("q <= tau"),
        lambda: lambda.to_f64().unwrap_or(0.0),
    })
}

/// `Q` and `tau` with the admissibility conditions checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcParameters {
    pub x: u64,
    pub k: u32,
    #[serde(rename = "Q")]
    pub q_max: u64,
    pub tau: f64,
}

impl ArcParameters {
    pub fn new(x: u64, k: u32, q_max: u64, tau: f64) -> Result<Self> {
        let xf = x as f64;
        if k < 2 {
            return Err(Error::Domain(format!("power must be at least 2, got {k}")));
        }
        if !(xf.ln() < 2.0 * q_max as f64 && 2.0 * (q_max as f64) < tau && tau < xf) {
            return Err(Error::Domain(format!(
                "need log x < 2Q < tau < x, got x={x}, Q={q_max}, tau={tau}"
            )));
        }
        let prod = q_max as f64 * tau;
        if !(prod >= xf / 4.0 && prod <= 4.0 * xf) {
            return Err(Error::Domain(format!("Q tau = {prod} outside [x/4, 4x]")));
        }
        if q_max > major_modulus_cap(x, k) {
            return Err(Error::Domain(format!("Q = {q_max} exceeds x^(2/(k+2))")));
        }
        Ok(ArcParameters { x, k, q_max, tau })
    }

    /// `Q = floor(x^(2/(k+2)))`, `tau = x/Q`.
    pub fn standard(x: u64, k: u32) -> Result<Self> {
        let q_max = major_modulus_cap(x, k).max(1);
        Self::new(x, k, q_max, x as f64 / q_max as f64)
    }

    pub fn classify(&self, alpha: f64) -> Result<Arc> {
        classify_arc(alpha, self)
    }
}

/// Largest `Q` with `Q^(k+2) <= x^2`.
fn major_modulus_cap(x: u64, k: u32) -> u64 {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let fits = |q: u64| BigInt::from(q).pow(k + 2) <= x2;
    let mut q = (x as f64).powf(2.0 / (k as f64 + 2.0)).floor() as u64;
    while q > 0 && !fits(q) {
        q -= 1;
    }
    while fits(q + 1) {
        q += 1;
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Arc {
    Major(RationalApproximation),
    Minor,
}

impl Arc {
    pub fn is_major(&self) -> bool {
        matches!(self, Arc::Major(_))
    }
}

/// Major iff some reduced `a/q` with `q <= Q` lies within `1/(q tau)` of `alpha`.
/// The arcs are disjoint because `2Q < tau`, so the witness is unique.
pub fn classify_arc(alpha: f64, params: &ArcParameters) -> Result<Arc> {
    let lo = 1.0 / params.tau;
    if !(alpha >= lo && alpha <= 1.0 + lo) {
        return Err(Error::Domain(format!(
            "alpha = {alpha} outside [1/tau, 1 + 1/tau]"
        )));
    }
    for q in 1..=params.q_max {
        let a = (alpha * q as f64).round() as i64;
        if a.gcd(&(q as i64)) != 1 {
            continue;
        }
        let lambda = alpha - a as f64 / q as f64;
        if lambda.abs() * q as f64 * params.tau <= 1.0 {
            return Ok(Arc::Major(RationalApproximation { a, q, lambda }));
        }
    }
    Ok(Arc::Minor)
}

/// Total length `sum_{q <= Q} phi(q) 2/(q tau)` of the major arcs.
pub fn major_arc_measure(params: &ArcParameters) -> f64 {
    (1..=params.q_max)
        .map(|q| totient(q) as f64 * 2.0 / (q as f64 * params.tau))
        .sum()
}

/// Fraction of `samples` uniform points of the unit window classified major.
pub fn major_fraction(params: &ArcParameters, samples: usize, seed: u64) -> Result<f64> {
    let alphas = window_samples(params, samples, seed);
    let hits = alphas
        .par_iter()
        .map(|&a| classify_arc(a, params).map(|arc| arc.is_major() as usize))
        .sum::<Result<usize>>()?;
    Ok(hits as f64 / samples.max(1) as f64)
}

pub fn window_samples(params: &ArcParameters, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1.0 / params.tau;
    (0..n).map(|_| rng.gen_range(lo..=1.0 + lo)).collect()
}

pub fn totient(n: u64) -> u64 {
    crate::series::factor(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Outcome of checking the Dirichlet contract and the arc classification
/// against each other on random points of the unit window.
#[derive(Debug, Clone, Serialize)]
pub struct ArcSweep {
    pub params: ArcParameters,
    pub samples: usize,
    pub major_fraction: f64,
    pub major_measure: f64,
    pub contract_failures: usize,
    pub classify_failures: usize,
}

pub fn arc_contract_sweep(params: &ArcParameters, samples: usize, seed: u64) -> Result<ArcSweep> {
    let alphas = window_samples(params, samples, seed);
    let checks = alphas
        .par_iter()
        .map(|&alpha| {
            let w = dirichlet_approx(alpha, params.tau)?;
            let contract = w.q as f64 <= params.tau
                && w.lambda.abs() * w.q as f64 * params.tau <= 1.0
                && w.a.gcd(&(w.q as i64)) == 1;
            let arc = classify_arc(alpha, params)?;
            let consistent = match arc {
                Arc::Major(r) => {
                    r.lambda.abs() * r.q as f64 * params.tau <= 1.0
                        && r.a.gcd(&(r.q as i64)) == 1
                        && (w.q > params.q_max || (w.a, w.q) == (r.a, r.q))
                }
                Arc::Minor => w.q > params.q_max,
            };
            Ok((contract, consistent, arc.is_major()))
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |f: fn(&(bool, bool, bool)) -> bool| checks.iter().filter(|c| f(c)).count();
    Ok(ArcSweep {
        params: *params,
        samples,
        major_fraction: count(|c| c.2) as f64 / samples.max(1) as f64,
        major_measure: major_arc_measure(params),
        contract_failures: count(|c| !c.0),
        classify_failures: count(|c| !c.1),
    })
}

/// `V_k = x^(1/k) S_k(q,a)/q int_0^1 e(x beta mu^k) dmu`.
pub fn vk_approx(a: i64, q: u64, beta: f64, x: u64, k: u32) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let s = complete_power_sum(q, a.rem_euclid(q as i64) as u64, k)?;
    let p = unit_power_phase_integral(x as f64 * beta, k)?;
    Ok((x as f64).powf(1.0 / k as f64) * s / q as f64 * p)
}

/// One row of a residual or ratio profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagnosticRow {
    pub alpha: f64,
    pub a: i64,
    pub q: u64,
    pub lambda: f64,
    pub observed: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Envelope fit: the largest `observed / bound` over a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticBound {
    pub label: String,
    pub x: u64,
    pub k: u32,
    pub slack: f64,
    pub fitted_constant: f64,
    /// Fitted constants at the alternative slacks, where reported.
    pub sensitivity: Vec<(f64, f64)>,
    pub rows: Vec<DiagnosticRow>,
}

impl DiagnosticBound {
    fn fit(label: &str, x: u64, k: u32, slack: f64, rows: Vec<DiagnosticRow>) -> Result<Self> {
        let fitted_constant = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        if !fitted_constant.is_finite() {
            return Err(Error::NumericalIntegrity(format!(
                "{label}: non-finite fitted constant"
            )));
        }
        Ok(DiagnosticBound {
            label: label.to_string(),
            x,
            k,
            slack,
            fitted_constant,
            sensitivity: Vec::new(),
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        diagnostic_csv(&self.rows)
    }
}

pub fn diagnostic_csv(rows: &[DiagnosticRow]) -> String {
    let mut out = String::from("alpha,a,q,lambda,observed,bound,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_sig(r.alpha),
            r.a,
            r.q,
            fmt_sig(r.lambda),
            fmt_sig(r.observed),
            fmt_sig(r.bound),
            fmt_sig(r.ratio)
        ));
    }
    out
}

fn coprime_residues(q: u64) -> impl Iterator<Item = i64> {
    (1..=q as i64).filter(move |a| a.gcd(&(q as i64)) == 1)
}

/// `|f_k(a/q + beta) - V_k|` against `q^(1/2+slack) (1 + x|beta|)^(1/2)` over
/// `q <= q_max`, all reduced `a`, and `|beta| <= x^(1/k-1)/(2kq)`.
pub fn vk_residual_scan(x: u64, k: u32, q_max: u64, slack: f64) -> Result<DiagnosticBound> {
    let pairs: Vec<(i64, u64)> = (1..=q_max)
        .flat_map(|q| coprime_residues(q).map(move |a| (a, q)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(a, q)| {
            let edge = (x as f64).powf(1.0 / k as f64 - 1.0) / (2.0 * k as f64 * q as f64);
            [-1.0, -0.5, 0.0, 0.5, 1.0]
                .iter()
                .map(|t| {
                    let beta = t * edge;
                    let f = weyl_sum_rational(a, q, beta, x, k);
                    let v = vk_approx(a, q, beta, x, k)?;
                    let observed = (f - v).norm();
                    let bound = (q as f64).powf(0.5 + slack) * (1.0 + x as f64 * beta.abs()).sqrt();
                    Ok(DiagnosticRow {
                        alpha: a as f64 / q as f64 + beta,
                        a,
                        q,
                        lambda: beta,
                        observed,
                        bound,
                        ratio: observed / bound,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    DiagnosticBound::fit(
        "vk_residual",
        x,
        k,
        slack,
        rows.into_iter().flatten().collect(),
    )
}

/// `Delta = x^slack (q^(1/2) x / tau + q^(2/3) x^(1/3))`.
pub fn divisor_delta(q: u64, params: &ArcParameters, slack: f64) -> f64 {
    let x = params.x as f64;
    let q = q as f64;
    x.powf(slack) * (q.sqrt() * x / params.tau + q.powf(2.0 / 3.0) * x.cbrt())
}

/// Residual of the major-arc expansion of `f(-a/q - beta)`, with the linear
/// factors taken over `[0, span]`.
pub fn divisor_expansion_residual_on(
    a: i64,
    q: u64,
    beta: f64,
    params: &ArcParameters,
    table: &DivisorTable,
    span: f64,
) -> Result<f64> {
    let x = params.x as f64;
    if !(params.tau > x.powf(0.51)) {
        return Err(Error::Domain(format!(
            "need tau > x^0.51, got tau = {}",
            params.tau
        )));
    }
    if params.q_max as f64 * params.tau > x * (1.0 + 1e-12) {
        return Err(Error::Domain("need Q tau <= x".into()));
    }
    if q == 0 || q > params.q_max || a.gcd(&(q as i64)) != 1 {
        return Err(Error::Domain(format!(
            "need 1 <= q <= Q and gcd(a, q) = 1, got a={a}, q={q}"
        )));
    }
    if beta.abs() * q as f64 * params.tau > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "|beta| = {} exceeds 1/(q tau)",
            beta.abs()
        )));
    }
    let f = divisor_exp_sum_rational(-a, q, -beta, params.x, table)?;
    let t = x * beta;
    let l = linear_phase_integral_on(t, span);
    let m = log_weighted_integral_on(t, span)?;
    let qf = q as f64;
    let expansion =
        l * (x * x.ln() / qf) + m * (x / qf) + l * ((-2.0 * qf.ln() + 2.0 * EULER_GAMMA) / qf * x);
    Ok((f - expansion).norm())
}

pub fn divisor_expansion_residual(
    a: i64,
    q: u64,
    beta: f64,
    params: &ArcParameters,
    table: &DivisorTable,
) -> Result<f64> {
    divisor_expansion_residual_on(a, q, beta, params, table, DIVISOR_SPAN)
}

/// Residual scan over `q <= Q`, reduced `a`, and
/// `beta in {0, +-1/(2q tau), +-1/(q tau)}`, fitted against `Delta`.
pub fn divisor_residual_scan(
    params: &ArcParameters,
    table: &DivisorTable,
    slack: f64,
    span: f64,
) -> Result<DiagnosticBound> {
    let pairs: Vec<(i64, u64)> = (1..=params.q_max)
        .flat_map(|q| coprime_residues(q).map(move |a| (a, q)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(a, q)| {
            let edge = 1.0 / (q as f64 * params.tau);
            [-1.0, -0.5, 0.0, 0.5, 1.0]
                .iter()
                .map(|t| {
                    let beta = t * edge;
                    let observed = divisor_expansion_residual_on(a, q, beta, params, table, span)?;
                    let bound = divisor_delta(q, params, slack);
                    Ok(DiagnosticRow {
                        alpha: a as f64 / q as f64 + beta,
                        a,
                        q,
                        lambda: beta,
                        observed,
                        bound,
                        ratio: observed / bound,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<DiagnosticRow> = rows.into_iter().flatten().collect();
    let sensitivity = SLACK_SENSITIVITY
        .iter()
        .map(|&s| {
            let c = rows
                .iter()
                .map(|r| r.observed / divisor_delta(r.q, params, s))
                .fold(0.0, f64::max);
            (s, c)
        })
        .collect();
    let mut fit = DiagnosticBound::fit(
        "divisor_expansion_residual",
        params.x,
        params.k,
        slack,
        rows,
    )?;
    fit.sensitivity = sensitivity;
    Ok(fit)
}

/// Number of solutions of `m_1^k + ... + m_s^k = n_1^k + ... + n_s^k` with
/// `s = 2^(j-1)` and all variables in `[1, Y]`.
pub fn hua_count(y: u64, k: u32, j: u32, budget: u128) -> Result<u128> {
    match j {
        1 => Ok(y as u128),
        2 => {
            let work = y as u128 * y as u128;
            if work > budget {
                return Err(Error::Budget {
                    required: work,
                    budget,
                });
            }
            pair_sum_collisions(y, k)
        }
        _ => Err(Error::Domain(format!(
            "moment index j must be 1 or 2, got {j}"
        ))),
    }
}

/// Pair sums per pass, so each pass keeps only a slice of the sums in memory.
const PAIR_PASS_TARGET: u64 = 1 << 22;

/// `sum_s c(s)^2` where `c(s)` counts ordered pairs with `m1^k + m2^k = s`.
fn pair_sum_collisions(y: u64, k: u32) -> Result<u128> {
    let top = (y as u128).pow(k);
    if 2 * top >= u64::MAX as u128 {
        return Err(Error::Size(format!("{y}^{k} pair sums overflow 64 bits")));
    }
    let powers: Vec<u64> = (1..=y).map(|m| m.pow(k)).collect();
    let unordered = y * (y + 1) / 2;
    let passes = (unordered / PAIR_PASS_TARGET + 1).next_power_of_two();
    let mask = passes - 1;
    let total = (0..passes)
        .into_par_iter()
        .map(|pass| {
            // low bit flags the diagonal pair, which counts once instead of twice
            let mut sums: Vec<u64> = Vec::new();
            for (i, &p) in powers.iter().enumerate() {
                for &r in &powers[i..] {
                    let s = p + r;
                    if s & mask == pass {
                        sums.push((s << 1) | (p == r) as u64);
                    }
                }
            }
            sums.sort_unstable();
            let mut acc: u128 = 0;
            let mut i = 0;
            while i < sums.len() {
                let key = sums[i] >> 1;
                let mut c: u128 = 0;
                while i < sums.len() && sums[i] >> 1 == key {
                    c += if sums[i] & 1 == 1 { 1 } else { 2 };
                    i += 1;
                }
                acc += c * c;
            }
            acc
        })
        .sum();
    Ok(total)
}

/// Weyl-type bound for `|f_k(alpha)|` given the Dirichlet denominator `q`:
/// `Y^(1+slack) (1/q + 1/Y + q/Y^k)^(1/2^(k-1))` for `k <= 7`, and
/// `x^(1/k+slack) (1/q + x^(-1/k) + q/x)^(1/(2k(k-1)))` beyond.
pub fn minor_arc_bound(q: u64, x: u64, k: u32, slack: f64) -> f64 {
    let xf = x as f64;
    let q = q as f64;
    let kf = k as f64;
    if k <= 7 {
        let y = iroot(x, k) as f64;
        y.powf(1.0 + slack)
            * (1.0 / q + 1.0 / y + q / y.powi(k as i32)).powf(1.0 / 2f64.powi(k as i32 - 1))
    } else {
        xf.powf(1.0 / kf + slack)
            * (1.0 / q + xf.powf(-1.0 / kf) + q / xf).powf(1.0 / (2.0 * kf * (kf - 1.0)))
    }
}

/// Ratio row for one `alpha`, using its Dirichlet approximation at `tau`.
pub fn minor_arc_row(alpha: f64, params: &ArcParameters, slack: f64) -> Result<DiagnosticRow> {
    let approx = dirichlet_approx(alpha, params.tau)?;
    let observed = weyl_sum(alpha, params.x, params.k).norm();
    let bound = minor_arc_bound(approx.q, params.x, params.k, slack);
    Ok(DiagnosticRow {
        alpha,
        a: approx.a,
        q: approx.q,
        lambda: approx.lambda,
        observed,
        bound,
        ratio: observed / bound,
    })
}

/// Ratios of `|f_k(alpha)|` to the minor-arc bound over seeded minor samples.
pub fn minor_arc_bound_profile(
    params: &ArcParameters,
    samples: usize,
    seed: u64,
    slack: f64,
) -> Result<DiagnosticBound> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1.0 / params.tau;
    let mut alphas = Vec::with_capacity(samples);
    let mut attempts = 0usize;
    while alphas.len() < samples {
        attempts += 1;
        if attempts > 100 * samples.max(1) {
            return Err(Error::Domain(
                "major arcs cover almost all of the window".into(),
            ));
        }
        let alpha = rng.gen_range(lo..=1.0 + lo);
        if !classify_arc(alpha, params)?.is_major() {
            alphas.push(alpha);
        }
    }
    let rows = alphas
        .par_iter()
        .map(|&alpha| minor_arc_row(alpha, params, slack))
        .collect::<Result<Vec<_>>>()?;
    DiagnosticBound::fit("minor_arc_bound", params.x, params.k, slack, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dirichlet_examples() {
        let r = dirichlet_approx(0.5, 10.0).unwrap();
        assert_eq!((r.a, r.q, r.lambda), (1, 2, 0.0));
        let r = dirichlet_approx(std::f64::consts::PI - 3.0, 100.0).unwrap();
        assert!(r.q <= 100);
        assert!(r.lambda.abs() <= 1.0 / (100.0 * r.q as f64));
        assert_eq!(r.q, 7);
        assert!(dirichlet_approx(0.3, 0.5).is_err());
        assert!(dirichlet_approx(f64::NAN, 10.0).is_err());
    }

    proptest! {
        #[test]
        fn dirichlet_contract(alpha in -3.0f64..3.0, tau in 1.0f64..1e6) {
            let r = dirichlet_approx(alpha, tau).unwrap();
            prop_assert!(r.q >= 1 && r.q as f64 <= tau);
            prop_assert!(r.lambda.abs() <= 1.0 / (r.q as f64 * tau));
            prop_assert_eq!(r.a.gcd(&(r.q as i64)), 1);
        }
    }

    #[test]
    fn standard_parameters() {
        let p = ArcParameters::standard(10_000, 3).unwrap();
        assert_eq!(p.q_max, 39);
        assert!((p.tau - 10_000.0 / 39.0).abs() < 1e-12);
        assert!(ArcParameters::new(10_000, 3, 40, 250.0).is_err());
        assert!(ArcParameters::new(10_000, 3, 39, 60.0).is_err());
        assert!(ArcParameters::standard(100, 8).is_err());
    }

    #[test]
    fn classify_examples() {
        let p = ArcParameters::standard(10_000, 3).unwrap();
        match classify_arc(3.0 / 7.0, &p).unwrap() {
            Arc::Major(r) => assert_eq!((r.a, r.q), (3, 7)),
            Arc::Minor => panic!("3/7 should be major"),
        }
        // 39/40 and 40/41 are Farey neighbours with denominators above Q = 39
        let mid = (39.0 / 40.0 + 40.0 / 41.0) / 2.0;
        assert_eq!(classify_arc(mid, &p).unwrap(), Arc::Minor);
        assert!(classify_arc(0.0, &p).is_err());
        assert!(classify_arc(1.5, &p).is_err());
    }

    #[test]
    fn sweep_reports_no_failures() {
        let p = ArcParameters::standard(1000, 4).unwrap();
        let s = arc_contract_sweep(&p, 3000, 3).unwrap();
        assert_eq!((s.contract_failures, s.classify_failures), (0, 0));
        assert!(s.major_fraction > 0.0);
    }

    #[test]
    fn classify_agrees_with_convergent() {
        let p = ArcParameters::standard(10_000, 3).unwrap();
        for alpha in window_samples(&p, 2000, 7) {
            let w = dirichlet_approx(alpha, p.tau).unwrap();
            match classify_arc(alpha, &p).unwrap() {
                Arc::Major(r) => {
                    assert!(r.lambda.abs() * r.q as f64 * p.tau <= 1.0);
                    if w.q <= p.q_max {
                        assert_eq!((w.a, w.q), (r.a, r.q));
                    }
                }
                Arc::Minor => assert!(w.q > p.q_max),
            }
        }
    }

    #[test]
    fn major_measure_matches_sampling() {
        let p = ArcParameters::standard(10_000, 3).unwrap();
        let measure = major_arc_measure(&p);
        let frac = major_fraction(&p, 20_000, 1).unwrap();
        assert!(
            (frac - measure).abs() < 0.2 * measure,
            "{frac} vs {measure}"
        );
    }

    #[test]
    fn totient_values() {
        let v: Vec<u64> = (1..=10).map(totient).collect();
        assert_eq!(v, [1, 1, 2, 2, 4, 2, 6, 4, 6, 4]);
    }

    #[test]
    fn vk_at_zero() {
        let v = vk_approx(1, 1, 0.0, 1000, 3).unwrap();
        assert!((v - Complex64::new(10.0, 0.0)).norm() < 1e-12);
        assert!(vk_approx(2, 4, 0.0, 1000, 3).is_err());
    }

    #[test]
    fn vk_residuals_small() {
        let fit = vk_residual_scan(10_000, 3, 12, DEFAULT_SLACK).unwrap();
        assert!(fit.fitted_constant < 10.0, "{}", fit.fitted_constant);
        assert!(fit
            .to_csv()
            .starts_with("alpha,a,q,lambda,observed,bound,ratio\n"));
    }

    #[test]
    fn hua_examples() {
        assert_eq!(hua_count(17, 3, 1, 0).unwrap(), 17);
        assert_eq!(hua_count(2, 3, 2, 100).unwrap(), 6);
        assert!(hua_count(100, 3, 2, 10).is_err());
        assert!(hua_count(10, 3, 3, 1000).is_err());
    }

    fn hua_brute(y: u64, k: u32) -> u128 {
        let mut n = 0;
        for a in 1..=y {
            for b in 1..=y {
                for c in 1..=y {
                    for d in 1..=y {
                        if a.pow(k) + b.pow(k) == c.pow(k) + d.pow(k) {
                            n += 1;
                        }
                    }
                }
            }
        }
        n
    }

    #[test]
    fn hua_against_brute_force() {
        for (y, k) in [(12, 2), (15, 3), (30, 2), (20, 3)] {
            assert_eq!(
                hua_count(y, k, 2, u128::MAX).unwrap(),
                hua_brute(y, k),
                "Y={y} k={k}"
            );
        }
        // 1729 = 1 + 12^3 = 9^3 + 10^3
        assert_eq!(hua_count(12, 3, 2, u128::MAX).unwrap(), 2 * 144 - 12 + 8);
    }

    #[test]
    fn divisor_residual_at_one() {
        let p = ArcParameters::standard(1000, 3).unwrap();
        let table = DivisorTable::new(4000).unwrap();
        let r = divisor_expansion_residual(1, 1, 0.0, &p, &table).unwrap();
        assert!(r < 10.0 * divisor_delta(1, &p, DEFAULT_SLACK), "{r}");
        assert!(divisor_expansion_residual(1, 1, 1.0, &p, &table).is_err());
        assert!(divisor_expansion_residual(2, 4, 0.0, &p, &table).is_err());
    }

    #[test]
    fn minor_profile_runs() {
        let p = ArcParameters::standard(10_000, 3).unwrap();
        let a = minor_arc_bound_profile(&p, 50, 0, DEFAULT_SLACK).unwrap();
        let b = minor_arc_bound_profile(&p, 50, 0, DEFAULT_SLACK).unwrap();
        assert_eq!(a.fitted_constant, b.fitted_constant);
        assert!(a.rows.iter().all(|r| r.q > p.q_max));
        let p8 = ArcParameters::standard(100_000, 8).unwrap();
        let c = minor_arc_bound_profile(&p8, 20, 0, DEFAULT_SLACK).unwrap();
        assert!(c.fitted_constant.is_finite());
    }
}
