//! Singular integrals.
//!
//! The densities are products of three kinds of unit-interval phase integrals:
//!
//! ```text
//! P_k(beta) = int_0^1 e(beta mu^k) dmu
//! L(beta)   = int_0^3 e(-beta mu) dmu
//! M(beta)   = int_0^3 e(-beta mu) log mu dmu
//! J1(beta)  = P_2^3 P_k L,   J2(beta) = P_2^3 P_k M
//! ```
//!
//! and the singular integrals are `J_i = int J_i(beta) dbeta` over the real
//! line, folded to `2 Re int_0^B`. By Fourier inversion `J1` is the volume of
//! `{mu in [0,1]^4 : mu1^2 + mu2^2 + mu3^2 + mu4^k <= 3}` and `J2` is the
//! integral of the log of the form over the same region; the volume oracle
//! computes those directly and never touches the frequency side.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expsums::e;
#[cfg(test)]
use crate::quad::integrate;
use crate::quad::{composite_gauss, integrate_multi, integrate_with, uniform_breaks, Rule};
use crate::{fmt_sig, Error, Result};

/// Upper end of the linear and log-weighted factors.
pub const LINEAR_SPAN: f64 = 3.0;

/// Split point for the logarithmic singularity at zero.
pub const LOG_SPLIT: f64 = 1e-6;

/// Default truncation of the frequency integral.
pub const DEFAULT_B: f64 = 400.0;

const INNER_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 20;

/// Which singular integral: plain (`J1`) or log-weighted (`J2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Plain,
    LogWeighted,
}

impl Which {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Which::Plain),
            2 => Ok(Which::LogWeighted),
            _ => Err(Error::Domain(format!("which must be 1 or 2, got {i}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Which::Plain => 1,
            Which::LogWeighted => 2,
        }
    }
}

/// Breakpoints on `[0, 1]` splitting the phase `beta mu^k` into `n` equal steps.
fn equal_phase_breaks(k: u32, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| (j as f64 / n as f64).powf(1.0 / k as f64))
        .collect()
}

fn check_power(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::Domain("power must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `int_0^1 e(beta mu^k) dmu` by adaptive (10, 21) Gauss–Kronrod, starting
/// from one panel per turn of the phase.
pub fn unit_power_phase_integral(beta: f64, k: u32) -> Result<Complex64> {
    check_power(k)?;
    if beta == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let n = (beta.abs().ceil() as usize).clamp(1, MAX_PANELS / 4);
    let f = |mu: f64| e(beta * mu.powi(k as i32));
    Ok(integrate_with(
        &f,
        &equal_phase_breaks(k, n),
        INNER_TOL,
        MAX_PANELS,
        Rule::Gk21,
    )?
    .value)
}

/// Same integral by composite 20-point Gauss–Legendre on panels of at most
/// two turns each; used inside the frequency integral.
pub fn unit_power_phase_fast(beta: f64, k: u32) -> Complex64 {
    if beta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let n = ((0.5 * beta.abs()).ceil() as usize).max(1);
    let f = |mu: f64| e(beta * mu.powi(k as i32));
    // refine panels whose local frequency at the right end exceeds two turns
    let coarse = equal_phase_breaks(k, n);
    let mut breaks = vec![0.0];
    for w in coarse.windows(2) {
        let turns = k as f64 * beta.abs() * w[1].powi(k as i32 - 1) * (w[1] - w[0]);
        let m = ((0.5 * turns).ceil() as usize).max(1);
        breaks.extend(uniform_breaks(w[0], w[1], m).into_iter().skip(1));
    }
    composite_gauss(&f, &breaks)
}

/// `int_0^span e(-beta mu) dmu` in closed form.
pub fn linear_phase_integral_on(beta: f64, span: f64) -> Complex64 {
    if beta.abs() < 1e-6 {
        // sum_n (-2 pi i beta)^n span^(n+1) / (n+1)!
        let z = Complex64::new(0.0, -TAU * beta);
        let mut term = Complex64::new(span, 0.0);
        let mut total = term;
        for n in 1..6 {
            term = term * z * span / (n as f64 + 1.0);
            total += term;
        }
        return total;
    }
    (Complex64::new(1.0, 0.0) - e(-span * beta)) / Complex64::new(0.0, TAU * beta)
}

/// `int_0^3 e(-beta mu) dmu`.
pub fn linear_phase_integral(beta: f64) -> Complex64 {
    linear_phase_integral_on(beta, LINEAR_SPAN)
}

/// `int_0^d e(-beta mu) log mu dmu` from the fourth-order expansion of the
/// phase, using `int_0^d mu^n log mu = d^(n+1)/(n+1) (log d - 1/(n+1))`.
fn log_head(beta: f64, d: f64) -> Complex64 {
    let ln_d = d.ln();
    let z = Complex64::new(0.0, -TAU * beta);
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut head = Complex64::new(0.0, 0.0);
    for n in 0..5 {
        let m = n as f64 + 1.0;
        head += coeff * (d.powi(n + 1) / m * (ln_d - 1.0 / m));
        coeff = coeff * z / m;
    }
    head
}

/// Geometric panels off the singularity, then panels of at most
/// `turns` turns of the phase.
fn log_breaks(beta: f64, span: f64, turns: f64) -> Vec<f64> {
    let mut coarse = vec![LOG_SPLIT];
    let mut b = LOG_SPLIT * 4.0;
    while b < 0.25f64.min(span) {
        coarse.push(b);
        b *= 4.0;
    }
    coarse.push(span);
    let width = 0.5f64.min(turns / beta.abs().max(1e-300));
    let mut breaks = vec![LOG_SPLIT];
    for w in coarse.windows(2) {
        let m = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        breaks.extend(uniform_breaks(w[0], w[1], m).into_iter().skip(1));
    }
    breaks
}

/// `int_0^span e(-beta mu) log mu dmu`, adaptive on `[LOG_SPLIT, span]`.
pub fn log_weighted_integral_on(beta: f64, span: f64) -> Result<Complex64> {
    let f = |mu: f64| e(-beta * mu) * mu.ln();
    let tail = integrate_with(
        &f,
        &log_breaks(beta, span, 1.0),
        INNER_TOL,
        MAX_PANELS,
        Rule::Gk21,
    )?;
    Ok(log_head(beta, LOG_SPLIT) + tail.value)
}

/// Composite Gauss–Legendre version of [`log_weighted_integral_on`].
pub fn log_weighted_fast(beta: f64, span: f64) -> Complex64 {
    let f = |mu: f64| e(-beta * mu) * mu.ln();
    log_head(beta, LOG_SPLIT) + composite_gauss(&f, &log_breaks(beta, span, 2.0))
}

/// `int_0^3 e(-beta mu) log mu dmu`.
pub fn log_weighted_integral(beta: f64) -> Result<Complex64> {
    log_weighted_integral_on(beta, LINEAR_SPAN)
}

/// Both densities `(J1(beta), J2(beta))`, sharing the power factors.
pub fn j_density_pair(beta: f64, k: u32, span: f64) -> [Complex64; 2] {
    let p2 = unit_power_phase_fast(beta, 2);
    let common = p2 * p2 * p2 * unit_power_phase_fast(beta, k);
    [
        common * linear_phase_integral_on(beta, span),
        common * log_weighted_fast(beta, span),
    ]
}

/// `J_which(beta)` with the given linear span.
pub fn j_density_on(beta: f64, k: u32, which: Which, span: f64) -> Result<Complex64> {
    check_power(k)?;
    let p2 = unit_power_phase_fast(beta, 2);
    let pk = unit_power_phase_fast(beta, k);
    let last = match which {
        Which::Plain => linear_phase_integral_on(beta, span),
        Which::LogWeighted => log_weighted_fast(beta, span),
    };
    Ok(p2 * p2 * p2 * pk * last)
}

pub fn j_density(beta: f64, k: u32, which: Which) -> Result<Complex64> {
    j_density_on(beta, k, which, LINEAR_SPAN)
}

/// Decay normalizer: `(1+|beta|)^(5/2+1/k)`, divided by `log(2+|beta|)` for `J2`.
pub fn decay_weight(beta: f64, k: u32, which: Which) -> f64 {
    let w = (1.0 + beta.abs()).powf(2.5 + 1.0 / k as f64);
    match which {
        Which::Plain => w,
        Which::LogWeighted => w / (2.0 + beta.abs()).ln(),
    }
}

/// One sample of the density with its normalized decay ratio.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensitySample {
    pub beta: f64,
    pub value: Complex64,
    pub envelope_ratio: f64,
}

pub fn density_profile(k: u32, which: Which, betas: &[f64]) -> Result<Vec<DensitySample>> {
    betas
        .par_iter()
        .map(|&beta| {
            let value = j_density(beta, k, which)?;
            Ok(DensitySample {
                beta,
                value,
                envelope_ratio: value.norm() * decay_weight(beta, k, which),
            })
        })
        .collect()
}

/// CSV with columns `beta,re,im,envelope_ratio`.
pub fn density_profile_csv(samples: &[DensitySample]) -> String {
    let mut out = String::from("beta,re,im,envelope_ratio\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig(s.beta),
            fmt_sig(s.value.re),
            fmt_sig(s.value.im),
            fmt_sig(s.envelope_ratio)
        ));
    }
    out
}

/// A truncated singular integral with its error accounting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularIntegralValue {
    pub k: u32,
    pub which: u8,
    pub b: f64,
    pub value: f64,
    pub quadrature_error: f64,
    /// Fitted decay constant over `[B/2, B]`.
    pub envelope_constant: f64,
    /// Bound on the neglected `|beta| > B` part implied by that constant.
    pub tail_bound: f64,
}

/// Absolute tolerance of the frequency integral over `[0, B]`.
pub const OUTER_TOL: f64 = 1e-8;

/// `2 Re int_0^B J_which(beta) dbeta`.
pub fn j_value(k: u32, which: Which, b: f64) -> Result<SingularIntegralValue> {
    let [j1, j2] = j_values_on(k, b, LINEAR_SPAN)?;
    Ok(if which == Which::Plain { j1 } else { j2 })
}

/// Both truncated singular integrals from one pass over the frequencies.
pub fn j_values(k: u32, b: f64) -> Result<[SingularIntegralValue; 2]> {
    j_values_on(k, b, LINEAR_SPAN)
}

pub fn j_values_on(k: u32, b: f64, span: f64) -> Result<[SingularIntegralValue; 2]> {
    check_power(k)?;
    if !(b >= 1.0) || !b.is_finite() {
        return Err(Error::Domain(format!(
            "truncation B must be a finite value >= 1, got {b}"
        )));
    }
    let (half, err) = integrate_density_pair(k, 0.0, b, span)?;

    // decay constants fitted over [B/2, B]
    let expo = 1.5 + 1.0 / k as f64;
    let samples: Vec<f64> = (0..=32)
        .map(|i| 0.5 * b + 0.5 * b * i as f64 / 32.0)
        .collect();
    let mut env = [0.0f64; 2];
    let densities: Vec<(f64, [Complex64; 2])> = samples
        .par_iter()
        .map(|&beta| (beta, j_density_pair(beta, k, span)))
        .collect();
    for (beta, d) in densities {
        env[0] = env[0].max(d[0].norm() * decay_weight(beta, k, Which::Plain));
        env[1] = env[1].max(d[1].norm() * decay_weight(beta, k, Which::LogWeighted));
    }
    let tail = |c: f64, log: bool| {
        let t = 2.0 * c / expo * (1.0 + b).powf(-expo);
        if log {
            t * (2.0 + b).ln()
        } else {
            t
        }
    };
    let make = |i: usize, which: Which| SingularIntegralValue {
        k,
        which: which.index(),
        b,
        value: 2.0 * half[i].re,
        quadrature_error: 2.0 * err[i],
        envelope_constant: env[i],
        tail_bound: tail(env[i], which == Which::LogWeighted),
    };
    Ok([make(0, Which::Plain), make(1, Which::LogWeighted)])
}

/// `int_lo^hi (J1, J2)(beta) dbeta` with error estimates.
pub fn integrate_density_pair(
    k: u32,
    lo: f64,
    hi: f64,
    span: f64,
) -> Result<([Complex64; 2], [f64; 2])> {
    // the densities turn at most span + 1 times per unit of beta; two turns per panel
    let width = 2.0 / (span + 1.0);
    let chunks = (((hi - lo) / width).ceil().max(1.0) as usize).div_ceil(CHUNK_PANELS);
    let chunk_breaks = uniform_breaks(lo, hi, chunks);
    let parts = chunk_breaks
        .par_windows(2)
        .map(|w| {
            let f = |beta: f64| j_density_pair(beta, k, span);
            let panels = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            let tol = OUTER_TOL * (w[1] - w[0]) / (hi - lo);
            integrate_multi(&f, &uniform_breaks(w[0], w[1], panels), tol, 1 << 16)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut value = [Complex64::new(0.0, 0.0); 2];
    let mut error = [0.0; 2];
    for (v, e) in parts {
        for i in 0..2 {
            value[i] += v[i];
            error[i] += e[i];
        }
    }
    if !value[0].re.is_finite() || !value[1].re.is_finite() {
        return Err(Error::NumericalIntegrity(
            "density evaluation produced NaN".into(),
        ));
    }
    Ok((value, error))
}

const CHUNK_PANELS: usize = 64;

/// Midpoint rule on an `n^3` grid over `(mu1, mu2, mu4)`, with the `mu3`
/// direction integrated in closed form.
pub fn volume_midpoint(k: u32, which: Which, n: usize, span: f64) -> f64 {
    let h = 1.0 / n as f64;
    let mids: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let powk: Vec<f64> = mids.iter().map(|m| m.powi(k as i32)).collect();
    let total: f64 = mids
        .par_iter()
        .map(|&m1| {
            let mut acc = 0.0;
            for &m2 in &mids {
                let s12 = m1 * m1 + m2 * m2;
                for &p4 in &powk {
                    let s = s12 + p4;
                    let room = span - s;
                    if room <= 0.0 {
                        continue;
                    }
                    let t = room.sqrt().min(1.0);
                    acc += match which {
                        Which::Plain => t,
                        // int_0^t log(s + u^2) du
                        Which::LogWeighted => {
                            let r = s.sqrt();
                            t * (s + t * t).ln() - 2.0 * t + 2.0 * r * (t / r).atan()
                        }
                    };
                }
            }
            acc
        })
        .sum();
    total * h * h * h
}

/// Volume oracle, Richardson-extrapolated from grids `n` and `2n`.
pub fn j_volume_oracle(k: u32, which: Which, grid: usize) -> Result<f64> {
    j_volume_oracle_on(k, which, grid, LINEAR_SPAN)
}

pub fn j_volume_oracle_on(k: u32, which: Which, grid: usize, span: f64) -> Result<f64> {
    if grid < 64 {
        return Err(Error::Domain(format!(
            "oracle grid must be >= 64, got {grid}"
        )));
    }
    let coarse = volume_midpoint(k, which, grid, span);
    let fine = volume_midpoint(k, which, 2 * grid, span);
    Ok(fine + (fine - coarse) / 3.0)
}

/// Closed form of `int_0^1 e(beta mu) dmu`, the `k = 1` case.
pub fn unit_linear_closed_form(beta: f64) -> Complex64 {
    if beta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (e(beta) - 1.0) / Complex64::new(0.0, 2.0 * PI * beta)
}
