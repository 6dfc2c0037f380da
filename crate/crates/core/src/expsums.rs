//! Complete sums `S_k(q, a)`, Weyl sums `f_l(alpha)` and the divisor-weighted
//! sum `f(alpha)`.
//!
//! Phases are reduced modulo one before the exponential is taken. For a
//! rational frequency the reduction is done in integers; for a floating
//! frequency the fractional part of `alpha * m` is extracted exactly from the
//! binary expansion of `alpha`, so per-term phase error stays at one ulp no
//! matter how large `m` gets.

use std::f64::consts::TAU;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{iroot, DivisorTable};
use crate::{Error, Result};

/// `e(t) = exp(2 pi i t)`, with `t` reduced to `[-1/2, 1/2]` first.
#[inline]
pub fn e(t: f64) -> Complex64 {
    Complex64::cis(TAU * (t - t.round()))
}

/// Fractional part of `alpha * m` for finite `alpha >= 0`, exact up to the
/// final rounding to double.
pub fn frac_mul(alpha: f64, m: u64) -> f64 {
    debug_assert!(alpha >= 0.0 && alpha.is_finite());
    if alpha == 0.0 || m == 0 {
        return 0.0;
    }
    let bits = alpha.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let (mant, exp) = if biased == 0 {
        (bits & ((1u64 << 52) - 1), -1074)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), biased - 1075)
    };
    if exp >= 0 {
        return 0.0;
    }
    let shift = (-exp) as u32;
    let frac = if shift <= 128 {
        let prod = (mant as u128).wrapping_mul(m as u128);
        let low = if shift == 128 {
            prod
        } else {
            prod & ((1u128 << shift) - 1)
        };
        scale_down(low as f64, shift)
    } else {
        let prod = BigUint::from(mant) * BigUint::from(m);
        let low: BigUint = prod & ((BigUint::from(1u8) << shift) - 1u8);
        scale_down(low.to_f64().unwrap_or(0.0), shift)
    };
    if frac >= 1.0 {
        0.0
    } else {
        frac
    }
}

fn scale_down(v: f64, shift: u32) -> f64 {
    let half = shift / 2;
    v * 2f64.powi(-(half as i32)) * 2f64.powi(-((shift - half) as i32))
}

/// Fractional phase of `alpha * m` for any finite `alpha`, in `(-1, 1)`.
#[inline]
pub fn phase(alpha: f64, m: u64) -> f64 {
    if alpha >= 0.0 {
        frac_mul(alpha, m)
    } else {
        -frac_mul(-alpha, m)
    }
}

/// Pairwise (cascade) summation of a stream of complex terms.
pub fn pairwise_sum<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    const BLOCK: usize = 128;
    let mut levels: Vec<(u32, Complex64)> = Vec::new();
    let mut block = Complex64::new(0.0, 0.0);
    let mut filled = 0usize;
    let push = |levels: &mut Vec<(u32, Complex64)>, mut v: Complex64| {
        let mut lvl = 0u32;
        while let Some(&(l, w)) = levels.last() {
            if l != lvl {
                break;
            }
            levels.pop();
            v += w;
            lvl += 1;
        }
        levels.push((lvl, v));
    };
    for t in terms {
        block += t;
        filled += 1;
        if filled == BLOCK {
            push(&mut levels, block);
            block = Complex64::new(0.0, 0.0);
            filled = 0;
        }
    }
    let mut total = block;
    while let Some((_, v)) = levels.pop() {
        total += v;
    }
    total
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m = m as u128;
    let mut b = base as u128 % m;
    let mut r = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    r as u64
}

fn check_unit(q: u64, a: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    if (a % q).gcd(&q) != 1 {
        return Err(Error::Domain(format!("gcd({a}, {q}) != 1")));
    }
    Ok(())
}

/// `S_k(q, a) = sum_{r=1}^{q} e(a r^k / q)`.
pub fn complete_power_sum(q: u64, a: u64, k: u32) -> Result<Complex64> {
    check_unit(q, a)?;
    let a = a % q;
    Ok(pairwise_sum((1..=q).map(|r| {
        let j = (a as u128 * pow_mod(r, k as u64, q) as u128 % q as u128) as u64;
        e(j as f64 / q as f64)
    })))
}

/// Sparse `(residue, multiplicity)` list of `r^k mod q` over `r = 1..=q`.
#[derive(Debug, Clone)]
pub struct PowerResidues {
    q: u64,
    entries: Vec<(u64, u64)>,
}

impl PowerResidues {
    pub fn new(q: u64, k: u32) -> Self {
        let mut counts = vec![0u64; q as usize];
        for r in 1..=q {
            counts[pow_mod(r, k as u64, q) as usize] += 1;
        }
        let entries = counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(j, c)| (j as u64, c))
            .collect();
        Self { q, entries }
    }

    /// `S_k(q, a)` using a table `roots[i] = e(i / q)`.
    pub fn sum_with(&self, a: u64, roots: &[Complex64]) -> Complex64 {
        let q = self.q as u128;
        self.entries
            .iter()
            .map(|&(j, c)| roots[(a as u128 * j as u128 % q) as usize] * c as f64)
            .sum()
    }
}

/// Table of `e(i / q)` for `0 <= i < q`.
pub fn roots_of_unity(q: u64) -> Vec<Complex64> {
    (0..q).map(|i| e(i as f64 / q as f64)).collect()
}

/// `f_l(alpha) = sum_{1 <= n <= x^(1/l)} e(alpha n^l)`.
pub fn weyl_sum(alpha: f64, x: u64, l: u32) -> Complex64 {
    weyl_sum_len(alpha, iroot(x, l), l)
}

/// Weyl sum over `1 <= n <= len`.
pub fn weyl_sum_len(alpha: f64, len: u64, l: u32) -> Complex64 {
    pairwise_sum((1..=len).map(|n| e(phase(alpha, n.pow(l)))))
}

/// `f_l(a/q + beta)` with the rational part reduced in integers.
pub fn weyl_sum_rational(a: i64, q: u64, beta: f64, x: u64, l: u32) -> Complex64 {
    let len = iroot(x, l);
    let a = a.rem_euclid(q as i64) as u128;
    pairwise_sum((1..=len).map(|n| {
        let m = n.pow(l);
        let r = (a * (m % q) as u128 % q as u128) as f64 / q as f64;
        e(r + phase(beta, m))
    }))
}

/// `f(alpha) = sum_{1 <= n <= 4x} d(n) e(alpha n)`.
pub fn divisor_exp_sum(alpha: f64, x: u64, table: &DivisorTable) -> Result<Complex64> {
    let top = divisor_top(x, table)?;
    let d = table.as_slice();
    Ok(pairwise_sum(
        (1..=top).map(|n| e(phase(alpha, n)) * d[n as usize] as f64),
    ))
}

/// `f(a/q + beta)` with the rational part reduced in integers.
pub fn divisor_exp_sum_rational(
    a: i64,
    q: u64,
    beta: f64,
    x: u64,
    table: &DivisorTable,
) -> Result<Complex64> {
    let top = divisor_top(x, table)?;
    let d = table.as_slice();
    let a = a.rem_euclid(q as i64) as u128;
    Ok(pairwise_sum((1..=top).map(|n| {
        let r = (a * (n % q) as u128 % q as u128) as f64 / q as f64;
        e(r + phase(beta, n)) * d[n as usize] as f64
    })))
}

fn divisor_top(x: u64, table: &DivisorTable) -> Result<u64> {
    let top = 4 * x;
    if (table.limit() as u64) < top {
        return Err(Error::Domain(format!(
            "divisor table covers {} but 4x = {top}",
            table.limit()
        )));
    }
    Ok(top)
}

/// Maximum over `a` of `|S_k(q,a)| / q^((k-1)/k)` for each `q <= q_max`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundProfile {
    pub k: u32,
    pub rows: Vec<(u64, f64)>,
    pub max_ratio: f64,
    pub argmax_q: u64,
}

pub fn sk_bound_profile(q_max: u64, k: u32) -> BoundProfile {
    let rows: Vec<(u64, f64)> = (1..=q_max.max(1))
        .into_par_iter()
        .map(|q| {
            let residues = PowerResidues::new(q, k);
            let roots = roots_of_unity(q);
            let scale = (q as f64).powf((k as f64 - 1.0) / k as f64);
            let best = (1..=q)
                .filter(|&a| a.gcd(&q) == 1)
                .map(|a| residues.sum_with(a % q, &roots).norm())
                .fold(0.0f64, f64::max);
            (q, best / scale)
        })
        .collect();
    let (argmax_q, max_ratio) =
        rows.iter()
            .copied()
            .fold((1, 0.0), |acc, r| if r.1 > acc.1 { r } else { acc });
    BoundProfile {
        k,
        rows,
        max_ratio,
        argmax_q,
    }
}

/// `|S_k(q1 q2, a) - S_k(q1, a q2^(k-1)) S_k(q2, a q1^(k-1))|`.
pub fn crt_factorization_check(q1: u64, q2: u64, a: u64, k: u32) -> Result<f64> {
    if q1 == 0 || q2 == 0 || q1.gcd(&q2) != 1 {
        return Err(Error::Domain(format!("moduli {q1}, {q2} are not coprime")));
    }
    let q = q1 * q2;
    check_unit(q, a)?;
    let whole = complete_power_sum(q, a, k)?;
    let a1 = (a as u128 * pow_mod(q2, k as u64 - 1, q1) as u128 % q1 as u128) as u64;
    let a2 = (a as u128 * pow_mod(q1, k as u64 - 1, q2) as u128 % q2 as u128) as u64;
    let split = complete_power_sum(q1, a1, k)? * complete_power_sum(q2, a2, k)?;
    Ok((whole - split).norm())
}
