//! Exact integer convolution of non-negative count vectors.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Largest distance to the nearest integer tolerated after a floating
/// transform before the result is rejected.
pub const ROUNDING_GUARD: f64 = 0.25;

// 2^53: above this a double no longer resolves unit steps.
const MAX_EXACT: f64 = 9_007_199_254_740_992.0;

/// Convolution via a double-precision FFT, rounded to integers.
///
/// Fails with [`Error::Precision`] if any coefficient lands at distance
/// `>= ROUNDING_GUARD` from an integer.
pub fn convolve_float(a: &[u64], b: &[u64]) -> Result<Vec<u64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // pack both real inputs into one complex signal: z = a + i b
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for (i, &v) in a.iter().enumerate() {
        z[i].re = v as f64;
    }
    for (i, &v) in b.iter().enumerate() {
        z[i].im = v as f64;
    }
    fwd.process(&mut z);

    // A_j = (Z_j + conj Z_{-j}) / 2, B_j = (Z_j - conj Z_{-j}) / 2i,
    // so A_j B_j = (Z_j^2 - conj(Z_{-j})^2) / 4i.
    let mut prod = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let zj = z[j];
        let zc = z[(n - j) % n].conj();
        prod[j] = (zj * zj - zc * zc) / Complex64::new(0.0, 4.0);
    }
    inv.process(&mut prod);

    let scale = 1.0 / n as f64;
    let mut out = Vec::with_capacity(out_len);
    for (idx, c) in prod.iter().take(out_len).enumerate() {
        let v = c.re * scale;
        let r = v.round();
        if (v - r).abs() >= ROUNDING_GUARD || !(-ROUNDING_GUARD..MAX_EXACT).contains(&r) {
            return Err(Error::Precision(format!(
                "floating convolution coefficient {idx} = {v} is not within {ROUNDING_GUARD} of an integer"
            )));
        }
        out.push(r as u64);
    }
    Ok(out)
}

const P1: u64 = 998_244_353;
const P2: u64 = 469_762_049;
const ROOT: u64 = 3;

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn ntt(a: &mut [u64], invert: bool, p: u64) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(ROOT, (p - 1) / len as u64, p);
        if invert {
            w = pow_mod(w, p - 2, p);
        }
        for start in (0..n).step_by(len) {
            let mut wn = 1u64;
            for k in 0..len / 2 {
                let u = a[start + k];
                let v = a[start + k + len / 2] * wn % p;
                a[start + k] = if u + v >= p { u + v - p } else { u + v };
                a[start + k + len / 2] = if u >= v { u - v } else { u + p - v };
                wn = wn * w % p;
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = *x * n_inv % p;
        }
    }
}

fn convolve_mod(a: &[u64], b: &[u64], n: usize, p: u64) -> Vec<u64> {
    let mut fa = vec![0u64; n];
    let mut fb = vec![0u64; n];
    for (i, &v) in a.iter().enumerate() {
        fa[i] = v % p;
    }
    for (i, &v) in b.iter().enumerate() {
        fb[i] = v % p;
    }
    ntt(&mut fa, false, p);
    ntt(&mut fb, false, p);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * y % p;
    }
    ntt(&mut fa, true, p);
    fa
}

/// Exact convolution over two NTT-friendly primes recombined by CRT.
///
/// Correct whenever every true coefficient is below `P1 * P2 ~ 4.7e17`; the
/// caller's bound on the coefficients is checked up front.
pub fn convolve_modular(a: &[u64], b: &[u64]) -> Result<Vec<u64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    // both primes are 1 mod 2^23 or better
    if n > 1 << 23 {
        return Err(Error::Size(format!(
            "modular transform length {n} exceeds 2^23"
        )));
    }
    let bound =
        a.iter().map(|&v| v as u128).sum::<u128>() * b.iter().copied().max().unwrap_or(0) as u128;
    if bound >= (P1 as u128) * (P2 as u128) {
        return Err(Error::Precision(format!(
            "coefficient bound {bound} exceeds the CRT modulus"
        )));
    }
    let r1 = convolve_mod(a, b, n, P1);
    let r2 = convolve_mod(a, b, n, P2);
    let p1_inv_mod_p2 = pow_mod(P1 % P2, P2 - 2, P2);
    Ok((0..out_len)
        .map(|i| {
            // x = r1 + P1 * t, t = (r2 - r1) * P1^{-1} mod P2
            let diff = (r2[i] + P2 - r1[i] % P2) % P2;
            let t = diff * p1_inv_mod_p2 % P2;
            r1[i] + P1 * t
        })
        .collect())
}

/// Schoolbook reference convolution.
pub fn convolve_naive(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
