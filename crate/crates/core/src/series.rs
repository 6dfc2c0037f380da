//! Local densities `A_k(q) = q^-5 sum_{(a,q)=1} S_2(q,a)^3 S_k(q,a)` and the
//! truncated singular series built from them.

use std::collections::HashMap;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::expsums::{pairwise_sum, roots_of_unity, PowerResidues};
use crate::{fmt_sig, Error, Result, EULER_GAMMA};

/// Largest imaginary part tolerated before it is discarded.
pub const IMAG_TOLERANCE: f64 = 1e-9;

/// `A_k(q)` summed directly over the reduced residues `a`.
pub fn local_density_direct(q: u64, k: u32) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let roots = roots_of_unity(q);
    let squares = PowerResidues::new(q, 2);
    let powers = PowerResidues::new(q, k);
    let total = pairwise_sum((1..=q).filter(|a| a.gcd(&q) == 1).map(|a| {
        let a = a % q;
        let s2 = squares.sum_with(a, &roots);
        s2 * s2 * s2 * powers.sum_with(a, &roots)
    }));
    let value: Complex64 = total / (q as f64).powi(5);
    if value.im.abs() >= IMAG_TOLERANCE {
        return Err(Error::NumericalIntegrity(format!(
            "A_{k}({q}) has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Prime-power factorization by trial division.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Memoized `A_k` at prime powers, extended multiplicatively.
#[derive(Debug, Clone)]
pub struct DensityCache {
    k: u32,
    prime_powers: HashMap<u64, f64>,
}

impl DensityCache {
    pub fn new(k: u32) -> Self {
        Self {
            k,
            prime_powers: HashMap::new(),
        }
    }

    pub fn get(&mut self, q: u64) -> Result<f64> {
        if q == 0 {
            return Err(Error::Domain("modulus must be positive".into()));
        }
        let mut value = 1.0;
        for (p, e) in factor(q) {
            let pe = p.pow(e);
            let v = match self.prime_powers.get(&pe) {
                Some(&v) => v,
                None => {
                    let v = local_density_direct(pe, self.k)?;
                    self.prime_powers.insert(pe, v);
                    v
                }
            };
            value *= v;
            if value == 0.0 {
                break;
            }
        }
        Ok(value)
    }
}

/// `A_k(q)` via prime powers and multiplicativity.
pub fn local_density(q: u64, k: u32) -> Result<f64> {
    DensityCache::new(k).get(q)
}

/// Truncations of both singular series at `q <= Q`.
#[derive(Debug, Clone, Serialize)]
pub struct SingularSeriesPartial {
    pub k: u32,
    pub q_max: u64,
    /// `(q, A_k(q))` for every `q <= Q`.
    pub terms: Vec<(u64, f64)>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gamma: f64,
}

impl SingularSeriesPartial {
    /// Rows `(q, A_k(q), running sigma1, running sigma2)`.
    pub fn running(&self) -> Vec<(u64, f64, f64, f64)> {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        self.terms
            .iter()
            .map(|&(q, a)| {
                s1 += a;
                s2 += series2_weight(q) * a;
                (q, a, s1, s2)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,A_k(q),sigma1,sigma2\n");
        for (q, a, s1, s2) in self.running() {
            out.push_str(&format!(
                "{q},{},{},{}\n",
                fmt_sig(a),
                fmt_sig(s1),
                fmt_sig(s2)
            ));
        }
        out
    }

    /// Largest `|A_k(q)| q^(3/2 + 1/k)` over the retained terms.
    pub fn term_envelope(&self) -> f64 {
        let expo = 1.5 + 1.0 / self.k as f64;
        self.terms
            .iter()
            .map(|&(q, a)| a.abs() * (q as f64).powf(expo))
            .fold(0.0, f64::max)
    }

    /// Values closer to zero than this are flagged by reports.
    pub fn near_zero(&self) -> bool {
        self.sigma1.abs() < 1e-6
    }
}

/// Weight `-2 log q + 2 gamma` of the second series.
pub fn series2_weight(q: u64) -> f64 {
    -2.0 * (q as f64).ln() + 2.0 * EULER_GAMMA
}

pub fn sigma_truncated(q_max: u64, k: u32) -> Result<SingularSeriesPartial> {
    if q_max == 0 {
        return Err(Error::Domain("truncation bound must be at least 1".into()));
    }
    let mut cache = DensityCache::new(k);
    let terms = (1..=q_max)
        .map(|q| cache.get(q).map(|a| (q, a)))
        .collect::<Result<Vec<_>>>()?;
    let sigma1 = terms.iter().map(|&(_, a)| a).sum();
    let sigma2 = terms.iter().map(|&(q, a)| series2_weight(q) * a).sum();
    Ok(SingularSeriesPartial {
        k,
        q_max,
        terms,
        sigma1,
        sigma2,
        gamma: EULER_GAMMA,
    })
}

/// Fitted tail constants between truncations at `Q` and a larger bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailFit {
    pub q: u64,
    pub c_sigma1: f64,
    /// Same fit for the second series with an extra `log Q` allowed.
    pub c_sigma2: f64,
}

pub fn series_tail_check(
    lo: &SingularSeriesPartial,
    hi: &SingularSeriesPartial,
) -> Result<TailFit> {
    if lo.k != hi.k || hi.q_max < lo.q_max {
        return Err(Error::Domain("partials must share k and be ordered".into()));
    }
    let q = lo.q_max as f64;
    let scale = q.powf(-0.5 - 1.0 / lo.k as f64);
    Ok(TailFit {
        q: lo.q_max,
        c_sigma1: (hi.sigma1 - lo.sigma1).abs() / scale,
        c_sigma2: (hi.sigma2 - lo.sigma2).abs() / (scale * q.ln().max(1.0)),
    })
}
