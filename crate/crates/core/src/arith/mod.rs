//! Divisor sieve and exact evaluation of `S_k(x)`.
//!
//! Two independent evaluators are provided: a direct quadruple loop and a
//! meet-in-the-middle route that convolves the representation counts of
//! `n1^2 + n2^2` and `n3^2 + n4^k` and weights the result by `d(m)`.

mod convolution;
mod sieve;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use convolution::{convolve_float, convolve_modular, convolve_naive, ROUNDING_GUARD};
pub use sieve::{sum_d_squared, DivisorTable, DEFAULT_SIEVE_LIMIT};

use crate::{Error, Result};

/// `floor(x^(1/k))` by binary search on exact integer powers.
pub fn iroot(x: u64, k: u32) -> u64 {
    assert!(k >= 1, "iroot needs k >= 1");
    if k == 1 || x <= 1 {
        return x;
    }
    let fits = |r: u64| -> bool {
        match (r as u128).checked_pow(k) {
            Some(p) => p <= x as u128,
            None => false,
        }
    };
    // 2^(64/k + 1) bounds the root from above
    let mut lo = 1u64;
    let mut hi = 1u64 << (64 / k + 1).min(63);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// One evaluation point `(x, k)` with its summation ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub x: u64,
    pub k: u32,
}

impl ProblemInstance {
    pub fn new(x: u64, k: u32) -> Result<Self> {
        if k < 3 {
            return Err(Error::Domain(format!("k must be at least 3, got {k}")));
        }
        if x == 0 {
            return Err(Error::Domain("x must be at least 1".into()));
        }
        Ok(Self { x, k })
    }

    /// Upper end of the ranges of `n1, n2, n3`.
    pub fn square_range(&self) -> u64 {
        iroot(self.x, 2)
    }

    /// Upper end of the range of `n4`.
    pub fn power_range(&self) -> u64 {
        iroot(self.x, self.k)
    }

    /// Largest value of `n1^2 + n2^2 + n3^2 + n4^k` over the ranges; at most `4x`.
    pub fn max_argument(&self) -> u64 {
        let m = self.square_range();
        3 * m * m + self.power_range().pow(self.k)
    }

    /// Inner-loop iterations of the direct evaluator.
    pub fn direct_work(&self) -> u128 {
        let m = self.square_range() as u128;
        m * m * m * self.power_range() as u128
    }
}

/// Representation counts `r(s)` of a binary form over the instance ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationHistogram {
    counts: Vec<u64>,
}

impl RepresentationHistogram {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn support_bound(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn get(&self, s: usize) -> u64 {
        self.counts.get(s).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histograms of `n1^2 + n2^2` and `n3^2 + n4^k`.
pub fn build_histograms(
    inst: &ProblemInstance,
) -> (RepresentationHistogram, RepresentationHistogram) {
    let m = inst.square_range();
    let mk = inst.power_range();
    let mut r12 = vec![0u64; (2 * m * m + 1) as usize];
    for n1 in 1..=m {
        for n2 in 1..=m {
            r12[(n1 * n1 + n2 * n2) as usize] += 1;
        }
    }
    let mut r34 = vec![0u64; (m * m + mk.pow(inst.k) + 1) as usize];
    for n3 in 1..=m {
        for n4 in 1..=mk {
            r34[(n3 * n3 + n4.pow(inst.k)) as usize] += 1;
        }
    }
    (
        RepresentationHistogram { counts: r12 },
        RepresentationHistogram { counts: r34 },
    )
}

/// Transform used by [`exact_s_convolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvolutionMethod {
    /// Double-precision FFT with the rounding guard.
    Float,
    /// Two-prime number-theoretic transform.
    Modular,
    /// Float first, modular on a precision failure.
    Auto,
}

fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(Error::Budget { required, budget })
    } else {
        Ok(())
    }
}

/// Exact `S_k(x)` by the quadruple loop.
pub fn exact_s_direct(inst: &ProblemInstance, budget: u128) -> Result<u128> {
    check_budget(inst.direct_work(), budget)?;
    let table = DivisorTable::new(inst.max_argument() as usize)?;
    Ok(exact_s_direct_with(inst, &table))
}

/// Quadruple loop against a caller-supplied table covering `max_argument`.
pub fn exact_s_direct_with(inst: &ProblemInstance, table: &DivisorTable) -> u128 {
    let m = inst.square_range();
    let d = table.as_slice();
    let powers: Vec<u64> = (1..=inst.power_range()).map(|n| n.pow(inst.k)).collect();
    assert!(
        table.limit() as u64 >= inst.max_argument(),
        "divisor table too small"
    );
    (1..=m)
        .into_par_iter()
        .map(|n1| {
            let mut acc: u128 = 0;
            for n2 in 1..=m {
                let s12 = n1 * n1 + n2 * n2;
                for n3 in 1..=m {
                    let s123 = s12 + n3 * n3;
                    let mut inner: u64 = 0;
                    for &p in &powers {
                        inner += d[(s123 + p) as usize] as u64;
                    }
                    acc += inner as u128;
                }
            }
            acc
        })
        .sum()
}

/// Exact `S_k(x)` as `sum_m d(m) (r12 * r34)(m)`.
pub fn exact_s_convolution(
    inst: &ProblemInstance,
    method: ConvolutionMethod,
    budget: u128,
) -> Result<u128> {
    let (r12, r34) = build_histograms(inst);
    let len = (r12.counts.len() + r34.counts.len() - 1).next_power_of_two() as u128;
    let log = 128 - len.leading_zeros() as u128;
    check_budget(len * log, budget)?;
    let conv = match method {
        ConvolutionMethod::Float => convolve_float(&r12.counts, &r34.counts)?,
        ConvolutionMethod::Modular => convolve_modular(&r12.counts, &r34.counts)?,
        ConvolutionMethod::Auto => match convolve_float(&r12.counts, &r34.counts) {
            Err(Error::Precision(_)) => convolve_modular(&r12.counts, &r34.counts)?,
            other => other?,
        },
    };
    let top = conv.iter().rposition(|&c| c != 0).unwrap_or(0);
    let table = DivisorTable::new(top.max(1))?;
    let d = table.as_slice();
    Ok(conv[..=top]
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, &c)| d[m] as u128 * c as u128)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;

    #[test]
    fn iroot_exact_at_perfect_powers() {
        assert_eq!(iroot(1, 3), 1);
        assert_eq!(iroot(8, 3), 2);
        assert_eq!(iroot(7, 3), 1);
        assert_eq!(iroot(1000, 3), 10);
        assert_eq!(iroot(999, 3), 9);
        assert_eq!(iroot(10_000, 2), 100);
        assert_eq!(iroot(9_999, 2), 99);
        assert_eq!(iroot(u64::MAX, 2), 4_294_967_295);
        assert_eq!(iroot(1 << 40, 8), 32);
        assert_eq!(iroot((1 << 40) - 1, 8), 31);
        for x in 1..5000u64 {
            for k in 2..6u32 {
                let r = iroot(x, k);
                assert!(r.pow(k) <= x && (r + 1).pow(k) > x);
            }
        }
    }

    #[test]
    fn instance_validation() {
        assert!(ProblemInstance::new(10, 2).is_err());
        assert!(ProblemInstance::new(0, 3).is_err());
        let inst = ProblemInstance::new(4, 3).unwrap();
        assert_eq!(inst.square_range(), 2);
        assert_eq!(inst.power_range(), 1);
        assert!(inst.max_argument() <= 4 * inst.x);
    }

    #[test]
    fn hand_values() {
        for (x, want) in [(1u64, 3u128), (4, 23)] {
            let inst = ProblemInstance::new(x, 3).unwrap();
            assert_eq!(exact_s_direct(&inst, DEFAULT_BUDGET).unwrap(), want);
            for m in [
                ConvolutionMethod::Float,
                ConvolutionMethod::Modular,
                ConvolutionMethod::Auto,
            ] {
                assert_eq!(exact_s_convolution(&inst, m, DEFAULT_BUDGET).unwrap(), want);
            }
        }
    }

    #[test]
    fn histogram_entries() {
        let inst = ProblemInstance::new(4, 3).unwrap();
        let (r12, r34) = build_histograms(&inst);
        assert_eq!(r12.get(2), 1);
        assert_eq!(r12.get(5), 2);
        assert_eq!(r12.get(8), 1);
        assert_eq!(r12.total(), 4);
        assert_eq!(r34.total(), 2);
        assert_eq!(r34.get(2), 1);
        assert_eq!(r34.get(5), 1);
    }

    #[test]
    fn budget_refusal_reports_requirement() {
        let inst = ProblemInstance::new(10_000, 3).unwrap();
        match exact_s_direct(&inst, 10) {
            Err(Error::Budget { required, budget }) => {
                assert_eq!(required, 100u128.pow(3) * 21);
                assert_eq!(budget, 10);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn monotone_in_x() {
        let mut prev = 0u128;
        for x in 1..=400u64 {
            let inst = ProblemInstance::new(x, 4).unwrap();
            let s = exact_s_direct(&inst, DEFAULT_BUDGET).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }
}
