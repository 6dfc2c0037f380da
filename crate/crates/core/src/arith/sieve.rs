use crate::{Error, Result};

/// Largest sieve bound accepted without an explicit override.
pub const DEFAULT_SIEVE_LIMIT: usize = 1 << 28;

/// Divisor counts `d(n)` for `1 <= n <= limit`.
#[derive(Debug, Clone)]
pub struct DivisorTable {
    // values[0] is unused and holds 0.
    values: Vec<u32>,
}

impl DivisorTable {
    /// Linear sieve over smallest prime factors, tracking the exponent of the
    /// smallest prime so that `d(n) = d(n / p^e) * (e + 1)`.
    pub fn new(limit: usize) -> Result<Self> {
        Self::with_memory_limit(limit, DEFAULT_SIEVE_LIMIT)
    }

    pub fn with_memory_limit(limit: usize, max_limit: usize) -> Result<Self> {
        if limit == 0 {
            return Err(Error::Size("divisor sieve needs N >= 1".into()));
        }
        if limit > max_limit {
            return Err(Error::Size(format!(
                "divisor sieve bound {limit} exceeds memory limit {max_limit}"
            )));
        }
        let mut values = vec![0u32; limit + 1];
        // exponent of the smallest prime factor in n
        let mut lpf_exp = vec![0u8; limit + 1];
        let mut primes: Vec<usize> = Vec::new();
        values[1] = 1;
        for i in 2..=limit {
            if values[i] == 0 {
                values[i] = 2;
                lpf_exp[i] = 1;
                primes.push(i);
            }
            for &p in &primes {
                let m = i * p;
                if m > limit {
                    break;
                }
                if i % p == 0 {
                    let e = lpf_exp[i] as u32;
                    values[m] = values[i] / (e + 1) * (e + 2);
                    lpf_exp[m] = lpf_exp[i] + 1;
                    break;
                }
                values[m] = values[i] * 2;
                lpf_exp[m] = 1;
            }
        }
        Ok(Self { values })
    }

    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    /// `d(n)`; panics when `n` is 0 or above the limit.
    #[inline]
    pub fn get(&self, n: usize) -> u32 {
        assert!(n >= 1 && n < self.values.len(), "d({n}) outside table");
        self.values[n]
    }

    /// Slice indexed by `n`, entry 0 unused.
    pub fn as_slice(&self) -> &[u32] {
        &self.values
    }

    /// `sum_{n <= N} d(n)^2` for `N <= limit`.
    pub fn sum_squares(&self, n: usize) -> Result<u128> {
        if n == 0 || n > self.limit() {
            return Err(Error::Size(format!(
                "sum bound {n} outside table 1..={}",
                self.limit()
            )));
        }
        Ok(self.values[1..=n]
            .iter()
            .map(|&d| (d as u128) * (d as u128))
            .sum())
    }

    pub fn sum(&self, n: usize) -> Result<u128> {
        if n == 0 || n > self.limit() {
            return Err(Error::Size(format!(
                "sum bound {n} outside table 1..={}",
                self.limit()
            )));
        }
        Ok(self.values[1..=n].iter().map(|&d| d as u128).sum())
    }
}

/// Exact `sum_{n <= N} d(n)^2`.
pub fn sum_d_squared(n: usize) -> Result<u128> {
    DivisorTable::new(n)?.sum_squares(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: usize) -> u32 {
        (1..=n).filter(|d| n.is_multiple_of(*d)).count() as u32
    }

    #[test]
    fn small_values() {
        let t = DivisorTable::new(200).unwrap();
        assert_eq!(t.get(1), 1);
        assert_eq!(t.get(12), 6);
        assert_eq!(t.get(97), 2);
        for n in 1..=200 {
            assert_eq!(t.get(n), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn single_entry_table() {
        let t = DivisorTable::new(1).unwrap();
        assert_eq!(t.as_slice()[1..], [1]);
    }

    #[test]
    fn rejects_zero_and_oversize() {
        assert!(matches!(DivisorTable::new(0), Err(Error::Size(_))));
        assert!(matches!(
            DivisorTable::with_memory_limit(1000, 999),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn squares_sum() {
        assert_eq!(sum_d_squared(1).unwrap(), 1);
        assert_eq!(sum_d_squared(4).unwrap(), 18);
    }
}
