//! Numerical verification toolkit for the divisor sum
//!
//! ```text
//! S_k(x) = sum_{n1,n2,n3 <= x^(1/2), n4 <= x^(1/k)} d(n1^2 + n2^2 + n3^2 + n4^k)
//! ```
//!
//! The crate evaluates `S_k(x)` exactly by two independent routes, computes the
//! truncated singular series and singular integrals that make up the predicted
//! main term, checks the exponential-sum bounds used by the circle method
//! against fitted constants, and re-derives the error-exponent table by exact
//! rational balancing.
//!
//! - [`arith`]: divisor sieve and the exact sum
//! - [`expsums`]: complete and incomplete exponential sums
//! - [`series`]: local densities and the singular series
//! - [`integrals`]: oscillatory factors, singular integrals and volume oracles
//! - [`circle`]: rational approximation, arcs and lemma-level diagnostics
//! - [`exponents`]: exact exponent bookkeeping and balancing
//! - [`verify`]: main-term assembly and end-to-end records

// negated float comparisons are used deliberately so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod circle;
mod error;
pub mod exponents;
pub mod expsums;
pub mod integrals;
pub mod quad;
pub mod series;
pub mod verify;

pub use error::{Error, Result};

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default work budget (inner-loop iterations) for exact evaluations.
pub const DEFAULT_BUDGET: u128 = 50_000_000_000;

/// Float formatted with 12 significant digits, as used in every CSV table.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.11e}")
}
