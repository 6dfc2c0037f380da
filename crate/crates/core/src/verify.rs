//! Main-term assembly and comparison with the exact sum.

use serde::{Deserialize, Serialize};

use crate::arith::{exact_s_convolution, exact_s_direct, ConvolutionMethod, ProblemInstance};
use crate::integrals::j_values_on;
use crate::series::sigma_truncated;
use crate::{Error, Result};

/// Default truncation of the singular series.
pub const DEFAULT_Q_SERIES: u64 = 200;

/// Upper end of the linear factors in the singular integrals used by the
/// main term; the form `n1^2 + n2^2 + n3^2 + n4^k` never exceeds `4x`.
pub const MAIN_TERM_SPAN: f64 = 4.0;

/// `C1 = sigma1 j1`, `C2 = sigma1 j2 + sigma2 j1`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MainTermConstants {
    pub k: u32,
    pub q_series: u64,
    pub b: f64,
    pub span: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub j1: f64,
    pub j2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl MainTermConstants {
    pub fn compute(k: u32, q_series: u64, b: f64) -> Result<Self> {
        Self::compute_on(k, q_series, b, MAIN_TERM_SPAN)
    }

    pub fn compute_on(k: u32, q_series: u64, b: f64, span: f64) -> Result<Self> {
        let series = sigma_truncated(q_series, k)?;
        let [j1, j2] = j_values_on(k, b, span)?;
        Ok(Self::from_parts(
            k,
            q_series,
            b,
            span,
            series.sigma1,
            series.sigma2,
            j1.value,
            j2.value,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        k: u32,
        q_series: u64,
        b: f64,
        span: f64,
        sigma1: f64,
        sigma2: f64,
        j1: f64,
        j2: f64,
    ) -> Self {
        MainTermConstants {
            k,
            q_series,
            b,
            span,
            sigma1,
            sigma2,
            j1,
            j2,
            c1: sigma1 * j1,
            c2: sigma1 * j2 + sigma2 * j1,
        }
    }

    /// Exponent `3/2 + 1/k` of the main term.
    pub fn exponent(&self) -> f64 {
        1.5 + 1.0 / self.k as f64
    }

    pub fn estimate(&self, x: u64) -> Result<MainTermEstimate> {
        let xf = x as f64;
        let scale = xf.powf(self.exponent());
        let main = self.c1 * scale * xf.ln() + self.c2 * scale;
        if !main.is_finite() {
            return Err(Error::NumericalIntegrity(format!(
                "main term at x = {x} is not finite"
            )));
        }
        Ok(MainTermEstimate {
            k: self.k,
            x,
            constants: *self,
            main,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MainTermEstimate {
    pub k: u32,
    pub x: u64,
    pub constants: MainTermConstants,
    pub main: f64,
}

/// Which exact evaluators to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Conv,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRecord {
    pub k: u32,
    pub x: u64,
    pub exact: u128,
    pub direct: Option<u128>,
    pub convolution: Option<u128>,
    pub main: f64,
    pub residual: f64,
    pub normalized: f64,
}

/// Exact `S_k(x)` by the requested evaluators; disagreement is an integrity error.
pub fn exact_value(
    x: u64,
    k: u32,
    method: Method,
    budget: u128,
) -> Result<(u128, Option<u128>, Option<u128>)> {
    let inst = ProblemInstance::new(x, k)?;
    let direct = match method {
        Method::Direct | Method::Both => Some(exact_s_direct(&inst, budget)?),
        Method::Conv => None,
    };
    let convolution = match method {
        Method::Conv | Method::Both => {
            Some(exact_s_convolution(&inst, ConvolutionMethod::Auto, budget)?)
        }
        Method::Direct => None,
    };
    match (direct, convolution) {
        (Some(d), Some(c)) if d != c => Err(Error::Mismatch(format!(
            "direct {d} != convolution {c} at x = {x}, k = {k}"
        ))),
        (Some(v), _) | (None, Some(v)) => Ok((v, direct, convolution)),
        (None, None) => unreachable!(),
    }
}

pub fn verification_record(
    x: u64,
    constants: &MainTermConstants,
    method: Method,
    budget: u128,
) -> Result<VerificationRecord> {
    let (exact, direct, convolution) = exact_value(x, constants.k, method, budget)?;
    let est = constants.estimate(x)?;
    let residual = exact as f64 - est.main;
    Ok(VerificationRecord {
        k: constants.k,
        x,
        exact,
        direct,
        convolution,
        main: est.main,
        residual,
        normalized: residual / (x as f64).powf(constants.exponent()),
    })
}

/// Whether `|normalized|` strictly decreases along the records.
#[derive(Debug, Clone, Serialize)]
pub struct Trend {
    pub sequence: Vec<f64>,
    pub decreasing: bool,
}

pub fn residual_trend(records: &[VerificationRecord]) -> Trend {
    let sequence: Vec<f64> = records.iter().map(|r| r.normalized.abs()).collect();
    let decreasing = sequence.windows(2).all(|w| w[1] < w[0]);
    Trend {
        sequence,
        decreasing,
    }
}
