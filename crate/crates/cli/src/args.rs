use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "circle-kit",
    version,
    about = "Exact sums, main terms and circle-method diagnostics for sum d(n1^2+n2^2+n3^2+n4^k)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the error-exponent table and compare it with the known values
    Delta,
    /// Compare the exact sum with the predicted main term
    Verify,
    /// Truncated singular series
    Series,
    /// Truncated singular integrals with the volume oracle
    Integral {
        /// 1 for the plain integral, 2 for the log-weighted one; both if omitted
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: Option<u8>,
    },
    /// Lemma-level residual and bound profiles
    Diagnostics {
        #[arg(value_enum, default_value_t = Diagnostic::All)]
        kind: Diagnostic,
        /// Moment index for the hua count
        #[arg(long, default_value_t = 2)]
        j: u32,
        /// Range of the variables in the hua count
        #[arg(long, default_value_t = 1000)]
        y: u64,
        /// Slack exponent standing in for x^epsilon
        #[arg(long, default_value_t = circlekit::circle::DEFAULT_SLACK)]
        slack: f64,
    },
    /// Divisor-sum moments from the sieve
    Sieve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Diagnostic {
    All,
    Arcs,
    Sums,
    Vk,
    Divisor,
    Hua,
    Minor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Direct,
    Conv,
    Both,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct Common {
    /// Power k, as a single value, a list `3,5`, or an inclusive range `3..12`
    #[arg(long, global = true, value_parser = parse_k)]
    pub k: Option<KList>,

    /// Comma-separated sizes x
    #[arg(long, global = true, value_parser = parse_x, value_name = "INT,...")]
    pub x: Option<XList>,

    /// Truncation of the singular series (or modulus bound of a sweep)
    #[arg(long = "q-max", global = true)]
    pub q_max: Option<u64>,

    /// Truncation of the frequency integral
    #[arg(long = "B", global = true)]
    pub b: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,

    /// Oracle grid size
    #[arg(long, global = true, default_value_t = 128)]
    pub grid: usize,

    /// Number of random samples in sweeps
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file for JSON, output directory for CSV tables
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct KList(pub Vec<u32>);

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct XList(pub Vec<u64>);

pub fn parse_k(s: &str) -> Result<KList, String> {
    let s = s.trim();
    let ks: Vec<u32> = if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u32 = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad range start in {s:?}"))?;
        let hi: u32 = hi
            .trim()
            .parse()
            .map_err(|_| format!("bad range end in {s:?}"))?;
        if hi < lo {
            return Err(format!("empty range {s:?}"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| format!("bad k {p:?}")))
            .collect::<Result<_, _>>()?
    };
    if let Some(bad) = ks.iter().find(|&&k| k < 3) {
        return Err(format!("k must be at least 3, got {bad}"));
    }
    if let Some(bad) = ks.iter().find(|&&k| k > 64) {
        return Err(format!("k must be at most 64, got {bad}"));
    }
    Ok(KList(ks))
}

pub fn parse_x(s: &str) -> Result<XList, String> {
    let xs = s
        .split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<u64>().or_else(|_| {
                let v: f64 = p.parse().map_err(|_| format!("bad x {p:?}"))?;
                if v >= 1.0 && v.fract() == 0.0 && v < 1.8e19 {
                    Ok(v as u64)
                } else {
                    Err(format!("x must be a positive integer, got {p:?}"))
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if xs.contains(&0) {
        return Err("x must be positive".into());
    }
    Ok(XList(xs))
}
