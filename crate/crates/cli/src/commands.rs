use serde_json::json;

use circlekit::arith::DivisorTable;
use circlekit::circle::{
    arc_contract_sweep, diagnostic_csv, divisor_residual_scan, hua_count, minor_arc_bound_profile,
    vk_residual_scan, ArcParameters, DIVISOR_SPAN,
};
use circlekit::exponents::{delta_table_csv, derive_delta, DeltaRow};
use circlekit::expsums::sk_bound_profile;
use circlekit::integrals::{
    density_profile, density_profile_csv, j_values_on, j_volume_oracle, Which, LINEAR_SPAN,
};
use circlekit::series::sigma_truncated;
use circlekit::verify::{
    residual_trend, verification_record, MainTermConstants, Method, MAIN_TERM_SPAN,
};
use circlekit::{fmt_sig, Error, Result};

use crate::args::{Common, Diagnostic, MethodArg};
use crate::report::{IntegralRow, Integrals, Report, SeriesEntry, Table};

pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
    /// Set when a check the command exists to perform did not hold.
    pub mismatch: Option<String>,
}

impl Outcome {
    fn new(report: Report) -> Self {
        Outcome {
            report,
            tables: Vec::new(),
            mismatch: None,
        }
    }
}

fn ks(c: &Common, default: &[u32]) -> Vec<u32> {
    c.k.as_ref()
        .map(|k| k.0.clone())
        .unwrap_or_else(|| default.to_vec())
}

fn xs(c: &Common, default: &[u64]) -> Vec<u64> {
    c.x.as_ref()
        .map(|x| x.0.clone())
        .unwrap_or_else(|| default.to_vec())
}

pub const DEFAULT_B: f64 = circlekit::integrals::DEFAULT_B;
pub const DEFAULT_Q_SERIES: u64 = circlekit::verify::DEFAULT_Q_SERIES;
pub const DEFAULT_DIAGNOSTIC_X: u64 = 10_000;
pub const DEFAULT_SWEEP_Q: u64 = 50;

pub fn delta(c: &Common, budget: u128) -> Result<Outcome> {
    let mut out = Outcome::new(Report::new("delta", c, json!({}), budget));
    let rows = ks(c, &(3..=12).collect::<Vec<_>>())
        .into_iter()
        .map(|k| derive_delta(k).map(|d| DeltaRow::from(&d)))
        .collect::<Result<Vec<_>>>()?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.matches)
        .map(|r| {
            format!(
                "k={}: derived {} expected {} (binding: {})",
                r.k,
                r.delta,
                r.expected,
                r.binding_terms.join("; ")
            )
        })
        .collect();
    if !bad.is_empty() {
        out.mismatch = Some(bad.join("\n"));
    }
    out.tables
        .push(Table::new("delta_table", delta_table_csv(&rows)));
    out.report.delta_table = Some(rows);
    Ok(out)
}

pub fn series(c: &Common, budget: u128) -> Result<Outcome> {
    let q_max = c.q_max.unwrap_or(DEFAULT_Q_SERIES);
    let mut out = Outcome::new(Report::new("series", c, json!({}), budget));
    let mut entries = Vec::new();
    for k in ks(c, &[3]) {
        let s = sigma_truncated(q_max, k)?;
        if s.near_zero() {
            eprintln!("warning: k={k}: sigma1 = {} is near zero", s.sigma1);
        }
        out.tables
            .push(Table::new(format!("series_k{k}"), s.to_csv()));
        entries.push(SeriesEntry {
            k,
            q_max,
            sigma1: s.sigma1,
            sigma2: s.sigma2,
            near_zero: s.near_zero(),
            term_envelope: s.term_envelope(),
        });
    }
    out.report.series = Some(entries);
    Ok(out)
}

pub fn integral(c: &Common, which: Option<u8>, budget: u128) -> Result<Outcome> {
    let b = c.b.unwrap_or(DEFAULT_B);
    let mut out = Outcome::new(Report::new(
        "integral",
        c,
        json!({ "which": which }),
        budget,
    ));
    let whiches = match which {
        Some(w) => vec![Which::from_index(w)?],
        None => vec![Which::Plain, Which::LogWeighted],
    };
    let mut section = Integrals::default();
    let mut csv = String::from("k,which,B,value,quadrature_error,tail_bound,oracle,oracle_diff\n");
    for k in ks(c, &[3, 4, 5]) {
        let both = j_values_on(k, b, LINEAR_SPAN)?;
        for &w in &whiches {
            let v = both[w.index() as usize - 1];
            let oracle = j_volume_oracle(k, w, c.grid)?;
            let diff = (v.value - oracle).abs();
            csv.push_str(&format!(
                "{k},{},{},{},{},{},{},{}\n",
                w.index(),
                fmt_sig(b),
                fmt_sig(v.value),
                fmt_sig(v.quadrature_error),
                fmt_sig(v.tail_bound),
                fmt_sig(oracle),
                fmt_sig(diff)
            ));
            section.values.push(IntegralRow {
                k,
                which: w.index(),
                span: LINEAR_SPAN,
                b,
                value: v.value,
                quadrature_error: v.quadrature_error,
                tail_bound: v.tail_bound,
                oracle: Some(oracle),
                oracle_diff: Some(diff),
            });
            let n = c.samples.max(2);
            let betas: Vec<f64> = (0..n).map(|i| b * i as f64 / (n - 1) as f64).collect();
            let profile = density_profile(k, w, &betas)?;
            out.tables.push(Table::new(
                format!("density_k{k}_j{}", w.index()),
                density_profile_csv(&profile),
            ));
        }
    }
    out.tables.insert(0, Table::new("integrals", csv));
    out.report.integrals = Some(section);
    Ok(out)
}

pub fn verify(c: &Common, budget: u128) -> Result<Outcome> {
    let q_series = c.q_max.unwrap_or(DEFAULT_Q_SERIES);
    let b = c.b.unwrap_or(DEFAULT_B);
    let method = match c.method {
        MethodArg::Direct => Method::Direct,
        MethodArg::Conv => Method::Conv,
        MethodArg::Both => Method::Both,
    };
    let mut out = Outcome::new(Report::new("verify", c, json!({}), budget));
    let mut series = Vec::new();
    let mut integrals = Integrals::default();
    let mut csv = String::from("k,x,exact,main,residual,normalized\n");
    let mut trends = Vec::new();
    for k in ks(c, &[3]) {
        let s = sigma_truncated(q_series, k)?;
        let [j1, j2] = j_values_on(k, b, MAIN_TERM_SPAN)?;
        let constants = MainTermConstants::from_parts(
            k,
            q_series,
            b,
            MAIN_TERM_SPAN,
            s.sigma1,
            s.sigma2,
            j1.value,
            j2.value,
        );
        series.push(SeriesEntry {
            k,
            q_max: q_series,
            sigma1: s.sigma1,
            sigma2: s.sigma2,
            near_zero: s.near_zero(),
            term_envelope: s.term_envelope(),
        });
        for (which, v) in [(1, j1), (2, j2)] {
            integrals.values.push(IntegralRow {
                k,
                which,
                span: MAIN_TERM_SPAN,
                b,
                value: v.value,
                quadrature_error: v.quadrature_error,
                tail_bound: v.tail_bound,
                oracle: None,
                oracle_diff: None,
            });
        }
        integrals.main_term.push(constants);
        let records = xs(c, &[100, 1000, 10_000])
            .into_iter()
            .map(|x| verification_record(x, &constants, method, budget))
            .collect::<Result<Vec<_>>>()?;
        for r in &records {
            csv.push_str(&format!(
                "{k},{},{},{},{},{}\n",
                r.x,
                r.exact,
                fmt_sig(r.main),
                fmt_sig(r.residual),
                fmt_sig(r.normalized)
            ));
        }
        let trend = residual_trend(&records);
        if !trend.decreasing {
            eprintln!(
                "FAIL-SOFT: k={k}: |normalized residual| not decreasing: {:?}",
                trend.sequence
            );
        }
        trends.push(json!({
            "k": k,
            "sequence": trend.sequence,
            "decreasing": trend.decreasing,
            "status": if trend.decreasing { "PASS" } else { "FAIL-SOFT" },
        }));
        out.report.records.extend(records);
    }
    out.report.diagnostic("trend", &trends);
    out.report.series = Some(series);
    out.report.integrals = Some(integrals);
    out.tables.push(Table::new("records", csv));
    Ok(out)
}

pub fn sieve(c: &Common, budget: u128) -> Result<Outcome> {
    let mut out = Outcome::new(Report::new("sieve", c, json!({}), budget));
    let mut rows = Vec::new();
    let mut csv = String::from("x,n,sum_d,sum_d2,sum_d2_over_x_log3x\n");
    for x in xs(c, &[10_000]) {
        let n = x
            .checked_mul(4)
            .ok_or_else(|| Error::Size(format!("4x overflows for x = {x}")))?;
        if n as u128 > budget {
            return Err(Error::Budget {
                required: n as u128,
                budget,
            });
        }
        let table = DivisorTable::new(n as usize)?;
        let sum_d = table.sum(n as usize)?;
        let sum_d2 = table.sum_squares(n as usize)?;
        let xf = x as f64;
        let ratio = sum_d2 as f64 / (xf * xf.ln().max(1.0).powi(3));
        csv.push_str(&format!("{x},{n},{sum_d},{sum_d2},{}\n", fmt_sig(ratio)));
        rows.push(json!({ "x": x, "n": n, "sum_d": sum_d.to_string(), "sum_d2": sum_d2.to_string(), "ratio": ratio }));
    }
    out.report.diagnostic("sieve", &rows);
    out.tables.push(Table::new("sieve", csv));
    Ok(out)
}

pub fn diagnostics(
    c: &Common,
    kind: Diagnostic,
    j: u32,
    y: u64,
    slack: f64,
    budget: u128,
) -> Result<Outcome> {
    let extra =
        json!({ "kind": format!("{kind:?}").to_lowercase(), "j": j, "y": y, "slack": slack });
    let mut out = Outcome::new(Report::new("diagnostics", c, extra, budget));
    let x = xs(c, &[DEFAULT_DIAGNOSTIC_X])[0];
    let want = |d: Diagnostic| kind == Diagnostic::All || kind == d;
    for k in ks(c, &[3]) {
        if want(Diagnostic::Hua) {
            let count = hua_count(y, k, j, budget)?;
            let scale = (y as f64).powi(2i32.pow(j) - j as i32);
            out.report.diagnostic(
                &format!("hua_k{k}"),
                &json!({ "y": y, "k": k, "j": j, "count": count.to_string(), "normalized": count as f64 / scale }),
            );
            out.tables.push(Table::new(
                format!("hua_k{k}"),
                format!(
                    "y,k,j,count,normalized\n{y},{k},{j},{count},{}\n",
                    fmt_sig(count as f64 / scale)
                ),
            ));
        }
        if want(Diagnostic::Sums) {
            let q_max = c.q_max.unwrap_or(DEFAULT_SWEEP_Q);
            let p = sk_bound_profile(q_max, k);
            let mut csv = String::from("q,max_ratio\n");
            for (q, r) in &p.rows {
                csv.push_str(&format!("{q},{}\n", fmt_sig(*r)));
            }
            out.tables.push(Table::new(format!("sums_k{k}"), csv));
            out.report.diagnostic(&format!("sums_k{k}"), &p);
        }
        if want(Diagnostic::Vk) {
            let q_max = c.q_max.unwrap_or(DEFAULT_SWEEP_Q);
            let fit = vk_residual_scan(x, k, q_max, slack)?;
            out.tables
                .push(Table::new(format!("vk_k{k}"), fit.to_csv()));
            out.report.diagnostic(&format!("vk_k{k}"), &fit);
        }
        let needs_arcs = [Diagnostic::Arcs, Diagnostic::Divisor, Diagnostic::Minor]
            .iter()
            .any(|&d| want(d));
        if !needs_arcs {
            continue;
        }
        let params = ArcParameters::standard(x, k)?;
        if want(Diagnostic::Arcs) {
            let sweep = arc_contract_sweep(&params, c.samples, c.seed)?;
            if sweep.contract_failures + sweep.classify_failures > 0 {
                out.mismatch = Some(format!(
                    "k={k}: {} Dirichlet contract failures, {} classification failures",
                    sweep.contract_failures, sweep.classify_failures
                ));
            }
            out.report.diagnostic(&format!("arcs_k{k}"), &sweep);
        }
        if want(Diagnostic::Divisor) {
            if params.tau <= (x as f64).powf(0.51) {
                eprintln!(
                    "skipping divisor residual for k={k}: tau = {} is not above x^0.51",
                    params.tau
                );
            } else {
                let n = 4 * x;
                if n as u128 > budget {
                    return Err(Error::Budget {
                        required: n as u128,
                        budget,
                    });
                }
                let table = DivisorTable::new(n as usize)?;
                let fit = divisor_residual_scan(&params, &table, slack, DIVISOR_SPAN)?;
                out.tables
                    .push(Table::new(format!("divisor_k{k}"), fit.to_csv()));
                out.report.diagnostic(&format!("divisor_k{k}"), &fit);
            }
        }
        if want(Diagnostic::Minor) {
            let fit = minor_arc_bound_profile(&params, c.samples, c.seed, slack)?;
            out.tables
                .push(Table::new(format!("minor_k{k}"), diagnostic_csv(&fit.rows)));
            out.report.diagnostic(&format!("minor_k{k}"), &fit);
        }
    }
    Ok(out)
}
