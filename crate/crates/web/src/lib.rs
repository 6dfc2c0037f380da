//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string so the page needs nothing beyond `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use circlekit::circle::{classify_arc, ArcParameters};
use circlekit::exponents::{derive_delta, DeltaRow};
use circlekit::expsums::weyl_sum;
use circlekit::integrals::{j_density, Which};

fn to_js<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

fn err(e: circlekit::Error) -> JsError {
    JsError::new(&e.to_string())
}

pub fn delta_rows(k_min: u32, k_max: u32) -> circlekit::Result<Vec<DeltaRow>> {
    (k_min..=k_max.min(64))
        .map(|k| derive_delta(k).map(|d| DeltaRow::from(&d)))
        .collect()
}

/// Exact exponent table for `k_min..=k_max`.
#[wasm_bindgen]
pub fn delta_table(k_min: u32, k_max: u32) -> Result<String, JsError> {
    delta_rows(k_min, k_max).map(|r| to_js(&r)).map_err(err)
}

#[derive(Debug, Serialize)]
pub struct DensityPoints {
    pub beta: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub abs: Vec<f64>,
}

pub fn density_points(k: u32, which: u8, b: f64, n: usize) -> circlekit::Result<DensityPoints> {
    let which = Which::from_index(which)?;
    let n = n.clamp(2, 20_000);
    let mut out = DensityPoints {
        beta: vec![],
        re: vec![],
        im: vec![],
        abs: vec![],
    };
    for i in 0..n {
        let beta = b * i as f64 / (n - 1) as f64;
        let v = j_density(beta, k, which)?;
        out.beta.push(beta);
        out.re.push(v.re);
        out.im.push(v.im);
        out.abs.push(v.norm());
    }
    Ok(out)
}

/// Samples of the singular-integral density on `[0, B]`.
#[wasm_bindgen]
pub fn density_profile(k: u32, which: u8, b: f64, n: usize) -> Result<String, JsError> {
    density_points(k, which, b, n)
        .map(|p| to_js(&p))
        .map_err(err)
}

#[derive(Debug, Serialize)]
pub struct WeylPoints {
    pub q_max: u64,
    pub tau: f64,
    pub alpha: Vec<f64>,
    pub abs: Vec<f64>,
    /// Denominator of the major arc containing the point, 0 on the minor arcs.
    pub arc_q: Vec<u64>,
}

pub fn weyl_points(x: u64, k: u32, n: usize) -> circlekit::Result<WeylPoints> {
    let params = ArcParameters::standard(x, k)?;
    let n = n.clamp(2, 20_000);
    let lo = 1.0 / params.tau;
    let mut out = WeylPoints {
        q_max: params.q_max,
        tau: params.tau,
        alpha: vec![],
        abs: vec![],
        arc_q: vec![],
    };
    for i in 0..n {
        let alpha = lo + i as f64 / (n - 1) as f64;
        out.alpha.push(alpha);
        out.abs.push(weyl_sum(alpha, x, k).norm());
        out.arc_q.push(match classify_arc(alpha, &params)? {
            circlekit::circle::Arc::Major(r) => r.q,
            circlekit::circle::Arc::Minor => 0,
        });
    }
    Ok(out)
}

/// `|f_k(alpha)|` across the unit window with the major arcs marked.
#[wasm_bindgen]
pub fn weyl_profile(x: u64, k: u32, n: usize) -> Result<String, JsError> {
    weyl_points(x, k, n).map(|p| to_js(&p)).map_err(err)
}
