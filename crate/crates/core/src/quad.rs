#![allow(clippy::excessive_precision)]
//! Quadrature for complex-valued integrands: adaptive Gauss–Kronrod with
//! either the (7, 15) or the (10, 21) pair, and composite Gauss–Legendre for
//! the hot inner loops where panel sizes are fixed by the phase.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_463_340_900,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Embedded rule pair used by [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Gk15,
    Gk21,
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point panel; returns the Kronrod value and |Kronrod - Gauss|.
pub fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// One 21-point panel; returns the Kronrod value and |Kronrod - Gauss|.
pub fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = f(c) * WGK21[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = h * XGK21[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK21[j];
        if j % 2 == 1 {
            gauss += s * WG10[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive integration over the given breakpoints with the (7, 15) pair.
///
/// Panels are bisected until every panel error is below `tol` scaled by its
/// share of the interval, or `max_panels` is reached.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: &F,
    breakpoints: &[f64],
    tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    integrate_with(f, breakpoints, tol, max_panels, Rule::Gk15)
}

/// Adaptive integration with a chosen rule pair.
pub fn integrate_with<F: Fn(f64) -> Complex64>(
    f: &F,
    breakpoints: &[f64],
    tol: f64,
    max_panels: usize,
    rule: Rule,
) -> Result<QuadResult> {
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let span = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    if span == 0.0 {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0usize;
    let mut panels = 0usize;
    let mut stack: Vec<(f64, f64, u32)> = breakpoints
        .windows(2)
        .rev()
        .map(|w| (w[0], w[1], 0))
        .collect();
    while let Some((a, b, depth)) = stack.pop() {
        let (v, e) = match rule {
            Rule::Gk15 => gk15(f, a, b),
            Rule::Gk21 => gk21(f, a, b),
        };
        evaluations += if rule == Rule::Gk15 { 15 } else { 21 };
        panels += 1;
        let allowed = tol * ((b - a) / span).abs();
        let can_split = depth < 50 && panels + stack.len() < max_panels && (b - a).abs() > 1e-15;
        if e <= allowed.max(1e-15 * v.norm()) || !can_split {
            value += v;
            error += e;
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    if error > tol && error > 1e-13 * value.norm() {
        return Err(Error::Accuracy {
            tolerance: tol,
            estimate: error,
        });
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// 21-point panel for several integrands evaluated together.
pub fn gk21_multi<const N: usize, F: Fn(f64) -> [Complex64; N]>(
    f: &F,
    a: f64,
    b: f64,
) -> ([Complex64; N], [f64; N]) {
    let zero = Complex64::new(0.0, 0.0);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = f(c).map(|v| v * WGK21[10]);
    let mut gauss = [zero; N];
    for j in 0..10 {
        let dx = h * XGK21[j];
        let (lo, hi) = (f(c - dx), f(c + dx));
        for i in 0..N {
            let s = lo[i] + hi[i];
            kron[i] += s * WGK21[j];
            if j % 2 == 1 {
                gauss[i] += s * WG10[j / 2];
            }
        }
    }
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = ((kron[i] - gauss[i]) * h).norm();
        kron[i] *= h;
    }
    (kron, err)
}

/// Adaptive (10, 21) integration of several integrands sharing evaluations.
/// A panel is accepted once every component meets its share of `tol`.
pub fn integrate_multi<const N: usize, F: Fn(f64) -> [Complex64; N]>(
    f: &F,
    breakpoints: &[f64],
    tol: f64,
    max_panels: usize,
) -> Result<([Complex64; N], [f64; N])> {
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let span = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    let mut value = [Complex64::new(0.0, 0.0); N];
    let mut error = [0.0; N];
    let mut panels = 0usize;
    let mut stack: Vec<(f64, f64, u32)> = breakpoints
        .windows(2)
        .rev()
        .map(|w| (w[0], w[1], 0))
        .collect();
    while let Some((a, b, depth)) = stack.pop() {
        let (v, e) = gk21_multi(f, a, b);
        panels += 1;
        let allowed = tol * ((b - a) / span).abs();
        let can_split = depth < 40 && panels + stack.len() < max_panels;
        if e.iter().all(|&x| x <= allowed) || !can_split {
            for i in 0..N {
                value[i] += v[i];
                error[i] += e[i];
            }
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    if error.iter().any(|&e| e > tol) {
        return Err(Error::Accuracy {
            tolerance: tol,
            estimate: error.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok((value, error))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (positive half, node-major),
/// by Newton iteration on the Legendre recurrence.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Points per panel of the composite Gauss–Legendre rule.
pub const GL_POINTS: usize = 20;

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_POINTS))
}

/// Composite 20-point Gauss–Legendre over the given breakpoints.
///
/// Exact to about 1e-16 relative on panels spanning up to two full turns of a
/// linear phase.
pub fn composite_gauss<F: Fn(f64) -> Complex64>(f: &F, breakpoints: &[f64]) -> Complex64 {
    let (nodes, weights) = gl20();
    let mut total = Complex64::new(0.0, 0.0);
    for w in breakpoints.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let h = 0.5 * (w[1] - w[0]);
        let mut panel = Complex64::new(0.0, 0.0);
        for (x, wt) in nodes.iter().zip(weights) {
            panel += f(c + h * x) * *wt;
        }
        total += panel * h;
    }
    total
}

/// `n` equal panels on `[a, b]` as breakpoints.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let f = |x: f64| Complex64::new(x.powi(5) - 2.0 * x, x * x);
        let r = integrate(&f, &[0.0, 2.0], 1e-12, 100).unwrap();
        assert!((r.value.re - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert!((r.value.im - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_exponential() {
        let w = 2.0 * std::f64::consts::PI * 37.25;
        let f = |x: f64| Complex64::from_polar(1.0, w * x);
        let r = integrate(&f, &uniform_breaks(0.0, 1.0, 40), 1e-12, 10_000).unwrap();
        let exact = (Complex64::from_polar(1.0, w) - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn gk21_polynomial_exactness() {
        // the Gauss part is exact to degree 19, Kronrod to degree 31
        let f = |x: f64| Complex64::new(x.powi(19) + 3.0 * x.powi(18), x.powi(30));
        let (v, err) = gk21(&f, -1.0, 1.0);
        assert!((v.re - 6.0 / 19.0).abs() < 1e-14);
        assert!((v.im - 2.0 / 31.0).abs() < 1e-14);
        let g = |x: f64| Complex64::new(x.powi(18), 0.0);
        let (_, err_g) = gk21(&g, -1.0, 1.0);
        assert!(err_g < 1e-14);
        assert!(err > 1e-6);
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        let (nodes, weights) = gl20();
        assert_eq!(nodes.len(), GL_POINTS);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let f = |x: f64| Complex64::new(x.powi(38), 0.0);
        let v = composite_gauss(&f, &[-1.0, 1.0]);
        assert!((v.re - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn composite_gauss_two_turns_per_panel() {
        let w = 2.0 * std::f64::consts::PI * 40.0;
        let f = |x: f64| Complex64::from_polar(1.0, w * x);
        let v = composite_gauss(&f, &uniform_breaks(0.0, 1.3, 26));
        let exact = (Complex64::from_polar(1.0, w * 1.3) - 1.0) / Complex64::new(0.0, w);
        assert!((v - exact).norm() < 1e-14);
    }

    #[test]
    fn reports_non_convergence() {
        let f = |x: f64| Complex64::new((1.0 / x).sin() / x, 0.0);
        let r = integrate(&f, &[1e-9, 1.0], 1e-14, 20);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
