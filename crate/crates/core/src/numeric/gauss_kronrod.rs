//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Intervals are kept in a max-heap keyed on their error estimate; the worst
//! interval is bisected until the summed estimate meets the tolerance. The
//! error heuristic follows QUADPACK's `qk21`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const XGK: [f64; 11] = [
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
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_400,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Weights of the embedded 10-point Gauss rule (nodes XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NotConverged {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One application of the 21-point Kronrod rule on `[a, b]`.
fn qk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite { x: center });
    }
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite { x: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite { x: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * abs_half, res_asc * abs_half);
    Ok(Panel {
        a,
        b,
        value,
        error: err,
    })
}

/// Integrate `f` over `[a, b]` (either orientation) to the requested tolerance.
pub fn integrate<F>(mut f: F, a: f64, b: f64, settings: &QuadratureSettings) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let first = qk21(&mut f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let tolerance = |v: f64| settings.abs_tol.max(settings.rel_tol * v.abs());
    if total_err <= tolerance(total) {
        return Ok(total);
    }

    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;
    while total_err > tolerance(total) {
        if subdivisions >= settings.max_subdivisions {
            return Err(QuadratureError::NotConverged {
                subdivisions,
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // interval exhausted at machine resolution; accept what we have
            heap.push(worst);
            break;
        }
        let left = qk21(&mut f, worst.a, mid)?;
        let right = qk21(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // re-sum to shed accumulated update roundoff
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integrate over consecutive sub-intervals delimited by `breaks` (sorted or
/// reverse-sorted), summing the pieces.
pub fn integrate_with_breaks<F>(mut f: F, breaks: &[f64], settings: &QuadratureSettings) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        sum += integrate(&mut f, w[0], w[1], settings)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let s = QuadratureSettings::default();
        for k in 0..=30 {
            let v = integrate(|x: f64| x.powi(k), -1.0, 1.0, &s).unwrap();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14, "degree {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let s = QuadratureSettings::default();
        let a = integrate(f64::exp, 0.0, 2.0, &s).unwrap();
        let b = integrate(f64::exp, 2.0, 0.0, &s).unwrap();
        assert!((a + b).abs() < 1e-14);
        assert!((a - (2f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint_singularity_adapts() {
        let s = QuadratureSettings {
            max_subdivisions: 200,
            ..Default::default()
        };
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &s).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let s = QuadratureSettings {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_subdivisions: 3,
        };
        let r = integrate(|x: f64| (1.0 / (x + 1e-3)).sin(), 0.0, 1.0, &s);
        assert!(matches!(r, Err(QuadratureError::NotConverged { .. })));
    }
}
