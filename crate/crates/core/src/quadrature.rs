//! Interval-length integrals for the inter-peak profile and their inversion
//! for the segment constant `K`.
//!
//! On an interval where `|u|^r - |u_x|^r = K`, the distance covered while the
//! height moves monotonically from `w_a` to `w_b` is
//! `|∫ dw / (|w|^r - K)^{1/r}|`. Each monotone piece is parametrised by a
//! variable `tau` in which the integrand is smooth and tends to one:
//!
//! * `K = -a^r < 0`: `w = a sinh(tau)`, `dx/dtau = cosh(tau) / (1 + |sinh tau|^r)^{1/r}`.
//! * `K = a^r > 0`: `v^r = |w|^r - K` removes the weak singularity at the
//!   turning value, then `v = a sinh(tau)`, giving
//!   `dx/dtau = sinh^{r-2}(tau) cosh(tau) / (1 + sinh^r tau)^{(r-1)/r}`.
//!
//! Both rules are scale free, so a length depends on `K` only through the
//! endpoint parameters `tau(w_a)`, `tau(w_b)`.

use crate::error::{Error, Result};
use crate::numeric::gauss_kronrod::integrate_with_breaks;
use crate::numeric::{brent_root, integrate, QuadratureSettings};
use crate::types::Exponent;

/// `(1 + s^r)^{1/r}` for `s >= 0` without overflow.
#[inline]
pub(crate) fn one_plus_pow_root(s: f64, r: f64) -> f64 {
    if s <= 1.0 {
        (1.0 + s.powf(r)).powf(1.0 / r)
    } else {
        s * (s.powf(-r).ln_1p() / r).exp()
    }
}

/// `dx/dtau - 1` on a sinh-like piece.
#[inline]
fn sinh_rate_m1(tau: f64, r: f64) -> f64 {
    let s = tau.sinh().abs();
    let c = tau.cosh();
    if s <= 1.0 {
        c / (1.0 + s.powf(r)).powf(1.0 / r) - 1.0
    } else {
        let e = (s.powf(-r).ln_1p() / r).exp_m1();
        let d = s * (1.0 + e);
        (1.0 / (c + s) - s * e) / d
    }
}

/// `dx/dtau` on a sinh-like piece.
#[inline]
pub(crate) fn sinh_rate(tau: f64, r: f64) -> f64 {
    let s = tau.sinh().abs();
    tau.cosh() / one_plus_pow_root(s, r)
}

/// `dx/dtau - 1` on a cosh-like piece (`tau >= 0`).
#[inline]
fn cosh_rate_m1(tau: f64, r: f64) -> f64 {
    let s = tau.sinh().abs();
    let c = tau.cosh();
    if s <= 1.0 {
        s.powf(r - 2.0) * c / (1.0 + s.powf(r)).powf((r - 1.0) / r) - 1.0
    } else {
        let e = ((r - 1.0) / r * s.powf(-r).ln_1p()).exp_m1();
        (1.0 / (s * (c + s)) - e) / (1.0 + e)
    }
}

/// `dx/dtau` on a cosh-like piece (`tau >= 0`).
#[inline]
pub(crate) fn cosh_rate(tau: f64, r: f64) -> f64 {
    let s = tau.sinh().abs();
    if s <= 1.0 {
        s.powf(r - 2.0) * tau.cosh() / (1.0 + s.powf(r)).powf((r - 1.0) / r)
    } else {
        let e = ((r - 1.0) / r * s.powf(-r).ln_1p()).exp();
        tau.cosh() / (s * e)
    }
}

/// Signed `∫_{t1}^{t2} dx/dtau` on a sinh-like piece.
pub(crate) fn sinh_span(t1: f64, t2: f64, r: f64, settings: &QuadratureSettings) -> Result<f64> {
    let corr = if t1 < 0.0 && t2 > 0.0 || t1 > 0.0 && t2 < 0.0 {
        integrate_with_breaks(|t| sinh_rate_m1(t, r), &[t1, 0.0, t2], settings)?
    } else {
        integrate(|t| sinh_rate_m1(t, r), t1, t2, settings)?
    };
    Ok(t2 - t1 + corr)
}

/// Signed `∫_{t1}^{t2} dx/dtau` on a cosh-like piece, `t1, t2 >= 0`.
pub(crate) fn cosh_span(t1: f64, t2: f64, r: f64, settings: &QuadratureSettings) -> Result<f64> {
    let corr = integrate(|t| cosh_rate_m1(t, r), t1, t2, settings)?;
    Ok(t2 - t1 + corr)
}

/// Sinh-like parameter of height `w` for `K = -scale^r`.
#[inline]
pub(crate) fn sinh_param(w: f64, scale: f64) -> f64 {
    (w / scale).asinh()
}

/// Cosh-like parameter of height `w` for `K > 0`; requires `|w|^r >= K`.
#[inline]
pub(crate) fn cosh_param(w: f64, k: f64, r: f64) -> f64 {
    let w = w.abs();
    let scale = k.powf(1.0 / r);
    let ratio = k / w.powf(r);
    if ratio >= 1.0 {
        return 0.0;
    }
    ((w / scale) * ((-ratio).ln_1p() / r).exp()).asinh()
}

fn check_heights(u_a: f64, u_b: f64) -> Result<()> {
    if !u_a.is_finite() || !u_b.is_finite() {
        return Err(Error::domain("segment heights must be finite"));
    }
    Ok(())
}

/// Length of a monotone profile piece running from height `u_a` to `u_b`
/// with constant `K`. Valid for any sign of `K`, provided the piece exists
/// (same-sign endpoints unless `K < 0`, and `|w|^r >= K` along it).
pub fn length_integral_monotone(u_a: f64, u_b: f64, k: f64, r: Exponent, settings: &QuadratureSettings) -> Result<f64> {
    check_heights(u_a, u_b)?;
    let rf = r.get();
    if k < 0.0 {
        let scale = (-k).powf(1.0 / rf);
        let span = sinh_span(sinh_param(u_a, scale), sinh_param(u_b, scale), rf, settings)?;
        return Ok(span.abs());
    }
    if u_a * u_b <= 0.0 {
        if u_a == u_b {
            return Ok(0.0);
        }
        return Err(Error::domain(format!(
            "a piece with K = {k} >= 0 cannot connect heights {u_a} and {u_b}"
        )));
    }
    if k == 0.0 {
        return Ok((u_b / u_a).ln().abs());
    }
    let floor = k.powf(1.0 / rf);
    if u_a.abs() < floor * (1.0 - 1e-14) || u_b.abs() < floor * (1.0 - 1e-14) {
        return Err(Error::domain(format!(
            "heights {u_a}, {u_b} lie below the turning value {floor} for K = {k}"
        )));
    }
    let span = cosh_span(cosh_param(u_a, k, rf), cosh_param(u_b, k, rf), rf, settings)?;
    Ok(span.abs())
}

/// `|∫_{u_a}^{u_b} dw / (|w|^r - K)^{1/r}|` for `K <= 0`.
pub fn length_integral_neg(u_a: f64, u_b: f64, k: f64, r: Exponent, settings: &QuadratureSettings) -> Result<f64> {
    if k > 0.0 {
        return Err(Error::domain(format!("length_integral_neg needs K <= 0, got {k}")));
    }
    if u_a == u_b {
        return Err(Error::domain("length integral needs distinct endpoint heights"));
    }
    length_integral_monotone(u_a, u_b, k, r, settings)
}

/// Length of a cosh-like segment that descends from `|u_a|` to the turning
/// value `K^{1/r}` and climbs back to `|u_b|`.
pub fn length_integral_pos(u_a: f64, u_b: f64, k: f64, r: Exponent, settings: &QuadratureSettings) -> Result<f64> {
    check_heights(u_a, u_b)?;
    if k <= 0.0 {
        return Err(Error::domain(format!("length_integral_pos needs K > 0, got {k}")));
    }
    if u_a * u_b <= 0.0 {
        return Err(Error::domain("cosh-like segment needs same-sign nonzero heights"));
    }
    let rf = r.get();
    let floor = k.powf(1.0 / rf);
    if u_a.abs().min(u_b.abs()) < floor * (1.0 - 1e-14) {
        return Err(Error::domain(format!(
            "min(|u_a|, |u_b|)^r = {} is below K = {k}",
            u_a.abs().min(u_b.abs()).powf(rf)
        )));
    }
    let left = cosh_span(0.0, cosh_param(u_a, k, rf), rf, settings)?;
    let right = cosh_span(0.0, cosh_param(u_b, k, rf), rf, settings)?;
    Ok(left + right)
}

/// Walk a monotone function of `z` away from `z0` (doubling the step) until
/// the target crosses zero, then refine with Brent.
#[allow(clippy::too_many_arguments)]
fn bracket_and_solve<F>(
    mut f: F,
    z0: f64,
    step0: f64,
    decreasing: bool,
    lo_limit: f64,
    hi_limit: f64,
    xtol: f64,
    what: &str,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let z0 = z0.clamp(lo_limit, hi_limit);
    let f0 = f(z0)?;
    if f0 == 0.0 {
        return Ok(z0);
    }
    let go_up = (f0 > 0.0) == decreasing;
    let (mut za, mut fa) = (z0, f0);
    let mut step = step0;
    loop {
        let zb = if go_up {
            (za + step).min(hi_limit)
        } else {
            (za - step).max(lo_limit)
        };
        if zb == za {
            return Err(Error::NoBracket(format!(
                "{what}: length target not reached before z = {za}"
            )));
        }
        let fb = f(zb)?;
        if fb == 0.0 {
            return Ok(zb);
        }
        if fb.signum() != fa.signum() {
            let (lo, hi, flo, fhi) = if za < zb { (za, zb, fa, fb) } else { (zb, za, fb, fa) };
            return brent_root(&mut f, lo, hi, flo, fhi, xtol, 200);
        }
        za = zb;
        fa = fb;
        step *= 2.0;
    }
}

const LOG_XTOL: f64 = 1e-14;
const LOG_K_MIN: f64 = -690.0;
const LOG_K_MAX: f64 = 690.0;

/// Solve the sinh-like length equation for `K < 0`.
pub fn solve_k_sinh(u_a: f64, u_b: f64, dq: f64, r: Exponent, settings: &QuadratureSettings) -> Result<f64> {
    solve_k_sinh_hinted(u_a, u_b, dq, r, settings, None)
}

pub(crate) fn solve_k_sinh_hinted(
    u_a: f64,
    u_b: f64,
    dq: f64,
    r: Exponent,
    settings: &QuadratureSettings,
    hint: Option<f64>,
) -> Result<f64> {
    check_heights(u_a, u_b)?;
    if !(dq > 0.0) {
        return Err(Error::domain(format!("interval length must be positive, got {dq}")));
    }
    if u_a == u_b {
        return Err(Error::NoBracket("equal heights cannot form a sinh-like segment".into()));
    }
    let rf = r.get();
    if u_a * u_b > 0.0 {
        let limit = (u_b / u_a).ln().abs();
        if dq >= limit {
            return Err(Error::NoBracket(format!(
                "dQ = {dq} exceeds the K -> 0- limit {limit}"
            )));
        }
    }
    let length = |y: f64| -> Result<f64> {
        let scale = (y / rf).exp();
        let span = sinh_span(sinh_param(u_a, scale), sinh_param(u_b, scale), rf, settings)?;
        Ok(span.abs() - dq)
    };
    let (y0, step) = match hint {
        Some(k) if k < 0.0 => ((-k).ln(), 1e-3),
        _ => (rf * ((u_b - u_a).abs() / dq).ln(), 1.0),
    };
    let y = bracket_and_solve(length, y0, step, true, LOG_K_MIN, LOG_K_MAX, LOG_XTOL, "sinh-like")?;
    Ok(-y.exp())
}

/// Solve the cosh-like length equation, `0 < K <= min(|u_a|, |u_b|)^r`.
/// Handles both an interior turning point and a monotone cosh-like segment
/// whose turning point lies outside the interval.
pub fn solve_k_cosh(u_a: f64, u_b: f64, dq: f64, r: Exponent, settings: &QuadratureSettings) -> Result<f64> {
    solve_cosh_hinted(u_a, u_b, dq, r, settings, None).map(|(k, _)| k)
}

/// Returns `(K, has_interior_turning_point)`.
pub(crate) fn solve_cosh_hinted(
    u_a: f64,
    u_b: f64,
    dq: f64,
    r: Exponent,
    settings: &QuadratureSettings,
    hint: Option<f64>,
) -> Result<(f64, bool)> {
    match solve_k_cosh_turning(u_a, u_b, dq, r, settings, hint) {
        Ok(k) => Ok((k, true)),
        Err(Error::NoBracket(_)) => {
            solve_k_cosh_monotone_hinted(u_a, u_b, dq, r, settings, hint).map(|k| (k, false))
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn solve_k_cosh_turning(
    u_a: f64,
    u_b: f64,
    dq: f64,
    r: Exponent,
    settings: &QuadratureSettings,
    hint: Option<f64>,
) -> Result<f64> {
    check_heights(u_a, u_b)?;
    if !(dq > 0.0) {
        return Err(Error::domain(format!("interval length must be positive, got {dq}")));
    }
    if u_a * u_b <= 0.0 {
        return Err(Error::NoBracket("cosh-like segment needs same-sign nonzero heights".into()));
    }
    let rf = r.get();
    let lo = u_a.abs().min(u_b.abs());
    let hi = u_a.abs().max(u_b.abs());
    let kmax = lo.powf(rf);
    // z = ln(K / kmax) in (-inf, 0]; length decreases with z
    let at_top = cosh_span(0.0, cosh_param(hi, kmax, rf), rf, settings)?;
    if dq <= at_top {
        return Err(Error::NoBracket(format!(
            "dQ = {dq} is not longer than the monotone limit {at_top}; turning point lies outside"
        )));
    }
    let length = |z: f64| -> Result<f64> {
        if z >= 0.0 {
            return Ok(at_top - dq);
        }
        let k = kmax * z.exp();
        let left = cosh_span(0.0, cosh_param(lo, k, rf), rf, settings)?;
        let right = cosh_span(0.0, cosh_param(hi, k, rf), rf, settings)?;
        Ok(left + right - dq)
    };
    let (z0, step) = match hint {
        Some(k) if k > 0.0 && k < kmax => ((k / kmax).ln(), 1e-3),
        _ => (-0.5 * rf * (dq - (hi / lo).ln()).max(1e-3), 1.0),
    };
    let z = bracket_and_solve(length, z0.min(-1e-12), step, true, LOG_K_MIN, 0.0, LOG_XTOL, "cosh-like")?;
    Ok(kmax * z.exp())
}

/// Solve for `K > 0` on a monotone cosh-like segment (turning point outside
/// the interval): `ln(hi/lo) < dQ <= length at K = lo^r`.
pub fn solve_k_cosh_monotone(u_a: f64, u_b: f64, dq: f64, r: Exponent, settings: &QuadratureSettings) -> Result<f64> {
    solve_k_cosh_monotone_hinted(u_a, u_b, dq, r, settings, None)
}

pub(crate) fn solve_k_cosh_monotone_hinted(
    u_a: f64,
    u_b: f64,
    dq: f64,
    r: Exponent,
    settings: &QuadratureSettings,
    hint: Option<f64>,
) -> Result<f64> {
    check_heights(u_a, u_b)?;
    if u_a * u_b <= 0.0 {
        return Err(Error::NoBracket("cosh-like segment needs same-sign nonzero heights".into()));
    }
    let rf = r.get();
    let lo = u_a.abs().min(u_b.abs());
    let hi = u_a.abs().max(u_b.abs());
    let kmax = lo.powf(rf);
    let exp_len = (hi / lo).ln();
    if dq <= exp_len {
        return Err(Error::NoBracket(format!("dQ = {dq} is not above the K = 0 length {exp_len}")));
    }
    let length = |z: f64| -> Result<f64> {
        let k = kmax * z.min(0.0).exp();
        let span = cosh_span(cosh_param(lo, k, rf), cosh_param(hi, k, rf), rf, settings)?;
        Ok(span - dq)
    };
    let top = length(0.0)?;
    if top < 0.0 {
        return Err(Error::NoBracket(format!(
            "dQ = {dq} exceeds the monotone cosh-like limit {}",
            top + dq
        )));
    }
    if top == 0.0 {
        return Ok(kmax);
    }
    let (z0, step) = match hint {
        Some(k) if k > 0.0 && k <= kmax => ((k / kmax).ln(), 1e-3),
        _ => (-1.0, 1.0),
    };
    let z = bracket_and_solve(length, z0, step, false, LOG_K_MIN, 0.0, LOG_XTOL, "monotone cosh-like")?;
    Ok(kmax * z.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn r(v: f64) -> Exponent {
        Exponent::singular(v).unwrap()
    }

    fn tight() -> QuadratureSettings {
        QuadratureSettings {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_subdivisions: 200,
        }
    }

    // r = 2 closed forms: sinh-like antiderivative asinh(w / sqrt(-K)),
    // cosh-like acosh(w / sqrt(K)).
    fn asinh_len(ua: f64, ub: f64, k: f64) -> f64 {
        let a = (-k).sqrt();
        ((ub / a).asinh() - (ua / a).asinh()).abs()
    }

    #[test]
    fn rate_forms_agree() {
        for &rr in &[2.0, 2.5, 3.0, 4.5, 8.0] {
            for &t in &[0.0, 0.1, 0.7, 0.9, 1.2, 3.0, 12.0] {
                assert!((sinh_rate(t, rr) - 1.0 - sinh_rate_m1(t, rr)).abs() < 1e-14);
                assert!((cosh_rate(t, rr) - 1.0 - cosh_rate_m1(t, rr)).abs() < 1e-14);
            }
        }
        for &t in &[0.0, 0.5, 2.0, 9.0] {
            assert!((sinh_rate(t, 2.0) - 1.0).abs() < 1e-15);
            assert!((cosh_rate(t, 2.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn neg_examples() {
        let s = QuadratureSettings::default();
        assert!((length_integral_neg(1.0, E, 0.0, r(3.0), &s).unwrap() - 1.0).abs() < 1e-14);
        let v = length_integral_neg(0.0, 1f64.sinh(), -1.0, r(2.0), &s).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = length_integral_neg(-0.5f64.sinh(), 0.5f64.sinh(), -1.0, r(2.0), &s).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pos_examples() {
        let s = QuadratureSettings::default();
        let c1 = 1f64.cosh();
        assert!((length_integral_pos(c1, c1, 1.0, r(2.0), &s).unwrap() - 2.0).abs() < 1e-12);
        assert!((length_integral_pos(c1, 1.0, 1.0, r(2.0), &s).unwrap() - 1.0).abs() < 1e-12);
        let v = length_integral_pos(-0.3f64.cosh(), -0.7f64.cosh(), 1.0, r(2.0), &s).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(length_integral_pos(0.5, 2.0, 1.0, r(2.0), &s).is_err());
    }

    #[test]
    fn solve_sinh_examples() {
        let s = QuadratureSettings::default();
        let h = 0.5f64.sinh();
        let k = solve_k_sinh(-h, h, 1.0, r(2.0), &s).unwrap();
        assert!((k + 1.0).abs() < 1e-10, "{k}");
        let h = 1f64.sinh();
        let k = solve_k_sinh(-h, h, 2.0, r(2.0), &s).unwrap();
        assert!((k + 1.0).abs() < 1e-10, "{k}");
        let mut last = 0.0;
        for dq in [1e-1, 1e-2, 1e-3] {
            let k = solve_k_sinh(-1.0, 1.0, dq, r(2.0), &s).unwrap();
            assert!(k < last);
            last = k;
        }
        assert!(last < -1e5);
    }

    #[test]
    fn solve_cosh_examples() {
        let s = QuadratureSettings::default();
        let c1 = 1f64.cosh();
        let k = solve_k_cosh(c1, c1, 2.0, r(2.0), &s).unwrap();
        assert!((k - 1.0).abs() < 1e-10, "{k}");
        let k = solve_k_cosh(2f64.cosh(), c1, 3.0, r(2.0), &s).unwrap();
        assert!((k - 1.0).abs() < 1e-10, "{k}");
        let k = solve_k_cosh(1.3, 1.3, 1e-4, r(2.0), &s).unwrap();
        assert!((k - 1.69).abs() < 1e-6, "{k}");
        // monotone segment: turning point outside, u = cosh(x - x*) with x* left of the interval
        let k = solve_k_cosh(1.0, 3.0, 1.2, r(2.0), &s).unwrap();
        let x0 = (1.0 / k.sqrt()).acosh();
        let x1 = (3.0 / k.sqrt()).acosh();
        assert!((x1 - x0 - 1.2).abs() < 1e-10);
        assert!(matches!(
            solve_k_cosh_turning(1.0, 3.0, 1.2, r(2.0), &s, None),
            Err(Error::NoBracket(_))
        ));
        assert!(matches!(solve_k_cosh(1.0, 3.0, 1.0, r(2.0), &s), Err(Error::NoBracket(_))));
    }

    #[test]
    fn solve_cosh_monotone_matches_closed_form() {
        // u = cosh(x) on [0.3, 1.5]: heights cosh 0.3 -> cosh 1.5, K = 1
        let s = QuadratureSettings::default();
        let k = solve_k_cosh_monotone(0.3f64.cosh(), 1.5f64.cosh(), 1.2, r(2.0), &s).unwrap();
        assert!((k - 1.0).abs() < 1e-10, "{k}");
    }

    #[test]
    fn sinh_no_bracket_beyond_exponential() {
        let s = QuadratureSettings::default();
        assert!(matches!(
            solve_k_sinh(1.0, E, 1.5, r(3.0), &s),
            Err(Error::NoBracket(_))
        ));
    }

    #[test]
    fn r2_sinh_matches_asinh_closed_form() {
        let s = tight();
        for &(ua, ub, k) in &[(-0.3, 2.0, -0.5), (0.1, 3.0, -2.0), (-4.0, -0.2, -1e-3)] {
            let v = length_integral_neg(ua, ub, k, r(2.0), &s).unwrap();
            assert!((v - asinh_len(ua, ub, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn substituted_and_raw_integrands_agree() {
        // away from the turning value the raw integrand is regular
        let s = tight();
        for &rr in &[2.0, 3.0, 4.5, 6.0] {
            let k: f64 = 0.4;
            let (ua, ub) = (1.3f64, 2.2f64);
            let raw = integrate(|w: f64| 1.0 / (w.powf(rr) - k).powf(1.0 / rr), ua, ub, &s).unwrap();
            let sub = length_integral_monotone(ua, ub, k, r(rr), &s).unwrap();
            assert!((raw - sub).abs() < 1e-11, "r={rr}: {raw} vs {sub}");
        }
    }

    #[test]
    fn neg_is_decreasing_in_abs_k() {
        let s = QuadratureSettings::default();
        for &rr in &[2.0, 3.5, 6.0] {
            let mut last = f64::INFINITY;
            for i in 0..30 {
                let k = -(1e-3 * 1.6f64.powi(i));
                let v = length_integral_neg(-0.7, 1.4, k, r(rr), &s).unwrap();
                assert!(v < last);
                last = v;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sinh_round_trip(ua in -3.0f64..-0.05, ub in 0.05f64..3.0, dq in 0.05f64..8.0, rr in 2.0f64..8.0) {
            let s = QuadratureSettings::default();
            let k = solve_k_sinh(ua, ub, dq, r(rr), &s).unwrap();
            prop_assert!(k < 0.0);
            let back = length_integral_neg(ua, ub, k, r(rr), &s).unwrap();
            prop_assert!((back - dq).abs() < 1e-9, "{} vs {}", back, dq);
        }

        #[test]
        fn lengths_are_flip_invariant(ua in 0.2f64..3.0, ub in 0.2f64..3.0, frac in 0.05f64..0.95, rr in 2.0f64..8.0) {
            let s = QuadratureSettings::default();
            let k = frac * ua.min(ub).powf(rr);
            let a = length_integral_pos(ua, ub, k, r(rr), &s).unwrap();
            let b = length_integral_pos(-ua, -ub, k, r(rr), &s).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
            let a = length_integral_neg(ua, -ub, -k, r(rr), &s).unwrap();
            let b = length_integral_neg(-ua, ub, -k, r(rr), &s).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
