//! One inter-peak interval of the reconstructed profile, and the smooth
//! parametrised pieces used to evaluate it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::gauss_kronrod::integrate_with_breaks;
use crate::numeric::{brent_root, integrate, QuadratureSettings, RootError};
use crate::quadrature::{cosh_param, cosh_rate, cosh_span, one_plus_pow_root, sinh_rate, sinh_span};
use crate::types::{spow, BranchKind, Exponent};

/// Serialize non-finite endpoints of the tails as the strings `"-inf"` / `"inf"`.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("bad endpoint {other:?}"))),
            },
        }
    }
}

/// An interval `[x_left, x_right]` on which `|u|^r - |u_x|^r = k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(with = "extended_f64")]
    pub x_left: f64,
    #[serde(with = "extended_f64")]
    pub x_right: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub k: f64,
    pub branch: BranchKind,
    pub turning_x: Option<f64>,
    pub turning_u: Option<f64>,
}

/// Integrals of one segment used for energies and the integrated form.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct SegmentIntegrals {
    /// `∫ |u|^r dx`
    pub u_pow: f64,
    /// `∫ |u_x|^r dx`
    pub ux_pow: f64,
    /// `∫ |u|^{r-2} u dx`
    pub psi: f64,
}

impl Segment {
    pub fn left_tail(q: f64, uhat: f64) -> Self {
        Segment {
            x_left: f64::NEG_INFINITY,
            x_right: q,
            u_left: 0.0,
            u_right: uhat,
            k: 0.0,
            branch: BranchKind::ExpTailLeft,
            turning_x: None,
            turning_u: None,
        }
    }

    pub fn right_tail(q: f64, uhat: f64) -> Self {
        Segment {
            x_left: q,
            x_right: f64::INFINITY,
            u_left: uhat,
            u_right: 0.0,
            k: 0.0,
            branch: BranchKind::ExpTailRight,
            turning_x: None,
            turning_u: None,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_left && x <= self.x_right
    }

    fn slope_magnitude(&self, u: f64, r: f64) -> f64 {
        (u.abs().powf(r) - self.k).max(0.0).powf(1.0 / r)
    }

    /// One-sided derivative just inside the left end.
    pub fn slope_left(&self, r: Exponent) -> f64 {
        let rf = r.get();
        match self.branch {
            BranchKind::ExpTailLeft => 0.0,
            BranchKind::ExpTailRight => -self.u_left,
            BranchKind::ExpInterior(s) => f64::from(s) * self.u_left,
            BranchKind::SinhLike => (self.u_right - self.u_left).signum() * self.slope_magnitude(self.u_left, rf),
            BranchKind::CoshLike => {
                let m = self.slope_magnitude(self.u_left, rf);
                if self.turning_x.is_some() {
                    -self.u_left.signum() * m
                } else {
                    (self.u_right - self.u_left).signum() * m
                }
            }
        }
    }

    /// One-sided derivative just inside the right end.
    pub fn slope_right(&self, r: Exponent) -> f64 {
        let rf = r.get();
        match self.branch {
            BranchKind::ExpTailLeft => self.u_right,
            BranchKind::ExpTailRight => 0.0,
            BranchKind::ExpInterior(s) => f64::from(s) * self.u_right,
            BranchKind::SinhLike => (self.u_right - self.u_left).signum() * self.slope_magnitude(self.u_right, rf),
            BranchKind::CoshLike => {
                let m = self.slope_magnitude(self.u_right, rf);
                if self.turning_x.is_some() {
                    self.u_right.signum() * m
                } else {
                    (self.u_right - self.u_left).signum() * m
                }
            }
        }
    }

    /// Smooth pieces covering an interior segment (empty for tails).
    pub(crate) fn pieces(&self, r: Exponent, settings: &QuadratureSettings) -> Result<Vec<Piece>> {
        let rf = r.get();
        let dq = self.width();
        let mut out = Vec::with_capacity(2);
        match self.branch {
            BranchKind::ExpTailLeft | BranchKind::ExpTailRight => {}
            BranchKind::ExpInterior(_) => {
                let rate = if self.u_left == 0.0 || self.u_right == 0.0 {
                    0.0
                } else {
                    (self.u_right / self.u_left).ln() / dq
                };
                out.push(Piece {
                    shape: Shape::Exp { u0: self.u_left, rate },
                    t0: 0.0,
                    span: dq,
                    x0: self.x_left,
                    x1: self.x_right,
                    stretch: 1.0,
                    r: rf,
                });
            }
            BranchKind::SinhLike => {
                let scale = (-self.k).powf(1.0 / rf);
                let sigma = if self.u_right >= self.u_left { 1.0 } else { -1.0 };
                let t0 = (self.u_left / (sigma * scale)).asinh();
                let t1 = (self.u_right / (sigma * scale)).asinh();
                let raw = sinh_span(t0, t1, rf, settings)?;
                out.push(Piece {
                    shape: Shape::Sinh { scale, sigma },
                    t0,
                    span: t1 - t0,
                    x0: self.x_left,
                    x1: self.x_right,
                    stretch: if raw > 0.0 { dq / raw } else { 1.0 },
                    r: rf,
                });
            }
            BranchKind::CoshLike => {
                let scale = self.k.powf(1.0 / rf);
                let sign = self.u_left.signum();
                let ta = cosh_param(self.u_left, self.k, rf);
                let tb = cosh_param(self.u_right, self.k, rf);
                let mut push = |t0: f64, dir: f64, span: f64, x0: f64, x1: f64| -> Result<()> {
                    if span <= 0.0 || x1 <= x0 {
                        return Ok(());
                    }
                    let (lo, hi) = if dir > 0.0 { (t0, t0 + span) } else { (t0 - span, t0) };
                    let raw = cosh_span(lo.max(0.0), hi, rf, settings)?;
                    out.push(Piece {
                        shape: Shape::Cosh { scale, sign, dir },
                        t0,
                        span,
                        x0,
                        x1,
                        stretch: if raw > 0.0 { (x1 - x0) / raw } else { 1.0 },
                        r: rf,
                    });
                    Ok(())
                };
                match self.turning_x {
                    Some(xt) => {
                        push(ta, -1.0, ta, self.x_left, xt)?;
                        push(0.0, 1.0, tb, xt, self.x_right)?;
                    }
                    None if tb >= ta => push(ta, 1.0, tb - ta, self.x_left, self.x_right)?,
                    None => push(ta, -1.0, ta - tb, self.x_left, self.x_right)?,
                }
            }
        }
        Ok(out)
    }

    /// Profile value at `x` using prebuilt pieces.
    pub(crate) fn value_with(&self, pieces: &[Piece], x: f64, settings: &QuadratureSettings) -> Result<f64> {
        match self.branch {
            BranchKind::ExpTailLeft => return Ok(self.u_right * (x - self.x_right).exp()),
            BranchKind::ExpTailRight => return Ok(self.u_left * (self.x_left - x).exp()),
            _ => {}
        }
        if x <= self.x_left {
            return Ok(self.u_left);
        }
        if x >= self.x_right {
            return Ok(self.u_right);
        }
        if let (Some(xt), Some(ut)) = (self.turning_x, self.turning_u) {
            if x == xt {
                return Ok(ut);
            }
        }
        let piece = pieces
            .iter()
            .find(|p| x >= p.x0 && x <= p.x1)
            .or_else(|| pieces.last())
            .ok_or_else(|| Error::invalid("interior segment has no pieces"))?;
        let s = piece.s_at(x, settings)?;
        Ok(piece.u(s))
    }

    /// `∫|u|^r`, `∫|u_x|^r` and `∫ sp(u, r-1)` over the segment.
    pub(crate) fn integrals(&self, r: Exponent, settings: &QuadratureSettings) -> Result<SegmentIntegrals> {
        let rf = r.get();
        match self.branch {
            BranchKind::ExpTailLeft | BranchKind::ExpTailRight => {
                let uhat = if self.branch == BranchKind::ExpTailLeft { self.u_right } else { self.u_left };
                let p = uhat.abs().powf(rf) / rf;
                Ok(SegmentIntegrals {
                    u_pow: p,
                    ux_pow: p,
                    psi: spow(uhat, rf - 1.0) / (rf - 1.0),
                })
            }
            _ => {
                let mut acc = SegmentIntegrals::default();
                for p in self.pieces(r, settings)? {
                    acc.u_pow += p.integral(|u, _| u.abs().powf(rf), settings)?;
                    acc.ux_pow += p.integral(|_, ux| ux.abs().powf(rf), settings)?;
                    acc.psi += p.integral(|u, _| spow(u, rf - 1.0), settings)?;
                }
                Ok(acc)
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Shape {
    /// `u = u0 exp(rate s)`, `x = x0 + s`.
    Exp { u0: f64, rate: f64 },
    /// `u = sigma scale sinh(tau)`, `tau = t0 + s`.
    Sinh { scale: f64, sigma: f64 },
    /// `|u| = scale (1 + sinh^r tau)^{1/r}`, `tau = t0 + dir s >= 0`.
    Cosh { scale: f64, sign: f64, dir: f64 },
}

/// A smooth monotone stretch of a segment, parametrised by `s in [0, span]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Piece {
    pub shape: Shape,
    pub t0: f64,
    pub span: f64,
    pub x0: f64,
    pub x1: f64,
    /// Ratio of the stored x-extent to the integrated one (one up to solve tolerance).
    pub stretch: f64,
    pub r: f64,
}

impl Piece {
    #[inline]
    fn tau(&self, s: f64) -> f64 {
        match self.shape {
            Shape::Cosh { dir, .. } => (self.t0 + dir * s).max(0.0),
            _ => self.t0 + s,
        }
    }

    #[inline]
    pub fn u(&self, s: f64) -> f64 {
        let tau = self.tau(s);
        match self.shape {
            Shape::Exp { u0, rate } => u0 * (rate * s).exp(),
            Shape::Sinh { scale, sigma } => sigma * scale * tau.sinh(),
            Shape::Cosh { scale, sign, .. } => sign * scale * one_plus_pow_root(tau.sinh(), self.r),
        }
    }

    /// `du/dx`.
    #[inline]
    pub fn ux(&self, s: f64) -> f64 {
        let tau = self.tau(s);
        match self.shape {
            Shape::Exp { u0, rate } => rate * u0 * (rate * s).exp() / self.stretch,
            Shape::Sinh { scale, sigma } => sigma * scale * one_plus_pow_root(tau.sinh().abs(), self.r) / self.stretch,
            Shape::Cosh { scale, sign, dir } => dir * sign * scale * tau.sinh() / self.stretch,
        }
    }

    #[inline]
    pub fn dxds(&self, s: f64) -> f64 {
        let tau = self.tau(s);
        self.stretch
            * match self.shape {
                Shape::Exp { .. } => 1.0,
                Shape::Sinh { .. } => sinh_rate(tau, self.r),
                Shape::Cosh { .. } => cosh_rate(tau, self.r),
            }
    }

    /// Parameter value where a sinh piece crosses zero, if inside.
    pub(crate) fn zero_crossing(&self) -> Option<f64> {
        match self.shape {
            Shape::Sinh { .. } if self.t0 < 0.0 && self.t0 + self.span > 0.0 => Some(-self.t0),
            _ => None,
        }
    }

    /// `x(s) - x0`.
    pub fn offset_at(&self, s: f64, settings: &QuadratureSettings) -> Result<f64> {
        let s = s.clamp(0.0, self.span);
        let raw = match self.shape {
            Shape::Exp { .. } => s,
            Shape::Sinh { .. } => sinh_span(self.t0, self.t0 + s, self.r, settings)?,
            Shape::Cosh { dir, .. } => {
                let t = self.tau(s);
                if dir > 0.0 {
                    cosh_span(self.t0, t, self.r, settings)?
                } else {
                    cosh_span(t, self.t0, self.r, settings)?
                }
            }
        };
        Ok(self.stretch * raw)
    }

    /// Inverse of `x(s)`.
    pub fn s_at(&self, x: f64, settings: &QuadratureSettings) -> Result<f64> {
        if x <= self.x0 {
            return Ok(0.0);
        }
        if x >= self.x1 {
            return Ok(self.span);
        }
        if let Shape::Exp { .. } = self.shape {
            return Ok((x - self.x0) / self.stretch);
        }
        let target = x - self.x0;
        let f = |s: f64| -> Result<f64> { Ok(self.offset_at(s, settings)? - target) };
        let fa = -target;
        let fb = (self.x1 - self.x0) - target;
        let xtol = 1e-15 * self.span.max(1.0);
        match brent_root(f, 0.0, self.span, fa, fb, xtol, 200) {
            Ok(s) => Ok(s),
            Err(Error::Root(RootError::NotBracketed { .. })) => Ok(if fa.abs() < fb.abs() { 0.0 } else { self.span }),
            Err(e) => Err(e),
        }
    }

    /// `∫ f(u, u_x) dx` over the piece.
    pub fn integral<F: Fn(f64, f64) -> f64>(&self, f: F, settings: &QuadratureSettings) -> Result<f64> {
        let g = |s: f64| f(self.u(s), self.ux(s)) * self.dxds(s);
        let v = match self.zero_crossing() {
            Some(z) => integrate_with_breaks(g, &[0.0, z, self.span], settings)?,
            None => integrate(g, 0.0, self.span, settings)?,
        };
        Ok(v)
    }
}

/// Profile value at a point of a segment.
pub fn invert_point(segment: &Segment, x: f64, r: Exponent, settings: &QuadratureSettings) -> Result<f64> {
    if !segment.contains(x) {
        return Err(Error::domain(format!(
            "x = {x} outside segment [{}, {}]",
            segment.x_left, segment.x_right
        )));
    }
    let pieces = segment.pieces(r, settings)?;
    segment.value_with(&pieces, x, settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> Exponent {
        Exponent::singular(2.0).unwrap()
    }

    #[test]
    fn tail_inversion() {
        let s = QuadratureSettings::default();
        let seg = Segment::left_tail(0.0, 2.0);
        let v = invert_point(&seg, -1.0, r2(), &s).unwrap();
        assert!((v - 2.0 * (-1f64).exp()).abs() < 1e-15);
        let seg = Segment::right_tail(0.0, 2.0);
        assert!((invert_point(&seg, 3.0, r2(), &s).unwrap() - 2.0 * (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn cosh_turning_point_value() {
        // u = cosh(x - 1) on [0, 3]: K = 1, turning at x = 1
        let s = QuadratureSettings::default();
        let seg = Segment {
            x_left: 0.0,
            x_right: 3.0,
            u_left: 1f64.cosh(),
            u_right: 2f64.cosh(),
            k: 1.0,
            branch: BranchKind::CoshLike,
            turning_x: Some(1.0),
            turning_u: Some(1.0),
        };
        assert_eq!(invert_point(&seg, 1.0, r2(), &s).unwrap(), 1.0);
        for &x in &[0.0, 0.3, 0.99, 1.01, 2.2, 3.0] {
            let v = invert_point(&seg, x, r2(), &s).unwrap();
            assert!((v - (x - 1.0f64).cosh()).abs() < 1e-11, "x={x}: {v}");
        }
        assert!((seg.slope_left(r2()) + 1f64.sinh()).abs() < 1e-12);
        assert!((seg.slope_right(r2()) - 2f64.sinh()).abs() < 1e-12);
    }

    #[test]
    fn sinh_zero_crossing() {
        // u = sinh(x - 0.5) on [0, 1]
        let s = QuadratureSettings::default();
        let h = 0.5f64.sinh();
        let seg = Segment {
            x_left: 0.0,
            x_right: 1.0,
            u_left: -h,
            u_right: h,
            k: -1.0,
            branch: BranchKind::SinhLike,
            turning_x: None,
            turning_u: None,
        };
        assert!(invert_point(&seg, 0.5, r2(), &s).unwrap().abs() < 1e-14);
        let v = invert_point(&seg, 0.8, r2(), &s).unwrap();
        assert!((v - 0.3f64.sinh()).abs() < 1e-12);
        let ints = seg.integrals(r2(), &s).unwrap();
        // ∫ sinh^2 over [-0.5, 0.5] = (sinh(1) - 1) / 2, ∫ cosh^2 = (sinh(1) + 1) / 2
        assert!((ints.u_pow - (1f64.sinh() - 1.0) / 2.0).abs() < 1e-11);
        assert!((ints.ux_pow - (1f64.sinh() + 1.0) / 2.0).abs() < 1e-11);
        assert!(ints.psi.abs() < 1e-13);
    }

    #[test]
    fn segment_json_round_trip() {
        let seg = Segment::left_tail(1.0, -0.5);
        let text = serde_json::to_string(&seg).unwrap();
        assert!(text.contains("\"-inf\""));
        let back: Segment = serde_json::from_str(&text).unwrap();
        assert_eq!(back, seg);
    }
}
