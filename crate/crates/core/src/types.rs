//! Domain types shared by every module, plus the signed-power algebra that
//! the r-CH nonlinearity `|u|^{r-2} u` is built from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|s|^beta * sgn(s)`.
///
/// `beta = 0` is only defined away from the origin, where it is the sign.
pub fn signed_pow(s: f64, beta: f64) -> Result<f64> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::domain(format!("signed_pow exponent must be >= 0, got {beta}")));
    }
    if beta == 0.0 {
        if s == 0.0 {
            return Err(Error::domain("signed_pow(0, 0) is undefined"));
        }
        return Ok(s.signum());
    }
    Ok(spow(s, beta))
}

/// Unchecked `|s|^beta * sgn(s)` for internal hot loops; `spow(0, beta) = 0`.
#[inline]
pub(crate) fn spow(s: f64, beta: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(beta).copysign(s)
    }
}

/// The exponent `r` of the `W^{1,r}` energy.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(f64);

impl Exponent {
    /// Any finite `r >= 1`. Singular-solution code calls [`Exponent::require_singular`].
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 1.0 {
            return Err(Error::domain(format!("exponent r must be finite and >= 1, got {r}")));
        }
        Ok(Exponent(r))
    }

    /// Exponent valid for singular (peaked) solutions, `r >= 2`.
    pub fn singular(r: f64) -> Result<Self> {
        let e = Self::new(r)?;
        e.require_singular()?;
        Ok(e)
    }

    pub fn require_singular(self) -> Result<()> {
        if self.0 < 2.0 {
            return Err(Error::domain(format!(
                "singular solutions need r >= 2, got {}",
                self.0
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Momentum of an isolated peak of height `uhat`: both tails have slope of
/// magnitude `|uhat|`, so the jump condition gives `2/(r-1) * uhat^{r-1}`.
pub fn momentum_from_height(uhat: f64, r: Exponent) -> Result<f64> {
    r.require_singular()?;
    let r = r.get();
    Ok(2.0 / (r - 1.0) * spow(uhat, r - 1.0))
}

/// Inverse of [`momentum_from_height`].
pub fn height_from_momentum(p: f64, r: Exponent) -> Result<f64> {
    r.require_singular()?;
    let r = r.get();
    Ok(spow(0.5 * (r - 1.0) * p, 1.0 / (r - 1.0)))
}

/// A point `(t, Q, P)` of the canonical phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakonState {
    pub t: f64,
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PeakonState {
    pub fn new(t: f64, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::invalid("a state needs at least one peak"));
        }
        if q.len() != p.len() {
            return Err(Error::invalid(format!(
                "position/momentum length mismatch: {} vs {}",
                q.len(),
                p.len()
            )));
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::invalid("state contains non-finite values"));
        }
        check_ordering(&q)?;
        Ok(Self { t, q, p })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.q
    }

    pub fn momenta(&self) -> &[f64] {
        &self.p
    }

    pub fn min_gap(&self) -> f64 {
        min_gap(&self.q)
    }
}

pub(crate) fn check_ordering(q: &[f64]) -> Result<()> {
    if q.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::OrderingViolation(q.to_vec()));
    }
    Ok(())
}

/// Smallest neighbouring gap; `+inf` for a single peak.
pub fn min_gap(q: &[f64]) -> f64 {
    q.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Shape of the profile on one interval between (or outside) the peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "sign")]
pub enum BranchKind {
    /// `x < Q_1`: `u = uhat * exp(x - Q_1)`.
    ExpTailLeft,
    /// `x > Q_N`: `u = uhat * exp(Q_N - x)`.
    ExpTailRight,
    /// `K = 0` between peaks, `u ~ exp(sign * x)`.
    ExpInterior(i8),
    /// `K < 0`: strictly monotone, at most one zero.
    SinhLike,
    /// `K > 0`: no zero, at most one turning point.
    CoshLike,
}

/// Per-state energy and geometry diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Hamiltonian `(r-1)/r * int |u|^r + |u_x|^r/(r-1)`.
    pub h: f64,
    /// Lagrangian `1/r * int |u|^r + |u_x|^r/(r-1)`.
    pub l: f64,
    pub min_gap: f64,
    pub p_signs: Vec<i8>,
}

pub(crate) fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn signed_pow_examples() {
        assert_eq!(signed_pow(-2.0, 3.0).unwrap(), -8.0);
        assert_eq!(signed_pow(0.0, 1.5).unwrap(), 0.0);
        assert_eq!(signed_pow(-3.0, 2.0).unwrap(), -9.0);
        assert_eq!(signed_pow(-0.5, 0.0).unwrap(), -1.0);
        assert!(signed_pow(0.0, 0.0).is_err());
        assert!(signed_pow(1.0, -1.0).is_err());
    }

    #[test]
    fn momentum_height_examples() {
        let r2 = Exponent::singular(2.0).unwrap();
        let r4 = Exponent::singular(4.0).unwrap();
        assert_eq!(momentum_from_height(1.0, r2).unwrap(), 2.0);
        assert!((momentum_from_height(1.0, r4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(momentum_from_height(-1.0, r2).unwrap(), -2.0);
        assert_eq!(height_from_momentum(2.0, r2).unwrap(), 1.0);
        assert!((height_from_momentum(2.0 / 3.0, r4).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(height_from_momentum(0.0, r4).unwrap(), 0.0);
    }

    #[test]
    fn singular_maps_reject_small_r() {
        let r = Exponent::new(1.5).unwrap();
        assert!(momentum_from_height(1.0, r).is_err());
        assert!(Exponent::singular(1.0).is_err());
        assert!(Exponent::new(0.5).is_err());
    }

    #[test]
    fn state_rejects_bad_ordering() {
        assert!(matches!(
            PeakonState::new(0.0, vec![1.0, 1.0], vec![1.0, 1.0]),
            Err(Error::OrderingViolation(_))
        ));
        assert!(PeakonState::new(0.0, vec![2.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(PeakonState::new(0.0, vec![], vec![]).is_err());
        assert!(PeakonState::new(0.0, vec![0.0, 1.0], vec![1.0]).is_err());
        let s = PeakonState::new(0.0, vec![0.0, 1.5, 4.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.min_gap(), 1.5);
    }

    proptest! {
        #[test]
        fn signed_pow_is_odd(s in -50.0f64..50.0, beta in 0.01f64..8.0) {
            let a = signed_pow(s, beta).unwrap();
            let b = signed_pow(-s, beta).unwrap();
            prop_assert_eq!(a, -b);
        }

        #[test]
        fn height_momentum_round_trip(u in -10.0f64..10.0, r in 2.0f64..8.0) {
            let r = Exponent::singular(r).unwrap();
            let back = height_from_momentum(momentum_from_height(u, r).unwrap(), r).unwrap();
            prop_assert!((back - u).abs() <= 1e-12 * u.abs().max(1e-300));
        }

        #[test]
        fn momentum_is_monotone(u in -10.0f64..10.0, du in 1e-3f64..1.0, r in 2.0f64..8.0) {
            let r = Exponent::singular(r).unwrap();
            prop_assert!(momentum_from_height(u + du, r).unwrap() > momentum_from_height(u, r).unwrap());
        }
    }
}
