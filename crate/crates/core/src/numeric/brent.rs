//! Brent's bracketed root finder (inverse quadratic / secant steps with a
//! bisection fallback).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("root is not bracketed: f({a}) = {fa:e}, f({b}) = {fb:e}")]
    NotBracketed { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root finder did not converge in {iterations} iterations")]
    NotConverged { iterations: usize },
}

/// Find a root of `f` in `[a, b]` given that `f(a)` and `f(b)` differ in sign.
///
/// `fa`/`fb` are the already-known endpoint values. Iteration stops when the
/// bracket is narrower than `xtol` (absolute, plus a few ulps relative) or an
/// exact zero is hit.
pub fn brent_root<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<RootError>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed { a, b, fa, fb }.into());
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(RootError::NotConverged { iterations: max_iter }.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, RootError> {
        brent_root(|x| Ok::<_, RootError>(f(x)), a, b, f(a), f(b), 1e-14, 200)
    }

    #[test]
    fn finds_cubic_root() {
        let x = solve(|x| x * x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn handles_flat_exponential() {
        let x = solve(|x| (x - 3.0).exp() - 1.0, -20.0, 10.0).unwrap();
        assert!((x - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(
            solve(|x| x * x + 1.0, -1.0, 1.0),
            Err(RootError::NotBracketed { .. })
        ));
    }
}
