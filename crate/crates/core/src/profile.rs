//! Reconstruction of the profile `u(x; P, Q)` from peak data, and its energies.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{solve_dense, solve_tridiagonal, QuadratureSettings};
use crate::quadrature::{
    cosh_param, cosh_span, solve_cosh_hinted, solve_k_sinh_hinted,
};
use crate::segment::{Piece, Segment};
use crate::types::{check_ordering, height_from_momentum, min_gap, sign_of, spow, BranchKind, Diagnostics, Exponent, PeakonState};

/// Relative tolerance of the `K = 0` exponential fit.
pub const EXP_FIT_RTOL: f64 = 1e-10;

/// Intervals shorter than this are treated as collapsed.
pub const MIN_INTERVAL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSolveSettings {
    /// Tolerance on the momentum residual (∞-norm, relative to `max(1, |P|∞)`).
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Relative finite-difference step of the Jacobian (relative to each unknown).
    pub fd_eps: f64,
    /// Backtracking factor of the damped Newton step.
    pub damping: f64,
    pub max_halvings: usize,
    /// Quadrature used by the segment solves; tighter than the library default
    /// so the momentum residual can reach `newton_tol`.
    pub quadrature: QuadratureSettings,
}

impl Default for ProfileSolveSettings {
    fn default() -> Self {
        ProfileSolveSettings {
            newton_tol: 1e-11,
            max_newton_iters: 50,
            fd_eps: 1e-7,
            damping: 0.5,
            max_halvings: 25,
            quadrature: profile_quadrature(),
        }
    }
}

/// Quadrature settings used for profile construction.
pub fn profile_quadrature() -> QuadratureSettings {
    QuadratureSettings {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_subdivisions: 100,
    }
}

/// Reconstructed profile: tails, interior segments and peak heights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub r: Exponent,
    pub q: Vec<f64>,
    pub uhat: Vec<f64>,
    /// Segment constants, `k[0] = k[N] = 0`.
    pub k: Vec<f64>,
    /// `segments[0]` is the left tail, `segments[N]` the right tail.
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub newton_iterations: usize,
}

/// Serialized form of a profile with its momenta.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub r: f64,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub uhat: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<f64>,
    pub branches: Vec<BranchKind>,
    pub turning_points: Vec<Option<f64>>,
    pub newton_iterations: usize,
    pub segments: Vec<Segment>,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.uhat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uhat.is_empty()
    }

    /// Index of the segment containing `x` (peaks belong to the segment on their left).
    pub fn segment_index(&self, x: f64) -> usize {
        self.q.partition_point(|&qi| qi < x)
    }

    pub fn momenta(&self) -> Vec<f64> {
        momenta_from_profile(self)
    }

    pub fn record(&self) -> ProfileRecord {
        ProfileRecord {
            r: self.r.get(),
            q: self.q.clone(),
            p: self.momenta(),
            uhat: self.uhat.clone(),
            k: self.k.clone(),
            branches: self.segments.iter().map(|s| s.branch).collect(),
            turning_points: self.segments.iter().map(|s| s.turning_x).collect(),
            newton_iterations: self.newton_iterations,
            segments: self.segments.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.record()).expect("profile record serializes")
    }
}

/// Branch of the interval profile joining heights `u_a`, `u_b` over length `dq`.
pub fn classify_interval(u_a: f64, u_b: f64, dq: f64, r: Exponent) -> BranchKind {
    let _ = r;
    if u_a == 0.0 && u_b == 0.0 {
        return BranchKind::ExpInterior(1);
    }
    if u_a * u_b <= 0.0 {
        return BranchKind::SinhLike;
    }
    let (lo, hi) = (u_a.abs().min(u_b.abs()), u_a.abs().max(u_b.abs()));
    if (hi - lo * dq.exp()).abs() <= EXP_FIT_RTOL * hi {
        return BranchKind::ExpInterior(if u_b.abs() >= u_a.abs() { 1 } else { -1 });
    }
    if dq < (hi / lo).ln() {
        BranchKind::SinhLike
    } else {
        BranchKind::CoshLike
    }
}

/// Interior segment on `[x_left, x_right]` joining `u_a` to `u_b`.
pub(crate) fn build_segment(
    x_left: f64,
    x_right: f64,
    u_a: f64,
    u_b: f64,
    r: Exponent,
    qs: &QuadratureSettings,
    hint: Option<f64>,
) -> Result<Segment> {
    let dq = x_right - x_left;
    if !(dq > MIN_INTERVAL) {
        return Err(Error::domain(format!("interval [{x_left}, {x_right}] has collapsed")));
    }
    let rf = r.get();
    let branch = classify_interval(u_a, u_b, dq, r);
    let mut seg = Segment {
        x_left,
        x_right,
        u_left: u_a,
        u_right: u_b,
        k: 0.0,
        branch,
        turning_x: None,
        turning_u: None,
    };
    match branch {
        BranchKind::ExpInterior(_) => {}
        BranchKind::SinhLike => {
            seg.k = solve_k_sinh_hinted(u_a, u_b, dq, r, qs, hint.filter(|k| *k < 0.0))?;
        }
        BranchKind::CoshLike => {
            let (k, turning) = solve_cosh_hinted(u_a, u_b, dq, r, qs, hint.filter(|k| *k > 0.0))?;
            seg.k = k;
            if turning {
                let la = cosh_span(0.0, cosh_param(u_a, k, rf), rf, qs)?;
                let lb = cosh_span(0.0, cosh_param(u_b, k, rf), rf, qs)?;
                let frac = if la + lb > 0.0 { la / (la + lb) } else { 0.5 };
                seg.turning_x = Some(x_left + dq * frac);
                seg.turning_u = Some(u_a.signum() * k.powf(1.0 / rf));
            }
        }
        BranchKind::ExpTailLeft | BranchKind::ExpTailRight => unreachable!("interior classification"),
    }
    Ok(seg)
}

/// Segment `j` (0 = left tail, N = right tail) for heights `uhat`.
fn segment_at(j: usize, q: &[f64], uhat: &[f64], r: Exponent, qs: &QuadratureSettings, hint: Option<f64>) -> Result<Segment> {
    let n = q.len();
    if j == 0 {
        Ok(Segment::left_tail(q[0], uhat[0]))
    } else if j == n {
        Ok(Segment::right_tail(q[n - 1], uhat[n - 1]))
    } else {
        build_segment(q[j - 1], q[j], uhat[j - 1], uhat[j], r, qs, hint)
    }
}

fn peak_momentum(left: &Segment, right: &Segment, r: Exponent) -> f64 {
    let rf = r.get();
    let s_l = left.slope_right(r);
    let s_r = right.slope_left(r);
    -(spow(s_r, rf - 1.0) - spow(s_l, rf - 1.0)) / (rf - 1.0)
}

fn assemble(q: &[f64], uhat: &[f64], r: Exponent, qs: &QuadratureSettings, hints: Option<&[f64]>) -> Result<Vec<Segment>> {
    (0..=q.len())
        .map(|j| segment_at(j, q, uhat, r, qs, hints.and_then(|h| h.get(j).copied())))
        .collect()
}

/// Build the profile with prescribed peak heights: one 1D solve per interval.
pub fn heights_to_profile(q: &[f64], uhat: &[f64], r: Exponent, settings: &QuadratureSettings) -> Result<Profile> {
    r.require_singular()?;
    validate_peaks(q, uhat)?;
    let segments = assemble(q, uhat, r, settings, None)?;
    Ok(finish(q, uhat, r, segments, 0))
}

fn validate_peaks(q: &[f64], uhat: &[f64]) -> Result<()> {
    if q.is_empty() {
        return Err(Error::invalid("at least one peak is required"));
    }
    if q.len() != uhat.len() {
        return Err(Error::invalid(format!("{} positions but {} heights", q.len(), uhat.len())));
    }
    if q.iter().chain(uhat).any(|v| !v.is_finite()) {
        return Err(Error::invalid("positions and heights must be finite"));
    }
    check_ordering(q)
}

fn finish(q: &[f64], uhat: &[f64], r: Exponent, segments: Vec<Segment>, iterations: usize) -> Profile {
    Profile {
        r,
        q: q.to_vec(),
        uhat: uhat.to_vec(),
        k: segments.iter().map(|s| s.k).collect(),
        segments,
        newton_iterations: iterations,
    }
}

/// Momenta from the derivative jumps at the peaks.
pub fn momenta_from_profile(profile: &Profile) -> Vec<f64> {
    profile
        .segments
        .windows(2)
        .map(|w| peak_momentum(&w[0], &w[1], profile.r))
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// True when `(Q, P)` is mirror antisymmetric: `P_i = -P_{N+1-i}` exactly and
/// the positions are symmetric about their centre.
pub fn is_mirror_antisymmetric(q: &[f64], p: &[f64]) -> bool {
    let n = q.len();
    if n < 2 {
        return false;
    }
    let c = q[0] + q[n - 1];
    let scale = q.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    (0..n / 2).all(|i| p[i] == -p[n - 1 - i] && ((q[i] + q[n - 1 - i]) - c).abs() <= 1e-12 * scale)
        && (n % 2 == 0 || p[n / 2] == 0.0)
}

/// Relative height below which a peak's unknown switches from the
/// `|uhat|^{r-2} uhat` regime to the linear one.
const BLEND: f64 = 1e-2;

/// Nested Newton state over `w_i = |uhat_i|^{r-2} uhat_i + alpha uhat_i`,
/// segments solved per iterate.
struct NewtonCtx<'a> {
    q: &'a [f64],
    target: &'a [f64],
    r: Exponent,
    qs: &'a QuadratureSettings,
    alpha: f64,
}

impl NewtonCtx<'_> {
    /// `alpha` keeps `dP/dw` bounded when a height crosses zero next to a
    /// large neighbour; it scales with the largest height so that uniformly
    /// small states stay in the power regime.
    fn blend_for(uhat: &[f64], r: f64) -> f64 {
        let m = inf_norm(uhat);
        if m > 0.0 {
            (r - 1.0) * BLEND * m.powf(r - 2.0)
        } else {
            0.0
        }
    }

    fn unknowns(&self, uhat: &[f64]) -> Vec<f64> {
        let rf = self.r.get();
        uhat.iter().map(|&u| spow(u, rf - 1.0) + self.alpha * u).collect()
    }

    fn heights(&self, w: &[f64]) -> Vec<f64> {
        let rf = self.r.get();
        w.iter().map(|&x| invert_blend(x, rf, self.alpha)).collect()
    }

    fn residual(&self, segs: &[Segment]) -> Vec<f64> {
        segs.windows(2)
            .zip(self.target)
            .map(|(w, p)| peak_momentum(&w[0], &w[1], self.r) - p)
            .collect()
    }

    fn evaluate(&self, v: &[f64], hints: &[f64]) -> Result<(Vec<Segment>, Vec<f64>)> {
        let uhat = self.heights(v);
        let segs = assemble(self.q, &uhat, self.r, self.qs, Some(hints))?;
        let res = self.residual(&segs);
        Ok((segs, res))
    }

    /// Newton step restricted to mirror-antisymmetric heights, where only the
    /// first `N/2` unknowns are free. Near a peakon-antipeakon collision the
    /// symmetric mode of the heights is numerically undetermined by `P`, so the
    /// invariant subspace has to be imposed rather than recovered.
    fn mirror_step(&self, v: &[f64], res: &[f64], hints: &[f64], fd_eps: f64) -> Result<Option<Vec<f64>>> {
        let n = v.len();
        let m = n / 2;
        let floor = 1e-3 * inf_norm(v).max(f64::MIN_POSITIVE);
        let mut jac = vec![0.0; m * m];
        for j in 0..m {
            let h = fd_eps * v[j].abs().max(floor);
            let probe = |delta: f64| -> Result<Vec<f64>> {
                let mut w = v.to_vec();
                w[j] += delta;
                w[n - 1 - j] -= delta;
                Ok(self.evaluate(&w, hints)?.1)
            };
            let plus = probe(h)?;
            let minus = probe(-h)?;
            for i in 0..m {
                jac[i * m + j] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        let rhs: Vec<f64> = res[..m].iter().map(|x| -x).collect();
        Ok(solve_dense(jac, rhs).map(|d| {
            let mut full = vec![0.0; n];
            for i in 0..m {
                full[i] = d[i];
                full[n - 1 - i] = -d[i];
            }
            full
        }))
    }

    /// Central-difference tridiagonal Jacobian of the residual in `v`.
    fn jacobian(&self, v: &[f64], segs: &[Segment], fd_eps: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = v.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut work = v.to_vec();
        // the unknowns shrink towards zero near a collision, so steps are relative
        let floor = 1e-3 * inf_norm(v).max(f64::MIN_POSITIVE);
        for j in 0..n {
            let h = fd_eps * v[j].abs().max(floor);
            let probe = |delta: f64, work: &mut Vec<f64>| -> Result<[f64; 3]> {
                work[j] = v[j] + delta;
                let uhat = self.heights(work);
                let left = segment_at(j, self.q, &uhat, self.r, self.qs, Some(segs[j].k))?;
                let right = segment_at(j + 1, self.q, &uhat, self.r, self.qs, Some(segs[j + 1].k))?;
                let mut out = [0.0; 3];
                if j > 0 {
                    out[0] = peak_momentum(&segs[j - 1], &left, self.r);
                }
                out[1] = peak_momentum(&left, &right, self.r);
                if j + 1 < n {
                    out[2] = peak_momentum(&right, &segs[j + 2], self.r);
                }
                Ok(out)
            };
            let plus = probe(h, &mut work)?;
            let minus = probe(-h, &mut work)?;
            work[j] = v[j];
            let d = |i: usize| (plus[i] - minus[i]) / (2.0 * h);
            if j > 0 {
                upper[j - 1] = d(0);
            }
            diag[j] = d(1);
            if j + 1 < n {
                lower[j + 1] = d(2);
            }
        }
        Ok((lower, diag, upper))
    }
}

/// Solves `|u|^{r-2} u + alpha u = w` for `u`. The left side is odd, convex
/// on `u >= 0` and increasing, so Newton from an upper bound decreases
/// monotonically onto the root.
fn invert_blend(w: f64, r: f64, alpha: f64) -> f64 {
    if alpha == 0.0 || w == 0.0 {
        return spow(w, 1.0 / (r - 1.0));
    }
    let a = w.abs();
    let mut u = (a / alpha).min(a.powf(1.0 / (r - 1.0)));
    for _ in 0..100 {
        let g = u.powf(r - 1.0) + alpha * u - a;
        let dg = (r - 1.0) * u.powf(r - 2.0) + alpha;
        let next = u - g / dg;
        if !(next < u) || next <= 0.0 {
            break;
        }
        u = next;
    }
    u.copysign(w)
}

/// Profile whose momenta equal `state.P`.
///
/// Damped Newton over the peak heights; each iterate rebuilds the interior
/// segments by independent 1D solves for `K`, so the length equations hold
/// exactly at every iterate.
pub fn solve_profile(
    state: &PeakonState,
    r: Exponent,
    warm_start: Option<&Profile>,
    settings: &ProfileSolveSettings,
) -> Result<Profile> {
    r.require_singular()?;
    let q = state.positions();
    let p = state.momenta();
    check_ordering(q)?;
    let n = q.len();
    let warm = warm_start.filter(|w| w.len() == n && w.r == r);
    match solve_profile_from(q, p, r, warm, settings) {
        Err(e) if warm.is_some() => {
            debug!("warm-started profile solve failed ({e}); retrying cold");
            solve_profile_from(q, p, r, None, settings)
        }
        other => other,
    }
}

fn solve_profile_from(
    q: &[f64],
    p: &[f64],
    r: Exponent,
    warm: Option<&Profile>,
    settings: &ProfileSolveSettings,
) -> Result<Profile> {
    let rf = r.get();
    let n = q.len();
    let (uhat0, mut hints): (Vec<f64>, Vec<f64>) = match warm {
        Some(w) => (w.uhat.clone(), w.k.clone()),
        None => (
            p.iter().map(|&pi| height_from_momentum(pi, r)).collect::<Result<_>>()?,
            vec![0.0; n + 1],
        ),
    };
    let ctx = NewtonCtx {
        q,
        target: p,
        r,
        qs: &settings.quadrature,
        alpha: NewtonCtx::blend_for(&uhat0, rf),
    };
    let mut v = ctx.unknowns(&uhat0);
    let mirror = is_mirror_antisymmetric(q, p);
    if mirror {
        for i in 0..n / 2 {
            v[n - 1 - i] = -v[i];
        }
        if n % 2 == 1 {
            v[n / 2] = 0.0;
        }
    }
    let scale = inf_norm(p).max(1.0);
    let tol = settings.newton_tol * scale;
    let (mut segs, mut res) = ctx.evaluate(&v, &hints)?;
    let mut norm = inf_norm(&res);
    for iter in 0..=settings.max_newton_iters {
        if norm <= tol {
            let uhat = ctx.heights(&v);
            return Ok(finish(q, &uhat, r, segs, iter));
        }
        if iter == settings.max_newton_iters {
            break;
        }
        log::trace!("profile Newton iteration {iter}: residual {norm:e}, uhat {:?}", ctx.heights(&v));
        hints = segs.iter().map(|s| s.k).collect();
        let step = if mirror {
            ctx.mirror_step(&v, &res, &hints, settings.fd_eps)?
        } else {
            let (lower, diag, upper) = ctx.jacobian(&v, &segs, settings.fd_eps)?;
            let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
            solve_tridiagonal(&lower, &diag, &upper, &rhs)
        };
        let step = step.ok_or(Error::NewtonDiverged {
            iterations: iter,
            residual: norm,
        })?;
        // the Newton correction no longer moves the iterate: round-off floor
        if inf_norm(&step) <= 1e-13 * inf_norm(&v).max(1.0) && norm <= 1e3 * tol {
            debug!("profile Newton at round-off floor, residual {norm:e} (tolerance {tol:e})");
            let uhat = ctx.heights(&v);
            return Ok(finish(q, &uhat, r, segs, iter));
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=settings.max_halvings {
            let trial: Vec<f64> = v.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            if let Ok((tsegs, tres)) = ctx.evaluate(&trial, &hints) {
                let tnorm = inf_norm(&tres);
                if tnorm < norm {
                    v = trial;
                    segs = tsegs;
                    res = tres;
                    norm = tnorm;
                    accepted = true;
                    break;
                }
            }
            lambda *= settings.damping;
        }
        if !accepted {
            // stalled at the round-off floor of the segment solves
            if norm <= 1e3 * tol {
                warn!("profile Newton stalled at residual {norm:e} (tolerance {tol:e}); accepting");
                let uhat = ctx.heights(&v);
                return Ok(finish(q, &uhat, r, segs, iter));
            }
            return Err(Error::NewtonDiverged {
                iterations: iter,
                residual: norm,
            });
        }
    }
    Err(Error::NewtonDiverged {
        iterations: settings.max_newton_iters,
        residual: norm,
    })
}

/// Evaluate the profile at the given points.
pub fn sample(profile: &Profile, xs: &[f64], settings: &QuadratureSettings) -> Result<Vec<f64>> {
    let mut cache: Vec<Option<Vec<Piece>>> = vec![None; profile.segments.len()];
    xs.iter()
        .map(|&x| {
            let j = profile.segment_index(x);
            let seg = &profile.segments[j];
            if cache[j].is_none() {
                cache[j] = Some(seg.pieces(profile.r, settings)?);
            }
            seg.value_with(cache[j].as_deref().unwrap_or(&[]), x, settings)
        })
        .collect()
}

/// Totals of `∫|u|^r` and `∫|u_x|^r` over the whole line.
pub(crate) fn power_integrals(profile: &Profile, settings: &QuadratureSettings) -> Result<(f64, f64)> {
    let mut a = 0.0;
    let mut b = 0.0;
    for seg in &profile.segments {
        let ints = seg.integrals(profile.r, settings)?;
        a += ints.u_pow;
        b += ints.ux_pow;
    }
    Ok((a, b))
}

/// Lagrangian, Hamiltonian and geometry of a profile.
pub fn energy(profile: &Profile, settings: &QuadratureSettings) -> Result<Diagnostics> {
    let rf = profile.r.get();
    let (a, b) = power_integrals(profile, settings)?;
    let l = (a + b / (rf - 1.0)) / rf;
    Ok(Diagnostics {
        h: (rf - 1.0) * l,
        l,
        min_gap: min_gap(&profile.q),
        p_signs: momenta_from_profile(profile).into_iter().map(sign_of).collect(),
    })
}
