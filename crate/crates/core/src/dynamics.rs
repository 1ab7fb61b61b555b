//! Time integration of the canonical system `Q' = uhat`, `P' = (K_{i-1} - K_i) / r`.

use std::io::Write;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{energy, solve_profile, Profile, ProfileSolveSettings};
use crate::types::{min_gap, Diagnostics, Exponent, PeakonState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Scheme {
    RK4Fixed { dt: f64 },
    RK45Adaptive { rtol: f64, atol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    pub scheme: Scheme,
    pub t_end: f64,
    #[serde(default = "default_min_gap_stop")]
    pub min_gap_stop: f64,
    /// Record every `output_stride`-th accepted step.
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    /// When set, steps are clipped so that outputs land exactly on multiples
    /// of this interval (used for comparing runs at matched times).
    #[serde(default)]
    pub output_interval: Option<f64>,
    /// Integrate the negated vector field.
    #[serde(default)]
    pub reverse: bool,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default)]
    pub profile: ProfileSolveSettings,
}

fn default_min_gap_stop() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    1
}

fn default_dt_min() -> f64 {
    1e-9
}

impl IntegratorSettings {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        Self::with_scheme(Scheme::RK4Fixed { dt }, t_end)
    }

    pub fn rk45(rtol: f64, t_end: f64) -> Self {
        Self::with_scheme(Scheme::RK45Adaptive { rtol, atol: rtol }, t_end)
    }

    fn with_scheme(scheme: Scheme, t_end: f64) -> Self {
        IntegratorSettings {
            scheme,
            t_end,
            min_gap_stop: default_min_gap_stop(),
            output_stride: 1,
            output_interval: None,
            reverse: false,
            dt_min: default_dt_min(),
            profile: ProfileSolveSettings::default(),
        }
    }

    pub fn validate(&self, t_start: f64) -> Result<()> {
        match self.scheme {
            Scheme::RK4Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::invalid(format!("time step must be positive, got {dt}")))
            }
            Scheme::RK45Adaptive { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => {
                return Err(Error::invalid("tolerances must be positive"))
            }
            _ => {}
        }
        if !(self.t_end > t_start) || !self.t_end.is_finite() {
            return Err(Error::invalid(format!("t_end = {} must exceed t_start = {t_start}", self.t_end)));
        }
        if self.output_stride == 0 {
            return Err(Error::invalid("output_stride must be at least 1"));
        }
        if let Some(dt) = self.output_interval {
            if !(dt > 0.0) {
                return Err(Error::invalid("output_interval must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Termination {
    ReachedEnd,
    CollisionDetected { t_est: f64 },
    SolverFailure { t: f64, reason: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub rhs_evaluations: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub max_newton_iterations: usize,
}

/// Time series of states with aligned diagnostics and profiles.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub r: Exponent,
    pub states: Vec<PeakonState>,
    pub diagnostics: Vec<Diagnostics>,
    pub profiles: Vec<Profile>,
    pub termination: Termination,
    pub stats: RunStats,
}

/// Sidecar metadata written next to the trajectory CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub r: f64,
    pub n_peaks: usize,
    pub outputs: usize,
    pub t_final: f64,
    pub termination: Termination,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn heights(&self, i: usize) -> &[f64] {
        &self.profiles[i].uhat
    }

    pub fn last_state(&self) -> &PeakonState {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn meta(&self) -> TrajectoryMeta {
        TrajectoryMeta {
            r: self.r.get(),
            n_peaks: self.states[0].len(),
            outputs: self.states.len(),
            t_final: self.last_state().t,
            termination: self.termination.clone(),
            stats: self.stats.clone(),
        }
    }

    /// Header `t,Q1..QN,P1..PN,uhat1..uhatN,H,min_gap`, one row per output.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.states[0].len();
        let mut header = vec!["t".to_string()];
        for prefix in ["Q", "P", "uhat"] {
            header.extend((1..=n).map(|i| format!("{prefix}{i}")));
        }
        header.push("H".into());
        header.push("min_gap".into());
        writeln!(w, "{}", header.join(","))?;
        for ((s, d), prof) in self.states.iter().zip(&self.diagnostics).zip(&self.profiles) {
            let mut row = vec![fmt_num(s.t)];
            row.extend(s.positions().iter().map(|&v| fmt_num(v)));
            row.extend(s.momenta().iter().map(|&v| fmt_num(v)));
            row.extend(prof.uhat.iter().map(|&v| fmt_num(v)));
            row.push(fmt_num(d.h));
            row.push(fmt_num(d.min_gap));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal, switching to exponent notation for very
/// large or small magnitudes.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Hamiltonian vector field at a state; also returns the solved profile.
pub fn vector_field(
    state: &PeakonState,
    r: Exponent,
    warm: Option<&Profile>,
    settings: &ProfileSolveSettings,
) -> Result<(Vec<f64>, Vec<f64>, Profile)> {
    let prof = solve_profile(state, r, warm, settings)?;
    let rf = r.get();
    let qdot = prof.uhat.clone();
    let pdot = prof.k.windows(2).map(|w| (w[0] - w[1]) / rf).collect();
    Ok((qdot, pdot, prof))
}

struct Rhs<'a> {
    r: Exponent,
    n: usize,
    sign: f64,
    settings: &'a ProfileSolveSettings,
    stats: RunStats,
}

impl Rhs<'_> {
    fn eval(&mut self, t: f64, y: &[f64], warm: Option<&Profile>) -> Result<(Vec<f64>, Profile)> {
        let state = PeakonState::new(t, y[..self.n].to_vec(), y[self.n..].to_vec())?;
        let (qd, pd, prof) = vector_field(&state, self.r, warm, self.settings)?;
        self.stats.rhs_evaluations += 1;
        self.stats.max_newton_iterations = self.stats.max_newton_iterations.max(prof.newton_iterations);
        let mut dy = qd;
        dy.extend(pd);
        if self.sign < 0.0 {
            dy.iter_mut().for_each(|v| *v = -*v);
        }
        Ok((dy, prof))
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += h * c * v;
        }
    }
    out
}

struct Recorder {
    states: Vec<PeakonState>,
    diagnostics: Vec<Diagnostics>,
    profiles: Vec<Profile>,
    settings: ProfileSolveSettings,
}

impl Recorder {
    fn push(&mut self, t: f64, y: &[f64], prof: Profile) -> Result<()> {
        let n = prof.len();
        let state = PeakonState::new(t, y[..n].to_vec(), y[n..].to_vec())?;
        let diag = energy(&prof, &self.settings.quadrature)?;
        self.states.push(state);
        self.diagnostics.push(diag);
        self.profiles.push(prof);
        Ok(())
    }

    fn gap_history(&self) -> Option<((f64, f64), (f64, f64))> {
        let m = self.states.len();
        if m < 2 {
            return None;
        }
        let a = &self.states[m - 2];
        let b = &self.states[m - 1];
        Some(((a.t, a.min_gap()), (b.t, b.min_gap())))
    }

    /// Linear extrapolation of the gap to zero through the last two outputs.
    fn collision_estimate(&self) -> f64 {
        match self.gap_history() {
            Some(((t0, g0), (t1, g1))) if g0 > g1 && t1 > t0 => t1 + g1 * (t1 - t0) / (g0 - g1),
            Some((_, (t1, _))) => t1,
            None => self.states.last().map_or(0.0, |s| s.t),
        }
    }
}

/// Advance `state0` with the configured scheme.
///
/// The returned trajectory always starts with the initial state. Early
/// termination (collision, solver failure) is reported in `termination`.
pub fn integrate(state0: &PeakonState, r: Exponent, settings: &IntegratorSettings) -> Result<Trajectory> {
    r.require_singular()?;
    settings.validate(state0.t)?;
    let n = state0.len();
    let mut rhs = Rhs {
        r,
        n,
        sign: if settings.reverse { -1.0 } else { 1.0 },
        settings: &settings.profile,
        stats: RunStats::default(),
    };
    let mut rec = Recorder {
        states: Vec::new(),
        diagnostics: Vec::new(),
        profiles: Vec::new(),
        settings: settings.profile.clone(),
    };
    let mut y: Vec<f64> = state0.positions().iter().chain(state0.momenta()).copied().collect();
    let mut t = state0.t;
    let (mut k1, mut prof) = rhs.eval(t, &y, None).map_err(|e| {
        if e.is_input_error() {
            e
        } else {
            Error::SolverFailure { t, reason: e.to_string() }
        }
    })?;
    rec.push(t, &y, prof.clone())?;

    let mut next_output = settings.output_interval.map(|dt| t + dt);
    let mut since_output = 0usize;
    let mut dt = match settings.scheme {
        Scheme::RK4Fixed { dt } => dt,
        Scheme::RK45Adaptive { .. } => initial_step(settings),
    };
    let termination;
    let eps_t = 1e-12 * settings.t_end.abs().max(1.0);

    loop {
        if t >= settings.t_end - eps_t {
            termination = Termination::ReachedEnd;
            break;
        }
        // clip to t_end and to the output grid
        let mut h = dt.min(settings.t_end - t);
        let mut hits_output = false;
        if let Some(to) = next_output {
            if t + h >= to - eps_t {
                h = to - t;
                hits_output = true;
            }
        }
        if settings.t_end - (t + h) <= eps_t {
            hits_output = true;
        }
        let attempt = match settings.scheme {
            Scheme::RK4Fixed { .. } => rk4_step(&mut rhs, t, &y, &k1, h, &prof).map(|(yn, kn, pn)| (yn, kn, pn, None)),
            Scheme::RK45Adaptive { rtol, atol } => {
                dp45_step(&mut rhs, t, &y, &k1, h, &prof, rtol, atol).map(|(yn, kn, pn, err)| (yn, kn, pn, Some(err)))
            }
        };
        match (settings.scheme, attempt) {
            (Scheme::RK4Fixed { .. }, Err(e)) => {
                warn!("RK4 step failed at t = {t}: {e}");
                termination = Termination::SolverFailure { t, reason: e.to_string() };
                break;
            }
            (Scheme::RK45Adaptive { .. }, Err(e)) => {
                rhs.stats.rejected_steps += 1;
                debug!("stage failure at t = {t}, h = {h}: {e}");
                dt = h * 0.5;
                if dt < settings.dt_min {
                    termination = Termination::SolverFailure {
                        t,
                        reason: format!("step size fell below {} after stage failure: {e}", settings.dt_min),
                    };
                    break;
                }
                continue;
            }
            (_, Ok((yn, kn, pn, err))) => {
                if let Some(err) = err {
                    if err > 1.0 {
                        rhs.stats.rejected_steps += 1;
                        dt = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                        if dt < settings.dt_min {
                            termination = Termination::SolverFailure {
                                t,
                                reason: format!("step size fell below {}", settings.dt_min),
                            };
                            break;
                        }
                        continue;
                    }
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    // keep the controller's proposal independent of output clipping
                    dt = if hits_output && h < dt { dt.max(h * factor) } else { h * factor };
                }
                let q_new = &yn[..n];
                if q_new.windows(2).any(|w| w[1] <= w[0]) {
                    termination = Termination::SolverFailure {
                        t: t + h,
                        reason: format!("ordering violated: {:?}", q_new),
                    };
                    break;
                }
                t = if hits_output { next_output.unwrap_or(t + h).min(settings.t_end) } else { t + h };
                if settings.t_end - t <= eps_t {
                    t = settings.t_end;
                }
                y = yn;
                k1 = kn;
                prof = pn;
                rhs.stats.accepted_steps += 1;
                since_output += 1;
                let gap = min_gap(&y[..n]);
                let collided = gap < settings.min_gap_stop;
                let on_grid = match settings.output_interval {
                    Some(_) => hits_output,
                    None => since_output >= settings.output_stride,
                };
                if on_grid || collided || t >= settings.t_end {
                    rec.push(t, &y, prof.clone())?;
                    since_output = 0;
                }
                if hits_output {
                    if let (Some(to), Some(iv)) = (next_output.as_mut(), settings.output_interval) {
                        *to += iv;
                    }
                }
                if collided {
                    let t_est = rec.collision_estimate();
                    info!("collision detected at t = {t} (gap {gap:e}), estimated t_c = {t_est}");
                    termination = Termination::CollisionDetected { t_est };
                    break;
                }
            }
        }
    }
    Ok(Trajectory {
        r,
        states: rec.states,
        diagnostics: rec.diagnostics,
        profiles: rec.profiles,
        termination,
        stats: rhs.stats,
    })
}

fn initial_step(settings: &IntegratorSettings) -> f64 {
    let base = settings.output_interval.unwrap_or(settings.t_end);
    (1e-2 * base).clamp(settings.dt_min * 10.0, 0.1)
}

type Step = (Vec<f64>, Vec<f64>, Profile);

fn rk4_step(rhs: &mut Rhs, t: f64, y: &[f64], k1: &[f64], h: f64, warm: &Profile) -> Result<Step> {
    let (k2, _) = rhs.eval(t + 0.5 * h, &axpy(y, h, &[(0.5, k1)]), Some(warm))?;
    let (k3, _) = rhs.eval(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]), Some(warm))?;
    let (k4, _) = rhs.eval(t + h, &axpy(y, h, &[(1.0, &k3)]), Some(warm))?;
    let yn = axpy(y, h, &[(1.0 / 6.0, k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
    let (kn, pn) = rhs.eval(t + h, &yn, Some(warm))?;
    Ok((yn, kn, pn))
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[allow(clippy::too_many_arguments)]
fn dp45_step(
    rhs: &mut Rhs,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
    warm: &Profile,
    rtol: f64,
    atol: f64,
) -> Result<(Vec<f64>, Vec<f64>, Profile, f64)> {
    let w = Some(warm);
    let (k2, _) = rhs.eval(t + C2 * h, &axpy(y, h, &[(A21, k1)]), w)?;
    let (k3, _) = rhs.eval(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]), w)?;
    let (k4, _) = rhs.eval(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]), w)?;
    let (k5, _) = rhs.eval(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]), w)?;
    let (k6, _) = rhs.eval(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        w,
    )?;
    let yn = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let (k7, pn) = rhs.eval(t + h, &yn, w)?;
    let mut sum = 0.0;
    for i in 0..y.len() {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(yn[i].abs());
        sum += (e / sc).powi(2);
    }
    let err = (sum / y.len() as f64).sqrt();
    Ok((yn, k7, pn, err))
}

/// Conservation and structure summary of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub max_rel_energy_drift: f64,
    pub sign_constant: Vec<bool>,
    pub ordered: bool,
    pub min_gap: f64,
}

impl ConservationReport {
    pub fn signs_preserved(&self) -> bool {
        self.sign_constant.iter().all(|&b| b)
    }
}

pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let h0 = traj.diagnostics[0].h;
    let drift = traj
        .diagnostics
        .iter()
        .map(|d| (d.h - h0).abs() / h0.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let n = traj.states[0].len();
    let sign_constant = (0..n)
        .map(|i| {
            let s0 = traj.states[0].momenta()[i].signum();
            traj.states.iter().all(|s| s.momenta()[i] != 0.0 && s.momenta()[i].signum() == s0)
        })
        .collect();
    ConservationReport {
        max_rel_energy_drift: drift,
        sign_constant,
        ordered: traj.states.iter().all(|s| s.positions().windows(2).all(|w| w[0] < w[1])),
        min_gap: traj.states.iter().map(|s| s.min_gap()).fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{heights_to_profile, momenta_from_profile, profile_quadrature};
    use crate::types::momentum_from_height;

    fn r(v: f64) -> Exponent {
        Exponent::singular(v).unwrap()
    }

    fn state_from_heights(q: &[f64], u: &[f64], rr: f64) -> PeakonState {
        let prof = heights_to_profile(q, u, r(rr), &profile_quadrature()).unwrap();
        PeakonState::new(0.0, q.to_vec(), momenta_from_profile(&prof)).unwrap()
    }

    #[test]
    fn single_peak_field() {
        let p = momentum_from_height(1.7, r(3.0)).unwrap();
        let st = PeakonState::new(0.0, vec![2.0], vec![p]).unwrap();
        let (qd, pd, _) = vector_field(&st, r(3.0), None, &ProfileSolveSettings::default()).unwrap();
        assert!((qd[0] - 1.7).abs() < 1e-14);
        assert_eq!(pd[0], 0.0);
    }

    #[test]
    fn antisymmetric_field_pushes_momenta_apart() {
        let st = state_from_heights(&[1.0, 11.0], &[1.0, -1.0], 2.0);
        let (_, pd, _) = vector_field(&st, r(2.0), None, &ProfileSolveSettings::default()).unwrap();
        assert!(pd[0] > 0.0 && pd[1] < 0.0);
        assert!((pd[0] + pd[1]).abs() < 1e-14);
    }

    #[test]
    fn travelling_peakon_rk4() {
        let st = PeakonState::new(0.0, vec![0.5], vec![2.0]).unwrap();
        let mut s = IntegratorSettings::rk4(1e-2, 10.0);
        s.output_stride = 50;
        let traj = integrate(&st, r(2.0), &s).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        for st in &traj.states {
            assert!((st.positions()[0] - 0.5 - st.t).abs() < 1e-6);
            assert!((st.momenta()[0] - 2.0).abs() < 1e-10);
        }
        assert!((traj.last_state().t - 10.0).abs() < 1e-12);
        let rep = conservation_report(&traj);
        assert!(rep.max_rel_energy_drift < 1e-10 && rep.signs_preserved() && rep.ordered);
    }

    #[test]
    fn overtaking_short_run_conserves_energy() {
        let st = state_from_heights(&[1.0, 6.0], &[1.5, 1.0], 2.0);
        let mut s = IntegratorSettings::rk45(1e-8, 2.0);
        s.output_interval = Some(0.5);
        let traj = integrate(&st, r(2.0), &s).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        let times = traj.times();
        assert_eq!(times.len(), 5);
        for (i, t) in times.iter().enumerate() {
            assert!((t - 0.5 * i as f64).abs() < 1e-12);
        }
        let rep = conservation_report(&traj);
        assert!(rep.max_rel_energy_drift < 1e-7, "{rep:?}");
    }

    #[test]
    fn reverse_run_returns() {
        let st = state_from_heights(&[0.0, 3.0], &[1.2, 0.9], 3.0);
        let s = IntegratorSettings::rk4(1e-2, 1.0);
        let fwd = integrate(&st, r(3.0), &s).unwrap();
        let mid = fwd.last_state().clone();
        let mut sb = s.clone();
        sb.reverse = true;
        let back = integrate(&PeakonState::new(0.0, mid.positions().to_vec(), mid.momenta().to_vec()).unwrap(), r(3.0), &sb).unwrap();
        let end = back.last_state();
        for i in 0..2 {
            assert!((end.positions()[i] - st.positions()[i]).abs() < 1e-7);
            assert!((end.momenta()[i] - st.momenta()[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn csv_layout() {
        let st = PeakonState::new(0.0, vec![0.0], vec![2.0]).unwrap();
        let traj = integrate(&st, r(2.0), &IntegratorSettings::rk4(0.25, 0.5)).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,Q1,P1,uhat1,H,min_gap");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0,2,1,1,inf"));
    }

    #[test]
    fn settings_validation() {
        let st = PeakonState::new(0.0, vec![0.0], vec![2.0]).unwrap();
        assert!(integrate(&st, r(2.0), &IntegratorSettings::rk4(-1.0, 1.0)).is_err());
        assert!(integrate(&st, r(2.0), &IntegratorSettings::rk4(0.1, 0.0)).is_err());
        assert!(integrate(&st, Exponent::new(1.5).unwrap(), &IntegratorSettings::rk4(0.1, 1.0)).is_err());
    }
}
