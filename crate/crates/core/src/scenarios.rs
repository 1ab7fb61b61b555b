//! Named experiments and parameter sweeps over the exponent `r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, IntegratorSettings, Scheme, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::profile::{heights_to_profile, profile_quadrature, ProfileSolveSettings};
use crate::types::{check_ordering, Exponent, PeakonState};

pub const SPEC_VERSION: u32 = 1;

/// Integrator block of a scenario config; `t_end` lives on the scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub scheme: Scheme,
    #[serde(default = "default_min_gap_stop")]
    pub min_gap_stop: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default)]
    pub output_interval: Option<f64>,
    #[serde(default)]
    pub profile: ProfileSolveSettings,
}

fn default_min_gap_stop() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    1
}

impl IntegratorBlock {
    pub fn rk45(rtol: f64, output_interval: Option<f64>) -> Self {
        IntegratorBlock {
            scheme: Scheme::RK45Adaptive { rtol, atol: rtol },
            min_gap_stop: default_min_gap_stop(),
            output_stride: 1,
            output_interval,
            profile: ProfileSolveSettings::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFlags {
    /// Times at which profile snapshots are written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

/// A named experiment. Initial data are peak heights; momenta follow from the
/// coupled profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub spec_version: u32,
    pub name: String,
    pub r: f64,
    #[serde(rename = "Q0")]
    pub q0: Vec<f64>,
    pub uhat0: Vec<f64>,
    pub t_end: f64,
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub outputs: OutputFlags,
}

impl ScenarioSpec {
    pub fn new(name: impl Into<String>, r: f64, q0: Vec<f64>, uhat0: Vec<f64>, t_end: f64, integrator: IntegratorBlock) -> Self {
        ScenarioSpec {
            spec_version: SPEC_VERSION,
            name: name.into(),
            r,
            q0,
            uhat0,
            t_end,
            integrator,
            outputs: OutputFlags::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("scenario config: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::invalid(format!(
                "unsupported spec_version {} (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        Exponent::singular(self.r)?;
        if self.q0.is_empty() || self.q0.len() != self.uhat0.len() {
            return Err(Error::invalid("Q0 and uhat0 must be nonempty and of equal length"));
        }
        if self.uhat0.iter().any(|u| !u.is_finite()) {
            return Err(Error::invalid("uhat0 must be finite"));
        }
        check_ordering(&self.q0)?;
        self.settings().validate(0.0)
    }

    pub fn exponent(&self) -> Result<Exponent> {
        Exponent::singular(self.r)
    }

    /// Initial `(Q, P)` with `P` from the jump conditions of the coupled profile.
    pub fn initial_state(&self) -> Result<PeakonState> {
        let prof = heights_to_profile(&self.q0, &self.uhat0, self.exponent()?, &profile_quadrature())?;
        PeakonState::new(0.0, self.q0.clone(), prof.momenta())
    }

    pub fn settings(&self) -> IntegratorSettings {
        let b = &self.integrator;
        let mut s = match b.scheme {
            Scheme::RK4Fixed { dt } => IntegratorSettings::rk4(dt, self.t_end),
            Scheme::RK45Adaptive { rtol, atol } => {
                let mut s = IntegratorSettings::rk45(rtol, self.t_end);
                s.scheme = Scheme::RK45Adaptive { rtol, atol };
                s
            }
        };
        s.min_gap_stop = b.min_gap_stop;
        s.output_stride = b.output_stride;
        s.output_interval = b.output_interval;
        s.profile = b.profile.clone();
        s
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.validate()?;
        integrate(&self.initial_state()?, self.exponent()?, &self.settings())
    }

    /// Same experiment at another exponent.
    pub fn with_r(&self, r: f64) -> Self {
        let mut s = self.clone();
        s.r = r;
        s.name = format!("{}-r{}", self.family(), r);
        s
    }

    fn family(&self) -> &str {
        self.name.rsplit_once("-r").map(|(f, _)| f).unwrap_or(&self.name)
    }
}

pub fn overtaking(r: f64) -> ScenarioSpec {
    ScenarioSpec::new(
        format!("overtaking-r{r}"),
        r,
        vec![1.0, 6.0],
        vec![1.5, 1.0],
        20.0,
        IntegratorBlock::rk45(1e-8, Some(0.25)),
    )
}

pub fn antisymmetric(r: f64) -> ScenarioSpec {
    ScenarioSpec::new(
        format!("antisym-r{r}"),
        r,
        vec![1.0, 11.0],
        vec![1.0, -1.0],
        30.0,
        IntegratorBlock::rk45(1e-8, None),
    )
}

pub fn three_point() -> ScenarioSpec {
    ScenarioSpec::new(
        "threepoint-r4",
        4.0,
        vec![1.0, 3.0, 6.0],
        vec![3.0, 1.2, 1.0],
        90.0,
        IntegratorBlock::rk45(1e-8, Some(0.5)),
    )
}

/// Overtaking for `r` in {2, 4, 6}, antisymmetric collision for `r` in
/// {2, 4, 6, 8}, and the three-peak run at `r = 4`.
pub fn builtin_scenarios() -> Vec<ScenarioSpec> {
    let mut out: Vec<ScenarioSpec> = [2.0, 4.0, 6.0].iter().map(|&r| overtaking(r)).collect();
    out.extend([2.0, 4.0, 6.0, 8.0].iter().map(|&r| antisymmetric(r)));
    out.push(three_point());
    out
}

pub fn lookup(name: &str) -> Result<ScenarioSpec> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::invalid(format!("unknown scenario '{name}'")))
}

#[derive(Clone, Debug, Serialize)]
pub struct CollisionRow {
    pub r: f64,
    pub t_collision: f64,
}

/// Estimated collision time of the antisymmetric family at each `r`.
pub fn collision_time_sweep(base: &ScenarioSpec, r_values: &[f64]) -> Result<Vec<CollisionRow>> {
    let antisym = base.uhat0.len() == 2 && base.uhat0[0] == -base.uhat0[1] && base.uhat0[0] != 0.0;
    if !antisym {
        return Err(Error::invalid("collision sweep requires an N = 2 antisymmetric scenario"));
    }
    r_values
        .par_iter()
        .map(|&r| {
            let spec = base.with_r(r);
            let traj = spec.run()?;
            match traj.termination {
                Termination::CollisionDetected { t_est } => Ok(CollisionRow { r, t_collision: t_est }),
                Termination::SolverFailure { t, reason } => Err(Error::SolverFailure { t, reason }),
                Termination::ReachedEnd => Err(Error::invalid(format!(
                    "no collision before t_end = {} at r = {r}",
                    spec.t_end
                ))),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseShiftRow {
    pub r: f64,
    pub phase_shift: f64,
    /// Max deviation of the post-interaction linear fit.
    pub fit_residual: f64,
    /// Final peak speeds, left to right.
    pub final_speeds: Vec<f64>,
    /// Max relative mismatch between sorted final and initial speed sets.
    pub speed_exchange_error: f64,
}

/// Default tolerance on the post-interaction linear fit, in position units.
pub const FIT_THRESHOLD: f64 = 1e-2;

/// Least-squares line through `(t, x)`; returns intercept, slope and the max
/// absolute deviation.
pub fn linear_fit(t: &[f64], x: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let stx: f64 = t.iter().zip(x).map(|(a, b)| (a - tm) * (b - xm)).sum();
    let slope = if stt > 0.0 { stx / stt } else { 0.0 };
    let icpt = xm - slope * tm;
    let dev = t.iter().zip(x).map(|(a, b)| (b - icpt - slope * a).abs()).fold(0.0, f64::max);
    (icpt, slope, dev)
}

/// Phase shift of the fast soliton in an overtaking run: the intercept of a
/// linear fit to the leading peak over the last quarter of the run, minus the
/// intercept of the free motion `Q_1(0) + uhat_1(0) t` of the initially
/// faster trailing peak.
pub fn phase_shift(traj: &Trajectory, threshold: f64) -> Result<PhaseShiftRow> {
    let first = traj.states.first().ok_or_else(|| Error::invalid("empty trajectory"))?;
    if first.len() != 2 {
        return Err(Error::invalid("phase shift needs two peaks"));
    }
    let u0 = &traj.profiles[0].uhat;
    if !(u0[0].abs() > u0[1].abs()) || u0[0] * u0[1] <= 0.0 {
        return Err(Error::invalid("no overtaking: the trailing peak must be strictly faster and of the same sign"));
    }
    if traj.termination != Termination::ReachedEnd {
        return Err(Error::invalid(format!("overtaking run did not finish: {:?}", traj.termination)));
    }
    let t_end = traj.states.last().map(|s| s.t).unwrap_or(0.0);
    let t_start = first.t + 0.75 * (t_end - first.t);
    let (ts, xs): (Vec<f64>, Vec<f64>) = traj
        .states
        .iter()
        .filter(|s| s.t >= t_start)
        .map(|s| (s.t, s.positions()[1]))
        .unzip();
    if ts.len() < 3 {
        return Err(Error::invalid("too few outputs in the fit window"));
    }
    let (icpt, _, dev) = linear_fit(&ts, &xs);
    if dev > threshold {
        return Err(Error::FitNotLinear { residual: dev, threshold });
    }
    let pre = first.positions()[0] - u0[0] * first.t;
    let final_speeds = traj.profiles.last().map(|p| p.uhat.clone()).unwrap_or_default();
    let mut a: Vec<f64> = final_speeds.clone();
    let mut b: Vec<f64> = u0.clone();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let speed_exchange_error = a.iter().zip(&b).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max);
    Ok(PhaseShiftRow {
        r: traj.r.get(),
        phase_shift: icpt - pre,
        fit_residual: dev,
        final_speeds,
        speed_exchange_error,
    })
}

/// Phase shift of the overtaking family at each `r`.
pub fn phase_shift_sweep(base: &ScenarioSpec, r_values: &[f64]) -> Result<Vec<PhaseShiftRow>> {
    let u = &base.uhat0;
    if u.len() != 2 || !(u[0].abs() > u[1].abs()) || u[0] * u[1] <= 0.0 {
        return Err(Error::invalid("phase-shift sweep requires two same-sign peaks with the trailing one faster"));
    }
    r_values
        .par_iter()
        .map(|&r| phase_shift(&base.with_r(r).run()?, FIT_THRESHOLD))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
        assert_eq!(
            names,
            ["overtaking-r2", "overtaking-r4", "overtaking-r6", "antisym-r2", "antisym-r4", "antisym-r6", "antisym-r8", "threepoint-r4"]
        );
        let s = lookup("overtaking-r2").unwrap();
        assert_eq!((s.r, s.q0.clone(), s.uhat0.clone(), s.t_end), (2.0, vec![1.0, 6.0], vec![1.5, 1.0], 20.0));
        let a = lookup("antisym-r8").unwrap();
        assert_eq!((a.r, a.q0.clone(), a.uhat0.clone()), (8.0, vec![1.0, 11.0], vec![1.0, -1.0]));
        let t = lookup("threepoint-r4").unwrap();
        assert_eq!((t.r, t.q0.clone(), t.uhat0.clone(), t.t_end), (4.0, vec![1.0, 3.0, 6.0], vec![3.0, 1.2, 1.0], 90.0));
        assert!(lookup("nope").is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = lookup("antisym-r4").unwrap();
        let back = ScenarioSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        let mut bad = s.clone();
        bad.spec_version = 2;
        assert!(ScenarioSpec::from_json(&bad.to_json()).is_err());
        let mut bad = s.clone();
        bad.q0 = vec![3.0, 1.0];
        assert!(bad.validate().is_err());
        let extra = s.to_json().replacen('{', "{\"bogus\": 1,", 1);
        assert!(ScenarioSpec::from_json(&extra).is_err());
        let minimal = r#"{"spec_version":1,"name":"x","r":3,"Q0":[0],"uhat0":[1],"t_end":1,
            "integrator":{"scheme":{"kind":"RK4Fixed","dt":0.1}}}"#;
        assert!(ScenarioSpec::from_json(minimal).is_ok());
    }

    #[test]
    fn initial_momenta_use_coupled_profile() {
        let st = lookup("overtaking-r2").unwrap().initial_state().unwrap();
        let isolated = [3.0, 2.0];
        for (p, q) in st.momenta().iter().zip(isolated) {
            assert!((p - q).abs() > 1e-3);
        }
    }

    #[test]
    fn sweeps_reject_wrong_families() {
        let single = ScenarioSpec::new("one-r2", 2.0, vec![0.0], vec![1.0], 5.0, IntegratorBlock::rk45(1e-8, None));
        assert!(matches!(collision_time_sweep(&single, &[2.0]), Err(Error::Invalid(_))));
        let same = ScenarioSpec::new("same-r2", 2.0, vec![1.0, 6.0], vec![1.0, 1.0], 5.0, IntegratorBlock::rk45(1e-8, None));
        assert!(matches!(phase_shift_sweep(&same, &[2.0]), Err(Error::Invalid(_))));
    }

    #[test]
    fn collision_sweep_r2_is_finite() {
        let rows = collision_time_sweep(&antisymmetric(2.0), &[2.0]).unwrap();
        assert!(rows[0].t_collision.is_finite() && rows[0].t_collision > 0.0);
    }

    #[test]
    fn phase_shift_r2_positive() {
        let rows = phase_shift_sweep(&overtaking(2.0), &[2.0]).unwrap();
        assert!(rows[0].phase_shift > 0.0, "{rows:?}");
        assert!(rows[0].speed_exchange_error < 0.05, "{rows:?}");
    }

    #[test]
    fn linear_fit_exact() {
        let t = [0.0, 1.0, 2.0];
        let (a, b, d) = linear_fit(&t, &[1.0, 3.0, 5.0]);
        assert_eq!((a, b), (1.0, 2.0));
        assert!(d < 1e-15);
    }
}
