use std::fs;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use serde::Serialize;

use rch_core::dynamics::{conservation_report, fmt_num, integrate, ConservationReport, Scheme, Termination, Trajectory, TrajectoryMeta};
use rch_core::profile::{heights_to_profile, profile_quadrature, sample, solve_profile, Profile, ProfileSolveSettings};
use rch_core::scenarios::{collision_time_sweep, lookup, phase_shift_sweep, ScenarioSpec};
use rch_core::suites::{run_suite, Suite, SuiteOptions, SuiteReport};
use rch_core::{Exponent, PeakonState};

use crate::output::{csv_field, Format, OutputBundle};
use crate::svg::{LinePlot, Series};
use crate::{ProfileArgs, ScenarioArgs, SimulateArgs, SweepArgs, SweepKind, VerifyArgs};

/// 2 for bad input, 3 for solver failures.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(ce) = cause.downcast_ref::<rch_core::Error>() {
            return if ce.is_input_error() { 2 } else { 3 };
        }
    }
    2
}

fn load_scenario(args: &ScenarioArgs, default: Option<&str>) -> Result<Option<ScenarioSpec>> {
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        return Ok(Some(ScenarioSpec::from_json(&text)?));
    }
    match args.scenario.as_deref().or(default) {
        Some(name) => Ok(Some(lookup(name)?)),
        None => Ok(None),
    }
}

fn sample_profile(prof: &Profile, lo: f64, hi: f64, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
    let us = sample(prof, &xs, &profile_quadrature())?;
    Ok((xs, us))
}

fn write_profile_files(out: &OutputBundle, stem: &str, title: &str, prof: &Profile, xs: &[f64], us: &[f64]) -> Result<()> {
    if out.wants(Format::Csv) {
        out.write_with(&format!("{stem}.csv"), |w| {
            writeln!(w, "x,u")?;
            for (x, u) in xs.iter().zip(us) {
                writeln!(w, "{},{}", fmt_num(*x), fmt_num(*u))?;
            }
            Ok(())
        })?;
    }
    if out.wants(Format::Json) {
        out.write_str(&format!("{stem}.json"), &(prof.to_json() + "\n"))?;
    }
    if out.wants(Format::Svg) {
        let plot = LinePlot {
            title: title.to_string(),
            x_label: "x".into(),
            y_label: "u".into(),
            series: vec![Series { label: "u(x)".into(), points: xs.iter().copied().zip(us.iter().copied()).collect() }],
        };
        out.write_str(&format!("{stem}.svg"), &plot.render())?;
    }
    Ok(())
}

/// Profile at exactly time `t`, integrating a short hop from the last output
/// at or before `t` when needed.
fn profile_at(traj: &Trajectory, spec: &ScenarioSpec, t: f64) -> Result<Option<Profile>> {
    let Some(idx) = traj.states.iter().rposition(|s| s.t <= t + 1e-12) else { return Ok(None) };
    let s = &traj.states[idx];
    if (s.t - t).abs() <= 1e-12 {
        return Ok(Some(traj.profiles[idx].clone()));
    }
    if idx + 1 == traj.states.len() {
        return Ok(None);
    }
    let mut set = spec.settings();
    set.t_end = t;
    set.output_interval = None;
    let hop = integrate(s, traj.r, &set)?;
    Ok((hop.termination == Termination::ReachedEnd).then(|| hop.profiles.last().cloned()).flatten())
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    scenario: &'a ScenarioSpec,
    #[serde(flatten)]
    meta: TrajectoryMeta,
    conservation: ConservationReport,
}

pub fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let mut spec = load_scenario(&a.scenario, None)?.ok_or_else(|| anyhow!("one of --scenario or --config is required"))?;
    if let Some(t) = a.t_end {
        spec.t_end = t;
    }
    if let Some(dt) = a.dt {
        spec.integrator.scheme = Scheme::RK4Fixed { dt };
    }
    if let Some(rtol) = a.rtol {
        spec.integrator.scheme = Scheme::RK45Adaptive { rtol, atol: rtol };
    }
    if !a.snapshots.is_empty() {
        spec.outputs.snapshots = a.snapshots.clone();
    }
    spec.validate()?;
    let out = OutputBundle::new(&a.output.out, &a.output.formats)?;
    info!("running {} to t = {}", spec.name, spec.t_end);
    let traj = spec.run()?;

    if out.wants(Format::Csv) {
        out.write_with("trajectory.csv", |w| traj.write_csv(w))?;
    }
    if out.wants(Format::Json) {
        let summary = SimulationSummary { scenario: &spec, meta: traj.meta(), conservation: conservation_report(&traj) };
        out.write_json("termination.json", &summary)?;
    }
    if out.wants(Format::Svg) {
        let n = traj.states[0].len();
        let plot = LinePlot {
            title: format!("Peak positions, {}", spec.name),
            x_label: "t".into(),
            y_label: "Q".into(),
            series: (0..n)
                .map(|i| Series { label: format!("Q{}", i + 1), points: traj.states.iter().map(|s| (s.t, s.positions()[i])).collect() })
                .collect(),
        };
        out.write_str("trajectory.svg", &plot.render())?;
    }
    for &t in &spec.outputs.snapshots {
        match profile_at(&traj, &spec, t)? {
            Some(prof) => {
                let lo = prof.q.iter().copied().fold(f64::INFINITY, f64::min) - 6.0;
                let hi = prof.q.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 6.0;
                let (xs, us) = sample_profile(&prof, lo, hi, 1201)?;
                let title = format!("u(x) at t = {}, r = {}", fmt_num(t), fmt_num(spec.r));
                write_profile_files(&out, &format!("snapshot_t{}", fmt_num(t)), &title, &prof, &xs, &us)?;
            }
            None => warn!("snapshot time {t} lies outside the computed trajectory; skipped"),
        }
    }

    let last = traj.last_state();
    match &traj.termination {
        Termination::SolverFailure { t, reason } => {
            Err(anyhow!(rch_core::Error::SolverFailure { t: *t, reason: reason.clone() }).context(format!("simulation of {} failed", spec.name)))
        }
        term => {
            println!("{}: {:?}, {} outputs, t = {}", spec.name, term, traj.states.len(), fmt_num(last.t));
            Ok(ExitCode::SUCCESS)
        }
    }
}

pub fn profile(a: ProfileArgs) -> Result<ExitCode> {
    let r = Exponent::singular(a.r)?;
    let prof = if !a.uhat.is_empty() {
        heights_to_profile(&a.q, &a.uhat, r, &profile_quadrature())?
    } else {
        if a.p.len() != a.q.len() {
            bail!("--q and --p must have the same length");
        }
        let st = PeakonState::new(0.0, a.q.clone(), a.p.clone())?;
        solve_profile(&st, r, None, &ProfileSolveSettings::default())?
    };
    let (lo, hi, count) = match a.grid.as_slice() {
        [] => (prof.q[0] - 5.0, prof.q[prof.q.len() - 1] + 5.0, 501),
        [lo, hi, n] if hi > lo && *n >= 2.0 && n.fract() == 0.0 => (*lo, *hi, *n as usize),
        _ => bail!("--grid must be lo,hi,count with hi > lo and an integer count >= 2"),
    };
    let out = OutputBundle::new(&a.output.out, &a.output.formats)?;
    let (xs, us) = sample_profile(&prof, lo, hi, count)?;
    write_profile_files(&out, "profile", &format!("Profile, r = {}", fmt_num(a.r)), &prof, &xs, &us)?;
    println!("uhat = {:?}, P = {:?}", prof.uhat, prof.momenta());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    seed: u64,
    suites: Vec<SuiteReport>,
}

pub fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let suites: Vec<Suite> = if a.suite.is_empty() || a.suite.iter().any(|s| s == "all") {
        Suite::ALL.to_vec()
    } else {
        a.suite.iter().map(|s| s.parse::<Suite>()).collect::<rch_core::Result<_>>()?
    };
    let opts = SuiteOptions { scenario: load_scenario(&a.scenario, None)?, seed: a.seed, ..SuiteOptions::default() };
    let mut reports = Vec::new();
    for s in suites {
        info!("suite {s}");
        reports.push(run_suite(s, &opts)?);
    }
    let report = VerifyReport { pass: reports.iter().all(|r| r.pass), seed: a.seed, suites: reports };
    let body = serde_json::to_string_pretty(&report)?;
    println!("{body}");
    if let Some(path) = &a.report {
        fs::write(path, body + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        for s in &report.suites {
            for c in s.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}/{}: {} (threshold {})", s.suite, c.name, c.value, c.threshold);
            }
        }
        Ok(ExitCode::from(1))
    }
}

pub fn sweep(a: SweepArgs) -> Result<ExitCode> {
    let default = match a.kind {
        SweepKind::Collision => "antisym-r2",
        SweepKind::PhaseShift => "overtaking-r2",
    };
    let mut base = load_scenario(&a.scenario, Some(default))?.expect("default scenario");
    if let Some(t) = a.t_end {
        base.t_end = t;
    }
    let r_values = if a.r_values.is_empty() {
        match a.kind {
            SweepKind::Collision => vec![2.0, 4.0, 6.0, 8.0],
            SweepKind::PhaseShift => vec![2.0, 4.0, 6.0],
        }
    } else {
        a.r_values.clone()
    };
    let out = OutputBundle::new(&a.output.out, &a.output.formats)?;
    let (stem, ylabel, header, rows, points, json) = match a.kind {
        SweepKind::Collision => {
            let rows = collision_time_sweep(&base, &r_values)?;
            let lines: Vec<String> = rows.iter().map(|r| format!("{},{},{}", csv_field(&base.with_r(r.r).name), fmt_num(r.r), fmt_num(r.t_collision))).collect();
            let pts = rows.iter().map(|r| (r.r, r.t_collision)).collect::<Vec<_>>();
            ("collision_sweep", "collision time", "scenario,r,t_collision", lines, pts, serde_json::to_value(&rows)?)
        }
        SweepKind::PhaseShift => {
            let rows = phase_shift_sweep(&base, &r_values)?;
            let lines: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{},{},{}",
                        csv_field(&base.with_r(r.r).name),
                        fmt_num(r.r),
                        fmt_num(r.phase_shift),
                        fmt_num(r.fit_residual),
                        fmt_num(r.speed_exchange_error)
                    )
                })
                .collect();
            let pts = rows.iter().map(|r| (r.r, r.phase_shift)).collect::<Vec<_>>();
            (
                "phase_shift_sweep",
                "phase shift",
                "scenario,r,phase_shift,fit_residual,speed_exchange_error",
                lines,
                pts,
                serde_json::to_value(&rows)?,
            )
        }
    };
    if out.wants(Format::Csv) {
        out.write_with(&format!("{stem}.csv"), |w| {
            writeln!(w, "{header}")?;
            for l in &rows {
                writeln!(w, "{l}")?;
            }
            Ok(())
        })?;
    }
    let doc = serde_json::json!({ "base": base, "rows": json });
    if out.wants(Format::Json) {
        out.write_json(&format!("{stem}.json"), &doc)?;
    }
    if out.wants(Format::Svg) {
        let plot = LinePlot {
            title: format!("{ylabel} vs r"),
            x_label: "r".into(),
            y_label: ylabel.into(),
            series: vec![Series { label: base.name.clone(), points }],
        };
        out.write_str(&format!("{stem}.svg"), &plot.render())?;
    }
    println!("{}", serde_json::to_string_pretty(&doc["rows"])?);
    Ok(ExitCode::SUCCESS)
}
