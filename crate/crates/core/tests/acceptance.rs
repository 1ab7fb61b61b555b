//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion fails outside the documented known gaps.

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rch_core::dynamics::{conservation_report, integrate, IntegratorSettings, Termination};
use rch_core::profile::{heights_to_profile, profile_quadrature};
use rch_core::scenarios::{antisymmetric, builtin_scenarios, collision_time_sweep, lookup, overtaking, phase_shift_sweep};
use rch_core::suites::{run_suite, Check, Suite, SuiteOptions};
use rch_core::{momentum_from_height, Exponent, PeakonState};

const TRAVEL_Q_TOL: f64 = 1e-6;
const TRAVEL_P_TOL: f64 = 1e-10;
const ENERGY_DRIFT_TOL: f64 = 1e-6;
const SPEED_EXCHANGE_TOL: f64 = 0.05;
const RANDOM_SIGN_RUNS: usize = 50;

/// Sub-checks that cannot meet their tolerance with the prescribed method.
/// They still run and print FAIL; they do not fail the target.
const KNOWN_GAPS: &[(&str, &str)] = &[
    (
        "collocation_vs_quadrature",
        "uniform second-order collocation converges at order r/(r-1) on turning-point segments when r > 2",
    ),
    (
        "r1_x3_published_residual",
        "the published X3 closed form does not satisfy the r = 1 equation; the corrected implicit form is checked separately",
    ),
];

struct Outcome {
    id: usize,
    checks: Vec<Check>,
}

impl Outcome {
    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn blocking(&self) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| !c.pass && !KNOWN_GAPS.iter().any(|(n, _)| *n == c.name))
            .collect()
    }
}

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn fmt_check(c: &Check) -> String {
    let op = if c.at_least { ">=" } else { "<=" };
    let mut s = format!("{}={:.3e} ({op} {:e})", c.name, c.value, c.threshold);
    if !c.pass {
        s.push_str(" FAIL");
    }
    s
}

fn r(v: f64) -> Exponent {
    Exponent::singular(v).expect("valid exponent")
}

fn failed(name: &str, err: impl std::fmt::Display) -> Check {
    let mut c = Check::at_most(name, f64::NAN, 0.0);
    c.note = Some(err.to_string());
    c
}

fn travelling_wave() -> Vec<Check> {
    let mut checks = Vec::new();
    for rv in [2.0, 4.0, 6.0] {
        let rr = r(rv);
        let p0 = momentum_from_height(1.0, rr).unwrap();
        let st = PeakonState::new(0.0, vec![0.0], vec![p0]).unwrap();
        match integrate(&st, rr, &IntegratorSettings::rk4(1e-2, 10.0)) {
            Ok(traj) => {
                let dq = traj.states.iter().map(|s| (s.positions()[0] - s.t).abs()).fold(0.0, f64::max);
                let dp = traj.states.iter().map(|s| (s.momenta()[0] - p0).abs()).fold(0.0, f64::max);
                checks.push(Check::at_most(format!("r{rv}_position"), dq, TRAVEL_Q_TOL));
                checks.push(Check::at_most(format!("r{rv}_momentum"), dp, TRAVEL_P_TOL));
            }
            Err(e) => checks.push(failed(&format!("r{rv}"), e)),
        }
    }
    checks
}

fn energy_conservation() -> Vec<Check> {
    let spec = lookup("overtaking-r2").unwrap();
    let st = spec.initial_state().unwrap();
    let drift = |rtol: f64| {
        integrate(&st, spec.exponent().unwrap(), &IntegratorSettings::rk45(rtol, 9.0))
            .map(|t| conservation_report(&t).max_rel_energy_drift)
    };
    match (drift(1e-8), drift(5e-9)) {
        (Ok(a), Ok(b)) => vec![Check::at_most("drift_rtol_1e-8", a, ENERGY_DRIFT_TOL), {
            let mut c = Check::at_most("drift_ratio_half_rtol", b / a, 1.0);
            c.pass = b < a;
            c
        }],
        (Err(e), _) | (_, Err(e)) => vec![failed("drift", e)],
    }
}

fn random_sign_state(rng: &mut ChaCha8Rng) -> (f64, PeakonState) {
    let rv = [2.0, 3.0, 4.5, 6.0][rng.gen_range(0..4)];
    let mut h = || {
        let m: f64 = rng.gen_range(0.2..2.0);
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let u = [h(), h()];
    let gap: f64 = rng.gen_range(0.5..6.0);
    let prof = heights_to_profile(&[0.0, gap], &u, r(rv), &profile_quadrature()).unwrap();
    (rv, PeakonState::new(0.0, vec![0.0, gap], prof.momenta()).unwrap())
}

fn sign_preservation() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let randoms: Vec<(f64, PeakonState)> = (0..RANDOM_SIGN_RUNS).map(|_| random_sign_state(&mut rng)).collect();
    let builtin: Vec<(f64, PeakonState, IntegratorSettings)> =
        builtin_scenarios().into_iter().map(|s| (s.r, s.initial_state().unwrap(), s.settings())).collect();
    let runs: Vec<(f64, PeakonState, IntegratorSettings)> = builtin
        .into_iter()
        .chain(randoms.into_iter().map(|(rv, st)| (rv, st, IntegratorSettings::rk45(1e-8, 10.0))))
        .collect();
    let results: Vec<Result<bool, String>> = runs
        .par_iter()
        .map(|(rv, st, set)| {
            let traj = integrate(st, r(*rv), set).map_err(|e| e.to_string())?;
            if let Termination::SolverFailure { t, reason } = &traj.termination {
                return Err(format!("solver failure at t = {t}: {reason}"));
            }
            Ok(conservation_report(&traj).signs_preserved())
        })
        .collect();
    let flips = results.iter().filter(|r| matches!(r, Ok(false))).count();
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let mut c = Check::at_most("runs_with_sign_change", flips as f64, 0.0);
    c.note = Some(format!("{} runs", results.len()));
    let mut checks = vec![c];
    let mut e = Check::at_most("runs_failed", errors.len() as f64, 0.0);
    if !errors.is_empty() {
        e.note = Some(errors.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; "));
    }
    checks.push(e);
    checks
}

fn ordering() -> Vec<Check> {
    let spec = lookup("threepoint-r4").unwrap();
    let mut set = spec.settings();
    set.output_interval = None;
    set.output_stride = 1;
    set.t_end = 90.0;
    let traj = match spec.initial_state().and_then(|st| integrate(&st, spec.exponent().unwrap(), &set)) {
        Ok(t) => t,
        Err(e) => return vec![failed("run", e)],
    };
    let rep = conservation_report(&traj);
    let reached = traj.termination == Termination::ReachedEnd && (traj.last_state().t - 90.0).abs() < 1e-9;
    let gaps: Vec<f64> = traj.states.iter().map(|s| s.min_gap()).collect();
    let run_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let last = traj.last_state().positions();
    let final_gap = last.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut reach = Check::at_least("reached_t90", reached as u8 as f64, 1.0);
    reach.note = Some(format!("{:?}", traj.termination));
    vec![
        reach,
        Check::at_least("strictly_ordered_every_step", rep.ordered as u8 as f64, 1.0),
        Check::at_least("min_gap", run_min, 1e-12),
        {
            let mut c = Check::at_least("final_gap_over_run_min", final_gap / run_min, 1.0);
            c.pass = final_gap > run_min;
            c
        },
    ]
}

fn collision_trend() -> Vec<Check> {
    match collision_time_sweep(&antisymmetric(2.0), &[2.0, 4.0, 6.0, 8.0]) {
        Ok(rows) => {
            let inc = rows.windows(2).all(|w| w[1].t_collision > w[0].t_collision);
            let times: Vec<String> = rows.iter().map(|x| format!("r{}:{:.4}", x.r, x.t_collision)).collect();
            let mut c = Check::at_least("strictly_increasing", inc as u8 as f64, 1.0);
            c.note = Some(times.join(" "));
            vec![c]
        }
        Err(e) => vec![failed("sweep", e)],
    }
}

fn phase_shift_trend() -> Vec<Check> {
    match phase_shift_sweep(&overtaking(2.0), &[2.0, 4.0, 6.0]) {
        Ok(rows) => {
            let dec = rows.windows(2).all(|w| w[1].phase_shift < w[0].phase_shift);
            let shifts: Vec<String> = rows.iter().map(|x| format!("r{}:{:.4}", x.r, x.phase_shift)).collect();
            let mut c = Check::at_least("strictly_decreasing", dec as u8 as f64, 1.0);
            c.note = Some(shifts.join(" "));
            let worst = rows.iter().map(|x| x.speed_exchange_error).fold(0.0, f64::max);
            vec![c, Check::at_most("speed_exchange_error", worst, SPEED_EXCHANGE_TOL)]
        }
        Err(e) => vec![failed("sweep", e)],
    }
}

fn suite_checks(suite: Suite, keep: &[&str]) -> Vec<Check> {
    match run_suite(suite, &SuiteOptions::default()) {
        Ok(rep) => rep.checks.into_iter().filter(|c| keep.is_empty() || keep.contains(&c.name.as_str())).collect(),
        Err(e) => vec![failed(suite.name(), e)],
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(usize, &'static str, fn() -> Vec<Check>)> = vec![
        (1, "travelling wave", travelling_wave),
        (2, "energy conservation", energy_conservation),
        (3, "sign preservation", sign_preservation),
        (4, "ordering preservation", ordering),
        (5, "collision-time trend", collision_trend),
        (6, "phase-shift trend", phase_shift_trend),
        (7, "oracle equivalence", || suite_checks(Suite::Oracle, &[])),
        (8, "weak-solution property", || suite_checks(Suite::WeakForm, &[])),
        (9, "scaling symmetry", || {
            suite_checks(Suite::Symmetry, &["scaling_position_error", "scaling_momentum_relative_error", "scaling_exponent_contrast"])
        }),
        (10, "closed forms", || {
            let mut c = suite_checks(Suite::R1Forms, &["r1_x2_residual", "r1_x3_published_residual", "r1_x3_corrected_residual"]);
            c.extend(suite_checks(
                Suite::Symmetry,
                &["travelling_reduction_r2", "travelling_reduction_r5", "x2_first_integral_spread_r2", "x2_first_integral_spread_r4"],
            ));
            c
        }),
    ];
    let mut outcomes = Vec::new();
    for (id, title, run) in criteria {
        let start = Instant::now();
        let o = Outcome { id, checks: run() };
        let status = if o.pass() {
            "PASS"
        } else if o.blocking().is_empty() {
            "FAIL (known gap)"
        } else {
            "FAIL"
        };
        let detail: Vec<String> = o.checks.iter().map(fmt_check).collect();
        emit(&format!("criterion {id:>2} {title}: {status} [{:.1}s] {}", start.elapsed().as_secs_f64(), detail.join(", ")));
        for c in o.checks.iter().filter(|c| !c.pass) {
            if let Some(note) = &c.note {
                emit(&format!("    {}: {note}", c.name));
            }
            if let Some((_, why)) = KNOWN_GAPS.iter().find(|(n, _)| *n == c.name) {
                emit(&format!("    known gap: {why}"));
            }
        }
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.pass()).count();
    let blocking: Vec<usize> = outcomes.iter().filter(|o| !o.blocking().is_empty()).map(|o| o.id).collect();
    emit(&format!("acceptance: {passed}/{} criteria pass; blocking failures: {blocking:?}", outcomes.len()));
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
