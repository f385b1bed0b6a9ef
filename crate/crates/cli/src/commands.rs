use lie_kam_core::dynamics::{
    integrate_observed, poincare_section, ConservationReport, ConservationTracker, RigidBodyField,
    SectionPoint,
};
use lie_kam_core::error::Error;
use lie_kam_core::normal_form::{
    compute_v_star, conjugacy_residual, fit_power_law, kam_iterate, BoundConstants, LedgerEntry,
    Schedule,
};
use lie_kam_core::operators::{
    estimate_diophantine, DiophantineEstimate, DiophantineParams, TopOperators,
};
use lie_kam_core::presets::{self, NormalFormSetup, Scenario};
use lie_kam_core::sample::{random_series, trial_rng, uniform_on_sphere, SeriesShape};
use lie_kam_core::verify::{registry, run_suite, sweep_bounds};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{IterateConfig, NormalizeConfig, RunConfig, SimulateConfig};
use crate::exit::CliError;
use crate::output::{ensure_dir, write_json, write_section, write_trajectory};

#[derive(Serialize)]
struct Provenance<'a, C: Serialize> {
    command: &'static str,
    seed: u64,
    config: &'a C,
}

#[derive(Serialize)]
struct RunSummary {
    index: usize,
    initial_state: [f64; 3],
    samples: usize,
    conservation: ConservationReport,
    section_points: Option<usize>,
    passed: bool,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a, SimulateConfig>,
    scenario: &'a Scenario,
    h: f64,
    #[serde(rename = "T")]
    duration: f64,
    runs: Vec<RunSummary>,
    passed: bool,
}

struct RunResult {
    summary: RunSummary,
    samples: Vec<(f64, [f64; 3])>,
    section: Option<Vec<SectionPoint>>,
}

fn check_simulate(sim: &SimulateConfig, h: f64, duration: f64) -> Result<(), CliError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(CliError::usage(format!("h must be positive, got {h}")));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(CliError::usage(format!(
            "T must be non-negative, got {duration}"
        )));
    }
    if sim.n == 0 || sim.stride == 0 {
        return Err(CliError::usage("n and stride must be at least 1"));
    }
    if !(sim.rho_tol >= 0.0) {
        return Err(CliError::usage(format!(
            "rho tolerance must be non-negative, got {}",
            sim.rho_tol
        )));
    }
    Ok(())
}

/// Integrates `n` random initial conditions. With `trajectories` the strided
/// samples are written; sections are written when requested.
pub fn simulate(cfg: &RunConfig, trajectories: bool) -> Result<(), CliError> {
    let sim = &cfg.simulate;
    let scenario = presets::find(&sim.preset)?.build(sim.eps)?;
    let h = sim.h.unwrap_or(scenario.h);
    let duration = sim.duration.unwrap_or(scenario.duration);
    check_simulate(sim, h, duration)?;
    let out = cfg.out_dir();
    ensure_dir(&out)?;

    let field = RigidBodyField {
        inertia: scenario.inertia,
    };
    let results: Vec<RunResult> = (0..sim.n)
        .into_par_iter()
        .map(|k| -> Result<RunResult, CliError> {
            let m0 = uniform_on_sphere(&mut trial_rng(cfg.seed, k as u64), scenario.rho);
            let mut tracker = ConservationTracker::new(scenario.inertia, &m0);
            let traj = integrate_observed(&field, m0, 0.0, h, duration, 1, |t, m| {
                tracker.observe(t, m)
            })?;
            let section = if sim.section {
                Some(poincare_section(&traj, scenario.period)?)
            } else {
                None
            };
            let conservation = tracker.report();
            let last = traj.len().saturating_sub(1);
            let samples: Vec<_> = traj
                .times
                .iter()
                .zip(&traj.states)
                .enumerate()
                .filter(|(i, _)| i % sim.stride == 0 || *i == last)
                .map(|(_, (t, m))| (*t, *m))
                .collect();
            let passed = conservation.in_band && conservation.rho_drift_max <= sim.rho_tol;
            let summary = RunSummary {
                index: k,
                initial_state: m0,
                samples: samples.len(),
                conservation,
                section_points: section.as_ref().map(Vec::len),
                passed,
            };
            Ok(RunResult {
                summary,
                samples,
                section,
            })
        })
        .collect::<Result<_, _>>()?;

    for r in &results {
        let k = r.summary.index;
        if trajectories {
            write_trajectory(
                &out.join(format!("trajectory_{k:03}.csv")),
                r.samples.iter().copied(),
            )?;
        }
        if let Some(points) = &r.section {
            write_section(&out.join(format!("section_{k:03}.csv")), points)?;
        }
    }
    let passed = results.iter().all(|r| r.summary.passed);
    let command = if trajectories { "simulate" } else { "section" };
    let report = SimulateReport {
        provenance: Provenance {
            command,
            seed: cfg.seed,
            config: sim,
        },
        scenario: &scenario,
        h,
        duration,
        runs: results.into_iter().map(|r| r.summary).collect(),
        passed,
    };
    write_json(&out.join(format!("{command}.json")), &report)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::science(format!(
            "conservation violated (rho drift above {:e} or energy outside its band)",
            sim.rho_tol
        )))
    }
}

fn normal_form_setup(
    preset: &str,
    eps: Option<f64>,
) -> Result<(Scenario, NormalFormSetup), CliError> {
    let scenario = presets::find(preset)?.build(eps)?;
    let setup = scenario
        .normal_form
        .clone()
        .ok_or_else(|| CliError::usage(format!("preset {preset} has no normal-form setup")))?;
    Ok((scenario, setup))
}

#[derive(Serialize)]
struct QuadraticProbe {
    eps: Vec<f64>,
    v_star_norms: Vec<f64>,
    slope: f64,
    kappa: f64,
}

#[derive(Serialize)]
struct NormalizeReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a, NormalizeConfig>,
    eps: Option<f64>,
    v_norm: f64,
    v_star_norm: f64,
    absorbed_norm: f64,
    q_star_mean: f64,
    series_terms: usize,
    tail_norm: f64,
    conjugacy_residual: f64,
    conjugacy_tolerance: f64,
    quadratic: Option<QuadraticProbe>,
    passed: bool,
}

pub fn normalize(cfg: &RunConfig) -> Result<(), CliError> {
    let nf = &cfg.normalize;
    if nf.probes == 0 {
        return Err(CliError::usage("need at least one probe"));
    }
    let (scenario, setup) = normal_form_setup(&nf.preset, nf.eps)?;
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let ops = TopOperators::new(setup.algebra, setup.twist.clone(), nf.q)?;
    let r = nf.lie.r;
    let step = compute_v_star(&setup.perturbation, &ops, &nf.lie)?;

    let probes = (0..nf.probes as u64)
        .map(|k| {
            random_series(
                &mut trial_rng(cfg.seed, k),
                setup.algebra.rho,
                setup.trunc,
                &SeriesShape::low(1, 1, 1.0),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let residual = conjugacy_residual(&setup.perturbation, &ops, &step, &probes, &nf.lie)?;
    let tolerance = 5.0 * nf.lie.tol;

    let quadratic = match (scenario.eps, nf.quadratic_factors.len()) {
        (Some(eps), n) if n >= 2 => {
            let eps_list: Vec<f64> = nf.quadratic_factors.iter().map(|f| f * eps).collect();
            let norms = eps_list
                .iter()
                .map(|&e| -> Result<f64, CliError> {
                    let (_, s) = normal_form_setup(&nf.preset, Some(e))?;
                    let ops = TopOperators::new(s.algebra, s.twist, nf.q)?;
                    Ok(compute_v_star(&s.perturbation, &ops, &nf.lie)?
                        .v_star
                        .majorant(r))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (slope, kappa) = fit_power_law(&eps_list, &norms)?;
            Some(QuadraticProbe {
                eps: eps_list,
                v_star_norms: norms,
                slope,
                kappa,
            })
        }
        _ => None,
    };

    std::fs::write(out.join("v_star.json"), step.v_star.to_json()? + "\n")?;
    let report = NormalizeReport {
        provenance: Provenance {
            command: "normalize",
            seed: cfg.seed,
            config: nf,
        },
        eps: scenario.eps,
        v_norm: setup.perturbation.majorant(r),
        v_star_norm: step.v_star.majorant(r),
        absorbed_norm: step.rv.majorant(r),
        q_star_mean: step.q_star.coeff(0, 0, 0).re,
        series_terms: step.series_terms_used,
        tail_norm: step.tail_norm,
        conjugacy_residual: residual,
        conjugacy_tolerance: tolerance,
        quadratic,
        passed: residual <= tolerance,
    };
    write_json(&out.join("normalize.json"), &report)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::science(format!(
            "conjugacy residual {residual:e} exceeds {tolerance:e}"
        )))
    }
}

#[derive(Serialize)]
struct IterateReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a, IterateConfig>,
    eps: Option<f64>,
    diophantine: DiophantineEstimate,
    constants: BoundConstants,
    schedule: &'a Schedule,
    schedule_valid: bool,
    first_failure: Option<(&'a str, usize)>,
    quadratic_within: bool,
    ledger: Vec<LedgerEntry>,
}

pub fn iterate(cfg: &RunConfig) -> Result<(), CliError> {
    let it = &cfg.iterate;
    if it.kam.steps == 0 {
        return Err(CliError::usage("need at least one step"));
    }
    let (scenario, setup) = normal_form_setup(&it.preset, it.eps)?;
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let omega = setup.algebra.omega();
    let k = it.gamma_scan.max(setup.trunc.l_t + setup.trunc.l_theta);
    let gamma = estimate_diophantine(omega, it.tau, k)?.gamma;
    let dio = DiophantineParams {
        gamma,
        tau: it.tau,
        q: it.q,
        k_scan: it.gamma_scan,
    };
    dio.validate()?;
    let run = kam_iterate(
        &setup.perturbation,
        &setup.twist,
        &setup.algebra,
        &dio,
        &it.kam,
    )?;

    std::fs::write(out.join("final_v.json"), run.final_v.to_json()? + "\n")?;
    let first_failure = run.schedule.first_failure();
    let report = IterateReport {
        provenance: Provenance {
            command: "iterate",
            seed: cfg.seed,
            config: it,
        },
        eps: scenario.eps,
        diophantine: run.diophantine,
        constants: run.constants,
        schedule: &run.schedule,
        schedule_valid: run.schedule.is_valid(),
        first_failure,
        quadratic_within: run.quadratic_within(it.quadratic_factor),
        ledger: run.ledger(),
    };
    write_json(&out.join("ledger.json"), &report)?;
    if let Some((condition, step)) = first_failure {
        return Err(CliError::science(format!(
            "schedule condition ({condition}) fails at step {step}; ledger written"
        )));
    }
    if !report.quadratic_within {
        return Err(CliError::science(format!(
            "contraction above {} x |V|^2; ledger written",
            it.quadratic_factor
        )));
    }
    Ok(())
}

pub fn bounds(cfg: &RunConfig) -> Result<(), CliError> {
    let mut sweep_cfg = cfg.bounds.clone();
    sweep_cfg.seed = cfg.seed;
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let sweep = sweep_bounds(&sweep_cfg)?;
    write_json(&out.join("bounds.json"), &sweep)?;
    for l in &sweep.losses {
        println!(
            "d = delta = {:.3} r: min margin {:.3e}, max measured/bound {:.3e}",
            l.loss_fraction, l.min_margin, l.max_ratio
        );
    }
    if sweep.passed {
        Ok(())
    } else {
        Err(CliError::science("a bound margin is negative"))
    }
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let mut suite_cfg = cfg.verify;
    suite_cfg.seed = cfg.seed;
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let report = run_suite(&suite_cfg, &registry()).map_err(|e| match e {
        Error::Resonance { .. } => CliError::science(format!("diophantine pre-check: {e}")),
        e => e.into(),
    })?;
    write_json(&out.join("verify.json"), &report)?;
    for r in &report.identities {
        println!(
            "{} {:<20} max residual {:.3e} (tol {:.0e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.identity,
            r.max_residual,
            r.tolerance
        );
    }
    match report.first_failure() {
        None => Ok(()),
        Some(r) => Err(CliError::science(format!(
            "identity {} fails: residual {:e} > {:e}",
            r.identity, r.max_residual, r.tolerance
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_rejects_bad_steps() {
        let sim = SimulateConfig::default();
        assert_eq!(check_simulate(&sim, 0.0, 1.0).unwrap_err().code, 1);
        assert_eq!(check_simulate(&sim, 0.1, -1.0).unwrap_err().code, 1);
        assert!(check_simulate(&sim, 0.1, 0.0).is_ok());
        let none = SimulateConfig {
            n: 0,
            ..SimulateConfig::default()
        };
        assert_eq!(check_simulate(&none, 0.1, 1.0).unwrap_err().code, 1);
    }
}
