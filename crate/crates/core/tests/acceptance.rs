//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lie_kam_core::dynamics::{
    from_reduced, integrate, integrate_observed, to_reduced, ConservationTracker, InertiaSpec,
    ReducedField, RigidBodyField,
};
use lie_kam_core::normal_form::{
    compute_v_star, conjugacy_residual, fit_power_law, kam_iterate, KamConfig, LieSeriesConfig,
};
use lie_kam_core::operators::{estimate_diophantine, DiophantineParams, TopOperators};
use lie_kam_core::presets::{find, NormalFormSetup};
use lie_kam_core::sample::{random_series, trial_rng, uniform_on_sphere, SeriesShape};
use lie_kam_core::series::Series;
use lie_kam_core::verify::{registry, run_suite, sweep_bounds, BoundSweepConfig, VerifyConfig};
use lie_kam_core::{Error, Result};

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn pert1(eps: f64) -> Result<NormalFormSetup> {
    find("pert1")?
        .build(Some(eps))?
        .normal_form
        .ok_or_else(|| Error::InvalidParameter("pert1 has no normal-form setup".into()))
}

fn ops(setup: &NormalFormSetup) -> Result<TopOperators> {
    TopOperators::new(setup.algebra, setup.twist.clone(), 0.5)
}

fn identity_suite() -> Result<Verdict> {
    let start = Instant::now();
    let report = run_suite(&VerifyConfig::default(), &registry())?;
    let elapsed = start.elapsed();
    let worst = report
        .identities
        .iter()
        .map(|r| format!("{} {:.1e}", r.identity, r.max_residual))
        .collect::<Vec<_>>()
        .join(", ");
    let within = elapsed < Duration::from_secs(60);
    Ok(Verdict::new(
        report.passed && within,
        format!(
            "{} trials; {worst}; {:.1}s (limit 60s)",
            report.config.trials,
            elapsed.as_secs_f64()
        ),
    ))
}

fn conjugacy() -> Result<Verdict> {
    let setup = pert1(1e-3)?;
    let ops = ops(&setup)?;
    let cfg = LieSeriesConfig::default();
    let step = compute_v_star(&setup.perturbation, &ops, &cfg)?;
    let probes = (0..20)
        .map(|k| {
            random_series(
                &mut trial_rng(2024, k),
                setup.algebra.rho,
                setup.trunc,
                &SeriesShape::low(1, 1, 1.0),
            )
        })
        .collect::<Result<Vec<Series>>>()?;
    let residual = conjugacy_residual(&setup.perturbation, &ops, &step, &probes, &cfg)?;
    let limit = 5.0 * cfg.tol;
    Ok(Verdict::new(
        residual <= limit,
        format!(
            "max residual {residual:.2e} over 20 probes (limit {limit:.0e}); {} Lie terms",
            step.series_terms_used
        ),
    ))
}

fn quadratic_smallness() -> Result<Verdict> {
    let eps = [1e-2, 3e-3, 1e-3, 3e-4];
    let norms = eps
        .iter()
        .map(|&e| {
            let s = pert1(e)?;
            Ok(
                compute_v_star(&s.perturbation, &ops(&s)?, &LieSeriesConfig::default())?
                    .v_star
                    .majorant(0.5),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, kappa) = fit_power_law(&eps, &norms)?;
    Ok(Verdict::new(
        (slope - 2.0).abs() <= 0.1,
        format!("slope {slope:.4} (2.0 +- 0.1), kappa {kappa:.3}"),
    ))
}

fn bound_certification() -> Result<Verdict> {
    let start = Instant::now();
    let sweep = sweep_bounds(&BoundSweepConfig::default())?;
    let elapsed = start.elapsed();
    let losses = sweep
        .losses
        .iter()
        .map(|l| {
            format!(
                "d=delta={}r: min margin {:.2e}, max ratio {:.1e}",
                l.loss_fraction, l.min_margin, l.max_ratio
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Verdict::new(
        sweep.passed && elapsed < Duration::from_secs(120),
        format!(
            "{} triples, tau 1, gamma {:.4} (scan), q 0.5; {losses}; {:.1}s",
            sweep.config.trials,
            sweep.diophantine.gamma,
            elapsed.as_secs_f64()
        ),
    ))
}

fn kam_iteration() -> Result<Verdict> {
    let setup = pert1(1e-3)?;
    let k = 50.max(setup.trunc.l_t + setup.trunc.l_theta);
    let gamma = estimate_diophantine(setup.algebra.omega(), 1.0, k)?.gamma;
    let dio = DiophantineParams {
        gamma,
        tau: 1.0,
        q: 0.5,
        k_scan: 50,
    };
    let run = kam_iterate(
        &setup.perturbation,
        &setup.twist,
        &setup.algebra,
        &dio,
        &KamConfig::default(),
    )?;
    let ratios = run
        .states
        .iter()
        .map(|s| {
            s.contraction_ratio
                .map_or("-".to_string(), |c| format!("{c:.3}"))
        })
        .collect::<Vec<_>>()
        .join(", ");
    let contraction = run.quadratic_within(10.0);
    let schedule = match run.schedule.first_failure() {
        None => "schedule (a)-(f) hold".to_string(),
        Some((cond, step)) => {
            let failing: Vec<String> = run
                .schedule
                .steps
                .iter()
                .filter(|s| !s.conditions.all())
                .map(|s| format!("step {}: {:?}", s.i, s.conditions))
                .collect();
            format!(
                "schedule fails first at ({cond}) step {step}: r = {} vs sqrt(C~/C) = {:.3}; {}",
                run.schedule.r,
                (run.schedule.c_tilde / run.schedule.c).sqrt(),
                failing.join("; ")
            )
        }
    };
    Ok(Verdict::new(
        contraction && run.schedule.is_valid(),
        format!("|V_i+1|/|V_i|^2 = [{ratios}] (<= 10: {contraction}); {schedule}"),
    ))
}

fn drifts(field: &RigidBodyField, m0: [f64; 3], h: f64, duration: f64) -> Result<(f64, f64, bool)> {
    let mut tracker = ConservationTracker::new(field.inertia, &m0);
    integrate_observed(field, m0, 0.0, h, duration, usize::MAX, |t, m| {
        tracker.observe(t, m)
    })?;
    let rep = tracker.report();
    Ok((
        rep.rho_drift_max,
        rep.energy_drift_max,
        rep.in_band && rep.energy_min >= 2.0 / 3.0 - 1e-9 && rep.energy_max <= 2.0 + 1e-9,
    ))
}

fn dynamics_ground_truth() -> Result<Verdict> {
    let start = Instant::now();
    let fig1 = find("fig1")?.build(None)?;
    let field = RigidBodyField {
        inertia: fig1.inertia,
    };
    let (mut rho1, mut e1) = (0.0f64, 0.0f64);
    for k in 0..10 {
        let (r, e, _) = drifts(
            &field,
            uniform_on_sphere(&mut trial_rng(7, k), fig1.rho),
            fig1.h,
            fig1.duration,
        )?;
        rho1 = rho1.max(r);
        e1 = e1.max(e);
    }
    let fig2 = find("fig2")?.build(Some(1.0))?;
    let driven = RigidBodyField {
        inertia: fig2.inertia,
    };
    let (mut rho2, mut band) = (0.0f64, true);
    for k in 0..10 {
        let (r, _, ok) = drifts(
            &driven,
            uniform_on_sphere(&mut trial_rng(8, k), fig2.rho),
            fig2.h,
            fig2.duration,
        )?;
        rho2 = rho2.max(r);
        band &= ok;
    }
    let static_top = RigidBodyField {
        inertia: InertiaSpec::new([1.0, 2.0, 3.0])?,
    };
    let mut ratios = (0..20)
        .map(|k| {
            let m0 = uniform_on_sphere(&mut trial_rng(0, k), 2.0);
            Ok(drifts(&static_top, m0, 0.02, 10.0)?.0 / drifts(&static_top, m0, 0.01, 10.0)?.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[9] + ratios[10]);
    let elapsed = start.elapsed();
    let passed = rho1 <= 1e-8
        && e1 <= 1e-8
        && rho2 <= 1e-8
        && band
        && (12.0..=20.0).contains(&median)
        && elapsed < Duration::from_secs(60);
    Ok(Verdict::new(
        passed,
        format!(
            "fig1 rho drift {rho1:.1e}, energy drift {e1:.1e}; fig2(eps=1) rho drift {rho2:.1e}, in [2/3, 2]: {band}; \
             RK4 ratio median {median:.2} (range {:.2}-{:.2}, h 0.02 -> 0.01); {:.1}s",
            ratios[0],
            ratios[19],
            elapsed.as_secs_f64()
        ),
    ))
}

fn cross_representation() -> Result<Verdict> {
    let mut worst = 0.0f64;
    for eps in [1e-3, 0.1] {
        let scenario = find("pert1")?.build(Some(eps))?;
        let setup = scenario
            .normal_form
            .clone()
            .ok_or_else(|| Error::InvalidParameter("no setup".into()))?;
        let x0 = setup.algebra.x0;
        let reduced = ReducedField::from_inertia(&scenario.inertia, scenario.rho, x0, setup.trunc)?;
        for k in 0..4 {
            let (x, theta) = (-0.1 + 0.07 * k as f64, 1.3 * k as f64);
            let m0 = from_reduced(x0 + x, theta, scenario.rho)?;
            let cart = integrate(
                &RigidBodyField {
                    inertia: scenario.inertia,
                },
                m0,
                0.0,
                1e-3,
                10.0,
                10,
            )?;
            let red = integrate(&reduced, [x, theta], 0.0, 1e-3, 10.0, 10)?;
            for (m, y) in cart.states.iter().zip(&red.states) {
                let (big_x, th) = to_reduced(m, scenario.rho)?;
                let dth = (th - y[1] + PI).rem_euclid(TAU) - PI;
                worst = worst.max((big_x - x0 - y[0]).abs()).max(dth.abs());
            }
        }
    }
    Ok(Verdict::new(
        worst <= 1e-6,
        format!("max gap {worst:.2e} over T = 10, eps in {{1e-3, 0.1}} (limit 1e-6)"),
    ))
}

fn diophantine() -> Result<Verdict> {
    let rational = estimate_diophantine(3.0 / 7.0, 1.0, 50);
    let pair_ok = matches!(rational, Err(Error::Resonance { l: -3, m: 7 }));
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let gammas = (1..=50)
        .map(|k| Ok(estimate_diophantine(golden, 1.0, k)?.gamma))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = gammas.windows(2).all(|w| w[1] <= w[0]);
    let hat = gammas[49];
    Ok(Verdict::new(
        pair_ok && hat > 0.0 && monotone,
        format!("3/7 -> {rational:?}; golden gamma_hat(K=50) = {hat:.6}; non-increasing in K: {monotone}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Verdict>); 8] = [
        ("operator-identity suite", identity_suite),
        ("conjugacy of one normal-form step", conjugacy),
        (
            "quadratic smallness of the new perturbation",
            quadratic_smallness,
        ),
        ("analytic bound certification", bound_certification),
        ("KAM iteration at desk scale", kam_iteration),
        (
            "rigid-body conservation and RK4 order",
            dynamics_ground_truth,
        ),
        ("reduced vs cartesian integration", cross_representation),
        ("Diophantine lattice scan", diophantine),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run().unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        let status = if verdict.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {} {name}: {} ({:.2}s)",
            i + 1,
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
        failures += usize::from(!verdict.passed);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
