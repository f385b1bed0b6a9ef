//! Repeated conjugation steps driven by the (ε_i, μ_i, q_i, r_i) schedule.

use serde::{Deserialize, Serialize};

use super::bounds::BoundConstants;
use super::lie::{compute_v_star, LieSeriesConfig};
use super::schedule::{eps0_bound, evaluate_schedule, Conditions, Schedule};
use crate::error::{Error, Result};
use crate::operators::{
    estimate_diophantine, AlgebraParams, DiophantineEstimate, DiophantineParams, TopOperators,
};
use crate::series::Series;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KamConfig {
    /// Initial analyticity index r₀.
    pub r: f64,
    pub steps: usize,
    /// Losses d = δ = `loss_fraction · r` for the bound constants.
    pub loss_fraction: f64,
    /// ε₀ handed to the schedule, as a fraction of the largest admissible value.
    pub eps0_fraction: f64,
    pub lie: LieSeriesConfig,
}

impl Default for KamConfig {
    fn default() -> Self {
        Self {
            r: 0.5,
            steps: 3,
            loss_fraction: 0.25,
            eps0_fraction: 0.5,
            lie: LieSeriesConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationState {
    pub i: usize,
    pub v: Series,
    pub q: Series,
    pub r_i: f64,
    pub eps_i: f64,
    pub mu_i: f64,
    pub q_i: f64,
    /// ‖V_i‖ at r_i.
    pub measured_norm: f64,
    /// ‖V_{i+1}‖ at r_{i+1}.
    pub next_norm: f64,
    /// ‖V_{i+1}‖ / ‖V_i‖², absent when V_i = 0.
    pub contraction_ratio: Option<f64>,
    pub tail_norm: f64,
    pub series_terms: usize,
    pub conditions: Conditions,
    /// ℛV_i, folded into the unperturbed part by this step.
    pub absorbed: Series,
}

/// One row of the exported ledger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub i: usize,
    pub r_i: f64,
    pub eps_i: f64,
    pub mu_i: f64,
    pub q_i: f64,
    pub q00: f64,
    pub measured_norm: f64,
    pub next_norm: f64,
    pub contraction_ratio: Option<f64>,
    pub tail_norm: f64,
    pub series_terms: usize,
    pub conditions: Conditions,
}

impl IterationState {
    pub fn ledger_entry(&self) -> LedgerEntry {
        LedgerEntry {
            i: self.i,
            r_i: self.r_i,
            eps_i: self.eps_i,
            mu_i: self.mu_i,
            q_i: self.q_i,
            q00: self.q.coeff(0, 0, 0).re,
            measured_norm: self.measured_norm,
            next_norm: self.next_norm,
            contraction_ratio: self.contraction_ratio,
            tail_norm: self.tail_norm,
            series_terms: self.series_terms,
            conditions: self.conditions,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KamRun {
    pub constants: BoundConstants,
    pub diophantine: DiophantineEstimate,
    pub schedule: Schedule,
    pub states: Vec<IterationState>,
    pub final_v: Series,
    pub final_q: Series,
}

impl KamRun {
    pub fn ledger(&self) -> Vec<LedgerEntry> {
        self.states
            .iter()
            .map(IterationState::ledger_entry)
            .collect()
    }

    /// Every step contracted quadratically within `factor`: ‖V_{i+1}‖ ≤ factor·‖V_i‖².
    pub fn quadratic_within(&self, factor: f64) -> bool {
        self.states
            .iter()
            .all(|s| s.contraction_ratio.map_or(true, |c| c <= factor))
    }

    /// Σ_j ℛV_j over the steps taken: the accumulated normal-form correction.
    pub fn absorbed_total(&self) -> Result<Series> {
        let mut total = Series::zero(self.final_v.rho(), self.final_v.trunc())?;
        for s in &self.states {
            total = total.add(&s.absorbed)?;
        }
        Ok(total)
    }
}

/// Runs `cfg.steps` conjugation steps on ℋ₀ + {V₀} with twist Q₀.
///
/// The schedule is built from the bound constants at (r, d = δ = loss_fraction·r)
/// and an admissible ε₀. Its conditions are recorded per step rather than
/// enforced; [`KamRun::schedule`] says whether they held. Each step re-checks
/// |Q_i₀₀| ≥ q_i and ‖Q_i‖_{r_i} ≤ 1/q_i and fails if the measured norm grows.
pub fn kam_iterate(
    v0: &Series,
    q0: &Series,
    params: &AlgebraParams,
    dio: &DiophantineParams,
    cfg: &KamConfig,
) -> Result<KamRun> {
    if !(cfg.loss_fraction > 0.0
        && cfg.loss_fraction < 0.5
        && cfg.eps0_fraction > 0.0
        && cfg.eps0_fraction <= 1.0)
    {
        return Err(Error::InvalidParameter(format!(
            "need 0 < loss_fraction < 0.5 and 0 < eps0_fraction <= 1, got {} and {}",
            cfg.loss_fraction, cfg.eps0_fraction
        )));
    }
    let loss = cfg.loss_fraction * cfg.r;
    let constants = BoundConstants::compute(params, dio, cfg.r, loss, loss)?;
    let trunc = v0.trunc();
    let k = dio.k_scan.max(trunc.l_t + trunc.l_theta);
    let diophantine = estimate_diophantine(params.omega(), dio.tau, k)?;
    if dio.gamma > diophantine.gamma {
        return Err(Error::Hypothesis {
            which: "diophantine",
            detail: format!(
                "gamma {} exceeds lattice estimate {} (K = {k})",
                dio.gamma, diophantine.gamma
            ),
        });
    }
    let eps0 = cfg.eps0_fraction * eps0_bound(dio.q, dio.tau, constants.c, cfg.r);
    let schedule = evaluate_schedule(
        eps0,
        dio.q,
        dio.tau,
        constants.c,
        constants.c_tilde,
        cfg.r,
        cfg.steps + 1,
    )?;
    if let Err(e) = schedule.check() {
        log::warn!("schedule: {e}");
    }

    let mut v = v0.clone();
    let mut q = q0.clone();
    let mut states = Vec::with_capacity(cfg.steps);
    for i in 0..cfg.steps {
        let step = schedule.steps[i];
        let next_r = schedule.steps[i + 1].r;
        let q00 = q.coeff(0, 0, 0).re;
        if q00.abs() < step.q {
            return Err(Error::Hypothesis {
                which: "twist",
                detail: format!("step {i}: |Q00| = {} < q_i = {}", q00.abs(), step.q),
            });
        }
        let q_norm = q.majorant(step.r);
        if q_norm > 1.0 / step.q {
            return Err(Error::Hypothesis {
                which: "twist_norm",
                detail: format!("step {i}: ||Q||_r = {q_norm} > 1/q_i = {}", 1.0 / step.q),
            });
        }
        let ops = TopOperators::new(*params, q.clone(), step.q)?;
        let measured = v.majorant(step.r);
        if measured > constants.epsilon_mu(step.mu) {
            log::warn!(
                "step {i}: ||V|| = {measured:e} exceeds eps_mu = {:e}",
                constants.epsilon_mu(step.mu)
            );
        }
        let lie = LieSeriesConfig {
            r: step.r,
            ..cfg.lie
        };
        let out = compute_v_star(&v, &ops, &lie)?;
        let next_v = out.v_star.resized(trunc);
        let next_norm = next_v.majorant(next_r);
        if next_norm > measured {
            return Err(Error::Contraction {
                step: i,
                current: measured,
                next: next_norm,
            });
        }
        let contraction_ratio = (measured > 0.0).then(|| next_norm / (measured * measured));
        states.push(IterationState {
            i,
            v: v.clone(),
            q: q.clone(),
            r_i: step.r,
            eps_i: step.eps,
            mu_i: step.mu,
            q_i: step.q,
            measured_norm: measured,
            next_norm,
            contraction_ratio,
            tail_norm: out.tail_norm,
            series_terms: out.series_terms_used,
            conditions: step.conditions,
            absorbed: out.rv,
        });
        v = next_v;
        q = out.q_star.resized(q0.trunc());
    }
    Ok(KamRun {
        constants,
        diophantine,
        schedule,
        states,
        final_v: v,
        final_q: q,
    })
}
