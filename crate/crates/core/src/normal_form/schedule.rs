//! The (ε_i, μ_i, q_i, r_i) sequences of the KAM iteration and the six
//! conditions they must satisfy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the equality ε_i = q_i³ μ_i^{2τ+3} / (2C).
const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub e: bool,
    pub f: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c && self.d && self.e && self.f
    }

    fn first_failure(&self) -> Option<&'static str> {
        [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
        ]
        .into_iter()
        .find(|(_, ok)| !ok)
        .map(|(name, _)| name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub i: usize,
    pub eps: f64,
    pub mu: f64,
    pub q: f64,
    pub r: f64,
    pub conditions: Conditions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub eps0: f64,
    pub eps0_bound: f64,
    pub q0: f64,
    pub q_inf: f64,
    pub tau: f64,
    pub c: f64,
    pub c_tilde: f64,
    pub r: f64,
    /// r minus every emitted μ_i.
    pub r_remaining: f64,
    /// (π²/6)(2Cε₀/q_∞³)^{1/(2τ+3)}.
    pub mu_sum_bound: f64,
    pub preconditions: Preconditions,
    pub steps: Vec<ScheduleStep>,
}

/// q_∞ = q₀ 2^{−π²/3}.
pub fn q_floor(q0: f64) -> f64 {
    q0 * 2f64.powf(-PI * PI / 3.0)
}

/// Largest admissible ε₀: (q₀³/C)(r/π²)^{2τ+3} 2^{(4+2τ−π²)(2τ+3)/(1−π²)}.
pub fn eps0_bound(q0: f64, tau: f64, c: f64, r: f64) -> f64 {
    let p = 2.0 * tau + 3.0;
    let pi2 = PI * PI;
    q0.powi(3) / c * (r / pi2).powf(p) * 2f64.powf((4.0 + 2.0 * tau - pi2) * p / (1.0 - pi2))
}

/// Whether ε₀ and r meet the two preconditions derived from (a)–(f).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preconditions {
    /// ε₀ at or below [`eps0_bound`].
    pub eps0: bool,
    /// r ≥ √(C̃/C).
    pub r: bool,
}

impl Schedule {
    /// First violated precondition or condition, as (name, step).
    pub fn first_failure(&self) -> Option<(&'static str, usize)> {
        if !self.preconditions.eps0 {
            return Some(("eps0", 0));
        }
        if !self.preconditions.r {
            return Some(("r", 0));
        }
        self.steps
            .iter()
            .find_map(|s| s.conditions.first_failure().map(|c| (c, s.i)))
    }

    pub fn is_valid(&self) -> bool {
        self.first_failure().is_none()
    }

    /// The first failure as an [`Error::Schedule`].
    pub fn check(&self) -> Result<()> {
        let Some((condition, step)) = self.first_failure() else {
            return Ok(());
        };
        let detail = match condition {
            "eps0" => format!("eps0 = {:e} exceeds {:e}", self.eps0, self.eps0_bound),
            "r" => format!(
                "r = {} below sqrt(C_tilde/C) = {}",
                self.r,
                (self.c_tilde / self.c).sqrt()
            ),
            _ => {
                let s = &self.steps[step];
                format!(
                    "eps={:e} mu={:e} q={} r_i={} C_tilde/(C r_i^2)={}",
                    s.eps,
                    s.mu,
                    s.q,
                    s.r,
                    self.c_tilde / (self.c * s.r * s.r)
                )
            }
        };
        Err(Error::Schedule {
            condition,
            step,
            detail,
        })
    }
}

/// Emits `max_steps` steps and records (a)–(f) on each, without stopping at
/// a violation. Fails only on inputs outside the parameter ranges.
pub fn evaluate_schedule(
    eps0: f64,
    q0: f64,
    tau: f64,
    c: f64,
    c_tilde: f64,
    r: f64,
    max_steps: usize,
) -> Result<Schedule> {
    if !(eps0 > 0.0 && q0 > 0.0 && q0 < 1.0 && tau >= 1.0 && c > 0.0 && c_tilde > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need eps0, C, C_tilde, r > 0, tau >= 1, 0 < q0 < 1 (eps0={eps0}, q0={q0}, tau={tau}, C={c}, C_tilde={c_tilde}, r={r})"
        )));
    }
    let bound = eps0_bound(q0, tau, c, r);
    let preconditions = Preconditions {
        eps0: eps0 <= bound,
        r: r >= (c_tilde / c).sqrt(),
    };
    let p = 2.0 * tau + 3.0;
    let q_inf = q_floor(q0);
    let mu_sum_bound = PI * PI / 6.0 * (2.0 * c * eps0 / q_inf.powi(3)).powf(1.0 / p);
    let mut steps = Vec::with_capacity(max_steps);
    let (mut q, mut r_i, mut mu_sum, mut prev_eps) = (q0, r, 0.0, f64::INFINITY);
    for i in 0..max_steps {
        if i > 0 {
            q *= 1.0 - 1.0 / ((i + 1) as f64).powi(2);
        }
        let k = (i + 1) as f64;
        let eps = eps0 / k.powf(2.0 * p);
        let mu = (2.0 * c * eps0 / q.powi(3)).powf(1.0 / p) / (k * k);
        let from_mu = q.powi(3) * mu.powf(p) / (2.0 * c);
        mu_sum += mu;
        let conditions = Conditions {
            a: (eps - from_mu).abs() <= IDENTITY_TOL * eps,
            b: q >= c_tilde / (c * r_i * r_i),
            c: mu > 0.0 && mu < r_i / 3.0,
            d: mu_sum < r && mu_sum <= mu_sum_bound,
            e: eps > 0.0 && eps < prev_eps,
            f: q_inf < q && q < 1.0,
        };
        steps.push(ScheduleStep {
            i,
            eps,
            mu,
            q,
            r: r_i,
            conditions,
        });
        r_i -= mu;
        prev_eps = eps;
    }
    Ok(Schedule {
        eps0,
        eps0_bound: bound,
        q0,
        q_inf,
        tau,
        c,
        c_tilde,
        r,
        r_remaining: r_i,
        mu_sum_bound,
        preconditions,
        steps,
    })
}

/// [`evaluate_schedule`], failing with the first violated precondition or
/// condition and its step.
pub fn schedule_sequences(
    eps0: f64,
    q0: f64,
    tau: f64,
    c: f64,
    c_tilde: f64,
    r: f64,
    max_steps: usize,
) -> Result<Schedule> {
    let schedule = evaluate_schedule(eps0, q0, tau, c, c_tilde, r, max_steps)?;
    schedule.check()?;
    Ok(schedule)
}
