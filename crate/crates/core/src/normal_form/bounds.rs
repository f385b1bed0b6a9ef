//! Closed-form constants for the bounded-with-loss estimates of Γ, 𝒩 and ℛ,
//! and their numerical certification on concrete series.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{estimate_diophantine, AlgebraParams, DiophantineParams, TopOperators};
use crate::series::{CauchyMargin, Series, TruncationSpec};

/// Constants for one choice of (r, d, δ). `lambda` and `xi` re-evaluate the
/// d- and δ-dependent parts, so they may be queried at other losses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub rho: f64,
    pub x0: f64,
    pub delta_inertia: f64,
    pub gamma: f64,
    pub tau: f64,
    pub q: f64,
    pub r: f64,
    pub d: f64,
    pub delta: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
}

struct Parts {
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
    c: f64,
}

impl BoundConstants {
    pub fn compute(
        params: &AlgebraParams,
        dio: &DiophantineParams,
        r: f64,
        d: f64,
        delta: f64,
    ) -> Result<Self> {
        params.validate()?;
        dio.validate()?;
        if !(d > 0.0 && delta > 0.0 && d + delta < r && r <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need d, delta > 0, d + delta < r <= 1 (d={d}, delta={delta}, r={r})"
            )));
        }
        let mut out = Self {
            rho: params.rho,
            x0: params.x0,
            delta_inertia: params.delta(),
            gamma: dio.gamma,
            tau: dio.tau,
            q: dio.q,
            r,
            d,
            delta,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            c4: 0.0,
            c: 0.0,
            c_tilde: 0.0,
        };
        let p = out.parts(d + delta);
        out.c1 = p.c1;
        out.c2 = p.c2;
        out.c3 = p.c3;
        out.c4 = p.c4;
        out.c = p.c;
        out.c_tilde = out.c_tilde_at(delta);
        Ok(out)
    }

    fn c2_at(&self, loss: f64) -> f64 {
        let (t, g, q) = (self.tau, self.gamma, self.q);
        q * loss.powf(t) + (t + 1.0).powf(t + 1.0) / (g * E.powf(t + 1.0))
    }

    /// C₁–C₄ and C with total loss `s = d + δ`.
    fn parts(&self, s: f64) -> Parts {
        let (t, g, q, rho, r) = (self.tau, self.gamma, self.q, self.rho, self.r);
        let et1 = E.powf(t + 1.0);
        let c1 = (t.powf(t) + (t + 1.0).powf(t + 1.0)) / (g * rho * et1);
        let c2 = self.c2_at(s);
        let c3 = c2 / (rho * g) * (t.powf(t) * s / et1 + r * ((t + 1.0) / E).powf(t + 1.0));
        let two_t1 = 2.0 * (t + 1.0);
        let c4 = ((2.0 * t).powf(t) * (two_t1 / E).powf(t + 1.0)
            + r * two_t1.powf(t + 1.0) * (two_t1 / E).powf(t + 1.0) / s)
            / (rho * g * g * et1);
        let c = (c1 * q.powi(3) + c2 * q) * s.powf(t + 1.0) + c3 + s * q * q * c4;
        Parts { c1, c2, c3, c4, c }
    }

    /// Bound on ‖𝒦W‖_{r−μ} / ‖W‖_r.
    pub fn k_tilde(&self, mu: f64) -> f64 {
        let (t, g, q, rho, r) = (self.tau, self.gamma, self.q, self.rho, self.r);
        let c2 = self.c2_at(mu);
        let shift =
            rho * rho * (self.x0 * self.delta_inertia).abs() * c2 / (q * q * mu.powf(t + 1.0));
        let a = 2.0 * t / (E * mu);
        let t1 = a.powf(t + 1.0) / g;
        let t2 = c2 / (g * q.powi(3) * mu.powf(t + 1.0)) * a.powf(t);
        let t3 =
            (4.0 * t / (E * mu)).powf(t) * (4.0 * (t + 1.0) / (E * mu)).powf(t + 1.0) / (g * g * q);
        let bracket = 4.0 / (rho * E * mu * mu) * (r * r / (2.0 * q)) * (t1 + t2 + t3);
        shift + bracket
    }

    pub fn c_tilde_at(&self, delta: f64) -> f64 {
        self.q.powi(3) * delta.powf(2.0 * self.tau + 3.0) * (1.0 + self.k_tilde(delta))
    }

    /// C evaluated at another total loss d + δ.
    pub fn c_at(&self, d: f64, delta: f64) -> f64 {
        self.parts(d + delta).c
    }

    /// Λ(d, δ) = C / (q³ d (d+δ)^{2τ+2}).
    pub fn lambda(&self, d: f64, delta: f64) -> f64 {
        let s = d + delta;
        self.c_at(d, delta) / (self.q.powi(3) * d * s.powf(2.0 * self.tau + 2.0))
    }

    /// Ξ(δ) = C̃ / (q³ δ^{2τ+3}).
    pub fn xi(&self, delta: f64) -> f64 {
        self.c_tilde_at(delta) / (self.q.powi(3) * delta.powf(2.0 * self.tau + 3.0))
    }

    /// ε_μ = q³ μ^{2τ+3} / (2C).
    pub fn epsilon_mu(&self, mu: f64) -> f64 {
        self.q.powi(3) * mu.powf(2.0 * self.tau + 3.0) / (2.0 * self.c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub constants: BoundConstants,
    /// Lattice estimate the γ hypothesis was checked against.
    pub gamma_hat: f64,
    pub gamma_term: CauchyMargin,
    pub n_term: CauchyMargin,
    pub r_term: CauchyMargin,
}

impl BoundReport {
    pub fn all_nonnegative(&self) -> bool {
        [self.gamma_term, self.n_term, self.r_term]
            .iter()
            .all(|m| m.margin >= 0.0)
    }

    pub fn min_margin(&self) -> f64 {
        self.gamma_term
            .margin
            .min(self.n_term.margin)
            .min(self.r_term.margin)
    }
}

fn margin(measured: f64, bound: f64) -> CauchyMargin {
    CauchyMargin {
        measured,
        bound,
        margin: bound - measured,
    }
}

/// Largest |l|, |m| and n carrying a nonzero coefficient.
fn support(s: &Series) -> (usize, usize, usize) {
    s.terms().fold((0, 0, 0), |(a, b, c), (l, m, n, _)| {
        (
            a.max(l.unsigned_abs() as usize),
            b.max(m.unsigned_abs() as usize),
            c.max(n),
        )
    })
}

/// Measures ‖(ΓW)Z‖_{r−δ−d}, ‖𝒩W‖_{r−δ} and ‖ℛW‖_{r−δ} against
/// Λ(d, δ)‖W‖_r‖Z‖_{r−δ} and Ξ(δ)‖W‖_r. The inputs are re-embedded in a box
/// large enough that nothing is truncated, and the three hypotheses
/// (γ below the lattice estimate, |Q₀₀| ≥ q, ‖Q‖_r ≤ 1/q) are checked first.
#[allow(clippy::too_many_arguments)]
pub fn certify_bounds(
    w: &Series,
    z: &Series,
    q: &Series,
    params: &AlgebraParams,
    dio: &DiophantineParams,
    r: f64,
    d: f64,
    delta: f64,
) -> Result<BoundReport> {
    let constants = BoundConstants::compute(params, dio, r, d, delta)?;
    let (wl, wm, wn) = support(w);
    let (zl, zm, zn) = support(z);
    let (ql, qm, qn) = support(q);
    if qn > 0 {
        return Err(Error::Hypothesis {
            which: "twist",
            detail: "Q must not depend on x".into(),
        });
    }
    let l_t = (2 * wl + 2 * ql + zl).max(1);
    let l_theta = (2 * wm + 2 * qm + zm).max(1);
    let wide = TruncationSpec::new(wn + zn + 2, l_theta, l_t, 0)?;

    let k = dio.k_scan.max(l_t + l_theta);
    let gamma_hat = estimate_diophantine(params.omega(), dio.tau, k)?.gamma;
    if dio.gamma > gamma_hat {
        return Err(Error::Hypothesis {
            which: "diophantine",
            detail: format!(
                "gamma {} exceeds lattice estimate {gamma_hat} (K = {k})",
                dio.gamma
            ),
        });
    }
    let q00 = q.coeff(0, 0, 0).re;
    if q00.abs() < dio.q {
        return Err(Error::Hypothesis {
            which: "twist",
            detail: format!("|Q00| = {} < q = {}", q00.abs(), dio.q),
        });
    }
    let q_norm = q.majorant(r);
    if q_norm > 1.0 / dio.q {
        return Err(Error::Hypothesis {
            which: "twist_norm",
            detail: format!("||Q||_r = {q_norm} > 1/q = {}", 1.0 / dio.q),
        });
    }

    let (w, z) = (w.resized(wide), z.resized(wide));
    let ops = TopOperators::new(*params, q.resized(wide), dio.q)?;
    let w_norm = w.majorant(r);
    let gz = ops.gamma_apply(&w, &z)?;
    let gamma_term = margin(
        gz.majorant(r - delta - d),
        constants.lambda(d, delta) * w_norm * z.majorant(r - delta),
    );
    let xi = constants.xi(delta);
    let n_term = margin(ops.n_proj(&w)?.majorant(r - delta), xi * w_norm);
    let r_term = margin(ops.r_proj(&w)?.majorant(r - delta), xi * w_norm);
    Ok(BoundReport {
        constants,
        gamma_hat,
        gamma_term,
        n_term,
        r_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_series, random_twist, trial_rng, SeriesShape};

    fn params() -> AlgebraParams {
        AlgebraParams::with_frequency(2.0, 2.0, 3.0, -1.0 / (4.0 + (5f64.sqrt() - 1.0) / 2.0))
            .unwrap()
    }

    fn dio(gamma: f64) -> DiophantineParams {
        DiophantineParams {
            gamma,
            tau: 1.0,
            q: 0.5,
            k_scan: 20,
        }
    }

    #[test]
    fn c1_matches_closed_form() {
        let p = AlgebraParams::new(2.0, 2.0, 3.0, 0.3).unwrap();
        let k = BoundConstants::compute(&p, &dio(0.1), 0.5, 0.1, 0.1).unwrap();
        assert!((k.c1 - 5.0 / (0.2 * E * E)).abs() < 1e-12);
        assert!(
            k.c1 > 0.0 && k.c2 > 0.0 && k.c3 > 0.0 && k.c4 > 0.0 && k.c > 0.0 && k.c_tilde > 0.0
        );
    }

    #[test]
    fn epsilon_mu_uses_c() {
        let k = BoundConstants::compute(&params(), &dio(0.1), 0.5, 0.1, 0.1).unwrap();
        assert!((k.epsilon_mu(0.1) - 0.125 * 1e-5 / (2.0 * k.c)).abs() < 1e-22);
        assert!((k.lambda(0.1, 0.1) - k.c / (0.125 * 0.1 * 0.2f64.powi(4))).abs() < 1e-9 * k.c);
    }

    #[test]
    fn c_decreases_in_gamma_and_grows_as_loss_shrinks() {
        let gammas = [0.01, 0.02, 0.05, 0.1, 0.2];
        let cs: Vec<f64> = gammas
            .iter()
            .map(|&g| {
                BoundConstants::compute(&params(), &dio(g), 0.5, 0.1, 0.1)
                    .unwrap()
                    .c
            })
            .collect();
        assert!(cs.windows(2).all(|w| w[1] < w[0]));
        let k = BoundConstants::compute(&params(), &dio(0.05), 0.5, 0.1, 0.1).unwrap();
        let lambdas: Vec<f64> = [0.2, 0.1, 0.05, 0.02]
            .iter()
            .map(|&s| k.lambda(s / 2.0, s / 2.0))
            .collect();
        assert!(lambdas.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_losses() {
        assert!(BoundConstants::compute(&params(), &dio(0.1), 0.5, 0.3, 0.3).is_err());
        assert!(BoundConstants::compute(&params(), &dio(0.1), 0.5, 0.0, 0.1).is_err());
    }

    #[test]
    fn zero_w_has_zero_measurements() {
        let trunc = TruncationSpec::new(2, 2, 2, 0).unwrap();
        let q = Series::constant(2.0, trunc, -0.6).unwrap();
        let w = Series::zero(2.0, trunc).unwrap();
        let z = Series::monomial(2.0, trunc, 0, 1, 1, 1.0.into()).unwrap();
        let rep = certify_bounds(&w, &z, &q, &params(), &dio(0.01), 0.5, 0.1, 0.1).unwrap();
        assert_eq!(rep.gamma_term.measured, 0.0);
        assert_eq!(rep.n_term.measured, 0.0);
        assert_eq!(rep.gamma_term.margin, rep.gamma_term.bound);
        assert!(rep.all_nonnegative());
    }

    #[test]
    fn hypotheses_are_enforced() {
        let trunc = TruncationSpec::new(2, 2, 2, 0).unwrap();
        let w = Series::monomial(2.0, trunc, 1, 0, 0, 1.0.into())
            .unwrap()
            .realized();
        let weak = Series::constant(2.0, trunc, -0.2).unwrap();
        assert!(matches!(
            certify_bounds(&w, &w, &weak, &params(), &dio(0.01), 0.5, 0.1, 0.1),
            Err(Error::Hypothesis { which: "twist", .. })
        ));
        let q = Series::constant(2.0, trunc, -0.6).unwrap();
        assert!(matches!(
            certify_bounds(&w, &w, &q, &params(), &dio(10.0), 0.5, 0.1, 0.1),
            Err(Error::Hypothesis {
                which: "diophantine",
                ..
            })
        ));
    }

    #[test]
    fn random_triples_respect_bounds_over_loss_sweep() {
        let trunc = TruncationSpec::new(2, 2, 2, 0).unwrap();
        let shape = SeriesShape::low(2, 2, 1.0);
        let r = 0.5;
        for trial in 0..10 {
            let mut rng = trial_rng(11, trial);
            let w = random_series(&mut rng, 2.0, trunc, &shape).unwrap();
            let z = random_series(&mut rng, 2.0, trunc, &shape).unwrap();
            let q = random_twist(&mut rng, 2.0, trunc, -0.7, 1, 0.5, r).unwrap();
            let mut last = f64::INFINITY;
            for frac in [0.2, 0.1, 0.05] {
                let d = frac * r;
                let rep = certify_bounds(&w, &z, &q, &params(), &dio(0.05), r, d, d).unwrap();
                assert!(rep.all_nonnegative(), "trial {trial}: {rep:?}");
                last = last.min(rep.min_margin());
            }
            assert!(last >= 0.0);
        }
    }
}
