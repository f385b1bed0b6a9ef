//! Operators of the symmetric-top normal form: projectors, the small-divisor
//! pseudo-inverse, the twist functional, the correction term and the
//! generator of the conjugating flow.

mod diophantine;
mod projectors;
mod top;

pub use diophantine::{estimate_diophantine, DiophantineEstimate, RESONANCE_EPS};
pub use projectors::{
    average, fluctuation, n_static, project_degree, project_degree_ge, project_degree_le, r_static,
};
pub use top::{g_s, DivisorPolicy, Generator, TopOperators};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moments of the symmetric top, the Casimir ρ and the localization point x₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraParams {
    pub rho: f64,
    #[serde(rename = "I_perp")]
    pub i_perp: f64,
    #[serde(rename = "I_3")]
    pub i_3: f64,
    pub x0: f64,
}

impl AlgebraParams {
    pub fn new(rho: f64, i_perp: f64, i_3: f64, x0: f64) -> Result<Self> {
        let p = Self {
            rho,
            i_perp,
            i_3,
            x0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Chooses x₀ so that the torus frequency `ρ Δ x₀` equals `omega`.
    pub fn with_frequency(rho: f64, i_perp: f64, i_3: f64, omega: f64) -> Result<Self> {
        let delta = 1.0 / i_3 - 1.0 / i_perp;
        if delta == 0.0 {
            return Err(Error::InvalidParameter(
                "spherical top has no twist (Delta = 0)".into(),
            ));
        }
        Self::new(rho, i_perp, i_3, omega / (rho * delta))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rho > 0.0
            && self.i_perp > 0.0
            && self.i_3 > 0.0
            && self.x0.abs() < 1.0
            && [self.rho, self.i_perp, self.i_3, self.x0]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "need rho, I_perp, I_3 > 0 and |x0| < 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Δ = 1/I₃ − 1/I⊥.
    pub fn delta(&self) -> f64 {
        1.0 / self.i_3 - 1.0 / self.i_perp
    }

    /// ω = ρ Δ x₀.
    pub fn omega(&self) -> f64 {
        self.rho * self.delta() * self.x0
    }

    /// Second x-derivative of the unperturbed energy, ρ²Δ.
    pub fn twist(&self) -> f64 {
        self.rho * self.rho * self.delta()
    }

    /// Energy band `[ρ²/(2 I_max), ρ²/(2 I_min)]`.
    pub fn energy_band(&self) -> (f64, f64) {
        let rho2 = self.rho * self.rho;
        let (lo, hi) = (self.i_perp.min(self.i_3), self.i_perp.max(self.i_3));
        (rho2 / (2.0 * hi), rho2 / (2.0 * lo))
    }
}

/// Arithmetic (γ, τ) and non-degeneracy (q) constants, plus the lattice
/// radius used to estimate γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub tau: f64,
    pub q: f64,
    pub k_scan: usize,
}

impl DiophantineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0
            && self.tau >= 1.0
            && self.q > 0.0
            && self.q < 1.0
            && self.k_scan >= 1)
        {
            return Err(Error::InvalidParameter(format!(
                "need gamma > 0, tau >= 1, 0 < q < 1, k_scan >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}
