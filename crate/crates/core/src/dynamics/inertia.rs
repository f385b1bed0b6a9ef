use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `A(t) = amplitude · cos(frequency · t + phase)` for one diagonal entry of
/// the inverse-inertia perturbation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationEntry {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl ModulationEntry {
    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }
}

/// Principal moments I₁, I₂, I₃ and an optional periodic modulation of the
/// inverse moments: the energy is `½ Σ (1/I_i + A_ii(t)) M_i²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaSpec {
    pub moments: [f64; 3],
    #[serde(default)]
    pub modulation: Option<[ModulationEntry; 3]>,
}

impl InertiaSpec {
    pub fn new(moments: [f64; 3]) -> Result<Self> {
        let spec = Self {
            moments,
            modulation: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn modulated(moments: [f64; 3], modulation: [ModulationEntry; 3]) -> Result<Self> {
        let spec = Self {
            moments,
            modulation: Some(modulation),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn static_part(&self) -> Self {
        Self {
            moments: self.moments,
            modulation: None,
        }
    }

    /// Moments must be positive, and each modulated inverse moment
    /// `1/I_i − |amplitude_i|` must stay positive for all t.
    pub fn validate(&self) -> Result<()> {
        if !self.moments.iter().all(|i| i.is_finite() && *i > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "moments of inertia must be positive, got {:?}",
                self.moments
            )));
        }
        if let Some(entries) = &self.modulation {
            for (k, (e, i)) in entries.iter().zip(&self.moments).enumerate() {
                if ![e.amplitude, e.frequency, e.phase]
                    .iter()
                    .all(|v| v.is_finite())
                {
                    return Err(Error::InvalidParameter(format!(
                        "modulation entry {} is not finite",
                        k + 1
                    )));
                }
                if 1.0 / i - e.amplitude.abs() <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "modulated inverse moment 1/I{} = {} with amplitude {} reaches zero",
                        k + 1,
                        1.0 / i,
                        e.amplitude
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.moments[0] == self.moments[1]
    }

    /// Diagonal of 𝖫 + 𝖠(t).
    pub fn inverse_moments(&self, t: f64) -> [f64; 3] {
        let mut out = self.moments.map(|i| 1.0 / i);
        if let Some(entries) = &self.modulation {
            for (o, e) in out.iter_mut().zip(entries) {
                *o += e.value(t);
            }
        }
        out
    }

    pub fn energy(&self, m: &[f64; 3], t: f64) -> f64 {
        let inv = self.inverse_moments(t);
        0.5 * (inv[0] * m[0] * m[0] + inv[1] * m[1] * m[1] + inv[2] * m[2] * m[2])
    }

    /// `[ρ²/(2 I_max), ρ²/(2 I_min)]` for the static moments.
    pub fn energy_band(&self, rho: f64) -> (f64, f64) {
        let hi = self.moments.iter().cloned().fold(f64::MIN, f64::max);
        let lo = self.moments.iter().cloned().fold(f64::MAX, f64::min);
        (rho * rho / (2.0 * hi), rho * rho / (2.0 * lo))
    }
}
