//! Named parameter sets: the free asymmetric top, the same top with a
//! throbbing second moment, and the symmetric top with a modulated moment
//! used by the normal-form commands.

use serde::Serialize;

use crate::dynamics::{modulation_series, InertiaSpec, ModulationEntry};
use crate::error::{Error, Result};
use crate::operators::AlgebraParams;
use crate::series::{Series, TruncationSpec};

/// Everything a command needs to run one preset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub name: &'static str,
    pub rho: f64,
    pub inertia: InertiaSpec,
    pub h: f64,
    #[serde(rename = "T")]
    pub duration: f64,
    /// Driving period, used as the section period.
    pub period: f64,
    pub eps: Option<f64>,
    #[serde(skip)]
    pub normal_form: Option<NormalFormSetup>,
}

/// The reduced problem: algebra parameters, truncation, V and the initial twist Q.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormSetup {
    pub algebra: AlgebraParams,
    pub trunc: TruncationSpec,
    pub perturbation: Series,
    pub twist: Series,
}

pub trait Preset: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn build(&self, eps: Option<f64>) -> Result<Scenario>;
}

/// −1/(4 + g) with g the golden-ratio conjugate: a noble frequency between −1/5 and −1/4.
pub fn noble_frequency() -> f64 {
    -1.0 / (4.0 + (5f64.sqrt() - 1.0) / 2.0)
}

const TAU: f64 = std::f64::consts::TAU;
const NO_MODULATION: ModulationEntry = ModulationEntry {
    amplitude: 0.0,
    frequency: 0.0,
    phase: 0.0,
};

struct StaticTop;

impl Preset for StaticTop {
    fn name(&self) -> &'static str {
        "fig1"
    }

    fn description(&self) -> &'static str {
        "free top, I = (1, 2, 3), rho = 2, h = 0.001, T = 100"
    }

    fn build(&self, eps: Option<f64>) -> Result<Scenario> {
        if eps.is_some_and(|e| e != 0.0) {
            return Err(Error::InvalidParameter(
                "fig1 has no perturbation; drop --eps".into(),
            ));
        }
        Ok(Scenario {
            name: self.name(),
            rho: 2.0,
            inertia: InertiaSpec::new([1.0, 2.0, 3.0])?,
            h: 1e-3,
            duration: 100.0,
            period: TAU,
            eps: None,
            normal_form: None,
        })
    }
}

struct ThrobbingTop;

impl Preset for ThrobbingTop {
    fn name(&self) -> &'static str {
        "fig2"
    }

    fn description(&self) -> &'static str {
        "I = (1, 2/(1 + 0.2 eps cos t), 3), rho = 2; eps is required"
    }

    fn build(&self, eps: Option<f64>) -> Result<Scenario> {
        let eps = eps.ok_or_else(|| Error::InvalidParameter("fig2 needs --eps".into()))?;
        // 1/I₂ = ½ + 0.1 ε cos t.
        let modulation = [
            NO_MODULATION,
            ModulationEntry::cosine(0.1 * eps, 1.0),
            NO_MODULATION,
        ];
        Ok(Scenario {
            name: self.name(),
            rho: 2.0,
            inertia: InertiaSpec::modulated([1.0, 2.0, 3.0], modulation)?,
            h: 1e-3,
            duration: 100.0,
            period: TAU,
            eps: Some(eps),
            normal_form: None,
        })
    }
}

struct SymmetricThrobbing;

impl SymmetricThrobbing {
    const DEFAULT_EPS: f64 = 1e-3;
}

impl Preset for SymmetricThrobbing {
    fn name(&self) -> &'static str {
        "pert1"
    }

    fn description(&self) -> &'static str {
        "symmetric top I = (2, 2, 3), rho = 2, 1/I2 + eps cos t, localized at a noble frequency; eps defaults to 1e-3"
    }

    fn build(&self, eps: Option<f64>) -> Result<Scenario> {
        let eps = eps.unwrap_or(Self::DEFAULT_EPS);
        let rho = 2.0;
        let modulation = [
            NO_MODULATION,
            ModulationEntry::cosine(eps, 1.0),
            NO_MODULATION,
        ];
        let inertia = InertiaSpec::modulated([2.0, 2.0, 3.0], modulation)?;
        let algebra = AlgebraParams::with_frequency(rho, 2.0, 3.0, noble_frequency())?;
        let trunc = TruncationSpec::new(6, 8, 8, 2)?;
        let perturbation = modulation_series(&algebra, &modulation, trunc)?;
        let twist = Series::constant(rho, trunc, algebra.twist())?;
        Ok(Scenario {
            name: self.name(),
            rho,
            inertia,
            h: 1e-3,
            duration: 10.0,
            period: TAU,
            eps: Some(eps),
            normal_form: Some(NormalFormSetup {
                algebra,
                trunc,
                perturbation,
                twist,
            }),
        })
    }
}

pub fn registry() -> Vec<Box<dyn Preset>> {
    vec![
        Box::new(StaticTop),
        Box::new(ThrobbingTop),
        Box::new(SymmetricThrobbing),
    ]
}

pub fn find(name: &str) -> Result<Box<dyn Preset>> {
    registry()
        .into_iter()
        .find(|p| p.name() == name)
        .ok_or_else(|| {
            let known: Vec<_> = registry().iter().map(|p| p.name()).collect();
            Error::InvalidParameter(format!(
                "unknown preset {name:?}; known: {}",
                known.join(", ")
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique_and_findable() {
        let names: Vec<_> = registry().iter().map(|p| p.name()).collect();
        assert_eq!(names, ["fig1", "fig2", "pert1"]);
        assert!(find("fig3").is_err());
    }

    #[test]
    fn fig2_requires_eps_and_maps_it_to_inverse_moment() {
        assert!(find("fig2").unwrap().build(None).is_err());
        let s = find("fig2").unwrap().build(Some(1.0)).unwrap();
        let inv = s.inertia.inverse_moments(0.0);
        assert!((inv[1] - 2.0 * (1.0 + 0.2) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn pert1_series_is_the_reduced_perturbation() {
        let s = find("pert1").unwrap().build(Some(2e-3)).unwrap();
        let nf = s.normal_form.unwrap();
        let x0 = nf.algebra.x0;
        assert!((nf.algebra.omega() - noble_frequency()).abs() < 1e-15);
        for &(x, th, t) in &[(0.05f64, 0.3f64, 1.1f64), (-0.1, 4.0, 2.2)] {
            let direct = 2e-3 * 2.0 * t.cos() * (1.0 - (x0 + x) * (x0 + x)) * th.sin().powi(2);
            assert!((nf.perturbation.evaluate(x, th, t).unwrap() - direct).abs() < 1e-16);
        }
        assert_eq!(nf.twist.coeff(0, 0, 0).re, nf.algebra.twist());
    }
}
