//! The symmetric top in (x, θ) with X = x₀ + x, optionally perturbed by a
//! time-periodic series V(x, θ, t).

use num_complex::Complex64;

use super::inertia::{InertiaSpec, ModulationEntry};
use super::integrate::VectorField;
use crate::error::{Error, Result};
use crate::operators::AlgebraParams;
use crate::series::{Series, TruncationSpec};

/// Nonzero coefficients kept as a flat list for repeated evaluation.
#[derive(Clone, Debug, PartialEq)]
struct SparseSeries {
    terms: Vec<(i32, i32, i32, Complex64)>,
}

impl SparseSeries {
    fn new(s: &Series) -> Self {
        Self {
            terms: s.terms().map(|(l, m, n, c)| (l, m, n as i32, c)).collect(),
        }
    }

    fn eval(&self, x: f64, theta: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(l, m, n, c)| {
                (c * Complex64::from_polar(x.powi(n), l as f64 * t + m as f64 * theta)).re
            })
            .sum()
    }
}

/// ẋ = −V_θ/ρ, θ̇ = ρΔ(x₀ + x) + V_x/ρ: the flow of `E + V` for the bracket
/// {F, G} = (F_x G_θ − F_θ G_x)/ρ.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedField {
    params: AlgebraParams,
    dx: Option<SparseSeries>,
    dtheta: Option<SparseSeries>,
}

impl ReducedField {
    pub fn new(params: AlgebraParams, perturbation: Option<&Series>) -> Result<Self> {
        params.validate()?;
        if let Some(v) = perturbation {
            if v.rho() != params.rho {
                return Err(Error::RhoMismatch(v.rho(), params.rho));
            }
        }
        Ok(Self {
            params,
            dx: perturbation.map(|v| SparseSeries::new(&v.dx())),
            dtheta: perturbation.map(|v| SparseSeries::new(&v.dtheta())),
        })
    }

    /// Builds the field of a symmetric inertia spec, expanding its modulation
    /// into a series.
    pub fn from_inertia(
        inertia: &InertiaSpec,
        rho: f64,
        x0: f64,
        trunc: TruncationSpec,
    ) -> Result<Self> {
        inertia.validate()?;
        if !inertia.is_symmetric() {
            return Err(Error::InvalidParameter(format!(
                "reduced field needs I1 = I2, got {:?}",
                inertia.moments
            )));
        }
        let params = AlgebraParams::new(rho, inertia.moments[0], inertia.moments[2], x0)?;
        match &inertia.modulation {
            Some(entries) => Self::new(params, Some(&modulation_series(&params, entries, trunc)?)),
            None => Self::new(params, None),
        }
    }

    pub fn params(&self) -> &AlgebraParams {
        &self.params
    }
}

impl VectorField<2> for ReducedField {
    fn eval(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        let (x, theta) = (y[0], y[1]);
        let rho = self.params.rho;
        let mut xdot = 0.0;
        let mut thdot = rho * self.params.delta() * (self.params.x0 + x);
        if let (Some(dx), Some(dth)) = (&self.dx, &self.dtheta) {
            xdot -= dth.eval(x, theta, t) / rho;
            thdot += dx.eval(x, theta, t) / rho;
        }
        [xdot, thdot]
    }
}

/// `V = ½ Σ A_ii(t) M_i²` in the chart, expanded around X = x₀:
/// M₁² = ρ²(1−X²)cos²θ, M₂² = ρ²(1−X²)sin²θ, M₃² = ρ²X².
/// Frequencies must be non-negative integers within the time truncation.
pub fn modulation_series(
    params: &AlgebraParams,
    entries: &[ModulationEntry; 3],
    trunc: TruncationSpec,
) -> Result<Series> {
    if trunc.n_x < 2 || trunc.l_theta < 2 {
        return Err(Error::InvalidParameter(
            "modulation series needs N_x >= 2 and L_theta >= 2".into(),
        ));
    }
    let (rho, x0) = (params.rho, params.x0);
    let half_rho2 = 0.5 * rho * rho;
    // (1 − X²) and X² as polynomials in x.
    let equator = [1.0 - x0 * x0, -2.0 * x0, -1.0];
    let axis = [x0 * x0, 2.0 * x0, 1.0];
    // cos²θ and sin²θ as (m, coefficient) lists.
    let cos2: [(i32, f64); 3] = [(0, 0.5), (2, 0.25), (-2, 0.25)];
    let sin2: [(i32, f64); 3] = [(0, 0.5), (2, -0.25), (-2, -0.25)];
    let one: [(i32, f64); 1] = [(0, 1.0)];
    let shapes: [(&[(i32, f64)], [f64; 3]); 3] = [(&cos2, equator), (&sin2, equator), (&one, axis)];

    let mut v = Series::zero(rho, trunc)?;
    for (entry, (angle, poly)) in entries.iter().zip(shapes) {
        if entry.amplitude == 0.0 {
            continue;
        }
        let nu = entry.frequency;
        if nu < 0.0 || nu.fract() != 0.0 || nu as usize > trunc.l_t {
            return Err(Error::InvalidParameter(format!(
                "modulation frequency {nu} must be a non-negative integer <= L_t = {}",
                trunc.l_t
            )));
        }
        let l = nu as i32;
        let time: Vec<(i32, Complex64)> = if l == 0 {
            vec![(0, Complex64::new(entry.phase.cos(), 0.0))]
        } else {
            vec![
                (l, Complex64::from_polar(0.5, entry.phase)),
                (-l, Complex64::from_polar(0.5, -entry.phase)),
            ]
        };
        for &(lt, ct) in &time {
            for &(m, cm) in angle {
                for (n, &cp) in poly.iter().enumerate() {
                    let c = ct * (entry.amplitude * half_rho2 * cm * cp);
                    v.set(lt, m, n, v.coeff(lt, m, n) + c)?;
                }
            }
        }
    }
    Ok(v.realized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::chart::from_reduced;

    fn params() -> AlgebraParams {
        AlgebraParams::new(2.0, 2.0, 3.0, 0.4).unwrap()
    }

    #[test]
    fn unperturbed_rotation() {
        let f = ReducedField::new(params(), None).unwrap();
        let [xd, thd] = f.eval(0.7, &[0.0, 1.0]);
        assert_eq!(xd, 0.0);
        assert!((thd - params().omega()).abs() < 1e-15);
    }

    #[test]
    fn modulation_series_matches_direct_energy() {
        let none = ModulationEntry::default();
        let entries = [
            ModulationEntry {
                amplitude: 0.05,
                frequency: 2.0,
                phase: 0.3,
            },
            ModulationEntry::cosine(0.1, 1.0),
            ModulationEntry {
                amplitude: 0.02,
                frequency: 0.0,
                phase: 0.0,
            },
        ];
        let trunc = TruncationSpec::new(3, 3, 3, 0).unwrap();
        let v = modulation_series(&params(), &entries, trunc).unwrap();
        assert!(v.is_real());
        for &(x, th, t) in &[(0.1, 0.4, 0.2), (-0.3, 2.5, 4.0), (0.0, 5.9, 1.3)] {
            let m = from_reduced(params().x0 + x, th, 2.0).unwrap();
            let direct: f64 = (0..3)
                .map(|i| 0.5 * entries[i].value(t) * m[i] * m[i])
                .sum();
            assert!((v.evaluate(x, th, t).unwrap() - direct).abs() < 1e-14);
        }
        let bad = [none, ModulationEntry::cosine(0.1, 0.5), none];
        assert!(modulation_series(&params(), &bad, trunc).is_err());
    }

    #[test]
    fn asymmetric_inertia_is_rejected() {
        let trunc = TruncationSpec::new(3, 3, 3, 0).unwrap();
        let spec = InertiaSpec::new([1.0, 2.0, 3.0]).unwrap();
        assert!(ReducedField::from_inertia(&spec, 2.0, 0.3, trunc).is_err());
    }
}
