//! Weighted analytic norms and the Cauchy estimates they satisfy.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Series;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Majorant,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub r: f64,
    pub value: f64,
    pub kind: NormKind,
}

/// Geometry of the norm scale: the x-weight at index r is `half_width + r`,
/// and r may not exceed `max_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormScale {
    pub half_width: f64,
    pub max_r: f64,
}

impl Default for NormScale {
    fn default() -> Self {
        Self {
            half_width: 0.0,
            max_r: 1.0,
        }
    }
}

impl NormScale {
    pub fn domain_radius(&self) -> f64 {
        self.half_width + self.max_r
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "norm index r must be positive, got {r}"
            )));
        }
        if r > self.max_r {
            return Err(Error::NormBudget {
                r,
                max_r: self.max_r,
            });
        }
        Ok(())
    }

    /// `Σ_{l,m} (Σ_n |c| Rⁿ) e^{r(|l|+|m|)}` with `R = half_width + r`.
    pub fn majorant_norm(&self, s: &Series, r: f64) -> Result<NormEstimate> {
        self.check_r(r)?;
        Ok(NormEstimate {
            r,
            value: self.majorant_value(s, r),
            kind: NormKind::Majorant,
        })
    }

    pub(crate) fn majorant_value(&self, s: &Series, r: f64) -> f64 {
        let radius = self.half_width + r;
        s.terms()
            .map(|(l, m, n, c)| {
                c.norm() * radius.powi(n as i32) * (r * (l.abs() + m.abs()) as f64).exp()
            })
            .sum()
    }

    /// Replaces each `sup_x |f_{l,m}(x)|` by a maximum over `points` samples on
    /// the circle `|x| = half_width + r`; never exceeds the majorant.
    pub fn sampled_norm(&self, s: &Series, r: f64, points: usize) -> Result<NormEstimate> {
        self.check_r(r)?;
        let radius = self.half_width + r;
        let trunc = s.trunc();
        let samples: Vec<Complex64> = (0..points.max(1))
            .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / points as f64))
            .collect();
        let mut total = 0.0;
        let lt = trunc.l_t as i32;
        let lm = trunc.l_theta as i32;
        for l in -lt..=lt {
            for m in -lm..=lm {
                let coeffs: Vec<Complex64> = (0..=trunc.n_x).map(|n| s.coeff(l, m, n)).collect();
                if coeffs.iter().all(|c| c.norm() == 0.0) {
                    continue;
                }
                let sup = samples
                    .iter()
                    .map(|x| {
                        coeffs
                            .iter()
                            .rev()
                            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
                            .norm()
                    })
                    .fold(0.0, f64::max);
                total += sup * (r * (l.abs() + m.abs()) as f64).exp();
            }
        }
        Ok(NormEstimate {
            r,
            value: total,
            kind: NormKind::Sampled,
        })
    }

    /// Real part of the series at (x, θ, t); rejects points outside the domain
    /// and values whose imaginary part exceeds `1e-12 × Σ|c||x|ⁿ`.
    pub fn evaluate(&self, s: &Series, x: f64, theta: f64, t: f64) -> Result<f64> {
        let radius = self.domain_radius();
        if x.abs() > radius {
            return Err(Error::OutsideDomain { x, radius });
        }
        let value = s.evaluate_complex(x, theta, t);
        let scale: f64 = s
            .terms()
            .map(|(_, _, n, c)| c.norm() * x.abs().powi(n as i32))
            .sum();
        if value.im.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotReal(value.im.abs()));
        }
        Ok(value.re)
    }
}

/// One side-by-side comparison of a measured norm with its analytic bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyMargin {
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

impl CauchyMargin {
    fn new(measured: f64, bound: f64) -> Self {
        Self {
            measured,
            bound,
            margin: bound - measured,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub derivative_x: CauchyMargin,
    pub derivative_theta: CauchyMargin,
    pub bracket: Option<CauchyMargin>,
}

impl CauchyReport {
    pub fn all_nonnegative(&self) -> bool {
        self.derivative_x.margin >= 0.0
            && self.derivative_theta.margin >= 0.0
            && self.bracket.map_or(true, |b| b.margin >= 0.0)
    }
}

/// Checks `‖∂_x W‖_{r−d} ≤ ‖W‖_r / d`, `‖∂_θ W‖_{r−d} ≤ ‖W‖_r / (e d)` and,
/// given a partner Z, `‖{W, Z}‖_{r−d−δ} ≤ 2 ‖W‖_r ‖Z‖_{r−δ} / (ρ e d (d+δ))`.
/// The bracket is measured without truncation.
pub fn cauchy_bound_check(
    scale: &NormScale,
    w: &Series,
    partner: Option<&Series>,
    r: f64,
    d: f64,
    delta: f64,
) -> Result<CauchyReport> {
    if !(d > 0.0 && delta > 0.0 && d + delta < r) {
        return Err(Error::InvalidParameter(format!(
            "need d, delta > 0 and d + delta < r (d={d}, delta={delta}, r={r})"
        )));
    }
    let w_r = scale.majorant_norm(w, r)?.value;
    let derivative_x = CauchyMargin::new(scale.majorant_norm(&w.dx(), r - d)?.value, w_r / d);
    let derivative_theta = CauchyMargin::new(
        scale.majorant_norm(&w.dtheta(), r - d)?.value,
        w_r / (E * d),
    );
    let bracket = match partner {
        Some(z) => {
            let full = untruncated_bracket(w, z)?;
            let measured = scale.majorant_value(&full, r - d - delta);
            let z_norm = scale.majorant_norm(z, r - delta)?.value;
            let bound = 2.0 * w_r * z_norm / (w.rho() * E * d * (d + delta));
            Some(CauchyMargin::new(measured, bound))
        }
        None => None,
    };
    Ok(CauchyReport {
        derivative_x,
        derivative_theta,
        bracket,
    })
}

fn untruncated_bracket(a: &Series, b: &Series) -> Result<Series> {
    let (k1, t1) = a.dx().mul_with_tail(&b.dtheta())?;
    let (k2, t2) = a.dtheta().mul_with_tail(&b.dx())?;
    let wide = t1.trunc();
    let full = k1
        .resized(wide)
        .add(&t1)?
        .sub(&k2.resized(wide))?
        .sub(&t2)?;
    Ok(full.scale_real(1.0 / a.rho()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TruncationSpec;

    fn trunc() -> TruncationSpec {
        TruncationSpec::new(4, 4, 4, 1).unwrap()
    }

    fn mono(l: i32, m: i32, n: usize) -> Series {
        Series::monomial(2.0, trunc(), l, m, n, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn zero_series_has_zero_norm() {
        let scale = NormScale::default();
        let z = Series::zero(2.0, trunc()).unwrap();
        assert_eq!(scale.majorant_norm(&z, 0.3).unwrap().value, 0.0);
    }

    #[test]
    fn single_angle_harmonic_has_norm_e_to_the_r() {
        let scale = NormScale::default();
        for r in [0.1, 0.5, 0.9] {
            let v = scale.majorant_norm(&mono(0, 1, 0), r).unwrap().value;
            assert!((v - r.exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn norm_is_homogeneous() {
        let scale = NormScale::default();
        let f = mono(1, -2, 2).add(&mono(0, 1, 1)).unwrap();
        let c = Complex64::new(-0.6, 0.8) * 3.0;
        let lhs = scale.majorant_norm(&f.scale(c), 0.4).unwrap().value;
        let rhs = 3.0 * scale.majorant_norm(&f, 0.4).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn budget_and_sign_of_r_are_checked() {
        let scale = NormScale::default();
        assert!(matches!(
            scale.majorant_norm(&mono(0, 0, 0), 1.5),
            Err(Error::NormBudget { .. })
        ));
        assert!(scale.majorant_norm(&mono(0, 0, 0), 0.0).is_err());
    }

    #[test]
    fn sampled_norm_never_exceeds_majorant() {
        let scale = NormScale {
            half_width: 0.2,
            max_r: 1.0,
        };
        let f = mono(0, 0, 0)
            .sub(&mono(0, 0, 2))
            .unwrap()
            .add(&mono(1, 1, 1))
            .unwrap();
        let maj = scale.majorant_norm(&f, 0.5).unwrap().value;
        let sam = scale.sampled_norm(&f, 0.5, 64).unwrap().value;
        assert!(sam <= maj + 1e-15);
        assert!(sam > 0.0);
    }

    #[test]
    fn cauchy_margins_on_doc_cases() {
        let scale = NormScale::default();
        let report = cauchy_bound_check(&scale, &mono(0, 0, 1), None, 0.8, 0.2, 0.1).unwrap();
        // ‖1‖_{0.6} = 1 against ‖x‖_{0.8} / 0.2 = 4.
        assert!((report.derivative_x.measured - 1.0).abs() < 1e-15);
        assert!((report.derivative_x.bound - 4.0).abs() < 1e-15);
        assert!(report.all_nonnegative());

        let constant = Series::constant(2.0, trunc(), 3.0).unwrap();
        let report = cauchy_bound_check(&scale, &constant, None, 0.8, 0.2, 0.1).unwrap();
        assert_eq!(report.derivative_theta.measured, 0.0);
        assert_eq!(
            report.derivative_theta.margin,
            report.derivative_theta.bound
        );

        let report =
            cauchy_bound_check(&scale, &mono(0, 0, 2), Some(&mono(0, 1, 0)), 0.8, 0.2, 0.1)
                .unwrap();
        assert!(report.bracket.unwrap().margin >= 0.0);
    }

    #[test]
    fn cauchy_rejects_bad_losses() {
        let scale = NormScale::default();
        assert!(cauchy_bound_check(&scale, &mono(0, 0, 1), None, 0.3, 0.2, 0.1).is_err());
        assert!(cauchy_bound_check(&scale, &mono(0, 0, 1), None, 0.3, 0.0, 0.1).is_err());
    }
}
