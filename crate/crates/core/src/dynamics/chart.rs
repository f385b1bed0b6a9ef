//! The (X, θ) chart on the momentum sphere:
//! M = (ρ√(1−X²) cos θ, ρ√(1−X²) sin θ, ρX), poles excluded.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

const SPHERE_TOL: f64 = 1e-10;
const POLE_TOL: f64 = 1e-12;

pub fn to_reduced(m: &[f64; 3], rho: f64) -> Result<(f64, f64)> {
    let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if (norm - rho).abs() > SPHERE_TOL * rho.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "|M| = {norm} is not rho = {rho}"
        )));
    }
    project(m)
}

/// Chart coordinates of the radial projection of M onto its own sphere.
pub fn project(m: &[f64; 3]) -> Result<(f64, f64)> {
    let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    let x = m[2] / norm;
    if !(x.abs() < 1.0 - POLE_TOL) {
        return Err(Error::Pole(x));
    }
    Ok((x, m[1].atan2(m[0]).rem_euclid(TAU)))
}

pub fn from_reduced(x: f64, theta: f64, rho: f64) -> Result<[f64; 3]> {
    if !(x.abs() < 1.0) {
        return Err(Error::Pole(x));
    }
    let s = rho * (1.0 - x * x).sqrt();
    Ok([s * theta.cos(), s * theta.sin(), rho * x])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(
            to_reduced(&[0.0, 0.0, 2.0], 2.0),
            Err(Error::Pole(_))
        ));
        assert!(matches!(from_reduced(-1.0, 0.3, 2.0), Err(Error::Pole(_))));
    }

    #[test]
    fn equator_point() {
        assert_eq!(to_reduced(&[2.0, 0.0, 0.0], 2.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn off_sphere_input_is_rejected() {
        assert!(to_reduced(&[1.0, 0.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn angle_is_wrapped_to_one_turn() {
        let (_, theta) = to_reduced(&[0.0, -2.0, 0.0], 2.0).unwrap();
        assert!((theta - 1.5 * std::f64::consts::PI).abs() < 1e-15);
    }
}
