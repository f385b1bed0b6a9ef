//! Conservation diagnostics and stroboscopic sections of trajectories.

use serde::{Deserialize, Serialize};

use super::inertia::InertiaSpec;
use super::integrate::Trajectory;
use crate::error::{Error, Result};

/// Slack allowed when testing the energy against its band.
pub const BAND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub rho_drift_max: f64,
    /// max |E(t) − E(0)|; only meaningful for unmodulated runs.
    pub energy_drift_max: f64,
    pub energy_min: f64,
    pub energy_max: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub in_band: bool,
}

/// Running extremes of |M| and E(M, t) along an integration.
#[derive(Clone, Debug)]
pub struct ConservationTracker {
    inertia: InertiaSpec,
    rho0: f64,
    energy0: Option<f64>,
    rho_drift_max: f64,
    energy_drift_max: f64,
    energy_min: f64,
    energy_max: f64,
}

impl ConservationTracker {
    pub fn new(inertia: InertiaSpec, m0: &[f64; 3]) -> Self {
        Self {
            inertia,
            rho0: norm(m0),
            energy0: None,
            rho_drift_max: 0.0,
            energy_drift_max: 0.0,
            energy_min: f64::INFINITY,
            energy_max: f64::NEG_INFINITY,
        }
    }

    pub fn observe(&mut self, t: f64, m: &[f64; 3]) {
        self.rho_drift_max = self.rho_drift_max.max((norm(m) - self.rho0).abs());
        let e = self.inertia.energy(m, t);
        let e0 = *self.energy0.get_or_insert(e);
        self.energy_drift_max = self.energy_drift_max.max((e - e0).abs());
        self.energy_min = self.energy_min.min(e);
        self.energy_max = self.energy_max.max(e);
    }

    pub fn report(&self) -> ConservationReport {
        let (band_lo, band_hi) = self.inertia.energy_band(self.rho0);
        let (energy_min, energy_max) = if self.energy0.is_some() {
            (self.energy_min, self.energy_max)
        } else {
            (f64::NAN, f64::NAN)
        };
        ConservationReport {
            rho_drift_max: self.rho_drift_max,
            energy_drift_max: self.energy_drift_max,
            energy_min,
            energy_max,
            band_lo,
            band_hi,
            in_band: self.energy0.is_none()
                || (energy_min >= band_lo - BAND_TOL && energy_max <= band_hi + BAND_TOL),
        }
    }
}

fn norm(m: &[f64; 3]) -> f64 {
    (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt()
}

/// Conservation report over the stored samples of a trajectory.
pub fn conservation_report(
    traj: &Trajectory<3>,
    inertia: &InertiaSpec,
) -> Option<ConservationReport> {
    let first = traj.states.first()?;
    let mut tracker = ConservationTracker::new(*inertia, first);
    for (t, m) in traj.times.iter().zip(&traj.states) {
        tracker.observe(*t, m);
    }
    Some(tracker.report())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub t: f64,
    #[serde(rename = "X")]
    pub x: f64,
    pub theta: f64,
}

/// Samples at t = k·period, each linearly interpolated between the bracketing
/// stored states. X is M₃ over the interpolated radius, so a conserved M₃
/// gives an exactly conserved X.
pub fn poincare_section(traj: &Trajectory<3>, period: f64) -> Result<Vec<SectionPoint>> {
    if !(period > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "period must be positive, got {period}"
        )));
    }
    let (Some(&t0), Some(&t1)) = (traj.times.first(), traj.times.last()) else {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    };
    if t1 - t0 < period {
        return Err(Error::InvalidParameter(format!(
            "trajectory spans {} < one period {period}",
            t1 - t0
        )));
    }
    let eps = 1e-12 * period.max(t1.abs());
    let mut out = Vec::new();
    let mut k = (t0 / period - 1e-9).ceil() as i64;
    let mut j = 0;
    loop {
        let target = k as f64 * period;
        if target > t1 + eps {
            break;
        }
        while j + 1 < traj.times.len() && traj.times[j + 1] < target - eps {
            j += 1;
        }
        let (m, radius) = if (traj.times[j] - target).abs() <= eps || j + 1 == traj.times.len() {
            (traj.states[j], norm(&traj.states[j]))
        } else {
            let (ta, tb) = (traj.times[j], traj.times[j + 1]);
            let w = (target - ta) / (tb - ta);
            let (a, b) = (traj.states[j], traj.states[j + 1]);
            let m: [f64; 3] = std::array::from_fn(|i| a[i] + w * (b[i] - a[i]));
            (m, norm(&a) + w * (norm(&b) - norm(&a)))
        };
        let x = m[2] / radius;
        if !(x.abs() < 1.0) {
            return Err(Error::Pole(x));
        }
        let theta = m[1].atan2(m[0]).rem_euclid(std::f64::consts::TAU);
        out.push(SectionPoint {
            t: target,
            x,
            theta,
        });
        k += 1;
    }
    Ok(out)
}

/// max − min of the static energy over section points on the sphere of radius ρ.
pub fn section_energy_spread(
    points: &[SectionPoint],
    inertia: &InertiaSpec,
    rho: f64,
) -> Result<f64> {
    let static_part = inertia.static_part();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        let m = super::chart::from_reduced(p.x, p.theta, rho)?;
        let e = static_part.energy(&m, 0.0);
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok(if points.is_empty() { 0.0 } else { hi - lo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_between_samples() {
        let traj = Trajectory {
            times: vec![0.0, 0.5, 1.5, 2.5],
            states: vec![
                [1.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
        };
        let pts = poincare_section(&traj, 1.0).unwrap();
        assert_eq!(pts.len(), 3);
        assert!((pts[1].theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(pts[0].t, 0.0);
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let traj = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![[1.0, 0.0, 0.0]; 2],
        };
        assert!(poincare_section(&traj, 1.0).is_err());
    }

    #[test]
    fn report_flags_band_violation() {
        let inertia = InertiaSpec::new([1.0, 2.0, 3.0]).unwrap();
        let mut tracker = ConservationTracker::new(inertia, &[0.0, 2.0, 0.0]);
        tracker.observe(0.0, &[0.0, 2.0, 0.0]);
        assert!(tracker.report().in_band);
        tracker.observe(1.0, &[0.0, 0.0, 3.0]);
        let rep = tracker.report();
        assert!((rep.rho_drift_max - 1.0).abs() < 1e-15);
        assert!(rep.in_band && (rep.energy_min - 1.0).abs() < 1e-15);
        tracker.observe(2.0, &[3.0, 0.0, 0.0]);
        assert!(!tracker.report().in_band);
    }
}
