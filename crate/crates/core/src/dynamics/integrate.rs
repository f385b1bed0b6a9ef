//! Vector fields on the momentum sphere and a fixed-step RK4 integrator.

use super::inertia::InertiaSpec;
use crate::error::{Error, Result};

pub trait VectorField<const N: usize>: Sync {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `(𝖫M) × M`: the Hamiltonian field of the static energy ½ M·𝖫M for the
/// bracket {F, G} = M·(∇F × ∇G).
pub fn euler_field(m: &[f64; 3], inertia: &InertiaSpec) -> [f64; 3] {
    let inv = inertia.static_part().inverse_moments(0.0);
    cross(&[inv[0] * m[0], inv[1] * m[1], inv[2] * m[2]], m)
}

/// `((𝖫 + 𝖠(t))M) × M`.
pub fn throbbing_field(m: &[f64; 3], t: f64, inertia: &InertiaSpec) -> [f64; 3] {
    let inv = inertia.inverse_moments(t);
    cross(&[inv[0] * m[0], inv[1] * m[1], inv[2] * m[2]], m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBodyField {
    pub inertia: InertiaSpec,
}

impl VectorField<3> for RigidBodyField {
    fn eval(&self, t: f64, y: &[f64; 3]) -> [f64; 3] {
        throbbing_field(y, t, &self.inertia)
    }
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + a * k[i])
}

pub fn rk4_step<const N: usize>(
    field: &dyn VectorField<N>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = field.eval(t, y);
    let k2 = field.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = field.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = field.eval(t + h, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, [f64; N])> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

/// Step count and final partial step for covering `duration` with steps of `h`.
fn plan(h: f64, duration: f64) -> Result<(usize, f64)> {
    if !(h > 0.0 && h.is_finite()) || !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need h > 0 and T >= 0, got h={h}, T={duration}"
        )));
    }
    let full = (duration / h * (1.0 + 1e-12)).floor() as usize;
    let rest = duration - full as f64 * h;
    Ok((full, if rest > 1e-12 * duration { rest } else { 0.0 }))
}

/// Integrates from `t0` over `duration` with fixed step `h`, keeping every
/// `stride`-th step (and the endpoints). `observe` sees every step. A
/// zero-length run has no samples. Non-finite states abort with the last good one.
pub fn integrate_observed<const N: usize>(
    field: &dyn VectorField<N>,
    y0: [f64; N],
    t0: f64,
    h: f64,
    duration: f64,
    stride: usize,
    mut observe: impl FnMut(f64, &[f64; N]),
) -> Result<Trajectory<N>> {
    let (full, rest) = plan(h, duration)?;
    let stride = stride.max(1);
    let mut traj = Trajectory::default();
    if full == 0 && rest == 0.0 {
        return Ok(traj);
    }
    let (mut t, mut y) = (t0, y0);
    traj.times.push(t);
    traj.states.push(y);
    observe(t, &y);
    let total = full + usize::from(rest > 0.0);
    for k in 1..=total {
        let step = if k <= full { h } else { rest };
        let next = rk4_step(field, t, &y, step);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t,
                last: y.to_vec(),
            });
        }
        y = next;
        t = if k <= full {
            t0 + k as f64 * h
        } else {
            t0 + duration
        };
        observe(t, &y);
        if k % stride == 0 || k == total {
            traj.times.push(t);
            traj.states.push(y);
        }
    }
    Ok(traj)
}

pub fn integrate<const N: usize>(
    field: &dyn VectorField<N>,
    y0: [f64; N],
    t0: f64,
    h: f64,
    duration: f64,
    stride: usize,
) -> Result<Trajectory<N>> {
    integrate_observed(field, y0, t0, h, duration, stride, |_, _| {})
}
