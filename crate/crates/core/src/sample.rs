//! Seeded random inputs: series with geometric decay, twist functions and
//! points on the momentum sphere.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::series::{Series, TruncationSpec};

/// Generator for one trial: the seed picks the sequence, the trial index the stream,
/// so trials can be drawn in any order or in parallel.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Shape of a random real series: coefficient (l, m, n) is drawn from
/// `amplitude · e^{−decay(|l|+|m|)} · x_decayⁿ · (u + iv)`, u, v uniform in [−1, 1],
/// restricted to `|l| ≤ max_l`, `|m| ≤ max_m`, `n ≤ max_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesShape {
    pub max_l: usize,
    pub max_m: usize,
    pub max_n: usize,
    pub decay: f64,
    pub x_decay: f64,
    pub amplitude: f64,
}

impl SeriesShape {
    /// Fills the whole truncation box.
    pub fn full(trunc: TruncationSpec) -> Self {
        Self {
            max_l: trunc.l_t,
            max_m: trunc.l_theta,
            max_n: trunc.n_x,
            decay: 1.0,
            x_decay: 0.5,
            amplitude: 1.0,
        }
    }

    pub fn low(max_harmonic: usize, max_n: usize, amplitude: f64) -> Self {
        Self {
            max_l: max_harmonic,
            max_m: max_harmonic,
            max_n,
            decay: 1.0,
            x_decay: 1.0,
            amplitude,
        }
    }
}

pub fn random_series(
    rng: &mut impl Rng,
    rho: f64,
    trunc: TruncationSpec,
    shape: &SeriesShape,
) -> Result<Series> {
    let mut terms = Vec::new();
    let (ml, mm) = (
        shape.max_l.min(trunc.l_t) as i32,
        shape.max_m.min(trunc.l_theta) as i32,
    );
    for l in 0..=ml {
        for m in -mm..=mm {
            if l == 0 && m < 0 {
                continue;
            }
            for n in 0..=shape.max_n.min(trunc.n_x) {
                let weight = shape.amplitude
                    * (-shape.decay * (l.abs() + m.abs()) as f64).exp()
                    * shape.x_decay.powi(n as i32);
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * weight;
                terms.push((l, m, n, c));
            }
        }
    }
    Series::real_from_terms(rho, trunc, &terms)
}

/// `q00 + fluctuation`, with the fluctuation a random degree-0 series of
/// harmonics ≤ `max_harmonic` and majorant norm exactly `spread` at `r`.
pub fn random_twist(
    rng: &mut impl Rng,
    rho: f64,
    trunc: TruncationSpec,
    q00: f64,
    max_harmonic: usize,
    spread: f64,
    r: f64,
) -> Result<Series> {
    let shape = SeriesShape::low(max_harmonic, 0, 1.0);
    let fluct = random_series(rng, rho, trunc, &shape)?.filter(|l, m, _| l != 0 || m != 0);
    let norm = fluct.majorant(r);
    let fluct = if norm > 0.0 {
        fluct.scale_real(spread / norm)
    } else {
        fluct
    };
    Series::constant(rho, trunc, q00)?.add(&fluct)
}

/// Uniform point on the sphere of radius ρ.
pub fn uniform_on_sphere(rng: &mut impl Rng, rho: f64) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    [rho * s * phi.cos(), rho * s * phi.sin(), rho * z]
}
