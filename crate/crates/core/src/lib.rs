//! Lie-series normal forms and a KAM iteration for the periodically driven
//! symmetric rigid body, with a direct integrator to check them against.
//!
//! * [`series`]: truncated Fourier–Taylor series, the reduced Poisson bracket,
//!   majorant norms.
//! * [`operators`]: projectors, small-divisor inversion and the generator Γ.
//! * [`normal_form`]: the conjugation step, bound constants, the KAM schedule.
//! * [`dynamics`]: Euler–Poinsot fields, RK4, the (X, θ) chart, sections.
//! * [`verify`] and [`presets`]: named registries used by the command line.

pub mod dynamics;
pub mod error;
pub mod normal_form;
pub mod operators;
pub mod presets;
pub mod sample;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
