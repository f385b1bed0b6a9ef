//! Direct integration of the free and periodically modulated rigid body on
//! the momentum sphere, the (X, θ) chart and the diagnostics used to check
//! the normal-form machinery against trajectories.

mod chart;
mod inertia;
mod integrate;
mod observe;
mod reduced;

pub use chart::{from_reduced, project, to_reduced};
pub use inertia::{InertiaSpec, ModulationEntry};
pub use integrate::{
    euler_field, integrate, integrate_observed, rk4_step, throbbing_field, RigidBodyField,
    Trajectory, VectorField,
};
pub use observe::{
    conservation_report, poincare_section, section_energy_spread, ConservationReport,
    ConservationTracker, SectionPoint, BAND_TOL,
};
pub use reduced::{modulation_series, ReducedField};
