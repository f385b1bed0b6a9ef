//! One conjugation step (V ↦ V_*), the constants bounding it, and the
//! scheduled iteration built from repeated steps.

mod bounds;
mod kam;
mod lie;
mod schedule;

pub use bounds::{certify_bounds, BoundConstants, BoundReport};
pub use kam::{kam_iterate, IterationState, KamConfig, KamRun, LedgerEntry};
pub use lie::{
    compute_v_star, conjugacy_residual, fit_power_law, lie_exp_apply, LieSeriesConfig,
    LieSeriesOutcome, LieTransformResult,
};
pub use schedule::{
    eps0_bound, evaluate_schedule, q_floor, schedule_sequences, Conditions, Preconditions,
    Schedule, ScheduleStep,
};
