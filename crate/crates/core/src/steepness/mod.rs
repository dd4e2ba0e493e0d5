//! Sampling-based checks of steepness: the frequency map must move
//! transversally off every subspace orthogonal to it, with a power law
//! `C_m xi^alpha_m` graded by the subspace dimension `m`.

mod estimate;
mod frame;
mod margin;
mod verify;

pub use estimate::{
    estimate_indices, pointwise_indices, EstimateConfig, SteepnessOutcome, SteepnessProfile, ViolationReport, Witness,
    DEGENERATE_FREQUENCY, VIOLATION_FLOOR,
};
pub use frame::SubspaceFrame;
pub use margin::{eta_grid, margin_curve, min_projection, sphere_points, steepness_margin, SphereBudget};
pub use verify::{verify_steepness, SteepnessCheck, VerifyBudget};
