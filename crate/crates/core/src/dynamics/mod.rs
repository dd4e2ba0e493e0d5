//! Symplectic integration of `H = h(I) + f(I, theta)` and the
//! measurements taken along orbits: drift, escape from extended blocks,
//! block itineraries and exponent fits.

mod integrate;
mod measure;
mod sweep;

pub use integrate::{
    integrate, step_symplectic_defect, IntegratorSpec, Scheme, Stepper, Trajectory,
};
pub use measure::{
    block_itinerary, escape_time, fit_exponents, itinerary_violations, max_drift, EscapeReport,
    ExponentFit, ItineraryEntry, DEFAULT_STRIDE,
};
pub use sweep::{
    convex3_perturbation, stability_sweep, sweep_csv, StabilityConfig, SweepRow, SWEEP_HEADER,
};
