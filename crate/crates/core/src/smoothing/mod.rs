//! Jackson-Moser-Zehnder analytic smoothing on the line, the torus and the
//! annulus, plus the measurements that check its two bounds.

mod annulus;
mod bump;
mod jackson;
mod kernel;
mod measure;
mod nonperiodic;
mod report;

pub use annulus::{action_cutoff, smooth_annulus, smooth_annulus_table, AnnulusOptions, AnnulusOutput};
pub use bump::{bump, smooth_step, BumpSpec, PROFILE};
pub use jackson::{jackson_multiplier, jackson_smooth, survives};
pub use kernel::{kernel, KernelTable, KERNEL_DOUBLING_TOL};
pub use measure::{smoothing_error, smoothing_error_table};
pub use nonperiodic::{probe_offsets, smooth_nonperiodic, NonperiodicSmoother, SmoothedField, PADDING_TOL};
pub use report::{finish_sweep, smoothing_sweep, Constants, Slopes, SmoothingReport, SweepResult};
