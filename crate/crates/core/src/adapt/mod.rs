//! Data-driven bandwidth choice.
//!
//! The estimate at bandwidth index `k` is compared with every estimate at a
//! smaller index; the bandwidth keeps growing while all differences stay
//! within the sum of the corresponding critical values. Critical values
//! are plug-in quantities built from the local tail estimate (pointwise
//! loss) or from a single tail estimate at `x = 1/2` (`L_q` loss).

mod config;
mod critical;
mod grid;
mod lepski;
mod pipeline;

pub use config::{EstimatorConfig, Loss, SmallArgument};
pub use critical::{critical_values_lq, critical_values_pointwise, iu_n, iu_n_with, CriticalValues, CvKind};
pub use grid::{build_grid, BandwidthGrid};
pub use lepski::{lepski_select, LepskiNorm};
pub use pipeline::{
    adaptive_estimate, adaptive_estimate_with, base_value, AdaptOptions, AdaptiveOutput, Counters, Diagnostics,
    GlobalDiagnostics, PointDiagnostics, PointEstimate, Target,
};
