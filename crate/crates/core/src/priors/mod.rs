//! Random mixing measures and scale priors.

pub mod base;
pub mod bounds;
pub mod nig;
pub mod scale;
pub mod stick;

pub use base::{BaseFamily, BaseMeasure};
pub use nig::{nig_density, nig_log_density, nig_sample, NIGParams};
pub use scale::ScalePriorA0;
pub use stick::{py_sample, PYParams, StickBreakingDraw};
