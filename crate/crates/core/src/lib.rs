//! Kernel-mixture density estimation with Pitman-Yor and normalized
//! inverse-Gaussian priors.
//!
//! The crate bundles the numerical machinery needed to study location
//! mixtures `f_{F,σ} = F ∗ K_σ` of supersmooth kernels: spectral grid
//! functions, a kernel catalog, the corrected-density transforms, moment
//! matched discretization of mixing measures, prior samplers with prior-mass
//! checks, distances, and a desk-scale posterior sampler.

pub mod discretize;
pub mod error;
pub mod gridfn;
pub mod kernels;
pub mod measure;
pub mod metrics;
pub mod posterior;
pub mod priors;
pub mod rng;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
pub use gridfn::{Grid, GridFunction};
