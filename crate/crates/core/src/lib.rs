//! Intrinsic volumes of convex bodies, computed exactly and by isonormal
//! Gaussian-process Monte Carlo, and the hyperbolic geometry of homothety
//! classes induced by the second intrinsic volume.
//!
//! - [`bodies`]: body representations, support functions, Minkowski algebra.
//! - [`exact`]: closed forms and spherical quadrature for `V_k` and mixed `V₂`.
//! - [`estimators`]: Monte-Carlo estimators driven by counter-based streams.
//! - [`hyperbolic`]: the hyperboloid model, the `V₂` kernel and its embedding.
//! - [`experiments`]: convergence experiments on ball, box and rectangle
//!   sequences.

pub mod bodies;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod experiments;
pub mod hull;
pub mod hyperbolic;
pub mod output;
pub mod rng;

pub use bodies::{Body, MaximalPoint, Vector};
pub use error::{Error, Result};
pub use estimators::{EstimatorResult, SamplerConfig};
pub use hyperbolic::{BodyClass, HyperboloidPoint, KernelMatrix};
