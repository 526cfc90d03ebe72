//! Simulation and verification toolkit for concentration properties of
//! Poisson functionals.
//!
//! The crate is organized around one pipeline:
//!
//! 1. [`process`] samples finite Poisson configurations (optionally marked)
//!    from an intensity measure, with deterministic counter-derived
//!    substreams ([`stream`]) so parallel replications are bit-reproducible.
//! 2. [`calculus`] evaluates add-one and remove-one differences of a
//!    functional and assembles the variance proxies `V+`, `V-`, `V` that
//!    control its concentration.
//! 3. [`entropy`] provides an exact (truncated-series) engine for functionals
//!    of a single Poisson count and checks the Phi-entropy inequalities on it.
//! 4. [`moments`] turns proxy bounds into recursive L^p estimates, moment
//!    bounds, and exponential tail bounds, and verifies tails empirically.
//! 5. [`geometry`] and [`cylinders`] instantiate the machinery for two
//!    spatial models: convex hulls of Poisson samples in a convex body, and
//!    stationary Poisson cylinder processes observed in a window.

pub mod calculus;
pub mod entropy;
pub mod hull;
pub mod linalg;
pub mod moments;
pub mod numeric;
pub mod process;
pub mod stream;

pub use calculus::{IdentityReport, InequalityReport};
pub use entropy::{CountModel, PhiFunction};
pub use hull::ConvexHull;
pub use process::{IntensitySpec, MeckeReport, Point, PointConfiguration};
pub use stream::RandomStream;
