//! Exact computation in the factorial number system and the dynamics of the
//! e-power factoradic happy function.
//!
//! - [`factoradic`]: digit representation, conversion, padding and addition.
//! - [`dynamics`]: the happy function, orbit classification, certified descent
//!   bounds and the attractor atlas.
//! - [`towers`]: all-ones preimages, nice offsets and symbolic certificates for
//!   arbitrarily long runs of consecutive p-happy numbers.
//! - [`analysis`]: smallest-run searches and attractor density reports.
//! - [`cli`]: the `facthappy` command-line front end.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod factoradic;
pub mod towers;

pub use dynamics::{
    classify, classify_with, descent_bound, enumerate_attractors, happy_step, happy_step_nat,
    iterate, smallest_j, AttractorAtlas, AttractorId, ClassifyOptions, DescentBound, Exponent,
    OrbitReport,
};
pub use error::{Error, Result};
pub use factoradic::{FactoradicRep, Natural};
