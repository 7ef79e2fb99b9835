//! Solvability certificates for the lossless real power flow equations.
//!
//! The pipeline reads a case ([`netparse`]), builds an oriented incidence
//! structure and a nonnegative cycle basis ([`topology`]), parameterises all
//! balanced line flows by cycle flows ([`flowcore`]) and checks sign
//! conditions on the faces of a box of cycle flows ([`certify`]). A plain
//! Newton-Raphson solver ([`refsolvers`]) and a load-scaling harness
//! ([`sweep`]) measure how close the certificate gets to the true boundary.

pub mod certify;
pub mod cli;
mod error;
pub mod flowcore;
pub mod netparse;
pub mod refsolvers;
pub mod sweep;
pub mod topology;

pub use certify::{certify, BoxPolicy, Certificate, Certifier, CertifyOptions, Verdict};
pub use error::{Error, ParseError, Result};
pub use netparse::{load_network, LosslessOptions, Network};
pub use refsolvers::{nr_flat, nr_solve, NrOptions, NrResult};
pub use sweep::{stress_sweep, SweepOptions, SweepResult};
