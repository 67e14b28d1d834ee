//! Performance analysis of two-way amplify-and-forward relaying through an
//! energy-harvesting relay that splits its received power between an energy
//! harvester and the forwarding path.
//!
//! * [`specfun`]: `K1`, `E1`, the Tricomi function `Psi(n, n; z)`, digamma.
//! * [`numerics`]: adaptive quadrature, root finding, series, differences.
//! * [`model`]: parameters, fading draws, relay power, end-to-end SNRs, rates.
//! * [`analytic`]: closed-form outage, capacity and finite-SNR diversity.
//! * [`mc`]: reproducible parallel Monte Carlo estimators used as ground truth.

pub mod analytic;
pub mod error;
pub mod mc;
pub mod model;
pub mod numerics;
pub mod specfun;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
