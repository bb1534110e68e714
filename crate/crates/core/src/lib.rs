//! Exact counting of points of `y^2 = f(x)` and `y = f(x)` in small boxes
//! modulo a prime, with the surrounding machinery: bound evaluators,
//! hyperelliptic isomorphism-class censuses, polynomial dynamics, exponential
//! sums, Vinogradov systems and successive minima of congruence lattices.

pub mod error;
pub use error::{Error, Result};

pub mod acceptance;
pub mod analytic;
pub mod boxcount;
pub mod dynsys;
pub mod ffield;
pub mod harness;
pub mod hyperelliptic;
pub mod lattice;
pub mod oracle;
