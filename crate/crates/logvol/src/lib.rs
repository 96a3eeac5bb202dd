//! Log-volumes of rotationally invariant random simplices and
//! log-determinants of Gaussian matrices: exact distributional
//! representations, polygamma moment formulas, Berry-Esseen bound
//! evaluation, limit-theorem centering, and reproducible Monte Carlo.

pub mod asymptotics;
pub mod limits;
pub mod error;
pub(crate) mod quad;
pub mod sampling;
pub mod simplex;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
