//! Party-side strategy: outcomes, thresholds and equilibrium solvers.

pub mod outcome;
pub mod random_ad;
pub mod selection;
pub mod targeting;
pub mod thresholds;

pub use outcome::*;
pub use random_ad::*;
pub use selection::*;
pub use targeting::*;
pub use thresholds::*;
