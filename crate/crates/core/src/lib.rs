pub mod couplings;
pub mod dark_resonance;
pub mod dephasing;
pub mod detector;
pub mod eigensolver;
pub mod error;
pub mod fit;
pub mod heterostructure;
pub mod liouville;
pub mod pipeline;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
