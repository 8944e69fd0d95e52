pub mod baseline;
pub mod claims;
pub mod cli;
pub mod consumption;
pub mod error;
pub mod hedger;
pub mod market;
pub mod nn;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
