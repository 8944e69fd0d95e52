//! Small feedforward networks: forward pass, reverse-mode gradients, Adam,
//! and output truncation.

mod adam;
pub mod checkpoint;
mod network;

pub use adam::Adam;
pub use checkpoint::{read_network, write_network};
pub use network::{
    truncate, truncate_derivative, truncate_scalar, Activation, ForwardCache, Gradients, Network, INIT_TRUNCATION,
};
