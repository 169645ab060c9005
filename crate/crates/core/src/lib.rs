//! Deep residual echo state networks.
//!
//! Untrained stacked recurrent reservoirs whose layers add a temporal
//! residual path `α O h(t-1)` to the usual `β tanh(W_h h(t-1) + W_x x(t) + b)`
//! update, with `O` a random orthogonal, cyclic or identity matrix. The crate
//! covers construction and simulation ([`reservoir`]), the linear ridge
//! readout ([`readout`]), linear stability and contractivity analysis
//! ([`stability`]), layer-wise frequency analysis ([`analysis`]), synthetic
//! benchmark generators and dataset loaders ([`tasks`]) and a random-search
//! experiment harness ([`harness`]).

pub mod analysis;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod readout;
pub mod reservoir;
pub mod stability;
pub mod tasks;

pub use error::{Error, Result};
