//! Secure amplify-and-forward rates in layered Gaussian relay networks with a
//! last-layer eavesdropper, closed-form optimal relay scaling, and the rate
//! gaps incurred by using only `k` of the `N` relays in each layer.

pub mod cli;
pub mod error;
pub mod gap;
pub mod network;
pub mod oracle;
pub mod netfile;
pub mod rate;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use network::{EcgalNetwork, NetworkParams, Receiver, ScalingAssignment};
pub use rate::{evaluate, secrecy_rate, RateResult};
pub use solver::{optimal_rate, solve, LastLayerCase, ScalingSolution};
