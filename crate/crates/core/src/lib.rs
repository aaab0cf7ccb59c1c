//! CSI-free adaptive passive beamforming for RIS-aided links.
//!
//! A base station probes an unknown single-path channel through a
//! reconfigurable intelligent surface using a hierarchical codebook. Each
//! pilot returns a scalar received energy; a kernel posterior over the
//! narrow target beams is refined until it is confident. Which beam to probe
//! next is chosen by a policy learned with tabular Q-learning on a
//! discretized belief space, posed as a stochastic shortest path problem.

pub mod belief;
pub mod chansim;
pub mod codebook;
pub mod error;
pub mod exec;
pub mod expcli;
pub mod protocol;
pub mod qlearner;
pub mod rng;
pub mod ssp;
pub mod textfmt;

pub use error::{Error, Result};
