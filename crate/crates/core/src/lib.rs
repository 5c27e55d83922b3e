//! Private capacity of keyless quantum wiretap links over noisy free-space
//! channels, for on-off keying and polarization-multiplexed encodings read by
//! photon-number-resolving receivers.

pub mod background;
pub mod capacity;
pub mod channels;
pub mod cli;
pub mod detector;
pub mod error;
pub mod output;
pub mod photon_stats;
pub mod protocol;

pub use error::{Error, Result};
