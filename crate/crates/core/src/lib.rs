//! Parallel calibration of transmit phased arrays.
//!
//! Two signaling schemes are modeled end to end:
//!
//! - **OMA**: every element radiates its own Walsh code; one matched filter
//!   per element recovers its complex gain directly.
//! - **CSmS-NOMA**: every element radiates a cyclic shift of one m-sequence; a
//!   single matched filter yields all peaks sequentially and an O(V)
//!   zero-forcing step removes the inter-element interference.
//!
//! [`theory`] predicts the gain and phase mismatch RMSE of both schemes in
//! closed form and [`harness`] checks those predictions by Monte-Carlo.

pub mod channel;
pub mod error;
pub mod harness;
pub mod pncodes;
pub mod receiver;
pub mod theory;
pub mod waveform;

pub use error::{Error, Result};
