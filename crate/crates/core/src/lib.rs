//! Occupancy, absorption probabilities and absorption times of one-dimensional
//! random walks that step forward, step backward, hold or get absorbed, on an
//! interval, a half line or the whole line, optionally with one interior state
//! whose probabilities differ from its neighbours'.

pub mod characteristic;
pub mod displays;
pub mod dual;
pub mod error;
pub mod gate;
pub mod homogeneous;
pub mod mc;
pub mod modified;
pub mod oracle;
pub mod proof_system;
pub mod suite;
pub mod verify;
pub mod walk_model;

pub use error::{Error, Result};
