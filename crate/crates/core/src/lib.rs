//! Peak-to-average power ratio analysis for tone reservation over the Walsh
//! and discrete Fourier systems.

pub mod cli;
pub mod error;
pub mod extension;
pub mod fourier_tools;
pub mod papr;
pub mod systems;
pub mod walsh_tools;

pub use error::{Error, Result};
