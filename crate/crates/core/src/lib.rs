pub mod analysis;
pub mod commands;
pub mod demographics;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod matching;
pub mod model;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod society;

pub use error::{Error, Result};
