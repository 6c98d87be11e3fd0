pub mod campaign_io;
pub mod dsp;
pub mod error;
pub mod fitting;
pub mod geometry;
pub mod pl_models;
pub mod ris_array;
pub mod synthesis;

pub use error::{Error, Result};
