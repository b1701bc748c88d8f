pub mod error;
pub mod fourier;
pub mod measures;
pub mod orthosys;
pub mod poly;
pub mod quad;
pub mod secondary_chain;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
