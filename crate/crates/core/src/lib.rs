pub mod error;
pub mod exact;
pub mod experiments;
pub mod grid;
pub mod hedberg;
pub mod characteristics;
pub mod operators;
pub mod oracle;
pub mod weights;

pub use error::{Error, Result};
