pub mod error;
pub mod repetition;
pub mod word;

pub use error::{Error, Result};
pub mod morphism;
pub mod pattern;
pub mod cuts;
pub mod bounds;
pub mod pipeline;
