pub mod error;
pub mod extraction;
pub mod fov;
pub mod frontend;
pub mod geometry;
pub mod hough;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
