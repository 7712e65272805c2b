//! Exact temporo-spatial averaging on symbolic and circle dynamics.
//!
//! Every quantity is an exact rational. The modules build on each other
//! bottom-up: points and balls, ambient and invariant measures, averages,
//! ergodic optimization, and the compilers for limit-set constructions.

pub mod averaging;
pub mod construct;
pub mod ergopt;
pub mod measure;
pub mod rat;
pub mod space;
pub mod spec;

mod error;

pub use error::{Error, Result};
pub use rat::Q;
