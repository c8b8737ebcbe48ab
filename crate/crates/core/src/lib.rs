//! Total rotation of a disc rolling without slipping on the rim of a fixed disc.

pub mod error;
pub mod foucault;
pub mod frames;
pub mod gauge;
pub mod motion;
pub mod oracle;
pub mod phase;
pub mod quad;
pub mod region;
pub mod sphere;

pub use error::{GeoError, Result};
