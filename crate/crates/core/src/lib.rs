pub mod error;
pub mod fields;
pub mod geometry;
pub mod halfspace;
pub mod harmonics;
pub mod modal;
pub mod quadrature;
pub mod specfun;
pub mod weak_limit;

pub use error::{CloakError, Result};
