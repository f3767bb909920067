pub mod bosehubbard;
pub mod cumulants;
pub mod error;
pub mod ising;
pub mod lanczos;
pub mod linalg;
pub mod sweep;
pub mod tangles;
pub mod verify;

pub use error::{Error, Result};
