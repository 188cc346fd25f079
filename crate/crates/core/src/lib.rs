pub mod error;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod cli;
pub mod commutative;
pub mod diag;
pub mod dynamics;
pub mod model;
pub mod tddiag;
pub mod tolerance;

pub use error::{Error, Result};
