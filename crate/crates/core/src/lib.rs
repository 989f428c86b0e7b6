//! Exact-arithmetic workbench for finite-dimensional Batalin–Vilkovisky
//! quantization.

pub mod bv;
pub mod error;
pub mod graded;
pub mod hrg;
pub mod linalg;
pub mod modular;
pub mod scalar;
pub mod singularity;
pub mod suite;
pub mod weyl;

pub use error::{Error, Result};
pub use scalar::Q;
