//! Graded linear algebra: coordinate spaces with a differential, Koszul-signed
//! monomials, truncated functionals and second-order contraction operators.

mod functional;
mod kernel;
mod monomial;
pub mod random;
mod space;
pub(crate) mod terms;

pub use functional::{Cutoff, Functional, TermJson};
pub use kernel::{Kernel2, Kernel2Json};
pub use monomial::{koszul_sign, Monomial};
pub use space::{BasisEntry, DgSpace, DgSpaceJson};
