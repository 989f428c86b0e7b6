//! Quasimodular forms and the regularized two-loop integral of `𝐏³` on the
//! elliptic curve `E_τ = ℂ/(ℤ ⊕ ℤτ)`.
//!
//! q-series carry exact rational coefficients; floating point only enters in
//! the lattice sums and quadrature. Conditionally convergent sums over `ℤ + ℤτ`
//! use expanding index squares `|a|, |b| ≤ R` (Eisenstein ordering).

mod lattice;
mod qseries;
mod twoloop;

pub use lattice::{
    e2, e2_star, heat_kernel_dzz, nome, propagator_p, weierstrass_p, weierstrass_p_series, Estimate, LatticeParams,
};
pub use num_complex::Complex64;
pub use qseries::{eisenstein, AlmostHolo, QSeries};
pub use twoloop::{two_loop_combination, two_loop_lhs, two_loop_rhs, relative_gap, LhsValue, RhsValue};

#[cfg(test)]
mod tests;
