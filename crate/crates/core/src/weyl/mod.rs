//! Moyal–Weyl star product on a linear symplectic space, mode-truncated
//! topological quantum mechanics on the circle and the algebraic index.

mod index;
mod tqm;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graded::terms::{add_term, TermMap};
use crate::graded::{Cutoff, DgSpace, Functional, Monomial};
use crate::linalg::{inverse, transpose, Matrix};
use crate::scalar::{q, serde_qmat, Q};

pub use index::{
    a_hat_coefficients, algebraic_index, index_to_json, ClassTerm, Generator, IndexInput, IndexIntegral, OmegaTerm,
};
pub use tqm::{qme_vs_star, tqm_effective, ConvergenceReport, ModeModel, NReport};

/// Even coordinates with a nondegenerate antisymmetric pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    space: Arc<DgSpace>,
    pairing: Matrix,
    poisson: Matrix,
}

impl SymplecticSpace {
    pub fn new(names: Vec<String>, pairing: Matrix) -> Result<Self> {
        let n = names.len();
        if pairing.len() != n || pairing.iter().any(|r| r.len() != n) {
            return arg(format!("pairing must be {n}x{n}"));
        }
        for i in 0..n {
            for j in 0..n {
                if pairing[i][j] != -pairing[j][i].clone() {
                    return arg("pairing is not antisymmetric");
                }
            }
        }
        let inv = inverse(&pairing).ok_or_else(|| Error::Argument("pairing is degenerate".into()))?;
        let space = Arc::new(DgSpace::graded(names.into_iter().map(|s| (s, 0)))?);
        Ok(SymplecticSpace { space, pairing, poisson: transpose(&inv) })
    }

    /// Canonical pairs `x1..xn, p1..pn` with `(x_i, p_i) = 1` (just `x, p` for n = 1).
    pub fn canonical(n: usize) -> Self {
        let names: Vec<String> = if n == 1 {
            vec!["x".into(), "p".into()]
        } else {
            (1..=n).map(|i| format!("x{i}")).chain((1..=n).map(|i| format!("p{i}"))).collect()
        };
        let mut w = vec![vec![Q::zero(); 2 * n]; 2 * n];
        for i in 0..n {
            w[i][n + i] = q(1);
            w[n + i][i] = q(-1);
        }
        SymplecticSpace::new(names, w).expect("standard form")
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn pairing(&self) -> &Matrix {
        &self.pairing
    }

    /// `Π^{ij} = {x_i, x_j}`.
    pub fn poisson(&self) -> &Matrix {
        &self.poisson
    }

    pub fn to_json(&self) -> SymplecticJson {
        SymplecticJson { basis: self.space.names().to_vec(), pairing: self.pairing.clone() }
    }

    pub fn from_json(j: &SymplecticJson) -> Result<Self> {
        SymplecticSpace::new(j.basis.clone(), j.pairing.clone()).map_err(|e| match e {
            Error::Argument(m) => Error::Parse(m),
            e => e,
        })
    }
}

/// `{"basis": ["x", "p"], "pairing": [[0, 1], [-1, 0]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymplecticJson {
    pub basis: Vec<String>,
    #[serde(with = "serde_qmat")]
    pub pairing: Matrix,
}

fn check(sp: &SymplecticSpace, a: &Functional, b: &Functional) -> Result<()> {
    if **a.space() != *sp.space || **b.space() != *sp.space {
        return Err(Error::Space("functional is not on the symplectic space".into()));
    }
    if a.cutoff() != b.cutoff() {
        return Err(Error::Cutoff(format!("{:?} vs {:?}", a.cutoff(), b.cutoff())));
    }
    Ok(())
}

/// `Π(a, b) = Σ Π^{ij} ∂_i a ∂_j b`.
pub fn poisson_bracket(sp: &SymplecticSpace, a: &Functional, b: &Functional) -> Result<Functional> {
    check(sp, a, b)?;
    let mut out = Functional::zero(sp.space.clone(), a.cutoff());
    for (i, row) in sp.poisson.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&a.derivative(i).mul(&b.derivative(j))?.scale(c))?;
            }
        }
    }
    Ok(out)
}

/// `a ⋆ b = Σ_k (ℏ/2)^k / k! Π^k(a, b)`, truncated at the shared cutoff.
pub fn moyal(sp: &SymplecticSpace, a: &Functional, b: &Functional) -> Result<Functional> {
    check(sp, a, b)?;
    let cut = a.cutoff();
    let degs = sp.space.degrees();
    let entries: Vec<(usize, usize, Q)> = sp
        .poisson
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(j, c)| (i, j, c.clone())))
        .collect();
    // pairs (monomial of a, monomial of b, ℏ power) carried through k applications of Π
    let mut cur: BTreeMap<(Monomial, Monomial, i32), Q> = BTreeMap::new();
    for (ma, ha, ca) in a.terms() {
        for (mb, hb, cb) in b.terms() {
            let h = (ha + hb) as i32;
            if h as u32 <= cut.hbar {
                let e = cur.entry((ma.clone(), mb.clone(), h)).or_insert_with(Q::zero);
                *e += ca * cb;
            }
        }
    }
    let mut out = TermMap::new();
    let mut k = 0i64;
    let mut scale = q(1);
    while !cur.is_empty() {
        for ((ma, mb, h), c) in &cur {
            if let Some((m, s)) = ma.mul(mb, degs) {
                if cut.admits(&m, *h) {
                    add_term(&mut out, (m, *h), c * &scale * q(s as i64));
                }
            }
        }
        k += 1;
        scale = scale / q(2 * k);
        let mut next: BTreeMap<(Monomial, Monomial, i32), Q> = BTreeMap::new();
        for ((ma, mb, h), c) in &cur {
            if (h + 1) as u32 > cut.hbar {
                continue;
            }
            for (i, j, p) in &entries {
                let Some((da, fa)) = ma.left_derivative(*i, degs) else { continue };
                let Some((db, fb)) = mb.left_derivative(*j, degs) else { continue };
                let e = next.entry((da, db, h + 1)).or_insert_with(Q::zero);
                *e += c * p * q(fa * fb);
            }
        }
        next.retain(|_, c| !c.is_zero());
        cur = next;
    }
    Ok(Functional::from_map(sp.space.clone(), cut, out))
}

/// `[a, b]_⋆ = a ⋆ b − b ⋆ a` (all coordinates are even).
pub fn star_commutator(sp: &SymplecticSpace, a: &Functional, b: &Functional) -> Result<Functional> {
    moyal(sp, a, b)?.sub(&moyal(sp, b, a)?)
}

/// Functional on the symplectic space from `(exponents, ℏ power, coefficient)`.
pub fn polynomial(sp: &SymplecticSpace, cutoff: Cutoff, terms: &[(&[u16], u32, Q)]) -> Functional {
    let mut f = Functional::zero(sp.space.clone(), cutoff);
    for (e, h, c) in terms {
        f.add_term(Monomial::from_exponents(e.to_vec()), *h as i32, c.clone());
    }
    f
}

#[cfg(test)]
mod tests;
