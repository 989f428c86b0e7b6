use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::monomial::odd;
use super::terms::{apply_q_map, contract_map, sparse_entries, TermMap};
use super::{DgSpace, Monomial};
use crate::error::{arg, Error, Result};
use crate::scalar::{serde_qmat, Q};

/// A graded-symmetric two-tensor acting as the constant-coefficient operator
/// `∂_K = ½ Σ K^{ij} ∂_i ∂_j`.
///
/// `degree` is the degree of that operator, so a nonzero entry `(i, j)` needs
/// `-(deg x_i + deg x_j) = degree`. BV kernels have degree 1, propagators 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2 {
    space: Arc<DgSpace>,
    degree: i32,
    entries: Vec<Vec<Q>>,
    sparse: Vec<(usize, usize, Q)>,
}

impl Kernel2 {
    pub fn new(space: Arc<DgSpace>, degree: i32, entries: Vec<Vec<Q>>) -> Result<Self> {
        let n = space.dim();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return arg(format!("kernel must be a {n}x{n} matrix"));
        }
        for i in 0..n {
            for j in 0..n {
                let kij = &entries[i][j];
                if kij.is_zero() {
                    if !entries[j][i].is_zero() {
                        return arg("kernel is not graded-symmetric");
                    }
                    continue;
                }
                if -(space.degree(i) + space.degree(j)) != degree {
                    return arg(format!(
                        "kernel entry ({},{}) has degree {} but the kernel is declared degree {degree}",
                        space.name(i),
                        space.name(j),
                        -(space.degree(i) + space.degree(j))
                    ));
                }
                let s = if odd(space.degree(i)) && odd(space.degree(j)) { -kij.clone() } else { kij.clone() };
                if s != entries[j][i] {
                    return arg("kernel is not graded-symmetric");
                }
            }
        }
        let sparse = sparse_entries(&entries);
        Ok(Kernel2 { space, degree, entries, sparse })
    }

    pub fn zero(space: Arc<DgSpace>, degree: i32) -> Self {
        let n = space.dim();
        Kernel2 { space, degree, entries: vec![vec![Q::zero(); n]; n], sparse: vec![] }
    }

    /// Sets `K^{ij}` and its graded-symmetric partner.
    pub fn with_pair(mut self, i: usize, j: usize, value: Q) -> Result<Self> {
        let d = &self.space;
        if !value.is_zero() && -(d.degree(i) + d.degree(j)) != self.degree {
            return arg("pair has the wrong degree for this kernel");
        }
        if i == j && odd(d.degree(i)) && !value.is_zero() {
            return arg("diagonal entry of an odd coordinate must vanish");
        }
        let partner = if odd(d.degree(i)) && odd(d.degree(j)) { -value.clone() } else { value.clone() };
        self.entries[i][j] = value;
        self.entries[j][i] = partner;
        self.sparse = sparse_entries(&self.entries);
        Ok(self)
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn entries(&self) -> &[Vec<Q>] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &Q {
        &self.entries[i][j]
    }

    pub(crate) fn sparse(&self) -> &[(usize, usize, Q)] {
        &self.sparse
    }

    pub fn is_zero(&self) -> bool {
        self.sparse.is_empty()
    }

    pub fn add(&self, other: &Kernel2) -> Result<Kernel2> {
        self.check_same(other)?;
        let e = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Kernel2::new(self.space.clone(), self.degree, e)
    }

    pub fn scale(&self, s: &Q) -> Kernel2 {
        let e = self.entries.iter().map(|r| r.iter().map(|x| x * s).collect()).collect();
        Kernel2::new(self.space.clone(), self.degree, e).expect("scaling preserves symmetry")
    }

    fn check_same(&self, other: &Kernel2) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Space("kernels live on different spaces".into()));
        }
        if self.degree != other.degree {
            return arg("kernels have different degrees");
        }
        Ok(())
    }

    /// The kernel `Q(K)` of the operator `-[Q, ∂_K]`.
    ///
    /// With this sign `[Q, ∂_P] = Δ_K − Δ_{K + Q(P)}` for every propagator `P`.
    /// The graded commutator of the linear vector field `Q` with a
    /// constant-coefficient second-order operator is again one, so it is read
    /// off from its values on quadratic monomials.
    pub fn apply_q(&self) -> Kernel2 {
        let sp = &self.space;
        let n = sp.dim();
        let degs = sp.degrees();
        let diff = sparse_entries(sp.diff());
        let mut out = vec![vec![Q::zero(); n]; n];
        let op_odd = odd(self.degree);
        for a in 0..n {
            for b in a..n {
                if a == b && odd(degs[a]) {
                    continue;
                }
                let mut e = vec![0u16; n];
                e[a] += 1;
                e[b] += 1;
                let mut t = TermMap::new();
                t.insert((Monomial(e), 0), Q::from_integer(1.into()));
                // Q ∂_K − (−1)^{|K|} ∂_K Q
                let first = apply_q_map(&contract_map(&t, &self.sparse, degs), &diff, degs);
                let second = contract_map(&apply_q_map(&t, &diff, degs), &self.sparse, degs);
                let mut c = Q::zero();
                for (_, v) in first {
                    c += v;
                }
                for (_, v) in second {
                    if op_odd {
                        c += v;
                    } else {
                        c -= v;
                    }
                }
                let c = -c;
                if c.is_zero() {
                    continue;
                }
                // ∂_L(x_a x_b) = L^{ba} for a < b, and L^{aa} for a = b even
                out[b][a] = c.clone();
                out[a][b] = if odd(degs[a]) && odd(degs[b]) { -c } else { c };
            }
        }
        Kernel2::new(self.space.clone(), self.degree + 1, out).expect("Q(K) is graded-symmetric")
    }

    pub fn to_json(&self) -> Kernel2Json {
        Kernel2Json { degree: self.degree, entries: self.entries.clone() }
    }

    pub fn from_json(space: Arc<DgSpace>, j: &Kernel2Json) -> Result<Self> {
        Kernel2::new(space, j.degree, j.entries.clone()).map_err(|e| match e {
            Error::Argument(m) => Error::Parse(m),
            e => e,
        })
    }
}

/// Wire form: `{"degree": int, "entries": [["p/q", ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Kernel2Json {
    pub degree: i32,
    #[serde(with = "serde_qmat")]
    pub entries: Vec<Vec<Q>>,
}
