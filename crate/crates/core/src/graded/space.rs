use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::scalar::{serde_qmat, Q};
use num_traits::Zero;

/// A finite ℤ-graded space of coordinate functions with a linear differential.
///
/// `basis[i]` names the coordinate `x_i` and `degrees[i]` is its degree as a
/// function. The differential acts on coordinates by
/// `Q(x_j) = Σ_i diff[i][j] x_i`, so `diff[i][j] ≠ 0` requires
/// `degrees[i] = degrees[j] + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgSpace {
    names: Vec<String>,
    degrees: Vec<i32>,
    diff: Vec<Vec<Q>>,
}

impl DgSpace {
    pub fn new(names: Vec<String>, degrees: Vec<i32>, diff: Vec<Vec<Q>>) -> Result<Self> {
        let n = names.len();
        if degrees.len() != n {
            return arg("degree list length differs from basis length");
        }
        if n > u16::MAX as usize {
            return arg("basis too large");
        }
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() {
                return arg("empty basis name");
            }
            if names[..i].contains(a) {
                return arg(format!("duplicate basis name {a:?}"));
            }
        }
        if diff.len() != n || diff.iter().any(|r| r.len() != n) {
            return arg(format!("differential must be a {n}x{n} matrix"));
        }
        for i in 0..n {
            for j in 0..n {
                if !diff[i][j].is_zero() && degrees[i] != degrees[j] + 1 {
                    return arg(format!(
                        "differential entry ({},{}) does not raise degree by one",
                        names[i], names[j]
                    ));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = Q::zero();
                for k in 0..n {
                    if !diff[i][k].is_zero() && !diff[k][j].is_zero() {
                        s += &diff[i][k] * &diff[k][j];
                    }
                }
                if !s.is_zero() {
                    return arg("differential does not square to zero");
                }
            }
        }
        Ok(DgSpace { names, degrees, diff })
    }

    /// Graded space with vanishing differential.
    pub fn graded<S: Into<String>>(basis: impl IntoIterator<Item = (S, i32)>) -> Result<Self> {
        let (names, degrees): (Vec<String>, Vec<i32>) =
            basis.into_iter().map(|(s, d)| (s.into(), d)).unzip();
        let n = names.len();
        Self::new(names, degrees, vec![vec![Q::zero(); n]; n])
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.degrees[i].rem_euclid(2) == 1
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn diff(&self) -> &[Vec<Q>] {
        &self.diff
    }

    pub fn has_differential(&self) -> bool {
        self.diff.iter().flatten().any(|c| !c.is_zero())
    }

    /// Same coordinates, new differential.
    pub fn with_diff(&self, diff: Vec<Vec<Q>>) -> Result<Self> {
        Self::new(self.names.clone(), self.degrees.clone(), diff)
    }

    pub fn to_json(&self) -> DgSpaceJson {
        DgSpaceJson {
            basis: self
                .names
                .iter()
                .zip(&self.degrees)
                .map(|(n, d)| BasisEntry { name: n.clone(), degree: *d })
                .collect(),
            diff: Some(self.diff.clone()),
        }
    }

    pub fn from_json(j: &DgSpaceJson) -> Result<Self> {
        let names: Vec<String> = j.basis.iter().map(|b| b.name.clone()).collect();
        let degrees = j.basis.iter().map(|b| b.degree).collect();
        let n = names.len();
        let diff = j.diff.clone().unwrap_or_else(|| vec![vec![Q::zero(); n]; n]);
        Self::new(names, degrees, diff).map_err(|e| match e {
            Error::Argument(m) => Error::Parse(m),
            e => e,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisEntry {
    pub name: String,
    pub degree: i32,
}

/// Wire form: `{"basis": [{"name", "degree"}], "diff": [["p/q", ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DgSpaceJson {
    pub basis: Vec<BasisEntry>,
    #[serde(default, with = "opt_qmat", skip_serializing_if = "Option::is_none")]
    pub diff: Option<Vec<Vec<Q>>>,
}

mod opt_qmat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<Vec<Vec<Q>>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match m {
            Some(m) => serde_qmat::serialize(m, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Vec<Q>>>, D::Error> {
        serde_qmat::deserialize(d).map(Some)
    }
}
