use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::terms::{self, add_term, TermMap};
use super::{DgSpace, Kernel2, Monomial};
use crate::error::{arg, Error, Result};
use crate::scalar::{fmt_q, serde_q, Q};

/// Truncation of `O(V)[[ℏ]]`: polynomial degree ≤ `degree`, ℏ-power ≤ `hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cutoff {
    pub degree: u32,
    pub hbar: u32,
}

impl Cutoff {
    pub fn new(degree: u32, hbar: u32) -> Self {
        Cutoff { degree, hbar }
    }

    pub fn admits(&self, m: &Monomial, h: i32) -> bool {
        h >= 0 && h as u32 <= self.hbar && m.degree() <= self.degree
    }
}

/// A truncated formal power series in the coordinates of a [`DgSpace`] and ℏ,
/// with exact rational coefficients.
#[derive(Clone, PartialEq)]
pub struct Functional {
    space: Arc<DgSpace>,
    cutoff: Cutoff,
    terms: TermMap,
}

impl Functional {
    pub fn zero(space: Arc<DgSpace>, cutoff: Cutoff) -> Self {
        Functional { space, cutoff, terms: TermMap::new() }
    }

    pub fn constant(space: Arc<DgSpace>, cutoff: Cutoff, c: Q) -> Self {
        let mut f = Self::zero(space, cutoff);
        let n = f.space.dim();
        f.add_term(Monomial::one(n), 0, c);
        f
    }

    pub fn one(space: Arc<DgSpace>, cutoff: Cutoff) -> Self {
        Self::constant(space, cutoff, Q::one())
    }

    pub fn var(space: Arc<DgSpace>, cutoff: Cutoff, i: usize) -> Self {
        let mut f = Self::zero(space, cutoff);
        let n = f.space.dim();
        f.add_term(Monomial::var(n, i), 0, Q::one());
        f
    }

    /// Single term `c · ℏ^h · (ordered product of factors)`, normalized.
    pub fn term(space: Arc<DgSpace>, cutoff: Cutoff, factors: &[usize], hbar: u32, c: Q) -> Self {
        let mut f = Self::zero(space, cutoff);
        if let Some((m, s)) = Monomial::from_factors(factors, f.space.degrees()) {
            f.add_term(m, hbar as i32, if s < 0 { -c } else { c });
        }
        f
    }

    pub(crate) fn from_map(space: Arc<DgSpace>, cutoff: Cutoff, map: TermMap) -> Self {
        let terms = terms::filter_map(map, &|m, h| cutoff.admits(m, h));
        Functional { space, cutoff, terms }
    }

    /// Adds `c·ℏ^h·m` if it fits the cutoff; silently drops it otherwise.
    pub fn add_term(&mut self, m: Monomial, h: i32, c: Q) {
        if self.cutoff.admits(&m, h) {
            add_term(&mut self.terms, (m, h), c);
        }
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32, &Q)> {
        self.terms.iter().map(|((m, h), c)| (m, *h as u32, c))
    }

    pub fn coefficient(&self, m: &Monomial, h: u32) -> Q {
        self.terms.get(&(m.clone(), h as i32)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn max_hbar(&self) -> u32 {
        self.terms.keys().map(|(_, h)| *h as u32).max().unwrap_or(0)
    }

    /// Same terms under a different cutoff (terms outside it are dropped).
    pub fn with_cutoff(&self, cutoff: Cutoff) -> Self {
        Self::from_map(self.space.clone(), cutoff, self.terms.clone())
    }

    /// Keeps only terms with polynomial degree + 2·(ℏ-power) ≤ `max`.
    pub fn truncate_weight(&self, max: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|((m, h), _)| m.degree() + 2 * (*h as u32) <= max)
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        Functional { space: self.space.clone(), cutoff: self.cutoff, terms }
    }

    /// The ℏ^k coefficient as an ℏ-free functional.
    pub fn hbar_part(&self, k: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|((_, h), _)| *h as u32 == k)
            .map(|((m, _), c)| ((m.clone(), 0), c.clone()))
            .collect();
        Functional { space: self.space.clone(), cutoff: self.cutoff, terms }
    }

    /// Multiplies by ℏ^k (terms pushed past the cutoff are dropped).
    pub fn hbar_shift(&self, k: u32) -> Self {
        let map = self.terms.iter().map(|((m, h), c)| ((m.clone(), h + k as i32), c.clone())).collect();
        Self::from_map(self.space.clone(), self.cutoff, map)
    }

    /// Internal degree when all terms share one.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|(m, _)| m.weight(self.space.degrees()));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Splits into components of fixed internal degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<i32, Functional> {
        let mut out: BTreeMap<i32, Functional> = BTreeMap::new();
        for ((m, h), c) in &self.terms {
            let d = m.weight(self.space.degrees());
            out.entry(d)
                .or_insert_with(|| Functional::zero(self.space.clone(), self.cutoff))
                .terms
                .insert((m.clone(), *h), c.clone());
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|(m, _)| !m.is_odd(self.space.degrees()))
    }

    /// True iff every ℏ⁰ term has polynomial degree ≥ 3.
    pub fn is_plus(&self) -> bool {
        self.terms.keys().all(|(m, h)| *h > 0 || m.degree() >= 3)
    }

    fn compatible(&self, other: &Functional) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Space("functionals live on different spaces".into()));
        }
        if self.cutoff != other.cutoff {
            return Err(Error::Cutoff(format!("{:?} vs {:?}", self.cutoff, other.cutoff)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Functional) -> Result<Functional> {
        self.compatible(other)?;
        Ok(Functional {
            space: self.space.clone(),
            cutoff: self.cutoff,
            terms: terms::add_maps(&self.terms, &other.terms, &Q::one()),
        })
    }

    pub fn sub(&self, other: &Functional) -> Result<Functional> {
        self.compatible(other)?;
        Ok(Functional {
            space: self.space.clone(),
            cutoff: self.cutoff,
            terms: terms::add_maps(&self.terms, &other.terms, &-Q::one()),
        })
    }

    pub fn scale(&self, s: &Q) -> Functional {
        Functional { space: self.space.clone(), cutoff: self.cutoff, terms: terms::scale_map(&self.terms, s) }
    }

    pub fn neg(&self) -> Functional {
        self.scale(&-Q::one())
    }

    /// Graded-commutative product truncated at the shared cutoff.
    pub fn mul(&self, other: &Functional) -> Result<Functional> {
        self.compatible(other)?;
        let cut = self.cutoff;
        let terms = terms::mul_maps(&self.terms, &other.terms, self.space.degrees(), &|m, h| cut.admits(m, h));
        Ok(Functional { space: self.space.clone(), cutoff: cut, terms })
    }

    /// Left derivative ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> Functional {
        Functional {
            space: self.space.clone(),
            cutoff: self.cutoff,
            terms: terms::derivative_map(&self.terms, i, self.space.degrees()),
        }
    }

    /// The second-order operator ∂_K: on a monomial, the sum over unordered
    /// pairs of factor slots of `K` evaluated on that pair, with the Koszul
    /// sign of moving the pair to the front.
    pub fn contract(&self, k: &Kernel2) -> Result<Functional> {
        if **k.space() != *self.space {
            return Err(Error::Space("kernel and functional live on different spaces".into()));
        }
        Ok(Functional {
            space: self.space.clone(),
            cutoff: self.cutoff,
            terms: terms::contract_map(&self.terms, k.sparse(), self.space.degrees()),
        })
    }

    /// The differential extended as a degree-one derivation.
    pub fn apply_q(&self) -> Functional {
        let diff = terms::sparse_entries(self.space.diff());
        Functional {
            space: self.space.clone(),
            cutoff: self.cutoff,
            terms: terms::apply_q_map(&self.terms, &diff, self.space.degrees()),
        }
    }

    /// Substitutes ℏ = 0.
    pub fn classical(&self) -> Functional {
        self.hbar_part(0)
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|((m, h), c)| TermJson {
                monomial: m.factors().into_iter().map(|i| self.space.name(i).to_string()).collect(),
                hbar: *h as u32,
                coeff: c.clone(),
            })
            .collect()
    }

    pub fn from_json(space: Arc<DgSpace>, cutoff: Cutoff, terms: &[TermJson]) -> Result<Functional> {
        let mut f = Functional::zero(space, cutoff);
        for t in terms {
            let mut idx = Vec::with_capacity(t.monomial.len());
            for name in &t.monomial {
                idx.push(
                    f.space
                        .index_of(name)
                        .ok_or_else(|| Error::Parse(format!("unknown basis symbol {name:?}")))?,
                );
            }
            if t.monomial.len() as u32 > cutoff.degree || t.hbar > cutoff.hbar {
                return arg(format!("term {:?}·ℏ^{} exceeds the cutoff {cutoff:?}", t.monomial, t.hbar));
            }
            if let Some((m, s)) = Monomial::from_factors(&idx, f.space.degrees()) {
                let c = if s < 0 { -t.coeff.clone() } else { t.coeff.clone() };
                add_term(&mut f.terms, (m, t.hbar as i32), c);
            }
        }
        Ok(f)
    }
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Functional[{:?}]({})", self.cutoff, self)
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((m, h), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", fmt_q(c))?;
            if !m.is_one() {
                write!(f, "*{}", m.render(self.space.names()))?;
            }
            match h {
                0 => {}
                1 => write!(f, "*hbar")?,
                h => write!(f, "*hbar^{h}")?,
            }
        }
        Ok(())
    }
}

/// Wire form of one term: `{"monomial": [names], "hbar": int, "coeff": "p/q"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub monomial: Vec<String>,
    #[serde(default)]
    pub hbar: u32,
    #[serde(with = "serde_q")]
    pub coeff: Q,
}
