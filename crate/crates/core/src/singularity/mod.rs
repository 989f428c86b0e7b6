//! Jacobian rings, Milnor numbers and truncated Brieskorn-lattice ranks of a
//! quasi-homogeneous isolated singularity, via the Koszul-type BV model
//! `ℚ[z_i][θ_i]` with `Δ = Σ ∂_{z_i}∂_{θ_i}`.

mod parse;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bv::{koszul_model, observables, ModuleSummand, ObsReport};
use crate::error::{arg, Error, Result};
use crate::graded::{Cutoff, Functional, Monomial};
use crate::linalg::{nullspace, rref, Matrix};
use crate::scalar::{fmt_q, q, Q};

/// `f ∈ ℚ[z_1..z_n]` with a critical point at the origin and positive
/// weights `w` making it quasi-homogeneous of weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Superpotential {
    n: usize,
    terms: BTreeMap<Vec<u16>, Q>,
    weights: Vec<Q>,
}

impl Superpotential {
    /// Parses `f`; `n` defaults to the largest variable index used.
    pub fn parse(s: &str, n: Option<usize>) -> Result<Self> {
        let sparse = parse::parse_poly(s)?;
        let used = sparse.keys().flat_map(|m| m.keys().copied()).max().map_or(0, |v| v + 1);
        let n = n.unwrap_or(used);
        if used > n {
            return arg(format!("polynomial uses z{used} but only {n} variables were declared"));
        }
        let terms = sparse
            .into_iter()
            .map(|(m, c)| {
                let mut e = vec![0u16; n];
                for (v, k) in m {
                    e[v] = k;
                }
                (e, c)
            })
            .collect();
        Superpotential::new(n, terms)
    }

    pub fn new(n: usize, terms: BTreeMap<Vec<u16>, Q>) -> Result<Self> {
        if n == 0 {
            return arg("need at least one variable");
        }
        let terms: BTreeMap<Vec<u16>, Q> =
            terms.into_iter().filter(|(e, c)| !c.is_zero() && e.iter().any(|&k| k > 0)).collect();
        if terms.is_empty() {
            return arg("superpotential is constant");
        }
        if terms.keys().any(|e| e.len() != n) {
            return arg("exponent vector length differs from n");
        }
        if terms.keys().any(|e| e.iter().map(|&k| k as u32).sum::<u32>() == 1) {
            return arg("origin is not a critical point (f has a linear term)");
        }
        let weights = qh_weights(n, &terms)
            .ok_or_else(|| Error::Argument("superpotential is not quasi-homogeneous".into()))?;
        Ok(Superpotential { n, terms, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max().unwrap_or(0)
    }

    /// Thom–Sebastiani sum `f(z) + g(z')` in disjoint variables.
    pub fn direct_sum(&self, other: &Superpotential) -> Result<Superpotential> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut v = e.clone();
            v.extend(std::iter::repeat(0).take(other.n));
            terms.insert(v, c.clone());
        }
        for (e, c) in &other.terms {
            let mut v = vec![0; self.n];
            v.extend(e);
            terms.insert(v, c.clone());
        }
        Superpotential::new(self.n + other.n, terms)
    }

    fn partial(&self, i: usize) -> BTreeMap<Vec<u16>, Q> {
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut m = e.clone();
                m[i] -= 1;
                out.insert(m, c * q(e[i] as i64));
            }
        }
        out
    }

    /// `f` on the coordinates `z_i` of the Koszul model.
    fn on_koszul(&self, hbar: u32) -> (crate::bv::BvModel, Functional) {
        let model = koszul_model(self.n);
        let mut f = Functional::zero(model.space().clone(), Cutoff::new(self.max_degree(), hbar));
        for (e, c) in &self.terms {
            let mut v = e.clone();
            v.extend(std::iter::repeat(0).take(self.n));
            f.add_term(Monomial::from_exponents(v), 0, c.clone());
        }
        (model, f)
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| format!("{}*{}", fmt_q(c), render(e))).collect();
        parts.join(" + ")
    }
}

fn render(e: &[u16]) -> String {
    let single = e.len() == 1;
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| {
            let v = if single { "z".to_string() } else { format!("z{}", i + 1) };
            if k == 1 {
                v
            } else {
                format!("{v}^{k}")
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Positive `w` with `⟨w, e⟩ = 1` for every exponent `e` of `f`, if one is found.
fn qh_weights(n: usize, terms: &BTreeMap<Vec<u16>, Q>) -> Option<Vec<Q>> {
    // solutions (w, t) of ⟨w, e⟩ − t = 0, rescaled to t = 1
    let m: Matrix = terms
        .keys()
        .map(|e| e.iter().map(|&k| q(k as i64)).chain(std::iter::once(q(-1))).collect())
        .collect();
    let basis = nullspace(&m, n + 1);
    if basis.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for attempt in 0..2000 {
        let coeffs: Vec<Q> = (0..basis.len())
            .map(|k| if attempt == 0 { q(1) } else { q(rng.gen_range(-4..=6)) + q((k == 0) as i64) })
            .collect();
        let v: Vec<Q> =
            (0..=n).map(|j| basis.iter().zip(&coeffs).map(|(b, c)| &b[j] * c).sum()).collect();
        if !v[n].is_positive() {
            continue;
        }
        let w: Vec<Q> = v[..n].iter().map(|x| x / &v[n]).collect();
        if w.iter().all(|x| x.is_positive()) {
            return Some(w);
        }
    }
    None
}

fn monomials_upto(n: usize, d: u32) -> Vec<Vec<u16>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.iter().map(|&k: &u16| k as u32).sum();
            for k in 0..=(d - used) {
                let mut v = m.clone();
                v.push(k as u16);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn deg(e: &[u16]) -> u32 {
    e.iter().map(|&k| k as u32).sum()
}

/// Monomial basis of `ℚ[z]_{≤D} / span{m·∂_i f : deg ≤ D}`.
fn quotient(f: &Superpotential, d: u32) -> Vec<Vec<u16>> {
    let mut monos = monomials_upto(f.n, d);
    // high degree first so the pivots eat the large monomials
    monos.sort_by(|a, b| deg(b).cmp(&deg(a)).then(b.cmp(a)));
    let index: BTreeMap<&Vec<u16>, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut rows: Matrix = Vec::new();
    for i in 0..f.n {
        let p = f.partial(i);
        let top = p.keys().map(|e| deg(e)).max().unwrap_or(0);
        if top > d {
            continue;
        }
        for m in monomials_upto(f.n, d - top) {
            let mut row = vec![Q::zero(); monos.len()];
            for (e, c) in &p {
                let prod: Vec<u16> = e.iter().zip(&m).map(|(a, b)| a + b).collect();
                row[index[&prod]] += c;
            }
            rows.push(row);
        }
    }
    let pivots = rref(&mut rows);
    let mut basis: Vec<Vec<u16>> =
        (0..monos.len()).filter(|c| !pivots.contains(c)).map(|c| monos[c].clone()).collect();
    basis.sort_by(|a, b| deg(a).cmp(&deg(b)).then(b.cmp(a)));
    basis
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianReport {
    pub degree: u32,
    pub milnor: usize,
    pub basis: Vec<String>,
    pub weights: Vec<String>,
}

/// `Jac(f) = ℚ[z]/(∂_i f)` with its stabilization certified at `D` and `D + 1`.
pub fn jacobian_ring(f: &Superpotential, degree: u32) -> Result<JacobianReport> {
    let a = quotient(f, degree);
    let b = quotient(f, degree + 1);
    if a.len() != b.len() {
        return Err(Error::NonIsolated(format!(
            "quotient dimension {} at degree {degree} but {} at degree {}; raise the degree or the critical point is not isolated",
            a.len(),
            b.len(),
            degree + 1
        )));
    }
    Ok(JacobianReport {
        degree,
        milnor: a.len(),
        basis: a.iter().map(|e| render(e)).collect(),
        weights: f.weights.iter().map(fmt_q).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalMatch {
    pub jacobian: JacobianReport,
    /// `(degree, dimension)` of the nonzero cohomology groups.
    pub cohomology: Vec<(i32, usize)>,
    pub concentrated: bool,
    pub matches: bool,
}

/// Compares `H•(ℚ[z][θ], {f, −})` with the Jacobian ring.
pub fn classical_observables_match(f: &Superpotential, degree: u32) -> Result<ClassicalMatch> {
    let jacobian = jacobian_ring(f, degree)?;
    let (model, func) = f.on_koszul(0);
    let obs = observables(&model, &func, false, degree, 0)?;
    let cohomology: Vec<(i32, usize)> =
        obs.degrees.iter().filter(|d| d.cohomology_dim > 0).map(|d| (d.degree, d.cohomology_dim)).collect();
    let concentrated = cohomology.iter().all(|(d, _)| *d == 0);
    let matches = concentrated && obs.cohomology(0) == jacobian.milnor;
    Ok(ClassicalMatch { jacobian, cohomology, concentrated, matches })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrieskornReport {
    pub milnor: usize,
    pub hbar: u32,
    pub free_rank: usize,
    pub torsion: Vec<ModuleSummand>,
    pub observables: ObsReport,
}

/// Cohomology of `ℏΔ + {f, −}` on the (weight, ℏ)-truncated complex.
pub fn brieskorn_rank(f: &Superpotential, degree: u32, hbar: u32) -> Result<BrieskornReport> {
    let jac = jacobian_ring(f, degree)?;
    let (model, func) = f.on_koszul(hbar);
    let obs = observables(&model, &func, true, degree, hbar)?;
    let d0 = obs.degrees.iter().find(|d| d.degree == 0);
    Ok(BrieskornReport {
        milnor: jac.milnor,
        hbar,
        free_rank: obs.free_rank(0),
        torsion: d0.map(|d| d.torsion.clone()).unwrap_or_default(),
        observables: obs,
    })
}

#[cfg(test)]
mod tests;
