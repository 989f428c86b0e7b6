use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::scalar::{fmt_q, q, serde_q, Q};

/// A formal even cohomology generator of the given form degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

/// `coeff · Π factors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTerm {
    pub factors: Vec<String>,
    #[serde(with = "serde_q")]
    pub coeff: Q,
}

/// The `ℏ^hbar` coefficient `ω_hbar` of `ω_ℏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaTerm {
    pub hbar: u32,
    pub class: Vec<ClassTerm>,
}

/// `∫_X Π factors = value` for a top-degree monomial; unlisted ones integrate to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexIntegral {
    pub factors: Vec<String>,
    #[serde(with = "serde_q")]
    pub value: Q,
}

/// Formal data for `∫_X e^{−ω_ℏ/ℏ} Â(X)`.
///
/// `root_squares` lists the Chern-root squares `x_i²` (degree-4 classes), so
/// `Â = Π (x_i/2)/sinh(x_i/2)` and a single root square equal to `p₁` gives
/// `Â = 1 − p₁/24 + …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexInput {
    pub dimension: u32,
    pub generators: Vec<Generator>,
    pub omega_hbar: Vec<OmegaTerm>,
    #[serde(default)]
    pub root_squares: Vec<Vec<ClassTerm>>,
    pub integrals: Vec<IndexIntegral>,
}

type Poly = BTreeMap<Vec<u32>, Q>;

struct Ring {
    degrees: Vec<u32>,
    top: u32,
}

impl Ring {
    fn form_degree(&self, e: &[u32]) -> u32 {
        e.iter().zip(&self.degrees).map(|(a, d)| a * d).sum()
    }

    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::new();
        for (ea, ca) in a {
            for (eb, cb) in b {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if self.form_degree(&e) > self.top {
                    continue;
                }
                *out.entry(e).or_insert_with(Q::zero) += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn one(&self) -> Poly {
        Poly::from([(vec![0; self.degrees.len()], q(1))])
    }
}

impl IndexInput {
    fn ring(&self) -> Result<Ring> {
        if self.dimension % 2 != 0 {
            return arg("dimension must be even");
        }
        let mut seen = std::collections::BTreeSet::new();
        for g in &self.generators {
            if g.degree == 0 || g.degree % 2 != 0 {
                return arg(format!("generator {} must have positive even degree", g.name));
            }
            if !seen.insert(&g.name) {
                return arg(format!("generator {} repeated", g.name));
            }
        }
        Ok(Ring { degrees: self.generators.iter().map(|g| g.degree).collect(), top: self.dimension })
    }

    fn exponents(&self, factors: &[String]) -> Result<Vec<u32>> {
        let mut e = vec![0; self.generators.len()];
        for f in factors {
            let i = self
                .generators
                .iter()
                .position(|g| &g.name == f)
                .ok_or_else(|| Error::Argument(format!("unknown generator {f}")))?;
            e[i] += 1;
        }
        Ok(e)
    }

    fn class(&self, ring: &Ring, terms: &[ClassTerm], degree: u32, what: &str) -> Result<Poly> {
        let mut p = Poly::new();
        for t in terms {
            let e = self.exponents(&t.factors)?;
            if ring.form_degree(&e) != degree {
                return arg(format!("{what} must have form degree {degree}"));
            }
            *p.entry(e).or_insert_with(Q::zero) += &t.coeff;
        }
        p.retain(|_, c| !c.is_zero());
        Ok(p)
    }

    /// Formal product `X × Y`: generators must be disjoint.
    pub fn product(&self, other: &IndexInput) -> Result<IndexInput> {
        let mut omega: BTreeMap<u32, Vec<ClassTerm>> = BTreeMap::new();
        for t in self.omega_hbar.iter().chain(&other.omega_hbar) {
            omega.entry(t.hbar).or_default().extend(t.class.iter().cloned());
        }
        let integrals = self
            .integrals
            .iter()
            .flat_map(|a| {
                other.integrals.iter().map(move |b| IndexIntegral {
                    factors: a.factors.iter().chain(&b.factors).cloned().collect(),
                    value: &a.value * &b.value,
                })
            })
            .collect();
        let out = IndexInput {
            dimension: self.dimension + other.dimension,
            generators: self.generators.iter().chain(&other.generators).cloned().collect(),
            omega_hbar: omega.into_iter().map(|(hbar, class)| OmegaTerm { hbar, class }).collect(),
            root_squares: self.root_squares.iter().chain(&other.root_squares).cloned().collect(),
            integrals,
        };
        out.ring()?;
        Ok(out)
    }
}

fn binomial(n: u64, k: u64) -> Q {
    (0..k).fold(q(1), |acc, i| acc * q((n - i) as i64) / q((i + 1) as i64))
}

/// Bernoulli numbers `B_0..=B_m` with `B_1 = −1/2`.
fn bernoulli(m: usize) -> Vec<Q> {
    let mut b: Vec<Q> = vec![q(1)];
    for n in 1..=m {
        let s: Q = (0..n).map(|k| binomial(n as u64 + 1, k as u64) * &b[k]).sum();
        b.push(-s / q(n as i64 + 1));
    }
    b
}

/// Coefficients `a_j` of `(x/2)/sinh(x/2) = Σ a_j x^{2j}`, `j = 0..=order`.
pub fn a_hat_coefficients(order: usize) -> Vec<Q> {
    let b = bernoulli(2 * order);
    let mut fact = q(1);
    let mut out = Vec::with_capacity(order + 1);
    for j in 0..=order {
        if j > 0 {
            fact = fact * q((2 * j - 1) as i64) * q((2 * j) as i64);
        }
        let two = if j == 0 { q(2) } else { q(1) / Q::from_integer(num_bigint::BigInt::from(2).pow(2 * j as u32 - 1)) };
        out.push((two - q(1)) * &b[2 * j] / &fact);
    }
    out
}

/// Laurent series in ℏ: power → coefficient.
type Series = BTreeMap<i32, Poly>;

fn series_mul(ring: &Ring, a: &Series, b: &Series, max_h: i32) -> Series {
    let mut out = Series::new();
    for (ha, pa) in a {
        for (hb, pb) in b {
            if ha + hb > max_h {
                continue;
            }
            let p = ring.mul(pa, pb);
            let e = out.entry(ha + hb).or_default();
            for (k, c) in p {
                *e.entry(k).or_insert_with(Q::zero) += c;
            }
        }
    }
    for p in out.values_mut() {
        p.retain(|_, c| !c.is_zero());
    }
    out.retain(|_, p| !p.is_empty());
    out
}

fn series_exp(ring: &Ring, x: &Series, max_h: i32) -> Series {
    let mut out = Series::from([(0, ring.one())]);
    let mut power = out.clone();
    let mut k = 1i64;
    // every term of x has positive form degree, so powers die past the top degree
    loop {
        power = series_mul(ring, &power, x, max_h);
        for p in power.values_mut() {
            for c in p.values_mut() {
                *c /= q(k);
            }
        }
        if power.is_empty() {
            break;
        }
        for (h, p) in &power {
            let e = out.entry(*h).or_default();
            for (m, c) in p {
                *e.entry(m.clone()).or_insert_with(Q::zero) += c;
            }
        }
        k += 1;
    }
    out
}

/// `∫_X e^{−ω_ℏ/ℏ} Â(X)` as a Laurent series in ℏ, up to `ℏ^hbar`.
pub fn algebraic_index(inp: &IndexInput, hbar: u32) -> Result<BTreeMap<i32, Q>> {
    let ring = inp.ring()?;
    let n = (inp.dimension / 2) as i32;
    // negative powers come with form degree, so n extra orders keep ℏ^hbar exact
    let max_h = hbar as i32 + n;
    let mut x = Series::new();
    for t in &inp.omega_hbar {
        let c = inp.class(&ring, &t.class, 2, "ω_ℏ terms")?;
        let e = x.entry(t.hbar as i32 - 1).or_default();
        for (m, v) in c {
            *e.entry(m).or_insert_with(Q::zero) -= v;
        }
    }
    let mut total = series_exp(&ring, &x, max_h);
    let order = (inp.dimension / 4) as usize;
    let coeffs = a_hat_coefficients(order);
    for root in &inp.root_squares {
        let y = inp.class(&ring, root, 4, "Chern-root squares")?;
        let mut f = ring.one();
        let mut power = ring.one();
        for a in coeffs.iter().skip(1) {
            power = ring.mul(&power, &y);
            for (m, c) in &power {
                *f.entry(m.clone()).or_insert_with(Q::zero) += c * a;
            }
        }
        total = series_mul(&ring, &total, &Series::from([(0, f)]), max_h);
    }
    let mut integrals: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    for i in &inp.integrals {
        let e = inp.exponents(&i.factors)?;
        if ring.form_degree(&e) != inp.dimension {
            return arg("integrals must be given on top-degree monomials");
        }
        integrals.insert(e, i.value.clone());
    }
    let mut out = BTreeMap::new();
    for (h, p) in total {
        if h > hbar as i32 {
            continue;
        }
        let mut v = q(0);
        for (m, c) in p {
            if ring.form_degree(&m) != inp.dimension {
                continue;
            }
            if let Some(val) = integrals.get(&m) {
                v += c * val;
            }
        }
        if !v.is_zero() {
            out.insert(h, v);
        }
    }
    Ok(out)
}

pub fn index_to_json(series: &BTreeMap<i32, Q>) -> serde_json::Value {
    serde_json::Value::Array(
        series.iter().map(|(h, c)| serde_json::json!({"hbar": h, "coeff": fmt_q(c)})).collect(),
    )
}
