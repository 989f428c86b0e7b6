use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{arg, Error, Result};
use crate::scalar::{fmt_q, q, to_f64, Q};

/// `Σ_{n ≤ M} a_n qⁿ` with exact coefficients and a modular weight tag.
#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    coeffs: Vec<Q>,
    weight: i32,
}

impl QSeries {
    pub fn new(coeffs: Vec<Q>, weight: i32) -> Result<Self> {
        if coeffs.is_empty() {
            return arg("q-series needs at least the constant term");
        }
        Ok(QSeries { coeffs, weight })
    }

    pub fn constant(c: Q, order: usize, weight: i32) -> Self {
        let mut coeffs = vec![Q::zero(); order + 1];
        coeffs[0] = c;
        QSeries { coeffs, weight }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn coeff(&self, n: usize) -> &Q {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    fn check(&self, other: &QSeries) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::Cutoff(format!("q-orders {} and {}", self.order(), other.order())));
        }
        Ok(())
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        self.check(other)?;
        if self.weight != other.weight {
            return arg(format!("cannot add weights {} and {}", self.weight, other.weight));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(QSeries { coeffs, weight: self.weight })
    }

    pub fn scale(&self, s: &Q) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().map(|c| c * s).collect(), weight: self.weight }
    }

    pub fn mul(&self, other: &QSeries) -> Result<QSeries> {
        self.check(other)?;
        let m = self.order();
        let mut coeffs = vec![Q::zero(); m + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=m - i].iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Ok(QSeries { coeffs, weight: self.weight + other.weight })
    }

    /// Value at `q` (|q| < 1), plus the size of the last retained term as a tail proxy.
    pub fn eval(&self, qv: Complex64) -> (Complex64, f64) {
        let mut acc = Complex64::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * qv + to_f64(c);
        }
        let last = to_f64(&self.coeffs[self.order()]).abs() * qv.norm().powi(self.order() as i32);
        (acc, last)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "coefficients": self.coeffs.iter().map(fmt_q).collect::<Vec<_>>(),
        })
    }
}

fn sigma(k: u32, n: usize) -> Q {
    let mut s = q(0);
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += q(d as i64).pow(k as i32);
            let e = n / d;
            if e != d {
                s += q(e as i64).pow(k as i32);
            }
        }
        d += 1;
    }
    s
}

/// `E_k = 1 + c_k Σ σ_{k−1}(n) qⁿ` with `c₂ = −24`, `c₄ = 240`, `c₆ = −504`.
pub fn eisenstein(k: u32, order: usize) -> Result<QSeries> {
    let c = match k {
        2 => q(-24),
        4 => q(240),
        6 => q(-504),
        _ => return arg(format!("E_{k} is not provided (k must be 2, 4 or 6)")),
    };
    let mut coeffs = vec![q(1)];
    coeffs.extend((1..=order).map(|n| &c * sigma(k - 1, n)));
    Ok(QSeries { coeffs, weight: k as i32 })
}

/// Polynomial in `Y = E₂*` with q-series coefficients, homogeneous of `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostHolo {
    terms: BTreeMap<u32, QSeries>,
    weight: i32,
    order: usize,
}

impl AlmostHolo {
    pub fn from_series(s: QSeries) -> Self {
        AlmostHolo { weight: s.weight, order: s.order(), terms: BTreeMap::from([(0, s)]) }
    }

    /// The generator `Y = E₂*`.
    pub fn y(order: usize) -> Self {
        AlmostHolo { weight: 2, order, terms: BTreeMap::from([(1, QSeries::constant(q(1), order, 0))]) }
    }

    pub fn one(order: usize) -> Self {
        AlmostHolo::from_series(QSeries::constant(q(1), order, 0))
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn y_degree(&self) -> u32 {
        self.terms.keys().copied().max().unwrap_or(0)
    }

    pub fn coefficient(&self, y: u32) -> Option<&QSeries> {
        self.terms.get(&y)
    }

    /// Every term `Y^j·f` has `2j + weight(f)` equal to the tag.
    pub fn is_homogeneous(&self) -> bool {
        self.terms.iter().all(|(j, s)| 2 * *j as i32 + s.weight == self.weight)
    }

    pub fn add(&self, other: &AlmostHolo) -> Result<AlmostHolo> {
        if self.weight != other.weight {
            return arg(format!("cannot add weights {} and {}", self.weight, other.weight));
        }
        let mut terms = self.terms.clone();
        for (j, s) in &other.terms {
            let v = match terms.get(j) {
                Some(t) => t.add(s)?,
                None => s.clone(),
            };
            terms.insert(*j, v);
        }
        Ok(AlmostHolo { terms, ..*self })
    }

    pub fn scale(&self, c: &Q) -> AlmostHolo {
        AlmostHolo { terms: self.terms.iter().map(|(j, s)| (*j, s.scale(c))).collect(), ..*self }
    }

    pub fn mul(&self, other: &AlmostHolo) -> Result<AlmostHolo> {
        if self.order != other.order {
            return Err(Error::Cutoff(format!("q-orders {} and {}", self.order, other.order)));
        }
        let mut terms: BTreeMap<u32, QSeries> = BTreeMap::new();
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let p = a.mul(b)?;
                let v = match terms.get(&(i + j)) {
                    Some(t) => t.add(&p)?,
                    None => p,
                };
                terms.insert(i + j, v);
            }
        }
        Ok(AlmostHolo { terms, weight: self.weight + other.weight, order: self.order })
    }

    /// Value at `τ` with `Y ↦ y`; returns the value and a tail proxy.
    pub fn eval(&self, qv: Complex64, y: Complex64) -> (Complex64, f64) {
        let mut out = Complex64::zero();
        let mut tail = 0.0;
        for (j, s) in &self.terms {
            let (v, t) = s.eval(qv);
            let yj = y.powu(*j);
            out += v * yj;
            tail += t * yj.norm();
        }
        (out, tail)
    }
}
