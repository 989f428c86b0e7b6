//! Laurent series in ℏ with polynomial coefficients, truncated by the weight
//! `polynomial degree + 2·(ℏ-power)`.
//!
//! The weight is additive under products and preserved by `ℏ∂_P`, so every
//! coefficient of weight at most `max_weight` is exact.


use crate::graded::terms::{add_term, contract_map, filter_map, mul_maps, scale_map, TermMap};
use crate::graded::Monomial;
use crate::scalar::{q, Q};

pub(crate) fn weight(m: &Monomial, h: i32) -> i32 {
    m.degree() as i32 + 2 * h
}

#[derive(Debug, Clone)]
pub(crate) struct Series {
    pub terms: TermMap,
    pub max_weight: i32,
    /// Optional polynomial-degree cap, valid once no contractions follow.
    pub max_degree: u32,
}

impl Series {
    pub fn new(terms: TermMap, max_weight: i32) -> Self {
        let terms = filter_map(terms, &|m, h| weight(m, h) <= max_weight);
        Series { terms, max_weight, max_degree: u32::MAX }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mul(&self, other: &Series, degrees: &[i32]) -> Series {
        let (w, d) = (self.max_weight, self.max_degree);
        let keep = |m: &Monomial, h: i32| weight(m, h) <= w && m.degree() <= d;
        Series { terms: mul_maps(&self.terms, &other.terms, degrees, &keep), max_weight: w, max_degree: d }
    }

    pub fn add_scaled(&mut self, other: &Series, s: &Q) {
        for (k, c) in &other.terms {
            add_term(&mut self.terms, k.clone(), c * s);
        }
    }

    pub fn scale(&self, s: &Q) -> Series {
        Series { terms: scale_map(&self.terms, s), ..*self }
    }

    pub fn shift_hbar(&self, k: i32) -> Series {
        Series { terms: self.terms.iter().map(|((m, h), c)| ((m.clone(), h + k), c.clone())).collect(), ..*self }
    }

    /// `e^X − 1`; every term of `X` must have positive weight.
    pub fn exp_minus_one(&self, degrees: &[i32]) -> Series {
        let mut out = Series { terms: TermMap::new(), ..*self };
        let mut power = self.clone();
        let mut k = 1i64;
        while !power.is_zero() {
            out.add_scaled(&power, &q(1));
            k += 1;
            power = power.mul(self, degrees).scale(&(Q::from_integer(1.into()) / q(k)));
        }
        out
    }

    /// `log(1 + Y)`; every term of `Y` must have positive weight.
    pub fn log_one_plus(&self, degrees: &[i32]) -> Series {
        let mut out = Series { terms: TermMap::new(), ..*self };
        let mut power = self.clone();
        let mut k = 1i64;
        while !power.is_zero() {
            let s = if k % 2 == 1 { q(1) / q(k) } else { q(-1) / q(k) };
            out.add_scaled(&power, &s);
            k += 1;
            power = power.mul(self, degrees);
        }
        out
    }

    /// `e^{ℏ∂_P}` for a constant-coefficient second-order operator given by
    /// its nonzero kernel entries.
    pub fn exp_hbar_contract(&self, entries: &[(usize, usize, Q)], degrees: &[i32]) -> Series {
        let mut out = self.clone();
        let mut cur = self.terms.clone();
        let mut k = 1i64;
        loop {
            cur = contract_map(&cur, entries, degrees);
            if cur.is_empty() {
                break;
            }
            cur = cur.into_iter().map(|((m, h), c)| ((m, h + 1), c / q(k))).collect();
            for (key, c) in &cur {
                add_term(&mut out.terms, key.clone(), c.clone());
            }
            k += 1;
        }
        out
    }

    pub fn with_max_degree(mut self, d: u32) -> Series {
        self.terms.retain(|(m, _), _| m.degree() <= d);
        self.max_degree = d;
        self
    }

    pub fn min_hbar(&self) -> Option<i32> {
        self.terms.keys().map(|(_, h)| *h).min()
    }
}
