//! Term-map kernels shared by [`Functional`](super::Functional) and the
//! Laurent-in-ℏ series used by the renormalization flow.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::monomial::Monomial;
use crate::scalar::{q, qr, Q};

/// (monomial, ℏ-power) → coefficient; zero coefficients are never stored.
pub(crate) type TermMap = BTreeMap<(Monomial, i32), Q>;

pub(crate) fn add_term(map: &mut TermMap, key: (Monomial, i32), c: Q) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

pub(crate) fn add_maps(a: &TermMap, b: &TermMap, scale_b: &Q) -> TermMap {
    let mut out = a.clone();
    for (k, c) in b {
        add_term(&mut out, k.clone(), c * scale_b);
    }
    out
}

pub(crate) fn scale_map(a: &TermMap, s: &Q) -> TermMap {
    if s.is_zero() {
        return TermMap::new();
    }
    a.iter().map(|(k, c)| (k.clone(), c * s)).collect()
}

pub(crate) fn mul_maps(
    a: &TermMap,
    b: &TermMap,
    degrees: &[i32],
    keep: &dyn Fn(&Monomial, i32) -> bool,
) -> TermMap {
    let mut out = TermMap::new();
    for ((ma, ha), ca) in a {
        for ((mb, hb), cb) in b {
            let h = ha + hb;
            if let Some((m, s)) = ma.mul(mb, degrees) {
                if !keep(&m, h) {
                    continue;
                }
                let c = ca * cb;
                add_term(&mut out, (m, h), if s < 0 { -c } else { c });
            }
        }
    }
    out
}

pub(crate) fn derivative_map(a: &TermMap, i: usize, degrees: &[i32]) -> TermMap {
    let mut out = TermMap::new();
    for ((m, h), c) in a {
        if let Some((m2, f)) = m.left_derivative(i, degrees) {
            add_term(&mut out, (m2, *h), c * q(f));
        }
    }
    out
}

/// Nonzero entries `(i, j, K^{ij})` of a square matrix.
pub(crate) fn sparse_entries(mat: &[Vec<Q>]) -> Vec<(usize, usize, Q)> {
    let mut out = Vec::new();
    for (i, row) in mat.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if !c.is_zero() {
                out.push((i, j, c.clone()));
            }
        }
    }
    out
}

/// ½ Σ_{ij} K^{ij} ∂_i ∂_j applied term by term.
pub(crate) fn contract_map(a: &TermMap, entries: &[(usize, usize, Q)], degrees: &[i32]) -> TermMap {
    let half = qr(1, 2);
    let mut out = TermMap::new();
    for ((m, h), c) in a {
        if m.degree() < 2 {
            continue;
        }
        for (i, j, k) in entries {
            if m.exp(*i) == 0 || m.exp(*j) == 0 {
                continue;
            }
            let Some((m1, f1)) = m.left_derivative(*j, degrees) else { continue };
            let Some((m2, f2)) = m1.left_derivative(*i, degrees) else { continue };
            add_term(&mut out, (m2, *h), c * k * &half * q(f1 * f2));
        }
    }
    out
}

/// The derivation Σ_{ij} diff[i][j] x_i ∂_j.
pub(crate) fn apply_q_map(a: &TermMap, diff_entries: &[(usize, usize, Q)], degrees: &[i32]) -> TermMap {
    let mut out = TermMap::new();
    let n = degrees.len();
    for ((m, h), c) in a {
        for (i, j, d) in diff_entries {
            let Some((m1, f1)) = m.left_derivative(*j, degrees) else { continue };
            let x = Monomial::var(n, *i);
            let Some((m2, s)) = x.mul(&m1, degrees) else { continue };
            add_term(&mut out, (m2, *h), c * d * q(f1 * s as i64));
        }
    }
    out
}

pub(crate) fn filter_map(a: TermMap, keep: &dyn Fn(&Monomial, i32) -> bool) -> TermMap {
    a.into_iter().filter(|((m, h), _)| keep(m, *h)).collect()
}
