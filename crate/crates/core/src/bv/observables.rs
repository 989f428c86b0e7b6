use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::BvModel;
use crate::error::{Error, Result};
use crate::graded::{Cutoff, Functional, Monomial};
use crate::linalg::{nullspace, rank, Matrix};
use crate::scalar::{fmt_q, q, Q};

/// Observables of one cohomological degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObsDegree {
    pub degree: i32,
    /// ℚ-dimension of the truncated cochain space.
    pub chain_dim: usize,
    /// Rank of the differential leaving this degree.
    pub rank_out: usize,
    /// ℚ-dimension of the cohomology.
    pub cohomology_dim: usize,
    /// Free rank over `ℚ[ℏ]/ℏ^{H+1}` (quantum only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_rank: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub torsion: Vec<ModuleSummand>,
}

/// `multiplicity` copies of `ℚ[ℏ]/ℏ^hbar_power`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModuleSummand {
    pub hbar_power: u32,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObsReport {
    pub quantum: bool,
    /// Whether a positive weight grading made the truncation a subcomplex.
    pub graded: bool,
    pub weights: Vec<String>,
    pub hbar_weight: String,
    pub degree_cutoff: u32,
    pub hbar_cutoff: u32,
    pub degrees: Vec<ObsDegree>,
}

impl ObsReport {
    pub fn cohomology(&self, degree: i32) -> usize {
        self.degrees.iter().find(|d| d.degree == degree).map_or(0, |d| d.cohomology_dim)
    }

    pub fn free_rank(&self, degree: i32) -> usize {
        self.degrees.iter().find(|d| d.degree == degree).and_then(|d| d.free_rank).unwrap_or(0)
    }

    /// Total cohomology dimension.
    pub fn total(&self) -> usize {
        self.degrees.iter().map(|d| d.cohomology_dim).sum()
    }
}

/// Cohomology of `Q + {I₀,−}` (classical) or `Q + ℏΔ + {I,−}` (quantum) on
/// the polynomial truncation.
///
/// When the coordinates admit positive weights making the differential
/// homogeneous, the truncation is by weight (normalised so the lightest
/// coordinate has weight 1) and is an honest subcomplex; otherwise it falls
/// back to polynomial degree and `graded` is false.
pub fn observables(model: &BvModel, interaction: &Functional, quantum: bool, degree: u32, hbar: u32) -> Result<ObsReport> {
    let i = if quantum { interaction.clone() } else { interaction.classical() };
    let residual = if quantum { model.qme_raw(&i)? } else { model.cme_residual(&i)? };
    if !residual.is_zero() {
        let which = if quantum { "quantum" } else { "classical" };
        return Err(Error::MasterEquation(format!("{which} master equation fails; residual {residual}")));
    }
    let hbar = if quantum { hbar } else { 0 };
    let sp = model.space();
    let n = sp.dim();
    let degs = sp.degrees();

    let found = find_weights(model, &i);
    let graded = found.is_some();
    let (w, hw) = found.unwrap_or_else(|| (vec![q(1); n], q(2)));
    let bound = q(degree as i64);
    let monos = enumerate(&w, sp.degrees(), &bound, degree, graded);

    // basis grouped by cohomological degree
    let mut groups: BTreeMap<i32, Vec<(Monomial, u32)>> = BTreeMap::new();
    for m in &monos {
        for h in 0..=hbar {
            groups.entry(m.weight(degs)).or_default().push((m.clone(), h));
        }
    }
    let index: BTreeMap<i32, BTreeMap<(Monomial, u32), usize>> = groups
        .iter()
        .map(|(k, b)| (*k, b.iter().cloned().enumerate().map(|(ix, key)| (key, ix)).collect()))
        .collect();

    let top = monos.iter().map(|m| m.degree()).max().unwrap_or(0);
    let cut = Cutoff::new(top + i.max_degree().max(2), hbar);
    let iw = i.with_cutoff(cut);
    let mut diffs: BTreeMap<i32, Matrix> = BTreeMap::new();
    for (k, basis) in &groups {
        let empty = BTreeMap::new();
        let target = index.get(&(k + 1)).unwrap_or(&empty);
        let mut mat = vec![vec![Q::zero(); basis.len()]; target.len()];
        for (col, (m, h)) in basis.iter().enumerate() {
            let mut x = Functional::zero(sp.clone(), cut);
            x.add_term(m.clone(), *h as i32, Q::one());
            let mut dx = x.apply_q().add(&model.bracket(&iw, &x)?)?;
            if quantum {
                dx = dx.add(&model.delta(&x)?.hbar_shift(1))?;
            }
            for (mm, hh, c) in dx.terms() {
                match target.get(&(mm.clone(), hh)) {
                    Some(&row) => mat[row][col] += c,
                    None if graded => {
                        return Err(Error::Internal("weight truncation is not closed under the differential".into()))
                    }
                    None => {}
                }
            }
        }
        diffs.insert(*k, mat);
    }

    let mut out = Vec::new();
    for (k, basis) in &groups {
        let d_out = &diffs[k];
        let rank_out = if d_out.is_empty() { 0 } else { rank(d_out) };
        let incoming: Vec<Vec<Q>> = match diffs.get(&(k - 1)) {
            Some(m) if !m.is_empty() => transpose_cols(m),
            _ => vec![],
        };
        let rank_in = if incoming.is_empty() { 0 } else { rank(&incoming) };
        let kernel = if d_out.is_empty() {
            (0..basis.len()).map(|c| unit(basis.len(), c)).collect()
        } else {
            nullspace(d_out, basis.len())
        };
        let cohomology_dim = kernel.len() - rank_in;
        let (free_rank, torsion) = if quantum {
            let e: Vec<usize> = (0..=hbar + 1)
                .map(|j| {
                    if j > hbar {
                        return 0;
                    }
                    let mut rows: Vec<Vec<Q>> =
                        kernel.iter().map(|v| shift(v, basis, &index[k], j)).collect();
                    rows.extend(incoming.iter().cloned());
                    let r = if rows.is_empty() { 0 } else { rank(&rows) };
                    r - rank_in
                })
                .collect();
            let mut tors = Vec::new();
            for l in 1..=hbar as usize {
                let above = |j: usize| e[j] - e[j + 1];
                let nl = above(l - 1) - above(l);
                if nl > 0 {
                    tors.push(ModuleSummand { hbar_power: l as u32, multiplicity: nl });
                }
            }
            (Some(e[hbar as usize]), tors)
        } else {
            (None, vec![])
        };
        out.push(ObsDegree { degree: *k, chain_dim: basis.len(), rank_out, cohomology_dim, free_rank, torsion });
    }
    Ok(ObsReport {
        quantum,
        graded,
        weights: w.iter().map(fmt_q).collect(),
        hbar_weight: fmt_q(&hw),
        degree_cutoff: degree,
        hbar_cutoff: hbar,
        degrees: out,
    })
}

fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

fn transpose_cols(m: &Matrix) -> Vec<Vec<Q>> {
    let cols = m[0].len();
    (0..cols).map(|c| m.iter().map(|r| r[c].clone()).collect()).collect()
}

/// Multiplies a cochain by `ℏ^j`.
fn shift(v: &[Q], basis: &[(Monomial, u32)], index: &BTreeMap<(Monomial, u32), usize>, j: u32) -> Vec<Q> {
    let mut out = vec![Q::zero(); v.len()];
    for (c, (m, h)) in v.iter().zip(basis) {
        if c.is_zero() {
            continue;
        }
        if let Some(&ix) = index.get(&(m.clone(), h + j)) {
            out[ix] = c.clone();
        }
    }
    out
}

/// Monomials of weight at most `bound` (or polynomial degree at most `degree`
/// when ungraded).
fn enumerate(w: &[Q], degrees: &[i32], bound: &Q, degree: u32, graded: bool) -> Vec<Monomial> {
    fn go(i: usize, e: &mut Vec<u16>, left: Q, w: &[Q], degrees: &[i32], out: &mut Vec<Monomial>) {
        if i == w.len() {
            out.push(Monomial::from_exponents(e.clone()));
            return;
        }
        let mut left = left;
        let mut k = 0u16;
        loop {
            e[i] = k;
            go(i + 1, e, left.clone(), w, degrees, out);
            k += 1;
            left -= &w[i];
            if left.is_negative() || (degrees[i].rem_euclid(2) == 1 && k > 1) {
                break;
            }
        }
        e[i] = 0;
    }
    let n = w.len();
    let mut out = Vec::new();
    let (ws, b) = if graded { (w.to_vec(), bound.clone()) } else { (vec![q(1); n], q(degree as i64)) };
    go(0, &mut vec![0; n], b, &ws, degrees, &mut out);
    out
}

/// Positive coordinate weights and an ℏ weight making `Q`, `Δ` and `{I,−}`
/// homogeneous of weight zero.
fn find_weights(model: &BvModel, i: &Functional) -> Option<(Vec<Q>, Q)> {
    let sp = model.space();
    let n = sp.dim();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for (a, row) in sp.diff().iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            if !c.is_zero() {
                let mut r = vec![Q::zero(); n + 1];
                r[a] += q(1);
                r[b] -= q(1);
                rows.push(r);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !model.kernel().entry(a, b).is_zero() {
                let mut r = vec![Q::zero(); n + 1];
                r[a] += q(1);
                r[b] += q(1);
                r[n] = q(-1);
                rows.push(r);
            }
        }
    }
    for (m, h, _) in i.terms() {
        if m.is_one() {
            continue;
        }
        let mut r: Vec<Q> = m.exponents().iter().map(|&e| q(e as i64)).collect();
        r.push(q(h as i64 - 1));
        rows.push(r);
    }
    let basis = if rows.is_empty() {
        (0..=n).map(|c| unit(n + 1, c)).collect()
    } else {
        nullspace(&rows, n + 1)
    };
    if basis.is_empty() {
        return None;
    }
    let positive = |v: &[Q]| v.iter().all(|x| x.is_positive());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut cand = None;
    for t in 0..4000 {
        let mut v = vec![Q::zero(); n + 1];
        for (ix, b) in basis.iter().enumerate() {
            let c = if t < 2 * basis.len() {
                if ix == t / 2 { q(if t % 2 == 0 { 1 } else { -1 }) } else { Q::zero() }
            } else if t < 2 * basis.len() + 1 {
                q(1)
            } else {
                q(rng.gen_range(-4..=4))
            };
            for (x, y) in v.iter_mut().zip(b) {
                *x += &c * y;
            }
        }
        if positive(&v) {
            cand = Some(v);
            break;
        }
    }
    let v = cand?;
    let min = v[..n].iter().min()?.clone();
    let w: Vec<Q> = v[..n].iter().map(|x| x / &min).collect();
    let hw = &v[n] / &min;
    Some((w, hw))
}
