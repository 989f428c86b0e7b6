//! Homotopic renormalization-group flow `e^{W(P,I)/ℏ} = e^{ℏ∂_P} e^{I/ℏ}`,
//! computed both as an operator exponential and as a sum over connected
//! graphs.

mod graphs;
mod series;

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::bv::{BvModel, MasterResidual};
use crate::error::{arg, Error, Result};
use crate::graded::random::{random_dg_space, random_functional, random_kernel, small_rational};
use crate::graded::terms::{add_term, TermMap};
use crate::graded::{Cutoff, DgSpace, Functional, Kernel2, Monomial};
use crate::linalg::nullspace;
use crate::scalar::{q, Q};

pub use graphs::{enumerate_graphs, FeynGraph, GraphBounds, VertexKind};
use series::{weight, Series};

/// Largest weight `d + 2h` whose terms all fit in the cutoff box; residuals
/// and flow comparisons are exact there.
pub fn exact_weight(cutoff: Cutoff) -> u32 {
    cutoff.degree.min(2 * cutoff.hbar + 1)
}

struct Split {
    constants: Functional,
    vertices: Vec<(Monomial, i32, Q)>,
}

fn split_interaction(p: &Kernel2, i: &Functional, cutoff: Cutoff) -> Result<Split> {
    if p.degree() != 0 {
        return arg(format!("propagator must have degree 0, got {}", p.degree()));
    }
    if **p.space() != **i.space() {
        return Err(Error::Space("propagator and interaction live on different spaces".into()));
    }
    if !i.is_plus() {
        return arg("interaction must be at least cubic modulo ℏ");
    }
    if !i.is_even() {
        return arg("interaction must be even");
    }
    let sp = i.space().clone();
    let mut constants = Functional::zero(sp.clone(), cutoff);
    let mut vertices = Vec::new();
    for (m, h, c) in i.terms() {
        if m.is_one() {
            constants.add_term(m.clone(), h as i32, c.clone());
        } else {
            vertices.push((m.clone(), h as i32, c.clone()));
        }
    }
    Ok(Split { constants, vertices })
}

/// `e^{ℏ∂_P} f` truncated at the cutoff of `f`.
pub fn exp_hbar_p(p: &Kernel2, f: &Functional) -> Result<Functional> {
    if **p.space() != **f.space() {
        return Err(Error::Space("propagator and functional live on different spaces".into()));
    }
    let mut out = f.clone();
    let mut cur = f.clone();
    let mut k = 1i64;
    loop {
        cur = cur.contract(p)?.hbar_shift(1).scale(&(q(1) / q(k)));
        if cur.is_zero() {
            break;
        }
        out = out.add(&cur)?;
        k += 1;
    }
    Ok(out)
}

/// `W(P, I) = ℏ log(e^{ℏ∂_P} e^{I/ℏ})` truncated at `cutoff`, by direct
/// expansion of the exponentials.
pub fn exp_contract(p: &Kernel2, i: &Functional, cutoff: Cutoff) -> Result<Functional> {
    flow_to_weight(p, i, cutoff, cutoff.degree + 2 * cutoff.hbar)
}

/// As [`exp_contract`], exact only on terms of weight `d + 2h ≤ max_weight`.
fn flow_to_weight(p: &Kernel2, i: &Functional, cutoff: Cutoff, max_weight: u32) -> Result<Functional> {
    let split = split_interaction(p, i, cutoff)?;
    let sp = i.space().clone();
    let degs = sp.degrees();
    let max_w = max_weight as i32 - 2;
    let mut x = TermMap::new();
    for (m, h, c) in &split.vertices {
        add_term(&mut x, (m.clone(), h - 1), c.clone());
    }
    let x = Series::new(x, max_w);
    let e = x.exp_minus_one(degs);
    // log only multiplies, so terms above the degree cutoff are dead from here on
    let y = e.exp_hbar_contract(p.sparse(), degs).with_max_degree(cutoff.degree);
    let w = y.log_one_plus(degs).shift_hbar(1);
    if let Some(h) = w.min_hbar() {
        if h < 0 {
            return Err(Error::Internal(format!("ℏ^{h} survived in the effective interaction")));
        }
    }
    let out = Functional::from_map(sp, cutoff, w.terms);
    out.add(&split.constants)
}

/// One connected graph with its contribution `ℏ^{g+Σh_v}/|Aut Γ| · W_Γ(P, I)`.
#[derive(Debug, Clone)]
pub struct GraphWeight {
    pub graph: FeynGraph,
    pub genus: u32,
    pub aut: u64,
    pub value: Functional,
}

impl GraphWeight {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "graph": self.graph.encoding(),
            "genus": self.genus,
            "aut": self.aut,
            "weight": self.value.to_json(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct GraphSum {
    pub total: Functional,
    /// Vertex colours index these terms of the interaction.
    pub vertex_terms: Vec<(Monomial, i32, Q)>,
    pub graphs: Vec<GraphWeight>,
}

/// `W(P, I)` as a sum over connected graphs whose vertices are the
/// individual non-constant terms of `I`.
pub fn graph_sum(p: &Kernel2, i: &Functional, cutoff: Cutoff) -> Result<GraphSum> {
    let split = split_interaction(p, i, cutoff)?;
    let sp = i.space().clone();
    let (dmax, hmax) = (cutoff.degree as i64, cutoff.hbar as i64);
    let kinds: Vec<VertexKind> = split
        .vertices
        .iter()
        .map(|(m, h, _)| VertexKind { max_valence: m.degree(), cost: (weight(m, *h) - 2) as u32, hbar: *h as u32 })
        .collect();
    let budget = cutoff.degree as i64 + 2 * hmax - 2;
    let mut total = split.constants.clone();
    let mut out = Vec::new();
    if budget >= 1 {
        let bounds = GraphBounds { budget: budget as u32, genus_max: cutoff.hbar };
        let verts = &split.vertices;
        // the result must fit the degree cutoff
        let accept = |g: &FeynGraph| {
            let sdeg: i64 = g.colors.iter().map(|&c| verts[c].0.degree() as i64).sum();
            sdeg - 2 * g.edges() as i64 <= dmax
        };
        for g in graphs::enumerate_filtered(&kinds, &bounds, &accept) {
            let value = graph_value(&sp, p, verts, &g, cutoff)?;
            if value.is_zero() {
                continue;
            }
            total = total.add(&value)?;
            out.push(GraphWeight { genus: g.genus(), aut: g.aut, graph: g, value });
        }
    }
    Ok(GraphSum { total, vertex_terms: split.vertices, graphs: out })
}

fn graph_value(
    sp: &Arc<DgSpace>,
    p: &Kernel2,
    verts: &[(Monomial, i32, Q)],
    g: &FeynGraph,
    cutoff: Cutoff,
) -> Result<Functional> {
    let n = sp.dim();
    let nv = g.vertices();
    let degs = sp.degrees();
    let hbar = g.genus() as i32 + g.colors.iter().map(|&c| verts[c].1).sum::<i32>();
    if hbar as u32 > cutoff.hbar {
        return Ok(Functional::zero(sp.clone(), cutoff));
    }
    let ext_degs: Vec<i32> = (0..nv).flat_map(|_| degs.iter().copied()).collect();
    let mut e = vec![0u16; n * nv];
    let mut coeff = Q::from_integer(1.into());
    for (u, &c) in g.colors.iter().enumerate() {
        for i in 0..n {
            e[u * n + i] = verts[c].0.exp(i);
        }
        coeff *= &verts[c].2;
    }
    coeff /= Q::from_integer(g.aut.into());
    let mut map = TermMap::new();
    map.insert((Monomial::from_exponents(e), 0), coeff);
    for u in 0..nv {
        for v in u..nv {
            let entries: Vec<(usize, usize, Q)> =
                p.sparse().iter().map(|(i, j, c)| (u * n + i, v * n + j, c.clone())).collect();
            for _ in 0..g.adjacency[u][v] {
                map = pair_operator(&map, &entries, &ext_degs);
            }
        }
    }
    let mut out = Functional::zero(sp.clone(), cutoff);
    for ((m, _), c) in map {
        let factors: Vec<usize> = m.factors().into_iter().map(|f| f % n).collect();
        if let Some((mono, s)) = Monomial::from_factors(&factors, degs) {
            out.add_term(mono, hbar, if s < 0 { -c } else { c });
        }
    }
    Ok(out)
}

/// `Σ c ∂_a ∂_b` with `∂_b` applied first.
fn pair_operator(map: &TermMap, entries: &[(usize, usize, Q)], degrees: &[i32]) -> TermMap {
    let mut out = TermMap::new();
    for ((m, h), c) in map {
        for (a, b, k) in entries {
            let Some((m1, f1)) = m.left_derivative(*b, degrees) else { continue };
            let Some((m2, f2)) = m1.left_derivative(*a, degrees) else { continue };
            add_term(&mut out, (m2, *h), c * k * q(f1 * f2));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct IntertwineReport {
    pub samples: usize,
    pub failures: usize,
    /// Largest number of terms in a nonzero deviation.
    pub max_deviation_terms: usize,
    pub first_deviation: Option<String>,
}

impl IntertwineReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks `(Q + ℏΔ_{K+Q(P)}) e^{ℏ∂_P} f = e^{ℏ∂_P} (Q + ℏΔ_K) f` on random `f`.
pub fn check_intertwine<R: Rng>(
    model: &BvModel,
    p: &Kernel2,
    samples: usize,
    cutoff: Cutoff,
    rng: &mut R,
) -> Result<IntertwineReport> {
    let shifted = model.shifted(p)?;
    let mut failures = 0;
    let mut max_terms = 0;
    let mut first = None;
    for _ in 0..samples {
        let f = random_functional(rng, model.space(), cutoff, 8, 0);
        let ef = exp_hbar_p(p, &f)?;
        let lhs = ef.apply_q().add(&shifted.delta(&ef)?.hbar_shift(1))?;
        let inner = f.apply_q().add(&model.delta(&f)?.hbar_shift(1))?;
        let rhs = exp_hbar_p(p, &inner)?;
        let dev = lhs.sub(&rhs)?;
        if !dev.is_zero() {
            failures += 1;
            max_terms = max_terms.max(dev.len());
            first.get_or_insert_with(|| dev.to_string());
        }
    }
    Ok(IntertwineReport { samples, failures, max_deviation_terms: max_terms, first_deviation: first })
}

/// Result of flowing a quantum master equation solution.
#[derive(Debug, Clone)]
pub struct Transport {
    pub transported: Functional,
    /// Residual in the model with kernel `K + Q(P)`, on weights `≤ exact_weight`.
    pub residual: MasterResidual,
    pub exact_weight: u32,
}

/// Flows a QME solution along `P` and returns its residual in the shifted
/// model.
pub fn transport_qme(model: &BvModel, p: &Kernel2, i: &Functional) -> Result<Transport> {
    let cut = i.cutoff();
    let m = exact_weight(cut);
    let before = model.qme_raw(i)?.truncate_weight(m);
    if !before.is_zero() {
        return Err(Error::MasterEquation(format!("input does not solve the quantum master equation; residual {before}")));
    }
    let ip = flow_to_weight(p, i, cut, m)?.truncate_weight(m);
    let shifted = model.shifted(p)?;
    let quantum = shifted.qme_raw(&ip)?.truncate_weight(m);
    let classical = shifted.cme_residual(&ip.classical())?.truncate_weight(m);
    Ok(Transport { transported: ip, residual: MasterResidual::new(classical, quantum), exact_weight: m })
}

/// `W(P₂, W(P₁, I)) − W(P₁ + P₂, I)` on weights `≤ exact_weight`.
pub fn semigroup_defect(p1: &Kernel2, p2: &Kernel2, i: &Functional) -> Result<Functional> {
    let cut = i.cutoff();
    let m = exact_weight(cut);
    let two_step = flow_to_weight(p2, &flow_to_weight(p1, i, cut, m)?, cut, m)?;
    let one_step = flow_to_weight(&p1.add(p2)?, i, cut, m)?;
    Ok(two_step.sub(&one_step)?.truncate_weight(m))
}

/// A model `K = Q(P')` on a random dg space together with `I = W(P', I₀)` for
/// a Q-closed even `I₀` built from degree-zero Q-cocycles, which solves the
/// quantum master equation by transport from the zero kernel. `I` is kept up
/// to weight [`exact_weight`].
pub fn constructed_qme_solution<R: Rng>(rng: &mut R, degrees: &[i32], cutoff: Cutoff) -> Result<(BvModel, Functional)> {
    for _ in 0..50 {
        let sp = Arc::new(random_dg_space(rng, degrees));
        let n = sp.dim();
        let zero_cols: Vec<usize> = (0..n).filter(|&j| sp.degree(j) == 0).collect();
        let restricted: Vec<Vec<Q>> = sp.diff().iter().map(|r| zero_cols.iter().map(|&j| r[j].clone()).collect()).collect();
        let cocycles = nullspace(&restricted, zero_cols.len());
        if cocycles.is_empty() {
            continue;
        }
        let lin: Vec<Functional> = cocycles
            .iter()
            .map(|v| {
                let mut f = Functional::zero(sp.clone(), cutoff);
                for (k, &j) in zero_cols.iter().enumerate() {
                    f.add_term(Monomial::var(n, j), 0, v[k].clone());
                }
                f
            })
            .collect();
        let mut i0 = Functional::zero(sp.clone(), cutoff);
        for _ in 0..3 {
            let mut t = Functional::constant(sp.clone(), cutoff, small_rational(rng, 3, 2));
            let deg = rng.gen_range(3..=4.min(cutoff.degree.max(3)));
            for _ in 0..deg {
                t = t.mul(&lin[rng.gen_range(0..lin.len())])?;
            }
            i0 = i0.add(&t)?;
        }
        if cutoff.hbar > 0 {
            i0 = i0.add(&lin[0].hbar_shift(1).scale(&small_rational(rng, 2, 1)))?;
        }
        let pp = random_kernel(rng, &sp, 0, 0.7);
        let k = pp.apply_q();
        if i0.is_zero() || k.is_zero() {
            continue;
        }
        let model = BvModel::new(sp.clone(), k)?;
        let m = exact_weight(cutoff);
        let i = flow_to_weight(&pp, &i0, cutoff, m)?.truncate_weight(m);
        return Ok((model, i));
    }
    Err(Error::Internal("could not build a nontrivial QME solution".into()))
}

#[cfg(test)]
mod tests;
