//! The paper-acceptance battery: nine criteria, each with a runtime budget.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bv::random_model;
use crate::error::{Error, Result};
use crate::graded::random::{random_functional, random_kernel, random_monomial, small_rational};
use crate::graded::{Cutoff, DgSpace, Functional, Kernel2};
use crate::hrg::{check_intertwine, constructed_qme_solution, exp_contract, graph_sum, semigroup_defect, transport_qme};
use crate::modular::{
    e2_star, propagator_p, relative_gap, two_loop_lhs, two_loop_rhs, weierstrass_p, LatticeParams,
};
use crate::scalar::{fmt_q, q, Q};
use crate::singularity::{brieskorn_rank, classical_observables_match, jacobian_ring, Superpotential};
use crate::weyl::{
    algebraic_index, moyal, poisson_bracket, qme_vs_star, star_commutator, ClassTerm, Generator, IndexInput,
    IndexIntegral, OmegaTerm, SymplecticSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Area {
    Bv,
    Hrg,
    Singularity,
    Weyl,
    Modular,
}

impl std::str::FromStr for Area {
    type Err = Error;

    fn from_str(s: &str) -> Result<Area> {
        Ok(match s {
            "bv" => Area::Bv,
            "hrg" => Area::Hrg,
            "singularity" | "sing" => Area::Singularity,
            "weyl" => Area::Weyl,
            "modular" | "mod" => Area::Modular,
            _ => return Err(Error::Argument(format!("unknown suite area {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub area: Area,
    pub title: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.2}s of {:.0}s) {}",
            self.id,
            serde_json::to_value(self.area).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            self.title,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

struct Entry {
    id: u32,
    area: Area,
    title: &'static str,
    budget: f64,
    run: fn(u64) -> Result<(bool, String)>,
}

const CRITERIA: [Entry; 9] = [
    Entry { id: 1, area: Area::Bv, title: "BV axioms on random models", budget: 10.0, run: bv_axioms },
    Entry { id: 2, area: Area::Hrg, title: "intertwining", budget: 30.0, run: intertwining },
    Entry { id: 3, area: Area::Hrg, title: "graph sum equals operator exponential", budget: 120.0, run: graphs },
    Entry { id: 4, area: Area::Hrg, title: "QME transport and semigroup law", budget: 60.0, run: transport },
    Entry { id: 5, area: Area::Singularity, title: "singularity fixtures", budget: 30.0, run: singularity },
    Entry { id: 6, area: Area::Weyl, title: "Moyal product", budget: 30.0, run: moyal_suite },
    Entry { id: 7, area: Area::Weyl, title: "TQM convergence", budget: 300.0, run: tqm },
    Entry { id: 8, area: Area::Modular, title: "two-loop identity", budget: 300.0, run: two_loop },
    Entry { id: 9, area: Area::Weyl, title: "algebraic index", budget: 5.0, run: index },
];

/// Runs one criterion by number.
pub fn criterion(id: u32, seed: u64) -> Result<CriterionResult> {
    let entry = CRITERIA
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::Argument(format!("no criterion {id}")))?;
    Ok(run_one(entry, seed))
}

fn run_one(entry: &Entry, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let out = (entry.run)(seed);
    let seconds = start.elapsed().as_secs_f64();
    let (ok, detail) = match out {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = seconds < entry.budget;
    let detail = if in_time { detail } else { format!("{detail}; over the time budget") };
    CriterionResult {
        id: entry.id,
        area: entry.area,
        title: entry.title,
        passed: ok && in_time,
        seconds,
        budget_seconds: entry.budget,
        detail,
    }
}

/// Runs the battery (or the criteria of one area) concurrently; report order is fixed.
pub fn paper_acceptance(seed: u64, only: Option<Area>) -> SuiteReport {
    let chosen: Vec<&Entry> = CRITERIA.iter().filter(|s| only.map_or(true, |a| s.area == a)).collect();
    let criteria: Vec<CriterionResult> = std::thread::scope(|sc| {
        let handles: Vec<_> = chosen.iter().map(|s| sc.spawn(move || run_one(s, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread panicked")).collect()
    });
    let passed = criteria.iter().all(|c| c.passed);
    SuiteReport { seed, criteria, passed }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn bv_axioms(seed: u64) -> Result<(bool, String)> {
    let mut r = rng(seed, 1);
    let shapes: [&[i32]; 4] = [&[0, -1, 0, -1], &[0, -1, 1, -2], &[1, -2, 0, -1, 0], &[0, 0, -1, -1, 1, -2]];
    let mut bad = 0;
    let mut nonzero = 0;
    let count = 24;
    for t in 0..count {
        let m = random_model(&mut r, shapes[t % shapes.len()]);
        if !m.kernel().apply_q().is_zero() {
            bad += 1;
            continue;
        }
        nonzero += !m.kernel().is_zero() as usize;
        if !m.check_axioms(&mut r, 8, Cutoff::new(5, 1))?.passed() {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{count} models (dims 4-6, {nonzero} with K ≠ 0), {bad} failures")))
}

fn intertwining(seed: u64) -> Result<(bool, String)> {
    let mut r = rng(seed, 2);
    let mut failures = 0;
    let (instances, samples) = (4, 50);
    for t in 0..instances {
        let degs: &[i32] = if t % 2 == 0 { &[0, -1, 0, 1] } else { &[0, 0, -1, 1, -1] };
        let m = random_model(&mut r, degs);
        let p = random_kernel(&mut r, m.space(), 0, 0.7);
        failures += check_intertwine(&m, &p, samples, Cutoff::new(4, 2), &mut r)?.failures;
    }
    Ok((failures == 0, format!("{instances} instances × {samples} samples, {failures} nonzero deviations")))
}

fn graph_instance(r: &mut ChaCha8Rng, t: usize) -> (Kernel2, Functional, Cutoff) {
    let shapes: [&[(&str, i32)]; 3] =
        [&[("x", 0), ("y", 0)], &[("x", 0), ("a", 1), ("b", -1)], &[("x", 0), ("y", 0), ("z", 0)]];
    let sp = Arc::new(DgSpace::graded(shapes[t % 3].iter().copied()).expect("valid names"));
    let cuts = [(6, 1), (4, 2), (3, 2), (5, 1), (2, 3), (4, 1), (6, 0), (3, 1)];
    let (d, h) = cuts[t % cuts.len()];
    let cut = Cutoff::new(d, h);
    let p = random_kernel(r, &sp, 0, 0.8);
    let mut i = Functional::zero(sp.clone(), cut);
    let mut tries = 0;
    while i.len() < 3 && tries < 200 {
        tries += 1;
        let hb = if d < 3 { 1 } else { r.gen_range(0..=h.min(1)) };
        let deg = r.gen_range(if hb == 0 { 3 } else { 1 }..=4.min(d));
        if let Some(m) = random_monomial(r, &sp, deg) {
            if !m.is_odd(sp.degrees()) {
                i.add_term(m, hb as i32, small_rational(r, 3, 2));
            }
        }
    }
    (p, i, cut)
}

fn graphs(seed: u64) -> Result<(bool, String)> {
    let mut r = rng(seed, 3);
    let count = 54;
    let mut mismatches = 0;
    let mut graphs = 0;
    for t in 0..count {
        let (p, i, cut) = graph_instance(&mut r, t);
        let gs = graph_sum(&p, &i, cut)?;
        graphs += gs.graphs.len();
        if exp_contract(&p, &i, cut)? != gs.total {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("{count} instances (D ≤ 6, H ≤ 3), {graphs} graphs, {mismatches} mismatches")))
}

fn transport(seed: u64) -> Result<(bool, String)> {
    let mut r = rng(seed, 4);
    let count = 10;
    let mut bad = 0;
    for t in 0..count {
        let degs: &[i32] = if t % 2 == 0 { &[0, 0, 0, 1, -1] } else { &[0, 0, 1, -1] };
        let cut = Cutoff::new(5, 2);
        let (m, i) = constructed_qme_solution(&mut r, degs, cut)?;
        let p = random_kernel(&mut r, m.space(), 0, 0.7);
        let tr = transport_qme(&m, &p, &i)?;
        let p2 = random_kernel(&mut r, m.space(), 0, 0.7);
        let semigroup = semigroup_defect(&p, &p2, &i)?.is_zero();
        if !(tr.residual.quantum_zero && tr.residual.classical_zero && semigroup) {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{count} constructed solutions, {bad} with nonzero residual or semigroup defect")))
}

fn singularity(_seed: u64) -> Result<(bool, String)> {
    let mut notes = Vec::new();
    let mut ok = true;
    for (s, mu) in [("z^3", 2), ("z^4", 3), ("z1^2 + z2^2", 1), ("z1^3 + z2^3", 4)] {
        let f = Superpotential::parse(s, None)?;
        let jac = jacobian_ring(&f, 8)?;
        let cl = classical_observables_match(&f, 8)?;
        let br = brieskorn_rank(&f, 8, 3)?;
        let good = jac.milnor == mu && cl.matches && cl.concentrated && br.free_rank == mu;
        ok &= good;
        notes.push(format!("{s}: μ={} obs={:?} free={}", jac.milnor, cl.cohomology, br.free_rank));
    }
    Ok((ok, notes.join("; ")))
}

fn moyal_suite(seed: u64) -> Result<(bool, String)> {
    let mut r = rng(seed, 6);
    let c = Cutoff::new(9, 4);
    let mut assoc_bad = 0;
    let mut pb_bad = 0;
    let triples = 50;
    for t in 0..triples {
        let sp = SymplecticSpace::canonical(1 + t % 2);
        let poly = |r: &mut ChaCha8Rng| random_functional(r, sp.space(), Cutoff::new(3, 0), 5, 1).with_cutoff(c);
        let (a, b, d) = (poly(&mut r), poly(&mut r), poly(&mut r));
        if moyal(&sp, &moyal(&sp, &a, &b)?, &d)? != moyal(&sp, &a, &moyal(&sp, &b, &d)?)? {
            assoc_bad += 1;
        }
        if star_commutator(&sp, &a, &b)?.hbar_part(1) != poisson_bracket(&sp, &a, &b)? {
            pb_bad += 1;
        }
    }
    let sp = SymplecticSpace::canonical(1);
    let c = Cutoff::new(2, 2);
    let x = Functional::var(sp.space().clone(), c, 0);
    let p = Functional::var(sp.space().clone(), c, 1);
    let hbar = Functional::one(sp.space().clone(), c).hbar_shift(1);
    let canonical = star_commutator(&sp, &x, &p)? == hbar;
    Ok((
        assoc_bad == 0 && pb_bad == 0 && canonical,
        format!(
            "{triples} cubic triples to ℏ⁴: {assoc_bad} non-associative, {pb_bad} Poisson mismatches; [x,p]⋆ = ℏ: {canonical}"
        ),
    ))
}

fn tqm(_seed: u64) -> Result<(bool, String)> {
    let sp = SymplecticSpace::canonical(1);
    let c = Cutoff::new(3, 1);
    let x = Functional::var(sp.space().clone(), c, 0);
    let x3 = x.mul(&x)?.mul(&x)?;
    let rep = qme_vs_star(&sp, &x3, &[4, 8, 16], &[4e-3, 2e-3, 1e-3])?;
    let gaps: Vec<String> = rep.runs.iter().map(|n| format!("N={}: {:.3e}", n.modes, n.extrapolated)).collect();
    Ok((rep.monotone, format!("extrapolated gaps {}", gaps.join(", "))))
}

fn two_loop(_seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    let taus = [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(0.5, 1.0)];
    let parts: Vec<Result<(f64, f64)>> = std::thread::scope(|sc| {
        let hs: Vec<_> = taus
            .iter()
            .map(|&tau| {
                sc.spawn(move || -> Result<(f64, f64)> {
                    let lhs = two_loop_lhs(&LatticeParams::new(tau))?;
                    let rhs = two_loop_rhs(tau, 40, false)?;
                    let p = LatticeParams { lattice: 40, ..LatticeParams::new(tau) };
                    let shift = PI * PI / 3.0 * e2_star(tau, 40);
                    let mut worst: f64 = 0.0;
                    for z in [(0.3, 0.1), (-0.2, 0.37), (0.45, -0.3), (0.1, 0.05), (0.5, 0.5)] {
                        let z = Complex64::new(z.0, z.1);
                        let d = propagator_p(z, &p)?.value - weierstrass_p(z, &p)?.value - shift;
                        worst = worst.max(d.norm());
                    }
                    Ok((relative_gap(lhs.value, rhs.value), worst))
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().expect("two-loop thread panicked")).collect()
    });
    for (tau, part) in taus.iter().zip(parts) {
        let (rel, dec) = part?;
        ok &= rel < 1e-4 && dec < 1e-6;
        notes.push(format!("τ={tau}: rel {rel:.2e}, 𝐏−𝒫−(π²/3)E₂* {dec:.1e}"));
    }
    Ok((ok, notes.join("; ")))
}

fn class(factors: &[&str], c: Q) -> ClassTerm {
    ClassTerm { factors: factors.iter().map(|s| s.to_string()).collect(), coeff: c }
}

fn integral(factors: &[&str], v: Q) -> IndexIntegral {
    IndexIntegral { factors: factors.iter().map(|s| s.to_string()).collect(), value: v }
}

fn surface(name: &str, area: Q) -> IndexInput {
    IndexInput {
        dimension: 2,
        generators: vec![Generator { name: name.into(), degree: 2 }],
        omega_hbar: vec![OmegaTerm { hbar: 0, class: vec![class(&[name], q(-1))] }],
        root_squares: vec![],
        integrals: vec![integral(&[name], area)],
    }
}

fn laurent_mul(a: &BTreeMap<i32, Q>, b: &BTreeMap<i32, Q>, max: i32) -> BTreeMap<i32, Q> {
    let mut out: BTreeMap<i32, Q> = BTreeMap::new();
    for (i, x) in a {
        for (j, y) in b {
            if i + j <= max {
                *out.entry(i + j).or_insert_with(Q::zero) += x * y;
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn index(seed: u64) -> Result<(bool, String)> {
    let mut r = rng(seed, 9);
    let mut surfaces_ok = true;
    for _ in 0..10 {
        let area = small_rational(&mut r, 20, 7);
        if area.is_zero() {
            continue;
        }
        let got = algebraic_index(&surface("w", area.clone()), 3)?;
        surfaces_ok &= got == BTreeMap::from([(-1, area)]);
    }
    let four = IndexInput {
        dimension: 4,
        generators: vec![
            Generator { name: "u".into(), degree: 2 },
            Generator { name: "v".into(), degree: 2 },
            Generator { name: "p".into(), degree: 4 },
        ],
        omega_hbar: vec![
            OmegaTerm { hbar: 0, class: vec![class(&["u"], q(-1)), class(&["v"], q(-2))] },
            OmegaTerm { hbar: 2, class: vec![class(&["u"], q(1) / q(3))] },
        ],
        root_squares: vec![vec![class(&["p"], q(1)), class(&["u", "v"], q(2))]],
        integrals: vec![
            integral(&["u", "u"], q(1)),
            integral(&["u", "v"], q(2)),
            integral(&["v", "v"], q(-1)),
            integral(&["p"], q(24)),
        ],
    };
    let mut s = surface("w", q(7));
    s.omega_hbar.push(OmegaTerm { hbar: 1, class: vec![class(&["w"], q(1) / q(2))] });
    let h = 3;
    let direct = algebraic_index(&four.product(&s)?, h)?;
    let factored = laurent_mul(&algebraic_index(&four, h + 1)?, &algebraic_index(&s, h + 2)?, h as i32);
    let mult = direct == factored;
    let shown: Vec<String> = direct.iter().map(|(k, v)| format!("ℏ^{k}: {}", fmt_q(v))).collect();
    Ok((surfaces_ok && mult, format!("surfaces give ∫ω/ℏ: {surfaces_ok}; product index [{}] factorizes: {mult}", shown.join(", "))))
}
