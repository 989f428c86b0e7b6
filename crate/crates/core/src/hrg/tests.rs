use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graded::terms::contract_map;
use crate::bv::{koszul_model, random_model};
use crate::graded::random::random_monomial;
use crate::scalar::qr;

fn x_space() -> Arc<DgSpace> {
    Arc::new(DgSpace::graded([("x", 0)]).unwrap())
}

#[test]
fn aut_examples() {
    let loop1 = FeynGraph::new(vec![0], vec![vec![1]]).unwrap();
    assert_eq!((loop1.genus(), loop1.aut), (1, 2));
    let theta = FeynGraph::new(vec![0, 0], vec![vec![0, 3], vec![3, 0]]).unwrap();
    assert_eq!((theta.genus(), theta.aut), (2, 12));
    let dumbbell = FeynGraph::new(vec![0, 0], vec![vec![1, 1], vec![1, 1]]).unwrap();
    assert_eq!(dumbbell.aut, 8);
    assert!(FeynGraph::new(vec![0, 0], vec![vec![1, 0], vec![0, 1]]).is_err());
}

/// |Aut| by brute force over vertex permutations and half-edge relabellings.
fn brute_aut(g: &FeynGraph) -> u64 {
    let n = g.vertices();
    let mut halves: Vec<(usize, usize)> = Vec::new();
    for u in 0..n {
        for v in u..n {
            for _ in 0..g.adjacency[u][v] {
                halves.push((u, v));
            }
        }
    }
    // an automorphism is a vertex permutation preserving colours plus a
    // bijection on edges compatible with it and a flip choice on each loop
    let mut count = 0u64;
    let perms = all_perms(n);
    for s in &perms {
        if (0..n).any(|u| g.colors[s[u]] != g.colors[u]) {
            continue;
        }
        let image: Vec<(usize, usize)> = halves
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (s[u], s[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        let e = halves.len();
        for t in all_perms(e) {
            if (0..e).all(|k| image[k] == halves[t[k]]) {
                let loops = halves.iter().filter(|(u, v)| u == v).count() as u32;
                count += 1u64 << loops;
            }
        }
    }
    count
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn aut_matches_brute_force() {
    let kinds = [VertexKind { max_valence: 3, cost: 1, hbar: 0 }, VertexKind { max_valence: 4, cost: 2, hbar: 0 }];
    let gs = enumerate_graphs(&kinds, &GraphBounds { budget: 4, genus_max: 2 });
    assert!(gs.len() > 20);
    for g in gs.iter().filter(|g| g.edges() <= 6) {
        assert_eq!(g.aut, brute_aut(g), "{}", g.encoding());
    }
}

#[test]
fn enumeration_small_cases() {
    let k3 = [VertexKind { max_valence: 3, cost: 1, hbar: 0 }];
    let g = enumerate_graphs(&k3, &GraphBounds { budget: 1, genus_max: 0 });
    assert_eq!(g.len(), 1);
    assert_eq!((g[0].edges(), g[0].aut), (0, 1));
    let g = enumerate_graphs(&k3, &GraphBounds { budget: 1, genus_max: 1 });
    assert_eq!(g.len(), 2);
    let two = enumerate_graphs(&k3, &GraphBounds { budget: 2, genus_max: 2 });
    assert!(two.iter().any(|g| g.encoding() == "0,0|0-1^3" && g.aut == 12));
    let again = enumerate_graphs(&k3, &GraphBounds { budget: 2, genus_max: 2 });
    assert_eq!(two, again);
}

#[test]
fn flow_trivial_cases() {
    let sp = x_space();
    let cut = Cutoff::new(4, 2);
    let i = Functional::term(sp.clone(), cut, &[0, 0, 0], 0, qr(1, 6));
    let p0 = Kernel2::zero(sp.clone(), 0);
    assert_eq!(exp_contract(&p0, &i, cut).unwrap(), i);
    assert_eq!(graph_sum(&p0, &i, cut).unwrap().total, i);
    let sp2 = Arc::new(DgSpace::graded([("x", 0), ("y", 0)]).unwrap());
    let py = Kernel2::zero(sp2.clone(), 0).with_pair(1, 1, q(1)).unwrap();
    let ix = Functional::term(sp2.clone(), cut, &[0, 0, 0], 0, q(1));
    assert_eq!(exp_contract(&py, &ix, cut).unwrap(), ix);
}

#[test]
fn tadpole_and_tree() {
    // W(p x⊗x, g x³/6): ℏ¹ x-coefficient g p / 2 from the self-loop,
    // ℏ⁰ x⁴ coefficient g² p / 8 from the two-vertex tree
    let sp = x_space();
    let cut = Cutoff::new(4, 1);
    let (g, p) = (qr(3, 1), qr(2, 1));
    let i = Functional::term(sp.clone(), cut, &[0, 0, 0], 0, &g / q(6));
    let pk = Kernel2::zero(sp.clone(), 0).with_pair(0, 0, p.clone()).unwrap();
    let w = exp_contract(&pk, &i, cut).unwrap();
    let x = Monomial::var(1, 0);
    assert_eq!(w.coefficient(&x, 1), &g * &p / q(2));
    let x4 = Monomial::from_exponents(vec![4]);
    assert_eq!(w.coefficient(&x4, 0), &g * &g * &p / q(8));
    let gs = graph_sum(&pk, &i, cut).unwrap();
    assert_eq!(gs.total, w);
    let tree = gs.graphs.iter().find(|gw| gw.graph.encoding() == "0,0|0-1").unwrap();
    assert_eq!(tree.aut, 2);
}

fn random_instance(rng: &mut ChaCha8Rng, t: usize) -> (Kernel2, Functional, Cutoff) {
    let shapes: [&[(&str, i32)]; 3] = [&[("x", 0), ("y", 0)], &[("x", 0), ("a", 1), ("b", -1)], &[("x", 0), ("y", 0), ("z", 0)]];
    let sp = Arc::new(DgSpace::graded(shapes[t % 3].iter().copied()).unwrap());
    let cuts = [(6, 1), (4, 2), (3, 2), (5, 1), (2, 3), (4, 1)];
    let (d, h) = cuts[t % cuts.len()];
    let cut = Cutoff::new(d, h);
    let p = random_kernel(rng, &sp, 0, 0.8);
    let mut i = Functional::zero(sp.clone(), cut);
    let mut tries = 0;
    while i.len() < 3 && tries < 200 {
        tries += 1;
        let hb = if d < 3 { 1 } else { rng.gen_range(0..=h.min(1)) };
        let deg = rng.gen_range(if hb == 0 { 3 } else { 1 }..=4.min(d));
        if let Some(m) = random_monomial(rng, &sp, deg) {
            if !m.is_odd(sp.degrees()) {
                i.add_term(m, hb as i32, small_rational(rng, 3, 2));
            }
        }
    }
    (p, i, cut)
}

#[test]
fn graph_sum_equals_operator_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for t in 0..18 {
        let (p, i, cut) = random_instance(&mut rng, t);
        let a = exp_contract(&p, &i, cut).unwrap();
        let b = graph_sum(&p, &i, cut).unwrap().total;
        assert_eq!(a, b, "instance {t}: I = {i}");
    }
}

#[test]
fn exponential_form_of_qme_residual() {
    // ℏ e^{−I/ℏ}(Q + ℏΔ) e^{I/ℏ} expanded as a series
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in [random_model(&mut rng, &[0, -1, 0, -1]), random_model(&mut rng, &[0, 1, -1, -2]), koszul_model(1)] {
        let sp = m.space().clone();
        let cut = Cutoff::new(5, 2);
        let mut i = Functional::zero(sp.clone(), cut);
        while i.len() < 4 {
            let hb = rng.gen_range(0..=1u32);
            let deg = rng.gen_range(if hb == 0 { 3 } else { 1 }..=4);
            if let Some(mm) = random_monomial(&mut rng, &sp, deg) {
                if mm.weight(sp.degrees()) == 0 {
                    i.add_term(mm, hb as i32, small_rational(&mut rng, 3, 2));
                }
            }
        }
        let degs = sp.degrees();
        let wmax = (cut.degree + 2 * cut.hbar) as i32;
        let mut x = TermMap::new();
        for (mm, h, c) in i.terms() {
            add_term(&mut x, (mm.clone(), h as i32 - 1), c.clone());
        }
        let x = Series::new(x, wmax);
        let e = x.exp_minus_one(degs);
        let mut one = TermMap::new();
        one.insert((Monomial::one(sp.dim()), 0), q(1));
        let mut full = Series::new(one, wmax);
        full.add_scaled(&e, &q(1));
        let mx = x.scale(&q(-1));
        let mut einv = mx.exp_minus_one(degs);
        einv.terms.insert((Monomial::one(sp.dim()), 0), q(1));
        let qf = crate::graded::terms::apply_q_map(&full.terms, &crate::graded::terms::sparse_entries(sp.diff()), degs);
        let df: TermMap = contract_map(&full.terms, m.kernel().sparse(), degs).into_iter().map(|((a, h), c)| ((a, h + 1), c)).collect();
        let mut op = Series::new(qf, wmax);
        op.add_scaled(&Series::new(df, wmax), &q(1));
        let oracle = einv.mul(&op, degs).shift_hbar(1);
        let oracle = Functional::from_map(sp.clone(), cut, oracle.terms);
        assert_eq!(m.qme_raw(&i).unwrap(), oracle);
    }
}

#[test]
fn intertwining_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in 0..6 {
        let degs: &[i32] = if t % 2 == 0 { &[0, -1, 0, 1] } else { &[0, 0, -1, 1, -1] };
        let m = random_model(&mut rng, degs);
        let p = random_kernel(&mut rng, m.space(), 0, 0.7);
        let r = check_intertwine(&m, &p, 20, Cutoff::new(5, 2), &mut rng).unwrap();
        assert!(r.passed(), "{r:?}");
        let zero = Kernel2::zero(m.space().clone(), 0);
        assert!(check_intertwine(&m, &zero, 3, Cutoff::new(4, 1), &mut rng).unwrap().passed());
    }
}

#[test]
fn flow_does_not_commute_with_unshifted_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seen = false;
    for _ in 0..10 {
        let m = random_model(&mut rng, &[0, 0, -1, 1, -1]);
        let p = random_kernel(&mut rng, m.space(), 0, 0.9);
        if p.apply_q().is_zero() {
            continue;
        }
        for _ in 0..5 {
            let f = random_functional(&mut rng, m.space(), Cutoff::new(4, 2), 8, 0);
            let ef = exp_hbar_p(&p, &f).unwrap();
            let lhs = ef.apply_q().add(&m.delta(&ef).unwrap().hbar_shift(1)).unwrap();
            let inner = f.apply_q().add(&m.delta(&f).unwrap().hbar_shift(1)).unwrap();
            seen |= lhs != exp_hbar_p(&p, &inner).unwrap();
        }
    }
    assert!(seen);
}

#[test]
fn transport_and_semigroup() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..4 {
        let cut = Cutoff::new(5, 2);
        let (m, i) = constructed_qme_solution(&mut rng, &[0, 0, 0, 1, -1], cut).unwrap();
        let p = random_kernel(&mut rng, m.space(), 0, 0.7);
        let t = transport_qme(&m, &p, &i).unwrap();
        assert!(t.residual.quantum_zero && t.residual.classical_zero);
        let p2 = random_kernel(&mut rng, m.space(), 0, 0.7);
        assert!(semigroup_defect(&p, &p2, &i).unwrap().is_zero());
    }
}

#[test]
fn transport_refuses_non_solutions() {
    let m = koszul_model(1);
    let sp = m.space().clone();
    let cut = Cutoff::new(4, 1);
    let bad = Functional::term(sp.clone(), cut, &[0, 0, 1], 0, q(1));
    let p = Kernel2::zero(sp.clone(), 0).with_pair(0, 0, q(1)).unwrap();
    assert!(matches!(transport_qme(&m, &p, &bad), Err(Error::MasterEquation(_))));
    let f = Functional::term(sp.clone(), cut, &[0, 0, 0], 0, q(1));
    assert!(transport_qme(&m, &p, &f).unwrap().residual.quantum_zero);
}

#[test]
fn flow_rejects_bad_input() {
    let sp = x_space();
    let cut = Cutoff::new(4, 1);
    let quad = Functional::term(sp.clone(), cut, &[0, 0], 0, q(1));
    let p = Kernel2::zero(sp.clone(), 0).with_pair(0, 0, q(1)).unwrap();
    assert!(matches!(exp_contract(&p, &quad, cut), Err(Error::Argument(_))));
    let k1 = koszul_model(1);
    assert!(matches!(exp_contract(k1.kernel(), &quad, cut), Err(Error::Argument(_))));
}

#[test]
fn largest_cutoff_single_field() {
    let sp = x_space();
    let cut = Cutoff::new(6, 3);
    let i = Functional::term(sp.clone(), cut, &[0, 0, 0], 0, qr(1, 6))
        .add(&Functional::term(sp.clone(), cut, &[0], 1, qr(1, 2)))
        .unwrap();
    let p = Kernel2::zero(sp.clone(), 0).with_pair(0, 0, q(1)).unwrap();
    let gs = graph_sum(&p, &i, cut).unwrap();
    assert_eq!(gs.total, exp_contract(&p, &i, cut).unwrap());
    assert!(gs.graphs.iter().any(|g| g.graph.vertices() >= 8));
}
