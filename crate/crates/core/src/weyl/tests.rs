use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bv::BvModel;
use crate::graded::random::{random_functional, small_rational};
use crate::scalar::qr;

fn xp() -> SymplecticSpace {
    SymplecticSpace::canonical(1)
}

fn cut(d: u32, h: u32) -> Cutoff {
    Cutoff::new(d, h)
}

fn var(sp: &SymplecticSpace, c: Cutoff, i: usize) -> Functional {
    Functional::var(sp.space().clone(), c, i)
}

/// `Σ_k (ℏ/2)^k/k! Σ Π^{i₁j₁}⋯Π^{i_kj_k} ∂_{i₁⋯i_k}a ∂_{j₁⋯j_k}b` summed over index words.
fn moyal_oracle(sp: &SymplecticSpace, a: &Functional, b: &Functional) -> Functional {
    let c = a.cutoff();
    let n = sp.dim();
    let mut out = a.mul(b).unwrap();
    let mut words: Vec<(Vec<usize>, Vec<usize>, Q)> = vec![(vec![], vec![], q(1))];
    let mut fact = q(1);
    for k in 1..=c.hbar {
        fact *= q(k as i64);
        let mut next = Vec::new();
        for (wi, wj, coef) in &words {
            for i in 0..n {
                for j in 0..n {
                    let p = &sp.poisson()[i][j];
                    if p.is_zero() {
                        continue;
                    }
                    let mut wi = wi.clone();
                    let mut wj = wj.clone();
                    wi.push(i);
                    wj.push(j);
                    next.push((wi, wj, coef * p));
                }
            }
        }
        words = next;
        for (wi, wj, coef) in &words {
            let da = wi.iter().fold(a.clone(), |f, &i| f.derivative(i));
            let db = wj.iter().fold(b.clone(), |f, &j| f.derivative(j));
            let s = coef / &fact / q(2).pow(k as i32);
            out = out.add(&da.mul(&db).unwrap().hbar_shift(k).scale(&s)).unwrap();
        }
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, sp: &SymplecticSpace, c: Cutoff, deg: u32) -> Functional {
    let f = random_functional(rng, sp.space(), Cutoff::new(deg, 0), 5, 1);
    f.with_cutoff(c)
}

#[test]
fn canonical_relations() {
    let sp = xp();
    let c = cut(4, 3);
    let (x, p) = (var(&sp, c, 0), var(&sp, c, 1));
    assert_eq!(moyal(&sp, &x, &p).unwrap().hbar_part(0), x.mul(&p).unwrap());
    let hbar = Functional::term(sp.space().clone(), c, &[], 1, q(1));
    assert_eq!(star_commutator(&sp, &x, &p).unwrap(), hbar);
    let x2 = x.mul(&x).unwrap();
    assert_eq!(star_commutator(&sp, &x2, &p).unwrap(), x.hbar_shift(1).scale(&q(2)));
    assert!(star_commutator(&sp, &x, &x).unwrap().is_zero());
    let f = x2.mul(&x).unwrap().add(&x).unwrap();
    assert!(star_commutator(&sp, &f, &x2).unwrap().is_zero());
}

#[test]
fn pairing_validation() {
    let names = vec!["x".to_string(), "p".to_string()];
    assert!(SymplecticSpace::new(names.clone(), vec![vec![q(0), q(1)], vec![q(1), q(0)]]).is_err());
    assert!(SymplecticSpace::new(names.clone(), vec![vec![q(0), q(0)], vec![q(0), q(0)]]).is_err());
    let sp = SymplecticSpace::new(names, vec![vec![q(0), q(2)], vec![q(-2), q(0)]]).unwrap();
    assert_eq!(sp.poisson()[0][1], qr(1, 2));
    let j = serde_json::to_string(&sp.to_json()).unwrap();
    assert_eq!(SymplecticSpace::from_json(&serde_json::from_str(&j).unwrap()).unwrap(), sp);
}

#[test]
fn moyal_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=2 {
        let sp = SymplecticSpace::canonical(n);
        for _ in 0..10 {
            let c = cut(6, 3);
            let a = random_poly(&mut rng, &sp, c, 3);
            let b = random_poly(&mut rng, &sp, c, 3);
            assert_eq!(moyal(&sp, &a, &b).unwrap(), moyal_oracle(&sp, &a, &b));
        }
    }
}

#[test]
fn associativity_random_cubics() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for t in 0..50 {
        let sp = SymplecticSpace::canonical(1 + t % 2);
        let c = cut(9, 4);
        let a = random_poly(&mut rng, &sp, c, 3);
        let b = random_poly(&mut rng, &sp, c, 3);
        let d = random_poly(&mut rng, &sp, c, 3);
        let left = moyal(&sp, &moyal(&sp, &a, &b).unwrap(), &d).unwrap();
        let right = moyal(&sp, &a, &moyal(&sp, &b, &d).unwrap()).unwrap();
        assert_eq!(left, right, "triple {t}");
    }
}

#[test]
fn commutator_deforms_poisson_and_satisfies_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..20 {
        let sp = SymplecticSpace::canonical(1 + t % 2);
        let c = cut(9, 4);
        let a = random_poly(&mut rng, &sp, c, 3);
        let b = random_poly(&mut rng, &sp, c, 3);
        let d = random_poly(&mut rng, &sp, c, 3);
        let comm = star_commutator(&sp, &a, &b).unwrap();
        assert!(comm.hbar_part(0).is_zero());
        let pb = poisson_bracket(&sp, &a, &b).unwrap();
        assert_eq!(comm.hbar_part(1), pb);
        let br = |x: &Functional, y: &Functional| star_commutator(&sp, x, y).unwrap();
        let jac = br(&a, &br(&b, &d)).add(&br(&b, &br(&d, &a))).unwrap().add(&br(&d, &br(&a, &b))).unwrap();
        assert!(jac.is_zero(), "Jacobi {t}");
    }
}

fn random_q(rng: &mut ChaCha8Rng) -> Q {
    let v = small_rational(rng, 9, 7);
    if v.is_zero() {
        q(1)
    } else {
        v
    }
}

#[test]
fn mode_model_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 1..=3 {
        let two_pi = qr(rng.gen_range(5..40), rng.gen_range(1..6));
        let m = ModeModel::with_two_pi(SymplecticSpace::canonical(1 + n % 2), n, two_pi).unwrap();
        let w: Vec<Q> = (0..=n).map(|_| random_q(&mut rng)).collect();
        let g: Vec<Q> = (0..=n).map(|_| random_q(&mut rng)).collect();
        let k = m.kernel(&w).unwrap();
        assert!(k.apply_q().is_zero(), "heat kernel is Q-closed");
        BvModel::new(m.space().clone(), k.clone()).unwrap();
        let p = m.propagator(&g).unwrap();
        let mut w2 = w.clone();
        for i in 1..=n {
            w2[i] = &w[i] - &g[i];
        }
        assert_eq!(k.add(&p.apply_q()).unwrap(), m.kernel(&w2).unwrap());
    }
}

#[test]
fn lift_small_cases() {
    let sp = xp();
    let m = ModeModel::with_two_pi(sp.clone(), 2, q(6)).unwrap();
    let c = cut(3, 1);
    let x = var(&sp, c, 0);
    let lx = m.lift(&x).unwrap();
    assert_eq!(lx, Functional::var(m.space().clone(), c, m.b(0, 0)));
    let lxx = m.lift(&x.mul(&x).unwrap()).unwrap();
    let mut want = Functional::zero(m.space().clone(), c);
    for a in 0..5 {
        let w = if a == 0 { q(2) } else { q(1) };
        want = want.add(&Functional::term(m.space().clone(), c, &[m.a(0, a), m.b(0, a)], 0, w)).unwrap();
    }
    assert_eq!(lxx, want);
    assert!(m.lift(&Functional::constant(sp.space().clone(), c, q(3))).unwrap().is_zero());
}

#[test]
fn lifted_cubics_are_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sp = xp();
    for n in [2, 3] {
        let m = ModeModel::with_two_pi(sp.clone(), n, qr(19, 3)).unwrap();
        let i = random_functional(&mut rng, sp.space(), cut(3, 1), 6, 3);
        let li = m.lift(&i).unwrap();
        assert!(li.apply_q().is_zero());
        let w: Vec<Q> = (0..=n).map(|_| random_q(&mut rng)).collect();
        assert!(m.obstruction(&li, &w).unwrap().is_zero());
    }
}

#[test]
fn effective_interaction_cases() {
    let sp = xp();
    let m = ModeModel::new(sp.clone(), 3).unwrap();
    let c = cut(3, 1);
    let x = var(&sp, c, 0);
    let p = var(&sp, c, 1);
    let zero = Functional::zero(sp.space().clone(), c);
    assert!(tqm_effective(&m, &zero, 1e-3, 1.0).unwrap().is_zero());
    let x3 = x.mul(&x).unwrap().mul(&x).unwrap();
    assert_eq!(tqm_effective(&m, &x3, 1e-3, 1.0).unwrap(), m.lift(&x3).unwrap());
    let mixed = x.mul(&x).unwrap().mul(&p).unwrap();
    assert_eq!(tqm_effective(&m, &mixed, 0.1, 0.1).unwrap(), m.lift(&mixed).unwrap());
    let eff = tqm_effective(&m, &mixed, 1e-3, 1.0).unwrap();
    assert_eq!(eff.hbar_part(0), m.lift(&mixed).unwrap());
    assert!(tqm_effective(&m, &x, 1e-3, 1.0).is_err());
    assert!(ModeModel::new(sp, 0).is_err());
}

#[test]
fn star_prediction_gaps() {
    let sp = xp();
    let c = cut(3, 1);
    let x = var(&sp, c, 0);
    let x3 = x.mul(&x).unwrap().mul(&x).unwrap();
    let r = qme_vs_star(&sp, &x3, &[2, 4], &[4e-3, 2e-3, 1e-3]).unwrap();
    assert!(r.monotone);
    assert!(r.runs.iter().all(|n| n.limit == 0.0 && n.extrapolated == 0.0));
}

/// `(x/2)/sinh(x/2)` by dividing 1 by `Σ (x/2)^{2j}/(2j+1)!`.
fn a_hat_oracle(order: usize) -> Vec<Q> {
    let mut s = Vec::new();
    let mut f = q(1);
    for j in 0..=order {
        if j > 0 {
            f *= q((2 * j) as i64) * q((2 * j + 1) as i64);
        }
        s.push(q(1) / (&f * q(4).pow(j as i32)));
    }
    let mut inv: Vec<Q> = vec![q(1)];
    for j in 1..=order {
        let v: Q = (1..=j).map(|i| &s[i] * &inv[j - i]).sum();
        inv.push(-v);
    }
    inv
}

#[test]
fn a_hat_series() {
    let c = a_hat_coefficients(6);
    assert_eq!(c[1], qr(-1, 24));
    assert_eq!(c[2], qr(7, 5760));
    assert_eq!(c, a_hat_oracle(6));
}

fn gen(name: &str, degree: u32) -> Generator {
    Generator { name: name.into(), degree }
}

fn term(f: &[&str], c: Q) -> ClassTerm {
    ClassTerm { factors: f.iter().map(|s| s.to_string()).collect(), coeff: c }
}

fn integral(f: &[&str], v: Q) -> IndexIntegral {
    IndexIntegral { factors: f.iter().map(|s| s.to_string()).collect(), value: v }
}

fn surface(name: &str, area: Q, correction: Option<Q>) -> IndexInput {
    let mut omega = vec![OmegaTerm { hbar: 0, class: vec![term(&[name], q(-1))] }];
    if let Some(c) = correction {
        omega.push(OmegaTerm { hbar: 1, class: vec![term(&[name], c)] });
    }
    IndexInput {
        dimension: 2,
        generators: vec![gen(name, 2)],
        omega_hbar: omega,
        root_squares: vec![],
        integrals: vec![integral(&[name], area)],
    }
}

#[test]
fn index_examples() {
    let s = surface("w", q(5), None);
    assert_eq!(algebraic_index(&s, 2).unwrap(), BTreeMap::from([(-1, q(5))]));
    let s = surface("w", q(5), Some(q(3)));
    assert_eq!(algebraic_index(&s, 2).unwrap(), BTreeMap::from([(-1, q(5)), (0, q(-15))]));
    let four = IndexInput {
        dimension: 4,
        generators: vec![gen("w", 2), gen("p1", 4)],
        omega_hbar: vec![OmegaTerm { hbar: 0, class: vec![term(&["w"], q(-1))] }],
        root_squares: vec![vec![term(&["p1"], q(1))]],
        integrals: vec![integral(&["w", "w"], q(6)), integral(&["p1"], q(48))],
    };
    assert_eq!(algebraic_index(&four, 2).unwrap(), BTreeMap::from([(-2, q(3)), (0, q(-2))]));
    let mut bad = four.clone();
    bad.root_squares = vec![vec![term(&["w"], q(1))]];
    assert!(algebraic_index(&bad, 2).is_err());
    let mut odd = four.clone();
    odd.dimension = 3;
    assert!(algebraic_index(&odd, 2).is_err());
}

fn laurent_mul(a: &BTreeMap<i32, Q>, b: &BTreeMap<i32, Q>, max: i32) -> BTreeMap<i32, Q> {
    let mut out = BTreeMap::new();
    for (i, x) in a {
        for (j, y) in b {
            if i + j <= max {
                *out.entry(i + j).or_insert_with(Q::zero) += x * y;
            }
        }
    }
    out.retain(|_, c: &mut Q| !c.is_zero());
    out
}

#[test]
fn index_multiplicative() {
    let four = IndexInput {
        dimension: 4,
        generators: vec![gen("u", 2), gen("v", 2), gen("p", 4)],
        omega_hbar: vec![
            OmegaTerm { hbar: 0, class: vec![term(&["u"], q(-1)), term(&["v"], q(-2))] },
            OmegaTerm { hbar: 2, class: vec![term(&["u"], qr(1, 3))] },
        ],
        root_squares: vec![vec![term(&["p"], q(1)), term(&["u", "v"], q(2))]],
        integrals: vec![
            integral(&["u", "u"], q(1)),
            integral(&["u", "v"], q(2)),
            integral(&["v", "v"], q(-1)),
            integral(&["p"], q(24)),
        ],
    };
    let s = surface("w", q(7), Some(qr(1, 2)));
    let prod = four.product(&s).unwrap();
    let h = 3;
    let direct = algebraic_index(&prod, h).unwrap();
    let factored = laurent_mul(
        &algebraic_index(&four, h as u32 + 1).unwrap(),
        &algebraic_index(&s, h as u32 + 2).unwrap(),
        h as i32,
    );
    assert_eq!(direct, factored);
    assert!(four.product(&four).is_err());
}
