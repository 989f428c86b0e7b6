use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graded::Monomial;
use crate::scalar::q;

fn zt() -> (BvModel, Cutoff) {
    (koszul_model(1), Cutoff::new(6, 2))
}

#[test]
fn delta_on_z_theta() {
    let (m, c) = zt();
    let sp = m.space().clone();
    let zth = Functional::term(sp.clone(), c, &[0, 1], 0, q(1));
    assert_eq!(m.delta(&zth).unwrap(), Functional::one(sp.clone(), c));
    let z2th = Functional::term(sp.clone(), c, &[0, 0, 1], 0, q(1));
    assert_eq!(m.delta(&z2th).unwrap(), Functional::term(sp.clone(), c, &[0], 0, q(2)));
    let fz = Functional::term(sp.clone(), c, &[0, 0, 0, 0], 1, q(3));
    assert!(m.delta(&fz).unwrap().is_zero());
}

#[test]
fn bracket_of_coordinates() {
    let (m, c) = zt();
    let sp = m.space().clone();
    let z = Functional::var(sp.clone(), c, 0);
    let th = Functional::var(sp.clone(), c, 1);
    let b = m.bracket(&z, &th).unwrap();
    assert!(!b.is_zero());
    assert_eq!(b.len(), 1);
    assert!(b.coefficient(&Monomial::one(2), 0) == q(1) || b.coefficient(&Monomial::one(2), 0) == q(-1));
    assert!(m.bracket(&z, &z).unwrap().is_zero());
}

#[test]
fn model_validation() {
    let (m, _) = zt();
    let sp = m.space().clone();
    let k0 = Kernel2::zero(sp.clone(), 0);
    assert!(matches!(BvModel::new(sp.clone(), k0), Err(Error::Argument(_))));
    let j = m.to_json();
    let back = BvModel::from_json(&j).unwrap();
    assert_eq!(back, m);
}

fn random_models(seed: u64, count: usize) -> Vec<BvModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: [&[i32]; 4] = [&[0, -1, 0, -1], &[0, -1, 1, -2], &[1, -2, 0, -1, 0], &[0, 0, -1, -1, 1, -2]];
    (0..count).map(|t| random_model(&mut rng, shapes[t % shapes.len()])).collect()
}

#[test]
fn axioms_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in random_models(1, 12) {
        let r = m.check_axioms(&mut rng, 8, Cutoff::new(5, 1)).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn random_models_have_nonzero_kernels() {
    assert!(random_models(2, 8).iter().filter(|m| !m.kernel().is_zero()).count() >= 4);
}

#[test]
fn gerstenhaber_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cut = Cutoff::new(9, 0);
    for m in random_models(3, 8) {
        let sp = m.space().clone();
        for _ in 0..3 {
            let pick = |rng: &mut ChaCha8Rng| {
                let w = rand::Rng::gen_range(rng, -1..=1);
                crate::graded::random::random_homogeneous(rng, &sp, Cutoff::new(3, 0), 3, w).with_cutoff(cut)
            };
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let da = a.homogeneous_degree().unwrap_or(0);
            let db = b.homogeneous_degree().unwrap_or(0);
            let sgn = |e: i32| if e.rem_euclid(2) == 0 { q(1) } else { q(-1) };
            // odd Poisson bracket (−1)^{|x|}{x,y}
            let br = |x: &Functional, dx: i32, y: &Functional| m.bracket(x, y).unwrap().scale(&sgn(dx));
            let ab = br(&a, da, &b);
            assert_eq!(ab, br(&b, db, &a).scale(&-sgn((da + 1) * (db + 1))));
            let lhs = br(&a, da, &b.mul(&c).unwrap());
            let rhs = ab.mul(&c).unwrap().add(&b.mul(&br(&a, da, &c)).unwrap().scale(&sgn((da + 1) * db))).unwrap();
            assert_eq!(lhs, rhs);
            let l = br(&a, da, &br(&b, db, &c));
            let r1 = br(&ab, da + db + 1, &c);
            let r2 = br(&b, db, &br(&a, da, &c)).scale(&sgn((da + 1) * (db + 1)));
            assert_eq!(l, r1.add(&r2).unwrap());
            let lhs = m.delta(&ab).unwrap();
            let rhs = br(&m.delta(&a).unwrap(), da + 1, &b).add(&br(&a, da, &m.delta(&b).unwrap()).scale(&sgn(da + 1))).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn classical_master_equation_for_sl2() {
    let cut = Cutoff::new(4, 1);
    let (m, i0) = dgla_fixture(&sl2_structure_constants(), cut);
    assert!(!i0.is_zero());
    assert!(m.cme_residual(&i0).unwrap().is_zero());
    let r = m.qme_residual(&i0).unwrap();
    assert!(r.classical_zero);
    // unimodular: the quantum correction vanishes as well
    assert!(r.quantum_zero);
}

#[test]
fn classical_master_equation_detects_failed_jacobi() {
    let mut f = sl2_structure_constants();
    f[0][1][0] = q(1);
    f[1][0][0] = q(-1);
    let (m, i0) = dgla_fixture(&f, Cutoff::new(4, 0));
    assert!(!m.cme_residual(&i0).unwrap().is_zero());
}

#[test]
fn master_equation_preconditions() {
    let (m, c) = zt();
    let sp = m.space().clone();
    let with_h = Functional::term(sp.clone(), c, &[0, 0, 0], 1, q(1));
    assert!(matches!(m.cme_residual(&with_h), Err(Error::Argument(_))));
    let quad = Functional::term(sp.clone(), c, &[0, 0], 0, q(1));
    assert!(matches!(m.qme_residual(&quad), Err(Error::Argument(_))));
    let cubic = Functional::term(sp.clone(), c, &[0, 0, 0], 0, q(1));
    let r = m.qme_residual(&cubic).unwrap();
    assert!(r.classical_zero && r.quantum_zero);
    assert_eq!(r.quantum_part.hbar_part(0), r.classical_part);
}

#[test]
fn quantum_residual_reduces_to_classical() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in random_models(4, 6) {
        let sp = m.space().clone();
        let cut = Cutoff::new(5, 2);
        let mut i = crate::graded::random::random_homogeneous(&mut rng, &sp, Cutoff::new(4, 2), 6, 0);
        i = i.with_cutoff(cut);
        let cubic: Functional = {
            let mut f = Functional::zero(sp.clone(), cut);
            for (mm, h, c) in i.terms() {
                if h > 0 || mm.degree() >= 3 {
                    f.add_term(mm.clone(), h as i32, c.clone());
                }
            }
            f
        };
        let r = m.qme_residual(&cubic).unwrap();
        assert_eq!(r.quantum_part.hbar_part(0), r.classical_part);
    }
}

#[test]
fn observables_of_cubic() {
    let (m, _) = zt();
    let sp = m.space().clone();
    let f = Functional::term(sp.clone(), Cutoff::new(3, 0), &[0, 0, 0], 0, q(1));
    for d in 4..7 {
        let r = observables(&m, &f, false, d, 0).unwrap();
        assert!(r.graded);
        assert_eq!(r.cohomology(0), 2);
        assert_eq!(r.total(), 2);
    }
    let r = observables(&m, &f.with_cutoff(Cutoff::new(3, 3)), true, 8, 3).unwrap();
    assert_eq!(r.free_rank(0), 2);
    assert!(r.degrees.iter().all(|d| d.torsion.is_empty()));
}

#[test]
fn observables_refuse_failed_master_equation() {
    let mut f = sl2_structure_constants();
    f[0][1][0] = q(1);
    f[1][0][0] = q(-1);
    let (m, bad) = dgla_fixture(&f, Cutoff::new(4, 0));
    assert!(matches!(observables(&m, &bad, false, 3, 0), Err(Error::MasterEquation(_))));
    let (m, i0) = dgla_fixture(&sl2_structure_constants(), Cutoff::new(4, 0));
    let r = observables(&m, &i0, false, 3, 0).unwrap();
    assert!(r.cohomology(0) >= 1);
}
