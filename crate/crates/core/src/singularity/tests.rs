use super::*;
use crate::linalg::rank;

fn sp(s: &str) -> Superpotential {
    Superpotential::parse(s, None).unwrap()
}

/// Milnor–Orlik: `μ = Π (1/w_i − 1)` for quasi-homogeneous isolated singularities.
fn milnor_orlik(f: &Superpotential) -> Q {
    f.weights().iter().map(|w| q(1) / w - q(1)).product()
}

#[test]
fn parser_forms() {
    let f = sp("z1^3 + 2*z2^4 - z1*z2/3 + (z1 - z2)^2 - z1^2 - z2^2 + 2*z1*z2 + z1*z2/3");
    assert_eq!(f.n(), 2);
    assert_eq!(f.render(), "2*z2^4 + 1*z1^3");
    assert_eq!(sp("z^3").n(), 1);
    assert_eq!(Superpotential::parse("z1^2", Some(3)).unwrap().n(), 3);
    for bad in ["", "z1^", "z1 +", "z0^2", "x^2", "z1^2/z2", "(z1^2", "z1^-2"] {
        assert!(Superpotential::parse(bad, None).is_err(), "{bad}");
    }
    assert!(Superpotential::parse("z3^2", Some(2)).is_err());
}

#[test]
fn rejects_bad_superpotentials() {
    assert!(matches!(Superpotential::parse("z^3 + z^2", None), Err(Error::Argument(_))));
    assert!(matches!(Superpotential::parse("z^2 + z", None), Err(Error::Argument(_))));
    assert!(matches!(Superpotential::parse("5", None), Err(Error::Argument(_))));
    let f = Superpotential::parse("z1^2", Some(2)).unwrap();
    assert!(matches!(jacobian_ring(&f, 6), Err(Error::NonIsolated(_))));
    let g = sp("z1^2*z2^2");
    assert!(matches!(jacobian_ring(&g, 6), Err(Error::NonIsolated(_))));
}

#[test]
fn fixtures() {
    for (s, mu, basis) in [
        ("z^3", 2, vec!["1", "z"]),
        ("z^4", 3, vec!["1", "z", "z^2"]),
        ("z1^2 + z2^2", 1, vec!["1"]),
        ("z1^3 + z2^3", 4, vec!["1", "z1", "z2", "z1*z2"]),
        ("z1^3 + z2^4", 6, vec![]),
    ] {
        let f = sp(s);
        let r = jacobian_ring(&f, 8).unwrap();
        assert_eq!(r.milnor, mu, "{s}");
        assert_eq!(q(mu as i64), milnor_orlik(&f), "{s}");
        if !basis.is_empty() {
            assert_eq!(r.basis, basis, "{s}");
        }
        assert_eq!(jacobian_ring(&f, 9).unwrap().milnor, mu);
    }
}

#[test]
fn non_diagonal_quasi_homogeneous() {
    // D4 and E6-type examples
    for (s, mu) in [("z1^2*z2 + z2^3", 4), ("z1^2*z2 - z2^3/3", 4), ("z1^3 + z2^4 + z3^2", 6)] {
        let f = sp(s);
        assert_eq!(jacobian_ring(&f, 8).unwrap().milnor, mu, "{s}");
        assert_eq!(milnor_orlik(&f), q(mu as i64));
    }
}

#[test]
fn thom_sebastiani() {
    let pieces = ["z^2", "z^3", "z^4", "z1^2*z2 + z2^3"];
    for a in pieces {
        for b in pieces {
            let (fa, fb) = (sp(a), sp(b));
            let s = fa.direct_sum(&fb).unwrap();
            let mu = |f: &Superpotential| jacobian_ring(f, 10).unwrap().milnor;
            assert_eq!(mu(&s), mu(&fa) * mu(&fb), "{a} ⊕ {b}");
        }
    }
}

#[test]
fn z4_against_multiplication_rank() {
    let d = 9;
    // multiplication by 4z³ from ℚ[z]_{≤d−3} into ℚ[z]_{≤d}
    let m: Matrix = (0..=d - 3)
        .map(|k| (0..=d).map(|j| if j == k + 3 { q(4) } else { q(0) }).collect())
        .collect();
    let expected = (d + 1) as usize - rank(&m);
    let r = classical_observables_match(&sp("z^4"), d).unwrap();
    assert_eq!(r.jacobian.milnor, expected);
    assert!(r.concentrated && r.matches);
    assert_eq!(r.cohomology, vec![(0, 3)]);
}

#[test]
fn classical_observables() {
    for (s, mu) in [("z^3", 2), ("z1^2 + z2^2", 1), ("z1^3 + z2^3", 4), ("z1^3 + z2^4", 6)] {
        let r = classical_observables_match(&sp(s), 8).unwrap();
        assert!(r.matches, "{s}: {:?}", r.cohomology);
        assert_eq!(r.cohomology, vec![(0, mu)]);
    }
}

#[test]
fn brieskorn_ranks() {
    let r = brieskorn_rank(&sp("z^3"), 8, 3).unwrap();
    assert_eq!((r.free_rank, r.milnor), (2, 2));
    assert!(r.torsion.is_empty());
    assert_eq!(brieskorn_rank(&sp("z^2"), 8, 3).unwrap().free_rank, 1);
    let r0 = brieskorn_rank(&sp("z1^3 + z2^3"), 8, 0).unwrap();
    assert_eq!(r0.observables.cohomology(0), 4);
    assert_eq!(brieskorn_rank(&sp("z1^3 + z2^3"), 8, 3).unwrap().free_rank, 4);
}
