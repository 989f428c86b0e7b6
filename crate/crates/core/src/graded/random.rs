//! Seeded random inputs for the property suites.

use std::sync::Arc;

use rand::Rng;

use super::{Cutoff, DgSpace, Functional, Monomial};
use crate::scalar::{Q, qr};

/// Small nonzero rational with numerator in ±1..=num and denominator 1..=den.
pub fn small_rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Q {
    let mut n = rng.gen_range(1..=num);
    if rng.gen_bool(0.5) {
        n = -n;
    }
    qr(n, rng.gen_range(1..=den))
}

/// Random monomial with polynomial degree in `degree_range` (odd coordinates
/// appear at most once).
pub fn random_monomial<R: Rng>(rng: &mut R, space: &DgSpace, degree: u32) -> Option<Monomial> {
    let n = space.dim();
    if n == 0 {
        return (degree == 0).then(|| Monomial::one(0));
    }
    let mut factors = Vec::new();
    for _ in 0..degree {
        factors.push(rng.gen_range(0..n));
    }
    Monomial::from_factors(&factors, space.degrees()).map(|(m, _)| m)
}

/// Random functional with up to `nterms` terms of degree `min_deg..=cutoff.degree`.
pub fn random_functional<R: Rng>(
    rng: &mut R,
    space: &Arc<DgSpace>,
    cutoff: Cutoff,
    nterms: usize,
    min_deg: u32,
) -> Functional {
    let mut f = Functional::zero(space.clone(), cutoff);
    for _ in 0..nterms {
        let d = rng.gen_range(min_deg..=cutoff.degree.max(min_deg));
        let h = rng.gen_range(0..=cutoff.hbar) as i32;
        if let Some(m) = random_monomial(rng, space, d) {
            f.add_term(m, h, small_rational(rng, 5, 3));
        }
    }
    f
}

/// Random functional whose terms all have internal degree `weight`.
pub fn random_homogeneous<R: Rng>(
    rng: &mut R,
    space: &Arc<DgSpace>,
    cutoff: Cutoff,
    nterms: usize,
    weight: i32,
) -> Functional {
    let mut f = Functional::zero(space.clone(), cutoff);
    let mut tries = 0;
    while f.len() < nterms && tries < 50 * nterms.max(1) {
        tries += 1;
        let d = rng.gen_range(0..=cutoff.degree);
        let h = rng.gen_range(0..=cutoff.hbar) as i32;
        if let Some(m) = random_monomial(rng, space, d) {
            if m.weight(space.degrees()) == weight {
                f.add_term(m, h, small_rational(rng, 5, 3));
            }
        }
    }
    f
}

/// Random differential on coordinates with the given degrees: a random
/// matching `x_j ↦ x_i` between adjacent degrees, conjugated by a random
/// degree-preserving change of basis. Squares to zero by construction.
pub fn random_dg_space<R: Rng>(rng: &mut R, degrees: &[i32]) -> DgSpace {
    use crate::linalg::{inverse, matmul, zeros};
    let n = degrees.len();
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut q0 = zeros(n, n);
    let mut used = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for &j in &order {
        if used[j] || rng.gen_bool(0.25) {
            continue;
        }
        let targets: Vec<usize> = (0..n).filter(|&i| !used[i] && i != j && degrees[i] == degrees[j] + 1).collect();
        if targets.is_empty() {
            continue;
        }
        let i = targets[rng.gen_range(0..targets.len())];
        q0[i][j] = Q::from_integer(1.into());
        used[i] = true;
        used[j] = true;
    }
    let s = loop {
        let mut s = zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if degrees[i] == degrees[j] && (i == j || rng.gen_bool(0.5)) {
                    s[i][j] = qr(rng.gen_range(-2..=3), 1);
                }
            }
        }
        if let Some(inv) = inverse(&s) {
            break (s, inv);
        }
    };
    let diff = matmul(&matmul(&s.0, &q0), &s.1);
    DgSpace::new(names, degrees.to_vec(), diff).expect("conjugated matching squares to zero")
}

/// Random graded-symmetric kernel of the given operator degree.
pub fn random_kernel<R: Rng>(rng: &mut R, space: &Arc<DgSpace>, degree: i32, density: f64) -> super::Kernel2 {
    let n = space.dim();
    let mut k = super::Kernel2::zero(space.clone(), degree);
    for i in 0..n {
        for j in i..n {
            if -(space.degree(i) + space.degree(j)) != degree {
                continue;
            }
            if i == j && space.is_odd(i) {
                continue;
            }
            if rng.gen_bool(density) {
                k = k.with_pair(i, j, small_rational(rng, 4, 3)).expect("degree checked");
            }
        }
    }
    k
}
