use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use super::*;
use crate::error::Error;
use crate::scalar::{q, to_f64};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn divisor_sum(k: u32, n: usize) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| (d as i64).pow(k)).sum()
}

#[test]
fn eisenstein_coefficients() {
    for (k, ck) in [(2u32, -24i64), (4, 240), (6, -504)] {
        let e = eisenstein(k, 30).unwrap();
        assert_eq!(e.weight(), k as i32);
        assert_eq!(*e.coeff(0), q(1));
        for n in 1..=30 {
            assert_eq!(*e.coeff(n), q(ck * divisor_sum(k - 1, n)), "E{k} q^{n}");
        }
    }
    assert_eq!(*eisenstein(4, 1).unwrap().coeff(1), q(240));
    assert_eq!(*eisenstein(6, 1).unwrap().coeff(1), q(-504));
    assert!(matches!(eisenstein(8, 3), Err(Error::Argument(_))));
}

/// `G_k(τ) = Σ' λ^{−k}` over expanding squares.
fn lattice_g(k: i32, tau: Complex64, r: i64) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for b in -r..=r {
        for a in -r..=r {
            if a != 0 || b != 0 {
                s += (c(a as f64, 0.0) + tau * b as f64).powi(-k);
            }
        }
    }
    s
}

#[test]
fn normalizations_from_lattice_sums() {
    let tau = c(0.0, 2.0);
    let g4 = lattice_g(4, tau, 200);
    let e4 = eisenstein(4, 40).unwrap().eval(nome(tau)).0;
    assert!((g4 - PI.powi(4) / 45.0 * e4).norm() < 1e-5, "{g4} vs {e4}");
    let g6 = lattice_g(6, tau, 100);
    let e6 = eisenstein(6, 40).unwrap().eval(nome(tau)).0;
    assert!((g6 - 2.0 * PI.powi(6) / 945.0 * e6).norm() < 1e-8);
    // G₂ in Eisenstein order: 2ζ(2) + Σ_{m≠0} Σ_n (mτ + n)^{−2}
    let mut g2 = c(PI * PI / 3.0, 0.0);
    for m in 1..20 {
        let s = (c(PI, 0.0) * tau * m as f64).sin();
        g2 += 2.0 * PI * PI / (s * s);
    }
    assert!((g2 - PI * PI / 3.0 * e2(tau, 40)).norm() < 1e-12);
}

#[test]
fn weierstrass_symmetries() {
    let tau = c(0.0, 1.0);
    let p = LatticeParams { lattice: 40, ..LatticeParams::new(tau) };
    for z in [c(0.3, 0.1), c(-0.2, 0.37), c(0.45, -0.3)] {
        let a = weierstrass_p(z, &p).unwrap();
        let b = weierstrass_p(-z, &p).unwrap();
        let d = weierstrass_p(z + 1.0, &p).unwrap();
        assert!((a.value - b.value).norm() < 1e-9);
        assert!((a.value - d.value).norm() < 1e-5 * a.value.norm().max(1.0), "{} {}", a.value, d.value);
        assert!(a.error < 1e-6);
        let s = weierstrass_p_series(z, tau, 40).unwrap();
        assert!((a.value - s).norm() < 1e-7, "{} vs {s}", a.value);
    }
    let small = weierstrass_p(c(0.5, 0.0), &LatticeParams { lattice: 30, ..p }).unwrap();
    let big = weierstrass_p(c(0.5, 0.0), &LatticeParams { lattice: 60, ..p }).unwrap();
    assert!((small.value - big.value).norm() < 1e-6);
    assert!((small.value - big.value).norm() < 2.0 * small.error);
    // ℘(½; i) = e₁ is real
    assert!(big.value.im.abs() < 1e-10);
    for pole in [c(0.0, 0.0), c(1.0, 0.0), c(2.0, -1.0)] {
        assert!(matches!(weierstrass_p(pole, &p), Err(Error::Argument(_))));
        assert!(propagator_p(pole, &p).is_err());
    }
}

/// `𝐏` by direct quadrature of `4π ∫₀^∞ ∂_z² h_t dt`, split at `t = 1`.
fn propagator_by_t(z: Complex64, tau: Complex64) -> Complex64 {
    let nodes = GaussLegendre::new(NonZeroUsize::new(40).unwrap()).as_node_weight_pairs().to_vec();
    let mut s = c(0.0, 0.0);
    // t = e^u on a few u-windows covering (e^{−12}, 1)
    let windows = [(-12.0, -8.0), (-8.0, -5.0), (-5.0, -3.0), (-3.0, -1.5), (-1.5, 0.0)];
    for (lo, hi) in windows {
        let (m, h) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        for &(x, w) in &nodes {
            let t = f64::exp(m + h * x);
            s += heat_kernel_dzz(z, t, tau, 8) * (t * w * h);
        }
    }
    // exponential decay beyond t = 1
    for (lo, hi) in [(1.0, 2.0), (2.0, 4.0), (4.0, 8.0)] {
        let (m, h) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        for &(x, w) in &nodes {
            s += heat_kernel_dzz(z, m + h * x, tau, 8) * (w * h);
        }
    }
    4.0 * PI * s
}

#[test]
fn propagator_matches_time_integral() {
    for tau in [c(0.0, 1.0), c(0.5, 1.0)] {
        let p = LatticeParams::new(tau);
        for z in [c(0.3, 0.1), c(-0.25, 0.3)] {
            let a = propagator_p(z, &p).unwrap();
            let b = propagator_by_t(z, tau);
            assert!((a.value - b).norm() < 1e-7 * a.value.norm(), "{} vs {b}", a.value);
            assert!(a.error < 1e-10);
        }
    }
}

#[test]
fn propagator_decomposition() {
    let samples = [c(0.3, 0.1), c(-0.2, 0.37), c(0.45, -0.3), c(0.1, 0.05), c(0.5, 0.5)];
    for tau in [c(0.0, 1.0), c(0.0, 2.0), c(0.5, 1.0)] {
        let p = LatticeParams { lattice: 40, ..LatticeParams::new(tau) };
        let shift = PI * PI / 3.0 * e2_star(tau, 40);
        for z in samples {
            let big = propagator_p(z, &p).unwrap().value;
            let wp = weierstrass_p(z, &p).unwrap().value;
            assert!((big - wp - shift).norm() < 1e-6, "τ={tau} z={z}: {} vs {shift}", big - wp);
        }
    }
    let tau = c(0.0, 1.0);
    let p = LatticeParams::new(tau);
    let a = propagator_p(c(0.3, 0.2), &LatticeParams { lattice: 6, ..p }).unwrap();
    let b = propagator_p(c(0.3, 0.2), &LatticeParams { lattice: 12, ..p }).unwrap();
    assert!((a.value - b.value).norm() < 1e-10);
    // E₂(i) = 3/π
    assert!(e2_star(tau, 40).norm() < 1e-12);
}

#[test]
fn almost_holomorphic_ring() {
    let m = 12;
    let one = AlmostHolo::one(m);
    let y = AlmostHolo::y(m);
    let e4 = AlmostHolo::from_series(eisenstein(4, m).unwrap());
    assert_eq!(one.mul(&e4).unwrap(), e4);
    let y2 = y.mul(&y).unwrap();
    assert!(y2.y_degree() <= 2 && y2.weight() == 4);
    // cube by repeated squaring against left-to-right
    let ye = y.add(&AlmostHolo::from_series(eisenstein(2, m).unwrap())).unwrap();
    let sq = ye.mul(&ye).unwrap();
    let by_square = sq.mul(&sq).unwrap().mul(&ye).unwrap();
    let by_chain = ye.mul(&ye).unwrap().mul(&ye).unwrap().mul(&ye).unwrap().mul(&ye).unwrap();
    assert_eq!(by_square, by_chain);
    assert_eq!(by_square.y_degree(), 5);
    let comb = two_loop_combination(m).unwrap();
    assert!(comb.is_homogeneous() && comb.weight() == 6 && comb.y_degree() == 3);
    assert_eq!(*comb.coefficient(3).unwrap().coeff(0), q(-2) / q(27));
    // constant term at q = 0: 4/135 + 2/45 y − 2/27 y³
    let y0 = c(0.7, 0.0);
    let v = comb.eval(c(0.0, 0.0), y0).0;
    let expect = to_f64(&(q(4) / q(135))) + to_f64(&(q(2) / q(45))) * 0.7 - to_f64(&(q(2) / q(27))) * 0.343;
    assert!((v.re - expect).abs() < 1e-15);
    assert!(e4.add(&y).is_err());
}

#[test]
fn rhs_diagnostics() {
    let r = two_loop_rhs(c(0.0, 2.0), 40, false).unwrap();
    let h = two_loop_rhs(c(0.0, 2.0), 40, true).unwrap();
    assert!(r.value.im.abs() < 1e-12 && h.hol_limit);
    assert!((r.value - h.value).norm() > 1e-3);
    assert!(matches!(two_loop_rhs(c(0.0, 0.05), 3, false), Err(Error::Numerical(_))));
    assert!(two_loop_rhs(c(0.0, -1.0), 10, false).is_err());
}

#[test]
fn two_loop_identity() {
    let mut report = Vec::new();
    for tau in [c(0.0, 1.0), c(0.0, 2.0), c(0.5, 1.0)] {
        let lhs = two_loop_lhs(&LatticeParams::new(tau)).unwrap();
        let rhs = two_loop_rhs(tau, 40, false).unwrap();
        let rel = relative_gap(lhs.value, rhs.value);
        report.push(format!("τ={tau}: lhs {} rhs {} rel {rel:.3e}", lhs.value, rhs.value));
        if tau.re == 0.0 {
            assert!(lhs.value.im.abs() < 1e-8 * lhs.value.norm().max(1.0));
        }
        assert!(rel < 1e-4, "{report:?}");
    }
}

#[test]
fn excision_grid_is_consistent() {
    let lhs = two_loop_lhs(&LatticeParams::new(c(0.0, 1.0))).unwrap();
    assert_eq!(lhs.excised.len(), 3);
    let ext = |a: Complex64, b: Complex64| (4.0 * b - a) / 3.0;
    let (e1, e2) = (ext(lhs.excised[0], lhs.excised[1]), ext(lhs.excised[1], lhs.excised[2]));
    assert!((e1 - e2).norm() < 1e-8 * e1.norm().max(1.0));
    let bad = LatticeParams { disk: 0.6, ..LatticeParams::new(c(0.0, 1.0)) };
    assert!(two_loop_lhs(&bad).is_err());
}
