use std::sync::Arc;

use num_traits::Zero;
use rand::Rng;

use super::BvModel;
use crate::graded::random::{random_dg_space, small_rational};
use crate::graded::{Cutoff, DgSpace, Functional, Kernel2};
use crate::linalg::nullspace;
use crate::scalar::{q, qr, Q};

/// `ℚ[z_1..z_n, θ_1..θ_n]` with `deg z = 0`, `deg θ = −1` and `Δ = Σ ∂_{θ_i} ∂_{z_i}`.
pub fn koszul_model(n: usize) -> BvModel {
    let mut basis: Vec<(String, i32)> = Vec::new();
    let single = n == 1;
    for i in 0..n {
        basis.push((if single { "z".into() } else { format!("z{}", i + 1) }, 0));
    }
    for i in 0..n {
        basis.push((if single { "th".into() } else { format!("th{}", i + 1) }, -1));
    }
    let sp = Arc::new(DgSpace::graded(basis).expect("distinct names"));
    let mut k = Kernel2::zero(sp.clone(), 1);
    for i in 0..n {
        k = k.with_pair(i, n + i, q(1)).expect("degree 1 pair");
    }
    BvModel::new(sp, k).expect("no differential")
}

/// Structure constants `f[i][j][k]` of sl₂ in the basis `(e, f, h)`.
pub fn sl2_structure_constants() -> Vec<Vec<Vec<Q>>> {
    let mut c = vec![vec![vec![Q::zero(); 3]; 3]; 3];
    let (e, f, h) = (0, 1, 2);
    let mut set = |i: usize, j: usize, k: usize, v: i64| {
        c[i][j][k] = q(v);
        c[j][i][k] = q(-v);
    };
    set(e, f, h, 1);
    set(h, e, e, 2);
    set(h, f, f, -2);
    c
}

/// Chern–Simons type model of `g ⊗ H*(S³)` for a Lie bracket with structure
/// constants `f`: ghosts `c_i` in degree 1, antifields `cs_i` in degree −2
/// and `I₀ = ½ Σ f_{ij}^k c_i c_j cs_k`.
pub fn dgla_fixture(f: &[Vec<Vec<Q>>], cutoff: Cutoff) -> (BvModel, Functional) {
    let n = f.len();
    let mut basis: Vec<(String, i32)> = (0..n).map(|i| (format!("c{i}"), 1)).collect();
    basis.extend((0..n).map(|i| (format!("cs{i}"), -2)));
    let sp = Arc::new(DgSpace::graded(basis).expect("distinct names"));
    let mut k = Kernel2::zero(sp.clone(), 1);
    for i in 0..n {
        k = k.with_pair(i, n + i, q(1)).expect("degree 1 pair");
    }
    let model = BvModel::new(sp.clone(), k).expect("no differential");
    let mut i0 = Functional::zero(sp.clone(), cutoff);
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                let c = &f[i][j][kk];
                if !c.is_zero() {
                    i0 = i0
                        .add(&Functional::term(sp.clone(), cutoff, &[i, j, n + kk], 0, c * qr(1, 2)))
                        .expect("same space");
                }
            }
        }
    }
    (model, i0)
}

/// Random dg space with the given coordinate degrees and a random BV kernel
/// drawn from the Q-closed degree-one kernels.
pub fn random_model<R: Rng>(rng: &mut R, degrees: &[i32]) -> BvModel {
    let sp = Arc::new(random_dg_space(rng, degrees));
    let n = sp.dim();
    let mut slots = Vec::new();
    for i in 0..n {
        for j in i..n {
            if -(degrees[i] + degrees[j]) == 1 && !(i == j && sp.is_odd(i)) {
                slots.push((i, j));
            }
        }
    }
    let images: Vec<Kernel2> = slots
        .iter()
        .map(|&(i, j)| Kernel2::zero(sp.clone(), 1).with_pair(i, j, q(1)).expect("degree checked").apply_q())
        .collect();
    let rows: Vec<Vec<Q>> = (0..n * n)
        .map(|r| images.iter().map(|k| k.entry(r / n, r % n).clone()).collect())
        .collect();
    let closed = nullspace(&rows, slots.len());
    let mut kernel = Kernel2::zero(sp.clone(), 1);
    for v in &closed {
        let c = small_rational(rng, 3, 2);
        for (s, &(i, j)) in slots.iter().enumerate() {
            if v[s].is_zero() {
                continue;
            }
            let add = Kernel2::zero(sp.clone(), 1).with_pair(i, j, &v[s] * &c).expect("degree checked");
            kernel = kernel.add(&add).expect("same space");
        }
    }
    BvModel::new(sp, kernel).expect("kernel is Q-closed by construction")
}
