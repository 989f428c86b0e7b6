use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use super::lattice::{e2, e2_star, nome, ser_c, LatticeParams, Propagator};
use super::qseries::{eisenstein, AlmostHolo};
use crate::error::{Error, Result};
use crate::scalar::q;

/// `(4/135)E₆ + (2/45)E₄·Y − (2/27)Y³` with `Y = E₂*`.
pub fn two_loop_combination(order: usize) -> Result<AlmostHolo> {
    let e4 = AlmostHolo::from_series(eisenstein(4, order)?);
    let e6 = AlmostHolo::from_series(eisenstein(6, order)?);
    let y = AlmostHolo::y(order);
    let y3 = y.mul(&y)?.mul(&y)?;
    e6.scale(&(q(4) / q(135)))
        .add(&e4.mul(&y)?.scale(&(q(2) / q(45))))?
        .add(&y3.scale(&(q(-2) / q(27))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsValue {
    /// `π⁶` times the combination.
    #[serde(serialize_with = "ser_c")]
    pub value: Complex64,
    /// The combination itself.
    #[serde(serialize_with = "ser_c")]
    pub reduced: Complex64,
    pub tail: f64,
    pub hol_limit: bool,
}

/// Right-hand side at `τ` by q-summation to order `M`; `hol_limit` substitutes `E₂` for `E₂*`.
pub fn two_loop_rhs(tau: Complex64, order: usize, hol_limit: bool) -> Result<RhsValue> {
    if !(tau.im > 0.0) {
        return Err(Error::Argument("τ must lie in the upper half plane".into()));
    }
    let comb = two_loop_combination(order)?;
    let y = if hol_limit { e2(tau, order) } else { e2_star(tau, order) };
    let (reduced, tail) = comb.eval(nome(tau), y);
    if !(tail <= 1e-12 * reduced.norm().max(1e-300)) {
        return Err(Error::Numerical(format!(
            "q-order {order} too small at τ = {tau}: tail estimate {tail:.3e} against value {:.3e}",
            reduced.norm()
        )));
    }
    let pi6 = PI.powi(6);
    Ok(RhsValue { value: reduced * pi6, reduced, tail: tail * pi6, hol_limit })
}

/// `|lhs − rhs|` relative to `max(|rhs|, 4π⁶/135)`.
///
/// The floor is the size of the `q⁰` term of `E₆`; it keeps the comparison
/// meaningful where the right-hand side vanishes (at `τ = i` both `E₆` and `E₂*` do).
pub fn relative_gap(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / rhs.norm().max(4.0 * PI.powi(6) / 135.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LhsValue {
    #[serde(serialize_with = "ser_c")]
    pub value: Complex64,
    pub error: f64,
    /// `(r, ∫_{E∖D_r})` for the radii used.
    pub radii: Vec<f64>,
    #[serde(serialize_with = "ser_cs")]
    pub excised: Vec<Complex64>,
}

fn ser_cs<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

struct Cell {
    tau: Complex64,
}

impl Cell {
    /// Distance from 0 to the boundary of `{s + tτ : |s|, |t| ≤ ½}` along `e^{iθ}`.
    fn reach(&self, theta: f64) -> f64 {
        let (ux, uy) = (theta.cos(), theta.sin());
        let (x, y) = (self.tau.re, self.tau.im);
        let s = (ux - uy * x / y).abs();
        let t = (uy / y).abs();
        let rs = if s > 0.0 { 0.5 / s } else { f64::INFINITY };
        let rt = if t > 0.0 { 0.5 / t } else { f64::INFINITY };
        rs.min(rt)
    }

    /// Vertex angles in `[0, 2π)`, sorted.
    fn corners(&self) -> Vec<f64> {
        let mut a: Vec<f64> = [(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)]
            .iter()
            .map(|&(s, t)| {
                let v = Complex64::new(s, 0.0) + self.tau * t;
                v.arg().rem_euclid(2.0 * PI)
            })
            .collect();
        a.sort_by(f64::total_cmp);
        a
    }

    fn inradius(&self) -> f64 {
        (0..3600).map(|k| self.reach(k as f64 * PI / 1800.0)).fold(f64::INFINITY, f64::min)
    }
}

fn gl(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).expect("nodes > 0")).as_node_weight_pairs().to_vec()
}

/// `∫_{E_τ ∖ D_r} (d²z / im τ) 𝐏(z;τ)³` extrapolated to `r → 0`.
///
/// Around 0, `𝐏³ = z⁻⁶ + c z⁻⁴ + c' z⁻² + a₀ + O(z²)` with no odd powers, so the
/// angular integral over any circle kills every negative power and the excised
/// integral equals `const − a₀πr²/im τ`. This is the numerical form of the
/// renormalized value: the divergent part is a sum of exact second-kind
/// differentials, whose boundary contribution is zero. The `r → 0` limit is taken
/// by Richardson extrapolation in `r²` on `r, r/2, r/4`.
///
/// `d²z` is `dx dy`.
pub fn two_loop_lhs(params: &LatticeParams) -> Result<LhsValue> {
    params.validate()?;
    let cell = Cell { tau: params.tau };
    let rho = 0.9 * cell.inradius();
    let radii = [params.disk, params.disk / 2.0, params.disk / 4.0];
    if radii[0] >= rho {
        return Err(Error::Argument(format!("disk radius {} does not fit in the cell (max {rho:.4})", params.disk)));
    }
    let prop = Propagator::new(params.tau, params.lattice.clamp(6, 12) as i64);
    let cube = |z: Complex64| {
        let p = prop.at(z);
        p * p * p
    };
    let n = params.nodes;
    let nodes = gl(n);

    // outer part: ρ ≤ |z| ≤ boundary, sectors between vertex angles
    let mut corners = cell.corners();
    corners.push(corners[0] + 2.0 * PI);
    let mut outer = Complex64::new(0.0, 0.0);
    for w in corners.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (hc, hw) = ((a + b) / 2.0, (b - a) / 2.0);
        for &(xt, wt) in &nodes {
            let th = hc + hw * xt;
            let u = Complex64::from_polar(1.0, th);
            let top = cell.reach(th);
            let (rc, rw) = ((top + rho) / 2.0, (top - rho) / 2.0);
            let mut radial = Complex64::new(0.0, 0.0);
            for &(xr, wr) in &nodes {
                let r = rc + rw * xr;
                radial += cube(u * r) * (r * wr);
            }
            outer += radial * (rw * hw * wt);
        }
    }

    // inner annuli r ≤ |z| ≤ ρ: trapezoid in θ, Gauss–Legendre on dyadic radial pieces
    let m = 4 * n.max(16);
    let ring = |r: f64| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let th = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            s += cube(Complex64::from_polar(r, th));
        }
        s * (2.0 * PI / m as f64)
    };
    let radial_nodes = gl(n.min(24));
    let annulus = |lo: f64, hi: f64| -> Complex64 {
        let (c, h) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        radial_nodes.iter().map(|&(x, w)| ring(c + h * x) * ((c + h * x) * w * h)).sum()
    };
    let mut pieces = Vec::new();
    let mut lo = radii[2];
    while lo < rho {
        let hi = (2.0 * lo).min(rho);
        pieces.push((lo, hi, annulus(lo, hi)));
        lo = hi;
    }
    let excised: Vec<Complex64> = radii
        .iter()
        .map(|&r| {
            let inner: Complex64 = pieces.iter().filter(|(lo, _, _)| *lo >= r * (1.0 - 1e-12)).map(|p| p.2).sum();
            (outer + inner) / params.tau.im
        })
        .collect();

    let ext1 = (4.0 * excised[1] - excised[0]) / 3.0;
    let ext2 = (4.0 * excised[2] - excised[1]) / 3.0;
    let value = (16.0 * ext2 - ext1) / 15.0;
    let error = (ext2 - ext1).norm() + (value - ext2).norm();
    let scale = value.norm().max(1.0);
    if error > 1e-6 * scale {
        return Err(Error::Numerical(format!(
            "disk excision does not converge: r-grid extrapolants {ext1} and {ext2} differ by {error:.3e}"
        )));
    }
    Ok(LhsValue { value, error, radii: radii.to_vec(), excised })
}
