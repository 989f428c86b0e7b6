use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::qseries::eisenstein;
use crate::error::{arg, Error, Result};

/// Numerical parameters for sums over `ℤ + ℤτ` and integrals over `E_τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeParams {
    #[serde(serialize_with = "ser_c")]
    pub tau: Complex64,
    /// Half-width of the square of lattice indices summed.
    pub lattice: usize,
    /// Largest excised disk radius; the extrapolation also uses `r/2`, `r/4`.
    pub disk: f64,
    /// Gauss–Legendre nodes per direction and sector.
    pub nodes: usize,
}

pub(crate) fn ser_c<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl LatticeParams {
    pub fn new(tau: Complex64) -> Self {
        LatticeParams { tau, lattice: 60, disk: 0.05, nodes: 48 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.im > 0.0) || !self.tau.re.is_finite() {
            return arg("τ must lie in the upper half plane");
        }
        if self.lattice < 2 || self.nodes < 4 {
            return arg("lattice cutoff and quadrature resolution are too small");
        }
        if !(self.disk > 0.0) {
            return arg("disk radius must be positive");
        }
        Ok(())
    }
}

/// A numerical value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "ser_c")]
    pub value: Complex64,
    pub error: f64,
}

pub fn nome(tau: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * tau).exp()
}

fn check_pole(z: Complex64, tau: Complex64) -> Result<()> {
    let b = (z.im / tau.im).round();
    let a = (z - tau * b).re.round();
    for da in -1..=1 {
        for db in -1..=1 {
            let l = Complex64::new(a + da as f64, 0.0) + tau * (b + db as f64);
            if (z - l).norm() < 1e-9 {
                return Err(Error::Argument(format!("z = {z} is a lattice point")));
            }
        }
    }
    Ok(())
}

/// `E₂(τ)` by q-summation.
pub fn e2(tau: Complex64, order: usize) -> Complex64 {
    eisenstein(2, order).expect("weight 2").eval(nome(tau)).0
}

/// `E₂* = E₂ − 3/(π im τ)`.
pub fn e2_star(tau: Complex64, order: usize) -> Complex64 {
    e2(tau, order) - 3.0 / (PI * tau.im)
}

fn square_sum(z: Complex64, tau: Complex64, r: i64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    // fixed order: rows of b, then a
    for b in -r..=r {
        for a in -r..=r {
            let l = Complex64::new(a as f64, 0.0) + tau * b as f64;
            if a == 0 && b == 0 {
                s += 1.0 / (z * z);
            } else {
                s += 1.0 / ((z - l) * (z - l)) - 1.0 / (l * l);
            }
        }
    }
    s
}

/// `𝒫(z) = 1/z² + Σ'[1/(z−λ)² − 1/λ²]` over squares of half-width `R`, `2R`, `4R`.
///
/// Odd terms cancel shell by shell, so the truncation error is `O(R⁻²)`; two
/// Richardson levels are taken and their difference is the error estimate.
pub fn weierstrass_p(z: Complex64, params: &LatticeParams) -> Result<Estimate> {
    params.validate()?;
    check_pole(z, params.tau)?;
    let r = params.lattice as i64;
    let s = [r, 2 * r, 4 * r].map(|k| square_sum(z, params.tau, k));
    let a = (4.0 * s[1] - s[0]) / 3.0;
    let b = (4.0 * s[2] - s[1]) / 3.0;
    Ok(Estimate { value: (16.0 * b - a) / 15.0, error: (b - a).norm() / 15.0 })
}

/// `𝒫(z) = Σ_n π² csc²(π(z + nτ)) − (π²/3)E₂(τ)`, the Eisenstein-ordered form.
pub fn weierstrass_p_series(z: Complex64, tau: Complex64, order: usize) -> Result<Complex64> {
    if !(tau.im > 0.0) {
        return arg("τ must lie in the upper half plane");
    }
    check_pole(z, tau)?;
    Ok(csc2_sum(z, tau) - PI * PI / 3.0 * e2(tau, order))
}

fn csc2_sum(z: Complex64, tau: Complex64) -> Complex64 {
    // reduce so that |im| ≤ im τ / 2 and the sum over n converges from the middle out
    let b = (z.im / tau.im).round();
    let z = z - tau * b;
    let mut s = Complex64::new(0.0, 0.0);
    let mut n = 0i64;
    loop {
        let mut shell = Complex64::new(0.0, 0.0);
        for m in if n == 0 { vec![0] } else { vec![n, -n] } {
            let w = PI * (z + tau * m as f64);
            let sn = w.sin();
            shell += PI * PI / (sn * sn);
        }
        s += shell;
        if n > 2 && shell.norm() < 1e-18 * s.norm().max(1.0) {
            return s;
        }
        n += 1;
        if n > 10_000 {
            return s;
        }
    }
}

/// Real-space and Fourier pieces of `∫ ∂_z² h_t dt`, split at `t = T`.
struct Ewald {
    tau: Complex64,
    area: f64,
    split: f64,
    k1: Complex64,
    k2: Complex64,
}

impl Ewald {
    fn new(tau: Complex64) -> Self {
        let (x, y) = (tau.re, tau.im);
        Ewald {
            tau,
            area: y,
            split: y / (4.0 * PI),
            k1: Complex64::new(2.0 * PI, -2.0 * PI * x / y),
            k2: Complex64::new(0.0, 2.0 * PI / y),
        }
    }

    /// `∫_0^T`: `(1/4π) Σ_λ w⁻² (1 + |w|²/4T) e^{−|w|²/4T}` with `w = z + λ`.
    fn real_term(&self, z: Complex64, a: i64, b: i64) -> Complex64 {
        let w = z + Complex64::new(a as f64, 0.0) + self.tau * b as f64;
        let s = w.norm_sqr() / (4.0 * self.split);
        (1.0 + s) * (-s).exp() / (4.0 * PI * w * w)
    }

    /// `∫_T^∞`: `(1/A) Σ_{κ≠0} (−κ̄²/4|κ|²) e^{−T|κ|²} e^{i Re(κ̄ z)}`.
    fn fourier_term(&self, z: Complex64, a: i64, b: i64) -> Complex64 {
        let k = self.k1 * a as f64 + self.k2 * b as f64;
        let kb = k.conj();
        let phase = Complex64::new(0.0, (kb * z).re).exp();
        -kb * kb / (4.0 * k.norm_sqr()) * (-self.split * k.norm_sqr()).exp() * phase / self.area
    }

    /// Sum and magnitude of the outermost shell.
    fn eval(&self, z: Complex64, r: i64) -> (Complex64, f64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut edge: f64 = 0.0;
        for b in -r..=r {
            for a in -r..=r {
                let mut t = self.real_term(z, a, b);
                if a != 0 || b != 0 {
                    t += self.fourier_term(z, a, b);
                }
                s += t;
                if a.abs() == r || b.abs() == r {
                    edge = edge.max(t.norm());
                }
            }
        }
        (s, edge)
    }
}

/// Heat-kernel propagator `𝐏(z; τ) = 4π ∫_0^∞ ∂_z² h_t dt`.
///
/// `4π` makes the leading singularity `1/z²`, matching the Weierstrass function.
pub fn propagator_p(z: Complex64, params: &LatticeParams) -> Result<Estimate> {
    params.validate()?;
    check_pole(z, params.tau)?;
    let ew = Ewald::new(params.tau);
    let z = reduce(z, params.tau);
    let r = params.lattice.min(12) as i64;
    let (s, edge) = ew.eval(z, r);
    Ok(Estimate { value: 4.0 * PI * s, error: 4.0 * PI * edge * (8 * r + 8) as f64 })
}

/// Representative of `z` in the parallelogram centred at 0.
pub(crate) fn reduce(z: Complex64, tau: Complex64) -> Complex64 {
    let b = (z.im / tau.im).round();
    let z = z - tau * b;
    z - z.re.round()
}

/// Evaluator reused across many points with a fixed τ.
pub(crate) struct Propagator {
    ew: Ewald,
    r: i64,
}

impl Propagator {
    pub fn new(tau: Complex64, r: i64) -> Self {
        Propagator { ew: Ewald::new(tau), r }
    }

    pub fn at(&self, z: Complex64) -> Complex64 {
        4.0 * PI * self.ew.eval(reduce(z, self.ew.tau), self.r).0
    }
}

/// `∂_z² h_t(z)` from the image sum (small `t`) or the Fourier sum (large `t`).
pub fn heat_kernel_dzz(z: Complex64, t: f64, tau: Complex64, terms: i64) -> Complex64 {
    let z = reduce(z, tau);
    let area = tau.im;
    let mut s = Complex64::new(0.0, 0.0);
    if t <= area / (4.0 * PI) {
        for b in -terms..=terms {
            for a in -terms..=terms {
                let w = z + Complex64::new(a as f64, 0.0) + tau * b as f64;
                let wb = w.conj();
                s += wb * wb / (16.0 * t * t) * (-w.norm_sqr() / (4.0 * t)).exp() / (4.0 * PI * t);
            }
        }
    } else {
        let ew = Ewald::new(tau);
        for b in -terms..=terms {
            for a in -terms..=terms {
                if a == 0 && b == 0 {
                    continue;
                }
                let k = ew.k1 * a as f64 + ew.k2 * b as f64;
                let kb = k.conj();
                let phase = Complex64::new(0.0, (kb * z).re).exp();
                s += -kb * kb / 4.0 * (-t * k.norm_sqr()).exp() * phase / area;
            }
        }
    }
    s
}
