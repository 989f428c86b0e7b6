use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{star_commutator, SymplecticSpace};
use crate::bv::BvModel;
use crate::error::{arg, Result};
use crate::graded::{Cutoff, DgSpace, Functional, Kernel2, Monomial};
use crate::hrg::{exp_contract, exp_hbar_p};
use crate::scalar::{from_f64, q, qr, to_f64, Q};

/// Fourier truncation of `Ω•(S¹) ⊗ V` on the unit circle.
///
/// Modes are indexed `0` (constant), `2k−1` (`cos 2πkt`) and `2k` (`sin 2πkt`)
/// for `k = 1..=N`. Coordinates `a` are the 0-form components, `b` the
/// `dt` components.
#[derive(Debug, Clone)]
pub struct ModeModel {
    base: SymplecticSpace,
    modes: usize,
    two_pi: Q,
    space: Arc<DgSpace>,
}

/// Complex rational `(re, im)`.
type C = (Q, Q);

fn cmul(a: &C, b: &C) -> C {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

impl ModeModel {
    pub fn new(base: SymplecticSpace, modes: usize) -> Result<Self> {
        ModeModel::with_two_pi(base, modes, from_f64(std::f64::consts::TAU))
    }

    /// `two_pi` stands in for 2π in the de Rham differential and propagator.
    pub fn with_two_pi(base: SymplecticSpace, modes: usize, two_pi: Q) -> Result<Self> {
        if modes == 0 {
            return arg("mode cutoff must be at least 1");
        }
        if !two_pi.is_positive() {
            return arg("two_pi must be positive");
        }
        let n = base.dim();
        let m = 2 * modes + 1;
        let label = |a: usize| match a {
            0 => "0".to_string(),
            a if a % 2 == 1 => format!("c{}", (a + 1) / 2),
            a => format!("s{}", a / 2),
        };
        let mut names = Vec::with_capacity(2 * n * m);
        let mut degrees = Vec::with_capacity(2 * n * m);
        for (prefix, deg) in [("a", 0), ("b", -1)] {
            for i in 0..n {
                for a in 0..m {
                    names.push(format!("{prefix}.{}.{}", base.space().name(i), label(a)));
                    degrees.push(deg);
                }
            }
        }
        let dim = names.len();
        let mut diff = vec![vec![Q::zero(); dim]; dim];
        let mm = ModeModel { base, modes, two_pi: two_pi.clone(), space: Arc::new(DgSpace::graded([("_", 0)])?) };
        // d cos = −2πk sin dt, d sin = 2πk cos dt, read off on the dt coordinates
        for i in 0..n {
            for k in 1..=modes {
                let f = &two_pi * q(k as i64);
                diff[mm.a(i, 2 * k)][mm.b(i, 2 * k - 1)] = f.clone();
                diff[mm.a(i, 2 * k - 1)][mm.b(i, 2 * k)] = -f;
            }
        }
        let space = Arc::new(DgSpace::new(names, degrees, diff)?);
        Ok(ModeModel { space, ..mm })
    }

    pub fn base(&self) -> &SymplecticSpace {
        &self.base
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    fn m(&self) -> usize {
        2 * self.modes + 1
    }

    pub fn a(&self, i: usize, mode: usize) -> usize {
        i * self.m() + mode
    }

    pub fn b(&self, i: usize, mode: usize) -> usize {
        (self.base.dim() + i) * self.m() + mode
    }

    fn norm(mode: usize) -> Q {
        if mode == 0 {
            q(1)
        } else {
            qr(1, 2)
        }
    }

    fn freq(mode: usize) -> usize {
        (mode + 1) / 2
    }

    /// Mode function as a combination of `e^{2πi f t}`.
    fn exponentials(mode: usize) -> Vec<(i64, C)> {
        let k = Self::freq(mode) as i64;
        match mode {
            0 => vec![(0, (q(1), q(0)))],
            m if m % 2 == 1 => vec![(k, (qr(1, 2), q(0))), (-k, (qr(1, 2), q(0)))],
            _ => vec![(k, (q(0), qr(-1, 2))), (-k, (q(0), qr(1, 2)))],
        }
    }

    /// Heat-type BV kernel pairing `a_{iA}` with `b_{jA}` with weight `w_k` on frequency `k`.
    pub fn kernel(&self, weights: &[Q]) -> Result<Kernel2> {
        if weights.len() != self.modes + 1 {
            return arg(format!("need {} mode weights", self.modes + 1));
        }
        let pi = self.base.poisson();
        let mut k = Kernel2::zero(self.space.clone(), 1);
        for (i, row) in pi.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                for mode in 0..self.m() {
                    let v = p * &weights[Self::freq(mode)] / Self::norm(mode);
                    k = k.with_pair(self.a(i, mode), self.b(j, mode), v)?;
                }
            }
        }
        Ok(k)
    }

    /// Propagator `P` with `K_w + Q(P) = K_{w − g}`: frequency `k` carries `g_k / 2πk`.
    pub fn propagator(&self, g: &[Q]) -> Result<Kernel2> {
        if g.len() != self.modes + 1 {
            return arg(format!("need {} mode weights", self.modes + 1));
        }
        let pi = self.base.poisson();
        let dim = self.space.dim();
        let mut e = vec![vec![Q::zero(); dim]; dim];
        for (i, row) in pi.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                for k in 1..=self.modes {
                    let v = p * &g[k] / (&self.two_pi * q(k as i64) * Self::norm(1));
                    let (s, c) = (self.a(i, 2 * k), self.a(j, 2 * k - 1));
                    e[s][c] = v.clone();
                    e[c][s] = v;
                }
            }
        }
        Kernel2::new(self.space.clone(), 0, e)
    }

    /// Heat weights `e^{−t(2πk)²}`, `k = 0..=N`, as exact dyadics.
    pub fn heat_weights(&self, t: f64) -> Vec<Q> {
        let tp = std::f64::consts::TAU;
        (0..=self.modes).map(|k| from_f64((-t * (tp * k as f64).powi(2)).exp())).collect()
    }

    /// `Î(φ) = ∫ φ̂*(I)`: the `dt` component of `I(a + b dt)`.
    pub fn lift(&self, i: &Functional) -> Result<Functional> {
        if **i.space() != **self.base.space() {
            return Err(crate::error::Error::Space("interaction is not on the base space".into()));
        }
        let n = self.base.dim();
        let m = self.m();
        let degs = self.space.degrees().to_vec();
        let mut out = Functional::zero(self.space.clone(), i.cutoff());
        let exps: Vec<Vec<(i64, C)>> = (0..m).map(Self::exponentials).collect();
        for (mono, h, c) in i.terms() {
            for s in 0..n {
                let Some((rest, f)) = mono.left_derivative(s, self.base.space().degrees()) else { continue };
                let vars = rest.factors();
                let coeff = c * q(f);
                // enumerate mode assignments, carrying the product as a Fourier series
                let mut stack: Vec<(Vec<usize>, Vec<(i64, C)>)> = vec![(vec![], vec![(0, (q(1), q(0)))])];
                while let Some((modes, series)) = stack.pop() {
                    if modes.len() == vars.len() {
                        for cmode in 0..m {
                            let mut total = q(0);
                            for (fa, ca) in &series {
                                for (fb, cb) in &exps[cmode] {
                                    if fa + fb == 0 {
                                        total += cmul(ca, cb).0;
                                    }
                                }
                            }
                            if total.is_zero() {
                                continue;
                            }
                            let mut factors: Vec<usize> =
                                vars.iter().zip(&modes).map(|(&v, &a)| self.a(v, a)).collect();
                            factors.push(self.b(s, cmode));
                            let (mm, sign) = Monomial::from_factors(&factors, &degs).expect("one odd factor");
                            out.add_term(mm, h as i32, &coeff * total * q(sign as i64));
                        }
                        continue;
                    }
                    for a in 0..m {
                        let mut next: std::collections::BTreeMap<i64, C> = Default::default();
                        for (fa, ca) in &series {
                            for (fb, cb) in &exps[a] {
                                let e = next.entry(fa + fb).or_insert((q(0), q(0)));
                                let p = cmul(ca, cb);
                                e.0 += p.0;
                                e.1 += p.1;
                            }
                        }
                        let series: Vec<(i64, C)> =
                            next.into_iter().filter(|(_, c)| !(c.0.is_zero() && c.1.is_zero())).collect();
                        let mut modes = modes.clone();
                        modes.push(a);
                        stack.push((modes, series));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `QÎ + ℏΔ_wÎ + ½{Î, Î}_w`.
    pub fn obstruction(&self, lifted: &Functional, weights: &[Q]) -> Result<Functional> {
        let model = BvModel::new(self.space.clone(), self.kernel(weights)?)?;
        let c = lifted.cutoff();
        let wide = Cutoff::new((2 * c.degree).max(2), c.hbar + 1);
        model.qme_raw(&lifted.with_cutoff(wide))
    }
}

/// `Î[L] = W(P_ε^L, Î)` in the truncated model.
///
/// An odd lift satisfies `e^{Î/ℏ} = 1 + Î/ℏ`, so its flow is `e^{ℏ∂_P}Î`.
pub fn tqm_effective(model: &ModeModel, i: &Functional, eps: f64, l: f64) -> Result<Functional> {
    if !(eps > 0.0 && l >= eps) {
        return arg("need 0 < ε ≤ L");
    }
    if !i.is_zero() && !i.is_plus() {
        return arg("interaction must be at least cubic modulo ℏ");
    }
    let lifted = model.lift(i)?;
    let g: Vec<Q> = model.heat_weights(eps).iter().zip(model.heat_weights(l)).map(|(a, b)| a - b).collect();
    let p = model.propagator(&g)?;
    if lifted.is_even() {
        exp_contract(&p, &lifted, lifted.cutoff())
    } else if lifted.terms().all(|(m, _, _)| m.is_odd(model.space.degrees())) {
        exp_hbar_p(&p, &lifted)
    } else {
        arg("lifted interaction has mixed parity")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NReport {
    pub modes: usize,
    pub eps: Vec<f64>,
    /// Gap at each grid value of ε.
    pub gaps: Vec<f64>,
    /// Richardson extrapolation of `gaps` to ε = 0.
    pub extrapolated: f64,
    /// Gap with every heat weight set to 1.
    pub limit: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub runs: Vec<NReport>,
    /// Extrapolated gaps never increase with N.
    pub monotone: bool,
    /// `log(g_N / g_N') / log(N' / N)` between consecutive cutoffs, where defined.
    pub orders: Vec<Option<f64>>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// Neville-style table assuming an expansion in integer powers of ε.
fn richardson(eps: &[f64], vals: &[f64]) -> f64 {
    let mut t: Vec<f64> = vals.to_vec();
    for level in 1..t.len() {
        for j in (level..t.len()).rev() {
            let r = (eps[j - level] / eps[j]).powi(level as i32);
            t[j] = t[j] + (t[j] - t[j - 1]) / (r - 1.0);
        }
    }
    *t.last().unwrap_or(&0.0)
}

fn l2(f: &Functional) -> Vec<(Monomial, u32, f64)> {
    f.terms().map(|(m, h, c)| (m.clone(), h, to_f64(c))).collect()
}

/// `min_c ‖O − c·T‖₂` over coefficient vectors.
fn gap(o: &Functional, t: &Functional) -> f64 {
    use std::collections::BTreeMap;
    let mut keys: BTreeMap<(Monomial, u32), (f64, f64)> = BTreeMap::new();
    for (m, h, c) in l2(o) {
        keys.entry((m, h)).or_default().0 = c;
    }
    for (m, h, c) in l2(t) {
        keys.entry((m, h)).or_default().1 = c;
    }
    let (oo, ot, tt) = keys.values().fold((0.0, 0.0, 0.0), |(a, b, c), (x, y)| (a + x * x, b + x * y, c + y * y));
    let r = if tt > 0.0 { oo - ot * ot / tt } else { oo };
    r.max(0.0).sqrt()
}

/// Effective QME obstruction against the lift of `½ℏ⁻¹[I, I]_⋆`, for each mode cutoff.
pub fn qme_vs_star(base: &SymplecticSpace, i: &Functional, n_list: &[usize], eps_grid: &[f64]) -> Result<ConvergenceReport> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return arg("ε grid must be nonempty and positive");
    }
    let comm = star_commutator(base, i, i)?;
    if !comm.hbar_part(0).is_zero() {
        return Err(crate::error::Error::Internal("star commutator has an ℏ⁰ part".into()));
    }
    let mut target = Functional::zero(base.space().clone(), comm.cutoff());
    for (m, h, c) in comm.terms() {
        target.add_term(m.clone(), h as i32 - 1, c * qr(1, 2));
    }
    let runs: Vec<Result<NReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = n_list
            .iter()
            .map(|&n| {
                let target = &target;
                s.spawn(move || -> Result<NReport> {
                    let model = ModeModel::new(base.clone(), n)?;
                    let lifted = model.lift(i)?;
                    let t = model.lift(target)?;
                    let t = t.with_cutoff(Cutoff::new((2 * t.cutoff().degree).max(2), t.cutoff().hbar + 1));
                    let gaps = eps_grid
                        .iter()
                        .map(|&e| Ok(gap(&model.obstruction(&lifted, &model.heat_weights(e))?, &t)))
                        .collect::<Result<Vec<f64>>>()?;
                    let ones = vec![q(1); n + 1];
                    let limit = gap(&model.obstruction(&lifted, &ones)?, &t);
                    Ok(NReport { modes: n, eps: eps_grid.to_vec(), extrapolated: richardson(eps_grid, &gaps), gaps, limit })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let ex: Vec<f64> = runs.iter().map(|r| r.extrapolated.abs()).collect();
    let monotone = ex.windows(2).all(|w| w[1] <= w[0]);
    let orders = runs
        .windows(2)
        .map(|w| {
            let (g0, g1) = (w[0].extrapolated.abs(), w[1].extrapolated.abs());
            (g0 > 0.0 && g1 > 0.0).then(|| (g0 / g1).ln() / (w[1].modes as f64 / w[0].modes as f64).ln())
        })
        .collect();
    Ok(ConvergenceReport { runs, monotone, orders })
}
