//! Differential BV algebras `(O(V)[[ℏ]], Q, Δ_K)` on finite-dimensional
//! models: BV operator, bracket, master-equation residuals and observables.

mod fixtures;
mod observables;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graded::random::random_functional;
use crate::graded::{Cutoff, DgSpace, DgSpaceJson, Functional, Kernel2, Kernel2Json, TermJson};
use crate::scalar::{qr, Q};

pub use fixtures::{dgla_fixture, random_model, koszul_model, sl2_structure_constants};
pub use observables::{observables, ModuleSummand, ObsDegree, ObsReport};

/// A dg space together with a Q-closed BV kernel of degree one.
#[derive(Debug, Clone, PartialEq)]
pub struct BvModel {
    space: Arc<DgSpace>,
    kernel: Kernel2,
}

impl BvModel {
    pub fn new(space: Arc<DgSpace>, kernel: Kernel2) -> Result<Self> {
        if **kernel.space() != *space {
            return Err(Error::Space("kernel is defined on a different space".into()));
        }
        if kernel.degree() != 1 {
            return arg(format!("BV kernel must have degree 1, got {}", kernel.degree()));
        }
        if !kernel.apply_q().is_zero() {
            return arg("BV kernel is not Q-closed");
        }
        Ok(BvModel { space, kernel })
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn kernel(&self) -> &Kernel2 {
        &self.kernel
    }

    /// The model with kernel `K + Q(P)`.
    pub fn shifted(&self, p: &Kernel2) -> Result<BvModel> {
        if p.degree() != 0 {
            return arg("propagator must have degree 0");
        }
        BvModel::new(self.space.clone(), self.kernel.add(&p.apply_q())?)
    }

    fn check(&self, f: &Functional) -> Result<()> {
        if **f.space() != *self.space {
            return Err(Error::Space("functional is defined on a different space".into()));
        }
        Ok(())
    }

    /// Δ_K = contraction with the kernel.
    pub fn delta(&self, f: &Functional) -> Result<Functional> {
        self.check(f)?;
        f.contract(&self.kernel)
    }

    /// `{a,b} = Δ(ab) − (Δa)b − (−1)^{|a|} aΔb`, extended bilinearly over the
    /// homogeneous components of `a`.
    ///
    /// The product is formed before truncating, so the result is exact up to
    /// the cutoff for polynomial inputs.
    pub fn bracket(&self, a: &Functional, b: &Functional) -> Result<Functional> {
        self.check(a)?;
        self.check(b)?;
        if a.cutoff() != b.cutoff() {
            return Err(Error::Cutoff(format!("{:?} vs {:?}", a.cutoff(), b.cutoff())));
        }
        let cut = a.cutoff();
        let wide = Cutoff::new(cut.degree * 2 + 2, cut.hbar);
        let (aw, bw) = (a.with_cutoff(wide), b.with_cutoff(wide));
        let db = bw.contract(&self.kernel)?;
        let mut out = Functional::zero(self.space.clone(), wide);
        for (deg, part) in aw.homogeneous_parts() {
            let t1 = part.mul(&bw)?.contract(&self.kernel)?;
            let t2 = part.contract(&self.kernel)?.mul(&bw)?;
            let t3 = part.mul(&db)?;
            let mut piece = t1.sub(&t2)?;
            piece = if deg.rem_euclid(2) == 1 { piece.add(&t3)? } else { piece.sub(&t3)? };
            out = out.add(&piece)?;
        }
        Ok(out.with_cutoff(cut))
    }

    /// `QI₀ + ½{I₀, I₀}`.
    pub fn cme_residual(&self, i0: &Functional) -> Result<Functional> {
        self.check(i0)?;
        if i0.terms().any(|(_, h, _)| h > 0) {
            return arg("classical master equation takes an ℏ-independent functional");
        }
        i0.apply_q().add(&self.bracket(i0, i0)?.scale(&qr(1, 2)))
    }

    /// `QI + ℏΔI + ½{I, I}` together with its classical limit.
    pub fn qme_residual(&self, i: &Functional) -> Result<MasterResidual> {
        self.check(i)?;
        if !i.is_plus() {
            return arg("quantum master equation needs an interaction that is at least cubic modulo ℏ");
        }
        let quantum = self.qme_raw(i)?;
        let classical = self.cme_residual(&i.classical())?;
        Ok(MasterResidual::new(classical, quantum))
    }

    /// Residual without the O⁺ precondition.
    pub(crate) fn qme_raw(&self, i: &Functional) -> Result<Functional> {
        let q_i = i.apply_q();
        let hd = self.delta(i)?.hbar_shift(1);
        let br = self.bracket(i, i)?.scale(&qr(1, 2));
        q_i.add(&hd)?.add(&br)
    }

    /// Checks Δ² = 0 and [Q, Δ] = 0 on random functionals.
    pub fn check_axioms<R: Rng>(&self, rng: &mut R, samples: usize, cutoff: Cutoff) -> Result<AxiomReport> {
        let mut delta_sq = 0;
        let mut q_delta = 0;
        for _ in 0..samples {
            let f = random_functional(rng, &self.space, cutoff, 10, 0);
            let d = self.delta(&f)?;
            if !self.delta(&d)?.is_zero() {
                delta_sq += 1;
            }
            // Δ is odd, so the graded commutator is QΔ + ΔQ
            let c = d.apply_q().add(&self.delta(&f.apply_q())?)?;
            if !c.is_zero() {
                q_delta += 1;
            }
        }
        let q_squared_ok = (0..samples.min(10)).all(|_| {
            let f = random_functional(rng, &self.space, cutoff, 10, 0);
            f.apply_q().apply_q().is_zero()
        });
        Ok(AxiomReport { samples, delta_squared_failures: delta_sq, q_delta_failures: q_delta, q_squared_ok })
    }

    pub fn to_json(&self) -> BvModelJson {
        let sp = self.space.to_json();
        BvModelJson { basis: sp.basis, diff: sp.diff, kernel: self.kernel.to_json(), interaction: None }
    }

    pub fn from_json(j: &BvModelJson) -> Result<BvModel> {
        let space = Arc::new(DgSpace::from_json(&DgSpaceJson { basis: j.basis.clone(), diff: j.diff.clone() })?);
        let kernel = Kernel2::from_json(space.clone(), &j.kernel)?;
        BvModel::new(space, kernel).map_err(|e| match e {
            Error::Argument(m) => Error::Parse(m),
            e => e,
        })
    }
}

/// Wire form of a model: the dg-space fields plus `"kernel"` and an optional
/// `"interaction"` functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BvModelJson {
    pub basis: Vec<crate::graded::BasisEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_qmat")]
    pub diff: Option<Vec<Vec<Q>>>,
    pub kernel: Kernel2Json,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<Vec<TermJson>>,
}

mod opt_qmat {
    use crate::scalar::{serde_qmat, Q};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<Vec<Vec<Q>>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match m {
            Some(m) => serde_qmat::serialize(m, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Vec<Q>>>, D::Error> {
        serde_qmat::deserialize(d).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub delta_squared_failures: usize,
    pub q_delta_failures: usize,
    pub q_squared_ok: bool,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.delta_squared_failures == 0 && self.q_delta_failures == 0 && self.q_squared_ok
    }
}

/// Classical and quantum master-equation residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterResidual {
    pub classical_part: Functional,
    pub quantum_part: Functional,
    pub classical_zero: bool,
    pub quantum_zero: bool,
}

impl MasterResidual {
    pub fn new(classical_part: Functional, quantum_part: Functional) -> Self {
        let classical_zero = classical_part.is_zero();
        let quantum_zero = quantum_part.is_zero();
        MasterResidual { classical_part, quantum_part, classical_zero, quantum_zero }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "classical_zero": self.classical_zero,
            "quantum_zero": self.quantum_zero,
            "classical": self.classical_part.to_json(),
            "quantum": self.quantum_part.to_json(),
        })
    }
}

#[cfg(test)]
mod tests;
