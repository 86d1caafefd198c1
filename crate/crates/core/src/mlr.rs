//! Multinomial logistic regression scores on SPD matrices under θ-CDEM and
//! θ-CDGBWM.
//!
//! Class `j` is described by a prototype `P_j = L_j L_jᵀ` and a lower
//! triangular direction `A_j`. For an input `S = KKᵀ` and a diagonal chart
//! `p ↦ p^α` with slot scales `c_i`, the score is
//!
//! ```text
//! ⟨⌊K⌋ − ⌊L_j⌋, ⌊A_j⌋⟩ + Σ_i c_i / (2α) · (K_ii^α − L_j,ii^α) · A_j,ii
//! ```
//!
//! which is `1/(2θ)⟨𝔻K^θ − 𝔻L^θ, 𝔻A⟩` for θ-CDEM (`α = θ`, `c = 1`) and
//! `1/(4θ)⟨𝔻K^{θ/2} − 𝔻L^{θ/2}, 𝕄⁻¹𝔻A⟩` for θ-CDGBWM (`α = θ/2`, `c = 1/(4m)`).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::line::pow;
use crate::linalg::{CholeskyPoint, LowerTri, SpdPoint};
use crate::spd::SpdMetric;

#[derive(Clone, Debug)]
pub struct MlrParams {
    metric: SpdMetric,
    prototypes: Vec<CholeskyPoint>,
    directions: Vec<LowerTri>,
}

impl MlrParams {
    /// Prototypes are given by their Cholesky factors.
    pub fn new(metric: SpdMetric, prototypes: Vec<CholeskyPoint>, directions: Vec<LowerTri>) -> Result<Self> {
        if metric.cholesky().line().exponent() == 0.0 {
            return Err(Error::Unsupported("MLR scores need a power chart on the diagonal"));
        }
        if prototypes.len() < 2 || prototypes.len() != directions.len() {
            return Err(Error::Config(format!(
                "need at least two classes with one direction each, got {} prototypes and {} directions",
                prototypes.len(),
                directions.len()
            )));
        }
        let n = prototypes[0].dim();
        for d in prototypes.iter().map(CholeskyPoint::dim).chain(directions.iter().map(LowerTri::dim)) {
            if d != n {
                return Err(Error::DimMismatch { expected: n, found: d });
            }
        }
        if let Some(w) = metric.cholesky().weights() {
            if w.len() != n {
                return Err(Error::DimMismatch { expected: n, found: w.len() });
            }
        }
        for p in &prototypes {
            CholeskyPoint::new(p.tri().clone())?;
        }
        Ok(Self {
            metric,
            prototypes,
            directions,
        })
    }

    pub fn classes(&self) -> usize {
        self.prototypes.len()
    }

    pub fn dim(&self) -> usize {
        self.prototypes[0].dim()
    }

    /// Unnormalised class scores for `S`.
    pub fn logits(&self, s: &SpdPoint) -> Result<Vec<f64>> {
        self.logits_factor(s.factor())
    }

    /// Scores for `S = KKᵀ` given the factor `K`.
    pub fn logits_factor(&self, k: &CholeskyPoint) -> Result<Vec<f64>> {
        if k.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: k.dim(),
            });
        }
        let chol = self.metric.cholesky();
        let a = chol.line().exponent();
        let coef: Vec<f64> = (0..k.dim()).map(|i| chol.slot(i).scale() / (2.0 * a)).collect();
        let kd: Vec<f64> = k.diagonal().iter().map(|&x| pow(x, a)).collect();
        let ks = k.strict();
        Ok(self
            .prototypes
            .iter()
            .zip(&self.directions)
            .map(|(l, dir)| {
                let flat = (&ks - &l.strict()).dot(&dir.strict());
                let diag: f64 = (0..k.dim())
                    .map(|i| coef[i] * (kd[i] - pow(l.tri().get(i, i), a)) * dir.get(i, i))
                    .sum();
                flat + diag
            })
            .collect())
    }

    /// Scores for a batch of inputs, evaluated in parallel.
    pub fn logits_batch(&self, inputs: &[SpdPoint]) -> Result<Vec<Vec<f64>>> {
        inputs.par_iter().map(|s| self.logits(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PositiveDiag;
    use crate::random::{random_cholesky, random_lower};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_worked_example() {
        let params = MlrParams::new(
            SpdMetric::cdem(1.0).unwrap(),
            vec![CholeskyPoint::from_rows(&[[1.0]]).unwrap(), CholeskyPoint::from_rows(&[[3.0]]).unwrap()],
            vec![LowerTri::from_rows(&[[2.0]]).unwrap(), LowerTri::from_rows(&[[1.0]]).unwrap()],
        )
        .unwrap();
        let s = SpdPoint::from_rows(&[[4.0]]).unwrap();
        let logits = params.logits(&s).unwrap();
        assert_eq!(logits[0], 1.0);
        assert_eq!(logits[1], -0.5);
    }

    #[test]
    fn cdgbwm_matches_its_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = PositiveDiag::new(vec![0.5, 2.0, 3.0]).unwrap();
        let theta = 1.5;
        let protos: Vec<CholeskyPoint> = (0..3).map(|_| random_cholesky(3, &mut rng)).collect();
        let dirs: Vec<LowerTri> = (0..3).map(|_| random_lower(3, &mut rng)).collect();
        let params = MlrParams::new(SpdMetric::cdgbwm(theta, Some(m.clone())).unwrap(), protos.clone(), dirs.clone()).unwrap();
        let k = random_cholesky(3, &mut rng);
        let got = params.logits_factor(&k).unwrap();
        for j in 0..3 {
            let flat = (&k.strict() - &protos[j].strict()).dot(&dirs[j].strict());
            let diag: f64 = (0..3)
                .map(|i| {
                    (k.tri().get(i, i).powf(theta / 2.0) - protos[j].tri().get(i, i).powf(theta / 2.0))
                        * dirs[j].get(i, i)
                        / m.as_slice()[i]
                })
                .sum::<f64>()
                / (4.0 * theta);
            assert!((got[j] - (flat + diag)).abs() <= 1e-13 * (flat.abs() + diag.abs()));
        }
    }

    #[test]
    fn rejects_bad_configurations() {
        let one = vec![CholeskyPoint::identity(2)];
        let dir = vec![LowerTri::zeros(2)];
        assert!(matches!(MlrParams::new(SpdMetric::cdem(1.0).unwrap(), one, dir), Err(Error::Config(_))));
        let two = vec![CholeskyPoint::identity(2), CholeskyPoint::identity(2)];
        let dirs = vec![LowerTri::zeros(2), LowerTri::zeros(2)];
        assert!(matches!(MlrParams::new(SpdMetric::lcm(), two.clone(), dirs.clone()), Err(Error::Unsupported(_))));
        let params = MlrParams::new(SpdMetric::cdem(0.5).unwrap(), two, dirs).unwrap();
        assert!(matches!(params.logits(&SpdPoint::from_rows(&[[1.0]]).unwrap()), Err(Error::DimMismatch { .. })));
    }
}
