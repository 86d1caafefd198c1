//! Gyrovector structure on the Cholesky manifold, with the identity matrix as
//! origin.
//!
//! In the chart `φ` of the diagonal line metric the operations are affine:
//!
//! ```text
//! L ⊕ K = ⌊L⌋ + ⌊K⌋ + φ⁻¹(φ(𝔻L) + φ(𝔻K) − φ(I))
//! t ⊙ L = t⌊L⌋ + φ⁻¹(t φ(𝔻L) + (1 − t) φ(I))
//! ⊖L    = −⌊L⌋ + φ⁻¹(2φ(I) − φ(𝔻L))
//! ```
//!
//! For a power chart `φ(I) = 1` and the results only exist while the argument
//! of `φ⁻¹` stays positive; the log chart (CM) is unconditional. The
//! gyration is the identity map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cholesky::CholeskyMetric;
use crate::error::{Error, Result};
use crate::linalg::{CholeskyPoint, LowerTri, Matrix, Mode};
use crate::line::pow;
use crate::random::mix_seed;

impl CholeskyMetric {
    fn alpha(&self) -> f64 {
        self.line().exponent()
    }

    fn gyro_finish(&self, op: &'static str, strict: &Matrix, chart: &[f64]) -> Result<CholeskyPoint> {
        let a = self.alpha();
        if a != 0.0 && self.mode() == Mode::Checked {
            if let Some(slot) = chart.iter().position(|y| !(*y > 0.0)) {
                return Err(Error::GyroDomain { op, slot });
            }
        }
        let diag: Vec<f64> = chart
            .iter()
            .map(|&y| if a == 0.0 { y } else { pow(y, 1.0 / a) })
            .collect();
        Ok(CholeskyPoint::new_unchecked(LowerTri::assemble(strict, &diag)))
    }

    fn gyro_dims(&self, n: usize, m: usize) -> Result<()> {
        if n != m {
            return Err(Error::DimMismatch { expected: n, found: m });
        }
        Ok(())
    }

    /// The origin `I`.
    pub fn gyro_identity(&self, n: usize) -> CholeskyPoint {
        CholeskyPoint::identity(n)
    }

    /// Whether `L ⊕ K` exists: every slot of `φ(𝔻L) + φ(𝔻K) − I` is positive.
    pub fn add_defined(&self, l: &CholeskyPoint, k: &CholeskyPoint) -> bool {
        let a = self.alpha();
        a == 0.0 || (0..l.dim()).all(|i| pow(l.tri().get(i, i), a) + pow(k.tri().get(i, i), a) - 1.0 > 0.0)
    }

    /// Whether `t ⊙ L` exists.
    pub fn scale_defined(&self, t: f64, l: &CholeskyPoint) -> bool {
        let a = self.alpha();
        a == 0.0 || (0..l.dim()).all(|i| t * pow(l.tri().get(i, i), a) + (1.0 - t) > 0.0)
    }

    /// Whether `⊖L` exists.
    pub fn inverse_defined(&self, l: &CholeskyPoint) -> bool {
        let a = self.alpha();
        a == 0.0 || (0..l.dim()).all(|i| 2.0 - pow(l.tri().get(i, i), a) > 0.0)
    }

    pub fn gyro_add(&self, l: &CholeskyPoint, k: &CholeskyPoint) -> Result<CholeskyPoint> {
        self.gyro_dims(l.dim(), k.dim())?;
        let a = self.alpha();
        let strict = &l.strict() + &k.strict();
        let chart: Vec<f64> = (0..l.dim())
            .map(|i| {
                let (p, q) = (l.tri().get(i, i), k.tri().get(i, i));
                if a == 0.0 {
                    p * q
                } else {
                    pow(p, a) + pow(q, a) - 1.0
                }
            })
            .collect();
        self.gyro_finish("add", &strict, &chart)
    }

    pub fn gyro_scale(&self, t: f64, l: &CholeskyPoint) -> Result<CholeskyPoint> {
        let a = self.alpha();
        let strict = l.strict().scale(t);
        let chart: Vec<f64> = l
            .diagonal()
            .into_iter()
            .map(|p| if a == 0.0 { p.powf(t) } else { t * pow(p, a) + (1.0 - t) })
            .collect();
        self.gyro_finish("scale", &strict, &chart)
    }

    pub fn gyro_inverse(&self, l: &CholeskyPoint) -> Result<CholeskyPoint> {
        let a = self.alpha();
        let strict = -&l.strict();
        let chart: Vec<f64> = l
            .diagonal()
            .into_iter()
            .map(|p| if a == 0.0 { 1.0 / p } else { 2.0 - pow(p, a) })
            .collect();
        self.gyro_finish("inverse", &strict, &chart)
    }

    /// `L ⊕ K` composed from Riemannian operators: `exp_L(PT_{I→L}(log_I K))`.
    pub fn compose_add(&self, l: &CholeskyPoint, k: &CholeskyPoint) -> Result<CholeskyPoint> {
        let id = CholeskyPoint::identity(l.dim());
        let v = self.log(&id, k)?;
        let moved = self.transport(&id, l, &v)?;
        self.exp(l, &moved)
    }

    /// `t ⊙ L` composed from Riemannian operators: `exp_I(t log_I L)`.
    pub fn compose_scale(&self, t: f64, l: &CholeskyPoint) -> Result<CholeskyPoint> {
        let id = CholeskyPoint::identity(l.dim());
        let v = self.log(&id, l)?;
        self.exp(&id, &v.scale(t))
    }

    /// Evaluates `gyr[L, K]J = ⊖(L ⊕ K) ⊕ (L ⊕ (K ⊕ J))`, which equals `J`.
    pub fn gyration(&self, l: &CholeskyPoint, k: &CholeskyPoint, j: &CholeskyPoint) -> Result<CholeskyPoint> {
        let lk = self.gyro_add(l, k)?;
        let rhs = self.gyro_add(l, &self.gyro_add(k, j)?)?;
        self.gyro_add(&self.gyro_inverse(&lk)?, &rhs)
    }
}

/// A gyrovector space whose axioms can be checked by [`axiom_suite`].
pub trait GyroSpace: Sync {
    type Point: Clone + Send;

    fn identity(&self, n: usize) -> Self::Point;
    fn add(&self, a: &Self::Point, b: &Self::Point) -> Result<Self::Point>;
    fn scale(&self, t: f64, a: &Self::Point) -> Result<Self::Point>;
    fn inverse(&self, a: &Self::Point) -> Result<Self::Point>;
    fn compose_add(&self, a: &Self::Point, b: &Self::Point) -> Result<Self::Point>;
    fn compose_scale(&self, t: f64, a: &Self::Point) -> Result<Self::Point>;
    /// Relative Frobenius discrepancy `‖a − b‖ / ‖b‖`.
    fn residual(&self, a: &Self::Point, b: &Self::Point) -> f64;
    /// A point whose diagonal chart values lie in `(0.5, 1.5)`.
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Self::Point;

    fn gyration(&self, a: &Self::Point, b: &Self::Point, c: &Self::Point) -> Result<Self::Point> {
        let ab = self.add(a, b)?;
        let rhs = self.add(a, &self.add(b, c)?)?;
        self.add(&self.inverse(&ab)?, &rhs)
    }
}

pub(crate) fn rel_residual(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(1e-300)
}

/// Cholesky point with strictly lower entries in `[-1, 1]` and `φ(L_ii)` in `(0.5, 1.5)`
/// (for the log chart, `ln L_ii` in `(-0.5, 0.5)`).
pub(crate) fn sample_gyro_point(metric: &CholeskyMetric, n: usize, rng: &mut ChaCha8Rng) -> CholeskyPoint {
    let line = metric.line();
    let m = Matrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => rng.gen_range(-1.0..=1.0),
        std::cmp::Ordering::Equal => {
            if line.exponent() == 0.0 {
                rng.gen_range(-0.5..0.5f64).exp()
            } else {
                line.chart_inv(rng.gen_range(0.5..1.5))
            }
        }
        std::cmp::Ordering::Less => 0.0,
    });
    CholeskyPoint::new_unchecked(LowerTri::from_lower(&m))
}

impl GyroSpace for CholeskyMetric {
    type Point = CholeskyPoint;

    fn identity(&self, n: usize) -> CholeskyPoint {
        CholeskyPoint::identity(n)
    }
    fn add(&self, a: &CholeskyPoint, b: &CholeskyPoint) -> Result<CholeskyPoint> {
        self.gyro_add(a, b)
    }
    fn scale(&self, t: f64, a: &CholeskyPoint) -> Result<CholeskyPoint> {
        self.gyro_scale(t, a)
    }
    fn inverse(&self, a: &CholeskyPoint) -> Result<CholeskyPoint> {
        self.gyro_inverse(a)
    }
    fn compose_add(&self, a: &CholeskyPoint, b: &CholeskyPoint) -> Result<CholeskyPoint> {
        CholeskyMetric::compose_add(self, a, b)
    }
    fn compose_scale(&self, t: f64, a: &CholeskyPoint) -> Result<CholeskyPoint> {
        CholeskyMetric::compose_scale(self, t, a)
    }
    fn residual(&self, a: &CholeskyPoint, b: &CholeskyPoint) -> f64 {
        rel_residual(a.as_matrix(), b.as_matrix())
    }
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> CholeskyPoint {
        sample_gyro_point(self, n, rng)
    }
}

/// The identities exercised by [`axiom_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// `I ⊕ L = L`.
    G1LeftIdentity,
    /// `⊖L ⊕ L = I`.
    G2LeftInverse,
    /// `L ⊕ (K ⊕ J) = (L ⊕ K) ⊕ gyr[L, K]J`.
    G3LeftGyroassociative,
    /// `gyr[L, K] = gyr[L ⊕ K, K]`.
    G4LeftLoop,
    /// `L ⊕ K = gyr[L, K](K ⊕ L)`.
    Gyrocommutative,
    /// `1 ⊙ L = L`.
    V1Identity,
    /// `(s + t) ⊙ L = s ⊙ L ⊕ t ⊙ L`.
    V2ScalarDistributive,
    /// `(st) ⊙ L = s ⊙ (t ⊙ L)`.
    V3ScalarAssociative,
    /// `r ⊙ gyr[L, K]J = gyr[L, K](r ⊙ J)`.
    V4Gyroautomorphism,
    /// `gyr[s ⊙ L, t ⊙ L] = id`.
    V5Identity,
    /// Closed-form `⊕` equals the composition of exp, transport and log.
    GenericAdd,
    /// Closed-form `⊙` equals the composition of exp and log.
    GenericScale,
    /// `gyr[L, K]J = J`.
    TrivialGyration,
}

impl Axiom {
    pub const ALL: [Axiom; 13] = [
        Axiom::G1LeftIdentity,
        Axiom::G2LeftInverse,
        Axiom::G3LeftGyroassociative,
        Axiom::G4LeftLoop,
        Axiom::Gyrocommutative,
        Axiom::V1Identity,
        Axiom::V2ScalarDistributive,
        Axiom::V3ScalarAssociative,
        Axiom::V4Gyroautomorphism,
        Axiom::V5Identity,
        Axiom::GenericAdd,
        Axiom::GenericScale,
        Axiom::TrivialGyration,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomTally {
    pub axiom: Axiom,
    pub passed: usize,
    pub checked: usize,
    pub worst: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub tolerance: f64,
    pub trials: usize,
    /// Trials for which no in-domain sample was found within the retry budget.
    pub skipped: usize,
    pub tallies: Vec<AxiomTally>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.skipped == 0 && self.tallies.iter().all(|t| t.passed == t.checked && t.checked == self.trials)
    }

    pub fn worst(&self) -> f64 {
        self.tallies.iter().map(|t| t.worst).fold(0.0, f64::max)
    }
}

const RETRIES: usize = 100;

fn one_trial<G: GyroSpace>(g: &G, n: usize, rng: &mut ChaCha8Rng) -> Result<[f64; 13]> {
    let l = g.sample(n, rng);
    let k = g.sample(n, rng);
    let j = g.sample(n, rng);
    let s: f64 = rng.gen_range(-0.5..=1.0);
    let t: f64 = rng.gen_range(-0.5..=1.0);
    let r: f64 = rng.gen_range(-0.5..=1.0);
    let id = g.identity(n);

    let g1 = g.residual(&g.add(&id, &l)?, &l);
    let g2 = g.residual(&g.add(&g.inverse(&l)?, &l)?, &id);
    let lk = g.add(&l, &k)?;
    let gyr_lkj = g.gyration(&l, &k, &j)?;
    let g3 = g.residual(&g.add(&l, &g.add(&k, &j)?)?, &g.add(&lk, &gyr_lkj)?);
    let g4 = g.residual(&g.gyration(&lk, &k, &j)?, &gyr_lkj);
    let kl = g.add(&k, &l)?;
    let comm = g.residual(&lk, &g.gyration(&l, &k, &kl)?);
    let v1 = g.residual(&g.scale(1.0, &l)?, &l);
    let v2 = g.residual(&g.scale(s + t, &l)?, &g.add(&g.scale(s, &l)?, &g.scale(t, &l)?)?);
    let v3 = g.residual(&g.scale(s * t, &l)?, &g.scale(s, &g.scale(t, &l)?)?);
    let v4 = g.residual(&g.gyration(&l, &k, &g.scale(r, &j)?)?, &g.scale(r, &gyr_lkj)?);
    let v5 = g.residual(&g.gyration(&g.scale(s, &l)?, &g.scale(t, &l)?, &j)?, &j);
    let gen_add = g.residual(&g.compose_add(&l, &k)?, &lk);
    let gen_scale = g.residual(&g.compose_scale(t, &l)?, &g.scale(t, &l)?);
    let triv = g.residual(&gyr_lkj, &j);
    Ok([g1, g2, g3, g4, comm, v1, v2, v3, v4, v5, gen_add, gen_scale, triv])
}

/// Checks every gyrogroup and gyrovector-space identity on `trials` random
/// in-domain samples. Trial `i` draws from a stream seeded by `(seed, i)`, so the
/// report does not depend on the thread count.
pub fn axiom_suite<G: GyroSpace>(g: &G, n: usize, seed: u64, trials: usize, tolerance: f64) -> AxiomReport {
    let outcomes: Vec<Option<[f64; 13]>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, i as u64]));
            (0..RETRIES).find_map(|_| one_trial(g, n, &mut rng).ok())
        })
        .collect();
    let mut tallies: Vec<AxiomTally> = Axiom::ALL
        .iter()
        .map(|&axiom| AxiomTally {
            axiom,
            passed: 0,
            checked: 0,
            worst: 0.0,
        })
        .collect();
    let mut skipped = 0;
    for outcome in &outcomes {
        let Some(res) = outcome else {
            skipped += 1;
            continue;
        };
        for (tally, &r) in tallies.iter_mut().zip(res) {
            tally.checked += 1;
            if r <= tolerance {
                tally.passed += 1;
            }
            tally.worst = if r.is_nan() { f64::NAN } else { tally.worst.max(r) };
        }
    }
    AxiomReport {
        tolerance,
        trials,
        skipped,
        tallies,
    }
}
