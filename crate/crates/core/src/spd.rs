//! Metrics on SPD matrices pulled back from the Cholesky manifold through
//! `P = LLᵀ`, together with the standard SPD geodesics used as baselines.
//!
//! Every operator is the Cholesky-side operator conjugated by the Cholesky map
//! and its differential: points go through their factor, tangents through
//! [`chol_diff`], and results come back through `L ↦ LLᵀ` or [`chol_diff_inv`].

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;

use crate::cholesky::CholeskyMetric;
use crate::error::{Error, Result};
use crate::gyro::{rel_residual, sample_gyro_point, GyroSpace};
use crate::linalg::{
    determinant_spd, mexp, mlog, mpow, msqrt, tri_solve, CholeskyPoint, LowerTri, Matrix, Mode, PositiveDiag, SpdPoint,
};

/// Differential of the Cholesky map at `P = LLᵀ`: `L (L⁻¹ V L⁻ᵀ)_{1/2}`, where
/// `(S)_{1/2}` keeps the strictly lower part and halves the diagonal.
pub fn chol_diff(p: &SpdPoint, v: &Matrix) -> Result<LowerTri> {
    if v.dim() != p.dim() {
        return Err(Error::DimMismatch {
            expected: p.dim(),
            found: v.dim(),
        });
    }
    let l = p.factor().tri();
    let v = v.symmetrize();
    let a = tri_solve(l, &v, Mode::Checked)?;
    let s = tri_solve(l, &a.transpose(), Mode::Checked)?;
    let half = Matrix::from_fn(p.dim(), |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => s[(i, j)],
        std::cmp::Ordering::Equal => 0.5 * s[(i, i)],
        std::cmp::Ordering::Less => 0.0,
    });
    Ok(LowerTri::from_lower(&l.as_matrix().matmul(&half)))
}

/// Inverse of [`chol_diff`]: `V = X Lᵀ + L Xᵀ`.
pub fn chol_diff_inv(l: &CholeskyPoint, x: &LowerTri) -> Matrix {
    let xl = x.as_matrix().matmul(&l.as_matrix().transpose());
    (&xl + &xl.transpose()).symmetrize()
}

/// A metric on SPD matrices pulled back from a Cholesky metric.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMetric {
    chol: CholeskyMetric,
}

impl SpdMetric {
    pub fn new(chol: CholeskyMetric) -> Self {
        Self { chol }
    }

    /// Log-Cholesky metric.
    pub fn lcm() -> Self {
        Self::new(CholeskyMetric::cm())
    }

    /// θ-CDEM.
    pub fn cdem(theta: f64) -> Result<Self> {
        Ok(Self::new(CholeskyMetric::dem(theta)?))
    }

    /// θ-CDGBWM.
    pub fn cdgbwm(theta: f64, weights: Option<PositiveDiag>) -> Result<Self> {
        Ok(Self::new(CholeskyMetric::dgbwm(theta, weights)?))
    }

    pub fn cholesky(&self) -> &CholeskyMetric {
        &self.chol
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        Self::new(self.chol.with_mode(mode))
    }

    fn check(&self, a: &SpdPoint, b: usize) -> Result<()> {
        if a.dim() != b {
            return Err(Error::DimMismatch {
                expected: a.dim(),
                found: b,
            });
        }
        Ok(())
    }

    pub fn inner(&self, p: &SpdPoint, v: &Matrix, w: &Matrix) -> Result<f64> {
        let (x, y) = (chol_diff(p, v)?, chol_diff(p, w)?);
        self.chol.inner(p.factor(), &x, &y)
    }

    pub fn geodesic(&self, p: &SpdPoint, v: &Matrix, t: f64) -> Result<SpdPoint> {
        let x = chol_diff(p, v)?;
        Ok(SpdPoint::from_factor(self.chol.geodesic(p.factor(), &x, t)?))
    }

    pub fn exp(&self, p: &SpdPoint, v: &Matrix) -> Result<SpdPoint> {
        self.geodesic(p, v, 1.0)
    }

    pub fn log(&self, p: &SpdPoint, q: &SpdPoint) -> Result<Matrix> {
        self.check(p, q.dim())?;
        let x = self.chol.log(p.factor(), q.factor())?;
        Ok(chol_diff_inv(p.factor(), &x))
    }

    pub fn transport(&self, p: &SpdPoint, q: &SpdPoint, v: &Matrix) -> Result<Matrix> {
        self.check(p, q.dim())?;
        let x = chol_diff(p, v)?;
        let moved = self.chol.transport(p.factor(), q.factor(), &x)?;
        Ok(chol_diff_inv(q.factor(), &moved))
    }

    pub fn dist(&self, p: &SpdPoint, q: &SpdPoint) -> Result<f64> {
        self.chol.dist(p.factor(), q.factor())
    }

    pub fn wfm(&self, weights: &[f64], points: &[SpdPoint]) -> Result<SpdPoint> {
        let factors: Vec<CholeskyPoint> = points.iter().map(|p| p.factor().clone()).collect();
        Ok(SpdPoint::from_factor(self.chol.wfm(weights, &factors)?))
    }

    /// The geodesic with `γ(0) = P` and `γ(1) = Q`, in endpoint form.
    pub fn interpolate(&self, p: &SpdPoint, q: &SpdPoint, t: f64) -> Result<SpdPoint> {
        Ok(SpdPoint::from_factor(self.chol.interpolate(p.factor(), q.factor(), t)?))
    }

    pub fn gyro_add(&self, p: &SpdPoint, q: &SpdPoint) -> Result<SpdPoint> {
        Ok(SpdPoint::from_factor(self.chol.gyro_add(p.factor(), q.factor())?))
    }

    pub fn gyro_scale(&self, t: f64, p: &SpdPoint) -> Result<SpdPoint> {
        Ok(SpdPoint::from_factor(self.chol.gyro_scale(t, p.factor())?))
    }

    pub fn gyro_inverse(&self, p: &SpdPoint) -> Result<SpdPoint> {
        Ok(SpdPoint::from_factor(self.chol.gyro_inverse(p.factor())?))
    }
}

impl GyroSpace for SpdMetric {
    type Point = SpdPoint;

    fn identity(&self, n: usize) -> SpdPoint {
        SpdPoint::from_factor(CholeskyPoint::identity(n))
    }
    fn add(&self, a: &SpdPoint, b: &SpdPoint) -> Result<SpdPoint> {
        self.gyro_add(a, b)
    }
    fn scale(&self, t: f64, a: &SpdPoint) -> Result<SpdPoint> {
        self.gyro_scale(t, a)
    }
    fn inverse(&self, a: &SpdPoint) -> Result<SpdPoint> {
        self.gyro_inverse(a)
    }
    /// `exp_P(PT_{I→P}(log_I Q))` with the SPD operators.
    fn compose_add(&self, a: &SpdPoint, b: &SpdPoint) -> Result<SpdPoint> {
        let id = self.identity(a.dim());
        let v = self.log(&id, b)?;
        self.exp(a, &self.transport(&id, a, &v)?)
    }
    fn compose_scale(&self, t: f64, a: &SpdPoint) -> Result<SpdPoint> {
        let id = self.identity(a.dim());
        self.exp(&id, &self.log(&id, a)?.scale(t))
    }
    fn residual(&self, a: &SpdPoint, b: &SpdPoint) -> f64 {
        rel_residual(a.as_matrix(), b.as_matrix())
    }
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> SpdPoint {
        SpdPoint::from_factor(sample_gyro_point(&self.chol, n, rng))
    }
}

/// Geodesic families compared in the interpolation experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaselineKind {
    /// Euclidean: `P + t(Q − P)`.
    Em,
    /// Power-Euclidean: straight line between `P^θ` and `Q^θ`.
    Pe(f64),
    /// Log-Euclidean.
    Lem,
    /// Affine-invariant.
    Aim,
    /// Log-Cholesky.
    Lcm,
    /// Bures-Wasserstein.
    Bwm,
    /// θ-CDEM.
    Cdem(f64),
    /// θ-CDGBWM with identity weight.
    Cdgbwm(f64),
}

fn fmt_theta(theta: f64) -> String {
    if theta.fract() == 0.0 {
        format!("{theta:.1}")
    } else {
        format!("{theta}")
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineKind::Em => write!(f, "EM"),
            BaselineKind::Pe(t) => write!(f, "{}-EM", fmt_theta(*t)),
            BaselineKind::Lem => write!(f, "LEM"),
            BaselineKind::Aim => write!(f, "AIM"),
            BaselineKind::Lcm => write!(f, "LCM"),
            BaselineKind::Bwm => write!(f, "BWM"),
            BaselineKind::Cdem(t) => write!(f, "{}-CDEM", fmt_theta(*t)),
            BaselineKind::Cdgbwm(t) => write!(f, "{}-CDGBWM", fmt_theta(*t)),
        }
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    /// Accepts `EM`, `LEM`, `AIM`, `LCM`, `BWM` and `<θ>-EM`, `<θ>-PEM`,
    /// `<θ>-CDEM`, `<θ>-CDGBWM` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let plain = match upper.as_str() {
            "EM" => Some(BaselineKind::Em),
            "LEM" => Some(BaselineKind::Lem),
            "AIM" => Some(BaselineKind::Aim),
            "LCM" => Some(BaselineKind::Lcm),
            "BWM" => Some(BaselineKind::Bwm),
            _ => None,
        };
        if let Some(kind) = plain {
            return Ok(kind);
        }
        let bad = || Error::Config(format!("unknown geodesic kind `{s}`"));
        let (theta, name) = upper.split_once('-').ok_or_else(bad)?;
        let theta: f64 = theta.parse().map_err(|_| bad())?;
        if theta == 0.0 || !theta.is_finite() {
            return Err(Error::ZeroTheta);
        }
        match name {
            "EM" | "PEM" => Ok(BaselineKind::Pe(theta)),
            "CDEM" => Ok(BaselineKind::Cdem(theta)),
            "CDGBWM" => Ok(BaselineKind::Cdgbwm(theta)),
            _ => Err(bad()),
        }
    }
}

/// `(PQ)^{1/2} + (QP)^{1/2}` with `(PQ)^{1/2} = P^{1/2}(P^{1/2}QP^{1/2})^{1/2}P^{-1/2}`.
fn bw_cross(p: &Matrix, q: &Matrix) -> Result<Matrix> {
    let ph = msqrt(p)?;
    let ph_inv = mpow(p, -0.5)?;
    let mid = msqrt(&ph.matmul(q).matmul(&ph).symmetrize())?;
    let pq = ph.matmul(&mid).matmul(&ph_inv);
    Ok(&pq + &pq.transpose())
}

/// Point at parameter `t` on the `kind` geodesic from `P` (t = 0) to `Q` (t = 1).
pub fn baseline_geodesic(kind: BaselineKind, p: &SpdPoint, q: &SpdPoint, t: f64) -> Result<SpdPoint> {
    if p.dim() != q.dim() {
        return Err(Error::DimMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let (pm, qm) = (p.as_matrix(), q.as_matrix());
    match kind {
        BaselineKind::Em => SpdPoint::new(pm + &(qm - pm).scale(t)),
        BaselineKind::Pe(theta) => {
            let (a, b) = (mpow(pm, theta)?, mpow(qm, theta)?);
            SpdPoint::new(mpow(&(&a + &(&b - &a).scale(t)), 1.0 / theta)?)
        }
        BaselineKind::Lem => {
            let (a, b) = (mlog(pm)?, mlog(qm)?);
            SpdPoint::new(mexp(&(&a + &(&b - &a).scale(t))))
        }
        BaselineKind::Aim => {
            // Q^{1/2}(Q^{-1/2} P Q^{-1/2})^{s} Q^{1/2} runs from Q (s = 0) to P (s = 1).
            let qh = msqrt(qm)?;
            let qih = mpow(qm, -0.5)?;
            let inner = mpow(&qih.matmul(pm).matmul(&qih).symmetrize(), 1.0 - t)?;
            SpdPoint::new(qh.matmul(&inner).matmul(&qh))
        }
        BaselineKind::Lcm => SpdMetric::lcm().interpolate(p, q, t),
        BaselineKind::Bwm => {
            let s = 1.0 - t;
            let cross = bw_cross(pm, qm)?;
            SpdPoint::new(&(&pm.scale(s * s) + &qm.scale(t * t)) + &cross.scale(t * s))
        }
        BaselineKind::Cdem(theta) => SpdMetric::cdem(theta)?.interpolate(p, q, t),
        BaselineKind::Cdgbwm(theta) => SpdMetric::cdgbwm(theta, None)?.interpolate(p, q, t),
    }
}

/// Determinants along each geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationRow {
    pub kind: BaselineKind,
    pub t: Vec<f64>,
    pub determinants: Vec<f64>,
}

/// Determinants at `t = i/(steps − 1)`. The first and last columns use `P` and
/// `Q` themselves.
pub fn interpolation_table(
    p: &SpdPoint,
    q: &SpdPoint,
    kinds: &[BaselineKind],
    steps: usize,
) -> Result<Vec<InterpolationRow>> {
    if steps < 2 {
        return Err(Error::Config("steps must be at least 2".into()));
    }
    let ts: Vec<f64> = (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
    kinds
        .iter()
        .map(|&kind| {
            let determinants = ts
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    if i == 0 {
                        Ok(determinant_spd(p))
                    } else if i == steps - 1 {
                        Ok(determinant_spd(q))
                    } else {
                        baseline_geodesic(kind, p, q, t).map(|g| determinant_spd(&g))
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(InterpolationRow {
                kind,
                t: ts.clone(),
                determinants,
            })
        })
        .collect()
}
