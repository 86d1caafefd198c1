//! Riemannian operators on the Cholesky manifold `L₊(n)`.
//!
//! Every metric here is a product: the Euclidean metric on the strictly lower
//! triangular part times `n` copies of a [`LineMetric`] on the diagonal. The
//! strictly lower part of every operator is therefore the flat formula, and
//! diagonal slot `i` only ever sees slot-`i` inputs.

use crate::error::{Error, Result};
use crate::line::{check_weights, LineFamily, LineMetric};
use crate::linalg::{CholeskyPoint, LowerTri, Matrix, Mode, PositiveDiag};

/// A product metric on the Cholesky manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyMetric {
    line: LineMetric,
    weights: Option<PositiveDiag>,
    mode: Mode,
}

impl CholeskyMetric {
    /// Builds the product metric for `line`. `weights` (the diagonal `𝕄`) is
    /// only meaningful for the Bures-Wasserstein family.
    pub fn new(line: LineMetric, weights: Option<PositiveDiag>) -> Result<Self> {
        if weights.is_some() && line.family() != LineFamily::BuresWasserstein {
            return Err(Error::Config(
                "diagonal weights are only defined for the Bures-Wasserstein family".into(),
            ));
        }
        Ok(Self {
            line,
            weights,
            mode: Mode::Checked,
        })
    }

    /// The Cholesky metric (log chart on the diagonal).
    pub fn cm() -> Self {
        Self::new(LineMetric::affine(), None).unwrap()
    }

    /// The Euclidean metric on `L₊(n)`, i.e. 1-DEM.
    pub fn euclidean() -> Self {
        Self::new(LineMetric::euclidean(), None).unwrap()
    }

    /// θ-DEM.
    pub fn dem(theta: f64) -> Result<Self> {
        Self::new(LineMetric::euclidean().deform(theta)?, None)
    }

    /// θ-DGBWM with diagonal weight `𝕄` (identity when `None`, i.e. θ-DBWM).
    pub fn dgbwm(theta: f64, weights: Option<PositiveDiag>) -> Result<Self> {
        Self::new(LineMetric::gbw(1.0)?.deform(theta)?, weights)
    }

    /// The diagonal-power-deformed metric `g^θ`.
    pub fn deformed(&self, theta: f64) -> Result<Self> {
        Ok(Self {
            line: self.line.deform(theta)?,
            ..self.clone()
        })
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn line(&self) -> &LineMetric {
        &self.line
    }

    pub fn weights(&self) -> Option<&PositiveDiag> {
        self.weights.as_ref()
    }

    /// The line metric governing diagonal slot `i`.
    #[inline]
    pub fn slot(&self, i: usize) -> LineMetric {
        match &self.weights {
            Some(m) => self.line.weighted(m.as_slice()[i]),
            None => self.line,
        }
    }

    fn check_dim(&self, n: usize, others: &[usize]) -> Result<()> {
        if let Some(&bad) = others.iter().find(|&&d| d != n) {
            return Err(Error::DimMismatch {
                expected: n,
                found: bad,
            });
        }
        if let Some(m) = &self.weights {
            if m.len() != n {
                return Err(Error::DimMismatch {
                    expected: n,
                    found: m.len(),
                });
            }
        }
        Ok(())
    }

    fn check_point(&self, l: &CholeskyPoint) -> Result<()> {
        if self.mode == Mode::Checked {
            CholeskyPoint::new(l.tri().clone())?;
        }
        Ok(())
    }

    /// In checked mode, rejects outputs whose diagonal left `(0, ∞)`.
    fn finish(&self, strict: &Matrix, diag: &[f64]) -> Result<CholeskyPoint> {
        if self.mode == Mode::Checked {
            if let Some(slot) = diag.iter().position(|d| !(*d > 0.0 && d.is_finite())) {
                return Err(Error::OutOfDomain { slot });
            }
        }
        Ok(CholeskyPoint::new_unchecked(LowerTri::assemble(strict, diag)))
    }

    pub fn inner(&self, l: &CholeskyPoint, x: &LowerTri, y: &LowerTri) -> Result<f64> {
        self.check_dim(l.dim(), &[x.dim(), y.dim()])?;
        self.check_point(l)?;
        let flat = x.strict().dot(&y.strict());
        let diag: f64 = (0..l.dim())
            .map(|i| self.slot(i).inner_raw(l.tri().get(i, i), x.get(i, i), y.get(i, i)))
            .sum();
        Ok(flat + diag)
    }

    pub fn norm(&self, l: &CholeskyPoint, x: &LowerTri) -> Result<f64> {
        Ok(self.inner(l, x, x)?.sqrt())
    }

    /// First diagonal slot where the geodesic is undefined at `t`, if any.
    pub fn geodesic_domain_violation(&self, l: &CholeskyPoint, x: &LowerTri, t: f64) -> Option<usize> {
        (0..l.dim()).find(|&i| !self.line.geodesic_defined(l.tri().get(i, i), x.get(i, i), t))
    }

    pub fn geodesic(&self, l: &CholeskyPoint, x: &LowerTri, t: f64) -> Result<CholeskyPoint> {
        self.check_dim(l.dim(), &[x.dim()])?;
        self.check_point(l)?;
        if self.mode == Mode::Checked {
            if let Some(slot) = self.geodesic_domain_violation(l, x, t) {
                return Err(Error::OutOfDomain { slot });
            }
        }
        let strict = &l.strict() + &x.strict().scale(t);
        let diag: Vec<f64> = (0..l.dim())
            .map(|i| self.line.geodesic_raw(l.tri().get(i, i), x.get(i, i), t))
            .collect();
        self.finish(&strict, &diag)
    }

    pub fn exp(&self, l: &CholeskyPoint, x: &LowerTri) -> Result<CholeskyPoint> {
        self.geodesic(l, x, 1.0)
    }

    pub fn log(&self, l: &CholeskyPoint, k: &CholeskyPoint) -> Result<LowerTri> {
        self.check_dim(l.dim(), &[k.dim()])?;
        self.check_point(l)?;
        self.check_point(k)?;
        let strict = &k.strict() - &l.strict();
        let diag: Vec<f64> = (0..l.dim())
            .map(|i| self.line.log_raw(l.tri().get(i, i), k.tri().get(i, i)))
            .collect();
        Ok(LowerTri::assemble(&strict, &diag))
    }

    /// Parallel transport of `x` from `l` to `k` along the connecting geodesic.
    pub fn transport(&self, l: &CholeskyPoint, k: &CholeskyPoint, x: &LowerTri) -> Result<LowerTri> {
        self.check_dim(l.dim(), &[k.dim(), x.dim()])?;
        self.check_point(l)?;
        self.check_point(k)?;
        let diag: Vec<f64> = (0..l.dim())
            .map(|i| self.line.transport_raw(l.tri().get(i, i), k.tri().get(i, i), x.get(i, i)))
            .collect();
        Ok(LowerTri::assemble(&x.strict(), &diag))
    }

    pub fn dist(&self, l: &CholeskyPoint, k: &CholeskyPoint) -> Result<f64> {
        self.check_dim(l.dim(), &[k.dim()])?;
        self.check_point(l)?;
        self.check_point(k)?;
        let flat = (&k.strict() - &l.strict()).frobenius_norm();
        let diag: f64 = (0..l.dim())
            .map(|i| self.slot(i).dist_sq_raw(l.tri().get(i, i), k.tri().get(i, i)))
            .sum();
        Ok((flat * flat + diag).sqrt())
    }

    /// Weighted Fréchet mean in closed form.
    pub fn wfm(&self, weights: &[f64], points: &[CholeskyPoint]) -> Result<CholeskyPoint> {
        if weights.len() != points.len() {
            return Err(Error::BadWeights);
        }
        check_weights(weights)?;
        let n = points[0].dim();
        let dims: Vec<usize> = points.iter().map(CholeskyPoint::dim).collect();
        self.check_dim(n, &dims)?;
        for p in points {
            self.check_point(p)?;
        }
        let mut strict = Matrix::zeros(n);
        for (w, p) in weights.iter().zip(points) {
            strict = &strict + &p.strict().scale(*w);
        }
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let slot: Vec<f64> = points.iter().map(|p| p.tri().get(i, i)).collect();
                self.line.wfm_raw(weights, &slot)
            })
            .collect();
        self.finish(&strict, &diag)
    }

    /// The geodesic through `l` (t = 0) and `k` (t = 1), in endpoint form.
    pub fn interpolate(&self, l: &CholeskyPoint, k: &CholeskyPoint, t: f64) -> Result<CholeskyPoint> {
        self.check_dim(l.dim(), &[k.dim()])?;
        self.check_point(l)?;
        self.check_point(k)?;
        let ls = l.strict();
        let strict = &ls + &(&k.strict() - &ls).scale(t);
        let diag: Vec<f64> = (0..l.dim())
            .map(|i| self.line.interpolate_raw(l.tri().get(i, i), k.tri().get(i, i), t))
            .collect();
        self.finish(&strict, &diag)
    }
}

/// The deformed tensor `g^θ_L(X, Y) = ⟨⌊X⌋,⌊Y⌋⟩ + g̃_{𝔻L^θ}(𝔻L^{θ−1}𝔻X, 𝔻L^{θ−1}𝔻Y)`
/// evaluated from the undeformed `base` slot metrics.
pub fn deformed_inner_generic(
    base: &CholeskyMetric,
    theta: f64,
    l: &CholeskyPoint,
    x: &LowerTri,
    y: &LowerTri,
) -> f64 {
    let flat = x.strict().dot(&y.strict());
    let diag: f64 = (0..l.dim())
        .map(|i| crate::line::pullback_inner(&base.slot(i), theta, l.tri().get(i, i), x.get(i, i), y.get(i, i)))
        .sum();
    flat + diag
}
