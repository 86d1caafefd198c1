//! Riemannian metrics on the positive half-line.
//!
//! Each metric used on a diagonal slot of the Cholesky manifold is flat: it
//! is the pullback of a (scaled) Euclidean line through a chart
//! `φ(p) = p^α` (or `φ(p) = ln p` when `α = 0`). A metric is therefore fully
//! described by the chart exponent `α` and a constant scale `c`:
//!
//! ```text
//! g_p(v, w) = c · p^{2(α−1)} · v · w
//! ```
//!
//! | family                 | α       | c        |
//! |------------------------|---------|----------|
//! | affine-invariant (log) | 0       | 1        |
//! | power-Euclidean PE(θ)  | θ       | 1        |
//! | Bures-Wasserstein GBW(m)| 1/2    | 1/(4m)   |
//!
//! Power deformation by `θ` multiplies `α` by `θ` and leaves `c` unchanged.
//! Geodesics, logarithms and parallel transport depend on `α` only, so the
//! GBW operators are literally the PE(1/2) operators and are `m`-free.

use crate::error::{Error, Result};

/// Which base metric a [`LineMetric`] was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LineFamily {
    Affine,
    PowerEuclidean,
    BuresWasserstein,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineMetric {
    family: LineFamily,
    exponent: f64,
    scale: f64,
}

/// `x^a` with the common exponents evaluated exactly.
#[inline]
pub(crate) fn pow(x: f64, a: f64) -> f64 {
    if a == 1.0 {
        x
    } else if a == 2.0 {
        x * x
    } else if a == -1.0 {
        1.0 / x
    } else if a == 0.5 {
        x.sqrt()
    } else if a == 0.0 {
        1.0
    } else {
        x.powf(a)
    }
}

fn check_positive(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(p))
    }
}

/// Positive, finite weights summing to one within `1e-12`.
pub fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::BadWeights);
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights);
    }
    Ok(())
}

impl LineMetric {
    /// `g_p(v,w) = v w / p²`.
    pub fn affine() -> Self {
        Self {
            family: LineFamily::Affine,
            exponent: 0.0,
            scale: 1.0,
        }
    }

    /// `g_p(v,w) = p^{2(θ−1)} v w`.
    pub fn power(theta: f64) -> Result<Self> {
        if theta == 0.0 {
            return Err(Error::ZeroTheta);
        }
        Ok(Self {
            family: LineFamily::PowerEuclidean,
            exponent: theta,
            scale: 1.0,
        })
    }

    pub fn euclidean() -> Self {
        Self {
            family: LineFamily::PowerEuclidean,
            exponent: 1.0,
            scale: 1.0,
        }
    }

    /// `g_p(v,w) = v w / (4 m p)`.
    pub fn gbw(m: f64) -> Result<Self> {
        check_positive(m)?;
        Ok(Self {
            family: LineFamily::BuresWasserstein,
            exponent: 0.5,
            scale: 0.25 / m,
        })
    }

    /// `(1/θ²) · pow_θ^* g`.
    pub fn deform(&self, theta: f64) -> Result<Self> {
        if theta == 0.0 {
            return Err(Error::ZeroTheta);
        }
        Ok(Self {
            exponent: self.exponent * theta,
            ..*self
        })
    }

    /// Same chart, scale divided by `m` (per-slot DGBWM weight).
    pub(crate) fn weighted(&self, m: f64) -> Self {
        Self {
            scale: self.scale / m,
            ..*self
        }
    }

    pub fn family(&self) -> LineFamily {
        self.family
    }

    /// The chart exponent `α`; zero means the logarithmic chart.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The flat coordinate `φ(p)`.
    #[inline]
    pub fn chart(&self, p: f64) -> f64 {
        if self.exponent == 0.0 {
            p.ln()
        } else {
            pow(p, self.exponent)
        }
    }

    #[inline]
    pub fn chart_inv(&self, y: f64) -> f64 {
        if self.exponent == 0.0 {
            y.exp()
        } else {
            pow(y, 1.0 / self.exponent)
        }
    }

    // ---- raw closed forms -------------------------------------------------

    #[inline]
    pub fn inner_raw(&self, p: f64, v: f64, w: f64) -> f64 {
        let a = self.exponent;
        if a == 0.0 {
            self.scale * v * w / (p * p)
        } else {
            self.scale * pow(p, 2.0 * (a - 1.0)) * v * w
        }
    }

    #[inline]
    pub fn geodesic_raw(&self, p: f64, v: f64, t: f64) -> f64 {
        let a = self.exponent;
        if a == 0.0 {
            p * (t * v / p).exp()
        } else {
            p * pow(1.0 + t * a * v / p, 1.0 / a)
        }
    }

    #[inline]
    pub fn log_raw(&self, p: f64, q: f64) -> f64 {
        let a = self.exponent;
        if a == 0.0 {
            p * (q / p).ln()
        } else {
            p / a * (pow(q / p, a) - 1.0)
        }
    }

    #[inline]
    pub fn transport_raw(&self, p: f64, q: f64, v: f64) -> f64 {
        pow(q / p, 1.0 - self.exponent) * v
    }

    #[inline]
    pub fn dist_sq_raw(&self, p: f64, q: f64) -> f64 {
        let a = self.exponent;
        let d = if a == 0.0 {
            q.ln() - p.ln()
        } else {
            (pow(q, a) - pow(p, a)) / a
        };
        self.scale * d * d
    }

    #[inline]
    pub fn dist_raw(&self, p: f64, q: f64) -> f64 {
        self.dist_sq_raw(p, q).sqrt()
    }

    /// `φ⁻¹(Σ wᵢ φ(pᵢ))`.
    pub fn wfm_raw(&self, weights: &[f64], points: &[f64]) -> f64 {
        if let [p] = points {
            return *p;
        }
        let y: f64 = weights
            .iter()
            .zip(points)
            .map(|(&w, &p)| w * self.chart(p))
            .sum();
        self.chart_inv(y)
    }

    /// Geodesic through `p` (t = 0) and `q` (t = 1).
    #[inline]
    pub fn interpolate_raw(&self, p: f64, q: f64, t: f64) -> f64 {
        let a = self.chart(p);
        self.chart_inv(a + t * (self.chart(q) - a))
    }

    /// Whether `t ↦ γ_{(p,v)}(t)` is defined at `t`.
    #[inline]
    pub fn geodesic_defined(&self, p: f64, v: f64, t: f64) -> bool {
        self.exponent == 0.0 || 1.0 + t * self.exponent * v / p > 0.0
    }

    // ---- checked -----------------------------------------------------------

    pub fn inner(&self, p: f64, v: f64, w: f64) -> Result<f64> {
        check_positive(p)?;
        Ok(self.inner_raw(p, v, w))
    }

    pub fn geodesic(&self, p: f64, v: f64, t: f64) -> Result<f64> {
        check_positive(p)?;
        if !self.geodesic_defined(p, v, t) {
            return Err(Error::OutOfDomain { slot: 0 });
        }
        let out = self.geodesic_raw(p, v, t);
        check_positive(out)?;
        Ok(out)
    }

    pub fn log(&self, p: f64, q: f64) -> Result<f64> {
        check_positive(p)?;
        check_positive(q)?;
        Ok(self.log_raw(p, q))
    }

    pub fn transport(&self, p: f64, q: f64, v: f64) -> Result<f64> {
        check_positive(p)?;
        check_positive(q)?;
        Ok(self.transport_raw(p, q, v))
    }

    pub fn dist(&self, p: f64, q: f64) -> Result<f64> {
        check_positive(p)?;
        check_positive(q)?;
        Ok(self.dist_raw(p, q))
    }

    pub fn wfm(&self, weights: &[f64], points: &[f64]) -> Result<f64> {
        if weights.len() != points.len() {
            return Err(Error::DimMismatch {
                expected: weights.len(),
                found: points.len(),
            });
        }
        check_weights(weights)?;
        for &p in points {
            check_positive(p)?;
        }
        Ok(self.wfm_raw(weights, points))
    }
}

/// The deformed inner product assembled from its definition,
/// `g̃_{p^θ}(p^{θ−1} v, p^{θ−1} w)`, without using the closed form.
pub fn pullback_inner(base: &LineMetric, theta: f64, p: f64, v: f64, w: f64) -> f64 {
    let j = p.powf(theta - 1.0);
    base.inner_raw(p.powf(theta), j * v, j * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn inner_examples() {
        assert_eq!(LineMetric::affine().inner(1.0, 1.0, 1.0).unwrap(), 1.0);
        let pe = LineMetric::power(0.5).unwrap();
        assert_eq!(pe.inner(4.0, 2.0, 2.0).unwrap(), 1.0);
        // Pullback oracle: (θ p^{θ−1} v)² / θ².
        let oracle = (0.5 * 4f64.powf(-0.5) * 2.0).powi(2) / 0.25;
        assert!(close(pe.inner(4.0, 2.0, 2.0).unwrap(), oracle, 1e-15));
        assert_eq!(LineMetric::gbw(1.0).unwrap().inner(2.0, 4.0, 2.0).unwrap(), 1.0);
        assert_eq!(pe.inner(0.0, 1.0, 1.0), Err(Error::Domain(0.0)));
    }

    #[test]
    fn geodesic_examples() {
        for g in [LineMetric::affine(), LineMetric::power(0.5).unwrap(), LineMetric::gbw(3.0).unwrap()] {
            assert_eq!(g.geodesic(2.5, 1.7, 0.0).unwrap(), 2.5);
        }
        let pe = LineMetric::power(0.5).unwrap();
        assert_eq!(pe.geodesic(4.0, 2.0, 1.0).unwrap(), 6.25);
        // Straight line in power coordinates: (p^θ + tθ p^{θ−1} v)^{1/θ}.
        assert_eq!((2.0f64 + 0.5 * 0.5 * 2.0).powi(2), 6.25);
        assert_eq!(LineMetric::gbw(1.0).unwrap().geodesic(1.0, 2.0, 1.0).unwrap(), 4.0);
        assert!(matches!(pe.geodesic(1.0, -4.0, 1.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn log_examples() {
        for g in [LineMetric::affine(), LineMetric::power(1.5).unwrap(), LineMetric::gbw(2.0).unwrap()] {
            assert_eq!(g.log(3.0, 3.0).unwrap(), 0.0);
        }
        let gbw = LineMetric::gbw(1.0).unwrap();
        assert_eq!(gbw.log(1.0, 4.0).unwrap(), 2.0);
        assert_eq!(gbw.geodesic(1.0, 2.0, 1.0).unwrap(), 4.0);
        let ai = LineMetric::affine();
        assert!(close(ai.log(1.0, std::f64::consts::E).unwrap(), 1.0, 1e-15));
        assert!(close(ai.geodesic(1.0, 1.0, 1.0).unwrap(), std::f64::consts::E, 1e-15));
    }

    #[test]
    fn transport_examples() {
        let gbw = LineMetric::gbw(1.0).unwrap();
        assert_eq!(gbw.transport(2.0, 2.0, 3.0).unwrap(), 3.0);
        assert_eq!(LineMetric::euclidean().transport(0.3, 7.0, 3.0).unwrap(), 3.0);
        assert_eq!(gbw.transport(1.0, 4.0, 3.0).unwrap(), 6.0);
        assert_eq!(gbw.inner(1.0, 3.0, 3.0).unwrap(), gbw.inner(4.0, 6.0, 6.0).unwrap());
        assert_eq!(LineMetric::affine().transport(1.0, 2.0, 3.0).unwrap(), 6.0);
    }

    #[test]
    fn dist_examples() {
        let pe = LineMetric::power(0.5).unwrap();
        assert_eq!(pe.dist(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(pe.dist(1.0, 4.0).unwrap(), 2.0);
        assert_eq!(LineMetric::gbw(4.0).unwrap().dist(1.0, 4.0).unwrap(), 0.5);
    }

    #[test]
    fn dist_matches_arc_length_quadrature() {
        // Composite Simpson on sqrt(g(γ', γ')) along the closed-form geodesic.
        let g = LineMetric::power(0.5).unwrap();
        let (p, q) = (1.0, 4.0);
        let v = g.log(p, q).unwrap();
        let speed = |t: f64| {
            let h = 1e-6;
            let d = (g.geodesic_raw(p, v, t + h) - g.geodesic_raw(p, v, t - h)) / (2.0 * h);
            g.inner_raw(g.geodesic_raw(p, v, t), d, d).sqrt()
        };
        let n = 200;
        let h = 1.0 / n as f64;
        let mut s = speed(0.0) + speed(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * speed(i as f64 * h);
        }
        assert!(close(s * h / 3.0, 2.0, 1e-8));
    }

    #[test]
    fn wfm_examples() {
        let gbw = LineMetric::gbw(1.0).unwrap();
        assert_eq!(gbw.wfm(&[1.0], &[3.3]).unwrap(), 3.3);
        assert_eq!(gbw.wfm(&[0.5, 0.5], &[1.0, 9.0]).unwrap(), 4.0);
        // Grid-search oracle on Σ wᵢ d²(p, pᵢ) over (0, 20].
        let objective = |p: f64| 0.5 * gbw.dist_sq_raw(p, 1.0) + 0.5 * gbw.dist_sq_raw(p, 9.0);
        let best = (1..=200_000)
            .map(|i| i as f64 * 1e-4)
            .min_by(|a, b| objective(*a).total_cmp(&objective(*b)))
            .unwrap();
        assert!((best - 4.0).abs() <= 1e-4);
        assert_eq!(LineMetric::euclidean().wfm(&[0.5, 0.5], &[2.0, 4.0]).unwrap(), 3.0);
        assert_eq!(gbw.wfm(&[0.5, 0.6], &[1.0, 2.0]), Err(Error::BadWeights));
        assert_eq!(gbw.wfm(&[1.5, -0.5], &[1.0, 2.0]), Err(Error::BadWeights));
    }

    #[test]
    fn deform_examples() {
        assert_eq!(LineMetric::affine().deform(0.0), Err(Error::ZeroTheta));
        assert_eq!(LineMetric::power(0.0), Err(Error::ZeroTheta));
        let d = LineMetric::euclidean().deform(0.5).unwrap();
        assert_eq!(d.inner(4.0, 2.0, 2.0).unwrap(), 1.0);
        assert_eq!(d, LineMetric::power(0.5).unwrap());
        assert_eq!(LineMetric::affine().deform(0.7).unwrap(), LineMetric::affine());
        // Deformed GBW shares exp/log/transport with PE(θ/2).
        let dg = LineMetric::gbw(3.0).unwrap().deform(1.5).unwrap();
        let pe = LineMetric::power(0.75).unwrap();
        assert_eq!(dg.geodesic_raw(1.3, 0.4, 0.7), pe.geodesic_raw(1.3, 0.4, 0.7));
        assert_eq!(dg.log_raw(1.3, 0.4), pe.log_raw(1.3, 0.4));
        assert_eq!(dg.transport_raw(1.3, 0.4, 2.0), pe.transport_raw(1.3, 0.4, 2.0));
    }

    #[test]
    fn deformed_affine_tensor_is_affine() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
        use rand::Rng;
        let ai = LineMetric::affine();
        for _ in 0..100 {
            let p = rng.gen_range(0.01..100.0);
            let v = rng.gen_range(-3.0..3.0);
            let w = rng.gen_range(-3.0..3.0);
            let generic = pullback_inner(&ai, 0.7, p, v, w);
            let closed = ai.deform(0.7).unwrap().inner_raw(p, v, w);
            assert!((generic - closed).abs() <= 1e-12 * closed.abs().max(1e-12));
        }
    }

    fn metrics() -> impl Strategy<Value = LineMetric> {
        prop_oneof![
            Just(LineMetric::affine()),
            (0.2f64..2.0).prop_map(|t| LineMetric::power(t).unwrap()),
            (-2.0f64..-0.2).prop_map(|t| LineMetric::power(t).unwrap()),
            (0.1f64..10.0).prop_map(|m| LineMetric::gbw(m).unwrap()),
            ((0.1f64..10.0), (0.2f64..2.0)).prop_map(|(m, t)| LineMetric::gbw(m).unwrap().deform(t).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn exp_inverts_log(g in metrics(), p in 0.1f64..10.0, q in 0.1f64..10.0) {
            let back = g.geodesic(p, g.log(p, q).unwrap(), 1.0).unwrap();
            prop_assert!(close(back, q, 1e-12), "{back} vs {q}");
        }

        // Over six decades the exponential map is evaluated close to the edge
        // of its domain, so the error is measured against its conditioning.
        #[test]
        fn exp_inverts_log_wide_range(g in metrics(), lp in -3.0f64..3.0, lq in -3.0f64..3.0) {
            let (p, q) = (10f64.powf(lp), 10f64.powf(lq));
            let v = g.log(p, q).unwrap();
            let back = g.geodesic(p, v, 1.0).unwrap();
            let a = g.exponent();
            let cond = if a == 0.0 { (v / p).abs() } else { ((v / p) / (1.0 + a * v / p)).abs() };
            prop_assert!(close(back, q, 1e-12 * cond.max(1.0)), "{back} vs {q}");
        }

        #[test]
        fn transport_is_linear_isometry(g in metrics(), p in 0.01f64..50.0, q in 0.01f64..50.0,
                                        v in -5.0f64..5.0, w in -5.0f64..5.0) {
            let (tv, tw) = (g.transport_raw(p, q, v), g.transport_raw(p, q, w));
            let before = g.inner_raw(p, v, w);
            prop_assert!((g.inner_raw(q, tv, tw) - before).abs() <= 1e-12 * g.inner_raw(p, v, v).max(g.inner_raw(p, w, w)).max(1e-300));
            let sum = g.transport_raw(p, q, v + w);
            prop_assert!((sum - (tv + tw)).abs() <= 1e-12 * (tv.abs() + tw.abs()).max(1e-300));
        }

        #[test]
        fn geodesics_have_constant_speed(g in metrics(), p in 0.05f64..20.0, q in 0.05f64..20.0, t in 0.0f64..1.0) {
            let v = g.log_raw(p, q);
            let total = g.dist_raw(p, q);
            let partial = g.dist_raw(p, g.geodesic_raw(p, v, t));
            prop_assert!((partial - t * total).abs() <= 1e-10 * total.max(1e-300));
        }

        #[test]
        fn wfm_is_stationary(g in metrics(), pts in proptest::collection::vec(0.05f64..20.0, 1..6),
                             raw_w in proptest::collection::vec(0.1f64..1.0, 6)) {
            let w: Vec<f64> = raw_w[..pts.len()].to_vec();
            let total: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / total).collect();
            let mean = g.wfm_raw(&w, &pts);
            let residual: f64 = w.iter().zip(&pts).map(|(wi, &pi)| wi * g.log_raw(mean, pi)).sum();
            let size: f64 = w.iter().zip(&pts).map(|(wi, &pi)| wi * g.log_raw(mean, pi).abs()).sum();
            prop_assert!(residual.abs() <= 1e-10 * size.max(1.0));
        }

        #[test]
        fn small_theta_power_tensor_approaches_affine(p in 0.1f64..10.0, v in 0.1f64..5.0) {
            let small = LineMetric::euclidean().deform(1e-4).unwrap().inner_raw(p, v, v);
            let ai = LineMetric::affine().inner_raw(p, v, v);
            prop_assert!((small - ai).abs() / ai <= 1e-3);
        }
    }
}
