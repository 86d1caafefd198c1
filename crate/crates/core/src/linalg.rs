//! Dense small-matrix primitives.
//!
//! Everything here works on square, row-major `f64` matrices. The Cholesky
//! manifold only ever needs triangular storage, factorisation, forward
//! substitution and functions of *symmetric* matrices, so the matrix functions
//! are all built on a cyclic Jacobi eigensolver.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A dense `n x n` matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row vectors; every row must have `rows.len()` entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::DimMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Frobenius inner product `tr(A^T B)`.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// `(A + A^T) / 2`; the result is bitwise symmetric.
    pub fn symmetrize(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// The diagonal as a vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    /// The strictly upper part, zero on and below the diagonal.
    pub fn strict_upper(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i < j { self[(i, j)] } else { 0.0 })
    }

    /// The diagonal part as a matrix.
    pub fn diag_part(&self) -> Self {
        Self::from_diag(&self.diagonal())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch in matmul");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `A A^T`, symmetrised.
    pub fn gram(&self) -> Self {
        self.matmul(&self.transpose()).symmetrize()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in add");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in sub");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.map(|x| -x)
    }
}

/// A lower-triangular matrix. Entries above the diagonal are identically zero.
#[derive(Clone, PartialEq)]
pub struct LowerTri(Matrix);

impl fmt::Debug for LowerTri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl LowerTri {
    pub fn zeros(n: usize) -> Self {
        Self(Matrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    /// Keeps the lower triangle (diagonal included) of `m`.
    pub fn from_lower(m: &Matrix) -> Self {
        Self(Matrix::from_fn(m.dim(), |i, j| if i >= j { m[(i, j)] } else { 0.0 }))
    }

    /// Rejects matrices with a nonzero strictly upper part.
    pub fn try_from_matrix(m: Matrix) -> Result<Self> {
        let n = m.dim();
        for i in 0..n {
            for j in i + 1..n {
                if m[(i, j)] != 0.0 {
                    return Err(Error::NotLowerTriangular { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::try_from_matrix(Matrix::from_rows(rows)?)
    }

    /// Assembles `strict + diag(d)`; `strict` must be strictly lower.
    pub(crate) fn assemble(strict: &Matrix, d: &[f64]) -> Self {
        debug_assert_eq!(strict.dim(), d.len());
        let mut m = strict.clone();
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        Self(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }

    /// The strictly lower part, zero diagonal.
    pub fn strict(&self) -> Matrix {
        strict_lower(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }
}

impl Add for &LowerTri {
    type Output = LowerTri;
    fn add(self, rhs: &LowerTri) -> LowerTri {
        LowerTri(&self.0 + &rhs.0)
    }
}

impl Sub for &LowerTri {
    type Output = LowerTri;
    fn sub(self, rhs: &LowerTri) -> LowerTri {
        LowerTri(&self.0 - &rhs.0)
    }
}

/// Evaluation mode shared by every operator in the crate.
///
/// `Checked` validates domains and reports typed errors. `Raw` evaluates the
/// closed forms in plain IEEE arithmetic and lets Inf/NaN propagate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Checked,
    Raw,
}

/// A point of the Cholesky manifold: lower triangular with positive diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyPoint(LowerTri);

impl CholeskyPoint {
    /// Validates that every diagonal entry is finite and strictly positive.
    pub fn new(l: LowerTri) -> Result<Self> {
        for (i, d) in l.diagonal().into_iter().enumerate() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NonPositiveDiagonal { index: i, value: d });
            }
        }
        Ok(Self(l))
    }

    /// No validation; used by raw-mode evaluation.
    pub fn new_unchecked(l: LowerTri) -> Self {
        Self(l)
    }

    pub fn with_mode(l: LowerTri, mode: Mode) -> Result<Self> {
        match mode {
            Mode::Checked => Self::new(l),
            Mode::Raw => Ok(Self(l)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self(LowerTri::identity(n))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(LowerTri::from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn tri(&self) -> &LowerTri {
        &self.0
    }

    pub fn into_tri(self) -> LowerTri {
        self.0
    }

    pub fn as_matrix(&self) -> &Matrix {
        self.0.as_matrix()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }

    pub fn strict(&self) -> Matrix {
        self.0.strict()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// `L L^T`.
    pub fn to_spd(&self) -> Result<SpdPoint> {
        SpdPoint::new(self.as_matrix().gram())
    }
}

/// A vector of strictly positive values, e.g. the weight matrix of DGBWM.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveDiag(Vec<f64>);

impl PositiveDiag {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        for (i, &v) in d.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveDiagonal { index: i, value: v });
            }
        }
        Ok(Self(d))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A symmetric positive definite matrix together with its Cholesky factor.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdPoint {
    p: Matrix,
    factor: CholeskyPoint,
}

impl SpdPoint {
    /// Symmetrises the input and validates it by factorising.
    pub fn new(m: Matrix) -> Result<Self> {
        let p = m.symmetrize();
        let factor = cholesky(&p)?;
        Ok(Self { p, factor })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// `L L^T` with the factor kept as given (no refactorisation).
    pub fn from_factor(factor: CholeskyPoint) -> Self {
        let p = factor.as_matrix().gram();
        Self { p, factor }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn factor(&self) -> &CholeskyPoint {
        &self.factor
    }
}

/// `⌊A⌋`: the strictly lower part of `a`, zero diagonal.
pub fn strict_lower(a: &Matrix) -> Matrix {
    Matrix::from_fn(a.dim(), |i, j| if i > j { a[(i, j)] } else { 0.0 })
}

/// The diagonal of `a`, validated as a [`PositiveDiag`] in checked mode.
pub fn diag_of(a: &Matrix, mode: Mode) -> Result<Vec<f64>> {
    let d = a.diagonal();
    if mode == Mode::Checked {
        PositiveDiag::new(d.clone())?;
    }
    Ok(d)
}

/// Cholesky factorisation `P = L L^T` of a symmetric matrix.
pub fn cholesky(p: &Matrix) -> Result<CholeskyPoint> {
    let n = p.dim();
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = p[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = p[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(CholeskyPoint(LowerTri(l)))
}

/// Cholesky factor of an [`SpdPoint`] (cached at construction).
pub fn cholesky_factor(p: &SpdPoint) -> CholeskyPoint {
    p.factor.clone()
}

/// Solves `L X = B` by forward substitution.
pub fn tri_solve(l: &LowerTri, b: &Matrix, mode: Mode) -> Result<Matrix> {
    let n = l.dim();
    if b.dim() != n {
        return Err(Error::DimMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    if mode == Mode::Checked {
        if let Some(i) = (0..n).find(|&i| l.get(i, i) == 0.0) {
            return Err(Error::SingularTriangular { index: i });
        }
    }
    let mut x = Matrix::zeros(n);
    for col in 0..n {
        for i in 0..n {
            let mut s = b[(i, col)];
            for k in 0..i {
                s -= l.get(i, k) * x[(k, col)];
            }
            x[(i, col)] = s / l.get(i, i);
        }
    }
    Ok(x)
}

/// Symmetric eigendecomposition `A = U diag(λ) U^T` by cyclic Jacobi sweeps.
///
/// Returns eigenvalues and the orthogonal matrix whose columns are the
/// eigenvectors. Only the symmetric part of `a` is used.
pub fn sym_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.dim();
    let mut m = a.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    if scale == 0.0 || n == 1 {
        return (m.diagonal(), v);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (m.diagonal(), v)
}

/// `U f(Λ) U^T` for symmetric `a`, symmetrised.
pub fn sym_matfun(a: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let (lam, u) = sym_eigen(a);
    let n = a.dim();
    let fl: Vec<f64> = lam.iter().map(|&x| f(x)).collect();
    Matrix::from_fn(n, |i, j| (0..n).map(|k| u[(i, k)] * fl[k] * u[(j, k)]).sum()).symmetrize()
}

fn positive_spectrum(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (lam, u) = sym_eigen(a);
    if let Some(&bad) = lam.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::NonPositiveSpectrum { eigenvalue: bad });
    }
    Ok((lam, u))
}

fn recompose(lam: &[f64], u: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let n = u.dim();
    let fl: Vec<f64> = lam.iter().map(|&x| f(x)).collect();
    Matrix::from_fn(n, |i, j| (0..n).map(|k| u[(i, k)] * fl[k] * u[(j, k)]).sum()).symmetrize()
}

/// Matrix logarithm of an SPD matrix.
pub fn mlog(a: &Matrix) -> Result<Matrix> {
    let (lam, u) = positive_spectrum(a)?;
    Ok(recompose(&lam, &u, f64::ln))
}

/// Matrix exponential of a symmetric matrix.
pub fn mexp(a: &Matrix) -> Matrix {
    sym_matfun(a, f64::exp)
}

/// Matrix power `A^θ` of an SPD matrix.
pub fn mpow(a: &Matrix, theta: f64) -> Result<Matrix> {
    let (lam, u) = positive_spectrum(a)?;
    Ok(recompose(&lam, &u, |x| x.powf(theta)))
}

/// Principal square root of an SPD matrix.
pub fn msqrt(a: &Matrix) -> Result<Matrix> {
    let (lam, u) = positive_spectrum(a)?;
    Ok(recompose(&lam, &u, f64::sqrt))
}

/// Determinant by LU with partial pivoting.
pub fn determinant(a: &Matrix) -> f64 {
    let n = a.dim();
    let mut m = a.clone();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&x, &y| m[(x, c)].abs().total_cmp(&m[(y, c)].abs()))
            .unwrap_or(c);
        if m[(piv, c)] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for k in 0..n {
                let tmp = m[(c, k)];
                m[(c, k)] = m[(piv, k)];
                m[(piv, k)] = tmp;
            }
            det = -det;
        }
        let d = m[(c, c)];
        det *= d;
        for r in c + 1..n {
            let f = m[(r, c)] / d;
            if f != 0.0 {
                for k in c..n {
                    m[(r, k)] -= f * m[(c, k)];
                }
            }
        }
    }
    det
}

/// Determinant of an SPD matrix as the squared product of its Cholesky diagonal.
pub fn determinant_spd(p: &SpdPoint) -> f64 {
    let prod: f64 = p.factor().diagonal().iter().product();
    prod * prod
}

/// Relative Frobenius error `‖a − b‖ / ‖b‖` (absolute when `b = 0`).
pub fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
    let d = (a - b).frobenius_norm();
    let nb = b.frobenius_norm();
    if nb > 0.0 {
        d / nb
    } else {
        d
    }
}
