//! Random sampling of points and tangent vectors, for tests and experiments.

use rand::Rng;

use crate::linalg::{CholeskyPoint, LowerTri, Matrix, PositiveDiag, SpdPoint};

/// Lower-triangular matrix with entries uniform on `[-1, 1]`.
pub fn random_lower(n: usize, rng: &mut impl Rng) -> LowerTri {
    let m = Matrix::from_fn(n, |i, j| if i >= j { rng.gen_range(-1.0..=1.0) } else { 0.0 });
    LowerTri::from_lower(&m)
}

/// Cholesky point with strictly lower entries on `[-1, 1]` and diagonal on `[0.2, 2]`.
pub fn random_cholesky(n: usize, rng: &mut impl Rng) -> CholeskyPoint {
    let m = Matrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => rng.gen_range(-1.0..=1.0),
        std::cmp::Ordering::Equal => rng.gen_range(0.2..=2.0),
        std::cmp::Ordering::Less => 0.0,
    });
    CholeskyPoint::new_unchecked(LowerTri::from_lower(&m))
}

/// SPD matrix `LLᵀ` for a [`random_cholesky`] factor.
pub fn random_spd(n: usize, rng: &mut impl Rng) -> SpdPoint {
    SpdPoint::from_factor(random_cholesky(n, rng))
}

/// Symmetric matrix with entries uniform on `[-1, 1]`.
pub fn random_sym(n: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0)).symmetrize()
}

/// Diagonal weight with entries on `[0.25, 4]`.
pub fn random_weights(n: usize, rng: &mut impl Rng) -> PositiveDiag {
    PositiveDiag::new((0..n).map(|_| rng.gen_range(0.25..=4.0)).collect()).unwrap()
}

/// Convex weights: positive and summing to one.
pub fn random_convex(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..=1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = w[..k - 1].iter().sum();
    w[k - 1] = 1.0 - head;
    w
}

/// SplitMix64 finaliser folded over `parts`; gives independent per-trial seeds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        let mut z = h ^ p;
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}
