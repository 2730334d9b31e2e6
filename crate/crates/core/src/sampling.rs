//! Seeded random generators used by the verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{Matrix, ThirdOrderTensor};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rotation in SO(3) from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Matrix {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-8 {
            continue;
        }
        let [w, x, y, z] = q.map(|v| v / n);
        return Matrix::from_rows3([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]);
    }
}

/// Entries uniform in `[-half_width, half_width]`.
pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize, half_width: f64) -> Matrix {
    let mut m = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = rng.gen_range(-half_width..=half_width);
        }
    }
    m
}

/// Random matrix with determinant in `[lo, hi]`, by rejection.
pub fn random_matrix_with_det<R: Rng>(rng: &mut R, dim: usize, half_width: f64, lo: f64, hi: f64) -> Matrix {
    loop {
        let m = random_matrix(rng, dim, half_width);
        let d = m.determinant();
        if d >= lo && d <= hi {
            return m;
        }
    }
}

pub fn random_third_order<R: Rng>(rng: &mut R, half_width: f64) -> ThirdOrderTensor {
    let mut t = ThirdOrderTensor::zeros();
    for v in t.as_mut_slice() {
        *v = rng.gen_range(-half_width..=half_width);
    }
    t
}

pub fn random_vec3<R: Rng>(rng: &mut R, half_width: f64) -> [f64; 3] {
    std::array::from_fn(|_| rng.gen_range(-half_width..=half_width))
}
