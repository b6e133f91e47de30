//! Seeded random matrices for unit tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{dot, ComplexMatrix};

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_vector(len: usize, seed: u64) -> Vec<Complex64> {
    random_matrix(len, 1, seed).into_vec()
}

/// Gram–Schmidt orthonormalization of a random matrix.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let a = random_matrix(n, n, seed);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<_> = (0..n).map(|i| a[(i, j)]).collect();
        for _ in 0..2 {
            for q in &cols {
                let p = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = super::matrix::vec_norm(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}
