use super::matrix::ComplexMatrix;
use super::svd::svd_values;
use crate::error::{Error, Result};

/// Schatten norms for `p ∈ {1, 2, ∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schatten {
    Trace,
    Frobenius,
    Spectral,
}

impl Schatten {
    pub fn from_p(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Schatten::Trace)
        } else if p == 2.0 {
            Ok(Schatten::Frobenius)
        } else if p.is_infinite() && p > 0.0 {
            Ok(Schatten::Spectral)
        } else {
            Err(Error::invalid(format!("unsupported Schatten exponent {p}")))
        }
    }
}

pub fn schatten_norm(a: &ComplexMatrix, which: Schatten) -> Result<f64> {
    if which == Schatten::Frobenius {
        return Ok(a.frobenius_norm());
    }
    let s = svd_values(a)?;
    Ok(match which {
        Schatten::Trace => s.values.iter().sum(),
        _ => s.max(),
    })
}

pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-10;

/// Number of singular values above `threshold · σ_max`.
pub fn numerical_rank(a: &ComplexMatrix, threshold: f64) -> Result<usize> {
    let s = svd_values(a)?;
    let cut = threshold * s.max();
    Ok(s.values.iter().filter(|&&x| x > cut).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn diagonal_norms() {
        let a = ComplexMatrix::from_diag(&[Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0), Complex64::new(0.0, 0.0)]);
        assert!((schatten_norm(&a, Schatten::Trace).unwrap() - 7.0).abs() < 1e-14);
        assert!((schatten_norm(&a, Schatten::Frobenius).unwrap() - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&a, Schatten::Spectral).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(numerical_rank(&a, DEFAULT_RANK_THRESHOLD).unwrap(), 2);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(Schatten::from_p(f64::INFINITY).unwrap(), Schatten::Spectral);
        assert!(Schatten::from_p(3.0).is_err());
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(4, 4), 1e-10).unwrap(), 0);
    }
}
