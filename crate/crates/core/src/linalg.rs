//! Small linear-algebra helpers: a tridiagonal (Thomas) solver and
//! dense LU solves on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals.
///
/// `lower[i]` multiplies `x[i]` in row `i + 1`, `upper[i]` multiplies `x[i + 1]` in row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
        }
        for band in [&lower, &upper] {
            if band.len() != n - 1 {
                return Err(Error::LengthMismatch {
                    expected: n - 1,
                    got: band.len(),
                });
            }
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas algorithm. No pivoting, so the matrix should be diagonally dominant.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];

        let mut denom = self.diag[0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem("zero pivot in row 0".into()));
        }
        if n > 1 {
            c_prime[0] = self.upper[0] / denom;
        }
        d_prime[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i - 1] * c_prime[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::SingularSystem(format!("zero pivot in row {i}")));
            }
            if i + 1 < n {
                c_prime[i] = self.upper[i] / denom;
            }
            d_prime[i] = (rhs[i] - self.lower[i - 1] * d_prime[i - 1]) / denom;
        }

        let mut x = d_prime;
        for i in (0..n - 1).rev() {
            x[i] -= c_prime[i] * x[i + 1];
        }
        Ok(x)
    }
}

/// Solve a dense system with LU and partial pivoting.
pub fn lu_solve(a: &DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != rhs.len() || !a.is_square() {
        return Err(Error::LengthMismatch {
            expected: a.nrows(),
            got: rhs.len(),
        });
    }
    let b = DVector::from_column_slice(rhs);
    a.clone()
        .lu()
        .solve(&b)
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| Error::SingularSystem("LU factorisation found a zero pivot".into()))
}

/// Max-norm of `a - b`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Relative max-norm difference, guarded against a zero reference.
pub fn rel_max_diff(a: &[f64], reference: &[f64]) -> f64 {
    max_abs_diff(a, reference) / max_abs(reference).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_lu() {
        let t = Tridiagonal::new(
            vec![-1.0, -2.0, 0.5],
            vec![4.0, 5.0, 6.0, 3.0],
            vec![1.0, -1.0, 2.0],
        )
        .unwrap();
        let mut dense = DMatrix::zeros(4, 4);
        for i in 0..4 {
            dense[(i, i)] = t.diag[i];
            if i > 0 {
                dense[(i, i - 1)] = t.lower[i - 1];
            }
            if i < 3 {
                dense[(i, i + 1)] = t.upper[i];
            }
        }
        let rhs = [1.0, -2.0, 3.0, 0.25];
        let a = t.solve(&rhs).unwrap();
        let b = lu_solve(&dense, &rhs).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-14);
        assert!(max_abs_diff(&t.matvec(&a), &rhs) < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let t = Tridiagonal::new(vec![], vec![2.0], vec![]).unwrap();
        assert_eq!(t.solve(&[3.0]).unwrap(), vec![1.5]);
    }

    #[test]
    fn zero_pivot_is_singular() {
        let t = Tridiagonal::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(t.solve(&[1.0, 1.0]), Err(Error::SingularSystem(_))));
        let dense = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            lu_solve(&dense, &[1.0, 1.0]),
            Err(Error::SingularSystem(_))
        ));
    }

    #[test]
    fn band_length_checked() {
        assert!(Tridiagonal::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0]).is_err());
    }
}
