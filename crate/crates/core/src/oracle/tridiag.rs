use crate::error::{Error, Result};

/// Thomas-algorithm factorisation of a fixed tridiagonal matrix.
///
/// `lower[0]` and `upper[n-1]` are ignored. Factoring once lets every time
/// step reuse the eliminated coefficients; the scheme's matrix is strictly
/// diagonally dominant, so no pivoting is needed.
#[derive(Debug, Clone)]
pub struct Thomas {
    lower: Vec<f64>,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Thomas {
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() != n || upper.len() != n {
            return Err(Error::Grid(
                "tridiagonal bands must share a non-zero length".into(),
            ));
        }
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let a = if i == 0 { 0.0 } else { lower[i] };
            let denom = diag[i] - a * prev_c;
            if denom.abs() < f64::EPSILON * diag[i].abs().max(1.0) {
                return Err(Error::Grid(format!("zero pivot in tridiagonal row {i}")));
            }
            inv_denom[i] = 1.0 / denom;
            c_prime[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
            prev_c = c_prime[i];
        }
        Ok(Thomas {
            lower: lower.to_vec(),
            c_prime,
            inv_denom,
        })
    }

    pub fn len(&self) -> usize {
        self.c_prime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_prime.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        let mut prev = 0.0;
        for i in 0..n {
            let a = if i == 0 { 0.0 } else { self.lower[i] };
            rhs[i] = (rhs[i] - a * prev) * self.inv_denom[i];
            prev = rhs[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}
