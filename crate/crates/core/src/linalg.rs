//! Small dense helpers over nalgebra for Hermitian systems.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CMatrix = DMatrix<Complex64>;

/// Condition numbers above this are treated as singular when no
/// regularisation is applied.
pub(crate) const SINGULAR_CONDITION: f64 = 1e13;

/// 2-norm condition estimate of a Hermitian matrix from its eigenvalues.
pub(crate) fn hermitian_condition(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let eig = SymmetricEigen::new(a.clone());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in eig.eigenvalues.iter() {
        lo = lo.min(v.abs());
        hi = hi.max(v.abs());
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Cholesky factor of a Hermitian positive-definite matrix.
pub(crate) struct HermitianFactor {
    chol: Cholesky<Complex64, Dyn>,
}

impl HermitianFactor {
    /// Factorises `a`. With `check_condition` set, matrices whose condition
    /// estimate exceeds [`SINGULAR_CONDITION`] are rejected even if the
    /// factorisation itself succeeds.
    pub(crate) fn new(a: CMatrix, what: &'static str, check_condition: bool) -> Result<Self> {
        if check_condition {
            let condition = hermitian_condition(&a);
            if !(condition < SINGULAR_CONDITION) {
                return Err(Error::IllConditioned { what, condition });
            }
        }
        match Cholesky::new(a.clone()) {
            Some(chol) => Ok(Self { chol }),
            None => Err(Error::IllConditioned {
                what,
                condition: hermitian_condition(&a),
            }),
        }
    }

    pub(crate) fn solve(&self, b: &CMatrix) -> CMatrix {
        self.chol.solve(b)
    }
}

pub(crate) fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}
