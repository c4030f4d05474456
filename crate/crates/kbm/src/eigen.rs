//! Dense non-symmetric eigensolver on top of the complex Schur decomposition.
//!
//! Eigenvalues come straight from the triangular factor; right eigenvectors
//! are recovered by back-substitution on the triangular system and rotated
//! back with the unitary factor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub struct EigenDecomposition {
    /// Eigenvalues ordered by ascending real part, ties by imaginary part.
    pub values: Vec<Complex64>,
    /// Unit right eigenvectors as columns, same order as `values`.
    pub vectors: Option<DMatrix<Complex64>>,
    /// `max_i || A v_i - lambda_i v_i ||` over the returned unit pairs.
    pub residual_bound: Option<f64>,
}

/// Eigenvalues only.
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    Ok(decompose(a, false)?.values)
}

/// Full decomposition with right eigenvectors and a residual diagnostic.
pub fn decompose(a: &DMatrix<Complex64>, want_vectors: bool) -> Result<EigenDecomposition> {
    let n = a.nrows();
    if n == 0 || n != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition needs a square matrix with N >= 1, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 1 {
        return Ok(EigenDecomposition {
            values: vec![a[(0, 0)]],
            vectors: want_vectors.then(|| DMatrix::identity(1, 1)),
            residual_bound: want_vectors.then_some(0.0),
        });
    }
    let max_iter = 100 * n;
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, max_iter)
        .ok_or_else(|| {
            Error::NonConvergence(format!(
                "Schur iteration did not converge within {max_iter} iterations on an {n}x{n} matrix"
            ))
        })?;
    let (q, t) = schur.unpack();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (t[(i, i)], t[(j, j)]);
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let values: Vec<Complex64> = order.iter().map(|&i| t[(i, i)]).collect();

    if !want_vectors {
        return Ok(EigenDecomposition {
            values,
            vectors: None,
            residual_bound: None,
        });
    }

    let scale = a.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    let mut vectors = DMatrix::zeros(n, n);
    let mut residual: f64 = 0.0;
    for (col, &i) in order.iter().enumerate() {
        let lambda = t[(i, i)];
        // Solve (T - lambda) y = 0 with y[i] = 1, y[j] = 0 for j > i.
        let mut y = DVector::from_element(n, Complex64::new(0.0, 0.0));
        y[i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in j + 1..=i {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            // guard clustered eigenvalues against exact cancellation
            if d.norm() < f64::EPSILON * scale {
                d = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            y[j] = -s / d;
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        residual = residual.max((a * &v - v.scale(1.0) * lambda).norm());
        vectors.set_column(col, &v);
    }

    Ok(EigenDecomposition {
        values,
        vectors: Some(vectors),
        residual_bound: Some(residual),
    })
}
