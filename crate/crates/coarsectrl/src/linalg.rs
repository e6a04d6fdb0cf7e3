//! Dense symmetric eigendecomposition and small matrix helpers.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Tolerance used when checking that an input matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigendecomposition of a real symmetric matrix.
///
/// `values` are sorted ascending. `vectors.row(j)` is the unit eigenvector
/// belonging to `values[j]` (row layout avoids a transpose of the LAPACK
/// column-major output).
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

impl SymEigen {
    /// Decompose a symmetric matrix with LAPACK `dsyevd`.
    pub fn new(z: &Array2<f64>) -> Result<Self> {
        check_symmetric(z)?;
        let n = z.nrows();
        if n == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        let mut a: Vec<f64> = z.iter().copied().collect();
        let mut values = vec![0.0; n];
        let mut info = 0i32;
        let mut work = vec![0.0f64; 1];
        let mut iwork = vec![0i32; 1];
        unsafe {
            lapack::dsyevd(
                b'V', b'L', n as i32, &mut a, n as i32, &mut values, &mut work, -1, &mut iwork,
                -1, &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Lapack(info));
        }
        let lwork = work[0] as usize;
        let liwork = iwork[0] as usize;
        work = vec![0.0; lwork];
        iwork = vec![0; liwork];
        unsafe {
            lapack::dsyevd(
                b'V',
                b'L',
                n as i32,
                &mut a,
                n as i32,
                &mut values,
                &mut work,
                lwork as i32,
                &mut iwork,
                liwork as i32,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Lapack(info));
        }
        // dsyevd writes eigenvector j into column j of the column-major buffer,
        // which is row j when the same buffer is viewed row-major.
        let vectors = Array2::from_shape_vec((n, n), a)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(SymEigen {
            values: Array1::from(values),
            vectors,
        })
    }

    /// Spectral radius: max |eigenvalue|.
    pub fn spectral_radius(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }
}

/// Spectral radius of a symmetric matrix.
pub fn spectral_radius(z: &Array2<f64>) -> Result<f64> {
    Ok(SymEigen::new(z)?.spectral_radius())
}

pub fn check_symmetric(z: &Array2<f64>) -> Result<()> {
    if z.nrows() != z.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            z.nrows(),
            z.ncols()
        )));
    }
    let mut max_dev = 0.0f64;
    for i in 0..z.nrows() {
        for j in (i + 1)..z.ncols() {
            max_dev = max_dev.max((z[[i, j]] - z[[j, i]]).abs());
        }
    }
    if max_dev > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(max_dev));
    }
    Ok(())
}

/// Max-norm: maximum absolute entry.
pub fn max_norm(z: &Array2<f64>) -> f64 {
    z.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// Min-norm in the sense used by the diagnostics: minimum absolute entry.
pub fn min_abs_entry(z: &Array2<f64>) -> f64 {
    z.iter().fold(f64::INFINITY, |acc, &v| acc.min(v.abs()))
}

/// Entrywise l1 norm of a matrix.
pub fn l11_norm(z: &Array2<f64>) -> f64 {
    z.iter().map(|v| v.abs()).sum()
}

/// l1 norm of the difference of two vectors.
pub fn l1_dist(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum()
}

/// Inverse of a small square matrix by Gauss-Jordan with partial pivoting.
/// Returns the inverse together with an estimate of the condition number
/// (max |pivot| / min |pivot|).
pub fn invert_small(z: &Array2<f64>) -> Result<(Array2<f64>, f64)> {
    let n = z.nrows();
    if n != z.ncols() {
        return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
    }
    let mut a = z.clone();
    let mut inv = Array2::<f64>::eye(n);
    let mut max_piv = 0.0f64;
    let mut min_piv = f64::INFINITY;
    for col in 0..n {
        let mut piv = col;
        for row in (col + 1)..n {
            if a[[row, col]].abs() > a[[piv, col]].abs() {
                piv = row;
            }
        }
        let pval = a[[piv, col]];
        if pval.abs() < f64::EPSILON {
            return Err(Error::Resolvent(format!("singular matrix at pivot {col}")));
        }
        max_piv = max_piv.max(pval.abs());
        min_piv = min_piv.min(pval.abs());
        if piv != col {
            for j in 0..n {
                a.swap([piv, j], [col, j]);
                inv.swap([piv, j], [col, j]);
            }
        }
        let inv_p = 1.0 / a[[col, col]];
        for j in 0..n {
            a[[col, j]] *= inv_p;
            inv[[col, j]] *= inv_p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[[row, col]];
            if f != 0.0 {
                for j in 0..n {
                    a[[row, j]] -= f * a[[col, j]];
                    inv[[row, j]] -= f * inv[[col, j]];
                }
            }
        }
    }
    Ok((inv, max_piv / min_piv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn eigen_of_two_by_two_exchange() {
        let z = array![[0.0, 1.0], [1.0, 0.0]];
        let e = SymEigen::new(&z).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.spectral_radius(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let z = array![
            [2.0, 1.0, 0.5],
            [1.0, 3.0, -0.25],
            [0.5, -0.25, 1.5]
        ];
        let e = SymEigen::new(&z).unwrap();
        let mut recon = Array2::<f64>::zeros((3, 3));
        for j in 0..3 {
            let v = e.vectors.row(j);
            for r in 0..3 {
                for c in 0..3 {
                    recon[[r, c]] += e.values[j] * v[r] * v[c];
                }
            }
        }
        for (a, b) in z.iter().zip(recon.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_non_symmetric() {
        let z = array![[0.0, 1.0], [0.5, 0.0]];
        assert!(matches!(SymEigen::new(&z), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn small_inverse_round_trip() {
        let z = array![[4.0, 1.0], [2.0, 3.0]];
        let (inv, cond) = invert_small(&z).unwrap();
        let prod = z.dot(&inv);
        assert_abs_diff_eq!(prod[[0, 0]], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(prod[[0, 1]], 0.0, epsilon = 1e-12);
        assert!(cond.is_finite());
    }
}
