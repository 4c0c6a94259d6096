//! Small dense linear-algebra helpers on top of `nalgebra`.
//!
//! Rank and null-space decisions use singular values with a threshold
//! relative to the largest singular value, so they do not depend on how a
//! caller scales a basis.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{PhsError, Result};

/// Relative singular-value threshold used for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;

/// The interface matrix `P1 = [[0,-1],[-1,0]]` of the first-order operator.
pub fn p1() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, -1.0, 0.0)
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * smax).count()
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad with zero rows so the SVD returns a full set of right singular vectors.
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= rtol * smax)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the orthogonal complement of the column span of `basis`.
pub fn orthogonal_complement(basis: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    null_space(&basis.transpose(), rtol)
}

/// Spectral norm of a real matrix.
pub fn norm2(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let s = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Largest generalized eigenvalue of `s v = w q v` for symmetric `s` and
/// symmetric positive definite `q`, i.e. the smallest `w` with `s <= w q`.
pub fn max_generalized_eigenvalue(s: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<f64> {
    let chol =
        q.clone().cholesky().ok_or_else(|| PhsError::InvalidInput("weight matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| PhsError::Singular("Cholesky factor".into()))?;
    let sym = (s + s.transpose()) * 0.5;
    let c = &linv * sym * linv.transpose();
    let ev = sym_eigenvalues(&c);
    Ok(*ev.last().unwrap_or(&0.0))
}

/// Closed-form exponential of a complex 2x2 matrix.
///
/// With `t = tr(M)/2`, `D = M - tI` and `mu^2 = -det(D)`,
/// `exp(M) = e^t (cosh(mu) I + sinh(mu)/mu D)`. Both scalar functions are even
/// in `mu`, so the principal square root is harmless; a Taylor series is used
/// near `mu = 0`.
pub fn expm2(m: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let t = (m[0][0] + m[1][1]) * 0.5;
    let d = [[m[0][0] - t, m[0][1]], [m[1][0], m[1][1] - t]];
    let mu2 = -(d[0][0] * d[1][1] - d[0][1] * d[1][0]);
    let (ch, shc) = if mu2.norm() < 1e-6 {
        let a = mu2;
        (
            Complex64::new(1.0, 0.0) + a / 2.0 + a * a / 24.0 + a * a * a / 720.0,
            Complex64::new(1.0, 0.0) + a / 6.0 + a * a / 120.0 + a * a * a / 5040.0,
        )
    } else {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    };
    let et = t.exp();
    [[et * (ch + shc * d[0][0]), et * shc * d[0][1]], [et * shc * d[1][0], et * (ch + shc * d[1][1])]]
}

/// Complex 2x2 matrix product.
pub fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Complex 2x2 matrix times vector.
pub fn mulv2(a: &[[Complex64; 2]; 2], v: &[Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Embeds a real 2x2 matrix as a complex array.
pub fn c2(m: &Matrix2<f64>) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(m[(0, 0)], 0.0), Complex64::new(m[(0, 1)], 0.0)],
        [Complex64::new(m[(1, 0)], 0.0), Complex64::new(m[(1, 1)], 0.0)],
    ]
}

/// Inverse of a complex 2x2 matrix.
pub fn inv2(a: &[[Complex64; 2]; 2]) -> Option<[[Complex64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// Determinant of a small complex square matrix by partial-pivot elimination.
pub fn det_complex(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[(i, k)].norm() > a[(p, k)].norm() {
                p = i;
            }
        }
        if a[(p, k)].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        let piv = a[(k, k)];
        det *= piv;
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    det
}

/// Solves a small complex linear system by partial-pivot elimination.
pub fn solve_complex(m: &DMatrix<Complex64>, rhs: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let n = m.nrows();
    if m.ncols() != n || rhs.len() != n {
        return Err(PhsError::DimensionMismatch("complex solve".into()));
    }
    let mut a = m.clone();
    let mut b = rhs.clone();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[(i, k)].norm() > a[(p, k)].norm() {
                p = i;
            }
        }
        if a[(p, k)].norm() <= 1e-14 * scale {
            return Err(PhsError::Singular(format!(
                "pivot {} of {}x{} system is {:.3e} relative to entries {:.3e}",
                k,
                n,
                n,
                a[(p, k)].norm(),
                scale
            )));
        }
        a.swap_rows(p, k);
        b.swap_rows(p, k);
        let piv = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
    }
    let mut x = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[(k, j)] * x[j];
        }
        x[k] = s / a[(k, k)];
    }
    Ok(x)
}

/// The permutation-like matrix `Sigma = [[0, I], [I, 0]]` of size `2k`.
pub fn sigma(k: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        s[(i, k + i)] = 1.0;
        s[(k + i, i)] = 1.0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm2_matches_hyperbolic_closed_form() {
        let z = 0.7;
        let m = c2(&(p1() * z));
        let e = expm2(m);
        assert!((e[0][0].re - z.cosh()).abs() < 1e-14);
        assert!((e[0][1].re + z.sinh()).abs() < 1e-14);
    }

    #[test]
    fn expm2_nilpotent_uses_series() {
        let m = [
            [Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        ];
        let e = expm2(m);
        assert!((e[0][1].re - 2.0).abs() < 1e-15);
        assert!((e[0][0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let ns = null_space(&m, RANK_RTOL);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-12);
    }

    #[test]
    fn generalized_eigenvalue_of_scaled_identity() {
        let s = DMatrix::from_diagonal_element(2, 2, 3.0);
        let q = DMatrix::from_diagonal_element(2, 2, 2.0);
        assert!((max_generalized_eigenvalue(&s, &q).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn complex_solve_and_det() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(3.0, 0.0)],
        );
        let d = det_complex(&m);
        let expected = Complex64::new(1.0, 1.0) * 3.0 - Complex64::new(0.0, 2.0);
        assert!((d - expected).norm() < 1e-14);
        let rhs = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let x = solve_complex(&m, &rhs).unwrap();
        assert!((&m * &x - rhs).norm() < 1e-14);
    }
}
