//! Dense matrix machinery for desk-scale graphs (n up to a few hundred).
//!
//! Everything is row-major `Vec<f64>` storage with in-place factorizations.
//! Inversion is always factorize-and-solve; the only place a full inverse is
//! materialized is where a caller reuses it across many evaluations.

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat {
    n: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(n: usize) -> Self {
        SquareMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// self * other (naive triple loop; n is small).
    pub fn matmul(&self, other: &SquareMat) -> SquareMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = SquareMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SquareMat) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.max_asymmetry() <= rel_tol * self.max_abs().max(1.0)
    }

    /// Largest |diagonal| entry, the scale reference for pivot tolerances.
    pub fn max_abs_diag(&self) -> f64 {
        (0..self.n).fold(0.0_f64, |m, i| m.max(self[(i, i)].abs()))
    }

    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for SquareMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative pivot floor: a pivot counts as positive (or nonsingular) only if it
/// exceeds `PIVOT_REL_TOL` times the largest diagonal magnitude of the input.
pub const PIVOT_REL_TOL: f64 = 1e-12;

/// Cholesky factorization A = L L^T of a symmetric matrix, with a
/// scale-relative positivity guard on the pivots.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>, // lower triangle, row-major full storage
}

impl Cholesky {
    /// Factor a symmetric matrix. Returns `None` when some pivot falls below
    /// the scale-relative floor, i.e. the matrix is not (numerically)
    /// positive definite. Symmetry is the caller's precondition.
    pub fn new(a: &SquareMat) -> Option<Self> {
        let n = a.n;
        let floor = PIVOT_REL_TOL * a.max_abs_diag().max(f64::MIN_POSITIVE);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > floor) {
                return None;
            }
            let lj = d.sqrt();
            l[j * n + j] = lj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / lj;
            }
        }
        Some(Cholesky { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        // forward: L y = b
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// <b, A^{-1} b> without forming the inverse.
    pub fn quad_form_inv(&self, b: &[f64]) -> f64 {
        dot(b, &self.solve(b))
    }

    pub fn det(&self) -> f64 {
        let mut d = 1.0;
        for i in 0..self.n {
            d *= self.l[i * self.n + i] * self.l[i * self.n + i];
        }
        d
    }

    pub fn ln_det(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.l[i * self.n + i].ln();
        }
        2.0 * s
    }
}

/// True iff `m` is symmetric positive definite under the scale-relative pivot
/// tolerance. Errors on a non-symmetric input.
pub fn is_positive_definite(m: &SquareMat) -> Result<bool> {
    if !m.is_symmetric(1e-10) {
        return Err(Error::NonSymmetric {
            max_asym: m.max_asymmetry(),
        });
    }
    Ok(Cholesky::new(m).is_some())
}

/// LU factorization with partial pivoting. The buffers are reusable so the
/// SDE inner loops can refactor every step without allocating.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn with_capacity(n: usize) -> Self {
        Lu {
            n,
            lu: vec![0.0; n * n],
            piv: vec![0; n],
            sign: 1.0,
        }
    }

    pub fn new(a: &SquareMat) -> Result<Self> {
        let mut lu = Self::with_capacity(a.n);
        lu.factor(a)?;
        Ok(lu)
    }

    /// Refactor in place. Fails when a pivot falls below the scale-relative
    /// floor of the input.
    pub fn factor(&mut self, a: &SquareMat) -> Result<()> {
        let n = a.n;
        assert_eq!(n, self.n);
        self.lu.copy_from_slice(&a.data);
        self.sign = 1.0;
        let floor = PIVOT_REL_TOL * a.max_abs().max(f64::MIN_POSITIVE);
        let lu = &mut self.lu;
        for col in 0..n {
            // pivot search
            let mut p = col;
            let mut best = lu[col * n + col].abs();
            for r in (col + 1)..n {
                let v = lu[r * n + col].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > floor) {
                return Err(Error::SingularMatrix {
                    pivot: best,
                    index: col,
                });
            }
            self.piv[col] = p;
            if p != col {
                for j in 0..n {
                    lu.swap(col * n + j, p * n + j);
                }
                self.sign = -self.sign;
            }
            let d = lu[col * n + col];
            for r in (col + 1)..n {
                let f = lu[r * n + col] / d;
                lu[r * n + col] = f;
                for j in (col + 1)..n {
                    lu[r * n + j] -= f * lu[col * n + j];
                }
            }
        }
        Ok(())
    }

    /// Solve A x = b in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        for i in 0..n {
            x.swap(i, self.piv[i]);
        }
        for i in 1..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[i * n + k] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lu[i * n + k] * x[k];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }

    /// A^{-1} B, column by column.
    pub fn solve_mat(&self, b: &SquareMat) -> SquareMat {
        let n = self.n;
        assert_eq!(b.n, n);
        let mut out = SquareMat::zeros(n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> SquareMat {
        SquareMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn positive_definite_basic_cases() {
        let d = mat(&[&[2.0, 0.0], &[0.0, 4.0]]);
        assert!(is_positive_definite(&d).unwrap());

        let m = mat(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        assert!(is_positive_definite(&m).unwrap());

        // eigenvalues 3 and -1
        let bad = mat(&[&[1.0, -2.0], &[-2.0, 1.0]]);
        assert!(!is_positive_definite(&bad).unwrap());
    }

    #[test]
    fn positive_definite_rejects_singular_boundary() {
        // 2 beta_i on the singular boundary: H = [[1,-1],[-1,1]] has eigenvalue 0.
        let sing = mat(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert!(!is_positive_definite(&sing).unwrap());
    }

    #[test]
    fn positive_definite_errors_on_asymmetry() {
        let m = mat(&[&[1.0, 0.5], &[0.2, 1.0]]);
        assert!(matches!(
            is_positive_definite(&m),
            Err(Error::NonSymmetric { .. })
        ));
    }

    #[test]
    fn cholesky_solve_and_det() {
        let m = mat(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let ch = Cholesky::new(&m).unwrap();
        assert!((ch.det() - 11.0).abs() < 1e-12);
        let x = ch.solve(&[1.0, 2.0]);
        // solve [[4,1],[1,3]] x = (1,2) -> x = (1/11, 7/11)
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
        assert!((ch.ln_det() - 11.0_f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn lu_solve_nonsymmetric() {
        let k = mat(&[&[1.0, -0.1], &[-0.2, 1.0]]);
        let lu = Lu::new(&k).unwrap();
        let x = lu.solve(&[1.0, 2.0]);
        assert!((x[0] - 1.2 / 0.98).abs() < 1e-14);
        assert!((x[1] - 2.2 / 0.98).abs() < 1e-14);
        assert!((lu.det() - 0.98).abs() < 1e-14);
    }

    #[test]
    fn lu_det_matches_cholesky_pivot_product() {
        // On symmetric positive definite inputs the two factorization routes
        // must agree to relative 1e-12.
        let m = mat(&[
            &[3.0, -1.0, 0.2],
            &[-1.0, 2.5, -0.7],
            &[0.2, -0.7, 1.9],
        ]);
        let lu = Lu::new(&m).unwrap().det();
        let ch = Cholesky::new(&m).unwrap().det();
        assert!((lu - ch).abs() <= 1e-12 * ch.abs());
    }

    #[test]
    fn lu_rejects_singular() {
        let m = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(Lu::new(&m), Err(Error::SingularMatrix { .. })));
    }
}
