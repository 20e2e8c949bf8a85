use serde::{Deserialize, Serialize};

use super::profile::ProfileMatrix;
use crate::error::{Error, Result};

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |a_ij - a_ji|, or an error when the matrix is not square.
    pub fn asymmetry(&self) -> Result<(usize, usize, f64)> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let mut worst = (0, 0, 0.0);
        for i in 0..self.rows {
            for j in 0..i {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        Ok(worst)
    }

    /// Checks symmetry relative to the largest entry.
    pub fn check_symmetric(&self, rel_tol: f64) -> Result<()> {
        let (row, col, diff) = self.asymmetry()?;
        if diff > rel_tol * self.max_abs().max(1.0) {
            return Err(Error::NotSymmetric { row, col, diff });
        }
        Ok(())
    }
}

/// Dense Cholesky factor `A = L Lᵀ`, with `L` stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Strict factorization: any pivot that is not clearly positive is an error.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        Self::factor_impl(a, None)
    }

    /// Factorization of a positive semidefinite matrix. Pivots below
    /// `tol * max_diag` are treated as exact zeros and their column is dropped,
    /// so `L Lᵀ` reproduces `A` on its range. Negative pivots beyond the
    /// tolerance are still an error.
    pub fn factor_semidefinite(a: &DenseMatrix, tol: f64) -> Result<Self> {
        Self::factor_impl(a, Some(tol))
    }

    fn factor_impl(a: &DenseMatrix, semidefinite: Option<f64>) -> Result<Self> {
        a.check_symmetric(1e-12)?;
        let n = a.rows();
        let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a.get(i, i).abs()));
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            let floor = match semidefinite {
                Some(tol) => tol * max_diag.max(f64::MIN_POSITIVE),
                None => 64.0 * f64::EPSILON * a.get(j, j).abs(),
            };
            if d <= floor || !d.is_finite() {
                match semidefinite {
                    Some(_) if d > -floor && d.is_finite() => {
                        // zero pivot: column stays zero
                        continue;
                    }
                    _ => return Err(Error::NotPositiveDefinite { pivot: j, value: d }),
                }
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.n,
            cols: self.n,
            data: self.lower.clone(),
        }
    }

    /// `y = L z`, used to colour white noise.
    pub fn lower_mul(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i + 1];
            out[i] = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n, "rhs dimension");
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lower[i * n + k] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
    }
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "rhs has {} entries for a {}x{} matrix",
            b.len(),
            a.rows(),
            a.cols()
        )));
    }
    let chol = Cholesky::factor(a)?;
    let mut x = chol.solve(b);
    // one step of iterative refinement
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    chol.solve_in_place(&mut r);
    for (xi, ri) in x.iter_mut().zip(&r) {
        *xi += ri;
    }
    Ok(x)
}

pub fn inverse_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    let chol = Cholesky::factor(a)?;
    let n = a.rows();
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        chol.solve_in_place(&mut e);
        for i in 0..n {
            inv.set(i, j, e[i]);
        }
    }
    // symmetrize the rounding
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (inv.get(i, j) + inv.get(j, i));
            inv.set(i, j, m);
            inv.set(j, i, m);
        }
    }
    Ok(inv)
}

/// Smallest eigenvalue of a symmetric matrix, by inertia bisection.
pub fn min_eigen_spd(a: &DenseMatrix) -> Result<f64> {
    a.check_symmetric(1e-12)?;
    Ok(ProfileMatrix::from_dense(a)?.min_eigenvalue())
}

pub fn rayleigh(a: &DenseMatrix, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let num: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().map(|v| v * v).sum();
    num / den
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Eigenvalues ascend; column `k` of the returned matrix is the
/// eigenvector for eigenvalue `k`.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    a.check_symmetric(1e-12)?;
    let n = a.rows();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += m.get(i, j).powi(2);
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, col, v.get(k, i));
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_dirichlet(n: usize) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
                a.set(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn jacobi_eigen_reconstructs() {
        let a = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, 3.0, 0.0, 1.0],
            vec![-2.0, 0.0, 5.0, -1.0],
            vec![0.5, 1.0, -1.0, 2.0],
        ])
        .unwrap();
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..4 {
            let x: Vec<f64> = (0..4).map(|i| vecs.get(i, k)).collect();
            let ax = a.mul_vec(&x);
            for i in 0..4 {
                assert!((ax[i] - vals[k] * x[i]).abs() < 1e-12);
            }
        }
        let p = path_dirichlet(3);
        let (vals, _) = symmetric_eigen(&p).unwrap();
        assert!((vals[0] - (2.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn identity_solve() {
        let x = solve_spd(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = DenseMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let x = solve_spd(&a, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let singular = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(solve_spd(&singular, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(min_eigen_spd(&a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn min_eigen_examples() {
        assert!((min_eigen_spd(&DenseMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let a = DenseMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert!((min_eigen_spd(&a).unwrap() - 1.0).abs() < 1e-12);
        let expected = 2.0 - 2.0f64.sqrt();
        let got = min_eigen_spd(&path_dirichlet(3)).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-9, "{got}");
    }

    #[test]
    fn semidefinite_factor_reproduces_rank_deficient() {
        // Laplacian of K3: rank 2
        let a = DenseMatrix::from_rows(&[
            vec![2.0, -1.0, -1.0],
            vec![-1.0, 2.0, -1.0],
            vec![-1.0, -1.0, 2.0],
        ])
        .unwrap();
        let chol = Cholesky::factor_semidefinite(&a, 1e-12).unwrap();
        let l = chol.lower();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l.get(i, k) * l.get(j, k)).sum();
                assert!((v - a.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
