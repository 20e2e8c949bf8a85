use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Symmetric matrix in skyline (envelope) storage.
///
/// Row `i` keeps the lower-triangle entries from its first nonzero column up
/// to the diagonal. Cholesky and LDLᵀ fill in only inside that envelope, so a
/// lexicographically ordered box in ℤ^d factors in O(n · bandwidth²).
#[derive(Debug, Clone)]
pub struct ProfileMatrix {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl ProfileMatrix {
    /// Builds from `(i, j, value)` triples. Off-diagonal pairs may be given in
    /// either orientation and are stored once; repeated entries accumulate.
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in entries {
            if i >= n || j >= n {
                return Err(Error::Dimension(format!("entry ({i},{j}) outside {n}x{n}")));
            }
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            first[r] = first[r].min(c);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut len = 0;
        for i in 0..n {
            start.push(len);
            len += i - first[i] + 1;
        }
        start.push(len);
        let mut m = Self {
            n,
            first,
            start,
            data: vec![0.0; len],
        };
        for &(i, j, v) in entries {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            let k = m.index(r, c);
            m.data[k] += v;
        }
        Ok(m)
    }

    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("profile matrix must be square".into()));
        }
        let n = a.rows();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = a.get(i, j);
                if v != 0.0 || i == j {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_entries(n, &entries)
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && j >= self.first[i]);
        self.start[i] + (j - self.first[i])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if c < self.first[r] {
            0.0
        } else {
            self.data[self.index(r, c)]
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in self.first[i]..=i {
                let v = self.data[self.index(i, j)];
                d.set(i, j, v);
                d.set(j, i, v);
            }
        }
        d
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[self.index(i, i)]).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let f = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let mut acc = 0.0;
            for (k, a) in row.iter().enumerate() {
                let j = f + k;
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Envelope Cholesky factorization.
    pub fn cholesky(&self) -> Result<ProfileCholesky> {
        let mut l = self.data.clone();
        for i in 0..self.n {
            let fi = self.first[i];
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let mut s = l[self.index(i, j)];
                let ri = self.start[i] + (k0 - fi);
                let rj = self.start[j] + (k0 - fj);
                for t in 0..(j - k0) {
                    s -= l[ri + t] * l[rj + t];
                }
                let ljj = l[self.index(j, j)];
                let idx = self.index(i, j);
                l[idx] = s / ljj;
            }
            let mut d = l[self.index(i, i)];
            let row = self.start[i];
            for t in 0..(i - fi) {
                d -= l[row + t] * l[row + t];
            }
            let aii = self.data[self.index(i, i)];
            if d <= 64.0 * f64::EPSILON * aii.abs() || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: i, value: d });
            }
            let idx = self.index(i, i);
            l[idx] = d.sqrt();
        }
        Ok(ProfileCholesky {
            n: self.n,
            first: self.first.clone(),
            start: self.start.clone(),
            lower: l,
        })
    }

    /// Number of eigenvalues strictly below `shift` (Sylvester inertia of the
    /// LDLᵀ factorization of `A - shift·I`). Exact zero pivots are nudged to a
    /// tiny positive value, which counts them as non-negative.
    pub fn count_below(&self, shift: f64) -> usize {
        let n = self.n;
        let mut l = self.data.clone();
        let mut d = vec![0.0; n];
        let mut w = Vec::new();
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + shift.abs());
        let mut negatives = 0;
        for i in 0..n {
            let fi = self.first[i];
            w.clear();
            // w_j = L_ij * D_j for j in fi..i
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let mut s = l[self.start[i] + (j - fi)];
                let ri = k0 - fi;
                let rj = self.start[j] + (k0 - fj);
                for t in 0..(j - k0) {
                    s -= w[ri + t] * l[rj + t];
                }
                w.push(s);
            }
            let mut di = l[self.start[i] + (i - fi)] - shift;
            for (t, j) in (fi..i).enumerate() {
                let lij = w[t] / d[j];
                l[self.start[i] + t] = lij;
                di -= lij * w[t];
            }
            if di == 0.0 {
                di = tiny;
            }
            if di < 0.0 {
                negatives += 1;
            }
            d[i] = di;
        }
        negatives
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.n];
        for i in 0..self.n {
            for j in self.first[i]..i {
                let a = self.data[self.index(i, j)].abs();
                radius[i] += a;
                radius[j] += a;
            }
        }
        let diag = self.diagonal();
        let lo = diag
            .iter()
            .zip(&radius)
            .map(|(d, r)| d - r)
            .fold(f64::INFINITY, f64::min);
        let hi = diag
            .iter()
            .zip(&radius)
            .map(|(d, r)| d + r)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Smallest eigenvalue by bisection on inertia counts; the bracket is
    /// shrunk to 1e-13 relative (or absolute, near zero) of the spectral scale.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        let (g_lo, g_hi) = self.gershgorin();
        let scale = g_lo.abs().max(g_hi.abs()).max(f64::MIN_POSITIVE);
        let mut lo = g_lo - 1e-12 * scale;
        let mut hi = g_hi + 1e-12 * scale;
        for _ in 0..200 {
            let width = hi - lo;
            let tol = 1e-13 * lo.abs().max(hi.abs()).max(1e-3 * scale);
            if width <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone)]
pub struct ProfileCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
}

impl ProfileCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n, "rhs dimension");
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let mut s = x[i];
            for (t, a) in row[..i - fi].iter().enumerate() {
                s -= a * x[fi + t];
            }
            x[i] = s / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (t, a) in row[..i - fi].iter().enumerate() {
                x[fi + t] -= a * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
