//! Dense Cholesky factorisation with the incremental updates the GP cache needs.

/// Lower-triangular factor `L` with `L Lᵀ = A`, stored row-major in a
/// `capacity × capacity` buffer so rows can be appended without reallocating.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    cap: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn empty(capacity: usize) -> Self {
        Self {
            n: 0,
            cap: capacity.max(1),
            l: vec![0.0; capacity.max(1) * capacity.max(1)],
        }
    }

    /// Factors the symmetric matrix `a` (row-major, `n × n`, only the lower
    /// triangle is read). Returns `None` if `a` is not numerically positive definite.
    pub fn factor(a: &[f64], n: usize, capacity: usize) -> Option<Self> {
        let mut c = Self::empty(capacity.max(n));
        for i in 0..n {
            if !c.append(&a[i * n..i * n + i], a[i * n + i]) {
                return None;
            }
        }
        Some(c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.l[i * self.cap..i * self.cap + i + 1]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.cap + j]
    }

    /// Extends the factor by one row/column: `off` holds the new matrix row
    /// left of the diagonal, `diag` the diagonal entry. Returns `false` (leaving
    /// the factor unchanged) if the extended matrix is not positive definite.
    pub fn append(&mut self, off: &[f64], diag: f64) -> bool {
        let n = self.n;
        debug_assert_eq!(off.len(), n);
        if n == self.cap {
            self.grow();
        }
        let mut row = vec![0.0; n + 1];
        for j in 0..n {
            let lj = self.row(j);
            let s: f64 = off[j] - dot(&row[..j], &lj[..j]);
            row[j] = s / lj[j];
        }
        let d = diag - dot(&row[..n], &row[..n]);
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        row[n] = d.sqrt();
        let start = n * self.cap;
        self.l[start..start + n + 1].copy_from_slice(&row);
        self.n += 1;
        true
    }

    fn grow(&mut self) {
        let new_cap = self.cap * 2;
        let mut l = vec![0.0; new_cap * new_cap];
        for i in 0..self.n {
            l[i * new_cap..i * new_cap + i + 1].copy_from_slice(&self.l[i * self.cap..i * self.cap + i + 1]);
        }
        self.l = l;
        self.cap = new_cap;
    }

    /// Drops the first row and column of the factored matrix: the trailing block
    /// is updated by the rank-one term formed from the dropped column.
    #[allow(clippy::needless_range_loop)]
    pub fn remove_first(&mut self) {
        let n = self.n;
        if n == 0 {
            return;
        }
        let mut x: Vec<f64> = (1..n).map(|i| self.get(i, 0)).collect();
        let cap = self.cap;
        // shift rows/cols up-left by one
        for i in 1..n {
            for j in 1..=i {
                self.l[(i - 1) * cap + (j - 1)] = self.l[i * cap + j];
            }
        }
        let m = n - 1;
        // rank-one update of the m×m factor with x
        for k in 0..m {
            let lkk = self.l[k * cap + k];
            let r = lkk.hypot(x[k]);
            let c = r / lkk;
            let s = x[k] / lkk;
            self.l[k * cap + k] = r;
            for i in k + 1..m {
                let lik = (self.l[i * cap + k] + s * x[i]) / c;
                x[i] = c * x[i] - s * lik;
                self.l[i * cap + k] = lik;
            }
        }
        for j in 0..n {
            self.l[(n - 1) * cap + j] = 0.0;
        }
        self.n = m;
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let r = self.row(i);
            let s = b[i] - dot(&r[..i], &b[..i]);
            b[i] = s / r[i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            let xi = y[i] / self.get(i, i);
            y[i] = xi;
            let r = self.row(i);
            for j in 0..i {
                y[j] -= r[j] * xi;
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// Full inverse `A⁻¹` as a row-major `n × n` matrix.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        // M = L⁻¹ (lower), then A⁻¹ = Mᵀ M
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            m[j * n + j] = 1.0 / self.get(j, j);
            for i in j + 1..n {
                let r = self.row(i);
                let mut s = 0.0;
                for k in j..i {
                    s += r[k] * m[k * n + j];
                }
                m[i * n + j] = -s / r[i];
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i..n {
                    s += m[k * n + i] * m[k * n + j];
                }
                inv[i * n + j] = s;
                inv[j * n + i] = s;
            }
        }
        inv
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}
