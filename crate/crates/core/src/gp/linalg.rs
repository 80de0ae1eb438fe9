//! Dense symmetric positive-definite helpers on row-major `f64` buffers.

/// Lower Cholesky factor `L` with `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the symmetric matrix `a` (only the lower triangle is read),
    /// with `shift` added to the diagonal. `None` if not positive definite.
    pub fn factor(a: &[f64], n: usize, shift: f64) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let (done, rest) = l.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for j in 0..i {
                let row_j = &done[j * n..j * n + j];
                let dot: f64 = row_i[..j].iter().zip(row_j).map(|(a, b)| a * b).sum();
                row_i[j] = (a[i * n + j] - dot) / done[j * n + j];
            }
            let sq: f64 = row_i[..i].iter().map(|v| v * v).sum();
            let d = a[i * n + i] + shift - sq;
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            row_i[i] = d.sqrt();
        }
        Some(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let dot: f64 = row.iter().zip(&b[..i]).map(|(a, b)| a * b).sum();
            b[i] = (b[i] - dot) / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let bi = b[i] / self.l[i * n + i];
            b[i] = bi;
            let row = &self.l[i * n..i * n + i];
            for (bk, lik) in b[..i].iter_mut().zip(row) {
                *bk -= lik * bi;
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

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.at(i, i).ln()).sum::<f64>()
    }

    /// Full inverse `A⁻¹`, row-major.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        // M = L⁻¹, lower triangular.
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            m[j * n + j] = 1.0 / self.at(j, j);
            for i in j + 1..n {
                let row = &self.l[i * n + j..i * n + i];
                let mut s = 0.0;
                for (k, lik) in row.iter().enumerate() {
                    s += lik * m[(j + k) * n + j];
                }
                m[i * n + j] = -s / self.at(i, i);
            }
        }
        // A⁻¹ = Mᵀ M; entry (i, j) sums over rows k >= max(i, j).
        let mut inv = vec![0.0; n * n];
        for k in 0..n {
            let row = &m[k * n..k * n + k + 1];
            for i in 0..=k {
                let mki = row[i];
                if mki == 0.0 {
                    continue;
                }
                let out = &mut inv[i * n..i * n + i + 1];
                for (o, mkj) in out.iter_mut().zip(&row[..=i]) {
                    *o += mki * mkj;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                inv[j * n + i] = inv[i * n + j];
            }
        }
        inv
    }
}
