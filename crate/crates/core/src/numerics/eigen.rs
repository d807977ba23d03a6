//! Dense real-symmetric eigensolver (cyclic Jacobi rotations).

use crate::error::{Error, Result};

/// Largest order accepted by [`eigh`].
pub const MAX_ORDER: usize = 1000;

/// A real symmetric matrix stored densely in row-major order.
///
/// Construction guarantees `get(i, j) == get(j, i)` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order", "matrix order must be >= 1"));
        }
        Ok(Self { order, data: vec![0.0; order * order] })
    }

    pub fn identity(order: usize) -> Result<Self> {
        let mut m = Self::zeros(order)?;
        for i in 0..order {
            m.data[i * order + i] = 1.0;
        }
        Ok(m)
    }

    /// Builds the matrix from its upper triangle; `f(i, j)` is called for `i <= j`.
    pub fn from_upper(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(order)?;
        for i in 0..order {
            for j in i..order {
                m.set(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    /// Builds the matrix from full rows, rejecting anything that is not
    /// square and exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("matrix", format!("row {i} has length {}, expected {n}", row.len())));
            }
        }
        for i in 0..n {
            for j in i..n {
                if rows[i][j] != rows[j][i] && !(rows[i][j].is_nan() && rows[j][i].is_nan()) {
                    return Err(Error::invalid("matrix", format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
                m.set(i, j, rows[i][j]);
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.order + j] = value;
        self.data[j * self.order + i] = value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Returns `P A Pᵀ` for the permutation sending basis index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order;
        if perm.len() != n {
            return Err(Error::invalid("permutation", "length must equal matrix order"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::invalid("permutation", "not a permutation"));
            }
            seen[p] = true;
        }
        let mut out = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                out.set(perm[i], perm[j], self.get(i, j));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Row-major `n × n`; column `j` is the eigenvector of `eigenvalues[j]`.
    vectors: Vec<f64>,
    order: usize,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn component(&self, i: usize, j: usize) -> f64 {
        self.vectors[i * self.order + j]
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.order).map(|i| self.component(i, j)).collect()
    }

    /// Largest `‖A v − λ v‖` over all pairs.
    pub fn max_residual(&self, m: &SymMatrix) -> f64 {
        (0..self.order)
            .map(|j| {
                let v = self.vector(j);
                let av = m.mul_vec(&v);
                av.iter()
                    .zip(&v)
                    .map(|(a, x)| (a - self.eigenvalues[j] * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `VᵀV` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.order;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let dot: f64 = (0..n).map(|i| self.component(i, a) * self.component(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiOptions {
    pub max_sweeps: usize,
    /// Stop once the off-diagonal Frobenius norm is below `tolerance · ‖A‖_F`.
    pub tolerance: f64,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self { max_sweeps: 100, tolerance: 1e-15 }
    }
}

pub fn eigh(m: &SymMatrix) -> Result<EigenDecomposition> {
    eigh_with(m, JacobiOptions::default())
}

pub fn eigh_with(m: &SymMatrix, opts: JacobiOptions) -> Result<EigenDecomposition> {
    let n = m.order;
    if n > MAX_ORDER {
        return Err(Error::invalid("order", format!("matrix order {n} exceeds {MAX_ORDER}")));
    }
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }

    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = m.frobenius_norm();
    let threshold = opts.tolerance * norm;

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold || off == 0.0 {
            break;
        }
        if sweeps >= opts.max_sweeps {
            return Err(Error::EigenNotConverged { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // negligible compared to both diagonal entries
                if sweeps > 4 && app.abs() + 100.0 * apq.abs() == app.abs() && aqq.abs() + 100.0 * apq.abs() == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let eigenvalues = idx.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in idx.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(EigenDecomposition { eigenvalues, vectors, order: n, sweeps })
}
