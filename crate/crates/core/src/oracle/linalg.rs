//! Sparse Hermitian storage, dense eigendecomposition and a Lanczos solver
//! for the lowest eigenpairs.

use faer::{Mat, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Row-compressed square matrix; columns are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, C)>>,
}

impl SparseMatrix {
    /// Rows may hold unsorted and repeated columns; repeats are summed and
    /// exact zeros dropped.
    pub fn from_rows(mut rows: Vec<Vec<(usize, C)>>) -> Self {
        let dim = rows.len();
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, C)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|e| e.1 != ZERO);
            *row = merged;
        }
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, C)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |e| e.0).map(|p| row[p].1).unwrap_or(ZERO)
    }

    pub fn matvec(&self, x: &[C], y: &mut [C]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().fold(ZERO, |acc, &(j, v)| acc + v * x[j]);
        }
    }

    /// `<x, A x>`.
    pub fn quadratic(&self, x: &[C]) -> C {
        let mut y = vec![ZERO; self.dim];
        self.matvec(x, &mut y);
        dot(x, &y)
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|e| e.1.norm()))
            .fold(0.0, f64::max)
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Mat<C> {
        let mut m = Mat::<C>::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }
}

pub fn dot(x: &[C], y: &[C]) -> C {
    x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

pub fn norm(x: &[C]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full spectrum with eigenvectors as columns, ascending.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub energies: Vec<f64>,
    pub vectors: Mat<C>,
}

impl DenseSpectrum {
    pub fn vector(&self, k: usize) -> Vec<C> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Coefficients `U^dagger x`.
    pub fn project(&self, x: &[C]) -> Vec<C> {
        let y = self.vectors.adjoint() * faer::ColRef::from_slice(x);
        (0..y.nrows()).map(|i| y[i]).collect()
    }

    /// `U c`.
    pub fn expand(&self, c: &[C]) -> Vec<C> {
        let y = &self.vectors * faer::ColRef::from_slice(c);
        (0..y.nrows()).map(|i| y[i]).collect()
    }
}

pub fn dense_eigen(m: &Mat<C>) -> Result<DenseSpectrum> {
    let n = m.nrows();
    // Real symmetric input (real couplings) takes the faster real solver.
    let real = (0..n).all(|j| (0..n).all(|i| m[(i, j)].im == 0.0));
    if real {
        let r = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let (energies, u) = dense_eigen_real(&r)?;
        return Ok(DenseSpectrum {
            energies,
            vectors: Mat::<C>::from_fn(n, n, |i, j| C::new(u[(i, j)], 0.0)),
        });
    }
    // Sequential kernels keep the spectra bit-reproducible.
    faer::set_global_parallelism(Par::Seq);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let energies: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    Ok(DenseSpectrum {
        energies,
        vectors: evd.U().to_owned(),
    })
}

pub fn dense_eigen_real(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    faer::set_global_parallelism(Par::Seq);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    Ok(((0..m.nrows()).map(|i| s[i]).collect(), evd.U().to_owned()))
}

#[derive(Debug, Clone)]
pub struct LowestPairs {
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<C>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosSettings {
    pub max_iterations: usize,
    /// Residual `|beta_m y_m|` relative to `max(1, |theta|)`.
    pub tol: f64,
}

impl Default for LanczosSettings {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            tol: 1e-9,
        }
    }
}

/// Lowest `count` eigenpairs by Lanczos with full re-orthogonalisation.
///
/// The start vector is fixed (`v_i ~ 1/(1+i)`), so results are reproducible.
pub fn lanczos_lowest(a: &SparseMatrix, count: usize, settings: &LanczosSettings) -> Result<LowestPairs> {
    let n = a.dim();
    if n <= 64 {
        let spec = dense_eigen(&a.to_dense())?;
        let k = count.min(n);
        return Ok(LowestPairs {
            energies: spec.energies[..k].to_vec(),
            vectors: (0..k).map(|i| spec.vector(i)).collect(),
            residuals: vec![0.0; k],
            iterations: n,
        });
    }
    let mut q0: Vec<C> = (0..n).map(|i| C::new(1.0 / (1.0 + i as f64), 0.0)).collect();
    let s = norm(&q0);
    q0.iter_mut().for_each(|z| *z /= s);

    let mut basis: Vec<Vec<C>> = vec![q0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];
    let limit = settings.max_iterations.min(n);

    loop {
        let j = basis.len() - 1;
        a.matvec(&basis[j], &mut w);
        let aj = dot(&basis[j], &w).re;
        alpha.push(aj);
        for _ in 0..2 {
            for q in &basis {
                let h = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= h * qi;
                }
            }
        }
        let bj = norm(&w);
        let m = alpha.len();
        let exhausted = bj < 1e-13 * alpha.iter().fold(1.0f64, |x, y| x.max(y.abs()));
        let check = exhausted || m >= limit || (m >= count + 2 && m % 5 == 0);
        if check {
            let mut t = Mat::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let (theta, y) = dense_eigen_real(&t)?;
            let k = count.min(m);
            let residuals: Vec<f64> = (0..k).map(|i| (bj * y[(m - 1, i)]).abs()).collect();
            let converged = residuals
                .iter()
                .zip(&theta)
                .all(|(r, th)| *r <= settings.tol * th.abs().max(1.0));
            if converged || exhausted || m >= limit {
                if !converged && !exhausted {
                    return Err(Error::Eigen(format!(
                        "Lanczos not converged after {m} iterations, residuals {residuals:?}"
                    )));
                }
                let vectors = (0..k)
                    .map(|i| {
                        let mut v = vec![ZERO; n];
                        for (l, q) in basis.iter().enumerate() {
                            let c = y[(l, i)];
                            for (vi, qi) in v.iter_mut().zip(q) {
                                *vi += qi * c;
                            }
                        }
                        let s = norm(&v);
                        v.iter_mut().for_each(|z| *z /= s);
                        v
                    })
                    .collect();
                return Ok(LowestPairs {
                    energies: theta[..k].to_vec(),
                    vectors,
                    residuals,
                    iterations: m,
                });
            }
        }
        beta.push(bj);
        let next: Vec<C> = w.iter().map(|z| z / bj).collect();
        basis.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> SparseMatrix {
        // Tight-binding chain with an on-site ramp.
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, C::new(0.01 * i as f64, 0.0))];
                if i > 0 {
                    r.push((i - 1, C::new(0.0, -0.5)));
                }
                if i + 1 < n {
                    r.push((i + 1, C::new(0.0, 0.5)));
                }
                r
            })
            .collect();
        SparseMatrix::from_rows(rows)
    }

    #[test]
    fn lanczos_matches_dense() {
        let a = chain(300);
        assert!(a.hermitian_defect() == 0.0);
        let dense = dense_eigen(&a.to_dense()).unwrap();
        let lz = lanczos_lowest(&a, 2, &LanczosSettings::default()).unwrap();
        for i in 0..2 {
            assert!((lz.energies[i] - dense.energies[i]).abs() < 1e-10, "{i}");
        }
        let r = a.quadratic(&lz.vectors[0]).re;
        assert!((r - lz.energies[0]).abs() < 1e-10);
    }

    #[test]
    fn merge_duplicates() {
        let m = SparseMatrix::from_rows(vec![vec![(1, C::new(1.0, 0.0)), (1, C::new(2.0, 0.0))], vec![]]);
        assert_eq!(m.get(0, 1), C::new(3.0, 0.0));
        assert_eq!(m.nnz(), 1);
    }
}
