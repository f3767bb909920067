//! Ground state of a real symmetric operator given only its action on vectors.
//!
//! Thick-free restarted Lanczos: each cycle builds a fully reorthogonalized
//! Krylov basis, restarts from the lowest Ritz vector, and stops once the
//! residual `|H v - E v|` is below tolerance.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual tolerance relative to `max(1, |E|)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { krylov_dim: 120, max_restarts: 40, tol: 1e-12, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair of the `dim`-dimensional operator `apply(x, y)`: `y = H x`.
pub fn lowest_eigenpair(dim: usize, apply: impl Fn(&[f64], &mut [f64]), opts: LanczosOptions) -> Result<GroundState> {
    if dim == 0 {
        return Err(Error::InvalidParameter("empty Hilbert space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut start);
    let m_max = opts.krylov_dim.min(dim).max(1);
    let mut matvecs = 0;
    let mut hv = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;

    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        for j in 0..m_max {
            apply(&basis[j], &mut hv);
            matvecs += 1;
            let a = dot(&basis[j], &hv);
            alpha.push(a);
            if j + 1 == m_max {
                break;
            }
            let mut w = hv.clone();
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let nb = normalize(&mut w);
            if nb < 1e-13 * a.abs().max(1.0) {
                break;
            }
            beta.push(nb);
            basis.push(w);
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = symmetric_eigen(&t);
        let (k, _) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let y = eig.eigenvectors.column(k);
        let mut v = vec![0.0; dim];
        for (coef, b) in y.iter().zip(&basis) {
            v.iter_mut().zip(b).for_each(|(x, bb)| *x += coef * bb);
        }
        normalize(&mut v);
        apply(&v, &mut hv);
        matvecs += 1;
        let e = dot(&v, &hv);
        let residual = hv.iter().zip(&v).map(|(h, x)| (h - e * x).powi(2)).sum::<f64>().sqrt();
        last_residual = residual;
        if residual <= opts.tol * e.abs().max(1.0) || m == dim {
            return Ok(GroundState { energy: e, vector: v, residual, matvecs });
        }
        start = v;
    }
    Err(Error::NoConvergence { iterations: matvecs, residual: last_residual })
}

/// Flips the overall sign so that the largest-magnitude entry is positive.
pub fn fix_sign(v: &mut [f64]) {
    let (_, &big) = v.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap_or((0, &1.0));
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_on_random_sparse_matrix() {
        let n = 300;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = rng.random::<f64>() * 4.0;
            for _ in 0..3 {
                let j = rng.random_range(0..n);
                let x = rng.random::<f64>() - 0.5;
                m[(i, j)] += x;
                m[(j, i)] += x;
            }
        }
        let dense_min = m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        let gs = lowest_eigenpair(
            n,
            |x, y| {
                let r = &m * nalgebra::DVector::from_column_slice(x);
                y.copy_from_slice(r.as_slice());
            },
            LanczosOptions { krylov_dim: 60, ..Default::default() },
        )
        .unwrap();
        assert!((gs.energy - dense_min).abs() < 1e-10, "{} vs {}", gs.energy, dense_min);
        assert!(gs.residual < 1e-10);
    }

    #[test]
    fn one_dimensional_space() {
        let gs = lowest_eigenpair(1, |x, y| y[0] = 3.0 * x[0], LanczosOptions::default()).unwrap();
        assert_eq!(gs.energy, 3.0);
    }
}
