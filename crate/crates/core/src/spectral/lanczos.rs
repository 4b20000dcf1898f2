//! Restarted Lanczos iteration for the smallest eigenvalue of a symmetric
//! operator on the orthogonal complement of the constant vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub struct LanczosResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            krylov_dim: 120,
            max_restarts: 60,
            tol: 1e-8,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn deflate_constant(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Smallest eigenpair of `op` restricted to vectors with zero sum. `op` must
/// be symmetric and preserve the zero-sum subspace.
pub fn smallest_eigen(
    n: usize,
    op: impl Fn(&[f64], &mut [f64]),
    opts: &LanczosOptions,
) -> Result<LanczosResult> {
    if n < 2 {
        return Err(Error::InvalidInput("operator dimension below 2".into()));
    }
    let m = opts.krylov_dim.min(n - 1).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;
    let mut w = vec![0.0; n];

    for _ in 0..opts.max_restarts {
        deflate_constant(&mut start);
        let s = norm(&start);
        start.iter_mut().for_each(|x| *x /= s);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            op(&basis[j], &mut w);
            iterations += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    axpy(&mut w, -c, q);
                }
            }
            deflate_constant(&mut w);
            let b = norm(&w);
            if j + 1 == m || b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty tridiagonal");
        let y = eig.eigenvectors.column(imin);
        let mut x = vec![0.0; n];
        for (i, q) in basis.iter().take(k).enumerate() {
            axpy(&mut x, y[i], q);
        }
        deflate_constant(&mut x);
        let xn = norm(&x);
        x.iter_mut().for_each(|v| *v /= xn);
        op(&x, &mut w);
        iterations += 1;
        let rq = dot(&w, &x);
        axpy(&mut w, -rq, &x);
        let residual = norm(&w);
        last_residual = residual;
        if residual <= opts.tol {
            return Ok(LanczosResult {
                value: rq,
                vector: x,
                residual,
                iterations,
            });
        }
        start = x;
    }
    Err(Error::NoConvergence {
        iterations,
        residual: last_residual,
    })
}
