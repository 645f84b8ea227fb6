//! Lanczos iteration with full reorthogonalization, for extremal eigenpairs
//! of operators too large to diagonalize densely and for top-k spectra of
//! large density matrices.

use crate::dense::eigh_real;
use crate::error::{PagelabError, Result};
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Anything that can act as a Hermitian matrix-vector product.
pub trait HermitianOp {
    fn dim(&self) -> usize;
    fn apply_to(&self, x: &[C64], y: &mut [C64]);
}

impl HermitianOp for crate::operator::SparseHermitianOperator {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn apply_to(&self, x: &[C64], y: &mut [C64]) {
        self.apply(x, y)
    }
}

/// Dense Hermitian matrix as an operator (used for density-matrix spectra).
pub struct DenseOp<'a>(pub faer::MatRef<'a, C64>);

impl HermitianOp for DenseOp<'_> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn apply_to(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        let xm = faer::MatRef::from_column_major_slice(x, n, 1);
        let mut ym = faer::MatMut::from_column_major_slice_mut(y, n, 1);
        faer::linalg::matmul::matmul(
            ym.as_mut(),
            faer::Accum::Replace,
            self.0,
            xm,
            C64::ONE,
            faer::get_global_parallelism(),
        );
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    if a.len() >= 1 << 16 {
        let chunk = 1 << 14;
        a.par_chunks(chunk)
            .zip(b.par_chunks(chunk))
            .map(|(xa, xb)| xa.iter().zip(xb).map(|(x, y)| x.conj() * y).sum::<C64>())
            .reduce(|| C64::ZERO, |p, q| p + q)
    } else {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }
}

fn norm(a: &[C64]) -> f64 {
    dot(a, a).re.sqrt()
}

fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    if y.len() >= 1 << 16 {
        y.par_iter_mut().zip(x.par_iter()).for_each(|(yo, &xi)| *yo += alpha * xi);
    } else {
        for (yo, &xi) in y.iter_mut().zip(x) {
            *yo += alpha * xi;
        }
    }
}

fn scale(y: &mut [C64], s: f64) {
    if y.len() >= 1 << 16 {
        y.par_iter_mut().for_each(|v| *v *= s);
    } else {
        for v in y.iter_mut() {
            *v *= s;
        }
    }
}

/// Deterministic pseudo-random start vector; the seed folds in the dimension
/// so different problem sizes decorrelate.
fn start_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut state = seed ^ (dim as u64).wrapping_mul(0x9e3779b97f4a7c15);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(next(), next())).collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

pub struct LanczosResult {
    pub eigenvalues: Vec<f64>,
    /// Ritz vectors, one per column, matching `eigenvalues`.
    pub eigenvectors: Mat<C64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Run Lanczos with full reorthogonalization until the lowest `n_converge`
/// Ritz pairs have residual below `tol`, returning the lowest `n_want` pairs
/// (eigenvalues ascending).
pub fn lanczos_lowest<O: HermitianOp + ?Sized>(
    op: &O,
    n_want: usize,
    n_converge: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<LanczosResult> {
    let dim = op.dim();
    let n_want = n_want.min(dim);
    let n_converge = n_converge.min(n_want);
    let mut basis: Vec<Vec<C64>> = vec![start_vector(dim, seed)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![C64::ZERO; dim];
    let check_every = 10;
    let mut exhausted = false;

    for it in 0..max_iter.min(dim) {
        let v = &basis[it];
        op.apply_to(v, &mut w);
        let alpha = dot(v, &w).re;
        alphas.push(alpha);
        axpy(&mut w, C64::new(-alpha, 0.0), v);
        if it > 0 {
            let beta_prev = betas[it - 1];
            axpy(&mut w, C64::new(-beta_prev, 0.0), &basis[it - 1]);
        }
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                if c.norm() > 0.0 {
                    axpy(&mut w, -c, b);
                }
            }
        }
        let beta = norm(&w);
        let m = alphas.len();
        let converged = if beta < 1e-13 {
            exhausted = true;
            true
        } else if m >= n_want && (m % check_every == 0 || m == max_iter.min(dim)) {
            // residual of the k-th Ritz pair is |beta * last component|
            let (ritz_vals, ritz_vecs) = tridiag_eigh(&alphas, &betas)?;
            (0..n_converge).all(|k| (beta * ritz_vecs[(m - 1, k)]).abs() <= tol)
                && ritz_vals.len() >= n_want
        } else {
            false
        };
        if converged {
            break;
        }
        if m == max_iter.min(dim) {
            break;
        }
        let mut next = w.clone();
        scale(&mut next, 1.0 / beta);
        betas.push(beta);
        basis.push(next);
    }

    let m = alphas.len();
    let (ritz_vals, ritz_vecs) = tridiag_eigh(&alphas, &betas[..m.saturating_sub(1)])?;
    let n_have = n_want.min(m);
    let beta_last = if exhausted { 0.0 } else { norm(&w) };
    let worst = (0..n_converge.min(n_have))
        .map(|k| (beta_last * ritz_vecs[(m - 1, k)]).abs())
        .fold(0.0f64, f64::max);
    if !exhausted && worst > tol {
        return Err(PagelabError::Convergence {
            msg: format!("Lanczos stalled after {m} iterations"),
            residual: worst,
        });
    }

    let mut eigenvectors = Mat::<C64>::zeros(dim, n_have);
    for k in 0..n_have {
        let col = eigenvectors.col_mut(k);
        let out = col.try_as_col_major_mut().unwrap().as_slice_mut();
        for (j, b) in basis.iter().enumerate().take(m) {
            let c = C64::new(ritz_vecs[(j, k)], 0.0);
            axpy(out, c, b);
        }
        let n = norm(out);
        scale(out, 1.0 / n);
    }
    crate::dense::fix_column_phases(&mut eigenvectors);
    Ok(LanczosResult {
        eigenvalues: ritz_vals[..n_have].to_vec(),
        eigenvectors,
        iterations: m,
        residual: worst,
    })
}

fn tridiag_eigh(alphas: &[f64], betas: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alphas.len();
    let mut t = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i + 1, i)] = betas[i];
            t[(i, i + 1)] = betas[i];
        }
    }
    eigh_real(t.as_ref())
}
