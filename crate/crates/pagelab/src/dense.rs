//! Dense Hermitian linear algebra helpers on top of faer.

use crate::error::{PagelabError, Result};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64 as C64;

fn par() -> Par {
    faer::get_global_parallelism()
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, one
/// eigenvector per column, each with its first significant component made
/// real positive so repeated runs produce identical output.
pub fn eigh(mat: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| PagelabError::Numerical(format!("hermitian eigendecomposition failed: {e:?}")))?;
    let n = mat.nrows();
    let vals: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i].re).collect();
    let mut vecs = evd.U().to_owned();
    fix_column_phases(&mut vecs);
    Ok((vals, vecs))
}

/// Eigendecomposition of a real symmetric matrix.
pub fn eigh_real(mat: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| PagelabError::Numerical(format!("symmetric eigendecomposition failed: {e:?}")))?;
    let n = mat.nrows();
    let vals: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
    let mut vecs = evd.U().to_owned();
    for j in 0..n {
        let mut lead = 0.0;
        for i in 0..n {
            let v = vecs[(i, j)];
            if v.abs() > 1e-8 {
                lead = v;
                break;
            }
        }
        if lead < 0.0 {
            for i in 0..n {
                vecs[(i, j)] = -vecs[(i, j)];
            }
        }
    }
    Ok((vals, vecs))
}

pub fn fix_column_phases(vecs: &mut Mat<C64>) {
    let (n, m) = (vecs.nrows(), vecs.ncols());
    for j in 0..m {
        let mut corr = None;
        for i in 0..n {
            let v = vecs[(i, j)];
            let a = v.norm();
            if a > 1e-8 {
                corr = Some(v.conj() / a);
                break;
            }
        }
        if let Some(c) = corr {
            for i in 0..n {
                vecs[(i, j)] *= c;
            }
        }
    }
}

/// exp(-i t H) from a precomputed eigendecomposition of H.
pub fn unitary_from_eigh(evals: &[f64], evecs: MatRef<'_, C64>, t: f64) -> Mat<C64> {
    let n = evals.len();
    // columns scaled by phases, then multiplied by V†
    let mut scaled = evecs.to_owned();
    for (j, &e) in evals.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * t);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    let mut u = Mat::<C64>::zeros(n, n);
    matmul(u.as_mut(), Accum::Replace, scaled.as_ref(), evecs.adjoint(), C64::ONE, par());
    u
}

/// f(H) = Σ f(λ_k) v_k v_k† from a precomputed eigendecomposition.
pub fn function_from_eigh(
    evals: &[f64],
    evecs: MatRef<'_, C64>,
    f: impl Fn(f64) -> f64,
) -> Mat<C64> {
    let n = evals.len();
    let mut scaled = evecs.to_owned();
    for (j, &e) in evals.iter().enumerate() {
        let w = C64::new(f(e), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    let mut out = Mat::<C64>::zeros(n, n);
    matmul(out.as_mut(), Accum::Replace, scaled.as_ref(), evecs.adjoint(), C64::ONE, par());
    out
}

/// U ρ U† with a scratch buffer reused across steps.
pub fn sandwich_into(
    u: MatRef<'_, C64>,
    rho: MatRef<'_, C64>,
    scratch: &mut Mat<C64>,
    out: &mut Mat<C64>,
) {
    matmul(scratch.as_mut(), Accum::Replace, u, rho, C64::ONE, par());
    matmul(out.as_mut(), Accum::Replace, scratch.as_ref(), u.adjoint(), C64::ONE, par());
}

/// exp(-K)/Tr exp(-K) for real symmetric K, via eigendecomposition with a
/// spectral shift guarding against overflow. Returns the real matrix.
pub fn gibbs_of_real_symmetric(k: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let (evals, evecs) = eigh_real(k)?;
    let n = evals.len();
    let emin = evals.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = evals.iter().map(|&e| (-(e - emin)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut scaled = evecs.clone();
    for (j, &w) in weights.iter().enumerate() {
        let w = w / z;
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    let mut out = Mat::<f64>::zeros(n, n);
    matmul(out.as_mut(), Accum::Replace, scaled.as_ref(), evecs.transpose(), 1.0, par());
    Ok(out)
}

pub fn real_to_complex(m: MatRef<'_, f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

/// Column `j` of a column-major matrix as a slice.
pub fn col_slice<'a>(m: &'a Mat<C64>, j: usize) -> &'a [C64] {
    m.col(j).try_as_col_major().expect("column-major matrix").as_slice()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_orders_ascending_and_fixes_phase() {
        let mut m = Mat::<C64>::zeros(3, 3);
        m[(0, 0)] = C64::new(2.0, 0.0);
        m[(1, 1)] = C64::new(-1.0, 0.0);
        m[(2, 2)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.0, 0.3);
        m[(1, 0)] = C64::new(0.0, -0.3);
        let (vals, vecs) = eigh(m.as_ref()).unwrap();
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        for j in 0..3 {
            let lead = (0..3).map(|i| vecs[(i, j)]).find(|v| v.norm() > 1e-8).unwrap();
            assert!(lead.im.abs() < 1e-12 && lead.re > 0.0);
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let h = Mat::<C64>::from_fn(4, 4, |i, j| {
            if i == j {
                C64::new(i as f64 - 1.5, 0.0)
            } else {
                C64::new(0.25, 0.1 * (i as f64 - j as f64))
            }
        });
        let h = &h + h.adjoint().to_owned();
        let (vals, vecs) = eigh(h.as_ref()).unwrap();
        let u = unitary_from_eigh(&vals, vecs.as_ref(), 0.7);
        let id = &u * u.adjoint();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gibbs_normalizes() {
        let k = Mat::<f64>::from_fn(4, 4, |i, j| if i == j { i as f64 } else { 0.2 });
        let rho = gibbs_of_real_symmetric(k.as_ref()).unwrap();
        let tr: f64 = (0..4).map(|i| rho[(i, i)]).sum();
        assert!((tr - 1.0).abs() < 1e-13);
    }
}
