//! Reduced density matrices and entanglement snapshots.

use crate::dense::eigh;
use crate::error::{PagelabError, Result};
use crate::lanczos::{lanczos_lowest, DenseOp};
use crate::state::{DensityMatrix, StateVector};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef};
use num_complex::Complex64 as C64;

/// Eigenvalues below this are treated as exactly zero inside entropy sums.
pub const EIGENVALUE_CLIP: f64 = 1e-14;

/// ρ_A for the leftmost `m` sites of an (m+n)-site pure state:
/// ρ_{ab} = Σ_c ψ_{ac} conj(ψ_{bc}) with `a, b` over the 2^m left
/// configurations (low bits) and `c` over the 2^n right configurations.
pub fn partial_trace(psi: &StateVector, m: usize, n: usize) -> Result<DensityMatrix> {
    let dim = psi.dim();
    if dim != 1usize << (m + n) {
        return Err(PagelabError::DimensionMismatch(format!(
            "state dim {dim} vs 2^({m}+{n})"
        )));
    }
    let dl = 1usize << m;
    let dr = 1usize << n;
    // column-major view with the left index fastest: column c holds ψ[·, c]
    let view = MatRef::from_column_major_slice(psi.amplitudes(), dl, dr);
    let mut rho = Mat::<C64>::zeros(dl, dl);
    matmul(
        rho.as_mut(),
        Accum::Replace,
        view,
        view.adjoint(),
        C64::ONE,
        faer::get_global_parallelism(),
    );
    Ok(DensityMatrix::from_mat_unchecked(rho))
}

/// Time-stamped eigendecomposition of ρ_A with derived Rényi entropies.
///
/// Eigenvalues are descending and clipped to be nonnegative; eigenvectors
/// (one per column, same order) may be truncated to the leading block for
/// large dimensions — `stored_levels` tells how many are kept.
#[derive(Debug, Clone)]
pub struct EntanglementSnapshot {
    pub time: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<C64>,
    /// (α, S_α) pairs in the order the α set was configured;
    /// `f64::INFINITY` keys the min-entropy.
    pub entropies: Vec<(f64, f64)>,
    /// Number of eigenvector columns kept.
    pub stored_levels: usize,
    /// Trace weight not covered by the stored eigenvalues (nonzero only for
    /// truncated iterative decompositions).
    pub tail_weight: f64,
    /// Smallest eigenvalue before clipping, for positivity monitoring.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SnapshotOptions {
    /// Full dense decomposition at or below this dimension; Lanczos top-k
    /// above it.
    pub dense_threshold: usize,
    /// Number of leading eigenpairs from the iterative path.
    pub top_k: usize,
}

impl Default for SnapshotOptions {
    fn default() -> Self {
        SnapshotOptions { dense_threshold: 2048, top_k: 256 }
    }
}

/// S_α of a clipped, descending spectrum (natural logarithm).
pub fn renyi_entropy(eigenvalues: &[f64], alpha: f64) -> f64 {
    if alpha == 1.0 {
        -eigenvalues
            .iter()
            .filter(|&&l| l > EIGENVALUE_CLIP)
            .map(|&l| l * l.ln())
            .sum::<f64>()
    } else if alpha.is_infinite() {
        -eigenvalues.first().copied().unwrap_or(0.0).max(EIGENVALUE_CLIP).ln()
    } else {
        let s: f64 = eigenvalues
            .iter()
            .filter(|&&l| l > EIGENVALUE_CLIP)
            .map(|&l| l.powf(alpha))
            .sum();
        s.ln() / (1.0 - alpha)
    }
}

/// Full Hermitian decomposition of ρ with entropies for the given α set.
pub fn entanglement_snapshot(
    rho: &DensityMatrix,
    time: f64,
    alphas: &[f64],
    opts: &SnapshotOptions,
) -> Result<EntanglementSnapshot> {
    let dim = rho.dim();
    // both branches produce eigenvalues descending with matching columns
    let (mut vals, vecs, tail_weight) = if dim <= opts.dense_threshold {
        let (mut vals, mut vecs) = eigh(rho.mat().as_ref())?;
        vals.reverse();
        reverse_columns(&mut vecs);
        (vals, vecs, 0.0)
    } else {
        // ρ is positive semidefinite with trace 1; the lowest eigenvalues of
        // −ρ are the negated top of the spectrum, already in descending order
        // after negation
        let neg = Mat::from_fn(dim, dim, |i, j| -rho.mat()[(i, j)]);
        let k = opts.top_k.min(dim);
        let res = lanczos_lowest(&DenseOp(neg.as_ref()), k, k.min(24), 1e-11, 3 * k + 64, 0x9d)?;
        let vals: Vec<f64> = res.eigenvalues.iter().map(|&v| -v).collect();
        let covered: f64 = vals.iter().sum();
        (vals, res.eigenvectors, (1.0 - covered).max(0.0))
    };
    let min_eigenvalue = vals.last().copied().unwrap_or(0.0).min(if tail_weight > 0.0 {
        0.0
    } else {
        f64::INFINITY
    });
    for v in &mut vals {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let entropies = alphas.iter().map(|&a| (a, renyi_entropy(&vals, a))).collect();
    let stored_levels = vecs.ncols();
    Ok(EntanglementSnapshot {
        time,
        eigenvalues: vals,
        eigenvectors: vecs,
        entropies,
        stored_levels,
        tail_weight,
        min_eigenvalue,
    })
}

fn reverse_columns(m: &mut Mat<C64>) {
    let (rows, cols) = (m.nrows(), m.ncols());
    for j in 0..cols / 2 {
        for i in 0..rows {
            let a = m[(i, j)];
            m[(i, j)] = m[(i, cols - 1 - j)];
            m[(i, cols - 1 - j)] = a;
        }
    }
}

impl EntanglementSnapshot {
    pub fn entropy(&self, alpha: f64) -> Option<f64> {
        self.entropies
            .iter()
            .find(|(a, _)| *a == alpha || (a.is_infinite() && alpha.is_infinite()))
            .map(|&(_, s)| s)
    }

    /// log λ_0 − log λ_1, the log-gap of the top two levels.
    pub fn top_log_gap(&self) -> f64 {
        let l0 = self.eigenvalues.first().copied().unwrap_or(0.0).max(EIGENVALUE_CLIP);
        let l1 = self.eigenvalues.get(1).copied().unwrap_or(0.0).max(EIGENVALUE_CLIP);
        l0.ln() - l1.ln()
    }

    pub fn level(&self, k: usize) -> Option<&[C64]> {
        if k < self.stored_levels {
            Some(crate::dense::col_slice(&self.eigenvectors, k))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;

    fn random_state(dim: usize, seed: u64) -> StateVector {
        let mut s = seed | 1;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        StateVector::new((0..dim).map(|_| C64::new(next(), next())).collect()).unwrap()
    }

    #[test]
    fn product_state_is_pure_after_trace() {
        let l = random_state(8, 21);
        let r = random_state(4, 33);
        let psi = StateVector::product(&l, &r);
        let rho = partial_trace(&psi, 3, 2).unwrap();
        let snap = entanglement_snapshot(&rho, 0.0, &[1.0], &SnapshotOptions::default()).unwrap();
        assert!(snap.entropy(1.0).unwrap().abs() < 1e-12);
        // ρ_A = |φ⟩⟨φ|
        let expect = l.to_density_matrix();
        for i in 0..8 {
            for j in 0..8 {
                assert!((rho.mat()[(i, j)] - expect.mat()[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bell_pair_is_maximally_mixed() {
        let inv = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi =
            StateVector::new(vec![inv, C64::ZERO, C64::ZERO, inv]).unwrap();
        let rho = partial_trace(&psi, 1, 1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { C64::new(0.5, 0.0) } else { C64::ZERO };
                assert!((rho.mat()[(i, j)] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_trace_matches_brute_force() {
        let psi = random_state(64, 5);
        let rho = partial_trace(&psi, 3, 3).unwrap();
        // naive double loop over explicit indices
        let a = psi.amplitudes();
        for row in 0..8 {
            for col in 0..8 {
                let mut acc = C64::ZERO;
                for c in 0..8 {
                    acc += a[row + (c << 3)] * a[col + (c << 3)].conj();
                }
                assert!((rho.mat()[(row, col)] - acc).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let psi = random_state(16, 9);
        assert!(partial_trace(&psi, 3, 3).is_err());
    }

    #[test]
    fn flat_spectrum_entropies() {
        let rho = DensityMatrix::maximally_mixed(16);
        let snap = entanglement_snapshot(
            &rho,
            0.0,
            &[1.0, 2.0, f64::INFINITY],
            &SnapshotOptions::default(),
        )
        .unwrap();
        let expect = 4.0 * std::f64::consts::LN_2;
        for &(_, s) in &snap.entropies {
            assert!((s - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn known_spectrum_arithmetic() {
        // spectrum {0.5, 0.3, 0.2}: S_2 = −ln 0.38, S_∞ = −ln 0.5
        let vals = [0.5, 0.3, 0.2];
        assert!((renyi_entropy(&vals, 2.0) - -(0.38f64).ln()).abs() < 1e-14);
        assert!((renyi_entropy(&vals, f64::INFINITY) - -(0.5f64).ln()).abs() < 1e-14);
        // S_1 by direct arithmetic
        let s1: f64 = -vals.iter().map(|&l| l * l.ln()).sum::<f64>();
        assert!((renyi_entropy(&vals, 1.0) - s1).abs() < 1e-14);
    }

    #[test]
    fn renyi_monotone_in_alpha() {
        let psi = random_state(64, 77);
        let rho = partial_trace(&psi, 3, 3).unwrap();
        let alphas = [0.5, 1.0, 1.5, 2.0, 3.0, 10.0, f64::INFINITY];
        let snap = entanglement_snapshot(&rho, 0.0, &alphas, &SnapshotOptions::default()).unwrap();
        for w in snap.entropies.windows(2) {
            assert!(w[0].1 >= w[1].1 - 1e-12, "S_{} < S_{}", w[0].0, w[1].0);
        }
    }

    #[test]
    fn iterative_path_matches_dense() {
        let psi = random_state(256, 13);
        let rho = partial_trace(&psi, 4, 4).unwrap();
        let dense =
            entanglement_snapshot(&rho, 0.0, &[1.0, 2.0], &SnapshotOptions::default()).unwrap();
        let iter = entanglement_snapshot(
            &rho,
            0.0,
            &[1.0, 2.0],
            &SnapshotOptions { dense_threshold: 8, top_k: 16 },
        )
        .unwrap();
        for k in 0..16 {
            assert!(
                (dense.eigenvalues[k] - iter.eigenvalues[k]).abs() < 1e-10,
                "eigenvalue {k}"
            );
        }
        // 16 levels of a rank-16 state cover everything
        assert!(iter.tail_weight < 1e-9);
        assert!((dense.entropy(2.0).unwrap() - iter.entropy(2.0).unwrap()).abs() < 1e-9);
    }
}
