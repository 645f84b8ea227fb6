//! The mixed-field Ising chain: Hamiltonian assembly, local-term
//! decomposition, extremal and excited eigenstates, and the two-site edge
//! jump operators for the Markovian bath.

use crate::dense::{eigh, eigh_real};
use crate::error::{PagelabError, Result};
use crate::lanczos::lanczos_lowest;
use crate::operator::{DiagTerm, FlipTerm, SparseHermitianOperator};
use crate::params::ModelParams;
use crate::state::StateVector;
use faer::Mat;
use num_complex::Complex64 as C64;

/// Above this Hilbert-space dimension, extremal eigenstates come from Lanczos
/// with full reorthogonalization instead of dense diagonalization.
pub const DENSE_EIG_THRESHOLD: usize = 1 << 14;

/// H = g Σ σ_i^x + h Σ σ_i^z + J Σ σ_i^z σ_{i+1}^z with open boundaries.
pub fn build_hamiltonian(params: &ModelParams, l: usize) -> Result<SparseHermitianOperator> {
    if l == 0 {
        return Err(PagelabError::InvalidSize("chain with zero sites".into()));
    }
    let mut diag = Vec::with_capacity(2 * l);
    let mut flips = Vec::with_capacity(l);
    for i in 0..l {
        diag.push(DiagTerm { z_mask: 1 << i, coeff: params.h });
        flips.push(FlipTerm { flip_mask: 1 << i, z_mask: 0, coeff: params.g });
    }
    for i in 0..l.saturating_sub(1) {
        diag.push(DiagTerm { z_mask: 0b11 << i, coeff: params.j });
    }
    SparseHermitianOperator::from_terms(l, diag, flips)
}

/// The local decomposition of the chain Hamiltonian.
///
/// `full[i]` (i = 0..L−2) carries the bond (i, i+1), the fields of site i,
/// and — for the last term — also the fields of site L−1, so that
/// Σ_i full[i] = H exactly. `bond[i]` is J σ_i^z σ_{i+1}^z and `field[i]`
/// (i = 0..L−1) is g σ_i^x + h σ_i^z.
pub struct LocalTerms {
    pub full: Vec<SparseHermitianOperator>,
    pub bond: Vec<SparseHermitianOperator>,
    pub field: Vec<SparseHermitianOperator>,
}

pub fn build_local_terms(params: &ModelParams, l: usize) -> Result<LocalTerms> {
    if l < 2 {
        return Err(PagelabError::InvalidSize(format!(
            "local decomposition needs at least 2 sites, got {l}"
        )));
    }
    let field_terms = |i: usize| {
        (
            vec![DiagTerm { z_mask: 1 << i, coeff: params.h }],
            vec![FlipTerm { flip_mask: 1 << i, z_mask: 0, coeff: params.g }],
        )
    };
    let mut full = Vec::with_capacity(l - 1);
    let mut bond = Vec::with_capacity(l - 1);
    let mut field = Vec::with_capacity(l);
    for i in 0..l - 1 {
        let (mut d, mut f) = field_terms(i);
        d.push(DiagTerm { z_mask: 0b11 << i, coeff: params.j });
        if i == l - 2 {
            // fields of the last site fold into the last local term
            let (d2, f2) = field_terms(l - 1);
            d.extend(d2);
            f.extend(f2);
        }
        full.push(SparseHermitianOperator::from_terms(l, d, f)?);
        bond.push(SparseHermitianOperator::from_terms(
            l,
            vec![DiagTerm { z_mask: 0b11 << i, coeff: params.j }],
            vec![],
        )?);
    }
    for i in 0..l {
        let (d, f) = field_terms(i);
        field.push(SparseHermitianOperator::from_terms(l, d, f)?);
    }
    Ok(LocalTerms { full, bond, field })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremal {
    Ground,
    Ceiling,
}

/// Residual bound asserted on every extremal eigenstate.
pub const EXTREMAL_RESIDUAL_TOL: f64 = 1e-10;

/// Lowest (ground) or highest (ceiling) eigenvector, with the residual
/// ‖Hψ − Eψ‖ checked against [`EXTREMAL_RESIDUAL_TOL`].
pub fn extremal_eigenstate(
    op: &SparseHermitianOperator,
    which: Extremal,
) -> Result<(f64, StateVector)> {
    let dim = op.dim();
    let (energy, mut state) = if dim <= DENSE_EIG_THRESHOLD {
        let (vals, vecs) = eigh_real(op.to_dense_real().as_ref())?;
        let idx = match which {
            Extremal::Ground => 0,
            Extremal::Ceiling => dim - 1,
        };
        let v: Vec<C64> = (0..dim).map(|i| C64::new(vecs[(i, idx)], 0.0)).collect();
        (vals[idx], StateVector::new(v)?)
    } else {
        let res = match which {
            Extremal::Ground => lanczos_lowest(op, 1, 1, 1e-12, 600, 0x51)?,
            Extremal::Ceiling => {
                let neg = op.negated();
                let mut r = lanczos_lowest(&neg, 1, 1, 1e-12, 600, 0x51)?;
                r.eigenvalues[0] = -r.eigenvalues[0];
                r
            }
        };
        let v: Vec<C64> = (0..dim).map(|i| res.eigenvectors[(i, 0)]).collect();
        (res.eigenvalues[0], StateVector::new(v)?)
    };
    state.fix_phase(1e-8);
    let residual = eigen_residual(op, energy, &state);
    if residual > EXTREMAL_RESIDUAL_TOL {
        return Err(PagelabError::Convergence {
            msg: format!("extremal eigenstate residual above {EXTREMAL_RESIDUAL_TOL:.0e}"),
            residual,
        });
    }
    Ok((energy, state))
}

fn eigen_residual(op: &SparseHermitianOperator, energy: f64, state: &StateVector) -> f64 {
    let mut hv = vec![C64::ZERO; op.dim()];
    op.apply(state.amplitudes(), &mut hv);
    hv.iter()
        .zip(state.amplitudes())
        .map(|(a, b)| (a - b * energy).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// The k-th eigenvector counting from the top of the spectrum (k = 1 is the
/// ceiling state). Requires full dense diagonalization. Degeneracies break
/// ties by the stable ascending sort plus the fixed leading-amplitude phase
/// convention.
pub fn eigenstate_by_index_from_top(
    op: &SparseHermitianOperator,
    k: usize,
) -> Result<(f64, StateVector)> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(PagelabError::IndexOutOfRange { index: k, max: dim });
    }
    if dim > DENSE_EIG_THRESHOLD {
        return Err(PagelabError::InvalidSize(format!(
            "dim {dim} too large for full diagonalization"
        )));
    }
    let (vals, vecs) = eigh_real(op.to_dense_real().as_ref())?;
    let idx = dim - k;
    let v: Vec<C64> = (0..dim).map(|i| C64::new(vecs[(i, idx)], 0.0)).collect();
    let mut state = StateVector::new(v)?;
    state.fix_phase(1e-8);
    Ok((vals[idx], state))
}

/// The jump operators Q_k = |0⟩⟨k| of the two-site edge Hamiltonian,
/// embedded on the full 2^M subsystem space.
pub struct JumpOperatorSet {
    /// Subsystem site count M; the operators act on sites M−2, M−1.
    pub m: usize,
    /// Eigenvalues of the 4×4 edge Hamiltonian, ascending.
    pub edge_eigenvalues: [f64; 4],
    /// Eigenvectors of the edge Hamiltonian, one per column, matching
    /// `edge_eigenvalues`. Index 0 is the edge ground state |0⟩.
    pub edge_vectors: Mat<C64>,
    /// Edge eigenindices k that appear as jump sources (|0⟩⟨k|).
    pub jump_sources: Vec<usize>,
    pub ground_index: usize,
}

/// The edge Hamiltonian printed with bond coefficient 1 (independent of J):
/// h_edge = g σ_a^x + h σ_a^z + g σ_b^x + h σ_b^z + σ_a^z σ_b^z where
/// (a, b) = (M−2, M−1) in 0-based site labels. Expressed on the 4-dim edge
/// factor with local bit 0 ↦ site M−2.
pub fn edge_hamiltonian_4x4(params: &ModelParams) -> Mat<C64> {
    let edge = SparseHermitianOperator::from_terms(
        2,
        vec![
            DiagTerm { z_mask: 0b01, coeff: params.h },
            DiagTerm { z_mask: 0b10, coeff: params.h },
            DiagTerm { z_mask: 0b11, coeff: 1.0 },
        ],
        vec![
            FlipTerm { flip_mask: 0b01, z_mask: 0, coeff: params.g },
            FlipTerm { flip_mask: 0b10, z_mask: 0, coeff: params.g },
        ],
    )
    .expect("static 2-site operator");
    edge.to_dense()
}

/// Diagonalize the edge Hamiltonian and build the jump operator set.
///
/// `include_ground` adds the pure-dephasing |0⟩⟨0| jump; by default it is
/// excluded, which leaves the steady state unchanged.
pub fn build_jump_operators(params: &ModelParams, include_ground: bool) -> Result<JumpOperatorSet> {
    if params.m < 2 {
        return Err(PagelabError::InvalidSize(format!(
            "jump operators need m >= 2, got {}",
            params.m
        )));
    }
    let h4 = edge_hamiltonian_4x4(params);
    let (vals, vecs) = eigh(h4.as_ref())?;
    let gap = vals[1] - vals[0];
    if gap < 1e-9 {
        return Err(PagelabError::Degeneracy {
            msg: "edge ground state is degenerate; jump target ill-defined".into(),
            gap,
        });
    }
    let jump_sources: Vec<usize> = if include_ground { vec![0, 1, 2, 3] } else { vec![1, 2, 3] };
    Ok(JumpOperatorSet {
        m: params.m,
        edge_eigenvalues: [vals[0], vals[1], vals[2], vals[3]],
        edge_vectors: vecs,
        jump_sources,
        ground_index: 0,
    })
}

impl JumpOperatorSet {
    pub fn dim(&self) -> usize {
        1 << self.m
    }

    /// Q_k = |0⟩⟨k| on the edge factor, embedded as a dense matrix on the
    /// 2^M space. The edge sites occupy the top two bits, so the embedding is
    /// kron(edge 4×4, identity on the remaining M−2 sites).
    pub fn embedded_jump(&self, k: usize) -> Mat<C64> {
        let rest = 1usize << (self.m - 2);
        let dim = self.dim();
        let mut out = Mat::<C64>::zeros(dim, dim);
        // |0><k| in the computational edge basis
        for a in 0..4 {
            for b in 0..4 {
                let v = self.edge_vectors[(a, 0)] * self.edge_vectors[(b, k)].conj();
                if v.norm() == 0.0 {
                    continue;
                }
                for r in 0..rest {
                    out[(a * rest + r, b * rest + r)] = v;
                }
            }
        }
        out
    }

    /// All embedded Q_k for the configured jump sources.
    pub fn embedded_jumps(&self) -> Vec<Mat<C64>> {
        self.jump_sources.iter().map(|&k| self.embedded_jump(k)).collect()
    }
}
