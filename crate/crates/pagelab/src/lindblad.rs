//! Trotterized Kraus simulation of the Lindblad master equation
//! ∂_t ρ = −i[H, ρ] + γ Σ_k (Q_k ρ Q_k† − ½{Q_k† Q_k, ρ}).
//!
//! One Trotter step applies the unitary U = exp(−iH δt) and then the
//! dissipative channel with Kraus operators K_k = √(γ δt) Q_k and
//! K_0 = √(1 − γ δt Σ Q_k† Q_k). Because Σ Q_k† Q_k is diagonal in the
//! eigenbasis of the two-site edge Hamiltonian, the square root is exact and
//! the substep preserves the trace to machine precision.
//!
//! The channel is applied in the edge eigenbasis, where the no-jump operator
//! is an elementwise weight and each jump moves one diagonal edge block into
//! the edge ground block. This keeps the per-step cost at the two dense
//! matrix products of the unitary conjugation.

use crate::dense::{eigh_real, real_to_complex, sandwich_into, unitary_from_eigh};
use crate::error::{PagelabError, Result};
use crate::lattice::JumpOperatorSet;
use crate::operator::SparseHermitianOperator;
use crate::state::DensityMatrix;
use faer::Mat;
use num_complex::Complex64 as C64;

/// One dissipative Trotter substep in Kraus form.
pub struct KrausChannel {
    dim: usize,
    m: usize,
    pub gamma: f64,
    pub step_dt: f64,
    /// Edge eigenbasis columns (4×4).
    edge_vectors: Mat<C64>,
    /// Edge eigenindices that act as jump sources.
    jump_sources: Vec<usize>,
    /// No-jump amplitude per edge eigenstate: 1 for states without a jump,
    /// √(1 − γ δt) for jump sources.
    weights: [f64; 4],
}

/// Kraus operators for rate `gamma` and substep `dt` from a jump-operator
/// set. Fails when γ δt > 1, where the no-jump weight would turn imaginary.
pub fn build_dissipative_kraus(
    jumps: &JumpOperatorSet,
    gamma: f64,
    dt: f64,
) -> Result<KrausChannel> {
    if gamma < 0.0 {
        return Err(PagelabError::Config(format!("gamma = {gamma} < 0")));
    }
    let p = gamma * dt;
    if p > 1.0 {
        return Err(PagelabError::StepTooLarge(p));
    }
    let mut weights = [1.0f64; 4];
    for &k in &jumps.jump_sources {
        weights[k] = (1.0 - p).sqrt();
    }
    Ok(KrausChannel {
        dim: jumps.dim(),
        m: jumps.m,
        gamma,
        step_dt: dt,
        edge_vectors: jumps.edge_vectors.clone(),
        jump_sources: jumps.jump_sources.clone(),
        weights,
    })
}

impl KrausChannel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Apply the channel in place: ρ ← Σ_j K_j ρ K_j†.
    pub fn apply(&self, rho: &mut DensityMatrix) {
        assert_eq!(rho.dim(), self.dim, "channel dimension mismatch");
        if self.gamma == 0.0 || self.step_dt == 0.0 {
            return;
        }
        let rest = self.dim >> 2;
        let mat = rho.mat_mut();
        // rotate the edge factor (top two bits) into its eigenbasis:
        // ρ ← (W ⊗ I)† ρ (W ⊗ I), done block-wise on the 4×4 grid of
        // rest×rest blocks
        edge_rotate(mat, &self.edge_vectors, rest, true);
        let p = self.gamma * self.step_dt;
        // jump transfer reads the pre-weight diagonal blocks
        let mut jump_add = Mat::<C64>::zeros(rest, rest);
        for &k in &self.jump_sources {
            for j in 0..rest {
                for i in 0..rest {
                    jump_add[(i, j)] += mat[(k * rest + i, k * rest + j)] * p;
                }
            }
        }
        // no-jump weights K_0 ρ K_0†
        for eb in 0..4usize {
            for ea in 0..4usize {
                let w = self.weights[ea] * self.weights[eb];
                if w == 1.0 {
                    continue;
                }
                for j in 0..rest {
                    for i in 0..rest {
                        mat[(ea * rest + i, eb * rest + j)] *= w;
                    }
                }
            }
        }
        // jumps land in the edge ground block
        for j in 0..rest {
            for i in 0..rest {
                mat[(i, j)] += jump_add[(i, j)];
            }
        }
        edge_rotate(mat, &self.edge_vectors, rest, false);
    }

    /// Dense Kraus operators {K_0, K_k}, materialized for verification.
    pub fn kraus_matrices(&self) -> Vec<Mat<C64>> {
        let rest = self.dim >> 2;
        let p = self.gamma * self.step_dt;
        let mut out = Vec::with_capacity(1 + self.jump_sources.len());
        // K_0 = W diag(weights) W† ⊗ I
        let mut k0_edge = Mat::<C64>::zeros(4, 4);
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = C64::ZERO;
                for e in 0..4 {
                    acc += self.edge_vectors[(a, e)]
                        * self.weights[e]
                        * self.edge_vectors[(b, e)].conj();
                }
                k0_edge[(a, b)] = acc;
            }
        }
        out.push(embed_edge(&k0_edge, rest));
        for &k in &self.jump_sources {
            let mut q_edge = Mat::<C64>::zeros(4, 4);
            for a in 0..4 {
                for b in 0..4 {
                    q_edge[(a, b)] =
                        self.edge_vectors[(a, 0)] * self.edge_vectors[(b, k)].conj() * p.sqrt();
                }
            }
            out.push(embed_edge(&q_edge, rest));
        }
        out
    }

    /// max |Σ K†K − 1| over the matrix, for invariant checks.
    pub fn completeness_defect(&self) -> f64 {
        let ks = self.kraus_matrices();
        let mut acc = Mat::<C64>::zeros(self.dim, self.dim);
        for k in &ks {
            acc += k.adjoint() * k;
        }
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            for i in 0..self.dim {
                let expect = if i == j { C64::ONE } else { C64::ZERO };
                worst = worst.max((acc[(i, j)] - expect).norm());
            }
        }
        worst
    }

    pub fn subsystem_sites(&self) -> usize {
        self.m
    }
}

/// kron(edge 4×4, I_rest).
fn embed_edge(edge: &Mat<C64>, rest: usize) -> Mat<C64> {
    let dim = rest * 4;
    let mut out = Mat::<C64>::zeros(dim, dim);
    for a in 0..4 {
        for b in 0..4 {
            let v = edge[(a, b)];
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

/// ρ ← (W ⊗ I)† ρ (W ⊗ I) when `forward`, the inverse rotation otherwise.
fn edge_rotate(mat: &mut Mat<C64>, w4: &Mat<C64>, rest: usize, forward: bool) {
    let wget = |a: usize, e: usize| if forward { w4[(a, e)] } else { w4[(e, a)].conj() };
    // left factor: rows mix across edge blocks
    let mut col_buf = vec![C64::ZERO; 4];
    for j in 0..4 * rest {
        for i in 0..rest {
            for (e, cb) in col_buf.iter_mut().enumerate() {
                let mut acc = C64::ZERO;
                for a in 0..4 {
                    acc += wget(a, e).conj() * mat[(a * rest + i, j)];
                }
                *cb = acc;
            }
            for e in 0..4 {
                mat[(e * rest + i, j)] = col_buf[e];
            }
        }
    }
    // right factor
    let mut row_buf = vec![C64::ZERO; 4];
    for i in 0..4 * rest {
        for j in 0..rest {
            for (e, rb) in row_buf.iter_mut().enumerate() {
                let mut acc = C64::ZERO;
                for b in 0..4 {
                    acc += mat[(i, b * rest + j)] * wget(b, e);
                }
                *rb = acc;
            }
            for e in 0..4 {
                mat[(i, e * rest + j)] = row_buf[e];
            }
        }
    }
}

/// Dense-unitary cache for the time-independent Hamiltonian. The full U is
/// materialized once and reused across steps; fractional steps (used by the
/// crossing refinement) rebuild U(dt') from the stored eigendecomposition.
pub struct UnitaryCache {
    pub evals: Vec<f64>,
    pub evecs: Mat<C64>,
    pub dt: f64,
    pub u: Mat<C64>,
}

impl UnitaryCache {
    pub fn new(h: &SparseHermitianOperator, dt: f64) -> Result<Self> {
        let (vals, vecs_re) = eigh_real(h.to_dense_real().as_ref())?;
        let vecs = real_to_complex(vecs_re.as_ref());
        let u = unitary_from_eigh(&vals, vecs.as_ref(), dt);
        Ok(UnitaryCache { evals: vals, evecs: vecs, dt, u })
    }

    pub fn unitary_for(&self, dt: f64) -> Mat<C64> {
        if dt == self.dt {
            self.u.clone()
        } else {
            unitary_from_eigh(&self.evals, self.evecs.as_ref(), dt)
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.evals[0]
    }
}

/// One full Trotter step: unitary conjugation then the dissipative channel.
/// `scratch` and `out` must have the channel dimension; `out` receives ρ'.
pub fn lindblad_step(
    rho: &DensityMatrix,
    u: &Mat<C64>,
    channel: &KrausChannel,
    scratch: &mut Mat<C64>,
    out: &mut Mat<C64>,
) -> Result<DensityMatrix> {
    if rho.dim() != channel.dim() {
        return Err(PagelabError::DimensionMismatch(format!(
            "rho dim {} vs channel dim {}",
            rho.dim(),
            channel.dim()
        )));
    }
    sandwich_into(u.as_ref(), rho.mat().as_ref(), scratch, out);
    let mut next = DensityMatrix::from_mat_unchecked(out.clone());
    channel.apply(&mut next);
    let tr = next.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(PagelabError::Numerical(format!(
            "trace drifted to {tr} after a Trotter step"
        )));
    }
    Ok(next)
}

/// Strang-split variant: half unitary, channel, half unitary.
pub fn lindblad_step_strang(
    rho: &DensityMatrix,
    u_half: &Mat<C64>,
    channel: &KrausChannel,
    scratch: &mut Mat<C64>,
    out: &mut Mat<C64>,
) -> Result<DensityMatrix> {
    sandwich_into(u_half.as_ref(), rho.mat().as_ref(), scratch, out);
    let mut mid = DensityMatrix::from_mat_unchecked(out.clone());
    channel.apply(&mut mid);
    sandwich_into(u_half.as_ref(), mid.mat().as_ref(), scratch, out);
    Ok(DensityMatrix::from_mat_unchecked(out.clone()))
}
