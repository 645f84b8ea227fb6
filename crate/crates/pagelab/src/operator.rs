//! Sparse Hermitian operators over the 2^L computational basis.
//!
//! Basis conventions used throughout the crate:
//! - bit `i` of a basis index corresponds to site `i`; site 0 is the leftmost
//!   site (farthest from the bath or the entanglement cut);
//! - σ^z is diagonal with eigenvalue +1 on bit value 0 and −1 on bit value 1;
//! - σ^x flips the bit.
//!
//! Every operator built here is a real linear combination of products of
//! σ^x and σ^z factors in which no flipped bit also carries a σ^z factor, so
//! each matrix element is real and the operator is real-symmetric. The
//! representation stores a merged diagonal plus one `FlipTerm` per off-diagonal
//! Pauli string, which keeps the memory footprint at O(dim) even for 24-site
//! Hamiltonians and makes `apply` a cache-friendly streaming kernel.

use crate::error::{PagelabError, Result};
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::io::{Read, Write};
use std::sync::OnceLock;

/// Diagonal Pauli string: `coeff * Π_{i in z_mask} σ_i^z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagTerm {
    pub z_mask: u64,
    pub coeff: f64,
}

/// Off-diagonal Pauli string: flips the bits in `flip_mask` and multiplies by
/// `coeff * (−1)^popcount(n & z_mask)`. `z_mask` and `flip_mask` are disjoint,
/// which makes the matrix element symmetric between `n` and `n ^ flip_mask`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipTerm {
    pub flip_mask: u64,
    pub z_mask: u64,
    pub coeff: f64,
}

/// Compressed sparse representation of a Hermitian operator on `dim = 2^L`
/// basis states.
#[derive(Debug)]
pub struct SparseHermitianOperator {
    dim: usize,
    n_sites: usize,
    /// Contiguous site range `[lo, hi)` the operator acts on nontrivially.
    site_support: (usize, usize),
    diag_terms: Vec<DiagTerm>,
    flip_terms: Vec<FlipTerm>,
    /// Merged diagonal, materialized on first use.
    diag: OnceLock<Vec<f64>>,
}

fn parity_sign(n: u64, mask: u64) -> f64 {
    if (n & mask).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SparseHermitianOperator {
    /// Assemble an operator from Pauli strings. Fails if a flip term has
    /// overlapping flip and z masks (which would break Hermiticity) or if a
    /// mask addresses a site outside the register.
    ///
    /// Terms are canonicalized: sorted by mask and merged, so operators with
    /// the same Pauli content produce bit-identical matrices regardless of
    /// the order terms were supplied in. Sums of operators that partition a
    /// Hamiltonian therefore reproduce it exactly.
    pub fn from_terms(
        n_sites: usize,
        diag_terms: Vec<DiagTerm>,
        flip_terms: Vec<FlipTerm>,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(PagelabError::InvalidSize("operator on zero sites".into()));
        }
        if n_sites >= usize::BITS as usize {
            return Err(PagelabError::InvalidSize(format!(
                "operator on {n_sites} sites exceeds the addressable register"
            )));
        }
        let full: u64 = if n_sites == 64 { !0 } else { (1u64 << n_sites) - 1 };
        let mut support_mask = 0u64;
        for t in &diag_terms {
            if t.z_mask & !full != 0 {
                return Err(PagelabError::InvalidSize("z mask outside register".into()));
            }
            support_mask |= t.z_mask;
        }
        for t in &flip_terms {
            if (t.z_mask | t.flip_mask) & !full != 0 {
                return Err(PagelabError::InvalidSize("mask outside register".into()));
            }
            if t.flip_mask & t.z_mask != 0 {
                return Err(PagelabError::Numerical(
                    "flip term with overlapping flip and z masks is not symmetric".into(),
                ));
            }
            if t.flip_mask == 0 {
                return Err(PagelabError::Numerical(
                    "flip term without flipped bits; use a diagonal term".into(),
                ));
            }
            support_mask |= t.z_mask | t.flip_mask;
        }
        let site_support = if support_mask == 0 {
            (0, 0)
        } else {
            (
                support_mask.trailing_zeros() as usize,
                64 - support_mask.leading_zeros() as usize,
            )
        };
        let mut diag_terms = diag_terms;
        diag_terms.sort_by(|a, b| (a.z_mask, a.coeff.to_bits()).cmp(&(b.z_mask, b.coeff.to_bits())));
        let mut merged_diag: Vec<DiagTerm> = Vec::with_capacity(diag_terms.len());
        for t in diag_terms {
            match merged_diag.last_mut() {
                Some(last) if last.z_mask == t.z_mask => last.coeff += t.coeff,
                _ => merged_diag.push(t),
            }
        }
        merged_diag.retain(|t| t.coeff != 0.0);
        let mut flip_terms = flip_terms;
        flip_terms.sort_by(|a, b| {
            (a.flip_mask, a.z_mask, a.coeff.to_bits()).cmp(&(b.flip_mask, b.z_mask, b.coeff.to_bits()))
        });
        let mut merged_flip: Vec<FlipTerm> = Vec::with_capacity(flip_terms.len());
        for t in flip_terms {
            match merged_flip.last_mut() {
                Some(last) if last.flip_mask == t.flip_mask && last.z_mask == t.z_mask => {
                    last.coeff += t.coeff
                }
                _ => merged_flip.push(t),
            }
        }
        merged_flip.retain(|t| t.coeff != 0.0);
        Ok(SparseHermitianOperator {
            dim: 1usize << n_sites,
            n_sites,
            site_support,
            diag_terms: merged_diag,
            flip_terms: merged_flip,
            diag: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Site range `[lo, hi)` with nontrivial action.
    pub fn site_support(&self) -> (usize, usize) {
        self.site_support
    }

    pub fn diag_terms(&self) -> &[DiagTerm] {
        &self.diag_terms
    }

    pub fn flip_terms(&self) -> &[FlipTerm] {
        &self.flip_terms
    }

    /// Negated copy (−A), used e.g. to get ceiling states from a ground-state
    /// solver.
    pub fn negated(&self) -> Self {
        let diag_terms = self
            .diag_terms
            .iter()
            .map(|t| DiagTerm { z_mask: t.z_mask, coeff: -t.coeff })
            .collect();
        let flip_terms = self
            .flip_terms
            .iter()
            .map(|t| FlipTerm { flip_mask: t.flip_mask, z_mask: t.z_mask, coeff: -t.coeff })
            .collect();
        SparseHermitianOperator {
            dim: self.dim,
            n_sites: self.n_sites,
            site_support: self.site_support,
            diag_terms,
            flip_terms,
            diag: OnceLock::new(),
        }
    }

    /// Sum of operators on the same register.
    pub fn sum(ops: &[&SparseHermitianOperator]) -> Result<Self> {
        let n_sites = ops
            .first()
            .ok_or_else(|| PagelabError::InvalidSize("empty operator sum".into()))?
            .n_sites;
        let mut diag_terms = Vec::new();
        let mut flip_terms = Vec::new();
        for op in ops {
            if op.n_sites != n_sites {
                return Err(PagelabError::DimensionMismatch(
                    "operator sum over mixed registers".into(),
                ));
            }
            diag_terms.extend_from_slice(&op.diag_terms);
            flip_terms.extend_from_slice(&op.flip_terms);
        }
        SparseHermitianOperator::from_terms(n_sites, diag_terms, flip_terms)
    }

    /// The merged diagonal as a dense vector (cached after first call).
    pub fn diagonal(&self) -> &[f64] {
        self.diag.get_or_init(|| {
            let mut d = vec![0.0f64; self.dim];
            d.par_iter_mut().enumerate().for_each(|(n, v)| {
                let mut acc = 0.0;
                for t in &self.diag_terms {
                    acc += t.coeff * parity_sign(n as u64, t.z_mask);
                }
                *v = acc;
            });
            d
        })
    }

    /// Diagonal element for a single basis state, without materializing the
    /// full diagonal.
    pub fn diag_element(&self, n: usize) -> f64 {
        self.diag_terms
            .iter()
            .map(|t| t.coeff * parity_sign(n as u64, t.z_mask))
            .sum()
    }

    /// y = A x. Streams over the output index; off-diagonal terms read
    /// `x[n ^ flip]`, which for a fixed term is a constant-offset sequential
    /// stream the prefetcher handles well.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim, "apply: input dimension mismatch");
        assert_eq!(y.len(), self.dim, "apply: output dimension mismatch");
        let diag = self.diagonal();
        let flips = &self.flip_terms;
        let chunk = 1usize << 14;
        y.par_chunks_mut(chunk).enumerate().for_each(|(ci, yc)| {
            let base = ci * chunk;
            for (k, out) in yc.iter_mut().enumerate() {
                let n = base + k;
                let mut acc = x[n] * diag[n];
                for t in flips {
                    let v = t.coeff * parity_sign(n as u64, t.z_mask);
                    acc += x[n ^ t.flip_mask as usize] * v;
                }
                *out = acc;
            }
        });
    }

    /// Same kernel for real vectors (eigenstate searches).
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let diag = self.diagonal();
        let flips = &self.flip_terms;
        let chunk = 1usize << 14;
        y.par_chunks_mut(chunk).enumerate().for_each(|(ci, yc)| {
            let base = ci * chunk;
            for (k, out) in yc.iter_mut().enumerate() {
                let n = base + k;
                let mut acc = x[n] * diag[n];
                for t in flips {
                    acc += x[n ^ t.flip_mask as usize] * t.coeff * parity_sign(n as u64, t.z_mask);
                }
                *out = acc;
            }
        });
    }

    /// ⟨ψ|A|ψ⟩ for a normalized state.
    pub fn expectation_state(&self, psi: &[C64]) -> f64 {
        assert_eq!(psi.len(), self.dim);
        let diag = self.diagonal();
        let chunk = 1usize << 14;
        psi.par_chunks(chunk)
            .enumerate()
            .map(|(ci, xs)| {
                let base = ci * chunk;
                let mut acc = 0.0f64;
                for (k, &a) in xs.iter().enumerate() {
                    let n = base + k;
                    let mut hn = a * diag[n];
                    for t in &self.flip_terms {
                        hn += psi[n ^ t.flip_mask as usize]
                            * (t.coeff * parity_sign(n as u64, t.z_mask));
                    }
                    acc += (a.conj() * hn).re;
                }
                acc
            })
            .sum()
    }

    /// Tr(A ρ) for a density matrix given column-major entries.
    pub fn expectation_dense(&self, rho: faer::MatRef<'_, C64>) -> f64 {
        assert_eq!(rho.nrows(), self.dim);
        assert_eq!(rho.ncols(), self.dim);
        let mut acc = C64::new(0.0, 0.0);
        let diag = self.diagonal();
        for n in 0..self.dim {
            acc += rho[(n, n)] * diag[n];
        }
        // Tr(A ρ) = Σ_{n,m} A[n,m] ρ[m,n]; each flip term touches one element
        // per row.
        for t in &self.flip_terms {
            for n in 0..self.dim {
                let m = n ^ t.flip_mask as usize;
                acc += rho[(m, n)] * (t.coeff * parity_sign(n as u64, t.z_mask));
            }
        }
        acc.re
    }

    /// Dense complex materialization (column-major). Intended for small dims.
    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.dim, self.dim);
        let diag = self.diagonal();
        for n in 0..self.dim {
            m[(n, n)] = C64::new(diag[n], 0.0);
        }
        for t in &self.flip_terms {
            for n in 0..self.dim {
                let v = t.coeff * parity_sign(n as u64, t.z_mask);
                m[(n ^ t.flip_mask as usize, n)] += C64::new(v, 0.0);
            }
        }
        m
    }

    /// Dense real materialization; valid because every stored term is real.
    pub fn to_dense_real(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        let diag = self.diagonal();
        for n in 0..self.dim {
            m[(n, n)] = diag[n];
        }
        for t in &self.flip_terms {
            for n in 0..self.dim {
                m[(n ^ t.flip_mask as usize, n)] += t.coeff * parity_sign(n as u64, t.z_mask);
            }
        }
        m
    }

    /// Number of stored nonzero entries after merging diagonals (zero diagonal
    /// elements are still counted; the bound in the module contract is an
    /// upper bound).
    pub fn entry_count(&self) -> u64 {
        self.dim as u64 * (1 + self.flip_terms.len() as u64)
    }

    /// Stream the explicit (row, col, value) entries: merged diagonal first,
    /// then one entry per flip term per column.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64, C64)> + '_ {
        let diag = self.diagonal();
        let d = (0..self.dim).map(move |n| (n as u64, n as u64, C64::new(diag[n], 0.0)));
        let f = self.flip_terms.iter().flat_map(move |t| {
            (0..self.dim).map(move |n| {
                let v = t.coeff * parity_sign(n as u64, t.z_mask);
                ((n ^ t.flip_mask as usize) as u64, n as u64, C64::new(v, 0.0))
            })
        });
        d.chain(f)
    }

    /// Write in the PGL1 binary format: magic "PGL1", little-endian u64 dim,
    /// u64 entry count, then (row: u64, col: u64, re: f64, im: f64) records.
    pub fn write_pgl1<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"PGL1")?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&self.entry_count().to_le_bytes())?;
        for (r, c, v) in self.entries() {
            w.write_all(&r.to_le_bytes())?;
            w.write_all(&c.to_le_bytes())?;
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Entry list read back from a PGL1 stream.
pub struct Pgl1Contents {
    pub dim: u64,
    pub entries: Vec<(u64, u64, C64)>,
}

impl Pgl1Contents {
    /// Dense materialization for verification and interop.
    pub fn to_dense(&self) -> Mat<C64> {
        let d = self.dim as usize;
        let mut m = Mat::<C64>::zeros(d, d);
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] += v;
        }
        m
    }
}

pub fn read_pgl1<R: Read>(r: &mut R) -> Result<Pgl1Contents> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != b"PGL1" {
        return Err(PagelabError::Format("bad magic; expected PGL1".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let dim = u64::from_le_bytes(b8);
    if !dim.is_power_of_two() {
        return Err(PagelabError::Format(format!("dim {dim} is not a power of 2")));
    }
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8);
    let mut entries = Vec::with_capacity(count as usize);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        let row = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let col = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        if row >= dim || col >= dim {
            return Err(PagelabError::Format("entry index out of range".into()));
        }
        entries.push((row, col, C64::new(re, im)));
    }
    Ok(Pgl1Contents { dim, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx(site: usize, coeff: f64) -> FlipTerm {
        FlipTerm { flip_mask: 1 << site, z_mask: 0, coeff }
    }

    fn sz(site: usize, coeff: f64) -> DiagTerm {
        DiagTerm { z_mask: 1 << site, coeff }
    }

    #[test]
    fn single_site_matrix() {
        // g σ^x + h σ^z on one site: [[h, g], [g, -h]].
        let op =
            SparseHermitianOperator::from_terms(1, vec![sz(0, 0.809)], vec![sx(0, 0.905)]).unwrap();
        let m = op.to_dense();
        assert_eq!(m[(0, 0)], C64::new(0.809, 0.0));
        assert_eq!(m[(1, 1)], C64::new(-0.809, 0.0));
        assert_eq!(m[(0, 1)], C64::new(0.905, 0.0));
        assert_eq!(m[(1, 0)], C64::new(0.905, 0.0));
    }

    #[test]
    fn dense_is_hermitian() {
        let op = SparseHermitianOperator::from_terms(
            3,
            vec![sz(0, 0.7), sz(2, -0.2), DiagTerm { z_mask: 0b011, coeff: 1.3 }],
            vec![sx(1, 0.4), FlipTerm { flip_mask: 0b100, z_mask: 0b010, coeff: -0.9 }],
        )
        .unwrap();
        let m = op.to_dense();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m[(i, j)], m[(j, i)].conj());
            }
        }
    }

    #[test]
    fn apply_matches_dense() {
        let op = SparseHermitianOperator::from_terms(
            4,
            vec![sz(0, 0.3), DiagTerm { z_mask: 0b1100, coeff: -0.8 }],
            vec![sx(2, 1.1), FlipTerm { flip_mask: 0b0010, z_mask: 0b0001, coeff: 0.5 }],
        )
        .unwrap();
        let dense = op.to_dense();
        let x: Vec<C64> =
            (0..16).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut y = vec![C64::new(0.0, 0.0); 16];
        op.apply(&x, &mut y);
        for r in 0..16 {
            let mut expect = C64::new(0.0, 0.0);
            for c in 0..16 {
                expect += dense[(r, c)] * x[c];
            }
            assert!((expect - y[r]).norm() < 1e-13);
        }
    }

    #[test]
    fn overlapping_masks_rejected() {
        let bad = SparseHermitianOperator::from_terms(
            2,
            vec![],
            vec![FlipTerm { flip_mask: 0b01, z_mask: 0b01, coeff: 1.0 }],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn pgl1_round_trip() {
        let op = SparseHermitianOperator::from_terms(
            2,
            vec![sz(0, 0.809), sz(1, 0.809), DiagTerm { z_mask: 0b11, coeff: 1.0 }],
            vec![sx(0, 0.905), sx(1, 0.905)],
        )
        .unwrap();
        let mut buf = Vec::new();
        op.write_pgl1(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"PGL1");
        let back = read_pgl1(&mut buf.as_slice()).unwrap();
        assert_eq!(back.dim, 4);
        let a = op.to_dense();
        let b = back.to_dense();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a[(i, j)], b[(i, j)]);
            }
        }
    }

    #[test]
    fn site_support_tracks_masks() {
        let op = SparseHermitianOperator::from_terms(5, vec![sz(3, 1.0)], vec![sx(1, 0.2)]).unwrap();
        assert_eq!(op.site_support(), (1, 4));
    }
}
