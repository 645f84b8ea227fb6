//! Pure states and subsystem density matrices.

use crate::error::{PagelabError, Result};
use faer::Mat;
use num_complex::Complex64 as C64;
use std::io::{Read, Write};

/// Normalized complex amplitude vector.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(PagelabError::InvalidSize(format!(
                "state dimension {} is not a power of 2",
                amplitudes.len()
            )));
        }
        let mut s = StateVector { amplitudes };
        let n = s.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(PagelabError::Numerical("state with zero or non-finite norm".into()));
        }
        s.renormalize();
        Ok(s)
    }

    /// Computational basis state |n⟩.
    pub fn basis_state(dim: usize, n: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[n] = C64::new(1.0, 0.0);
        StateVector { amplitudes }
    }

    /// Product state ψ = left ⊗ right with the left factor on the low bits.
    pub fn product(left: &StateVector, right: &StateVector) -> Self {
        let dl = left.dim();
        let mut amplitudes = Vec::with_capacity(dl * right.dim());
        for &b in &right.amplitudes {
            for &a in &left.amplitudes {
                amplitudes.push(a * b);
            }
        }
        StateVector { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn renormalize(&mut self) -> f64 {
        let n = self.norm();
        let inv = 1.0 / n;
        for a in &mut self.amplitudes {
            *a *= inv;
        }
        n
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Fix the global phase so the first amplitude above `tol` is real
    /// positive. Makes eigenvector output reproducible.
    pub fn fix_phase(&mut self, tol: f64) {
        if let Some(a) = self.amplitudes.iter().find(|a| a.norm() > tol) {
            let phase = a / a.norm();
            let corr = phase.conj();
            for v in &mut self.amplitudes {
                *v *= corr;
            }
        }
    }

    /// |ψ⟩⟨ψ|.
    pub fn to_density_matrix(&self) -> DensityMatrix {
        let d = self.dim();
        let m = Mat::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix::from_mat_unchecked(m)
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix for a subsystem.
///
/// Construction does not re-validate on every operation; evolution code calls
/// [`DensityMatrix::check_invariants`] at step boundaries.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Mat<C64>,
}

impl DensityMatrix {
    pub fn from_mat_unchecked(mat: Mat<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        DensityMatrix { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = C64::new(1.0 / dim as f64, 0.0);
        DensityMatrix { mat: Mat::from_fn(dim, dim, |i, j| if i == j { p } else { C64::ZERO }) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn mat_mut(&mut self) -> &mut Mat<C64> {
        &mut self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        // ρ Hermitian: Tr ρ² = Σ |ρ_ij|².
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                acc += self.mat[(i, j)].norm_sqr();
            }
        }
        acc
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..=j {
                let d = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Trace, Hermiticity and (optionally) positivity checks. Positivity is
    /// only asserted when the caller supplies the precomputed minimum
    /// eigenvalue, since that requires a full decomposition.
    pub fn check_invariants(&self, min_eigenvalue: Option<f64>) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(PagelabError::Numerical(format!(
                "density matrix trace {tr} deviates from 1"
            )));
        }
        let herm = self.hermiticity_defect();
        if herm > 1e-10 {
            return Err(PagelabError::Numerical(format!(
                "density matrix Hermiticity defect {herm:.3e}"
            )));
        }
        if let Some(lmin) = min_eigenvalue {
            if lmin < -1e-6 {
                return Err(PagelabError::PositivityViolation(lmin));
            }
        }
        Ok(())
    }

    /// Tr(ρ A) for dense A.
    pub fn expectation_mat(&self, a: faer::MatRef<'_, C64>) -> C64 {
        let d = self.dim();
        let mut acc = C64::ZERO;
        for j in 0..d {
            for i in 0..d {
                acc += self.mat[(i, j)] * a[(j, i)];
            }
        }
        acc
    }

    /// Write in the PGS1 snapshot format: magic "PGS1", little-endian f64
    /// time, u64 dim, then row-major (re, im) f64 pairs.
    pub fn write_pgs1<W: Write>(&self, time: f64, w: &mut W) -> Result<()> {
        write_pgs1_header(w, time, self.dim() as u64)?;
        let mut buf = Vec::with_capacity(self.dim() * 16);
        for i in 0..self.dim() {
            buf.clear();
            for j in 0..self.dim() {
                let v = self.mat[(i, j)];
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_pgs1<R: Read>(r: &mut R) -> Result<(f64, Self)> {
        let (time, dim) = read_pgs1_header(r)?;
        let dim = dim as usize;
        let mut mat = Mat::<C64>::zeros(dim, dim);
        let mut row = vec![0u8; dim * 16];
        for i in 0..dim {
            r.read_exact(&mut row)?;
            for j in 0..dim {
                let re = f64::from_le_bytes(row[j * 16..j * 16 + 8].try_into().unwrap());
                let im = f64::from_le_bytes(row[j * 16 + 8..j * 16 + 16].try_into().unwrap());
                mat[(i, j)] = C64::new(re, im);
            }
        }
        Ok((time, DensityMatrix { mat }))
    }
}

impl StateVector {
    /// Pure states reuse the PGS1 layout with `dim` complex entries instead
    /// of `dim²` (used for full-system resume checkpoints).
    pub fn write_pgs1<W: Write>(&self, time: f64, w: &mut W) -> Result<()> {
        write_pgs1_header(w, time, self.dim() as u64)?;
        let mut buf = Vec::with_capacity(1 << 16);
        for a in &self.amplitudes {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
            if buf.len() >= (1 << 16) {
                w.write_all(&buf)?;
                buf.clear();
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_pgs1<R: Read>(r: &mut R) -> Result<(f64, Self)> {
        let (time, dim) = read_pgs1_header(r)?;
        let mut amplitudes = Vec::with_capacity(dim as usize);
        let mut b = [0u8; 16];
        for _ in 0..dim {
            r.read_exact(&mut b)?;
            amplitudes.push(C64::new(
                f64::from_le_bytes(b[..8].try_into().unwrap()),
                f64::from_le_bytes(b[8..].try_into().unwrap()),
            ));
        }
        Ok((time, StateVector { amplitudes }))
    }
}

fn write_pgs1_header<W: Write>(w: &mut W, time: f64, dim: u64) -> Result<()> {
    w.write_all(b"PGS1")?;
    w.write_all(&time.to_le_bytes())?;
    w.write_all(&dim.to_le_bytes())?;
    Ok(())
}

fn read_pgs1_header<R: Read>(r: &mut R) -> Result<(f64, u64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != b"PGS1" {
        return Err(PagelabError::Format("bad magic; expected PGS1".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let time = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let dim = u64::from_le_bytes(b8);
    if !dim.is_power_of_two() {
        return Err(PagelabError::Format(format!("dim {dim} is not a power of 2")));
    }
    Ok((time, dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_layout() {
        // left on low bits: ψ[a + dl*c] = left[a] * right[c]
        let l = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]).unwrap();
        let r = StateVector::new(vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)]).unwrap();
        let p = StateVector::product(&l, &r);
        let la = l.amplitudes();
        let ra = r.amplitudes();
        for c in 0..2 {
            for a in 0..2 {
                assert_eq!(p.amplitudes()[a + 2 * c], la[a] * ra[c]);
            }
        }
    }

    #[test]
    fn phase_fix_makes_leading_amplitude_positive() {
        let mut s =
            StateVector::new(vec![C64::new(0.0, -0.6), C64::new(0.8, 0.0)]).unwrap();
        s.fix_phase(1e-12);
        assert!(s.amplitudes()[0].im.abs() < 1e-15);
        assert!(s.amplitudes()[0].re > 0.0);
        assert!((s.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn density_invariants_on_pure_state() {
        let s = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let rho = s.to_density_matrix();
        rho.check_invariants(Some(0.0)).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgs1_round_trip_matrix_and_vector() {
        let s = StateVector::new(vec![
            C64::new(0.5, 0.1),
            C64::new(-0.3, 0.2),
            C64::new(0.0, 0.7),
            C64::new(0.2, -0.2),
        ])
        .unwrap();
        let mut buf = Vec::new();
        s.write_pgs1(3.25, &mut buf).unwrap();
        let (t, s2) = StateVector::read_pgs1(&mut buf.as_slice()).unwrap();
        assert_eq!(t, 3.25);
        assert_eq!(s.amplitudes(), s2.amplitudes());

        let rho = s.to_density_matrix();
        let mut buf = Vec::new();
        rho.write_pgs1(1.5, &mut buf).unwrap();
        let (t, rho2) = DensityMatrix::read_pgs1(&mut buf.as_slice()).unwrap();
        assert_eq!(t, 1.5);
        assert_eq!(rho.mat()[(2, 1)], rho2.mat()[(2, 1)]);
    }
}
