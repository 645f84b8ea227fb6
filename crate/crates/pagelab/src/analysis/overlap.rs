//! Bhattacharyya eigenvector overlaps and the inverse participation ratio.

use super::snapshot::EntanglementSnapshot;
use crate::state::StateVector;
use faer::Mat;
use num_complex::Complex64 as C64;

/// Bhattacharyya coefficient Σ_x √(P(x) Q(x)) between the computational-basis
/// probability distributions P(x) = |v_x|², Q(x) = |w_x|².
pub fn bhattacharyya_overlap(v: &[C64], w: &[C64]) -> f64 {
    debug_assert_eq!(v.len(), w.len());
    v.iter().zip(w).map(|(a, b)| a.norm() * b.norm()).sum()
}

/// Symmetric matrix B(t_i, t_j) of Bhattacharyya overlaps between the
/// `level`-th eigenvectors of each snapshot pair. Snapshots missing that
/// level contribute zero rows.
pub fn overlap_matrix(snapshots: &[EntanglementSnapshot], level: usize) -> Mat<f64> {
    let t = snapshots.len();
    let mut out = Mat::<f64>::zeros(t, t);
    for i in 0..t {
        out[(i, i)] = 1.0;
        for j in 0..i {
            let b = match (snapshots[i].level(level), snapshots[j].level(level)) {
                (Some(a), Some(c)) => bhattacharyya_overlap(a, c),
                _ => 0.0,
            };
            out[(i, j)] = b;
            out[(j, i)] = b;
        }
    }
    out
}

/// IPR of a reference state in one instantaneous eigenbasis, with the full
/// |c_n| row for density plots.
#[derive(Debug, Clone)]
pub struct IprPoint {
    pub time: f64,
    pub ipr: f64,
    /// |⟨reference|ψ_n(t)⟩| by level index n.
    pub amplitudes: Vec<f64>,
}

/// IPR = Σ_n |⟨reference|ψ_n(t)⟩|⁴ per snapshot.
pub fn ipr_diagnostic(snapshots: &[EntanglementSnapshot], reference: &StateVector) -> Vec<IprPoint> {
    snapshots
        .iter()
        .map(|snap| {
            let amplitudes: Vec<f64> = (0..snap.stored_levels)
                .map(|n| {
                    let v = snap.level(n).expect("level within stored range");
                    reference
                        .amplitudes()
                        .iter()
                        .zip(v)
                        .map(|(r, x)| r.conj() * x)
                        .sum::<C64>()
                        .norm()
                })
                .collect();
            let ipr = amplitudes.iter().map(|c| c.powi(4)).sum();
            IprPoint { time: snap.time, ipr, amplitudes }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{entanglement_snapshot, SnapshotOptions};
    use crate::state::DensityMatrix;

    #[test]
    fn identical_distributions_overlap_one() {
        let v = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        assert!((bhattacharyya_overlap(&v, &v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disjoint_support_overlap_zero() {
        let v = vec![C64::ONE, C64::ZERO];
        let w = vec![C64::ZERO, C64::ONE];
        assert_eq!(bhattacharyya_overlap(&v, &w), 0.0);
    }

    #[test]
    fn half_half_versus_point_mass() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![C64::new(r, 0.0), C64::new(0.0, r)];
        let w = vec![C64::ONE, C64::ZERO];
        assert!((bhattacharyya_overlap(&v, &w) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_snapshot_matrix() {
        let rho = DensityMatrix::maximally_mixed(4);
        let snap = entanglement_snapshot(&rho, 0.0, &[1.0], &SnapshotOptions::default()).unwrap();
        let m = overlap_matrix(&[snap], 0);
        assert_eq!(m.nrows(), 1);
        assert!((m[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stationary_series_gives_all_ones() {
        let mut mat = faer::Mat::<C64>::zeros(4, 4);
        for (i, p) in [0.4, 0.3, 0.2, 0.1].into_iter().enumerate() {
            mat[(i, i)] = C64::new(p, 0.0);
        }
        let rho = DensityMatrix::from_mat_unchecked(mat);
        let snaps: Vec<_> = (0..4)
            .map(|k| {
                entanglement_snapshot(&rho, k as f64, &[1.0], &SnapshotOptions::default()).unwrap()
            })
            .collect();
        let m = overlap_matrix(&snaps, 0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((m[(i, j)] - 1.0).abs() < 1e-12, "({i},{j}) = {}", m[(i, j)]);
            }
        }
    }

    #[test]
    fn ipr_on_eigenvector_is_one() {
        let mut mat = faer::Mat::<C64>::zeros(4, 4);
        for (i, p) in [0.4, 0.3, 0.2, 0.1].into_iter().enumerate() {
            mat[(i, i)] = C64::new(p, 0.0);
        }
        let rho = DensityMatrix::from_mat_unchecked(mat);
        let snap = entanglement_snapshot(&rho, 0.0, &[1.0], &SnapshotOptions::default()).unwrap();
        let top = StateVector::new(snap.level(0).unwrap().to_vec()).unwrap();
        let pts = ipr_diagnostic(std::slice::from_ref(&snap), &top);
        assert!((pts[0].ipr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ipr_uniform_spread_is_inverse_count() {
        // reference spread evenly over the 4 eigenvectors of a diagonal ρ
        let mut mat = faer::Mat::<C64>::zeros(4, 4);
        for (i, p) in [0.4, 0.3, 0.2, 0.1].into_iter().enumerate() {
            mat[(i, i)] = C64::new(p, 0.0);
        }
        let rho = DensityMatrix::from_mat_unchecked(mat);
        let snap = entanglement_snapshot(&rho, 0.0, &[1.0], &SnapshotOptions::default()).unwrap();
        let mut refv = vec![C64::ZERO; 4];
        for n in 0..4 {
            let v = snap.level(n).unwrap();
            for (r, x) in refv.iter_mut().zip(v) {
                *r += x * 0.5;
            }
        }
        let reference = StateVector::new(refv).unwrap();
        let pts = ipr_diagnostic(std::slice::from_ref(&snap), &reference);
        assert!((pts[0].ipr - 0.25).abs() < 1e-12);
    }
}
