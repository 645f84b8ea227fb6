//! Entropy and spectrum reconstruction from fitted profiles.

use super::ansatz::{build_ansatz_density, BetaProfile};
use crate::analysis::{entanglement_snapshot, EntanglementSnapshot, SnapshotOptions};
use crate::error::Result;
use crate::params::ModelParams;

/// Build the ansatz density for each profile and emit its entanglement
/// snapshot, schema-compatible with the direct pipeline so the two series
/// overlay.
pub fn reconstruct_entropies(
    profiles: &[BetaProfile],
    params: &ModelParams,
    alphas: &[f64],
) -> Result<Vec<EntanglementSnapshot>> {
    let opts = SnapshotOptions::default();
    profiles
        .iter()
        .map(|p| {
            let rho = build_ansatz_density(p, params)?;
            entanglement_snapshot(&rho, p.time, alphas, &opts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::fit::{fit_beta_profile, FitOptions};

    #[test]
    fn zero_profiles_reconstruct_flat_entropy() {
        let params = ModelParams::new(3, 0);
        let profiles: Vec<BetaProfile> =
            (0..4).map(|i| BetaProfile::zeros(3, false, i as f64)).collect();
        let snaps = reconstruct_entropies(&profiles, &params, &[1.0, 2.0]).unwrap();
        let expect = 3.0 * std::f64::consts::LN_2;
        for s in &snaps {
            assert!((s.entropy(1.0).unwrap() - expect).abs() < 1e-12);
            assert!((s.entropy(2.0).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_gibbs_round_trip_reconstruction() {
        let params = ModelParams::new(3, 0);
        let truth = BetaProfile::uniform(3, 0.45, 1.0);
        let rho = build_ansatz_density(&truth, &params).unwrap();
        let direct = entanglement_snapshot(
            &rho,
            1.0,
            &[1.0, f64::INFINITY],
            &SnapshotOptions::default(),
        )
        .unwrap();
        let fitted =
            fit_beta_profile(&rho, &params, &FitOptions::default(), None, 1.0).unwrap();
        let recon = reconstruct_entropies(&[fitted], &params, &[1.0, f64::INFINITY]).unwrap();
        for alpha in [1.0, f64::INFINITY] {
            let a = direct.entropy(alpha).unwrap();
            let b = recon[0].entropy(alpha).unwrap();
            assert!((a - b).abs() < 1e-8, "alpha {alpha}: {a} vs {b}");
        }
    }
}
