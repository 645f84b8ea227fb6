//! The locally-thermal ansatz for the entanglement Hamiltonian: per-site and
//! per-bond inverse temperatures with optional current corrections, fitted by
//! matching local observables of the evolved state.

mod ansatz;
mod energy;
mod fit;
mod reconstruct;

pub use ansatz::{build_ansatz_density, BetaProfile};
pub use energy::{energy_profiles, EnergyProfile, EnergySource};
pub use fit::{fit_beta_profile, fit_trajectory, FitOptions};
pub use reconstruct::reconstruct_entropies;
