//! Desk-scale simulator for the entanglement dynamics of a hot spin-chain
//! subsystem coupled to a cold bath.
//!
//! Two evolution backends are provided: closed-system Krylov propagation of
//! the full chain, and a Trotterized Kraus simulation of a Lindblad master
//! equation in which the bath acts on the two rightmost subsystem sites.
//! On top of them sit entanglement-spectrum analytics (Rényi entropies,
//! avoided-crossing detection with re-simulation refinement, min-gap size
//! scaling, Bhattacharyya eigenvector overlaps, IPR metastability) and a
//! locally-thermal ansatz for the entanglement Hamiltonian with per-site and
//! per-bond inverse temperatures plus optional current corrections.
//!
//! The `pagelab` binary drives configuration-based scenarios; see the crate
//! README for the CLI and the on-disk formats.

pub mod analysis;
pub mod dense;
pub mod error;
pub mod hydro;
pub mod krylov;
pub mod lanczos;
pub mod lattice;
pub mod lindblad;
pub mod operator;
pub mod params;
pub mod runner;
pub mod state;
pub mod trajectory;

mod optim;

pub use error::{PagelabError, Result};
pub use params::ModelParams;

/// Cap the global thread pools (rayon and faer) to `n` threads. Reads the
/// `PAGELAB_THREADS` environment variable when `n` is `None`. Call once,
/// before any parallel work.
pub fn configure_threads(n: Option<usize>) {
    let n = n.or_else(|| {
        std::env::var("PAGELAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok())
    });
    if let Some(n) = n {
        let n = n.max(1);
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        faer::set_global_parallelism(if n == 1 {
            faer::Par::Seq
        } else {
            faer::Par::rayon(n)
        });
    }
}
