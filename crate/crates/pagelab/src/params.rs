//! Model parameters for the mixed-field Ising chain and its bath coupling.

use crate::error::{PagelabError, Result};
use serde::{Deserialize, Serialize};

/// Couplings and sizes for one simulation setup.
///
/// `m` counts the subsystem sites, `n` the bath sites (`n = 0` selects
/// Lindblad-only runs, where the bath is Markovian). Site 0 is the leftmost
/// site, farthest from the bath; the dissipator acts on the two rightmost
/// subsystem sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Transverse field strength.
    pub g: f64,
    /// Longitudinal field strength.
    pub h: f64,
    /// Nearest-neighbour σ^z σ^z coupling.
    pub j: f64,
    /// Subsystem site count.
    pub m: usize,
    /// Bath site count (0 for Lindblad-only runs).
    pub n: usize,
    /// Dissipation rate γ.
    pub gamma: f64,
    /// Trotter step δt for the dissipative evolution.
    pub dt: f64,
}

pub const DEFAULT_G: f64 = 0.905;
pub const DEFAULT_H: f64 = 0.809;
pub const DEFAULT_J: f64 = 1.0;
pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_DT: f64 = 0.2;

impl ModelParams {
    /// Default couplings at the standard nonintegrable point, for a given
    /// subsystem/bath split.
    pub fn new(m: usize, n: usize) -> Self {
        ModelParams {
            g: DEFAULT_G,
            h: DEFAULT_H,
            j: DEFAULT_J,
            m,
            n,
            gamma: DEFAULT_GAMMA,
            dt: DEFAULT_DT,
        }
    }

    /// Total site count of the full system.
    pub fn total_sites(&self) -> usize {
        self.m + self.n
    }

    /// True when the bath is Markovian (no explicit bath sites).
    pub fn is_lindblad(&self) -> bool {
        self.n == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(PagelabError::InvalidSize(format!(
                "m = {} but the jump operators act on two sites; need m >= 2",
                self.m
            )));
        }
        if self.gamma < 0.0 {
            return Err(PagelabError::Config(format!("gamma = {} < 0", self.gamma)));
        }
        if !(self.dt > 0.0) {
            return Err(PagelabError::Config(format!("dt = {} <= 0", self.dt)));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::new(6, 18)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_standard_point() {
        let p = ModelParams::default();
        assert_eq!(p.g, 0.905);
        assert_eq!(p.h, 0.809);
        assert_eq!(p.j, 1.0);
        assert_eq!((p.m, p.n), (6, 18));
    }

    #[test]
    fn validation_rejects_small_subsystem() {
        let p = ModelParams::new(1, 0);
        assert!(p.validate().is_err());
        let mut p = ModelParams::new(4, 0);
        p.dt = 0.0;
        assert!(p.validate().is_err());
    }
}
