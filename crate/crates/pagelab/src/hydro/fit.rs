//! Fitting the ansatz to evolved states by observable matching.
//!
//! The objective matches one expectation value per free parameter — the
//! per-site field terms g σ_i^x + h σ_i^z, the per-bond terms
//! J σ_i^z σ_{i+1}^z, and (with currents) σ_i^z σ_{i+1}^x — and minimizes the
//! squared residuals with Nelder-Mead. The h_i-based residual used in the
//! loss-function insets is reported alongside.

use super::ansatz::{ansatz_generator, BetaProfile};
use crate::dense::gibbs_of_real_symmetric;
use crate::error::Result;
use crate::operator::{DiagTerm, FlipTerm, SparseHermitianOperator};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::params::ModelParams;
use crate::state::DensityMatrix;
use faer::{Mat, MatRef};

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub nm: NelderMeadOptions,
    pub with_currents: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { nm: NelderMeadOptions::default(), with_currents: true }
    }
}

/// The observable set, one operator per ansatz parameter, plus the local
/// terms h_i for the reported comparison loss.
struct ObservableSet {
    ops: Vec<Mat<f64>>,
    h_local: Vec<Mat<f64>>,
    m: usize,
    with_currents: bool,
}

impl ObservableSet {
    fn new(params: &ModelParams, with_currents: bool) -> Result<Self> {
        let m = params.m;
        let mut ops = Vec::new();
        for i in 0..m {
            let field = SparseHermitianOperator::from_terms(
                m,
                vec![DiagTerm { z_mask: 1 << i, coeff: params.h }],
                vec![FlipTerm { flip_mask: 1 << i, z_mask: 0, coeff: params.g }],
            )?;
            ops.push(field.to_dense_real());
        }
        for i in 0..m - 1 {
            let bond = SparseHermitianOperator::from_terms(
                m,
                vec![DiagTerm { z_mask: 0b11 << i, coeff: params.j }],
                vec![],
            )?;
            ops.push(bond.to_dense_real());
        }
        if with_currents {
            for i in 0..m - 1 {
                let current = SparseHermitianOperator::from_terms(
                    m,
                    vec![],
                    vec![FlipTerm { flip_mask: 1 << (i + 1), z_mask: 1 << i, coeff: 1.0 }],
                )?;
                ops.push(current.to_dense_real());
            }
        }
        let h_local = crate::lattice::build_local_terms(params, m)?
            .full
            .iter()
            .map(|op| op.to_dense_real())
            .collect();
        Ok(ObservableSet { ops, h_local, m, with_currents })
    }

    fn n_params(&self) -> usize {
        self.ops.len()
    }
}

/// Tr(O ρ) for real symmetric O against a complex Hermitian ρ (the imaginary
/// parts cancel).
fn expect_complex(op: MatRef<'_, f64>, rho: &DensityMatrix) -> f64 {
    let n = op.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += op[(i, j)] * rho.mat()[(j, i)].re;
        }
    }
    acc
}

fn expect_real(op: MatRef<'_, f64>, rho: MatRef<'_, f64>) -> f64 {
    let n = op.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += op[(i, j)] * rho[(j, i)];
        }
    }
    acc
}

/// Assemble K = Σ θ_j O_j densely and return the Gibbs state exp(−K)/Z.
fn gibbs_for(theta: &[f64], obs: &ObservableSet) -> Mat<f64> {
    let n = 1usize << obs.m;
    let mut k = Mat::<f64>::zeros(n, n);
    for (t, op) in theta.iter().zip(&obs.ops) {
        if *t == 0.0 {
            continue;
        }
        for j in 0..n {
            for i in 0..n {
                k[(i, j)] += t * op[(i, j)];
            }
        }
    }
    gibbs_of_real_symmetric(k.as_ref()).expect("gibbs of real symmetric matrix")
}

/// Fit the ansatz parameters to one evolved state. `warm_start` seeds the
/// optimizer; without it the descent starts from the negative-temperature
/// profile β ≡ −1 appropriate for ceiling-state initial conditions.
pub fn fit_beta_profile(
    rho_t: &DensityMatrix,
    params: &ModelParams,
    opts: &FitOptions,
    warm_start: Option<&BetaProfile>,
    time: f64,
) -> Result<BetaProfile> {
    let obs = ObservableSet::new(params, opts.with_currents)?;
    let targets: Vec<f64> = obs.ops.iter().map(|op| expect_complex(op.as_ref(), rho_t)).collect();
    let theta0: Vec<f64> = match warm_start {
        Some(p) => {
            let mut t = p.to_params();
            t.resize(obs.n_params(), 0.0);
            t
        }
        None => {
            let mut t = vec![-1.0; 2 * params.m - 1];
            t.resize(obs.n_params(), 0.0);
            t
        }
    };
    let mut objective = |theta: &[f64]| -> f64 {
        let rho = gibbs_for(theta, &obs);
        obs.ops
            .iter()
            .zip(&targets)
            .map(|(op, &y)| {
                let d = expect_real(op.as_ref(), rho.as_ref()) - y;
                d * d
            })
            .sum()
    };
    let result = nelder_mead(&mut objective, &theta0, &opts.nm);
    let mut profile = BetaProfile::from_params(&result.x, params.m, opts.with_currents, time);
    profile.loss = result.loss;
    profile.converged = result.converged;
    // the h_i-based residual of the fitted state, for the loss-inset output
    let rho_fit = gibbs_for(&result.x, &obs);
    profile.loss_hi = obs
        .h_local
        .iter()
        .map(|h| {
            let d = expect_complex(h.as_ref(), rho_t) - expect_real(h.as_ref(), rho_fit.as_ref());
            d * d
        })
        .sum();
    Ok(profile)
}

/// Fit every snapshot of a trajectory, warm-starting each fit from the
/// previous profile.
pub fn fit_trajectory(
    series: &[(f64, DensityMatrix)],
    params: &ModelParams,
    opts: &FitOptions,
) -> Result<Vec<BetaProfile>> {
    let mut out: Vec<BetaProfile> = Vec::with_capacity(series.len());
    for (time, rho) in series {
        let warm = out.last();
        let profile = fit_beta_profile(rho, params, opts, warm, *time)?;
        out.push(profile);
    }
    Ok(out)
}
