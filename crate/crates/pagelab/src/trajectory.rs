//! Time-evolution driver: runs either backend on a sampling grid and streams
//! the reduced density matrix of the subsystem at every sample.
//!
//! Full-system mode propagates the (M+N)-site pure state with the Krylov
//! propagator and partial-traces at sample times. Lindblad mode steps the
//! M-site density matrix with the Trotterized Kraus channel; the sampling
//! grid must land on Trotter step boundaries.

use crate::analysis::partial_trace;
use crate::error::{PagelabError, Result};
use crate::krylov::{KrylovConfig, KrylovPropagator};
use crate::lattice::{build_hamiltonian, build_jump_operators};
use crate::lindblad::{
    build_dissipative_kraus, lindblad_step, lindblad_step_strang, KrausChannel, UnitaryCache,
};
use crate::operator::SparseHermitianOperator;
use crate::params::ModelParams;
use crate::state::{DensityMatrix, StateVector};
use faer::Mat;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone)]
pub enum InitialState {
    /// (M+N)-site pure state for full-system runs.
    Pure(StateVector),
    /// M-site density matrix for Lindblad runs.
    Mixed(DensityMatrix),
}

/// Propagating state; checkpoints serialize it and resumes restore it.
#[derive(Debug, Clone)]
pub enum EngineState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub params: ModelParams,
    pub t_max: f64,
    pub sample_dt: f64,
    pub krylov: KrylovConfig,
    /// Strang splitting (half-unitary, channel, half-unitary) instead of the
    /// default first-order split.
    pub strang: bool,
    /// Include the ground-to-ground jump |0⟩⟨0| in the dissipator.
    pub include_ground_jump: bool,
}

impl TrajectoryConfig {
    pub fn new(params: ModelParams, t_max: f64, sample_dt: f64) -> Self {
        TrajectoryConfig {
            params,
            t_max,
            sample_dt,
            krylov: KrylovConfig::default(),
            strang: false,
            include_ground_jump: false,
        }
    }
}

/// One emitted sample.
pub struct Sample<'a> {
    pub index: usize,
    pub time: f64,
    pub rho_a: &'a DensityMatrix,
    /// ⟨H⟩ of the propagating state (full-system H or subsystem H).
    pub energy: f64,
    /// Borrow of the full propagating state, for checkpointing.
    pub state: &'a EngineState,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrajectoryReport {
    pub samples: usize,
    /// max |⟨H⟩(t) − ⟨H⟩(0)| over the run (full-system mode only).
    pub energy_drift: f64,
    pub norm_drift: f64,
    pub stopped_early: bool,
}

/// The evolution backend for one parameter set. Also used by the crossing
/// refinement to re-run short stretches from checkpoints; `evolve_to` accepts
/// arbitrary target times, finishing with a fractional Trotter substep in
/// Lindblad mode.
pub struct Engine {
    params: ModelParams,
    mode: Mode,
}

enum Mode {
    Full {
        h_full: SparseHermitianOperator,
        propagator: KrylovPropagator,
    },
    Lindblad {
        h_sub: SparseHermitianOperator,
        cache: UnitaryCache,
        channel: KrausChannel,
        u_half: Option<Mat<C64>>,
        strang: bool,
        include_ground_jump: bool,
        scratch: Mat<C64>,
        out: Mat<C64>,
    },
}

impl Engine {
    pub fn new(cfg: &TrajectoryConfig) -> Result<Self> {
        cfg.params.validate()?;
        let params = cfg.params;
        let mode = if params.is_lindblad() {
            let h_sub = build_hamiltonian(&params, params.m)?;
            let jumps = build_jump_operators(&params, cfg.include_ground_jump)?;
            let channel = build_dissipative_kraus(&jumps, params.gamma, params.dt)?;
            let cache = UnitaryCache::new(&h_sub, params.dt)?;
            let u_half = cfg.strang.then(|| cache.unitary_for(params.dt / 2.0));
            let dim = 1usize << params.m;
            Mode::Lindblad {
                h_sub,
                cache,
                channel,
                u_half,
                strang: cfg.strang,
                include_ground_jump: cfg.include_ground_jump,
                scratch: Mat::zeros(dim, dim),
                out: Mat::zeros(dim, dim),
            }
        } else {
            let h_full = build_hamiltonian(&params, params.total_sites())?;
            Mode::Full { h_full, propagator: KrylovPropagator::new(cfg.krylov) }
        };
        Ok(Engine { params, mode })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Ground-state energy of the subsystem Hamiltonian (Lindblad mode).
    pub fn subsystem_ground_energy(&self) -> Option<f64> {
        match &self.mode {
            Mode::Lindblad { cache, .. } => Some(cache.ground_energy()),
            Mode::Full { .. } => None,
        }
    }

    /// Evolve `state` from `t0` to `t1`. In Lindblad mode `t0` must sit on
    /// the Trotter grid; the leftover fraction of a step is applied with a
    /// correspondingly scaled unitary and channel.
    pub fn evolve_to(&mut self, state: &EngineState, t0: f64, t1: f64) -> Result<EngineState> {
        if t1 < t0 {
            return Err(PagelabError::Config(format!("cannot evolve backwards: {t1} < {t0}")));
        }
        let span = t1 - t0;
        match (&mut self.mode, state) {
            (Mode::Full { h_full, propagator }, EngineState::Pure(psi)) => {
                let mut out = psi.clone();
                propagator.evolve(h_full, &mut out, span)?;
                Ok(EngineState::Pure(out))
            }
            (
                Mode::Lindblad {
                    cache,
                    channel,
                    u_half,
                    strang,
                    include_ground_jump,
                    scratch,
                    out,
                    ..
                },
                EngineState::Mixed(rho),
            ) => {
                let dt = self.params.dt;
                let n_full = (span / dt + 1e-9).floor() as usize;
                let frac = span - n_full as f64 * dt;
                let mut cur = rho.clone();
                for _ in 0..n_full {
                    cur = if *strang {
                        lindblad_step_strang(
                            &cur,
                            u_half.as_ref().expect("strang unitary"),
                            channel,
                            scratch,
                            out,
                        )?
                    } else {
                        lindblad_step(&cur, &cache.u, channel, scratch, out)?
                    };
                }
                if frac > 1e-9 {
                    let jumps = build_jump_operators(&self.params, *include_ground_jump)?;
                    let ch = build_dissipative_kraus(&jumps, self.params.gamma, frac)?;
                    let u = cache.unitary_for(frac);
                    cur = lindblad_step(&cur, &u, &ch, scratch, out)?;
                }
                Ok(EngineState::Mixed(cur))
            }
            _ => Err(PagelabError::Config(
                "state kind does not match the engine mode".into(),
            )),
        }
    }

    /// ρ_A of the propagating state.
    pub fn reduced(&self, state: &EngineState) -> Result<DensityMatrix> {
        match state {
            EngineState::Pure(psi) => partial_trace(psi, self.params.m, self.params.n),
            EngineState::Mixed(rho) => Ok(rho.clone()),
        }
    }

    /// ⟨H⟩ of the propagating state.
    pub fn energy(&self, state: &EngineState) -> Result<f64> {
        match (&self.mode, state) {
            (Mode::Full { h_full, .. }, EngineState::Pure(psi)) => {
                Ok(h_full.expectation_state(psi.amplitudes()))
            }
            (Mode::Lindblad { h_sub, .. }, EngineState::Mixed(rho)) => {
                Ok(h_sub.expectation_dense(rho.mat().as_ref()))
            }
            _ => Err(PagelabError::Config("state kind does not match the engine mode".into())),
        }
    }
}

/// Ceiling-on-A ⊗ ground-on-bath initial state for full-system runs, or the
/// subsystem state of rank `k` counting from the top (k = 1 is the ceiling).
pub fn initial_state(params: &ModelParams, rank_from_top: usize) -> Result<InitialState> {
    let h_a = build_hamiltonian(params, params.m)?;
    let (_, psi_a) = if rank_from_top == 1 {
        crate::lattice::extremal_eigenstate(&h_a, crate::lattice::Extremal::Ceiling)?
    } else {
        crate::lattice::eigenstate_by_index_from_top(&h_a, rank_from_top)?
    };
    if params.is_lindblad() {
        Ok(InitialState::Mixed(psi_a.to_density_matrix()))
    } else {
        let h_b = build_hamiltonian(params, params.n)?;
        let (_, psi_b) = crate::lattice::extremal_eigenstate(&h_b, crate::lattice::Extremal::Ground)?;
        Ok(InitialState::Pure(StateVector::product(&psi_a, &psi_b)))
    }
}

/// Run a sampled trajectory, invoking `on_sample` at t = 0, sample_dt,
/// 2·sample_dt, … ≤ t_max. The callback may return `false` to stop early
/// (used by checkpoint/resume tests).
pub fn evolve_trajectory(
    initial: InitialState,
    cfg: &TrajectoryConfig,
    on_sample: &mut dyn FnMut(Sample<'_>) -> Result<bool>,
) -> Result<TrajectoryReport> {
    let mut engine = Engine::new(cfg)?;
    let state = match initial {
        InitialState::Pure(psi) => {
            if cfg.params.is_lindblad() {
                return Err(PagelabError::Config(
                    "pure initial state supplied to a Lindblad run".into(),
                ));
            }
            if psi.dim() != 1usize << cfg.params.total_sites() {
                return Err(PagelabError::DimensionMismatch(format!(
                    "initial state dim {} vs 2^{}",
                    psi.dim(),
                    cfg.params.total_sites()
                )));
            }
            EngineState::Pure(psi)
        }
        InitialState::Mixed(rho) => {
            if !cfg.params.is_lindblad() {
                return Err(PagelabError::Config(
                    "density-matrix initial state supplied to a full-system run".into(),
                ));
            }
            if rho.dim() != 1usize << cfg.params.m {
                return Err(PagelabError::DimensionMismatch(format!(
                    "initial state dim {} vs 2^{}",
                    rho.dim(),
                    cfg.params.m
                )));
            }
            rho.check_invariants(None)?;
            EngineState::Mixed(rho)
        }
    };
    resume_trajectory(state, 0, &mut engine, cfg, on_sample)
}

/// Continue a trajectory from the state at sample `start_index` (time
/// `start_index · sample_dt`). `evolve_trajectory` is the `start_index = 0`
/// case.
pub fn resume_trajectory(
    mut state: EngineState,
    start_index: usize,
    engine: &mut Engine,
    cfg: &TrajectoryConfig,
    on_sample: &mut dyn FnMut(Sample<'_>) -> Result<bool>,
) -> Result<TrajectoryReport> {
    if cfg.params.is_lindblad() {
        let steps = cfg.sample_dt / cfg.params.dt;
        if (steps - steps.round()).abs() > 1e-9 || steps < 1.0 - 1e-9 {
            return Err(PagelabError::Config(format!(
                "sample_dt = {} does not sit on the Trotter grid (dt = {})",
                cfg.sample_dt, cfg.params.dt
            )));
        }
    }
    let n_samples = (cfg.t_max / cfg.sample_dt + 1e-9).floor() as usize + 1;
    let mut report = TrajectoryReport::default();
    let e0 = engine.energy(&state)?;
    for index in start_index..n_samples {
        let time = index as f64 * cfg.sample_dt;
        if index > start_index {
            let prev = (index - 1) as f64 * cfg.sample_dt;
            state = engine.evolve_to(&state, prev, time)?;
        }
        let rho_a = engine.reduced(&state)?;
        let energy = engine.energy(&state)?;
        if !cfg.params.is_lindblad() {
            report.energy_drift = report.energy_drift.max((energy - e0).abs());
        }
        report.samples = index + 1;
        let keep_going = on_sample(Sample { index, time, rho_a: &rho_a, energy, state: &state })?;
        if !keep_going {
            report.stopped_early = true;
            return Ok(report);
        }
    }
    Ok(report)
}

/// Collect a small trajectory in memory as (time, ρ_A) pairs.
pub fn collect_trajectory(
    initial: InitialState,
    cfg: &TrajectoryConfig,
) -> Result<Vec<(f64, DensityMatrix)>> {
    let mut out = Vec::new();
    evolve_trajectory(initial, cfg, &mut |s: Sample<'_>| {
        out.push((s.time, s.rho_a.clone()));
        Ok(true)
    })?;
    Ok(out)
}
