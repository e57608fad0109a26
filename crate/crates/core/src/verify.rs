//! Independent checks: joint ↔ block maps, shared-noise cross-checks between
//! the two SME representations, the exact closed-system propagator and
//! ensemble statistics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{BlockState, Fault, JointGenerator, JointState};
use crate::integrators::{solve_qme, Measurement, Representation, SimConfig, State, Trajectory};
use crate::linalg::{fro_dist, ops, partial_trace, unitary_propagator, CMatrix};
use crate::model::EmbeddingModel;

pub fn blocks_from_joint(js: &JointState) -> BlockState {
    BlockState::from_joint(js)
}

pub fn joint_from_blocks(bs: &BlockState) -> JointState {
    bs.to_joint()
}

/// `‖Σ_i ϱ^{i;i} − Tr_aux(ϱ_sa)‖_F`.
pub fn reduced_identity_defect(js: &JointState) -> Result<f64> {
    let via_blocks = blocks_from_joint(js).reduced();
    let via_trace = partial_trace(&js.rho, &js.dims, &[0])?;
    fro_dist(&via_blocks, &via_trace)
}

/// Runs the joint and block SMEs on one shared noise path and returns the
/// largest Frobenius distance between the reassembled block state and the
/// joint state over all steps.
pub fn crosscheck_paths(model: &EmbeddingModel, init: &JointState, cfg: &SimConfig) -> Result<f64> {
    crosscheck_paths_with_fault(model, init, cfg, Fault::None)
}

/// As [`crosscheck_paths`], with a sign fault injected into the block path.
pub fn crosscheck_paths_with_fault(
    model: &EmbeddingModel,
    init: &JointState,
    cfg: &SimConfig,
    fault: Fault,
) -> Result<f64> {
    let init = State::Joint(init.clone());
    let mut joint = Trajectory::new(model, &init, cfg, Representation::Joint, 0)?;
    let mut blocks = Trajectory::new(model, &init, cfg, Representation::Blocks, 0)?.with_fault(fault);
    let mut worst = 0.0_f64;
    while !joint.is_finished() {
        joint.advance()?;
        blocks.advance()?;
        let (State::Joint(js), State::Blocks(bs)) = (joint.state(), blocks.state()) else {
            unreachable!("representations fixed at construction");
        };
        worst = worst.max(fro_dist(&bs.to_joint().rho, &js.rho)?);
    }
    Ok(worst)
}

/// Reduced principal states at `times` from exact unitary evolution of a
/// model without field couplings.
pub fn closed_system_oracle(model: &EmbeddingModel, init: &JointState, times: &[f64]) -> Result<Vec<CMatrix>> {
    if !model.is_closed() {
        return Err(Error::DissipativeModel);
    }
    let mut rho = init.rho.clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < now {
            return Err(Error::InvalidConfig("oracle times must be non-decreasing".into()));
        }
        while now < target {
            let (_, end) = model.constant_interval(now);
            let until = end.min(target);
            let h = JointGenerator::new(model, now)?.hamiltonian().clone();
            let u = unitary_propagator(&h, until - now)?;
            rho = u.dot(&rho).dot(&u.adjoint());
            now = until;
        }
        out.push(partial_trace(&rho, &init.dims, &[0])?);
    }
    Ok(out)
}

/// A named principal-system observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub name: String,
    pub matrix: CMatrix,
}

impl Observable {
    pub fn new(name: impl Into<String>, matrix: CMatrix) -> Self {
        Observable { name: name.into(), matrix }
    }

    /// `Re Tr(O ρ)`.
    pub fn expect(&self, rho: &CMatrix) -> f64 {
        crate::generators::expectation(&self.matrix, rho)
    }
}

/// `sigma_x`, `sigma_y`, `sigma_z` for a qubit principal; level populations
/// `p0, p1, ...` otherwise.
pub fn default_observables(d_s: usize) -> Vec<Observable> {
    if d_s == 2 {
        vec![
            Observable::new("sigma_x", ops::sigma_x()),
            Observable::new("sigma_y", ops::sigma_y()),
            Observable::new("sigma_z", ops::sigma_z()),
        ]
    } else {
        (0..d_s).map(|k| Observable::new(format!("p{k}"), ops::projector(d_s, k))).collect()
    }
}

/// Ensemble statistics of SME trajectories against the master equation.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub n: usize,
    pub checkpoints: Vec<f64>,
    pub observables: Vec<String>,
    /// `[checkpoint][observable]`
    pub mean_obs: Vec<Vec<f64>>,
    pub stderr_obs: Vec<Vec<f64>>,
    pub qme_obs: Vec<Vec<f64>>,
    /// Mean and sample variance of the terminal innovation `I_{t_end}`.
    pub innovation_mean: f64,
    pub innovation_var: f64,
    pub t_end: f64,
}

impl EnsembleSummary {
    /// True when every mean lies within `k` standard errors of the master
    /// equation value.
    pub fn means_within(&self, k: f64) -> bool {
        self.mean_obs.iter().zip(&self.stderr_obs).zip(&self.qme_obs).all(|((m, s), q)| {
            m.iter().zip(s).zip(q).all(|((m, s), q)| (m - q).abs() <= k * s)
        })
    }

    /// Largest `|mean − qme| / stderr` (0/0 counts as 0).
    pub fn max_z_score(&self) -> f64 {
        let mut worst = 0.0_f64;
        for ((m, s), q) in self.mean_obs.iter().zip(&self.stderr_obs).zip(&self.qme_obs) {
            for ((m, s), q) in m.iter().zip(s).zip(q) {
                let diff = (m - q).abs();
                let z = if diff == 0.0 { 0.0 } else { diff / s };
                worst = worst.max(z);
            }
        }
        worst
    }

    /// `|mean I_{t_end}| ≤ k sqrt(t_end / N)`.
    pub fn innovation_within(&self, k: f64) -> bool {
        self.innovation_mean.abs() <= k * (self.t_end / self.n as f64).sqrt()
    }
}

/// Ten evenly spaced checkpoint steps `round(k n / 10)`, `k = 1..=10`.
pub fn checkpoint_steps(n_steps: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = (1..=10).map(|k| ((k * n_steps) as f64 / 10.0).round() as usize).collect();
    steps.dedup();
    steps.retain(|&s| s > 0);
    steps
}

struct TrajectoryStats {
    values: Vec<Vec<f64>>,
    innovation: f64,
}

fn run_one(
    model: &EmbeddingModel,
    init: &State,
    cfg: &SimConfig,
    index: usize,
    steps: &[usize],
    observables: &[Observable],
) -> Result<TrajectoryStats> {
    let mut traj = Trajectory::new(model, init, cfg, Representation::Blocks, index as u64)?;
    let mut values = Vec::with_capacity(steps.len());
    let mut innovation = 0.0;
    let mut next = 0;
    while next < steps.len() {
        if let Some(inn) = traj.advance()? {
            innovation += inn.di;
        }
        if traj.steps_taken() == steps[next] {
            let rho = traj.reduced();
            values.push(observables.iter().map(|o| o.expect(&rho)).collect());
            next += 1;
        }
    }
    while !traj.is_finished() {
        if let Some(inn) = traj.advance()? {
            innovation += inn.di;
        }
    }
    Ok(TrajectoryStats { values, innovation })
}

/// Runs `n` block-SME trajectories (stream indices `0..n`) in parallel and
/// compares observable means with the coupled master equation.
pub fn ensemble_average(
    model: &EmbeddingModel,
    init: &State,
    cfg: &SimConfig,
    n: usize,
    observables: &[Observable],
) -> Result<EnsembleSummary> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("ensemble needs at least 2 trajectories, got {n}")));
    }
    if model.probe.is_none() {
        return Err(Error::ProbeAbsent);
    }
    if cfg.measurement == Measurement::None {
        return Err(Error::InvalidConfig("ensemble runs need a homodyne measurement".into()));
    }
    cfg.validate()?;
    let steps = checkpoint_steps(cfg.n_steps());

    let runs: Vec<TrajectoryStats> = (0..n)
        .into_par_iter()
        .map(|i| {
            run_one(model, init, cfg, i, &steps, observables)
                .map_err(|e| Error::TrajectoryFailed { trajectory: i, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let nf = n as f64;
    let n_obs = observables.len();
    let mut mean_obs = vec![vec![0.0; n_obs]; steps.len()];
    let mut stderr_obs = vec![vec![0.0; n_obs]; steps.len()];
    for c in 0..steps.len() {
        for o in 0..n_obs {
            let mean = runs.iter().map(|r| r.values[c][o]).sum::<f64>() / nf;
            let var = runs.iter().map(|r| (r.values[c][o] - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            mean_obs[c][o] = mean;
            stderr_obs[c][o] = (var / nf).sqrt();
        }
    }
    let innovation_mean = runs.iter().map(|r| r.innovation).sum::<f64>() / nf;
    let innovation_var = runs.iter().map(|r| (r.innovation - innovation_mean).powi(2)).sum::<f64>() / (nf - 1.0);

    let qme_cfg = SimConfig { snapshot_stride: 1, ..cfg.clone() };
    let qme = solve_qme(model, &init.to_blocks(), &qme_cfg)?;
    let qme_obs = steps
        .iter()
        .map(|&s| observables.iter().map(|o| o.expect(&qme[s].reduced)).collect())
        .collect();

    Ok(EnsembleSummary {
        n,
        checkpoints: steps.iter().map(|&s| cfg.time(s)).collect(),
        observables: observables.iter().map(|o| o.name.clone()).collect(),
        mean_obs,
        stderr_obs,
        qme_obs,
        innovation_mean,
        innovation_var,
        t_end: cfg.t_end,
    })
}
