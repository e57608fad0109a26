//! Fixed-step integration of the joint SME, the coupled block SME and the
//! coupled block master equation.
//!
//! SME steps are Euler–Maruyama followed by hermitization and trace
//! renormalization. Master-equation steps are classical RK4 and are never
//! renormalized, so any trace drift is integrator error.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::generators::{BlockGenerator, BlockState, Fault, JointGenerator, JointState, Quadrature};
use crate::linalg::CMatrix;
use crate::model::EmbeddingModel;
use crate::noise::NoiseStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    EulerMaruyama,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measurement {
    None,
    Amplitude,
    Phase,
}

impl Measurement {
    pub fn quadrature(self) -> Option<Quadrature> {
        match self {
            Measurement::None => None,
            Measurement::Amplitude => Some(Quadrature::Amplitude),
            Measurement::Phase => Some(Quadrature::Phase),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Joint,
    Blocks,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub measurement: Measurement,
    pub seed: u64,
    pub snapshot_stride: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end must be non-negative and finite, got {}", self.t_end)));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-12 * self.t_end.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidConfig("snapshot_stride must be at least 1".into()));
        }
        if self.scheme == Scheme::Rk4 && self.measurement != Measurement::None {
            return Err(Error::InvalidConfig("rk4 integrates the unconditional master equation; use measurement none".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// Either representation of the conditional state.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Joint(JointState),
    Blocks(BlockState),
}

impl State {
    pub fn to_blocks(&self) -> BlockState {
        match self {
            State::Joint(js) => BlockState::from_joint(js),
            State::Blocks(bs) => bs.clone(),
        }
    }

    pub fn to_joint(&self) -> JointState {
        match self {
            State::Joint(js) => js.clone(),
            State::Blocks(bs) => bs.to_joint(),
        }
    }

    /// Reduced principal state.
    pub fn reduced(&self) -> CMatrix {
        self.to_blocks().reduced()
    }

    fn into_representation(self, repr: Representation) -> State {
        match (repr, self) {
            (Representation::Joint, State::Blocks(bs)) => State::Joint(bs.to_joint()),
            (Representation::Blocks, State::Joint(js)) => State::Blocks(BlockState::from_joint(&js)),
            (_, s) => s,
        }
    }
}

/// Measurement-record entries for one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Innovation {
    /// Record increment `dY = mval dt + dW`.
    pub dy: f64,
    /// Innovation `dI = dY − mval dt`.
    pub di: f64,
    /// `Tr((L+L†) ϱ)` at the start of the step.
    pub mval: f64,
}

impl Innovation {
    fn new(mval: f64, dt: f64, dw: f64) -> Self {
        let dy = mval * dt + dw;
        Innovation { dy, di: dy - mval * dt, mval }
    }
}

fn normalize_trace(tr: f64) -> Result<C64> {
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::NonPositiveTrace { trace: tr });
    }
    Ok(C64::new(1.0 / tr, 0.0))
}

fn em_update_joint(
    gen: &JointGenerator,
    state: &JointState,
    dt: f64,
    quadrature: Option<Quadrature>,
    dw: f64,
) -> Result<(JointState, Option<Innovation>)> {
    let drift = gen.drift(state)?;
    let mut rho = state.rho.clone();
    rho.axpy(C64::new(dt, 0.0), &drift);
    let innovation = match quadrature {
        Some(q) => {
            let (g, mval) = gen.measurement(state, q)?;
            let inn = Innovation::new(mval, dt, dw);
            rho.axpy(C64::new(inn.di, 0.0), &g);
            Some(inn)
        }
        None => None,
    };
    let mut next = JointState { dims: state.dims.clone(), rho: rho.hermitized() };
    let scale = normalize_trace(next.blockwise_trace().re)?;
    next.rho.scale_mut(scale);
    Ok((next, innovation))
}

fn em_update_blocks(
    gen: &BlockGenerator,
    bs: &BlockState,
    dt: f64,
    quadrature: Option<Quadrature>,
    dw: f64,
) -> Result<(BlockState, Option<Innovation>)> {
    let drift = gen.qme_rhs(bs)?;
    let mut out = bs.clone();
    out.axpy(C64::new(dt, 0.0), &drift);
    let innovation = match quadrature {
        Some(q) => {
            let (g, mval) = gen.meas_term(bs, q)?;
            let inn = Innovation::new(mval, dt, dw);
            out.axpy(C64::new(inn.di, 0.0), &g);
            Some(inn)
        }
        None => None,
    };
    out.hermitize();
    let scale = normalize_trace(out.total_trace().re)?;
    out.scale_mut(scale);
    Ok((out, innovation))
}

/// One Euler–Maruyama step of the joint SME. With `quadrature = None` this is
/// a deterministic Euler step of the master equation and no record is made.
pub fn em_step_joint(
    model: &EmbeddingModel,
    t: f64,
    state: &JointState,
    dt: f64,
    quadrature: Option<Quadrature>,
    dw: f64,
) -> Result<(JointState, Option<Innovation>)> {
    em_update_joint(&JointGenerator::new(model, t)?, state, dt, quadrature, dw)
}

/// One Euler–Maruyama step of the coupled block SME.
pub fn em_step_blocks(
    model: &EmbeddingModel,
    t: f64,
    bs: &BlockState,
    dt: f64,
    quadrature: Option<Quadrature>,
    dw: f64,
) -> Result<(BlockState, Option<Innovation>)> {
    em_update_blocks(&BlockGenerator::new(model, t)?, bs, dt, quadrature, dw)
}

pub(crate) trait OdeState: Clone {
    fn axpy(&mut self, alpha: f64, x: &Self);
}

impl OdeState for CMatrix {
    fn axpy(&mut self, alpha: f64, x: &Self) {
        CMatrix::axpy(self, C64::new(alpha, 0.0), x);
    }
}

impl OdeState for BlockState {
    fn axpy(&mut self, alpha: f64, x: &Self) {
        BlockState::axpy(self, C64::new(alpha, 0.0), x);
    }
}

/// Classical four-stage Runge–Kutta step of an autonomous system.
pub(crate) fn rk4<S: OdeState>(y: &S, dt: f64, mut f: impl FnMut(&S) -> Result<S>) -> Result<S> {
    let half = 0.5 * dt;
    let k1 = f(y)?;
    let mut y2 = y.clone();
    y2.axpy(half, &k1);
    let k2 = f(&y2)?;
    let mut y3 = y.clone();
    y3.axpy(half, &k2);
    let k3 = f(&y3)?;
    let mut y4 = y.clone();
    y4.axpy(dt, &k3);
    let k4 = f(&y4)?;
    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

/// Rebuilds a time-frozen generator only when `t` leaves the interval on
/// which the model is constant.
struct GeneratorCache<'m, G> {
    model: &'m EmbeddingModel,
    build: fn(&EmbeddingModel, f64, Fault) -> Result<G>,
    fault: Fault,
    current: Option<(f64, f64, G)>,
}

impl<'m, G> GeneratorCache<'m, G> {
    fn new(model: &'m EmbeddingModel, build: fn(&EmbeddingModel, f64, Fault) -> Result<G>) -> Self {
        GeneratorCache { model, build, fault: Fault::None, current: None }
    }

    fn get(&mut self, t: f64) -> Result<&G> {
        let stale = match &self.current {
            Some((start, end, _)) => !(t >= *start && t < *end),
            None => true,
        };
        if stale {
            let (start, end) = self.model.constant_interval(t);
            let gen = (self.build)(self.model, t, self.fault)?;
            self.current = Some((start, end, gen));
        }
        Ok(&self.current.as_ref().unwrap().2)
    }
}

fn build_blocks(model: &EmbeddingModel, t: f64, fault: Fault) -> Result<BlockGenerator> {
    Ok(BlockGenerator::new(model, t)?.with_fault(fault))
}

fn build_joint(model: &EmbeddingModel, t: f64, _fault: Fault) -> Result<JointGenerator> {
    JointGenerator::new(model, t)
}

/// One RK4 step of the coupled block master equation.
pub fn rk4_step_qme(model: &EmbeddingModel, t: f64, bs: &BlockState, dt: f64) -> Result<BlockState> {
    let gen = BlockGenerator::new(model, t)?;
    rk4(bs, dt, |y| gen.qme_rhs(y))
}

/// RK4 solution of a time-independent GKSL equation on a single space,
/// returning the state after each of `n_steps` steps (initial state first).
pub fn solve_gksl(h: &CMatrix, ls: &[CMatrix], rho0: &CMatrix, dt: f64, n_steps: usize) -> Result<Vec<CMatrix>> {
    crate::generators::gksl_rhs(h, ls, rho0)?;
    let channels: Vec<_> = ls.iter().cloned().map(crate::generators::Channel::new).collect();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(rho0.clone());
    let mut rho = rho0.clone();
    for _ in 0..n_steps {
        rho = rk4(&rho, dt, |y| Ok(crate::generators::gksl_core(h, &channels, y)))?;
        out.push(rho.clone());
    }
    Ok(out)
}

enum Engine<'m> {
    Joint(GeneratorCache<'m, JointGenerator>, JointState),
    Blocks(GeneratorCache<'m, BlockGenerator>, BlockState),
}

/// A single SME (or deterministic master-equation) trajectory advanced one
/// step at a time.
pub struct Trajectory<'m> {
    cfg: SimConfig,
    engine: Engine<'m>,
    noise: NoiseStream,
    quadrature: Option<Quadrature>,
    step: usize,
}

impl<'m> Trajectory<'m> {
    /// Trajectory `index` of the ensemble seeded by `cfg.seed`.
    pub fn new(
        model: &'m EmbeddingModel,
        init: &State,
        cfg: &SimConfig,
        repr: Representation,
        index: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let quadrature = cfg.measurement.quadrature();
        if quadrature.is_some() && model.probe.is_none() {
            return Err(Error::ProbeAbsent);
        }
        let engine = match init.clone().into_representation(repr) {
            State::Joint(js) => Engine::Joint(GeneratorCache::new(model, build_joint), js),
            State::Blocks(bs) => Engine::Blocks(GeneratorCache::new(model, build_blocks), bs),
        };
        let state_dims = match &engine {
            Engine::Joint(_, js) => &js.dims,
            Engine::Blocks(_, bs) => bs.dims(),
        };
        if *state_dims != model.dims {
            return Err(Error::dims("initial state", format!("{:?}", model.dims), format!("{state_dims:?}")));
        }
        Ok(Trajectory {
            cfg: cfg.clone(),
            engine,
            noise: NoiseStream::new(cfg.seed, index, cfg.dt),
            quadrature,
            step: 0,
        })
    }

    /// Injects a sign fault into the block generator (no effect on the joint
    /// representation).
    pub fn with_fault(mut self, fault: Fault) -> Self {
        if let Engine::Blocks(cache, _) = &mut self.engine {
            cache.fault = fault;
            cache.current = None;
        }
        self
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.cfg.time(self.step)
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.cfg.n_steps()
    }

    pub fn state(&self) -> State {
        match &self.engine {
            Engine::Joint(_, js) => State::Joint(js.clone()),
            Engine::Blocks(_, bs) => State::Blocks(bs.clone()),
        }
    }

    pub fn reduced(&self) -> CMatrix {
        match &self.engine {
            Engine::Joint(_, js) => BlockState::from_joint(js).reduced(),
            Engine::Blocks(_, bs) => bs.reduced(),
        }
    }

    /// Advances one step and returns the record entry (if measuring).
    pub fn advance(&mut self) -> Result<Option<Innovation>> {
        let t = self.time();
        let dt = self.cfg.dt;
        let dw = match self.quadrature {
            Some(_) => self.noise.next_increment(),
            None => 0.0,
        };
        let quadrature = self.quadrature;
        let result = match (&mut self.engine, self.cfg.scheme) {
            (Engine::Joint(cache, js), Scheme::EulerMaruyama) => cache
                .get(t)
                .and_then(|g| em_update_joint(g, js, dt, quadrature, dw))
                .map(|(s, inn)| {
                    *js = s;
                    inn
                }),
            (Engine::Blocks(cache, bs), Scheme::EulerMaruyama) => cache
                .get(t)
                .and_then(|g| em_update_blocks(g, bs, dt, quadrature, dw))
                .map(|(s, inn)| {
                    *bs = s;
                    inn
                }),
            (Engine::Joint(cache, js), Scheme::Rk4) => cache
                .get(t)
                .and_then(|g| rk4(&js.rho, dt, |y| g.drift(&JointState { dims: js.dims.clone(), rho: y.clone() })))
                .map(|rho| {
                    js.rho = rho;
                    None
                }),
            (Engine::Blocks(cache, bs), Scheme::Rk4) => {
                cache.get(t).and_then(|g| rk4(&*bs, dt, |y| g.qme_rhs(y))).map(|next| {
                    *bs = next;
                    None
                })
            }
        };
        let step = self.step;
        self.step += 1;
        result.map_err(|e| Error::StepFailed { step, source: Box::new(e) })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub state: State,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    /// Start time of every step.
    pub times: Vec<f64>,
    pub dy: Vec<f64>,
    pub di: Vec<f64>,
    pub mvals: Vec<f64>,
    /// States at every `snapshot_stride`-th step, starting with the initial one.
    pub snapshots: Vec<Snapshot>,
    pub seed: u64,
    pub trajectory: u64,
}

/// Runs trajectory `index` of the ensemble seeded by `cfg.seed`.
pub fn simulate_trajectory_indexed(
    model: &EmbeddingModel,
    init: &State,
    cfg: &SimConfig,
    repr: Representation,
    index: u64,
    fault: Fault,
) -> Result<TrajectoryRecord> {
    let mut traj = Trajectory::new(model, init, cfg, repr, index)?.with_fault(fault);
    let n = cfg.n_steps();
    let measuring = cfg.measurement != Measurement::None;
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(n),
        dy: Vec::with_capacity(if measuring { n } else { 0 }),
        di: Vec::with_capacity(if measuring { n } else { 0 }),
        mvals: Vec::with_capacity(if measuring { n } else { 0 }),
        snapshots: vec![Snapshot { step: 0, t: 0.0, state: traj.state() }],
        seed: cfg.seed,
        trajectory: index,
    };
    while !traj.is_finished() {
        rec.times.push(traj.time());
        if let Some(inn) = traj.advance()? {
            rec.dy.push(inn.dy);
            rec.di.push(inn.di);
            rec.mvals.push(inn.mval);
        }
        let step = traj.steps_taken();
        if step % cfg.snapshot_stride == 0 {
            rec.snapshots.push(Snapshot { step, t: traj.time(), state: traj.state() });
        }
    }
    Ok(rec)
}

pub fn simulate_trajectory(
    model: &EmbeddingModel,
    init: &State,
    cfg: &SimConfig,
    repr: Representation,
) -> Result<TrajectoryRecord> {
    simulate_trajectory_indexed(model, init, cfg, repr, 0, Fault::None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QmeSample {
    pub t: f64,
    pub blocks: BlockState,
    pub reduced: CMatrix,
}

/// Integrates the coupled block master equation with RK4 (the scheme and
/// measurement fields of `cfg` are not used) and samples every
/// `snapshot_stride` steps.
pub fn solve_qme(model: &EmbeddingModel, init: &BlockState, cfg: &SimConfig) -> Result<Vec<QmeSample>> {
    let cfg = SimConfig { scheme: Scheme::Rk4, measurement: Measurement::None, ..cfg.clone() };
    cfg.validate()?;
    if *init.dims() != model.dims {
        return Err(Error::dims("initial state", format!("{:?}", model.dims), format!("{:?}", init.dims())));
    }
    let mut cache = GeneratorCache::new(model, build_blocks);
    let mut bs = init.clone();
    let mut out = vec![QmeSample { t: 0.0, reduced: bs.reduced(), blocks: bs.clone() }];
    for n in 0..cfg.n_steps() {
        bs = cache
            .get(cfg.time(n))
            .and_then(|g| rk4(&bs, cfg.dt, |y| g.qme_rhs(y)))
            .map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?;
        if (n + 1) % cfg.snapshot_stride == 0 {
            out.push(QmeSample { t: cfg.time(n + 1), reduced: bs.reduced(), blocks: bs.clone() });
        }
    }
    Ok(out)
}
