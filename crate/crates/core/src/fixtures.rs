//! Seeded random operators and the reference models used by tests, the
//! acceptance suite and the bundled configs.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::generators::{BlockState, JointState};
use crate::linalg::{kron, ops, CMatrix, SubsystemDims};
use crate::model::{cascade_embedding, CompoundBath, EmbeddingModel, TimedOperator};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with entries of variance `scale²`.
pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    let data = (0..n * n).map(|_| gaussian(rng) * scale).collect();
    CMatrix::from_vec(n, n, data).expect("square")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    random_operator(rng, n, scale).hermitized()
}

/// `A A† / Tr(A A†)` for Ginibre `A`: full rank with probability one.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = random_operator(rng, n, 1.0);
    let rho = a.dot(&a.adjoint());
    let tr = rho.trace().re;
    rho.scale(C64::from(1.0 / tr))
}

/// Random density matrix mixed with the identity so that its smallest
/// eigenvalue is at least `(1 − w) / n`.
pub fn random_mixed_density<R: Rng + ?Sized>(rng: &mut R, n: usize, w: f64) -> CMatrix {
    let mut rho = random_density(rng, n).scale(C64::from(w));
    rho += &CMatrix::identity(n).scale(C64::from((1.0 - w) / n as f64));
    rho
}

pub fn random_joint_state<R: Rng + ?Sized>(rng: &mut R, dims: &SubsystemDims) -> JointState {
    JointState::new(dims.clone(), random_density(rng, dims.total())).expect("dims match")
}

pub fn random_block_state<R: Rng + ?Sized>(rng: &mut R, dims: &SubsystemDims) -> BlockState {
    BlockState::from_joint(&random_joint_state(rng, dims))
}

/// Shape of a random model.
#[derive(Clone, Debug)]
pub struct RandomModelSpec {
    pub principal: usize,
    pub aux: Vec<usize>,
    /// Per bath: number of principal ⊗ auxiliary field couplings.
    pub m1: Vec<usize>,
    /// Per bath: number of auxiliary-only field couplings.
    pub m2: Vec<usize>,
    pub probe: bool,
}

/// Random constant model: hermitian parts of unit scale, couplings of scale
/// `coupling`.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, spec: &RandomModelSpec, coupling: f64) -> EmbeddingModel {
    let d_s = spec.principal;
    let dims = SubsystemDims::new(d_s, spec.aux.clone()).expect("positive dims");
    let h_s = random_hermitian(rng, d_s, 1.0);
    let probe = spec.probe.then(|| TimedOperator::constant(random_operator(rng, d_s, coupling)));
    let baths = spec
        .aux
        .iter()
        .enumerate()
        .map(|(l, &d)| CompoundBath {
            h_a: random_hermitian(rng, d, 1.0).into(),
            h_sa: random_hermitian(rng, d_s * d, 1.0).into(),
            l1: (0..spec.m1[l]).map(|_| random_operator(rng, d_s * d, coupling).into()).collect(),
            l2: (0..spec.m2[l]).map(|_| random_operator(rng, d, coupling).into()).collect(),
        })
        .collect();
    EmbeddingModel { dims, h_s: h_s.into(), probe, baths }
}

/// Qubit principal with two auxiliaries of dimensions 2 and 3, one coupling
/// of each kind per bath and a `σ⁻` probe, started in a full-rank mixed
/// state.
pub fn standard_fixture() -> (EmbeddingModel, JointState) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_260_101);
    let spec = RandomModelSpec { principal: 2, aux: vec![2, 3], m1: vec![1, 1], m2: vec![1, 1], probe: false };
    let mut model = random_model(&mut rng, &spec, 0.5);
    model.probe = Some(ops::sigma_minus().into());
    let rho = random_mixed_density(&mut rng, model.dims.total(), 0.5);
    let init = JointState::new(model.dims.clone(), rho).expect("dims match");
    (model, init)
}

/// Driven qubit fed by a decaying qubit auxiliary in cascade, monitored
/// through a `σ⁻` probe.
pub fn cascade_qubit_fixture() -> (EmbeddingModel, JointState) {
    let h_s = ops::sigma_x().scale(C64::from(0.5));
    let l_s = ops::sigma_minus().scale(C64::from(0.5));
    let h_a = ops::sigma_z().scale(C64::from(0.5));
    let l_a = ops::sigma_minus().scale(C64::from(0.8));
    let model = cascade_embedding(h_s, l_s, h_a, l_a)
        .expect("valid cascade")
        .with_probe(ops::sigma_minus());
    let plus = ops::plus_state();
    let rho_s = &plus.scale(C64::from(0.9)) + &CMatrix::identity(2).scale(C64::from(0.05));
    let rho_a = &ops::excited().scale(C64::from(0.8)) + &ops::ground().scale(C64::from(0.2));
    let init = JointState::new(model.dims.clone(), kron(&rho_s, &rho_a)).expect("dims match");
    (model, init)
}

/// Closed qubit ⊗ qubit exchange `H_sa = g(σ⁺⊗σ⁻ + σ⁻⊗σ⁺)` starting from
/// `|e⟩⟨e| ⊗ |g⟩⟨g|`.
pub fn exchange_fixture(g: f64) -> (EmbeddingModel, JointState) {
    let h_sa = (&kron(&ops::sigma_plus(), &ops::sigma_minus()) + &kron(&ops::sigma_minus(), &ops::sigma_plus()))
        .scale(C64::from(g));
    let dims = SubsystemDims::new(2, vec![2]).expect("positive dims");
    let mut model = EmbeddingModel::closed(dims.clone(), CMatrix::zeros(2, 2));
    model.baths[0].h_sa = h_sa.into();
    let init = JointState::new(dims, kron(&ops::excited(), &ops::ground())).expect("dims match");
    (model, init)
}
