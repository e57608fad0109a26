//! Right-hand sides of the joint SME and of the coupled block equations.
//!
//! The joint conditional state `ϱ_sa` lives on principal ⊗ auxiliaries. Its
//! block components `ϱ^{j;k} = <φ_j| ϱ_sa |φ_k>` are principal-space
//! operators indexed by pairs of auxiliary basis multi-indices. The block
//! generators here evolve that family directly, without ever forming the
//! joint matrix.
//!
//! Both representations share the low-level arithmetic helpers
//! ([`hamiltonian_part`], [`lindblad_term`], [`measurement_term`]), so with
//! one-dimensional auxiliaries the block equations reproduce plain GKSL
//! evolution bit for bit.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{embed, embed_factors, fro_dist, kron, psd_check, CMatrix, SubsystemDims, HERMITIAN_TOL, PSD_TOL};
use crate::model::EmbeddingModel;

const ONE: C64 = C64::new(1.0, 0.0);
const MINUS_ONE: C64 = C64::new(-1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Homodyne quadrature monitored on the probe output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    Amplitude,
    Phase,
}

/// Sign faults that can be injected into the block generator. Used only to
/// show that the cross-checks are able to fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    FlipPrincipalHamiltonian,
    FlipAuxHamiltonian,
    FlipDissipator,
    FlipMeasurement,
}

/// Conditional state of principal ⊗ auxiliaries.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub dims: SubsystemDims,
    pub rho: CMatrix,
}

/// Summary of how far a state is from being a density operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity_defect: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl JointState {
    pub fn new(dims: SubsystemDims, rho: CMatrix) -> Result<Self> {
        let d = dims.total();
        if rho.shape() != (d, d) {
            return Err(Error::dims("JointState", format!("{d}x{d}"), format!("{:?}", rho.shape())));
        }
        Ok(JointState { dims, rho })
    }

    /// Checks the density-operator invariants: hermitian within
    /// [`HERMITIAN_TOL`], unit trace within `1e-9`, PSD within [`PSD_TOL`].
    pub fn validated(self) -> Result<Self> {
        let defect = self.rho.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { what: "joint state".into(), defect });
        }
        let trace = self.rho.trace().re;
        if (trace - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { trace });
        }
        let report = psd_check(&self.rho, PSD_TOL)?;
        if !report.is_psd {
            return Err(Error::NotPositive { min_eigenvalue: report.min_eigenvalue });
        }
        Ok(self)
    }

    /// `Tr ρ` summed diagonal block by diagonal block, in the same order as
    /// [`BlockState::total_trace`].
    pub(crate) fn blockwise_trace(&self) -> C64 {
        let a = self.dims.aux_total();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..a {
            let mut block = C64::new(0.0, 0.0);
            for p in 0..self.dims.principal {
                let n = p * a + i;
                block += self.rho[(n, n)];
            }
            acc += block;
        }
        acc
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let hermiticity_defect = self.rho.hermiticity_defect();
        let trace_error = (self.rho.trace() - ONE).norm();
        let min_eigenvalue = psd_check(&self.rho.hermitized(), f64::INFINITY)
            .map(|r| r.min_eigenvalue)
            .unwrap_or(f64::NAN);
        StateDiagnostics { hermiticity_defect, trace_error, min_eigenvalue }
    }
}

/// The family `ϱ^{j;k}` for all pairs of auxiliary multi-indices.
///
/// Multi-indices are flattened with auxiliary 1 as the most significant
/// digit; block `(j, k)` is stored at `j * A + k` where `A = Π d_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    dims: SubsystemDims,
    blocks: Vec<CMatrix>,
}

impl BlockState {
    pub fn zeros(dims: SubsystemDims) -> Self {
        let a = dims.aux_total();
        let d = dims.principal;
        BlockState { blocks: vec![CMatrix::zeros(d, d); a * a], dims }
    }

    pub fn from_blocks(dims: SubsystemDims, blocks: Vec<CMatrix>) -> Result<Self> {
        let a = dims.aux_total();
        if blocks.len() != a * a {
            return Err(Error::MissingBlocks { expected: a * a, found: blocks.len() });
        }
        let d = dims.principal;
        if let Some(b) = blocks.iter().find(|b| b.shape() != (d, d)) {
            return Err(Error::dims("BlockState block", format!("{d}x{d}"), format!("{:?}", b.shape())));
        }
        Ok(BlockState { dims, blocks })
    }

    /// Sandwiches the joint state between auxiliary basis vectors.
    pub fn from_joint(js: &JointState) -> Self {
        let d = js.dims.principal;
        let a = js.dims.aux_total();
        let mut out = BlockState::zeros(js.dims.clone());
        for j in 0..a {
            for k in 0..a {
                let block = &mut out.blocks[j * a + k];
                for p in 0..d {
                    for q in 0..d {
                        block[(p, q)] = js.rho[(p * a + j, q * a + k)];
                    }
                }
            }
        }
        out
    }

    /// Reassembles `Σ_{j,k} ϱ^{j;k} ⊗ |φ_j><φ_k|`.
    pub fn to_joint(&self) -> JointState {
        let d = self.dims.principal;
        let a = self.n_aux_states();
        let mut rho = CMatrix::zeros(d * a, d * a);
        for j in 0..a {
            for k in 0..a {
                let block = &self.blocks[j * a + k];
                for p in 0..d {
                    for q in 0..d {
                        rho[(p * a + j, q * a + k)] = block[(p, q)];
                    }
                }
            }
        }
        JointState { dims: self.dims.clone(), rho }
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    /// Number of auxiliary basis states `A = Π d_l`.
    pub fn n_aux_states(&self) -> usize {
        self.dims.aux_total()
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize, k: usize) -> &CMatrix {
        &self.blocks[j * self.n_aux_states() + k]
    }

    pub fn block_mut(&mut self, j: usize, k: usize) -> &mut CMatrix {
        let a = self.n_aux_states();
        &mut self.blocks[j * a + k]
    }

    /// Flattens an auxiliary multi-index (zero-based digits).
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.dims.aux).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.n_baths()];
        for (slot, &d) in self.dims.aux.iter().enumerate().rev() {
            out[slot] = flat % d;
            flat /= d;
        }
        out
    }

    pub fn block_at(&self, j: &[usize], k: &[usize]) -> &CMatrix {
        self.block(self.flat_index(j), self.flat_index(k))
    }

    /// Reduced principal state `Σ_i ϱ^{i;i}`.
    pub fn reduced(&self) -> CMatrix {
        let a = self.n_aux_states();
        let d = self.dims.principal;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..a {
            out += &self.blocks[i * a + i];
        }
        out
    }

    pub fn total_trace(&self) -> C64 {
        let a = self.n_aux_states();
        (0..a).map(|i| self.blocks[i * a + i].trace()).sum()
    }

    /// Largest `‖ϱ^{j;k} − (ϱ^{k;j})†‖_F`.
    pub fn pairing_defect(&self) -> f64 {
        let a = self.n_aux_states();
        let mut worst = 0.0_f64;
        for j in 0..a {
            for k in j..a {
                let d = fro_dist(self.block(j, k), &self.block(k, j).adjoint()).unwrap_or(f64::INFINITY);
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Enforces `ϱ^{j;k} = (ϱ^{k;j})†` by averaging each pair.
    pub fn hermitize(&mut self) {
        let a = self.n_aux_states();
        let d = self.dims.principal;
        let old = self.blocks.clone();
        for j in 0..a {
            for k in 0..a {
                let x = &old[j * a + k];
                let y = &old[k * a + j];
                let out = &mut self.blocks[j * a + k];
                for p in 0..d {
                    for q in 0..d {
                        out[(p, q)] = 0.5 * (x[(p, q)] + y[(q, p)].conj());
                    }
                }
            }
        }
    }

    pub fn scale_mut(&mut self, alpha: C64) {
        for b in &mut self.blocks {
            b.scale_mut(alpha);
        }
    }

    pub fn axpy(&mut self, alpha: C64, x: &BlockState) {
        for (b, xb) in self.blocks.iter_mut().zip(&x.blocks) {
            b.axpy(alpha, xb);
        }
    }

    pub fn add_assign(&mut self, x: &BlockState) {
        for (b, xb) in self.blocks.iter_mut().zip(&x.blocks) {
            *b += xb;
        }
    }

    /// Largest Frobenius distance over corresponding blocks.
    pub fn max_block_dist(&self, other: &BlockState) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| fro_dist(a, b).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    fn map_blocks(&self, f: impl Fn(usize, usize, &CMatrix) -> CMatrix) -> BlockState {
        let a = self.n_aux_states();
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(idx, b)| f(idx / a, idx % a, b))
            .collect();
        BlockState { dims: self.dims.clone(), blocks }
    }
}

/// Precomputed `L`, `L†` and `L†L` for one dissipation channel.
#[derive(Clone, Debug)]
pub(crate) struct Channel {
    l: CMatrix,
    ldag: CMatrix,
    ldl: CMatrix,
}

impl Channel {
    pub(crate) fn new(l: CMatrix) -> Self {
        let ldag = l.adjoint();
        let ldl = ldag.dot(&l);
        Channel { l, ldag, ldl }
    }
}

/// `i (ρH − Hρ)`.
pub(crate) fn hamiltonian_part(rho: &CMatrix, h: &CMatrix) -> CMatrix {
    let mut c = rho.dot(h);
    c.gemm_acc(MINUS_ONE, h, rho);
    c.scale_mut(I);
    c
}

/// `L ρ L† − ½ (L†L ρ + ρ L†L)`.
pub(crate) fn lindblad_term(ch: &Channel, rho: &CMatrix) -> CMatrix {
    let right = rho.dot(&ch.ldag);
    let mut s = ch.l.dot(&right);
    let mut anti = CMatrix::zeros(rho.rows(), rho.cols());
    anti.gemm_acc(ONE, &ch.ldl, rho);
    anti.gemm_acc(ONE, rho, &ch.ldl);
    s.axpy(C64::new(-0.5, 0.0), &anti);
    s
}

/// `Re Tr(X ρ)` without forming the product.
pub(crate) fn expectation(x: &CMatrix, rho: &CMatrix) -> f64 {
    let n = x.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += x[(i, k)] * rho[(k, i)];
        }
    }
    acc.re
}

/// `L ρ + ρ L† − m ρ`.
pub(crate) fn measurement_term(l: &CMatrix, ldag: &CMatrix, mval: f64, rho: &CMatrix) -> CMatrix {
    let mut g = l.dot(rho);
    g.gemm_acc(ONE, rho, ldag);
    g.axpy(C64::new(-mval, 0.0), rho);
    g
}

pub(crate) fn gksl_core(h: &CMatrix, channels: &[Channel], rho: &CMatrix) -> CMatrix {
    let mut out = hamiltonian_part(rho, h);
    let mut diss = CMatrix::zeros(rho.rows(), rho.cols());
    for ch in channels {
        diss += &lindblad_term(ch, rho);
    }
    out += &diss;
    out
}

/// GKSL right-hand side `i[ρ,H] + Σ_L (LρL† − ½{ρ, L†L})`.
pub fn gksl_rhs(h: &CMatrix, ls: &[CMatrix], rho: &CMatrix) -> Result<CMatrix> {
    let n = rho.rows();
    if !rho.is_square() || h.shape() != (n, n) {
        return Err(Error::dims("gksl_rhs", format!("{n}x{n}"), format!("H {:?}, rho {:?}", h.shape(), rho.shape())));
    }
    if let Some(l) = ls.iter().find(|l| l.shape() != (n, n)) {
        return Err(Error::dims("gksl_rhs coupling", format!("{n}x{n}"), format!("{:?}", l.shape())));
    }
    let channels: Vec<Channel> = ls.iter().cloned().map(Channel::new).collect();
    Ok(gksl_core(h, &channels, rho))
}

/// Probe coupling after the quadrature substitution (`L → −iL` for phase).
fn quadrature_coupling(l: &CMatrix, q: Quadrature) -> (CMatrix, CMatrix) {
    let lq = match q {
        Quadrature::Amplitude => l.clone(),
        Quadrature::Phase => l.scale(-I),
    };
    let lq_dag = lq.adjoint();
    (lq, lq_dag)
}

/// All model operators at a fixed time, embedded into the joint space.
#[derive(Clone, Debug)]
pub struct JointGenerator {
    dims: SubsystemDims,
    hamiltonian: CMatrix,
    channels: Vec<Channel>,
    probe: Option<CMatrix>,
}

impl JointGenerator {
    pub fn new(model: &EmbeddingModel, t: f64) -> Result<Self> {
        let dims = &model.dims;
        let mut hamiltonian = embed(model.h_s.eval(t)?, &[0], dims)?;
        let mut channels = Vec::new();
        let probe = match &model.probe {
            Some(p) => {
                let full = embed(p.eval(t)?, &[0], dims)?;
                channels.push(Channel::new(full.clone()));
                Some(full)
            }
            None => None,
        };
        for (l, bath) in model.baths.iter().enumerate() {
            let mut h = embed_factors(bath.h_a.eval(t)?, &[l + 1], dims)?;
            h += &embed_factors(bath.h_sa.eval(t)?, &[0, l + 1], dims)?;
            hamiltonian += &h;
            for op in &bath.l1 {
                channels.push(Channel::new(embed_factors(op.eval(t)?, &[0, l + 1], dims)?));
            }
            for op in &bath.l2 {
                channels.push(Channel::new(embed_factors(op.eval(t)?, &[l + 1], dims)?));
            }
        }
        Ok(JointGenerator { dims: dims.clone(), hamiltonian, channels, probe })
    }

    /// Total embedded Hamiltonian `H_s + Σ_l (H_a^(l) + H_sa^(l))`.
    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// Embedded couplings in generator order: probe, then per bath `L1`, `L2`.
    pub fn couplings(&self) -> Vec<CMatrix> {
        self.channels.iter().map(|c| c.l.clone()).collect()
    }

    fn check(&self, state: &JointState) -> Result<()> {
        if state.dims != self.dims {
            return Err(Error::dims("joint state", format!("{:?}", self.dims), format!("{:?}", state.dims)));
        }
        Ok(())
    }

    pub fn drift(&self, state: &JointState) -> Result<CMatrix> {
        self.check(state)?;
        Ok(gksl_core(&self.hamiltonian, &self.channels, &state.rho))
    }

    pub fn measurement(&self, state: &JointState, q: Quadrature) -> Result<(CMatrix, f64)> {
        self.check(state)?;
        let l = self.probe.as_ref().ok_or(Error::ProbeAbsent)?;
        let (lq, lq_dag) = quadrature_coupling(l, q);
        let mval = expectation(&(&lq + &lq_dag), &state.rho);
        Ok((measurement_term(&lq, &lq_dag, mval, &state.rho), mval))
    }
}

/// Matrix elements `<φ_a| X |φ_b>` of an operator on principal ⊗ aux, each a
/// principal-space operator. Stored row-major over `(a, b)`.
#[derive(Clone, Debug)]
struct AuxElements {
    elements: Vec<CMatrix>,
    nonzero: Vec<bool>,
    d_aux: usize,
}

impl AuxElements {
    fn new(x: &CMatrix, d_s: usize, d_aux: usize) -> Self {
        let mut elements = Vec::with_capacity(d_aux * d_aux);
        for a in 0..d_aux {
            for b in 0..d_aux {
                let mut m = CMatrix::zeros(d_s, d_s);
                for p in 0..d_s {
                    for q in 0..d_s {
                        m[(p, q)] = x[(p * d_aux + a, q * d_aux + b)];
                    }
                }
                elements.push(m);
            }
        }
        let nonzero = elements.iter().map(|m| !m.is_zero()).collect();
        AuxElements { elements, nonzero, d_aux }
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> Option<&CMatrix> {
        let idx = a * self.d_aux + b;
        self.nonzero[idx].then(|| &self.elements[idx])
    }
}

/// Digit bookkeeping for one auxiliary factor inside a flattened multi-index.
#[derive(Clone, Copy, Debug)]
struct AuxDigit {
    dim: usize,
    stride: usize,
}

impl AuxDigit {
    #[inline]
    fn digit(self, flat: usize) -> usize {
        (flat / self.stride) % self.dim
    }

    /// `flat` with this factor's digit replaced by `value`.
    #[inline]
    fn with(self, flat: usize, value: usize) -> usize {
        flat - self.digit(flat) * self.stride + value * self.stride
    }
}

#[derive(Clone, Debug)]
struct BathBlockOps {
    digit: AuxDigit,
    /// Elements of `H_a ⊗ I + H_sa` over the auxiliary basis.
    hamiltonian: AuxElements,
}

#[derive(Clone, Debug)]
struct BathChannel {
    bath: usize,
    l: AuxElements,
    ldag: AuxElements,
    ldl: AuxElements,
}

/// Block-component generators at a fixed time.
#[derive(Clone, Debug)]
pub struct BlockGenerator {
    dims: SubsystemDims,
    h_s: CMatrix,
    probe: Option<Channel>,
    baths: Vec<BathBlockOps>,
    channels: Vec<BathChannel>,
    fault: Fault,
}

impl BlockGenerator {
    pub fn new(model: &EmbeddingModel, t: f64) -> Result<Self> {
        let dims = model.dims.clone();
        if model.baths.len() != dims.n_baths() {
            return Err(Error::dims("model baths", dims.n_baths(), model.baths.len()));
        }
        let d_s = dims.principal;
        let h_s = model.h_s.eval(t)?.clone();
        let probe = match &model.probe {
            Some(p) => Some(Channel::new(p.eval(t)?.clone())),
            None => None,
        };
        let mut baths = Vec::with_capacity(dims.n_baths());
        let mut channels = Vec::new();
        for (l, bath) in model.baths.iter().enumerate() {
            let d_l = dims.aux[l];
            let stride = dims.aux[l + 1..].iter().product();
            let id_s = CMatrix::identity(d_s);
            let mut h = kron(&id_s, bath.h_a.eval(t)?);
            h += bath.h_sa.eval(t)?;
            baths.push(BathBlockOps {
                digit: AuxDigit { dim: d_l, stride },
                hamiltonian: AuxElements::new(&h, d_s, d_l),
            });
            let l1 = bath.l1.iter().map(|op| op.eval(t).cloned());
            let l2 = bath.l2.iter().map(|op| op.eval(t).map(|m| kron(&id_s, m)));
            for op in l1.chain(l2) {
                let ch = Channel::new(op?);
                channels.push(BathChannel {
                    bath: l,
                    l: AuxElements::new(&ch.l, d_s, d_l),
                    ldag: AuxElements::new(&ch.ldag, d_s, d_l),
                    ldl: AuxElements::new(&ch.ldl, d_s, d_l),
                });
            }
        }
        Ok(BlockGenerator { dims, h_s, probe, baths, channels, fault: Fault::None })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    pub fn has_probe(&self) -> bool {
        self.probe.is_some()
    }

    fn check(&self, bs: &BlockState) -> Result<()> {
        if bs.dims != self.dims {
            return Err(Error::dims("block state", format!("{:?}", self.dims), format!("{:?}", bs.dims)));
        }
        Ok(())
    }

    fn sign(&self, fault: Fault) -> Option<C64> {
        (self.fault == fault).then_some(MINUS_ONE)
    }

    /// `i[ϱ^{j;k}, H_s]` on every block.
    pub fn hs_term(&self, bs: &BlockState) -> Result<BlockState> {
        self.check(bs)?;
        let mut out = bs.map_blocks(|_, _, b| hamiltonian_part(b, &self.h_s));
        if let Some(s) = self.sign(Fault::FlipPrincipalHamiltonian) {
            out.scale_mut(s);
        }
        Ok(out)
    }

    /// Projection of `i[ϱ_sa, H_a^(l) + H_sa^(l)]` (`bath` is zero-based).
    pub fn aux_term(&self, bath: usize, bs: &BlockState) -> Result<BlockState> {
        self.check(bs)?;
        let ops = self.baths.get(bath).ok_or(Error::BathOutOfRange { index: bath, count: self.baths.len() })?;
        let (digit, h) = (ops.digit, &ops.hamiltonian);
        let mut out = bs.map_blocks(|j, k, _| {
            let (jl, kl) = (digit.digit(j), digit.digit(k));
            let mut acc = CMatrix::zeros(self.dims.principal, self.dims.principal);
            for i in 0..digit.dim {
                if let Some(hik) = h.get(i, kl) {
                    acc.gemm_acc(ONE, bs.block(j, digit.with(k, i)), hik);
                }
            }
            for i in 0..digit.dim {
                if let Some(hji) = h.get(jl, i) {
                    acc.gemm_acc(MINUS_ONE, hji, bs.block(digit.with(j, i), k));
                }
            }
            acc.scale_mut(I);
            acc
        });
        if let Some(s) = self.sign(Fault::FlipAuxHamiltonian) {
            out.scale_mut(s);
        }
        Ok(out)
    }

    fn bath_channel_term(&self, ch: &BathChannel, bs: &BlockState) -> BlockState {
        let digit = self.baths[ch.bath].digit;
        let d = self.dims.principal;
        // right^{r;k} = Σ_s ϱ^{r; k[s]} <φ_s|L†|φ_{k_l}>
        let right = bs.map_blocks(|r, k, _| {
            let kl = digit.digit(k);
            let mut acc = CMatrix::zeros(d, d);
            for s in 0..digit.dim {
                if let Some(e) = ch.ldag.get(s, kl) {
                    acc.gemm_acc(ONE, bs.block(r, digit.with(k, s)), e);
                }
            }
            acc
        });
        bs.map_blocks(|j, k, _| {
            let (jl, kl) = (digit.digit(j), digit.digit(k));
            let mut sandwich = CMatrix::zeros(d, d);
            for r in 0..digit.dim {
                if let Some(e) = ch.l.get(jl, r) {
                    sandwich.gemm_acc(ONE, e, right.block(digit.with(j, r), k));
                }
            }
            let mut anti = CMatrix::zeros(d, d);
            for r in 0..digit.dim {
                if let Some(e) = ch.ldl.get(jl, r) {
                    anti.gemm_acc(ONE, e, bs.block(digit.with(j, r), k));
                }
            }
            for r in 0..digit.dim {
                if let Some(e) = ch.ldl.get(r, kl) {
                    anti.gemm_acc(ONE, bs.block(j, digit.with(k, r)), e);
                }
            }
            sandwich.axpy(C64::new(-0.5, 0.0), &anti);
            sandwich
        })
    }

    /// Projection of all dissipators: the probe's acts blockwise, each bath
    /// channel through its auxiliary matrix elements.
    pub fn dissipator_term(&self, bs: &BlockState) -> Result<BlockState> {
        self.check(bs)?;
        let mut out = BlockState::zeros(self.dims.clone());
        if let Some(p) = &self.probe {
            out.add_assign(&bs.map_blocks(|_, _, b| lindblad_term(p, b)));
        }
        for ch in &self.channels {
            out.add_assign(&self.bath_channel_term(ch, bs));
        }
        if let Some(s) = self.sign(Fault::FlipDissipator) {
            out.scale_mut(s);
        }
        Ok(out)
    }

    /// Stochastic coefficient and `Tr((L+L†) ϱ_s)` for the chosen quadrature.
    pub fn meas_term(&self, bs: &BlockState, q: Quadrature) -> Result<(BlockState, f64)> {
        self.check(bs)?;
        let p = self.probe.as_ref().ok_or(Error::ProbeAbsent)?;
        let (lq, lq_dag) = quadrature_coupling(&p.l, q);
        let mval = expectation(&(&lq + &lq_dag), &bs.reduced());
        let mut g = bs.map_blocks(|_, _, b| measurement_term(&lq, &lq_dag, mval, b));
        if let Some(s) = self.sign(Fault::FlipMeasurement) {
            g.scale_mut(s);
        }
        Ok((g, mval))
    }

    /// Coupled master-equation right-hand side (no measurement term).
    pub fn qme_rhs(&self, bs: &BlockState) -> Result<BlockState> {
        let mut out = self.hs_term(bs)?;
        for l in 0..self.baths.len() {
            out.add_assign(&self.aux_term(l, bs)?);
        }
        out.add_assign(&self.dissipator_term(bs)?);
        Ok(out)
    }
}

pub fn joint_sme_drift(model: &EmbeddingModel, t: f64, state: &JointState) -> Result<CMatrix> {
    JointGenerator::new(model, t)?.drift(state)
}

pub fn joint_sme_meas(model: &EmbeddingModel, t: f64, state: &JointState, q: Quadrature) -> Result<(CMatrix, f64)> {
    JointGenerator::new(model, t)?.measurement(state, q)
}

pub fn block_hs_term(model: &EmbeddingModel, t: f64, bs: &BlockState) -> Result<BlockState> {
    BlockGenerator::new(model, t)?.hs_term(bs)
}

pub fn block_aux_term(model: &EmbeddingModel, t: f64, bath: usize, bs: &BlockState) -> Result<BlockState> {
    BlockGenerator::new(model, t)?.aux_term(bath, bs)
}

pub fn block_dissipator_term(model: &EmbeddingModel, t: f64, bs: &BlockState) -> Result<BlockState> {
    BlockGenerator::new(model, t)?.dissipator_term(bs)
}

pub fn block_meas_term(model: &EmbeddingModel, t: f64, bs: &BlockState, q: Quadrature) -> Result<(BlockState, f64)> {
    BlockGenerator::new(model, t)?.meas_term(bs, q)
}

pub fn block_qme_rhs(model: &EmbeddingModel, t: f64, bs: &BlockState) -> Result<BlockState> {
    BlockGenerator::new(model, t)?.qme_rhs(bs)
}
