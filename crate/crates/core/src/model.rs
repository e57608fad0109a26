//! Markovian embedding models: a principal system coupled to `M` compound
//! baths, each an auxiliary system driven by vacuum white-noise fields.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, SubsystemDims, HERMITIAN_TOL};

/// One piece of a piecewise-constant schedule, active from `start` onwards.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub matrix: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    PiecewiseConstant,
}

/// A right-continuous, piecewise-constant operator-valued function of time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedOperator {
    segments: Vec<Segment>,
}

impl TimedOperator {
    pub fn constant(matrix: CMatrix) -> Self {
        TimedOperator { segments: vec![Segment { start: 0.0, matrix }] }
    }

    /// Segments must start at `t = 0`, have strictly increasing start times
    /// and share one shape.
    pub fn piecewise(segments: Vec<(f64, CMatrix)>) -> Result<Self> {
        let Some((first, _)) = segments.first() else {
            return Err(Error::InvalidConfig("schedule has no segments".into()));
        };
        if *first != 0.0 {
            return Err(Error::InvalidConfig(format!("first segment starts at {first}, expected 0")));
        }
        if let Some(w) = segments.windows(2).find(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidConfig(format!(
                "segment start times not strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
        let shape = segments[0].1.shape();
        if let Some((i, (_, m))) = segments.iter().enumerate().find(|(_, (_, m))| m.shape() != shape) {
            return Err(Error::dims(format!("schedule segment {i}"), format!("{shape:?}"), format!("{:?}", m.shape())));
        }
        Ok(TimedOperator {
            segments: segments.into_iter().map(|(start, matrix)| Segment { start, matrix }).collect(),
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(CMatrix::zeros(n, n))
    }

    pub fn kind(&self) -> ScheduleKind {
        if self.segments.len() == 1 {
            ScheduleKind::Constant
        } else {
            ScheduleKind::PiecewiseConstant
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn shape(&self) -> (usize, usize) {
        self.segments[0].matrix.shape()
    }

    /// Value at time `t`; a segment boundary belongs to the later segment.
    pub fn eval(&self, t: f64) -> Result<&CMatrix> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.at(t))
    }

    pub(crate) fn at(&self, t: f64) -> &CMatrix {
        let idx = self.segments.partition_point(|s| s.start <= t).max(1) - 1;
        &self.segments[idx].matrix
    }

    pub fn is_identically_zero(&self) -> bool {
        self.segments.iter().all(|s| s.matrix.is_zero())
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> TimedOperator {
        TimedOperator {
            segments: self.segments.iter().map(|s| Segment { start: s.start, matrix: f(&s.matrix) }).collect(),
        }
    }

    /// Pointwise combination of several schedules on the union of their
    /// breakpoints.
    pub fn combine(ops: &[&TimedOperator], f: impl Fn(&[&CMatrix]) -> CMatrix) -> TimedOperator {
        let mut starts: Vec<f64> = ops.iter().flat_map(|op| op.segments.iter().map(|s| s.start)).collect();
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        let segments = starts
            .into_iter()
            .map(|start| {
                let values: Vec<&CMatrix> = ops.iter().map(|op| op.at(start)).collect();
                Segment { start, matrix: f(&values) }
            })
            .collect();
        TimedOperator { segments }
    }
}

impl From<CMatrix> for TimedOperator {
    fn from(m: CMatrix) -> Self {
        TimedOperator::constant(m)
    }
}

/// An auxiliary system together with the fields it couples to.
///
/// `h_a` acts on the auxiliary alone, `h_sa` on principal ⊗ auxiliary. Each
/// `l1` operator couples principal ⊗ auxiliary to a field (a feedback or
/// cascade interconnection); each `l2` operator couples the auxiliary alone.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundBath {
    pub h_a: TimedOperator,
    pub h_sa: TimedOperator,
    pub l1: Vec<TimedOperator>,
    pub l2: Vec<TimedOperator>,
}

impl CompoundBath {
    /// Bath with zero Hamiltonians and no field couplings.
    pub fn inert(d_s: usize, d_aux: usize) -> Self {
        CompoundBath {
            h_a: TimedOperator::zeros(d_aux),
            h_sa: TimedOperator::zeros(d_s * d_aux),
            l1: Vec::new(),
            l2: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub dims: SubsystemDims,
    pub h_s: TimedOperator,
    /// Coupling of the principal to the measured probe field.
    pub probe: Option<TimedOperator>,
    pub baths: Vec<CompoundBath>,
}

/// Identifies an operator slot in a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorRole {
    Hs,
    Probe,
    Ha(usize),
    Hsa(usize),
    L1(usize, usize),
    L2(usize, usize),
}

impl OperatorRole {
    /// Factor slots the operator acts on, in canonical order.
    pub fn slots(self) -> Vec<usize> {
        match self {
            OperatorRole::Hs | OperatorRole::Probe => vec![0],
            OperatorRole::Ha(l) | OperatorRole::L2(l, _) => vec![l + 1],
            OperatorRole::Hsa(l) | OperatorRole::L1(l, _) => vec![0, l + 1],
        }
    }

    pub fn must_be_hermitian(self) -> bool {
        matches!(self, OperatorRole::Hs | OperatorRole::Ha(_) | OperatorRole::Hsa(_))
    }
}

impl fmt::Display for OperatorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorRole::Hs => write!(f, "H_s"),
            OperatorRole::Probe => write!(f, "probe"),
            OperatorRole::Ha(l) => write!(f, "baths[{l}].H_a"),
            OperatorRole::Hsa(l) => write!(f, "baths[{l}].H_sa"),
            OperatorRole::L1(l, k) => write!(f, "baths[{l}].L1[{k}]"),
            OperatorRole::L2(l, k) => write!(f, "baths[{l}].L2[{k}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    Hermiticity { defect: f64 },
    Dimension { expected: usize, found: (usize, usize) },
    Schedule(String),
    BathCount { expected: usize, found: usize },
}

/// A failed model invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Operator path such as `H_s` or `baths[0].L1[1]`; `baths` for count errors.
    pub operator: String,
    pub segment: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Hermiticity { defect } => {
                write!(f, "hermiticity defect {defect:.3e} exceeds {HERMITIAN_TOL:e}")
            }
            ViolationKind::Dimension { expected, found } => {
                write!(f, "dimension {}x{} but expected {expected}x{expected}", found.0, found.1)
            }
            ViolationKind::Schedule(msg) => write!(f, "schedule {msg}"),
            ViolationKind::BathCount { expected, found } => {
                write!(f, "{found} baths but dims list {expected} auxiliaries")
            }
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.operator)?;
        if let Some(s) = self.segment {
            write!(f, " segment {s}")?;
        }
        write!(f, ": {}", self.kind)
    }
}

impl EmbeddingModel {
    /// Model with Hamiltonian `h_s`, no probe and inert baths.
    pub fn closed(dims: SubsystemDims, h_s: impl Into<TimedOperator>) -> Self {
        let baths = dims.aux.iter().map(|&d| CompoundBath::inert(dims.principal, d)).collect();
        EmbeddingModel { dims, h_s: h_s.into(), probe: None, baths }
    }

    pub fn with_probe(mut self, probe: impl Into<TimedOperator>) -> Self {
        self.probe = Some(probe.into());
        self
    }

    /// Every operator together with its role, in canonical order: `H_s`,
    /// probe, then per bath `H_a`, `H_sa`, `L1[..]`, `L2[..]`.
    pub fn operators(&self) -> Vec<(OperatorRole, &TimedOperator)> {
        let mut out = vec![(OperatorRole::Hs, &self.h_s)];
        if let Some(p) = &self.probe {
            out.push((OperatorRole::Probe, p));
        }
        for (l, bath) in self.baths.iter().enumerate() {
            out.push((OperatorRole::Ha(l), &bath.h_a));
            out.push((OperatorRole::Hsa(l), &bath.h_sa));
            out.extend(bath.l1.iter().enumerate().map(|(k, op)| (OperatorRole::L1(l, k), op)));
            out.extend(bath.l2.iter().enumerate().map(|(k, op)| (OperatorRole::L2(l, k), op)));
        }
        out
    }

    /// All distinct segment start times, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut bp: Vec<f64> = self
            .operators()
            .into_iter()
            .flat_map(|(_, op)| op.segments().iter().map(|s| s.start))
            .collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        bp
    }

    /// The half-open interval `[start, end)` containing `t` on which every
    /// operator of the model is constant.
    pub fn constant_interval(&self, t: f64) -> (f64, f64) {
        let bp = self.breakpoints();
        let idx = bp.partition_point(|&b| b <= t);
        let start = if idx == 0 { 0.0 } else { bp[idx - 1] };
        let end = bp.get(idx).copied().unwrap_or(f64::INFINITY);
        (start, end)
    }

    /// True when no field couples to the embedding (all `L1`, `L2` and the
    /// probe vanish identically).
    pub fn is_closed(&self) -> bool {
        self.operators().into_iter().all(|(role, op)| match role {
            OperatorRole::Probe | OperatorRole::L1(..) | OperatorRole::L2(..) => op.is_identically_zero(),
            _ => true,
        })
    }

    /// Checks every model invariant on every schedule segment.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.baths.len() != self.dims.n_baths() {
            out.push(Violation {
                operator: "baths".into(),
                segment: None,
                kind: ViolationKind::BathCount { expected: self.dims.n_baths(), found: self.baths.len() },
            });
        }
        for (role, op) in self.operators() {
            let slots = role.slots();
            let expected = if slots.iter().all(|&s| s <= self.dims.n_baths()) {
                Some(slots.iter().map(|&s| self.dims.factor(s)).product::<usize>())
            } else {
                None
            };
            let segments = op.segments();
            if segments.first().map(|s| s.start) != Some(0.0) {
                out.push(Violation {
                    operator: role.to_string(),
                    segment: Some(0),
                    kind: ViolationKind::Schedule("does not start at t = 0".into()),
                });
            }
            for (i, seg) in segments.iter().enumerate() {
                if i > 0 && !(seg.start > segments[i - 1].start) {
                    out.push(Violation {
                        operator: role.to_string(),
                        segment: Some(i),
                        kind: ViolationKind::Schedule("start times not strictly increasing".into()),
                    });
                }
                if let Some(n) = expected {
                    if seg.matrix.shape() != (n, n) {
                        out.push(Violation {
                            operator: role.to_string(),
                            segment: Some(i),
                            kind: ViolationKind::Dimension { expected: n, found: seg.matrix.shape() },
                        });
                        continue;
                    }
                }
                if role.must_be_hermitian() {
                    let defect = seg.matrix.hermiticity_defect();
                    if defect > HERMITIAN_TOL {
                        out.push(Violation {
                            operator: role.to_string(),
                            segment: Some(i),
                            kind: ViolationKind::Hermiticity { defect },
                        });
                    }
                }
            }
        }
        out
    }

    /// Returns the model if it validates cleanly.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(v))
        }
    }
}

fn require_hermitian(op: &TimedOperator, what: &str) -> Result<()> {
    for seg in op.segments() {
        if !seg.matrix.is_square() {
            return Err(Error::dims(what, "square matrix", format!("{:?}", seg.matrix.shape())));
        }
        let defect = seg.matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { what: what.into(), defect });
        }
    }
    Ok(())
}

fn require_shape(op: &TimedOperator, n: usize, what: &str) -> Result<()> {
    if op.shape() != (n, n) {
        return Err(Error::dims(what, format!("{n}x{n}"), format!("{:?}", op.shape())));
    }
    Ok(())
}

/// Cascade (series) embedding: the auxiliary's output field drives the
/// principal.
///
/// The connection induces `H_sa = (L_s† L_a − L_a† L_s) / 2i` and the joint
/// field coupling `L_sa = L_s + L_a`, both on principal ⊗ auxiliary.
pub fn cascade_embedding(
    h_s: impl Into<TimedOperator>,
    l_s: impl Into<TimedOperator>,
    h_a: impl Into<TimedOperator>,
    l_a: impl Into<TimedOperator>,
) -> Result<EmbeddingModel> {
    let (h_s, l_s, h_a, l_a) = (h_s.into(), l_s.into(), h_a.into(), l_a.into());
    require_hermitian(&h_s, "H_s")?;
    require_hermitian(&h_a, "H_a")?;
    let d_s = h_s.shape().0;
    let d_a = h_a.shape().0;
    require_shape(&l_s, d_s, "L_s")?;
    require_shape(&l_a, d_a, "L_a")?;

    let ls_full = l_s.map(|m| kron(m, &CMatrix::identity(d_a)));
    let la_full = l_a.map(|m| kron(&CMatrix::identity(d_s), m));
    let h_sa = TimedOperator::combine(&[&ls_full, &la_full], |v| {
        let (ls, la) = (v[0], v[1]);
        let mut x = ls.adjoint().dot(la);
        x -= &la.adjoint().dot(ls);
        // 1/(2i) = -i/2
        x.scale(C64::new(0.0, -0.5))
    });
    let l_sa = TimedOperator::combine(&[&ls_full, &la_full], |v| v[0] + v[1]);

    let dims = SubsystemDims::new(d_s, vec![d_a])?;
    Ok(EmbeddingModel {
        dims,
        h_s,
        probe: None,
        baths: vec![CompoundBath { h_a, h_sa, l1: vec![l_sa], l2: Vec::new() }],
    })
}

/// Direct-coupling embedding: the principal talks to the auxiliary only
/// through `h_sa`, and the field couples to the auxiliary alone via `l_a`.
pub fn direct_embedding(
    h_s: impl Into<TimedOperator>,
    h_a: impl Into<TimedOperator>,
    h_sa: impl Into<TimedOperator>,
    l_a: impl Into<TimedOperator>,
) -> Result<EmbeddingModel> {
    let (h_s, h_a, h_sa, l_a) = (h_s.into(), h_a.into(), h_sa.into(), l_a.into());
    require_hermitian(&h_s, "H_s")?;
    require_hermitian(&h_a, "H_a")?;
    require_hermitian(&h_sa, "H_sa")?;
    let d_s = h_s.shape().0;
    let d_a = h_a.shape().0;
    require_shape(&h_sa, d_s * d_a, "H_sa")?;
    require_shape(&l_a, d_a, "L_a")?;
    Ok(EmbeddingModel {
        dims: SubsystemDims::new(d_s, vec![d_a])?,
        h_s,
        probe: None,
        baths: vec![CompoundBath { h_a, h_sa, l1: Vec::new(), l2: vec![l_a] }],
    })
}
