//! JSON experiment configuration.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real),
//! matrices are row-major nested arrays, and a time-dependent operator is
//! `{"segments": [{"t": 0.0, "matrix": ...}, ...]}`. See the README for the
//! full schema.

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::generators::JointState;
use crate::integrators::{Measurement, Representation, Scheme, SimConfig, State};
use crate::linalg::{kron, CMatrix, SubsystemDims, HERMITIAN_TOL};
use crate::model::{cascade_embedding, CompoundBath, EmbeddingModel, TimedOperator};
use crate::verify::{default_observables, Observable};
use crate::C64;

/// A problem at a location in the config document.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug)]
pub enum ParseError {
    Io { path: PathBuf, source: std::io::Error },
    Syntax(serde_json::Error),
    Invalid(Vec<ConfigError>),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ParseError::Syntax(e) => write!(f, "malformed JSON: {e}"),
            ParseError::Invalid(errs) => {
                write!(f, "{} validation error(s)", errs.len())?;
                for e in errs {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub trajectories: usize,
    pub observables: Vec<Observable>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: EmbeddingModel,
    pub initial: JointState,
    pub sim: SimConfig,
    pub representation: Representation,
    pub run: RunOptions,
}

impl ExperimentConfig {
    pub fn initial_state(&self) -> State {
        State::Joint(self.initial.clone())
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io { path: path.into(), source })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ParseError> {
    let doc: Value = serde_json::from_str(text).map_err(ParseError::Syntax)?;
    let mut p = Parser::default();
    let cfg = p.document(&doc);
    match cfg {
        Some(cfg) if p.errors.is_empty() => Ok(cfg),
        _ => Err(ParseError::Invalid(p.errors)),
    }
}

#[derive(Default)]
struct Parser {
    errors: Vec<ConfigError>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Parser {
    fn err(&mut self, path: &str, reason: impl Into<String>) {
        self.errors.push(ConfigError { path: path.to_string(), reason: reason.into() });
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        match v.as_object() {
            Some(m) => Some(m),
            None => {
                self.err(path, "expected an object");
                None
            }
        }
    }

    fn unknown_keys(&mut self, m: &Map<String, Value>, path: &str, known: &[&str]) {
        for k in m.keys() {
            if !known.contains(&k.as_str()) {
                self.err(&join(path, k), "unknown field");
            }
        }
    }

    fn required<'a>(&mut self, m: &'a Map<String, Value>, path: &str, key: &str) -> Option<&'a Value> {
        let v = m.get(key);
        if v.is_none() {
            self.err(&join(path, key), "missing required field");
        }
        v
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(path, "expected a finite number");
                None
            }
        }
    }

    fn count(&mut self, v: &Value, path: &str) -> Option<u64> {
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                self.err(path, "expected a non-negative integer");
                None
            }
        }
    }

    fn complex(&mut self, v: &Value, path: &str) -> Option<C64> {
        if let Some(x) = v.as_f64() {
            return Some(C64::new(x, 0.0));
        }
        match v.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) if re.is_finite() && im.is_finite() => Some(C64::new(re, im)),
                _ => {
                    self.err(path, "complex entry must be [re, im] with finite numbers");
                    None
                }
            },
            _ => {
                self.err(path, "complex entry must be [re, im]");
                None
            }
        }
    }

    fn matrix(&mut self, v: &Value, path: &str) -> Option<CMatrix> {
        let Some(rows) = v.as_array() else {
            self.err(path, "matrix must be an array of rows");
            return None;
        };
        let n = rows.len();
        if n == 0 {
            self.err(path, "matrix must not be empty");
            return None;
        }
        let mut data = Vec::with_capacity(n * n);
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            let rp = format!("{path}[{i}]");
            match row.as_array() {
                Some(r) if r.len() == n => {
                    for (j, e) in r.iter().enumerate() {
                        match self.complex(e, &format!("{rp}[{j}]")) {
                            Some(z) => data.push(z),
                            None => ok = false,
                        }
                    }
                }
                Some(r) => {
                    self.err(&rp, format!("row has {} entries; matrices must be square ({n}x{n})", r.len()));
                    ok = false;
                }
                None => {
                    self.err(&rp, "row must be an array");
                    ok = false;
                }
            }
        }
        if !ok {
            return None;
        }
        CMatrix::from_vec(n, n, data).ok()
    }

    fn operator(&mut self, v: &Value, path: &str) -> Option<TimedOperator> {
        let Some(m) = v.as_object() else {
            return self.matrix(v, path).map(TimedOperator::constant);
        };
        self.unknown_keys(m, path, &["segments"]);
        let segs_path = join(path, "segments");
        let Some(segs) = self.required(m, path, "segments") else { return None };
        let Some(segs) = segs.as_array() else {
            self.err(&segs_path, "expected an array of {t, matrix} objects");
            return None;
        };
        let mut out = Vec::new();
        let mut ok = true;
        for (i, s) in segs.iter().enumerate() {
            let sp = format!("{segs_path}[{i}]");
            let Some(sm) = self.object(s, &sp) else {
                ok = false;
                continue;
            };
            self.unknown_keys(sm, &sp, &["t", "matrix"]);
            let t = self.required(sm, &sp, "t").and_then(|t| self.number(t, &join(&sp, "t")));
            let mat = self.required(sm, &sp, "matrix").and_then(|x| self.matrix(x, &join(&sp, "matrix")));
            match (t, mat) {
                (Some(t), Some(mat)) => out.push((t, mat)),
                _ => ok = false,
            }
        }
        if !ok {
            return None;
        }
        match TimedOperator::piecewise(out) {
            Ok(op) => Some(op),
            Err(e) => {
                self.err(&segs_path, e.to_string());
                None
            }
        }
    }

    fn operator_list(&mut self, v: Option<&Value>, path: &str) -> Option<Vec<TimedOperator>> {
        let Some(v) = v else { return Some(Vec::new()) };
        let Some(items) = v.as_array() else {
            self.err(path, "expected an array of operators");
            return None;
        };
        let ops: Vec<Option<TimedOperator>> =
            items.iter().enumerate().map(|(i, x)| self.operator(x, &format!("{path}[{i}]"))).collect();
        ops.into_iter().collect()
    }

    fn dims(&mut self, v: &Value, path: &str) -> Option<SubsystemDims> {
        let m = self.object(v, path)?;
        self.unknown_keys(m, path, &["principal", "aux"]);
        let principal = self.required(m, path, "principal").and_then(|x| self.count(x, &join(path, "principal")));
        let aux_path = join(path, "aux");
        let aux = match m.get("aux") {
            None => Some(Vec::new()),
            Some(Value::Array(a)) => {
                let v: Vec<Option<u64>> =
                    a.iter().enumerate().map(|(i, x)| self.count(x, &format!("{aux_path}[{i}]"))).collect();
                v.into_iter().collect::<Option<Vec<_>>>()
            }
            Some(_) => {
                self.err(&aux_path, "expected an array of dimensions");
                None
            }
        };
        let (principal, aux) = (principal?, aux?);
        match SubsystemDims::new(principal as usize, aux.into_iter().map(|d| d as usize).collect()) {
            Ok(d) => Some(d),
            Err(e) => {
                self.err(path, e.to_string());
                None
            }
        }
    }

    fn bath(&mut self, v: &Value, path: &str, d_s: usize, d_a: usize) -> Option<CompoundBath> {
        let m = self.object(v, path)?;
        self.unknown_keys(m, path, &["H_a", "H_sa", "L1", "L2"]);
        let inert = CompoundBath::inert(d_s, d_a);
        let h_a = m.get("H_a").map(|x| self.operator(x, &join(path, "H_a"))).unwrap_or(Some(inert.h_a));
        let h_sa = m.get("H_sa").map(|x| self.operator(x, &join(path, "H_sa"))).unwrap_or(Some(inert.h_sa));
        let l1 = self.operator_list(m.get("L1"), &join(path, "L1"));
        let l2 = self.operator_list(m.get("L2"), &join(path, "L2"));
        Some(CompoundBath { h_a: h_a?, h_sa: h_sa?, l1: l1?, l2: l2? })
    }

    fn explicit_model(&mut self, m: &Map<String, Value>, path: &str) -> Option<EmbeddingModel> {
        self.unknown_keys(m, path, &["dims", "H_s", "probe", "baths"]);
        let dims = self.required(m, path, "dims").and_then(|d| self.dims(d, &join(path, "dims")));
        let h_s = self.required(m, path, "H_s").and_then(|x| self.operator(x, &join(path, "H_s")));
        let probe = match m.get("probe") {
            None | Some(Value::Null) => Some(None),
            Some(x) => self.operator(x, &join(path, "probe")).map(Some),
        };
        let dims = dims?;
        let baths_path = join(path, "baths");
        let baths = match m.get("baths") {
            None => Some(dims.aux.iter().map(|&d| CompoundBath::inert(dims.principal, d)).collect()),
            Some(Value::Array(items)) => {
                if items.len() != dims.n_baths() {
                    self.err(&baths_path, format!("{} baths but dims.aux lists {}", items.len(), dims.n_baths()));
                    None
                } else {
                    let v: Vec<Option<CompoundBath>> = items
                        .iter()
                        .zip(&dims.aux)
                        .enumerate()
                        .map(|(l, (b, &d))| self.bath(b, &format!("{baths_path}[{l}]"), dims.principal, d))
                        .collect();
                    v.into_iter().collect()
                }
            }
            Some(_) => {
                self.err(&baths_path, "expected an array of baths");
                None
            }
        };
        Some(EmbeddingModel { dims, h_s: h_s?, probe: probe?, baths: baths? })
    }

    fn cascade_model(&mut self, m: &Map<String, Value>, path: &str) -> Option<EmbeddingModel> {
        self.unknown_keys(m, path, &["cascade", "probe"]);
        let cp = join(path, "cascade");
        let c = self.object(&m["cascade"], &cp)?;
        self.unknown_keys(c, &cp, &["H_s", "L_s", "H_a", "L_a"]);
        let get = |p: &mut Self, key: &str| p.required(c, &cp, key).and_then(|x| p.operator(x, &join(&cp, key)));
        let h_s = get(self, "H_s");
        let l_s = get(self, "L_s");
        let h_a = get(self, "H_a");
        let l_a = get(self, "L_a");
        let probe = match m.get("probe") {
            None | Some(Value::Null) => Some(None),
            Some(x) => self.operator(x, &join(path, "probe")).map(Some),
        };
        let (h_s, l_s, h_a, l_a, probe) = (h_s?, l_s?, h_a?, l_a?, probe?);
        let d_s = h_s.shape().0;
        let d_a = h_a.shape().0;
        let mut ok = true;
        for (key, op, n, herm) in [("H_s", &h_s, d_s, true), ("L_s", &l_s, d_s, false), ("H_a", &h_a, d_a, true), ("L_a", &l_a, d_a, false)] {
            ok &= self.check_operator(op, &join(&cp, key), n, herm);
        }
        if !ok {
            return None;
        }
        match cascade_embedding(h_s, l_s, h_a, l_a) {
            Ok(mut model) => {
                model.probe = probe;
                Some(model)
            }
            Err(e) => {
                self.err(&cp, e.to_string());
                None
            }
        }
    }

    fn check_operator(&mut self, op: &TimedOperator, path: &str, n: usize, hermitian: bool) -> bool {
        let mut ok = true;
        let many = op.segments().len() > 1;
        for (i, seg) in op.segments().iter().enumerate() {
            let sp = if many { format!("{path}.segments[{i}].matrix") } else { path.to_string() };
            if seg.matrix.shape() != (n, n) {
                self.err(&sp, format!("dimension {}x{} but expected {n}x{n}", seg.matrix.rows(), seg.matrix.cols()));
                ok = false;
            } else if hermitian && seg.matrix.hermiticity_defect() > HERMITIAN_TOL {
                self.err(&sp, format!("hermiticity defect {:.3e} exceeds {HERMITIAN_TOL:e}", seg.matrix.hermiticity_defect()));
                ok = false;
            }
        }
        ok
    }

    fn model(&mut self, v: &Value, path: &str) -> Option<EmbeddingModel> {
        let m = self.object(v, path)?;
        let model = if m.contains_key("cascade") { self.cascade_model(m, path)? } else { self.explicit_model(m, path)? };
        let violations = model.validate();
        for v in &violations {
            let mut loc = join(path, &v.operator);
            let op = model.operators().into_iter().find(|(r, _)| r.to_string() == v.operator).map(|(_, op)| op);
            if let (Some(s), Some(op)) = (v.segment, op) {
                if op.segments().len() > 1 {
                    loc = format!("{loc}.segments[{s}].matrix");
                }
            }
            self.err(&loc, v.kind.to_string());
        }
        violations.is_empty().then_some(model)
    }

    fn initial(&mut self, v: Option<&Value>, path: &str, dims: &SubsystemDims) -> Option<JointState> {
        let rho = match v {
            None => {
                let mut rho = CMatrix::identity(1);
                for d in dims.factors() {
                    rho = kron(&rho, &crate::linalg::ops::projector(d, 0));
                }
                rho
            }
            Some(v) => {
                let m = self.object(v, path)?;
                self.unknown_keys(m, path, &["joint", "product"]);
                match (m.get("joint"), m.get("product")) {
                    (Some(j), None) => self.matrix(j, &join(path, "joint"))?,
                    (None, Some(Value::Array(items))) => {
                        let pp = join(path, "product");
                        if items.len() != dims.factors().len() {
                            self.err(&pp, format!("expected {} factors (principal then auxiliaries)", dims.factors().len()));
                            return None;
                        }
                        let mut rho = CMatrix::identity(1);
                        for (f, x) in items.iter().enumerate() {
                            let fp = format!("{pp}[{f}]");
                            let x = self.matrix(x, &fp)?;
                            if x.rows() != dims.factor(f) {
                                self.err(&fp, format!("dimension {} but factor has dimension {}", x.rows(), dims.factor(f)));
                                return None;
                            }
                            rho = kron(&rho, &x);
                        }
                        rho
                    }
                    _ => {
                        self.err(path, "give exactly one of \"joint\" (matrix) or \"product\" (array of factor matrices)");
                        return None;
                    }
                }
            }
        };
        let state = match JointState::new(dims.clone(), rho) {
            Ok(s) => s,
            Err(e) => {
                self.err(path, e.to_string());
                return None;
            }
        };
        match state.validated() {
            Ok(s) => Some(s),
            Err(e) => {
                self.err(path, e.to_string());
                None
            }
        }
    }

    fn sim(&mut self, v: Option<&Value>, path: &str) -> Option<(SimConfig, Representation)> {
        let Some(v) = v else {
            self.err(path, "missing required field");
            return None;
        };
        let m = self.object(v, path)?;
        self.unknown_keys(m, path, &["dt", "t_end", "scheme", "measurement", "seed", "snapshot_stride", "representation"]);
        let dt = self.required(m, path, "dt").and_then(|x| self.number(x, &join(path, "dt")));
        let t_end = self.required(m, path, "t_end").and_then(|x| self.number(x, &join(path, "t_end")));
        let dt = dt.filter(|&x| {
            let ok = x > 0.0 && x.is_finite();
            if !ok {
                self.err(&join(path, "dt"), format!("must be positive and finite, got {x}"));
            }
            ok
        });
        let t_end = t_end.filter(|&x| {
            let ok = x >= 0.0 && x.is_finite();
            if !ok {
                self.err(&join(path, "t_end"), format!("must be non-negative and finite, got {x}"));
            }
            ok
        });
        let scheme = match m.get("scheme").map(|x| x.as_str()) {
            None | Some(Some("euler-maruyama")) => Some(Scheme::EulerMaruyama),
            Some(Some("rk4")) => Some(Scheme::Rk4),
            _ => {
                self.err(&join(path, "scheme"), "expected \"euler-maruyama\" or \"rk4\"");
                None
            }
        };
        let measurement = match m.get("measurement").map(|x| x.as_str()) {
            None | Some(Some("none")) => Some(Measurement::None),
            Some(Some("amplitude")) => Some(Measurement::Amplitude),
            Some(Some("phase")) => Some(Measurement::Phase),
            _ => {
                self.err(&join(path, "measurement"), "expected \"amplitude\", \"phase\" or \"none\"");
                None
            }
        };
        let representation = match m.get("representation").map(|x| x.as_str()) {
            None | Some(Some("blocks")) => Some(Representation::Blocks),
            Some(Some("joint")) => Some(Representation::Joint),
            _ => {
                self.err(&join(path, "representation"), "expected \"blocks\" or \"joint\"");
                None
            }
        };
        let seed = m.get("seed").map(|x| self.count(x, &join(path, "seed"))).unwrap_or(Some(0));
        let stride = m.get("snapshot_stride").map(|x| self.count(x, &join(path, "snapshot_stride"))).unwrap_or(Some(1));
        let cfg = SimConfig {
            dt: dt?,
            t_end: t_end?,
            scheme: scheme?,
            measurement: measurement?,
            seed: seed?,
            snapshot_stride: stride? as usize,
        };
        if let Err(e) = cfg.validate() {
            self.err(path, e.to_string());
            return None;
        }
        Some((cfg, representation?))
    }

    fn run(&mut self, v: Option<&Value>, path: &str, d_s: usize) -> Option<RunOptions> {
        let mut run = RunOptions { trajectories: 1000, observables: default_observables(d_s), output: None };
        let Some(v) = v else { return Some(run) };
        let m = self.object(v, path)?;
        self.unknown_keys(m, path, &["trajectories", "observables", "output"]);
        let mut ok = true;
        if let Some(x) = m.get("trajectories") {
            match self.count(x, &join(path, "trajectories")) {
                Some(n) if n >= 2 => run.trajectories = n as usize,
                Some(_) => {
                    self.err(&join(path, "trajectories"), "need at least 2 trajectories");
                    ok = false;
                }
                None => ok = false,
            }
        }
        if let Some(x) = m.get("observables") {
            let op = join(path, "observables");
            match x.as_array() {
                Some(items) => {
                    let mut obs = Vec::new();
                    for (i, item) in items.iter().enumerate() {
                        let ip = format!("{op}[{i}]");
                        let Some(im) = self.object(item, &ip) else {
                            ok = false;
                            continue;
                        };
                        self.unknown_keys(im, &ip, &["name", "matrix"]);
                        let name = match im.get("name").and_then(Value::as_str) {
                            Some(n) => Some(n.to_string()),
                            None => {
                                self.err(&join(&ip, "name"), "expected a string");
                                None
                            }
                        };
                        let mat = self.required(im, &ip, "matrix").and_then(|x| self.matrix(x, &join(&ip, "matrix")));
                        match (name, mat) {
                            (Some(n), Some(mat)) if mat.rows() == d_s => obs.push(Observable::new(n, mat)),
                            (Some(_), Some(mat)) => {
                                self.err(&join(&ip, "matrix"), format!("dimension {} but principal has {d_s}", mat.rows()));
                                ok = false;
                            }
                            _ => ok = false,
                        }
                    }
                    run.observables = obs;
                }
                None => {
                    self.err(&op, "expected an array of {name, matrix} objects");
                    ok = false;
                }
            }
        }
        if let Some(x) = m.get("output") {
            match x.as_str() {
                Some(s) => run.output = Some(PathBuf::from(s)),
                None => {
                    self.err(&join(path, "output"), "expected a path string");
                    ok = false;
                }
            }
        }
        ok.then_some(run)
    }

    fn document(&mut self, doc: &Value) -> Option<ExperimentConfig> {
        let m = self.object(doc, "$")?;
        self.unknown_keys(m, "", &["model", "initial", "sim", "run"]);
        let model = self.required(m, "", "model").and_then(|v| self.model(v, "model"));
        let sim = self.sim(m.get("sim"), "sim");
        let model = model?;
        let initial = self.initial(m.get("initial"), "initial", &model.dims);
        let run = self.run(m.get("run"), "run", model.dims.principal);
        let (sim, representation) = sim?;
        if sim.measurement != Measurement::None && model.probe.is_none() {
            self.err("sim.measurement", "a homodyne measurement needs model.probe");
            return None;
        }
        Some(ExperimentConfig { model, initial: initial?, sim, representation, run: run? })
    }
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_json(x: &CMatrix) -> Value {
    Value::Array((0..x.rows()).map(|i| Value::Array((0..x.cols()).map(|j| complex_json(x[(i, j)])).collect())).collect())
}

fn operator_json(op: &TimedOperator) -> Value {
    match op.segments() {
        [only] if only.start == 0.0 => matrix_json(&only.matrix),
        segs => json!({
            "segments": segs.iter().map(|s| json!({"t": s.start, "matrix": matrix_json(&s.matrix)})).collect::<Vec<_>>()
        }),
    }
}

/// The explicit-form document for `cfg`; parsing it yields an equal config.
pub fn normalized_json(cfg: &ExperimentConfig) -> Value {
    let m = &cfg.model;
    let baths: Vec<Value> = m
        .baths
        .iter()
        .map(|b| {
            json!({
                "H_a": operator_json(&b.h_a),
                "H_sa": operator_json(&b.h_sa),
                "L1": b.l1.iter().map(operator_json).collect::<Vec<_>>(),
                "L2": b.l2.iter().map(operator_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut model = json!({
        "dims": {"principal": m.dims.principal, "aux": m.dims.aux},
        "H_s": operator_json(&m.h_s),
        "baths": baths,
    });
    if let Some(p) = &m.probe {
        model["probe"] = operator_json(p);
    }
    let s = &cfg.sim;
    let mut run = json!({
        "trajectories": cfg.run.trajectories,
        "observables": cfg.run.observables.iter().map(|o| json!({"name": o.name, "matrix": matrix_json(&o.matrix)})).collect::<Vec<_>>(),
    });
    if let Some(out) = &cfg.run.output {
        run["output"] = json!(out.to_string_lossy());
    }
    json!({
        "model": model,
        "initial": {"joint": matrix_json(&cfg.initial.rho)},
        "sim": {
            "dt": s.dt,
            "t_end": s.t_end,
            "scheme": match s.scheme { Scheme::EulerMaruyama => "euler-maruyama", Scheme::Rk4 => "rk4" },
            "measurement": match s.measurement {
                Measurement::None => "none",
                Measurement::Amplitude => "amplitude",
                Measurement::Phase => "phase",
            },
            "seed": s.seed,
            "snapshot_stride": s.snapshot_stride,
            "representation": match cfg.representation { Representation::Blocks => "blocks", Representation::Joint => "joint" },
        },
        "run": run,
    })
}

pub fn normalized_string(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    write_value(&normalized_json(cfg), 0, &mut out);
    out.push('\n');
    out
}

/// Indented JSON with numeric rows (and `[re, im]` pairs) kept on one line.
fn write_value(v: &Value, indent: usize, out: &mut String) {
    let numeric_row = |v: &Value| {
        v.as_array().is_some_and(|a| a.iter().all(|x| x.is_number() || x.as_array().is_some_and(|p| p.iter().all(Value::is_number))))
    };
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) if !items.is_empty() && !numeric_row(v) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        _ => out.push_str(&v.to_string()),
    }
}
