//! Brute-force reference implementations written directly from the
//! definitions, with no shared code paths beyond `CMatrix` storage.

#![allow(dead_code)]

use markov_embed::{CMatrix, EmbeddingModel, SubsystemDims, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m, p) = (a.rows(), a.cols(), b.cols());
    let mut out = CMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..m {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.cols(), a.rows());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

pub fn lin(terms: &[(C64, &CMatrix)]) -> CMatrix {
    let (n, m) = terms[0].1.shape();
    let mut out = CMatrix::zeros(n, m);
    for (c, x) in terms {
        for i in 0..n {
            for j in 0..m {
                out[(i, j)] += *c * x[(i, j)];
            }
        }
    }
    out
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Aux multi-index of flat index `j`, first auxiliary most significant.
pub fn digits(dims: &SubsystemDims, mut j: usize) -> Vec<usize> {
    let mut out = vec![0; dims.aux.len()];
    for (slot, &d) in dims.aux.iter().enumerate().rev() {
        out[slot] = j % d;
        j /= d;
    }
    out
}

/// Full-space matrix of `x`, where `x` acts on the principal (when
/// `with_principal`) and optionally one auxiliary `aux`.
pub fn lift(dims: &SubsystemDims, x: &CMatrix, with_principal: bool, aux: Option<usize>) -> CMatrix {
    let a = dims.aux.iter().product::<usize>();
    let ds = dims.principal;
    let n = ds * a;
    let da = aux.map(|l| dims.aux[l]).unwrap_or(1);
    let mut out = CMatrix::zeros(n, n);
    for row in 0..n {
        for col in 0..n {
            let (p, jf) = (row / a, row % a);
            let (q, kf) = (col / a, col % a);
            let (jd, kd) = (digits(dims, jf), digits(dims, kf));
            let spectators_match = (0..dims.aux.len()).all(|m| Some(m) == aux || jd[m] == kd[m]);
            if !spectators_match || (!with_principal && p != q) {
                continue;
            }
            let (jl, kl) = aux.map(|l| (jd[l], kd[l])).unwrap_or((0, 0));
            let (pp, qq) = if with_principal { (p, q) } else { (0, 0) };
            out[(row, col)] = x[(pp * da + jl, qq * da + kl)];
        }
    }
    out
}

/// `−i[H, ρ]`
pub fn comm(h: &CMatrix, rho: &CMatrix) -> CMatrix {
    lin(&[(-I, &matmul(h, rho)), (I, &matmul(rho, h))])
}

/// `LρL† − ½{L†L, ρ}`
pub fn dissipator(l: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ld = dagger(l);
    let ldl = matmul(&ld, l);
    lin(&[
        (one(), &matmul(&matmul(l, rho), &ld)),
        (C64::new(-0.5, 0.0), &matmul(&ldl, rho)),
        (C64::new(-0.5, 0.0), &matmul(rho, &ldl)),
    ])
}

/// `(Lρ + ρL† − Tr((L+L†)ρ) ρ, Tr((L+L†)ρ))`
pub fn meas(l: &CMatrix, rho: &CMatrix) -> (CMatrix, f64) {
    let ld = dagger(l);
    let x = lin(&[(one(), l), (one(), &ld)]);
    let xr = matmul(&x, rho);
    let m: f64 = (0..rho.rows()).map(|i| xr[(i, i)].re).sum();
    (lin(&[(one(), &matmul(l, rho)), (one(), &matmul(rho, &ld)), (C64::new(-m, 0.0), rho)]), m)
}

/// Block `(J, K)` of `x`: entries `x[p A + J, q A + K]`.
pub fn project(dims: &SubsystemDims, x: &CMatrix) -> Vec<CMatrix> {
    let a = dims.aux.iter().product::<usize>();
    let ds = dims.principal;
    let mut out = Vec::with_capacity(a * a);
    for j in 0..a {
        for k in 0..a {
            let mut b = CMatrix::zeros(ds, ds);
            for p in 0..ds {
                for q in 0..ds {
                    b[(p, q)] = x[(p * a + j, q * a + k)];
                }
            }
            out.push(b);
        }
    }
    out
}

/// Partial trace over every auxiliary.
pub fn trace_aux(dims: &SubsystemDims, x: &CMatrix) -> CMatrix {
    let blocks = project(dims, x);
    let a = dims.aux.iter().product::<usize>();
    let mut out = CMatrix::zeros(dims.principal, dims.principal);
    for j in 0..a {
        out = lin(&[(one(), &out), (one(), &blocks[j * a + j])]);
    }
    out
}

pub fn max_entry_dist(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut worst = 0.0_f64;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

pub fn max_blocks_dist(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| max_entry_dist(x, y)).fold(0.0, f64::max)
}

/// Pieces of the joint generator at time `t`, each a full-space matrix.
pub struct OraclePieces {
    pub hs: CMatrix,
    pub aux: Vec<CMatrix>,
    pub diss: CMatrix,
    pub meas_amplitude: Option<(CMatrix, f64)>,
    pub meas_phase: Option<(CMatrix, f64)>,
}

pub fn oracle_pieces(model: &EmbeddingModel, t: f64, rho: &CMatrix) -> OraclePieces {
    let dims = &model.dims;
    let hs = comm(&lift(dims, model.h_s.eval(t).unwrap(), true, None), rho);
    let mut aux = Vec::new();
    let mut diss = CMatrix::zeros(rho.rows(), rho.cols());
    let add = |acc: &mut CMatrix, x: &CMatrix| *acc = lin(&[(one(), acc), (one(), x)]);
    if let Some(p) = &model.probe {
        add(&mut diss, &dissipator(&lift(dims, p.eval(t).unwrap(), true, None), rho));
    }
    for (l, bath) in model.baths.iter().enumerate() {
        let h = lin(&[
            (one(), &lift(dims, bath.h_a.eval(t).unwrap(), false, Some(l))),
            (one(), &lift(dims, bath.h_sa.eval(t).unwrap(), true, Some(l))),
        ]);
        aux.push(comm(&h, rho));
        for op in &bath.l1 {
            add(&mut diss, &dissipator(&lift(dims, op.eval(t).unwrap(), true, Some(l)), rho));
        }
        for op in &bath.l2 {
            add(&mut diss, &dissipator(&lift(dims, op.eval(t).unwrap(), false, Some(l)), rho));
        }
    }
    let probe = model.probe.as_ref().map(|p| lift(dims, p.eval(t).unwrap(), true, None));
    let meas_amplitude = probe.as_ref().map(|l| meas(l, rho));
    let meas_phase = probe.as_ref().map(|l| meas(&l.scale(-I), rho));
    OraclePieces { hs, aux, diss, meas_amplitude, meas_phase }
}

/// Full drift: Hamiltonian pieces plus dissipators.
pub fn oracle_drift(p: &OraclePieces) -> CMatrix {
    let mut terms: Vec<(C64, &CMatrix)> = vec![(one(), &p.hs)];
    terms.extend(p.aux.iter().map(|x| (one(), x)));
    terms.push((one(), &p.diss));
    lin(&terms)
}
