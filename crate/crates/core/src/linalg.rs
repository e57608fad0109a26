//! Dense complex linear algebra over a fixed canonical factor order.
//!
//! Every composite space in this crate is ordered principal first, then
//! auxiliaries `1..=M`. A joint basis index is the mixed-radix number whose
//! most significant digit is the principal index.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Absolute tolerance used when deciding whether a matrix is hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Default tolerance on the smallest eigenvalue of a density operator.
pub const PSD_TOL: f64 = 1e-8;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims("CMatrix::from_vec", rows * cols, data.len()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::dims(format!("row {i}"), cols, row.len()));
            }
            data.extend_from_slice(row);
        }
        Ok(CMatrix { rows: rows.len(), cols, data })
    }

    /// Real matrix from row-major entries. Panics if the length is wrong.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "from_real: wrong entry count");
        CMatrix { rows, cols, data: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Projector `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, alpha: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| alpha * z).collect() }
    }

    pub fn scale_mut(&mut self, alpha: C64) {
        for z in &mut self.data {
            *z *= alpha;
        }
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: C64, x: &CMatrix) {
        debug_assert_eq!(self.shape(), x.shape());
        for (y, &xv) in self.data.iter_mut().zip(&x.data) {
            *y += alpha * xv;
        }
    }

    /// `self += alpha * a * b`.
    pub fn gemm_acc(&mut self, alpha: C64, a: &CMatrix, b: &CMatrix) {
        debug_assert_eq!(a.cols, b.rows);
        debug_assert_eq!((self.rows, self.cols), (a.rows, b.cols));
        let n = b.cols;
        for i in 0..a.rows {
            let out_row = &mut self.data[i * n..(i + 1) * n];
            for k in 0..a.cols {
                let t = alpha * a.data[i * a.cols + k];
                let b_row = &b.data[k * n..(k + 1) * n];
                for (o, &bv) in out_row.iter_mut().zip(b_row) {
                    *o += t * bv;
                }
            }
        }
    }

    /// Matrix product. Panics on inner-dimension mismatch.
    pub fn dot(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "dot: inner dimensions differ");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        out.gemm_acc(C64::new(1.0, 0.0), self, other);
        out
    }

    /// Largest entrywise deviation `|X_jk - conj(X_kj)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(X + X^dagger) / 2`.
    pub fn hermitized(&self) -> CMatrix {
        assert!(self.is_square(), "hermitized: matrix is not square");
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)].conj());
            }
        }
        out
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4e}{:+.4e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add: shapes differ");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "sub: shapes differ");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.dot(rhs)
    }
}

impl Mul<&CMatrix> for C64 {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        rhs.scale(self)
    }
}

impl Mul<&CMatrix> for f64 {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        rhs.scale(C64::new(self, 0.0))
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Principal dimension plus the dimensions of the `M` auxiliary systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemDims {
    pub principal: usize,
    pub aux: Vec<usize>,
}

impl SubsystemDims {
    pub fn new(principal: usize, aux: Vec<usize>) -> Result<Self> {
        if principal == 0 || aux.contains(&0) {
            return Err(Error::dims("SubsystemDims", "all dimensions >= 1", format!("{principal} / {aux:?}")));
        }
        Ok(SubsystemDims { principal, aux })
    }

    /// Factor dimensions in canonical order (principal first).
    pub fn factors(&self) -> Vec<usize> {
        std::iter::once(self.principal).chain(self.aux.iter().copied()).collect()
    }

    pub fn n_baths(&self) -> usize {
        self.aux.len()
    }

    /// Product of all auxiliary dimensions.
    pub fn aux_total(&self) -> usize {
        self.aux.iter().product()
    }

    pub fn total(&self) -> usize {
        self.principal * self.aux_total()
    }

    /// Dimension of factor `slot` (0 is the principal, `l >= 1` auxiliary `l`).
    pub fn factor(&self, slot: usize) -> usize {
        if slot == 0 {
            self.principal
        } else {
            self.aux[slot - 1]
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn normalized_slots(slots: &[usize], dims: &SubsystemDims) -> Result<Vec<usize>> {
    let mut s = slots.to_vec();
    s.sort_unstable();
    s.dedup();
    let n = dims.n_baths() + 1;
    if s.is_empty() || *s.last().unwrap() >= n {
        return Err(Error::dims("factor slots", format!("non-empty subset of 0..{n}"), format!("{slots:?}")));
    }
    Ok(s)
}

/// Pads `op` with identities on every factor outside `slots`.
///
/// `slots` must form a contiguous run of factors; see [`embed_factors`] for
/// arbitrary subsets.
pub fn embed(op: &CMatrix, slots: &[usize], dims: &SubsystemDims) -> Result<CMatrix> {
    let s = normalized_slots(slots, dims)?;
    if s.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::NonContiguousSlots(s));
    }
    let factors = dims.factors();
    let sub: usize = s.iter().map(|&i| factors[i]).product();
    if op.shape() != (sub, sub) {
        return Err(Error::dims("embed", format!("{sub}x{sub}"), format!("{}x{}", op.rows(), op.cols())));
    }
    let left: usize = factors[..s[0]].iter().product();
    let right: usize = factors[s[s.len() - 1] + 1..].iter().product();
    let mut out = op.clone();
    if left > 1 {
        out = kron(&CMatrix::identity(left), &out);
    }
    if right > 1 {
        out = kron(&out, &CMatrix::identity(right));
    }
    Ok(out)
}

fn digits(mut index: usize, factors: &[usize], out: &mut [usize]) {
    for (slot, &d) in factors.iter().enumerate().rev() {
        out[slot] = index % d;
        index /= d;
    }
}

/// Embeds an operator acting on an arbitrary factor subset (given in canonical
/// order) by direct index arithmetic.
pub fn embed_factors(op: &CMatrix, slots: &[usize], dims: &SubsystemDims) -> Result<CMatrix> {
    let s = normalized_slots(slots, dims)?;
    let factors = dims.factors();
    let sub_factors: Vec<usize> = s.iter().map(|&i| factors[i]).collect();
    let sub: usize = sub_factors.iter().product();
    if op.shape() != (sub, sub) {
        return Err(Error::dims("embed_factors", format!("{sub}x{sub}"), format!("{}x{}", op.rows(), op.cols())));
    }
    let total = dims.total();
    let mut out = CMatrix::zeros(total, total);
    let mut rd = vec![0; factors.len()];
    let mut cd = vec![0; factors.len()];
    let sub_index = |d: &[usize]| s.iter().zip(&sub_factors).fold(0, |acc, (&slot, &f)| acc * f + d[slot]);
    for r in 0..total {
        digits(r, &factors, &mut rd);
        for c in 0..total {
            digits(c, &factors, &mut cd);
            let spectators_match = (0..factors.len()).all(|f| s.contains(&f) || rd[f] == cd[f]);
            if spectators_match {
                out[(r, c)] = op[(sub_index(&rd), sub_index(&cd))];
            }
        }
    }
    Ok(out)
}

/// Traces out every factor not listed in `keep`. The result is ordered by the
/// kept factors in canonical order.
pub fn partial_trace(x: &CMatrix, dims: &SubsystemDims, keep: &[usize]) -> Result<CMatrix> {
    let total = dims.total();
    if x.shape() != (total, total) {
        return Err(Error::dims("partial_trace", format!("{total}x{total}"), format!("{}x{}", x.rows(), x.cols())));
    }
    let factors = dims.factors();
    if keep.iter().any(|&k| k >= factors.len()) {
        return Err(Error::dims("partial_trace keep set", format!("slots < {}", factors.len()), format!("{keep:?}")));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..factors.len()).filter(|f| !kept.contains(f)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&f| factors[f]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&f| factors[f]).collect();
    let n_keep: usize = kept_dims.iter().product();
    let n_trace: usize = traced_dims.iter().product();

    // Strides of each factor in the joint index.
    let mut stride = vec![1; factors.len()];
    for f in (0..factors.len().saturating_sub(1)).rev() {
        stride[f] = stride[f + 1] * factors[f + 1];
    }
    let offset = |idx: usize, slots: &[usize], sdims: &[usize]| {
        let mut rem = idx;
        let mut off = 0;
        for (k, &slot) in slots.iter().enumerate().rev() {
            off += (rem % sdims[k]) * stride[slot];
            rem /= sdims[k];
        }
        off
    };
    let keep_off: Vec<usize> = (0..n_keep).map(|a| offset(a, &kept, &kept_dims)).collect();
    let trace_off: Vec<usize> = (0..n_trace).map(|t| offset(t, &traced, &traced_dims)).collect();

    let mut out = CMatrix::zeros(n_keep, n_keep);
    for a in 0..n_keep {
        for b in 0..n_keep {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += x[(keep_off[a] + t, keep_off[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Outcome of a positivity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a hermitian matrix.
pub fn eigh(x: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let defect = x.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { what: "eigh input".into(), defect });
    }
    let eig = x.hermitized().to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = x.rows();
    let mut vecs = CMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, new)] = eig.eigenvectors[(i, old)];
        }
    }
    Ok((order.iter().map(|&i| eig.eigenvalues[i]).collect(), vecs))
}

pub fn psd_check(x: &CMatrix, tol: f64) -> Result<PsdReport> {
    let (vals, _) = eigh(x)?;
    let min_eigenvalue = vals.first().copied().unwrap_or(0.0);
    Ok(PsdReport { is_psd: min_eigenvalue >= -tol, min_eigenvalue })
}

/// `exp(-i H t)` for hermitian `H`, through its eigendecomposition.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (vals, vecs) = eigh(h)?;
    let phases: Vec<C64> = vals.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
    Ok(vecs.dot(&CMatrix::diag(&phases)).dot(&vecs.adjoint()))
}

pub fn fro_dist(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::dims("fro_dist", format!("{:?}", a.shape()), format!("{:?}", b.shape())));
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
}

/// Standard single-qubit operators in the basis `|e> = (1,0)`, `|g> = (0,1)`.
pub mod ops {
    use super::CMatrix;
    use num_complex::Complex64 as C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap()
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// Lowering operator `|g><e|`.
    pub fn sigma_minus() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0])
    }

    /// Raising operator `|e><g|`.
    pub fn sigma_plus() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    /// `|k><k|` in dimension `n`.
    pub fn projector(n: usize, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        m[(k, k)] = c(1.0, 0.0);
        m
    }

    pub fn excited() -> CMatrix {
        projector(2, 0)
    }

    pub fn ground() -> CMatrix {
        projector(2, 1)
    }

    /// `|+><+|` with `|+> = (|e> + |g>)/sqrt(2)`.
    pub fn plus_state() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])
    }
}

#[cfg(test)]
mod tests {
    use super::ops::*;
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
        let z = kron(&sigma_z(), &CMatrix::identity(2));
        assert_eq!(z, CMatrix::from_real(4, 4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, -1.0, 0.0,
            0.0, 0.0, 0.0, -1.0,
        ]));
    }

    #[test]
    fn kron_lowering_raising_single_entry() {
        // Basis |ee>,|eg>,|ge>,|gg>; sigma- ⊗ sigma+ maps |eg> to |ge>.
        let m = kron(&sigma_minus(), &sigma_plus());
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (2, 1) { 1.0 } else { 0.0 };
                assert_eq!(m[(i, j)], c(expected, 0.0), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn embed_pads_with_identities() {
        let dims = SubsystemDims::new(2, vec![2]).unwrap();
        assert_eq!(embed(&sigma_z(), &[0], &dims).unwrap(), kron(&sigma_z(), &CMatrix::identity(2)));
        assert_eq!(embed(&CMatrix::identity(2), &[1], &dims).unwrap(), CMatrix::identity(4));
    }

    #[test]
    fn embed_two_factor_op_matches_index_arithmetic() {
        let dims = SubsystemDims::new(2, vec![2, 3]).unwrap();
        let op = kron(&sigma_minus(), &CMatrix::identity(2));
        let e = embed(&op, &[0, 1], &dims).unwrap();
        assert_eq!(e.shape(), (12, 12));
        // Brute force: entry (r,c) with r = (p, a1, a2) is op[(p,a1),(q,b1)] δ(a2,b2).
        for r in 0..12 {
            for col in 0..12 {
                let (p, a1, a2) = (r / 6, (r / 3) % 2, r % 3);
                let (q, b1, b2) = (col / 6, (col / 3) % 2, col % 3);
                let expected = if a2 == b2 { op[(p * 2 + a1, q * 2 + b1)] } else { c(0.0, 0.0) };
                assert_eq!(e[(r, col)], expected);
            }
        }
        assert_eq!(e, embed_factors(&op, &[0, 1], &dims).unwrap());
    }

    #[test]
    fn embed_rejects_bad_input() {
        let dims = SubsystemDims::new(2, vec![2, 3]).unwrap();
        assert!(matches!(embed(&CMatrix::identity(6), &[0, 2], &dims), Err(Error::NonContiguousSlots(_))));
        assert!(matches!(embed(&CMatrix::identity(3), &[0], &dims), Err(Error::DimensionMismatch { .. })));
        // The general form handles the gap.
        let e = embed_factors(&CMatrix::identity(6), &[0, 2], &dims).unwrap();
        assert_eq!(e, CMatrix::identity(12));
    }

    #[test]
    fn embed_factors_non_contiguous_matches_permuted_kron() {
        let dims = SubsystemDims::new(2, vec![2, 2]).unwrap();
        // sigma_x on principal, sigma_z on aux 2.
        let op = kron(&sigma_x(), &sigma_z());
        let e = embed_factors(&op, &[0, 2], &dims).unwrap();
        let expected = kron(&kron(&sigma_x(), &CMatrix::identity(2)), &sigma_z());
        assert_eq!(e, expected);
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let dims = SubsystemDims::new(2, vec![2]).unwrap();
        let rho_a = CMatrix::from_vec(2, 2, vec![c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]).unwrap();
        let rho_b = CMatrix::from_real(2, 2, &[0.4, 0.0, 0.0, 0.6]);
        let red = partial_trace(&kron(&rho_a, &rho_b), &dims, &[0]).unwrap();
        assert!(fro_dist(&red, &rho_a).unwrap() < 1e-15);

        let s = 0.5_f64.sqrt();
        let phi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let red = partial_trace(&CMatrix::outer(&phi), &dims, &[0]).unwrap();
        assert!(fro_dist(&red, &CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap() < 1e-15);
    }

    #[test]
    fn psd_examples() {
        let r = psd_check(&CMatrix::identity(2).scale(c(0.5, 0.0)), PSD_TOL).unwrap();
        assert!(r.is_psd);
        assert!((r.min_eigenvalue - 0.5).abs() < 1e-14);

        let r = psd_check(&CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1e-6]), 1e-8).unwrap();
        assert!(!r.is_psd);
        assert!((r.min_eigenvalue + 1e-6).abs() < 1e-15);

        let r = psd_check(&plus_state(), PSD_TOL).unwrap();
        assert!(r.is_psd);
        assert!(r.min_eigenvalue.abs() < 1e-15);

        let bad = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(psd_check(&bad, PSD_TOL), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn fro_dist_examples() {
        let z = sigma_z();
        assert_eq!(fro_dist(&z, &z).unwrap(), 0.0);
        assert!((fro_dist(&z, &-&z).unwrap() - 2.0 * 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((fro_dist(&CMatrix::zeros(2, 2), &CMatrix::identity(2)).unwrap() - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!(fro_dist(&CMatrix::zeros(2, 2), &CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn propagator_of_sigma_z() {
        let u = unitary_propagator(&sigma_z(), 0.3).unwrap();
        let expected = CMatrix::diag(&[C64::from_polar(1.0, -0.3), C64::from_polar(1.0, 0.3)]);
        assert!(fro_dist(&u, &expected).unwrap() < 1e-14);
    }
}
