//! Dense complex linear algebra sized for desk-scale kernels.
//!
//! Everything here is built on one primitive, a cyclic Jacobi eigensolver
//! for Hermitian matrices. Tolerances are relative to `max(1, ||.||_F)`
//! unless a function says otherwise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::words::{FreePolynomial, Word};

pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;
const PROJECTOR_RANK_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Row-major dense complex matrix. Zero-sized matrices are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c64(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Takes ownership of row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        CMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| c64(x, 0.0)).collect(),
        }
    }

    pub fn scalar(z: Complex64) -> Self {
        CMatrix {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^* other` without materializing the adjoint.
    pub fn adjoint_mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, other.rows, "adjoint_mul: row mismatch");
        let mut out = CMatrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, a) in a_row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let a = a.conj();
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, z: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `||A - A^*||_F`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(A + A^*) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn select_columns(&self, cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &CMatrix) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    /// Columns of `self` followed by the columns of `other`.
    pub fn hstack(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, other.rows);
        CMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Eigenpairs of a Hermitian matrix, values ascending.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigDecomposition {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V f(diag) V^*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let scaled = CMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * f(self.values[j]));
        scaled.matmul(&self.vectors.adjoint())
    }
}

/// Cyclic Jacobi with complex 2x2 rotations on `(a + a^*) / 2`.
pub fn hermitian_eig(a: &CMatrix) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    let floor = f64::EPSILON * 1e-2 * scale + f64::MIN_POSITIVE;

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= floor {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if mag <= 1e-2 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = apq.conj() / mag;
                rotate(&mut m, &mut v, p, q, c, s, e);
                m[(p, p)] = c64(app - t * mag, 0.0);
                m[(q, q)] = c64(aqq + t * mag, 0.0);
                m[(p, q)] = Complex64::zero();
                m[(q, p)] = Complex64::zero();
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps >= MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += m[(i, j)].norm_sqr();
                    }
                }
            }
            return Err(Error::NonConvergence {
                sweeps,
                off_norm: off.sqrt(),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = v.select_columns(&order);
    Ok(EigDecomposition { values, vectors })
}

// Applies A <- J^* A J and V <- V J for the rotation J that is the identity
// except J_pp = c, J_pq = s, J_qp = -s e, J_qq = c e.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, e: Complex64) {
    let n = m.rows;
    let ec = e * c;
    let es = e * s;
    for k in 0..n {
        let x = m[(k, p)];
        let y = m[(k, q)];
        m[(k, p)] = x * c - y * es;
        m[(k, q)] = x * s + y * ec;
    }
    let ecc = ec.conj();
    let esc = es.conj();
    for k in 0..n {
        let x = m[(p, k)];
        let y = m[(q, k)];
        m[(p, k)] = x * c - y * esc;
        m[(q, k)] = x * s + y * ecc;
    }
    for k in 0..v.rows {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * c - y * es;
        v[(k, q)] = x * s + y * ec;
    }
}

#[inline]
fn rel_scale(a: &CMatrix) -> f64 {
    a.frobenius_norm().max(1.0)
}

/// PSD test by eigenvalues: passes iff `min eig >= -tol * max(1, ||a||_F)`.
/// Returns the minimum eigenvalue for reporting.
pub fn is_psd(a: &CMatrix, tol: f64) -> Result<(bool, f64)> {
    let eig = hermitian_eig(a)?;
    let min = eig.min();
    Ok((min >= -tol * rel_scale(a), min))
}

/// Largest singular value.
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Ok(0.0);
    }
    let gram = if a.rows <= a.cols {
        a.matmul(&a.adjoint())
    } else {
        a.adjoint_mul(a)
    };
    Ok(hermitian_eig(&gram)?.max().max(0.0).sqrt())
}

/// Coordinates of the Hilbert space obtained from a PSD Gram matrix by
/// factoring out its null vectors.
#[derive(Clone, Debug)]
pub struct QuotientSpace {
    /// `r x N` map sending a coefficient vector to its class.
    pub q: CMatrix,
    /// `N x r` right inverse of `q`.
    pub q_pinv: CMatrix,
    pub rank: usize,
    /// Orthonormal basis of the numerical null space of the Gram matrix.
    pub null_basis: CMatrix,
    /// Smallest eigenvalue of the Gram matrix (before clamping).
    pub min_eigenvalue: f64,
}

impl QuotientSpace {
    pub fn ambient_dim(&self) -> usize {
        self.q.cols
    }
}

/// Factors `g = q^* q` keeping eigenpairs above `tol * max(1, ||g||_F)`.
pub fn build_quotient(g: &CMatrix, tol: f64) -> Result<QuotientSpace> {
    let eig = hermitian_eig(g)?;
    let scale = rel_scale(g);
    let min = eig.min();
    if min < -tol * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let n = g.rows;
    let cutoff = tol * scale;
    let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > cutoff).collect();
    let drop: Vec<usize> = (0..n).filter(|&k| eig.values[k] <= cutoff).collect();
    let r = keep.len();
    let q = CMatrix::from_fn(r, n, |i, j| {
        eig.vectors[(j, keep[i])].conj() * eig.values[keep[i]].sqrt()
    });
    let q_pinv = CMatrix::from_fn(n, r, |i, j| {
        eig.vectors[(i, keep[j])] / eig.values[keep[j]].sqrt()
    });
    let null_basis = eig.vectors.select_columns(&drop);
    Ok(QuotientSpace {
        q,
        q_pinv,
        rank: r,
        null_basis,
        min_eigenvalue: min,
    })
}

/// `q m q_pinv`, refusing when `m` moves null vectors out of the null space.
pub fn induced_operator(m: &CMatrix, qs: &QuotientSpace, tol: f64) -> Result<CMatrix> {
    if m.rows != qs.ambient_dim() || m.cols != qs.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} on a quotient of dimension {}",
            m.rows,
            m.cols,
            qs.ambient_dim()
        )));
    }
    let qm = qs.q.matmul(m);
    let residual = qm.matmul(&qs.null_basis).frobenius_norm();
    if residual > tol * rel_scale(&qm) {
        return Err(Error::NotWellDefined { residual });
    }
    Ok(qm.matmul(&qs.q_pinv))
}

/// The partial isometry `W` with `W source = target` that vanishes on the
/// orthogonal complement of `range(source)`.
///
/// Columns of `source` and `target` are vectors of the same inner-product
/// space, paired column by column; the map is well defined only if every
/// null combination of `source` is also null for `target`.
pub fn induced_partial_isometry(source: &CMatrix, target: &CMatrix, tol: f64) -> Result<CMatrix> {
    if source.cols != target.cols {
        return Err(Error::DimensionMismatch(format!(
            "{} source columns vs {} target columns",
            source.cols, target.cols
        )));
    }
    let gram = source.adjoint_mul(source);
    let qs = build_quotient(&gram, tol)?;
    let residual = target.matmul(&qs.null_basis).frobenius_norm();
    if residual > tol * rel_scale(target) {
        return Err(Error::NotWellDefined { residual });
    }
    let frame = source.matmul(&qs.q_pinv);
    let image = target.matmul(&qs.q_pinv);
    Ok(image.matmul(&frame.adjoint()))
}

/// Orthogonal projector onto the column span (or its complement), from the
/// eigendecomposition of `columns columns^*` with a relative rank cutoff.
pub fn orth_projector(columns: &CMatrix, complement: bool) -> Result<CMatrix> {
    let n = columns.rows;
    let p = if columns.cols == 0 || n == 0 {
        CMatrix::zeros(n, n)
    } else {
        let eig = hermitian_eig(&columns.matmul(&columns.adjoint()))?;
        let cutoff = PROJECTOR_RANK_TOL * eig.max().max(1.0);
        eig.reconstruct_with(|x| if x > cutoff { 1.0 } else { 0.0 })
    };
    Ok(if complement {
        &CMatrix::identity(n) - &p
    } else {
        p
    })
}

/// Orthonormal basis of the column span by Gram-Schmidt with one round of
/// reorthogonalization. A column is dropped when its remainder is below
/// `tol * max(1, largest column norm)`.
pub fn orthonormal_basis(columns: &CMatrix, tol: f64) -> CMatrix {
    let n = columns.rows;
    let biggest = (0..columns.cols)
        .map(|j| (0..n).map(|i| columns[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let cutoff = tol * biggest.max(1.0);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..columns.cols {
        let mut x: Vec<Complex64> = (0..n).map(|i| columns[(i, j)]).collect();
        for _ in 0..2 {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(&x).map(|(bi, xi)| bi.conj() * xi).sum();
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= proj * bi;
                }
            }
        }
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > cutoff {
            basis.push(x.into_iter().map(|z| z / norm).collect());
        }
    }
    CMatrix::from_fn(n, basis.len(), |i, j| basis[j][i])
}

/// Hermitian PSD square root; eigenvalues in `[-tol * scale, 0)` are clamped.
pub fn psd_sqrt(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(a)?;
    if eig.min() < -tol * rel_scale(a) {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()).hermitian_part())
}

/// `I - sum_i T_i T_i^*`.
pub fn row_defect(tuple: &[CMatrix]) -> Result<CMatrix> {
    let Some(first) = tuple.first() else {
        return Err(Error::DimensionMismatch("empty tuple".into()));
    };
    let d = first.rows;
    let mut acc = CMatrix::identity(d);
    for t in tuple {
        if t.rows != d || t.cols != d {
            return Err(Error::DimensionMismatch(format!(
                "tuple entry {}x{} in a {d}x{d} tuple",
                t.rows, t.cols
            )));
        }
        acc = &acc - &t.matmul(&t.adjoint());
    }
    Ok(acc)
}

/// `T_w = T_{i_1} ... T_{i_k}`, the identity of size `dim` for `g_0`.
pub fn word_product(tuple: &[CMatrix], w: &Word, dim: usize) -> CMatrix {
    let mut acc = CMatrix::identity(dim);
    for l in w.letters().rev() {
        acc = tuple[l - 1].matmul(&acc);
    }
    acc
}

/// `p(T_1, ..., T_n)`.
pub fn eval_poly(tuple: &[CMatrix], p: &FreePolynomial, dim: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(dim, dim);
    for (a, w) in p.terms() {
        acc = &acc + &word_product(tuple, w, dim).scale(*a);
    }
    acc
}
