//! Synthesis of representing tuples from feasible moment maps.
//!
//! The positive kernel defines a semi-inner product on functions over the
//! index set; its quotient `K` carries shift operators and a contraction
//! `X: K -> H`, and the tuple is `T_i = X V_i X^*`. The shift on `K` is only
//! defined on classes supported where the shifted index still lies in the
//! set, so it is realized as the partial isometry between those frames and
//! extended by zero.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{
    build_k2, build_toeplitz_kernel, check_moment_dominance, check_star_equality,
    check_toeplitz_psd, FeasibilityReport, MomentMap, ReportKind, ToeplitzVariant,
};
use crate::linalg::{
    build_quotient, hermitian_eig, induced_partial_isometry, op_norm, orth_projector,
    orthonormal_basis, row_defect, word_product, CMatrix, QuotientSpace,
};
use crate::words::{AdmissibleSet, FreePolynomial, Word};

const SPAN_RANK_TOL: f64 = 1e-10;

/// A synthesized tuple and the residuals that certify it.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisCertificate {
    pub n: usize,
    /// Dimension the tuple acts on.
    pub dim: usize,
    pub tuple: Vec<CMatrix>,
    pub quotient_dim: usize,
    pub defect_min_eig: f64,
    pub moment_residual: f64,
    pub extra_residuals: BTreeMap<String, f64>,
    pub tolerance: f64,
    /// `H -> K` for models that compress onto a subspace of `K`; moments
    /// are then read as `embed^* T_sigma embed`.
    pub embed: Option<CMatrix>,
}

impl SynthesisCertificate {
    fn new(tuple: Vec<CMatrix>, quotient_dim: usize, tol: f64) -> Self {
        SynthesisCertificate {
            n: tuple.len(),
            dim: tuple.first().map_or(0, CMatrix::rows),
            tuple,
            quotient_dim,
            defect_min_eig: 0.0,
            moment_residual: 0.0,
            extra_residuals: BTreeMap::new(),
            tolerance: tol,
            embed: None,
        }
    }

    pub fn extra(&mut self, name: &str, value: f64) {
        self.extra_residuals.insert(name.to_string(), value);
    }
}

/// Compressed shift model on `G = K minus E`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpModel {
    pub ambient_dim: usize,
    pub embed: CMatrix,
    /// Shifts on `K` before compression.
    pub shifts: Vec<CMatrix>,
    pub compressed_tuple: Vec<CMatrix>,
    pub projector_g: CMatrix,
    pub e_dim: usize,
}

/// The 0/1 shift on `H^{Lambda}` sending the block at `(tau, beta)` to the
/// block at `(g_i tau, beta)`, or to zero when that pair is missing.
pub fn shift_matrix(i: usize, sigma: &AdmissibleSet, d: usize) -> CMatrix {
    let size = d * sigma.pairs().len();
    let mut v = CMatrix::zeros(size, size);
    for (src, dst) in shift_support(i, sigma) {
        for k in 0..d {
            v[(dst * d + k, src * d + k)] = crate::linalg::c64(1.0, 0.0);
        }
    }
    v
}

/// `(source pair, shifted pair)` index pairs of generator `i`.
fn shift_support(i: usize, sigma: &AdmissibleSet) -> Vec<(usize, usize)> {
    sigma
        .pairs()
        .iter()
        .enumerate()
        .filter_map(|(s, (tau, beta))| sigma.pair_index(&tau.prepend(i), beta).map(|t| (s, t)))
        .collect()
}

/// `(word, shifted word)` index pairs of generator `i` on `sigma`.
fn word_shift_support(i: usize, sigma: &AdmissibleSet) -> Vec<(usize, usize)> {
    sigma
        .words()
        .iter()
        .enumerate()
        .filter_map(|(s, w)| sigma.index_of(&w.prepend(i)).map(|t| (s, t)))
        .collect()
}

fn block_columns(indices: impl Iterator<Item = usize>, d: usize) -> Vec<usize> {
    indices.flat_map(|k| (k * d)..(k * d + d)).collect()
}

/// Partial isometries on the quotient induced by index shifts.
fn induced_shifts(
    qs: &QuotientSpace,
    supports: &[Vec<(usize, usize)>],
    d: usize,
    tol: f64,
) -> Result<Vec<CMatrix>> {
    supports
        .iter()
        .map(|support| {
            if support.is_empty() {
                return Ok(CMatrix::zeros(qs.rank, qs.rank));
            }
            let src = block_columns(support.iter().map(|p| p.0), d);
            let dst = block_columns(support.iter().map(|p| p.1), d);
            induced_partial_isometry(&qs.q.select_columns(&src), &qs.q.select_columns(&dst), tol)
        })
        .collect()
}

/// `||V V^* V - V||_F`.
pub fn partial_isometry_residual(v: &CMatrix) -> f64 {
    let vvv = v.matmul(&v.adjoint()).matmul(v);
    (&vvv - v).frobenius_norm()
}

/// `max_{i != j} ||T_i^* T_j||_F`.
pub fn range_orthogonality_residual(tuple: &[CMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, ti) in tuple.iter().enumerate() {
        for (j, tj) in tuple.iter().enumerate() {
            if i != j {
                worst = worst.max(ti.adjoint_mul(tj).frobenius_norm());
            }
        }
    }
    worst
}

/// `max_omega ||T_omega L(g_0) - L(omega)||_F`.
pub fn moment_residual(tuple: &[CMatrix], l: &MomentMap) -> (f64, Option<Word>) {
    let base = l.base();
    let dim = base.rows();
    let mut worst = (0.0, None);
    for (w, m) in l.iter() {
        let r = (&word_product(tuple, w, dim).matmul(base) - m).frobenius_norm();
        if r > worst.0 || worst.1.is_none() {
            worst = (r, Some(w.clone()));
        }
    }
    worst
}

/// `max_sigma ||embed^* T_sigma embed - L(sigma)||_F`.
pub fn compressed_moment_residual(tuple: &[CMatrix], embed: &CMatrix, l: &MomentMap) -> (f64, Option<Word>) {
    let dim = embed.rows();
    let mut worst = (0.0, None);
    for (w, m) in l.iter() {
        let phi = embed.adjoint_mul(&word_product(tuple, w, dim).matmul(embed));
        let r = (&phi - m).frobenius_norm();
        if r > worst.0 || worst.1.is_none() {
            worst = (r, Some(w.clone()));
        }
    }
    worst
}

/// `max_p ||p(T)||_F`.
pub fn relation_residual(tuple: &[CMatrix], polys: &[FreePolynomial]) -> f64 {
    let dim = tuple.first().map_or(0, CMatrix::rows);
    polys
        .iter()
        .map(|p| crate::linalg::eval_poly(tuple, p, dim).frobenius_norm())
        .fold(0.0, f64::max)
}

fn defect_min(tuple: &[CMatrix]) -> Result<f64> {
    if tuple.is_empty() || tuple[0].rows() == 0 {
        return Ok(0.0);
    }
    Ok(hermitian_eig(&row_defect(tuple)?)?.min())
}

struct RowModel {
    cert: SynthesisCertificate,
    x_hat: CMatrix,
}

fn row_model(l: &MomentMap, tol: f64) -> Result<RowModel> {
    let sigma = l.sigma();
    let d = l.d_in();
    let g = build_k2(l).flat;
    let qs = build_quotient(&g, tol)?;
    let supports: Vec<_> = (1..=sigma.n()).map(|i| shift_support(i, sigma)).collect();
    let v_hat = induced_shifts(&qs, &supports, d, tol)?;

    let mut m_x = CMatrix::zeros(l.d_out(), d * sigma.pairs().len());
    for (k, (a, b)) in sigma.pairs().iter().enumerate() {
        m_x.set_block(0, k * d, l.at(&a.concat(b)));
    }
    let x_hat = m_x.matmul(&qs.q_pinv);
    let tuple: Vec<CMatrix> = v_hat
        .iter()
        .map(|v| x_hat.matmul(v).matmul(&x_hat.adjoint()))
        .collect();

    let mut cert = SynthesisCertificate::new(tuple, qs.rank, tol);
    cert.dim = l.d_out();
    cert.defect_min_eig = defect_min(&cert.tuple)?;
    cert.moment_residual = moment_residual(&cert.tuple, l).0;
    let v_res = v_hat.iter().map(partial_isometry_residual).fold(0.0, f64::max);
    cert.extra("shift_partial_isometry", v_res);
    cert.extra("x_norm", op_norm(&x_hat)?);
    Ok(RowModel { cert, x_hat })
}

/// Builds the row contraction reproducing a moment map that passes the
/// dominance test.
pub fn synthesize_row_contraction(l: &MomentMap, tol: f64) -> Result<SynthesisCertificate> {
    let report = check_moment_dominance(l, tol)?;
    if !report.pass {
        return Err(Error::InfeasibleMoments(alloc::boxed::Box::new(report)));
    }
    Ok(row_model(l, tol)?.cert)
}

/// The construction of [`synthesize_row_contraction`] for callers that have
/// already run the dominance test.
pub(crate) fn row_contraction_unchecked(l: &MomentMap, tol: f64) -> Result<SynthesisCertificate> {
    Ok(row_model(l, tol)?.cert)
}

/// Same construction under `K1 = K2`, with the extra residuals of the
/// representation case: `X^* X = I`, `T_i` partial isometries, `T_i^* T_j = 0`.
pub fn synthesize_star_representation(l: &MomentMap, tol: f64) -> Result<SynthesisCertificate> {
    let report = check_star_equality(l, tol)?;
    if !report.pass {
        return Err(Error::NotStarFeasible(alloc::boxed::Box::new(report)));
    }
    let RowModel { mut cert, x_hat } = row_model(l, tol)?;
    let r = x_hat.cols();
    let x_iso = (&x_hat.adjoint_mul(&x_hat) - &CMatrix::identity(r)).frobenius_norm();
    let t_pi = cert.tuple.iter().map(partial_isometry_residual).fold(0.0, f64::max);
    let orth = range_orthogonality_residual(&cert.tuple);
    cert.extra("x_isometry", x_iso);
    cert.extra("t_partial_isometry", t_pi);
    cert.extra("t_range_orthogonality", orth);
    Ok(cert)
}

/// Smallest subspace containing the ranges of `seeds` and invariant under
/// every operator in `ops`, as an orthonormal basis.
pub fn invariant_span(seeds: &[CMatrix], ops: &[CMatrix], dim: usize) -> CMatrix {
    let mut basis = CMatrix::zeros(dim, 0);
    for s in seeds {
        basis = basis.hstack(s);
    }
    basis = orthonormal_basis(&basis, SPAN_RANK_TOL);
    loop {
        let mut grown = basis.clone();
        for t in ops {
            grown = grown.hstack(&t.matmul(&basis));
        }
        let next = orthonormal_basis(&grown, SPAN_RANK_TOL);
        if next.cols() == basis.cols() {
            return basis;
        }
        basis = next;
    }
}

/// Compressed shift model for a Toeplitz-positive map with `L(g_0) = I`;
/// `relations` are forced to vanish by cutting away the invariant subspace
/// they generate.
pub fn synthesize_cp_model(
    l: &MomentMap,
    relations: &[FreePolynomial],
    tol: f64,
) -> Result<(CpModel, SynthesisCertificate)> {
    if !l.is_square() {
        return Err(Error::NotSquare {
            rows: l.d_out(),
            cols: l.d_in(),
        });
    }
    let d = l.d_in();
    let dev = (l.base() - &CMatrix::identity(d)).frobenius_norm();
    if dev > tol * (d as f64).sqrt().max(1.0) {
        return Err(Error::EmbedNotIsometric { residual: dev });
    }
    let report = check_toeplitz_psd(l, ToeplitzVariant::Toeplitz, tol)?;
    if !report.pass {
        return Err(Error::ToeplitzNotPsd(alloc::boxed::Box::new(report)));
    }

    let sigma = l.sigma();
    let g = build_toeplitz_kernel(l, ToeplitzVariant::Toeplitz)?.flat;
    let qs = build_quotient(&g, tol)?;
    let r = qs.rank;
    let supports: Vec<_> = (1..=sigma.n()).map(|i| word_shift_support(i, sigma)).collect();
    let shifts = induced_shifts(&qs, &supports, d, tol)?;

    let root = sigma.index_of(&Word::empty()).expect("admissible sets contain g_0");
    let embed = qs.q.select_columns(&block_columns(core::iter::once(root), d));

    let seeds: Vec<CMatrix> = relations
        .iter()
        .map(|p| crate::linalg::eval_poly(&shifts, p, r))
        .collect();
    let e_basis = invariant_span(&seeds, &shifts, r);
    let projector_g = orth_projector(&e_basis, true)?;
    let compressed: Vec<CMatrix> = shifts
        .iter()
        .map(|t| projector_g.matmul(t).matmul(&projector_g))
        .collect();

    let mut cert = SynthesisCertificate::new(compressed.clone(), r, tol);
    cert.dim = r;
    cert.defect_min_eig = defect_min(&compressed)?;
    cert.moment_residual = compressed_moment_residual(&compressed, &embed, l).0;
    cert.extra(
        "embed_isometry",
        (&embed.adjoint_mul(&embed) - &CMatrix::identity(d)).frobenius_norm(),
    );
    cert.extra(
        "embed_outside_g",
        (&embed - &projector_g.matmul(&embed)).frobenius_norm(),
    );
    cert.extra("relations", relation_residual(&compressed, relations));
    cert.extra("e_dim", e_basis.cols() as f64);
    cert.embed = Some(embed.clone());

    let model = CpModel {
        ambient_dim: r,
        embed,
        shifts,
        compressed_tuple: compressed,
        projector_g,
        e_dim: e_basis.cols(),
    };
    Ok((model, cert))
}

/// Recomputes the moment residual and the row defect of a certificate from
/// its tuple alone. Passes iff the residual is at most `tol` and the defect's
/// smallest eigenvalue is at least `-tol`.
pub fn verify_certificate(cert: &SynthesisCertificate, l: &MomentMap, tol: f64) -> Result<FeasibilityReport> {
    if cert.tuple.len() != l.n() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "certificate has {} operators for n = {}",
            cert.tuple.len(),
            l.n()
        )));
    }
    let dim = match &cert.embed {
        Some(e) => {
            if e.cols() != l.d_in() {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "embedding has {} columns, moments have {}",
                    e.cols(),
                    l.d_in()
                )));
            }
            e.rows()
        }
        None => l.d_out(),
    };
    for t in &cert.tuple {
        if t.rows() != dim || t.cols() != dim {
            return Err(Error::DimensionMismatch(alloc::format!(
                "operator is {}x{}, expected {dim}x{dim}",
                t.rows(),
                t.cols()
            )));
        }
    }
    let (residual, worst) = match &cert.embed {
        Some(e) => compressed_moment_residual(&cert.tuple, e, l),
        None => moment_residual(&cert.tuple, l),
    };
    let defect = defect_min(&cert.tuple)?;
    let mut r = FeasibilityReport::new(ReportKind::Certificate, tol);
    r.residual_norm = residual;
    r.min_eigenvalue = defect;
    r.worst = worst.map(|w| w.to_string());
    r.pass = residual <= tol && defect >= -tol;
    r.index_order = l.sigma().words().iter().map(ToString::to_string).collect();
    r.detail("moment_residual", residual);
    r.detail("defect_min_eig", defect);
    Ok(r)
}
