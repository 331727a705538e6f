//! Truncated Poisson kernels of row contractions and the seeded forward
//! model used to generate test instances.
//!
//! For a row contraction `T` with `Phi_r(X) = r^2 sum_i T_i X T_i^*`, the
//! compressed moment `K_r^* (S_alpha S_beta^* (x) I) K_r` on the Fock space
//! truncated at `depth` equals
//! `r^m T_alpha (sum_{k <= D} Phi_r^k(Delta_r^2)) T_beta^*` with
//! `m = |alpha| + |beta|` and `D = depth - max(|alpha|, |beta|)`. Its
//! distance to `T_alpha T_beta^*` for row norm `rho` is at most
//! `(1 - r^2) m rho^m + (rho^2)^(depth - m) rho^(m + 2)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernels::MomentMap;
use crate::linalg::{c64, hermitian_eig, psd_sqrt, row_defect, word_product, CMatrix};
use crate::rng::SplitMix64;
use crate::words::{words_up_to, AdmissibleSet, LambdaSpec, Word};

/// Orthonormal basis `{e_alpha : |alpha| <= depth}` of a truncated Fock space.
#[derive(Clone, Debug)]
pub struct FockTruncation {
    pub n: usize,
    pub depth: usize,
    pub basis: Vec<Word>,
    index: BTreeMap<Word, usize>,
}

impl FockTruncation {
    pub fn new(n: usize, depth: usize) -> Self {
        let basis = words_up_to(n, depth);
        let index = basis.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
        FockTruncation {
            n,
            depth,
            basis,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// `S_i e_alpha = e_{g_i alpha}`, dropped past the truncation depth.
    pub fn creation(&self, i: usize) -> CMatrix {
        let mut s = CMatrix::zeros(self.dim(), self.dim());
        for (k, w) in self.basis.iter().enumerate() {
            if let Some(t) = self.index_of(&w.prepend(i)) {
                s[(t, k)] = c64(1.0, 0.0);
            }
        }
        s
    }

    pub fn creations(&self) -> Vec<CMatrix> {
        (1..=self.n).map(|i| self.creation(i)).collect()
    }
}

/// An `n`-tuple of square matrices of one size.
#[derive(Clone, Debug, PartialEq)]
pub struct RowTuple {
    mats: Vec<CMatrix>,
}

impl RowTuple {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        row_defect(&mats)?;
        Ok(RowTuple { mats })
    }

    /// Also checks `I - sum T_i T_i^*` is PSD within `tol`.
    pub fn contraction(mats: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let t = Self::new(mats)?;
        let min = hermitian_eig(&row_defect(&t.mats)?)?.min();
        if min < -tol {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].rows()
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    /// `||sum_i T_i T_i^*||^(1/2)`.
    pub fn row_norm(&self) -> Result<f64> {
        Ok(hermitian_eig(&self.row_sum())?.max().max(0.0).sqrt())
    }

    fn row_sum(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for t in &self.mats {
            acc = &acc + &t.matmul(&t.adjoint());
        }
        acc
    }

    /// `T_w`.
    pub fn word(&self, w: &Word) -> CMatrix {
        word_product(&self.mats, w, self.dim())
    }

    /// `r^2 sum_i T_i x T_i^*`.
    pub fn phi(&self, x: &CMatrix, r: f64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for t in &self.mats {
            acc = &acc + &t.matmul(x).matmul(&t.adjoint());
        }
        acc.scale(c64(r * r, 0.0))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidMoments(format!("radius {r} outside (0, 1]")));
    }
    Ok(())
}

fn defect_square(t: &RowTuple, r: f64) -> CMatrix {
    &CMatrix::identity(t.dim()) - &t.row_sum().scale(c64(r * r, 0.0))
}

/// `(I - r^2 sum T_i T_i^*)^(1/2)`.
pub fn defect_operator(t: &RowTuple, r: f64, tol: f64) -> Result<CMatrix> {
    check_radius(r)?;
    psd_sqrt(&defect_square(t, r), tol)
}

/// `h -> sum_{|gamma| <= depth} e_gamma (x) r^|gamma| Delta_r T_gamma^* h`,
/// as a `(fock dim * dim) x dim` matrix with blocks in Fock basis order.
pub fn poisson_kernel(t: &RowTuple, r: f64, depth: usize, tol: f64) -> Result<CMatrix> {
    let delta = defect_operator(t, r, tol)?;
    let fock = FockTruncation::new(t.n(), depth);
    let d = t.dim();
    let mut k = CMatrix::zeros(fock.dim() * d, d);
    for (j, g) in fock.basis.iter().enumerate() {
        let block = delta
            .matmul(&t.word(g).adjoint())
            .scale(c64(Float::powi(r, g.len() as i32), 0.0));
        k.set_block(j * d, 0, &block);
    }
    Ok(k)
}

/// `K_r^* (S_alpha S_beta^* (x) I) K_r` with the Fock space truncated at
/// `depth`, summed as a series in `Phi_r` without forming Fock matrices.
pub fn poisson_moment(t: &RowTuple, alpha: &Word, beta: &Word, r: f64, depth: usize, tol: f64) -> Result<CMatrix> {
    let m = alpha.len() + beta.len();
    if m > depth {
        return Err(Error::DepthTooSmall { depth, required: m });
    }
    check_radius(r)?;
    let dsq = defect_square(t, r);
    let min = hermitian_eig(&dsq)?.min();
    if min < -tol {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let tail = depth - alpha.len().max(beta.len());
    let mut term = dsq;
    let mut sum = term.clone();
    for _ in 0..tail {
        term = t.phi(&term, r);
        sum = &sum + &term;
    }
    Ok(t.word(alpha)
        .matmul(&sum)
        .matmul(&t.word(beta).adjoint())
        .scale(c64(Float::powi(r, m as i32), 0.0)))
}

/// Upper bound on `||poisson_moment - T_alpha T_beta^*||` for row norm `rho`
/// and `m = |alpha| + |beta|`.
pub fn poisson_error_bound(rho: f64, m: usize, r: f64, depth: usize) -> f64 {
    let rho_m = Float::powi(rho, m as i32);
    let radial = (1.0 - r * r) * m as f64 * rho_m;
    let tail = Float::powi(rho * rho, (depth - m.min(depth)) as i32) * Float::powi(rho, m as i32 + 2);
    radial + tail
}

/// The radius minimizing the error bound: 1 for strict contractions, and
/// otherwise the minimizer of `m (1 - r) + r^(2D + 2)`.
pub fn default_radius(rho: f64, m: usize, depth: usize) -> f64 {
    if rho < 1.0 {
        return 1.0;
    }
    if m == 0 {
        // the radial term vanishes; any r < 1 shrinks the tail
        return 0.5;
    }
    let exponent = 2 * (depth - m.min(depth)) + 2;
    let r = Float::powf(m as f64 / exponent as f64, 1.0 / (exponent as f64 - 1.0));
    r.min(1.0)
}

/// Smallest depth at which the bound at `r = 1` is at most `target`, for a
/// strict contraction (`rho < 1`).
pub fn required_depth(rho: f64, m: usize, target: f64) -> Option<usize> {
    if !(rho < 1.0) {
        return None;
    }
    (m..m + 10_000).find(|&depth| poisson_error_bound(rho, m, 1.0, depth) <= target)
}

/// Instance families produced by [`generate_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum InstanceKind {
    RowContraction,
    Commuting,
    LambdaCommuting,
    IsometricTruncated,
    FockCompression,
    VectorOrbit,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 6] = [
        InstanceKind::RowContraction,
        InstanceKind::Commuting,
        InstanceKind::LambdaCommuting,
        InstanceKind::IsometricTruncated,
        InstanceKind::FockCompression,
        InstanceKind::VectorOrbit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::RowContraction => "row-contraction",
            InstanceKind::Commuting => "commuting",
            InstanceKind::LambdaCommuting => "lambda-commuting",
            InstanceKind::IsometricTruncated => "isometric-truncated",
            InstanceKind::FockCompression => "fock-compression",
            InstanceKind::VectorOrbit => "vector-orbit",
        }
    }
}

impl core::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::BadKind(s.to_string()))
    }
}

/// Parameters of [`generate_instance`].
#[derive(Clone, Debug)]
pub struct GenSpec {
    pub kind: InstanceKind,
    pub n: usize,
    /// Matrix size; for `lambda-commuting` the size of the diagonal factor.
    pub dim: usize,
    /// Length of the longest word in `Sigma`.
    pub depth: usize,
    pub seed: u64,
    /// Row norm of the random tuples.
    pub row_norm: f64,
    /// `lambda_{j1}` of the lambda-commuting family.
    pub q: Complex64,
}

impl GenSpec {
    pub fn new(kind: InstanceKind, n: usize, dim: usize, depth: usize, seed: u64) -> Self {
        GenSpec {
            kind,
            n,
            dim,
            depth,
            seed,
            row_norm: 0.9,
            q: c64(-1.0, 0.0),
        }
    }
}

/// A generated moment map together with the tuple that produced it.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub kind: InstanceKind,
    pub seed: u64,
    pub moments: MomentMap,
    pub tuple: Vec<CMatrix>,
    /// Set for the lambda-commuting family.
    pub lambda: Option<LambdaSpec>,
    pub meta: BTreeMap<String, f64>,
}

fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| rng.complex())
}

fn scale_to_row_norm(mats: Vec<CMatrix>, target: f64) -> Result<Vec<CMatrix>> {
    let norm = RowTuple::new(mats.clone())?.row_norm()?;
    if norm == 0.0 {
        return Ok(mats);
    }
    let s = c64(target / norm, 0.0);
    Ok(mats.iter().map(|m| m.scale(s)).collect())
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
        a[(i / b.rows(), j / b.cols())] * b[(i % b.rows(), j % b.cols())]
    })
}

/// Deterministic instance of the requested family. `Sigma` is always the
/// set of words of length at most `depth`.
pub fn generate_instance(spec: &GenSpec) -> Result<GeneratedInstance> {
    if spec.n == 0 {
        return Err(Error::InvalidMoments("n must be positive".into()));
    }
    if spec.dim == 0 {
        return Err(Error::InvalidMoments("dim must be positive".into()));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let sigma = AdmissibleSet::truncation(spec.n, spec.depth);
    let mut meta = BTreeMap::new();
    let mut lambda = None;
    let (tuple, moments) = match spec.kind {
        InstanceKind::RowContraction | InstanceKind::VectorOrbit => {
            let raw = (0..spec.n).map(|_| random_matrix(&mut rng, spec.dim, spec.dim)).collect();
            let tuple = scale_to_row_norm(raw, spec.row_norm)?;
            let base = if spec.kind == InstanceKind::VectorOrbit {
                let h = random_matrix(&mut rng, spec.dim, 1);
                let norm = h.frobenius_norm();
                h.scale(c64(1.0 / norm, 0.0))
            } else {
                CMatrix::identity(spec.dim)
            };
            let moments = MomentMap::from_fn(sigma, |w| word_product(&tuple, w, spec.dim).matmul(&base))?;
            meta.insert("row_norm".into(), spec.row_norm);
            (tuple, moments)
        }
        InstanceKind::Commuting => {
            let raw = (0..spec.n)
                .map(|_| CMatrix::diag(&(0..spec.dim).map(|_| rng.complex()).collect::<Vec<_>>()))
                .collect();
            let tuple = scale_to_row_norm(raw, spec.row_norm)?;
            let moments = MomentMap::from_fn(sigma, |w| word_product(&tuple, w, spec.dim))?;
            meta.insert("row_norm".into(), spec.row_norm);
            (tuple, moments)
        }
        InstanceKind::LambdaCommuting => {
            let nil = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
            let twist = CMatrix::diag(&[spec.q, c64(1.0, 0.0)]);
            let raw = (0..spec.n)
                .map(|i| {
                    let d = CMatrix::diag(&(0..spec.dim).map(|_| rng.complex()).collect::<Vec<_>>());
                    kron(if i == 0 { &nil } else { &twist }, &d)
                })
                .collect();
            let tuple = scale_to_row_norm(raw, spec.row_norm)?;
            let dim = 2 * spec.dim;
            let moments = MomentMap::from_fn(sigma, |w| word_product(&tuple, w, dim))?;
            let mut lam = LambdaSpec::ones(spec.n);
            for j in 2..=spec.n {
                lam.set(j, 1, spec.q)?;
            }
            lambda = Some(lam);
            meta.insert("row_norm".into(), spec.row_norm);
            meta.insert("q_re".into(), spec.q.re);
            meta.insert("q_im".into(), spec.q.im);
            (tuple, moments)
        }
        InstanceKind::IsometricTruncated | InstanceKind::FockCompression => {
            let fock = FockTruncation::new(spec.n, 2 * spec.depth + 1);
            let tuple = fock.creations();
            let inner = words_up_to(spec.n, spec.depth);
            let cols: Vec<usize> = inner.iter().map(|w| fock.index_of(w).unwrap()).collect();
            let moments = if spec.kind == InstanceKind::IsometricTruncated {
                MomentMap::from_fn(sigma, |w| word_product(&tuple, w, fock.dim()).select_columns(&cols))?
            } else {
                MomentMap::from_fn(sigma, |w| word_product(&tuple, w, fock.dim()).select(&cols, &cols))?
            };
            meta.insert("fock_depth".into(), fock.depth as f64);
            (tuple, moments)
        }
    };
    Ok(GeneratedInstance {
        kind: spec.kind,
        seed: spec.seed,
        moments,
        tuple,
        lambda,
        meta,
    })
}
