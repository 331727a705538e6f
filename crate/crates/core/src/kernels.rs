//! Moment maps on admissible sets and the block kernels built from them.
//!
//! Kernels over the factorization set are indexed by pairs `(alpha, beta)`
//! in canonical order; Toeplitz-type kernels are indexed by the words of
//! `Sigma`. A kernel `K` is stored as one flat Hermitian matrix whose
//! `(a, s)` block is `K(a, s)`, so `<f, f>_K = f^* K f`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix};
use crate::words::{pair_key, prefix_quotient, AdmissibleSet, Word};

/// `sigma -> L(sigma)`, a `d_out x d_in` block per word of `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMap {
    sigma: AdmissibleSet,
    d_out: usize,
    d_in: usize,
    blocks: Vec<CMatrix>,
}

impl MomentMap {
    /// `blocks` must be keyed by exactly the words of `sigma`.
    pub fn new(sigma: AdmissibleSet, blocks: BTreeMap<Word, CMatrix>) -> Result<Self> {
        if blocks.len() != sigma.len() {
            return Err(Error::InvalidMoments(format!(
                "{} moments for {} words",
                blocks.len(),
                sigma.len()
            )));
        }
        let mut ordered = Vec::with_capacity(sigma.len());
        for w in sigma.words() {
            let m = blocks
                .get(w)
                .ok_or_else(|| Error::InvalidMoments(format!("no moment for word \"{w}\"")))?;
            ordered.push(m.clone());
        }
        Self::from_ordered(sigma, ordered)
    }

    /// Blocks listed in the canonical order of `sigma.words()`.
    pub fn from_ordered(sigma: AdmissibleSet, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != sigma.len() {
            return Err(Error::InvalidMoments(format!(
                "{} moments for {} words",
                blocks.len(),
                sigma.len()
            )));
        }
        let (d_out, d_in) = (blocks[0].rows(), blocks[0].cols());
        for (w, b) in sigma.words().iter().zip(&blocks) {
            if b.rows() != d_out || b.cols() != d_in {
                return Err(Error::InvalidMoments(format!(
                    "moment \"{w}\" is {}x{}, expected {d_out}x{d_in}",
                    b.rows(),
                    b.cols()
                )));
            }
            if !b.is_finite() {
                return Err(Error::InvalidMoments(format!("moment \"{w}\" is not finite")));
            }
        }
        Ok(MomentMap {
            sigma,
            d_out,
            d_in,
            blocks,
        })
    }

    pub fn from_fn(sigma: AdmissibleSet, mut f: impl FnMut(&Word) -> CMatrix) -> Result<Self> {
        let blocks = sigma.words().iter().map(&mut f).collect();
        Self::from_ordered(sigma, blocks)
    }

    pub fn sigma(&self) -> &AdmissibleSet {
        &self.sigma
    }

    pub fn n(&self) -> usize {
        self.sigma.n()
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn is_square(&self) -> bool {
        self.d_out == self.d_in
    }

    pub fn get(&self, w: &Word) -> Option<&CMatrix> {
        self.sigma.index_of(w).map(|k| &self.blocks[k])
    }

    /// Like [`get`](Self::get) for words known to lie in `sigma`.
    pub fn at(&self, w: &Word) -> &CMatrix {
        self.get(w)
            .unwrap_or_else(|| panic!("word \"{w}\" is outside the moment domain"))
    }

    pub fn base(&self) -> &CMatrix {
        self.at(&Word::empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &CMatrix)> {
        self.sigma.words().iter().zip(&self.blocks)
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// Largest Frobenius norm among the blocks.
    pub fn max_norm(&self) -> f64 {
        self.blocks.iter().map(CMatrix::frobenius_norm).fold(0.0, f64::max)
    }

    /// Copy with one block replaced.
    pub fn with_block(&self, w: &Word, m: CMatrix) -> Result<Self> {
        let k = self
            .sigma
            .index_of(w)
            .ok_or_else(|| Error::InvalidMoments(format!("word \"{w}\" is outside the domain")))?;
        let mut blocks = self.blocks.clone();
        blocks[k] = m;
        Self::from_ordered(self.sigma.clone(), blocks)
    }
}

/// A Hermitian kernel on a finite index set, flattened into blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBlockKernel {
    pub index: Vec<String>,
    pub block_dim: usize,
    pub flat: CMatrix,
}

impl HermitianBlockKernel {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn block(&self, a: usize, s: usize) -> CMatrix {
        let d = self.block_dim;
        self.flat.block(a * d, s * d, d, d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportKind {
    Dominance,
    Equality,
    Psd,
    Relations,
    Certificate,
}

impl ReportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::Dominance => "dominance",
            ReportKind::Equality => "equality",
            ReportKind::Psd => "psd",
            ReportKind::Relations => "relations",
            ReportKind::Certificate => "certificate",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one numerical test, with the numbers that decided it.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub kind: ReportKind,
    pub pass: bool,
    /// Smallest eigenvalue of the tested matrix; 0 when no matrix was tested.
    pub min_eigenvalue: f64,
    pub residual_norm: f64,
    pub tolerance: f64,
    pub index_order: Vec<String>,
    /// Secondary numbers, keyed by name.
    pub details: BTreeMap<String, f64>,
    /// Label of the entry that produced `residual_norm`, when meaningful.
    pub worst: Option<String>,
}

impl FeasibilityReport {
    pub fn new(kind: ReportKind, tolerance: f64) -> Self {
        FeasibilityReport {
            kind,
            pass: true,
            min_eigenvalue: 0.0,
            residual_norm: 0.0,
            tolerance,
            index_order: Vec::new(),
            details: BTreeMap::new(),
            worst: None,
        }
    }

    pub fn detail(&mut self, name: &str, value: f64) {
        self.details.insert(name.to_string(), value);
    }
}

fn pair_keys(sigma: &AdmissibleSet) -> Vec<String> {
    sigma.pairs().iter().map(|(a, b)| pair_key(a, b)).collect()
}

fn word_keys(sigma: &AdmissibleSet) -> Vec<String> {
    sigma.words().iter().map(ToString::to_string).collect()
}

fn assemble(
    index: Vec<String>,
    block_dim: usize,
    mut block: impl FnMut(usize, usize) -> Option<CMatrix>,
) -> HermitianBlockKernel {
    let m = index.len();
    let mut flat = CMatrix::zeros(m * block_dim, m * block_dim);
    for a in 0..m {
        for s in 0..m {
            if let Some(b) = block(a, s) {
                flat.set_block(a * block_dim, s * block_dim, &b);
            }
        }
    }
    HermitianBlockKernel {
        index,
        block_dim,
        flat,
    }
}

/// `K1((alpha, beta), (sigma, gamma)) = L(alpha beta)^* L(sigma gamma)`.
pub fn build_k1(l: &MomentMap) -> HermitianBlockKernel {
    let pairs = l.sigma.pairs();
    let products: Vec<&CMatrix> = pairs.iter().map(|(a, b)| l.at(&a.concat(b))).collect();
    assemble(pair_keys(&l.sigma), l.d_in, |a, s| {
        Some(products[a].adjoint_mul(products[s]))
    })
}

/// The shifted kernel: `L(beta)^* L((sigma \ alpha) gamma)` when `alpha` is a
/// prefix of `sigma`, `L((alpha \ sigma) beta)^* L(gamma)` when `sigma` is a
/// proper prefix of `alpha`, and zero otherwise.
pub fn build_k2(l: &MomentMap) -> HermitianBlockKernel {
    let pairs = l.sigma.pairs();
    assemble(pair_keys(&l.sigma), l.d_in, |a, s| {
        let (alpha, beta) = &pairs[a];
        let (sigma, gamma) = &pairs[s];
        if let Some(tau) = prefix_quotient(sigma, alpha) {
            Some(l.at(beta).adjoint_mul(l.at(&tau.concat(gamma))))
        } else {
            prefix_quotient(alpha, sigma)
                .map(|tau| l.at(&tau.concat(beta)).adjoint_mul(l.at(gamma)))
        }
    })
}

/// Scalar kernels of a vector-valued map; the same formulas as
/// [`build_k1`] and [`build_k2`] at `d_in = 1`.
pub fn build_k3_k4(m: &MomentMap) -> Result<(HermitianBlockKernel, HermitianBlockKernel)> {
    if m.d_in != 1 {
        return Err(Error::NotVectorValued { d_in: m.d_in });
    }
    Ok((build_k1(m), build_k2(m)))
}

/// Which kernel over `Sigma` to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToeplitzVariant {
    /// `L(tau \ sigma)` / `L(sigma \ tau)^*` / 0.
    Toeplitz,
    /// `L(sigma)^* L(tau)`.
    Gram,
    /// `L(g_0)^* L(tau \ sigma)` / `L(sigma \ tau)^* L(g_0)` / 0; agrees with
    /// the plain Toeplitz kernel when `L(g_0) = I`.
    Weighted,
}

/// The plain Toeplitz variant needs square moments; the other two only use
/// products `L(.)^* L(.)` and accept rectangular blocks.
pub fn build_toeplitz_kernel(l: &MomentMap, variant: ToeplitzVariant) -> Result<HermitianBlockKernel> {
    if variant == ToeplitzVariant::Toeplitz && !l.is_square() {
        return Err(Error::NotSquare {
            rows: l.d_out,
            cols: l.d_in,
        });
    }
    let words = l.sigma.words();
    let base = l.base();
    Ok(assemble(word_keys(&l.sigma), l.d_in, |a, s| {
        let (x, y) = (&words[a], &words[s]);
        match variant {
            ToeplitzVariant::Gram => Some(l.at(x).adjoint_mul(l.at(y))),
            ToeplitzVariant::Toeplitz => {
                if let Some(rest) = prefix_quotient(y, x) {
                    Some(l.at(&rest).clone())
                } else {
                    prefix_quotient(x, y).map(|rest| l.at(&rest).adjoint())
                }
            }
            ToeplitzVariant::Weighted => {
                if let Some(rest) = prefix_quotient(y, x) {
                    Some(base.adjoint_mul(l.at(&rest)))
                } else {
                    prefix_quotient(x, y).map(|rest| l.at(&rest).adjoint_mul(base))
                }
            }
        }
    }))
}

fn scale_of(k: &CMatrix) -> f64 {
    k.frobenius_norm().max(1.0)
}

/// PSD test of `K2 - K1`, relative to `max(1, ||K2||_F)`.
pub fn check_moment_dominance(l: &MomentMap, tol: f64) -> Result<FeasibilityReport> {
    let k1 = build_k1(l);
    let k2 = build_k2(l);
    let diff = &k2.flat - &k1.flat;
    let min = hermitian_eig(&diff)?.min();
    let scale = scale_of(&k2.flat);
    let mut r = FeasibilityReport::new(ReportKind::Dominance, tol);
    r.min_eigenvalue = min;
    r.residual_norm = (-min).max(0.0);
    r.pass = min >= -tol * scale;
    r.index_order = k2.index;
    r.detail("k2_norm", scale);
    r.detail("kernel_size", diff.rows() as f64);
    Ok(r)
}

/// Dominance test for a vector-valued map (`K3 <= K4`).
pub fn check_vector_dominance(m: &MomentMap, tol: f64) -> Result<FeasibilityReport> {
    if m.d_in != 1 {
        return Err(Error::NotVectorValued { d_in: m.d_in });
    }
    check_moment_dominance(m, tol)
}

/// `||K1 - K2||_F <= tol * max(1, ||K2||_F)`, cross-checked on the kernels
/// over `Sigma` (`L(sigma)^* L(tau)` against the weighted Toeplitz kernel).
pub fn check_star_equality(l: &MomentMap, tol: f64) -> Result<FeasibilityReport> {
    let k1 = build_k1(l);
    let k2 = build_k2(l);
    let diff = &k2.flat - &k1.flat;
    let residual = diff.frobenius_norm();
    let scale = scale_of(&k2.flat);

    let p1 = build_toeplitz_kernel(l, ToeplitzVariant::Gram)?;
    let p2 = build_toeplitz_kernel(l, ToeplitzVariant::Weighted)?;
    let primed = (&p2.flat - &p1.flat).frobenius_norm();
    let primed_pass = primed <= tol * scale_of(&p2.flat);

    let mut r = FeasibilityReport::new(ReportKind::Equality, tol);
    r.min_eigenvalue = hermitian_eig(&diff)?.min();
    r.residual_norm = residual;
    r.pass = residual <= tol * scale;
    r.index_order = k2.index;
    r.detail("k2_norm", scale);
    r.detail("primed_residual", primed);
    r.detail("primed_pass", if primed_pass { 1.0 } else { 0.0 });
    r.detail("primed_agrees", if primed_pass == r.pass { 1.0 } else { 0.0 });
    Ok(r)
}

/// PSD test of a Toeplitz-type kernel over `Sigma`.
pub fn check_toeplitz_psd(l: &MomentMap, variant: ToeplitzVariant, tol: f64) -> Result<FeasibilityReport> {
    let k = build_toeplitz_kernel(l, variant)?;
    let min = hermitian_eig(&k.flat)?.min();
    let mut r = FeasibilityReport::new(ReportKind::Psd, tol);
    r.min_eigenvalue = min;
    r.residual_norm = (-min).max(0.0);
    r.pass = min >= -tol * scale_of(&k.flat);
    r.index_order = k.index;
    r.detail("kernel_size", k.flat.rows() as f64);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use alloc::vec;
    use num_complex::Complex64;

    fn scalar_map(n: usize, words: &[(&str, Complex64)]) -> MomentMap {
        let ws: Vec<Word> = words.iter().map(|(k, _)| k.parse().unwrap()).collect();
        let sigma = AdmissibleSet::new(n, ws.clone()).unwrap();
        let blocks = ws
            .into_iter()
            .zip(words.iter().map(|(_, z)| CMatrix::scalar(*z)))
            .collect();
        MomentMap::new(sigma, blocks).unwrap()
    }

    fn t_map(t: f64) -> MomentMap {
        scalar_map(1, &[("", c64(1.0, 0.0)), ("1", c64(t, 0.0))])
    }

    #[test]
    fn k1_k2_on_three_by_three() {
        let l = t_map(0.5);
        let k1 = build_k1(&l);
        let k2 = build_k2(&l);
        assert_eq!(k1.index, vec!["|", "|1", "1|"]);
        let expect_k2 = CMatrix::from_real(3, 3, &[1.0, 0.5, 0.5, 0.5, 0.25, 0.25, 0.5, 0.25, 1.0]);
        assert!((&k2.flat - &expect_k2).frobenius_norm() < 1e-15);
        let expect_k1 = CMatrix::from_real(3, 3, &[1.0, 0.5, 0.5, 0.5, 0.25, 0.25, 0.5, 0.25, 0.25]);
        assert!((&k1.flat - &expect_k1).frobenius_norm() < 1e-15);
    }

    #[test]
    fn dominance_flips_at_unit_modulus() {
        let r = check_moment_dominance(&t_map(0.5), 1e-9).unwrap();
        assert!(r.pass);
        assert!(r.min_eigenvalue.abs() < 1e-14);
        let r = check_moment_dominance(&t_map(2.0), 1e-9).unwrap();
        assert!(!r.pass);
        assert!((r.min_eigenvalue + 3.0).abs() < 1e-12);
    }

    #[test]
    fn star_equality_cases() {
        let r = check_star_equality(&t_map(1.0), 1e-9).unwrap();
        assert!(r.pass && r.details["primed_agrees"] == 1.0);
        let r = check_star_equality(&t_map(0.5), 1e-9).unwrap();
        assert!(!r.pass);
        assert!((r.residual_norm - 0.75).abs() < 1e-14);
        assert_eq!(r.details["primed_pass"], 0.0);
    }

    #[test]
    fn singleton_sigma() {
        let l = scalar_map(2, &[("", c64(1.0, 0.0))]);
        assert_eq!(build_k1(&l).flat, CMatrix::identity(1));
        assert_eq!(build_k2(&l).flat, CMatrix::identity(1));
    }

    #[test]
    fn classical_toeplitz() {
        let l = scalar_map(
            1,
            &[("", c64(1.0, 0.0)), ("1", c64(0.3, 0.1)), ("1.1", c64(-0.2, 0.4))],
        );
        let k = build_toeplitz_kernel(&l, ToeplitzVariant::Toeplitz).unwrap();
        let c = [c64(1.0, 0.0), c64(0.3, 0.1), c64(-0.2, 0.4)];
        for j in 0..3 {
            for i in 0..3 {
                let want = if i >= j { c[i - j] } else { c[j - i].conj() };
                assert_eq!(k.flat[(j, i)], want);
            }
        }
        let ones = scalar_map(1, &[("", c64(1.0, 0.0)), ("1", c64(1.0, 0.0)), ("1.1", c64(1.0, 0.0))]);
        assert!(check_toeplitz_psd(&ones, ToeplitzVariant::Toeplitz, 1e-9).unwrap().pass);
        let bad = scalar_map(1, &[("", c64(1.0, 0.0)), ("1", c64(1.0, 0.0)), ("1.1", c64(-1.0, 0.0))]);
        assert!(!check_toeplitz_psd(&bad, ToeplitzVariant::Toeplitz, 1e-9).unwrap().pass);
    }

    #[test]
    fn k3_requires_vectors() {
        let sigma = AdmissibleSet::truncation(1, 1);
        let l = MomentMap::from_fn(sigma, |_| CMatrix::identity(2)).unwrap();
        assert!(matches!(build_k3_k4(&l), Err(Error::NotVectorValued { d_in: 2 })));
    }

    #[test]
    fn moment_map_validation() {
        let sigma = AdmissibleSet::truncation(1, 1);
        let mut blocks = BTreeMap::new();
        blocks.insert(Word::empty(), CMatrix::identity(2));
        assert!(MomentMap::new(sigma.clone(), blocks.clone()).is_err());
        blocks.insert(Word::generator(1), CMatrix::identity(3));
        assert!(MomentMap::new(sigma, blocks).is_err());
    }

    #[test]
    fn orthogonal_generators_give_zero_blocks() {
        let sigma = AdmissibleSet::truncation(2, 2);
        let l = MomentMap::from_fn(sigma.clone(), |w| CMatrix::scalar(c64(1.0 + w.len() as f64, 0.0))).unwrap();
        let k2 = build_k2(&l);
        let a = sigma.pair_index(&Word::generator(1), &Word::empty()).unwrap();
        let s = sigma.pair_index(&Word::generator(2), &Word::generator(1)).unwrap();
        assert_eq!(k2.flat[(a, s)], c64(0.0, 0.0));
    }
}
