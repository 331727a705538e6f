//! Moment problems indexed by `Z_n^+`.
//!
//! A map `Gamma` on a downward-closed `Pi` is lifted to the words whose
//! letter counts lie in `Pi`, twisted by the signature of the commutation
//! coefficients, and handed to the free-semigroup pipelines.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gns::{synthesize_cp_model, synthesize_row_contraction, CpModel, SynthesisCertificate};
use crate::kernels::MomentMap;
use crate::linalg::{word_product, CMatrix};
use crate::words::{abelianize, multiindex_to_word, sigma_pi, signature, FreePolynomial, LambdaSpec, MultiIndex};

/// Default cap on the size of the lifted word set.
pub const SIGMA_CAP: usize = 2000;

/// `k -> Gamma(k)` on a finite downward-closed `Pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutativeMomentMap {
    n: usize,
    d_out: usize,
    d_in: usize,
    blocks: BTreeMap<MultiIndex, CMatrix>,
    lam: LambdaSpec,
}

impl CommutativeMomentMap {
    /// Checks shapes and arity; downward closure is checked when lifting.
    pub fn new(n: usize, blocks: BTreeMap<MultiIndex, CMatrix>, lam: LambdaSpec) -> Result<Self> {
        let zero = MultiIndex::zero(n);
        let base = blocks
            .get(&zero)
            .ok_or_else(|| Error::InvalidMoments(format!("no moment at ({zero})")))?;
        let (d_out, d_in) = (base.rows(), base.cols());
        for (k, b) in &blocks {
            if k.n() != n {
                return Err(Error::InvalidMoments(format!("({k}) has arity {} != {n}", k.n())));
            }
            if b.rows() != d_out || b.cols() != d_in {
                return Err(Error::InvalidMoments(format!(
                    "moment at ({k}) is {}x{}, expected {d_out}x{d_in}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        if lam.n() != n {
            return Err(Error::InvalidMoments(format!("lambda is for n = {}, not {n}", lam.n())));
        }
        Ok(CommutativeMomentMap {
            n,
            d_out,
            d_in,
            blocks,
            lam,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn pi(&self) -> Vec<MultiIndex> {
        self.blocks.keys().cloned().collect()
    }

    pub fn blocks(&self) -> &BTreeMap<MultiIndex, CMatrix> {
        &self.blocks
    }

    pub fn lambda(&self) -> &LambdaSpec {
        &self.lam
    }

    pub fn gamma(&self, k: &MultiIndex) -> Option<&CMatrix> {
        self.blocks.get(k)
    }

    /// The relations `T_j T_i = lambda_{ji} T_i T_j` as polynomials; plain
    /// commutators where the coefficient is one.
    pub fn relations(&self) -> Vec<FreePolynomial> {
        let one = Complex64::new(1.0, 0.0);
        let mut out = Vec::new();
        for i in 1..=self.n {
            for j in i + 1..=self.n {
                let l = self.lam.get(j, i);
                out.push(if l == one {
                    FreePolynomial::commutator(i, j)
                } else {
                    FreePolynomial::lambda_relation(j, i, l)
                });
            }
        }
        out
    }
}

/// `L(sigma) = eps(sigma) Gamma(phi(sigma))` on the preimage of `Pi`.
pub fn lift_moments(g: &CommutativeMomentMap, cap: usize) -> Result<MomentMap> {
    let sigma = sigma_pi(g.n, &g.pi(), cap)?;
    let mut blocks = Vec::with_capacity(sigma.len());
    for w in sigma.words() {
        let eps = signature(w, &g.lam)?;
        blocks.push(g.blocks[&abelianize(w, g.n)].scale(eps));
    }
    MomentMap::from_ordered(sigma, blocks)
}

/// `max_{i<j} ||T_j T_i - lambda_{ji} T_i T_j||_F`.
pub fn commutation_residual(tuple: &[CMatrix], lam: &LambdaSpec) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let lhs = tuple[j].matmul(&tuple[i]);
            let rhs = tuple[i].matmul(&tuple[j]).scale(lam.get(j + 1, i + 1));
            worst = worst.max((&lhs - &rhs).frobenius_norm());
        }
    }
    worst
}

/// Row-contraction solution: dominance test on the lifted map, synthesis,
/// then the commutation and `Gamma(k) = T^{omega_k} Gamma(0)` residuals.
pub fn solve_commutative_poisson(g: &CommutativeMomentMap, tol: f64) -> Result<SynthesisCertificate> {
    let l = lift_moments(g, SIGMA_CAP)?;
    let mut cert = synthesize_row_contraction(&l, tol)?;
    let base = &g.blocks[&MultiIndex::zero(g.n)];
    let mut gamma: f64 = 0.0;
    for (k, m) in &g.blocks {
        let t = word_product(&cert.tuple, &multiindex_to_word(k), g.d_out).matmul(base);
        gamma = gamma.max((&t - m).frobenius_norm());
    }
    let comm = commutation_residual(&cert.tuple, &g.lam);
    cert.extra("commutation", comm);
    cert.extra("gamma", gamma);
    Ok(cert)
}

/// Completely positive model with commuting compressed shifts, for
/// `Gamma(0) = I` and a positive Toeplitz kernel.
pub fn solve_trig_moment(g: &CommutativeMomentMap, tol: f64) -> Result<(CpModel, SynthesisCertificate)> {
    let base = &g.blocks[&MultiIndex::zero(g.n)];
    if g.d_out != g.d_in {
        return Err(Error::NotSquare {
            rows: g.d_out,
            cols: g.d_in,
        });
    }
    let dev = (base - &CMatrix::identity(g.d_in)).frobenius_norm();
    if dev > tol * (g.d_in as f64).sqrt().max(1.0) {
        return Err(Error::GammaZeroNotIdentity { residual: dev });
    }
    let l = lift_moments(g, SIGMA_CAP)?;
    let (model, mut cert) = synthesize_cp_model(&l, &g.relations(), tol).map_err(|e| match e {
        Error::EmbedNotIsometric { residual } => Error::GammaZeroNotIdentity { residual },
        other => other,
    })?;
    let dim = model.ambient_dim;
    let mut gamma: f64 = 0.0;
    for (k, m) in &g.blocks {
        let t = word_product(&model.compressed_tuple, &multiindex_to_word(k), dim);
        let phi = model.embed.adjoint_mul(&t.matmul(&model.embed));
        gamma = gamma.max((&phi - m).frobenius_norm());
    }
    cert.extra("commutation", commutation_residual(&model.compressed_tuple, &g.lam));
    cert.extra("gamma", gamma);
    Ok((model, cert))
}

/// Builds `Gamma(k) = T^{omega_k} base` for all `k` in `pi`.
pub fn moments_from_tuple(
    tuple: &[CMatrix],
    pi: &[MultiIndex],
    base: &CMatrix,
    lam: LambdaSpec,
) -> Result<CommutativeMomentMap> {
    let n = tuple.len();
    let dim = base.rows();
    let blocks = pi
        .iter()
        .map(|k| (k.clone(), word_product(tuple, &multiindex_to_word(k), dim).matmul(base)))
        .collect();
    CommutativeMomentMap::new(n, blocks, lam)
}

/// `{k : |k| <= degree}`.
pub fn total_degree_set(n: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = alloc::vec![0; n];
    fill_degree(&mut cur, 0, degree, &mut out);
    out.sort();
    out
}

fn fill_degree(cur: &mut [usize], pos: usize, left: usize, out: &mut Vec<MultiIndex>) {
    if pos == cur.len() {
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    for c in 0..=left {
        cur[pos] = c;
        fill_degree(cur, pos + 1, left - c, out);
    }
    cur[pos] = 0;
}
