//! Moment problems modulo a homogeneous two-sided ideal.
//!
//! Moments are given through representatives on an admissible `Sigma`; the
//! ideal enters as the linear relations `sum_j a_j L(omega alpha_j beta) = 0`
//! on every translate of a generator that fits inside `Sigma`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gns::{relation_residual, row_contraction_unchecked, synthesize_cp_model, CpModel, SynthesisCertificate};
use crate::kernels::{check_moment_dominance, check_toeplitz_psd, FeasibilityReport, MomentMap, ReportKind, ToeplitzVariant};
use crate::linalg::CMatrix;
use crate::words::{ideal_span_basis, is_compatible, pair_key, touching_translates, FreePolynomial};

/// Moments together with the homogeneous generators of the ideal.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientInstance {
    l: MomentMap,
    polys: Vec<FreePolynomial>,
}

impl QuotientInstance {
    /// Requires homogeneous generators on the instance's letters, each
    /// compatible with `Sigma`.
    pub fn new(l: MomentMap, polys: Vec<FreePolynomial>) -> Result<Self> {
        for p in &polys {
            if p.is_zero() {
                return Err(Error::InvalidMoments("zero polynomial in the relation set".into()));
            }
            if !p.is_homogeneous() {
                return Err(Error::NotHomogeneous);
            }
            if p.max_letter() > l.n() {
                return Err(Error::InvalidWord(format!("relation {p} uses a generator above n = {}", l.n())));
            }
            if !is_compatible(l.sigma(), p) {
                return Err(Error::NotAdmissiblePair);
            }
        }
        Ok(QuotientInstance { l, polys })
    }

    pub fn moments(&self) -> &MomentMap {
        &self.l
    }

    pub fn polys(&self) -> &[FreePolynomial] {
        &self.polys
    }
}

/// `||sum_j a_j L(omega alpha_j beta)||_F` on every translate inside
/// `Sigma`, against `tol * max(1, max ||L||_F)`.
pub fn check_ideal_relations(q: &QuotientInstance, tol: f64) -> FeasibilityReport {
    let sigma = q.l.sigma();
    let scale = q.l.max_norm().max(1.0);
    let mut r = FeasibilityReport::new(ReportKind::Relations, tol);
    let mut checked = 0usize;
    for (k, p) in q.polys.iter().enumerate() {
        for (omega, beta) in touching_translates(sigma, p) {
            let shifted = p.sandwich(&omega, &beta);
            if !shifted.terms().iter().all(|(_, w)| sigma.contains(w)) {
                continue;
            }
            let mut acc = CMatrix::zeros(q.l.d_out(), q.l.d_in());
            for (a, w) in shifted.terms() {
                acc = &acc + &q.l.at(w).scale(*a);
            }
            checked += 1;
            let res = acc.frobenius_norm();
            if res > r.residual_norm || r.worst.is_none() {
                r.residual_norm = res;
                r.worst = Some(format!("p{k}@{}", pair_key(&omega, &beta)));
            }
        }
        r.index_order.push(format!("{p}"));
    }
    r.pass = r.residual_norm <= tol * scale;
    r.detail("translates_checked", checked as f64);
    r.detail("scale", scale);
    r
}

fn ideal_residuals(cert: &mut SynthesisCertificate, polys: &[FreePolynomial], max_degree: usize) -> Result<()> {
    cert.extra("ideal", relation_residual(&cert.tuple, polys));
    let low = polys.iter().filter_map(FreePolynomial::degree).min().unwrap_or(0);
    let mut span: f64 = 0.0;
    for degree in low..=max_degree.max(low) {
        let basis = ideal_span_basis(polys, degree, cert.n)?;
        span = span.max(relation_residual(&cert.tuple, &basis));
    }
    cert.extra("ideal_span", span);
    Ok(())
}

/// Relation gate and dominance gate, then the row-contraction synthesis.
/// Both gates always run; a relation failure carries both reports.
pub fn solve_quotient_poisson(q: &QuotientInstance, tol: f64) -> Result<SynthesisCertificate> {
    let relations = check_ideal_relations(q, tol);
    let dominance = check_moment_dominance(&q.l, tol)?;
    if !relations.pass {
        return Err(Error::RelationsFail {
            relations: Box::new(relations),
            dominance: Box::new(dominance),
        });
    }
    if !dominance.pass {
        return Err(Error::InfeasibleMoments(Box::new(dominance)));
    }
    let mut cert = row_contraction_unchecked(&q.l, tol)?;
    if !q.polys.is_empty() {
        ideal_residuals(&mut cert, &q.polys, q.l.sigma().max_len())?;
    }
    Ok(cert)
}

/// Relation gate and Toeplitz positivity, then the compressed shift model
/// with `E` generated by the relations.
pub fn solve_quotient_trig(q: &QuotientInstance, tol: f64) -> Result<(CpModel, SynthesisCertificate)> {
    if !q.l.is_square() {
        return Err(Error::NotSquare {
            rows: q.l.d_out(),
            cols: q.l.d_in(),
        });
    }
    let d = q.l.d_in();
    let dev = (q.l.base() - &CMatrix::identity(d)).frobenius_norm();
    if dev > tol * (d as f64).sqrt().max(1.0) {
        return Err(Error::GammaZeroNotIdentity { residual: dev });
    }
    let relations = check_ideal_relations(q, tol);
    let psd = check_toeplitz_psd(&q.l, ToeplitzVariant::Toeplitz, tol)?;
    if !relations.pass {
        return Err(Error::RelationsFail {
            relations: Box::new(relations),
            dominance: Box::new(psd),
        });
    }
    if !psd.pass {
        return Err(Error::ToeplitzNotPsd(Box::new(psd)));
    }
    let (model, mut cert) = synthesize_cp_model(&q.l, &q.polys, tol)?;
    if !q.polys.is_empty() {
        ideal_residuals(&mut cert, &q.polys, q.l.sigma().max_len())?;
    }
    Ok((model, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gns::synthesize_row_contraction;
    use crate::linalg::{c64, word_product};
    use crate::words::{AdmissibleSet, Word};
    use alloc::vec;

    fn from_tuple(tuple: &[CMatrix], depth: usize) -> MomentMap {
        let n = tuple.len();
        let d = tuple[0].rows();
        MomentMap::from_fn(AdmissibleSet::truncation(n, depth), |w| word_product(tuple, w, d)).unwrap()
    }

    fn commuting_pair() -> Vec<CMatrix> {
        vec![
            CMatrix::diag(&[c64(0.3, 0.1), c64(-0.2, 0.0)]),
            CMatrix::diag(&[c64(0.1, 0.0), c64(0.4, -0.3)]),
        ]
    }

    #[test]
    fn commuting_moments_pass_relations() {
        let q = QuotientInstance::new(from_tuple(&commuting_pair(), 2), vec![FreePolynomial::commutator(1, 2)]).unwrap();
        let r = check_ideal_relations(&q, 1e-9);
        assert!(r.pass && r.residual_norm < 1e-12);
        let cert = solve_quotient_poisson(&q, 1e-9).unwrap();
        assert!(cert.extra_residuals["ideal"] < 1e-9);
        assert!(cert.extra_residuals["ideal_span"] < 1e-9);
    }

    #[test]
    fn free_moments_fail_relations_before_synthesis() {
        let fock = crate::poisson::FockTruncation::new(2, 3);
        let s = fock.creations();
        let vac = fock.index_of(&Word::empty()).unwrap();
        let l = MomentMap::from_fn(AdmissibleSet::truncation(2, 2), |w| {
            word_product(&s, w, fock.dim()).select_columns(&[vac])
        })
        .unwrap();
        let q = QuotientInstance::new(l, vec![FreePolynomial::commutator(1, 2)]).unwrap();
        assert!(!check_ideal_relations(&q, 1e-9).pass);
        assert!(matches!(solve_quotient_poisson(&q, 1e-9), Err(Error::RelationsFail { .. })));
    }

    #[test]
    fn empty_relations_match_plain_pipeline() {
        let l = from_tuple(&commuting_pair(), 2);
        let q = QuotientInstance::new(l.clone(), vec![]).unwrap();
        assert_eq!(solve_quotient_poisson(&q, 1e-9).unwrap(), synthesize_row_contraction(&l, 1e-9).unwrap());
        assert!(check_ideal_relations(&q, 1e-9).pass);
    }

    #[test]
    fn incompatible_pair_is_rejected() {
        let sigma = AdmissibleSet::new(2, ["", "2", "1.2"].iter().map(|s| s.parse::<Word>().unwrap())).unwrap();
        let l = MomentMap::from_fn(sigma, |_| CMatrix::identity(1)).unwrap();
        assert!(matches!(
            QuotientInstance::new(l, vec![FreePolynomial::commutator(1, 2)]),
            Err(Error::NotAdmissiblePair)
        ));
    }
}
