//! JSON file formats: instances, certificates and reports.
//!
//! Floats are written with 17 significant digits and every object has its
//! keys sorted, so equal inputs give byte-equal files.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use momt_core::commutative::CommutativeMomentMap;
use momt_core::gns::SynthesisCertificate;
use momt_core::linalg::{c64, CMatrix};
use momt_core::poisson::GeneratedInstance;
use momt_core::quotient::QuotientInstance;
use momt_core::{AdmissibleSet, FeasibilityReport, FreePolynomial, LambdaSpec, MomentMap, MultiIndex, Word};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{Map, Number, Value};

type RawMatrix = Vec<Vec<[f64; 2]>>;

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let n: Number = format!("{x:.16e}").parse().expect("exponent notation is valid JSON");
    Value::Number(n)
}

pub fn complex(z: Complex64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

fn parse_matrix(raw: &RawMatrix, rows: usize, cols: usize, what: &str) -> Result<CMatrix> {
    if raw.len() != rows || raw.iter().any(|r| r.len() != cols) {
        bail!("{what}: expected a {rows}x{cols} matrix");
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c64(raw[i][j][0], raw[i][j][1])))
}

fn parse_square(raw: &RawMatrix, what: &str) -> Result<CMatrix> {
    parse_matrix(raw, raw.len(), raw.len(), what)
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

#[derive(Deserialize)]
struct TermDoc {
    coeff: [f64; 2],
    word: String,
}

#[derive(Deserialize)]
struct PolyDoc {
    terms: Vec<TermDoc>,
}

#[derive(Deserialize)]
struct InstanceDoc {
    n: usize,
    dim_out: usize,
    dim_in: usize,
    #[serde(default)]
    sigma: Option<Vec<String>>,
    #[serde(default)]
    moments: Option<BTreeMap<String, RawMatrix>>,
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    pi: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    gamma: Option<BTreeMap<String, RawMatrix>>,
    #[serde(default)]
    lambda: Option<BTreeMap<String, [f64; 2]>>,
    #[serde(default)]
    polys: Option<Vec<PolyDoc>>,
}

/// A parsed instance file. Free moments, the commutative extension and the
/// ideal generators are each optional; problems ask for what they need.
#[derive(Clone, Debug)]
pub struct Instance {
    pub n: usize,
    pub dim_out: usize,
    pub dim_in: usize,
    pub kind: Option<String>,
    pub seed: Option<u64>,
    pub moments: Option<MomentMap>,
    pub gamma: Option<BTreeMap<MultiIndex, CMatrix>>,
    pub lambda: LambdaSpec,
    pub polys: Vec<FreePolynomial>,
}

/// Parses `"j.i"` into `(j, i)`.
pub fn parse_lambda_key(key: &str) -> Result<(usize, usize)> {
    let (j, i) = key
        .split_once('.')
        .ok_or_else(|| anyhow!("lambda key {key:?} is not of the form j.i"))?;
    Ok((j.trim().parse()?, i.trim().parse()?))
}

impl Instance {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        let n = doc.n;
        let moments = match (doc.sigma, doc.moments) {
            (Some(keys), Some(raw)) => {
                let words = keys
                    .iter()
                    .map(|k| k.parse::<Word>())
                    .collect::<Result<Vec<_>, _>>()?;
                let sigma = AdmissibleSet::new(n, words)?;
                let mut blocks = BTreeMap::new();
                for (k, m) in &raw {
                    let w: Word = k.parse()?;
                    blocks.insert(w, parse_matrix(m, doc.dim_out, doc.dim_in, &format!("moment {k:?}"))?);
                }
                Some(MomentMap::new(sigma, blocks)?)
            }
            (None, None) => None,
            _ => bail!("\"sigma\" and \"moments\" must be given together"),
        };
        let gamma = match doc.gamma {
            Some(raw) => {
                let mut out = BTreeMap::new();
                for (k, m) in &raw {
                    let idx: MultiIndex = k.parse()?;
                    out.insert(idx, parse_matrix(m, doc.dim_out, doc.dim_in, &format!("gamma {k:?}"))?);
                }
                if let Some(pi) = &doc.pi {
                    let listed: Vec<MultiIndex> = pi.iter().map(|k| MultiIndex(k.clone())).collect();
                    if listed.len() != out.len() || listed.iter().any(|k| !out.contains_key(k)) {
                        bail!("\"pi\" and the keys of \"gamma\" differ");
                    }
                }
                Some(out)
            }
            None if doc.pi.is_some() => bail!("\"pi\" given without \"gamma\""),
            None => None,
        };
        let mut lambda = LambdaSpec::ones(n);
        for (k, z) in doc.lambda.unwrap_or_default() {
            let (j, i) = parse_lambda_key(&k)?;
            lambda.set(j, i, c64(z[0], z[1]))?;
        }
        let mut polys = Vec::new();
        for p in doc.polys.unwrap_or_default() {
            let terms = p
                .terms
                .iter()
                .map(|t| Ok((c64(t.coeff[0], t.coeff[1]), t.word.parse::<Word>()?)))
                .collect::<Result<Vec<_>>>()?;
            polys.push(FreePolynomial::new(terms));
        }
        Ok(Instance {
            n,
            dim_out: doc.dim_out,
            dim_in: doc.dim_in,
            kind: doc.kind,
            seed: doc.seed,
            moments,
            gamma,
            lambda,
            polys,
        })
    }

    pub fn moments(&self) -> Result<&MomentMap> {
        self.moments.as_ref().context("instance has no \"sigma\"/\"moments\"")
    }

    pub fn commutative(&self) -> Result<CommutativeMomentMap> {
        let gamma = self.gamma.clone().context("instance has no \"gamma\"")?;
        Ok(CommutativeMomentMap::new(self.n, gamma, self.lambda.clone())?)
    }

    pub fn quotient(&self) -> Result<QuotientInstance> {
        Ok(QuotientInstance::new(self.moments()?.clone(), self.polys.clone())?)
    }
}

fn moments_json(l: &MomentMap) -> (Value, Value) {
    let sigma = l.sigma().words().iter().map(|w| Value::String(w.to_string())).collect();
    let moments: Map<String, Value> = l.iter().map(|(w, m)| (w.to_string(), matrix(m))).collect();
    (Value::Array(sigma), Value::Object(moments))
}

fn poly_json(p: &FreePolynomial) -> Value {
    let terms = p
        .terms()
        .iter()
        .map(|(a, w)| {
            let mut t = Map::new();
            t.insert("coeff".into(), complex(*a));
            t.insert("word".into(), Value::String(w.to_string()));
            Value::Object(t)
        })
        .collect();
    let mut o = Map::new();
    o.insert("terms".into(), Value::Array(terms));
    Value::Object(o)
}

fn lambda_json(lam: &LambdaSpec) -> Value {
    Value::Object(
        lam.entries()
            .map(|((j, i), z)| (format!("{j}.{i}"), complex(z)))
            .collect(),
    )
}

/// Instance file of a generated family. The commuting families also carry
/// `pi`, `gamma`, `lambda` and their defining relations.
pub fn generated_instance_json(g: &GeneratedInstance, extension: Option<&CommutativeMomentMap>) -> Value {
    let l = &g.moments;
    let (sigma, moments) = moments_json(l);
    let mut o = Map::new();
    o.insert("n".into(), Value::from(l.n()));
    o.insert("dim_out".into(), Value::from(l.d_out()));
    o.insert("dim_in".into(), Value::from(l.d_in()));
    o.insert("sigma".into(), sigma);
    o.insert("moments".into(), moments);
    o.insert("kind".into(), Value::String(g.kind.as_str().into()));
    o.insert("seed".into(), Value::from(g.seed));
    o.insert(
        "meta".into(),
        Value::Object(g.meta.iter().map(|(k, v)| (k.clone(), num(*v))).collect()),
    );
    if let Some(c) = extension {
        let pi = c
            .pi()
            .iter()
            .map(|k| Value::Array(k.0.iter().map(|&x| Value::from(x)).collect()))
            .collect();
        o.insert("pi".into(), Value::Array(pi));
        o.insert(
            "gamma".into(),
            Value::Object(c.blocks().iter().map(|(k, m)| (k.to_string(), matrix(m))).collect()),
        );
        o.insert("lambda".into(), lambda_json(c.lambda()));
        let polys = c.relations();
        if !polys.is_empty() {
            o.insert("polys".into(), Value::Array(polys.iter().map(poly_json).collect()));
        }
    }
    Value::Object(o)
}

pub fn report_json(r: &FeasibilityReport) -> Value {
    let mut o = Map::new();
    o.insert("kind".into(), Value::String(r.kind.as_str().into()));
    o.insert("pass".into(), Value::Bool(r.pass));
    o.insert("min_eigenvalue".into(), num(r.min_eigenvalue));
    o.insert("residual_norm".into(), num(r.residual_norm));
    o.insert("tolerance".into(), num(r.tolerance));
    o.insert(
        "index_order".into(),
        Value::Array(r.index_order.iter().cloned().map(Value::String).collect()),
    );
    o.insert(
        "details".into(),
        Value::Object(r.details.iter().map(|(k, v)| (k.clone(), num(*v))).collect()),
    );
    o.insert("worst".into(), r.worst.clone().map_or(Value::Null, Value::String));
    Value::Object(o)
}

pub fn certificate_json(c: &SynthesisCertificate, problem: &str) -> Value {
    let mut residuals = Map::new();
    residuals.insert("moment".into(), num(c.moment_residual));
    residuals.insert("defect_min_eig".into(), num(c.defect_min_eig));
    for (k, v) in &c.extra_residuals {
        residuals.insert(k.clone(), num(*v));
    }
    let mut o = Map::new();
    o.insert("problem".into(), Value::String(problem.into()));
    o.insert("n".into(), Value::from(c.n));
    o.insert("dim".into(), Value::from(c.dim));
    o.insert("quotient_dim".into(), Value::from(c.quotient_dim));
    o.insert("tuple".into(), Value::Array(c.tuple.iter().map(matrix).collect()));
    o.insert("residuals".into(), Value::Object(residuals));
    o.insert("tolerance".into(), num(c.tolerance));
    if let Some(e) = &c.embed {
        o.insert("embed".into(), matrix(e));
    }
    Value::Object(o)
}

#[derive(Deserialize)]
struct CertificateDoc {
    n: usize,
    dim: usize,
    quotient_dim: usize,
    tuple: Vec<RawMatrix>,
    #[serde(default)]
    residuals: BTreeMap<String, Option<f64>>,
    tolerance: f64,
    #[serde(default)]
    embed: Option<RawMatrix>,
}

pub fn parse_certificate(text: &str) -> Result<SynthesisCertificate> {
    let doc: CertificateDoc = serde_json::from_str(text)?;
    if doc.tuple.len() != doc.n {
        bail!("certificate lists {} operators for n = {}", doc.tuple.len(), doc.n);
    }
    let tuple = doc
        .tuple
        .iter()
        .enumerate()
        .map(|(i, m)| parse_square(m, &format!("tuple[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let embed = match &doc.embed {
        Some(raw) => {
            let cols = raw.first().map_or(0, Vec::len);
            Some(parse_matrix(raw, raw.len(), cols, "embed")?)
        }
        None => None,
    };
    let mut residuals = doc.residuals;
    let take = |r: &mut BTreeMap<String, Option<f64>>, k: &str| r.remove(k).flatten().unwrap_or(f64::NAN);
    let moment_residual = take(&mut residuals, "moment");
    let defect_min_eig = take(&mut residuals, "defect_min_eig");
    Ok(SynthesisCertificate {
        n: doc.n,
        dim: doc.dim,
        tuple,
        quotient_dim: doc.quotient_dim,
        defect_min_eig,
        moment_residual,
        extra_residuals: residuals.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect(),
        tolerance: doc.tolerance,
        embed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use momt_core::poisson::{generate_instance, GenSpec, InstanceKind};

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(-3.0).to_string(), "-3.0000000000000000e+0");
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn instance_roundtrip() {
        let g = generate_instance(&GenSpec::new(InstanceKind::RowContraction, 2, 2, 2, 7)).unwrap();
        let text = to_pretty(&generated_instance_json(&g, None));
        let back = Instance::parse(&text).unwrap();
        assert_eq!(back.moments.as_ref().unwrap(), &g.moments);
        assert_eq!(back.kind.as_deref(), Some("row-contraction"));
        assert_eq!(to_pretty(&generated_instance_json(&g, None)), text);
    }

    #[test]
    fn lambda_keys() {
        assert_eq!(parse_lambda_key("2.1").unwrap(), (2, 1));
        assert!(parse_lambda_key("21").is_err());
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let text = r#"{"n":1,"dim_out":1,"dim_in":1,"sigma":["","1"],
            "moments":{"":[[[1,0]]],"1":[[[0.5,0],[0,0]]]}}"#;
        assert!(Instance::parse(text).is_err());
        let text = r#"{"n":1,"dim_out":1,"dim_in":1,"sigma":["","1"]}"#;
        assert!(Instance::parse(text).is_err());
    }
}
