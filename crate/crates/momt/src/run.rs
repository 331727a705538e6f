//! Command execution: one outcome per instance file, then the summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use momt_core::commutative::{commutation_residual, lift_moments, moments_from_tuple, total_degree_set, SIGMA_CAP};
use momt_core::gns::{
    partial_isometry_residual, range_orthogonality_residual, relation_residual, synthesize_row_contraction,
    synthesize_star_representation, verify_certificate, SynthesisCertificate,
};
use momt_core::kernels::{check_moment_dominance, check_star_equality, check_toeplitz_psd, check_vector_dominance, ToeplitzVariant};
use momt_core::linalg::CMatrix;
use momt_core::poisson::{default_radius, generate_instance, poisson_moment, GenSpec, InstanceKind, RowTuple};
use momt_core::quotient::{check_ideal_relations, solve_quotient_poisson, solve_quotient_trig};
use momt_core::{commutative, Error, FeasibilityReport, MomentMap, Word};
use serde_json::Value;

use crate::cli::{Cli, Common, GenArgs, LambdaArg, Problem, Verb, VerifyArgs};
use crate::format::{certificate_json, generated_instance_json, parse_certificate, report_json, to_pretty, Instance};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Feasible,
    Infeasible,
    Failed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Feasible => EXIT_OK,
            Status::Infeasible => EXIT_INFEASIBLE,
            Status::Failed => EXIT_USAGE,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Feasible => "pass",
            Status::Infeasible => "FAIL",
            Status::Failed => "error",
        }
    }
}

struct Outcome {
    status: Status,
    artifact: Value,
    min_eig: f64,
    residual: f64,
}

/// Runs a parsed command line, printing the table to stdout and diagnostics
/// to stderr. Returns the process exit code.
pub fn execute(cli: Cli) -> u8 {
    let result = match cli.verb {
        Verb::Check(a) => run_batch("check", &a.common, None),
        Verb::Synthesize(a) => run_batch("synthesize", &a.common, None),
        Verb::Verify(a) => run_batch("verify", &a.common, Some(&a)),
        Verb::Gen(a) => run_gen(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn validate(common: &Common, verify: Option<&VerifyArgs>) -> Result<()> {
    if !(common.tol.is_finite() && common.tol > 0.0) {
        bail!("--tol must be a positive number");
    }
    if common.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    if !common.lambda.is_empty() && !common.problem.is_commutative() {
        bail!("--lambda applies to the commutative and trig problems only");
    }
    if let Some(v) = verify {
        if v.certificates.len() != common.inputs.len() {
            bail!(
                "{} certificates for {} inputs; give one --certificate per --input",
                v.certificates.len(),
                common.inputs.len()
            );
        }
        if (v.depth.is_some() || v.r.is_some()) && common.problem != Problem::Poisson {
            bail!("--depth and --r apply to verify --problem poisson only");
        }
        if v.r.is_some() && v.depth.is_none() {
            bail!("--r needs --depth");
        }
        if let Some(r) = v.r {
            if !(r > 0.0 && r <= 1.0) {
                bail!("--r must lie in (0, 1]");
            }
        }
    }
    if common.inputs.len() > 1 {
        if let Some(out) = &common.output {
            if out.is_file() {
                bail!("{} is a file; with several inputs --output names a directory", out.display());
            }
        }
    }
    Ok(())
}

fn output_path(verb: &str, common: &Common, input: &Path) -> Option<PathBuf> {
    let out = common.output.as_ref()?;
    if common.inputs.len() == 1 {
        return Some(out.clone());
    }
    let stem = input.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
    Some(out.join(format!("{stem}.{verb}.json")))
}

fn run_batch(verb: &str, common: &Common, verify: Option<&VerifyArgs>) -> Result<u8> {
    validate(common, verify)?;
    if common.inputs.len() > 1 {
        if let Some(out) = &common.output {
            fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        }
    }
    let total = common.inputs.len();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Outcome>>>> = Mutex::new((0..total).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..common.jobs.min(total) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= total {
                    break;
                }
                let out = process(verb, common, verify, k);
                results.lock().expect("no worker panics while holding the lock")[k] = Some(out);
            });
        }
    });
    let results = results.into_inner().expect("workers finished");

    let mut table = String::new();
    writeln!(
        table,
        "{:<32} {:<11} {:<17} {:<6} {:>13} {:>13}",
        "input", "verb", "problem", "status", "min_eig", "residual"
    )?;
    let mut code = EXIT_OK;
    for (k, res) in results.into_iter().enumerate() {
        let input = common.inputs[k].display().to_string();
        let res = res.expect("every input was processed");
        let (status, min_eig, residual) = match res {
            Ok(o) => {
                if let Some(path) = output_path(verb, common, &common.inputs[k]) {
                    if let Err(e) = fs::write(&path, to_pretty(&o.artifact)) {
                        eprintln!("error: {input}: writing {}: {e}", path.display());
                        code = code.max(EXIT_USAGE);
                        continue;
                    }
                }
                (o.status, fmt6(o.min_eig), fmt6(o.residual))
            }
            Err(e) => {
                eprintln!("error: {input}: {e:#}");
                (Status::Failed, "-".into(), "-".into())
            }
        };
        code = code.max(status.code());
        writeln!(
            table,
            "{:<32} {:<11} {:<17} {:<6} {:>13} {:>13}",
            input,
            verb,
            common.problem.as_str(),
            status.label(),
            min_eig,
            residual
        )?;
    }
    print!("{table}");
    Ok(code)
}

fn fmt6(x: f64) -> String {
    format!("{x:.5e}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path, lambda: &[LambdaArg]) -> Result<Instance> {
    let mut inst = Instance::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    for a in lambda {
        inst.lambda.set(a.j, a.i, a.value)?;
    }
    Ok(inst)
}

fn process(verb: &str, common: &Common, verify_args: Option<&VerifyArgs>, k: usize) -> Result<Outcome> {
    let inst = load_instance(&common.inputs[k], &common.lambda)?;
    let (problem, tol) = (common.problem, common.tol);
    match (verb, verify_args) {
        ("check", _) => {
            let r = check(problem, &inst, tol)?;
            Ok(report_outcome(&r))
        }
        ("synthesize", _) => match synthesize(problem, &inst, tol)? {
            Ok(cert) => Ok(Outcome {
                status: Status::Feasible,
                artifact: certificate_json(&cert, problem.as_str()),
                min_eig: cert.defect_min_eig,
                residual: cert.moment_residual,
            }),
            Err(report) => Ok(report_outcome(&report)),
        },
        (_, Some(v)) => {
            let path = &v.certificates[k];
            let cert = parse_certificate(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            let r = verify(problem, &inst, &cert, tol, v.depth, v.r)?;
            Ok(report_outcome(&r))
        }
        _ => unreachable!("verify always carries its arguments"),
    }
}

fn report_outcome(r: &FeasibilityReport) -> Outcome {
    Outcome {
        status: if r.pass { Status::Feasible } else { Status::Infeasible },
        artifact: report_json(r),
        min_eig: r.min_eigenvalue,
        residual: r.residual_norm,
    }
}

/// Folds the ideal-relation report into the positivity report that follows it.
fn merge_relations(relations: &FeasibilityReport, mut gate: FeasibilityReport) -> FeasibilityReport {
    gate.detail("relations_residual", relations.residual_norm);
    gate.detail("relations_pass", if relations.pass { 1.0 } else { 0.0 });
    if let Some(n) = relations.details.get("translates_checked") {
        gate.detail("translates_checked", *n);
    }
    if !relations.pass {
        gate.pass = false;
        gate.worst = relations.worst.clone();
    }
    gate
}

fn lifted(inst: &Instance) -> Result<MomentMap> {
    Ok(lift_moments(&inst.commutative()?, SIGMA_CAP)?)
}

/// The feasibility test of each problem.
pub fn check(problem: Problem, inst: &Instance, tol: f64) -> Result<FeasibilityReport> {
    Ok(match problem {
        Problem::Poisson => {
            let l = inst.moments()?;
            if l.d_in() == 1 {
                check_vector_dominance(l, tol)?
            } else {
                check_moment_dominance(l, tol)?
            }
        }
        Problem::Star => check_star_equality(inst.moments()?, tol)?,
        Problem::Commutative => check_moment_dominance(&lifted(inst)?, tol)?,
        Problem::Trig => check_toeplitz_psd(&lifted(inst)?, ToeplitzVariant::Toeplitz, tol)?,
        Problem::QuotientPoisson => {
            let q = inst.quotient()?;
            merge_relations(&check_ideal_relations(&q, tol), check_moment_dominance(q.moments(), tol)?)
        }
        Problem::QuotientTrig => {
            let q = inst.quotient()?;
            let psd = check_toeplitz_psd(q.moments(), ToeplitzVariant::Toeplitz, tol)?;
            merge_relations(&check_ideal_relations(&q, tol), psd)
        }
    })
}

/// A certificate, or the report of a clean infeasibility.
pub fn synthesize(
    problem: Problem,
    inst: &Instance,
    tol: f64,
) -> Result<std::result::Result<SynthesisCertificate, FeasibilityReport>> {
    let res = match problem {
        Problem::Poisson => synthesize_row_contraction(inst.moments()?, tol),
        Problem::Star => synthesize_star_representation(inst.moments()?, tol),
        Problem::Commutative => commutative::solve_commutative_poisson(&inst.commutative()?, tol),
        Problem::Trig => commutative::solve_trig_moment(&inst.commutative()?, tol).map(|(_, c)| c),
        Problem::QuotientPoisson => solve_quotient_poisson(&inst.quotient()?, tol),
        Problem::QuotientTrig => solve_quotient_trig(&inst.quotient()?, tol).map(|(_, c)| c),
    };
    match res {
        Ok(cert) => Ok(Ok(cert)),
        Err(Error::RelationsFail { relations, dominance }) => Ok(Err(merge_relations(&relations, *dominance))),
        Err(e) if e.is_infeasible() => Ok(Err(e.report().cloned().expect("infeasibility carries a report"))),
        Err(e) => Err(e.into()),
    }
}

/// Independent recomputation of a certificate, plus the residuals the
/// problem adds to the moment and defect checks.
pub fn verify(
    problem: Problem,
    inst: &Instance,
    cert: &SynthesisCertificate,
    tol: f64,
    depth: Option<usize>,
    r: Option<f64>,
) -> Result<FeasibilityReport> {
    let l = if problem.is_commutative() { lifted(inst)? } else { inst.moments()?.clone() };
    let mut report = verify_certificate(cert, &l, tol)?;
    let extra = |report: &mut FeasibilityReport, name: &str, value: f64| {
        report.detail(name, value);
        if !(value <= tol) {
            report.pass = false;
        }
    };
    match problem {
        Problem::Commutative | Problem::Trig => {
            extra(&mut report, "commutation", commutation_residual(&cert.tuple, &inst.lambda));
        }
        Problem::QuotientPoisson | Problem::QuotientTrig => {
            extra(&mut report, "ideal", relation_residual(&cert.tuple, &inst.polys));
        }
        Problem::Star => {
            let pi = cert.tuple.iter().map(partial_isometry_residual).fold(0.0, f64::max);
            extra(&mut report, "t_partial_isometry", pi);
            extra(&mut report, "t_range_orthogonality", range_orthogonality_residual(&cert.tuple));
        }
        Problem::Poisson => {
            if let Some(depth) = depth {
                poisson_details(&mut report, &l, cert, depth, r, tol)?;
            }
        }
    }
    Ok(report)
}

/// `max_sigma ||P[S_sigma] L(g_0) - L(sigma)||_F` for the Poisson transform
/// `P` of the certificate tuple, truncated at `depth`. Informational.
fn poisson_details(
    report: &mut FeasibilityReport,
    l: &MomentMap,
    cert: &SynthesisCertificate,
    depth: usize,
    r: Option<f64>,
    tol: f64,
) -> Result<()> {
    if cert.embed.is_some() {
        bail!("the Poisson evaluation needs a row-contraction certificate");
    }
    let t = RowTuple::new(cert.tuple.clone())?;
    let rho = t.row_norm()?;
    let m = l.sigma().max_len();
    let r = r.unwrap_or_else(|| default_radius(rho, m, depth));
    let mut worst: f64 = 0.0;
    for (w, target) in l.iter() {
        let p = poisson_moment(&t, w, &Word::empty(), r, depth, tol)?;
        let got: CMatrix = p.matmul(l.base());
        worst = worst.max((&got - target).frobenius_norm());
    }
    report.detail("poisson_residual", worst);
    report.detail("poisson_r", r);
    report.detail("poisson_depth", depth as f64);
    Ok(())
}

fn run_gen(a: &GenArgs) -> Result<u8> {
    let kind: InstanceKind = a.kind.parse()?;
    let mut spec = GenSpec::new(kind, a.n, a.dim, a.depth, a.seed);
    if !a.lambda.is_empty() {
        if kind != InstanceKind::LambdaCommuting {
            bail!("--lambda applies to --kind lambda-commuting only");
        }
        let q = a.lambda[0].value;
        if a.lambda.iter().any(|l| l.i != 1 || l.value != q) {
            bail!("the lambda-commuting family has one twist: give j.1=q with the same q for every j");
        }
        spec.q = q;
    }
    let g = generate_instance(&spec)?;
    let extension = match kind {
        InstanceKind::Commuting | InstanceKind::LambdaCommuting => {
            let lam = g.lambda.clone().unwrap_or_else(|| momt_core::LambdaSpec::ones(a.n));
            let dim = g.moments.d_out();
            let pi = total_degree_set(a.n, a.depth);
            Some(moments_from_tuple(&g.tuple, &pi, &CMatrix::identity(dim), lam)?)
        }
        _ => None,
    };
    let text = to_pretty(&generated_instance_json(&g, extension.as_ref()));
    match &a.output {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "{:<20} {:>3} {:>8} {:>8} {:>6} {:>6} {:>20}",
                "kind", "n", "dim_out", "dim_in", "depth", "words", "seed"
            );
            println!(
                "{:<20} {:>3} {:>8} {:>8} {:>6} {:>6} {:>20}",
                kind.as_str(),
                a.n,
                g.moments.d_out(),
                g.moments.d_in(),
                a.depth,
                g.moments.sigma().len(),
                a.seed
            );
        }
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}
