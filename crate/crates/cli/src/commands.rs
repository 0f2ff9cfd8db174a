use nichols_core::nichols::HilbertReport;
use nichols_core::splitting::{identity_degree, K1Report};
use nichols_core::verify::{BosonReport, Table1Outcome};
use nichols_core::{
    bosonization_dim, check_k1_consistency, identity_suite, k1_for, relation_suite, symmetrizer_dim, table1_check,
    BraidedSpace, Check, DynkinDiagram, GradedBasis, NcPoly, NicholsError, SplittingError, Status,
    VerificationReport, VerifyError,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::Value;

use crate::args::{parse_orders, BosonArgs, ComputeArgs, ExpensiveArgs, JobArgs, UsageError, VerifyArgs};

pub const PASS: i32 = 0;
pub const FAIL: i32 = 1;
pub const USAGE: i32 = 2;
pub const TRUNCATED: i32 = 3;

/// A finished job: exit code, the JSON report and its text rendering.
pub struct Outcome {
    pub code: i32,
    pub json: Value,
    pub text: String,
}

/// A job that could not produce a report.
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure { code: USAGE, message: e.to_string() }
    }
}

impl From<NicholsError> for Failure {
    fn from(e: NicholsError) -> Self {
        let code = match e {
            NicholsError::SizeGuard { .. } | NicholsError::DegreeOutOfRange { .. } => TRUNCATED,
            NicholsError::ZeroMaxDegree => USAGE,
            _ => FAIL,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<SplittingError> for Failure {
    fn from(e: SplittingError) -> Self {
        match e {
            SplittingError::Nichols(n) => n.into(),
            SplittingError::Unsupported(_) | SplittingError::Braided(_) => {
                Failure { code: USAGE, message: e.to_string() }
            }
            _ => Failure { code: FAIL, message: e.to_string() },
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Nichols(n) => n.into(),
            VerifyError::Splitting(s) => s.into(),
            VerifyError::Truncated(_) => Failure { code: TRUNCATED, message: e.to_string() },
            VerifyError::Unsupported(_) | VerifyError::Realization(_) | VerifyError::Orders { .. } => {
                Failure { code: USAGE, message: e.to_string() }
            }
            VerifyError::FreeAlg(_) => Failure { code: FAIL, message: e.to_string() },
        }
    }
}

type Job = Result<Outcome, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn space_of(job: &JobArgs) -> Result<BraidedSpace, Failure> {
    let field = job.family.field()?;
    Ok(job.family.build(&field)?)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn checks_text(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| format!("{} deg {}: {}\n", if c.holds { "ok  " } else { "FAIL" }, c.degree, c.cite))
        .collect()
}

fn hilbert_text(r: &HilbertReport) -> String {
    let total = r.total.map_or("unknown".to_string(), |t| t.to_string());
    format!(
        "family: {}\nfield: k={} modulus={}\nstatus: {}\ntotal: {total}\ntop_degree: {}\ndims: {}\n",
        r.family,
        r.field.k,
        r.field.modulus,
        r.status,
        r.top_degree,
        join(&r.dims)
    )
}

pub fn compute(args: &ComputeArgs) -> Job {
    let space = space_of(&args.job)?;
    let gb = GradedBasis::compute(&space, args.max_degree.unwrap_or(16))?;
    let report = gb.report();
    let code = if gb.status() == Status::Finite { PASS } else { TRUNCATED };
    Ok(Outcome { code, json: to_value(&report), text: hilbert_text(&report) })
}

/// Random homogeneous polynomials: `project` must commute with right multiplication and with `∂_i`.
fn fuzz_checks(space: &BraidedSpace, count: usize, seed: u64, reach: usize) -> Result<Vec<Check>, Failure> {
    let top = reach.clamp(2, 7);
    let gb = GradedBasis::compute(space, top)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let (d, size) = (space.dim(), space.field().size() as u32);
    let mut checks = Vec::with_capacity(count);
    for k in 0..count {
        let n = rng.gen_range(1..top);
        let mut p = NcPoly::zero(space);
        for _ in 0..rng.gen_range(1..=4) {
            let word: Vec<usize> = (0..n).map(|_| rng.gen_range(0..d)).collect();
            let m = NcPoly::monomial(space, &word, rng.gen_range(1..size)).map_err(|e| Failure { code: FAIL, message: e.to_string() })?;
            p = &p + &m;
        }
        let (j, i) = (rng.gen_range(0..d), rng.gen_range(0..d));
        let v = gb.project(&p)?;
        let v = if v.is_empty() { vec![0; gb.dim(n)?] } else { v };
        let prod = gb.project(&(&p * &NcPoly::generator(space, j)))?;
        let right = gb.act_right(n, &v, j)?;
        let same_product = prod.iter().all(|&x| x == 0) && right.iter().all(|&x| x == 0) || prod == right;
        let der = p.skew_derive(space, i).map_err(|e| Failure { code: FAIL, message: e.to_string() })?;
        let lhs = gb.project(&der)?;
        let rhs = gb.derive(n, &v, i);
        let same_derivative = lhs.iter().all(|&x| x == 0) && rhs.iter().all(|&x| x == 0) || lhs == rhs;
        checks.push(Check {
            cite: format!("random check {k}: x{} on the right and ∂{} agree with projection", j + 1, i + 1),
            degree: n + 1,
            holds: same_product && same_derivative,
        });
    }
    Ok(checks)
}

fn report_text(r: &VerificationReport) -> String {
    format!(
        "suite: {}\n{}engine: {}\npbw: {}\nhilbert match: {}\npass: {}\n",
        r.suite,
        checks_text(&r.relations),
        join(&r.hilbert.engine),
        join(&r.hilbert.pbw),
        r.hilbert.matches,
        r.pass
    )
}

pub fn verify(args: &VerifyArgs) -> Job {
    let space = space_of(&args.run.job)?;
    let mut report = relation_suite(&space, args.run.expensive)?;
    if args.fuzz > 0 {
        let reach = report.hilbert.engine.len().saturating_sub(1);
        let fuzz = fuzz_checks(&space, args.fuzz, args.seed, reach)?;
        report.pass &= fuzz.iter().all(|c| c.holds);
        report.relations.extend(fuzz);
    }
    let code = if report.pass { PASS } else { FAIL };
    Ok(Outcome { code, json: to_value(&report), text: report_text(&report) })
}

#[derive(Serialize)]
struct DynkinReport {
    family: String,
    generators: Vec<String>,
    diagram: DynkinDiagram,
    connected: bool,
}

pub fn dynkin(args: &JobArgs) -> Job {
    let space = space_of(args)?;
    let k1 = k1_for(&space)?;
    let diagram = k1.dynkin()?;
    let mut text = diagram.to_text();
    for (i, name) in k1.names().iter().enumerate() {
        text.push_str(&format!("# v{i} = {name}\n"));
    }
    let report = DynkinReport {
        family: space.family().to_string(),
        generators: k1.names(),
        connected: diagram.is_connected(),
        diagram,
    };
    Ok(Outcome { code: PASS, json: to_value(&report), text })
}

#[derive(Serialize)]
struct GeneratorInfo {
    name: String,
    degree: usize,
    group_degree: Vec<i64>,
}

#[derive(Serialize)]
struct SplitReport {
    family: String,
    generators: Vec<GeneratorInfo>,
    q_matrix: Vec<Vec<String>>,
    diagram: DynkinDiagram,
    max_degree: usize,
    factorization: Result<K1Report, String>,
    identities: Vec<Check>,
    pass: bool,
}

pub fn split(args: &ComputeArgs) -> Job {
    let space = space_of(&args.job)?;
    let k1 = k1_for(&space)?;
    let max_degree = args.max_degree.unwrap_or(8);
    let reach = max_degree.max(identity_degree(&space)?);
    let gb = GradedBasis::compute(&space, reach)?;
    let v1 = space.restrict(&k1.v1).map_err(SplittingError::from)?;
    let gb1 = GradedBasis::compute(&v1, max_degree)?;
    let factorization = match check_k1_consistency(&k1, &gb, &gb1, max_degree) {
        Ok(r) => Ok(r),
        Err(SplittingError::Nichols(e)) => return Err(e.into()),
        Err(e) => Err(e.to_string()),
    };
    let identities = identity_suite(&gb)?;
    let pass = factorization.is_ok() && identities.iter().all(|c| c.holds);
    let report = SplitReport {
        family: space.family().to_string(),
        generators: k1
            .generators
            .iter()
            .map(|g| GeneratorInfo { name: g.name.clone(), degree: g.degree, group_degree: g.group_degree.clone() })
            .collect(),
        q_matrix: k1.q_matrix.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect(),
        diagram: k1.dynkin()?,
        max_degree,
        factorization,
        identities,
        pass,
    };
    let mut text = format!("family: {}\ngenerators: {}\n", report.family, join(&k1.names()));
    text.push_str(&report.diagram.to_text());
    match &report.factorization {
        Ok(r) => text.push_str(&format!("factorization ok through degree {max_degree}: {}\n", join(&r.engine))),
        Err(e) => text.push_str(&format!("factorization FAILED: {e}\n")),
    }
    text.push_str(&checks_text(&report.identities));
    text.push_str(&format!("pass: {pass}\n"));
    Ok(Outcome { code: if pass { PASS } else { FAIL }, json: to_value(&report), text })
}

#[derive(Serialize)]
struct OracleRow {
    n: usize,
    engine: usize,
    symmetrizer: usize,
    #[serde(rename = "match")]
    matches: bool,
}

#[derive(Serialize)]
struct OracleReport {
    family: String,
    degrees: Vec<OracleRow>,
    /// first degree the symmetrizer could not reach
    stopped_at: Option<usize>,
    pass: bool,
}

pub fn oracle(args: &ComputeArgs) -> Job {
    let space = space_of(&args.job)?;
    let max_degree = args.max_degree.unwrap_or(5);
    let gb = GradedBasis::compute(&space, max_degree)?;
    let mut degrees = Vec::new();
    let mut stopped_at = None;
    for n in 0..=max_degree {
        match symmetrizer_dim(&space, n) {
            Ok(s) => {
                let e = gb.dim(n)?;
                degrees.push(OracleRow { n, engine: e, symmetrizer: s, matches: e == s });
            }
            Err(NicholsError::SizeGuard { .. }) => {
                stopped_at = Some(n);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let pass = degrees.iter().all(|r| r.matches);
    let code = match (pass, stopped_at) {
        (false, _) => FAIL,
        (true, Some(_)) => TRUNCATED,
        (true, None) => PASS,
    };
    let mut text: String = degrees
        .iter()
        .map(|r| format!("n={} engine={} symmetrizer={} {}\n", r.n, r.engine, r.symmetrizer, if r.matches { "ok" } else { "MISMATCH" }))
        .collect();
    if let Some(n) = stopped_at {
        text.push_str(&format!("symmetrizer too large from degree {n}\n"));
    }
    let report = OracleReport { family: space.family().to_string(), degrees, stopped_at, pass };
    Ok(Outcome { code, json: to_value(&report), text })
}

fn table_text(o: &Table1Outcome) -> String {
    format!(
        "row: {}\ntotal: {} (expected {})\ndim K: {} (expected {})\ntop_degree: {}\npass: {}\n",
        o.row, o.total, o.expected, o.dim_k, o.expected_k, o.top_degree, o.pass
    )
}

pub fn table1(args: &ExpensiveArgs) -> Job {
    let space = space_of(&args.job)?;
    let outcome = table1_check(&space, args.expensive)?;
    let code = if outcome.pass { PASS } else { FAIL };
    Ok(Outcome { code, text: table_text(&outcome), json: to_value(&outcome) })
}

fn boson_text(r: &BosonReport) -> String {
    format!(
        "dim B(V): {}\n|G|: {}\ndim: {}\nformula {}: {}\nmatch: {}\n",
        r.dim_nichols, r.group_order, r.dim, r.formula, r.formula_value, r.matches
    )
}

pub fn boson(args: &BosonArgs) -> Job {
    let space = space_of(&args.job)?;
    let orders = parse_orders(&args.orders)?;
    let gb = GradedBasis::compute(&space, 64)?;
    let report = bosonization_dim(&gb, &orders)?;
    let code = if report.matches { PASS } else { FAIL };
    Ok(Outcome { code, text: boson_text(&report), json: to_value(&report) })
}
