//! Presentations, PBW bases and dimension formulas, checked against the engine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braided::{BraidedSpace, Family, FamilyParams, Violations};
use crate::field::{lcm, FieldSpec};
use crate::freealg::{FreeAlgError, NcPoly};
use crate::nichols::{GradedBasis, HilbertSeries, NicholsError, Status};
use crate::splitting::{chain, j_size, k1_for, multi_indices, poseidon_bounds, poseidon_s, s_name, Check, SplittingError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("no presentation is known for this instance: {0}")]
    Unsupported(String),
    #[error("computation stopped at degree {0} before the algebra closed")]
    Truncated(usize),
    #[error("group orders do not realize the space: {0}")]
    Realization(Violations),
    #[error("expected {expected} group orders, got {found}")]
    Orders { expected: usize, found: usize },
    #[error(transparent)]
    Nichols(#[from] NicholsError),
    #[error(transparent)]
    Splitting(#[from] SplittingError),
    #[error(transparent)]
    FreeAlg(#[from] FreeAlgError),
}

/// One PBW generator: exponents run over `0..height`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PbwGenerator {
    pub name: String,
    pub degree: usize,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PbwSpec(pub Vec<PbwGenerator>);

impl PbwSpec {
    fn push(&mut self, name: impl Into<String>, degree: usize, height: u32) {
        self.0.push(PbwGenerator { name: name.into(), degree, height });
    }

    pub fn top_degree(&self) -> usize {
        self.0.iter().map(|g| g.degree * (g.height as usize - 1)).sum()
    }
}

/// Generating function `Π_g (1 + t^{d_g} + … + t^{d_g(h_g−1)})`.
pub fn pbw_hilbert(spec: &PbwSpec) -> HilbertSeries {
    let mut dims = vec![1u64];
    for g in &spec.0 {
        let mut next = vec![0u64; dims.len() + g.degree * (g.height as usize - 1)];
        for (n, &c) in dims.iter().enumerate() {
            for e in 0..g.height as usize {
                next[n + e * g.degree] += c;
            }
        }
        dims = next;
    }
    let total = dims.iter().sum();
    HilbertSeries { dims, total: Some(total), status: Status::Finite }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertComparison {
    pub engine: Vec<u64>,
    pub pbw: Vec<u64>,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub field: FieldSpec,
    pub params: BTreeMap<String, String>,
    pub relations: Vec<Check>,
    pub hilbert: HilbertComparison,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.relations.iter().filter(|c| !c.holds)
    }
}

/// Degree reached by the default poseidon suite.
pub const POSEIDON_PREFIX: usize = 8;

/// A presentation: relations that must vanish, a PBW basis, and the factors of its top monomial.
struct Presentation {
    suite: String,
    relations: Vec<(String, NcPoly)>,
    pbw: PbwSpec,
    top: Vec<NcPoly>,
}

/// Relations above `limit` are dropped before they are expanded.
struct Builder<'a> {
    space: &'a BraidedSpace,
    limit: usize,
    relations: Vec<(String, NcPoly)>,
}

fn deg(p: &NcPoly) -> usize {
    p.degree().unwrap_or(0)
}

impl<'a> Builder<'a> {
    fn x(&self, i: usize) -> NcPoly {
        NcPoly::generator(self.space, i)
    }

    fn rel(&mut self, cite: impl Into<String>, p: NcPoly) {
        if deg(&p) <= self.limit {
            self.relations.push((cite.into(), p));
        }
    }

    fn rel_pow(&mut self, cite: impl Into<String>, u: &NcPoly, e: u32) {
        if deg(u) * e as usize <= self.limit {
            self.relations.push((cite.into(), u.pow(e)));
        }
    }

    /// `u v = q v u`, stated as `u v + q v u`.
    fn commute(&mut self, cite: impl Into<String>, u: &NcPoly, v: &NcPoly, q: u32) {
        if deg(u) + deg(v) <= self.limit {
            let p = &(u * v) + &(v * u).scale(q);
            self.relations.push((cite.into(), p));
        }
    }

    /// The four relations of the restricted Jordan plane on `x_l`, `x_h`.
    fn jordan(&mut self, l: usize, h: usize, ln: &str, hn: &str) {
        let (xl, xh) = (self.x(l), self.x(h));
        self.rel_pow(format!("{ln}² = 0"), &xl, 2);
        self.rel_pow(format!("{hn}⁴ = 0"), &xh, 4);
        let hh = xh.pow(2);
        let p = &(&(&hh * &xl) + &(&xl * &hh)) + &(&(&xl * &xh) * &xl);
        self.rel(format!("{hn}²{ln} + {ln}{hn}² + {ln}{hn}{ln} = 0"), p);
        let a = &xl * &xh;
        let b = &xh * &xl;
        self.rel(format!("{ln}{hn}{ln}{hn} + {hn}{ln}{hn}{ln} = 0"), &(&a * &a) + &(&b * &b));
    }

    /// `x_{h l} = x_h x_l + x_l x_h`
    fn anti(&self, h: usize, l: usize) -> NcPoly {
        let (a, b) = (self.x(h), self.x(l));
        &(&a * &b) + &(&b * &a)
    }
}

fn presentation(space: &BraidedSpace, limit: usize) -> Result<Presentation, VerifyError> {
    let field = space.field();
    let mut b = Builder { space, limit, relations: Vec::new() };
    let mut pbw = PbwSpec(Vec::new());
    let unsupported = || VerifyError::Unsupported(format!("{} {:?}", space.family(), space.params().to_map()));
    let (suite, top) = match space.params() {
        FamilyParams::Block { eps: 1, len: 2 } => {
            b.jordan(0, 1, "x1", "x2");
            pbw.push("x1", 1, 2);
            pbw.push("x21", 2, 2);
            pbw.push("x2", 1, 4);
            ("jordan", vec![b.x(0), b.anti(1, 0), b.x(1).pow(3)])
        }
        FamilyParams::Lstr { p, q22: 1, a } if *a != 0 => {
            let q12 = *p;
            let q21 = field.inv_nonzero(q12);
            let count = j_size(*a) as usize;
            b.jordan(0, 1, "x1", "x2");
            let z: Vec<NcPoly> = (0..=count + 1).map(|n| chain(space, &[(1, n as u32)], 2)).collect::<Result<_, _>>()?;
            let (x1, x2) = (b.x(0), b.x(1));
            for j in 0..count {
                b.commute(format!("x1 z{j} = q12 z{j} x1"), &x1, &z[j], q12);
                let p = &(&(&x2 * &z[j]) + &(&z[j] * &x2).scale(q12)) + &z[j + 1];
                b.rel(format!("z{} = x2 z{j} + q12 z{j} x2", j + 1), p);
            }
            for i in 0..count {
                for j in i + 1..count {
                    let q = field.pow_signed(q21, j as i64 - i as i64);
                    b.commute(format!("z{i} z{j} = q21^{} z{j} z{i}", j - i), &z[i], &z[j], q);
                }
            }
            for (j, zj) in z.iter().enumerate().take(count) {
                b.rel_pow(format!("z{j}² = 0"), zj, 2);
            }
            for (k, zk) in z.iter().enumerate().skip(count) {
                b.rel(format!("z{k} = 0"), zk.clone());
            }
            pbw.push("x1", 1, 2);
            pbw.push("x21", 2, 2);
            pbw.push("x2", 1, 4);
            for j in (0..count).rev() {
                pbw.push(format!("z{j}"), j + 1, 2);
            }
            let mut factors = vec![x1.clone(), b.anti(1, 0), x2.pow(3)];
            factors.extend(z[..count].iter().rev().cloned());
            (if count == 3 { "lstr(1,1)" } else { "lstr(1,a)" }, factors)
        }
        FamilyParams::Pale { p, q22 } => {
            let q12 = *p;
            let omega = *q22 != 1 && field.order(*q22).ok() == Some(3);
            if *q22 != 1 && !omega {
                return Err(unsupported());
            }
            let (x1, x2, x3) = (b.x(0), b.x(1), b.x(2));
            b.rel_pow("x1² = 0", &x1, 2);
            b.rel_pow("x2² = 0", &x2, 2);
            b.commute("x1 x2 = x2 x1", &x1, &x2, 1);
            b.commute("x1 x3 = p x3 x1", &x1, &x3, q12);
            let z1 = x3.ad_c(space, 1)?;
            let def = &(&(&x2 * &x3) + &(&x3 * &x2).scale(q12)) + &z1;
            b.rel("z1 = x2 x3 + p x3 x2", def);
            pbw.push("x1", 1, 2);
            pbw.push("x2", 1, 2);
            if omega {
                let z01 = z1.ad_c(space, 2)?;
                b.rel_pow("x3³ = 0", &x3, 3);
                b.rel_pow("z1³ = 0", &z1, 3);
                b.rel_pow("z01³ = 0", &z01, 3);
                b.rel("(ad x3)²(z1) = 0", z01.ad_c(space, 2)?);
                pbw.push("z1", 2, 3);
                pbw.push("z01", 3, 3);
                pbw.push("x3", 1, 3);
                ("pale(ω)", vec![x1, x2, z1.pow(2), z01.pow(2), x3.pow(2)])
            } else {
                b.rel_pow("x3² = 0", &x3, 2);
                b.rel_pow("z1² = 0", &z1, 2);
                pbw.push("z1", 2, 2);
                pbw.push("x3", 1, 2);
                ("pale(1)", vec![x1, x2, z1, x3])
            }
        }
        FamilyParams::Poseidon { q, a } => {
            let t = a.len();
            let bounds = poseidon_bounds(a);
            let names: Vec<(String, String)> = (1..=t).map(|j| (format!("x{j}"), format!("x{j}h"))).collect();
            for (j, (ln, hn)) in names.iter().enumerate() {
                b.jordan(2 * j, 2 * j + 1, ln, hn);
            }
            for j in 0..t {
                for k in j + 1..t {
                    for u in [2 * j, 2 * j + 1] {
                        for v in [2 * k, 2 * k + 1] {
                            let cite = format!("{} {} = q{}{} {1} {0}", space.labels()[u], space.labels()[v], j + 1, k + 1);
                            b.commute(cite, &b.x(u), &b.x(v), q[j][k]);
                        }
                    }
                }
                let cite = format!("x{} x{} = q{0}{1} x{1} x{0}", j + 1, t + 1);
                b.commute(cite, &b.x(2 * j), &b.x(2 * t), q[j][t]);
                let p = b.x(2 * t).ad_c_pow(space, 2 * j + 1, 1 + bounds[j])?;
                b.rel(format!("(ad x{}h)^{}(x{}) = 0", j + 1, 1 + bounds[j], t + 1), p);
            }
            let set = multi_indices(&bounds);
            let s: Vec<NcPoly> = set.iter().map(|n| poseidon_s(space, n)).collect::<Result<_, _>>()?;
            let k1 = k1_for(space)?;
            for x in 0..set.len() {
                for y in x + 1..set.len() {
                    let (m, n) = (s_name(&set[x]), s_name(&set[y]));
                    b.commute(format!("{m} {n} = p {n} {m}"), &s[x], &s[y], k1.q_matrix[x][y].mask());
                }
                b.rel_pow(format!("{}² = 0", s_name(&set[x])), &s[x], 2);
            }
            let mut factors = Vec::new();
            for j in 0..t {
                pbw.push(format!("y{}", j + 1), 1, 4);
                pbw.push(format!("x{}h", j + 1), 1, 4);
                factors.push(&b.x(2 * j) * &b.anti(2 * j + 1, 2 * j));
                factors.push(b.x(2 * j + 1).pow(3));
            }
            for (n, sn) in set.iter().zip(&s) {
                pbw.push(s_name(n), n.iter().sum::<u32>() as usize + 1, 2);
                factors.push(sn.clone());
            }
            ("poseidon", factors)
        }
        _ => return Err(unsupported()),
    };
    let relations = b.relations;
    Ok(Presentation { suite: suite.to_string(), relations, pbw, top })
}

/// Degree the engine must reach: the whole algebra, or a prefix for poseidon unless `expensive`.
fn relation_limit(space: &BraidedSpace, expensive: bool) -> usize {
    if space.family() == Family::Poseidon && !expensive {
        POSEIDON_PREFIX
    } else {
        usize::MAX
    }
}

fn suite_degree(pbw: &PbwSpec, limit: usize) -> usize {
    limit.min(pbw.top_degree() + 1)
}

/// Runs the relation suite of the family's presentation.
///
/// Every relation of degree within reach must vanish in `𝔅(V)`, the top PBW monomial
/// must survive when in reach, and the Hilbert series must equal the PBW prediction
/// in every computed degree.
pub fn relation_suite(space: &BraidedSpace, expensive: bool) -> Result<VerificationReport, VerifyError> {
    let limit = relation_limit(space, expensive);
    let pres = presentation(space, limit)?;
    let gb = GradedBasis::compute(space, suite_degree(&pres.pbw, limit))?;
    relation_suite_with(&gb, pres)
}

fn reach(gb: &GradedBasis) -> usize {
    match gb.status() {
        Status::Finite => usize::MAX,
        Status::Truncated(m) => m,
    }
}

fn relation_suite_with(gb: &GradedBasis, pres: Presentation) -> Result<VerificationReport, VerifyError> {
    let space = gb.space();
    let limit = reach(gb);
    let mut relations = Vec::new();
    for (cite, p) in &pres.relations {
        let degree = p.components().keys().copied().max().unwrap_or(0);
        if degree <= limit {
            relations.push(Check { cite: cite.clone(), degree, holds: gb.is_zero_in_nichols(p)? });
        }
    }
    let top = pres.pbw.top_degree();
    if top <= limit {
        let monomial = pres.top.iter().fold(NcPoly::one(space), |acc, f| &acc * f);
        let holds = !gb.is_zero_in_nichols(&monomial)?;
        relations.push(Check { cite: "top PBW monomial ≠ 0".into(), degree: top, holds });
    }
    let pbw_dims = pbw_hilbert(&pres.pbw).dims;
    let engine = gb.dims();
    let len = match gb.status() {
        Status::Finite => engine.len().max(pbw_dims.len()),
        Status::Truncated(m) => m + 1,
    };
    let pad = |v: &[u64]| (0..len).map(|n| v.get(n).copied().unwrap_or(0)).collect::<Vec<_>>();
    let (engine, pbw) = (pad(&engine), pad(&pbw_dims));
    let matches = engine == pbw;
    let pass = matches && relations.iter().all(|c| c.holds);
    Ok(VerificationReport {
        suite: pres.suite,
        field: space.field_spec(),
        params: space.params().to_map(),
        relations,
        hilbert: HilbertComparison { engine, pbw, matches },
        pass,
    })
}

/// The dimension of `𝔅(V)` and of `𝔅(K¹)` listed for a finite row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub name: &'static str,
    pub dim: u64,
    pub dim_k: u64,
}

/// The finite-dimensional row the space belongs to.
pub fn table_row(space: &BraidedSpace) -> Result<TableRow, VerifyError> {
    let field = space.field();
    let unsupported = || VerifyError::Unsupported(format!("{} {:?}", space.family(), space.params().to_map()));
    match space.params() {
        FamilyParams::Lstr { q22: 1, a: 1, .. } => Ok(TableRow { name: "lstr(1,1)", dim: 1 << 7, dim_k: 1 << 3 }),
        FamilyParams::Lstr { q22: 1, a, .. } if *a != 0 => {
            Ok(TableRow { name: "lstr(1,a)", dim: 1 << 8, dim_k: 1 << 4 })
        }
        FamilyParams::Poseidon { a, .. } => {
            let size = multi_indices(&poseidon_bounds(a)).len() as u32;
            Ok(TableRow { name: "poseidon", dim: 1 << (4 * a.len() as u32 + size), dim_k: 1 << size })
        }
        FamilyParams::Pale { q22: 1, .. } => Ok(TableRow { name: "pale(1)", dim: 1 << 4, dim_k: 1 << 2 }),
        FamilyParams::Pale { q22, .. } if field.order(*q22).ok() == Some(3) => {
            Ok(TableRow { name: "pale(ω)", dim: 4 * 27, dim_k: 27 })
        }
        _ => Err(unsupported()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Outcome {
    pub row: String,
    pub field: FieldSpec,
    pub params: BTreeMap<String, String>,
    pub total: u64,
    pub expected: u64,
    pub dim_k: u64,
    pub expected_k: u64,
    pub top_degree: usize,
    pub pass: bool,
}

fn finite_total(gb: &GradedBasis) -> Result<u64, VerifyError> {
    match gb.status() {
        Status::Finite => Ok(gb.dims().iter().sum()),
        Status::Truncated(m) => Err(VerifyError::Truncated(m)),
    }
}

/// Computes `dim 𝔅(V)` and `dim 𝔅(K¹)` and compares them with the row's values.
///
/// Poseidon rows need `expensive`; otherwise the run stops early and reports truncation.
pub fn table1_check(space: &BraidedSpace, expensive: bool) -> Result<Table1Outcome, VerifyError> {
    let row = table_row(space)?;
    let pbw = presentation(space, 0)?.pbw;
    let gb = GradedBasis::compute(space, suite_degree(&pbw, relation_limit(space, expensive)))?;
    let total = finite_total(&gb)?;
    let k1 = k1_for(space)?;
    let k_space = k1.diagonal_space(space.field()).map_err(SplittingError::from)?;
    let k_top: usize = k1.weights().iter().sum::<usize>() * 3 + 1;
    let dim_k = finite_total(&GradedBasis::compute(&k_space, k_top)?)?;
    Ok(Table1Outcome {
        row: row.name.to_string(),
        field: space.field_spec(),
        params: space.params().to_map(),
        total,
        expected: row.dim,
        dim_k,
        expected_k: row.dim_k,
        top_degree: gb.top_degree(),
        pass: total == row.dim && dim_k == row.dim_k,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BosonReport {
    pub family: Family,
    pub orders: Vec<u64>,
    pub dim_nichols: u64,
    pub group_order: u64,
    /// `dim 𝔅(V) · |Γ|`
    pub dim: u64,
    pub formula: String,
    pub formula_value: u64,
    #[serde(rename = "match")]
    pub matches: bool,
}

/// `dim 𝔅(V) # 𝕜Γ` for `Γ = Π ℤ/orders[i]`, next to the closed formula for the family.
pub fn bosonization_dim(gb: &GradedBasis, orders: &[u64]) -> Result<BosonReport, VerifyError> {
    let space = gb.space();
    let field = space.field();
    let real = space.realization().ok_or(NicholsError::NoRealization)?;
    if orders.len() != real.rank() {
        return Err(VerifyError::Orders { expected: real.rank(), found: orders.len() });
    }
    let real = real.with_orders(orders.to_vec());
    space.validate_realization(&real).map_err(VerifyError::Realization)?;
    let dim_nichols = finite_total(gb)?;
    let group_order: u64 = orders.iter().product();
    let unsupported = || VerifyError::Unsupported(format!("{} {:?}", space.family(), space.params().to_map()));
    let (formula, formula_value) = match space.params() {
        FamilyParams::Lstr { p, q22: 1, a } if *a != 0 => {
            let m = field.order(*p).map_err(|e| VerifyError::Unsupported(e.to_string()))?;
            if *a == 1 {
                ("2^9 M^2".to_string(), (1 << 9) * m * m)
            } else {
                ("2^10 M^2".to_string(), (1 << 10) * m * m)
            }
        }
        FamilyParams::Poseidon { a, .. } => {
            let size = multi_indices(&poseidon_bounds(a)).len() as u32;
            let n = orders[0];
            let theta = orders.len() as u32;
            (format!("2^(4t+|A|) N^θ, N = {n}"), (1u64 << (4 * a.len() as u32 + size)) * n.pow(theta))
        }
        FamilyParams::Pale { p, q22 } => {
            let m = field.order(*p).map_err(|e| VerifyError::Unsupported(e.to_string()))?;
            if *q22 == 1 {
                ("2^5 M^2".to_string(), 32 * m * m)
            } else if field.order(*q22).ok() == Some(3) {
                let pp = lcm(6, m);
                ("2^3 3^3 M P, P = lcm(6, M)".to_string(), 8 * 27 * m * pp)
            } else {
                return Err(unsupported());
            }
        }
        _ => return Err(unsupported()),
    };
    let dim = dim_nichols * group_order;
    Ok(BosonReport {
        family: space.family(),
        orders: orders.to_vec(),
        dim_nichols,
        group_order,
        dim,
        formula,
        formula_value,
        matches: dim == formula_value,
    })
}
