//! The splitting `𝔅(V) ≃ K # 𝔅(V₁)` with `K = 𝔅(K¹)` and `K¹ = ad_c 𝔅(V₁)(V₂)`.
//!
//! For each supported family this builds generators of `K¹` as iterated braided
//! adjoints, the diagonal braiding they carry, and the Dynkin diagram of that
//! braiding. The braiding comes from closed formulas; `check_k1_consistency`
//! cross-checks it against the Hilbert series of `𝔅(V)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braided::{BraidedError, BraidedSpace, Family, FamilyParams};
use crate::field::{Field, FieldElement, FieldSpec};
use crate::freealg::{FreeAlgError, NcPoly};
use crate::nichols::{poly_mul, GradedBasis, NicholsError};

#[derive(Debug, Error)]
pub enum SplittingError {
    #[error("no splitting data for family `{0}`")]
    Unsupported(Family),
    #[error("braiding entry ({0}, {1}) is zero")]
    ZeroEntry(usize, usize),
    #[error("Hilbert series do not factor: degree {degree} has {found} in 𝔅(V), {expected} predicted")]
    Mismatch { degree: usize, expected: u64, found: u64 },
    #[error("generator {0} vanishes in 𝔅(V)")]
    GeneratorVanishes(String),
    #[error("{0} should vanish in 𝔅(V) but does not")]
    BeyondNonzero(String),
    #[error(transparent)]
    Braided(#[from] BraidedError),
    #[error(transparent)]
    FreeAlg(#[from] FreeAlgError),
    #[error(transparent)]
    Nichols(#[from] NicholsError),
}

/// A homogeneous element of `K¹`.
#[derive(Debug, Clone)]
pub struct K1Generator {
    pub name: String,
    /// family index: `[n]`, `[i, n]` or the multi-index `𝐧`
    pub index: Vec<u32>,
    pub poly: NcPoly,
    /// degree in `T(V)`
    pub degree: usize,
    /// degree in the group of the realization
    pub group_degree: Vec<i64>,
}

/// Generators of `K¹`, their diagonal braiding, and the indices spanning `V₁`.
#[derive(Debug, Clone)]
pub struct K1Data {
    pub family: Family,
    pub generators: Vec<K1Generator>,
    /// `c(u_i ⊗ u_j) = q[i][j] u_j ⊗ u_i`
    pub q_matrix: Vec<Vec<FieldElement>>,
    /// elements that lie just outside the basis and vanish in `𝔅(V)`
    pub beyond: Vec<K1Generator>,
    /// basis indices of `V` spanning `V₁`
    pub v1: Vec<usize>,
}

impl K1Data {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn weights(&self) -> Vec<usize> {
        self.generators.iter().map(|g| g.degree).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.name.clone()).collect()
    }

    /// `K¹` as a braided space of diagonal type.
    pub fn diagonal_space(&self, field: &Field) -> Result<BraidedSpace, BraidedError> {
        BraidedSpace::diagonal(field, &self.q_matrix)
    }

    pub fn dynkin(&self) -> Result<DynkinDiagram, SplittingError> {
        DynkinDiagram::new(&self.q_matrix)
    }
}

fn elem(field: &Field, m: u32) -> FieldElement {
    field.element(m).expect("mask from the same field")
}

fn matrix(field: &Field, n: usize, f: impl Fn(usize, usize) -> u32) -> Vec<Vec<FieldElement>> {
    (0..n).map(|i| (0..n).map(|j| elem(field, f(i, j))).collect()).collect()
}

pub(crate) fn chain(space: &BraidedSpace, ads: &[(usize, u32)], target: usize) -> Result<NcPoly, FreeAlgError> {
    let mut p = NcPoly::generator(space, target);
    for &(i, n) in ads.iter().rev() {
        p = p.ad_c_pow(space, i, n)?;
    }
    Ok(p)
}

/// `b_j = 2` if `a_j = 1`, else 3.
pub fn poseidon_bounds(a: &[u32]) -> Vec<u32> {
    a.iter().map(|&x| if x == 1 { 2 } else { 3 }).collect()
}

/// `{𝐧 : 𝐧 ≤ 𝐛}` in lexicographic order.
pub fn multi_indices(b: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &bj in b {
        out = out
            .into_iter()
            .flat_map(|n: Vec<u32>| {
                (0..=bj).map(move |v| {
                    let mut m = n.clone();
                    m.push(v);
                    m
                })
            })
            .collect();
    }
    out
}

/// `|J_i|`: 1 if `a_i = 0`, 3 if `a_i = 1`, else 4.
pub(crate) fn j_size(a: u32) -> u32 {
    match a {
        0 => 1,
        1 => 3,
        _ => 4,
    }
}

/// `s_𝐧 = (ad x_{1½})^{n_1} ⋯ (ad x_{t½})^{n_t} x_θ`.
pub fn poseidon_s(space: &BraidedSpace, n: &[u32]) -> Result<NcPoly, FreeAlgError> {
    let ads: Vec<(usize, u32)> = n.iter().enumerate().map(|(j, &nj)| (2 * j + 1, nj)).collect();
    chain(space, &ads, 2 * n.len())
}

pub(crate) fn s_name(n: &[u32]) -> String {
    let parts: Vec<String> = n.iter().map(u32::to_string).collect();
    format!("s({})", parts.join(","))
}

/// Generators and braiding of `K¹` for a supported family.
pub fn k1_for(space: &BraidedSpace) -> Result<K1Data, SplittingError> {
    let field = space.field();
    match space.params() {
        FamilyParams::Lstr { p, q22, a } => {
            let (q12, q22) = (*p, *q22);
            let q21 = field.inv_nonzero(q12);
            let count = j_size(*a);
            let z = |n: u32| -> Result<K1Generator, SplittingError> {
                Ok(K1Generator {
                    name: format!("z{n}"),
                    index: vec![n],
                    poly: chain(space, &[(1, n)], 2)?,
                    degree: n as usize + 1,
                    group_degree: vec![n as i64, 1],
                })
            };
            let generators = (0..count).map(z).collect::<Result<Vec<_>, _>>()?;
            let beyond = (count..=4).map(z).collect::<Result<Vec<_>, _>>()?;
            let q_matrix = matrix(field, count as usize, |i, j| {
                field.mul(field.pow_signed(q21, j as i64 - i as i64), q22)
            });
            Ok(K1Data { family: Family::Lstr, generators, q_matrix, beyond, v1: vec![0, 1] })
        }
        FamilyParams::Pale { p, q22 } => {
            let (q12, q22) = (*p, *q22);
            let q21 = field.inv_nonzero(q12);
            let sh = |m: u32, n: u32, name: String| -> Result<K1Generator, SplittingError> {
                Ok(K1Generator {
                    name,
                    index: vec![m, n],
                    poly: chain(space, &[(0, m), (1, n)], 2)?,
                    degree: (m + n) as usize + 1,
                    group_degree: vec![(m + n) as i64, 1],
                })
            };
            let generators = vec![sh(0, 0, "z0".into())?, sh(0, 1, "z1".into())?];
            let beyond = vec![sh(0, 2, "z2".into())?, sh(1, 0, "w1".into())?];
            let q_matrix = matrix(field, 2, |i, j| {
                field.mul(field.pow_signed(q21, j as i64 - i as i64), q22)
            });
            Ok(K1Data { family: Family::Pale, generators, q_matrix, beyond, v1: vec![0, 1] })
        }
        FamilyParams::BlockPoints { q, a } => {
            let theta = q.len();
            // basis index of the point x_i, i ≥ 2 (zero-based h = i - 1)
            let z = |h: usize, n: u32| -> Result<K1Generator, SplittingError> {
                let mut group_degree = vec![0i64; theta];
                group_degree[0] = n as i64;
                group_degree[h] += 1;
                Ok(K1Generator {
                    name: format!("z{}_{n}", h + 1),
                    index: vec![h as u32 + 1, n],
                    poly: chain(space, &[(1, n)], h + 1)?,
                    degree: n as usize + 1,
                    group_degree,
                })
            };
            let mut generators = Vec::new();
            let mut beyond = Vec::new();
            let mut pairs = Vec::new();
            for h in 1..theta {
                let size = j_size(a[h]);
                for n in 0..size {
                    generators.push(z(h, n)?);
                    pairs.push((h, n as u64));
                }
                beyond.push(z(h, size)?);
            }
            let q_matrix = matrix(field, pairs.len(), |x, y| {
                let ((i, m), (j, n)) = (pairs[x], pairs[y]);
                let v = field.mul(field.pow(q[i][0], n), field.pow(q[0][j], m));
                field.mul(v, q[i][j])
            });
            Ok(K1Data { family: Family::BlockPoints, generators, q_matrix, beyond, v1: vec![0, 1] })
        }
        FamilyParams::Poseidon { q, a } => {
            let t = a.len();
            let b = poseidon_bounds(a);
            let s = |n: &[u32]| -> Result<K1Generator, SplittingError> {
                let mut group_degree: Vec<i64> = n.iter().map(|&x| x as i64).collect();
                group_degree.push(1);
                Ok(K1Generator {
                    name: s_name(n),
                    index: n.to_vec(),
                    poly: poseidon_s(space, n)?,
                    degree: n.iter().sum::<u32>() as usize + 1,
                    group_degree,
                })
            };
            let set = multi_indices(&b);
            let generators = set.iter().map(|n| s(n)).collect::<Result<Vec<_>, _>>()?;
            let mut beyond = Vec::new();
            for j in 0..t {
                let mut n = vec![0; t];
                n[j] = b[j] + 1;
                beyond.push(s(&n)?);
            }
            let q_matrix = matrix(field, set.len(), |x, y| {
                let (m, n) = (&set[x], &set[y]);
                let mut v = 1;
                for i in 0..t {
                    for j in 0..t {
                        v = field.mul(v, field.pow(q[i][j], (m[i] * n[j]) as u64));
                    }
                    v = field.mul(v, field.pow(q[i][t], m[i] as u64));
                    v = field.mul(v, field.pow(q[t][i], n[i] as u64));
                }
                v
            });
            Ok(K1Data { family: Family::Poseidon, generators, q_matrix, beyond, v1: (0..2 * t).collect() })
        }
        _ => Err(SplittingError::Unsupported(space.family())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynkinEdge {
    pub a: usize,
    pub b: usize,
    pub label: FieldElementCode,
}

/// A field element rendered as `int:<mask>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FieldElementCode(pub u32);

impl From<FieldElementCode> for String {
    fn from(c: FieldElementCode) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for FieldElementCode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.strip_prefix("int:")
            .and_then(|m| m.parse().ok())
            .map(FieldElementCode)
            .ok_or_else(|| format!("expected `int:<mask>`, got `{s}`"))
    }
}

impl fmt::Display for FieldElementCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "int:{}", self.0)
    }
}

/// Generalized Dynkin diagram of a diagonal braiding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynkinDiagram {
    pub field: FieldSpec,
    pub vertices: Vec<FieldElementCode>,
    /// `a < b`, sorted
    pub edges: Vec<DynkinEdge>,
    pub components: Vec<Vec<usize>>,
}

impl DynkinDiagram {
    pub fn new(q: &[Vec<FieldElement>]) -> Result<Self, SplittingError> {
        let n = q.len();
        let Some(spec) = q.first().and_then(|r| r.first()).map(|e| e.spec()) else {
            return Err(BraidedError::Shape("empty braiding matrix".into()).into());
        };
        if q.iter().any(|r| r.len() != n) {
            return Err(BraidedError::Shape("braiding matrix must be square".into()).into());
        }
        for (i, row) in q.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.is_zero() {
                    return Err(SplittingError::ZeroEntry(i, j));
                }
            }
        }
        let field = Field::from_spec(spec);
        let vertices = (0..n).map(|i| FieldElementCode(q[i][i].mask())).collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let label = field.mul(q[a][b].mask(), q[b][a].mask());
                if label != 1 {
                    edges.push(DynkinEdge { a, b, label: FieldElementCode(label) });
                }
            }
        }
        let components = components(n, &edges);
        Ok(DynkinDiagram { field: spec, vertices, edges, components })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }

    pub fn edge_label(&self, a: usize, b: usize) -> Option<FieldElementCode> {
        let (a, b) = (a.min(b), a.max(b));
        self.edges.iter().find(|e| e.a == a && e.b == b).map(|e| e.label)
    }

    /// Label-preserving graph isomorphism, by search over vertex bijections.
    pub fn is_isomorphic(&self, other: &DynkinDiagram) -> bool {
        let n = self.len();
        if n != other.len() || self.edges.len() != other.edges.len() || self.field != other.field {
            return false;
        }
        let mut image = vec![usize::MAX; n];
        let mut used = vec![false; n];
        self.extend_iso(other, 0, &mut image, &mut used)
    }

    fn extend_iso(&self, other: &DynkinDiagram, v: usize, image: &mut [usize], used: &mut [bool]) -> bool {
        if v == self.len() {
            return true;
        }
        for w in 0..other.len() {
            if used[w] || self.vertices[v] != other.vertices[w] {
                continue;
            }
            let fits = (0..v).all(|u| self.edge_label(u, v) == other.edge_label(image[u], w));
            if fits {
                image[v] = w;
                used[w] = true;
                if self.extend_iso(other, v + 1, image, used) {
                    return true;
                }
                used[w] = false;
            }
        }
        false
    }

    /// One line per vertex `v<i>: <label>` and per edge `e<i>-<j>: <label>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.vertices.iter().enumerate() {
            out.push_str(&format!("v{i}: {l}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!("e{}-{}: {}\n", e.a, e.b, e.label));
        }
        out
    }
}

fn components(n: usize, edges: &[DynkinEdge]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for e in edges {
        let (ra, rb) = (root(&mut parent, e.a), root(&mut parent, e.b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let roots: BTreeSet<usize> = (0..n).map(|v| root(&mut parent, v)).collect();
    roots
        .into_iter()
        .map(|r| (0..n).filter(|&v| root(&mut parent, v) == r).collect())
        .collect()
}

/// Outcome of a successful splitting cross-check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct K1Report {
    /// `dim 𝔅^n(V)` for `n ≤ max_degree`
    pub engine: Vec<u64>,
    /// coefficients of `Hilbert(𝔅(V₁)) · Hilbert(𝔅(K¹))`
    pub product: Vec<u64>,
    pub generators: Vec<String>,
    pub beyond: Vec<String>,
}

fn padded(dims: Vec<u64>, len: usize) -> Vec<u64> {
    let mut d = dims;
    d.resize(len, 0);
    d
}

/// Checks `Hilbert(𝔅(V)) = Hilbert(𝔅(V₁)) · Hilbert(𝔅(K¹))` through `max_degree`, with
/// each `K¹` generator weighted by its degree in `T(V)`, and that the generators
/// survive in `𝔅(V)` while the elements just past them vanish.
pub fn check_k1_consistency(
    k1: &K1Data,
    gb: &GradedBasis,
    gb1: &GradedBasis,
    max_degree: usize,
) -> Result<K1Report, SplittingError> {
    let len = max_degree + 1;
    for n in 0..len {
        gb.dim(n)?;
        gb1.dim(n)?;
    }
    let k_space = k1.diagonal_space(gb.space().field())?;
    let gk = GradedBasis::compute(&k_space, max_degree)?;
    let k_series = padded(gk.weighted_dims(&k1.weights()), len);
    let product = padded(poly_mul(&padded(gb1.dims(), len), &k_series), len);
    let engine = padded(gb.dims(), len);
    if let Some(degree) = (0..len).find(|&n| engine[n] != product[n]) {
        return Err(SplittingError::Mismatch { degree, expected: product[degree], found: engine[degree] });
    }
    for g in &k1.generators {
        if g.degree <= max_degree && gb.is_zero_in_nichols(&g.poly)? {
            return Err(SplittingError::GeneratorVanishes(g.name.clone()));
        }
    }
    for g in &k1.beyond {
        if g.degree <= max_degree && !gb.is_zero_in_nichols(&g.poly)? {
            return Err(SplittingError::BeyondNonzero(g.name.clone()));
        }
    }
    Ok(K1Report {
        engine,
        product,
        generators: k1.names(),
        beyond: k1.beyond.iter().map(|g| g.name.clone()).collect(),
    })
}

/// One identity checked in `𝔅(V)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub cite: String,
    pub degree: usize,
    pub holds: bool,
}

/// Collects `lhs = rhs in 𝔅(V)` checks; in characteristic 2 that is `lhs + rhs ↦ 0`.
fn top(p: &NcPoly) -> usize {
    p.components().keys().copied().max().unwrap_or(0)
}

struct Checker<'a> {
    gb: &'a GradedBasis,
    space: &'a BraidedSpace,
    checks: Vec<Check>,
}

impl<'a> Checker<'a> {
    fn new(gb: &'a GradedBasis) -> Self {
        Checker { gb, space: gb.space(), checks: Vec::new() }
    }

    fn x(&self, i: usize) -> NcPoly {
        NcPoly::generator(self.space, i)
    }

    fn zero(&mut self, cite: String, p: &NcPoly) -> Result<(), SplittingError> {
        self.push(cite, top(p), p)
    }

    fn push(&mut self, cite: String, degree: usize, p: &NcPoly) -> Result<(), SplittingError> {
        let holds = self.gb.is_zero_in_nichols(p)?;
        self.checks.push(Check { cite, degree, holds });
        Ok(())
    }

    /// Degree is taken from the sides, which may cancel already in T(V).
    fn eq(&mut self, cite: String, lhs: &NcPoly, rhs: &NcPoly) -> Result<(), SplittingError> {
        self.push(cite, top(lhs).max(top(rhs)), &lhs.try_add(rhs)?)
    }

    fn act(&self, p: &NcPoly, g: &[i64]) -> Result<NcPoly, SplittingError> {
        let real = self.space.realization().ok_or(FreeAlgError::NoRealization)?;
        Ok(p.group_act(real, g))
    }

    fn unit(&self, h: usize) -> Vec<i64> {
        let r = self.space.realization().map_or(0, |r| r.rank());
        let mut g = vec![0; r];
        g[h] = 1;
        g
    }

    /// `x_h x_l + x_l x_h`
    fn anti(&self, h: usize, l: usize) -> NcPoly {
        let (a, b) = (self.x(h), self.x(l));
        &(&a * &b) + &(&b * &a)
    }
}

/// `μ = (1, a, a, a(a+1))`; zero from index 4 on.
pub(crate) fn mu(field: &Field, a: u32, n: u32) -> u32 {
    match n {
        0 => 1,
        1 | 2 => a,
        3 => field.mul(a, a ^ 1),
        _ => 0,
    }
}

/// `y = (1, x_l, x_{h l}, x_l x_{h l})` where `x_{h l} = x_h x_l + x_l x_h`; zero from index 4 on.
fn y(c: &Checker, l: usize, h: usize, n: u32) -> NcPoly {
    match n {
        0 => NcPoly::one(c.space),
        1 => c.x(l),
        2 => c.anti(h, l),
        3 => &c.x(l) * &c.anti(h, l),
        _ => NcPoly::zero(c.space),
    }
}

/// Degree `identity_suite` needs the engine to reach.
pub fn identity_degree(space: &BraidedSpace) -> Result<usize, SplittingError> {
    match space.params() {
        FamilyParams::Lstr { .. } => Ok(7),
        FamilyParams::BlockPoints { .. } => Ok(5),
        FamilyParams::Poseidon { a, .. } => Ok(poseidon_bounds(a).iter().sum::<u32>() as usize + 3),
        FamilyParams::Pale { .. } => Ok(4),
        _ => Err(SplittingError::Unsupported(space.family())),
    }
}

/// Identities satisfied by the `K¹` generators, each checked in `𝔅(V)`;
/// `gb` must reach `identity_degree`.
pub fn identity_suite(gb: &GradedBasis) -> Result<Vec<Check>, SplittingError> {
    let space = gb.space();
    let field = space.field();
    let mut c = Checker::new(gb);
    match space.params() {
        FamilyParams::Lstr { p, q22, a } => {
            let (q12, q22, a) = (*p, *q22, *a);
            let q21 = field.inv_nonzero(q12);
            let z: Vec<NcPoly> = (0..=5).map(|n| chain(space, &[(1, n)], 2)).collect::<Result<_, _>>()?;
            let (x1, x2, x21) = (c.x(0), c.x(1), c.anti(1, 0));
            for n in 0..=4usize {
                let zn = &z[n];
                c.eq(format!("g1·z{n} = q12 z{n}"), &c.act(zn, &[1, 0])?, &zn.scale(q12))?;
                c.eq(format!("x1 z{n} = q12 z{n} x1"), &(&x1 * zn), &(zn * &x1).scale(q12))?;
                let q = field.mul(q12, q12);
                c.eq(format!("x21 z{n} = q12² z{n} x21"), &(&x21 * zn), &(zn * &x21).scale(q))?;
                let q = field.mul(field.pow(q21, n as u64), q22);
                c.eq(format!("g2·z{n} = q21^{n} q22 z{n}"), &c.act(zn, &[0, 1])?, &zn.scale(q))?;
                let rhs = (&(zn * &x2).scale(q12)).try_add(&z[n + 1])?;
                c.eq(format!("x2 z{n} = q12 z{n} x2 + z{}", n + 1), &(&x2 * zn), &rhs)?;
                for i in 0..2 {
                    c.zero(format!("∂{}(z{n}) = 0", i + 1), &zn.skew_derive(space, i)?)?;
                }
                let rhs = y(&c, 0, 1, n as u32).scale(mu(field, a, n as u32));
                c.eq(format!("∂3(z{n}) = μ{n} y{n}"), &zn.skew_derive(space, 2)?, &rhs)?;
            }
        }
        FamilyParams::BlockPoints { q, a } => {
            let theta = q.len();
            let x1 = c.x(0);
            let xh = c.x(1);
            for i in 1..theta {
                let z: Vec<NcPoly> =
                    (0..=4).map(|n| chain(space, &[(1, n)], i + 1)).collect::<Result<_, _>>()?;
                let name = |n: usize| format!("z{}_{n}", i + 1);
                for n in 0..=3usize {
                    let zn = &z[n];
                    for h in 0..theta {
                        let s = field.mul(field.pow(q[h][0], n as u64), q[h][i]);
                        let cite = format!("g{hl}·{z} = q{hl}1^{n} q{hl}{il} {z}", hl = h + 1, z = name(n), il = i + 1);
                        c.eq(cite, &c.act(zn, &c.unit(h))?, &zn.scale(s))?;
                    }
                    let cite = format!("x1 {0} = q1{1} {0} x1", name(n), i + 1);
                    c.eq(cite, &(&x1 * zn), &(zn * &x1).scale(q[0][i]))?;
                    let rhs = (&xh * zn).try_add(&(zn * &xh).scale(q[0][i]))?;
                    let cite = format!("{} = x1h {} + q1{} {1} x1h", name(n + 1), name(n), i + 1);
                    c.eq(cite, &z[n + 1], &rhs)?;
                }
                for (n, zn) in z.iter().enumerate() {
                    for l in 0..=theta {
                        let d = zn.skew_derive(space, l)?;
                        let label = &space.labels()[l];
                        if l == i + 1 {
                            let rhs = y(&c, 0, 1, n as u32).scale(mu(field, a[i], n as u32));
                            c.eq(format!("∂{label}({}) = μ{n} y{n}", name(n)), &d, &rhs)?;
                        } else {
                            c.zero(format!("∂{label}({}) = 0", name(n)), &d)?;
                        }
                    }
                }
            }
        }
        FamilyParams::Poseidon { q, a } => {
            let t = a.len();
            let theta = t + 1;
            let b = poseidon_bounds(a);
            for n in multi_indices(&b) {
                let s = poseidon_s(space, &n)?;
                let sn = s_name(&n);
                for j in 0..t {
                    let (xj, xjh) = (2 * j, 2 * j + 1);
                    let jl = j + 1;
                    let adj = s.ad_c(space, xj)?;
                    c.zero(format!("ad x{jl}({sn}) = 0"), &adj)?;
                    let adjj = adj.ad_c(space, xjh)?.try_add(&s.ad_c(space, xjh)?.ad_c(space, xj)?)?;
                    c.zero(format!("ad x{jl}h{jl}({sn}) = 0"), &adjj)?;
                    let coef = (0..j).fold(1, |v, i| field.mul(v, field.pow(q[j][i], n[i] as u64)));
                    let mut up = n.clone();
                    up[j] += 1;
                    let rhs = poseidon_s(space, &up)?.scale(coef);
                    c.eq(format!("ad x{jl}h({sn}) = {}", s_name(&up)), &s.ad_c(space, xjh)?, &rhs)?;
                    let coef = (0..t).fold(q[j][t], |v, i| field.mul(v, field.pow(q[j][i], n[i] as u64)));
                    c.eq(format!("g{jl}·{sn} = scalar {sn}"), &c.act(&s, &c.unit(j))?, &s.scale(coef))?;
                    c.zero(format!("∂{jl}({sn}) = 0"), &s.skew_derive(space, xj)?)?;
                    c.zero(format!("∂{jl}h({sn}) = 0"), &s.skew_derive(space, xjh)?)?;
                }
                let coef = (0..t).fold(1, |v, i| field.mul(v, field.pow(q[t][i], n[i] as u64)));
                c.eq(format!("g{theta}·{sn} = scalar {sn}"), &c.act(&s, &c.unit(t))?, &s.scale(coef))?;
                let mut rhs = NcPoly::one(space);
                let mut coef = 1;
                for j in 0..t {
                    rhs = &rhs * &y(&c, 2 * j, 2 * j + 1, n[j]);
                    coef = field.mul(coef, mu(field, a[j], n[j]));
                }
                c.eq(format!("∂{theta}({sn}) = μ y"), &s.skew_derive(space, 2 * t)?, &rhs.scale(coef))?;
            }
        }
        FamilyParams::Pale { p, q22 } => {
            let (q12, q22) = (*p, *q22);
            let q21 = field.inv_nonzero(q12);
            let (x1, x2) = (c.x(0), c.x(1));
            let sh = |m: u32, n: u32| chain(space, &[(0, m), (1, n)], 2);
            for m in 0..=2u32 {
                for n in 0..=2u32 {
                    let s = sh(m, n)?;
                    let name = format!("sh{m}{n}");
                    c.eq(format!("g1·{name} = q12 {name}"), &c.act(&s, &[1, 0])?, &s.scale(q12))?;
                    let rhs = (&x1 * &s).try_add(&(&s * &x1).scale(q12))?;
                    c.eq(format!("sh{}{n} = x1 {name} + q12 {name} x1", m + 1), &sh(m + 1, n)?, &rhs)?;
                    c.zero(format!("∂1({name}) = 0"), &s.skew_derive(space, 0)?)?;
                    c.zero(format!("∂2({name}) = 0"), &s.skew_derive(space, 1)?)?;
                }
                let w = sh(m, 0)?;
                let s = field.mul(field.pow(q21, m as u64), q22);
                c.eq(format!("g2·w{m} = q21^{m} q22 w{m}"), &c.act(&w, &[0, 1])?, &w.scale(s))?;
                if m > 0 {
                    c.zero(format!("∂3(w{m}) = 0"), &w.skew_derive(space, 2)?)?;
                }
                let z = sh(0, m)?;
                let rhs = (&(&x2 * &z)).try_add(&(&z * &x2).scale(q12))?;
                c.eq(format!("z{} = x2 z{m} + q12 z{m} x2", m + 1), &sh(0, m + 1)?, &rhs)?;
                let s = field.mul(field.pow(q21, m as u64), q22);
                c.eq(format!("g2·z{m} = q21^{m} q22 z{m}"), &c.act(&z, &[0, 1])?, &z.scale(s))?;
                c.eq(format!("∂3(z{m}) = x1^{m}"), &z.skew_derive(space, 2)?, &x1.pow(m))?;
            }
        }
        _ => return Err(SplittingError::Unsupported(space.family())),
    }
    Ok(c.checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(k: u32) -> Field {
        Field::new(k).unwrap()
    }

    fn e(f: &Field, m: u32) -> FieldElement {
        f.element(m).unwrap()
    }

    fn of_order(f: &Field, m: u64) -> u32 {
        f.element_of_order(m).unwrap()
    }

    fn lstr(f: &Field, p: u32, q22: u32, a: u32) -> BraidedSpace {
        BraidedSpace::lstr(f, e(f, p), e(f, q22), e(f, a)).unwrap()
    }

    fn pale(f: &Field, p: u32, q22: u32) -> BraidedSpace {
        BraidedSpace::pale(f, e(f, p), e(f, q22)).unwrap()
    }

    fn poseidon(f: &Field, q12: u32, a: &[u32]) -> BraidedSpace {
        let q21 = f.inv(q12).unwrap();
        let q = [[1, q12, 1], [q21, 1, 1], [1, 1, 1]];
        let q: Vec<Vec<_>> = q.iter().map(|r| r.iter().map(|&m| e(f, m)).collect()).collect();
        let a: Vec<_> = a.iter().map(|&m| e(f, m)).collect();
        BraidedSpace::poseidon(f, &q, &a).unwrap()
    }

    fn block_points(f: &Field, q23: u32, q33: u32, a: &[u32]) -> BraidedSpace {
        let q = [[1, 1, 1], [1, 1, q23], [1, 1, q33]];
        let q: Vec<Vec<_>> = q.iter().map(|r| r.iter().map(|&m| e(f, m)).collect()).collect();
        let a: Vec<_> = a.iter().map(|&m| e(f, m)).collect();
        BraidedSpace::block_points(f, &q, &a).unwrap()
    }

    #[test]
    fn generator_counts() {
        let f4 = gf(2);
        let w = of_order(&f4, 3);
        assert_eq!(k1_for(&lstr(&f4, w, 1, 1)).unwrap().len(), 3);
        assert_eq!(k1_for(&lstr(&f4, w, 1, w)).unwrap().len(), 4);
        assert_eq!(k1_for(&lstr(&f4, w, 1, 0)).unwrap().len(), 1);
        assert_eq!(k1_for(&pale(&f4, w, 1)).unwrap().len(), 2);
        let k = k1_for(&poseidon(&Field::gf2(), 1, &[1, 1])).unwrap();
        assert_eq!(k.len(), 9);
        assert_eq!(k.generators[1].index, vec![0, 1]);
        assert_eq!(k1_for(&poseidon(&f4, w, &[1, w])).unwrap().len(), 12);
        assert_eq!(k1_for(&block_points(&f4, w, 1, &[1, 1, 0])).unwrap().len(), 4);
        let j = BraidedSpace::jordan(&Field::gf2());
        assert!(matches!(k1_for(&j), Err(SplittingError::Unsupported(Family::Block))));
    }

    #[test]
    fn lstr_braiding_formula() {
        let f = gf(4);
        let (p, q22) = (of_order(&f, 3), of_order(&f, 5));
        let k = k1_for(&lstr(&f, p, q22, 1)).unwrap();
        let q21 = f.inv(p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = f.mul(f.pow_signed(q21, j as i64 - i as i64), q22);
                assert_eq!(k.q_matrix[i][j].mask(), expect);
            }
        }
    }

    /// The closed-form braiding equals the action of `deg u_i` on `u_j` in `𝔅(V)`.
    fn braiding_matches_action(space: &BraidedSpace, max_degree: usize) {
        let k = k1_for(space).unwrap();
        let gb = GradedBasis::compute(space, max_degree).unwrap();
        let real = space.realization().unwrap();
        for (gi, row) in k.generators.iter().zip(&k.q_matrix) {
            for (gj, qij) in k.generators.iter().zip(row) {
                let moved = gj.poly.group_act(real, &gi.group_degree);
                let diff = moved.try_add(&gj.poly.scale(qij.mask())).unwrap();
                assert!(gb.is_zero_in_nichols(&diff).unwrap(), "{} on {}", gi.name, gj.name);
            }
        }
    }

    #[test]
    fn braidings_match_group_action() {
        let f4 = gf(2);
        let w = of_order(&f4, 3);
        braiding_matches_action(&lstr(&f4, w, w, w), 4);
        braiding_matches_action(&pale(&f4, w, w), 2);
        braiding_matches_action(&poseidon(&f4, w, &[1, w]), 6);
        let f16 = gf(4);
        let q = of_order(&f16, 5);
        braiding_matches_action(&block_points(&f16, q, of_order(&f16, 3), &[1, 1, q]), 4);
    }

    #[test]
    fn dynkin_examples() {
        let f = gf(4);
        let (p, q22) = (of_order(&f, 3), of_order(&f, 5));
        let sq = FieldElementCode(f.mul(q22, q22));
        let d = k1_for(&lstr(&f, p, q22, 1)).unwrap().dynkin().unwrap();
        assert_eq!(d.vertices, vec![FieldElementCode(q22); 3]);
        assert_eq!(d.edges.len(), 3);
        assert!(d.edges.iter().all(|e| e.label == sq));
        assert!(d.is_connected());

        let d = k1_for(&lstr(&f, p, 1, 1)).unwrap().dynkin().unwrap();
        assert_eq!(d.vertices, vec![FieldElementCode(1); 3]);
        assert!(d.edges.is_empty());
        assert_eq!(d.components, vec![vec![0], vec![1], vec![2]]);

        let d = k1_for(&pale(&f, p, q22)).unwrap().dynkin().unwrap();
        assert_eq!(d.vertices, vec![FieldElementCode(q22); 2]);
        assert_eq!(d.edges, vec![DynkinEdge { a: 0, b: 1, label: sq }]);
        assert_eq!(d.to_text(), format!("v0: int:{q22}\nv1: int:{q22}\ne0-1: {sq}\n"));

        // the star: z3_0 joined to the three z2_m, all edges q23 q32
        let q23 = of_order(&f, 5);
        let q33 = of_order(&f, 3);
        let d = k1_for(&block_points(&f, q23, q33, &[1, 1, 0])).unwrap().dynkin().unwrap();
        let l = FieldElementCode(q23);
        assert_eq!(d.vertices, [1, 1, 1, q33].map(FieldElementCode).to_vec());
        let edges: Vec<_> = (0..3).map(|a| DynkinEdge { a, b: 3, label: l }).collect();
        assert_eq!(d.edges, edges);
    }

    #[test]
    fn dynkin_rejects_zero() {
        let f = gf(2);
        let q = vec![vec![e(&f, 1), e(&f, 0)], vec![e(&f, 1), e(&f, 1)]];
        assert!(matches!(DynkinDiagram::new(&q), Err(SplittingError::ZeroEntry(0, 1))));
    }

    #[test]
    fn diagram_json_round_trip() {
        let f = gf(2);
        let w = of_order(&f, 3);
        let d = k1_for(&pale(&f, 1, w)).unwrap().dynkin().unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"label\":\"int:"));
        let back: DynkinDiagram = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    proptest! {
        #[test]
        fn dynkin_invariant_under_relabeling(
            entries in prop::collection::vec(1u32..16, 25),
            perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            let f = gf(4);
            let q: Vec<Vec<_>> = (0..5).map(|i| (0..5).map(|j| e(&f, entries[5 * i + j])).collect()).collect();
            let pq: Vec<Vec<_>> = (0..5).map(|i| (0..5).map(|j| q[perm[i]][perm[j]]).collect()).collect();
            let (d, pd) = (DynkinDiagram::new(&q).unwrap(), DynkinDiagram::new(&pq).unwrap());
            prop_assert!(d.is_isomorphic(&pd));
            prop_assert_eq!(d.components.len(), pd.components.len());
            prop_assert!(d.edges.iter().all(|e| e.label != FieldElementCode(1) && e.a < e.b));
        }
    }

    #[test]
    fn isomorphism_sees_labels() {
        let f = gf(2);
        let w = of_order(&f, 3);
        let a = DynkinDiagram::new(&k1_for(&pale(&f, 1, w)).unwrap().q_matrix).unwrap();
        let b = DynkinDiagram::new(&k1_for(&pale(&f, 1, 1)).unwrap().q_matrix).unwrap();
        assert!(!a.is_isomorphic(&b));
    }

    fn consistency(space: &BraidedSpace, max_degree: usize) -> Result<K1Report, SplittingError> {
        let k = k1_for(space).unwrap();
        let gb = GradedBasis::compute(space, max_degree).unwrap();
        let gb1 = GradedBasis::compute(&space.restrict(&k.v1).unwrap(), max_degree).unwrap();
        check_k1_consistency(&k, &gb, &gb1, max_degree)
    }

    #[test]
    fn factorization_examples() {
        let f2 = Field::gf2();
        let r = consistency(&lstr(&f2, 1, 1, 1), 14).unwrap();
        assert_eq!(r.engine.iter().sum::<u64>(), 128);
        assert!(r.beyond.contains(&"z3".to_string()));
        let r = consistency(&pale(&f2, 1, 1), 8).unwrap();
        assert_eq!(r.beyond, vec!["z2", "w1"]);
        let f4 = gf(2);
        let w = of_order(&f4, 3);
        let r = consistency(&lstr(&f4, 1, 1, w), 18).unwrap();
        assert_eq!(r.engine.iter().sum::<u64>(), 256);
        assert_eq!(r.generators, vec!["z0", "z1", "z2", "z3"]);
        consistency(&pale(&f4, w, w), 16).unwrap();
        consistency(&poseidon(&f2, 1, &[1, 1]), 6).unwrap();
    }

    #[test]
    fn factorization_reports_first_bad_degree() {
        let f2 = Field::gf2();
        let space = lstr(&f2, 1, 1, 1);
        let mut k = k1_for(&space).unwrap();
        k.generators[2].degree = 4;
        let gb = GradedBasis::compute(&space, 14).unwrap();
        let gb1 = GradedBasis::compute(&space.restrict(&k.v1).unwrap(), 14).unwrap();
        match check_k1_consistency(&k, &gb, &gb1, 14) {
            Err(SplittingError::Mismatch { degree, .. }) => assert_eq!(degree, 3),
            other => panic!("expected a mismatch, got {other:?}"),
        }
    }

    fn all_hold(space: &BraidedSpace, max_degree: usize) -> usize {
        let gb = GradedBasis::compute(space, max_degree).unwrap();
        let checks = identity_suite(&gb).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.holds).map(|c| &c.cite).collect();
        assert!(failed.is_empty(), "{}: {failed:?}", space.family());
        checks.len()
    }

    #[test]
    fn identity_suites_hold() {
        let f2 = Field::gf2();
        let f4 = gf(2);
        let w = of_order(&f4, 3);
        assert!(all_hold(&lstr(&f2, 1, 1, 1), 7) > 30);
        all_hold(&lstr(&f4, w, 1, w), 7);
        all_hold(&lstr(&f4, w, w, 1), 7);
        all_hold(&pale(&f4, w, 1), 4);
        all_hold(&pale(&f4, w, w), 4);
        all_hold(&poseidon(&f2, 1, &[1, 1]), 7);
        all_hold(&poseidon(&f4, w, &[1, w]), 8);
        all_hold(&block_points(&f4, w, 1, &[1, 1, 0]), 5);
        all_hold(&block_points(&f4, w, w, &[1, w, 1]), 5);
    }
}
