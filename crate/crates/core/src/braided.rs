//! Braided vector spaces and their realizations over free abelian groups.
//!
//! The braiding is stored as a dense `dim² × dim²` matrix `c` with
//! `c(x_i ⊗ x_j) = Σ c[(k,l),(i,j)] x_k ⊗ x_l`, row index `k*dim + l` and
//! column index `i*dim + j`. A [`Realization`] presents the space as a
//! Yetter-Drinfeld module over `Γ = ℤ/N_1 × … × ℤ/N_r` (`N_s = 0` meaning ℤ):
//! a grading `deg x_i ∈ Γ` and one action matrix per generator of `Γ`, with
//! `c(x_i ⊗ x_j) = (g_{deg i} · x_j) ⊗ x_i`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError, FieldSpec};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraidedError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("parameter `{0}` must be nonzero")]
    ZeroParameter(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the braiding is not invertible")]
    NotInvertible,
    #[error("the braiding does not satisfy the braid equation")]
    NotBraided,
    #[error("basis indices {0:?} do not span a braided subspace")]
    NotInvariant(Vec<usize>),
    #[error("invalid basis label `{0}`")]
    Label(String),
    #[error("realization rejected: {0}")]
    Realization(Violations),
}

/// Basis label stored doubled: `2i` is `i`, `2i + 1` is `i + ½` (rendered `ih`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel(pub u32);

impl BasisLabel {
    pub fn int(i: u32) -> Self {
        BasisLabel(2 * i)
    }

    pub fn half(i: u32) -> Self {
        BasisLabel(2 * i + 1)
    }

    pub fn is_half(&self) -> bool {
        self.0 % 2 == 1
    }

    /// Integral part `⌊label⌋`.
    pub fn floor(&self) -> u32 {
        self.0 / 2
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_half() {
            write!(f, "{}h", self.floor())
        } else {
            write!(f, "{}", self.floor())
        }
    }
}

impl FromStr for BasisLabel {
    type Err = BraidedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || BraidedError::Label(s.to_string());
        match s.strip_suffix('h') {
            Some(n) => n.parse().map(BasisLabel::half).map_err(|_| bad()),
            None => s.parse().map(BasisLabel::int).map_err(|_| bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Diagonal,
    Block,
    Lstr,
    BlockPoints,
    Poseidon,
    Pale,
    Custom,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Diagonal => "diagonal",
            Family::Block => "block",
            Family::Lstr => "lstr",
            Family::BlockPoints => "block_points",
            Family::Poseidon => "poseidon",
            Family::Pale => "pale",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Constructor parameters, as raw masks in the space's field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyParams {
    Diagonal { q: Vec<Vec<u32>> },
    Block { eps: u32, len: usize },
    Lstr { p: u32, q22: u32, a: u32 },
    BlockPoints { q: Vec<Vec<u32>>, a: Vec<u32> },
    Poseidon { q: Vec<Vec<u32>>, a: Vec<u32> },
    Pale { p: u32, q22: u32 },
    Custom,
}

fn code(m: u32) -> String {
    format!("int:{m}")
}

fn matrix_code(q: &[Vec<u32>]) -> String {
    q.iter()
        .map(|row| row.iter().map(|&m| code(m)).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn vector_code(a: &[u32]) -> String {
    a.iter().map(|&m| code(m)).collect::<Vec<_>>().join(",")
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Diagonal { .. } => Family::Diagonal,
            FamilyParams::Block { .. } => Family::Block,
            FamilyParams::Lstr { .. } => Family::Lstr,
            FamilyParams::BlockPoints { .. } => Family::BlockPoints,
            FamilyParams::Poseidon { .. } => Family::Poseidon,
            FamilyParams::Pale { .. } => Family::Pale,
            FamilyParams::Custom => Family::Custom,
        }
    }

    /// Text encodings of the parameters, keyed by name.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        match self {
            FamilyParams::Diagonal { q } => {
                m.insert("q".into(), matrix_code(q));
            }
            FamilyParams::Block { eps, len } => {
                m.insert("eps".into(), code(*eps));
                m.insert("l".into(), len.to_string());
            }
            FamilyParams::Lstr { p, q22, a } => {
                m.insert("p".into(), code(*p));
                m.insert("q22".into(), code(*q22));
                m.insert("a".into(), code(*a));
            }
            FamilyParams::BlockPoints { q, a } | FamilyParams::Poseidon { q, a } => {
                m.insert("q".into(), matrix_code(q));
                m.insert("a".into(), vector_code(a));
            }
            FamilyParams::Pale { p, q22 } => {
                m.insert("p".into(), code(*p));
                m.insert("q22".into(), code(*q22));
            }
            FamilyParams::Custom => {}
        }
        m
    }
}

/// One violated realization invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Shape { detail: String },
    NotInvertible { generator: usize },
    NotCommuting { left: usize, right: usize },
    WrongOrder { generator: usize, order: u64 },
    GradingNotPreserved { generator: usize, basis: usize },
    Incompatible { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { detail } => write!(f, "shape: {detail}"),
            Violation::NotInvertible { generator } => {
                write!(f, "action of g{} is not invertible", generator + 1)
            }
            Violation::NotCommuting { left, right } => {
                write!(f, "actions of g{} and g{} do not commute", left + 1, right + 1)
            }
            Violation::WrongOrder { generator, order } => {
                write!(f, "action of g{} raised to {order} is not the identity", generator + 1)
            }
            Violation::GradingNotPreserved { generator, basis } => {
                write!(f, "g{} moves x{} out of its homogeneous component", generator + 1, basis + 1)
            }
            Violation::Incompatible { i, j } => {
                write!(f, "c(x{} ⊗ x{}) differs from (g_deg · x{}) ⊗ x{}", i + 1, j + 1, j + 1, i + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// A grading by `Γ = ∏ ℤ/N_s` together with a `Γ`-action on `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    /// Cyclic factor orders; 0 is infinite cyclic.
    pub orders: Vec<u64>,
    /// `actions[s]` has column `j` equal to `g_s · x_j`.
    pub actions: Vec<Matrix>,
    /// Exponent vector of `deg x_i` for every basis vector.
    pub degrees: Vec<Vec<i64>>,
}

impl Realization {
    pub fn free(actions: Vec<Matrix>, degrees: Vec<Vec<i64>>) -> Self {
        Realization { orders: vec![0; actions.len()], actions, degrees }
    }

    pub fn rank(&self) -> usize {
        self.actions.len()
    }

    /// Same action and grading, over the quotient with the given cyclic orders.
    pub fn with_orders(&self, orders: Vec<u64>) -> Self {
        Realization { orders, ..self.clone() }
    }

    /// Action matrix of `g_1^{e_1} ⋯ g_r^{e_r}`.
    pub fn element_action(&self, exps: &[i64], field: &Field) -> Matrix {
        let n = self.actions.first().map_or(0, Matrix::rows);
        let mut acc = Matrix::identity(n);
        for (a, &e) in self.actions.iter().zip(exps) {
            let m = if e >= 0 {
                a.pow(e as u64, field)
            } else {
                a.inverse(field)
                    .expect("realization actions are invertible")
                    .pow(e.unsigned_abs(), field)
            };
            acc = acc.mul(&m, field);
        }
        acc
    }

    /// Action of the group element `deg x_i`.
    pub fn degree_action(&self, i: usize, field: &Field) -> Matrix {
        self.element_action(&self.degrees[i], field)
    }
}

/// A finite-dimensional braided vector space over GF(2^k).
#[derive(Debug, Clone)]
pub struct BraidedSpace {
    field: Field,
    params: FamilyParams,
    labels: Vec<BasisLabel>,
    braiding: Matrix,
    /// sparse columns of the braiding: `columns[i*d + j] = [(k*d + l, coeff)]`
    columns: Vec<Vec<(usize, u32)>>,
    realization: Option<Realization>,
}

type Terms = Vec<((usize, usize), u32)>;

fn build_braiding(d: usize, f: impl Fn(usize, usize) -> Terms) -> Matrix {
    let mut c = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for ((k, l), v) in f(i, j) {
                let r = k * d + l;
                let old = c.get(r, i * d + j);
                c.set(r, i * d + j, old ^ v);
            }
        }
    }
    c
}

fn masks_of(field: &Field, name: &str, elems: &[FieldElement]) -> Result<Vec<u32>, BraidedError> {
    elems
        .iter()
        .map(|e| {
            if e.spec() != field.spec() {
                Err(BraidedError::Field(FieldError::Mismatch(e.spec(), field.spec())))
            } else {
                let _ = name;
                Ok(e.mask())
            }
        })
        .collect()
}

fn mask_of(field: &Field, name: &str, e: FieldElement) -> Result<u32, BraidedError> {
    Ok(masks_of(field, name, &[e])?[0])
}

fn nonzero(name: &str, m: u32) -> Result<u32, BraidedError> {
    if m == 0 {
        Err(BraidedError::ZeroParameter(name.to_string()))
    } else {
        Ok(m)
    }
}

fn square_masks(
    field: &Field,
    name: &str,
    q: &[Vec<FieldElement>],
) -> Result<Vec<Vec<u32>>, BraidedError> {
    let n = q.len();
    if n == 0 || q.iter().any(|row| row.len() != n) {
        return Err(BraidedError::Shape(format!("`{name}` must be a nonempty square matrix")));
    }
    let out = q
        .iter()
        .map(|row| masks_of(field, name, row))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, row) in out.iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            nonzero(&format!("{name}[{}][{}]", i + 1, j + 1), m)?;
        }
    }
    Ok(out)
}

/// Action matrix from a closure giving `g · x_j` as a list of terms.
fn action_matrix(d: usize, f: impl Fn(usize) -> Vec<(usize, u32)>) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for j in 0..d {
        for (k, v) in f(j) {
            let old = m.get(k, j);
            m.set(k, j, old ^ v);
        }
    }
    m
}

fn unit(r: usize, s: usize) -> Vec<i64> {
    let mut v = vec![0; r];
    v[s] = 1;
    v
}

impl BraidedSpace {
    fn assemble(
        field: &Field,
        params: FamilyParams,
        labels: Vec<BasisLabel>,
        braiding: Matrix,
        realization: Option<Realization>,
    ) -> Self {
        let d = labels.len();
        let columns = (0..d * d)
            .map(|col| {
                (0..d * d)
                    .filter_map(|r| {
                        let v = braiding.get(r, col);
                        (v != 0).then_some((r, v))
                    })
                    .collect()
            })
            .collect();
        BraidedSpace { field: field.clone(), params, labels, braiding, columns, realization }
    }

    /// Diagonal type: `c(x_i ⊗ x_j) = q_ij x_j ⊗ x_i`, realized over `ℤ^θ`.
    pub fn diagonal(field: &Field, q: &[Vec<FieldElement>]) -> Result<Self, BraidedError> {
        let q = square_masks(field, "q", q)?;
        Ok(Self::diagonal_masks(field, q))
    }

    pub(crate) fn diagonal_masks(field: &Field, q: Vec<Vec<u32>>) -> Self {
        let d = q.len();
        let c = build_braiding(d, |i, j| vec![((j, i), q[i][j])]);
        let actions = (0..d)
            .map(|s| action_matrix(d, |j| vec![(j, q[s][j])]))
            .collect();
        let degrees = (0..d).map(|i| unit(d, i)).collect();
        let labels = (1..=d as u32).map(BasisLabel::int).collect();
        Self::assemble(
            field,
            FamilyParams::Diagonal { q },
            labels,
            c,
            Some(Realization::free(actions, degrees)),
        )
    }

    /// The block `𝒱(ε, ℓ)`: `c(x_i ⊗ x_1) = ε x_1 ⊗ x_i`, `c(x_i ⊗ x_j) = (ε x_j + x_{j-1}) ⊗ x_i`.
    pub fn block(field: &Field, eps: FieldElement, len: usize) -> Result<Self, BraidedError> {
        let eps = nonzero("eps", mask_of(field, "eps", eps)?)?;
        if len < 2 {
            return Err(BraidedError::Hypothesis(format!("block length must be at least 2, got {len}")));
        }
        let image = |j: usize| -> Vec<(usize, u32)> {
            if j == 0 {
                vec![(0, eps)]
            } else {
                vec![(j, eps), (j - 1, 1)]
            }
        };
        let c = build_braiding(len, |i, j| image(j).into_iter().map(|(k, v)| ((k, i), v)).collect());
        let g = action_matrix(len, image);
        let labels = (1..=len as u32).map(BasisLabel::int).collect();
        Ok(Self::assemble(
            field,
            FamilyParams::Block { eps, len },
            labels,
            c,
            Some(Realization::free(vec![g], vec![vec![1]; len])),
        ))
    }

    /// The restricted Jordan plane's braided space, the 1-block `𝒱(1, 2)`.
    pub fn jordan(field: &Field) -> Self {
        Self::block(field, FieldElement::one(field.spec()), 2).expect("valid block")
    }

    /// One block and one point, `𝓛_℘(q22, a)`, with `q12 = ℘`, `q21 = ℘⁻¹`.
    pub fn lstr(
        field: &Field,
        p: FieldElement,
        q22: FieldElement,
        a: FieldElement,
    ) -> Result<Self, BraidedError> {
        let p = nonzero("p", mask_of(field, "p", p)?)?;
        let q22 = nonzero("q22", mask_of(field, "q22", q22)?)?;
        let a = mask_of(field, "a", a)?;
        let q12 = p;
        let q21 = field.inv_nonzero(p);
        let c = build_braiding(3, |i, j| match (i, j) {
            (0 | 1, 0) => vec![((0, i), 1)],
            (0 | 1, 1) => vec![((1, i), 1), ((0, i), 1)],
            (0 | 1, 2) => vec![((2, i), q12)],
            (2, 0) => vec![((0, 2), q21)],
            (2, 1) => vec![((1, 2), q21), ((0, 2), field.mul(q21, a))],
            (2, 2) => vec![((2, 2), q22)],
            _ => unreachable!(),
        });
        let g1 = action_matrix(3, |j| match j {
            0 => vec![(0, 1)],
            1 => vec![(0, 1), (1, 1)],
            _ => vec![(2, q12)],
        });
        let g2 = action_matrix(3, |j| match j {
            0 => vec![(0, q21)],
            1 => vec![(1, q21), (0, field.mul(q21, a))],
            _ => vec![(2, q22)],
        });
        let degrees = vec![vec![1, 0], vec![1, 0], vec![0, 1]];
        let labels = vec![BasisLabel::int(1), BasisLabel::int(2), BasisLabel::int(3)];
        Ok(Self::assemble(
            field,
            FamilyParams::Lstr { p, q22, a },
            labels,
            c,
            Some(Realization::free(vec![g1, g2], degrees)),
        ))
    }

    /// One block `⟨x_1, x_{1½}⟩` and points `x_2, …, x_θ`.
    ///
    /// `a` is the full vector `(1, a_2, …, a_θ)`. Basis order:
    /// `x_1, x_{1½}, x_2, …, x_θ`.
    pub fn block_points(
        field: &Field,
        q: &[Vec<FieldElement>],
        a: &[FieldElement],
    ) -> Result<Self, BraidedError> {
        let q = square_masks(field, "q", q)?;
        let a = masks_of(field, "a", a)?;
        let theta = q.len();
        if theta < 3 {
            return Err(BraidedError::Hypothesis(format!("θ must be at least 3, got {theta}")));
        }
        if a.len() != theta {
            return Err(BraidedError::Shape(format!("`a` must have {theta} entries")));
        }
        if a[0] != 1 {
            return Err(BraidedError::Hypothesis("a_1 must equal 1".into()));
        }
        if q[0][0] != 1 {
            return Err(BraidedError::Hypothesis("q_11 must equal 1".into()));
        }
        for j in 1..theta {
            if field.mul(q[0][j], q[j][0]) != 1 {
                return Err(BraidedError::Hypothesis(format!("q_1{0} q_{0}1 must equal 1", j + 1)));
            }
        }
        if a[1..].iter().all(|&x| x == 0) {
            return Err(BraidedError::Hypothesis("a must differ from (1, 0, …, 0)".into()));
        }
        let d = theta + 1;
        // index -> ⌊label⌋ - 1
        let fl = |idx: usize| if idx <= 1 { 0 } else { idx - 1 };
        let image = |s: usize, j: usize| -> Vec<(usize, u32)> {
            if j == 1 {
                vec![(1, q[s][0]), (0, field.mul(q[s][0], a[s]))]
            } else {
                vec![(j, q[s][fl(j)])]
            }
        };
        let c = build_braiding(d, |i, j| {
            image(fl(i), j).into_iter().map(|(k, v)| ((k, i), v)).collect()
        });
        let actions = (0..theta).map(|s| action_matrix(d, |j| image(s, j))).collect();
        let degrees = (0..d).map(|i| unit(theta, fl(i))).collect();
        let mut labels = vec![BasisLabel::int(1), BasisLabel::half(1)];
        labels.extend((2..=theta as u32).map(BasisLabel::int));
        Ok(Self::assemble(
            field,
            FamilyParams::BlockPoints { q, a },
            labels,
            c,
            Some(Realization::free(actions, degrees)),
        ))
    }

    /// Several blocks and one point, `𝔭(q, a)` with `t = a.len()` blocks.
    ///
    /// Basis order: `x_1, x_{1½}, x_2, x_{2½}, …, x_t, x_{t½}, x_θ`.
    pub fn poseidon(
        field: &Field,
        q: &[Vec<FieldElement>],
        a: &[FieldElement],
    ) -> Result<Self, BraidedError> {
        let q = square_masks(field, "q", q)?;
        let a = masks_of(field, "a", a)?;
        let t = a.len();
        let theta = q.len();
        if t < 2 {
            return Err(BraidedError::Hypothesis(format!("t must be at least 2, got {t}")));
        }
        if theta != t + 1 {
            return Err(BraidedError::Shape(format!("`q` must be {0}×{0} for t = {t}", t + 1)));
        }
        for i in 0..theta {
            if q[i][i] != 1 {
                return Err(BraidedError::Hypothesis(format!("q_{0}{0} must equal 1", i + 1)));
            }
            for j in 0..theta {
                if i != j && field.mul(q[i][j], q[j][i]) != 1 {
                    return Err(BraidedError::Hypothesis(format!(
                        "q_{0}{1} q_{1}{0} must equal 1",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        for (j, &x) in a.iter().enumerate() {
            nonzero(&format!("a_{}", j + 1), x)?;
        }
        let d = 2 * t + 1;
        // ⌊label⌋ - 1 of a basis index
        let fl = |idx: usize| idx / 2;
        let is_half = |idx: usize| idx < 2 * t && idx % 2 == 1;
        // g_s · x_j for s in 0..theta
        let image = |s: usize, j: usize| -> Vec<(usize, u32)> {
            let bj = fl(j);
            if s < t {
                if s != bj {
                    vec![(j, q[s][bj])]
                } else if !is_half(j) {
                    vec![(j, 1)]
                } else {
                    vec![(j, 1), (j - 1, 1)]
                }
            } else if !is_half(j) {
                vec![(j, q[t][bj])]
            } else {
                vec![(j, q[t][bj]), (j - 1, field.mul(q[t][bj], a[bj]))]
            }
        };
        let c = build_braiding(d, |i, j| {
            image(fl(i), j).into_iter().map(|(k, v)| ((k, i), v)).collect()
        });
        let actions = (0..theta).map(|s| action_matrix(d, |j| image(s, j))).collect();
        let degrees = (0..d).map(|i| unit(theta, fl(i))).collect();
        let mut labels = Vec::with_capacity(d);
        for k in 1..=t as u32 {
            labels.push(BasisLabel::int(k));
            labels.push(BasisLabel::half(k));
        }
        labels.push(BasisLabel::int(theta as u32));
        Ok(Self::assemble(
            field,
            FamilyParams::Poseidon { q, a },
            labels,
            c,
            Some(Realization::free(actions, degrees)),
        ))
    }

    /// One pale block and one point, `𝓔_℘(q22)`.
    pub fn pale(field: &Field, p: FieldElement, q22: FieldElement) -> Result<Self, BraidedError> {
        let p = nonzero("p", mask_of(field, "p", p)?)?;
        let q22 = nonzero("q22", mask_of(field, "q22", q22)?)?;
        let q12 = p;
        let q21 = field.inv_nonzero(p);
        let c = build_braiding(3, |i, j| match (i, j) {
            (0 | 1, 0 | 1) => vec![((j, i), 1)],
            (0 | 1, 2) => vec![((2, i), q12)],
            (2, 0) => vec![((0, 2), q21)],
            (2, 1) => vec![((1, 2), q21), ((0, 2), q21)],
            (2, 2) => vec![((2, 2), q22)],
            _ => unreachable!(),
        });
        let g1 = action_matrix(3, |j| match j {
            0 | 1 => vec![(j, 1)],
            _ => vec![(2, q12)],
        });
        let g2 = action_matrix(3, |j| match j {
            0 => vec![(0, q21)],
            1 => vec![(1, q21), (0, q21)],
            _ => vec![(2, q22)],
        });
        let degrees = vec![vec![1, 0], vec![1, 0], vec![0, 1]];
        let labels = vec![BasisLabel::int(1), BasisLabel::int(2), BasisLabel::int(3)];
        Ok(Self::assemble(
            field,
            FamilyParams::Pale { p, q22 },
            labels,
            c,
            Some(Realization::free(vec![g1, g2], degrees)),
        ))
    }

    /// A user-supplied braiding; checked for invertibility and the braid equation.
    pub fn custom(
        field: &Field,
        labels: Vec<BasisLabel>,
        braiding: Matrix,
        realization: Option<Realization>,
    ) -> Result<Self, BraidedError> {
        let d = labels.len();
        if d == 0 || braiding.rows() != d * d || braiding.cols() != d * d {
            return Err(BraidedError::Shape(format!("braiding must be {0}×{0}", d * d)));
        }
        for l in &labels {
            if l.is_half() && !labels.contains(&BasisLabel::int(l.floor())) {
                return Err(BraidedError::Label(l.to_string()));
            }
        }
        let space = Self::assemble(field, FamilyParams::Custom, labels, braiding, None);
        if space.braiding.inverse(field).is_none() {
            return Err(BraidedError::NotInvertible);
        }
        if !space.satisfies_braid_equation() {
            return Err(BraidedError::NotBraided);
        }
        match realization {
            Some(r) => space.with_realization(r),
            None => Ok(space),
        }
    }

    /// Attaches a realization after validating it.
    pub fn with_realization(mut self, real: Realization) -> Result<Self, BraidedError> {
        self.validate_realization(&real).map_err(BraidedError::Realization)?;
        self.realization = Some(real);
        Ok(self)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_spec(&self) -> FieldSpec {
        self.field.spec()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn braiding(&self) -> &Matrix {
        &self.braiding
    }

    pub fn realization(&self) -> Option<&Realization> {
        self.realization.as_ref()
    }

    /// `c(x_i ⊗ x_j)` as a list of `((k, l), coeff)`.
    pub fn braid_pair(&self, i: usize, j: usize) -> Vec<((usize, usize), u32)> {
        let d = self.dim();
        self.columns[i * d + j].iter().map(|&(r, v)| ((r / d, r % d), v)).collect()
    }

    /// Applies `c` to tensor factors `pos, pos + 1` of a dense vector in `V^{⊗n}`
    /// (first factor most significant in the index).
    pub fn apply_braiding_at(&self, v: &[u32], n: usize, pos: usize) -> Vec<u32> {
        let d = self.dim();
        assert!(pos + 1 < n);
        assert_eq!(v.len(), d.pow(n as u32));
        let hi = d.pow((n - 1 - pos) as u32);
        let lo = hi / d;
        let mut out = vec![0u32; v.len()];
        for (idx, &x) in v.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let a = idx / hi % d;
            let b = idx / lo % d;
            let base = idx - a * hi - b * lo;
            for &(r, coeff) in &self.columns[a * d + b] {
                let (k, l) = (r / d, r % d);
                out[base + k * hi + l * lo] ^= self.field.mul(coeff, x);
            }
        }
        out
    }

    pub fn is_invertible(&self) -> bool {
        self.braiding.inverse(&self.field).is_some()
    }

    /// `(c⊗id)(id⊗c)(c⊗id) = (id⊗c)(c⊗id)(id⊗c)` checked on every basis tensor of `V^{⊗3}`.
    pub fn satisfies_braid_equation(&self) -> bool {
        let d = self.dim();
        let n3 = d * d * d;
        (0..n3).all(|idx| {
            let mut e = vec![0u32; n3];
            e[idx] = 1;
            let lhs = self.apply_braiding_at(
                &self.apply_braiding_at(&self.apply_braiding_at(&e, 3, 0), 3, 1),
                3,
                0,
            );
            let rhs = self.apply_braiding_at(
                &self.apply_braiding_at(&self.apply_braiding_at(&e, 3, 1), 3, 0),
                3,
                1,
            );
            lhs == rhs
        })
    }

    /// Checks every realization invariant; the empty list means valid.
    pub fn realization_violations(&self, real: &Realization) -> Vec<Violation> {
        let field = &self.field;
        let d = self.dim();
        let r = real.rank();
        let mut out = Vec::new();
        if real.orders.len() != r {
            out.push(Violation::Shape { detail: format!("{} orders for {r} generators", real.orders.len()) });
        }
        if real.degrees.len() != d || real.degrees.iter().any(|g| g.len() != r) {
            out.push(Violation::Shape { detail: format!("degrees must be {d} vectors of length {r}") });
        }
        if real.actions.iter().any(|a| a.rows() != d || a.cols() != d) {
            out.push(Violation::Shape { detail: format!("actions must be {d}×{d}") });
        }
        if !out.is_empty() {
            return out;
        }
        for (s, a) in real.actions.iter().enumerate() {
            if a.inverse(field).is_none() {
                out.push(Violation::NotInvertible { generator: s });
            }
        }
        if !out.is_empty() {
            return out;
        }
        for s in 0..r {
            for u in s + 1..r {
                let (a, b) = (&real.actions[s], &real.actions[u]);
                if a.mul(b, field) != b.mul(a, field) {
                    out.push(Violation::NotCommuting { left: s, right: u });
                }
            }
        }
        for (s, (&n, a)) in real.orders.iter().zip(&real.actions).enumerate() {
            if n != 0 && !a.pow(n, field).is_identity() {
                out.push(Violation::WrongOrder { generator: s, order: n });
            }
        }
        let reduce = |g: &[i64]| -> Vec<i64> {
            g.iter()
                .zip(&real.orders)
                .map(|(&e, &n)| if n == 0 { e } else { e.rem_euclid(n as i64) })
                .collect()
        };
        for (s, a) in real.actions.iter().enumerate() {
            for j in 0..d {
                for k in 0..d {
                    if a.get(k, j) != 0 && reduce(&real.degrees[k]) != reduce(&real.degrees[j]) {
                        out.push(Violation::GradingNotPreserved { generator: s, basis: j });
                    }
                }
            }
        }
        for i in 0..d {
            let g = real.degree_action(i, field);
            for j in 0..d {
                let mut expected = vec![0u32; d * d];
                for k in 0..d {
                    expected[k * d + i] = g.get(k, j);
                }
                if self.braiding.column(i * d + j) != expected {
                    out.push(Violation::Incompatible { i, j });
                }
            }
        }
        out
    }

    pub fn validate_realization(&self, real: &Realization) -> Result<(), Violations> {
        let v = self.realization_violations(real);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Violations(v))
        }
    }

    /// The braided subspace spanned by the given basis vectors.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self, BraidedError> {
        let d = self.dim();
        let m = indices.len();
        let pos = |i: usize| indices.iter().position(|&x| x == i);
        let mut c = Matrix::zeros(m * m, m * m);
        for (ai, &i) in indices.iter().enumerate() {
            for (aj, &j) in indices.iter().enumerate() {
                for &(r, v) in &self.columns[i * d + j] {
                    let (Some(ak), Some(al)) = (pos(r / d), pos(r % d)) else {
                        return Err(BraidedError::NotInvariant(indices.to_vec()));
                    };
                    c.set(ak * m + al, ai * m + aj, v);
                }
            }
        }
        let realization = match &self.realization {
            None => None,
            Some(real) => {
                let mut actions = Vec::with_capacity(real.rank());
                for a in &real.actions {
                    let mut sub = Matrix::zeros(m, m);
                    for (aj, &j) in indices.iter().enumerate() {
                        for k in 0..d {
                            let v = a.get(k, j);
                            if v == 0 {
                                continue;
                            }
                            let ak = pos(k).ok_or_else(|| BraidedError::NotInvariant(indices.to_vec()))?;
                            sub.set(ak, aj, v);
                        }
                    }
                    actions.push(sub);
                }
                let degrees = indices.iter().map(|&i| real.degrees[i].clone()).collect();
                Some(Realization { orders: real.orders.clone(), actions, degrees })
            }
        };
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Ok(Self::assemble(&self.field, FamilyParams::Custom, labels, c, realization))
    }

    pub fn to_record(&self) -> BraidedSpaceRecord {
        BraidedSpaceRecord {
            family: self.family(),
            dim: self.dim(),
            labels: self.labels.iter().map(ToString::to_string).collect(),
            field: self.field.spec(),
            params: self.params.to_map(),
            c: self.braiding.to_rows(),
        }
    }
}

/// JSON form of a braided space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraidedSpaceRecord {
    pub family: Family,
    pub dim: usize,
    pub labels: Vec<String>,
    pub field: FieldSpec,
    pub params: BTreeMap<String, String>,
    pub c: Vec<Vec<u32>>,
}
