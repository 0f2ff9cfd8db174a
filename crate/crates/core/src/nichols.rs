//! Graded dimensions of Nichols algebras via the skew-derivation zero criterion.
//!
//! Degree by degree, every product `b·x_j` of a basis element of `𝔅^{n-1}` with a
//! generator is fingerprinted by `(∂_1(b x_j), …, ∂_θ(b x_j))`, written in the basis
//! of `𝔅^{n-1}`. An element of positive degree vanishes iff its fingerprint does,
//! so a maximal independent set of fingerprints is a basis of `𝔅^n`. Candidates
//! are scanned in `(b, j)` order and the first independent ones win.
//!
//! Everything is homogeneous for the grading by the group of the realization, so
//! the elimination splits into independent blocks, one per group degree. Greedy
//! selection inside each block picks exactly the vectors a single global scan
//! would, which keeps the result independent of how blocks are scheduled.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braided::{BraidedSpace, Family, Violations};
use crate::field::{Field, FieldSpec};
use crate::freealg::{FreeAlgError, NcPoly};
use crate::linalg::{axpy, Insertion, Matrix, SparseIncrementalBasis};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NicholsError {
    #[error("the braided space has no realization")]
    NoRealization,
    #[error("invalid realization: {0}")]
    InvalidRealization(Violations),
    #[error("max_degree must be positive")]
    ZeroMaxDegree,
    #[error("degree {degree} is beyond the computed range (truncated at {computed})")]
    DegreeOutOfRange { degree: usize, computed: usize },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("dim^n = {size} exceeds the symmetrizer guard of {limit}")]
    SizeGuard { size: u64, limit: u64 },
    #[error(transparent)]
    FreeAlg(#[from] FreeAlgError),
}

/// Whether the computation reached a vanishing degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Finite,
    Truncated(usize),
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Finite => "finite",
            Status::Truncated(_) => "truncated",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

type Sparse = Vec<(u32, u32)>;

/// A basis element `parent · x_gen` of the next degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Element {
    parent: u32,
    generator: u8,
}

/// Interned group degrees with cached addition of generator degrees.
struct Grades {
    orders: Vec<u64>,
    gen_degrees: Vec<Vec<i64>>,
    ids: HashMap<Vec<i64>, u32>,
    values: Vec<Vec<i64>>,
}

impl Grades {
    fn new(orders: Vec<u64>, gen_degrees: Vec<Vec<i64>>) -> Self {
        let mut g = Grades { orders, gen_degrees, ids: HashMap::new(), values: Vec::new() };
        let zero = vec![0; g.orders.len()];
        g.intern(zero);
        g
    }

    fn intern(&mut self, v: Vec<i64>) -> u32 {
        let v: Vec<i64> = v
            .into_iter()
            .zip(&self.orders)
            .map(|(e, &n)| if n == 0 { e } else { e.rem_euclid(n as i64) })
            .collect();
        if let Some(&id) = self.ids.get(&v) {
            return id;
        }
        let id = self.values.len() as u32;
        self.ids.insert(v.clone(), id);
        self.values.push(v);
        id
    }

    fn shift(&mut self, g: u32, j: usize, sign: i64) -> u32 {
        let v: Vec<i64> = self.values[g as usize]
            .iter()
            .zip(&self.gen_degrees[j])
            .map(|(a, b)| a + sign * b)
            .collect();
        self.intern(v)
    }
}

/// Bases, derivations and right multiplications of `𝔅(V)` degree by degree.
pub struct GradedBasis {
    space: BraidedSpace,
    elements: Vec<Vec<Element>>,
    grades: Vec<Vec<u32>>,
    /// `deriv[n][β][i] = ∂_i(β)` in the basis of degree `n - 1`
    deriv: Vec<Vec<Vec<Sparse>>>,
    /// `mult[n][b][j] = b · x_j` in the basis of degree `n + 1`
    mult: Vec<Vec<Vec<Sparse>>>,
    status: Status,
}

struct BlockOutcome {
    /// global candidate index and its result
    results: Vec<(usize, Insertion)>,
    /// fingerprints of the kept candidates, in global coordinates
    kept: Vec<Vec<Sparse>>,
}

impl GradedBasis {
    /// Runs the engine up to `max_degree`, stopping early at the first vanishing degree.
    pub fn compute(space: &BraidedSpace, max_degree: usize) -> Result<Self, NicholsError> {
        if max_degree == 0 {
            return Err(NicholsError::ZeroMaxDegree);
        }
        let real = space.realization().ok_or(NicholsError::NoRealization)?;
        space.validate_realization(real).map_err(NicholsError::InvalidRealization)?;
        let field = space.field();
        let theta = space.dim();
        // act[i][j] = g_{deg i} · x_j
        let act: Vec<Vec<Vec<(usize, u32)>>> = (0..theta)
            .map(|i| {
                let g = real.degree_action(i, field);
                (0..theta)
                    .map(|j| (0..theta).filter_map(|k| {
                        let v = g.get(k, j);
                        (v != 0).then_some((k, v))
                    }).collect())
                    .collect()
            })
            .collect();
        let mut grades = Grades::new(real.orders.clone(), real.degrees.clone());
        let mut gb = GradedBasis {
            space: space.clone(),
            elements: vec![vec![Element { parent: 0, generator: 0 }]],
            grades: vec![vec![0]],
            deriv: vec![vec![vec![Vec::new(); theta]]],
            mult: Vec::new(),
            status: Status::Truncated(max_degree),
        };
        for n in 1..=max_degree {
            gb.extend(n, &act, &mut grades, field);
            if gb.elements[n].is_empty() {
                gb.status = Status::Finite;
                gb.elements.pop();
                gb.grades.pop();
                gb.deriv.pop();
                break;
            }
        }
        Ok(gb)
    }

    fn extend(&mut self, n: usize, act: &[Vec<Vec<(usize, u32)>>], grades: &mut Grades, field: &Field) {
        let theta = self.space.dim();
        let prev = n - 1;
        let prev_len = self.elements[prev].len();

        // group degree -> elements of degree n - 1, and position of each inside its group
        let mut by_grade: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut pos_in_grade = vec![0u32; prev_len];
        for (b, &g) in self.grades[prev].iter().enumerate() {
            let list = by_grade.entry(g).or_default();
            pos_in_grade[b] = list.len() as u32;
            list.push(b as u32);
        }

        // candidates per block, in global order
        let mut blocks: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let mut cand_grade = Vec::with_capacity(prev_len * theta);
        for b in 0..prev_len {
            for j in 0..theta {
                let g = grades.shift(self.grades[prev][b], j, 1);
                cand_grade.push(g);
                blocks.entry(g).or_default().push(b * theta + j);
            }
        }
        // column layout of each block: generator i owns the elements of grade γ - deg x_i
        let layouts: Vec<(u32, Vec<usize>, Vec<Option<u32>>)> = blocks
            .keys()
            .map(|&g| {
                let mut offsets = Vec::with_capacity(theta + 1);
                let mut col_grade = Vec::with_capacity(theta);
                let mut total = 0;
                for i in 0..theta {
                    offsets.push(total);
                    let h = grades.shift(g, i, -1);
                    let len = by_grade.get(&h).map_or(0, Vec::len);
                    col_grade.push(by_grade.contains_key(&h).then_some(h));
                    total += len;
                }
                offsets.push(total);
                (g, offsets, col_grade)
            })
            .collect();

        let deriv_prev = &self.deriv[prev];
        let mult_pp = if n >= 2 { Some(&self.mult[n - 2]) } else { None };
        let by_grade = &by_grade;
        let pos_in_grade = &pos_in_grade;

        let outcomes: Vec<BlockOutcome> = layouts
            .par_iter()
            .map(|(g, offsets, col_grade)| {
                let cands = &blocks[g];
                let ncols = offsets[theta];
                let col_lists: Vec<&[u32]> = col_grade
                    .iter()
                    .map(|h| h.map_or(&[][..], |h| by_grade[&h].as_slice()))
                    .collect();
                let mut basis = SparseIncrementalBasis::new(field, ncols as usize);
                let mut results = Vec::with_capacity(cands.len());
                let mut kept = Vec::new();
                let mut fp: Sparse = Vec::new();
                for &cand in cands {
                    let (b, j) = (cand / theta, cand % theta);
                    fp.clear();
                    for i in 0..theta {
                        let off = offsets[i] as u32;
                        if let Some(mult_pp) = mult_pp {
                            for &(bb, c) in &deriv_prev[b][i] {
                                for &(k, a) in &act[i][j] {
                                    let ca = field.mul(c, a);
                                    for &(beta, m) in &mult_pp[bb as usize][k] {
                                        fp.push((off + pos_in_grade[beta as usize], field.mul(ca, m)));
                                    }
                                }
                            }
                        }
                        if i == j {
                            fp.push((off + pos_in_grade[b], 1));
                        }
                    }
                    let res = basis.insert(&fp);
                    if matches!(res, Insertion::New(_)) {
                        fp.sort_unstable_by_key(|e| e.0);
                        let mut merged: Sparse = Vec::with_capacity(fp.len());
                        for &(c, v) in &fp {
                            match merged.last_mut() {
                                Some(last) if last.0 == c => last.1 ^= v,
                                _ => merged.push((c, v)),
                            }
                        }
                        let mut per_gen: Vec<Sparse> = vec![Vec::new(); theta];
                        for (c, v) in merged.into_iter().filter(|e| e.1 != 0) {
                            let i = offsets.partition_point(|&o| o <= c as usize) - 1;
                            per_gen[i].push((col_lists[i][c as usize - offsets[i]], v));
                        }
                        kept.push(per_gen);
                    }
                    results.push((cand, res));
                }
                BlockOutcome { results, kept }
            })
            .collect();

        // global basis order follows the candidate order
        let mut new_elems: Vec<(usize, usize, usize)> = Vec::new(); // (cand, block, local)
        for (bi, out) in outcomes.iter().enumerate() {
            for (cand, res) in &out.results {
                if let Insertion::New(local) = res {
                    new_elems.push((*cand, bi, *local));
                }
            }
        }
        new_elems.sort_unstable();
        let mut global_of: Vec<Vec<u32>> = outcomes.iter().map(|o| vec![0; o.kept.len()]).collect();
        let mut elements = Vec::with_capacity(new_elems.len());
        let mut elem_grades = Vec::with_capacity(new_elems.len());
        let mut deriv = Vec::with_capacity(new_elems.len());
        for (beta, &(cand, bi, local)) in new_elems.iter().enumerate() {
            global_of[bi][local] = beta as u32;
            elements.push(Element { parent: (cand / theta) as u32, generator: (cand % theta) as u8 });
            elem_grades.push(cand_grade[cand]);
            deriv.push(outcomes[bi].kept[local].clone());
        }
        let mut mult = vec![vec![Sparse::new(); theta]; prev_len];
        for (bi, out) in outcomes.iter().enumerate() {
            for (cand, res) in &out.results {
                let (b, j) = (cand / theta, cand % theta);
                mult[b][j] = match res {
                    Insertion::New(local) => vec![(global_of[bi][*local], 1)],
                    Insertion::Dependent(coords) => {
                        let mut v: Sparse = coords
                            .iter()
                            .enumerate()
                            .filter(|(_, &c)| c != 0)
                            .map(|(l, &c)| (global_of[bi][l], c))
                            .collect();
                        v.sort_unstable();
                        v
                    }
                };
            }
        }
        self.elements.push(elements);
        self.grades.push(elem_grades);
        self.deriv.push(deriv);
        self.mult.push(mult);
    }

    pub fn space(&self) -> &BraidedSpace {
        &self.space
    }

    pub fn status(&self) -> Status {
        self.status
    }

    /// Highest degree with a nonzero component among those computed.
    pub fn top_degree(&self) -> usize {
        self.elements.len() - 1
    }

    /// Dimension of `𝔅^n`; zero beyond the top degree of a finite algebra.
    pub fn dim(&self, n: usize) -> Result<usize, NicholsError> {
        if n < self.elements.len() {
            Ok(self.elements[n].len())
        } else {
            self.check_degree(n).map(|_| 0)
        }
    }

    fn check_degree(&self, n: usize) -> Result<(), NicholsError> {
        match self.status {
            Status::Truncated(m) if n > m => Err(NicholsError::DegreeOutOfRange { degree: n, computed: m }),
            _ => Ok(()),
        }
    }

    pub fn dims(&self) -> Vec<u64> {
        self.elements.iter().map(|e| e.len() as u64).collect()
    }

    pub fn hilbert(&self) -> HilbertSeries {
        let dims = self.dims();
        let total = match self.status {
            Status::Finite => Some(dims.iter().sum()),
            Status::Truncated(_) => None,
        };
        HilbertSeries { dims, total, status: self.status }
    }

    /// The word `w` with basis element `β = w` (product of generators).
    pub fn basis_word(&self, n: usize, beta: usize) -> Vec<u8> {
        let mut w = Vec::with_capacity(n);
        let mut b = beta;
        for m in (1..=n).rev() {
            let e = self.elements[m][b];
            w.push(e.generator);
            b = e.parent as usize;
        }
        w.reverse();
        w
    }

    /// Hilbert series with generator `x_i` of weight `weights[i]`.
    pub fn weighted_dims(&self, weights: &[usize]) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        let mut prev: Vec<usize> = vec![0];
        for n in 0..self.elements.len() {
            let cur: Vec<usize> = if n == 0 {
                vec![0]
            } else {
                self.elements[n]
                    .iter()
                    .map(|e| prev[e.parent as usize] + weights[e.generator as usize])
                    .collect()
            };
            for &w in &cur {
                if out.len() <= w {
                    out.resize(w + 1, 0);
                }
                out[w] += 1;
            }
            prev = cur;
        }
        out
    }

    /// Right multiplication by `x_j` on coordinates of degree `n`.
    pub fn act_right(&self, n: usize, v: &[u32], j: usize) -> Result<Vec<u32>, NicholsError> {
        self.check_degree(n + 1)?;
        let field = self.space.field();
        if n >= self.mult.len() {
            return Ok(Vec::new());
        }
        let mut out = vec![0u32; self.dim(n + 1)?];
        for (b, &c) in v.iter().enumerate() {
            if c != 0 {
                for &(beta, m) in &self.mult[n][b][j] {
                    out[beta as usize] ^= field.mul(c, m);
                }
            }
        }
        Ok(out)
    }

    /// `∂_i` on coordinates of degree `n ≥ 1`.
    pub fn derive(&self, n: usize, v: &[u32], i: usize) -> Vec<u32> {
        let field = self.space.field();
        let mut out = vec![0u32; self.elements[n - 1].len()];
        for (beta, &c) in v.iter().enumerate() {
            if c != 0 {
                for &(b, d) in &self.deriv[n][beta][i] {
                    out[b as usize] ^= field.mul(c, d);
                }
            }
        }
        out
    }

    /// Dense `∂_i : 𝔅^n → 𝔅^{n-1}` (columns indexed by the degree-`n` basis).
    pub fn derivation_matrix(&self, n: usize, i: usize) -> Matrix {
        let mut m = Matrix::zeros(self.elements[n - 1].len(), self.elements[n].len());
        for (beta, d) in self.deriv[n].iter().enumerate() {
            for &(b, c) in &d[i] {
                m.set(b as usize, beta, c);
            }
        }
        m
    }

    /// Dense right multiplication `𝔅^n → 𝔅^{n+1}` by `x_j`.
    pub fn multiplication_matrix(&self, n: usize, j: usize) -> Matrix {
        let rows = self.elements.get(n + 1).map_or(0, Vec::len);
        let mut m = Matrix::zeros(rows, self.elements[n].len());
        if let Some(mult) = self.mult.get(n) {
            for (b, v) in mult.iter().enumerate() {
                for &(beta, c) in &v[j] {
                    m.set(beta as usize, b, c);
                }
            }
        }
        m
    }

    /// Image in `𝔅^d` of a homogeneous polynomial of degree `d`.
    pub fn project(&self, p: &NcPoly) -> Result<Vec<u32>, NicholsError> {
        if p.field() != self.space.field() || p.dim() != self.space.dim() {
            return Err(FreeAlgError::SpaceMismatch(
                p.field().spec(),
                p.dim(),
                self.space.field().spec(),
                self.space.dim(),
            )
            .into());
        }
        let Some(d) = p.degree() else {
            return if p.is_zero() { Ok(vec![1; 0]) } else { Err(NicholsError::NotHomogeneous) };
        };
        self.check_degree(d)?;
        if d >= self.elements.len() {
            return Ok(Vec::new());
        }
        let field = self.space.field();
        let mut out = vec![0u32; self.elements[d].len()];
        // stack[m] = image of the first m letters of the previous word
        let mut stack: Vec<Vec<u32>> = vec![vec![1]];
        let mut last: &[u8] = &[];
        for (w, c) in p.terms() {
            let common = w.iter().zip(last).take_while(|(a, b)| a == b).count();
            stack.truncate(common + 1);
            for m in common..d {
                let next = {
                    let v = &stack[m];
                    let mut next = vec![0u32; self.elements[m + 1].len()];
                    for (b, &x) in v.iter().enumerate() {
                        if x != 0 {
                            for &(beta, y) in &self.mult[m][b][w[m] as usize] {
                                next[beta as usize] ^= field.mul(x, y);
                            }
                        }
                    }
                    next
                };
                stack.push(next);
            }
            axpy(field, &mut out, c, &stack[d]);
            last = w;
        }
        Ok(out)
    }

    /// Whether `p` vanishes in `𝔅(V)`, component by component.
    pub fn is_zero_in_nichols(&self, p: &NcPoly) -> Result<bool, NicholsError> {
        for comp in p.components().values() {
            if self.project(comp)?.iter().any(|&x| x != 0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn report(&self) -> HilbertReport {
        let h = self.hilbert();
        HilbertReport {
            family: self.space.family(),
            field: self.space.field_spec(),
            params: self.space.params().to_map(),
            dims: h.dims,
            total: h.total,
            status: h.status.as_str().to_string(),
            top_degree: self.top_degree(),
        }
    }
}

/// Graded dimensions of `𝔅(V)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSeries {
    pub dims: Vec<u64>,
    pub total: Option<u64>,
    pub status: Status,
}

/// JSON form of a Hilbert series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertReport {
    pub family: Family,
    pub field: FieldSpec,
    pub params: BTreeMap<String, String>,
    pub dims: Vec<u64>,
    pub total: Option<u64>,
    pub status: String,
    pub top_degree: usize,
}

/// Product of two polynomials given by coefficient lists.
pub fn poly_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    while out.len() > 1 && out.last() == Some(&0) {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldElement;

    fn e(f: &Field, m: u32) -> FieldElement {
        f.element(m).unwrap()
    }

    fn x(v: &BraidedSpace, i: usize) -> NcPoly {
        NcPoly::generator(v, i)
    }

    #[test]
    fn jordan_plane() {
        let f = Field::gf2();
        let v = BraidedSpace::jordan(&f);
        let gb = GradedBasis::compute(&v, 10).unwrap();
        assert_eq!(gb.status(), Status::Finite);
        assert_eq!(gb.dims(), vec![1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(gb.hilbert().total, Some(16));
        let (x1, x2) = (x(&v, 0), x(&v, 1));
        assert!(gb.is_zero_in_nichols(&(&x1 * &x1)).unwrap());
        let x21 = &(&x1 * &x2) + &(&x2 * &x1);
        assert!(!gb.is_zero_in_nichols(&x21).unwrap());
        let r = &(&(&x2 * &x2) * &x1) + &(&(&x1 * &x2) * &x2);
        let r = &r + &(&(&x1 * &x2) * &x1);
        assert!(gb.is_zero_in_nichols(&r).unwrap());
        let r = &(&(&x1 * &x2) * &(&x1 * &x2)) + &(&(&x2 * &x1) * &(&x2 * &x1));
        assert!(gb.is_zero_in_nichols(&r).unwrap());
        assert!(!gb.is_zero_in_nichols(&(&x2 * &x2)).unwrap());
        assert!(gb.is_zero_in_nichols(&x2.pow(4)).unwrap());
        assert_eq!(gb.project(&x1).unwrap(), vec![1, 0]);
    }

    #[test]
    fn points() {
        let f4 = Field::new(2).unwrap();
        let w = f4.element_of_order(3).unwrap();
        let v = BraidedSpace::diagonal(&f4, &[vec![e(&f4, w)]]).unwrap();
        let gb = GradedBasis::compute(&v, 10).unwrap();
        assert_eq!(gb.dims(), vec![1, 1, 1]);
        let f = Field::gf2();
        let v = BraidedSpace::diagonal(&f, &[vec![e(&f, 1)]]).unwrap();
        let gb = GradedBasis::compute(&v, 10).unwrap();
        assert_eq!(gb.dims(), vec![1, 1]);
        assert_eq!(gb.hilbert().total, Some(2));
    }

    #[test]
    fn truncation_is_reported() {
        let f4 = Field::new(2).unwrap();
        // x_1 with q_11 = 1 and x_2 with q_22 = ω, q_12 q_21 = ω: not of finite type in our range
        let q = vec![vec![e(&f4, 1), e(&f4, 2)], vec![e(&f4, 1), e(&f4, 1)]];
        let v = BraidedSpace::diagonal(&f4, &q).unwrap();
        let gb = GradedBasis::compute(&v, 4).unwrap();
        assert_eq!(gb.status(), Status::Truncated(4));
        assert_eq!(gb.hilbert().total, None);
        assert!(matches!(
            gb.project(&x(&v, 0).pow(5)),
            Err(NicholsError::DegreeOutOfRange { degree: 5, computed: 4 })
        ));
    }

    #[test]
    fn structural_invariants() {
        let f4 = Field::new(2).unwrap();
        let spaces = vec![
            BraidedSpace::lstr(&f4, e(&f4, 2), e(&f4, 1), e(&f4, 3)).unwrap(),
            BraidedSpace::pale(&f4, e(&f4, 3), e(&f4, 2)).unwrap(),
        ];
        for v in spaces {
            let gb = GradedBasis::compute(&v, 30).unwrap();
            assert_eq!(gb.status(), Status::Finite);
            let top = gb.top_degree();
            for n in 1..=top {
                // zero criterion: stacked derivations are injective
                let rows: Vec<Vec<u32>> = (0..v.dim())
                    .flat_map(|i| gb.derivation_matrix(n, i).to_rows())
                    .collect();
                let rank = crate::linalg::Matrix::from_rows(&rows).rank(v.field());
                assert_eq!(rank, gb.dim(n).unwrap());
                // basis words project to unit vectors
                for beta in 0..gb.dim(n).unwrap() {
                    let w: Vec<usize> = gb.basis_word(n, beta).iter().map(|&l| l as usize).collect();
                    let p = NcPoly::monomial(&v, &w, 1).unwrap();
                    let mut unit = vec![0; gb.dim(n).unwrap()];
                    unit[beta] = 1;
                    assert_eq!(gb.project(&p).unwrap(), unit);
                }
            }
            for j in 0..v.dim() {
                assert!(gb.multiplication_matrix(top, j).is_zero());
            }
        }
    }

    #[test]
    fn nichols_level_identities() {
        let f4 = Field::new(2).unwrap();
        let v = BraidedSpace::lstr(&f4, e(&f4, 2), e(&f4, 1), e(&f4, 3)).unwrap();
        let gb = GradedBasis::compute(&v, 30).unwrap();
        let z2 = x(&v, 2).ad_c_pow(&v, 1, 2).unwrap();
        let x21 = &(&x(&v, 0) * &x(&v, 1)) + &(&x(&v, 1) * &x(&v, 0));
        let lhs = &z2.skew_derive(&v, 2).unwrap() + &x21.scale(3);
        assert!(gb.is_zero_in_nichols(&lhs).unwrap());
        // a unit point is killed by its own adjoint squared
        let f = Field::gf2();
        let one = e(&f, 1);
        let d = BraidedSpace::diagonal(&f, &[vec![one, one], vec![one, one]]).unwrap();
        let gd = GradedBasis::compute(&d, 10).unwrap();
        let p = x(&d, 1).ad_c_pow(&d, 0, 2).unwrap();
        assert!(gd.is_zero_in_nichols(&p).unwrap());
    }

    #[test]
    fn project_is_multiplicative() {
        let f4 = Field::new(2).unwrap();
        let v = BraidedSpace::pale(&f4, e(&f4, 2), e(&f4, 3)).unwrap();
        let gb = GradedBasis::compute(&v, 30).unwrap();
        let p = &(&x(&v, 0) * &x(&v, 2)) + &(&x(&v, 2) * &x(&v, 1)).scale(2);
        let q = &(&x(&v, 1) * &x(&v, 2)) + &x(&v, 2).pow(2);
        let direct = gb.project(&(&p * &q)).unwrap();
        let mut folded = vec![0u32; gb.dim(4).unwrap()];
        let pp = gb.project(&p).unwrap();
        for (w, c) in q.terms() {
            let mut acc = pp.clone();
            for (m, &l) in w.iter().enumerate() {
                acc = gb.act_right(2 + m, &acc, l as usize).unwrap();
            }
            axpy(v.field(), &mut folded, c, &acc);
        }
        assert_eq!(direct, folded);
    }

    #[test]
    fn deterministic() {
        let f4 = Field::new(2).unwrap();
        let v = BraidedSpace::lstr(&f4, e(&f4, 2), e(&f4, 1), e(&f4, 3)).unwrap();
        let a = GradedBasis::compute(&v, 30).unwrap();
        let b = GradedBasis::compute(&v, 30).unwrap();
        assert_eq!(a.deriv, b.deriv);
        assert_eq!(a.mult, b.mult);
        assert_eq!(a.elements, b.elements);
    }

    #[test]
    fn weighted_series() {
        let f = Field::gf2();
        let one = e(&f, 1);
        let d = BraidedSpace::diagonal(&f, &[vec![one, one], vec![one, one]]).unwrap();
        let gb = GradedBasis::compute(&d, 10).unwrap();
        assert_eq!(gb.dims(), vec![1, 2, 1]);
        assert_eq!(gb.weighted_dims(&[1, 3]), vec![1, 1, 0, 1, 1]);
        assert_eq!(poly_mul(&[1, 1], &[1, 1]), vec![1, 2, 1]);
    }
}
