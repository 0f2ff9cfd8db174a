//! Noncommutative polynomials in the basis of `V`, with the group action,
//! the braided adjoint action of generators and the skew derivations `∂_i`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use thiserror::Error;

use crate::braided::{BasisLabel, BraidedSpace, Realization};
use crate::field::{Field, FieldError, FieldSpec};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeAlgError {
    #[error("polynomials live over different spaces ({0}, dim {1}) and ({2}, dim {3})")]
    SpaceMismatch(FieldSpec, usize, FieldSpec, usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error("the braided space has no realization")]
    NoRealization,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// A word in the basis indices of `V`.
pub type Word = Vec<u8>;

/// Element of the tensor algebra `T(V)`; terms are kept in lexicographic word order.
#[derive(Clone, PartialEq, Eq)]
pub struct NcPoly {
    field: Field,
    dim: usize,
    terms: BTreeMap<Word, u32>,
}

impl fmt::Debug for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<BasisLabel> = (1..=self.dim as u32).map(BasisLabel::int).collect();
        write!(f, "NcPoly({})", self.to_text(&labels))
    }
}

impl NcPoly {
    pub fn zero(space: &BraidedSpace) -> Self {
        Self::zero_in(space.field(), space.dim())
    }

    pub(crate) fn zero_in(field: &Field, dim: usize) -> Self {
        NcPoly { field: field.clone(), dim, terms: BTreeMap::new() }
    }

    pub fn one(space: &BraidedSpace) -> Self {
        Self::monomial(space, &[], 1).expect("empty word")
    }

    /// The generator `x_i`.
    pub fn generator(space: &BraidedSpace, i: usize) -> Self {
        Self::monomial(space, &[i], 1).expect("generator index in range")
    }

    pub fn monomial(space: &BraidedSpace, word: &[usize], coeff: u32) -> Result<Self, FreeAlgError> {
        let mut p = Self::zero(space);
        let mut w = Word::with_capacity(word.len());
        for &i in word {
            if i >= space.dim() {
                return Err(FreeAlgError::Index { index: i, dim: space.dim() });
            }
            w.push(i as u8);
        }
        if !space.field().contains(coeff) {
            return Err(FieldError::MaskOutOfRange { mask: coeff as u64, k: space.field().k() }.into());
        }
        p.add_term(w, coeff);
        Ok(p)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, u32)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, word: &[u8]) -> u32 {
        self.terms.get(word).copied().unwrap_or(0)
    }

    /// Common word length, if all terms have one.
    pub fn degree(&self) -> Option<usize> {
        let mut lens = self.terms.keys().map(Vec::len);
        let first = lens.next()?;
        lens.all(|l| l == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Homogeneous components keyed by word length.
    pub fn components(&self) -> BTreeMap<usize, NcPoly> {
        let mut out: BTreeMap<usize, NcPoly> = BTreeMap::new();
        for (w, &c) in &self.terms {
            out.entry(w.len())
                .or_insert_with(|| Self::zero_in(&self.field, self.dim))
                .terms
                .insert(w.clone(), c);
        }
        out
    }

    pub(crate) fn add_term(&mut self, w: Word, c: u32) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(w);
        match e {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = *o.get() ^ c;
                if v == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    fn check_same(&self, other: &NcPoly) -> Result<(), FreeAlgError> {
        if self.dim != other.dim || self.field != other.field {
            return Err(FreeAlgError::SpaceMismatch(
                self.field.spec(),
                self.dim,
                other.field.spec(),
                other.dim,
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &NcPoly) -> Result<NcPoly, FreeAlgError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (w, &c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    /// Concatenation product.
    pub fn try_mul(&self, other: &NcPoly) -> Result<NcPoly, FreeAlgError> {
        self.check_same(other)?;
        let mut out = Self::zero_in(&self.field, self.dim);
        for (u, &a) in &self.terms {
            for (v, &b) in &other.terms {
                let mut w = Word::with_capacity(u.len() + v.len());
                w.extend_from_slice(u);
                w.extend_from_slice(v);
                out.add_term(w, self.field.mul(a, b));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> NcPoly {
        let mut out = Self::zero_in(&self.field, self.dim);
        for (w, &a) in &self.terms {
            out.add_term(w.clone(), self.field.mul(a, c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> NcPoly {
        let mut acc = Self::zero_in(&self.field, self.dim);
        acc.add_term(Word::new(), 1);
        for _ in 0..e {
            acc = acc.try_mul(self).expect("same space");
        }
        acc
    }

    /// Applies a linear map of `V` to every tensor factor.
    pub fn act_matrix(&self, g: &Matrix) -> NcPoly {
        assert_eq!(g.rows(), self.dim);
        let field = &self.field;
        let images: Vec<Vec<(u8, u32)>> = (0..self.dim)
            .map(|j| {
                (0..self.dim)
                    .filter_map(|k| {
                        let v = g.get(k, j);
                        (v != 0).then_some((k as u8, v))
                    })
                    .collect()
            })
            .collect();
        let mut out = Self::zero_in(field, self.dim);
        for (w, &c) in &self.terms {
            let mut partial: Vec<(Word, u32)> = vec![(Word::with_capacity(w.len()), c)];
            for &letter in w {
                let mut next = Vec::with_capacity(partial.len() * images[letter as usize].len());
                for (pre, pc) in &partial {
                    for &(k, v) in &images[letter as usize] {
                        let mut nw = pre.clone();
                        nw.push(k);
                        next.push((nw, field.mul(*pc, v)));
                    }
                }
                partial = next;
            }
            for (nw, nc) in partial {
                out.add_term(nw, nc);
            }
        }
        out
    }

    /// Group action of `g_1^{e_1} ⋯ g_r^{e_r}`.
    pub fn group_act(&self, real: &Realization, g: &[i64]) -> NcPoly {
        self.act_matrix(&real.element_action(g, &self.field))
    }

    /// `∂_i`, with `∂_i(x_j) = δ_ij` and `∂_i(uv) = ∂_i(u)(g_{deg i}·v) + u ∂_i(v)`.
    pub fn skew_derive(&self, space: &BraidedSpace, i: usize) -> Result<NcPoly, FreeAlgError> {
        let real = space.realization().ok_or(FreeAlgError::NoRealization)?;
        let g = real.degree_action(i, &self.field);
        let field = &self.field;
        let mut out = Self::zero_in(field, self.dim);
        for (w, &c) in &self.terms {
            // right to left, carrying g·(suffix)
            let mut suffix = Self::zero_in(field, self.dim);
            suffix.add_term(Word::new(), c);
            for k in (0..w.len()).rev() {
                if w[k] as usize == i {
                    for (sw, &sc) in &suffix.terms {
                        let mut nw = w[..k].to_vec();
                        nw.extend_from_slice(sw);
                        out.add_term(nw, sc);
                    }
                }
                if k > 0 {
                    let mut letter = Self::zero_in(field, self.dim);
                    letter.add_term(vec![w[k]], 1);
                    suffix = letter.act_matrix(&g).try_mul(&suffix)?;
                }
            }
        }
        Ok(out)
    }

    /// `(ad_c x_i)(p) = x_i p + (g_{deg i}·p) x_i`.
    pub fn ad_c(&self, space: &BraidedSpace, i: usize) -> Result<NcPoly, FreeAlgError> {
        let real = space.realization().ok_or(FreeAlgError::NoRealization)?;
        let x = Self::monomial(space, &[i], 1)?;
        let gp = self.act_matrix(&real.degree_action(i, &self.field));
        x.try_mul(self)?.try_add(&gp.try_mul(&x)?)
    }

    /// `(ad_c x_i)^n (p)`.
    pub fn ad_c_pow(&self, space: &BraidedSpace, i: usize, n: u32) -> Result<NcPoly, FreeAlgError> {
        (0..n).try_fold(self.clone(), |acc, _| acc.ad_c(space, i))
    }

    /// Text form, e.g. `1*2.3 + int:2*3.2`.
    pub fn to_text(&self, labels: &[BasisLabel]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(w, &c)| {
                let word = if w.is_empty() {
                    "()".to_string()
                } else {
                    w.iter().map(|&l| labels[l as usize].to_string()).collect::<Vec<_>>().join(".")
                };
                if c == 1 {
                    format!("1*{word}")
                } else {
                    format!("int:{c}*{word}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn parse(text: &str, space: &BraidedSpace) -> Result<NcPoly, FreeAlgError> {
        let mut p = Self::zero(space);
        let text = text.trim();
        if text == "0" {
            return Ok(p);
        }
        for term in text.split('+') {
            let term = term.trim();
            let (coeff, word) = term
                .split_once('*')
                .ok_or_else(|| FreeAlgError::Parse(format!("term `{term}` lacks `coeff*word`")))?;
            let c = if coeff.trim() == "1" {
                1
            } else {
                space.field().parse_element(coeff.trim())?.mask()
            };
            let word = word.trim();
            let mut w = Word::new();
            if word != "()" {
                for l in word.split('.') {
                    let label: BasisLabel =
                        l.parse().map_err(|_| FreeAlgError::Parse(format!("bad label `{l}`")))?;
                    let idx = space
                        .index_of(label)
                        .ok_or_else(|| FreeAlgError::Parse(format!("unknown label `{l}`")))?;
                    w.push(idx as u8);
                }
            }
            p.add_term(w, c);
        }
        Ok(p)
    }
}

impl Add for &NcPoly {
    type Output = NcPoly;

    /// Panics when the operands live over different spaces; see [`NcPoly::try_add`].
    fn add(self, rhs: &NcPoly) -> NcPoly {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for &NcPoly {
    type Output = NcPoly;

    /// Panics when the operands live over different spaces; see [`NcPoly::try_mul`].
    fn mul(self, rhs: &NcPoly) -> NcPoly {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldElement;
    use proptest::prelude::*;

    fn lstr(f: &Field, p: u32, q22: u32, a: u32) -> BraidedSpace {
        let e = |m| f.element(m).unwrap();
        BraidedSpace::lstr(f, e(p), e(q22), e(a)).unwrap()
    }

    fn x(v: &BraidedSpace, i: usize) -> NcPoly {
        NcPoly::generator(v, i)
    }

    #[test]
    fn products() {
        let f = Field::gf2();
        let v = BraidedSpace::jordan(&f);
        let (x1, x2) = (x(&v, 0), x(&v, 1));
        assert_eq!((&x1 * &x2).coeff(&[0, 1]), 1);
        let p = &(&x1 + &x2) * &x1;
        assert_eq!(p.len(), 2);
        assert_eq!(p.coeff(&[0, 0]), 1);
        assert_eq!(p.coeff(&[1, 0]), 1);
        assert!((&x1 * &NcPoly::zero(&v)).is_zero());
        assert!((&x1 + &x1).is_zero());
    }

    #[test]
    fn mismatch_is_an_error() {
        let f = Field::gf2();
        let v = BraidedSpace::jordan(&f);
        let w = lstr(&f, 1, 1, 1);
        assert!(matches!(x(&v, 0).try_mul(&x(&w, 0)), Err(FreeAlgError::SpaceMismatch(..))));
    }

    #[test]
    fn group_action_examples() {
        let f = Field::new(2).unwrap();
        let v = lstr(&f, 2, 3, 1);
        let real = v.realization().unwrap();
        let (x1, x2, x3) = (x(&v, 0), x(&v, 1), x(&v, 2));
        assert_eq!(x2.group_act(real, &[1, 0]), &x1 + &x2);
        let s = &x1 + &x2;
        assert_eq!((&x2 * &x2).group_act(real, &[1, 0]), &s * &s);
        let pale = BraidedSpace::pale(&f, f.element(2).unwrap(), f.element(3).unwrap()).unwrap();
        let y3 = x(&pale, 2);
        assert_eq!(y3.group_act(pale.realization().unwrap(), &[0, 1]), y3.scale(3));
        // inverse element undoes the action
        let p = &(&x2 * &x3) + &x1;
        assert_eq!(p.group_act(real, &[2, -1]).group_act(real, &[-2, 1]), p);
    }

    #[test]
    fn adjoint_examples() {
        let f = Field::new(2).unwrap();
        let (p, a) = (2, 3);
        let v = lstr(&f, p, 1, a);
        let (x2, x3) = (x(&v, 1), x(&v, 2));
        let z1 = x3.ad_c(&v, 1).unwrap();
        assert_eq!(z1, &(&x2 * &x3) + &(&x3 * &x2).scale(p));
        assert!(x(&v, 0).ad_c(&v, 0).unwrap().is_zero());
        // ∂3(z1) = a x1
        assert_eq!(z1.skew_derive(&v, 2).unwrap(), x(&v, 0).scale(a));
        let z2 = z1.ad_c(&v, 1).unwrap();
        let x21 = &(&x(&v, 0) * &x2) + &(&x2 * &x(&v, 0));
        // equal up to a multiple of x1², which vanishes in the Nichols algebra
        let diff = &z2.skew_derive(&v, 2).unwrap() + &x21.scale(a);
        assert!(diff.terms().all(|(w, _)| w == &vec![0, 0]));
    }

    #[test]
    fn poseidon_adjoint_is_s_e1() {
        let f = Field::gf2();
        let one = f.element(1).unwrap();
        let q = vec![vec![one; 3]; 3];
        let v = BraidedSpace::poseidon(&f, &q, &[one, one]).unwrap();
        let s = x(&v, 4).ad_c(&v, 1).unwrap();
        let expected = &(&x(&v, 1) * &x(&v, 4)) + &(&x(&v, 4) * &x(&v, 1));
        assert_eq!(s, expected);
    }

    #[test]
    fn derivation_basics() {
        let f = Field::gf2();
        let v = BraidedSpace::jordan(&f);
        assert_eq!(x(&v, 0).skew_derive(&v, 0).unwrap(), NcPoly::one(&v));
        assert!(x(&v, 0).skew_derive(&v, 1).unwrap().is_zero());
        let mut p = NcPoly::monomial(&v, &[1, 1, 0], 1).unwrap();
        p = &p + &NcPoly::monomial(&v, &[0, 1], 1).unwrap();
        assert!(!p.is_homogeneous());
        assert_eq!(p.components().len(), 2);
    }

    #[test]
    fn text_round_trip() {
        let f = Field::new(2).unwrap();
        let v = lstr(&f, 2, 1, 1);
        let p = NcPoly::parse("1*2.3 + int:2*3.2", &v).unwrap();
        assert_eq!(p.to_text(v.labels()), "1*2.3 + int:2*3.2");
        assert_eq!(NcPoly::zero(&v).to_text(v.labels()), "0");
        assert_eq!(NcPoly::one(&v).to_text(v.labels()), "1*()");
        assert!(NcPoly::parse("1*9", &v).is_err());
        let one = f.element(1).unwrap();
        let q = vec![vec![one; 3]; 3];
        let ps = BraidedSpace::poseidon(&f, &q, &[one, one]).unwrap();
        let s = NcPoly::parse("1*1h.3 + 1*3.1h", &ps).unwrap();
        assert_eq!(s.to_text(ps.labels()), "1*1h.3 + 1*3.1h");
    }

    fn random_poly(v: &BraidedSpace, seeds: &[(Vec<u8>, u32)]) -> NcPoly {
        let mut p = NcPoly::zero(v);
        let n = v.field().size() as u32;
        for (w, c) in seeds {
            let w: Vec<usize> = w.iter().map(|&l| l as usize % v.dim()).collect();
            p = &p + &NcPoly::monomial(v, &w, c % n).unwrap();
        }
        p
    }

    fn spaces(sel: u32) -> BraidedSpace {
        let f = Field::new(2).unwrap();
        let e = |m| f.element(m).unwrap();
        match sel % 3 {
            0 => lstr(&f, 2, 3, 3),
            1 => BraidedSpace::pale(&f, e(3), e(2)).unwrap(),
            _ => {
                let q = vec![vec![e(1), e(2), e(3)], vec![e(3), e(1), e(2)], vec![e(2), e(3), e(1)]];
                BraidedSpace::poseidon(&f, &q, &[e(1), e(3)]).unwrap()
            }
        }
    }

    fn term_strategy() -> impl Strategy<Value = Vec<(Vec<u8>, u32)>> {
        proptest::collection::vec((proptest::collection::vec(any::<u8>(), 0..4), any::<u32>()), 0..5)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn leibniz(sel in any::<u32>(), a in term_strategy(), b in term_strategy(), i in any::<usize>()) {
            let v = spaces(sel);
            let i = i % v.dim();
            let (p, q) = (random_poly(&v, &a), random_poly(&v, &b));
            let g = v.realization().unwrap().degree_action(i, v.field());
            let lhs = (&p * &q).skew_derive(&v, i).unwrap();
            let rhs = &(&p.skew_derive(&v, i).unwrap() * &q.act_matrix(&g)) + &(&p * &q.skew_derive(&v, i).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn action_is_multiplicative(sel in any::<u32>(), a in term_strategy(), b in term_strategy(), g in proptest::collection::vec(-3i64..4, 3), h in proptest::collection::vec(-3i64..4, 3)) {
            let v = spaces(sel);
            let real = v.realization().unwrap();
            let r = real.rank();
            let (g, h) = (&g[..r], &h[..r]);
            let (p, q) = (random_poly(&v, &a), random_poly(&v, &b));
            prop_assert_eq!((&p * &q).group_act(real, g), &p.group_act(real, g) * &q.group_act(real, g));
            let gh: Vec<i64> = g.iter().zip(h).map(|(x, y)| x + y).collect();
            prop_assert_eq!(p.group_act(real, &gh), p.group_act(real, h).group_act(real, g));
        }

        #[test]
        fn adjoint_is_an_algebra_map(k in 1u32..=4, q in any::<u32>(), a in term_strategy()) {
            // (ad x_1)^2 = ad(x_1^2) for a point with q_11 = 1
            let f = Field::new(k).unwrap();
            let q12 = q % (f.size() as u32 - 1) + 1;
            let e = |m| f.element(m).unwrap();
            let qm: Vec<Vec<FieldElement>> = vec![vec![e(1), e(q12)], vec![e(q12), e(1)]];
            let v = BraidedSpace::diagonal(&f, &qm).unwrap();
            let p = random_poly(&v, &a);
            let x1 = NcPoly::generator(&v, 0);
            let x11 = &x1 * &x1;
            let real = v.realization().unwrap();
            let expected = &(&x11 * &p) + &(&p.group_act(real, &[2, 0]) * &x11);
            prop_assert_eq!(p.ad_c(&v, 0).unwrap().ad_c(&v, 0).unwrap(), expected);
        }
    }
}
