//! Dense linear algebra over GF(2^k).

use crate::field::Field;

/// `y += c * x` over the field.
#[inline]
pub(crate) fn axpy(field: &Field, y: &mut [u32], c: u32, x: &[u32]) {
    debug_assert_eq!(y.len(), x.len());
    match c {
        0 => {}
        1 => {
            for (a, b) in y.iter_mut().zip(x) {
                *a ^= *b;
            }
        }
        _ => match field.mul_row(c) {
            Some(row) => {
                for (a, b) in y.iter_mut().zip(x) {
                    *a ^= row[*b as usize];
                }
            }
            None => {
                for (a, b) in y.iter_mut().zip(x) {
                    if *b != 0 {
                        *a ^= field.mul(c, *b);
                    }
                }
            }
        },
    }
}

#[inline]
pub(crate) fn scale(field: &Field, y: &mut [u32], c: u32) {
    if let Some(row) = field.mul_row(c) {
        for a in y.iter_mut() {
            *a = row[*a as usize];
        }
    } else if c != 1 {
        for a in y.iter_mut() {
            *a = field.mul(c, *a);
        }
    }
}

/// Row-major dense matrix of field elements (raw masks).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul(&self, other: &Matrix, field: &Field) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in matrix product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a != 0 {
                    axpy(field, dst, a, other.row(l));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[u32], field: &Field) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| acc ^ field.mul(a, b))
            })
            .collect()
    }

    pub fn pow(&self, mut e: u64, field: &Field) -> Matrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, field);
            }
            base = base.mul(&base, field);
            e >>= 1;
        }
        acc
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self, field: &Field) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.to_rows();
        let mut b = Matrix::identity(n).to_rows();
        for col in 0..n {
            let p = (col..n).find(|&r| a[r][col] != 0)?;
            a.swap(col, p);
            b.swap(col, p);
            let inv = field.inv_nonzero(a[col][col]);
            scale(field, &mut a[col], inv);
            scale(field, &mut b[col], inv);
            for r in 0..n {
                if r != col && a[r][col] != 0 {
                    let c = a[r][col];
                    let (pa, pb) = (a[col].clone(), b[col].clone());
                    axpy(field, &mut a[r], c, &pa);
                    axpy(field, &mut b[r], c, &pb);
                }
            }
        }
        Some(Matrix::from_rows(&b))
    }

    pub fn rank(&self, field: &Field) -> usize {
        rank_of_rows(self.to_rows(), field)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self.get(r, c) == u32::from(r == c)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix, field: &Field) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, field.mul(a, other.get(k, l)));
                    }
                }
            }
        }
        out
    }
}

/// Rank of a list of equally long rows.
pub fn rank_of_rows(mut rows: Vec<Vec<u32>>, field: &Field) -> usize {
    let Some(ncols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = field.inv_nonzero(rows[rank][col]);
        scale(field, &mut rows[rank][col..], inv);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for r in tail.iter_mut() {
            let c = r[col];
            if c != 0 {
                axpy(field, &mut r[col..], c, &pivot[col..]);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Result of offering a vector to an [`IncrementalBasis`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insertion {
    /// The vector was independent and became basis element `index`.
    New(usize),
    /// The vector is the given combination of the current basis vectors.
    Dependent(Vec<u32>),
}

/// Greedy basis selection: vectors are offered in order and kept when they are
/// independent of everything kept so far. Dependent vectors are expressed in
/// terms of the kept (original, unreduced) vectors.
pub struct IncrementalBasis<'a> {
    field: &'a Field,
    ncols: usize,
    /// echelon rows, leading entry 1 at `pivots[p]`, zero before it
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    /// `rows[p] = sum_b prov[p][b] * kept[b]`, with `prov[p].len() == p + 1`
    prov: Vec<Vec<u32>>,
}

impl<'a> IncrementalBasis<'a> {
    pub fn new(field: &'a Field, ncols: usize) -> Self {
        IncrementalBasis { field, ncols, rows: Vec::new(), pivots: Vec::new(), prov: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, mut v: Vec<u32>) -> Insertion {
        assert_eq!(v.len(), self.ncols);
        let field = self.field;
        let mut used: Vec<(usize, u32)> = Vec::new();
        for (p, row) in self.rows.iter().enumerate() {
            let piv = self.pivots[p];
            let c = v[piv];
            if c != 0 {
                axpy(field, &mut v[piv..], c, &row[piv..]);
                used.push((p, c));
            }
        }
        let r = self.rows.len();
        match v.iter().position(|&x| x != 0) {
            None => {
                let mut coords = vec![0u32; r];
                for &(p, c) in &used {
                    axpy(field, &mut coords[..=p], c, &self.prov[p]);
                }
                Insertion::Dependent(coords)
            }
            Some(piv) => {
                let inv = field.inv_nonzero(v[piv]);
                scale(field, &mut v[piv..], inv);
                let mut prov = vec![0u32; r + 1];
                prov[r] = 1;
                for &(p, c) in &used {
                    axpy(field, &mut prov[..=p], c, &self.prov[p]);
                }
                scale(field, &mut prov, inv);
                self.rows.push(v);
                self.pivots.push(piv);
                self.prov.push(prov);
                Insertion::New(r)
            }
        }
    }
}

/// Sparse counterpart of [`IncrementalBasis`], with identical results.
///
/// Kept rows are stored sparse together with the reduction steps that produced
/// them, `row_p = inv_p (kept_p + Σ c · row_q)` over earlier rows `q`, so that
/// coordinates of dependent vectors come from back-substitution along those steps.
pub struct SparseIncrementalBasis<'a> {
    field: &'a Field,
    ncols: usize,
    rows: Vec<Vec<(u32, u32)>>,
    pivot_row: Vec<u32>,
    steps: Vec<Vec<(u32, u32)>>,
    inv: Vec<u32>,
    acc: Vec<u32>,
    touched: Vec<u32>,
    /// `queued[p] == stamp` while row `p` sits in the reduction heap
    queued: Vec<u32>,
    stamp: u32,
}

const NO_ROW: u32 = u32::MAX;

impl<'a> SparseIncrementalBasis<'a> {
    pub fn new(field: &'a Field, ncols: usize) -> Self {
        SparseIncrementalBasis {
            field,
            ncols,
            rows: Vec::new(),
            pivot_row: vec![NO_ROW; ncols],
            steps: Vec::new(),
            inv: Vec::new(),
            acc: vec![0; ncols],
            touched: Vec::new(),
            queued: Vec::new(),
            stamp: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Offers a vector given by its nonzero entries (repeated columns add up).
    pub fn insert(&mut self, v: &[(u32, u32)]) -> Insertion {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;

        let field = self.field;
        let mut heap: BinaryHeap<Reverse<u32>> = BinaryHeap::new();
        for &(c, x) in v {
            debug_assert!((c as usize) < self.ncols);
            if self.acc[c as usize] == 0 {
                self.touched.push(c);
            }
            self.acc[c as usize] ^= x;
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.queued.iter_mut().for_each(|q| *q = 0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        for &c in &self.touched {
            let p = self.pivot_row[c as usize];
            if p != NO_ROW && self.queued[p as usize] != stamp {
                self.queued[p as usize] = stamp;
                heap.push(Reverse(p));
            }
        }
        let mut used: Vec<(u32, u32)> = Vec::new();
        while let Some(Reverse(p)) = heap.pop() {
            let row = &self.rows[p as usize];
            let piv = row[0].0 as usize;
            let c = self.acc[piv];
            if c == 0 {
                continue;
            }
            used.push((p, c));
            let table = field.mul_row(c);
            for &(col, x) in row {
                let slot = &mut self.acc[col as usize];
                if *slot == 0 {
                    self.touched.push(col);
                }
                *slot ^= match table {
                    Some(t) => t[x as usize],
                    None => field.mul(c, x),
                };
                let q = self.pivot_row[col as usize];
                if q != NO_ROW && self.queued[q as usize] != stamp {
                    self.queued[q as usize] = stamp;
                    heap.push(Reverse(q));
                }
            }
        }
        let mut rest: Vec<(u32, u32)> = Vec::new();
        for &c in &self.touched {
            let x = std::mem::take(&mut self.acc[c as usize]);
            if x != 0 {
                rest.push((c, x));
            }
        }
        self.touched.clear();
        rest.sort_unstable();
        rest.dedup_by_key(|e| e.0);
        if rest.is_empty() {
            return Insertion::Dependent(self.coordinates(&used));
        }
        // pivot on the last column, stored first; this keeps fill-in low here
        rest.rotate_right(1);
        let inv = field.inv_nonzero(rest[0].1);
        for e in rest.iter_mut() {
            e.1 = field.mul(e.1, inv);
        }
        let p = self.rows.len() as u32;
        self.pivot_row[rest[0].0 as usize] = p;
        self.rows.push(rest);
        self.queued.push(0);
        self.steps.push(used);
        self.inv.push(inv);
        Insertion::New(p as usize)
    }

    /// Coordinates over the kept vectors of `Σ c · row_q`.
    fn coordinates(&self, used: &[(u32, u32)]) -> Vec<u32> {
        use std::collections::BinaryHeap;

        let field = self.field;
        let mut w = vec![0u32; self.rows.len()];
        let mut heap: BinaryHeap<u32> = BinaryHeap::new();
        for &(q, c) in used {
            if w[q as usize] == 0 {
                heap.push(q);
            }
            w[q as usize] ^= c;
        }
        let mut coords = vec![0u32; self.rows.len()];
        let mut last = None;
        while let Some(p) = heap.pop() {
            if last == Some(p) {
                continue;
            }
            last = Some(p);
            let wp = w[p as usize];
            if wp == 0 {
                continue;
            }
            let a = field.mul(wp, self.inv[p as usize]);
            coords[p as usize] = a;
            for &(q, c) in &self.steps[p as usize] {
                let slot = &mut w[q as usize];
                let before = *slot;
                *slot ^= field.mul(a, c);
                if before == 0 {
                    heap.push(q);
                }
            }
        }
        coords
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_rank() {
        let f = Field::new(2).unwrap();
        let m = Matrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        let inv = m.inverse(&f).unwrap();
        assert!(m.mul(&inv, &f).is_identity());
        assert_eq!(m.pow(2, &f), Matrix::identity(2));
        assert_eq!(m.pow(3, &f), m);
        let singular = Matrix::from_rows(&[vec![2, 3], vec![3, 1]]);
        // 2*1 + 3*3 = 2 + mul(3,3) = 2 + 2 = 0 in GF(4)
        assert_eq!(singular.rank(&f), 1);
        assert!(singular.inverse(&f).is_none());
    }

    #[test]
    fn incremental_basis_coordinates() {
        let f = Field::new(2).unwrap();
        let mut basis = IncrementalBasis::new(&f, 3);
        let a = vec![0, 1, 2];
        let b = vec![1, 1, 0];
        assert_eq!(basis.insert(a.clone()), Insertion::New(0));
        assert_eq!(basis.insert(b.clone()), Insertion::New(1));
        // 2a + 3b
        let mut v = vec![0u32; 3];
        axpy(&f, &mut v, 2, &a);
        axpy(&f, &mut v, 3, &b);
        assert_eq!(basis.insert(v), Insertion::Dependent(vec![2, 3]));
        assert_eq!(basis.insert(vec![0, 0, 0]), Insertion::Dependent(vec![0, 0]));
        assert_eq!(basis.insert(vec![0, 0, 1]), Insertion::New(2));
        assert_eq!(basis.len(), 3);
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sparse_matches_dense(k in 1u32..=3, ncols in 1usize..8, raw in proptest::collection::vec(proptest::collection::vec(any::<u32>(), 8), 1..14)) {
            let f = Field::new(k).unwrap();
            let mut dense = IncrementalBasis::new(&f, ncols);
            let mut sparse = SparseIncrementalBasis::new(&f, ncols);
            for r in raw {
                // many zeros so that dependencies actually occur
                let v: Vec<u32> = r[..ncols].iter().map(|&x| if x % 3 == 0 { x / 3 % f.size() as u32 } else { 0 }).collect();
                let sv: Vec<(u32, u32)> = v.iter().enumerate().filter(|e| *e.1 != 0).map(|(c, &x)| (c as u32, x)).collect();
                prop_assert_eq!(dense.insert(v), sparse.insert(&sv));
            }
        }
    }
}
