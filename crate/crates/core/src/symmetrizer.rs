//! Independent dimension oracle: `dim 𝔅^n(V)` as the rank of the quantum symmetrizer
//! `S_n = Σ_{σ ∈ 𝕊_n} lift(σ)` acting on `V^{⊗n}`.
//!
//! `S_n` factors as `(S_{n-1} ⊗ id) T_n` with `T_n = 1 + c_{n-1} + c_{n-1}c_{n-2} + … + c_{n-1}⋯c_1`,
//! so `S_n = T_2 T_3 ⋯ T_n` with each `T_m` acting on the first `m` factors.
//! When a realization is present the rank is taken block by block over group degrees.

use std::collections::HashMap;

use crate::braided::BraidedSpace;
use crate::linalg::rank_of_rows;
use crate::nichols::NicholsError;

/// Largest `dim(V)^n` the oracle accepts.
pub const SYMMETRIZER_LIMIT: u64 = 2_000_000;

/// Tensor words of length `n` over `d` letters, first factor most significant.
struct Layout {
    d: usize,
    n: usize,
}

impl Layout {
    fn place(&self, pos: usize) -> usize {
        self.d.pow((self.n - 1 - pos) as u32)
    }

    fn digit(&self, idx: usize, pos: usize) -> usize {
        idx / self.place(pos) % self.d
    }
}

/// `c` at factors `pos, pos + 1` on a vector supported on one block.
fn braid_local(
    space: &BraidedSpace,
    layout: &Layout,
    words: &[usize],
    local: &[u32],
    v: &[u32],
    pos: usize,
) -> Vec<u32> {
    let field = space.field();
    let (hi, lo) = (layout.place(pos), layout.place(pos + 1));
    let mut out = vec![0u32; v.len()];
    for (l, &x) in v.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let g = words[l];
        let (a, b) = (layout.digit(g, pos), layout.digit(g, pos + 1));
        let base = g - a * hi - b * lo;
        for ((k, m), coeff) in space.braid_pair(a, b) {
            let target = local[base + k * hi + m * lo];
            debug_assert_ne!(target, u32::MAX, "braiding leaves the homogeneous block");
            out[target as usize] ^= field.mul(coeff, x);
        }
    }
    out
}

/// Rank of `S_n`, computed without the derivation engine.
pub fn symmetrizer_dim(space: &BraidedSpace, n: usize) -> Result<usize, NicholsError> {
    let d = space.dim();
    if n == 0 {
        return Ok(1);
    }
    let size = (d as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if size > SYMMETRIZER_LIMIT {
        return Err(NicholsError::SizeGuard { size, limit: SYMMETRIZER_LIMIT });
    }
    let size = size as usize;
    let layout = Layout { d, n };
    let field = space.field();

    // group degree of every word
    let mut block_of: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    match space.realization() {
        Some(real) => {
            for g in 0..size {
                let mut deg = vec![0i64; real.rank()];
                for pos in 0..n {
                    for (acc, e) in deg.iter_mut().zip(&real.degrees[layout.digit(g, pos)]) {
                        *acc += e;
                    }
                }
                for (acc, &ord) in deg.iter_mut().zip(&real.orders) {
                    if ord != 0 {
                        *acc = acc.rem_euclid(ord as i64);
                    }
                }
                block_of.entry(deg).or_default().push(g);
            }
        }
        None => {
            block_of.insert(Vec::new(), (0..size).collect());
        }
    }
    let mut blocks: Vec<Vec<usize>> = block_of.into_values().collect();
    blocks.sort_unstable();

    let mut local = vec![u32::MAX; size];
    let mut total = 0;
    for words in &blocks {
        for (l, &g) in words.iter().enumerate() {
            local[g] = l as u32;
        }
        let mut columns = Vec::with_capacity(words.len());
        for l in 0..words.len() {
            let mut v = vec![0u32; words.len()];
            v[l] = 1;
            for m in (2..=n).rev() {
                let mut acc = v.clone();
                for p in 1..m {
                    acc = braid_local(space, &layout, words, &local, &acc, p - 1);
                    for (a, &b) in acc.iter_mut().zip(&v) {
                        *a ^= b;
                    }
                }
                v = acc;
            }
            columns.push(v);
        }
        total += rank_of_rows(columns, field);
        for &g in words {
            local[g] = u32::MAX;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::linalg::Matrix;
    use crate::nichols::GradedBasis;

    /// Sum over all permutations, each lifted through a bubble-sort reduced word.
    fn brute_force(space: &BraidedSpace, n: usize) -> usize {
        let d = space.dim();
        let size = d.pow(n as u32);
        let mut perms = vec![vec![]];
        for m in 0..n {
            perms = perms
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..=m).map(move |at| {
                        let mut q = p.clone();
                        q.insert(at, m);
                        q
                    })
                })
                .collect();
        }
        let mut total = Matrix::zeros(size, size);
        for perm in perms {
            // σ s_{p1} ⋯ s_{pl} = id, so lift(σ) = c_{pl} ⋯ c_{p1}
            let mut a = perm.clone();
            let mut word = Vec::new();
            let mut swapped = true;
            while swapped {
                swapped = false;
                for p in 0..n.saturating_sub(1) {
                    if a[p] > a[p + 1] {
                        a.swap(p, p + 1);
                        word.push(p);
                        swapped = true;
                    }
                }
            }
            for col in 0..size {
                let mut v = vec![0u32; size];
                v[col] = 1;
                for &p in &word {
                    v = space.apply_braiding_at(&v, n, p);
                }
                for (r, &x) in v.iter().enumerate() {
                    total.set(r, col, total.get(r, col) ^ x);
                }
            }
        }
        total.rank(space.field())
    }

    fn samples() -> Vec<BraidedSpace> {
        let f = Field::gf2();
        let f4 = Field::new(2).unwrap();
        let e = |f: &Field, m| f.element(m).unwrap();
        vec![
            BraidedSpace::jordan(&f),
            BraidedSpace::block(&f4, e(&f4, 2), 2).unwrap(),
            BraidedSpace::lstr(&f4, e(&f4, 2), e(&f4, 3), e(&f4, 3)).unwrap(),
            BraidedSpace::pale(&f4, e(&f4, 3), e(&f4, 2)).unwrap(),
            BraidedSpace::diagonal(&f4, &[vec![e(&f4, 2), e(&f4, 3)], vec![e(&f4, 1), e(&f4, 1)]]).unwrap(),
        ]
    }

    #[test]
    fn factorization_matches_permutation_sum() {
        for v in samples() {
            for n in 1..=4 {
                assert_eq!(symmetrizer_dim(&v, n).unwrap(), brute_force(&v, n), "{} n={n}", v.family());
            }
        }
    }

    #[test]
    fn examples() {
        let f4 = Field::new(2).unwrap();
        let w = f4.element(f4.element_of_order(3).unwrap()).unwrap();
        let v = BraidedSpace::diagonal(&f4, &[vec![w]]).unwrap();
        // S_n is the scalar (n)_ω!, and 1 + ω + ω² = 0
        assert_eq!(symmetrizer_dim(&v, 2).unwrap(), 1);
        assert_eq!(symmetrizer_dim(&v, 3).unwrap(), 0);
        assert_eq!(symmetrizer_dim(&v, 4).unwrap(), 0);
        let j = BraidedSpace::jordan(&Field::gf2());
        assert_eq!(symmetrizer_dim(&j, 1).unwrap(), 2);
        assert_eq!(symmetrizer_dim(&j, 2).unwrap(), 3);
        assert!(matches!(symmetrizer_dim(&j, 21), Err(NicholsError::SizeGuard { .. })));
    }

    #[test]
    fn agrees_with_engine() {
        for v in samples() {
            let gb = GradedBasis::compute(&v, 6).unwrap();
            for n in 0..=5 {
                assert_eq!(symmetrizer_dim(&v, n).unwrap(), gb.dim(n).unwrap(), "{} n={n}", v.family());
            }
        }
    }
}
