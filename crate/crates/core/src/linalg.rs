//! Exact sparse linear algebra over a generic field: incremental echelon
//! forms, rank, and kernels.

use std::collections::BTreeMap;
use std::fmt;

use crate::arith::{CycNum, Rat};
use num_traits::{One, Zero};

/// Minimal exact field interface used by the elimination routines.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// Panics on zero; callers only invert pivots.
    fn inverse(&self) -> Self;
}

impl Field for CycNum {
    fn is_zero(&self) -> bool {
        CycNum::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        CycNum::zero(self.field())
    }
    fn one_like(&self) -> Self {
        CycNum::one(self.field())
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Self {
        self.inv().expect("pivot is nonzero")
    }
}

impl Field for Rat {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn one_like(&self) -> Self {
        Rat::one()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Self {
        self.recip()
    }
}

/// An element of the prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    pub fn new(value: i64, modulus: u64) -> Self {
        Fp {
            value: value.rem_euclid(modulus as i64) as u64,
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl Field for Fp {
    fn is_zero(&self) -> bool {
        self.value == 0
    }
    fn zero_like(&self) -> Self {
        Fp { value: 0, modulus: self.modulus }
    }
    fn one_like(&self) -> Self {
        Fp { value: 1 % self.modulus, modulus: self.modulus }
    }
    fn add_ref(&self, other: &Self) -> Self {
        Fp { value: (self.value + other.value) % self.modulus, modulus: self.modulus }
    }
    fn sub_ref(&self, other: &Self) -> Self {
        Fp { value: (self.value + self.modulus - other.value) % self.modulus, modulus: self.modulus }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        Fp {
            value: ((self.value as u128 * other.value as u128) % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }
    fn neg_ref(&self) -> Self {
        Fp { value: (self.modulus - self.value) % self.modulus, modulus: self.modulus }
    }
    fn inverse(&self) -> Self {
        assert!(self.value != 0, "inverting zero in F_p");
        Fp {
            value: crate::qnum::pow_mod(self.value, self.modulus - 2, self.modulus),
            modulus: self.modulus,
        }
    }
}

pub type SparseVec<T> = BTreeMap<usize, T>;

fn axpy<T: Field>(target: &mut SparseVec<T>, scale: &T, row: &SparseVec<T>) {
    for (c, x) in row {
        let delta = scale.mul_ref(x);
        match target.get_mut(c) {
            Some(v) => {
                let s = v.add_ref(&delta);
                if s.is_zero() {
                    target.remove(c);
                } else {
                    *v = s;
                }
            }
            None => {
                if !delta.is_zero() {
                    target.insert(*c, delta);
                }
            }
        }
    }
}

/// Row-echelon basis of a growing subspace. Every stored row has a leading
/// coefficient of one at its pivot column.
#[derive(Debug, Clone)]
pub struct Echelon<T: Field> {
    rows: Vec<SparseVec<T>>,
    pivots: BTreeMap<usize, usize>,
}

impl<T: Field> Default for Echelon<T> {
    fn default() -> Self {
        Echelon {
            rows: Vec::new(),
            pivots: BTreeMap::new(),
        }
    }
}

impl<T: Field> Echelon<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows; the result has no pivot-column entries.
    pub fn reduce(&self, mut v: SparseVec<T>) -> SparseVec<T> {
        let mut cursor = 0usize;
        loop {
            let next = v
                .range(cursor..)
                .map(|(c, _)| *c)
                .find(|c| self.pivots.contains_key(c));
            let Some(col) = next else { break };
            let coeff = v[&col].neg_ref();
            axpy(&mut v, &coeff, &self.rows[self.pivots[&col]]);
            cursor = col + 1;
        }
        v
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec<T>) -> bool {
        let v = self.reduce(v);
        let Some((&lead, lead_val)) = v.iter().next() else {
            return false;
        };
        let inv = lead_val.inverse();
        let row: SparseVec<T> = v.iter().map(|(c, x)| (*c, x.mul_ref(&inv))).collect();
        self.pivots.insert(lead, self.rows.len());
        self.rows.push(row);
        true
    }

    pub fn contains(&self, v: SparseVec<T>) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }
}

/// Rank of a list of sparse vectors.
pub fn rank<T: Field>(vectors: impl IntoIterator<Item = SparseVec<T>>) -> usize {
    let mut ech = Echelon::new();
    for v in vectors {
        ech.insert(v);
    }
    ech.rank()
}

/// Basis of `{x : Σ_b x_b · images[b] = 0}`, i.e. the kernel of the linear map
/// sending the `b`-th domain basis vector to `images[b]`.
///
/// Elimination tracks, for every stored row, the domain combination that
/// produced it; an image that reduces to zero yields a kernel vector.
pub fn kernel_of_images<T: Field>(images: &[SparseVec<T>], one: &T) -> Vec<SparseVec<T>> {
    let mut rows: Vec<(SparseVec<T>, SparseVec<T>)> = Vec::new();
    let mut pivots: BTreeMap<usize, usize> = BTreeMap::new();
    let mut kernel = Vec::new();
    for (b, img) in images.iter().enumerate() {
        let mut v = img.clone();
        let mut combo: SparseVec<T> = SparseVec::new();
        combo.insert(b, one.clone());
        let mut cursor = 0usize;
        loop {
            let next = v.range(cursor..).map(|(c, _)| *c).find(|c| pivots.contains_key(c));
            let Some(col) = next else { break };
            let coeff = v[&col].neg_ref();
            let (row, row_combo) = &rows[pivots[&col]];
            axpy(&mut v, &coeff, row);
            axpy(&mut combo, &coeff, row_combo);
            cursor = col + 1;
        }
        match v.iter().next() {
            None => kernel.push(combo),
            Some((&lead, lead_val)) => {
                let inv = lead_val.inverse();
                let row = v.iter().map(|(c, x)| (*c, x.mul_ref(&inv))).collect();
                let row_combo = combo.iter().map(|(c, x)| (*c, x.mul_ref(&inv))).collect();
                pivots.insert(lead, rows.len());
                rows.push((row, row_combo));
            }
        }
    }
    kernel
}

/// Kernel of a dense matrix `a` (rows of equal length `cols`).
pub fn dense_nullspace<T: Field>(a: &[Vec<T>], cols: usize, one: &T) -> Vec<Vec<T>> {
    let mut images: Vec<SparseVec<T>> = vec![SparseVec::new(); cols];
    for (r, row) in a.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            if !x.is_zero() {
                images[c].insert(r, x.clone());
            }
        }
    }
    kernel_of_images(&images, one)
        .into_iter()
        .map(|k| {
            let mut dense = vec![one.zero_like(); cols];
            for (c, x) in k {
                dense[c] = x;
            }
            dense
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    fn sv(entries: &[(usize, i64)]) -> SparseVec<Rat> {
        entries.iter().map(|&(c, x)| (c, r(x))).collect()
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![sv(&[(0, 1), (1, 2)]), sv(&[(0, 2), (1, 4)]), sv(&[(2, 1)])];
        assert_eq!(rank(rows), 2);
    }

    #[test]
    fn kernel_of_rank_one_map() {
        // b0 ↦ e0, b1 ↦ 2e0, b2 ↦ e1
        let images = vec![sv(&[(0, 1)]), sv(&[(0, 2)]), sv(&[(1, 1)])];
        let k = kernel_of_images(&images, &r(1));
        assert_eq!(k, vec![sv(&[(0, -2), (1, 1)])]);
    }

    #[test]
    fn dense_nullspace_vectors_are_annihilated() {
        let a = vec![vec![r(1), r(2), r(3)], vec![r(2), r(4), r(6)]];
        let ns = dense_nullspace(&a, 3, &r(1));
        assert_eq!(ns.len(), 2);
        for v in ns {
            for row in &a {
                let s = row.iter().zip(&v).fold(r(0), |acc, (x, y)| acc + x * y);
                assert!(Zero::is_zero(&s));
            }
        }
    }

    #[test]
    fn prime_field_inverse() {
        for p in [2u64, 3, 5, 7] {
            for v in 1..p as i64 {
                let x = Fp::new(v, p);
                assert_eq!(x.mul_ref(&x.inverse()).value(), 1);
            }
        }
        assert_eq!(Fp::new(-1, 5).value(), 4);
    }
}
