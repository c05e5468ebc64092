//! q-integers, Gaussian binomials, ℓ-adic digits and mod-p binomials.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::arith::{CycNum, CyclotomicField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QError {
    #[error("q-factorial [{m}]! vanishes at a root of unity of order {ell}")]
    FactorialNotInvertible { m: i64, ell: u32 },
    #[error("lower index {n} must lie in [0, {ell})")]
    LowerIndexOutOfRange { n: i64, ell: u32 },
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Base-`ℓ` expansion of a nonnegative integer, least significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digits {
    base: u64,
    digits: Vec<u64>,
}

impl Digits {
    pub fn new(value: u64, base: u64) -> Self {
        assert!(base >= 2, "digit base must be at least 2");
        let mut digits = Vec::new();
        let mut v = value;
        while v > 0 {
            digits.push(v % base);
            v /= base;
        }
        Digits { base, digits }
    }

    /// Expansion padded (or required to fit) to exactly `len` digits.
    pub fn padded(value: u64, base: u64, len: usize) -> Self {
        let mut d = Self::new(value, base);
        assert!(d.digits.len() <= len, "{value} needs more than {len} base-{base} digits");
        d.digits.resize(len, 0);
        d
    }

    pub fn from_digits(base: u64, digits: Vec<u64>) -> Self {
        assert!(digits.iter().all(|&d| d < base), "digit out of range");
        Digits { base, digits }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Digit at position `i`, zero beyond the stored length.
    pub fn get(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.digits
    }

    pub fn value(&self) -> u64 {
        self.digits.iter().rev().fold(0, |acc, &d| acc * self.base + d)
    }
}

/// `[m] = (λ^m − λ^{−m})/(λ − λ^{−1})`, evaluated as `Σ_k λ^{m−1−2k}`.
pub fn q_int(field: &Arc<CyclotomicField>, m: i64) -> CycNum {
    let mut acc = CycNum::zero(field);
    for k in 0..m.abs() {
        acc = &acc + &CycNum::lambda_pow(field, m.abs() - 1 - 2 * k);
    }
    if m < 0 {
        -acc
    } else {
        acc
    }
}

/// `[m]! = [m][m−1]⋯[1]`, restricted to `0 ≤ m < ℓ` where it is invertible.
pub fn q_factorial(field: &Arc<CyclotomicField>, m: i64) -> Result<CycNum, QError> {
    if m < 0 || m >= field.order() as i64 {
        return Err(QError::FactorialNotInvertible {
            m,
            ell: field.order(),
        });
    }
    Ok((1..=m).fold(CycNum::one(field), |acc, j| &acc * &q_int(field, j)))
}

/// Gaussian binomial `Π_{j=1}^n [m−j+1]/[j]` for any integer `m` and `0 ≤ n < ℓ`.
pub fn q_binom(field: &Arc<CyclotomicField>, m: i64, n: i64) -> Result<CycNum, QError> {
    if n < 0 || n >= field.order() as i64 {
        return Err(QError::LowerIndexOutOfRange {
            n,
            ell: field.order(),
        });
    }
    let mut num = CycNum::one(field);
    for j in 1..=n {
        num = &num * &q_int(field, m - j + 1);
        if num.is_zero() {
            return Ok(num);
        }
    }
    let den = q_factorial(field, n)?;
    Ok(&num * &den.inv().expect("[n]! is invertible for n < ℓ"))
}

/// Digitwise product `Π_i [m_i choose n_i]` over base-`ℓ` digits.
pub fn gen_q_binom(field: &Arc<CyclotomicField>, m: u64, n: u64) -> CycNum {
    let ell = field.order() as u64;
    let (dm, dn) = (Digits::new(m, ell), Digits::new(n, ell));
    let len = dm.len().max(dn.len());
    let mut acc = CycNum::one(field);
    for i in 0..len {
        let f = q_binom(field, dm.get(i) as i64, dn.get(i) as i64).expect("digit below ℓ");
        acc = &acc * &f;
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// A Laurent polynomial in one group-like variable `K`, with `Q(λ)` coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentK {
    terms: BTreeMap<i64, CycNum>,
}

impl LaurentK {
    pub fn constant(c: CycNum) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        LaurentK { terms }
    }

    pub fn terms(&self) -> &BTreeMap<i64, CycNum> {
        &self.terms
    }

    pub fn coefficient(&self, exponent: i64) -> Option<&CycNum> {
        self.terms.get(&exponent)
    }

    pub fn mul(&self, other: &LaurentK) -> LaurentK {
        let mut terms: BTreeMap<i64, CycNum> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let p = x * y;
                match terms.entry(a + b) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(p);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        let s = o.get() + &p;
                        *o.get_mut() = s;
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        LaurentK { terms }
    }

    /// Substitutes `K^b ↦ λ^{zb}`.
    pub fn eval_at_lambda_pow(&self, field: &Arc<CyclotomicField>, z: i64) -> CycNum {
        self.terms.iter().fold(CycNum::zero(field), |acc, (b, c)| {
            &acc + &(c * &CycNum::lambda_pow(field, z * b))
        })
    }
}

/// Expansion of `[K; s choose a] = Π_{j=1}^a (λ^{s−j+1}K − λ^{−s+j−1}K^{−1})/(λ^j − λ^{−j})`.
pub fn k_binom_laurent(field: &Arc<CyclotomicField>, s: i64, a: u64) -> Result<LaurentK, QError> {
    if a >= field.order() as u64 {
        return Err(QError::LowerIndexOutOfRange {
            n: a as i64,
            ell: field.order(),
        });
    }
    let mut acc = LaurentK::constant(CycNum::one(field));
    for j in 1..=a as i64 {
        let den = (&CycNum::lambda_pow(field, j) - &CycNum::lambda_pow(field, -j))
            .inv()
            .expect("λ^j ≠ λ^{−j} for odd ℓ and 0 < j < ℓ");
        let mut factor = BTreeMap::new();
        factor.insert(1, &CycNum::lambda_pow(field, s - j + 1) * &den);
        factor.insert(-1, -(&CycNum::lambda_pow(field, -s + j - 1) * &den));
        acc = acc.mul(&LaurentK { terms: factor });
    }
    Ok(acc)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let mut base = (b % p) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// Binomial `C(m, n)` for `m < p` reduced modulo the prime `p`.
fn small_binom_mod(m: u64, n: u64, p: u64) -> u64 {
    if n > m {
        return 0;
    }
    let (mut num, mut den) = (1u128, 1u128);
    for j in 0..n {
        num = num * (m - j) as u128 % p as u128;
        den = den * (j + 1) as u128 % p as u128;
    }
    (num * pow_mod(den as u64, p - 2, p) as u128 % p as u128) as u64
}

/// `C(m, n) mod p` by Lucas' theorem.
pub fn lucas_binom(m: u64, n: u64, p: u64) -> Result<u64, QError> {
    if !is_prime(p) {
        return Err(QError::NotPrime(p));
    }
    let (mut m, mut n) = (m, n);
    let mut acc = 1u64;
    while n > 0 || m > 0 {
        let c = small_binom_mod(m % p, n % p, p);
        acc = (acc as u128 * c as u128 % p as u128) as u64;
        if acc == 0 {
            return Ok(0);
        }
        m /= p;
        n /= p;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Rat;
    use num_bigint::BigInt;
    use num_traits::{ToPrimitive, Zero};

    fn field(l: i64) -> Arc<CyclotomicField> {
        CyclotomicField::new(l).unwrap()
    }

    #[test]
    fn digits_roundtrip() {
        let d = Digits::new(4, 3);
        assert_eq!(d.as_slice(), &[1, 1]);
        assert_eq!(d.value(), 4);
        assert_eq!(Digits::padded(4, 3, 3).as_slice(), &[1, 1, 0]);
        assert_eq!(Digits::new(0, 3).get(5), 0);
    }

    #[test]
    fn q_integers() {
        let f = field(3);
        assert!(q_int(&f, 1).is_one());
        assert_eq!(q_int(&f, 2), &CycNum::lambda_pow(&f, 1) + &CycNum::lambda_pow(&f, -1));
        assert!(q_int(&f, 3).is_zero());
        assert!(q_int(&f, 0).is_zero());
        assert_eq!(q_int(&f, -2), -q_int(&f, 2));
        // agrees with the defining quotient
        let f5 = field(5);
        let d = &CycNum::lambda_pow(&f5, 1) - &CycNum::lambda_pow(&f5, -1);
        for m in -7..8 {
            let num = &CycNum::lambda_pow(&f5, m) - &CycNum::lambda_pow(&f5, -m);
            assert_eq!(&q_int(&f5, m) * &d, num);
        }
    }

    #[test]
    fn q_factorial_bounds() {
        let f = field(3);
        assert!(q_factorial(&f, 0).unwrap().is_one());
        assert!(matches!(q_factorial(&f, 3), Err(QError::FactorialNotInvertible { m: 3, ell: 3 })));
    }

    #[test]
    fn q_binomials() {
        let f = field(3);
        for m in -4..6 {
            assert!(q_binom(&f, m, 0).unwrap().is_one());
        }
        assert!(q_binom(&f, 5, 2).unwrap().is_one());
        assert!(q_binom(&f, 1, 2).unwrap().is_zero());
        assert!(q_binom(&f, 1, 3).is_err());
        let f7 = field(7);
        for m in 0..7i64 {
            for n in 0..=m {
                let expect = &q_factorial(&f7, m).unwrap()
                    * &(&q_factorial(&f7, n).unwrap() * &q_factorial(&f7, m - n).unwrap())
                        .inv()
                        .unwrap();
                assert_eq!(q_binom(&f7, m, n).unwrap(), expect);
            }
        }
    }

    #[test]
    fn generalized_q_binomials() {
        let f = field(3);
        assert!(gen_q_binom(&f, 7, 0).is_one());
        assert!(gen_q_binom(&f, 4, 3).is_one());
        assert!(gen_q_binom(&f, 4, 2).is_zero());
        assert!(gen_q_binom(&f, 3, 1).is_zero());
        for m in 0..3 {
            for n in 0..3 {
                assert_eq!(gen_q_binom(&f, m, n), q_binom(&f, m as i64, n as i64).unwrap());
            }
        }
    }

    #[test]
    fn k_binomial_expansions() {
        let f = field(5);
        let z = k_binom_laurent(&f, 3, 0).unwrap();
        assert_eq!(z.terms().len(), 1);
        assert!(z.coefficient(0).unwrap().is_one());

        let den = (&CycNum::lambda_pow(&f, 1) - &CycNum::lambda_pow(&f, -1)).inv().unwrap();
        let h = k_binom_laurent(&f, 0, 1).unwrap();
        assert_eq!(h.coefficient(1), Some(&den));
        assert_eq!(h.coefficient(-1), Some(&-&den));

        let s2 = k_binom_laurent(&f, 2, 1).unwrap();
        assert_eq!(s2.coefficient(1), Some(&(&CycNum::lambda_pow(&f, 2) * &den)));
        assert_eq!(s2.coefficient(-1), Some(&-(&CycNum::lambda_pow(&f, -2) * &den)));
        assert!(k_binom_laurent(&f, 0, 5).is_err());
    }

    #[test]
    fn k_binomial_specializes_to_q_binomial() {
        for l in [3i64, 5] {
            let f = field(l);
            for s in -2 * l..2 * l {
                for a in 0..l as u64 {
                    let kb = k_binom_laurent(&f, s, a).unwrap();
                    for exp in kb.terms().keys() {
                        assert!(exp.abs() <= a as i64 && (exp - a as i64) % 2 == 0);
                    }
                    for z in 0..l {
                        assert_eq!(
                            kb.eval_at_lambda_pow(&f, z),
                            q_binom(&f, z + s, a as i64).unwrap(),
                            "ℓ={l} s={s} a={a} z={z}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(lucas_binom(9, 0, 5).unwrap(), 1);
        assert_eq!(lucas_binom(3, 1, 3).unwrap(), 0);
        assert_eq!(lucas_binom(6, 3, 3).unwrap(), 2);
        assert_eq!(lucas_binom(6, 3, 4), Err(QError::NotPrime(4)));
    }

    /// Exact binomials from Pascal's rule, reduced afterwards.
    fn pascal_rows(bound: usize) -> Vec<Vec<BigInt>> {
        let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::from(1)]];
        for m in 1..bound {
            let prev = &rows[m - 1];
            let mut row = vec![BigInt::from(1); m + 1];
            for n in 1..m {
                row[n] = &prev[n - 1] + &prev[n];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn lucas_matches_factorials() {
        let rows = pascal_rows(625);
        for p in [2u64, 3, 5] {
            let bound = p.pow(4) as usize;
            for m in 0..bound {
                for n in 0..bound {
                    let direct = if n > m {
                        0
                    } else {
                        (&rows[m][n] % BigInt::from(p)).to_u64().unwrap()
                    };
                    assert_eq!(lucas_binom(m as u64, n as u64, p).unwrap(), direct, "C({m},{n}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn laurent_constant_zero_is_empty() {
        let f = field(3);
        assert!(LaurentK::constant(CycNum::from_rat(&f, Rat::zero())).terms().is_empty());
    }
}
