//! Exact arithmetic in the cyclotomic field `Q(λ)`, `λ` a primitive root of
//! unity of odd order `ℓ`.
//!
//! Elements are stored as canonical remainders modulo the cyclotomic
//! polynomial `Φ_ℓ(x)`, so two elements are equal exactly when their
//! coefficient vectors are equal. The field itself is `Q[x]/(Φ_ℓ)`; the
//! distinguished root is `λ := x^r` for a configurable exponent `r` coprime to
//! `ℓ` (the default `r = 1` makes `λ` the residue class of `x`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("cyclotomic order mismatch: {left} vs {right}")]
    OrderMismatch { left: u32, right: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid cyclotomic order {0}: must be odd and at least 3")]
    InvalidOrder(i64),
    #[error("cyclotomic polynomial index must be positive, got {0}")]
    InvalidIndex(i64),
    #[error("root exponent {exponent} is not coprime to {order}")]
    InvalidRootExponent { exponent: i64, order: u32 },
}

/// Coefficients (lowest degree first) of the `n`-th cyclotomic polynomial.
///
/// Computed by exact division of `x^n - 1` by `Φ_d` for every proper divisor
/// `d` of `n`.
pub fn cyclotomic_polynomial(n: i64) -> Result<Vec<i64>, ArithError> {
    if n < 1 {
        return Err(ArithError::InvalidIndex(n));
    }
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let divisor = cyclotomic_polynomial(d)?;
            poly = exact_div_monic(&poly, &divisor);
        }
    }
    Ok(poly)
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quot = vec![0i64; qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (i, &d) in den.iter().enumerate() {
                rem[k + i] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "division was not exact");
    quot
}

fn euler_phi(n: u32) -> usize {
    (1..=n).filter(|k| k.gcd(&n) == 1).count()
}

/// The field `Q(λ)` together with precomputed reduction data.
#[derive(Debug)]
pub struct CyclotomicField {
    order: u32,
    root_exponent: u32,
    phi: Vec<i64>,
    degree: usize,
    /// `x^k mod Φ` for `k` in `0..2·degree`.
    x_powers: Vec<Vec<Rat>>,
    /// `λ^k` for `k` in `0..order`.
    lambda_powers: Vec<Vec<Rat>>,
}

impl CyclotomicField {
    pub fn new(order: i64) -> Result<Arc<Self>, ArithError> {
        Self::with_root_exponent(order, 1)
    }

    pub fn with_root_exponent(order: i64, root_exponent: i64) -> Result<Arc<Self>, ArithError> {
        if order < 3 || order % 2 == 0 || order > u32::MAX as i64 {
            return Err(ArithError::InvalidOrder(order));
        }
        let r = root_exponent.rem_euclid(order);
        if r.gcd(&order) != 1 {
            return Err(ArithError::InvalidRootExponent {
                exponent: root_exponent,
                order: order as u32,
            });
        }
        let phi = cyclotomic_polynomial(order)?;
        let degree = phi.len() - 1;
        debug_assert_eq!(degree, euler_phi(order as u32));

        let mut x_powers = Vec::with_capacity(2 * degree);
        let mut cur = vec![Rat::zero(); degree];
        cur[0] = Rat::one();
        for _ in 0..2 * degree.max(1) {
            x_powers.push(cur.clone());
            // multiply by x and reduce the overflow coefficient
            let top = cur[degree - 1].clone();
            for i in (1..degree).rev() {
                cur[i] = cur[i - 1].clone();
            }
            cur[0] = Rat::zero();
            if !top.is_zero() {
                for (i, c) in cur.iter_mut().enumerate() {
                    *c -= &top * Rat::from_integer(BigInt::from(phi[i]));
                }
            }
        }

        let mut field = CyclotomicField {
            order: order as u32,
            root_exponent: r as u32,
            phi,
            degree,
            x_powers,
            lambda_powers: Vec::new(),
        };
        let mut lambda_powers = Vec::with_capacity(order as usize);
        for k in 0..order as u64 {
            lambda_powers.push(field.x_pow(k * r as u64));
        }
        field.lambda_powers = lambda_powers;
        Ok(Arc::new(field))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn root_exponent(&self) -> u32 {
        self.root_exponent
    }

    /// `deg Φ_ℓ`, the dimension of the field over `Q`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn phi(&self) -> &[i64] {
        &self.phi
    }

    fn x_pow(&self, k: u64) -> Vec<Rat> {
        let k = (k % self.order as u64) as usize;
        if k < self.x_powers.len() {
            return self.x_powers[k].clone();
        }
        let mut acc = self.x_powers[0].clone();
        let x = &self.x_powers[1];
        for _ in 0..k {
            acc = self.mul_coeffs(&acc, x);
        }
        acc
    }

    fn mul_coeffs(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let d = self.degree;
        let mut full = vec![Rat::zero(); 2 * d - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    full[i + j] += ai * bj;
                }
            }
        }
        let mut out: Vec<Rat> = full[..d].to_vec();
        for (k, c) in full.iter().enumerate().skip(d) {
            if c.is_zero() {
                continue;
            }
            for (o, t) in out.iter_mut().zip(&self.x_powers[k]) {
                if !t.is_zero() {
                    *o += c * t;
                }
            }
        }
        out
    }
}

/// An exact element of `Q(λ)`.
#[derive(Clone)]
pub struct CycNum {
    field: Arc<CyclotomicField>,
    coeffs: Vec<Rat>,
}

impl CycNum {
    pub fn zero(field: &Arc<CyclotomicField>) -> Self {
        CycNum {
            field: field.clone(),
            coeffs: vec![Rat::zero(); field.degree],
        }
    }

    pub fn one(field: &Arc<CyclotomicField>) -> Self {
        Self::from_rat(field, Rat::one())
    }

    pub fn from_int(field: &Arc<CyclotomicField>, n: i64) -> Self {
        Self::from_rat(field, Rat::from_integer(BigInt::from(n)))
    }

    pub fn from_rat(field: &Arc<CyclotomicField>, r: Rat) -> Self {
        let mut c = Self::zero(field);
        c.coeffs[0] = r;
        c
    }

    /// `λ^k` for any integer `k`.
    pub fn lambda_pow(field: &Arc<CyclotomicField>, k: i64) -> Self {
        let idx = k.rem_euclid(field.order as i64) as usize;
        CycNum {
            field: field.clone(),
            coeffs: field.lambda_powers[idx].clone(),
        }
    }

    /// Builds an element from coefficients of `1, x, x², …`, reducing modulo `Φ_ℓ`.
    pub fn from_x_coeffs(field: &Arc<CyclotomicField>, coeffs: &[Rat]) -> Self {
        let mut out = Self::zero(field);
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let xp = field.x_pow(k as u64);
            for (o, t) in out.coeffs.iter_mut().zip(&xp) {
                *o += c * t;
            }
        }
        out
    }

    /// Builds an element from coefficients of `1, λ, λ², …`.
    pub fn from_lambda_coeffs(field: &Arc<CyclotomicField>, coeffs: &[Rat]) -> Self {
        let mut out = Self::zero(field);
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let lp = &field.lambda_powers[k % field.order as usize];
            for (o, t) in out.coeffs.iter_mut().zip(lp) {
                *o += c * t;
            }
        }
        out
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn order(&self) -> u32 {
        self.field.order
    }

    /// Canonical coefficients with respect to `1, x, …, x^{d-1}`.
    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Canonical coefficients with respect to `1, λ, …, λ^{d-1}`.
    ///
    /// Since `x = λ^s` with `s·r ≡ 1 (mod ℓ)`, this is the substitution
    /// `x ↦ λ^s` reduced by `Φ_ℓ(λ) = 0`.
    pub fn lambda_coeffs(&self) -> Vec<Rat> {
        let f = &self.field;
        if f.root_exponent == 1 {
            return self.coeffs.clone();
        }
        let ell = f.order as i64;
        let s = mod_inverse(f.root_exponent as i64, ell);
        let mut spread = vec![Rat::zero(); f.order as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            spread[(i as i64 * s).rem_euclid(ell) as usize] += c;
        }
        // reduce the spread polynomial in λ using the same Φ
        let mut out = vec![Rat::zero(); f.degree];
        for (k, c) in spread.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, t) in out.iter_mut().zip(&f.x_powers_or_compute(k)) {
                *o += c * t;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value if this element lies in `Q`.
    pub fn as_rational(&self) -> Option<&Rat> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<(), ArithError> {
        if Arc::ptr_eq(&self.field, &other.field)
            || (self.field.order == other.field.order
                && self.field.root_exponent == other.field.root_exponent)
        {
            Ok(())
        } else {
            Err(ArithError::OrderMismatch {
                left: self.field.order,
                right: other.field.order,
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        Ok(CycNum {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        Ok(CycNum {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        if let Some(r) = other.as_rational() {
            return Ok(self.scale(r));
        }
        if let Some(r) = self.as_rational() {
            return Ok(other.scale(r));
        }
        Ok(CycNum {
            field: self.field.clone(),
            coeffs: self.field.mul_coeffs(&self.coeffs, &other.coeffs),
        })
    }

    pub fn scale(&self, r: &Rat) -> Self {
        CycNum {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against `Φ_ℓ`.
    pub fn inv(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(CycNum::from_rat(&self.field, r.recip()));
        }
        let phi: Vec<Rat> = self
            .field
            .phi
            .iter()
            .map(|&c| Rat::from_integer(BigInt::from(c)))
            .collect();
        // invariant: s·a ≡ r (mod Φ)
        let (mut r0, mut r1) = (phi, trim(self.coeffs.clone()));
        let (mut s0, mut s1) = (vec![], vec![Rat::one()]);
        while !(r1.len() == 1 && !r1[0].is_zero()) {
            let (q, rem) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
            if r1.is_empty() {
                // gcd is nontrivial; impossible for a nonzero residue since Φ is irreducible
                return Err(ArithError::DivisionByZero);
            }
        }
        let c = r1[0].recip();
        let s: Vec<Rat> = s1.iter().map(|x| x * &c).collect();
        Ok(CycNum::from_x_coeffs(&self.field, &s))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = CycNum::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

impl CyclotomicField {
    fn x_powers_or_compute(&self, k: usize) -> Vec<Rat> {
        self.x_pow(k as u64)
    }
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let g = a.extended_gcd(&m);
    g.x.rem_euclid(m)
}

fn trim(mut p: Vec<Rat>) -> Vec<Rat> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(Rat::zero);
            let y = b.get(i).cloned().unwrap_or_else(Rat::zero);
            x - y
        })
        .collect();
    trim(out)
}

fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut rem = trim(a.to_vec());
    let b = trim(b.to_vec());
    let lead = b.last().expect("nonzero divisor").clone();
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let mut quot = vec![Rat::zero(); rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let c = rem.last().unwrap() / &lead;
        for (i, bi) in b.iter().enumerate() {
            rem[shift + i] -= &c * bi;
        }
        quot[shift] = c;
        rem = trim(rem);
    }
    (trim(quot), rem)
}

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        self.field.order == other.field.order
            && self.field.root_exponent == other.field.root_exponent
            && self.coeffs == other.coeffs
    }
}

impl Eq for CycNum {}

impl std::hash::Hash for CycNum {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.order.hash(state);
        self.coeffs.hash(state);
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a CycNum> for &'a CycNum {
            type Output = CycNum;
            fn $m(self, rhs: &'a CycNum) -> CycNum {
                self.$checked(rhs).expect("cyclotomic order mismatch")
            }
        }
        impl $tr<CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: CycNum) -> CycNum {
                self.$checked(&rhs).expect("cyclotomic order mismatch")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

/// Formats a rational as `a` or `a/b`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CycNum {
    /// Polynomial in `q` (standing for `λ`), lowest power first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs = self.lambda_coeffs();
        let mut first = true;
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mono = match k {
                0 => String::new(),
                1 => "q".to_string(),
                _ => format!("q^{k}"),
            };
            if k == 0 {
                write!(f, "{}", fmt_rat(&abs))?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_rat(&abs))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum[{}]({})", self.field.order, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(l: i64) -> Arc<CyclotomicField> {
        CyclotomicField::new(l).unwrap()
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1).unwrap(), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(3).unwrap(), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(9).unwrap(), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyclotomic_polynomial(15).unwrap(), vec![1, -1, 0, 1, -1, 1, 0, -1, 1]);
        assert!(matches!(cyclotomic_polynomial(0), Err(ArithError::InvalidIndex(0))));
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(CyclotomicField::new(4).is_err());
        assert!(CyclotomicField::new(1).is_err());
        assert!(matches!(
            CyclotomicField::with_root_exponent(9, 3),
            Err(ArithError::InvalidRootExponent { .. })
        ));
    }

    #[test]
    fn lambda_has_exact_order() {
        for l in [3, 5, 7, 9, 15] {
            let f = field(l);
            for k in 1..l {
                assert!(!CycNum::lambda_pow(&f, k).is_one(), "λ^{k} = 1 for ℓ = {l}");
            }
            assert!(CycNum::lambda_pow(&f, l).is_one());
            assert!(CycNum::lambda_pow(&f, 0).is_one());
            let prod = &CycNum::lambda_pow(&f, -1) * &CycNum::lambda_pow(&f, 1);
            assert!(prod.is_one());
            let lam = CycNum::lambda_pow(&f, 1);
            assert!((&lam * &CycNum::lambda_pow(&f, l - 1)).is_one());
        }
    }

    #[test]
    fn phi3_vanishes_at_lambda() {
        let f = field(3);
        let s = &(&CycNum::one(&f) + &CycNum::lambda_pow(&f, 1)) + &CycNum::lambda_pow(&f, 2);
        assert!(s.is_zero());
    }

    #[test]
    fn inverses() {
        let f = field(7);
        assert!(CycNum::one(&f).inv().unwrap().is_one());
        let lam = CycNum::lambda_pow(&f, 1);
        assert_eq!(lam.inv().unwrap(), CycNum::lambda_pow(&f, 6));
        let d = &lam - &CycNum::lambda_pow(&f, -1);
        assert!((&d.inv().unwrap() * &d).is_one());
        assert_eq!(CycNum::zero(&f).inv(), Err(ArithError::DivisionByZero));
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = CycNum::one(&field(3));
        let b = CycNum::one(&field(5));
        assert_eq!(a.try_mul(&b), Err(ArithError::OrderMismatch { left: 3, right: 5 }));
    }

    #[test]
    fn display_in_q() {
        let f = field(3);
        let lam = CycNum::lambda_pow(&f, 1);
        assert_eq!(lam.to_string(), "q");
        // λ² = -1 - λ
        assert_eq!(CycNum::lambda_pow(&f, 2).to_string(), "-1 - q");
        assert_eq!(CycNum::zero(&f).to_string(), "0");
    }

    #[test]
    fn root_exponent_changes_lambda_but_not_its_q_rendering() {
        let f = CyclotomicField::with_root_exponent(5, 2).unwrap();
        let lam = CycNum::lambda_pow(&f, 1);
        assert_eq!(lam.coeffs()[2], Rat::one());
        assert_eq!(lam.to_string(), "q");
        assert_eq!(CycNum::lambda_pow(&f, 3).to_string(), "q^3");
    }
}
