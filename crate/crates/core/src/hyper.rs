//! Truncated hyperalgebras `D_n = Dist(SL2)_{p^n}` over `F_p` on the basis
//! `Y^(a)H^(b)X^(c)`, `0 ≤ a, b, c < p^n`, with structure constants extracted
//! from the generating-series relations, the Frobenius-type maps `π_k`, and the
//! one-dimensional models `Dist(G_a)` and `Dist(G_m)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{rank, Fp, SparseVec};
use crate::qnum::{is_prime, lucas_binom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("level must be at least 1")]
    LevelZero,
    #[error("p^n = {p}^{level} is too large")]
    TooLarge { p: u64, level: u32 },
    #[error("index {index} is outside the truncation bound {bound}")]
    Truncation { index: u64, bound: u64 },
    #[error("parameters differ: (p={left_p}, n={left_n}) vs (p={right_p}, n={right_n})")]
    ParamsMismatch { left_p: u64, left_n: u32, right_p: u64, right_n: u32 },
    #[error("π_{k} expects an element of level {expected}, got level {got}")]
    LevelMismatch { k: u32, expected: u32, got: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HypParams {
    p: u64,
    level: u32,
}

impl HypParams {
    pub fn new(p: u64, level: u32) -> Result<Self, HypError> {
        if !is_prime(p) {
            return Err(HypError::NotPrime(p));
        }
        if level == 0 {
            return Err(HypError::LevelZero);
        }
        match p.checked_pow(level) {
            Some(b) if b <= 1 << 16 => Ok(HypParams { p, level }),
            _ => Err(HypError::TooLarge { p, level }),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `p^n`, the exclusive bound on every exponent.
    pub fn bound(&self) -> u64 {
        self.p.pow(self.level)
    }

    pub fn dim(&self) -> u64 {
        self.bound().pow(3)
    }
}

/// `Y^(a) H^(b) X^(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HypMonomial {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl HypMonomial {
    pub const UNIT: HypMonomial = HypMonomial { a: 0, b: 0, c: 0 };

    pub fn new(a: u64, b: u64, c: u64) -> Self {
        HypMonomial { a, b, c }
    }
}

impl fmt::Display for HypMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == HypMonomial::UNIT {
            return write!(f, "1");
        }
        for (sym, e) in [("Y", self.a), ("H", self.b), ("X", self.c)] {
            if e > 0 {
                write!(f, "{sym}^({e})")?;
            }
        }
        Ok(())
    }
}

/// Sparse `F_p`-combination of basis monomials; coefficients lie in `1..p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypElement {
    params: HypParams,
    terms: BTreeMap<HypMonomial, u64>,
}

impl HypElement {
    pub fn zero(params: HypParams) -> Self {
        HypElement {
            params,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(params: HypParams, m: HypMonomial, coeff: i64) -> Result<Self, HypError> {
        let bound = params.bound();
        for index in [m.a, m.b, m.c] {
            if index >= bound {
                return Err(HypError::Truncation { index, bound });
            }
        }
        let mut out = Self::zero(params);
        out.add_term(m, coeff.rem_euclid(params.p as i64) as u64);
        Ok(out)
    }

    pub fn params(&self) -> HypParams {
        self.params
    }

    pub fn terms(&self) -> &BTreeMap<HypMonomial, u64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &HypMonomial) -> u64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    fn add_term(&mut self, m: HypMonomial, c: u64) {
        let p = self.params.p;
        let c = c % p;
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0);
        *entry = (*entry + c) % p;
        if *entry == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &HypElement) -> HypElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, *c);
        }
        out
    }

    pub fn sub(&self, other: &HypElement) -> HypElement {
        let p = self.params.p;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, p - c);
        }
        out
    }

    pub fn scale(&self, s: u64) -> HypElement {
        let mut out = HypElement::zero(self.params);
        for (m, c) in &self.terms {
            out.add_term(*m, mul_mod(*c, s, self.params.p));
        }
        out
    }
}

impl fmt::Display for HypElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match (*c, *m == HypMonomial::UNIT) {
                (1, _) => write!(f, "{m}")?,
                (_, true) => write!(f, "{c}")?,
                _ => write!(f, "{c}*{m}")?,
            }
        }
        Ok(())
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

fn binom_mod(m: u64, n: u64, p: u64) -> u64 {
    lucas_binom(m, n, p).expect("p is prime")
}

/// Truncated power series in `t, u` over `F_p`, keeping `t^i u^j` for `i ≤ deg_t`, `j ≤ deg_u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries2 {
    p: u64,
    deg_t: usize,
    deg_u: usize,
    coeffs: Vec<u64>,
}

impl TruncSeries2 {
    pub fn zero(p: u64, deg_t: usize, deg_u: usize) -> Self {
        TruncSeries2 {
            p,
            deg_t,
            deg_u,
            coeffs: vec![0; (deg_t + 1) * (deg_u + 1)],
        }
    }

    /// `c·t^i u^j`, or zero when beyond the truncation.
    pub fn monomial(p: u64, deg_t: usize, deg_u: usize, i: usize, j: usize, c: i64) -> Self {
        let mut s = Self::zero(p, deg_t, deg_u);
        if i <= deg_t && j <= deg_u {
            s.coeffs[i * (deg_u + 1) + j] = c.rem_euclid(p as i64) as u64;
        }
        s
    }

    pub fn one(p: u64, deg_t: usize, deg_u: usize) -> Self {
        Self::monomial(p, deg_t, deg_u, 0, 0, 1)
    }

    pub fn coeff(&self, i: usize, j: usize) -> u64 {
        if i > self.deg_t || j > self.deg_u {
            return 0;
        }
        self.coeffs[i * (self.deg_u + 1) + j]
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, y) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *x = (*x + y) % self.p;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.p, self.deg_t, self.deg_u);
        let w = self.deg_u + 1;
        for i1 in 0..=self.deg_t {
            for j1 in 0..=self.deg_u {
                let x = self.coeffs[i1 * w + j1];
                if x == 0 {
                    continue;
                }
                for i2 in 0..=self.deg_t - i1 {
                    for j2 in 0..=self.deg_u - j1 {
                        let y = other.coeffs[i2 * w + j2];
                        if y != 0 {
                            let slot = &mut out.coeffs[(i1 + i2) * w + j1 + j2];
                            *slot = (*slot + mul_mod(x, y, self.p)) % self.p;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.p, self.deg_t, self.deg_u);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a series with constant term one.
    pub fn inverse_of_unipotent(&self) -> Self {
        assert_eq!(self.coeff(0, 0), 1, "constant term must be one");
        // 1/(1 + r) = Σ (−r)^d; r is nilpotent in the truncation
        let mut neg_r = Self::zero(self.p, self.deg_t, self.deg_u);
        for (k, x) in self.coeffs.iter().enumerate().skip(1) {
            neg_r.coeffs[k] = (self.p - x) % self.p;
        }
        let mut acc = Self::one(self.p, self.deg_t, self.deg_u);
        let mut term = acc.clone();
        for _ in 0..self.deg_t + self.deg_u {
            term = term.mul(&neg_r);
            acc = acc.add(&term);
        }
        acc
    }
}

/// Coefficient of `t^n u^m` in `v^a w^b z^c` for `v = u/(1+tu)`, `w = tu`,
/// `z = t/(1+tu)`: the weight of `Y^(a)H^(b)X^(c)` in `X(t)Y(u)`.
fn xy_weight(p: u64, n: u64, m: u64, mono: HypMonomial) -> u64 {
    let (dt, du) = (n as usize, m as usize);
    let s = |i, j, c| TruncSeries2::monomial(p, dt, du, i, j, c);
    let inv = s(0, 0, 1).add(&s(1, 1, 1)).inverse_of_unipotent();
    let v = s(0, 1, 1).mul(&inv);
    let w = s(1, 1, 1);
    let z = s(1, 0, 1).mul(&inv);
    v.pow(mono.a).mul(&w.pow(mono.b)).mul(&z.pow(mono.c)).coeff(dt, du)
}

/// `[t^j] (1+t)^{−e}` over `F_p`.
fn neg_binomial_series(p: u64, e: u64, j: u64) -> u64 {
    let d = j as usize;
    let base = TruncSeries2::one(p, d, 0).add(&TruncSeries2::monomial(p, d, 0, 1, 0, 1));
    base.inverse_of_unipotent().pow(e).coeff(d, 0)
}

/// `[t^b u^{b'}] (t + u + tu)^j`, the weight of `H^(j)` in `H^(b)H^(b')`.
fn hh_weight(p: u64, b: u64, b2: u64, j: u64) -> u64 {
    let (dt, du) = (b as usize, b2 as usize);
    let s = |i, k| TruncSeries2::monomial(p, dt, du, i, k, 1);
    s(1, 0).add(&s(0, 1)).add(&s(1, 1)).pow(j).coeff(dt, du)
}

type Expansion = Vec<(u64, u64)>;

/// Structure tables and product for one `D_n`.
#[derive(Debug, Clone)]
pub struct HypAlgebra {
    params: HypParams,
    // X^(c)Y^(a) = Σ coeff · Y^(a−l)H^(k)X^(c−l)
    xy: Vec<Vec<Vec<(u64, u64, u64)>>>,
    // H^(b)Y^(a) = Σ coeff · Y^(a)H^(j)
    hy: Vec<Vec<Expansion>>,
    // X^(c)H^(b) = Σ coeff · H^(j)X^(c)
    xh: Vec<Vec<Expansion>>,
    // H^(b)H^(b') = Σ coeff · H^(j)
    hh: Vec<Vec<Expansion>>,
}

impl HypAlgebra {
    pub fn new(params: HypParams) -> Self {
        let p = params.p;
        let bound = params.bound();
        let xy = (0..bound)
            .map(|c| (0..bound).map(|a| xy_expansion(p, c, a)).collect())
            .collect();
        let neg = |e: u64, b: u64| -> Expansion {
            (0..=b)
                .filter_map(|j| {
                    let w = neg_binomial_series(p, e, b - j);
                    (w != 0).then_some((j, w))
                })
                .collect()
        };
        let hy = (0..bound).map(|b| (0..bound).map(|a| neg(2 * a, b)).collect()).collect();
        let xh = (0..bound).map(|c| (0..bound).map(|b| neg(2 * c, b)).collect()).collect();
        let hh = (0..bound)
            .map(|b| {
                (0..bound)
                    .map(|b2| {
                        (b.max(b2)..=b + b2)
                            .filter_map(|j| {
                                let w = hh_weight(p, b, b2, j);
                                (w != 0).then_some((j, w))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        HypAlgebra { params, xy, hy, xh, hh }
    }

    pub fn params(&self) -> HypParams {
        self.params
    }

    pub fn one(&self) -> HypElement {
        self.basis(HypMonomial::UNIT)
    }

    pub fn basis(&self, m: HypMonomial) -> HypElement {
        HypElement::monomial(self.params, m, 1).expect("monomial within bound")
    }

    pub fn x(&self, n: u64) -> Result<HypElement, HypError> {
        HypElement::monomial(self.params, HypMonomial::new(0, 0, n), 1)
    }

    pub fn y(&self, n: u64) -> Result<HypElement, HypError> {
        HypElement::monomial(self.params, HypMonomial::new(n, 0, 0), 1)
    }

    pub fn h(&self, n: u64) -> Result<HypElement, HypError> {
        HypElement::monomial(self.params, HypMonomial::new(0, n, 0), 1)
    }

    pub fn basis_monomials(&self) -> Vec<HypMonomial> {
        let b = self.params.bound();
        let mut out = Vec::with_capacity(self.params.dim() as usize);
        for a in 0..b {
            for h in 0..b {
                for c in 0..b {
                    out.push(HypMonomial::new(a, h, c));
                }
            }
        }
        out
    }

    /// Generators `X^(p^j)`, `Y^(p^j)`, `H^(p^j)` for `j < n`.
    pub fn generators(&self) -> Vec<(String, HypElement)> {
        let mut out = Vec::new();
        for j in 0..self.params.level {
            let e = self.params.p.pow(j);
            out.push((format!("X^({e})"), self.x(e).expect("in range")));
            out.push((format!("Y^({e})"), self.y(e).expect("in range")));
            out.push((format!("H^({e})"), self.h(e).expect("in range")));
        }
        out
    }

    /// Normal-ordered expansion of `X^(n)Y^(m)` by coefficient extraction.
    pub fn xy_normal_order(&self, n: u64, m: u64) -> Result<HypElement, HypError> {
        let bound = self.params.bound();
        for index in [n, m] {
            if index >= bound {
                return Err(HypError::Truncation { index, bound });
            }
        }
        let mut out = HypElement::zero(self.params);
        for (l, k, w) in &self.xy[n as usize][m as usize] {
            out.add_term(HypMonomial::new(m - l, *k, n - l), *w);
        }
        Ok(out)
    }

    /// `H^(b)X^(c) = Σ_j w_j X^(c)H^(j)`, returned as the pairs `(j, w_j)`.
    pub fn hx_normal_order(&self, b: u64, c: u64) -> Result<Vec<(u64, u64)>, HypError> {
        self.check_bound(b.max(c))?;
        let p = self.params.p;
        Ok((0..=b)
            .filter_map(|j| {
                let base = TruncSeries2::one(p, b as usize, 0).add(&TruncSeries2::monomial(p, b as usize, 0, 1, 0, 1));
                let w = base.pow(2 * c).coeff((b - j) as usize, 0);
                (w != 0).then_some((j, w))
            })
            .collect())
    }

    /// Normal-ordered expansion of `H^(b)Y^(a)`.
    pub fn hy_normal_order(&self, b: u64, a: u64) -> Result<HypElement, HypError> {
        self.check_bound(b.max(a))?;
        let mut out = HypElement::zero(self.params);
        for (j, w) in &self.hy[b as usize][a as usize] {
            out.add_term(HypMonomial::new(a, *j, 0), *w);
        }
        Ok(out)
    }

    fn check_bound(&self, index: u64) -> Result<(), HypError> {
        let bound = self.params.bound();
        if index >= bound {
            return Err(HypError::Truncation { index, bound });
        }
        Ok(())
    }

    fn merge_divided(&self, m: u64, n: u64) -> Option<(u64, u64)> {
        let w = binom_mod(m + n, m, self.params.p);
        if w == 0 {
            return None;
        }
        debug_assert!(m + n < self.params.bound(), "nonzero divided-power overflow");
        Some((m + n, w))
    }

    pub fn mul_monomials(&self, x: HypMonomial, y: HypMonomial) -> HypElement {
        let p = self.params.p;
        let mut out = HypElement::zero(self.params);
        for &(l, k, w1) in &self.xy[x.c as usize][y.a as usize] {
            let (a_mid, c_mid) = (y.a - l, x.c - l);
            let Some((a_new, wa)) = self.merge_divided(x.a, a_mid) else {
                continue;
            };
            let Some((c_new, wc)) = self.merge_divided(c_mid, y.c) else {
                continue;
            };
            let outer = mul_mod(mul_mod(w1, wa, p), wc, p);
            for &(j1, w2) in &self.hy[x.b as usize][a_mid as usize] {
                for &(j2, w3) in &self.xh[c_mid as usize][y.b as usize] {
                    for &(h1, w4) in &self.hh[j1 as usize][k as usize] {
                        for &(h2, w5) in &self.hh[h1 as usize][j2 as usize] {
                            let w = [w2, w3, w4, w5].iter().fold(outer, |acc, v| mul_mod(acc, *v, p));
                            out.add_term(HypMonomial::new(a_new, h2, c_new), w);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn multiply(&self, x: &HypElement, y: &HypElement) -> Result<HypElement, HypError> {
        for other in [x.params, y.params] {
            if other != self.params {
                return Err(HypError::ParamsMismatch {
                    left_p: self.params.p,
                    left_n: self.params.level,
                    right_p: other.p,
                    right_n: other.level,
                });
            }
        }
        let p = self.params.p;
        let mut out = HypElement::zero(self.params);
        for (m1, c1) in &x.terms {
            for (m2, c2) in &y.terms {
                let c = mul_mod(*c1, *c2, p);
                for (m, w) in self.mul_monomials(*m1, *m2).terms {
                    out.add_term(m, mul_mod(c, w, p));
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, x: &HypElement, y: &HypElement) -> Result<HypElement, HypError> {
        Ok(self.multiply(x, y)?.sub(&self.multiply(y, x)?))
    }

    /// Counit: `ε(Y^(a)H^(b)X^(c)) = δ_{a,0} δ_{b,0} δ_{c,0}`.
    pub fn counit(&self, x: &HypElement) -> u64 {
        x.coefficient(&HypMonomial::UNIT)
    }
}

fn xy_expansion(p: u64, c: u64, a: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for l in 0..=c.min(a) {
        for k in 0..=l {
            let w = xy_weight(p, c, a, HypMonomial::new(a - l, k, c - l));
            if w != 0 {
                out.push((l, k, w));
            }
        }
    }
    out
}

/// `π_k : D_{k+1} → D_1`: a monomial survives when `p^k` divides every exponent,
/// and the exponents are then divided by `p^k`.
pub fn frobenius_pi_k(x: &HypElement, k: u32) -> Result<HypElement, HypError> {
    let params = x.params();
    if params.level != k + 1 {
        return Err(HypError::LevelMismatch {
            k,
            expected: k + 1,
            got: params.level,
        });
    }
    let target = HypParams::new(params.p, 1)?;
    let q = params.p.pow(k);
    let mut out = HypElement::zero(target);
    for (m, c) in x.terms() {
        if m.a % q == 0 && m.b % q == 0 && m.c % q == 0 {
            out.add_term(HypMonomial::new(m.a / q, m.b / q, m.c / q), *c);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    pub p: u64,
    pub k: u32,
    pub dim_lower: u64,
    pub dim_upper: u64,
    pub kernel_dim: u64,
    /// `dim D_{k+1} − dim D_1`, the kernel of a surjection onto `D_1`.
    pub kernel_dim_expected: u64,
    /// `dim D_{k+1} − dim D_k`.
    pub step_difference: u64,
    pub augmentation_span_dim: u64,
    pub augmentation_span_in_kernel: bool,
}

/// Ranks for `π_k : D_{k+1} → D_1` and for the span of `D_{k+1}·(D_k)^+`.
pub fn dimension_bookkeeping(p: u64, k: u32) -> Result<DimensionReport, HypError> {
    let upper = HypAlgebra::new(HypParams::new(p, k + 1)?);
    let lower = HypParams::new(p, k)?;
    let dim_upper = upper.params.dim();
    let b1 = HypParams::new(p, 1)?.bound();
    let index_small = |m: &HypMonomial| ((m.a * b1 + m.b) * b1 + m.c) as usize;
    let bu = upper.params.bound();
    let index_big = |m: &HypMonomial| ((m.a * bu + m.b) * bu + m.c) as usize;
    let to_vec = |x: &HypElement, idx: &dyn Fn(&HypMonomial) -> usize| -> SparseVec<Fp> {
        x.terms().iter().map(|(m, c)| (idx(m), Fp::new(*c as i64, p))).collect()
    };
    let images = upper
        .basis_monomials()
        .into_iter()
        .map(|m| frobenius_pi_k(&upper.basis(m), k).map(|v| to_vec(&v, &index_small)))
        .collect::<Result<Vec<_>, _>>()?;
    let image_rank = rank(images) as u64;

    let lb = lower.bound();
    let mut products = Vec::new();
    let mut in_kernel = true;
    for x in upper.basis_monomials() {
        for a in 0..lb {
            for b in 0..lb {
                for c in 0..lb {
                    let y = HypMonomial::new(a, b, c);
                    if y == HypMonomial::UNIT {
                        continue;
                    }
                    let prod = upper.mul_monomials(x, y);
                    if !frobenius_pi_k(&prod, k)?.is_zero() {
                        in_kernel = false;
                    }
                    products.push(to_vec(&prod, &index_big));
                }
            }
        }
    }
    Ok(DimensionReport {
        p,
        k,
        dim_lower: lower.dim(),
        dim_upper,
        kernel_dim: dim_upper - image_rank,
        kernel_dim_expected: dim_upper - p.pow(3),
        step_difference: dim_upper - lower.dim(),
        augmentation_span_dim: rank(products) as u64,
        augmentation_span_in_kernel: in_kernel,
    })
}

/// `Dist(G_a)` and `Dist(G_m)` truncated to indices `≤ bound`, with products
/// computed by duality against `t^m`, respectively `(t−1)^m`.
#[derive(Debug, Clone)]
pub struct OneDimModel {
    pub name: &'static str,
    pub p: u64,
    pub bound: u64,
    /// `(a, b) ↦ {c ↦ integer structure constant}`
    pub structure: BTreeMap<(u64, u64), BTreeMap<u64, BigInt>>,
}

impl OneDimModel {
    /// `x_a · x_b` reduced mod `p`, dropping indices beyond the bound.
    pub fn multiply_mod_p(&self, a: u64, b: u64) -> BTreeMap<u64, u64> {
        let pb = BigInt::from(self.p);
        self.structure[&(a, b)]
            .iter()
            .filter(|(c, _)| **c <= self.bound)
            .filter_map(|(c, w)| {
                let r = ((w % &pb) + &pb) % &pb;
                (!r.is_zero()).then(|| (*c, r.to_u64().expect("below p")))
            })
            .collect()
    }
}

/// Products of the dual basis to `s^m` for a coproduct `Δ(s)` given as a list
/// of `(i, j)` exponent pairs of `s^i ⊗ s^j`, each with coefficient one.
fn dual_basis_products(delta: &[(u64, u64)], bound: u64) -> BTreeMap<(u64, u64), BTreeMap<u64, BigInt>> {
    let mut powers: Vec<BTreeMap<(u64, u64), BigInt>> = Vec::new();
    let mut cur: BTreeMap<(u64, u64), BigInt> = BTreeMap::new();
    cur.insert((0, 0), BigInt::one());
    for _ in 0..=2 * bound {
        powers.push(cur.clone());
        let mut next = BTreeMap::new();
        for ((i, j), w) in &cur {
            for (di, dj) in delta {
                *next.entry((i + di, j + dj)).or_insert_with(BigInt::zero) += w;
            }
        }
        cur = next;
    }
    let mut out = BTreeMap::new();
    for a in 0..=bound {
        for b in 0..=bound {
            let mut row = BTreeMap::new();
            for (m, pm) in powers.iter().enumerate() {
                if let Some(w) = pm.get(&(a, b)) {
                    if !w.is_zero() {
                        row.insert(m as u64, w.clone());
                    }
                }
            }
            out.insert((a, b), row);
        }
    }
    out
}

pub fn ga_gm_models(p: u64, bound: u64) -> Result<(OneDimModel, OneDimModel), HypError> {
    if !is_prime(p) {
        return Err(HypError::NotPrime(p));
    }
    // G_a: Δ(t) = t⊗1 + 1⊗t.  G_m with s = t − 1: Δ(s) = s⊗s + s⊗1 + 1⊗s.
    let ga = OneDimModel {
        name: "Dist(G_a)",
        p,
        bound,
        structure: dual_basis_products(&[(1, 0), (0, 1)], bound),
    };
    let gm = OneDimModel {
        name: "Dist(G_m)",
        p,
        bound,
        structure: dual_basis_products(&[(1, 1), (1, 0), (0, 1)], bound),
    };
    Ok((ga, gm))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `(a+b−i)! / (i! (a−i)! (b−i)!)`, the weight of `ϖ_{a+b−i}` in `ϖ_a ϖ_b`.
pub fn gm_closed_form(a: u64, b: u64, i: u64) -> BigInt {
    factorial(a + b - i) / (factorial(i) * factorial(a - i) * factorial(b - i))
}

/// Generalised binomial with `C(−1, 0) = 1` and zero for other negative tops.
fn signed_binom(top: i64, bottom: i64) -> BigInt {
    if bottom < 0 {
        return BigInt::zero();
    }
    if top < 0 {
        return if top == -1 && bottom == 0 { BigInt::one() } else { BigInt::zero() };
    }
    if bottom > top {
        return BigInt::zero();
    }
    factorial(top as u64) / (factorial(bottom as u64) * factorial((top - bottom) as u64))
}

fn reduce_mod(x: &BigInt, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let r = ((x % &pb) + &pb) % &pb;
    r.to_u64().expect("below p")
}

/// `X^(n)Y^(m)` from a closed form `Σ_{l,k} sign·C(top(l,k), l−k) Y^(m−l)H^(k)X^(n−l)`.
fn xy_from_closed_form(params: HypParams, n: u64, m: u64, top_shift: i64) -> HypElement {
    let mut out = HypElement::zero(params);
    for l in 0..=n.min(m) {
        for k in 0..=l {
            let top = (m + n) as i64 - l as i64 - k as i64 + top_shift;
            let mut w = signed_binom(top, (l - k) as i64);
            if (l - k) % 2 == 1 {
                w = -w;
            }
            out.add_term(HypMonomial::new(m - l, k, n - l), reduce_mod(&w, params.p));
        }
    }
    out
}

/// The closed form for `X^(n)Y^(m)` with binomial `C(m+n−l−k, l−k)` as printed.
pub fn xy_printed_closed_form(params: HypParams, n: u64, m: u64) -> HypElement {
    xy_from_closed_form(params, n, m, 0)
}

/// The closed form consistent with the generating series: `C(m+n−l−k−1, l−k)`.
pub fn xy_corrected_closed_form(params: HypParams, n: u64, m: u64) -> HypElement {
    xy_from_closed_form(params, n, m, -1)
}

/// `[X^(p^n), Y^(p^m)]` as printed: `Σ_{l≥1} Y^(p^m−l) (Σ_k C(l+k, l−k) H^(k)) X^(p^n−l)`.
pub fn xy_bracket_printed(params: HypParams, pn: u64, pm: u64) -> HypElement {
    let mut out = HypElement::zero(params);
    for l in 1..=pn.min(pm) {
        for k in 0..=l {
            let w = signed_binom((l + k) as i64, (l - k) as i64);
            out.add_term(HypMonomial::new(pm - l, k, pn - l), reduce_mod(&w, params.p));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub input: String,
    pub printed: String,
    pub oracle: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErratumEntry {
    pub formula: String,
    pub cases_checked: usize,
    pub mismatches: usize,
    pub examples: Vec<Discrepancy>,
    pub corrected_form: Option<String>,
    pub corrected_mismatches: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErratumReport {
    pub p: u64,
    pub level: u32,
    pub entries: Vec<ErratumEntry>,
}

impl ErratumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

impl fmt::Display for ErratumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "erratum report for p = {}, level {}", self.p, self.level)?;
        for e in &self.entries {
            let verdict = if e.mismatches == 0 { "agrees" } else { "DISAGREES" };
            writeln!(f, "- {}: {verdict} ({} of {} cases differ)", e.formula, e.mismatches, e.cases_checked)?;
            for d in &e.examples {
                writeln!(f, "    {}: printed {} | oracle {}", d.input, d.printed, d.oracle)?;
            }
            if let (Some(form), Some(bad)) = (&e.corrected_form, e.corrected_mismatches) {
                writeln!(f, "    corrected {form}: {bad} mismatches")?;
            }
        }
        Ok(())
    }
}

struct EntryBuilder {
    entry: ErratumEntry,
}

impl EntryBuilder {
    fn new(formula: &str) -> Self {
        EntryBuilder {
            entry: ErratumEntry {
                formula: formula.to_string(),
                cases_checked: 0,
                mismatches: 0,
                examples: Vec::new(),
                corrected_form: None,
                corrected_mismatches: None,
            },
        }
    }

    fn compare(&mut self, input: String, printed: String, oracle: String) {
        self.entry.cases_checked += 1;
        if printed != oracle {
            self.entry.mismatches += 1;
            if self.entry.examples.len() < 4 {
                self.entry.examples.push(Discrepancy { input, printed, oracle });
            }
        }
    }
}

/// Compares the printed closed forms against the generating-series and duality oracles.
pub fn erratum_report(alg: &HypAlgebra, gm_bound: u64) -> Result<ErratumReport, HypError> {
    let params = alg.params();
    let (p, bound) = (params.p, params.bound());

    let mut closed = EntryBuilder::new("closed form for X^(n)Y^(m) with C(m+n-l-k, l-k)");
    let mut corrected_bad = 0;
    for n in 0..bound {
        for m in 0..bound {
            let oracle = alg.xy_normal_order(n, m)?;
            closed.compare(
                format!("X^({n})Y^({m})"),
                xy_printed_closed_form(params, n, m).to_string(),
                oracle.to_string(),
            );
            if xy_corrected_closed_form(params, n, m) != oracle {
                corrected_bad += 1;
            }
        }
    }
    closed.entry.corrected_form = Some("C(m+n-l-k-1, l-k), C(-1, 0) = 1".to_string());
    closed.entry.corrected_mismatches = Some(corrected_bad);

    let powers: Vec<u64> = (0..params.level).map(|j| p.pow(j)).collect();
    let mut bracket = EntryBuilder::new("bracket [X^(p^n), Y^(p^m)]");
    let mut hx = EntryBuilder::new("bracket [H^(p^m), X^(p^n)] = delta_{m,n} 2 X^(p^n)");
    let mut hy = EntryBuilder::new("bracket [H^(p^m), Y^(p^n)] = -delta_{m,n} 2 Y^(p^n)");
    for &pn in &powers {
        for &pm in &powers {
            let (x, y) = (alg.x(pn)?, alg.y(pm)?);
            bracket.compare(
                format!("[X^({pn}), Y^({pm})]"),
                xy_bracket_printed(params, pn, pm).to_string(),
                alg.commutator(&x, &y)?.to_string(),
            );
            let h = alg.h(pm)?;
            let delta = if pn == pm { 1 } else { 0 };
            hx.compare(
                format!("[H^({pm}), X^({pn})]"),
                x.scale(2 * delta).to_string(),
                alg.commutator(&h, &x)?.to_string(),
            );
            let ypn = alg.y(pn)?;
            hy.compare(
                format!("[H^({pm}), Y^({pn})]"),
                ypn.scale((p - 2 % p) * delta).to_string(),
                alg.commutator(&h, &ypn)?.to_string(),
            );
        }
    }

    let (_, gm) = ga_gm_models(p, gm_bound)?;
    let mut gm_entry = EntryBuilder::new("product in Dist(G_m) with every term on index m+n-1");
    let mut gm_corrected_bad = 0;
    for a in 0..=gm_bound {
        for b in 0..=gm_bound {
            let oracle = &gm.structure[&(a, b)];
            let mut printed: BTreeMap<u64, BigInt> = BTreeMap::new();
            let mut corrected: BTreeMap<u64, BigInt> = BTreeMap::new();
            for i in 0..=a.min(b) {
                let w = gm_closed_form(a, b, i);
                if let Some(target) = (a + b).checked_sub(1) {
                    *printed.entry(target).or_insert_with(BigInt::zero) += &w;
                }
                *corrected.entry(a + b - i).or_insert_with(BigInt::zero) += w;
            }
            printed.retain(|_, w| !w.is_zero());
            let show = |m: &BTreeMap<u64, BigInt>| {
                if m.is_empty() {
                    return "0".to_string();
                }
                m.iter().map(|(c, w)| format!("{w}*w{c}")).collect::<Vec<_>>().join(" + ")
            };
            gm_entry.compare(format!("w{a}*w{b}"), show(&printed), show(oracle));
            if &corrected != oracle {
                gm_corrected_bad += 1;
            }
        }
    }
    gm_entry.entry.corrected_form = Some("(a+b-i)!/(i!(a-i)!(b-i)!) on index a+b-i".to_string());
    gm_entry.entry.corrected_mismatches = Some(gm_corrected_bad);

    Ok(ErratumReport {
        p,
        level: params.level,
        entries: vec![closed.entry, bracket.entry, hx.entry, hy.entry, gm_entry.entry],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(p: u64, n: u32) -> HypAlgebra {
        HypAlgebra::new(HypParams::new(p, n).unwrap())
    }

    #[test]
    fn xy_bracket_is_h() {
        for p in [2, 3, 5] {
            let a = alg(p, 1);
            let expect = a.basis(HypMonomial::new(1, 0, 1)).add(&a.h(1).unwrap());
            assert_eq!(a.xy_normal_order(1, 1).unwrap(), expect);
            assert_eq!(a.commutator(&a.x(1).unwrap(), &a.y(1).unwrap()).unwrap(), a.h(1).unwrap());
        }
    }

    #[test]
    fn trivial_xy_orders() {
        let a = alg(3, 2);
        assert_eq!(a.xy_normal_order(4, 0).unwrap(), a.x(4).unwrap());
        assert_eq!(a.xy_normal_order(0, 7).unwrap(), a.y(7).unwrap());
        assert!(a.xy_normal_order(9, 0).is_err());
    }

    #[test]
    fn hx_expansion_matches_product() {
        let a = alg(3, 2);
        assert_eq!(a.hx_normal_order(1, 1).unwrap(), vec![(0, 2), (1, 1)]);
        assert_eq!(a.hx_normal_order(4, 0).unwrap(), vec![(4, 1)]);
        for b in 0..9 {
            for c in 0..9 {
                let mut lhs = HypElement::zero(a.params());
                for (j, w) in a.hx_normal_order(b, c).unwrap() {
                    lhs = lhs.add(&a.multiply(&a.x(c).unwrap(), &a.h(j).unwrap()).unwrap().scale(w));
                }
                assert_eq!(lhs, a.multiply(&a.h(b).unwrap(), &a.x(c).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn small_products() {
        let a = alg(3, 1);
        let h = a.h(1).unwrap();
        assert_eq!(a.multiply(&h, &h).unwrap(), h.add(&a.h(2).unwrap().scale(2)));
        let x = a.x(1).unwrap();
        assert_eq!(a.multiply(&x, &x).unwrap(), a.x(2).unwrap().scale(2));
        assert!(a.multiply(&a.multiply(&x, &x).unwrap(), &x).unwrap().is_zero());
    }

    #[test]
    fn hh_table_matches_closed_form() {
        let a = alg(3, 2);
        for m in 0..9u64 {
            for n in 0..9u64 {
                let mut expect = HypElement::zero(a.params());
                for l in 0..=m.min(n) {
                    let w = binom_mod(m + n - l, m, 3) * binom_mod(m, l, 3);
                    if m + n - l < 9 {
                        expect.add_term(HypMonomial::new(0, m + n - l, 0), w);
                    } else {
                        assert_eq!(w % 3, 0, "H^({m})H^({n}) leaves the truncation");
                    }
                }
                assert_eq!(a.multiply(&a.h(m).unwrap(), &a.h(n).unwrap()).unwrap(), expect);
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let a = alg(3, 2);
        let one = alg(3, 1);
        assert_eq!(frobenius_pi_k(&a.x(3).unwrap(), 1).unwrap(), one.x(1).unwrap());
        assert!(frobenius_pi_k(&a.x(1).unwrap(), 1).unwrap().is_zero());
        assert!(frobenius_pi_k(&one.x(1).unwrap(), 1).is_err());
    }

    #[test]
    fn one_dimensional_models() {
        let (ga, gm) = ga_gm_models(3, 4).unwrap();
        assert_eq!(ga.multiply_mod_p(1, 1), BTreeMap::from([(2, 2)]));
        assert_eq!(ga.multiply_mod_p(3, 0), BTreeMap::from([(3, 1)]));
        assert_eq!(
            gm.structure[&(1, 1)],
            BTreeMap::from([(1, BigInt::from(1)), (2, BigInt::from(2))])
        );
        for a in 0..=4 {
            for b in 0..=4 {
                let mut expect = BTreeMap::new();
                for i in 0..=a.min(b) {
                    expect.insert(a + b - i, gm_closed_form(a, b, i));
                }
                assert_eq!(gm.structure[&(a, b)], expect);
            }
        }
    }

    #[test]
    fn printed_closed_form_is_off_by_one() {
        let a = alg(3, 1);
        let p = a.params();
        assert_ne!(xy_printed_closed_form(p, 1, 1), a.xy_normal_order(1, 1).unwrap());
        for n in 0..3 {
            for m in 0..3 {
                assert_eq!(xy_corrected_closed_form(p, n, m), a.xy_normal_order(n, m).unwrap());
            }
        }
    }
}
