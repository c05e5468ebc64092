//! The Hopf algebra `u_λ(sl2)`, the coaction `ρ_N : D_{λ,N} → u_λ(sl2) ⊗ D_{λ,N}`,
//! coinvariants, the section `γ` and convolution inverses.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::algebra::{add_term, AlgElement, Algebra, AlgebraError, AlgebraParams, GenKind, GeneratorId, Monomial, Terms};
use crate::arith::CycNum;
use crate::linalg::{kernel_of_images, Echelon, SparseVec};
use crate::qnum::q_factorial;
use crate::format::monomial_text;
use crate::verify::CheckResult;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HopfError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("coinvariants need level N ≥ 1")]
    LevelZero,
    #[error("linear system of size {size} exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("value on the group-like {group_like} is not invertible")]
    NotInvertible { group_like: String },
    #[error("expected an element of level {expected}, got level {got}")]
    WrongLevel { expected: u32, got: u32 },
}

pub type TensorKey = (Monomial, Monomial);
pub type TensorTerms = BTreeMap<TensorKey, CycNum>;

fn add_tensor_term(terms: &mut TensorTerms, key: TensorKey, c: CycNum) {
    if c.is_zero() {
        return;
    }
    match terms.entry(key) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + &c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// A sparse element of `A ⊗ B` on pairs of PBW monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElement {
    left: AlgebraParams,
    right: AlgebraParams,
    terms: TensorTerms,
}

impl TensorElement {
    pub fn zero(left: AlgebraParams, right: AlgebraParams) -> Self {
        TensorElement {
            left,
            right,
            terms: TensorTerms::new(),
        }
    }

    pub fn from_terms(left: AlgebraParams, right: AlgebraParams, terms: TensorTerms) -> Self {
        TensorElement {
            left,
            right,
            terms: terms.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn terms(&self) -> &TensorTerms {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn left_params(&self) -> AlgebraParams {
        self.left
    }

    pub fn right_params(&self) -> AlgebraParams {
        self.right
    }

    pub fn sub(&self, other: &TensorElement) -> TensorElement {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            add_tensor_term(&mut terms, *k, -c);
        }
        TensorElement {
            left: self.left,
            right: self.right,
            terms,
        }
    }

    /// `x ⊗ y` for elements given as term maps.
    pub fn pure(left: &AlgElement, right: &AlgElement) -> TensorElement {
        let mut terms = TensorTerms::new();
        for (a, x) in left.terms() {
            for (b, y) in right.terms() {
                add_tensor_term(&mut terms, (*a, *b), x * y);
            }
        }
        TensorElement {
            left: left.params(),
            right: right.params(),
            terms,
        }
    }
}

/// A linear map `u_λ(sl2) → D_{λ,N}` given by its values on PBW monomials.
pub type LinearMap = BTreeMap<Monomial, AlgElement>;

/// Hopf-side computations for one parameter set: `u = D_{λ,0}` and `D = D_{λ,N}`.
pub struct Hopf {
    u: Arc<Algebra>,
    d: Arc<Algebra>,
    delta_memo: RwLock<HashMap<Monomial, Arc<TensorTerms>>>,
    rho_memo: RwLock<HashMap<Monomial, Arc<TensorTerms>>>,
}

impl Hopf {
    pub fn new(params: AlgebraParams) -> Result<Self, HopfError> {
        let d = Arc::new(Algebra::new(params)?);
        let u = if params.level() == 0 {
            d.clone()
        } else {
            Arc::new(Algebra::new(params.with_level(0)?)?)
        };
        Ok(Self::with_algebras(u, d))
    }

    pub fn with_algebras(u: Arc<Algebra>, d: Arc<Algebra>) -> Self {
        Hopf {
            u,
            d,
            delta_memo: RwLock::new(HashMap::new()),
            rho_memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn u(&self) -> &Algebra {
        &self.u
    }

    pub fn d(&self) -> &Algebra {
        &self.d
    }

    fn level(&self) -> u32 {
        self.d.params().level()
    }

    fn tensor_mul_terms(left: &Algebra, right: &Algebra, x: &TensorTerms, y: &TensorTerms) -> TensorTerms {
        let mut out = TensorTerms::new();
        for ((a1, b1), c1) in x {
            for ((a2, b2), c2) in y {
                let c = c1 * c2;
                let la = left.mul_monomials(*a1, *a2);
                if la.is_empty() {
                    continue;
                }
                let rb = right.mul_monomials(*b1, *b2);
                for (ma, xa) in &la {
                    let cx = &c * xa;
                    for (mb, xb) in &rb {
                        add_tensor_term(&mut out, (*ma, *mb), &cx * xb);
                    }
                }
            }
        }
        out
    }

    /// Product in `u ⊗ D`.
    pub fn tensor_mul(&self, x: &TensorElement, y: &TensorElement) -> TensorElement {
        TensorElement {
            left: x.left,
            right: x.right,
            terms: Self::tensor_mul_terms(&self.u, &self.d, &x.terms, &y.terms),
        }
    }

    fn single(&self, a: Monomial, b: Monomial, c: CycNum) -> TensorTerms {
        let mut t = TensorTerms::new();
        add_tensor_term(&mut t, (a, b), c);
        t
    }

    fn one_c(&self) -> CycNum {
        CycNum::one(self.u.field())
    }

    /// Images of the generators of level `level` of `alg` under the coaction into `u ⊗ alg`,
    /// where `top` is the level carrying the nontrivial coaction.
    fn coaction_generator(&self, alg: &Algebra, kind: GenKind, i: u32, top: u32) -> TensorTerms {
        let p = alg.params();
        let ell = p.ell() as u64;
        let unit = p.level_unit(i);
        let one = self.one_c();
        let id = Monomial::UNIT;
        let (ue, uf, uk) = (Monomial::new(0, 0, 1), Monomial::new(1, 0, 0), Monomial::new(0, 1, 0));
        let (e, f, k) = (
            Monomial::new(0, 0, unit),
            Monomial::new(unit, 0, 0),
            Monomial::new(0, unit, 0),
        );
        if i < top {
            return match kind {
                GenKind::E => self.single(id, e, one),
                GenKind::F => self.single(id, f, one),
                GenKind::K => self.single(id, k, one),
                GenKind::Kinv => self.single(id, Monomial::new(0, (ell - 1) * unit, 0), one),
            };
        }
        let mut t = TensorTerms::new();
        match kind {
            GenKind::E => {
                add_tensor_term(&mut t, (ue, id), one.clone());
                add_tensor_term(&mut t, (uk, e), one);
            }
            GenKind::F => {
                add_tensor_term(&mut t, (uf, Monomial::new(0, (ell - 1) * unit, 0)), one.clone());
                add_tensor_term(&mut t, (id, f), one);
            }
            GenKind::K => add_tensor_term(&mut t, (uk, k), one),
            GenKind::Kinv => add_tensor_term(
                &mut t,
                (Monomial::new(0, ell - 1, 0), Monomial::new(0, (ell - 1) * unit, 0)),
                one,
            ),
        }
        t
    }

    /// Multiplicative extension of the generator images to `F^(m)K^(n)E^(p)`.
    fn extend_to_monomial(&self, alg: &Algebra, mono: Monomial, top: u32) -> TensorTerms {
        let p = alg.params();
        let field = alg.field();
        let mut acc = self.single(Monomial::UNIT, Monomial::UNIT, self.one_c());
        for (kind, value, divided) in [(GenKind::F, mono.f, true), (GenKind::K, mono.k, false), (GenKind::E, mono.e, true)] {
            for i in 0..=p.level() {
                let d = p.digit(value, i);
                if d == 0 {
                    continue;
                }
                let g = self.coaction_generator(alg, kind, i, top);
                for _ in 0..d {
                    acc = Self::tensor_mul_terms(&self.u, alg, &acc, &g);
                }
                if divided {
                    let inv = q_factorial(field, d as i64).expect("digit below ℓ").inv().expect("invertible");
                    acc = acc.into_iter().map(|(k, c)| (k, &c * &inv)).collect();
                }
            }
        }
        acc
    }

    fn delta_mono(&self, mono: Monomial) -> Arc<TensorTerms> {
        if let Some(hit) = self.delta_memo.read().expect("memo lock").get(&mono) {
            return hit.clone();
        }
        let out = Arc::new(self.extend_to_monomial(&self.u, mono, 0));
        self.delta_memo.write().expect("memo lock").insert(mono, out.clone());
        out
    }

    fn rho_mono(&self, mono: Monomial) -> Arc<TensorTerms> {
        if let Some(hit) = self.rho_memo.read().expect("memo lock").get(&mono) {
            return hit.clone();
        }
        let out = Arc::new(self.extend_to_monomial(&self.d, mono, self.level()));
        self.rho_memo.write().expect("memo lock").insert(mono, out.clone());
        out
    }

    fn check_level(x: &AlgElement, expected: u32) -> Result<(), HopfError> {
        if x.params().level() != expected {
            return Err(HopfError::WrongLevel {
                expected,
                got: x.params().level(),
            });
        }
        Ok(())
    }

    fn linear_tensor(
        &self,
        x: &AlgElement,
        right: AlgebraParams,
        f: impl Fn(Monomial) -> Arc<TensorTerms>,
    ) -> TensorElement {
        let mut terms = TensorTerms::new();
        for (m, c) in x.terms() {
            for (k, v) in f(*m).iter() {
                add_tensor_term(&mut terms, *k, c * v);
            }
        }
        TensorElement {
            left: self.u.params(),
            right,
            terms,
        }
    }

    /// `Δ` on `u_λ(sl2)`.
    pub fn coproduct(&self, x: &AlgElement) -> Result<TensorElement, HopfError> {
        Self::check_level(x, 0)?;
        Ok(self.linear_tensor(x, self.u.params(), |m| self.delta_mono(m)))
    }

    /// `ρ_N` on `D_{λ,N}`.
    pub fn rho(&self, x: &AlgElement) -> Result<TensorElement, HopfError> {
        Self::check_level(x, self.level())?;
        Ok(self.linear_tensor(x, self.d.params(), |m| self.rho_mono(m)))
    }

    /// Antipode `S(K) = K^{-1}`, `S(E) = −K^{-1}E`, `S(F) = −FK`, extended anti-multiplicatively.
    pub fn antipode(&self, x: &AlgElement) -> Result<AlgElement, HopfError> {
        Self::check_level(x, 0)?;
        let u = &self.u;
        let ell = u.params().ell() as u64;
        let minus_one = u.scalar(-1);
        let kinv = u.basis_element(Monomial::new(0, ell - 1, 0));
        let s_e = u.multiply(&kinv, &u.basis_element(Monomial::new(0, 0, 1)))?.scale(&minus_one);
        let s_f = u.multiply(&u.basis_element(Monomial::new(1, 0, 0)), &u.basis_element(Monomial::new(0, 1, 0)))?.scale(&minus_one);
        let mut out = u.zero();
        for (m, c) in x.terms() {
            // S(F^(a) K^b E^(c)) = S(E)^c/[c]! · S(K)^b · S(F)^a/[a]!
            let mut acc = u.one();
            for _ in 0..m.e {
                acc = u.multiply(&acc, &s_e)?;
            }
            for _ in 0..m.k {
                acc = u.multiply(&acc, &kinv)?;
            }
            for _ in 0..m.f {
                acc = u.multiply(&acc, &s_f)?;
            }
            let denom = &q_factorial(u.field(), m.e as i64).expect("below ℓ") * &q_factorial(u.field(), m.f as i64).expect("below ℓ");
            let scale = c * &denom.inv().expect("invertible");
            out = &out + &acc.scale(&scale);
        }
        Ok(out)
    }

    /// `γ(F^(a)K^bE^(c)) = F^(aℓ^N) K^(bℓ^N) E^(cℓ^N)`.
    pub fn gamma(&self, x: &AlgElement) -> Result<AlgElement, HopfError> {
        Self::check_level(x, 0)?;
        let unit = self.d.params().level_unit(self.level());
        let mut terms = Terms::new();
        for (m, c) in x.terms() {
            add_term(&mut terms, Monomial::new(m.f * unit, m.k * unit, m.e * unit), c.clone());
        }
        Ok(AlgElement::from_terms(self.d.params(), terms))
    }

    pub fn gamma_map(&self) -> LinearMap {
        self.u_basis()
            .into_iter()
            .map(|m| (m, self.gamma(&self.u.basis_element(m)).expect("level 0")))
            .collect()
    }

    /// `x ↦ ε(x)·1`, the unit of the convolution algebra.
    pub fn unit_counit_map(&self) -> LinearMap {
        self.u_basis()
            .into_iter()
            .map(|m| (m, self.d.constant(self.u.counit(&self.u.basis_element(m)))))
            .collect()
    }

    pub fn u_basis(&self) -> Vec<Monomial> {
        let ell = self.u.params().ell() as u64;
        let mut out = Vec::new();
        for f in 0..ell {
            for k in 0..ell {
                for e in 0..ell {
                    out.push(Monomial::new(f, k, e));
                }
            }
        }
        out
    }

    pub fn d_basis(&self) -> Vec<Monomial> {
        let b = self.d.params().index_bound();
        let mut out = Vec::with_capacity((b * b * b) as usize);
        for f in 0..b {
            for k in 0..b {
                for e in 0..b {
                    out.push(Monomial::new(f, k, e));
                }
            }
        }
        out
    }

    /// `(f * g)(x) = Σ f(x₁) g(x₂)` evaluated on one basis monomial.
    pub fn convolve_at(&self, f: &LinearMap, g: &LinearMap, x: Monomial) -> Result<AlgElement, HopfError> {
        let mut acc = self.d.zero();
        for ((a, b), c) in self.delta_mono(x).iter() {
            let prod = self.d.multiply(&f[a], &g[b])?;
            acc = &acc + &prod.scale(c);
        }
        Ok(acc)
    }

    /// Inverse of a value on a group-like, when it lies in the `K`-subalgebra.
    fn invert_in_k_subalgebra(&self, y: &AlgElement, label: &str) -> Result<AlgElement, HopfError> {
        let err = || HopfError::NotInvertible {
            group_like: label.to_string(),
        };
        if y.terms().keys().any(|m| m.f != 0 || m.e != 0) || y.is_zero() {
            return Err(err());
        }
        if y.terms().len() == 1 {
            let (m, c) = y.terms().iter().next().expect("one term");
            let p = self.d.params();
            let ell = p.ell() as u64;
            let mut inv_k = 0;
            for i in 0..=p.level() {
                inv_k += ((ell - p.digit(m.k, i)) % ell) * p.level_unit(i);
            }
            return Ok(self.d.basis_element(Monomial::new(0, inv_k, 0)).scale(&c.inv().expect("nonzero")));
        }
        // y·z = 1 inside the commutative group algebra of the K-monomials
        let bound = self.d.params().index_bound();
        let images: Vec<SparseVec<CycNum>> = (0..bound)
            .map(|k| {
                let prod = self
                    .d
                    .multiply(y, &self.d.basis_element(Monomial::new(0, k, 0)))
                    .expect("same params");
                prod.terms().iter().map(|(m, c)| (m.k as usize, c.clone())).collect()
            })
            .collect();
        let mut columns = images;
        let mut rhs = SparseVec::new();
        rhs.insert(0usize, CycNum::from_int(self.d.field(), -1));
        columns.push(rhs);
        let one = CycNum::one(self.d.field());
        let kernel = kernel_of_images(&columns, &one);
        let sol = kernel
            .into_iter()
            .find(|v| v.get(&(bound as usize)).is_some_and(|c| c.is_one()))
            .ok_or_else(err)?;
        let mut terms = Terms::new();
        for (k, c) in sol {
            if k < bound as usize {
                add_term(&mut terms, Monomial::new(0, k as u64, 0), c);
            }
        }
        Ok(AlgElement::from_terms(self.d.params(), terms))
    }

    /// Right convolution inverse `g` with `f * g = ε·1`, solved along the
    /// coradical filtration: the coproduct of `F^(a)K^bE^(c)` contains
    /// `K^{b+c} ⊗ F^(a)K^bE^(c)` with coefficient one, and every other term
    /// has fewer `E` and `F` letters in its right factor.
    pub fn convolution_inverse(&self, f: &LinearMap) -> Result<LinearMap, HopfError> {
        let ell = self.u.params().ell() as u64;
        let mut basis = self.u_basis();
        basis.sort_by_key(|m| (m.f + m.e, *m));
        let mut g: LinearMap = LinearMap::new();
        let mut group_inverse: HashMap<u64, AlgElement> = HashMap::new();
        for x in basis {
            let top_k = (x.k + x.e) % ell;
            let head = Monomial::new(0, top_k, 0);
            let head_inv = match group_inverse.get(&top_k) {
                Some(v) => v.clone(),
                None => {
                    let v = self.invert_in_k_subalgebra(&f[&head], &format!("K^{top_k}"))?;
                    group_inverse.insert(top_k, v.clone());
                    v
                }
            };
            let mut rest = self.d.constant(self.u.counit(&self.u.basis_element(x)));
            for ((a, b), c) in self.delta_mono(x).iter() {
                if *b == x {
                    debug_assert!(*a == head && c.is_one());
                    continue;
                }
                let prod = self.d.multiply(&f[a], &g[b])?;
                rest = &rest - &prod.scale(c);
            }
            g.insert(x, self.d.multiply(&head_inv, &rest)?);
        }
        Ok(g)
    }

    /// Left convolution inverse `h` with `h * f = ε·1`. The coproduct of
    /// `F^(a)K^bE^(c)` contains `F^(a)K^bE^(c) ⊗ K^{b−a}` with coefficient one.
    /// Both triangular systems have unique solutions, so a two-sided inverse
    /// exists exactly when this agrees with [`Hopf::convolution_inverse`].
    pub fn left_convolution_inverse(&self, f: &LinearMap) -> Result<LinearMap, HopfError> {
        let ell = self.u.params().ell() as u64;
        let mut basis = self.u_basis();
        basis.sort_by_key(|m| (m.f + m.e, *m));
        let mut h: LinearMap = LinearMap::new();
        let mut group_inverse: HashMap<u64, AlgElement> = HashMap::new();
        for x in basis {
            let tail_k = (x.k + ell - x.f) % ell;
            let tail = Monomial::new(0, tail_k, 0);
            let tail_inv = match group_inverse.get(&tail_k) {
                Some(v) => v.clone(),
                None => {
                    let v = self.invert_in_k_subalgebra(&f[&tail], &format!("K^{tail_k}"))?;
                    group_inverse.insert(tail_k, v.clone());
                    v
                }
            };
            let mut rest = self.d.constant(self.u.counit(&self.u.basis_element(x)));
            for ((a, b), c) in self.delta_mono(x).iter() {
                if *a == x {
                    debug_assert!(*b == tail && c.is_one());
                    continue;
                }
                let prod = self.d.multiply(&h[a], &f[b])?;
                rest = &rest - &prod.scale(c);
            }
            h.insert(x, self.d.multiply(&rest, &tail_inv)?);
        }
        Ok(h)
    }

    /// Right convolution inverse by one dense linear solve over all unknown
    /// coordinates; returns `None` when the system has no unique solution.
    pub fn dense_convolution_inverse(&self, f: &LinearMap, cap: u128) -> Result<Option<LinearMap>, HopfError> {
        let u_basis = self.u_basis();
        let d_basis = self.d_basis();
        let size = (u_basis.len() * d_basis.len()) as u128;
        if size > cap {
            return Err(HopfError::CapExceeded { size, cap });
        }
        let d_index: HashMap<Monomial, usize> = d_basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let u_index: HashMap<Monomial, usize> = u_basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let nd = d_basis.len();
        // unknown (y, z): coefficient of d-basis y in g(u-basis z); equation (x, w)
        let mut columns: Vec<SparseVec<CycNum>> = vec![SparseVec::new(); u_basis.len() * nd];
        for x in &u_basis {
            for ((a, b), c) in self.delta_mono(*x).iter() {
                let zb = u_index[b];
                for (yi, y) in d_basis.iter().enumerate() {
                    let prod = self.d.mul_monomials_elem(&f[a], *y)?;
                    let col = &mut columns[zb * nd + yi];
                    for (w, v) in prod.terms() {
                        let row = u_index[x] * nd + d_index[w];
                        let add = c * v;
                        let cur = col.remove(&row);
                        let s = match cur {
                            Some(old) => &old + &add,
                            None => add,
                        };
                        if !s.is_zero() {
                            col.insert(row, s);
                        }
                    }
                }
            }
        }
        let mut rhs = SparseVec::new();
        for x in &u_basis {
            let eps = self.u.counit(&self.u.basis_element(*x));
            if !eps.is_zero() {
                rhs.insert(u_index[x] * nd, -eps);
            }
        }
        let n = columns.len();
        columns.push(rhs);
        let one = CycNum::one(self.d.field());
        let kernel = kernel_of_images(&columns, &one);
        if kernel.iter().any(|v| !v.contains_key(&n)) {
            return Ok(None);
        }
        let Some(sol) = kernel.into_iter().find(|v| v.get(&n).is_some_and(|c| c.is_one())) else {
            return Ok(None);
        };
        let mut g: LinearMap = u_basis.iter().map(|m| (*m, self.d.zero())).collect();
        for (idx, c) in sol {
            if idx == n {
                continue;
            }
            let (z, y) = (u_basis[idx / nd], d_basis[idx % nd]);
            let cur = g.remove(&z).expect("present");
            g.insert(z, &cur + &AlgElement::monomial(self.d.params(), y, c));
        }
        Ok(Some(g))
    }

    /// Basis of `{x : ρ(x) = 1 ⊗ x}` by an exact kernel computation.
    pub fn coinvariants(&self, cap: u128) -> Result<Vec<AlgElement>, HopfError> {
        if self.level() == 0 {
            return Err(HopfError::LevelZero);
        }
        let size = self.d.params().basis_size();
        if size > cap {
            return Err(HopfError::CapExceeded { size, cap });
        }
        let basis = self.d_basis();
        let mut index: HashMap<TensorKey, usize> = HashMap::new();
        let images: Vec<SparseVec<CycNum>> = basis
            .iter()
            .map(|m| {
                let mut v: SparseVec<CycNum> = SparseVec::new();
                let mut push = |key: TensorKey, c: CycNum| {
                    let n = index.len();
                    let i = *index.entry(key).or_insert(n);
                    let s = match v.remove(&i) {
                        Some(old) => &old + &c,
                        None => c,
                    };
                    if !s.is_zero() {
                        v.insert(i, s);
                    }
                };
                for (k, c) in self.rho_mono(*m).iter() {
                    push(*k, c.clone());
                }
                push((Monomial::UNIT, *m), CycNum::from_int(self.d.field(), -1));
                v
            })
            .collect();
        let one = CycNum::one(self.d.field());
        Ok(kernel_of_images(&images, &one)
            .into_iter()
            .map(|v| {
                let terms = v.into_iter().map(|(i, c)| (basis[i], c)).collect();
                AlgElement::from_terms(self.d.params(), terms)
            })
            .collect())
    }

    /// Checks `Δ`, `ε`, `S` on the `ℓ³` basis of `u_λ(sl2)`.
    pub fn uq_axiom_checks(&self) -> Result<Vec<CheckResult>, HopfError> {
        let u = &self.u;
        let basis = self.u_basis();
        let mut coassoc = CheckResult::new("u: (Δ⊗id)Δ = (id⊗Δ)Δ");
        let mut counit = CheckResult::new("u: (ε⊗id)Δ = id = (id⊗ε)Δ");
        let mut antipode = CheckResult::new("u: m(S⊗id)Δ = ε·1 = m(id⊗S)Δ");
        let mut mult = CheckResult::new("u: Δ(xy) = Δ(x)Δ(y) on generator pairs");
        for &x in &basis {
            let dx = self.delta_mono(x);
            let mut left: BTreeMap<(Monomial, Monomial, Monomial), CycNum> = BTreeMap::new();
            let mut right: BTreeMap<(Monomial, Monomial, Monomial), CycNum> = BTreeMap::new();
            for ((a, b), c) in dx.iter() {
                for ((a1, a2), c1) in self.delta_mono(*a).iter() {
                    accumulate3(&mut left, (*a1, *a2, *b), c * c1);
                }
                for ((b1, b2), c2) in self.delta_mono(*b).iter() {
                    accumulate3(&mut right, (*a, *b1, *b2), c * c2);
                }
            }
            coassoc.record(left == right, || monomial_text(&self.u.params(), &x));

            let mut l_counit = u.zero();
            let mut r_counit = u.zero();
            let mut l_anti = u.zero();
            let mut r_anti = u.zero();
            for ((a, b), c) in dx.iter() {
                let (ea, eb) = (u.basis_element(*a), u.basis_element(*b));
                l_counit = &l_counit + &eb.scale(&(c * &u.counit(&ea)));
                r_counit = &r_counit + &ea.scale(&(c * &u.counit(&eb)));
                l_anti = &l_anti + &u.multiply(&self.antipode(&ea)?, &eb)?.scale(c);
                r_anti = &r_anti + &u.multiply(&ea, &self.antipode(&eb)?)?.scale(c);
            }
            let xe = u.basis_element(x);
            counit.record(l_counit == xe && r_counit == xe, || monomial_text(&self.u.params(), &x));
            let eps = u.constant(u.counit(&xe));
            antipode.record(l_anti == eps && r_anti == eps, || monomial_text(&self.u.params(), &x));
        }
        let gens = GeneratorId::all(0);
        for &g1 in &gens {
            for &g2 in &gens {
                let (x, y) = (u.generator(g1)?, u.generator(g2)?);
                let lhs = self.coproduct(&u.multiply(&x, &y)?)?;
                let rhs = self.tensor_mul_uu(&self.coproduct(&x)?, &self.coproduct(&y)?);
                mult.record(lhs == rhs, || format!("{g1}*{g2}"));
            }
        }
        Ok(vec![coassoc, counit, antipode, mult])
    }

    fn tensor_mul_uu(&self, x: &TensorElement, y: &TensorElement) -> TensorElement {
        TensorElement {
            left: x.left,
            right: x.right,
            terms: Self::tensor_mul_terms(&self.u, &self.u, &x.terms, &y.terms),
        }
    }

    /// Coaction axioms on the whole basis of `D_{λ,N}` and multiplicativity of
    /// `ρ_N` on generator pairs.
    pub fn coaction_checks(&self) -> Result<Vec<CheckResult>, HopfError> {
        let mut coassoc = CheckResult::new("ρ: (Δ⊗id)ρ = (id⊗ρ)ρ");
        let mut counit = CheckResult::new("ρ: (ε⊗id)ρ = id");
        let mut mult = CheckResult::new("ρ: ρ(xy) = ρ(x)ρ(y) on generator pairs");
        for x in self.d_basis() {
            let rx = self.rho_mono(x);
            let mut left: BTreeMap<(Monomial, Monomial, Monomial), CycNum> = BTreeMap::new();
            let mut right: BTreeMap<(Monomial, Monomial, Monomial), CycNum> = BTreeMap::new();
            let mut eps = Terms::new();
            for ((a, b), c) in rx.iter() {
                for ((a1, a2), c1) in self.delta_mono(*a).iter() {
                    accumulate3(&mut left, (*a1, *a2, *b), c * c1);
                }
                for ((b1, b2), c2) in self.rho_mono(*b).iter() {
                    accumulate3(&mut right, (*a, *b1, *b2), c * c2);
                }
                if a.f == 0 && a.e == 0 {
                    add_term(&mut eps, *b, c.clone());
                }
            }
            coassoc.record(left == right, || monomial_text(&self.d.params(), &x));
            let mut expect = Terms::new();
            expect.insert(x, CycNum::one(self.d.field()));
            counit.record(eps == expect, || monomial_text(&self.d.params(), &x));
        }
        let gens = GeneratorId::all(self.level());
        for &g1 in &gens {
            for &g2 in &gens {
                let (x, y) = (self.d.generator(g1)?, self.d.generator(g2)?);
                let lhs = self.rho(&self.d.multiply(&x, &y)?)?;
                let rhs = self.tensor_mul(&self.rho(&x)?, &self.rho(&y)?);
                mult.record(lhs == rhs, || format!("{g1}*{g2}"));
            }
        }
        Ok(vec![coassoc, counit, mult])
    }

    /// `ρ∘γ = (id⊗γ)∘Δ` on every basis monomial of `u_λ(sl2)`.
    pub fn gamma_colinearity(&self) -> Result<CheckResult, HopfError> {
        let mut check = CheckResult::new("γ colinear: ργ = (id⊗γ)Δ");
        let unit = self.d.params().level_unit(self.level());
        for x in self.u_basis() {
            let lhs = self.rho(&self.gamma(&self.u.basis_element(x))?)?;
            let mut terms = TensorTerms::new();
            for ((a, b), c) in self.delta_mono(x).iter() {
                add_tensor_term(&mut terms, (*a, Monomial::new(b.f * unit, b.k * unit, b.e * unit)), c.clone());
            }
            check.record(lhs.terms == terms, || monomial_text(&self.u.params(), &x));
        }
        Ok(check)
    }

    /// Checks `f * g = g * f = ε·1` on every basis monomial.
    pub fn convolution_identity_checks(&self, f: &LinearMap, g: &LinearMap) -> Result<Vec<CheckResult>, HopfError> {
        let unit = self.unit_counit_map();
        let mut right = CheckResult::new("f * f⁻¹ = ε·1");
        let mut left = CheckResult::new("f⁻¹ * f = ε·1");
        for x in self.u_basis() {
            let label = || monomial_text(&self.u.params(), &x);
            right.record(self.convolve_at(f, g, x)? == unit[&x], label);
            left.record(self.convolve_at(g, f, x)? == unit[&x], label);
        }
        Ok(vec![right, left])
    }

    /// Whether every element of `ι(B_{N−1})` lies in the span of `elements` and
    /// the dimensions agree.
    pub fn spans_iota_image(&self, elements: &[AlgElement]) -> Result<bool, HopfError> {
        let lower = self.d.params().with_level(self.level() - 1)?;
        let b = lower.index_bound();
        let index_of = |m: &Monomial| -> usize {
            let n = self.d.params().index_bound();
            ((m.f * n + m.k) * n + m.e) as usize
        };
        let mut ech = Echelon::new();
        for x in elements {
            ech.insert(x.terms().iter().map(|(m, c)| (index_of(m), c.clone())).collect());
        }
        if ech.rank() as u64 != b * b * b {
            return Ok(false);
        }
        for f in 0..b {
            for k in 0..b {
                for e in 0..b {
                    let mut v = SparseVec::new();
                    v.insert(index_of(&Monomial::new(f, k, e)), CycNum::one(self.d.field()));
                    if !ech.contains(v) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

fn accumulate3(map: &mut BTreeMap<(Monomial, Monomial, Monomial), CycNum>, k: (Monomial, Monomial, Monomial), c: CycNum) {
    let s = match map.remove(&k) {
        Some(old) => &old + &c,
        None => c,
    };
    if !s.is_zero() {
        map.insert(k, s);
    }
}

impl Algebra {
    /// `x · m` for an element `x` and a basis monomial `m`.
    pub fn mul_monomials_elem(&self, x: &AlgElement, m: Monomial) -> Result<AlgElement, AlgebraError> {
        let mut terms = Terms::new();
        for (a, c) in x.terms() {
            for (b, v) in self.mul_monomials(*a, m) {
                add_term(&mut terms, b, c * &v);
            }
        }
        Ok(AlgElement::from_terms(self.params(), terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hopf(ell: u32, level: u32) -> Hopf {
        Hopf::new(AlgebraParams::new(ell, level, 1).unwrap()).unwrap()
    }

    #[test]
    fn coproduct_of_group_like_and_unit() {
        let h = hopf(3, 0);
        let u = h.u();
        let k = u.basis_element(Monomial::new(0, 1, 0));
        let dk = h.coproduct(&k).unwrap();
        assert_eq!(dk.terms().len(), 1);
        assert!(dk.terms()[&(Monomial::new(0, 1, 0), Monomial::new(0, 1, 0))].is_one());
        let d1 = h.coproduct(&u.one()).unwrap();
        assert_eq!(d1.terms().keys().copied().collect::<Vec<_>>(), vec![(Monomial::UNIT, Monomial::UNIT)]);
    }

    #[test]
    fn antipode_examples() {
        let h = hopf(5, 0);
        let u = h.u();
        let k = u.basis_element(Monomial::new(0, 1, 0));
        assert_eq!(u.multiply(&h.antipode(&k).unwrap(), &k).unwrap(), u.one());
        let e = u.basis_element(Monomial::new(0, 0, 1));
        let s2 = h.antipode(&h.antipode(&e).unwrap()).unwrap();
        let kinv = u.basis_element(Monomial::new(0, 4, 0));
        let conj = u.multiply(&u.multiply(&kinv, &e).unwrap(), &k).unwrap();
        assert_eq!(s2, conj);
    }

    #[test]
    fn uq_axioms_hold() {
        for ell in [3, 5] {
            for c in hopf(ell, 0).uq_axiom_checks().unwrap() {
                assert!(c.passed, "ℓ={ell}: {} {:?}", c.name, c.failures);
            }
        }
    }

    #[test]
    fn rho_on_generators() {
        let h = hopf(3, 1);
        let d = h.d();
        let e0 = d.generator(GeneratorId::new(GenKind::E, 0)).unwrap();
        let r = h.rho(&e0).unwrap();
        assert_eq!(r.terms().keys().copied().collect::<Vec<_>>(), vec![(Monomial::UNIT, Monomial::new(0, 0, 1))]);
        let k1 = d.generator(GeneratorId::new(GenKind::K, 1)).unwrap();
        let r = h.rho(&k1).unwrap();
        assert_eq!(r.terms().keys().copied().collect::<Vec<_>>(), vec![(Monomial::new(0, 1, 0), Monomial::new(0, 3, 0))]);
    }

    #[test]
    fn convolution_inverse_of_identity_is_antipode_at_level_zero() {
        let h = hopf(3, 0);
        let id: LinearMap = h.u_basis().into_iter().map(|m| (m, h.u().basis_element(m))).collect();
        let inv = h.convolution_inverse(&id).unwrap();
        for (m, v) in &inv {
            assert_eq!(v, &h.antipode(&h.u().basis_element(*m)).unwrap());
        }
        let dense = h.dense_convolution_inverse(&id, 1 << 20).unwrap().expect("unique");
        assert_eq!(dense, inv);
        assert_eq!(h.left_convolution_inverse(&id).unwrap(), inv);
    }

    #[test]
    fn unit_counit_is_its_own_inverse() {
        let h = hopf(3, 1);
        let unit = h.unit_counit_map();
        assert_eq!(h.convolution_inverse(&unit).unwrap(), unit);
    }

    #[test]
    fn gamma_inverse_on_group_likes() {
        let h = hopf(3, 1);
        let g = h.gamma_map();
        let inv = h.convolution_inverse(&g).unwrap();
        for b in 0..3u64 {
            let expect = h.d().basis_element(Monomial::new(0, ((3 - b) % 3) * 3, 0));
            assert_eq!(inv[&Monomial::new(0, b, 0)], expect);
        }
    }
}
