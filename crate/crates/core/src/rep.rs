//! Finite-dimensional representations given by exact generator matrices:
//! Verma modules, their simple quotients, pullbacks, tensor modules through
//! the coaction, and the Steinberg tensor-product intertwiner.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{AlgElement, Algebra, AlgebraError, AlgebraParams, GenKind, GeneratorId, Letter, Monomial};
use crate::arith::{CycNum, CyclotomicField};
use crate::linalg::{dense_nullspace, rank, SparseVec};
use crate::qnum::{q_factorial, q_int};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("weight {value} out of range: must be below {bound}")]
    OutOfRange { value: u64, bound: u64 },
    #[error("module dimension {dim} exceeds the cap of {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("{0} does not act diagonally")]
    NotDiagonal(GeneratorId),
    #[error("{0} acts by a scalar that is not a power of λ")]
    NotAWeight(GeneratorId),
    #[error("incompatible modules: {0}")]
    Incompatible(String),
}

/// A dense exact matrix; `get(r, c)` is the coefficient of basis vector `r`
/// in the image of basis vector `c`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<CycNum>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: &Arc<CyclotomicField>, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![CycNum::zero(field); rows * cols],
        }
    }

    pub fn identity(field: &Arc<CyclotomicField>, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, CycNum::one(field));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &CycNum {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: CycNum) {
        self.data[r * self.cols + c] = v;
    }

    fn field(&self) -> &Arc<CyclotomicField> {
        self.data[0].field()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Matrix::zeros(self.field(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] = &out.data[idx] + &(a * b);
                    }
                }
            }
        }
        out
    }

    fn zip(&self, other: &Matrix, f: impl Fn(&CycNum, &CycNum) -> CycNum) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &CycNum) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Kronecker product; basis `(a, b)` of the result has index `a·dim(other) + b`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.field(), self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        let b = other.get(r2, c2);
                        if !b.is_zero() {
                            out.set(r1 * other.rows + r2, c1 * other.cols + c2, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[CycNum]) -> Vec<CycNum> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(CycNum::zero(self.field()), |acc, c| {
                    let a = self.get(r, c);
                    if a.is_zero() || v[c].is_zero() {
                        acc
                    } else {
                        &acc + &(a * &v[c])
                    }
                })
            })
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<CycNum> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn from_columns(field: &Arc<CyclotomicField>, rows: usize, columns: &[Vec<CycNum>]) -> Matrix {
        let mut m = Matrix::zeros(field, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                m.set(r, c, x.clone());
            }
        }
        m
    }

    pub fn restrict(&self, keep: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.field(), keep.len(), keep.len());
        for (i, &r) in keep.iter().enumerate() {
            for (j, &c) in keep.iter().enumerate() {
                m.set(i, j, self.get(r, c).clone());
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        rank((0..self.cols).map(|c| {
            (0..self.rows)
                .filter(|&r| !self.get(r, c).is_zero())
                .map(|r| (r, self.get(r, c).clone()))
                .collect::<SparseVec<CycNum>>()
        }))
    }
}

/// Residues `k_i mod ℓ` of the eigenvalues `λ^{k_i}` of the `K_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(pub Vec<u32>);

impl Weight {
    /// `Σ_i k_i ℓ^i`.
    pub fn encode(&self, ell: u32) -> u64 {
        self.0.iter().rev().fold(0, |acc, &d| acc * ell as u64 + d as u64)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A representation of `D_{λ,N}` by exact matrices for `E_i`, `F_i`, `K_i`.
#[derive(Clone)]
pub struct ModuleRep {
    params: AlgebraParams,
    field: Arc<CyclotomicField>,
    dim: usize,
    action: BTreeMap<GeneratorId, Matrix>,
    labels: Vec<u64>,
}

impl fmt::Debug for ModuleRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModuleRep")
            .field("params", &self.params)
            .field("dim", &self.dim)
            .field("labels", &self.labels)
            .finish()
    }
}

/// A relation instance whose matrix residue was computed on a module.
#[derive(Debug, Clone)]
pub struct MatrixResidue {
    pub name: String,
    pub residue: Matrix,
}

impl ModuleRep {
    /// Builds a module from matrices for every `E_i`, `F_i`, `K_i`.
    pub fn from_action(
        params: AlgebraParams,
        field: Arc<CyclotomicField>,
        action: BTreeMap<GeneratorId, Matrix>,
        labels: Vec<u64>,
    ) -> Result<Self, RepError> {
        let dim = labels.len();
        for g in GeneratorId::all(params.level()) {
            match action.get(&g) {
                Some(m) if m.rows() == dim && m.cols() == dim => {}
                _ => return Err(RepError::Incompatible(format!("missing or misshapen matrix for {g}"))),
            }
        }
        Ok(ModuleRep {
            params,
            field,
            dim,
            action,
            labels,
        })
    }

    pub fn params(&self) -> AlgebraParams {
        self.params
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Verma indices `t` of the surviving basis vectors.
    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn matrix(&self, g: GeneratorId) -> Result<Matrix, RepError> {
        if g.index > self.params.level() {
            return Err(AlgebraError::IndexOutOfRange {
                index: g.index,
                level: self.params.level(),
            }
            .into());
        }
        Ok(match g.kind {
            GenKind::Kinv => {
                let k = &self.action[&GeneratorId::new(GenKind::K, g.index)];
                let mut acc = Matrix::identity(&self.field, self.dim);
                for _ in 1..self.params.ell() {
                    acc = acc.mul(k);
                }
                acc
            }
            _ => self.action[&g].clone(),
        })
    }

    fn power(&self, g: GeneratorId, e: u64) -> Matrix {
        let m = &self.action[&g];
        let mut acc = Matrix::identity(&self.field, self.dim);
        for _ in 0..e {
            acc = acc.mul(m);
        }
        acc
    }

    /// Matrix of the basis monomial `F^(m) K^(n) E^(p)`.
    pub fn monomial_matrix(&self, mono: Monomial) -> Result<Matrix, RepError> {
        let p = self.params;
        let mut acc = Matrix::identity(&self.field, self.dim);
        let parts = [(GenKind::F, mono.f, true), (GenKind::K, mono.k, false), (GenKind::E, mono.e, true)];
        for (kind, value, divided) in parts {
            if value >= p.index_bound() {
                return Err(RepError::OutOfRange {
                    value,
                    bound: p.index_bound(),
                });
            }
            for i in 0..=p.level() {
                let d = p.digit(value, i);
                if d == 0 {
                    continue;
                }
                let mut factor = self.power(GeneratorId::new(kind, i), d);
                if divided {
                    let inv = q_factorial(&self.field, d as i64).expect("digit below ℓ").inv().expect("invertible");
                    factor = factor.scale(&inv);
                }
                acc = acc.mul(&factor);
            }
        }
        Ok(acc)
    }

    pub fn element_matrix(&self, x: &AlgElement) -> Result<Matrix, RepError> {
        if x.params() != self.params {
            return Err(AlgebraError::ParamsMismatch {
                left: self.params,
                right: x.params(),
            }
            .into());
        }
        let mut acc = Matrix::zeros(&self.field, self.dim, self.dim);
        for (m, c) in x.terms() {
            acc = acc.add(&self.monomial_matrix(*m)?.scale(c));
        }
        Ok(acc)
    }

    /// Residue matrices of every defining relation, evaluated on generator matrices.
    pub fn relation_check(&self, alg: &Algebra) -> Result<Vec<MatrixResidue>, RepError> {
        let mut out = Vec::new();
        for rel in alg.relation_instances()? {
            let mut acc = Matrix::zeros(&self.field, self.dim, self.dim);
            for (c, letters) in &rel.terms {
                let mut prod = Matrix::identity(&self.field, self.dim);
                for l in letters {
                    let m = match l {
                        Letter::Gen(g) => self.matrix(*g)?,
                        Letter::Elem(x) => self.element_matrix(x)?,
                    };
                    prod = prod.mul(&m);
                }
                acc = acc.add(&prod.scale(c));
            }
            out.push(MatrixResidue {
                name: rel.name,
                residue: acc,
            });
        }
        Ok(out)
    }

    /// Weight of each basis vector; requires every `K_i` to be diagonal.
    pub fn weights(&self) -> Result<Vec<Weight>, RepError> {
        let ell = self.params.ell();
        let powers: Vec<CycNum> = (0..ell).map(|k| CycNum::lambda_pow(&self.field, k as i64)).collect();
        let mut out = vec![Weight(vec![0; self.params.level() as usize + 1]); self.dim];
        for i in 0..=self.params.level() {
            let g = GeneratorId::new(GenKind::K, i);
            let k = &self.action[&g];
            for r in 0..self.dim {
                for c in 0..self.dim {
                    if r != c && !k.get(r, c).is_zero() {
                        return Err(RepError::NotDiagonal(g));
                    }
                }
                let d = k.get(r, r);
                let exp = powers.iter().position(|x| x == d).ok_or(RepError::NotAWeight(g))?;
                out[r].0[i as usize] = exp as u32;
            }
        }
        Ok(out)
    }
}

fn check_index(params: &AlgebraParams, z: u64) -> Result<(), RepError> {
    if z >= params.index_bound() {
        return Err(RepError::OutOfRange {
            value: z,
            bound: params.index_bound(),
        });
    }
    Ok(())
}

fn field_of(params: &AlgebraParams) -> Result<Arc<CyclotomicField>, RepError> {
    CyclotomicField::with_root_exponent(params.ell() as i64, params.root_exponent() as i64)
        .map_err(|e| RepError::Algebra(e.into()))
}

/// The Verma module `M(z)` with basis `v_t`, `0 ≤ t < ℓ^{N+1}`.
pub fn verma(params: AlgebraParams, z: u64) -> Result<ModuleRep, RepError> {
    check_index(&params, z)?;
    let field = field_of(&params)?;
    let dim = params.index_bound() as usize;
    let ell = params.ell() as u64;
    let mut action = BTreeMap::new();
    for i in 0..=params.level() {
        let u = params.level_unit(i);
        let zi = params.digit(z, i) as i64;
        let (mut e, mut f, mut k) = (
            Matrix::zeros(&field, dim, dim),
            Matrix::zeros(&field, dim, dim),
            Matrix::zeros(&field, dim, dim),
        );
        for t in 0..dim as u64 {
            let ti = params.digit(t, i);
            k.set(t as usize, t as usize, CycNum::lambda_pow(&field, zi - 2 * ti as i64));
            if ti > 0 {
                e.set((t - u) as usize, t as usize, q_int(&field, zi + 1 - ti as i64));
            }
            if ti + 1 < ell {
                f.set((t + u) as usize, t as usize, q_int(&field, ti as i64 + 1));
            }
        }
        action.insert(GeneratorId::new(GenKind::E, i), e);
        action.insert(GeneratorId::new(GenKind::F, i), f);
        action.insert(GeneratorId::new(GenKind::K, i), k);
    }
    ModuleRep::from_action(params, field, action, (0..dim as u64).collect())
}

/// The simple `u_λ(sl2)`-module `L(z)` of dimension `z + 1`, as a level-0 module.
pub fn uq_simple(params: AlgebraParams, z: u64) -> Result<ModuleRep, RepError> {
    let params = params.with_level(0)?;
    check_index(&params, z)?;
    let field = field_of(&params)?;
    let dim = z as usize + 1;
    let zi = z as i64;
    let (mut e, mut f, mut k) = (
        Matrix::zeros(&field, dim, dim),
        Matrix::zeros(&field, dim, dim),
        Matrix::zeros(&field, dim, dim),
    );
    for n in 0..dim {
        k.set(n, n, CycNum::lambda_pow(&field, zi - 2 * n as i64));
        if n > 0 {
            e.set(n - 1, n, q_int(&field, zi + 1 - n as i64));
        }
        if n + 1 < dim {
            f.set(n + 1, n, q_int(&field, n as i64 + 1));
        }
    }
    let action = BTreeMap::from([
        (GeneratorId::new(GenKind::E, 0), e),
        (GeneratorId::new(GenKind::F, 0), f),
        (GeneratorId::new(GenKind::K, 0), k),
    ]);
    ModuleRep::from_action(params, field, action, (0..dim as u64).collect())
}

/// The simple quotient `L_N(p)` of `M(p)`.
///
/// Distinct basis vectors of `M(p)` have distinct weights, because
/// `t_i ↦ p_i − 2t_i` is injective modulo odd `ℓ`. Every submodule is
/// therefore spanned by basis vectors, and the maximal proper submodule is
/// spanned by the `v_t` from which `v_0` cannot be reached along nonzero
/// matrix entries of the `E_i` and `F_i`.
pub fn simple(params: AlgebraParams, p: u64) -> Result<ModuleRep, RepError> {
    let m = verma(params, p)?;
    let keep = reaching_top(&m);
    Ok(m.quotient_to(&keep))
}

impl ModuleRep {
    /// Restriction of the action to the basis vectors `keep`, valid when the
    /// complement spans a submodule.
    fn quotient_to(&self, keep: &[usize]) -> ModuleRep {
        let action = self
            .action
            .iter()
            .map(|(g, m)| (*g, m.restrict(keep)))
            .collect();
        ModuleRep {
            params: self.params,
            field: self.field.clone(),
            dim: keep.len(),
            action,
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Indices of basis vectors from which basis vector 0 is reachable.
fn reaching_top(m: &ModuleRep) -> Vec<usize> {
    let n = m.dim;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, mat) in &m.action {
        if g.kind == GenKind::K {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                if !mat.get(r, c).is_zero() {
                    preds[r].push(c);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &t in &preds[u] {
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

/// Basis of the joint kernel of the `E_i`, one list per weight space.
pub fn primitive_vectors(rep: &ModuleRep) -> Result<Vec<(Vec<CycNum>, Weight)>, RepError> {
    let weights = rep.weights()?;
    let mut by_weight: BTreeMap<Weight, Vec<usize>> = BTreeMap::new();
    for (i, w) in weights.iter().enumerate() {
        by_weight.entry(w.clone()).or_default().push(i);
    }
    let e_mats: Vec<Matrix> = (0..=rep.params.level())
        .map(|i| rep.action[&GeneratorId::new(GenKind::E, i)].clone())
        .collect();
    let one = CycNum::one(&rep.field);
    let mut out = Vec::new();
    for (w, cols) in by_weight {
        let mut system: Vec<Vec<CycNum>> = Vec::new();
        for e in &e_mats {
            for r in 0..rep.dim {
                system.push(cols.iter().map(|&c| e.get(r, c).clone()).collect());
            }
        }
        for v in dense_nullspace(&system, cols.len(), &one) {
            let mut full = vec![CycNum::zero(&rep.field); rep.dim];
            for (x, &c) in v.into_iter().zip(&cols) {
                full[c] = x;
            }
            out.push((full, w.clone()));
        }
    }
    Ok(out)
}

/// A `u_λ(sl2)`-module viewed as a `D_{λ,N}`-module through `π_N`.
pub fn pullback_via_pi(u_rep: &ModuleRep, params: AlgebraParams) -> Result<ModuleRep, RepError> {
    if u_rep.params.level() != 0 || u_rep.params.ell() != params.ell() {
        return Err(RepError::Incompatible("pullback needs a level-0 module of the same order".into()));
    }
    let field = u_rep.field.clone();
    let dim = u_rep.dim;
    let top = params.level();
    let mut action = BTreeMap::new();
    for i in 0..=top {
        for kind in [GenKind::E, GenKind::F, GenKind::K] {
            let m = if i == top {
                u_rep.action[&GeneratorId::new(kind, 0)].clone()
            } else if kind == GenKind::K {
                Matrix::identity(&field, dim)
            } else {
                Matrix::zeros(&field, dim, dim)
            };
            action.insert(GeneratorId::new(kind, i), m);
        }
    }
    ModuleRep::from_action(params, field, action, u_rep.labels.clone())
}

/// Extends a level-`(N−1)` module to level `N` with `E_N = F_N = 0`, `K_N = 1`.
pub fn extend_to_level(rep: &ModuleRep) -> Result<ModuleRep, RepError> {
    let params = rep.params.with_level(rep.params.level() + 1)?;
    let top = params.level();
    let mut action = rep.action.clone();
    action.insert(GeneratorId::new(GenKind::E, top), Matrix::zeros(&rep.field, rep.dim, rep.dim));
    action.insert(GeneratorId::new(GenKind::F, top), Matrix::zeros(&rep.field, rep.dim, rep.dim));
    action.insert(GeneratorId::new(GenKind::K, top), Matrix::identity(&rep.field, rep.dim));
    ModuleRep::from_action(params, rep.field.clone(), action, rep.labels.clone())
}

/// `M ⊗ N` for a `u_λ(sl2)`-module `M` and a `D_{λ,N}`-module `N`, acting through the coaction.
pub fn tensor_rep(u_rep: &ModuleRep, d_rep: &ModuleRep, cap: usize) -> Result<ModuleRep, RepError> {
    let up = u_rep.params;
    let dp = d_rep.params;
    if up.level() != 0 || up.ell() != dp.ell() || up.root_exponent() != dp.root_exponent() {
        return Err(RepError::Incompatible("left factor must be a u_λ(sl2)-module of the same root".into()));
    }
    let dim = u_rep.dim * d_rep.dim;
    if dim > cap {
        return Err(RepError::CapExceeded { dim, cap });
    }
    let field = d_rep.field.clone();
    let top = dp.level();
    let iu = Matrix::identity(&field, u_rep.dim);
    let id = Matrix::identity(&field, d_rep.dim);
    let ue = &u_rep.action[&GeneratorId::new(GenKind::E, 0)];
    let uf = &u_rep.action[&GeneratorId::new(GenKind::F, 0)];
    let uk = &u_rep.action[&GeneratorId::new(GenKind::K, 0)];
    let mut action = BTreeMap::new();
    for i in 0..=top {
        let de = &d_rep.action[&GeneratorId::new(GenKind::E, i)];
        let df = &d_rep.action[&GeneratorId::new(GenKind::F, i)];
        let dk = &d_rep.action[&GeneratorId::new(GenKind::K, i)];
        let (e, f, k) = if i < top {
            (iu.kron(de), iu.kron(df), iu.kron(dk))
        } else {
            let dkinv = d_rep.matrix(GeneratorId::new(GenKind::Kinv, i))?;
            (
                ue.kron(&id).add(&uk.kron(de)),
                uf.kron(&dkinv).add(&iu.kron(df)),
                uk.kron(dk),
            )
        };
        action.insert(GeneratorId::new(GenKind::E, i), e);
        action.insert(GeneratorId::new(GenKind::F, i), f);
        action.insert(GeneratorId::new(GenKind::K, i), k);
    }
    let labels = (0..dim as u64).collect();
    ModuleRep::from_action(dp, field, action, labels)
}

/// Weight multiplicities.
pub fn character(rep: &ModuleRep) -> Result<BTreeMap<Weight, usize>, RepError> {
    let mut out = BTreeMap::new();
    for w in rep.weights()? {
        *out.entry(w).or_insert(0) += 1;
    }
    Ok(out)
}

/// Outcome of building and checking `L_N(p) ≅ L(p_N) ⊗ L_N(p̂)`.
#[derive(Debug, Clone)]
pub struct SteinbergReport {
    pub p: u64,
    pub top_digit: u64,
    pub low_part: u64,
    pub dim_simple: usize,
    pub dim_first: usize,
    pub dim_second: usize,
    pub bijective: bool,
    pub failures: Vec<String>,
    pub matrix: Option<Matrix>,
}

impl SteinbergReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.failures.is_empty()
    }
}

/// Applies `F^(t) = Π_i F_i^{t_i}/[t_i]!` to `v`, highest level first.
fn apply_f_monomial(rep: &ModuleRep, t: u64, v: &[CycNum]) -> Vec<CycNum> {
    let p = rep.params;
    let mut out = v.to_vec();
    for i in (0..=p.level()).rev() {
        let d = p.digit(t, i);
        if d == 0 {
            continue;
        }
        let f = &rep.action[&GeneratorId::new(GenKind::F, i)];
        for _ in 0..d {
            out = f.apply(&out);
        }
        let inv = q_factorial(&rep.field, d as i64).expect("digit below ℓ").inv().expect("invertible");
        out = out.iter().map(|x| x * &inv).collect();
    }
    out
}

/// Builds the intertwiner `L_N(p) → L(p_N) ⊗ L_N(p̂)` sending `F^(t)v_0` to
/// `F^(t)(v_0 ⊗ v_0)` and checks bijectivity and equivariance.
pub fn steinberg_intertwiner(params: AlgebraParams, p: u64, cap: usize) -> Result<SteinbergReport, RepError> {
    check_index(&params, p)?;
    if params.level() == 0 {
        return Err(RepError::Incompatible("the Steinberg decomposition needs N ≥ 1".into()));
    }
    let top = params.level();
    let unit = params.level_unit(top);
    let top_digit = p / unit;
    let low_part = p % unit;
    let source = simple(params, p)?;
    let first = uq_simple(params, top_digit)?;
    let second = extend_to_level(&simple(params.with_level(top - 1)?, low_part)?)?;
    let target = tensor_rep(&first, &second, cap)?;
    let mut report = SteinbergReport {
        p,
        top_digit,
        low_part,
        dim_simple: source.dim,
        dim_first: first.dim,
        dim_second: second.dim,
        bijective: false,
        failures: Vec::new(),
        matrix: None,
    };
    if source.dim != target.dim {
        report.failures.push(format!("dimension {} ≠ {}", source.dim, target.dim));
        return Ok(report);
    }
    let field = source.field.clone();
    let basis = |n: usize, i: usize| {
        let mut v = vec![CycNum::zero(&field); n];
        v[i] = CycNum::one(&field);
        v
    };
    let v0 = basis(source.dim, 0);
    let w0 = basis(target.dim, 0);
    let mut columns = Vec::with_capacity(source.dim);
    for (idx, &t) in source.labels.iter().enumerate() {
        let image_src = apply_f_monomial(&source, t, &v0);
        let scalar = image_src[idx].clone();
        let clean = image_src
            .iter()
            .enumerate()
            .all(|(j, x)| j == idx || x.is_zero());
        if scalar.is_zero() || !clean {
            report.failures.push(format!("F^({t}) v_0 is not a nonzero multiple of v_{t}"));
            return Ok(report);
        }
        let inv = scalar.inv().expect("nonzero");
        columns.push(apply_f_monomial(&target, t, &w0).iter().map(|x| x * &inv).collect::<Vec<_>>());
    }
    let phi = Matrix::from_columns(&field, target.dim, &columns);
    report.bijective = phi.rank() == source.dim;
    for g in GeneratorId::all(top) {
        let lhs = phi.mul(&source.action[&g]);
        let rhs = target.action[&g].mul(&phi);
        if lhs != rhs {
            report.failures.push(format!("not equivariant for {g}"));
        }
    }
    report.matrix = Some(phi);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(ell: u32, level: u32) -> AlgebraParams {
        AlgebraParams::new(ell, level, 1).unwrap()
    }

    fn g(kind: GenKind, i: u32) -> GeneratorId {
        GeneratorId::new(kind, i)
    }

    #[test]
    fn verma_examples() {
        let m = verma(params(3, 1), 5).unwrap();
        let f = m.field().clone();
        assert_eq!(m.dim(), 9);
        assert!(m.matrix(g(GenKind::F, 0)).unwrap().get(1, 0).is_one());
        let e0 = m.matrix(g(GenKind::E, 0)).unwrap();
        assert_eq!(e0.get(0, 1), &q_int(&f, 2));
        for i in 0..2 {
            assert!(m.matrix(g(GenKind::E, i)).unwrap().column(0).iter().all(|x| x.is_zero()));
        }
        assert!(verma(params(3, 1), 9).is_err());
    }

    #[test]
    fn uq_simple_dimensions() {
        for z in 0..5 {
            let l = uq_simple(params(5, 0), z).unwrap();
            assert_eq!(l.dim(), z as usize + 1);
        }
        let triv = uq_simple(params(3, 0), 0).unwrap();
        assert!(triv.matrix(g(GenKind::K, 0)).unwrap().get(0, 0).is_one());
    }

    #[test]
    fn simple_dimensions_are_digit_products() {
        for (ell, level) in [(3u32, 1u32), (5, 1), (3, 2)] {
            let pr = params(ell, level);
            for p in 0..pr.index_bound() {
                let expect: u64 = pr.digits(p).as_slice().iter().map(|d| d + 1).product();
                assert_eq!(simple(pr, p).unwrap().dim() as u64, expect, "ℓ={ell} N={level} p={p}");
            }
        }
    }

    #[test]
    fn simple_trivial_and_full() {
        let s = simple(params(3, 1), 0).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.matrix(g(GenKind::E, 1)).unwrap().is_zero());
        assert!(s.matrix(g(GenKind::K, 0)).unwrap().get(0, 0).is_one());
        assert_eq!(simple(params(3, 1), 8).unwrap().dim(), 9);
    }

    #[test]
    fn verma_weights_are_distinct() {
        let m = verma(params(3, 2), 13).unwrap();
        let ch = character(&m).unwrap();
        assert_eq!(ch.len(), 27);
        assert!(ch.values().all(|&v| v == 1));
    }

    #[test]
    fn primitive_lines() {
        let pr = params(3, 1);
        for p in 0..9 {
            let s = simple(pr, p).unwrap();
            let prim = primitive_vectors(&s).unwrap();
            assert_eq!(prim.len(), 1);
            assert_eq!(prim[0].1.encode(3), p);
        }
        let m = verma(pr, 8).unwrap();
        let prim = primitive_vectors(&m).unwrap();
        assert_eq!(prim.len(), 1);
        assert!(prim[0].0[0].is_one());
    }

    #[test]
    fn restriction_to_lower_levels() {
        let pr = params(3, 2);
        for p in 0..9 {
            let s = simple(pr, p).unwrap();
            assert!(s.matrix(g(GenKind::E, 2)).unwrap().is_zero());
            assert!(s.matrix(g(GenKind::F, 2)).unwrap().is_zero());
            assert_eq!(s.matrix(g(GenKind::K, 2)).unwrap(), Matrix::identity(s.field(), s.dim()));
        }
    }

    #[test]
    fn pullback_of_uq_simple_matches_simple() {
        let pr = params(3, 1);
        for z in 0..3 {
            let pb = pullback_via_pi(&uq_simple(pr, z).unwrap(), pr).unwrap();
            let s = simple(pr, z * 3).unwrap();
            assert_eq!(character(&pb).unwrap(), character(&s).unwrap());
            assert!(pb.matrix(g(GenKind::E, 0)).unwrap().is_zero());
        }
    }

    #[test]
    fn tensor_with_trivial_is_identity() {
        let pr = params(3, 1);
        let m = simple(pr, 5).unwrap();
        let t = tensor_rep(&uq_simple(pr, 0).unwrap(), &m, 1000).unwrap();
        for gen in GeneratorId::all(1) {
            assert_eq!(t.matrix(gen).unwrap(), m.matrix(gen).unwrap());
        }
        assert!(matches!(
            tensor_rep(&uq_simple(pr, 2).unwrap(), &m, 10),
            Err(RepError::CapExceeded { dim: 18, cap: 10 })
        ));
    }

    #[test]
    fn steinberg_example() {
        let r = steinberg_intertwiner(params(3, 1), 5, 1000).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!((r.dim_simple, r.dim_first, r.dim_second), (6, 2, 3));
    }

    #[test]
    fn level_zero_modules_satisfy_relations() {
        let pr = params(5, 0);
        let alg = Algebra::new(pr).unwrap();
        for z in 0..5 {
            for rep in [verma(pr, z).unwrap(), uq_simple(pr, z).unwrap()] {
                for r in rep.relation_check(&alg).unwrap() {
                    assert!(r.residue.is_zero(), "{} on z={z}", r.name);
                }
            }
        }
    }
}
