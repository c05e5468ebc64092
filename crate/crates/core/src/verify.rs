//! Verification suites shared by the command-line front end and the test
//! targets. Every suite returns a [`SuiteReport`] listing named checks.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{AlgElement, Algebra, AlgebraParams, GeneratorId, Monomial, Terms};
use crate::arith::CyclotomicField;
use crate::format::monomial_text;
use crate::hopf::{Hopf, HopfError};
use crate::hyper::{dimension_bookkeeping, erratum_report, frobenius_pi_k, ErratumEntry, ErratumReport, HypAlgebra, HypError, HypMonomial, HypParams};
use crate::qnum::{gen_q_binom, k_binom_laurent, q_binom};
use crate::rep::{simple, steinberg_intertwiner, verma, RepError};

/// One named check in a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failed: usize,
    /// The first few failing cases.
    pub failures: Vec<String>,
}

impl CheckResult {
    pub fn new(name: &str) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: true,
            checked: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    /// Counts one case; keeps the first few failure descriptions.
    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            self.failed += 1;
            if self.failures.len() < 8 {
                self.failures.push(what());
            }
        }
    }

    pub fn single(name: &str, ok: bool, detail: impl FnOnce() -> String) -> Self {
        let mut c = Self::new(name);
        c.record(ok, detail);
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub params: String,
    pub passed: bool,
    pub summary: Vec<String>,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erratum: Option<ErratumReport>,
}

impl SuiteReport {
    pub fn new(suite: &str, params: String, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        SuiteReport {
            suite: suite.to_string(),
            params,
            passed,
            summary: Vec::new(),
            checks,
            erratum: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify {} {}", self.suite, self.params)?;
        for c in &self.checks {
            if c.passed {
                writeln!(f, "  PASS {} ({} cases)", c.name, c.checked)?;
            } else {
                writeln!(f, "  FAIL {} ({} of {} cases)", c.name, c.failed, c.checked)?;
            }
            for failure in &c.failures {
                writeln!(f, "       {failure}")?;
            }
        }
        for line in &self.summary {
            writeln!(f, "{line}")?;
        }
        if let Some(e) = &self.erratum {
            write!(f, "{e}")?;
        }
        write!(f, "{}", if self.passed { "PASS" } else { "FAIL" })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
    #[error(transparent)]
    Hopf(#[from] HopfError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Hyp(#[from] HypError),
    #[error(transparent)]
    Arith(#[from] crate::arith::ArithError),
}

/// Every defining relation evaluates to zero.
pub fn relations(alg: &Algebra) -> Result<SuiteReport, VerifyError> {
    let mut check = CheckResult::new("defining relations reduce to zero");
    for r in alg.relation_residues()? {
        check.record(r.residue.is_zero(), || format!("{}: nonzero residue", r.name));
    }
    Ok(SuiteReport::new("relations", alg.params().to_string(), vec![check]))
}

/// Symmetry and the product identity of the digit-wise q-binomials, over all
/// `m, n, p < bound` or on `samples` random triples.
pub fn qbinom(ell: u32, bound: u64, samples: Option<usize>, seed: u64) -> Result<SuiteReport, VerifyError> {
    let field = CyclotomicField::new(ell as i64)?;
    let b = |m, n| gen_q_binom(&field, m, n);
    let mut sym = CheckResult::new("[m+n, m] = [m+n, n]");
    let mut prod = CheckResult::new("[m+n, n][m+n+p, p] = [n+p, n][m+n+p, m]");
    let mut one = |m: u64, n: u64, p: u64| {
        if p == 0 {
            sym.record(b(m + n, m) == b(m + n, n), || format!("m={m} n={n}"));
        }
        let lhs = &b(m + n, n) * &b(m + n + p, p);
        let rhs = &b(n + p, n) * &b(m + n + p, m);
        prod.record(lhs == rhs, || format!("m={m} n={n} p={p}"));
    };
    match samples {
        None => {
            for m in 0..bound {
                for n in 0..bound {
                    for p in 0..bound {
                        one(m, n, p);
                    }
                }
            }
        }
        Some(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let (m, n, p) = (rng.gen_range(0..bound), rng.gen_range(0..bound), rng.gen_range(0..bound));
                one(m, n, 0);
                one(m, n, p);
            }
        }
    }
    let mode = match samples {
        None => format!("exhaustive below {bound}"),
        Some(n) => format!("{n} samples below {bound}"),
    };
    Ok(SuiteReport::new("qbinom", format!("(ℓ={ell}, {mode})"), vec![sym, prod]))
}

/// `E^(m)F^(n) = Σ_i F^(n−i) [K; 2i−m−n; i] E^(m−i)` in `u_λ(sl2)` for all `m, n < ℓ`,
/// the right side assembled directly in the basis.
pub fn commutation(alg: &Algebra) -> Result<SuiteReport, VerifyError> {
    let params = alg.params();
    let ell = params.ell() as u64;
    let field = alg.field();
    let mut check = CheckResult::new("E^(m)F^(n) commutation formula");
    for m in 0..ell {
        for n in 0..ell {
            let lhs = alg.mul_monomials(Monomial::new(0, 0, m), Monomial::new(n, 0, 0));
            let mut rhs = Terms::new();
            for i in 0..=m.min(n) {
                let poly = k_binom_laurent(field, 2 * i as i64 - m as i64 - n as i64, i).expect("i < ℓ");
                for (e, c) in poly.terms() {
                    let k = e.rem_euclid(ell as i64) as u64;
                    let mono = Monomial::new(n - i, k, m - i);
                    let cur = rhs.remove(&mono);
                    let s = match cur {
                        Some(old) => &old + c,
                        None => c.clone(),
                    };
                    if !s.is_zero() {
                        rhs.insert(mono, s);
                    }
                }
            }
            check.record(lhs == rhs, || format!("m={m} n={n}"));
        }
    }
    Ok(SuiteReport::new("commutation", params.to_string(), vec![check]))
}

/// `dim L_N(p) = Π_i (p_i + 1)` for every `p < ℓ^{N+1}`.
pub fn simple_dimensions(params: AlgebraParams) -> Result<SuiteReport, VerifyError> {
    let mut check = CheckResult::new("dim L_N(p) = Π (p_i + 1)");
    for p in 0..params.index_bound() {
        let expected: u64 = params.digits(p).as_slice().iter().map(|d| d + 1).product();
        let got = simple(params, p)?.dim() as u64;
        check.record(got == expected, || format!("p={p}: dim {got}, expected {expected}"));
    }
    Ok(SuiteReport::new("simple-dims", params.to_string(), vec![check]))
}

/// The intertwiner `L_N(p) → L(p_N) ⊗ L_N(p̂)` for every `p`.
pub fn steinberg_all(params: AlgebraParams, cap: usize) -> Result<SuiteReport, VerifyError> {
    let mut check = CheckResult::new("Steinberg intertwiner bijective and equivariant");
    for p in 0..params.index_bound() {
        let r = steinberg_intertwiner(params, p, cap)?;
        check.record(r.passed(), || format!("p={p}: {:?}", r.failures));
    }
    Ok(SuiteReport::new("steinberg", params.to_string(), vec![check]))
}

/// Hopf axioms of `u_λ(sl2)` and, for `N ≥ 1`, the coaction axioms and
/// multiplicativity of `ρ_N`.
pub fn hopf(h: &Hopf) -> Result<SuiteReport, VerifyError> {
    let mut checks = h.uq_axiom_checks()?;
    if h.d().params().level() > 0 {
        checks.extend(h.coaction_checks()?);
    }
    Ok(SuiteReport::new("hopf", h.d().params().to_string(), checks))
}

/// Coinvariants against `ι(B_{N−1})`, colinearity of `γ`, and its two-sided
/// convolution inverse.
pub fn cleft(h: &Hopf, cap: u128) -> Result<SuiteReport, VerifyError> {
    let params = h.d().params();
    let ell = params.ell() as u64;
    let coinv = h.coinvariants(cap)?;
    let iota_dim = params.with_level(params.level() - 1)?.basis_size() as usize;
    let spans = h.spans_iota_image(&coinv)?;
    let dims_ok = coinv.len() == iota_dim && spans;
    let mut checks = vec![CheckResult::single("coinvariants = ι(B_{N-1})", dims_ok, || {
        format!("coinvariant dim {}, iota image dim {iota_dim}, spans equal: {spans}", coinv.len())
    })];
    checks.push(h.gamma_colinearity()?);
    let g = h.gamma_map();
    let right = h.convolution_inverse(&g)?;
    let left = h.left_convolution_inverse(&g)?;
    let unit = h.d().params().level_unit(params.level());
    let mut group = CheckResult::new("γ⁻¹(K^b) = (K^{[N]})^{-b}");
    for b in 0..ell {
        let expect = h.d().basis_element(Monomial::new(0, ((ell - b) % ell) * unit, 0));
        group.record(right[&Monomial::new(0, b, 0)] == expect, || format!("b={b}"));
    }
    checks.push(group);
    let mut identities = h.convolution_identity_checks(&g, &right)?;
    identities[0].name = "γ * γ⁻¹ = ε·1".into();
    identities[1].name = "γ⁻¹ * γ = ε·1".into();
    checks.extend(identities);
    let mut agree = CheckResult::new("left and right inverses of γ agree");
    for (m, v) in &right {
        agree.record(left[m] == *v, || monomial_text(&h.u().params(), m));
    }
    checks.push(agree);
    let mut report = SuiteReport::new("cleft", params.to_string(), checks);
    let verdict = if dims_ok { "PASS" } else { "FAIL" };
    report
        .summary
        .push(format!("coinvariant dim {} == iota image dim {iota_dim}: {verdict}", coinv.len()));
    Ok(report)
}

fn random_monomial(rng: &mut ChaCha8Rng, bound: u64) -> Monomial {
    Monomial::new(rng.gen_range(0..bound), rng.gen_range(0..bound), rng.gen_range(0..bound))
}

/// `(xy)z = x(yz)` on generator triples and random monomial triples, and
/// `matrix(xy) = matrix(x)matrix(y)` on every Verma module for generator pairs.
pub fn associativity(alg: &Algebra, samples: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let params = alg.params();
    let gens: Vec<(GeneratorId, AlgElement)> = GeneratorId::all(params.level())
        .into_iter()
        .map(|g| alg.generator(g).map(|x| (g, x)))
        .collect::<Result<_, _>>()?;
    let mut triples = CheckResult::new("(xy)z = x(yz) on generator triples");
    for (g1, x) in &gens {
        for (g2, y) in &gens {
            let xy = alg.multiply(x, y)?;
            for (g3, z) in &gens {
                let ok = alg.multiply(&xy, z)? == alg.multiply(x, &alg.multiply(y, z)?)?;
                triples.record(ok, || format!("{g1}, {g2}, {g3}"));
            }
        }
    }
    let mut random = CheckResult::new("(xy)z = x(yz) on random monomial triples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = params.index_bound();
    for _ in 0..samples {
        let (a, b, c) = (random_monomial(&mut rng, bound), random_monomial(&mut rng, bound), random_monomial(&mut rng, bound));
        let (x, y, z) = (alg.basis_element(a), alg.basis_element(b), alg.basis_element(c));
        let ok = alg.multiply(&alg.multiply(&x, &y)?, &z)? == alg.multiply(&x, &alg.multiply(&y, &z)?)?;
        random.record(ok, || format!("{}, {}, {}", monomial_text(&params, &a), monomial_text(&params, &b), monomial_text(&params, &c)));
    }
    let mut verma_check = CheckResult::new("Verma matrices: matrix(xy) = matrix(x)matrix(y)");
    for z in 0..bound {
        let rep = verma(params, z)?;
        for (g1, x) in &gens {
            for (g2, y) in &gens {
                let lhs = rep.element_matrix(&alg.multiply(x, y)?)?;
                let rhs = rep.matrix(*g1)?.mul(&rep.matrix(*g2)?);
                verma_check.record(lhs == rhs, || format!("z={z}: {g1}*{g2}"));
            }
        }
    }
    Ok(SuiteReport::new("associativity", params.to_string(), vec![triples, random, verma_check]))
}

/// Characteristic-`p` checks at levels `1` and `k + 1`, with the erratum report.
pub fn charp(p: u64, k: u32, samples: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let base = HypAlgebra::new(HypParams::new(p, 1)?);
    let upper = HypAlgebra::new(HypParams::new(p, k + 1)?);

    let xy = base.xy_normal_order(1, 1)?.sub(&base.basis(HypMonomial::new(1, 0, 1)));
    let bracket = CheckResult::single("[X^(1), Y^(1)] = H^(1) from the generating series", xy == base.h(1)?, || {
        format!("got {xy}")
    });

    let gens = upper.generators();
    let mut assoc = CheckResult::new("associativity on generator triples");
    for (n1, x) in &gens {
        for (n2, y) in &gens {
            let xy = upper.multiply(x, y)?;
            for (n3, z) in &gens {
                let ok = upper.multiply(&xy, z)? == upper.multiply(x, &upper.multiply(y, z)?)?;
                assoc.record(ok, || format!("{n1}, {n2}, {n3}"));
            }
        }
    }
    let basis = upper.basis_monomials();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| basis[rng.gen_range(0..basis.len())];
    let mut assoc_random = CheckResult::new("associativity on random monomial triples");
    for _ in 0..samples {
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let (x, y, z) = (upper.basis(a), upper.basis(b), upper.basis(c));
        let ok = upper.multiply(&upper.multiply(&x, &y)?, &z)? == upper.multiply(&x, &upper.multiply(&y, &z)?)?;
        assoc_random.record(ok, || format!("{a}, {b}, {c}"));
    }

    let exhaustive = basis.len() * basis.len() <= 1 << 13;
    let mut pi = CheckResult::new(if exhaustive {
        "π_k(xy) = π_k(x)π_k(y) on all basis pairs"
    } else {
        "π_k(xy) = π_k(x)π_k(y) on random basis pairs"
    });
    let mut pi_pair = |a: HypMonomial, b: HypMonomial| -> Result<(), VerifyError> {
        let lhs = frobenius_pi_k(&upper.mul_monomials(a, b), k)?;
        let rhs = base.multiply(&frobenius_pi_k(&upper.basis(a), k)?, &frobenius_pi_k(&upper.basis(b), k)?)?;
        pi.record(lhs == rhs, || format!("{a}, {b}"));
        Ok(())
    };
    if exhaustive {
        for &a in &basis {
            for &b in &basis {
                pi_pair(a, b)?;
            }
        }
    } else {
        for _ in 0..samples {
            let (a, b) = (pick(&mut rng), pick(&mut rng));
            pi_pair(a, b)?;
        }
    }

    let dims = dimension_bookkeeping(p, k)?;
    let kernel = CheckResult::single(
        "dim ker π_k = dim D_{k+1} − dim D_1 = dim span D_{k+1}(D_k)^+",
        dims.kernel_dim == dims.kernel_dim_expected
            && dims.augmentation_span_dim == dims.kernel_dim
            && dims.augmentation_span_in_kernel,
        || format!("{dims:?}"),
    );

    let mut erratum = erratum_report(&upper, 4)?;
    let step = dims.step_difference;
    erratum.entries.push(ErratumEntry {
        formula: "dim ker π_k = p^{3(k+1)} - p^{3k}".into(),
        cases_checked: 1,
        mismatches: usize::from(step != dims.kernel_dim),
        examples: if step != dims.kernel_dim {
            vec![crate::hyper::Discrepancy {
                input: format!("p={p}, k={k}"),
                printed: step.to_string(),
                oracle: dims.kernel_dim.to_string(),
            }]
        } else {
            Vec::new()
        },
        corrected_form: Some("p^{3(k+1)} - p^3".into()),
        corrected_mismatches: Some(usize::from(dims.kernel_dim != dims.kernel_dim_expected)),
    });

    let mut report = SuiteReport::new(
        "charp",
        format!("(p={p}, k={k})"),
        vec![bracket, assoc, assoc_random, pi, kernel],
    );
    report.summary.push(format!(
        "dim D_{k} = {}, dim D_{} = {}, dim ker π_{k} = {}",
        dims.dim_lower,
        k + 1,
        dims.dim_upper,
        dims.kernel_dim
    ));
    report.erratum = Some(erratum);
    Ok(report)
}

/// `q_binom` against the digit-wise version below `ℓ`, where the two agree.
pub fn qbinom_agrees_below_ell(ell: u32) -> Result<bool, VerifyError> {
    let field = CyclotomicField::new(ell as i64)?;
    for m in 0..ell as i64 {
        for n in 0..=m {
            if q_binom(&field, m, n).ok() != Some(gen_q_binom(&field, m as u64, n as u64)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let alg = Algebra::new(AlgebraParams::new(3, 0, 1).unwrap()).unwrap();
        assert!(relations(&alg).unwrap().passed);
        assert!(commutation(&alg).unwrap().passed);
        assert!(qbinom(3, 9, None, 0).unwrap().passed);
        assert!(qbinom_agrees_below_ell(5).unwrap());
        assert!(associativity(&alg, 200, 1).unwrap().passed);
    }

    #[test]
    fn charp_suite_reports_errata_without_failing() {
        let r = charp(2, 1, 100, 7).unwrap();
        assert!(r.passed, "{r}");
        let e = r.erratum.unwrap();
        assert!(e.entries.iter().any(|x| x.mismatches > 0));
    }

    #[test]
    fn report_rendering() {
        let r = SuiteReport::new("demo", "(x)".into(), vec![CheckResult::single("thing", false, || "why".into())]);
        let text = r.to_string();
        assert!(text.contains("FAIL thing (1 of 1 cases)"));
        assert!(text.ends_with("FAIL"));
        assert!(r.to_json().contains("\"passed\": false"));
    }
}
