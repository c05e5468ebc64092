//! Canonical text and JSON renderings of algebra elements. The text form is
//! itself valid input to the expression parser.

use num_traits::{One, Signed};
use serde::Serialize;

use crate::algebra::{AlgElement, AlgebraParams, Monomial};
use crate::arith::{fmt_rat, CycNum};

/// `F(m)*K[0]^a*K[1]^b*E(p)`, or `1` for the unit.
pub fn monomial_text(params: &AlgebraParams, m: &Monomial) -> String {
    let mut parts = Vec::new();
    if m.f > 0 {
        parts.push(format!("F({})", m.f));
    }
    for i in 0..=params.level() {
        match params.digit(m.k, i) {
            0 => {}
            1 => parts.push(format!("K[{i}]")),
            d => parts.push(format!("K[{i}]^{d}")),
        }
    }
    if m.e > 0 {
        parts.push(format!("E({})", m.e));
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Splits a term into a sign and an unsigned rendering.
fn term_text(params: &AlgebraParams, m: &Monomial, c: &CycNum) -> (bool, String) {
    let mono = monomial_text(params, m);
    let unit = *m == Monomial::UNIT;
    if let Some(r) = c.as_rational() {
        let negative = r.is_negative();
        let abs = r.abs();
        let text = match (abs.is_one(), unit) {
            (true, true) => "1".to_string(),
            (true, false) => mono,
            (false, true) => fmt_rat(&abs),
            (false, false) => format!("{}*{mono}", fmt_rat(&abs)),
        };
        return (negative, text);
    }
    let coeff = c.to_string();
    let text = if unit {
        format!("({coeff})")
    } else {
        format!("({coeff})*{mono}")
    };
    (false, text)
}

/// Terms in lexicographic monomial order joined by ` + ` and ` - `.
pub fn element_text(x: &AlgElement) -> String {
    let params = x.params();
    let mut out = String::new();
    for (i, (m, c)) in x.terms().iter().enumerate() {
        let (negative, text) = term_text(&params, m, c);
        match (i, negative) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&text);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct JsonParams {
    pub ell: u32,
    #[serde(rename = "N")]
    pub level: u32,
    pub root_exponent: u32,
}

impl From<&AlgebraParams> for JsonParams {
    fn from(p: &AlgebraParams) -> Self {
        JsonParams {
            ell: p.ell(),
            level: p.level(),
            root_exponent: p.root_exponent(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JsonCoefficient {
    /// Rational coefficients of `1, q, q^2, …` reduced modulo the cyclotomic polynomial.
    pub q_coeffs: Vec<String>,
    pub text: String,
}

impl From<&CycNum> for JsonCoefficient {
    fn from(c: &CycNum) -> Self {
        let mut q_coeffs: Vec<String> = c.lambda_coeffs().iter().map(fmt_rat).collect();
        while q_coeffs.len() > 1 && q_coeffs.last().is_some_and(|s| s == "0") {
            q_coeffs.pop();
        }
        JsonCoefficient {
            q_coeffs,
            text: c.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JsonTerm {
    pub f: u64,
    pub k: u64,
    pub e: u64,
    pub monomial: String,
    pub coefficient: JsonCoefficient,
}

#[derive(Debug, Clone, Serialize)]
pub struct JsonElement {
    pub params: JsonParams,
    pub text: String,
    pub terms: Vec<JsonTerm>,
}

pub fn element_json(x: &AlgElement) -> JsonElement {
    let params = x.params();
    JsonElement {
        params: (&params).into(),
        text: element_text(x),
        terms: x
            .terms()
            .iter()
            .map(|(m, c)| JsonTerm {
                f: m.f,
                k: m.k,
                e: m.e,
                monomial: monomial_text(&params, m),
                coefficient: c.into(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::expr::{eval, parse_for};

    #[test]
    fn monomial_rendering() {
        let p = AlgebraParams::new(3, 1, 1).unwrap();
        assert_eq!(monomial_text(&p, &Monomial::new(4, 5, 3)), "F(4)*K[0]^2*K[1]*E(3)");
        assert_eq!(monomial_text(&p, &Monomial::UNIT), "1");
    }

    #[test]
    fn text_reparses_to_the_same_element() {
        let alg = Algebra::new(AlgebraParams::new(3, 1, 1).unwrap()).unwrap();
        for src in ["E[0]*F[0] - F[0]*E[0]", "-2*F(4)*E(3) + q", "1/2 - q^2*K[1]", "0", "F[1]*E[0]*F[0]"] {
            let x = eval(&parse_for(src, &alg.params()).unwrap(), &alg).unwrap();
            let text = element_text(&x);
            let back = eval(&parse_for(&text, &alg.params()).unwrap(), &alg).unwrap();
            assert_eq!(back, x, "{src} rendered as {text}");
        }
    }

    #[test]
    fn json_shape() {
        let alg = Algebra::new(AlgebraParams::new(3, 0, 1).unwrap()).unwrap();
        let x = eval(&parse_for("q*E[0]", &alg.params()).unwrap(), &alg).unwrap();
        let j = serde_json::to_value(element_json(&x)).unwrap();
        assert_eq!(j["params"]["N"], 0);
        assert_eq!(j["terms"][0]["monomial"], "E(1)");
        assert_eq!(j["terms"][0]["coefficient"]["q_coeffs"], serde_json::json!(["0", "1"]));
    }
}
