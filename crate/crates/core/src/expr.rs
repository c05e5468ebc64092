//! Surface syntax for algebra elements.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' int)?          q^k also accepts a signed k
//! atom   := int ('/' int)? | 'q' | G '[' int ']' | D '(' int ')' | '(' expr ')'
//! G      := 'E' | 'F' | 'K' | 'Kinv'
//! D      := 'E' | 'F'
//! ```

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{AlgElement, Algebra, AlgebraError, AlgebraParams, DividedKind, GenKind, GeneratorId};
use crate::arith::{fmt_rat, CycNum, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    /// A nonnegative rational literal.
    Scalar(Rat),
    /// `q^k`, standing for `λ^k`.
    QPow(i64),
    Gen(GenKind, u32),
    Divided(DividedKind, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub expected: BTreeSet<&'static str>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: expected ", self.offset)?;
        let items: Vec<_> = self.expected.iter().map(|s| format!("`{s}`")).collect();
        if items.len() == 1 {
            write!(f, "{}", items[0])?;
        } else {
            write!(f, "one of {}", items.join(", "))?;
        }
        write!(f, ", found {}", self.found)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("index {index} exceeds level {level}")]
    IndexOutOfRange { index: u32, level: u32 },
    #[error("divided power {kind}({m}) exceeds the bound {bound}")]
    DividedOutOfRange { kind: &'static str, m: u64, bound: u64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("ascii digits");
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if b"+-*^/()[]".contains(&c) {
            out.push((i, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().expect("in bounds");
            return Err(ParseError {
                offset: i,
                expected: ["expression"].into_iter().collect(),
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

const ATOM_START: [&str; 9] = ["integer", "q", "E", "F", "K", "Kinv", "(", "-", "expression"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.iter().copied().collect(),
            found: self.peek().describe(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, name: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    fn small_int<T: TryFrom<u64>>(&mut self) -> Result<T, ParseError> {
        let at = self.pos;
        let n = self.int()?;
        n.to_u64().and_then(|v| T::try_from(v).ok()).ok_or_else(|| ParseError {
            offset: self.toks[at].0,
            expected: ["small integer"].into_iter().collect(),
            found: format!("integer `{n}`"),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Ident("q".into()) {
            self.pos += 1;
            if !self.eat('^') {
                return Ok(Expr::QPow(1));
            }
            let negative = self.eat('-');
            let k: i64 = self.small_int::<u32>()? as i64;
            return Ok(Expr::QPow(if negative { -k } else { k }));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let e: u32 = self.small_int()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                if self.eat('/') {
                    let at = self.pos;
                    let d = self.int()?;
                    if d.is_zero() {
                        self.pos = at;
                        return Err(self.error(&["nonzero denominator"]));
                    }
                    return Ok(Expr::Scalar(Rat::new(n, d)));
                }
                Ok(Expr::Scalar(Rat::from_integer(n)))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')', ")")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let kind = match name.as_str() {
                    "E" => GenKind::E,
                    "F" => GenKind::F,
                    "K" => GenKind::K,
                    "Kinv" => GenKind::Kinv,
                    _ => return Err(self.error(&ATOM_START[..7])),
                };
                self.pos += 1;
                if self.eat('[') {
                    let i = self.small_int()?;
                    self.expect(']', "]")?;
                    return Ok(Expr::Gen(kind, i));
                }
                let divided = match kind {
                    GenKind::E => Some(DividedKind::E),
                    GenKind::F => Some(DividedKind::F),
                    _ => None,
                };
                match divided {
                    Some(d) if self.eat('(') => {
                        let m = self.small_int()?;
                        self.expect(')', ")")?;
                        Ok(Expr::Divided(d, m))
                    }
                    Some(_) => Err(self.error(&["[", "("])),
                    None => Err(self.error(&["["])),
                }
            }
            _ => Err(self.error(&ATOM_START[..7])),
        }
    }
}

/// Parses without reference to any parameters.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["+", "-", "*", "end of input"]));
    }
    Ok(e)
}

/// Checks generator indices and divided-power exponents against `params`.
pub fn check_expr(e: &Expr, params: &AlgebraParams) -> Result<(), ExprError> {
    match e {
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            check_expr(a, params)?;
            check_expr(b, params)
        }
        Expr::Neg(a) | Expr::Pow(a, _) => check_expr(a, params),
        Expr::Scalar(_) | Expr::QPow(_) => Ok(()),
        Expr::Gen(_, i) if *i > params.level() => Err(ExprError::IndexOutOfRange {
            index: *i,
            level: params.level(),
        }),
        Expr::Gen(..) => Ok(()),
        Expr::Divided(kind, m) if *m >= params.index_bound() => Err(ExprError::DividedOutOfRange {
            kind: divided_symbol(*kind),
            m: *m,
            bound: params.index_bound(),
        }),
        Expr::Divided(..) => Ok(()),
    }
}

pub fn parse_for(text: &str, params: &AlgebraParams) -> Result<Expr, ExprError> {
    let e = parse_expr(text)?;
    check_expr(&e, params)?;
    Ok(e)
}

fn divided_symbol(kind: DividedKind) -> &'static str {
    match kind {
        DividedKind::E => "E",
        DividedKind::F => "F",
    }
}

pub fn eval(e: &Expr, alg: &Algebra) -> Result<AlgElement, ExprError> {
    check_expr(e, &alg.params())?;
    eval_checked(e, alg)
}

fn eval_checked(e: &Expr, alg: &Algebra) -> Result<AlgElement, ExprError> {
    Ok(match e {
        Expr::Add(a, b) => &eval_checked(a, alg)? + &eval_checked(b, alg)?,
        Expr::Sub(a, b) => &eval_checked(a, alg)? - &eval_checked(b, alg)?,
        Expr::Neg(a) => -&eval_checked(a, alg)?,
        Expr::Mul(a, b) => alg.multiply(&eval_checked(a, alg)?, &eval_checked(b, alg)?)?,
        Expr::Pow(a, k) => alg.power(&eval_checked(a, alg)?, *k)?,
        Expr::Scalar(r) => alg.constant(CycNum::from_rat(alg.field(), r.clone())),
        Expr::QPow(k) => alg.constant(alg.lambda_pow(*k)),
        Expr::Gen(kind, i) => alg.generator(GeneratorId::new(*kind, *i))?,
        Expr::Divided(kind, m) => alg.divided_power(*kind, *m)?,
    })
}

// Binding strength of the printed form: sums 1, products 2, unary minus and
// fractions 3, powers 4, atoms 5.
fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) | Expr::QPow(_) => 4,
        Expr::Gen(..) | Expr::Divided(..) => 5,
        Expr::Scalar(r) if r.denom().is_one() => 5,
        Expr::Scalar(_) => 3,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if strength(e) < min {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the fewest parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Add(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " + ")?;
                write_at(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " - ")?;
                write_at(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_at(f, a, 2)?;
                write!(f, "*")?;
                write_at(f, b, 3)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_at(f, a, 3)
            }
            Expr::Pow(a, k) => {
                write_at(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Scalar(r) => write!(f, "{}", fmt_rat(r)),
            Expr::QPow(1) => write!(f, "q"),
            Expr::QPow(k) => write!(f, "q^{k}"),
            Expr::Gen(kind, i) => write!(f, "{}[{i}]", kind.symbol()),
            Expr::Divided(kind, m) => write!(f, "{}({m})", divided_symbol(*kind)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(s: &str) -> Expr {
        let e = parse_expr(s).unwrap();
        let printed = e.to_string();
        assert_eq!(parse_expr(&printed).unwrap(), e, "{s} printed as {printed}");
        e
    }

    #[test]
    fn commutator_has_two_product_terms() {
        let e = roundtrip("E[0]*F[0] - F[0]*E[0]");
        let Expr::Sub(a, b) = e else { panic!("not a difference") };
        assert!(matches!(*a, Expr::Mul(..)));
        assert!(matches!(*b, Expr::Mul(..)));
    }

    #[test]
    fn powers_bind_tightest() {
        let e = parse_expr("2*K[0]^2").unwrap();
        assert_eq!(
            e,
            Expr::Mul(
                Box::new(Expr::Scalar(Rat::from_integer(2.into()))),
                Box::new(Expr::Pow(Box::new(Expr::Gen(GenKind::K, 0)), 2))
            )
        );
        assert_eq!(parse_expr("q^-2").unwrap(), Expr::QPow(-2));
        assert_eq!(parse_expr("(q^2)^3").unwrap().to_string(), "(q^2)^3");
        assert_eq!(parse_expr("2/4").unwrap().to_string(), "1/2");
    }

    #[test]
    fn errors_carry_offsets() {
        let err = parse_expr("E[0] * ").unwrap_err();
        assert_eq!(err.offset, 7);
        assert!(err.expected.contains("("));
        let err = parse_expr("E{0}").unwrap_err();
        assert_eq!(err.offset, 1);
        let err = parse_expr("1/0").unwrap_err();
        assert_eq!(err.offset, 2);
        let err = parse_expr("(E[0]").unwrap_err();
        assert_eq!(err.expected, [")"].into_iter().collect());
    }

    #[test]
    fn index_bound_check() {
        let params = AlgebraParams::new(3, 1, 1).unwrap();
        let err = parse_for("E[2]", &params).unwrap_err();
        assert_eq!(err.to_string(), "index 2 exceeds level 1");
        assert_eq!(parse_for("E(4)", &params).unwrap(), Expr::Divided(DividedKind::E, 4));
        assert!(parse_for("F(9)", &params).is_err());
    }

    #[test]
    fn eval_divided_power_product() {
        let alg = Algebra::new(AlgebraParams::new(3, 1, 1).unwrap()).unwrap();
        let e = parse_for("E(2)*E(1)", &alg.params()).unwrap();
        assert!(eval(&e, &alg).unwrap().is_zero());
        let e = parse_for("1", &alg.params()).unwrap();
        assert_eq!(eval(&e, &alg).unwrap(), alg.one());
    }
}
