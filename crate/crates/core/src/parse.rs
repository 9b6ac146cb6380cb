//! Text syntax for free *-algebra polynomials.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = factor { "*" factor } ;
//! factor  = ("+" | "-") factor | atom { postfix } ;
//! postfix = "'" | "^" integer ;
//! atom    = number | variable | "(" expr ")" ;
//! number  = digits [ "." digits | "/" digits ] ;
//! variable = "x" digits ;            (* x1 .. xN *)
//! ```
//!
//! `'` is the adjoint and applies to whatever precedes it, so `(x1*x2)'` is
//! `x2'*x1'`. Postfix operators apply left to right: `x1'^2` is `(x1')^2` and
//! `x1^2'` is `(x1^2)'`. Whitespace is ignored. Coefficients are exact.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ncpoly::{Alphabet, Coeff, NcPoly, Poly, Rational, RealPoly, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Var(u64),
    Plus,
    Minus,
    Star,
    Caret,
    Apostrophe,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(r) => write!(f, "number {r}"),
            Tok::Var(i) => write!(f, "variable x{i}"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::Apostrophe => f.write_str("\"'\""),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;

    let digits = |i: &mut usize, column: &mut usize| -> String {
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
            *column += 1;
        }
        chars[start..*i].iter().collect()
    };

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '\'' => Some(Tok::Apostrophe),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((tok, pos));
            i += 1;
            column += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let whole = digits(&mut i, &mut column);
            let mut value = Rational::from_integer(whole.parse::<BigInt>().unwrap());
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                column += 1;
                let frac = digits(&mut i, &mut column);
                if frac.is_empty() {
                    return Err(err(Pos { line, column }, "expected digits after '.'"));
                }
                let scale = BigInt::from(10).pow(frac.len() as u32);
                value += Rational::new(frac.parse::<BigInt>().unwrap(), scale);
            } else if i < chars.len() && chars[i] == '/' {
                i += 1;
                column += 1;
                let den = digits(&mut i, &mut column);
                if den.is_empty() {
                    return Err(err(Pos { line, column }, "expected denominator after '/'"));
                }
                let den = den.parse::<BigInt>().unwrap();
                if den.is_zero() {
                    return Err(err(pos, "zero denominator"));
                }
                value /= Rational::from_integer(den);
            }
            out.push((Tok::Num(value), pos));
            continue;
        }
        if c == 'x' || c == 'X' {
            i += 1;
            column += 1;
            let index = digits(&mut i, &mut column);
            if index.is_empty() {
                return Err(err(pos, "expected variable index after 'x'"));
            }
            let index: u64 = index
                .parse()
                .map_err(|_| err(pos, "variable index too large"))?;
            if index == 0 {
                return Err(err(pos, "variable indices start at 1"));
            }
            out.push((Tok::Var(index), pos));
            continue;
        }
        return Err(err(pos, format!("unexpected character {c:?}")));
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

#[derive(Debug)]
enum Ast {
    Num(Rational),
    Var(u64, Pos),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Adjoint(Box<Ast>),
    Pow(Box<Ast>, u32),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                return Ok(Ast::Neg(Box::new(self.factor()?)));
            }
            Tok::Plus => {
                self.bump();
                return self.factor();
            }
            _ => {}
        }
        let mut node = self.atom()?;
        loop {
            match self.peek() {
                Tok::Apostrophe => {
                    self.bump();
                    node = Ast::Adjoint(Box::new(node));
                }
                Tok::Caret => {
                    self.bump();
                    let (tok, pos) = self.bump();
                    let k = match tok {
                        Tok::Num(r) if r.is_integer() && !r.is_negative() => r
                            .to_integer()
                            .try_into()
                            .map_err(|_| err(pos, "exponent too large"))?,
                        other => {
                            return Err(err(
                                pos,
                                format!("expected a nonnegative integer exponent, found {other}"),
                            ))
                        }
                    };
                    node = Ast::Pow(Box::new(node), k);
                }
                _ => return Ok(node),
            }
        }
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(r) => Ok(Ast::Num(r)),
            Tok::Var(i) => Ok(Ast::Var(i, pos)),
            Tok::LParen => {
                let inner = self.expr()?;
                let (close, cpos) = self.bump();
                if close != Tok::RParen {
                    return Err(err(cpos, format!("expected ')', found {close}")));
                }
                Ok(inner)
            }
            other => Err(err(
                pos,
                format!("expected a number, variable or '(', found {other}"),
            )),
        }
    }
}

fn max_var(ast: &Ast) -> u64 {
    match ast {
        Ast::Num(_) => 0,
        Ast::Var(i, _) => *i,
        Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) => max_var(a).max(max_var(b)),
        Ast::Neg(a) | Ast::Adjoint(a) | Ast::Pow(a, _) => max_var(a),
    }
}

fn eval(ast: &Ast, alphabet: Alphabet) -> Result<NcPoly, ParseError> {
    Ok(match ast {
        Ast::Num(r) => NcPoly::constant(alphabet, r.clone()),
        Ast::Var(i, pos) => {
            if *i as usize > alphabet.n() {
                return Err(err(
                    *pos,
                    format!(
                        "variable x{i} exceeds the declared {} variables",
                        alphabet.n()
                    ),
                ));
            }
            NcPoly::var(alphabet, *i as usize)
        }
        Ast::Add(a, b) => &eval(a, alphabet)? + &eval(b, alphabet)?,
        Ast::Sub(a, b) => &eval(a, alphabet)? - &eval(b, alphabet)?,
        Ast::Mul(a, b) => &eval(a, alphabet)? * &eval(b, alphabet)?,
        Ast::Neg(a) => -&eval(a, alphabet)?,
        Ast::Adjoint(a) => eval(a, alphabet)?.adjoint(),
        Ast::Pow(a, k) => eval(a, alphabet)?.pow(*k),
    })
}

fn parse_ast(text: &str) -> Result<Ast, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        at: 0,
    };
    if *parser.peek() == Tok::Eof {
        return Err(err(parser.pos(), "empty expression"));
    }
    let ast = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        let (tok, pos) = parser.bump();
        return Err(err(pos, format!("unexpected {tok}")));
    }
    Ok(ast)
}

/// Largest variable index mentioned in `text` (at least 1).
pub fn infer_variables(text: &str) -> Result<usize, ParseError> {
    Ok(max_var(&parse_ast(text)?).max(1) as usize)
}

/// Parses `text` over `n` variables, or over as many as the largest index
/// used when `n` is `None`.
pub fn parse(text: &str, n: Option<usize>) -> Result<NcPoly, ParseError> {
    let ast = parse_ast(text)?;
    let n = n.unwrap_or_else(|| max_var(&ast).max(1) as usize);
    let alphabet = Alphabet::new(n).map_err(|e| err(Pos { line: 1, column: 1 }, e.to_string()))?;
    eval(&ast, alphabet)
}

/// `x1*x2'` style rendering of a word; the empty word prints as `1`.
pub fn format_word(alphabet: Alphabet, word: &Word) -> String {
    if word.is_empty() {
        return "1".to_string();
    }
    let n = alphabet.n() as u32;
    word.letters()
        .iter()
        .map(|&l| {
            if l > n {
                format!("x{}'", l - n)
            } else {
                format!("x{l}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Coefficients that can be printed as a signed magnitude.
pub trait DisplayCoeff: Coeff {
    fn is_neg(&self) -> bool;
    fn magnitude(&self) -> String;
    fn is_unit_magnitude(&self) -> bool;
}

impl DisplayCoeff for Rational {
    fn is_neg(&self) -> bool {
        self.is_negative()
    }

    fn magnitude(&self) -> String {
        self.abs().to_string()
    }

    fn is_unit_magnitude(&self) -> bool {
        self.abs().is_one()
    }
}

impl DisplayCoeff for f64 {
    fn is_neg(&self) -> bool {
        self.is_sign_negative()
    }

    fn magnitude(&self) -> String {
        format!("{}", self.abs())
    }

    fn is_unit_magnitude(&self) -> bool {
        self.abs() == 1.0
    }
}

/// Renders terms in graded-lex order, e.g. `1 + x1'*x1 - 1/2*x1*x1'`.
pub fn format_poly<C: DisplayCoeff>(p: &Poly<C>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let alphabet = p.alphabet();
    let mut out = String::new();
    for (k, (w, c)) in p.terms().enumerate() {
        let neg = c.is_neg();
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if w.is_empty() {
            out.push_str(&c.magnitude());
        } else if c.is_unit_magnitude() {
            out.push_str(&format_word(alphabet, w));
        } else {
            out.push_str(&c.magnitude());
            out.push('*');
            out.push_str(&format_word(alphabet, w));
        }
    }
    out
}

impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self))
    }
}

impl fmt::Display for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self))
    }
}
