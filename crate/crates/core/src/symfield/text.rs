//! Line-oriented text form of polynomials and vector fields.
//!
//! A polynomial is written as a signed sum of terms `coeff * x1^a1 x3^a3`,
//! highest graded-lex monomial first; exponent 1 is left implicit and the zero
//! polynomial is `0`. A vector field is one such line per component.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::poly::{abs_rational, format_rational, Monomial, Polynomial, Rational};
use super::PolyVectorField;
use crate::error::{Error, Result};

pub fn format_polynomial(p: &Polynomial) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let negative = c.is_negative();
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&format_rational(&abs_rational(c)));
        let factors: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(j, &a)| {
                if a == 1 {
                    format!("x{}", j + 1)
                } else {
                    format!("x{}^{}", j + 1, a)
                }
            })
            .collect();
        if !factors.is_empty() {
            out.push_str(" * ");
            out.push_str(&factors.join(" "));
        }
    }
    out
}

pub fn format_field(x: &PolyVectorField) -> String {
    x.components()
        .iter()
        .map(format_polynomial)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn tokenize(s: &str, line: usize) -> Result<Vec<Token>> {
    let err = |msg: String| Error::Parse { line, msg };
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut tokens = Vec::new();
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' | '\t' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                tokens.push(Token::Num(digits.parse().map_err(|_| err(format!("bad number {digits}")))?));
            }
            'x' => {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(err("variable needs an index, e.g. x1".into()));
                }
                let digits: String = chars[start..i].iter().collect();
                let idx: usize = digits.parse().map_err(|_| err(format!("bad index {digits}")))?;
                if idx == 0 {
                    return Err(err("variables are numbered from x1".into()));
                }
                tokens.push(Token::Var(idx - 1));
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

/// Parse one polynomial line in `dim` variables.
pub fn parse_polynomial(s: &str, dim: usize, line: usize) -> Result<Polynomial> {
    let err = |msg: String| Error::Parse { line, msg };
    let tokens = tokenize(s, line)?;
    if tokens.is_empty() {
        return Err(err("empty polynomial".into()));
    }
    let mut p = Polynomial::zero(dim);
    let mut pos = 0;
    let mut first = true;
    while pos < tokens.len() {
        let mut sign = Rational::one();
        match tokens[pos] {
            Token::Plus => pos += 1,
            Token::Minus => {
                sign = -sign;
                pos += 1;
            }
            _ if first => {}
            _ => return Err(err("expected + or - between terms".into())),
        }
        first = false;

        let mut coeff = Rational::one();
        let mut exps = vec![0u32; dim];
        let mut saw_factor = false;
        if let Some(Token::Num(n)) = tokens.get(pos) {
            let mut c = Rational::from_integer(n.clone());
            pos += 1;
            if tokens.get(pos) == Some(&Token::Slash) {
                match tokens.get(pos + 1) {
                    Some(Token::Num(d)) if !d.is_zero() => {
                        c /= Rational::from_integer(d.clone());
                        pos += 2;
                    }
                    _ => return Err(err("expected nonzero denominator after /".into())),
                }
            }
            coeff = c;
            saw_factor = true;
            if tokens.get(pos) == Some(&Token::Star) {
                pos += 1;
                if !matches!(tokens.get(pos), Some(Token::Var(_))) {
                    return Err(err("expected variable after *".into()));
                }
            }
        }
        while let Some(Token::Var(j)) = tokens.get(pos) {
            let j = *j;
            if j >= dim {
                return Err(err(format!("variable x{} exceeds dimension {dim}", j + 1)));
            }
            pos += 1;
            let mut a = 1u32;
            if tokens.get(pos) == Some(&Token::Caret) {
                match tokens.get(pos + 1) {
                    Some(Token::Num(e)) => {
                        a = u32::try_from(e).map_err(|_| err("exponent too large".into()))?;
                        pos += 2;
                    }
                    _ => return Err(err("expected exponent after ^".into())),
                }
            }
            exps[j] += a;
            saw_factor = true;
            if tokens.get(pos) == Some(&Token::Star) {
                pos += 1;
                if !matches!(tokens.get(pos), Some(Token::Var(_))) {
                    return Err(err("expected variable after *".into()));
                }
            }
        }
        if !saw_factor {
            return Err(err("empty term".into()));
        }
        p.add_term(Monomial(exps), sign * coeff);
    }
    Ok(p)
}

/// Parse `dim` consecutive component lines.
pub fn parse_field(lines: &[&str], dim: usize, first_line: usize) -> Result<PolyVectorField> {
    if lines.len() != dim {
        return Err(Error::Parse {
            line: first_line,
            msg: format!("expected {dim} component lines, got {}", lines.len()),
        });
    }
    let comps = lines
        .iter()
        .enumerate()
        .map(|(i, l)| parse_polynomial(l, dim, first_line + i))
        .collect::<Result<Vec<_>>>()?;
    PolyVectorField::new(comps)
}
