//! Tiny expression grammar for CLI field input, parsed straight into a
//! monomial expansion. Supported: `z1..zn`, `conj(...)`, `+`, `-`, `*`, `^`,
//! real literals and the imaginary unit `i` (e.g. `0.5*z1^2*conj(z2) - 2i`).

use super::monomial::MonomialField;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Coord(usize),
    Conj,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str, dim: usize) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number literal '{text}'")))?;
                if i < bytes.len() && bytes[i] == 'i' {
                    i += 1;
                    out.push(Tok::Imag(v));
                } else {
                    out.push(Tok::Num(v));
                }
            }
            'i' => {
                out.push(Tok::Imag(1.0));
                i += 1;
            }
            'z' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = bytes[start + 1..i].iter().collect();
                let k: usize = text
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coordinate '{}'", &src[start..])))?;
                if k == 0 || k > dim {
                    return Err(Error::Parse(format!(
                        "coordinate z{k} out of range for dimension {dim}"
                    )));
                }
                out.push(Tok::Coord(k - 1));
            }
            'c' => {
                let rest: String = bytes[i..].iter().take(4).collect();
                if rest == "conj" {
                    out.push(Tok::Conj);
                    i += 4;
                } else {
                    return Err(Error::Parse(format!("unexpected token at '{rest}'")));
                }
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.bump() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(Error::Parse(format!("expected {t:?}, got {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<MonomialField> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MonomialField> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MonomialField> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            match self.bump() {
                Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 => Ok(base.pow(v as u32)),
                got => Err(Error::Parse(format!(
                    "exponent must be a non-negative integer, got {got:?}"
                ))),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MonomialField> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(MonomialField::constant(self.dim, Complex64::new(v, 0.0))),
            Some(Tok::Imag(v)) => Ok(MonomialField::constant(self.dim, Complex64::new(0.0, v))),
            Some(Tok::Coord(k)) => Ok(MonomialField::coordinate(self.dim, k, false)),
            Some(Tok::Minus) => Ok(self.atom()?.scale(Complex64::new(-1.0, 0.0))),
            Some(Tok::Conj) => {
                self.expect(Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(conj_field(&inner))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            got => Err(Error::Parse(format!("unexpected token {got:?}"))),
        }
    }
}

fn conj_field(f: &MonomialField) -> MonomialField {
    let mut out = MonomialField::zero(f.dim());
    for (e, &c) in f.terms() {
        let flipped: Vec<(u32, u32)> = e.iter().map(|&(a, b)| (b, a)).collect();
        out.add_term(flipped, c.conj());
    }
    out
}

/// Parse one field expression over `z1..z{dim}` into a monomial expansion.
pub fn parse_expression(src: &str, dim: usize) -> Result<MonomialField> {
    let toks = tokenize(src, dim)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        dim,
    };
    let f = p.expr()?;
    if p.pos != toks.len() {
        return Err(Error::Parse(format!(
            "trailing tokens after position {}",
            p.pos
        )));
    }
    Ok(f)
}
