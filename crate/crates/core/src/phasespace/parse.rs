//! Precedence-climbing parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' ['-'] INT | '^' '(' ['-'] INT ')')?
//! atom   := NUMBER | IDENT | 'exp' '(' expr ')' | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Division and negative powers are only allowed for nonzero single-term
//! expressions built from numbers and parameters. The argument of `exp` must
//! be a linear form with rational weights; `sqrt` accepts rational constants
//! whose root lies in Q(√2).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use super::{Coeff, PhaseSpace, PhaseSpaceError, SymExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, PhaseSpaceError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &text[fs..i];
            }
            let digits = format!("{int_part}{frac_part}");
            let numer: BigInt = digits.parse().map_err(|_| PhaseSpaceError::Syntax {
                pos: start,
                msg: "malformed number".into(),
            })?;
            let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
            out.push((start, Tok::Num(BigRational::new(numer, denom))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or(c);
            return Err(PhaseSpaceError::Syntax { pos: i, msg: format!("unexpected character `{ch}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    space: &'a PhaseSpace,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), PhaseSpaceError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(PhaseSpaceError::Syntax { pos: self.offset(), msg: format!("expected `{op}`") })
        }
    }

    fn expr(&mut self) -> Result<SymExpr, PhaseSpaceError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc += &self.term()?;
            } else if self.eat('-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SymExpr, PhaseSpaceError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.peek() == Some(&Tok::Op('/')) {
                let pos = self.offset();
                self.pos += 1;
                let d = self.unary()?;
                acc = &acc * &self.invert(&d, pos)?;
            } else {
                return Ok(acc);
            }
        }
    }

    /// Inverse of a nonzero single term whose symbols are all parameters.
    fn invert(&self, d: &SymExpr, pos: usize) -> Result<SymExpr, PhaseSpaceError> {
        let inv = d.invert_single_term().ok_or(PhaseSpaceError::BadDivisor { pos })?;
        let params_only = inv.terms().all(|(k, _)| k.exp.is_empty() && k.mono.keys().all(|s| self.space.is_param(s)));
        if !params_only {
            return Err(PhaseSpaceError::BadDivisor { pos });
        }
        Ok(inv)
    }

    fn unary(&mut self) -> Result<SymExpr, PhaseSpaceError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<SymExpr, PhaseSpaceError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.offset();
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.toks.get(self.pos) {
            Some((_, Tok::Num(r))) if r.is_integer() => {
                let r = r.clone();
                self.pos += 1;
                i32::try_from(r.to_integer()).map_err(|_| PhaseSpaceError::NonIntegerExponent { pos })?
            }
            _ => return Err(PhaseSpaceError::NonIntegerExponent { pos }),
        };
        if paren {
            self.expect(')')?;
        }
        if neg {
            Ok(self.invert(&base, pos)?.pow(n as u32))
        } else {
            Ok(base.pow(n as u32))
        }
    }

    fn atom(&mut self) -> Result<SymExpr, PhaseSpaceError> {
        let pos = self.offset();
        match self.toks.get(self.pos).cloned() {
            Some((_, Tok::Num(r))) => {
                self.pos += 1;
                Ok(SymExpr::constant(Coeff::from_rational(r)))
            }
            Some((_, Tok::Op('('))) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some((_, Tok::Ident(name))) => {
                self.pos += 1;
                let is_call = self.peek() == Some(&Tok::Op('('));
                match (name.as_str(), is_call) {
                    ("exp", true) => {
                        self.pos += 1;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        let form = arg.as_linear_form().ok_or(PhaseSpaceError::NonLinearExp { pos })?;
                        Ok(SymExpr::exp_linear(form))
                    }
                    ("sqrt", true) => {
                        self.pos += 1;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        let r = arg
                            .as_constant()
                            .and_then(|c| c.as_rational().cloned())
                            .ok_or(PhaseSpaceError::BadSqrt { pos })?;
                        let root = Coeff::sqrt_of_rational(&r).ok_or(PhaseSpaceError::BadSqrt { pos })?;
                        Ok(SymExpr::constant(root))
                    }
                    _ if self.space.contains(&name) => Ok(SymExpr::symbol(&name)),
                    _ => Err(PhaseSpaceError::UnknownIdentifier { name, pos }),
                }
            }
            Some((_, Tok::Op(c))) => Err(PhaseSpaceError::Syntax { pos, msg: format!("unexpected `{c}`") }),
            None => Err(PhaseSpaceError::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parse `text` against the symbols declared in `space`.
pub fn parse_expr(text: &str, space: &PhaseSpace) -> Result<SymExpr, PhaseSpaceError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), space };
    if p.peek().is_none() {
        return Err(PhaseSpaceError::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(PhaseSpaceError::Syntax { pos: p.offset(), msg: "trailing input".into() });
    }
    Ok(e)
}
