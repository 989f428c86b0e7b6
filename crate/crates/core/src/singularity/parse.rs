//! Polynomials in `z1..zn` (`z` alone means `z1`): rational coefficients,
//! `+ - * / ^` and parentheses. Division only by constants.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{parse_q, q, Q};

/// Sparse monomial: variable index → exponent.
pub(crate) type SparseMono = BTreeMap<usize, u16>;
pub(crate) type SparsePoly = BTreeMap<SparseMono, Q>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Q),
    Var(usize),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let bad = |m: String| Error::Parse(m);
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(parse_q(&cs[st..i].iter().collect::<String>())?));
        } else if c == 'z' {
            i += 1;
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let idx = if st == i {
                1
            } else {
                cs[st..i].iter().collect::<String>().parse::<usize>().map_err(|e| bad(e.to_string()))?
            };
            if idx == 0 {
                return Err(bad("variables are numbered from z1".into()));
            }
            out.push(Tok::Var(idx - 1));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(bad(format!("unexpected character {c:?} at {i}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

fn add(a: &mut SparsePoly, b: SparsePoly, s: &Q) {
    for (m, c) in b {
        let e = a.entry(m).or_insert_with(Q::zero);
        *e += c * s;
    }
    a.retain(|_, c| !c.is_zero());
}

fn mul(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    let mut out = SparsePoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m = ma.clone();
            for (v, e) in mb {
                *m.entry(*v).or_insert(0) += e;
            }
            *out.entry(m).or_insert_with(Q::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn constant(c: Q) -> SparsePoly {
    let mut p = SparsePoly::new();
    if !c.is_zero() {
        p.insert(SparseMono::new(), c);
    }
    p
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<SparsePoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                let t = self.term()?;
                add(&mut acc, t, &q(1));
            } else if self.eat('-') {
                let t = self.term()?;
                add(&mut acc, t, &q(-1));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SparsePoly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = mul(&acc, &self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                let c = match d.len() {
                    1 if d.keys().next().is_some_and(|m| m.is_empty()) => d.values().next().cloned(),
                    _ => None,
                };
                let c = c.ok_or_else(|| Error::Parse("division by a non-constant".into()))?;
                acc = acc.into_iter().map(|(m, v)| (m, v / &c)).collect();
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<SparsePoly> {
        if self.eat('-') {
            let p = self.unary()?;
            return Ok(p.into_iter().map(|(m, c)| (m, -c)).collect());
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            let e = match self.toks.get(self.pos) {
                Some(Tok::Num(n)) if n.is_integer() && *n >= q(0) => n.to_integer(),
                _ => return Err(Error::Parse("exponent must be a nonnegative integer".into())),
            };
            self.pos += 1;
            let e: u32 = e.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
            let mut out = constant(q(1));
            for _ in 0..e {
                out = mul(&out, &base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SparsePoly> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Ok(constant(c))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(SparsePoly::from([(SparseMono::from([(v, 1)]), q(1))]))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

pub(crate) fn parse_poly(s: &str) -> Result<SparsePoly> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(out)
}
