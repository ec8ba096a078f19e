//! Order specifications: `Z[pi,q/pi]`, `Z[pi]`, `maximal`, `auto`, or
//! `Z[e1, e2, ...]` with each e_i an expression in `pi`, `q`, `V` (= q/pi)
//! and integers, using `+ - * / ^` and parentheses.

use num_bigint::BigInt;
use weilgraph::algebra::{AlgebraElement, EtaleAlgebra};
use weilgraph::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderSpec {
    Auto,
    Maximal,
    Generators(Vec<String>),
}

pub fn parse_order_spec(s: &str) -> Result<OrderSpec> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    match compact.as_str() {
        "auto" => return Ok(OrderSpec::Auto),
        "maximal" | "O_K" | "OK" => return Ok(OrderSpec::Maximal),
        _ => {}
    }
    let inner = compact
        .strip_prefix("Z[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| {
            Error::InvalidInput(format!("order spec must be auto, maximal or Z[...]: {s}"))
        })?;
    let mut gens = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                gens.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    gens.push(cur);
    if gens.iter().any(|g| g.is_empty()) || depth != 0 {
        return Err(Error::InvalidInput(format!(
            "malformed generator list: {s}"
        )));
    }
    Ok(OrderSpec::Generators(gens))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Tok::Int(
                chars[start..i].iter().collect::<String>().parse().unwrap(),
            ));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::InvalidInput(format!(
                "unexpected character {c:?} in {s}"
            )));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    alg: &'a EtaleAlgebra,
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::InvalidInput(format!("{what} in expression {}", self.src))
    }

    fn peek_op(&self, c: char) -> bool {
        self.toks.get(self.pos) == Some(&Tok::Op(c))
    }

    fn expr(&mut self) -> Result<AlgebraElement> {
        let mut acc = self.term()?;
        loop {
            if self.peek_op('+') {
                self.pos += 1;
                let t = self.term()?;
                acc = self.alg.add(&acc, &t);
            } else if self.peek_op('-') {
                self.pos += 1;
                let t = self.term()?;
                acc = self.alg.sub(&acc, &t);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<AlgebraElement> {
        let mut acc = self.power()?;
        loop {
            if self.peek_op('*') {
                self.pos += 1;
                let f = self.power()?;
                acc = self.alg.mul(&acc, &f);
            } else if self.peek_op('/') {
                self.pos += 1;
                let f = self.power()?;
                acc = self.alg.mul(&acc, &self.alg.inverse(&f)?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<AlgebraElement> {
        let base = self.unary()?;
        if self.peek_op('^') {
            self.pos += 1;
            match self.toks.get(self.pos) {
                Some(Tok::Int(e)) => {
                    let e: u32 = e.try_into().map_err(|_| self.err("exponent too large"))?;
                    self.pos += 1;
                    return Ok(self.alg.pow(&base, e));
                }
                _ => return Err(self.err("expected a non-negative integer exponent")),
            }
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<AlgebraElement> {
        if self.peek_op('-') {
            self.pos += 1;
            let x = self.unary()?;
            return Ok(self.alg.sub(&int_elt(self.alg, BigInt::from(0)), &x));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<AlgebraElement> {
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Tok::Int(n) => Ok(int_elt(self.alg, n)),
            Tok::Ident(name) => match name.as_str() {
                "pi" | "F" => Ok(self.alg.pi()),
                "V" => self.alg.q_over_pi(),
                "q" => {
                    let q = self
                        .alg
                        .q()
                        .ok_or_else(|| self.err("q is not set"))?
                        .clone();
                    Ok(int_elt(self.alg, q))
                }
                _ => Err(self.err(&format!("unknown name {name}"))),
            },
            Tok::Op('(') => {
                let x = self.expr()?;
                if !self.peek_op(')') {
                    return Err(self.err("missing )"));
                }
                self.pos += 1;
                Ok(x)
            }
            Tok::Op(c) => Err(self.err(&format!("unexpected {c}"))),
        }
    }
}

pub fn parse_element(alg: &EtaleAlgebra, s: &str) -> Result<AlgebraElement> {
    let mut p = Parser {
        alg,
        toks: tokenize(s)?,
        pos: 0,
        src: s,
    };
    let x = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(x)
}

fn int_elt(alg: &EtaleAlgebra, n: BigInt) -> AlgebraElement {
    AlgebraElement::from_int(alg.degree(), n)
}
