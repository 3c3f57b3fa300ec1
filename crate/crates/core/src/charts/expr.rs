//! Expressions over `z1..zn`, their conjugates, `log`, `exp` and powers.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'i' | 'z'k | 'conj' '(' expr ')' | 'log' '(' expr ')'
//!        | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus on its left, so
//! `-z1^2` is `-(z1^2)`.

use num_complex::Complex64;

use super::ChartError;
use crate::jets::{CJet, Jet};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    I,
    Z(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Conj(Box<Expr>),
    Log(Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ChartError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| ChartError::Parse {
                pos: start,
                msg: format!("bad number `{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ChartError::Parse {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    at: usize,
    end: usize,
    dim: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ChartError> {
        Err(ChartError::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ChartError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ChartError> {
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

    fn term(&mut self) -> Result<Expr, ChartError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ChartError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn call(&mut self) -> Result<Box<Expr>, ChartError> {
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(')')?;
        Ok(Box::new(e))
    }

    fn atom(&mut self) -> Result<Expr, ChartError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym('(')) => Ok(*self.call()?),
            Some(Tok::Ident(name)) => {
                self.at += 1;
                match name.as_str() {
                    "i" => Ok(Expr::I),
                    "conj" => Ok(Expr::Conj(self.call()?)),
                    "log" => Ok(Expr::Log(self.call()?)),
                    "exp" => Ok(Expr::Exp(self.call()?)),
                    _ => match name.strip_prefix('z').and_then(|k| k.parse::<usize>().ok()) {
                        Some(k) if (1..=self.dim).contains(&k) => Ok(Expr::Z(k - 1)),
                        _ => {
                            self.at -= 1;
                            self.err(format!("unknown identifier `{name}` (variables are z1..z{})", self.dim))
                        }
                    },
                }
            }
            _ => self.err("expected a number, variable, function or `(`"),
        }
    }
}

impl Expr {
    /// Parses `src` with variables `z1..z{dim}`.
    pub fn parse(src: &str, dim: usize) -> Result<Expr, ChartError> {
        let toks = tokenize(src)?;
        let mut p = Parser {
            toks: &toks,
            at: 0,
            end: src.len(),
            dim,
        };
        let e = p.expr()?;
        if p.at != toks.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    /// Constant value when the expression mentions no variable.
    fn constant(&self) -> Option<Complex64> {
        use Expr::*;
        Some(match self {
            Num(v) => Complex64::new(*v, 0.0),
            I => Complex64::i(),
            Z(_) => return None,
            Neg(a) => -a.constant()?,
            Add(a, b) => a.constant()? + b.constant()?,
            Sub(a, b) => a.constant()? - b.constant()?,
            Mul(a, b) => a.constant()? * b.constant()?,
            Div(a, b) => a.constant()? / b.constant()?,
            Pow(a, b) => {
                let (a, b) = (a.constant()?, b.constant()?);
                match b {
                    b if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() < 64.0 => a.powi(b.re as i32),
                    b if b.im == 0.0 => a.powf(b.re),
                    b => a.powc(b),
                }
            }
            Conj(a) => a.constant()?.conj(),
            Log(a) => a.constant()?.ln(),
            Exp(a) => a.constant()?.exp(),
        })
    }

    /// Complex jet of the expression; `template` fixes base point and order.
    pub fn eval(&self, template: &Jet) -> Result<CJet, ChartError> {
        use Expr::*;
        if let Some(c) = self.constant() {
            return Ok(CJet::constant_like(template, c));
        }
        Ok(match self {
            Z(k) => CJet::coordinate(template, *k)?,
            Neg(a) => -a.eval(template)?,
            Add(a, b) => a.eval(template)? + b.eval(template)?,
            Sub(a, b) => a.eval(template)? - b.eval(template)?,
            Mul(a, b) => a.eval(template)? * b.eval(template)?,
            Div(a, b) => a.eval(template)?.checked_div(&b.eval(template)?)?,
            Pow(a, b) => {
                let base = a.eval(template)?;
                match b.constant() {
                    Some(p) if p.im == 0.0 && p.re.fract() == 0.0 && p.re.abs() < 64.0 => {
                        base.powi(p.re as i32)?
                    }
                    Some(p) if p.im == 0.0 => base.powf(p.re)?,
                    _ => base.pow(&b.eval(template)?)?,
                }
            }
            Conj(a) => a.eval(template)?.conj(),
            Log(a) => a.eval(template)?.ln()?,
            Exp(a) => a.eval(template)?.exp(),
            Num(_) | I => unreachable!("constants handled above"),
        })
    }

    /// Real jet of the expression; fails if the imaginary part does not vanish.
    pub fn eval_real(&self, template: &Jet) -> Result<Jet, ChartError> {
        let c = self.eval(template)?;
        let scale = 1.0 + c.re.max_abs();
        let im = c.im.max_abs();
        if !(im <= 1e-10 * scale) {
            return Err(ChartError::NotReal(im));
        }
        Ok(c.re)
    }
}
