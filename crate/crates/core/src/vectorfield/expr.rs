//! Tiny closed-form expression language for scalar fields on the torus:
//! decimal or 2^k constants, the coordinates x1/x2, `+` and `*`, min, max,
//! clamp, and periodic distance to a point.

use crate::error::{CoreError, Result};
use crate::field::wrapped_diff;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X1,
    X2,
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Clamp(Box<Expr>, Box<Expr>, Box<Expr>),
    /// Periodic (nearest-image) distance from (x1, x2) to a fixed point.
    Dist(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X1 => x1,
            Expr::X2 => x2,
            Expr::Add(a, b) => a.eval(x1, x2) + b.eval(x1, x2),
            Expr::Mul(a, b) => a.eval(x1, x2) * b.eval(x1, x2),
            Expr::Min(a, b) => a.eval(x1, x2).min(b.eval(x1, x2)),
            Expr::Max(a, b) => a.eval(x1, x2).max(b.eval(x1, x2)),
            Expr::Clamp(e, lo, hi) => {
                let v = e.eval(x1, x2);
                v.max(lo.eval(x1, x2)).min(hi.eval(x1, x2))
            }
            Expr::Dist(cx, cy) => {
                let d1 = wrapped_diff(x1, cx.eval(x1, x2));
                let d2 = wrapped_diff(x2, cy.eval(x1, x2));
                (d1 * d1 + d2 * d2).sqrt()
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> CoreError {
        CoreError::Expr(format!("{msg} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'2') && self.src.get(self.pos + 1) == Some(&b'^') {
            self.pos += 2;
            let mut sign = 1i32;
            if self.src.get(self.pos) == Some(&b'-') {
                sign = -1;
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let exp: i32 = std::str::from_utf8(&self.src[digits_start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("bad power-of-two exponent"))?;
            return Ok(Expr::Const(2f64.powi(sign * exp)));
        }
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || self.src[self.pos] == b'e'
                || (self.src[self.pos] == b'-'
                    && self.pos > start
                    && self.src[self.pos - 1] == b'e'))
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| self.err("bad number"))
    }

    fn args(&mut self, n: usize) -> Result<Vec<Expr>> {
        self.eat(b'(')?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                self.eat(b',')?;
            }
            out.push(self.expr()?);
        }
        self.eat(b')')?;
        Ok(out)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                match name.as_str() {
                    "x1" => Ok(Expr::X1),
                    "x2" => Ok(Expr::X2),
                    "min" => {
                        let mut a = self.args(2)?;
                        let b = a.pop().unwrap();
                        Ok(Expr::Min(Box::new(a.pop().unwrap()), Box::new(b)))
                    }
                    "max" => {
                        let mut a = self.args(2)?;
                        let b = a.pop().unwrap();
                        Ok(Expr::Max(Box::new(a.pop().unwrap()), Box::new(b)))
                    }
                    "clamp" => {
                        let mut a = self.args(3)?;
                        let hi = a.pop().unwrap();
                        let lo = a.pop().unwrap();
                        Ok(Expr::Clamp(Box::new(a.pop().unwrap()), Box::new(lo), Box::new(hi)))
                    }
                    "dist" => {
                        let mut a = self.args(2)?;
                        let cy = a.pop().unwrap();
                        Ok(Expr::Dist(Box::new(a.pop().unwrap()), Box::new(cy)))
                    }
                    other => Err(self.err(&format!("unknown identifier `{other}`"))),
                }
            }
            _ => Err(self.err("expected a factor")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}
