//! Arithmetic expressions in one variable `x`, such as `2x`, `sqrt(max(x-0.5,0))`
//! or `1 - x^2`. A comma-separated list gives the components of a density.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Abs,
    Sin,
    Cos,
    Max,
    Min,
}

impl Func {
    fn from_name(s: &str) -> Option<(Self, usize)> {
        Some(match s {
            "sqrt" => (Func::Sqrt, 1),
            "exp" => (Func::Exp, 1),
            "ln" | "log" => (Func::Ln, 1),
            "abs" => (Func::Abs, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "max" => (Func::Max, 2),
            "min" => (Func::Min, 2),
            _ => return None,
        })
    }
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Sqrt => a.sqrt(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Abs => a.abs(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Max => a.max(args[1].eval(x)),
                    Func::Min => a.min(args[1].eval(x)),
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: 1,
            column: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn skip(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn list(&mut self) -> Result<Vec<Expr>> {
        let mut out = vec![self.sum()?];
        while self.eat(b',') {
            out.push(self.sum()?);
        }
        Ok(out)
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => Op::Add,
                Some(b'-') => Op::Sub,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = Expr::Bin(op, Box::new(e), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    Op::Mul
                }
                Some(b'/') => {
                    self.pos += 1;
                    Op::Div
                }
                Some(c) if c == b'(' || c == b'.' || c.is_ascii_alphanumeric() => Op::Mul,
                _ => return Ok(e),
            };
            e = Expr::Bin(op, Box::new(e), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.word(),
            Some(c) => Err(self.err(format!("unexpected `{}`", c as char))),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit() || *c == b'.') {
            self.pos += 1;
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E'))
            && self.src.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
        {
            self.pos += 2;
            while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().map(Expr::Num).map_err(|_| Error::Parse {
            line: 1,
            column: start + 1,
            msg: format!("bad number `{text}`"),
        })
    }

    fn word(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_alphabetic) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if name == "x" {
            return Ok(Expr::Var);
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        let Some((func, arity)) = Func::from_name(name) else {
            self.pos = start;
            return Err(self.err(format!("unknown name `{name}`")));
        };
        if !self.eat(b'(') {
            return Err(self.err(format!("expected `(` after {name}")));
        }
        let args = self.list()?;
        if !self.eat(b')') {
            return Err(self.err("expected `)`"));
        }
        if args.len() != arity {
            return Err(self.err(format!("{name} takes {arity} argument(s), got {}", args.len())));
        }
        Ok(Expr::Call(func, args))
    }
}

/// Parse a comma-separated list of expressions.
pub fn parse_list(src: &str) -> Result<Vec<Expr>> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let out = p.list()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut list = parse_list(src)?;
    if list.len() != 1 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            msg: format!("expected one expression, got {}", list.len()),
        });
    }
    Ok(list.remove(0))
}
