//! A small expression language over the plane with forward-mode derivatives.
//!
//! Variables: `x`, `y`, `r`, `theta`, `z`; constants `i`, `pi`, `e`.
//! Functions: `sin`, `cos`, `exp`, `log`, `sqrt`, `abs`, `re`, `im`, `conj`.
//! Operators: `+ - * / ^` with the usual precedence, `^` right-associative.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Var {
    X,
    Y,
    R,
    Theta,
    Z,
    I,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Re,
    Im,
    Conj,
}

/// Value with its partial derivatives in `x` and `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: C64,
    pub dx: C64,
    pub dy: C64,
}

impl Dual {
    pub fn constant(v: C64) -> Self {
        Self {
            v,
            dx: C64::new(0.0, 0.0),
            dy: C64::new(0.0, 0.0),
        }
    }

    /// `∂̄ = (∂_x + i∂_y)/2`.
    pub fn d_bar(&self) -> C64 {
        0.5 * (self.dx + C64::i() * self.dy)
    }

    /// `∂ = (∂_x − i∂_y)/2`.
    pub fn d(&self) -> C64 {
        0.5 * (self.dx - C64::i() * self.dy)
    }

    fn chain(self, v: C64, dv: C64) -> Self {
        Self {
            v,
            dx: dv * self.dx,
            dy: dv * self.dy,
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual {
            v: q,
            dx: (self.dx - q * o.dx) / o.v,
            dy: (self.dy - q * o.dy) / o.v,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

/// A parsed expression; keeps its source text for serialization.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected token {:?} in {src:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(Self {
            source: src.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.eval_dual(z).v
    }

    pub fn eval_dual(&self, z: C64) -> Dual {
        eval(&self.root, z)
    }

    /// Value on the unit circle at angle `theta`.
    pub fn eval_boundary(&self, theta: f64) -> C64 {
        eval_at(&self.root, C64::from_polar(1.0, theta), Some(theta)).v
    }
}

fn eval(node: &Node, z: C64) -> Dual {
    eval_at(node, z, None)
}

fn eval_at(node: &Node, z: C64, theta: Option<f64>) -> Dual {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match node {
        Node::Num(v) => Dual::constant(C64::new(*v, 0.0)),
        Node::Var(var) => match var {
            Var::X => Dual {
                v: C64::new(z.re, 0.0),
                dx: one,
                dy: zero,
            },
            Var::Y => Dual {
                v: C64::new(z.im, 0.0),
                dx: zero,
                dy: one,
            },
            Var::Z => Dual {
                v: z,
                dx: one,
                dy: C64::i(),
            },
            Var::I => Dual::constant(C64::i()),
            Var::R => {
                let r = z.norm();
                let (dx, dy) = if r > 0.0 { (z.re / r, z.im / r) } else { (0.0, 0.0) };
                Dual {
                    v: C64::new(r, 0.0),
                    dx: C64::new(dx, 0.0),
                    dy: C64::new(dy, 0.0),
                }
            }
            Var::Theta => {
                let r2 = z.norm_sqr();
                let t = theta.unwrap_or_else(|| z.arg());
                let (dx, dy) = if r2 > 0.0 { (-z.im / r2, z.re / r2) } else { (0.0, 0.0) };
                Dual {
                    v: C64::new(t, 0.0),
                    dx: C64::new(dx, 0.0),
                    dy: C64::new(dy, 0.0),
                }
            }
        },
        Node::Neg(a) => -eval_at(a, z, theta),
        Node::Bin(op, a, b) => {
            let a = eval_at(a, z, theta);
            let b = eval_at(b, z, theta);
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => pow(a, b),
            }
        }
        Node::Call(f, a) => {
            let a = eval_at(a, z, theta);
            match f {
                Func::Sin => a.chain(a.v.sin(), a.v.cos()),
                Func::Cos => a.chain(a.v.cos(), -a.v.sin()),
                Func::Exp => {
                    let e = a.v.exp();
                    a.chain(e, e)
                }
                Func::Log => a.chain(a.v.ln(), one / a.v),
                Func::Sqrt => {
                    let s = a.v.sqrt();
                    a.chain(s, 0.5 / s)
                }
                Func::Abs => {
                    let m = a.v.norm();
                    let g = |d: C64| {
                        if m > 0.0 {
                            C64::new((a.v.conj() * d).re / m, 0.0)
                        } else {
                            zero
                        }
                    };
                    Dual {
                        v: C64::new(m, 0.0),
                        dx: g(a.dx),
                        dy: g(a.dy),
                    }
                }
                Func::Re => Dual {
                    v: C64::new(a.v.re, 0.0),
                    dx: C64::new(a.dx.re, 0.0),
                    dy: C64::new(a.dy.re, 0.0),
                },
                Func::Im => Dual {
                    v: C64::new(a.v.im, 0.0),
                    dx: C64::new(a.dx.im, 0.0),
                    dy: C64::new(a.dy.im, 0.0),
                },
                Func::Conj => Dual {
                    v: a.v.conj(),
                    dx: a.dx.conj(),
                    dy: a.dy.conj(),
                },
            }
        }
    }
}

fn pow(a: Dual, b: Dual) -> Dual {
    let constant_exponent = b.dx == C64::new(0.0, 0.0) && b.dy == C64::new(0.0, 0.0);
    if constant_exponent && b.v.im == 0.0 && b.v.re.fract() == 0.0 && b.v.re.abs() < 64.0 {
        let n = b.v.re as i32;
        let v = a.v.powi(n);
        let dv = if n == 0 {
            C64::new(0.0, 0.0)
        } else {
            a.v.powi(n - 1) * n as f64
        };
        return a.chain(v, dv);
    }
    if constant_exponent {
        let v = a.v.powc(b.v);
        return a.chain(v, b.v * v / a.v);
    }
    let l = Dual {
        v: a.v.ln(),
        dx: a.dx / a.v,
        dy: a.dy / a.v,
    };
    let e = b * l;
    let v = e.v.exp();
    e.chain(v, v)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number {text:?}")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_sym(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Sym(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expression(format!("expected {c:?}")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { Op::Add } else { Op::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { Op::Mul } else { Op::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_sym() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_sym() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Sym(c) => Err(Error::Expression(format!("unexpected {c:?}"))),
            Token::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "log" | "ln" => Some(Func::Log),
                    "sqrt" => Some(Func::Sqrt),
                    "abs" => Some(Func::Abs),
                    "re" => Some(Func::Re),
                    "im" => Some(Func::Im),
                    "conj" => Some(Func::Conj),
                    _ => None,
                };
                if let Some(f) = func {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Node::Var(Var::X)),
                    "y" => Ok(Node::Var(Var::Y)),
                    "r" => Ok(Node::Var(Var::R)),
                    "theta" => Ok(Node::Var(Var::Theta)),
                    "z" => Ok(Node::Var(Var::Z)),
                    "i" => Ok(Node::Var(Var::I)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    other => Err(Error::Expression(format!("unknown identifier {other:?}"))),
                }
            }
        }
    }
}
