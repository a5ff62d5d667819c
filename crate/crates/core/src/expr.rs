//! Expression micro-grammar for boundary data and radius functions.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | variable | constant | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables `theta`, `θ`, `t` and `a` all bind the single angular argument.
//! Constants are `pi` (`π`) and the imaginary unit `i`, which is needed to
//! write unit-modulus direction fields such as `-exp(i*theta)`. Functions are
//! `cos`, `sin`, `exp`, `log`, `abs` and `sqrt`. Evaluation is complex; real
//! callers use [`Expr::eval_real`].

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Cos,
    Sin,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Cos => real_or(z, f64::cos, Complex64::cos),
            Func::Sin => real_or(z, f64::sin, Complex64::sin),
            Func::Exp => real_or(z, f64::exp, Complex64::exp),
            Func::Log => {
                if z.im == 0.0 && z.re > 0.0 {
                    Complex64::new(z.re.ln(), 0.0)
                } else {
                    z.ln()
                }
            }
            Func::Abs => Complex64::new(z.norm(), 0.0),
            Func::Sqrt => {
                if z.im == 0.0 && z.re >= 0.0 {
                    Complex64::new(z.re.sqrt(), 0.0)
                } else {
                    z.sqrt()
                }
            }
        }
    }
}

// Keeps purely real arguments on the real code path so real data stays bit-exact.
fn real_or(z: Complex64, real: fn(f64) -> f64, complex: fn(Complex64) -> Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(real(z.re), 0.0)
    } else {
        complex(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(Complex64),
    Var,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: f64) -> Complex64 {
        match self {
            Node::Const(c) => *c,
            Node::Var => Complex64::new(x, 0.0),
            Node::Neg(a) => -a.eval(x),
            Node::Call(f, a) => f.apply(a.eval(x)),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => power(a, b),
                }
            }
        }
    }

    fn depends_on_var(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on_var(),
            Node::Bin(_, a, b) => a.depends_on_var() || b.depends_on_var(),
        }
    }
}

fn power(base: Complex64, exp: Complex64) -> Complex64 {
    if base.im == 0.0 && exp.im == 0.0 {
        if exp.re.fract() == 0.0 && exp.re.abs() <= i32::MAX as f64 {
            return Complex64::new(base.re.powi(exp.re as i32), 0.0);
        }
        if base.re >= 0.0 {
            return Complex64::new(base.re.powf(exp.re), 0.0);
        }
    }
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= i32::MAX as f64 {
        return base.powi(exp.re as i32);
    }
    base.powc(exp)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        match c {
            c if c.is_whitespace() => k += 1,
            '+' => {
                out.push((pos, Token::Plus));
                k += 1;
            }
            '-' | '\u{2212}' => {
                out.push((pos, Token::Minus));
                k += 1;
            }
            '*' | '\u{00b7}' => {
                out.push((pos, Token::Star));
                k += 1;
            }
            '/' => {
                out.push((pos, Token::Slash));
                k += 1;
            }
            '^' => {
                out.push((pos, Token::Caret));
                k += 1;
            }
            '(' => {
                out.push((pos, Token::LParen));
                k += 1;
            }
            ')' => {
                out.push((pos, Token::RParen));
                k += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = k;
                while k < chars.len() && (chars[k].1.is_ascii_digit() || chars[k].1 == '.') {
                    k += 1;
                }
                // exponent part, e.g. 1e-3
                if k < chars.len() && (chars[k].1 == 'e' || chars[k].1 == 'E') {
                    let mut m = k + 1;
                    if m < chars.len() && (chars[m].1 == '+' || chars[m].1 == '-') {
                        m += 1;
                    }
                    if m < chars.len() && chars[m].1.is_ascii_digit() {
                        k = m;
                        while k < chars.len() && chars[k].1.is_ascii_digit() {
                            k += 1;
                        }
                    }
                }
                let text: String = chars[start..k].iter().map(|(_, c)| *c).collect();
                let value = text.parse::<f64>().map_err(|_| Error::Expression {
                    offset: pos,
                    message: format!("malformed number '{text}'"),
                })?;
                out.push((pos, Token::Num(value)));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = k;
                while k < chars.len() && (chars[k].1.is_alphanumeric() || chars[k].1 == '_') {
                    k += 1;
                }
                let text: String = chars[start..k].iter().map(|(_, c)| *c).collect();
                out.push((pos, Token::Ident(text)));
            }
            other => {
                return Err(Error::Expression {
                    offset: pos,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Expression {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        match tok {
            Token::Num(v) => {
                self.pos += 1;
                Ok(Node::Const(Complex64::new(v, 0.0)))
            }
            Token::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "theta" | "θ" | "t" | "a" => Ok(Node::Var),
                    "pi" | "π" => Ok(Node::Const(Complex64::new(PI, 0.0))),
                    "i" => Ok(Node::Const(Complex64::i())),
                    _ => {
                        let Some(func) = Func::from_name(&name) else {
                            self.pos -= 1;
                            return self.err(format!("unknown identifier '{name}'"));
                        };
                        if self.peek() != Some(&Token::LParen) {
                            return self.err(format!("expected '(' after '{name}'"));
                        }
                        self.pos += 1;
                        let arg = self.expr()?;
                        self.expect_rparen()?;
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                }
            }
            _ => self.err("expected a number, variable, function or '('"),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Token::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            self.err("expected ')'")
        }
    }
}

/// A parsed expression in one angular variable.
#[derive(Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
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

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            len: source.len(),
        };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return parser.err("trailing input");
        }
        Ok(Expr {
            root,
            source: source.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.root.eval(x)
    }

    /// Evaluates and rejects results with a non-negligible imaginary part.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        let v = self.eval(x);
        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
            return Err(Error::Type(format!(
                "expression '{}' is complex-valued at {x}: {v}",
                self.source
            )));
        }
        Ok(v.re)
    }

    /// True when the expression mentions the angular variable.
    pub fn is_constant(&self) -> bool {
        !self.root.depends_on_var()
    }

    /// Parses an angle given either as a plain number or as a constant expression such as `pi/2`.
    pub fn parse_angle(source: &str) -> Result<f64> {
        let e = Expr::parse(source)?;
        if !e.is_constant() {
            return Err(Error::Config(format!(
                "angle '{source}' must not depend on the variable"
            )));
        }
        e.eval_real(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> Complex64 {
        Expr::parse(s).unwrap().eval(x)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2*3", 0.0).re, 7.0);
        assert_eq!(ev("-2^2", 0.0).re, -4.0);
        assert_eq!(ev("2^3^2", 0.0).re, 512.0);
        assert_eq!(ev("(1+2)*3", 0.0).re, 9.0);
        assert_eq!(ev("8/4/2", 0.0).re, 1.0);
        assert_eq!(ev("2*-3", 0.0).re, -6.0);
    }

    #[test]
    fn variables_and_constants() {
        assert_eq!(ev("theta", 0.25).re, 0.25);
        assert_eq!(ev("θ - π", 1.0).re, 1.0 - PI);
        assert_eq!(ev("a", 2.0).re, 2.0);
        assert_eq!(ev("cos(t)", 0.0).re, 1.0);
        assert_eq!(ev("1e-3", 0.0).re, 1e-3);
        assert_eq!(ev("2.5E2", 0.0).re, 250.0);
    }

    #[test]
    fn complex_direction() {
        let x = 0.7;
        let v = ev("-exp(i*theta)", x);
        assert!((v - (-Complex64::new(0.0, x).exp())).norm() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ellipse_radius() {
        let e = Expr::parse("0.8/sqrt(0.64*cos(a)^2 + sin(a)^2)").unwrap();
        assert!((e.eval_real(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((e.eval_real(PI / 2.0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_offsets() {
        match Expr::parse("cos(theta").unwrap_err() {
            Error::Expression { offset, .. } => assert_eq!(offset, 9),
            e => panic!("unexpected {e}"),
        }
        assert!(Expr::parse("foo(1)").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(Expr::parse("$").is_err());
        assert!(Expr::parse("i*theta").unwrap().eval_real(1.0).is_err());
    }

    #[test]
    fn angles() {
        assert_eq!(Expr::parse_angle("pi").unwrap(), PI);
        assert_eq!(Expr::parse_angle("3*pi/2").unwrap(), 1.5 * PI);
        assert!(Expr::parse_angle("theta").is_err());
    }
}
