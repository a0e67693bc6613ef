//! Closed-form expressions over complex numbers.
//!
//! Grammar: `+ - * / ^`, parentheses, numeric literals with an optional `i`
//! suffix (`2.5i`), the constants `i` and `pi`, named variables, and the
//! functions `conj re im abs exp sqrt sin cos`. `ζ` is read as `zeta`.
//! `^` is right associative and binds tighter than unary minus; integer
//! exponents use repeated multiplication.

use std::fmt;

use num_complex::Complex64 as C;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Character offset of the offending token.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at column {}", self.message, self.column + 1)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Conj,
    Re,
    Im,
    Abs,
    Exp,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "conj" => Func::Conj,
            "re" => Func::Re,
            "im" => Func::Im,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn apply(self, z: C) -> C {
        match self {
            Func::Conj => z.conj(),
            Func::Re => C::new(z.re, 0.0),
            Func::Im => C::new(z.im, 0.0),
            Func::Abs => C::new(z.norm(), 0.0),
            Func::Exp => z.exp(),
            Func::Sqrt => z.sqrt(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(C),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    PowInt(Box<Node>, i32),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, vars: &[C]) -> C {
        match self {
            Node::Const(c) => *c,
            Node::Var(k) => vars[*k],
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::PowInt(a, n) => a.eval(vars).powi(*n),
            Node::Pow(a, b) => {
                let e = b.eval(vars);
                if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= i32::MAX as f64 {
                    a.eval(vars).powi(e.re as i32)
                } else {
                    a.eval(vars).powc(e)
                }
            }
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    fn uses(&self, k: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(j) => *j == k,
            Node::Neg(a) | Node::PowInt(a, _) | Node::Call(_, a) => a.uses(k),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses(k) || b.uses(k)
            }
        }
    }
}

/// A parsed expression bound to an ordered list of variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    /// Parses `source`; identifiers must be `vars` entries, constants or functions.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ParseError> {
        let tokens = lex(source)?;
        let mut p = Parser { tokens, pos: 0, vars, len: source.chars().count() };
        let root = p.expr()?;
        if let Some(t) = p.tokens.get(p.pos) {
            return Err(ParseError { column: t.column, message: format!("unexpected {}", t.kind.describe()) });
        }
        Ok(Self { source: source.to_string(), root })
    }

    /// Evaluates with `vars[k]` bound to the `k`-th declared variable.
    pub fn eval(&self, vars: &[C]) -> C {
        self.root.eval(vars)
    }

    /// Whether the expression mentions the `k`-th declared variable.
    pub fn uses(&self, k: usize) -> bool {
        self.root.uses(k)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(x) => format!("number {x}"),
            TokKind::Imag(x) => format!("number {x}i"),
            TokKind::Ident(s) => format!("name '{s}'"),
            TokKind::Op(c) => format!("'{c}'"),
            TokKind::LParen => "'('".into(),
            TokKind::RParen => "')'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let start = k;
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit())) {
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = chars[start..k].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| ParseError { column: start, message: format!("malformed number '{text}'") })?;
            let imaginary = k < chars.len() && chars[k] == 'i' && !chars.get(k + 1).is_some_and(|d| is_ident(*d));
            if imaginary {
                k += 1;
                out.push(Token { kind: TokKind::Imag(value), column: start });
            } else {
                out.push(Token { kind: TokKind::Num(value), column: start });
            }
            continue;
        }
        if c == 'ζ' {
            out.push(Token { kind: TokKind::Ident("zeta".into()), column: start });
            k += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while k < chars.len() && is_ident(chars[k]) {
                k += 1;
            }
            out.push(Token { kind: TokKind::Ident(chars[start..k].iter().collect()), column: start });
            continue;
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '^' => TokKind::Op(c),
            '(' => TokKind::LParen,
            ')' => TokKind::RParen,
            _ => return Err(ParseError { column: start, message: format!("unexpected character '{c}'") }),
        };
        out.push(Token { kind, column: start });
        k += 1;
    }
    Ok(out)
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
    len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&TokKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.column)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.column(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(TokKind::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Node::Add(lhs.into(), rhs.into()) } else { Node::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(TokKind::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Node::Mul(lhs.into(), rhs.into()) } else { Node::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(TokKind::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(self.unary()?.into()))
            }
            Some(TokKind::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if let Some(TokKind::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(match integer_value(&exponent) {
                Some(n) => Node::PowInt(base.into(), n),
                None => Node::Pow(base.into(), exponent.into()),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(tok) = self.tokens.get(self.pos).cloned() else {
            return self.fail("unexpected end of expression");
        };
        self.pos += 1;
        match tok.kind {
            TokKind::Num(x) => Ok(Node::Const(C::new(x, 0.0))),
            TokKind::Imag(x) => Ok(Node::Const(C::new(0.0, x))),
            TokKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokKind::Ident(name) => {
                if let Some(f) = Func::lookup(&name) {
                    if self.peek() != Some(&TokKind::LParen) {
                        return self.fail(format!("function '{name}' needs parentheses"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Node::Call(f, arg.into()));
                }
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                match name.as_str() {
                    "i" => Ok(Node::Const(C::new(0.0, 1.0))),
                    "pi" => Ok(Node::Const(C::new(std::f64::consts::PI, 0.0))),
                    _ => Err(ParseError {
                        column: tok.column,
                        message: format!("unknown name '{name}' (variables: {})", self.vars.join(", ")),
                    }),
                }
            }
            other => Err(ParseError { column: tok.column, message: format!("unexpected {}", other.describe()) }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek() == Some(&TokKind::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail("expected ')'")
        }
    }
}

fn integer_value(node: &Node) -> Option<i32> {
    let v = match node {
        Node::Const(c) => *c,
        Node::Neg(a) => match a.as_ref() {
            Node::Const(c) => -*c,
            _ => return None,
        },
        _ => return None,
    };
    (v.im == 0.0 && v.re.fract() == 0.0 && v.re.abs() <= 64.0).then_some(v.re as i32)
}

/// Parses a constant complex expression such as `0.5-1.2i`.
pub fn parse_complex(source: &str) -> Result<C, ParseError> {
    Ok(Expr::parse(source, &[])?.eval(&[]))
}
