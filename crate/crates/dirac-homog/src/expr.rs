//! Minimal arithmetic expression grammar over (y1, y2) for closed-form
//! potentials: numbers, `y1`, `y2`, `pi`, `+ - * /`, `sin`, `cos`, parentheses
//! and unary minus. Recursive descent, compiled to a small AST.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("unexpected character '{0}' at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected token {0:?} at byte {1}")]
    UnexpectedToken(String, usize),
    #[error("unknown identifier '{0}' (expected y1, y2, pi, sin, cos)")]
    UnknownIdent(String),
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Y1,
    Y2,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let tokens = lex(src)?;
        if tokens.is_empty() {
            return Err(ExprError::Empty);
        }
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            let (t, at) = p.tokens[p.pos].clone();
            return Err(ExprError::UnexpectedToken(format!("{t:?}"), at));
        }
        Ok(e)
    }

    pub fn eval(&self, y1: f64, y2: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Y1 => y1,
            Expr::Y2 => y2,
            Expr::Add(a, b) => a.eval(y1, y2) + b.eval(y1, y2),
            Expr::Sub(a, b) => a.eval(y1, y2) - b.eval(y1, y2),
            Expr::Mul(a, b) => a.eval(y1, y2) * b.eval(y1, y2),
            Expr::Div(a, b) => a.eval(y1, y2) / b.eval(y1, y2),
            Expr::Neg(a) => -a.eval(y1, y2),
            Expr::Sin(a) => a.eval(y1, y2).sin(),
            Expr::Cos(a) => a.eval(y1, y2).cos(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Y1 => write!(f, "y1"),
            Expr::Y2 => write!(f, "y2"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.' | 'e' | 'E') {
                    // Accept exponent signs directly after e/E.
                    if matches!(bytes[i] as char, 'e' | 'E')
                        && i + 1 < bytes.len()
                        && matches!(bytes[i + 1] as char, '+' | '-')
                    {
                        i += 1;
                    }
                    i += 1;
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| ExprError::UnexpectedToken(text.to_string(), start))?;
                out.push((Tok::Num(v), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            other => return Err(ExprError::UnexpectedChar(other, i)),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                Tok::Plus => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.peek() {
            match op {
                Tok::Star => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        match self.next() {
            Some((Tok::Minus, _)) => Ok(Expr::Neg(Box::new(self.factor()?))),
            Some((Tok::Plus, _)) => self.factor(),
            Some((Tok::Num(v), _)) => Ok(Expr::Num(v)),
            Some((Tok::Ident(name), _)) => match name.as_str() {
                "y1" => Ok(Expr::Y1),
                "y2" => Ok(Expr::Y2),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "sin" | "cos" => {
                    match self.next() {
                        Some((Tok::LParen, _)) => {}
                        _ => return Err(ExprError::Unbalanced),
                    }
                    let inner = self.expr()?;
                    match self.next() {
                        Some((Tok::RParen, _)) => {}
                        _ => return Err(ExprError::Unbalanced),
                    }
                    if name == "sin" {
                        Ok(Expr::Sin(Box::new(inner)))
                    } else {
                        Ok(Expr::Cos(Box::new(inner)))
                    }
                }
                other => Err(ExprError::UnknownIdent(other.to_string())),
            },
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.next() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(ExprError::Unbalanced),
                }
            }
            Some((t, at)) => Err(ExprError::UnexpectedToken(format!("{t:?}"), at)),
            None => Err(ExprError::Empty),
        }
    }
}
