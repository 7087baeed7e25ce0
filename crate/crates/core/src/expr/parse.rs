//! Recursive descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INTEGER)?
//! primary := NUMBER | 'x' INTEGER | 'y' INTEGER | 'abs' '(' expr ')' | '(' expr ')'
//! ```

use super::{Axis, Expr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64, String),
    Var(Axis, usize),
    Abs,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn syntax(pos: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Token::Plus)),
            '-' => out.push((start, Token::Minus)),
            '*' => out.push((start, Token::Star)),
            '^' => out.push((start, Token::Caret)),
            '(' => out.push((start, Token::LParen)),
            ')' => out.push((start, Token::RParen)),
            '0'..='9' | '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let v: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number '{lit}'")))?;
                if !v.is_finite() {
                    return Err(syntax(start, format!("number '{lit}' is not finite")));
                }
                out.push((start, Token::Num(v, lit)));
                continue;
            }
            'x' | 'y' => {
                let axis = if c == 'x' { Axis::X } else { Axis::Y };
                i += 1;
                let digits_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if digits_start == i {
                    return Err(syntax(start, format!("expected index after '{c}'")));
                }
                let idx: usize = chars[digits_start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| syntax(start, "variable index too large"))?;
                if idx == 0 {
                    return Err(syntax(start, "variable indices start at 1"));
                }
                out.push((start, Token::Var(axis, idx - 1)));
                continue;
            }
            'a' => {
                let word: String = chars[i..].iter().take(3).collect();
                if word != "abs" {
                    return Err(syntax(start, "unknown identifier"));
                }
                out.push((start, Token::Abs));
                i += 3;
                continue;
            }
            other => return Err(syntax(start, format!("unexpected character '{other}'"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        let at = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(syntax(at, format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    lhs = lhs.add(self.term()?);
                }
                Some(Token::Minus) => {
                    self.bump();
                    lhs = lhs.sub(self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Star) = self.peek() {
            self.bump();
            lhs = lhs.mul(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.bump();
            let at = self.offset();
            let k = match self.bump() {
                Some(Token::Num(_, lit)) if lit.chars().all(|c| c.is_ascii_digit()) => lit
                    .parse::<u32>()
                    .map_err(|_| syntax(at, "exponent too large"))?,
                _ => return Err(syntax(at, "exponent must be a positive integer literal")),
            };
            if k == 0 {
                return Err(syntax(at, "exponent must be at least 1"));
            }
            if let Some(Token::Caret) = self.peek() {
                return Err(syntax(self.offset(), "chained powers need parentheses"));
            }
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Some(Token::Num(v, _)) => Ok(Expr::Const(v)),
            Some(Token::Var(axis, i)) => Ok(Expr::Var(axis, i)),
            Some(Token::Abs) => {
                self.expect(Token::LParen, "'(' after abs")?;
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner.abs())
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Some(_) => Err(syntax(at, "expected a number, variable, abs(...) or '('")),
            None => Err(syntax(at, "unexpected end of input")),
        }
    }
}

/// Parses `text` into an expression over `x1..xn`, `y1..ym`.
pub fn parse_expression(text: &str, n: usize, m: usize) -> Result<Expr> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
    };
    let e = p.expr()?;
    if p.pos < p.tokens.len() {
        return Err(syntax(p.offset(), "unexpected trailing input"));
    }
    // Report the first offending variable rather than the largest index.
    check_vars(&e, n, m)?;
    Ok(e)
}

fn check_vars(e: &Expr, n: usize, m: usize) -> Result<()> {
    match e {
        Expr::Const(_) => Ok(()),
        Expr::Var(axis, i) => {
            let dim = if *axis == Axis::X { n } else { m };
            if *i >= dim {
                Err(Error::Dimension {
                    axis: *axis,
                    index: i + 1,
                    dim,
                })
            } else {
                Ok(())
            }
        }
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Abs(a) => check_vars(a, n, m),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            check_vars(a, n, m)?;
            check_vars(b, n, m)
        }
    }
}
