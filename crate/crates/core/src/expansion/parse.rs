//! Recursive-descent parser and precedence-aware printer for estimator
//! expressions.

use std::fmt;

use crate::error::{Error, Result};
use crate::statdsl::StatAtom;

use super::EstimatorExpr;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Number(f64),
    Atom(StatAtom),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let tok = match self.src[self.pos] {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'S' => self.lex_atom()?,
            c if c.is_ascii_digit() || c == b'.' => self.lex_number()?,
            c => {
                return Err(self.err(start, format!("unexpected character '{}'", c as char)));
            }
        };
        Ok(Some((tok, start)))
    }

    fn lex_atom(&mut self) -> Result<Tok> {
        let start = self.pos;
        self.pos += 1; // 'S'
        self.skip_ws();
        if self.pos >= self.src.len() || self.src[self.pos] != b'[' {
            return Err(self.err(self.pos, "expected '[' after 'S'"));
        }
        self.pos += 1;
        let m = self.lex_index()?;
        self.expect_comma()?;
        let k = self.lex_index()?;
        self.expect_comma()?;
        let i = self.lex_index()?;
        self.skip_ws();
        if self.pos >= self.src.len() || self.src[self.pos] != b']' {
            return Err(self.err(self.pos, "expected ']' closing the atom"));
        }
        self.pos += 1;
        let atom = StatAtom::new(m, k, i).map_err(|e| self.err(start, e.to_string()))?;
        Ok(Tok::Atom(atom))
    }

    fn expect_comma(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos >= self.src.len() || self.src[self.pos] != b',' {
            return Err(self.err(self.pos, "expected ',' between atom indices"));
        }
        self.pos += 1;
        Ok(())
    }

    fn lex_index(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(start, "expected a non-negative integer index"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("digits are utf8")
            .parse()
            .map_err(|_| self.err(start, "atom index out of range"))
    }

    fn lex_number(&mut self) -> Result<Tok> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                // not an exponent after all (e.g. "2e" with nothing usable)
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("digits are utf8");
        text.parse()
            .map(Tok::Number)
            .map_err(|_| self.err(start, format!("invalid numeric literal '{text}'")))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    cursor: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.cursor)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.cursor).copied();
        self.cursor += 1;
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        let pos = self
            .toks
            .get(self.cursor)
            .map(|(_, p)| *p)
            .unwrap_or(self.len);
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<EstimatorExpr> {
        let mut lhs = self.term()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<EstimatorExpr> {
        let mut lhs = self.unary()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Star => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs / self.unary()?;
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<EstimatorExpr> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner {
                EstimatorExpr::Constant(c) => EstimatorExpr::Constant(-c),
                other => EstimatorExpr::Constant(0.0) - other,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<EstimatorExpr> {
        let base = self.primary()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.bump();
            let exp = match self.bump() {
                Some((Tok::Number(v), pos)) => {
                    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                        return Err(Error::Parse {
                            pos,
                            msg: format!("exponent must be a non-negative integer, got {v}"),
                        });
                    }
                    v as u32
                }
                _ => return Err(self.err_here("expected a non-negative integer exponent")),
            };
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<EstimatorExpr> {
        match self.bump() {
            Some((Tok::Number(v), _)) => Ok(EstimatorExpr::Constant(v)),
            Some((Tok::Atom(a), _)) => Ok(EstimatorExpr::Leaf(a)),
            Some((Tok::LParen, pos)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(Error::Parse {
                        pos,
                        msg: "unclosed parenthesis".into(),
                    }),
                }
            }
            Some((tok, pos)) => Err(Error::Parse {
                pos,
                msg: format!("unexpected token {tok:?}"),
            }),
            None => Err(Error::Parse {
                pos: self.len,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<EstimatorExpr> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser {
        toks,
        cursor: 0,
        len: text.len(),
    };
    let expr = parser.expr()?;
    if let Some((tok, pos)) = parser.peek() {
        return Err(Error::Parse {
            pos: *pos,
            msg: format!("trailing input starting with {tok:?}"),
        });
    }
    Ok(expr)
}

fn precedence(e: &EstimatorExpr) -> u8 {
    match e {
        EstimatorExpr::Add(..) | EstimatorExpr::Sub(..) => 1,
        EstimatorExpr::Mul(..) | EstimatorExpr::Div(..) => 2,
        EstimatorExpr::Pow(..) => 3,
        EstimatorExpr::Constant(_) | EstimatorExpr::Leaf(_) => 4,
    }
}

fn fmt_prec(e: &EstimatorExpr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = precedence(e);
    let parens = prec < min || matches!(e, EstimatorExpr::Constant(c) if *c < 0.0) && min > 1;
    if parens {
        write!(f, "(")?;
    }
    match e {
        EstimatorExpr::Constant(c) => write!(f, "{c}")?,
        EstimatorExpr::Leaf(a) => write!(f, "{a}")?,
        EstimatorExpr::Add(l, r) => {
            fmt_prec(l, 1, f)?;
            write!(f, " + ")?;
            fmt_prec(r, 2, f)?;
        }
        EstimatorExpr::Sub(l, r) => {
            fmt_prec(l, 1, f)?;
            write!(f, " - ")?;
            fmt_prec(r, 2, f)?;
        }
        EstimatorExpr::Mul(l, r) => {
            fmt_prec(l, 2, f)?;
            write!(f, " * ")?;
            fmt_prec(r, 3, f)?;
        }
        EstimatorExpr::Div(l, r) => {
            fmt_prec(l, 2, f)?;
            write!(f, " / ")?;
            fmt_prec(r, 3, f)?;
        }
        EstimatorExpr::Pow(b, k) => {
            fmt_prec(b, 4, f)?;
            write!(f, "^{k}")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for EstimatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}
