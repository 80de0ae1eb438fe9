//! Recursive-descent parser for the textual formula syntax.
//!
//! ```text
//! formula   := disj
//! disj      := conj ("or" conj)*
//! conj      := unary ("and" unary)*
//! unary     := "not" unary | ("alw_" | "ev_") "[" num "," num "]" unary | atom
//! atom      := "(" formula ")" | expr cmp expr
//! cmp       := "<" | "<=" | ">" | ">=" | "=="
//! expr      := term (("+" | "-") term)*
//! term      := factor (("*" | "/") factor)*
//! factor    := num | "-" num | "-" factor | ident | "abs" "(" expr ")" | "(" expr ")"
//! ```
//!
//! Interval bounds are in seconds.

use thiserror::Error;

use super::formula::{BinOp, CmpOp, Expr, Formula, Interval, Predicate};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {pos}: {message}")]
pub struct SyntaxError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Not,
    And,
    Or,
    Alw,
    Ev,
    Abs,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Arith(BinOp),
    Cmp(CmpOp),
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of input".into(),
        Some(t) => format!("{t:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '+' => Tok::Arith(BinOp::Add),
            '-' => Tok::Arith(BinOp::Sub),
            '*' => Tok::Arith(BinOp::Mul),
            '/' => Tok::Arith(BinOp::Div),
            '<' | '>' | '=' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, eq) {
                    ('<', true) => CmpOp::Le,
                    ('<', false) => CmpOp::Lt,
                    ('>', true) => CmpOp::Ge,
                    ('>', false) => CmpOp::Gt,
                    ('=', true) => CmpOp::Eq,
                    _ => {
                        return Err(SyntaxError {
                            pos: i,
                            message: "expected `==`".into(),
                        })
                    }
                };
                if eq {
                    i += 1;
                }
                Tok::Cmp(op)
            }
            c if c.is_ascii_digit() || c == '.' => {
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
                let s = &text[start..i];
                let v = s.parse::<f64>().map_err(|_| SyntaxError {
                    pos: start,
                    message: format!("malformed number `{s}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "not" => Tok::Not,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "alw_" => Tok::Alw,
                    "ev_" => Tok::Ev,
                    "abs" => Tok::Abs,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((tok, start));
                continue;
            }
            other => {
                return Err(SyntaxError {
                    pos: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(SyntaxError {
            pos: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            let found = describe(self.peek());
            self.err(format!("expected {t:?}, found {found}"))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.conj()?;
        while self.eat(&Tok::Or) {
            lhs = Formula::or(lhs, self.conj()?);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Alw) | Some(Tok::Ev) => {
                let always = self.peek() == Some(&Tok::Alw);
                self.pos += 1;
                let window = self.interval()?;
                let body = Box::new(self.unary()?);
                Ok(if always {
                    Formula::Always(window, body)
                } else {
                    Formula::Eventually(window, body)
                })
            }
            _ => self.atom(),
        }
    }

    fn interval(&mut self) -> PResult<Interval> {
        self.expect(Tok::LBracket)?;
        let lo = self.bound()?;
        self.expect(Tok::Comma)?;
        let hi = self.bound()?;
        self.expect(Tok::RBracket)?;
        if lo > hi {
            return self.err(format!("empty interval [{lo},{hi}]"));
        }
        Ok(Interval::new(lo, hi))
    }

    fn bound(&mut self) -> PResult<f64> {
        match self.peek() {
            Some(Tok::Num(v)) if v.is_finite() => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Arith(BinOp::Sub)) => self.err("interval bounds must be non-negative"),
            other => {
                let found = describe(other);
                self.err(format!("expected interval bound, found {found}"))
            }
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        if self.peek() == Some(&Tok::LParen) {
            let save = self.pos;
            self.pos += 1;
            let grouped = self.formula().and_then(|f| self.expect(Tok::RParen).map(|_| f));
            match grouped {
                Ok(f) => return Ok(f),
                Err(first) => {
                    self.pos = save;
                    return self
                        .predicate()
                        .map_err(|second| if first.pos > second.pos { first } else { second });
                }
            }
        }
        self.predicate()
    }

    fn predicate(&mut self) -> PResult<Formula> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Cmp(op)) => *op,
            other => {
                let found = describe(other);
                return self.err(format!("expected comparison, found {found}"));
            }
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Formula::Pred(Predicate::new(lhs, op, rhs)))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Arith(op @ (BinOp::Add | BinOp::Sub))) => {
                    let op = *op;
                    self.pos += 1;
                    lhs = Expr::binary(op, lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Arith(op @ (BinOp::Mul | BinOp::Div))) => {
                    let op = *op;
                    self.pos += 1;
                    lhs = Expr::binary(op, lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Arith(BinOp::Sub)) => {
                self.pos += 1;
                if let Some(Tok::Num(v)) = self.peek().cloned() {
                    self.pos += 1;
                    Ok(Expr::Const(-v))
                } else {
                    Ok(Expr::Neg(Box::new(self.factor()?)))
                }
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Signal(name))
            }
            Some(Tok::Abs) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Abs(Box::new(e)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => self.err(format!("expected expression, found {}", describe(other.as_ref()))),
        }
    }
}

/// Parses a formula from its textual form.
pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        let found = describe(p.peek());
        return p.err(format!("unexpected trailing {found}"));
    }
    Ok(f)
}
