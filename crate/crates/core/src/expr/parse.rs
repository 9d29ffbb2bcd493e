//! Recursive-descent parser for scalar expressions over `x1..xn`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' factor)?
//! base   := number | 'x' digits | func '(' expr ')' | '(' expr ')' | '-' factor
//! ```
//!
//! Unary minus takes a whole `factor`, so `-x1^2` reads as `-(x1^2)` and
//! `2^-x1` as `2^(-x1)`.

use super::{Func, Node, ParseError, ParseErrorKind};

pub(super) fn parse_node(text: &str, dim: usize) -> Result<Node, ParseError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim,
    };
    let node = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error(ParseErrorKind::UnexpectedChar(parser.peek_char())));
    }
    Ok(node)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            offset: self.pos,
        }
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

    fn peek_char(&self) -> char {
        std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or('?')
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.error(ParseErrorKind::Expected(byte as char))),
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == b'+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if op == b'*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.factor()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => self.number(),
            Some(b) if b.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.error(ParseErrorKind::UnexpectedChar(self.peek_char()))),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            self.pos = start;
            return Err(self.error(ParseErrorKind::InvalidNumber));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.error(ParseErrorKind::InvalidNumber));
            }
        }
        // The slice is ASCII by construction.
        let literal = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        match literal.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Node::Const(v)),
            _ => {
                self.pos = start;
                Err(self.error(ParseErrorKind::InvalidNumber))
            }
        }
    }

    fn ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();

        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(b'(') {
                return Err(self.error(ParseErrorKind::Expected('(')));
            }
            self.pos += 1;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Node::Call(func, Box::new(arg)));
        }

        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::VariableOutOfRange {
                        index: usize::MAX,
                        dim: self.dim,
                    },
                    offset: start,
                })?;
                if index == 0 || index > self.dim {
                    return Err(ParseError {
                        kind: ParseErrorKind::VariableOutOfRange {
                            index,
                            dim: self.dim,
                        },
                        offset: start,
                    });
                }
                return Ok(Node::Var(index - 1));
            }
        }

        Err(ParseError {
            kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
            offset: start,
        })
    }
}
