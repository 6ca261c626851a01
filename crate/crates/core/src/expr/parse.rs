//! Recursive-descent parser for
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?
//! base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base
//! ```
//!
//! A leading `-` applies to a `base`, so `-x^2` reads as `(-x)^2`.
//! Error offsets are 1-based byte positions; an error at end of input reports
//! `len + 1`.

use super::ast::{BinaryOp, Expr, UnaryOp};
use super::space::VarSpace;
use super::ExprError;

/// Deepest expression tree accepted, counting nesting as well as the length
/// of operator chains (each `+`, `*`, `^`, unary minus adds a level).
pub const MAX_NESTING: usize = 256;

pub fn parse(text: &str, space: &VarSpace) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        depth: 0,
        space,
    };
    let (expr, _) = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax(format!(
            "unexpected character `{}`",
            parser.peek_char_display()
        )));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
    space: &'a VarSpace,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset: self.pos + 1,
            message: message.into(),
        }
    }

    fn peek_char_display(&self) -> String {
        std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .map(String::from)
            .unwrap_or_else(|| format!("\\x{:02x}", self.src[self.pos]))
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

    fn check_depth(&self, depth: usize) -> Result<usize, ExprError> {
        if depth > MAX_NESTING || self.depth > MAX_NESTING {
            return Err(self.syntax(format!("expression nested deeper than {MAX_NESTING}")));
        }
        Ok(depth)
    }

    fn expr(&mut self) -> Result<(Expr, usize), ExprError> {
        self.depth += 1;
        self.check_depth(0)?;
        let (mut lhs, mut depth) = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let (rhs, d) = self.term()?;
            depth = self.check_depth(depth.max(d) + 1)?;
            let op = if c == b'+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok((lhs, depth))
    }

    fn term(&mut self) -> Result<(Expr, usize), ExprError> {
        let (mut lhs, mut depth) = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let (rhs, d) = self.factor()?;
            depth = self.check_depth(depth.max(d) + 1)?;
            let op = if c == b'*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok((lhs, depth))
    }

    fn factor(&mut self) -> Result<(Expr, usize), ExprError> {
        self.depth += 1;
        self.check_depth(0)?;
        let (base, depth) = self.base()?;
        let out = if self.peek() == Some(b'^') {
            self.pos += 1;
            let (exponent, d) = self.factor()?;
            let depth = self.check_depth(depth.max(d) + 1)?;
            (Expr::binary(BinaryOp::Pow, base, exponent), depth)
        } else {
            (base, depth)
        };
        self.depth -= 1;
        Ok(out)
    }

    fn base(&mut self) -> Result<(Expr, usize), ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'-') => {
                self.depth += 1;
                self.check_depth(0)?;
                self.pos += 1;
                let (inner, d) = self.base()?;
                self.depth -= 1;
                Ok((Expr::unary(UnaryOp::Neg, inner), self.check_depth(d + 1)?))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok((self.number()?, 1)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.syntax(format!(
                "unexpected character `{}`",
                self.peek_char_display()
            ))),
        }
    }

    fn expect_close(&mut self) -> Result<(), ExprError> {
        if self.peek() == Some(b')') {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax("expected `)`"))
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(self.syntax("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start + 1,
            message: format!("malformed number `{text}`"),
        })?;
        if !value.is_finite() {
            return Err(ExprError::Syntax {
                offset: start + 1,
                message: format!("number `{text}` overflows"),
            });
        }
        Ok(Expr::Const(value))
    }

    fn identifier(&mut self) -> Result<(Expr, usize), ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if self.peek() == Some(b'(') {
            let op = UnaryOp::from_function_name(name).ok_or_else(|| {
                ExprError::UnknownFunction {
                    name: name.to_string(),
                    offset: start + 1,
                }
            })?;
            self.pos += 1;
            let (arg, d) = self.expr()?;
            self.expect_close()?;
            return Ok((Expr::unary(op, arg), self.check_depth(d + 1)?));
        }
        if self.space.index_of(name).is_none() {
            return Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                offset: start + 1,
            });
        }
        Ok((Expr::var(name), 1))
    }
}
