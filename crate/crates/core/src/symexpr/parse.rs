use num::{BigInt, BigRational, Zero};
use thiserror::Error;

use super::{Const, Expr, Func};

const MAX_DEPTH: usize = 256;

/// Syntax error at a byte offset into the parsed text.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Parses infix text: `+ - * / ^`, parentheses, `sin cos exp log sqrt`,
/// the imaginary unit `i`, integer, decimal and rational literals.
/// Exponents must be integers.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, depth: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.s.len() {
        let c = text[p.pos..].chars().next().unwrap_or('?');
        return Err(p.err(format!("unexpected `{c}`")));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err("expression nested too deeply"));
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.eat(b'/') {
                let den = self.unary()?;
                acc = acc.div(&den);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let out = if self.eat(b'-') {
            self.unary()?.neg()
        } else if self.eat(b'+') {
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let n = if self.eat(b'(') {
            let n = self.exponent()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)` after exponent"));
            }
            n
        } else {
            self.exponent()?
        };
        Ok(base.powi(n))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("exponent must be an integer literal"));
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let n: i32 = digits.parse().map_err(|_| ParseError {
            offset: start,
            message: "exponent out of range".into(),
        })?;
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                if let Some(f) = Func::from_name(name) {
                    if !self.eat(b'(') {
                        return Err(ParseError {
                            offset: start,
                            message: format!("`{name}` must be called with parentheses"),
                        });
                    }
                    let arg = self.sum()?;
                    if !self.eat(b')') {
                        return Err(self.err(format!("expected `)` closing {name}(")));
                    }
                    return Ok(Expr::apply(f, &arg));
                }
                if name == "i" {
                    return Ok(Expr::i());
                }
                Ok(Expr::var(name))
            }
            Some(_) => {
                let c = String::from_utf8_lossy(&self.s[self.pos..]).chars().next().unwrap_or('?');
                Err(self.err(format!("unexpected `{c}`")))
            }
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut int = BigInt::zero();
        let mut scale = 0i64;
        let mut digits = 0;
        let mut seen_dot = false;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            if c.is_ascii_digit() {
                int = int * 10 + BigInt::from(c - b'0');
                digits += 1;
                if seen_dot {
                    scale -= 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits == 0 {
            return Err(ParseError { offset: start, message: "malformed number".into() });
        }
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            let neg = if self.s.get(self.pos) == Some(&b'-') {
                self.pos += 1;
                true
            } else {
                if self.s.get(self.pos) == Some(&b'+') {
                    self.pos += 1;
                }
                false
            };
            let es = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if es == self.pos {
                self.pos = save;
            } else {
                let e: i64 = std::str::from_utf8(&self.s[es..self.pos])
                    .unwrap()
                    .parse()
                    .ok()
                    .filter(|e: &i64| *e <= 4096)
                    .ok_or_else(|| ParseError { offset: es, message: "exponent too large".into() })?;
                scale += if neg { -e } else { e };
            }
        }
        let ten = BigRational::from_integer(BigInt::from(10));
        let mut r = BigRational::from_integer(int);
        let factor = num::pow::pow(ten, scale.unsigned_abs() as usize);
        if scale >= 0 {
            r *= factor;
        } else {
            r /= factor;
        }
        Ok(Expr::constant(Const::from_ratio(r)))
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let upto = &text.as_bytes()[..offset.min(text.len())];
    let line = upto.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = upto.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let col = String::from_utf8_lossy(&upto[line_start..]).chars().count() + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Assignment;
    use num::complex::Complex64;

    fn ev(s: &str, x: f64) -> Complex64 {
        parse(s).unwrap().eval(&Assignment::from_reals(&[("x", x)])).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2*3^2", 0.0).re, 19.0);
        assert_eq!(ev("-x^2", 3.0).re, -9.0);
        assert_eq!(ev("2/4/2", 0.0).re, 0.25);
        assert_eq!(ev("x^(-2)", 2.0).re, 0.25);
        assert_eq!(ev("x^-1", 4.0).re, 0.25);
        assert_eq!(ev("3/4", 0.0).re, 0.75);
    }

    #[test]
    fn literals_are_exact() {
        assert_eq!(parse("0.25").unwrap().as_const(), Some(&Const::rational(1, 4)));
        assert_eq!(parse("1e-3").unwrap().as_const(), Some(&Const::rational(1, 1000)));
        assert_eq!(ev("2*i*i", 0.0), Complex64::new(-2.0, 0.0));
    }

    #[test]
    fn errors_are_positioned() {
        let e = parse("x + * 2").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(parse("sin x").is_err());
        assert!(parse("x^y").is_err());
        assert!(parse("(x").is_err());
        assert!(parse("x)").is_err());
        assert!(parse("").is_err());
        let deep = "(".repeat(5000) + "x" + &")".repeat(5000);
        assert!(parse(&deep).is_err());
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}
