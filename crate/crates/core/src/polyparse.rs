//! Text syntax for bivariate polynomials and rational maps.
//!
//! ```text
//! rational := expr ('/' expr)?
//! expr     := term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := '-' factor | power
//! power    := atom ('^' uint)?
//! atom     := uint | 'x' | 'y' | '(' expr ')'
//! ```
//!
//! Whitespace is ignored. `^` binds tighter than unary minus, so `-x^2`
//! reads as `-(x^2)`. Integer literals of any size are reduced modulo `p`.

use thiserror::Error;

use crate::algebra::{BivarPoly, RationalMap};
use crate::field::PrimeField;

/// Largest total degree an expression may expand to.
pub const MAX_DEGREE: u32 = 128;
const MAX_NESTING: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("negative exponent at byte {offset}")]
    NegativeExponent { offset: usize },
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("expression degree exceeds {MAX_DEGREE}")]
    DegreeTooLarge,
}

/// Parse tree of a polynomial expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyExpr {
    /// Decimal digits of a nonnegative literal.
    Int(String),
    X,
    Y,
    Neg(Box<PolyExpr>),
    Add(Box<PolyExpr>, Box<PolyExpr>),
    Sub(Box<PolyExpr>, Box<PolyExpr>),
    Mul(Box<PolyExpr>, Box<PolyExpr>),
    Pow(Box<PolyExpr>, u32),
}

impl PolyExpr {
    /// Evaluates the tree directly at a point.
    pub fn eval(&self, field: &PrimeField, x: u64, y: u64) -> u64 {
        match self {
            PolyExpr::Int(digits) => reduce_digits(digits, field.modulus()),
            PolyExpr::X => x % field.modulus(),
            PolyExpr::Y => y % field.modulus(),
            PolyExpr::Neg(a) => field.neg(a.eval(field, x, y)),
            PolyExpr::Add(a, b) => field.add(a.eval(field, x, y), b.eval(field, x, y)),
            PolyExpr::Sub(a, b) => field.sub(a.eval(field, x, y), b.eval(field, x, y)),
            PolyExpr::Mul(a, b) => field.mul(a.eval(field, x, y), b.eval(field, x, y)),
            PolyExpr::Pow(a, e) => field.pow(a.eval(field, x, y), *e as u64),
        }
    }

    /// Upper bound on the total degree of the expansion.
    fn degree_bound(&self) -> u64 {
        match self {
            PolyExpr::Int(_) => 0,
            PolyExpr::X | PolyExpr::Y => 1,
            PolyExpr::Neg(a) => a.degree_bound(),
            PolyExpr::Add(a, b) | PolyExpr::Sub(a, b) => a.degree_bound().max(b.degree_bound()),
            PolyExpr::Mul(a, b) => a.degree_bound() + b.degree_bound(),
            PolyExpr::Pow(a, e) => a.degree_bound().saturating_mul(*e as u64),
        }
    }

    /// Expands into a normalized coefficient table.
    pub fn expand(&self, field: &PrimeField) -> Result<BivarPoly, ParseError> {
        if self.degree_bound() > MAX_DEGREE as u64 {
            return Err(ParseError::DegreeTooLarge);
        }
        Ok(self.expand_unchecked(field.modulus()))
    }

    fn expand_unchecked(&self, p: u64) -> BivarPoly {
        match self {
            PolyExpr::Int(digits) => BivarPoly::constant(p, reduce_digits(digits, p)),
            PolyExpr::X => BivarPoly::x(p),
            PolyExpr::Y => BivarPoly::y(p),
            PolyExpr::Neg(a) => a.expand_unchecked(p).neg(),
            PolyExpr::Add(a, b) => a.expand_unchecked(p).add_unchecked(&b.expand_unchecked(p)),
            PolyExpr::Sub(a, b) => a
                .expand_unchecked(p)
                .add_unchecked(&b.expand_unchecked(p).neg()),
            PolyExpr::Mul(a, b) => a.expand_unchecked(p).mul_unchecked(&b.expand_unchecked(p)),
            PolyExpr::Pow(a, e) => a.expand_unchecked(p).pow(*e),
        }
    }
}

fn reduce_digits(digits: &str, p: u64) -> u64 {
    digits
        .bytes()
        .fold(0u64, |acc, d| (acc * 10 + (d - b'0') as u64) % p)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            depth: 0,
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

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn unexpected<T>(&mut self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            None => self.error(format!("unexpected end of input, expected {wanted}")),
            Some(c) if c.is_ascii_graphic() => {
                self.error(format!("unexpected '{}', expected {wanted}", c as char))
            }
            Some(c) => self.error(format!("unexpected byte 0x{c:02x}, expected {wanted}")),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return self.error("expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<PolyExpr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = PolyExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = PolyExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<PolyExpr, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = PolyExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<PolyExpr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            self.enter()?;
            let inner = self.factor()?;
            self.depth -= 1;
            return Ok(PolyExpr::Neg(Box::new(inner)));
        }
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        match self.peek() {
            Some(b'-') => Err(ParseError::NegativeExponent { offset: self.pos }),
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let digits = self.digits();
                match digits.trim_start_matches('0').parse::<u32>() {
                    Ok(e) => Ok(PolyExpr::Pow(Box::new(base), e)),
                    Err(_) if digits.bytes().all(|d| d == b'0') => {
                        Ok(PolyExpr::Pow(Box::new(base), 0))
                    }
                    Err(_) => {
                        self.pos = start;
                        self.error("exponent out of range")
                    }
                }
            }
            _ => self.unexpected("an unsigned exponent"),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8(self.src[start..self.pos].to_vec()).expect("ascii digits")
    }

    fn atom(&mut self) -> Result<PolyExpr, ParseError> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(PolyExpr::X)
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(PolyExpr::Y)
            }
            Some(c) if c.is_ascii_digit() => Ok(PolyExpr::Int(self.digits())),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.unexpected("')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => self.unexpected("a number, 'x', 'y' or '('"),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.peek().is_some() {
            return self.unexpected("end of input");
        }
        Ok(())
    }
}

/// Parses a polynomial expression into its parse tree.
pub fn parse_expr(text: &str) -> Result<PolyExpr, ParseError> {
    let mut parser = Parser::new(text);
    let e = parser.expr()?;
    parser.finish()?;
    Ok(e)
}

/// Parses `NUM` or `NUM / DEN` into a pair of parse trees.
pub fn parse_rational_expr(text: &str) -> Result<(PolyExpr, Option<PolyExpr>), ParseError> {
    let mut parser = Parser::new(text);
    let num = parser.expr()?;
    let den = if parser.peek() == Some(b'/') {
        parser.pos += 1;
        Some(parser.expr()?)
    } else {
        None
    };
    parser.finish()?;
    Ok((num, den))
}

pub fn parse_poly(text: &str, field: &PrimeField) -> Result<BivarPoly, ParseError> {
    parse_expr(text)?.expand(field)
}

pub fn parse_rational(text: &str, field: &PrimeField) -> Result<RationalMap, ParseError> {
    let (num, den) = parse_rational_expr(text)?;
    let num = num.expand(field)?;
    match den {
        None => Ok(RationalMap::polynomial(num)),
        Some(den) => {
            let den = den.expand(field)?;
            RationalMap::new(num, den).map_err(|_| ParseError::ZeroDenominator)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn table(q: &BivarPoly) -> Vec<((u32, u32), u64)> {
        q.terms().collect()
    }

    #[test]
    fn difference_of_variables() {
        let q = parse_poly("y - x", &f(7)).unwrap();
        assert_eq!(table(&q), vec![((0, 1), 1), ((1, 0), 6)]);
    }

    #[test]
    fn unit_circle() {
        let q = parse_poly("x^2 + y^2 - 1", &f(5)).unwrap();
        assert_eq!(table(&q), vec![((0, 0), 4), ((0, 2), 1), ((2, 0), 1)]);
    }

    #[test]
    fn negative_exponent() {
        assert_eq!(
            parse_poly("x^-1", &f(7)),
            Err(ParseError::NegativeExponent { offset: 2 })
        );
    }

    #[test]
    fn precedence() {
        let field = f(11);
        assert_eq!(parse_poly("-x^2", &field).unwrap(), parse_poly("0 - x*x", &field).unwrap());
        assert_eq!(parse_poly("x^2*y", &field).unwrap(), parse_poly("(x*x)*y", &field).unwrap());
        assert_eq!(parse_poly("2*-x", &field).unwrap(), parse_poly("9*x", &field).unwrap());
        assert_eq!(parse_poly("x - y - 1", &field).unwrap(), parse_poly("x - (y + 1)", &field).unwrap());
    }

    #[test]
    fn huge_literals_reduce() {
        let q = parse_poly("100000000000000000000000000000 * x", &f(7)).unwrap();
        // 10^29 mod 7 = 10^(29 mod 6) = 10^5 mod 7 = 5
        assert_eq!(table(&q), vec![((1, 0), 5)]);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let cases = [("x +", 3), ("x ** y", 3), ("(x + y", 6), ("x y", 2), ("", 0), ("z", 0), ("x^", 2)];
        for (text, offset) in cases {
            match parse_poly(text, &f(7)) {
                Err(ParseError::Syntax { offset: o, .. }) => assert_eq!(o, offset, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn degree_guard() {
        assert_eq!(parse_poly("(x+y)^1000", &f(7)), Err(ParseError::DegreeTooLarge));
        assert_eq!(parse_poly("x^99999999999", &f(7)).unwrap_err().to_string().contains("exponent"), true);
        assert!(parse_poly("x^000", &f(7)).is_ok());
    }

    #[test]
    fn deep_nesting_is_an_error() {
        let text = "(".repeat(10_000) + "x" + &")".repeat(10_000);
        assert!(matches!(parse_poly(&text, &f(7)), Err(ParseError::Syntax { .. })));
        let text = "-".repeat(10_000) + "x";
        assert!(matches!(parse_poly(&text, &f(7)), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn rational_maps() {
        let field = f(7);
        let r = parse_rational("x*y", &field).unwrap();
        assert!(r.is_polynomial());
        let r = parse_rational("(x+1) / (y^2)", &field).unwrap();
        assert_eq!(r.denominator_degree(), 2);
        assert_eq!(parse_rational("x / 0", &field), Err(ParseError::ZeroDenominator));
        assert_eq!(parse_rational("x / (7*y)", &field), Err(ParseError::ZeroDenominator));
        assert!(matches!(parse_rational("x / y / x", &field), Err(ParseError::Syntax { .. })));
    }
}
