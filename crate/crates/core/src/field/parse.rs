//! Element literals: `(a,b,c)+` / `(a,b,c)-` for a root of `a t^2 + b t + c`,
//! or `x+y*sqrt(m)` with rational `x`, `y` (e.g. `1+1*sqrt(2)`, `1/2-3/2*sqrt(-7)`, `3/2`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{squarefree_decompose, FieldElement, FieldError, QuadraticField};

pub fn parse_element(literal: &str) -> Result<FieldElement, FieldError> {
    let s: String = literal.chars().filter(|c| !c.is_whitespace()).collect();
    let err = |msg: &str| FieldError::Parse(literal.to_string(), msg.to_string());
    if s.is_empty() {
        return Err(err("empty literal"));
    }
    if s.starts_with('(') && s.contains(',') {
        return parse_minpoly(&s).map_err(|e| match e {
            FieldError::Parse(_, m) => err(&m),
            other => other,
        });
    }
    let mut p = Parser { s: s.as_bytes(), i: 0 };
    let mut x = BigRational::zero();
    let mut y = BigRational::zero();
    let mut surd: Option<BigInt> = None;
    let mut first = true;
    while p.i < p.s.len() {
        let neg = match p.peek() {
            Some(b'+') => {
                p.i += 1;
                false
            }
            Some(b'-') => {
                p.i += 1;
                true
            }
            _ if first => false,
            _ => return Err(err("expected '+' or '-' between terms")),
        };
        first = false;
        let (coef, m) = p.term().map_err(|m| err(&m))?;
        let coef = if neg { -coef } else { coef };
        match m {
            None => x += coef,
            Some(m) => {
                if m.is_zero() {
                    continue;
                }
                let (sq, sf) = squarefree_decompose(&m);
                let coef = coef * BigRational::from_integer(sq);
                if sf.is_one() {
                    x += coef;
                    continue;
                }
                if let Some(prev) = &surd {
                    if prev != &sf {
                        return Err(err("terms use different square roots"));
                    }
                }
                surd = Some(sf);
                y += coef;
            }
        }
    }
    match surd {
        Some(m) if !y.is_zero() => {
            let field = QuadraticField::new(m).expect("squarefree part");
            Ok(FieldElement::new(&field, x, y))
        }
        _ => Ok(FieldElement::from_rational(&QuadraticField::rationals(), x)),
    }
}

fn parse_minpoly(s: &str) -> Result<FieldElement, FieldError> {
    let bad = |m: &str| FieldError::Parse(s.to_string(), m.to_string());
    let close = s.find(')').ok_or_else(|| bad("missing ')'"))?;
    let plus = match &s[close + 1..] {
        "+" | "" => true,
        "-" => false,
        _ => return Err(bad("root selector must be '+' or '-'")),
    };
    let coeffs: Vec<BigInt> = s[1..close]
        .split(',')
        .map(|c| c.parse::<BigInt>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("coefficients must be integers"))?;
    if coeffs.len() != 3 {
        return Err(bad("expected three coefficients"));
    }
    FieldElement::from_minpoly(&coeffs[0], &coeffs[1], &coeffs[2], plus)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.s[self.i..].starts_with(lit.as_bytes()) {
            self.i += lit.len();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<BigInt, String> {
        let start = self.i;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.i += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.i += 1;
        }
        std::str::from_utf8(&self.s[start..self.i])
            .unwrap()
            .parse()
            .map_err(|_| format!("expected an integer at offset {start}"))
    }

    fn unsigned(&mut self) -> Result<BigInt, String> {
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.int()
        } else {
            Err(format!("expected a digit at offset {}", self.i))
        }
    }

    fn rational(&mut self) -> Result<BigRational, String> {
        if self.eat("(") {
            let num = self.int()?;
            let den = if self.eat("/") { self.int()? } else { BigInt::one() };
            if !self.eat(")") {
                return Err("missing ')'".into());
            }
            return ratio(num, den);
        }
        let num = self.unsigned()?;
        let den = if self.eat("/") { self.unsigned()? } else { BigInt::one() };
        ratio(num, den)
    }

    fn sqrt(&mut self) -> Result<BigInt, String> {
        let m = self.int()?;
        if !self.eat(")") {
            return Err("missing ')' after sqrt argument".into());
        }
        Ok(m)
    }

    /// `coef`, `coef*sqrt(m)`, `sqrt(m)`, `i`, or `coef*i`.
    fn term(&mut self) -> Result<(BigRational, Option<BigInt>), String> {
        if self.eat("sqrt(") {
            return Ok((BigRational::one(), Some(self.sqrt()?)));
        }
        if self.eat("i") {
            return Ok((BigRational::one(), Some(-BigInt::one())));
        }
        let c = self.rational()?;
        if self.eat("*") {
            if self.eat("sqrt(") {
                return Ok((c, Some(self.sqrt()?)));
            }
            if self.eat("i") {
                return Ok((c, Some(-BigInt::one())));
            }
            return Err(format!("expected sqrt(..) at offset {}", self.i));
        }
        Ok((c, None))
    }
}

fn ratio(num: BigInt, den: BigInt) -> Result<BigRational, String> {
    if den.is_zero() {
        Err("zero denominator".into())
    } else {
        Ok(BigRational::new(num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn surd_literals() {
        let g = parse_element("1+1*sqrt(2)").unwrap();
        assert_eq!((g.x(), g.y()), (&q(1, 1), &q(1, 1)));
        assert_eq!(g.field().m(), &BigInt::from(2));
        let g = parse_element(" 1/2 - 3/2*sqrt(-7)").unwrap();
        assert_eq!((g.x(), g.y()), (&q(1, 2), &q(-3, 2)));
        let g = parse_element("sqrt(8)").unwrap();
        assert_eq!((g.x(), g.y()), (&q(0, 1), &q(2, 1)));
        let g = parse_element("(1/2)+(1/2)*sqrt(5)").unwrap();
        assert_eq!((g.x(), g.y()), (&q(1, 2), &q(1, 2)));
        let g = parse_element("1+i").unwrap();
        assert_eq!(g.field().m(), &BigInt::from(-1));
    }

    #[test]
    fn rational_literals() {
        let g = parse_element("3/2").unwrap();
        assert!(g.field().is_rational());
        assert_eq!(g.x(), &q(3, 2));
        let g = parse_element("2+3*sqrt(4)").unwrap();
        assert!(g.field().is_rational());
        assert_eq!(g.x(), &q(8, 1));
        assert_eq!(parse_element("-2").unwrap().x(), &q(-2, 1));
    }

    #[test]
    fn minpoly_literals() {
        let g = parse_element("(1,-1,-1)+").unwrap();
        assert_eq!((g.x(), g.y()), (&q(1, 2), &q(1, 2)));
        let g = parse_element("(1,-1,-1)-").unwrap();
        assert_eq!(g.y(), &q(-1, 2));
        let g = parse_element("(2,-3,2)+").unwrap();
        assert_eq!((g.x(), g.y()), (&q(3, 4), &q(1, 4)));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1+", "1+*sqrt(2)", "(1,2)+", "(1,2,x)+", "1/0", "sqrt(2)+sqrt(3)", "(1,-3,2)+"] {
            assert!(parse_element(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for lit in ["1+1*sqrt(2)", "1/2-3/2*sqrt(-7)", "-5/3", "-2*sqrt(3)"] {
            assert_eq!(parse_element(lit).unwrap().to_string(), lit);
        }
    }
}
