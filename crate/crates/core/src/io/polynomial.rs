//! `x1@1*x2@0 - [x1@1,x3@1] + 1/2*s3(x1,x2,x3)`.
//!
//! A degree after `@` has exactly as many comma-separated integers as the
//! group has coordinates, which keeps it apart from the comma of a
//! commutator. Variables without `@` have degree `1_G`. Juxtaposition and
//! `*` both multiply.

use num::One;

use crate::error::{Error, Result};
use crate::grading::GradingGroup;
use crate::identities::{GradedPolynomial, GradedVariable};
use crate::rational::{parse_q, Q};

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    group: &'a GradingGroup,
}

pub fn parse_polynomial(text: &str, group: &GradingGroup) -> Result<GradedPolynomial> {
    let mut p = Parser { text: text.as_bytes(), pos: 0, group };
    let f = p.expr()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in polynomial", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.text.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn digits(&mut self) -> Option<&str> {
        let start = self.pos;
        while self.text.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.text[start..self.pos]).expect("ascii"))
    }

    fn integer<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let parsed = self.digits().map(str::parse::<T>);
        match parsed {
            Some(Ok(n)) => Ok(n),
            _ => Err(self.error(&format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<GradedPolynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<GradedPolynomial> {
        let negate = self.eat(b'-');
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') || matches!(self.peek(), Some(b'x' | b's' | b'[' | b'(')) {
                acc = acc.mul(&self.factor()?);
            } else {
                break;
            }
        }
        Ok(if negate { acc.scale(&-Q::one()) } else { acc })
    }

    fn factor(&mut self) -> Result<GradedPolynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let f = self.expr()?;
                self.expect(b')')?;
                Ok(f)
            }
            Some(b'[') => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b']')?;
                Ok(a.commutator(&b))
            }
            Some(b'x') => Ok(GradedPolynomial::var(self.variable()?)),
            Some(b's') => {
                self.pos += 1;
                let k: usize = self.integer("arity after 's'")?;
                self.expect(b'(')?;
                let mut vars = vec![self.variable()?];
                while self.eat(b',') {
                    vars.push(self.variable()?);
                }
                self.expect(b')')?;
                if vars.len() != k {
                    return Err(self.error(&format!("s{k} takes {k} variables, got {}", vars.len())));
                }
                Ok(GradedPolynomial::standard(&vars))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                self.digits();
                if self.text.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    if self.digits().is_none() {
                        return Err(self.error("expected denominator"));
                    }
                }
                let s = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii");
                Ok(GradedPolynomial::constant(parse_q(s)?))
            }
            _ => Err(self.error("expected a factor")),
        }
    }

    fn variable(&mut self) -> Result<GradedVariable> {
        self.expect(b'x')?;
        let index: usize = self.integer("variable index")?;
        if index == 0 {
            return Err(self.error("variables are numbered from 1"));
        }
        let degree = if self.text.get(self.pos) == Some(&b'@') {
            self.pos += 1;
            let mut coords = Vec::with_capacity(self.group.rank());
            for k in 0..self.group.rank() {
                if k > 0 {
                    self.expect(b',')?;
                }
                let neg = self.eat(b'-');
                self.skip_ws();
                let n: i64 = self.integer("degree coordinate")?;
                coords.push(if neg { -n } else { n });
            }
            self.group.elem(&coords)?
        } else {
            self.group.identity()
        };
        Ok(GradedVariable::new(index, degree))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn parses_the_text_syntax() {
        let g = GradingGroup::z2();
        let f = parse_polynomial("[x1@0, x2@1]", &g).unwrap();
        let (x1, x2) = (GradedVariable::new(1, g.elem(&[0]).unwrap()), GradedVariable::new(2, g.elem(&[1]).unwrap()));
        assert_eq!(f, GradedPolynomial::var(x1.clone()).commutator(&GradedPolynomial::var(x2.clone())));
        let h = parse_polynomial("x1@1 x2@1 + x2@1*x1@1", &g).unwrap();
        assert_eq!(h.num_terms(), 2);
        let s = parse_polynomial("s2(x1@0,x2@1)", &g).unwrap();
        assert_eq!(s, f);
        let c = parse_polynomial("-1/2*x1 + 3", &g).unwrap();
        assert_eq!(c, GradedPolynomial::var(x1).scale(&crate::rational::qr(-1, 2)).add(&GradedPolynomial::constant(q(3))));
    }

    #[test]
    fn display_round_trips() {
        let g = GradingGroup::new(1, vec![2]).unwrap();
        let f = parse_polynomial("[x1@1,0, x2@-1,1] - 2*x3@0,1 x1@1,0", &g).unwrap();
        assert_eq!(parse_polynomial(&f.to_string(), &g).unwrap(), f);
    }

    #[test]
    fn rejects_malformed_input() {
        let g = GradingGroup::trivial();
        for bad in ["", "x0", "[x1 x2]", "s3(x1,x2)", "x1 +", "y1"] {
            assert!(parse_polynomial(bad, &g).is_err(), "{bad:?}");
        }
    }
}
