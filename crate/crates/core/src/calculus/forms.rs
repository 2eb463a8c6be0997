use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, q, qr, Q};
use crate::report::{Verdict, VerificationReport};

/// `x^α dx_S`: exponents and a bitmask of differentials.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormMonomial {
    pub exponents: Vec<u32>,
    pub dx: u32,
}

impl FormMonomial {
    pub fn poly_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn form_degree(&self) -> u32 {
        self.dx.count_ones()
    }
}

/// A differential form with polynomial coefficients on `n` variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Form {
    terms: BTreeMap<FormMonomial, Q>,
}

impl Form {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FormMonomial, &Q)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: FormMonomial, c: Q) {
        let e = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Form {
        if s.is_zero() {
            return Form::zero();
        }
        Form { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.form_degree() % 2 == 0)
    }

    pub fn max_poly_degree(&self) -> u32 {
        self.terms.keys().map(FormMonomial::poly_degree).max().unwrap_or(0)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = fmt_q(c);
                for (i, &e) in m.exponents.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => s += &format!("*x{}", i + 1),
                        _ => s += &format!("*x{}^{}", i + 1, e),
                    }
                }
                let dx: Vec<String> = (0..32).filter(|i| m.dx >> i & 1 == 1).map(|i| format!("dx{}", i + 1)).collect();
                if !dx.is_empty() {
                    s += " ";
                    s += &dx.join("^");
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Forms on `n` variables with coefficient degree at most `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormsArena {
    pub n: usize,
    pub p: u32,
}

impl FormsArena {
    pub fn new(n: usize, p: u32) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::Precondition(format!("forms need 1..=16 variables, got {n}")));
        }
        Ok(Self { n, p })
    }

    fn check(&self, f: &Form) -> Result<()> {
        for m in f.terms.keys() {
            if m.exponents.len() != self.n || m.dx >> self.n != 0 {
                return Err(Error::Structural(format!("form term outside {} variables", self.n)));
            }
            if m.poly_degree() > self.p {
                return Err(Error::CapOverflow(format!("coefficient degree {} exceeds cap {}", m.poly_degree(), self.p)));
            }
        }
        Ok(())
    }

    pub fn monomial(&self, exponents: &[u32], dx: &[usize]) -> Result<Form> {
        let mut mask = 0u32;
        for &i in dx {
            if i == 0 || i > self.n {
                return Err(Error::Structural(format!("dx{i} outside {} variables", self.n)));
            }
            if mask >> (i - 1) & 1 == 1 {
                return Ok(Form::zero());
            }
            mask |= 1 << (i - 1);
        }
        // Sort the wedge list, tracking the sign.
        let mut sign = Q::one();
        for a in 0..dx.len() {
            for b in a + 1..dx.len() {
                if dx[a] > dx[b] {
                    sign = -sign;
                }
            }
        }
        let mut f = Form::zero();
        f.add_term(FormMonomial { exponents: exponents.to_vec(), dx: mask }, sign);
        self.check(&f)?;
        Ok(f)
    }

    pub fn constant(&self, c: Q) -> Form {
        let mut f = Form::zero();
        f.add_term(FormMonomial { exponents: vec![0; self.n], dx: 0 }, c);
        f
    }

    pub fn var(&self, i: usize) -> Result<Form> {
        let mut e = vec![0; self.n];
        e[i - 1] = 1;
        self.monomial(&e, &[])
    }

    pub fn d(&self, f: &Form) -> Form {
        let mut out = Form::zero();
        for (m, c) in &f.terms {
            for i in 0..self.n {
                let e = m.exponents[i];
                if e == 0 || m.dx >> i & 1 == 1 {
                    continue;
                }
                let mut ex = m.exponents.clone();
                ex[i] -= 1;
                // dx_i moves to its slot past the lower differentials.
                let lower = (m.dx & ((1 << i) - 1)).count_ones();
                let sign = if lower % 2 == 0 { Q::one() } else { -Q::one() };
                out.add_term(FormMonomial { exponents: ex, dx: m.dx | 1 << i }, c * Q::from_integer(e.into()) * sign);
            }
        }
        out
    }

    /// `α ∧ β`; a hard error when a product term exceeds the cap.
    pub fn wedge(&self, a: &Form, b: &Form) -> Result<Form> {
        let mut out = Form::zero();
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                let deg = m1.poly_degree() + m2.poly_degree();
                if deg > self.p {
                    return Err(Error::CapOverflow(format!("product has coefficient degree {deg} > cap {}", self.p)));
                }
                if m1.dx & m2.dx != 0 {
                    continue;
                }
                let mut inv = 0;
                for s in 0..self.n {
                    if m1.dx >> s & 1 == 1 {
                        inv += (m2.dx & ((1 << s) - 1)).count_ones();
                    }
                }
                let sign = if inv % 2 == 0 { Q::one() } else { -Q::one() };
                let ex = m1.exponents.iter().zip(&m2.exponents).map(|(x, y)| x + y).collect();
                out.add_term(FormMonomial { exponents: ex, dx: m1.dx | m2.dx }, c1 * c2 * sign);
            }
        }
        Ok(out)
    }

    /// `α ∗ β = α∧β + ½ dα∧dβ`.
    pub fn fedosov(&self, a: &Form, b: &Form) -> Result<Form> {
        self.check(a)?;
        self.check(b)?;
        let w = self.wedge(a, b)?;
        let dd = self.wedge(&self.d(a), &self.d(b))?;
        Ok(w.add(&dd.scale(&qr(1, 2))))
    }

    pub fn fedosov_commutator(&self, a: &Form, b: &Form) -> Result<Form> {
        Ok(self.fedosov(a, b)?.sub(&self.fedosov(b, a)?))
    }

    /// A random even form with coefficient degree at most `deg`.
    pub fn random_even(&self, deg: u32, rng: &mut impl Rng) -> Form {
        let mut f = Form::zero();
        let terms = rng.gen_range(1..=3);
        for _ in 0..terms {
            let mut ex = vec![0u32; self.n];
            let mut left = rng.gen_range(0..=deg);
            while left > 0 {
                ex[rng.gen_range(0..self.n)] += 1;
                left -= 1;
            }
            let mut dx = 0u32;
            let want = 2 * rng.gen_range(0..=self.n / 2);
            while dx.count_ones() < want as u32 {
                dx |= 1 << rng.gen_range(0..self.n);
            }
            let c = q(rng.gen_range(-3..=3));
            f.add_term(FormMonomial { exponents: ex, dx }, c);
        }
        f
    }

    /// Parses `"x1^2*x2 dx1^dx3"`, with optional rational coefficients and
    /// `+`-separated terms.
    pub fn parse(&self, text: &str) -> Result<Form> {
        let mut out = Form::zero();
        let normalized = text.replace(" - ", " + -");
        for term in normalized.split(" + ").map(str::trim).filter(|t| !t.is_empty()) {
            let (poly, wedge) = match term.split_once(char::is_whitespace) {
                Some((p, w)) if w.trim().starts_with("dx") => (p.trim(), Some(w.trim())),
                _ if term.starts_with("dx") => ("1", Some(term)),
                _ => (term, None),
            };
            let mut coeff = Q::one();
            let mut ex = vec![0u32; self.n];
            for factor in poly.split('*').map(str::trim) {
                let mut factor = factor;
                if let Some(r) = factor.strip_prefix('-').filter(|r| r.starts_with('x')) {
                    coeff = -coeff;
                    factor = r;
                }
                if let Some(rest) = factor.strip_prefix('x') {
                    let (i, e) = match rest.split_once('^') {
                        Some((i, e)) => (i, e.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?),
                        None => (rest, 1),
                    };
                    let i: usize = i.parse().map_err(|_| Error::Parse(format!("bad variable {factor:?}")))?;
                    if i == 0 || i > self.n {
                        return Err(Error::Parse(format!("variable {factor:?} outside {} variables", self.n)));
                    }
                    ex[i - 1] += e;
                } else {
                    coeff *= parse_q(factor)?;
                }
            }
            let dx: Vec<usize> = match wedge {
                Some(w) => w
                    .split('^')
                    .map(|s| {
                        s.trim()
                            .strip_prefix("dx")
                            .and_then(|i| i.parse().ok())
                            .ok_or_else(|| Error::Parse(format!("bad differential {s:?}")))
                    })
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            };
            let m = self.monomial(&ex, &dx)?;
            out = out.add(&m.scale(&coeff));
        }
        Ok(out)
    }
}

/// Sample checks of the Fedosov product on even forms.
pub fn fedosov_identity_report(arena: FormsArena, samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport::pass("fedosov_identities");
    report.detail("n", arena.n);
    report.detail("p", arena.p);
    report.detail("samples", samples);
    report.detail("seed", seed);
    let (mut assoc, mut closed, mut comm, mut triple) = (true, true, true, true);
    let mut commutative = true;
    for s in 0..samples {
        // Split the cap across the three factors so every product stays inside it.
        let da = rng.gen_range(0..=arena.p);
        let db = rng.gen_range(0..=arena.p - da);
        let dc = rng.gen_range(0..=arena.p - da - db);
        let a = arena.random_even(da, &mut rng);
        let b = arena.random_even(db, &mut rng);
        let c = arena.random_even(dc, &mut rng);
        let ab = arena.fedosov(&a, &b)?;
        let left = arena.fedosov(&ab, &c)?;
        let right = arena.fedosov(&a, &arena.fedosov(&b, &c)?)?;
        let bracket = arena.fedosov_commutator(&a, &b)?;
        let ddw = arena.wedge(&arena.d(&a), &arena.d(&b))?;
        let t = arena.fedosov_commutator(&bracket, &c)?;
        let checks = [
            ("associativity", left == right, &mut assoc),
            ("even_closure", ab.is_even(), &mut closed),
            ("commutator", bracket == ddw, &mut comm),
            ("triple_commutator", t.is_zero(), &mut triple),
        ];
        for (name, ok, flag) in checks {
            if !ok && *flag {
                *flag = false;
                report.absorb(
                    Verdict::Fail,
                    Some(json!({"check": name, "sample": s, "alpha": a.to_string(), "beta": b.to_string(), "gamma": c.to_string()})),
                );
            }
        }
        commutative &= bracket.is_zero();
    }
    report.detail("associativity", assoc);
    report.detail("even_closure", closed);
    report.detail("commutator_is_d_wedge_d", comm);
    report.detail("triple_commutator_vanishes", triple);
    report.detail("star_commutative_on_samples", commutative);
    report.detail("triple_commutator_in_sampled_kernel", triple);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_generators() {
        let ar = FormsArena::new(2, 3).unwrap();
        let x1 = ar.var(1).unwrap();
        let x2 = ar.var(2).unwrap();
        let one = ar.constant(Q::one());
        assert_eq!(ar.fedosov(&one, &x2).unwrap(), x2);
        let expected = ar.parse("x1*x2 + 1/2 dx1^dx2").unwrap();
        assert_eq!(ar.fedosov(&x1, &x2).unwrap(), expected);
        assert_eq!(ar.fedosov_commutator(&x1, &x2).unwrap(), ar.parse("dx1^dx2").unwrap());
    }

    #[test]
    fn d_squares_to_zero_and_parse() {
        let ar = FormsArena::new(3, 4).unwrap();
        let f = ar.parse("x1^2*x2 dx3 + 3*x2*x3").unwrap();
        assert!(ar.d(&ar.d(&f)).is_zero());
        assert_eq!(ar.parse("dx2^dx1").unwrap(), ar.parse("-1 dx1^dx2").unwrap());
        assert_eq!(ar.parse("x1^2*x2 dx1^dx3").unwrap().to_string(), "1*x1^2*x2 dx1^dx3");
    }

    #[test]
    fn cap_overflow_is_an_error() {
        let ar = FormsArena::new(2, 2).unwrap();
        let a = ar.parse("x1^2").unwrap();
        assert!(matches!(ar.fedosov(&a, &ar.var(2).unwrap()), Err(Error::CapOverflow(_))));
    }

    #[test]
    fn samples() {
        let r = fedosov_identity_report(FormsArena::new(2, 3).unwrap(), 40, 0).unwrap();
        assert!(r.is_pass(), "{}", r.to_json());
        let r1 = fedosov_identity_report(FormsArena::new(1, 3).unwrap(), 20, 1).unwrap();
        assert!(r1.is_pass());
        assert_eq!(r1.details["star_commutative_on_samples"], true);
    }
}
