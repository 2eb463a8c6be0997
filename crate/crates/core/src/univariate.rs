//! Dense univariate polynomials over the rationals, coefficients low to high.

use num::{BigInt, One, Signed, ToPrimitive, Zero};

use crate::rational::{primitive_integer_row, Q};

pub type Poly = Vec<Q>;

pub fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn degree(p: &[Q]) -> Option<usize> {
    p.iter().rposition(|x| !x.is_zero())
}

pub fn mul(a: &[Q], b: &[Q]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn sub(a: &[Q], b: &[Q]) -> Poly {
    let n = a.len().max(b.len());
    let z = Q::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divmod(a: &[Q], b: &[Q]) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let mut r = trim(a.to_vec());
    let mut quo = vec![Q::zero(); r.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] / &b[db];
        quo[dr - db] = c.clone();
        for (i, x) in b.iter().enumerate() {
            r[dr - db + i] -= &c * x;
        }
        r = trim(r);
    }
    (trim(quo), r)
}

/// `(g, u, v)` with `u·a + v·b = g` and `g` monic.
pub fn ext_gcd(a: &[Q], b: &[Q]) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![Q::one()], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![Q::one()]);
    while degree(&r1).is_some() {
        let (quo, rem) = divmod(&r0, &r1);
        let s2 = sub(&s0, &mul(&quo, &s1));
        let t2 = sub(&t0, &mul(&quo, &t1));
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if let Some(d) = degree(&r0) {
        let lead = r0[d].clone();
        let scale = |p: Poly| -> Poly { p.into_iter().map(|x| x / &lead).collect() };
        (scale(r0), scale(s0), scale(t0))
    } else {
        (r0, s0, t0)
    }
}

pub fn eval(p: &[Q], x: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factorization {
    Irreducible,
    /// A proper monic factor.
    Reducible(Poly),
    /// The search limits were hit before a decision.
    Unknown,
}

const MAX_ABS: u64 = 1_000_000_000_000;
const MAX_COMBINATIONS: u64 = 200_000;

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > MAX_ABS {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small.into_iter().map(BigInt::from).collect())
}

fn to_monic(p: Poly) -> Poly {
    let d = degree(&p).unwrap();
    let lead = p[d].clone();
    p.into_iter().map(|x| x / &lead).collect()
}

/// Decides reducibility over `Q` of a polynomial of degree ≥ 1 by the
/// rational root test and Kronecker's method, within fixed limits.
pub fn factor_once(p: &[Q]) -> Factorization {
    let Some(deg) = degree(p) else { return Factorization::Unknown };
    if deg <= 1 {
        return Factorization::Irreducible;
    }
    let ints = primitive_integer_row(&p[..=deg]).expect("nonzero");
    let lead = ints[deg].clone();
    let c0 = ints[0].clone();
    if c0.is_zero() {
        let mut x = vec![Q::zero(); 2];
        x[1] = Q::one();
        return Factorization::Reducible(x);
    }
    let (Some(num_divs), Some(den_divs)) = (divisors(&c0), divisors(&lead)) else {
        return Factorization::Unknown;
    };
    for a in &num_divs {
        for b in &den_divs {
            for sign in [1, -1] {
                let r = Q::new(a * sign, b.clone());
                if eval(p, &r).is_zero() {
                    return Factorization::Reducible(vec![-r, Q::one()]);
                }
            }
        }
    }
    if deg <= 3 {
        return Factorization::Irreducible;
    }
    let pq: Poly = ints.iter().map(|x| Q::from_integer(x.clone())).collect();
    for s in 2..=deg / 2 {
        match kronecker(&pq, s) {
            Some(Some(f)) => return Factorization::Reducible(to_monic(f)),
            Some(None) => {}
            None => return Factorization::Unknown,
        }
    }
    Factorization::Irreducible
}

/// Searches for an integer factor of degree exactly `s`. `None` means the
/// limits were hit; `Some(None)` means no such factor exists.
fn kronecker(p: &[Q], s: usize) -> Option<Option<Poly>> {
    let mut points = Vec::new();
    let mut t = 0i64;
    while points.len() <= s {
        let x = Q::from_integer(BigInt::from(t));
        let v = eval(p, &x);
        if !v.is_zero() {
            points.push((x, v.to_integer()));
        }
        t = if t > 0 { -t } else { -t + 1 };
    }
    let mut choices: Vec<Vec<BigInt>> = Vec::new();
    let mut total: u64 = 1;
    for (i, (_, v)) in points.iter().enumerate() {
        let d = divisors(v)?;
        let opts: Vec<BigInt> = if i == 0 { d } else { d.iter().flat_map(|x| [x.clone(), -x]).collect() };
        total = total.checked_mul(opts.len() as u64)?;
        choices.push(opts);
    }
    if total > MAX_COMBINATIONS {
        return None;
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        let values: Vec<Q> = idx.iter().zip(&choices).map(|(&i, c)| Q::from_integer(c[i].clone())).collect();
        let g = interpolate(&points.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>(), &values);
        if degree(&g) == Some(s) && g.iter().all(|c| c.is_integer()) {
            let (_, r) = divmod(p, &g);
            if degree(&r).is_none() {
                return Some(Some(g));
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Some(None);
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn interpolate(xs: &[Q], ys: &[Q]) -> Poly {
    let mut out: Poly = Vec::new();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = vec![Q::one()];
        let mut denom = Q::one();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                basis = mul(&basis, &[-xj.clone(), Q::one()]);
                denom *= xi - xj;
            }
        }
        let term: Poly = basis.into_iter().map(|c| c * yi / &denom).collect();
        let n = out.len().max(term.len());
        out.resize(n, Q::zero());
        for (k, c) in term.into_iter().enumerate() {
            out[k] += c;
        }
    }
    trim(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn p(c: &[i64]) -> Poly {
        c.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn factoring() {
        assert_eq!(factor_once(&p(&[1, 0, 1])), Factorization::Irreducible);
        assert_eq!(factor_once(&p(&[2, -3, 1])), Factorization::Reducible(p(&[-1, 1])));
        // (x^2+1)(x^2+2)
        match factor_once(&p(&[2, 0, 3, 0, 1])) {
            Factorization::Reducible(f) => assert_eq!(degree(&f), Some(2)),
            other => panic!("{other:?}"),
        }
        // x^4 + 1 is irreducible over Q.
        assert_eq!(factor_once(&p(&[1, 0, 0, 0, 1])), Factorization::Irreducible);
    }

    #[test]
    fn gcd_identity() {
        let a = p(&[-1, 1]);
        let b = p(&[-2, 1]);
        let (g, u, v) = ext_gcd(&a, &b);
        assert_eq!(g, p(&[1]));
        let lhs = sub(&mul(&u, &a), &mul(&v.iter().map(|x| -x).collect::<Vec<_>>(), &b));
        assert_eq!(lhs, g);
    }
}
