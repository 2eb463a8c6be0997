use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use super::poly::{GradedPolynomial, GradedVariable, Word};
use crate::grading::{GradingGroup, GroupElem};
use crate::rational::Q;

/// Permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { return out };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

pub fn inversions(p: &[usize]) -> usize {
    (0..p.len()).map(|i| (i + 1..p.len()).filter(|&j| p[i] > p[j]).count()).sum()
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lexicographic rank of a permutation of `0..n`.
pub fn permutation_rank(p: &[usize]) -> usize {
    let n = p.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = (i + 1..n).filter(|&j| p[j] < p[i]).count();
        rank += smaller * factorial(n - 1 - i);
    }
    rank
}

/// The multilinear space `P_n` for the degree sequence `(g_1..g_n)`:
/// variable `x_{i+1}` has degree `g_i`, and coordinates are indexed by
/// permutations `σ` (word `x_σ(1)…x_σ(n)`) in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultilinearPattern {
    pub group: GradingGroup,
    pub degrees: Vec<GroupElem>,
}

impl MultilinearPattern {
    pub fn new(group: GradingGroup, degrees: Vec<GroupElem>) -> Self {
        Self { group, degrees }
    }

    pub fn ungraded(n: usize) -> Self {
        let g = GradingGroup::trivial();
        Self { degrees: vec![g.identity(); n], group: g }
    }

    /// A ℤ₂ pattern from parities.
    pub fn parity(bits: &[u8]) -> Self {
        let g = GradingGroup::z2();
        let degrees = bits.iter().map(|&b| g.elem(&[b as i64]).unwrap()).collect();
        Self { group: g, degrees }
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn dim(&self) -> usize {
        factorial(self.n())
    }

    pub fn variables(&self) -> Vec<GradedVariable> {
        self.degrees.iter().enumerate().map(|(i, g)| GradedVariable::new(i + 1, g.clone())).collect()
    }

    pub fn word(&self, perm: &[usize]) -> Word {
        let vars = self.variables();
        perm.iter().map(|&i| vars[i].clone()).collect()
    }

    pub fn to_polynomial(&self, coords: &[Q]) -> GradedPolynomial {
        GradedPolynomial::from_terms(
            permutations(self.n()).into_iter().zip(coords).filter(|(_, c)| !c.is_zero()).map(|(p, c)| (self.word(&p), c.clone())),
        )
    }

    /// Coordinates of `f` when it lies in this pattern's span.
    pub fn coords(&self, f: &GradedPolynomial) -> Option<Vec<Q>> {
        let vars = self.variables();
        let pos: BTreeMap<&GradedVariable, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut out = vec![Q::zero(); self.dim()];
        for (w, c) in f.terms() {
            if w.len() != self.n() {
                return None;
            }
            let p: Vec<usize> = w.iter().map(|v| pos.get(v).copied()).collect::<Option<_>>()?;
            let distinct: BTreeSet<usize> = p.iter().copied().collect();
            if distinct.len() != p.len() {
                return None;
            }
            out[permutation_rank(&p)] += c;
        }
        Some(out)
    }

    /// The pattern with degrees sorted, and the permutation `π` with
    /// `sorted[k] = degrees[π[k]]`.
    pub fn canonical(&self) -> (Self, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.degrees[a].cmp(&self.degrees[b]).then(a.cmp(&b)));
        let degrees = order.iter().map(|&i| self.degrees[i].clone()).collect();
        (Self { group: self.group.clone(), degrees }, order)
    }

    /// Each permutation of variable positions acts on coordinates; this
    /// returns the coordinates of `f(x_τ(1), …, x_τ(n))`, a polynomial in
    /// the pattern with degrees permuted by `τ`.
    pub fn rename(&self, coords: &[Q], tau: &[usize]) -> Vec<Q> {
        let n = self.n();
        let mut out = vec![Q::zero(); self.dim()];
        for (p, c) in permutations(n).into_iter().zip(coords) {
            if c.is_zero() {
                continue;
            }
            let q: Vec<usize> = p.iter().map(|&i| tau[i]).collect();
            out[permutation_rank(&q)] += c;
        }
        out
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.degrees.iter().map(|g| g.to_string()).collect();
        format!("n={} [{}]", self.n(), parts.join(" "))
    }
}

/// Non-decreasing degree sequences of length `n` over `support`.
pub fn patterns_of_degree(group: &GradingGroup, support: &BTreeSet<GroupElem>, n: usize) -> Vec<MultilinearPattern> {
    let s: Vec<&GroupElem> = support.iter().collect();
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(s: &[&GroupElem], n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..s.len() {
            cur.push(i);
            rec(s, n, i, cur, out);
            cur.pop();
        }
    }
    let mut idx = Vec::new();
    rec(&s, n, 0, &mut cur, &mut idx);
    for seq in idx {
        out.push(MultilinearPattern::new(group.clone(), seq.into_iter().map(|i| s[i].clone()).collect()));
    }
    out
}

/// Every degree sequence of length `n` over `support` (all orders).
pub fn all_patterns_of_degree(group: &GradingGroup, support: &BTreeSet<GroupElem>, n: usize) -> Vec<MultilinearPattern> {
    let s: Vec<&GroupElem> = support.iter().collect();
    let mut seqs: Vec<Vec<GroupElem>> = vec![Vec::new()];
    for _ in 0..n {
        seqs = seqs
            .into_iter()
            .flat_map(|p| {
                s.iter().map(move |g| {
                    let mut q = p.clone();
                    q.push((*g).clone());
                    q
                })
            })
            .collect();
    }
    seqs.into_iter().map(|d| MultilinearPattern::new(group.clone(), d)).collect()
}

/// Full polarization of every multihomogeneous component of `f`.
///
/// A variable occurring `m > 1` times is replaced by `m` copies of the same
/// degree; the first copy keeps its index and the rest take fresh indices
/// above every index in `f`.
pub fn multilinearize(f: &GradedPolynomial) -> Vec<GradedPolynomial> {
    let mut components: BTreeMap<Vec<(GradedVariable, usize)>, GradedPolynomial> = BTreeMap::new();
    for (w, c) in f.terms() {
        let md: Vec<(GradedVariable, usize)> = GradedPolynomial::multidegree(w).into_iter().collect();
        components.entry(md).or_default().add_term(w.clone(), c.clone());
    }
    let mut next_index = f.max_index() + 1;
    let mut out = Vec::new();
    for (md, h) in components {
        if md.iter().all(|(_, m)| *m == 1) {
            out.push(h);
            continue;
        }
        let mut copies: BTreeMap<GradedVariable, Vec<GradedVariable>> = BTreeMap::new();
        for (v, m) in &md {
            let mut list = vec![v.clone()];
            for _ in 1..*m {
                list.push(GradedVariable::new(next_index, v.degree.clone()));
                next_index += 1;
            }
            copies.insert(v.clone(), list);
        }
        let mut result = GradedPolynomial::zero();
        for (w, c) in h.terms() {
            polarize_word(w, &copies, c, &mut result);
        }
        if !result.is_zero() {
            out.push(result);
        }
    }
    out
}

/// Adds every word obtained by assigning the occurrences of each variable
/// bijectively to its copies.
fn polarize_word(w: &Word, copies: &BTreeMap<GradedVariable, Vec<GradedVariable>>, c: &Q, out: &mut GradedPolynomial) {
    let positions: BTreeMap<&GradedVariable, Vec<usize>> = w.iter().enumerate().fold(BTreeMap::new(), |mut m, (i, v)| {
        m.entry(v).or_insert_with(Vec::new).push(i);
        m
    });
    let mut words = vec![w.clone()];
    for (v, pos) in positions {
        let list = &copies[v];
        let mut next = Vec::new();
        for base in &words {
            for perm in permutations(pos.len()) {
                let mut nw = base.clone();
                for (k, &p) in pos.iter().enumerate() {
                    nw[p] = list[perm[k]].clone();
                }
                next.push(nw);
            }
        }
        words = next;
    }
    for nw in words {
        out.add_term(nw, c.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn permutation_ranks_are_lexicographic() {
        for (r, p) in permutations(4).iter().enumerate() {
            assert_eq!(permutation_rank(p), r);
        }
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn polarization_examples() {
        let e = GradingGroup::trivial().identity();
        let x1 = GradedPolynomial::var(GradedVariable::new(1, e.clone()));
        let sq = x1.mul(&x1);
        let pol = multilinearize(&sq);
        assert_eq!(pol.len(), 1);
        let x2 = GradedPolynomial::var(GradedVariable::new(2, e.clone()));
        assert_eq!(pol[0], x1.mul(&x2).add(&x2.mul(&x1)));

        let cube = sq.mul(&x1);
        let pol = multilinearize(&cube);
        assert_eq!(pol[0].num_terms(), 6);
        assert!(pol[0].is_multilinear());

        let comm = x1.commutator(&x2);
        assert_eq!(multilinearize(&comm), vec![comm]);
    }

    #[test]
    fn pattern_coordinates_roundtrip() {
        let p = MultilinearPattern::parity(&[0, 1, 1]);
        let coords: Vec<Q> = (0..6).map(|i| q(i as i64 - 2)).collect();
        let f = p.to_polynomial(&coords);
        assert_eq!(p.coords(&f).unwrap(), coords);
        let (c, order) = MultilinearPattern::parity(&[1, 0, 1]).canonical();
        assert_eq!(c, p);
        assert_eq!(order, vec![1, 0, 2]);
    }

    #[test]
    fn pattern_enumeration() {
        let g = GradingGroup::z2();
        let support: BTreeSet<GroupElem> = g.elements().unwrap().into_iter().collect();
        assert_eq!(patterns_of_degree(&g, &support, 3).len(), 4);
        assert_eq!(all_patterns_of_degree(&g, &support, 3).len(), 8);
    }
}
