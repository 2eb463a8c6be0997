use std::collections::BTreeSet;

use serde_json::json;

use crate::error::{Error, Result};
use crate::report::{Verdict, VerificationReport};

/// A set of points, as a bitmask over point indices.
pub type PointSet = u64;

pub fn members(s: PointSet) -> Vec<usize> {
    (0..64).filter(|&i| s >> i & 1 == 1).collect()
}

pub fn size(s: PointSet) -> usize {
    s.count_ones() as usize
}

fn order_key(s: &PointSet) -> (u32, Vec<usize>) {
    (s.count_ones(), members(*s))
}

/// A finite topological space. Opens are kept sorted by size, then
/// lexicographically by their sorted point indices, so open indices are
/// canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteTopology {
    points: Vec<String>,
    opens: Vec<PointSet>,
}

impl FiniteTopology {
    /// Assembles a topology without checking the axioms; see
    /// [`validate_topology`] and [`FiniteTopology::checked`].
    pub fn new(points: Vec<String>, opens: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let n = points.len();
        if n > 64 {
            return Err(Error::Structural("at most 64 points are supported".into()));
        }
        let mut set = BTreeSet::new();
        for o in opens {
            let mut mask = 0u64;
            for i in o {
                if i >= n {
                    return Err(Error::Structural(format!("open refers to point {i}, only {n} points")));
                }
                mask |= 1 << i;
            }
            set.insert(mask);
        }
        Ok(Self::from_masks(points, set))
    }

    fn from_masks(points: Vec<String>, masks: impl IntoIterator<Item = PointSet>) -> Self {
        let mut opens: Vec<PointSet> = masks.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        opens.sort_by_key(order_key);
        Self { points, opens }
    }

    /// Like [`FiniteTopology::new`] but rejects sets that are not topologies.
    pub fn checked(points: Vec<String>, opens: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let t = Self::new(points, opens)?;
        if let Some(w) = t.axiom_violation() {
            return Err(Error::Structural(format!("not a topology: {w}")));
        }
        Ok(t)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn full(&self) -> PointSet {
        if self.points.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.points.len()) - 1
        }
    }

    pub fn opens(&self) -> &[PointSet] {
        &self.opens
    }

    pub fn n_opens(&self) -> usize {
        self.opens.len()
    }

    pub fn open(&self, i: usize) -> PointSet {
        self.opens[i]
    }

    pub fn index_of(&self, s: PointSet) -> Option<usize> {
        self.opens.iter().position(|&o| o == s)
    }

    pub fn is_open(&self, s: PointSet) -> bool {
        self.index_of(s).is_some()
    }

    pub fn empty_index(&self) -> usize {
        self.index_of(0).expect("topology contains the empty set")
    }

    pub fn full_index(&self) -> usize {
        self.index_of(self.full()).expect("topology contains the whole space")
    }

    /// Intersection of all opens containing `x`.
    pub fn minimal_open(&self, x: usize) -> PointSet {
        self.opens.iter().filter(|&&o| o >> x & 1 == 1).fold(self.full(), |acc, &o| acc & o)
    }

    pub fn minimal_open_index(&self, x: usize) -> usize {
        self.index_of(self.minimal_open(x)).expect("valid topology")
    }

    /// Indices of opens contained in open `u` (including `u`).
    pub fn subopens(&self, u: usize) -> Vec<usize> {
        let s = self.opens[u];
        (0..self.opens.len()).filter(|&i| self.opens[i] & !s == 0).collect()
    }

    pub fn contains(&self, outer: usize, inner: usize) -> bool {
        self.opens[inner] & !self.opens[outer] == 0
    }

    pub fn intersection_index(&self, a: usize, b: usize) -> Option<usize> {
        self.index_of(self.opens[a] & self.opens[b])
    }

    pub fn describe(&self, s: PointSet) -> Vec<String> {
        members(s).into_iter().map(|i| self.points[i].clone()).collect()
    }

    pub fn axiom_violation(&self) -> Option<String> {
        if !self.is_open(0) {
            return Some("empty set is not open".into());
        }
        if !self.is_open(self.full()) {
            return Some("whole space is not open".into());
        }
        for &a in &self.opens {
            for &b in &self.opens {
                if !self.is_open(a | b) {
                    return Some(format!("union of {:?} and {:?} is missing", self.describe(a), self.describe(b)));
                }
                if !self.is_open(a & b) {
                    return Some(format!("intersection of {:?} and {:?} is missing", self.describe(a), self.describe(b)));
                }
            }
        }
        None
    }

    /// `x ≤ y` iff `x ∈ U_y` (every open containing `y` contains `x`).
    pub fn specializes(&self, x: usize, y: usize) -> bool {
        self.minimal_open(y) >> x & 1 == 1
    }

    /// Connected components of the subspace `s`, as point sets in
    /// order of their smallest point.
    pub fn components(&self, s: PointSet) -> Vec<PointSet> {
        let pts = members(s);
        let mut comps: Vec<PointSet> = Vec::new();
        let mut seen = 0u64;
        for &p in &pts {
            if seen >> p & 1 == 1 {
                continue;
            }
            let mut comp = 1u64 << p;
            let mut stack = vec![p];
            while let Some(x) = stack.pop() {
                for &y in &pts {
                    if comp >> y & 1 == 0 && (self.specializes(x, y) || self.specializes(y, x)) {
                        comp |= 1 << y;
                        stack.push(y);
                    }
                }
            }
            seen |= comp;
            comps.push(comp);
        }
        comps
    }

    fn named(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'a' + (i % 26) as u8) as char).to_string() + &"'".repeat(i / 26)).collect()
    }

    pub fn point() -> Self {
        Self::from_masks(vec!["p".into()], [0, 1])
    }

    pub fn sierpinski() -> Self {
        Self::from_masks(vec!["a".into(), "b".into()], [0, 0b01, 0b11])
    }

    pub fn discrete(n: usize) -> Self {
        Self::from_masks(Self::named(n), 0..1u64 << n)
    }

    pub fn indiscrete(n: usize) -> Self {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self::from_masks(Self::named(n), [0, full])
    }

    /// Four points `a, b, x, y` with opens `∅, {a}, {b}, {a,b}, {a,b,x}, {a,b,y}, X`.
    pub fn pseudocircle() -> Self {
        let pts = ["a", "b", "x", "y"].iter().map(|s| s.to_string()).collect();
        Self::from_masks(pts, [0, 0b0001, 0b0010, 0b0011, 0b0111, 0b1011, 0b1111])
    }

    /// The topology whose opens are the down-sets of a preorder given by
    /// `le[x][y]` (`x ≤ y`), so that `U_y = {x : x ≤ y}`.
    pub fn from_preorder(le: &[Vec<bool>]) -> Self {
        let n = le.len();
        let opens = (0..1u64 << n).filter(|&s| members(s).into_iter().all(|y| (0..n).all(|x| !le[x][y] || s >> x & 1 == 1)));
        Self::from_masks(Self::named(n), opens)
    }
}

/// Closure axioms plus the minimal open neighbourhood of each point.
pub fn validate_topology(t: &FiniteTopology) -> VerificationReport {
    let mut report = match t.axiom_violation() {
        Some(w) => VerificationReport::fail("validate_topology", json!({"axiom": w})),
        None => VerificationReport::new("validate_topology", Verdict::Pass),
    };
    report.detail("points", t.n_points());
    report.detail("opens", t.n_opens());
    if report.is_pass() {
        let nbhd: serde_json::Map<String, serde_json::Value> =
            (0..t.n_points()).map(|x| (t.points()[x].clone(), json!(t.describe(t.minimal_open(x))))).collect();
        report.detail("minimal_open_neighbourhoods", serde_json::Value::Object(nbhd));
    }
    report
}

/// One representative topology per homeomorphism class on `n ≤ 5` points.
pub fn homeomorphism_classes(n: usize) -> Vec<FiniteTopology> {
    assert!(n <= 5, "enumeration is exponential in n");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|(x, y)| x != y).collect();
    let perms = crate::identities::permutations(n);
    let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut out = Vec::new();
    for bits in 0..1u64 << pairs.len() {
        let mut le = vec![vec![false; n]; n];
        for (x, row) in le.iter_mut().enumerate() {
            row[x] = true;
        }
        for (k, &(x, y)) in pairs.iter().enumerate() {
            le[x][y] = bits >> k & 1 == 1;
        }
        let transitive = (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| !(le[x][y] && le[y][z]) || le[x][z])));
        if !transitive {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut v = Vec::with_capacity(n * n);
                for x in 0..n {
                    for y in 0..n {
                        v.push(le[p[x]][p[y]]);
                    }
                }
                v
            })
            .min()
            .unwrap_or_default();
        if seen.insert(canon.clone()) {
            let le: Vec<Vec<bool>> = canon.chunks(n.max(1)).take(n).map(|r| r.to_vec()).collect();
            out.push(FiniteTopology::from_preorder(&le));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = FiniteTopology::sierpinski();
        assert!(validate_topology(&s).is_pass());
        assert_eq!(s.minimal_open(0), 0b01);
        assert_eq!(s.minimal_open(1), 0b11);
        let bad =
            FiniteTopology::new(["a", "b", "c"].iter().map(|s| s.to_string()).collect(), vec![vec![], vec![0], vec![1], vec![0, 1, 2]])
                .unwrap();
        assert!(!validate_topology(&bad).is_pass());
        let d = FiniteTopology::discrete(3);
        assert!((0..3).all(|x| d.minimal_open(x) == 1 << x));
        assert!(FiniteTopology::new(vec!["a".into()], vec![vec![1]]).is_err());
    }

    #[test]
    fn class_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| homeomorphism_classes(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 9, 33]);
        for t in homeomorphism_classes(3) {
            assert!(t.axiom_violation().is_none());
        }
    }

    #[test]
    fn components_of_pseudocircle() {
        let t = FiniteTopology::pseudocircle();
        assert!(validate_topology(&t).is_pass());
        assert_eq!(t.components(0b0011).len(), 2);
        assert_eq!(t.components(0b1111).len(), 1);
        assert_eq!(t.components(0).len(), 0);
    }
}
