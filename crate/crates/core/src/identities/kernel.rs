//! Multilinear identities of a finite-dimensional algebra at a fixed pattern.
//!
//! The evaluation map sends a multilinear polynomial in `P_n` to its values
//! on every admissible tuple of homogeneous basis elements. Each tuple and
//! each output coordinate contributes one row (indexed by permutations);
//! the kernel is the nullspace of all rows.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};

use num::{BigInt, Integer, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::pattern::{factorial, permutations, MultilinearPattern};
use super::poly::GradedPolynomial;
use crate::error::{Error, Result};
use crate::grading::{FiniteGradedAlgebra, GradingGroup, GroupElem};
use crate::linalg::{IntEchelon, Subspace};
use crate::par::{self, Exec};
use crate::rational::{fmt_q, primitive_integer_row, Q};

/// Resource limits for kernel computations.
#[derive(Clone, Copy, Debug)]
pub struct KernelConfig {
    pub max_degree: usize,
    /// Bound on `n! ·` (number of admissible tuples).
    pub max_ops: u64,
    pub exec: Exec,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { max_degree: 6, max_ops: 100_000_000, exec: Exec::default() }
    }
}

impl KernelConfig {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.max_degree {
            return Err(Error::Budget(format!("degree {n} exceeds the limit {}", self.max_degree)));
        }
        Ok(())
    }
}

/// `P_n ∩ Id(A)` for one pattern, as a canonical basis of coordinate
/// vectors over the permutation basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityKernel {
    pub pattern: MultilinearPattern,
    pub source: String,
    pub basis: Vec<Vec<Q>>,
    pub codimension: usize,
    /// Admissible tuples evaluated (zero for oracles).
    pub tuples: u64,
}

impl IdentityKernel {
    fn from_rows(pattern: &MultilinearPattern, source: String, rows: Vec<Vec<Q>>, tuples: u64) -> Self {
        let dim = pattern.dim();
        let mut ech = crate::linalg::Echelon::new(dim);
        for r in &rows {
            ech.insert(r);
        }
        let basis = ech.nullspace();
        Self { pattern: pattern.clone(), source, codimension: dim - basis.len(), basis, tuples }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn subspace(&self) -> Subspace {
        Subspace::span(self.pattern.dim(), self.basis.iter().cloned())
    }

    pub fn kernel_basis(&self) -> Vec<GradedPolynomial> {
        self.basis.iter().map(|v| self.pattern.to_polynomial(v)).collect()
    }

    pub fn contains(&self, coords: &[Q]) -> bool {
        self.subspace().contains(coords)
    }

    pub fn to_json(&self) -> Value {
        let perms = permutations(self.pattern.n());
        let kernel: Vec<Value> = self
            .basis
            .iter()
            .map(|v| {
                let terms: Vec<Value> = perms
                    .iter()
                    .zip(v)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(p, c)| json!({"word": p.iter().map(|i| i + 1).collect::<Vec<_>>(), "coefficient": fmt_q(c)}))
                    .collect();
                Value::Array(terms)
            })
            .collect();
        json!({
            "pattern": self.pattern.degrees.iter().map(|g| g.coords().to_vec()).collect::<Vec<_>>(),
            "n": self.pattern.n(),
            "source": self.source,
            "kernel_dim": self.basis.len(),
            "codimension": self.codimension,
            "kernel": kernel,
        })
    }
}

/// Anything whose multilinear identities can be computed pattern by pattern.
pub trait IdentitySource: Sync {
    fn name(&self) -> String;
    fn group(&self) -> &GradingGroup;
    /// Degrees with nonzero homogeneous component.
    fn support(&self) -> BTreeSet<GroupElem>;
    fn kernel(&self, pattern: &MultilinearPattern, cfg: &KernelConfig) -> Result<IdentityKernel>;
}

fn check_group(pattern: &MultilinearPattern, group: &GradingGroup) -> Result<()> {
    if &pattern.group != group {
        return Err(Error::GroupMismatch(format!("pattern graded by {:?}, source graded by {:?}", pattern.group, group)));
    }
    Ok(())
}

/// An algebra with the tables the kernel engine needs precomputed.
pub struct PreparedAlgebra<'a> {
    alg: &'a FiniteGradedAlgebra,
    /// `may_meet[i]` has bit `j` set unless `b_i A b_j = 0 = b_j A b_i`
    /// structurally, in which case no word containing both is nonzero.
    may_meet: Vec<Vec<u64>>,
    int_table: Option<Vec<Vec<(usize, i64)>>>,
}

fn bit(set: &[u64], j: usize) -> bool {
    set[j / 64] >> (j % 64) & 1 == 1
}

impl<'a> PreparedAlgebra<'a> {
    pub fn new(alg: &'a FiniteGradedAlgebra) -> Self {
        let n = alg.dim();
        let words = n.div_ceil(64).max(1);
        // reach[i] = structural support of b_i·A; hit[j] = {s : b_s b_j ≠ 0}.
        let mut reach = vec![vec![0u64; words]; n];
        let mut hit = vec![vec![0u64; words]; n];
        for (i, j, k, _) in alg.constants() {
            reach[i][k / 64] |= 1 << (k % 64);
            hit[j][i / 64] |= 1 << (i % 64);
        }
        let mut zero_between = vec![vec![0u64; words]; n];
        for i in 0..n {
            for j in 0..n {
                if reach[i].iter().zip(&hit[j]).all(|(a, b)| a & b == 0) {
                    zero_between[i][j / 64] |= 1 << (j % 64);
                }
            }
        }
        let mut may_meet = vec![vec![0u64; words]; n];
        for i in 0..n {
            for j in 0..n {
                if !(bit(&zero_between[i], j) && bit(&zero_between[j], i)) {
                    may_meet[i][j / 64] |= 1 << (j % 64);
                }
            }
        }
        let int_table = (0..n * n)
            .map(|ij| {
                alg.product(ij / n, ij % n)
                    .iter()
                    .map(|(k, c)| if c.is_integer() { c.to_integer().to_i64().map(|x| (*k, x)) } else { None })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>();
        Self { alg, may_meet, int_table }
    }

    pub fn algebra(&self) -> &FiniteGradedAlgebra {
        self.alg
    }

    pub(crate) fn may_meet(&self, i: usize, j: usize) -> bool {
        bit(&self.may_meet[i], j)
    }

    fn candidates(&self, pattern: &MultilinearPattern) -> Vec<Vec<usize>> {
        pattern.degrees.iter().map(|g| self.alg.indices_of_degree(g)).collect()
    }

    /// Counts admissible tuples, giving up above `limit`.
    pub(crate) fn count_tuples(&self, cands: &[Vec<usize>], limit: u64) -> Option<u64> {
        let mut count = 0u64;
        let mut cur = Vec::with_capacity(cands.len());
        let ok = self.walk(cands, &mut cur, &mut |_| {
            count += 1;
            count <= limit
        });
        ok.then_some(count)
    }

    /// Depth-first walk over admissible tuples extending `cur`, in
    /// lexicographic order. Stops early when `visit` returns false.
    pub(crate) fn walk(&self, cands: &[Vec<usize>], cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == cands.len() {
            return visit(cur);
        }
        for &c in &cands[cur.len()] {
            if cur.iter().all(|&p| self.may_meet(p, c)) {
                cur.push(c);
                let go_on = self.walk(cands, cur, visit);
                cur.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }

    fn prefixes(&self, cands: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let n = cands.len();
        let mut len = 0;
        let mut prefixes = vec![Vec::new()];
        while len < n && prefixes.len() < 64 {
            len += 1;
            let sub = &cands[..len];
            let mut next = Vec::new();
            for p in &prefixes {
                for &c in &sub[len - 1] {
                    if p.iter().all(|&x| self.may_meet(x, c)) {
                        let mut q = p.clone();
                        q.push(c);
                        next.push(q);
                    }
                }
            }
            prefixes = next;
        }
        prefixes
    }

    pub fn identity_kernel(&self, pattern: &MultilinearPattern, cfg: &KernelConfig) -> Result<IdentityKernel> {
        check_group(pattern, self.alg.group())?;
        let n = pattern.n();
        cfg.check_degree(n)?;
        let width = factorial(n);
        let cands = self.candidates(pattern);
        let limit = cfg.max_ops / width as u64;
        let tuples = self
            .count_tuples(&cands, limit)
            .ok_or_else(|| Error::Budget(format!("{}: more than {limit} admissible tuples at {}", self.alg.dim(), pattern.describe())))?;
        let name = format!("algebra(dim {})", self.alg.dim());
        if n == 0 {
            let rows = if self.alg.dim() == 0 { Vec::new() } else { vec![vec![Q::from_integer(1.into())]] };
            return Ok(IdentityKernel::from_rows(pattern, name, rows, 1));
        }
        let full = AtomicBool::new(false);
        let work = |prefix: Vec<usize>| -> Vec<Vec<BigInt>> {
            let mut sink = RowSink::new(width);
            let mut cur = prefix;
            let mut values = Vec::with_capacity(width);
            self.walk(&cands, &mut cur, &mut |t| {
                if full.load(Ordering::Relaxed) {
                    return false;
                }
                self.eval_tuple(t, &mut values, &mut sink);
                if sink.ech.is_full() {
                    full.store(true, Ordering::Relaxed);
                    return false;
                }
                true
            });
            sink.ech.rows().to_vec()
        };
        let prefixes = self.prefixes(&cands);
        let mut global = IntEchelon::new(width);
        match cfg.exec.is_parallel() {
            true => {
                for rows in par::map(cfg.exec, prefixes, work) {
                    for r in rows {
                        global.insert(r);
                    }
                }
            }
            false => {
                // One sink across all chunks avoids redundant elimination.
                let mut sink = RowSink::new(width);
                let mut values = Vec::with_capacity(width);
                for mut cur in prefixes {
                    let go_on = self.walk(&cands, &mut cur, &mut |t| {
                        self.eval_tuple(t, &mut values, &mut sink);
                        !sink.ech.is_full()
                    });
                    if !go_on {
                        break;
                    }
                }
                global = sink.ech;
            }
        }
        let rows = global.to_rational_rows();
        Ok(IdentityKernel::from_rows(pattern, name, rows, tuples))
    }

    /// Evaluates every word of the pattern at tuple `t` and feeds the rows.
    fn eval_tuple(&self, t: &[usize], values: &mut Vec<Sparse>, sink: &mut RowSink) {
        values.clear();
        if let Some(table) = &self.int_table {
            let mut ivals: Vec<Vec<(usize, i128)>> = Vec::with_capacity(values.capacity());
            if words_int(table, self.alg.dim(), t, 0, 0, None, &mut ivals) {
                sink.push_int(&ivals);
                return;
            }
        }
        words_q(self.alg, t, 0, 0, None, values);
        sink.push_q(values);
    }
}

type Sparse = Vec<(usize, Q)>;

fn mul_int(table: &[Vec<(usize, i64)>], dim: usize, v: &[(usize, i128)], j: usize) -> Option<Vec<(usize, i128)>> {
    let mut acc: BTreeMap<usize, i128> = BTreeMap::new();
    for &(s, c) in v {
        for &(k, d) in &table[s * dim + j] {
            let e = acc.entry(k).or_insert(0);
            *e = e.checked_add(c.checked_mul(d as i128)?)?;
        }
    }
    Some(acc.into_iter().filter(|(_, c)| *c != 0).collect())
}

/// Leaves of the prefix tree in lexicographic permutation order. `prefix`
/// is `None` at the root (the empty product).
fn words_int(
    table: &[Vec<(usize, i64)>],
    dim: usize,
    t: &[usize],
    depth: usize,
    used: u32,
    prefix: Option<&[(usize, i128)]>,
    out: &mut Vec<Vec<(usize, i128)>>,
) -> bool {
    let n = t.len();
    if depth == n {
        out.push(prefix.map(<[_]>::to_vec).unwrap_or_default());
        return true;
    }
    for i in 0..n {
        if used >> i & 1 == 1 {
            continue;
        }
        let next = match prefix {
            None => Some(vec![(t[i], 1)]),
            Some(p) => mul_int(table, dim, p, t[i]),
        };
        let Some(next) = next else { return false };
        if next.is_empty() {
            let skip = factorial(n - depth - 1);
            out.extend(std::iter::repeat_with(Vec::new).take(skip));
            continue;
        }
        if !words_int(table, dim, t, depth + 1, used | 1 << i, Some(&next), out) {
            return false;
        }
    }
    true
}

fn mul_q(a: &FiniteGradedAlgebra, v: &[(usize, Q)], j: usize) -> Sparse {
    let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
    for (s, c) in v {
        for (k, d) in a.product(*s, j) {
            *acc.entry(*k).or_insert_with(Q::zero) += c * d;
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

fn words_q(a: &FiniteGradedAlgebra, t: &[usize], depth: usize, used: u32, prefix: Option<&[(usize, Q)]>, out: &mut Vec<Sparse>) {
    let n = t.len();
    if depth == n {
        out.push(prefix.map(<[_]>::to_vec).unwrap_or_default());
        return;
    }
    for i in 0..n {
        if used >> i & 1 == 1 {
            continue;
        }
        let next = match prefix {
            None => vec![(t[i], Q::from_integer(1.into()))],
            Some(p) => mul_q(a, p, t[i]),
        };
        if next.is_empty() {
            out.extend(std::iter::repeat_with(Vec::new).take(factorial(n - depth - 1)));
            continue;
        }
        words_q(a, t, depth + 1, used | 1 << i, Some(&next), out);
    }
}

/// Deduplicating front end to the integer echelon.
struct RowSink {
    width: usize,
    ech: IntEchelon,
    seen_int: HashSet<Vec<i128>>,
    seen_big: HashSet<Vec<BigInt>>,
}

impl RowSink {
    fn new(width: usize) -> Self {
        Self { width, ech: IntEchelon::new(width), seen_int: HashSet::new(), seen_big: HashSet::new() }
    }

    fn push_int(&mut self, values: &[Vec<(usize, i128)>]) {
        let mut rows: BTreeMap<usize, Vec<i128>> = BTreeMap::new();
        for (sigma, v) in values.iter().enumerate() {
            for &(k, c) in v {
                rows.entry(k).or_insert_with(|| vec![0; self.width])[sigma] = c;
            }
        }
        for (_, mut row) in rows {
            let g = row.iter().fold(0i128, |acc, &x| acc.gcd(&x));
            let lead = row.iter().find(|&&x| x != 0).copied().unwrap_or(1);
            let g = if lead < 0 { -g } else { g };
            for x in row.iter_mut() {
                *x /= g;
            }
            if self.seen_int.insert(row.clone()) {
                self.ech.insert(row.into_iter().map(BigInt::from).collect());
            }
        }
    }

    fn push_q(&mut self, values: &[Sparse]) {
        let mut rows: BTreeMap<usize, Vec<Q>> = BTreeMap::new();
        for (sigma, v) in values.iter().enumerate() {
            for (k, c) in v {
                rows.entry(*k).or_insert_with(|| vec![Q::zero(); self.width])[sigma] = c.clone();
            }
        }
        for (_, row) in rows {
            if let Some(r) = primitive_integer_row(&row) {
                if self.seen_big.insert(r.clone()) {
                    self.ech.insert(r);
                }
            }
        }
    }
}

impl IdentitySource for PreparedAlgebra<'_> {
    fn name(&self) -> String {
        format!("algebra(dim {})", self.alg.dim())
    }

    fn group(&self) -> &GradingGroup {
        self.alg.group()
    }

    fn support(&self) -> BTreeSet<GroupElem> {
        self.alg.supported_degrees()
    }

    fn kernel(&self, pattern: &MultilinearPattern, cfg: &KernelConfig) -> Result<IdentityKernel> {
        self.identity_kernel(pattern, cfg)
    }
}

impl IdentitySource for FiniteGradedAlgebra {
    fn name(&self) -> String {
        format!("algebra(dim {})", self.dim())
    }

    fn group(&self) -> &GradingGroup {
        FiniteGradedAlgebra::group(self)
    }

    fn support(&self) -> BTreeSet<GroupElem> {
        self.supported_degrees()
    }

    fn kernel(&self, pattern: &MultilinearPattern, cfg: &KernelConfig) -> Result<IdentityKernel> {
        PreparedAlgebra::new(self).identity_kernel(pattern, cfg)
    }
}

/// `P_n ∩ Id(A)` with the default limits.
pub fn identity_kernel(pattern: &MultilinearPattern, a: &FiniteGradedAlgebra) -> Result<IdentityKernel> {
    a.kernel(pattern, &KernelConfig::default())
}

/// Identities of the infinite-dimensional Grassmann algebra `E`, trivially
/// or canonically ℤ₂-graded.
///
/// A multilinear word evaluated on basis monomials is nonzero only when the
/// supports are pairwise disjoint, and then equals `±` the product in
/// increasing order, with the sign fixed by the parities of the supports.
/// So one row per admissible parity vector suffices.
#[derive(Clone, Debug)]
pub struct GrassmannOracle {
    group: GradingGroup,
}

impl GrassmannOracle {
    pub fn ungraded() -> Self {
        Self { group: GradingGroup::trivial() }
    }

    pub fn canonical() -> Self {
        Self { group: GradingGroup::z2() }
    }

    fn parity_vectors(&self, pattern: &MultilinearPattern) -> Vec<Vec<bool>> {
        let n = pattern.n();
        if self.group.is_trivial() {
            (0..1u32 << n).map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect()
        } else {
            vec![pattern.degrees.iter().map(|g| g.coords()[0] == 1).collect()]
        }
    }
}

/// `(-1)^{#{s<t : σ(s) > σ(t), both odd}}`.
pub fn parity_sign(perm: &[usize], odd: &[bool]) -> bool {
    let mut count = 0;
    for s in 0..perm.len() {
        for t in s + 1..perm.len() {
            if perm[s] > perm[t] && odd[perm[s]] && odd[perm[t]] {
                count += 1;
            }
        }
    }
    count % 2 == 1
}

impl IdentitySource for GrassmannOracle {
    fn name(&self) -> String {
        if self.group.is_trivial() {
            "grassmann(ungraded)".into()
        } else {
            "grassmann(canonical Z2)".into()
        }
    }

    fn group(&self) -> &GradingGroup {
        &self.group
    }

    fn support(&self) -> BTreeSet<GroupElem> {
        self.group.elements().unwrap().into_iter().collect()
    }

    fn kernel(&self, pattern: &MultilinearPattern, cfg: &KernelConfig) -> Result<IdentityKernel> {
        check_group(pattern, &self.group)?;
        cfg.check_degree(pattern.n())?;
        let perms = permutations(pattern.n());
        let rows: Vec<Vec<Q>> = self
            .parity_vectors(pattern)
            .into_iter()
            .map(|odd| perms.iter().map(|p| Q::from_integer(if parity_sign(p, &odd) { (-1).into() } else { 1.into() })).collect())
            .collect();
        Ok(IdentityKernel::from_rows(pattern, self.name(), rows, 0))
    }
}

pub fn grassmann_oracle(pattern: &MultilinearPattern) -> Result<IdentityKernel> {
    let oracle = if pattern.group.is_trivial() { GrassmannOracle::ungraded() } else { GrassmannOracle::canonical() };
    oracle.kernel(pattern, &KernelConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::rational::q;

    #[test]
    fn base_field_is_commutative() {
        let k = identity_kernel(&MultilinearPattern::ungraded(2), &base_field()).unwrap();
        assert_eq!(k.basis, vec![vec![q(1), q(-1)]]);
        assert_eq!(k.codimension, 1);
    }

    #[test]
    fn grassmann_truncation_matches_oracle() {
        let e6 = build_grassmann_truncated(6).trivialize();
        let k = identity_kernel(&MultilinearPattern::ungraded(3), &e6).unwrap();
        assert_eq!(k.codimension, 4);
        assert_eq!(k.basis, grassmann_oracle(&MultilinearPattern::ungraded(3)).unwrap().basis);
    }

    #[test]
    fn odd_odd_anticommute() {
        let e4 = build_grassmann_truncated(4);
        let p = MultilinearPattern::parity(&[1, 1]);
        assert!(identity_kernel(&p, &e4).unwrap().contains(&[q(1), q(1)]));
        assert_eq!(grassmann_oracle(&p).unwrap().basis, vec![vec![q(1), q(1)]]);
    }

    #[test]
    fn oracle_codimensions() {
        let c: Vec<usize> = (1..=4).map(|n| grassmann_oracle(&MultilinearPattern::ungraded(n)).unwrap().codimension).collect();
        assert_eq!(c, vec![1, 2, 4, 8]);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let p = MultilinearPattern::ungraded(4);
        let seq = m2.kernel(&p, &KernelConfig::default().with_exec(Exec::Sequential)).unwrap();
        let par = m2.kernel(&p, &KernelConfig::default().with_exec(Exec::Parallel)).unwrap();
        assert_eq!(seq.basis, par.basis);
    }

    #[test]
    fn rational_constants_take_the_slow_path() {
        let c = build_clifford(&[crate::rational::qr(1, 3), q(-2)]).unwrap().trivialize();
        let k = identity_kernel(&MultilinearPattern::ungraded(2), &c).unwrap();
        assert_eq!(k.codimension, 2);
    }

    #[test]
    fn budget_is_enforced() {
        let m3 = build_matrix_algebra(3, None).unwrap();
        let cfg = KernelConfig { max_ops: 1000, ..KernelConfig::default() };
        assert!(matches!(m3.kernel(&MultilinearPattern::ungraded(4), &cfg), Err(Error::Budget(_))));
        let cfg = KernelConfig { max_degree: 2, ..KernelConfig::default() };
        assert!(matches!(m3.kernel(&MultilinearPattern::ungraded(3), &cfg), Err(Error::Budget(_))));
    }

    #[test]
    fn group_mismatch() {
        let e2 = build_grassmann_truncated(2);
        assert!(matches!(identity_kernel(&MultilinearPattern::ungraded(2), &e2), Err(Error::GroupMismatch(_))));
    }
}
