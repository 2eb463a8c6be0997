use std::collections::BTreeMap;

use num::{One, Zero};
use serde_json::{json, Value};

use super::kernel::{IdentitySource, KernelConfig};
use super::pattern::{permutation_rank, MultilinearPattern};
use super::poly::GradedVariable;
use crate::error::{Error, Result};
use crate::grading::FiniteGradedAlgebra;
use crate::linalg::{Echelon, Subspace};
use crate::rational::{fmt_q, Q};

/// A word over the chosen variables, as indices into the variable list.
pub type VarWord = Vec<usize>;

/// Degree-`≤ d` part of the relatively free algebra on finitely many variables.
#[derive(Clone, Debug)]
pub struct RelativelyFree {
    pub variables: Vec<GradedVariable>,
    pub degree_bound: usize,
    /// Basis words, by length then lexicographically.
    pub basis: Vec<VarWord>,
    /// For each multidegree: the reduction data used to express words.
    blocks: BTreeMap<Vec<usize>, Block>,
}

#[derive(Clone, Debug)]
struct Block {
    pattern_dim: usize,
    kernel: Subspace,
    /// Rows `[residual(b) | e_b]` for the basis words of this block.
    solver: Echelon,
    /// Positions in `RelativelyFree::basis` of this block's basis words.
    members: Vec<usize>,
    /// Pattern-position of each copy, per variable.
    copy_slots: Vec<Vec<usize>>,
}

fn multidegree(w: &[usize], nvars: usize) -> Vec<usize> {
    let mut m = vec![0; nvars];
    for &v in w {
        m[v] += 1;
    }
    m
}

/// Words of length `len` over `nvars` letters, lexicographically.
fn words(nvars: usize, len: usize) -> Vec<VarWord> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..nvars).map(move |v| {
                    let mut x = w.clone();
                    x.push(v);
                    x
                })
            })
            .collect();
    }
    out
}

impl Block {
    /// The full polarization of `w` in the block's pattern.
    fn linearize(&self, w: &[usize]) -> Vec<Q> {
        let occ: Vec<Vec<usize>> = {
            let mut o = vec![Vec::new(); self.copy_slots.len()];
            for (pos, &v) in w.iter().enumerate() {
                o[v].push(pos);
            }
            o
        };
        let mut out = vec![Q::zero(); self.pattern_dim];
        let mut word = vec![0usize; w.len()];
        self.assign(&occ, 0, &mut word, &mut out);
        out
    }

    fn assign(&self, occ: &[Vec<usize>], v: usize, word: &mut Vec<usize>, out: &mut [Q]) {
        if v == occ.len() {
            out[permutation_rank(word)] += Q::one();
            return;
        }
        for perm in super::pattern::permutations(occ[v].len()) {
            for (k, &pos) in occ[v].iter().enumerate() {
                word[pos] = self.copy_slots[v][perm[k]];
            }
            self.assign(occ, v + 1, word, out);
        }
    }

    fn residual(&self, w: &[usize]) -> Vec<Q> {
        self.kernel.reduce(&self.linearize(w))
    }

    /// Coordinates of `w` over the block's basis words.
    fn express(&self, w: &[usize]) -> Vec<Q> {
        let r = self.residual(w);
        let k = self.members.len();
        let mut aug = r;
        aug.extend(std::iter::repeat_n(Q::zero(), k));
        let red = self.solver.reduce(&aug);
        debug_assert!(red[..self.pattern_dim].iter().all(Zero::is_zero));
        red[self.pattern_dim..].iter().map(|x| -x.clone()).collect()
    }
}

/// Builds the truncation by linearizing each word into its multidegree's
/// pattern and reducing modulo the identity kernel there.
pub fn relatively_free_truncation(
    source: &dyn IdentitySource,
    variables: &[GradedVariable],
    d: usize,
    cfg: &KernelConfig,
) -> Result<RelativelyFree> {
    let group = source.group().clone();
    if let Some(v) = variables.iter().find(|v| !group.contains(&v.degree)) {
        return Err(Error::GroupMismatch(format!("variable {v} is not graded by {group:?}")));
    }
    let nv = variables.len();
    let mut blocks: BTreeMap<Vec<usize>, Block> = BTreeMap::new();
    let mut basis = Vec::new();
    for len in 0..=d {
        for w in words(nv, len) {
            let md = multidegree(&w, nv);
            if !blocks.contains_key(&md) {
                let mut degrees = Vec::new();
                let mut copy_slots = Vec::new();
                for (v, &m) in md.iter().enumerate() {
                    copy_slots.push((degrees.len()..degrees.len() + m).collect());
                    degrees.extend(std::iter::repeat_n(variables[v].degree.clone(), m));
                }
                let pattern = MultilinearPattern::new(group.clone(), degrees);
                let kernel = source.kernel(&pattern, cfg)?.subspace();
                let pd = pattern.dim();
                blocks.insert(md.clone(), Block { pattern_dim: pd, kernel, solver: Echelon::new(pd), members: Vec::new(), copy_slots });
            }
            let block = blocks.get_mut(&md).unwrap();
            let r = block.residual(&w);
            let mut probe = Echelon::new(block.pattern_dim);
            for row in block.solver.rows_dense() {
                probe.insert(&row[..block.pattern_dim]);
            }
            if probe.insert(&r) {
                // Re-pack the solver with one more augmented column.
                let k = block.members.len();
                let old: Vec<Vec<Q>> = block.members.iter().map(|&i| basis_residual(block, &basis, i)).collect();
                let mut solver = Echelon::new(block.pattern_dim + k + 1);
                for (j, row) in old.into_iter().chain(std::iter::once(r)).enumerate() {
                    let mut aug = row;
                    aug.extend((0..k + 1).map(|t| if t == j { Q::one() } else { Q::zero() }));
                    solver.insert(&aug);
                }
                block.solver = solver;
                block.members.push(basis.len());
                basis.push(w);
            }
        }
    }
    Ok(RelativelyFree { variables: variables.to_vec(), degree_bound: d, basis, blocks })
}

fn basis_residual(block: &Block, basis: &[VarWord], i: usize) -> Vec<Q> {
    block.residual(&basis[i])
}

impl RelativelyFree {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn word_label(&self, w: &[usize]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.iter().map(|&v| format!("x{}", self.variables[v].index)).collect()
    }

    /// Coordinates of a word of length `≤ d` over the basis.
    pub fn express(&self, w: &[usize]) -> Option<Vec<Q>> {
        if w.len() > self.degree_bound {
            return None;
        }
        let md = multidegree(w, self.variables.len());
        let block = &self.blocks[&md];
        let local = block.express(w);
        let mut out = vec![Q::zero(); self.basis.len()];
        for (c, &i) in local.into_iter().zip(&block.members) {
            out[i] = c;
        }
        Some(out)
    }

    /// Product of two basis elements when the total length is `≤ d`.
    pub fn multiply(&self, i: usize, j: usize) -> Option<Vec<Q>> {
        let mut w = self.basis[i].clone();
        w.extend_from_slice(&self.basis[j]);
        self.express(&w)
    }

    /// The algebra `F⟨X⟩ / (Id + words longer than d)`.
    pub fn as_algebra(&self, group: &crate::grading::GradingGroup) -> Result<FiniteGradedAlgebra> {
        let n = self.dim();
        let mut constants = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if let Some(c) = self.multiply(i, j) {
                    constants.extend(c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(k, x)| (i, j, k, x)));
                }
            }
        }
        let labels = self.basis.iter().map(|w| self.word_label(w)).collect();
        let degrees =
            self.basis.iter().map(|w| w.iter().fold(group.identity(), |acc, &v| group.op(&acc, &self.variables[v].degree))).collect();
        let mut unit = vec![Q::zero(); n];
        if n > 0 {
            unit[0] = Q::one();
        }
        FiniteGradedAlgebra::new(group.clone(), labels, degrees, constants, unit)
    }

    pub fn to_json(&self) -> Value {
        let by_len: Vec<usize> = (0..=self.degree_bound).map(|l| self.basis.iter().filter(|w| w.len() == l).count()).collect();
        json!({
            "dim": self.dim(),
            "degree_bound": self.degree_bound,
            "dims_by_length": by_len,
            "basis": self.basis.iter().map(|w| self.word_label(w)).collect::<Vec<_>>(),
        })
    }

    /// The relation expressing a non-basis word, as `(label, coefficient)` terms.
    pub fn describe(&self, w: &[usize]) -> Option<Vec<(String, String)>> {
        let c = self.express(w)?;
        Some(c.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (self.word_label(&self.basis[i]), fmt_q(x))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::identities::kernel::GrassmannOracle;
    use crate::identities::variety::variety_contains;
    use crate::rational::q;

    #[test]
    fn commutative_monomials() {
        let e = GradingGroup::trivial().identity();
        let vars = vec![GradedVariable::new(1, e.clone()), GradedVariable::new(2, e)];
        let rf = relatively_free_truncation(&base_field(), &vars, 2, &KernelConfig::default()).unwrap();
        let labels: Vec<String> = rf.basis.iter().map(|w| rf.word_label(w)).collect();
        assert_eq!(labels, vec!["1", "x1", "x2", "x1x1", "x1x2", "x2x2"]);
        assert_eq!(rf.express(&[1, 0]).unwrap(), rf.express(&[0, 1]).unwrap());
    }

    #[test]
    fn grassmann_truncations() {
        let cfg = KernelConfig::default();
        let e = GradingGroup::trivial().identity();
        let vars = vec![GradedVariable::new(1, e.clone()), GradedVariable::new(2, e)];
        let rf = relatively_free_truncation(&GrassmannOracle::ungraded(), &vars, 2, &cfg).unwrap();
        assert_eq!(rf.dim(), 7);

        let g = GradingGroup::z2();
        let odd = g.elem(&[1]).unwrap();
        let vars = vec![GradedVariable::new(1, odd.clone()), GradedVariable::new(2, odd)];
        let rf = relatively_free_truncation(&GrassmannOracle::canonical(), &vars, 2, &cfg).unwrap();
        let x1x2 = rf.express(&[0, 1]).unwrap();
        let x2x1 = rf.express(&[1, 0]).unwrap();
        assert_eq!(x1x2, x2x1.iter().map(|x| -x).collect::<Vec<_>>());
        assert!(rf.express(&[0, 0]).unwrap().iter().all(|x| x == &q(0)));
    }

    #[test]
    fn truncation_lies_in_the_variety() {
        let cfg = KernelConfig::default();
        let e = GradingGroup::trivial().identity();
        let vars = vec![GradedVariable::new(1, e.clone()), GradedVariable::new(2, e)];
        let m2 = build_matrix_algebra(2, None).unwrap();
        let rf = relatively_free_truncation(&m2, &vars, 3, &cfg).unwrap();
        let alg = rf.as_algebra(m2.group()).unwrap();
        assert!(validate_algebra(&alg).is_pass());
        assert!(variety_contains(&m2, &alg, 3, &cfg).unwrap().is_pass());
    }
}
