use std::collections::BTreeMap;

use rand::Rng;

use super::presheaf::PresheafOfAlgebras;
use super::topology::FiniteTopology;
use crate::grading::{build_function_algebra, tensor_with_commutative, FiniteGradedAlgebra};
use crate::linalg::Matrix;
use crate::rational::one;

/// Knobs for [`random_presheaf`].
#[derive(Clone, Copy, Debug)]
pub struct RandomPresheafConfig {
    /// Each point carries between 1 and this many local labels.
    pub max_fibre: usize,
    /// Chance that an open identifies two extra labels (breaks gluing).
    pub merge_probability: f64,
    /// Chance that an open gets an invisible extra label (breaks injectivity).
    pub ghost_probability: f64,
}

impl Default for RandomPresheafConfig {
    fn default() -> Self {
        Self { max_fibre: 2, merge_probability: 0.3, ghost_probability: 0.2 }
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// `U ↦ A ⊗ Fun(S_U)` where `S_U` is a quotient of the labels over the
/// points of `U`, coarsening as `U` grows, plus occasional ghost labels.
/// Restrictions pull functions back along the induced maps `S_V → S_U`,
/// so the result is always a presheaf; whether it is a sheaf depends on
/// the draw.
pub fn random_presheaf(t: &FiniteTopology, a: &FiniteGradedAlgebra, cfg: &RandomPresheafConfig, rng: &mut impl Rng) -> PresheafOfAlgebras {
    let mut labels: Vec<usize> = Vec::new();
    for x in 0..t.n_points() {
        let k = rng.gen_range(1..=cfg.max_fibre.max(1));
        labels.extend(std::iter::repeat_n(x, k));
    }
    let nl = labels.len();
    let n = t.n_opens();
    // For every open: label → element of S_U, and the count of elements.
    let mut class_of: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
    let mut ghosts: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sizes = vec![0usize; n];
    let mut partitions: Vec<Vec<usize>> = vec![(0..nl).collect(); n];
    for u in 0..n {
        let s = t.open(u);
        if s == 0 {
            continue;
        }
        let inside: Vec<usize> = (0..nl).filter(|&l| s >> labels[l] & 1 == 1).collect();
        let mut parent: Vec<usize> = (0..nl).collect();
        for (v, pv) in partitions.iter().enumerate().take(u) {
            if t.open(v) != 0 && t.contains(u, v) {
                let pv = pv.clone();
                for &l in &inside {
                    if s >> labels[l] & 1 == 1 && t.open(v) >> labels[l] & 1 == 1 {
                        union(&mut parent, l, pv[l]);
                    }
                }
            }
        }
        if inside.len() > 1 && rng.gen_bool(cfg.merge_probability) {
            let i = inside[rng.gen_range(0..inside.len())];
            let j = inside[rng.gen_range(0..inside.len())];
            union(&mut parent, i, j);
        }
        for &l in &inside {
            find(&mut parent, l);
        }
        let mut roots: Vec<usize> = inside.iter().map(|&l| parent[l]).collect();
        roots.sort_unstable();
        roots.dedup();
        for &l in &inside {
            class_of[u].insert(l, roots.binary_search(&parent[l]).unwrap());
        }
        sizes[u] = roots.len();
        if rng.gen_bool(cfg.ghost_probability) {
            ghosts[u].push(inside[rng.gen_range(0..inside.len())]);
            sizes[u] += 1;
        }
        partitions[u] = parent;
    }
    let sections: Vec<FiniteGradedAlgebra> =
        sizes.iter().map(|&m| tensor_with_commutative(a, &build_function_algebra(m)).expect("commutative factor")).collect();
    let mut restrictions = BTreeMap::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || t.open(v) == 0 || !t.contains(u, v) {
                continue;
            }
            // σ : S_V → S_U
            let real_v = sizes[v] - ghosts[v].len();
            let mut sigma = vec![0usize; sizes[v]];
            for (&l, &c) in &class_of[v] {
                sigma[c] = class_of[u][&l];
            }
            for (g, &anchor) in ghosts[v].iter().enumerate() {
                sigma[real_v + g] = class_of[u][&anchor];
            }
            let mut m = Matrix::zeros(sections[v].dim(), sections[u].dim());
            for (sv, &su) in sigma.iter().enumerate() {
                for i in 0..a.dim() {
                    m.set(i * sizes[v] + sv, i * sizes[u] + su, one());
                }
            }
            restrictions.insert((u, v), m);
        }
    }
    PresheafOfAlgebras::new(t.clone(), sections, restrictions).expect("well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::build_truncated_polynomial;
    use crate::identities::KernelConfig;
    use crate::sheaves::{check_presheaf, check_sheaf, PresheafChecks};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_are_presheaves_of_both_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = build_truncated_polynomial(2).unwrap();
        let checks = PresheafChecks { kernel: KernelConfig::default(), ..Default::default() };
        let (mut sheaves, mut others) = (0, 0);
        for t in [FiniteTopology::pseudocircle(), FiniteTopology::discrete(2)] {
            for _ in 0..10 {
                let f = random_presheaf(&t, &a, &RandomPresheafConfig::default(), &mut rng);
                assert!(check_presheaf(&f, &checks).unwrap().is_pass());
                if check_sheaf(&f).unwrap().is_pass() {
                    sheaves += 1;
                } else {
                    others += 1;
                }
            }
        }
        assert!(sheaves > 0 && others > 0, "{sheaves} sheaves, {others} others");
    }
}
