use std::collections::BTreeMap;

use serde_json::json;

use super::presheaf::PresheafOfAlgebras;
use super::topology::{FiniteTopology, PointSet};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::report::VerificationReport;

/// A map of finite spaces, given pointwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuousMap {
    source: FiniteTopology,
    target: FiniteTopology,
    map: Vec<usize>,
}

impl ContinuousMap {
    /// Fails with the first open of the target whose preimage is not open.
    pub fn new(source: FiniteTopology, target: FiniteTopology, map: Vec<usize>) -> Result<Self> {
        let r = check_continuity(&source, &target, &map)?;
        if !r.is_pass() {
            return Err(Error::Precondition(format!("map is not continuous: {}", r.witness.unwrap_or_default())));
        }
        Ok(Self { source, target, map })
    }

    pub fn identity(t: &FiniteTopology) -> Self {
        Self { source: t.clone(), target: t.clone(), map: (0..t.n_points()).collect() }
    }

    /// The map to the one-point space.
    pub fn to_point(t: &FiniteTopology) -> Self {
        Self { source: t.clone(), target: FiniteTopology::point(), map: vec![0; t.n_points()] }
    }

    pub fn source(&self) -> &FiniteTopology {
        &self.source
    }

    pub fn target(&self) -> &FiniteTopology {
        &self.target
    }

    pub fn image(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn preimage(&self, s: PointSet) -> PointSet {
        preimage(&self.map, s)
    }
}

fn preimage(map: &[usize], s: PointSet) -> PointSet {
    map.iter().enumerate().filter(|&(_, &y)| s >> y & 1 == 1).fold(0, |acc, (x, _)| acc | 1 << x)
}

/// Preimages of all opens must be open; the witness is the offending open.
pub fn check_continuity(source: &FiniteTopology, target: &FiniteTopology, map: &[usize]) -> Result<VerificationReport> {
    if map.len() != source.n_points() {
        return Err(Error::Structural(format!("map has {} values for {} points", map.len(), source.n_points())));
    }
    if let Some(&y) = map.iter().find(|&&y| y >= target.n_points()) {
        return Err(Error::Structural(format!("point index {y} is outside the target")));
    }
    for &v in target.opens() {
        let pre = preimage(map, v);
        if !source.is_open(pre) {
            return Ok(VerificationReport::fail("continuity", json!({"open": target.describe(v), "preimage": source.describe(pre)})));
        }
    }
    Ok(VerificationReport::pass("continuity"))
}

/// `(φ_* F)(V) = F(φ⁻¹(V))`.
pub fn pushforward(phi: &ContinuousMap, f: &PresheafOfAlgebras) -> Result<PresheafOfAlgebras> {
    if f.topology() != phi.source() {
        return Err(Error::Precondition("presheaf does not live on the source of the map".into()));
    }
    let (s, t) = (phi.source(), phi.target());
    let idx = |v: usize| s.index_of(phi.preimage(t.open(v))).expect("continuous map");
    let sections = (0..t.n_opens()).map(|v| f.section(idx(v)).clone()).collect();
    let mut restrictions = BTreeMap::new();
    for u in 0..t.n_opens() {
        for v in 0..t.n_opens() {
            if u != v && t.open(v) != 0 && t.contains(u, v) {
                let m = if idx(u) == idx(v) { Matrix::identity(f.section(idx(u)).dim()) } else { f.restriction_matrix(idx(u), idx(v))? };
                restrictions.insert((u, v), m);
            }
        }
    }
    PresheafOfAlgebras::new(t.clone(), sections, restrictions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::sheaves::{check_sheaf, constant_sheaf};

    #[test]
    fn identity_and_point() {
        let t = FiniteTopology::pseudocircle();
        let f = constant_sheaf(&t, &build_truncated_polynomial(2).unwrap());
        assert_eq!(pushforward(&ContinuousMap::identity(&t), &f).unwrap(), f);
        let g = pushforward(&ContinuousMap::to_point(&t), &f).unwrap();
        assert_eq!(g.section(g.topology().full_index()), f.section(t.full_index()));
        assert!(check_sheaf(&g).unwrap().is_pass());
    }

    #[test]
    fn non_continuous_rejected() {
        let r = check_continuity(&FiniteTopology::sierpinski(), &FiniteTopology::discrete(2), &[0, 1]).unwrap();
        assert!(!r.is_pass());
        assert_eq!(r.witness.unwrap()["open"], json!(["b"]));
        assert!(ContinuousMap::new(FiniteTopology::sierpinski(), FiniteTopology::discrete(2), vec![0, 1]).is_err());
    }
}
