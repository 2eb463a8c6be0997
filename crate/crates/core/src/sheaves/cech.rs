use std::collections::BTreeMap;

use num::{One, Zero};

use super::presheaf::PresheafOfAlgebras;
use super::topology::FiniteTopology;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rational::Q;

/// A presheaf of finite-dimensional vector spaces. Missing `(U, ∅)`
/// restrictions are zero maps; every other proper inclusion must be given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorPresheaf {
    topology: FiniteTopology,
    dims: Vec<usize>,
    restrictions: BTreeMap<(usize, usize), Matrix>,
}

impl VectorPresheaf {
    pub fn new(topology: FiniteTopology, dims: Vec<usize>, restrictions: BTreeMap<(usize, usize), Matrix>) -> Result<Self> {
        if dims.len() != topology.n_opens() {
            return Err(Error::Structural(format!("{} dimensions for {} opens", dims.len(), topology.n_opens())));
        }
        for (&(u, v), m) in &restrictions {
            if u >= dims.len() || v >= dims.len() || !topology.contains(u, v) {
                return Err(Error::Structural(format!("restriction ({u},{v}) is not along an inclusion")));
            }
            if m.rows() != dims[v] || m.cols() != dims[u] {
                return Err(Error::Structural(format!("restriction ({u},{v}) has the wrong shape")));
            }
        }
        let mut restrictions = restrictions;
        restrictions.retain(|_, m| m.rows() > 0 && m.cols() > 0);
        Ok(Self { topology, dims, restrictions })
    }

    /// `k`-dimensional on every open, the empty one included, with identity maps.
    pub fn constant(t: &FiniteTopology, k: usize) -> Self {
        let n = t.n_opens();
        let mut restrictions = BTreeMap::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && t.contains(u, v) {
                    restrictions.insert((u, v), Matrix::identity(k));
                }
            }
        }
        Self { topology: t.clone(), dims: vec![k; n], restrictions }
    }

    pub fn zero(t: &FiniteTopology) -> Self {
        Self { topology: t.clone(), dims: vec![0; t.n_opens()], restrictions: BTreeMap::new() }
    }

    /// Forgets the algebra structure.
    pub fn from_algebras(f: &PresheafOfAlgebras) -> Self {
        let t = f.topology().clone();
        let dims = f.sections().iter().map(|a| a.dim()).collect();
        let restrictions =
            f.inclusion_pairs().into_iter().map(|(u, v)| ((u, v), f.restriction_matrix(u, v).expect("valid presheaf"))).collect();
        Self { topology: t, dims, restrictions }
    }

    pub fn topology(&self) -> &FiniteTopology {
        &self.topology
    }

    pub fn dim(&self, u: usize) -> usize {
        self.dims[u]
    }

    pub fn restriction_matrix(&self, u: usize, v: usize) -> Result<Matrix> {
        if u == v {
            return Ok(Matrix::identity(self.dims[u]));
        }
        if let Some(m) = self.restrictions.get(&(u, v)) {
            return Ok(m.clone());
        }
        let (du, dv) = (self.dims[u], self.dims[v]);
        if self.topology.contains(u, v) && (self.topology.open(v) == 0 || du == 0 || dv == 0) {
            return Ok(Matrix::zeros(dv, du));
        }
        Err(Error::Structural(format!("missing restriction ({u},{v})")))
    }
}

/// The alternating Čech complex in degrees 0, 1, 2 on the cover by the
/// distinct minimal open neighbourhoods.
#[derive(Clone, Debug)]
pub struct CechComplex {
    /// Cover members, as open indices in increasing order.
    pub cover: Vec<usize>,
    pub d0: Matrix,
    pub d1: Matrix,
}

impl CechComplex {
    pub fn h0(&self) -> usize {
        self.d0.cols() - self.d0.rank()
    }

    pub fn h1(&self) -> usize {
        self.d1.cols() - self.d1.rank() - self.d0.rank()
    }
}

struct Level {
    simplices: Vec<Vec<usize>>,
    opens: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl Level {
    fn new(v: &VectorPresheaf, simplices: Vec<Vec<usize>>, meet: &dyn Fn(&[usize]) -> usize) -> Self {
        let opens: Vec<usize> = simplices.iter().map(|s| meet(s)).collect();
        let mut offsets = Vec::with_capacity(opens.len());
        let mut total = 0;
        for &o in &opens {
            offsets.push(total);
            total += v.dim(o);
        }
        Self { simplices, opens, offsets, total }
    }
}

fn coboundary(v: &VectorPresheaf, src: &Level, dst: &Level) -> Result<Matrix> {
    let mut m = Matrix::zeros(dst.total, src.total);
    for (a, simplex) in dst.simplices.iter().enumerate() {
        for omit in 0..simplex.len() {
            let mut face = simplex.clone();
            face.remove(omit);
            let b = src.simplices.iter().position(|s| *s == face).expect("face exists");
            let r = v.restriction_matrix(src.opens[b], dst.opens[a])?;
            let sign = if omit % 2 == 0 { Q::one() } else { -Q::one() };
            for i in 0..r.rows() {
                for j in 0..r.cols() {
                    let x = r.get(i, j);
                    if !x.is_zero() {
                        m.add_at(dst.offsets[a] + i, src.offsets[b] + j, &(&sign * x));
                    }
                }
            }
        }
    }
    Ok(m)
}

pub fn cech_complex(v: &VectorPresheaf) -> Result<CechComplex> {
    let t = v.topology();
    let mut cover: Vec<usize> = (0..t.n_points()).map(|x| t.minimal_open_index(x)).collect();
    cover.sort_unstable();
    cover.dedup();
    let k = cover.len();
    let meet = |idx: &[usize]| -> usize {
        let s = idx.iter().fold(t.full(), |acc, &i| acc & t.open(cover[i]));
        t.index_of(s).expect("finite intersections of opens are open")
    };
    let c0 = Level::new(v, (0..k).map(|i| vec![i]).collect(), &meet);
    let c1 = Level::new(v, (0..k).flat_map(|i| (i + 1..k).map(move |j| vec![i, j])).collect(), &meet);
    let c2 = Level::new(v, (0..k).flat_map(|i| (i + 1..k).flat_map(move |j| (j + 1..k).map(move |l| vec![i, j, l]))).collect(), &meet);
    let d0 = coboundary(v, &c0, &c1)?;
    let d1 = coboundary(v, &c1, &c2)?;
    Ok(CechComplex { cover, d0, d1 })
}

/// `dim Ȟ¹` on the cover by minimal open neighbourhoods.
pub fn cech_h1(v: &VectorPresheaf) -> Result<usize> {
    Ok(cech_complex(v)?.h1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::base_field;
    use crate::sheaves::constant_sheaf;

    #[test]
    fn examples() {
        let s = FiniteTopology::sierpinski();
        assert_eq!(cech_h1(&VectorPresheaf::constant(&s, 1)).unwrap(), 0);
        let p = FiniteTopology::pseudocircle();
        assert_eq!(cech_h1(&VectorPresheaf::from_algebras(&constant_sheaf(&p, &base_field()))).unwrap(), 1);
        assert_eq!(cech_h1(&VectorPresheaf::constant(&p, 1)).unwrap(), 0);
        assert_eq!(cech_h1(&VectorPresheaf::zero(&p)).unwrap(), 0);
    }

    #[test]
    fn complex_squares_to_zero() {
        let p = FiniteTopology::pseudocircle();
        let c = cech_complex(&VectorPresheaf::from_algebras(&constant_sheaf(&p, &base_field()))).unwrap();
        assert!(c.d1.mul(&c.d0).is_zero());
        assert_eq!(c.h0(), 1);
    }
}
