use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grading::{build_named, FiniteGradedAlgebra, GradingGroup};
use crate::linalg::Matrix;
use crate::morita::{GroupSpec, MoritaContext};
use crate::rational::{fmt_q, parse_q, Q};
use crate::sheaves::{build_function_sheaf, constant_presheaf, constant_sheaf, FiniteTopology, PresheafOfAlgebras};

/// A rational as it may appear in a file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawQ {
    Int(i64),
    Text(String),
}

impl RawQ {
    pub fn value(&self) -> Result<Q> {
        match self {
            RawQ::Int(n) => Ok(Q::from_integer((*n).into())),
            RawQ::Text(s) => parse_q(s),
        }
    }

    pub fn from_q(x: &Q) -> Self {
        RawQ::Text(fmt_q(x))
    }
}

fn values(v: &[RawQ]) -> Result<Vec<Q>> {
    v.iter().map(RawQ::value).collect()
}

fn matrix_from(rows: &[Vec<RawQ>], shape: (usize, usize)) -> Result<Matrix> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::Structural(format!("matrix must be {}×{}", shape.0, shape.1)));
    }
    Ok(Matrix::from_rows(rows.iter().map(|r| values(r)).collect::<Result<_>>()?, shape.1))
}

pub fn matrix_to_raw(m: &Matrix) -> Vec<Vec<RawQ>> {
    m.row_vecs().iter().map(|r| r.iter().map(RawQ::from_q).collect()).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub group: GradingGroup,
    pub dim: usize,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    pub degrees: Vec<Vec<i64>>,
    pub unit: Vec<RawQ>,
    /// `[i, j, k, c]`: `b_i b_j` has coefficient `c` on `b_k`.
    pub mul: Vec<(usize, usize, usize, RawQ)>,
}

impl AlgebraFile {
    pub fn from_algebra(a: &FiniteGradedAlgebra) -> Self {
        Self {
            group: a.group().clone(),
            dim: a.dim(),
            labels: Some(a.labels().to_vec()),
            degrees: a.degrees().iter().map(|d| d.coords().to_vec()).collect(),
            unit: a.unit().iter().map(RawQ::from_q).collect(),
            mul: a.constants().map(|(i, j, k, c)| (i, j, k, RawQ::from_q(c))).collect(),
        }
    }

    pub fn to_algebra(&self) -> Result<FiniteGradedAlgebra> {
        let labels = self.labels.clone().unwrap_or_else(|| (0..self.dim).map(|i| format!("b{i}")).collect());
        if labels.len() != self.dim {
            return Err(Error::Structural(format!("{} labels for dimension {}", labels.len(), self.dim)));
        }
        let degrees = self.degrees.iter().map(|d| self.group.elem(d)).collect::<Result<_>>()?;
        let constants = self.mul.iter().map(|(i, j, k, c)| Ok((*i, *j, *k, c.value()?))).collect::<Result<Vec<_>>>()?;
        FiniteGradedAlgebra::new(self.group.clone(), labels, degrees, constants, values(&self.unit)?)
    }
}

pub fn algebra_to_json(a: &FiniteGradedAlgebra) -> Value {
    serde_json::to_value(AlgebraFile::from_algebra(a)).expect("serializable")
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn decode<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("malformed {what}: {e}")))
}

/// Resolves references relative to the directory of the file that made them.
#[derive(Clone, Debug, Default)]
pub struct Loader {
    base: PathBuf,
}

impl Loader {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self { base: base.into() }
    }

    /// A loader rooted at the directory containing `file`.
    pub fn beside(file: &Path) -> Self {
        Self::new(file.parent().map(Path::to_path_buf).unwrap_or_default())
    }

    fn path(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// A string ending in `.json` is a path; any other string is a builder name.
    pub fn algebra(&self, r: &Value) -> Result<FiniteGradedAlgebra> {
        match r {
            Value::String(s) if s.ends_with(".json") => {
                let path = self.path(s);
                Self::beside(&path).algebra(&read_json(&path)?)
            }
            Value::String(s) => build_named(s),
            Value::Object(_) => decode::<AlgebraFile>(r.clone(), "algebra")?.to_algebra(),
            _ => Err(Error::Parse("algebra reference must be a name, a path or an object".into())),
        }
    }

    pub fn algebra_file(&self, path: &str) -> Result<FiniteGradedAlgebra> {
        self.algebra(&Value::String(if path.ends_with(".json") { path.to_string() } else { format!("{path}.json") }))
    }

    /// Builtin names (`sierpinski`, `pseudocircle`, `point`, `discrete:n`,
    /// `indiscrete:n`), paths, or inline objects.
    pub fn topology(&self, r: &Value) -> Result<FiniteTopology> {
        match r {
            Value::String(s) if s.ends_with(".json") => {
                let path = self.path(s);
                Self::beside(&path).topology(&read_json(&path)?)
            }
            Value::String(s) => named_topology(s),
            Value::Object(_) => {
                let f: TopologyFile = decode(r.clone(), "topology")?;
                FiniteTopology::new(f.points, f.opens)
            }
            _ => Err(Error::Parse("topology reference must be a name, a path or an object".into())),
        }
    }

    pub fn presheaf(&self, r: &Value) -> Result<PresheafOfAlgebras> {
        match r {
            Value::String(s) => {
                let path = self.path(s);
                Self::beside(&path).presheaf(&read_json(&path)?)
            }
            Value::Object(_) => self.presheaf_from(decode(r.clone(), "presheaf")?),
            _ => Err(Error::Parse("presheaf reference must be a path or an object".into())),
        }
    }

    fn presheaf_from(&self, f: PresheafFile) -> Result<PresheafOfAlgebras> {
        let t = self.topology(&f.topology)?;
        if let Some(kind) = &f.kind {
            let a = self.algebra(f.algebra.as_ref().ok_or_else(|| Error::Parse(format!("\"{kind}\" needs \"algebra\"")))?)?;
            return match kind.as_str() {
                "constant" => Ok(constant_presheaf(&t, &a)),
                "constant_sheaf" => Ok(constant_sheaf(&t, &a)),
                "function_sheaf" => Ok(build_function_sheaf(&a, &t)),
                other => Err(Error::Parse(format!("unknown presheaf kind {other:?}"))),
            };
        }
        let algebras: BTreeMap<String, FiniteGradedAlgebra> =
            f.algebras.iter().map(|(k, v)| Ok((k.clone(), self.algebra(v)?))).collect::<Result<_>>()?;
        let group = algebras.values().next().map(|a| a.group().clone()).unwrap_or_else(GradingGroup::trivial);
        let open_index = |pts: &[usize]| -> Result<usize> {
            let mask = pts.iter().try_fold(0u64, |m, &p| {
                if p < t.n_points() {
                    Ok(m | 1 << p)
                } else {
                    Err(Error::Structural(format!("point {p} out of range")))
                }
            })?;
            t.index_of(mask).ok_or_else(|| Error::Structural(format!("{pts:?} is not open")))
        };
        let mut sections: Vec<FiniteGradedAlgebra> = vec![FiniteGradedAlgebra::zero(group); t.n_opens()];
        for s in &f.sections {
            let a = algebras.get(&s.algebra).ok_or_else(|| Error::Parse(format!("unknown algebra id {:?}", s.algebra)))?;
            sections[open_index(&s.open)?] = a.clone();
        }
        let mut restrictions = BTreeMap::new();
        for r in &f.restrictions {
            let (u, v) = (open_index(&r.from)?, open_index(&r.to)?);
            let m = matrix_from(&r.matrix, (sections[v].dim(), sections[u].dim()))?;
            restrictions.insert((u, v), m);
        }
        PresheafOfAlgebras::new(t, sections, restrictions)
    }

    pub fn morita(&self, r: &Value) -> Result<MoritaContext> {
        let f: MoritaFile = match r {
            Value::String(s) => {
                let path = self.path(s);
                return Self::beside(&path).morita(&read_json(&path)?);
            }
            _ => decode(r.clone(), "Morita context")?,
        };
        let a = self.algebra(&f.a)?;
        let b = self.algebra(&f.b)?;
        let mut ctx = MoritaContext::new(a, b, f.n, values(&f.e)?);
        if let Some(g) = &f.group {
            ctx.group = GroupSpec::parse(g)?;
        }
        if let Some(iso) = &f.iso {
            let cols = iso.first().map_or(0, Vec::len);
            ctx.iso = Some(matrix_from(iso, (iso.len(), cols))?);
        }
        Ok(ctx)
    }
}

pub fn named_topology(s: &str) -> Result<FiniteTopology> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    let n = || arg.parse::<usize>().map_err(|_| Error::Parse(format!("bad size in {s:?}")));
    match name {
        "point" => Ok(FiniteTopology::point()),
        "sierpinski" => Ok(FiniteTopology::sierpinski()),
        "pseudocircle" => Ok(FiniteTopology::pseudocircle()),
        "discrete" => Ok(FiniteTopology::discrete(n()?)),
        "indiscrete" => Ok(FiniteTopology::indiscrete(n()?)),
        _ => Err(Error::Parse(format!("unknown topology {s:?}"))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopologyFile {
    pub points: Vec<String>,
    pub opens: Vec<Vec<usize>>,
}

impl TopologyFile {
    pub fn from_topology(t: &FiniteTopology) -> Self {
        Self { points: t.points().to_vec(), opens: t.opens().iter().map(|&o| crate::sheaves::members(o)).collect() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectionEntry {
    /// Point indices of the open.
    pub open: Vec<usize>,
    /// Key into `algebras`.
    pub algebra: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictionEntry {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub matrix: Vec<Vec<RawQ>>,
}

/// Either an explicit presheaf or a shorthand `kind` (`constant`,
/// `constant_sheaf`, `function_sheaf`) applied to one `algebra`.
/// Opens without a listed section get the zero algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresheafFile {
    pub topology: Value,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub algebra: Option<Value>,
    #[serde(default)]
    pub algebras: BTreeMap<String, Value>,
    #[serde(default)]
    pub sections: Vec<SectionEntry>,
    #[serde(default)]
    pub restrictions: Vec<RestrictionEntry>,
}

impl PresheafFile {
    /// Inline form of a presheaf, one algebra id per open.
    pub fn from_presheaf(f: &PresheafOfAlgebras) -> Self {
        let t = f.topology();
        let mut algebras = BTreeMap::new();
        let mut sections = Vec::new();
        for u in 0..t.n_opens() {
            if f.section(u).dim() == 0 {
                continue;
            }
            let id = format!("U{u}");
            algebras.insert(id.clone(), algebra_to_json(f.section(u)));
            sections.push(SectionEntry { open: crate::sheaves::members(t.open(u)), algebra: id });
        }
        let restrictions = f
            .inclusion_pairs()
            .into_iter()
            .filter(|&(u, v)| f.section(u).dim() > 0 && f.section(v).dim() > 0)
            .map(|(u, v)| RestrictionEntry {
                from: crate::sheaves::members(t.open(u)),
                to: crate::sheaves::members(t.open(v)),
                matrix: matrix_to_raw(&f.restriction_matrix(u, v).expect("stored")),
            })
            .collect();
        Self {
            topology: serde_json::to_value(TopologyFile::from_topology(t)).expect("serializable"),
            kind: None,
            algebra: None,
            algebras,
            sections,
            restrictions,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoritaFile {
    #[serde(rename = "A")]
    pub a: Value,
    #[serde(rename = "B")]
    pub b: Value,
    pub n: usize,
    pub e: Vec<RawQ>,
    #[serde(default)]
    pub iso: Option<Vec<Vec<RawQ>>>,
    /// Overrides the grading group, e.g. to request a nonabelian one.
    #[serde(default)]
    pub group: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use serde_json::json;

    #[test]
    fn algebra_round_trip() {
        for name in ["F", "M:2", "E:3", "UT:3", "Cl:-1,-1", "Poly:2"] {
            let a = build_named(name).unwrap();
            let back = Loader::default().algebra(&algebra_to_json(&a)).unwrap();
            assert_eq!(a, back, "{name}");
        }
    }

    #[test]
    fn algebra_file_accepts_integers() {
        let v = json!({"group": {"free_rank": 0, "torsion": [2]}, "dim": 2, "degrees": [[0], [1]],
                       "unit": [1, 0], "mul": [[0, 0, 0, 1], [0, 1, 1, "1"], [1, 0, 1, 1], [1, 1, 0, "-1/1"]]});
        let a = Loader::default().algebra(&v).unwrap();
        assert!(validate_algebra(&a).is_pass());
        assert_eq!(a.labels(), ["b0", "b1"]);
    }

    #[test]
    fn presheaf_round_trip() {
        let t = FiniteTopology::pseudocircle();
        let f = constant_sheaf(&t, &build_named("M:2").unwrap());
        let file = serde_json::to_value(PresheafFile::from_presheaf(&f)).unwrap();
        assert_eq!(Loader::default().presheaf(&file).unwrap(), f);
        let short = json!({"topology": "sierpinski", "kind": "constant", "algebra": "E:2"});
        let g = Loader::default().presheaf(&short).unwrap();
        assert_eq!(g.section(g.topology().full_index()).dim(), 4);
    }

    #[test]
    fn bad_references() {
        let l = Loader::default();
        assert!(l.algebra(&json!(3)).is_err());
        assert!(l.topology(&json!("moebius")).is_err());
        let v = json!({"topology": {"points": ["a"], "opens": [[], [0]]}, "algebras": {"A": "F"},
                       "sections": [{"open": [0], "algebra": "B"}]});
        assert!(matches!(l.presheaf(&v), Err(Error::Parse(_))));
    }

    #[test]
    fn morita_file() {
        let v = json!({"A": "F", "B": "F", "n": 2, "e": ["1", "0", "0", "0"], "iso": [["1"]]});
        let ctx = Loader::default().morita(&v).unwrap();
        assert!(ctx.validate().is_ok());
        let v = json!({"A": "F", "B": "F", "n": 2, "e": [1, 0, 0, 0], "group": "S3"});
        let ctx = Loader::default().morita(&v).unwrap();
        assert!(ctx.validate().is_err());
    }
}
