//! JSON file formats: lattice files, subgroup generator lists and fm-count
//! inputs.
//!
//! Lattice file:
//!
//! ```json
//! { "name": "A", "gram": [[2, 4], [4, 0]], "basis_labels": ["x", "y"],
//!   "hyperbolic_planes": [[0, 1]] }
//! ```
//!
//! Integers may be JSON numbers or decimal strings (for entries beyond i64).
//! `basis_labels` and `hyperbolic_planes` are optional.

use std::fmt;
use std::path::{Path, PathBuf};

use lattice_fm::intlinalg::IntMatrix;
use lattice_fm::lattice::{standard_lattice, Lattice};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Failure;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Int(pub BigInt);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Int(v.into())),
            Raw::Str(s) => s.trim().parse().map(Int).map_err(|_| serde::de::Error::custom(format!("not an integer: {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub name: String,
    pub gram: Vec<Vec<Int>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hyperbolic_planes: Vec<(usize, usize)>,
}

impl LatticeFile {
    pub fn from_lattice(name: impl Into<String>, l: &Lattice) -> Self {
        LatticeFile {
            name: name.into(),
            gram: l.gram().to_rows().into_iter().map(|r| r.into_iter().map(Int).collect()).collect(),
            basis_labels: None,
            hyperbolic_planes: l.hyperbolic_planes().to_vec(),
        }
    }

    pub fn to_lattice(&self) -> Result<Lattice, Failure> {
        let n = self.gram.len();
        if self.gram.iter().any(|r| r.len() != n) {
            return Err(Failure::Validation(format!("{}: Gram matrix is not square", self.name)));
        }
        if let Some(labels) = &self.basis_labels {
            if labels.len() != n {
                return Err(Failure::Validation(format!("{}: {} basis labels for rank {n}", self.name, labels.len())));
            }
        }
        let rows: Vec<Vec<BigInt>> = self.gram.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect();
        let mut l = Lattice::new(IntMatrix::from_rows(&rows)).map_err(Failure::from)?;
        for &(e, f) in &self.hyperbolic_planes {
            l = l.mark_hyperbolic_plane(e, f).map_err(Failure::from)?;
        }
        Ok(l.with_label(self.name.clone()))
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(self).expect("lattice files serialise");
        std::fs::write(path, text + "\n").map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }
}

/// A lattice given either as a path to a lattice file or as a standard name
/// such as `U`, `E8(-1)`, `L2d(7)` or `<8>+<2>`.
pub fn resolve_lattice(arg: &str) -> Result<Lattice, Failure> {
    resolve_lattice_in(arg, None)
}

fn resolve_lattice_in(arg: &str, base: Option<&Path>) -> Result<Lattice, Failure> {
    let path = match base {
        Some(dir) => dir.join(arg),
        None => PathBuf::from(arg),
    };
    if path.is_file() {
        return LatticeFile::read(&path)?.to_lattice();
    }
    standard_lattice(arg)
        .map(|l| if l.label().is_some() { l } else { l.with_label(arg) })
        .map_err(|_| Failure::Parse(format!("{arg}: neither a readable lattice file nor a standard lattice name")))
}

/// `1,0,-2` as an integer vector.
pub fn parse_vector(s: &str) -> Result<Vec<BigInt>, Failure> {
    split(s).map(|t| t.parse().map_err(|_| Failure::Parse(format!("not an integer: {t}")))).collect()
}

/// `1/2,0,3/4` as a rational vector.
pub fn parse_rational_vector(s: &str) -> Result<Vec<BigRational>, Failure> {
    split(s).map(parse_rational).collect()
}

pub fn parse_rational(t: &str) -> Result<BigRational, Failure> {
    let bad = || Failure::Parse(format!("not a rational number: {t}"));
    let t = t.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

fn split(s: &str) -> impl Iterator<Item = &str> {
    s.trim().trim_start_matches('[').trim_end_matches(']').split(',').map(str::trim).filter(|t| !t.is_empty())
}

/// Integer matrix written as JSON rows, e.g. `[[1,0],[0,2]]`.
pub fn parse_matrix(s: &str) -> Result<IntMatrix, Failure> {
    let rows: Vec<Vec<Int>> = serde_json::from_str(s).map_err(|e| Failure::Parse(format!("matrix: {e}")))?;
    let rows: Vec<Vec<BigInt>> = rows.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect();
    IntMatrix::try_from_rows(rows).map_err(Failure::from)
}

/// Subgroup generators, tagged by coordinate system: `disc` uses
/// coordinates on the generators of `D_L`, `lift` gives rational vectors
/// in `L ⊗ Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SubgroupFile {
    Disc(Vec<Vec<i64>>),
    Lift(Vec<Vec<String>>),
}

impl SubgroupFile {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }
}

/// A lattice inside another JSON document: a name or path string, or an
/// inline lattice file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum LatticeRef {
    Named(String),
    Inline(LatticeFile),
}

impl LatticeRef {
    pub fn resolve(&self, base: Option<&Path>) -> Result<Lattice, Failure> {
        match self {
            LatticeRef::Named(s) => resolve_lattice_in(s, base),
            LatticeRef::Inline(f) => f.to_lattice(),
        }
    }
}

impl fmt::Display for LatticeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeRef::Named(s) => write!(f, "{s}"),
            LatticeRef::Inline(l) => write!(f, "{}", l.name),
        }
    }
}

/// How the image of `O(S)` in `O(D_S)` is obtained for an fm-count
/// candidate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageSource {
    /// Exhaustive isometry search; needs a definite lattice unless `D_S`
    /// is trivial.
    #[default]
    Automatic,
    /// Only `±id`, for lattices whose isometry group is not searched.
    Sign,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmCandidateSpec {
    pub label: Option<String>,
    pub lattice: LatticeRef,
    #[serde(default)]
    pub o_images: ImageSource,
}

/// Input of `fm-count --input`:
///
/// ```json
/// { "required_genus": "L2d(1)",
///   "candidates": [ { "label": "S1", "lattice": "E8(-1)" } ] }
/// ```
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmCountFile {
    #[serde(default)]
    pub required_genus: Option<LatticeRef>,
    pub candidates: Vec<FmCandidateSpec>,
}

impl FmCountFile {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_file_round_trip() {
        let text = r#"{"name":"A","gram":[[2,4],[4,"0"]],"basis_labels":["x","y"]}"#;
        let f: LatticeFile = serde_json::from_str(text).unwrap();
        let again: LatticeFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, again);
        assert_eq!(f.to_lattice().unwrap().det(), BigInt::from(-16));
    }

    #[test]
    fn big_entries_survive_as_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let s = serde_json::to_string(&Int(big.clone())).unwrap();
        assert_eq!(s, "\"123456789012345678901234567890\"");
        assert_eq!(serde_json::from_str::<Int>(&s).unwrap().0, big);
    }

    #[test]
    fn vectors_and_rationals() {
        assert_eq!(parse_vector("1, 0,-2").unwrap(), vec![BigInt::from(1), BigInt::from(0), BigInt::from(-2)]);
        assert_eq!(parse_rational_vector("[1/2,-3/4]").unwrap()[1], BigRational::new((-3).into(), 4.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_vector("1,x").is_err());
    }

    #[test]
    fn subgroup_tags() {
        let d: SubgroupFile = serde_json::from_str(r#"{"disc": [[1, 0]]}"#).unwrap();
        assert_eq!(d, SubgroupFile::Disc(vec![vec![1, 0]]));
        let l: SubgroupFile = serde_json::from_str(r#"{"lift": [["1/2", "1/2"]]}"#).unwrap();
        assert!(matches!(l, SubgroupFile::Lift(_)));
        assert!(serde_json::from_str::<SubgroupFile>(r#"{"both": []}"#).is_err());
    }

    #[test]
    fn non_square_gram_is_a_validation_error() {
        let f: LatticeFile = serde_json::from_str(r#"{"name":"bad","gram":[[2,1]]}"#).unwrap();
        assert!(matches!(f.to_lattice(), Err(Failure::Validation(_))));
    }
}
