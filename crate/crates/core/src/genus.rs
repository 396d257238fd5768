//! Genus symbols (signature plus discriminant form), Nikulin's uniqueness
//! criterion and isomorphism testing for definite lattices.

use std::fmt;

use crate::discform::{discriminant_form, fqf_isomorphic, FiniteQuadraticForm};
use crate::error::{Error, Result};
use crate::intlinalg::IntMatrix;
use crate::lattice::{search_isometries, Lattice, Signature};
use crate::par::Execution;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenusSymbol {
    pub signature: Signature,
    pub form: FiniteQuadraticForm,
}

impl fmt::Display for GenusSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "signature {}, {}", self.signature, self.form)
    }
}

pub fn genus_symbol(l: &Lattice) -> Result<GenusSymbol> {
    Ok(GenusSymbol { signature: l.signature(), form: discriminant_form(l)?.form().clone() })
}

/// Outcome of comparing two genus symbols, naming the first invariant that
/// differs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenusComparison {
    Same,
    SignatureDiffers,
    GroupDiffers,
    FormDiffers,
}

impl GenusSymbol {
    pub fn compare(&self, other: &GenusSymbol) -> Result<GenusComparison> {
        if self.signature != other.signature {
            return Ok(GenusComparison::SignatureDiffers);
        }
        if self.form.invariant_factors() != other.form.invariant_factors() {
            return Ok(GenusComparison::GroupDiffers);
        }
        Ok(match fqf_isomorphic(&self.form, &other.form)? {
            Some(_) => GenusComparison::Same,
            None => GenusComparison::FormDiffers,
        })
    }
}

pub fn compare_genus(l1: &Lattice, l2: &Lattice) -> Result<GenusComparison> {
    genus_symbol(l1)?.compare(&genus_symbol(l2)?)
}

/// Equal signatures and isomorphic discriminant forms.
pub fn same_genus(l1: &Lattice, l2: &Lattice) -> Result<bool> {
    Ok(compare_genus(l1, l2)? == GenusComparison::Same)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uniqueness {
    Yes,
    /// The sufficient criterion does not apply; nothing is claimed.
    Unknown,
}

/// `Yes` when `L` is indefinite with `rank ≥ 2 + l(D_L)`.
pub fn nikulin_unique_in_genus(l: &Lattice) -> Result<Uniqueness> {
    let indefinite = !l.is_definite();
    let length = discriminant_form(l)?.form().min_generators();
    Ok(if indefinite && l.rank() >= 2 + length { Uniqueness::Yes } else { Uniqueness::Unknown })
}

/// Some `S` with `Sᵀ·G₁·S = G₂` for definite lattices of rank at most 8.
pub fn is_isomorphic_definite(l1: &Lattice, l2: &Lattice) -> Result<Option<IntMatrix>> {
    let (d1, d2) = (l1.definiteness(), l2.definiteness());
    let (Some(d1), Some(d2)) = (d1, d2) else {
        return Err(Error::IndefiniteInput);
    };
    if d1 != d2 {
        return Err(Error::MixedDefiniteness);
    }
    for l in [l1, l2] {
        if l.rank() > crate::lattice::DEFINITE_RANK_LIMIT {
            return Err(Error::RankLimitExceeded { rank: l.rank(), limit: crate::lattice::DEFINITE_RANK_LIMIT });
        }
    }
    if l1.rank() != l2.rank() || l1.det() != l2.det() {
        return Ok(None);
    }
    let found = search_isometries(l1, l2.gram(), true, Execution::default())?;
    Ok(found.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::standard_lattice;

    fn lat(rows: &[Vec<i64>]) -> Lattice {
        Lattice::from_rows(rows).unwrap()
    }

    fn a() -> Lattice {
        lat(&[vec![2, 4], vec![4, 0]])
    }
    fn b() -> Lattice {
        lat(&[vec![0, 4], vec![4, 0]])
    }
    fn c() -> Lattice {
        lat(&[vec![-2, 4], vec![4, 0]])
    }
    fn d() -> Lattice {
        lat(&[vec![2, 1], vec![1, 12]])
    }
    fn e() -> Lattice {
        lat(&[vec![4, 1], vec![1, 6]])
    }

    #[test]
    fn genus_examples() {
        assert_eq!(compare_genus(&a(), &b()).unwrap(), GenusComparison::GroupDiffers);
        assert_eq!(compare_genus(&a(), &c()).unwrap(), GenusComparison::FormDiffers);
        assert!(same_genus(&d(), &e()).unwrap());
        assert!(!same_genus(&a(), &b()).unwrap());
        let u = genus_symbol(&standard_lattice("U").unwrap()).unwrap();
        assert_eq!(u.signature, Signature { plus: 1, minus: 1 });
        assert!(u.form.is_trivial());
    }

    #[test]
    fn l2d_genus() {
        let g = genus_symbol(&standard_lattice("L2d(5)").unwrap()).unwrap();
        assert_eq!(g.signature, Signature { plus: 2, minus: 19 });
        assert_eq!(g.form.orders(), &[10]);
        let x = standard_lattice("A2(-1)+<10>").unwrap();
        let gx = genus_symbol(&x).unwrap();
        assert_eq!(gx.signature, Signature { plus: 1, minus: 2 });
        assert_eq!(gx.form.order(), 30);
    }

    #[test]
    fn unimodular_complements_share_a_genus() {
        for dd in 1..=3 {
            let l = standard_lattice(&format!("L2d({dd})")).unwrap();
            let x = standard_lattice(&format!("2E8(-1)+2U+<{}>", -2 * dd)).unwrap();
            let y = standard_lattice(&format!("D16plus(-1)+2U+<{}>", -2 * dd)).unwrap();
            assert!(same_genus(&l, &x).unwrap());
            assert!(same_genus(&x, &y).unwrap());
        }
    }

    #[test]
    fn uniqueness() {
        assert_eq!(nikulin_unique_in_genus(&standard_lattice("L2d(4)").unwrap()).unwrap(), Uniqueness::Yes);
        assert_eq!(nikulin_unique_in_genus(&standard_lattice("A2(-1)+<14>").unwrap()).unwrap(), Uniqueness::Yes);
        assert_eq!(nikulin_unique_in_genus(&d()).unwrap(), Uniqueness::Unknown);
        assert_eq!(nikulin_unique_in_genus(&a()).unwrap(), Uniqueness::Unknown);
    }

    #[test]
    fn definite_isomorphism() {
        assert_eq!(is_isomorphic_definite(&d(), &e()).unwrap(), None);
        let p = lat(&[vec![12, 1], vec![1, 2]]);
        let s = is_isomorphic_definite(&d(), &p).unwrap().unwrap();
        assert_eq!(&(&s.transpose() * d().gram()) * &s, *p.gram());
        let sq = lat(&[vec![2, 0], vec![0, 2]]);
        assert!(is_isomorphic_definite(&sq, &sq).unwrap().is_some());
        let neg = d().twist(-1).unwrap();
        assert_eq!(is_isomorphic_definite(&d(), &neg), Err(Error::MixedDefiniteness));
        assert_eq!(is_isomorphic_definite(&a(), &d()), Err(Error::IndefiniteInput));
    }

    #[test]
    fn isomorphic_implies_same_genus() {
        let corpus = [d(), e(), lat(&[vec![12, 1], vec![1, 2]]), lat(&[vec![2, 0], vec![0, 2]]), lat(&[vec![2, 1], vec![1, 2]])];
        for x in &corpus {
            for y in &corpus {
                if is_isomorphic_definite(x, y).unwrap().is_some() {
                    assert!(same_genus(x, y).unwrap());
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn base_change_preserves_genus(k in -3i64..4, m in -2i64..3, which in 0usize..3) {
                let l = [a(), d(), standard_lattice("A2(-1)+<6>").unwrap()][which].clone();
                let r = l.rank();
                let mut s = IntMatrix::identity(r);
                s[(0, r - 1)] = k.into();
                if r > 2 {
                    s[(1, 0)] = m.into();
                }
                let l2 = Lattice::new(&(&s.transpose() * l.gram()) * &s).unwrap();
                prop_assert!(same_genus(&l, &l2).unwrap());
            }
        }
    }
}
