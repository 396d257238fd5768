//! K3-specific assembly: Oguiso's count, the degree of the stable covering,
//! Eichler invariants, orbit counts for the vectors `v_c`, and
//! Fourier-Mukai partner counts as double-orbit sums.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::discform::{discriminant_form, DiscriminantForm, FiniteQuadraticForm, FqfElement, FqfMap};
use crate::error::{Error, Result};
use crate::genus::{genus_symbol, GenusComparison, GenusSymbol};
use crate::intlinalg::gcd_all;
use crate::lattice::{standard_lattice, Lattice, Representation};
use crate::overlattice::{double_orbit_count, enumerate_gluings_of_forms, gluing_orbit_count, marked_gluing_orbit_count};
use crate::par::{self, Execution};

/// Number of distinct prime factors of `d`, with `p(1) = 1`.
pub fn prime_count(d: u64) -> u32 {
    if d <= 1 {
        return 1;
    }
    let mut n = d;
    let mut count = 0;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            count += 1;
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        count += 1;
    }
    count
}

/// `2^(p(d) - 1)`.
pub fn oguiso_count(d: u64) -> u64 {
    1 << (prime_count(d) - 1)
}

/// Discriminant form `q_2d` of `L_2d`: `Z/2d` with `q(1) = -1/2d`.
pub fn q_2d(d: u64) -> Result<FiniteQuadraticForm> {
    if d == 0 {
        return Err(Error::BadParameter("d must be positive".into()));
    }
    FiniteQuadraticForm::cyclic(2 * d, BigRational::new(BigInt::from(-1), BigInt::from(2 * d)))
}

/// `L_2d` with its discriminant form.
#[derive(Clone, Debug)]
pub struct PolarisedSetup {
    pub d: u64,
    pub lattice: Lattice,
    pub disc: DiscriminantForm,
}

impl PolarisedSetup {
    pub fn new(d: u64) -> Result<Self> {
        if d == 0 || d > i64::MAX as u64 / 2 {
            return Err(Error::BadParameter(format!("degree d = {d} out of range")));
        }
        let lattice = standard_lattice(&format!("L2d({d})"))?;
        let disc = discriminant_form(&lattice)?;
        Ok(PolarisedSetup { d, lattice, disc })
    }
}

fn l2d_orthogonal_group(d: u64) -> Result<(FiniteQuadraticForm, Vec<FqfMap>)> {
    let form = PolarisedSetup::new(d)?.disc.form().clone();
    let group = form.orthogonal_group()?;
    Ok((form, group))
}

/// Degree of `F̃_2d → F_2d`: `|O(D_{L_2d})| / 2` for `d ≥ 2`, and 1 for
/// `d = 1` where every isometry is stable.
pub fn stable_covering_degree(d: u64) -> Result<u64> {
    if d == 1 {
        return Ok(1);
    }
    let (_, group) = l2d_orthogonal_group(d)?;
    Ok(group.len() as u64 / 2)
}

/// FM partners of a Picard-rank-one K3 of degree `2d`, counted as
/// `{±id} \ O(D_{L_2d}) / {±id}`.
pub fn fm_count_rank_one(d: u64) -> Result<u64> {
    let (form, group) = l2d_orthogonal_group(d)?;
    let pm = [FqfMap::negation(&form)];
    Ok(double_orbit_count(&form, &group, &pm, &pm)? as u64)
}

/// `(v², div(v), [v/div(v)] ∈ D_L)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EichlerInvariant {
    pub length: BigInt,
    pub divisor: BigInt,
    pub class: FqfElement,
}

/// Eichler invariant of a primitive vector in a lattice with two marked
/// hyperbolic planes.
pub fn eichler_invariant(l: &Lattice, v: &[BigInt]) -> Result<EichlerInvariant> {
    eichler_invariant_in(l, &discriminant_form(l)?, v)
}

/// As [`eichler_invariant`] with a precomputed discriminant form of `l`.
pub fn eichler_invariant_in(l: &Lattice, dl: &DiscriminantForm, v: &[BigInt]) -> Result<EichlerInvariant> {
    if l.hyperbolic_planes().len() < 2 {
        return Err(Error::NoMarkedHyperbolicPlanes);
    }
    let divisor = l.divisor(v)?;
    if !gcd_all(v).is_one() {
        return Err(Error::NotPrimitive);
    }
    let w: Vec<BigRational> = v.iter().map(|x| BigRational::new(x.clone(), divisor.clone())).collect();
    let class = dl.class_of(&w)?;
    Ok(EichlerInvariant { length: l.norm(v), divisor, class })
}

/// One vector `v_c = p²e2 + p(1+c²)f2 + c·l` in `L_{2p³}`.
#[derive(Clone, Debug)]
pub struct VcVector {
    pub c: u64,
    pub vector: Vec<BigInt>,
    pub invariant: EichlerInvariant,
}

#[derive(Clone, Debug)]
pub struct VcOrbits {
    pub p: u64,
    pub vectors: Vec<VcVector>,
    /// Distinct Eichler invariants, i.e. stable-isometry orbits.
    pub stable_orbits: usize,
    /// Orbits of `O(D_L)` on those invariants, a lower bound for the number
    /// of orbits under the full isometry group.
    pub full_orbit_lower_bound: usize,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

/// Builds every `v_c` for `c ∈ [0, p²)` with `1 + c² ≡ 0 (p)`, checks
/// `v_c² = 2p³`, `div(v_c) = p²` and primitivity, and counts orbits through
/// Eichler invariants.
pub fn count_vc_orbits(p: u64) -> Result<VcOrbits> {
    count_vc_orbits_with(p, Execution::default())
}

pub fn count_vc_orbits_with(p: u64, exec: Execution) -> Result<VcOrbits> {
    if !is_prime(p) {
        return Err(Error::BadParameter(format!("{p} is not prime")));
    }
    let d = p.checked_pow(3).filter(|&d| d <= 1 << 40).ok_or_else(|| Error::BadParameter(format!("p = {p} too large")))?;
    let setup = PolarisedSetup::new(d)?;
    let cs: Vec<u64> = (0..p * p).filter(|c| (1 + (c % p) * (c % p)).is_multiple_of(p)).collect();
    let rank = setup.lattice.rank();
    let (pb, p2) = (BigInt::from(p), BigInt::from(p * p));
    let built = par::map(exec, cs, |c| -> Result<VcVector> {
        let cb = BigInt::from(c);
        let mut v = vec![BigInt::zero(); rank];
        v[2] = p2.clone();
        v[3] = &pb * (BigInt::one() + &cb * &cb);
        v[4] = cb;
        let invariant = eichler_invariant_in(&setup.lattice, &setup.disc, &v)?;
        if invariant.length != BigInt::from(2 * d) || invariant.divisor != p2 {
            return Err(Error::InvalidElement(format!(
                "v_{c} has length {} and divisor {}",
                invariant.length, invariant.divisor
            )));
        }
        Ok(VcVector { c, vector: v, invariant })
    });
    let vectors: Vec<VcVector> = built.into_iter().collect::<Result<_>>()?;
    let classes: BTreeSet<FqfElement> = vectors.iter().map(|v| v.invariant.class.clone()).collect();
    let form = setup.disc.form();
    let group = form.orthogonal_group()?;
    let mut seen = BTreeSet::new();
    let mut full = 0;
    for x in &classes {
        if seen.contains(x) {
            continue;
        }
        full += 1;
        for g in &group {
            seen.insert(g.apply(form, x));
        }
    }
    Ok(VcOrbits { p, stable_orbits: classes.len(), full_orbit_lower_bound: full, vectors })
}

/// How a group of generators was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Computed from a definite lattice by exhaustive isometry search.
    Automatic,
    /// Supplied by the caller.
    Manual,
}

/// Images in `O(D_L)` of the full isometry group of a definite lattice.
pub fn definite_isometry_images(l: &Lattice, dl: &DiscriminantForm) -> Result<Vec<FqfMap>> {
    // Nothing to push forward into a trivial group; skips huge searches such as E8.
    if dl.form().is_trivial() {
        return Ok(vec![FqfMap::identity(dl.form())]);
    }
    let mut out: Vec<FqfMap> = l.isometry_group_definite()?.iter().map(|s| dl.push_forward(s)).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// `{±id}`, the image of the Hodge isometries of a very general period.
pub fn generic_hodge_images(form: &FiniteQuadraticForm) -> Vec<FqfMap> {
    vec![FqfMap::identity(form), FqfMap::negation(form)]
}

fn check_automorphisms(form: &FiniteQuadraticForm, maps: &[FqfMap], what: &str) -> Result<()> {
    for m in maps {
        if m.images().len() != form.generator_count() || !form.is_automorphism(m) {
            return Err(Error::NotAnAutomorphism(format!("{what} generator {:?}", m.images())));
        }
    }
    Ok(())
}

/// One complement `S` for the unpolarised count.
#[derive(Clone, Debug)]
pub struct FmCandidate {
    pub label: String,
    pub lattice: Option<Lattice>,
    pub form: FiniteQuadraticForm,
    /// Generators of the image of `O(S)` in `O(D_S)`.
    pub o_images: Vec<FqfMap>,
    /// Generators of the image of the Hodge isometries of `T`, transported
    /// to `O(D_S)`.
    pub hodge_images: Vec<FqfMap>,
    pub provenance: Provenance,
}

impl FmCandidate {
    /// Definite `S`: `O(S)` by exhaustive search, Hodge images `{±id}`.
    pub fn automatic(label: impl Into<String>, s: &Lattice) -> Result<Self> {
        let ds = discriminant_form(s)?;
        Ok(FmCandidate {
            label: label.into(),
            lattice: Some(s.clone()),
            o_images: definite_isometry_images(s, &ds)?,
            hodge_images: generic_hodge_images(ds.form()),
            form: ds.form().clone(),
            provenance: Provenance::Automatic,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct FmCountInput {
    pub candidates: Vec<FmCandidate>,
    /// When set, every candidate carrying a lattice must have this genus.
    pub required_genus: Option<GenusSymbol>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FmCount {
    pub total: u64,
    pub breakdown: Vec<(String, u64)>,
}

/// `Σ_S |O_hodge × O(S) \ O(D_S)|`.
pub fn fm_count_general(input: &FmCountInput) -> Result<FmCount> {
    let mut breakdown = Vec::with_capacity(input.candidates.len());
    for cand in &input.candidates {
        check_automorphisms(&cand.form, &cand.o_images, "O(S)")?;
        check_automorphisms(&cand.form, &cand.hodge_images, "Hodge")?;
        if let (Some(required), Some(s)) = (&input.required_genus, &cand.lattice) {
            if required.compare(&genus_symbol(s)?)? != GenusComparison::Same {
                return Err(Error::GenusMismatch);
            }
        }
        let group = cand.form.orthogonal_group()?;
        let n = double_orbit_count(&cand.form, &group, &cand.hodge_images, &cand.o_images)? as u64;
        breakdown.push((cand.label.clone(), n));
    }
    Ok(FmCount { total: breakdown.iter().map(|(_, n)| n).sum(), breakdown })
}

/// One complement `S` for the polarised fibre counts.
#[derive(Clone, Debug)]
pub struct PolarisedCandidate {
    pub label: String,
    pub lattice: Lattice,
    pub o_images: Vec<FqfMap>,
    pub provenance: Provenance,
}

impl PolarisedCandidate {
    pub fn automatic(label: impl Into<String>, s: &Lattice) -> Result<Self> {
        let ds = discriminant_form(s)?;
        Ok(PolarisedCandidate {
            label: label.into(),
            lattice: s.clone(),
            o_images: definite_isometry_images(s, &ds)?,
            provenance: Provenance::Automatic,
        })
    }

    pub fn manual(label: impl Into<String>, s: &Lattice, o_images: Vec<FqfMap>) -> Result<Self> {
        let ds = discriminant_form(s)?;
        check_automorphisms(ds.form(), &o_images, "O(S)")?;
        Ok(PolarisedCandidate { label: label.into(), lattice: s.clone(), o_images, provenance: Provenance::Manual })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateFibre {
    pub label: String,
    pub gluings: usize,
    pub sigma: usize,
    pub tau: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibreCounts {
    pub sigma: usize,
    pub tau: usize,
    pub per_candidate: Vec<CandidateFibre>,
}

/// Fibre sizes of `σ` and `τ` over a polarised K3 with transcendental
/// lattice `T`: sums over the candidates `S` of the orbits of
/// `O_hodge(T) × O(S)` on `kq(T, S, q)`, without (`σ`) and with (`τ`) the
/// marking of `H^⊥/H ≅ q`.
pub fn polarised_fibre_counts(
    t: &Lattice,
    hodge_images: &[FqfMap],
    candidates: &[PolarisedCandidate],
    target: &FiniteQuadraticForm,
) -> Result<FibreCounts> {
    let dt = discriminant_form(t)?;
    check_automorphisms(dt.form(), hodge_images, "Hodge")?;
    let mut per_candidate = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let ds = discriminant_form(&cand.lattice)?;
        check_automorphisms(ds.form(), &cand.o_images, "O(S)")?;
        let gluings = enumerate_gluings_of_forms(dt.form(), ds.form(), target, Execution::default())?;
        let sigma = gluing_orbit_count(dt.form(), ds.form(), &gluings, hodge_images, &cand.o_images)?;
        let tau = marked_gluing_orbit_count(dt.form(), ds.form(), target, &gluings, hodge_images, &cand.o_images)?;
        per_candidate.push(CandidateFibre { label: cand.label.clone(), gluings: gluings.len(), sigma, tau });
    }
    Ok(FibreCounts {
        sigma: per_candidate.iter().map(|c| c.sigma).sum(),
        tau: per_candidate.iter().map(|c| c.tau).sum(),
        per_candidate,
    })
}

/// One checked statement with its outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimCheck {
    pub id: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Checks the representation statements for the rank-two Néron-Severi
/// lattices `[[0,-7],[-7,-2]]` and `[[0,-7],[-7,10]]` and the `(-2)`-vector
/// statement for `A2(-1)` against `<-42> ⊕ <-14>`.
pub fn verify_polarisation_examples() -> Vec<ClaimCheck> {
    let mut out = Vec::new();
    let former = Lattice::from_rows(&[vec![0, -7], vec![-7, -2]]).expect("valid Gram matrix");
    let latter = Lattice::from_rows(&[vec![0, -7], vec![-7, 10]]).expect("valid Gram matrix");

    let r = former.represents(&BigInt::from(-2), 100);
    out.push(ClaimCheck {
        id: "former-represents-minus-two",
        statement: "[[0,-7],[-7,-2]] represents -2",
        passed: matches!(&r, Ok(x) if x.is_witness()),
        detail: format!("{r:?}"),
    });

    let r = former.represents(&BigInt::from(10), 100);
    let absent = matches!(&r, Ok(x) if x.proves_absence())
        && matches!(&r, Ok(Representation::NotFoundUpToBound { .. }) | Ok(Representation::ObstructedMod { .. }));
    out.push(ClaimCheck {
        id: "former-misses-ten",
        statement: "[[0,-7],[-7,-2]] does not represent 10",
        passed: absent,
        detail: format!("{r:?}"),
    });

    for (id, statement, v, n) in [
        ("latter-represents-ten", "[[0,-7],[-7,10]] primitively represents 10 via (0,1)", [0i64, 1], 10i64),
        ("latter-represents-six", "[[0,-7],[-7,10]] primitively represents 6 via (2,3)", [2, 3], 6),
    ] {
        let v = big(&v);
        let norm = latter.norm(&v);
        let primitive = gcd_all(&v).is_one();
        let searched = latter.represents(&BigInt::from(n), 100);
        out.push(ClaimCheck {
            id,
            statement,
            passed: norm == BigInt::from(n) && primitive && matches!(&searched, Ok(x) if x.is_witness()),
            detail: format!("norm {norm}, primitive {primitive}, search {searched:?}"),
        });
    }

    let a2 = standard_lattice("A2(-1)").and_then(|l| l.short_vectors(&BigInt::from(-2)));
    let diag = standard_lattice("<-42>+<-14>").and_then(|l| l.short_vectors(&BigInt::from(-2)));
    let (na, nd) = (a2.as_ref().map(Vec::len), diag.as_ref().map(Vec::len));
    out.push(ClaimCheck {
        id: "a2-roots-versus-diagonal",
        statement: "A2(-1) contains (-2)-vectors, <-42>+<-14> does not",
        passed: matches!(na, Ok(n) if n > 0) && matches!(nd, Ok(0)),
        detail: format!("A2(-1): {na:?} vectors of norm -2, <-42>+<-14>: {nd:?}"),
    });
    out
}
