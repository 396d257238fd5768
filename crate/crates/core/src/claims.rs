//! Registry of the worked numeric examples, each re-derived from scratch and
//! compared with its stored reference value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::discform::{discriminant_form, fqf_isomorphic, FiniteQuadraticForm};
use crate::genus::{compare_genus, is_isomorphic_definite, nikulin_unique_in_genus, same_genus, GenusComparison, Uniqueness};
use crate::k3::{
    count_vc_orbits, fm_count_rank_one, oguiso_count, prime_count, stable_covering_degree, verify_polarisation_examples,
};
use crate::lattice::{standard_lattice, Embedding, Lattice, Signature};
use crate::overlattice::{classifying_subgroup, enumerate_gluings, glue_pair, split_projections};

/// Reference values the checks compare against.
#[derive(Clone, Debug)]
struct Reference {
    a_orders: Vec<u64>,
    a_q: Vec<(i64, i64)>,
    b_orders: Vec<u64>,
    k3_signature: Signature,
    d4_gluings: usize,
    vc: Vec<(u64, usize, usize)>,
    rank_one: Vec<(u64, u64)>,
    l2d7_q: (i64, i64),
    complement_discs: (i64, i64),
}

impl Reference {
    fn standard() -> Self {
        Reference {
            a_orders: vec![2, 8],
            a_q: vec![(1, 2), (3, 8)],
            b_orders: vec![4, 4],
            k3_signature: Signature { plus: 3, minus: 19 },
            d4_gluings: 2,
            vc: vec![(5, 10, 5), (13, 26, 13), (3, 0, 0)],
            rank_one: vec![(1, 1), (6, 2), (7, 1), (30, 4)],
            l2d7_q: (27, 14),
            complement_discs: (4, 1),
        }
    }

    // Deliberately wrong values, used to check that failures are reported.
    fn corrupted() -> Self {
        let mut r = Self::standard();
        r.a_q[1] = (5, 8);
        r.d4_gluings = 3;
        r.vc[0] = (5, 11, 5);
        r.rank_one[1] = (6, 3);
        r
    }
}

/// Outcome of one registered check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimOutcome {
    pub id: &'static str,
    pub topic: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&Reference) -> Result<String, String>;

struct Claim {
    id: &'static str,
    topic: &'static str,
    statement: &'static str,
    check: Check,
}

fn lat(rows: &[Vec<i64>]) -> Result<Lattice, String> {
    Lattice::from_rows(rows).map_err(|e| e.to_string())
}

fn std_lat(expr: &str) -> Result<Lattice, String> {
    standard_lattice(expr).map_err(|e| e.to_string())
}

fn ensure(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn binary(name: char) -> Result<Lattice, String> {
    match name {
        'A' => lat(&[vec![2, 4], vec![4, 0]]),
        'B' => lat(&[vec![0, 4], vec![4, 0]]),
        'C' => lat(&[vec![-2, 4], vec![4, 0]]),
        'D' => lat(&[vec![2, 1], vec![1, 12]]),
        _ => lat(&[vec![4, 1], vec![1, 6]]),
    }
}

fn check_disc_a(r: &Reference) -> Result<String, String> {
    let dm = discriminant_form(&binary('A')?).map_err(e)?;
    let t1 = dm.class_of(&[rat(1, 2), rat(0, 1)]).map_err(e)?;
    let t2 = dm.class_of(&[rat(2, 8), rat(1, 8)]).map_err(e)?;
    let q = [dm.form().q(&t1), dm.form().q(&t2)];
    let want: Vec<BigRational> = r.a_q.iter().map(|&(n, d)| rat(n, d)).collect();
    let orders = dm.form().invariant_factors();
    ensure(
        orders == r.a_orders && q.to_vec() == want && dm.form().element_order(&t2) == 8,
        format!("invariant factors {orders:?}, q(t1) = {}, q(t2) = {}", q[0], q[1]),
    )
}

fn check_disc_b(r: &Reference) -> Result<String, String> {
    let dm = discriminant_form(&binary('B')?).map_err(e)?;
    let orders = dm.form().invariant_factors();
    let cmp = compare_genus(&binary('A')?, &binary('B')?).map_err(e)?;
    ensure(orders == r.b_orders && cmp == GenusComparison::GroupDiffers, format!("invariant factors {orders:?}, A vs B: {cmp:?}"))
}

fn check_a_vs_c(_: &Reference) -> Result<String, String> {
    let qa = discriminant_form(&binary('A')?).map_err(e)?.form().clone();
    let qc = discriminant_form(&binary('C')?).map_err(e)?.form().clone();
    let iso = fqf_isomorphic(&qa, &qc).map_err(e)?;
    let order_two = |q: &FiniteQuadraticForm| -> Result<Vec<BigRational>, String> {
        let mut v: Vec<BigRational> = q.element_table().map_err(e)?.into_iter().filter(|x| x.order <= 2).map(|x| x.q).collect();
        v.sort();
        Ok(v)
    };
    let (va, vc) = (order_two(&qa)?, order_two(&qc)?);
    let cmp = compare_genus(&binary('A')?, &binary('C')?).map_err(e)?;
    ensure(
        iso.is_none() && va != vc && cmp == GenusComparison::FormDiffers,
        format!("order<=2 values A {va:?}, C {vc:?}; A vs C: {cmp:?}"),
    )
}

fn check_d_vs_e(_: &Reference) -> Result<String, String> {
    let (d, ee) = (binary('D')?, binary('E')?);
    let same = same_genus(&d, &ee).map_err(e)?;
    let iso = is_isomorphic_definite(&d, &ee).map_err(e)?;
    let rd = d.represents(&BigInt::from(2), 10).map_err(e)?;
    let re = ee.represents(&BigInt::from(2), 10).map_err(e)?;
    ensure(
        same && iso.is_none() && rd.is_witness() && re.proves_absence(),
        format!("same genus {same}, isometry {:?}, D: {rd:?}, E: {re:?}", iso.is_some()),
    )
}

fn check_primitivity_example(_: &Reference) -> Result<String, String> {
    let l = lat(&[vec![2, 0], vec![0, 2]])?;
    let t = Embedding::from_vectors(&l, &[vec![BigInt::from(2), BigInt::zero()]]).map_err(e)?;
    let k = t.orthogonal_complement();
    let dt = discriminant_form(t.domain()).map_err(e)?;
    let dk = discriminant_form(k.domain()).map_err(e)?;
    let m = t.domain().direct_sum(k.domain());
    let mut cols = t.image_vectors();
    cols.extend(k.image_vectors());
    let emb = Embedding::new(m, l.clone(), crate::intlinalg::IntMatrix::from_columns(2, &cols)).map_err(e)?;
    let h = classifying_subgroup(&dt.direct_sum(&dk), &emb).map_err(e)?;
    let sp = split_projections(dt.form(), dk.form(), &h).map_err(e)?;
    ensure(
        sp.t_injective && !sp.k_injective && k.is_primitive() && !t.is_primitive(),
        format!("p_T injective {}, p_K injective {}, |H| = {}", sp.t_injective, sp.k_injective, h.order()),
    )
}

fn check_unimodular_gluings(r: &Reference) -> Result<String, String> {
    let t = lat(&[vec![4]])?;
    let k = lat(&[vec![-4]])?;
    let gl = enumerate_gluings(&t, &k, &FiniteQuadraticForm::trivial()).map_err(e)?;
    let o = discriminant_form(&t).map_err(e)?.form().orthogonal_group().map_err(e)?.len();
    let mut all_u = true;
    for g in &gl {
        let res = glue_pair(&t, &k, g).map_err(e)?;
        all_u &= res.lattice.is_unimodular() && res.lattice.signature() == Signature { plus: 1, minus: 1 };
    }
    ensure(gl.len() == r.d4_gluings && gl.len() == o && all_u, format!("{} gluings, |O(D)| = {o}", gl.len()))
}

fn check_complement_discriminants(r: &Reference) -> Result<String, String> {
    let l = std_lat("U+<2>")?;
    let (one, zero) = (BigInt::one(), BigInt::zero());
    let i1 = Embedding::from_vectors(&l, &[vec![one.clone(), one.clone(), zero.clone()]]).map_err(e)?;
    let i2 = Embedding::from_vectors(&l, &[vec![zero.clone(), zero, one]]).map_err(e)?;
    let d1 = i1.orthogonal_complement().domain().discriminant();
    let d2 = i2.orthogonal_complement().domain().discriminant();
    ensure(
        d1 == BigInt::from(r.complement_discs.0) && d2 == BigInt::from(r.complement_discs.1),
        format!("disc of the complements: {d1}, {d2}"),
    )
}

fn check_k3_lattice(r: &Reference) -> Result<String, String> {
    let k3 = std_lat("K3")?;
    ensure(
        k3.rank() == 22 && k3.signature() == r.k3_signature && k3.is_unimodular(),
        format!("rank {}, signature {}, det {}", k3.rank(), k3.signature(), k3.det()),
    )
}

fn check_l2d_is_complement(_: &Reference) -> Result<String, String> {
    let k3 = std_lat("K3")?;
    let mut out = Vec::new();
    for d in 1..=4i64 {
        let mut h = vec![BigInt::zero(); 22];
        h[4] = BigInt::one();
        h[5] = BigInt::from(d);
        let emb = Embedding::from_vectors(&k3, &[h]).map_err(e)?;
        let comp = emb.orthogonal_complement();
        let l2d = std_lat(&format!("L2d({d})"))?;
        let ok = emb.is_primitive()
            && same_genus(comp.domain(), &l2d).map_err(e)?
            && nikulin_unique_in_genus(&l2d).map_err(e)? == Uniqueness::Yes;
        out.push(format!("d={d}:{ok}"));
        if !ok {
            return Err(out.join(" "));
        }
    }
    Ok(out.join(" "))
}

fn check_l2d_generator(r: &Reference) -> Result<String, String> {
    let l = std_lat("L2d(7)")?;
    let dm = discriminant_form(&l).map_err(e)?;
    let mut w = vec![BigRational::zero(); 21];
    w[4] = rat(1, 14);
    let x = dm.class_of(&w).map_err(e)?;
    let q = dm.form().q(&x);
    ensure(
        dm.form().invariant_factors() == vec![14] && q == rat(r.l2d7_q.0, r.l2d7_q.1),
        format!("D = Z/{:?}, q(l/14) = {q}", dm.form().invariant_factors()),
    )
}

fn check_orthogonal_group_orders(_: &Reference) -> Result<String, String> {
    let mut out = Vec::new();
    for d in 2..=12u64 {
        let l = std_lat(&format!("L2d({d})"))?;
        let n = discriminant_form(&l).map_err(e)?.form().orthogonal_group().map_err(e)?.len();
        if n != 1 << prime_count(d) {
            return Err(format!("d = {d}: |O(D)| = {n}"));
        }
        out.push(n.to_string());
    }
    Ok(format!("|O(D_L2d)| for d = 2..12: {}", out.join(",")))
}

fn check_covering_degree(_: &Reference) -> Result<String, String> {
    let mut out = Vec::new();
    for d in [1u64, 6, 10] {
        let deg = stable_covering_degree(d).map_err(e)?;
        if deg != oguiso_count(d) {
            return Err(format!("d = {d}: degree {deg}"));
        }
        out.push(format!("d={d}:{deg}"));
    }
    Ok(out.join(" "))
}

fn check_rank_one(r: &Reference) -> Result<String, String> {
    let mut out = Vec::new();
    for &(d, want) in &r.rank_one {
        let got = fm_count_rank_one(d).map_err(e)?;
        out.push(format!("d={d}:{got}"));
        if got != want || got != oguiso_count(d) {
            return Err(out.join(" "));
        }
    }
    Ok(out.join(" "))
}

fn check_representations(_: &Reference) -> Result<String, String> {
    let report = verify_polarisation_examples();
    let failed: Vec<&str> = report.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    ensure(failed.is_empty(), format!("{} checks, failed: {failed:?}", report.len()))
}

fn check_ns_genus(_: &Reference) -> Result<String, String> {
    // The two rank-two lattices share a genus, so their complements in the
    // K3 lattice share one too; rank 20 ≥ 2 + l makes that genus a class.
    let former = lat(&[vec![0, -7], vec![-7, -2]])?;
    let latter = lat(&[vec![0, -7], vec![-7, 10]])?;
    let same = same_genus(&former, &latter).map_err(e)?;
    let length = discriminant_form(&former).map_err(e)?.form().min_generators();
    ensure(same && 20 >= 2 + length, format!("same genus {same}, l(D) = {length}"))
}

// d = 7: NS(X') is an overlattice of <14> + (<-14> + <-42>) with both
// summands primitive and discriminant form -q_T, where q_T is the form of
// E6(-1) + <-14>. Every such overlattice lies in the genus of
// A2(-1) + <14>, which has a single class.
fn check_e6_example(_: &Reference) -> Result<String, String> {
    let ns = std_lat("A2(-1)+<14>")?;
    let h = std_lat("<14>")?;
    let k = std_lat("<-14>+<-42>")?;
    let q_t = discriminant_form(&std_lat("E6(-1)+<-14>")?).map_err(e)?.form().clone();
    let gluings = enumerate_gluings(&h, &k, &q_t.negate()).map_err(e)?;
    let mut all_in_genus = !gluings.is_empty();
    for g in &gluings {
        let glued = glue_pair(&h, &k, g).map_err(e)?;
        all_in_genus &= same_genus(&glued.lattice, &ns).map_err(e)?;
    }
    let unique = nikulin_unique_in_genus(&ns).map_err(e)?;
    let minus_two = BigInt::from(-2);
    let a2_roots = std_lat("A2(-1)")?.short_vectors(&minus_two).map_err(e)?.len();
    let k_roots = k.short_vectors(&minus_two).map_err(e)?.len();
    ensure(
        all_in_genus && unique == Uniqueness::Yes && a2_roots == 6 && k_roots == 0,
        format!(
            "{} gluings, all in the genus of A2(-1)+<14>: {all_in_genus}, uniqueness {unique:?}, (-2)-vectors: A2(-1) {a2_roots}, <-14>+<-42> {k_roots}",
            gluings.len()
        ),
    )
}

fn check_vc_orbits(r: &Reference) -> Result<String, String> {
    let mut out = Vec::new();
    for &(p, stable, bound) in &r.vc {
        let got = count_vc_orbits(p).map_err(e)?;
        out.push(format!("p={p}:({},{})", got.stable_orbits, got.full_orbit_lower_bound));
        if (got.stable_orbits, got.full_orbit_lower_bound) != (stable, bound) {
            return Err(out.join(" "));
        }
    }
    Ok(out.join(" "))
}

fn check_unimodular_complements(_: &Reference) -> Result<String, String> {
    for d in 1..=3i64 {
        let l = std_lat(&format!("L2d({d})"))?;
        let x = std_lat(&format!("2E8(-1)+2U+<{}>", -2 * d))?;
        let y = std_lat(&format!("D16plus(-1)+2U+<{}>", -2 * d))?;
        if !(same_genus(&l, &x).map_err(e)? && same_genus(&x, &y).map_err(e)?) {
            return Err(format!("d = {d}: genus symbols differ"));
        }
    }
    // Same genus and same theta series; the root systems E8+E8 and D16
    // differ in the number of irreducible components.
    let (c1, c2) = (root_components(&std_lat("2E8(-1)")?)?, root_components(&std_lat("D16plus(-1)")?)?);
    ensure(c1 == 2 && c2 == 1, format!("d = 1..3 agree; root system components 2E8(-1) {c1}, D16plus(-1) {c2}"))
}

// Connected components of the graph on (-2)-vectors of a negative definite
// lattice, joined when not orthogonal.
fn root_components(l: &Lattice) -> Result<usize, String> {
    let roots = l.short_vectors(&BigInt::from(-2)).map_err(e)?;
    let mut seen = vec![false; roots.len()];
    let mut components = 0;
    for start in 0..roots.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..roots.len() {
                if !seen[j] && !l.pair(&roots[i], &roots[j]).is_zero() {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    Ok(components)
}

const CLAIMS: &[Claim] = &[
    Claim {
        id: "binary-forms/disc-A",
        topic: "binary-forms",
        statement: "D_A = Z/2 x Z/8 with q(t1) = 1/2, q(t2) = 3/8",
        check: check_disc_a,
    },
    Claim {
        id: "binary-forms/disc-B",
        topic: "binary-forms",
        statement: "D_B = Z/4 x Z/4, so A and B differ in genus",
        check: check_disc_b,
    },
    Claim { id: "binary-forms/A-vs-C", topic: "binary-forms", statement: "q_A and q_C are not isomorphic", check: check_a_vs_c },
    Claim { id: "genus/D-vs-E", topic: "genus", statement: "D and E share a genus but only D represents 2", check: check_d_vs_e },
    Claim {
        id: "overlattices/primitivity",
        topic: "overlattices",
        statement: "for 2e1 in diag(2,2), H -> D_T is injective and H -> D_K is not",
        check: check_primitivity_example,
    },
    Claim {
        id: "overlattices/unimodular-gluings",
        topic: "overlattices",
        statement: "kq(<4>, <-4>, 0) has |O(D_<4>)| = 2 elements, all giving U",
        check: check_unimodular_gluings,
    },
    Claim {
        id: "overlattices/complement-discriminants",
        topic: "overlattices",
        statement: "complements of e+f and x in U+<2> have discriminants 4 and 1",
        check: check_complement_discriminants,
    },
    Claim {
        id: "k3/lattice",
        topic: "k3-lattice",
        statement: "the K3 lattice is even unimodular of rank 22 and signature (3,19)",
        check: check_k3_lattice,
    },
    Claim {
        id: "k3/l2d-complement",
        topic: "k3-lattice",
        statement: "the complement of e3 + d f3 is L_2d",
        check: check_l2d_is_complement,
    },
    Claim {
        id: "polarised/generator-class",
        topic: "polarised-lattice",
        statement: "D_L14 = Z/14 with q(l/14) = 27/14",
        check: check_l2d_generator,
    },
    Claim {
        id: "polarised/orthogonal-group-order",
        topic: "polarised-lattice",
        statement: "|O(D_L2d)| = 2^p(d) for d = 2..12",
        check: check_orthogonal_group_orders,
    },
    Claim {
        id: "polarised/covering-degree",
        topic: "polarised-lattice",
        statement: "the stable covering has degree 2^(p(d)-1)",
        check: check_covering_degree,
    },
    Claim {
        id: "representations/rank-two",
        topic: "representations",
        statement: "representation and (-2)-vector statements for the rank-two examples",
        check: check_representations,
    },
    Claim {
        id: "representations/complement-genus",
        topic: "representations",
        statement: "the two rank-two Neron-Severi lattices have isometric complements",
        check: check_ns_genus,
    },
    Claim {
        id: "representations/e6-example",
        topic: "representations",
        statement: "for d = 7 both Neron-Severi lattices are A2(-1)+<14>; only the first has (-2)-classes orthogonal to h",
        check: check_e6_example,
    },
    Claim {
        id: "picard-rank-one/oguiso",
        topic: "picard-rank-one",
        statement: "rank-one FM counts equal 2^(p(d)-1)",
        check: check_rank_one,
    },
    Claim {
        id: "definite-transcendental/vc-orbits",
        topic: "definite-transcendental",
        statement: "v_c orbit counts (2p, p) for p = 5, 13 and none for p = 3",
        check: check_vc_orbits,
    },
    Claim {
        id: "unimodular-complements/genus",
        topic: "unimodular-complements",
        statement: "2E8(-1)+T and D16plus(-1)+T lie in the genus of L_2d",
        check: check_unimodular_complements,
    },
];

/// Runs every check whose id or topic contains `filter`. With `corrupt`
/// the reference values are replaced by wrong ones, which must make the
/// affected checks fail.
pub fn run_suite(filter: Option<&str>, corrupt: bool) -> Vec<ClaimOutcome> {
    let reference = if corrupt { Reference::corrupted() } else { Reference::standard() };
    CLAIMS
        .iter()
        .filter(|c| filter.is_none_or(|f| c.id.contains(f) || c.topic.contains(f)))
        .map(|c| {
            let (passed, detail) = match (c.check)(&reference) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            ClaimOutcome { id: c.id, topic: c.topic, statement: c.statement, passed, detail }
        })
        .collect()
}

/// Topic names in registry order, without repeats.
pub fn topics() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    for c in CLAIMS {
        if !out.contains(&c.topic) {
            out.push(c.topic);
        }
    }
    out
}
