use std::path::Path;

use lattice_fm::claims::{run_suite, topics};
use lattice_fm::discform::{discriminant_form, DiscriminantForm, FiniteQuadraticForm, FqfElement, FqfMap};
use lattice_fm::genus::{compare_genus, genus_symbol, GenusComparison};
use lattice_fm::k3::{
    count_vc_orbits, definite_isometry_images, eichler_invariant, fm_count_general, fm_count_rank_one, generic_hodge_images,
    oguiso_count, FmCandidate, FmCountInput, Provenance,
};
use lattice_fm::lattice::{Completeness, Definiteness, Embedding, Lattice, Representation};
use lattice_fm::overlattice::{
    classifying_subgroup, enumerate_gluings, glue, glue_pair, gluing_orbit_count, marked_gluing_orbit_count,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::files::{
    parse_matrix, parse_rational_vector, parse_vector, resolve_lattice, FmCountFile, ImageSource, LatticeFile, SubgroupFile,
};
use crate::report::Report;
use crate::Failure;

type Outcome = Result<Report, Failure>;

fn name_of(l: &Lattice, fallback: &str) -> String {
    l.label().unwrap_or(fallback).to_string()
}

fn strs<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(T::to_string).collect()
}

fn gram_json(l: &Lattice) -> Value {
    json!(l.gram().to_rows().iter().map(|r| strs(r)).collect::<Vec<_>>())
}

fn element_json(x: &FqfElement) -> Value {
    json!(x.coords())
}

// Representative of q mod 2 in (-1, 1].
fn signed(q: &BigRational) -> BigRational {
    if q > &BigRational::one() {
        q - BigRational::from_integer(2.into())
    } else {
        q.clone()
    }
}

fn form_json(q: &FiniteQuadraticForm) -> Value {
    json!({
        "invariant_factors": q.invariant_factors(),
        "generator_orders": q.orders(),
        "q_values": strs(&q.generator_q_values()),
        "bilinear": q.bilinear_matrix().iter().map(|r| strs(r)).collect::<Vec<_>>(),
        "order": q.order().to_string(),
        "length": q.min_generators(),
    })
}

pub fn disc_form(arg: &str) -> Outcome {
    let l = resolve_lattice(arg)?;
    let dm = discriminant_form(&l)?;
    let q = dm.form();
    let lifts: Vec<Vec<String>> = dm.lifts().iter().map(|v| strs(v)).collect();
    let mut result = form_json(q);
    result["lattice"] = json!(name_of(&l, arg));
    result["generator_lifts"] = json!(lifts);
    let mut r = Report::new(result).line(q.to_string());
    if !q.is_trivial() {
        let s: Vec<String> = q.generator_q_values().iter().map(|v| signed(v).to_string()).collect();
        r = r.line(format!("signed q = [{}]", s.join(", "))).line(format!("|D| = {}, length {}", q.order(), q.min_generators()));
        for (i, v) in lifts.iter().enumerate() {
            r = r.line(format!("g{} lifts to ({})", i + 1, v.join(", ")));
        }
    }
    Ok(r)
}

pub fn same_genus(a: &str, b: &str) -> Outcome {
    let (la, lb) = (resolve_lattice(a)?, resolve_lattice(b)?);
    let (ga, gb) = (genus_symbol(&la)?, genus_symbol(&lb)?);
    let cmp = compare_genus(&la, &lb)?;
    let (key, reason) = match cmp {
        GenusComparison::Same => ("same", "same genus".to_string()),
        GenusComparison::SignatureDiffers => {
            ("signature", format!("different genus: signatures differ ({} vs {})", ga.signature, gb.signature))
        }
        GenusComparison::GroupDiffers => (
            "group",
            format!(
                "different genus: discriminant groups differ ({:?} vs {:?})",
                ga.form.invariant_factors(),
                gb.form.invariant_factors()
            ),
        ),
        GenusComparison::FormDiffers => ("form", "different genus: discriminant forms are not isometric".to_string()),
    };
    Ok(Report::new(json!({ "same_genus": cmp == GenusComparison::Same, "reason": key }))
        .line(reason)
        .holds(cmp == GenusComparison::Same))
}

pub fn signature(arg: &str) -> Outcome {
    let l = resolve_lattice(arg)?;
    let s = l.signature();
    let kind = match l.definiteness() {
        Some(Definiteness::Positive) => "positive definite",
        Some(Definiteness::Negative) => "negative definite",
        None => "indefinite",
    };
    Ok(Report::new(json!({ "plus": s.plus, "minus": s.minus, "rank": l.rank(), "det": l.det().to_string(), "kind": kind }))
        .line(format!("signature {s}, rank {}, det {}, {kind}", l.rank(), l.det())))
}

fn vectors(raw: &[String]) -> Result<Vec<Vec<BigInt>>, Failure> {
    raw.iter().map(|s| parse_vector(s)).collect()
}

pub fn complement(arg: &str, raw: &[String], output: Option<&Path>) -> Outcome {
    let l = resolve_lattice(arg)?;
    let emb = Embedding::from_vectors(&l, &vectors(raw)?)?;
    let c = emb.orthogonal_complement();
    let basis = c.image_vectors();
    let mut r = Report::new(json!({
        "rank": c.domain().rank(),
        "gram": gram_json(c.domain()),
        "basis": basis.iter().map(|v| strs(v)).collect::<Vec<_>>(),
    }))
    .line(format!("complement of rank {}", c.domain().rank()))
    .line(format!("Gram {}", c.domain().gram()));
    for v in &basis {
        r = r.line(format!("basis vector ({})", strs(v).join(", ")));
    }
    if let Some(path) = output {
        LatticeFile::from_lattice(format!("{} complement", name_of(&l, arg)), c.domain()).write(path)?;
        r = r.note(format!("wrote {}", path.display()));
    }
    Ok(r)
}

pub fn primitive_check(arg: &str, raw: &[String]) -> Outcome {
    let l = resolve_lattice(arg)?;
    let emb = Embedding::from_vectors(&l, &vectors(raw)?)?;
    let index = emb.index_in_hull();
    let primitive = emb.is_primitive();
    let line = if primitive { "primitive".to_string() } else { format!("not primitive: index {index} in its saturation") };
    Ok(Report::new(json!({ "primitive": primitive, "index_in_saturation": index.to_string() })).line(line).holds(primitive))
}

pub fn divisor(arg: &str, raw: &str) -> Outcome {
    let l = resolve_lattice(arg)?;
    let v = parse_vector(raw)?;
    let d = l.divisor(&v)?;
    let n = l.norm(&v);
    Ok(Report::new(json!({ "divisor": d.to_string(), "norm": n.to_string() })).line(format!("div(v) = {d}, v^2 = {n}")))
}

pub fn represents(arg: &str, n: &str, bound: u64) -> Outcome {
    let l = resolve_lattice(arg)?;
    let n: BigInt = n.trim().parse().map_err(|_| Failure::Parse(format!("not an integer: {n}")))?;
    Ok(match l.represents(&n, bound)? {
        Representation::Witness { vector, primitive } => {
            Report::new(json!({ "represented": true, "witness": strs(&vector), "primitive": primitive })).line(format!(
                "{n} is represented by ({}){}",
                strs(&vector).join(", "),
                if primitive { ", a primitive vector" } else { "" }
            ))
        }
        Representation::NotFoundUpToBound { bound, completeness } => {
            let (key, what) = match completeness {
                Completeness::Partial => ("partial", "coordinate box searched; absence is not proved"),
                Completeness::DefiniteExhaustive => {
                    ("definite-exhaustive", "definite lattice, every vector of that norm enumerated")
                }
                Completeness::IsotropicBinaryExhaustive => {
                    ("isotropic-binary-exhaustive", "isotropic binary lattice, every candidate checked")
                }
            };
            Report::new(json!({ "represented": false, "bound": bound, "completeness": key }))
                .line(format!("{n} is not represented up to bound {bound} ({what})"))
                .holds(false)
        }
        Representation::ObstructedMod { modulus } => {
            Report::new(json!({ "represented": false, "obstructed_mod": modulus.to_string(), "completeness": "proved" }))
                .line(format!("{n} is not represented: no solution modulo {modulus}"))
                .holds(false)
        }
    })
}

fn subgroup_generators(
    dm: &DiscriminantForm,
    disc: &[String],
    lift: &[String],
    file: Option<&Path>,
) -> Result<Vec<FqfElement>, Failure> {
    let mut disc_coords: Vec<Vec<i64>> = Vec::new();
    for s in disc {
        disc_coords.push(
            parse_vector(s)?
                .iter()
                .map(|x| i64::try_from(x).map_err(|_| Failure::Validation(format!("coordinate out of range: {x}"))))
                .collect::<Result<_, _>>()?,
        );
    }
    let mut lifts: Vec<Vec<BigRational>> = lift.iter().map(|s| parse_rational_vector(s)).collect::<Result<_, _>>()?;
    match file.map(SubgroupFile::read).transpose()? {
        Some(SubgroupFile::Disc(v)) => disc_coords.extend(v),
        Some(SubgroupFile::Lift(v)) => {
            for row in v {
                lifts.push(row.iter().map(|t| crate::files::parse_rational(t)).collect::<Result<_, _>>()?);
            }
        }
        None => {}
    }
    let mut gens = Vec::new();
    for c in &disc_coords {
        gens.push(dm.form().element(c)?);
    }
    for w in &lifts {
        gens.push(dm.class_of(w)?);
    }
    Ok(gens)
}

pub fn glue_cmd(arg: &str, disc: &[String], lift: &[String], file: Option<&Path>, output: Option<&Path>) -> Outcome {
    let l = resolve_lattice(arg)?;
    let dm = discriminant_form(&l)?;
    let gens = subgroup_generators(&dm, disc, lift, file)?;
    let h = dm.form().span(&gens)?;
    let res = glue(&dm, &h)?;
    let g = &res.lattice;
    let mut r = Report::new(json!({
        "subgroup_order": h.order(),
        "index": res.index.to_string(),
        "gram": gram_json(g),
        "embedding": res.embedding.matrix().to_rows().iter().map(|r| strs(r)).collect::<Vec<_>>(),
        "det": g.det().to_string(),
    }))
    .line(format!("index {}, |H| = {}", res.index, h.order()))
    .line(format!("Gram {}", g.gram()))
    .line(format!("det {}", g.det()));
    if let Some(path) = output {
        LatticeFile::from_lattice(format!("{} glued", name_of(&l, arg)), g).write(path)?;
        r = r.note(format!("wrote {}", path.display()));
    }
    Ok(r)
}

pub fn classify(sub: &str, ambient: &str, matrix: &str) -> Outcome {
    let m = resolve_lattice(sub)?;
    let l = resolve_lattice(ambient)?;
    let emb = Embedding::new(m.clone(), l, parse_matrix(matrix)?)?;
    let dm = discriminant_form(&m)?;
    let h = classifying_subgroup(&dm, &emb)?;
    let gens: Vec<Value> = h.generators().iter().map(element_json).collect();
    let elems: Vec<Value> = h.elements(dm.form()).iter().map(element_json).collect();
    let mut r = Report::new(json!({ "order": h.order(), "generators": gens, "elements": elems }))
        .line(format!("classifying subgroup of order {}", h.order()));
    for x in h.generators() {
        r = r.line(format!("generator {x}, q = {}", dm.form().q(x)));
    }
    Ok(r)
}

fn target_form(target: Option<&str>) -> Result<FiniteQuadraticForm, Failure> {
    Ok(match target {
        Some(t) => discriminant_form(&resolve_lattice(t)?)?.form().clone(),
        None => FiniteQuadraticForm::trivial(),
    })
}

pub fn gluings(t_arg: &str, k_arg: &str, target: Option<&str>) -> Outcome {
    let (t, k) = (resolve_lattice(t_arg)?, resolve_lattice(k_arg)?);
    let q = target_form(target)?;
    let list = enumerate_gluings(&t, &k, &q)?;
    let mut items = Vec::new();
    let mut r = Report::new(Value::Null).line(format!("{} gluings with H^perp/H = {q}", list.len()));
    for (i, g) in list.iter().enumerate() {
        let glued = glue_pair(&t, &k, g)?;
        let pairs: Vec<String> = g.graph.generators.iter().zip(&g.graph.images).map(|(x, y)| format!("{x} -> {y}")).collect();
        r = r.line(format!("#{}: |H| = {}, {}, Gram {}", i + 1, g.subgroup.order(), pairs.join(", "), glued.lattice.gram()));
        items.push(json!({
            "subgroup_order": g.subgroup.order(),
            "generators": g.graph.generators.iter().map(element_json).collect::<Vec<_>>(),
            "images": g.graph.images.iter().map(element_json).collect::<Vec<_>>(),
            "gram": gram_json(&glued.lattice),
        }));
    }
    r.result = json!({ "count": list.len(), "gluings": items });
    Ok(r)
}

fn side_images(l: &Lattice, sign_only: bool, arg: &str) -> Result<(Vec<FqfMap>, &'static str), Failure> {
    let dl = discriminant_form(l)?;
    if l.is_definite() || dl.form().is_trivial() {
        Ok((definite_isometry_images(l, &dl)?, "full isometry group"))
    } else if sign_only {
        Ok((generic_hodge_images(dl.form()), "only +-id"))
    } else {
        Err(Failure::Precondition(format!("{arg} is indefinite; its isometry group is not searched (use --sign-only for +-id)")))
    }
}

pub fn orbit_count(t_arg: &str, k_arg: &str, target: Option<&str>, sign_only: bool) -> Outcome {
    let (t, k) = (resolve_lattice(t_arg)?, resolve_lattice(k_arg)?);
    let q = target_form(target)?;
    let (dt, dk) = (discriminant_form(&t)?, discriminant_form(&k)?);
    let (left, lsrc) = side_images(&t, sign_only, t_arg)?;
    let (right, rsrc) = side_images(&k, sign_only, k_arg)?;
    let list = enumerate_gluings(&t, &k, &q)?;
    let orbits = gluing_orbit_count(dt.form(), dk.form(), &list, &left, &right)?;
    let marked = marked_gluing_orbit_count(dt.form(), dk.form(), &q, &list, &left, &right)?;
    Ok(Report::new(json!({ "gluings": list.len(), "orbits": orbits, "marked_orbits": marked }))
        .line(format!("{} gluings, {orbits} orbits, {marked} orbits of marked gluings", list.len()))
        .note(format!("{t_arg}: {lsrc}; {k_arg}: {rsrc}")))
}

pub fn fm_count(rank_one: Option<u64>, input: Option<&Path>) -> Outcome {
    if let Some(d) = rank_one {
        let n = fm_count_rank_one(d)?;
        let formula = oguiso_count(d);
        return Ok(Report::new(json!({ "d": d, "count": n, "closed_form": formula }))
            .line(format!("{n}"))
            .note(format!("double cosets in O(D) for d = {d}; closed form 2^(p(d)-1) gives {formula}")));
    }
    let path = input.ok_or_else(|| Failure::Parse("fm-count needs --rank-one or --input".into()))?;
    let spec = FmCountFile::read(path)?;
    let base = path.parent();
    let mut candidates = Vec::new();
    let mut notes = Vec::new();
    for (i, c) in spec.candidates.iter().enumerate() {
        let label = c.label.clone().unwrap_or_else(|| c.lattice.to_string());
        let s = c.lattice.resolve(base)?;
        let ds = discriminant_form(&s)?;
        let cand = match c.o_images {
            ImageSource::Automatic => {
                if !s.is_definite() && !ds.form().is_trivial() {
                    return Err(Failure::Precondition(format!(
                        "candidate {} ({label}) is indefinite; set \"o_images\": \"sign\"",
                        i + 1
                    )));
                }
                FmCandidate::automatic(label, &s)?
            }
            ImageSource::Sign => {
                notes.push(format!("{label}: O(S) replaced by +-id"));
                FmCandidate {
                    label,
                    lattice: Some(s.clone()),
                    form: ds.form().clone(),
                    o_images: generic_hodge_images(ds.form()),
                    hodge_images: generic_hodge_images(ds.form()),
                    provenance: Provenance::Manual,
                }
            }
        };
        candidates.push(cand);
    }
    let required_genus = spec.required_genus.as_ref().map(|g| g.resolve(base).and_then(|l| Ok(genus_symbol(&l)?))).transpose()?;
    let count = fm_count_general(&FmCountInput { candidates, required_genus })?;
    let mut r = Report::new(json!({
        "count": count.total,
        "breakdown": count.breakdown.iter().map(|(l, n)| json!({ "label": l, "count": n })).collect::<Vec<_>>(),
    }))
    .line(format!("{}", count.total));
    for (l, n) in &count.breakdown {
        r = r.line(format!("  {l}: {n}"));
    }
    for n in notes {
        r = r.note(n);
    }
    Ok(r)
}

pub fn eichler(lattice: Option<&str>, vector: Option<&str>, vc: Option<u64>) -> Outcome {
    if let Some(p) = vc {
        let o = count_vc_orbits(p)?;
        let mut r = Report::new(json!({
            "p": p,
            "vectors": o.vectors.iter().map(|v| json!({
                "c": v.c,
                "vector": strs(&v.vector),
                "class": element_json(&v.invariant.class),
            })).collect::<Vec<_>>(),
            "stable_orbits": o.stable_orbits,
            "full_orbit_lower_bound": o.full_orbit_lower_bound,
        }))
        .line(format!(
            "p = {p}: {} vectors v_c, {} stable orbits, at least {} orbits",
            o.vectors.len(),
            o.stable_orbits,
            o.full_orbit_lower_bound
        ));
        for v in &o.vectors {
            r = r.line(format!("  c = {}: class {}", v.c, v.invariant.class));
        }
        return Ok(r);
    }
    let (Some(arg), Some(raw)) = (lattice, vector) else {
        return Err(Failure::Parse("eichler needs a lattice and --vector, or --vc p".into()));
    };
    let l = resolve_lattice(arg)?;
    let inv = eichler_invariant(&l, &parse_vector(raw)?)?;
    Ok(Report::new(json!({
        "length": inv.length.to_string(),
        "divisor": inv.divisor.to_string(),
        "class": element_json(&inv.class),
    }))
    .line(format!("v^2 = {}, div(v) = {}, [v/div(v)] = {}", inv.length, inv.divisor, inv.class)))
}

pub fn suite(filter: Option<&str>, corrupt: bool) -> Outcome {
    let outcomes = run_suite(filter, corrupt);
    if outcomes.is_empty() {
        return Err(Failure::Validation(format!(
            "no checks match {:?}; topics are {}",
            filter.unwrap_or(""),
            topics().join(", ")
        )));
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let mut r = Report::new(json!({
        "passed": passed,
        "total": outcomes.len(),
        "checks": outcomes.iter().map(|o| json!({
            "id": o.id,
            "topic": o.topic,
            "statement": o.statement,
            "passed": o.passed,
            "detail": o.detail,
        })).collect::<Vec<_>>(),
    }));
    for o in &outcomes {
        r = r.line(format!(
            "{} {:<34} [{}] {}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.topic,
            o.statement,
            o.detail
        ));
    }
    if corrupt {
        r = r.note("reference values deliberately corrupted");
    }
    Ok(r.line(format!("{passed} of {} checks passed", outcomes.len())).holds(passed == outcomes.len()))
}
