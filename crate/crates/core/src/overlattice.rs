//! Overlattices from isotropic subgroups, classifying subgroups of finite
//! index embeddings, gluing data `kq(T, K, q)` and orbit counts on them.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::discform::{
    discriminant_form, fqf_isomorphic, DiscriminantForm, FiniteQuadraticForm, FqfElement, FqfMap, FqfSubgroup,
};
use crate::error::{Error, Result};
use crate::genus::{nikulin_unique_in_genus, same_genus, Uniqueness};
use crate::intlinalg::{common_denominator, hermite_normal_form, IntMatrix};
use crate::lattice::{Embedding, Lattice};
use crate::par::{self, Execution};

/// Overlattice `L ⊃ M` with the embedding `M → L` and the index `[L : M]`.
#[derive(Clone, Debug)]
pub struct OverlatticeResult {
    pub lattice: Lattice,
    pub embedding: Embedding,
    pub index: BigInt,
}

/// `L_H = π⁻¹(H) ⊂ M^∨` for an isotropic subgroup `H` of `D_M`. The basis of
/// `L_H` is the HNF basis of `M + Σ Z·lift(h)`, so equal subgroups give
/// identical Gram matrices.
pub fn glue(dm: &DiscriminantForm, h: &FqfSubgroup) -> Result<OverlatticeResult> {
    if !dm.form().is_isotropic(h) {
        return Err(Error::NotIsotropic);
    }
    let g = dm.gram();
    let r = g.rows();
    let lifts: Vec<Vec<BigRational>> = h.generators().iter().map(|x| dm.lift(x)).collect();
    let all: Vec<BigRational> = lifts.iter().flatten().cloned().collect();
    let n = common_denominator(&all);
    let mut rows: Vec<Vec<BigInt>> = (0..r)
        .map(|i| {
            let mut v = vec![BigInt::zero(); r];
            v[i] = n.clone();
            v
        })
        .collect();
    rows.extend(lifts.iter().map(|w| w.iter().map(|x| (x * BigRational::from_integer(n.clone())).to_integer()).collect()));
    let hnf = hermite_normal_form(&IntMatrix::from_rows(&rows));
    // Rows of `scaled` are the basis of L_H times n, in M-coordinates.
    let scaled = IntMatrix::from_rows(&(0..r).map(|i| hnf.h.row(i)).collect::<Vec<_>>());
    let n2 = &n * &n;
    let g_scaled = &(&scaled * g) * &scaled.transpose();
    let mut gram_rows = Vec::with_capacity(r);
    for i in 0..r {
        let mut row = Vec::with_capacity(r);
        for j in 0..r {
            let x = &g_scaled[(i, j)];
            if !(x % &n2).is_zero() {
                return Err(Error::NotIsotropic);
            }
            row.push(x / &n2);
        }
        gram_rows.push(row);
    }
    let lattice = Lattice::new(IntMatrix::try_from_rows(gram_rows)?)?;
    // M-basis in L-coordinates: e_i = c·B with B = scaled/n, so c = n·e_i·scaled⁻¹.
    let inv = scaled.to_rational().inverse().ok_or(Error::Degenerate)?;
    let mut cols = Vec::with_capacity(r);
    for i in 0..r {
        let c: Vec<BigInt> = (0..r)
            .map(|j| {
                let v = &inv[(i, j)] * BigRational::from_integer(n.clone());
                if v.is_integer() {
                    Ok(v.to_integer())
                } else {
                    Err(Error::NotIsotropic)
                }
            })
            .collect::<Result<_>>()?;
        cols.push(c);
    }
    let matrix = IntMatrix::from_columns(r, &cols);
    let index = matrix.det().abs();
    let domain = Lattice::new(g.clone())?;
    let embedding = Embedding::new(domain, lattice.clone(), matrix)?;
    Ok(OverlatticeResult { lattice, embedding, index })
}

/// Image of `L/iM` in `D_M` for a finite-index embedding `i: M → L`.
pub fn classifying_subgroup(dm: &DiscriminantForm, emb: &Embedding) -> Result<FqfSubgroup> {
    let (rd, ra) = (emb.domain().rank(), emb.ambient().rank());
    if rd != ra {
        return Err(Error::RankMismatch { domain: rd, ambient: ra });
    }
    if emb.domain().gram() != dm.gram() {
        return Err(Error::DimensionMismatch("discriminant form belongs to a different lattice".into()));
    }
    let inv = emb.matrix().to_rational().inverse().ok_or(Error::Degenerate)?;
    let classes: Vec<FqfElement> = (0..rd).map(|j| dm.class_of(&inv.col(j))).collect::<Result<_>>()?;
    dm.form().span(&classes)
}

/// Graph presentation `H = {(x, γx) : x ∈ Γ}` of a gluing subgroup of
/// `D_T ⊕ D_K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingGraph {
    /// `Γ ⊂ D_T`.
    pub gamma: FqfSubgroup,
    /// Generators of `Γ` and their images under `γ` in `D_K`.
    pub generators: Vec<FqfElement>,
    pub images: Vec<FqfElement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitProjections {
    pub t_injective: bool,
    pub k_injective: bool,
    pub graph: Option<GluingGraph>,
}

fn split(x: &FqfElement, kt: usize) -> (Vec<i64>, Vec<i64>) {
    let c: Vec<i64> = x.coords().iter().map(|&v| v as i64).collect();
    (c[..kt].to_vec(), c[kt..].to_vec())
}

fn join(dt: &FiniteQuadraticForm, xt: &FqfElement, xk: &FqfElement) -> Vec<i64> {
    let mut c: Vec<i64> = xt.coords().iter().map(|&v| v as i64).collect();
    c.extend(xk.coords().iter().map(|&v| v as i64));
    debug_assert_eq!(xt.coords().len(), dt.generator_count());
    c
}

/// Injectivity of `H → D_T` and `H → D_K` for `H ⊂ D_T ⊕ D_K` (product
/// presentation, `D_T` generators first), with the graph data when both are
/// injective.
pub fn split_projections(dt: &FiniteQuadraticForm, dk: &FiniteQuadraticForm, h: &FqfSubgroup) -> Result<SplitProjections> {
    let product = dt.direct_sum(dk);
    let kt = dt.generator_count();
    let elems = h.elements(&product);
    let mut t_parts = std::collections::HashSet::new();
    let mut k_parts = std::collections::HashSet::new();
    for x in &elems {
        let (a, b) = split(x, kt);
        t_parts.insert(a);
        k_parts.insert(b);
    }
    let t_injective = t_parts.len() == elems.len();
    let k_injective = k_parts.len() == elems.len();
    let graph = if t_injective && k_injective {
        let mut generators = Vec::new();
        let mut images = Vec::new();
        for g in h.generators() {
            let (a, b) = split(g, kt);
            generators.push(dt.element(&a)?);
            images.push(dk.element(&b)?);
        }
        Some(GluingGraph { gamma: dt.span(&generators)?, generators, images })
    } else {
        None
    };
    Ok(SplitProjections { t_injective, k_injective, graph })
}

/// Element of `kq(T, K, q)`: `H ⊂ D_T ⊕ D_K` with both projections
/// injective, in graph form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingDatum {
    pub subgroup: FqfSubgroup,
    pub graph: GluingGraph,
}

impl GluingDatum {
    fn from_graph(dt: &FiniteQuadraticForm, product: &FiniteQuadraticForm, graph: GluingGraph) -> Result<Self> {
        let gens: Vec<FqfElement> =
            graph.generators.iter().zip(&graph.images).map(|(x, y)| product.element(&join(dt, x, y))).collect::<Result<_>>()?;
        let subgroup = product.span(&gens)?;
        Ok(GluingDatum { subgroup, graph })
    }
}

/// `kq(T, K, q)` for lattices `T`, `K`.
pub fn enumerate_gluings(t: &Lattice, k: &Lattice, target: &FiniteQuadraticForm) -> Result<Vec<GluingDatum>> {
    let dt = discriminant_form(t)?;
    let dk = discriminant_form(k)?;
    enumerate_gluings_of_forms(dt.form(), dk.form(), target, Execution::default())
}

/// `kq` for discriminant forms: every isotropic `H ⊂ D_T ⊕ D_K` with both
/// projections injective and `H^⊥/H ≅ target`. Candidates are graphs of
/// injective anti-isometries `γ: Γ → D_K` (`q_K∘γ = −q_T`), with
/// `|Γ|² = |D_T|·|D_K| / |target|`.
pub fn enumerate_gluings_of_forms(
    dt: &FiniteQuadraticForm,
    dk: &FiniteQuadraticForm,
    target: &FiniteQuadraticForm,
    exec: Execution,
) -> Result<Vec<GluingDatum>> {
    let product = dt.direct_sum(dk);
    let limit = par::group_limit();
    if product.order() > limit as u128 {
        return Err(Error::GroupTooLarge { order: product.order(), limit });
    }
    let total = dt.order() * dk.order();
    if target.order() == 0 || !total.is_multiple_of(target.order()) {
        return Ok(Vec::new());
    }
    let square = total / target.order();
    let side = (square as f64).sqrt().round() as u128;
    let Some(side) = (side.saturating_sub(1)..=side + 1).find(|s| s * s == square) else {
        return Ok(Vec::new());
    };
    let gammas: Vec<FqfSubgroup> = dt.all_subgroups()?.into_iter().filter(|s| s.order() as u128 == side).collect();
    let dk_neg = dk.negate();
    let per_gamma = par::map(exec, gammas, |gamma| -> Result<Vec<GluingDatum>> {
        let mut out = Vec::new();
        for (gens, images) in anti_isometries(dt, &dk_neg, &gamma)? {
            let graph = GluingGraph { gamma: gamma.clone(), generators: gens, images };
            let datum = GluingDatum::from_graph(dt, &product, graph)?;
            if fqf_isomorphic(&product.quotient_form(&datum.subgroup)?, target)?.is_some() {
                out.push(datum);
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for part in per_gamma {
        all.extend(part?);
    }
    Ok(all)
}

// Injective maps γ: Γ → D_K with q_K(γx) = −q_T(x), i.e. isometric into
// `dk_neg`. Built generator by generator, with the consistency condition
// t·y = γ(t·g) where t is the order of g modulo the span so far.
fn anti_isometries(
    dt: &FiniteQuadraticForm,
    dk_neg: &FiniteQuadraticForm,
    gamma: &FqfSubgroup,
) -> Result<Vec<(Vec<FqfElement>, Vec<FqfElement>)>> {
    let gens: Vec<FqfElement> = gamma.generators().to_vec();
    let k_elems = dk_neg.elements()?;
    let t_size = dt.order() as usize;

    struct State {
        map: Vec<Option<usize>>,
        domain: Vec<usize>,
        image_member: Vec<bool>,
    }

    fn rec(
        dt: &FiniteQuadraticForm,
        dk: &FiniteQuadraticForm,
        gens: &[FqfElement],
        k_elems: &[FqfElement],
        chosen: &mut Vec<FqfElement>,
        st: &mut State,
        out: &mut Vec<(Vec<FqfElement>, Vec<FqfElement>)>,
    ) {
        let i = chosen.len();
        if i == gens.len() {
            out.push((gens.to_vec(), chosen.clone()));
            return;
        }
        let g = &gens[i];
        // Relative order of g modulo the current domain.
        let mut t = 1u64;
        let mut m = g.clone();
        while st.map[dt.index_of(&m)].is_none() {
            m = dt.add(&m, g);
            t += 1;
        }
        let target_tg = st.map[dt.index_of(&m)].unwrap();
        for y in k_elems {
            if dk.q(y) != dt.q(g) {
                continue;
            }
            if chosen.iter().zip(gens).any(|(yj, gj)| dk.b(y, yj) != dt.b(g, gj)) {
                continue;
            }
            if dk.index_of(&dk.scale(t as i64, y)) != target_tg {
                continue;
            }
            // Injectivity: k·y must avoid the image for 0 < k < t.
            let mut ky = y.clone();
            let mut ok = true;
            for _ in 1..t {
                if st.image_member[dk.index_of(&ky)] {
                    ok = false;
                    break;
                }
                ky = dk.add(&ky, y);
            }
            if !ok {
                continue;
            }
            let base: Vec<usize> = st.domain.clone();
            let mut added = Vec::new();
            let mut shift_t = g.clone();
            let mut shift_k = y.clone();
            for _ in 1..t {
                for &s in &base {
                    let xs = dt.element_at(s);
                    let img = dk.element_at(st.map[s].unwrap());
                    let x_new = dt.index_of(&dt.add(&xs, &shift_t));
                    let y_new = dk.index_of(&dk.add(&img, &shift_k));
                    st.map[x_new] = Some(y_new);
                    st.image_member[y_new] = true;
                    st.domain.push(x_new);
                    added.push((x_new, y_new));
                }
                shift_t = dt.add(&shift_t, g);
                shift_k = dk.add(&shift_k, y);
            }
            chosen.push(y.clone());
            rec(dt, dk, gens, k_elems, chosen, st, out);
            chosen.pop();
            for (x, yy) in added {
                st.map[x] = None;
                st.image_member[yy] = false;
            }
            st.domain.truncate(base.len());
        }
    }

    let mut map = vec![None; t_size];
    map[0] = Some(0);
    let mut image_member = vec![false; dk_neg.order() as usize];
    image_member[0] = true;
    let mut st = State { map, domain: vec![0], image_member };
    let mut out = Vec::new();
    rec(dt, dk_neg, &gens, &k_elems, &mut Vec::new(), &mut st, &mut out);
    Ok(out)
}

/// Overlattice of `T ⊕ K` for a gluing datum.
pub fn glue_pair(t: &Lattice, k: &Lattice, datum: &GluingDatum) -> Result<OverlatticeResult> {
    let dm = discriminant_form(t)?.direct_sum(&discriminant_form(k)?);
    glue(&dm, &datum.subgroup)
}

// Union-find with path halving.
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
    fn classes(&mut self) -> usize {
        (0..self.0.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Number of orbits of `f ↦ g∘f∘h⁻¹` on `group` for `g` in the subgroup
/// generated by `left` and `h` in the subgroup generated by `right`.
pub fn double_orbit_count(form: &FiniteQuadraticForm, group: &[FqfMap], left: &[FqfMap], right: &[FqfMap]) -> Result<usize> {
    let index: HashMap<&FqfMap, usize> = group.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut uf = UnionFind::new(group.len());
    for (i, f) in group.iter().enumerate() {
        for g in left {
            let j = *index.get(&g.compose(f, form)).ok_or(Error::NotClosed)?;
            uf.union(i, j);
        }
        for h in right {
            let j = *index.get(&f.compose(h, form)).ok_or(Error::NotClosed)?;
            uf.union(i, j);
        }
    }
    Ok(uf.classes())
}

/// All elements of the subgroup of `O(form)` generated by `gens`
/// (the identity included), sorted.
pub fn group_closure(form: &FiniteQuadraticForm, gens: &[FqfMap]) -> Result<Vec<FqfMap>> {
    for g in gens {
        if !form.is_automorphism(g) {
            return Err(Error::NotAnAutomorphism(format!("{:?}", g.images())));
        }
    }
    let limit = par::group_limit();
    let mut seen: std::collections::HashSet<FqfMap> = std::collections::HashSet::new();
    let id = FqfMap::identity(form);
    seen.insert(id.clone());
    let mut queue = vec![id];
    while let Some(f) = queue.pop() {
        for g in gens {
            let h = g.compose(&f, form);
            if seen.insert(h.clone()) {
                if seen.len() > limit {
                    return Err(Error::GroupTooLarge { order: seen.len() as u128, limit });
                }
                queue.push(h);
            }
        }
    }
    let mut out: Vec<FqfMap> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

// Image of H under g × h acting on D_T ⊕ D_K.
fn act_on_subgroup(
    dt: &FiniteQuadraticForm,
    dk: &FiniteQuadraticForm,
    product: &FiniteQuadraticForm,
    g: &FqfMap,
    h: &FqfMap,
    x: &FqfElement,
) -> Result<FqfElement> {
    let kt = dt.generator_count();
    let (a, b) = split(x, kt);
    let xt = dt.element(&a)?;
    let xk = dk.element(&b)?;
    product.element(&join(dt, &g.apply(dt, &xt), &h.apply(dk, &xk)))
}

fn gluing_orbits(
    dt: &FiniteQuadraticForm,
    dk: &FiniteQuadraticForm,
    gluings: &[GluingDatum],
    left: &[FqfMap],
    right: &[FqfMap],
) -> Result<UnionFind> {
    let product = dt.direct_sum(dk);
    let index: HashMap<&[usize], usize> = gluings.iter().enumerate().map(|(i, d)| (d.subgroup.indices(), i)).collect();
    let id_t = FqfMap::identity(dt);
    let id_k = FqfMap::identity(dk);
    let moves: Vec<(&FqfMap, &FqfMap)> = left.iter().map(|g| (g, &id_k)).chain(right.iter().map(|h| (&id_t, h))).collect();
    let mut uf = UnionFind::new(gluings.len());
    for (i, d) in gluings.iter().enumerate() {
        for (g, h) in &moves {
            let imgs: Vec<FqfElement> =
                d.subgroup.generators().iter().map(|x| act_on_subgroup(dt, dk, &product, g, h, x)).collect::<Result<_>>()?;
            let moved = product.span(&imgs)?;
            let j = *index.get(moved.indices()).ok_or(Error::NotClosed)?;
            uf.union(i, j);
        }
    }
    Ok(uf)
}

/// Orbits of `⟨left⟩ × ⟨right⟩ ⊂ O(D_T) × O(D_K)` on a set of gluings.
pub fn gluing_orbit_count(
    dt: &FiniteQuadraticForm,
    dk: &FiniteQuadraticForm,
    gluings: &[GluingDatum],
    left: &[FqfMap],
    right: &[FqfMap],
) -> Result<usize> {
    Ok(gluing_orbits(dt, dk, gluings, left, right)?.classes())
}

/// Orbits of the same group on pairs `(H, φ)` with `φ: H^⊥/H ≅ target`.
/// Over an orbit of `H` these are the orbits of `Stab(H)` on the
/// `O(target)`-torsor of markings, so each `H`-orbit contributes
/// `|O(target)| / |image of Stab(H) in O(H^⊥/H)|`.
pub fn marked_gluing_orbit_count(
    dt: &FiniteQuadraticForm,
    dk: &FiniteQuadraticForm,
    target: &FiniteQuadraticForm,
    gluings: &[GluingDatum],
    left: &[FqfMap],
    right: &[FqfMap],
) -> Result<usize> {
    let mut uf = gluing_orbits(dt, dk, gluings, left, right)?;
    let product = dt.direct_sum(dk);
    let o_target = target.orthogonal_group()?.len();
    let g_t = group_closure(dt, left)?;
    let g_k = group_closure(dk, right)?;
    let mut total = 0;
    for i in 0..gluings.len() {
        if uf.find(i) != i {
            continue;
        }
        let h = &gluings[i].subgroup;
        let perp = product.orthogonal_subgroup(h)?;
        let sq = product.subquotient(&perp, h)?;
        let mut induced: std::collections::HashSet<FqfMap> = std::collections::HashSet::new();
        for g in &g_t {
            for k in &g_k {
                let imgs: Vec<FqfElement> =
                    h.generators().iter().map(|x| act_on_subgroup(dt, dk, &product, g, k, x)).collect::<Result<_>>()?;
                if product.span(&imgs)?.indices() != h.indices() {
                    continue;
                }
                let images: Vec<FqfElement> = sq
                    .lifts()
                    .iter()
                    .map(|w| act_on_subgroup(dt, dk, &product, g, k, w).map(|m| sq.project(&m)))
                    .collect::<Result<_>>()?;
                induced.insert(FqfMap::new(images));
            }
        }
        total += o_target / induced.len();
    }
    Ok(total)
}

/// Matches `kq(T, K, q)` with `kq(T, K′, q)` through an isometry
/// `D_K ≅ D_K′`, for `K′` in the genus of `K` and an overlattice genus
/// (represented by `overlattice`) whose members are unique in their genus.
pub fn transfer_gluings(
    t: &Lattice,
    k: &Lattice,
    k_prime: &Lattice,
    target: &FiniteQuadraticForm,
    overlattice: &Lattice,
) -> Result<Vec<(GluingDatum, GluingDatum)>> {
    if !same_genus(k, k_prime)? {
        return Err(Error::GenusMismatch);
    }
    if nikulin_unique_in_genus(overlattice)? != Uniqueness::Yes {
        return Err(Error::UniquenessUnknown);
    }
    let dt = discriminant_form(t)?;
    let dk = discriminant_form(k)?;
    let dk2 = discriminant_form(k_prime)?;
    let phi = fqf_isomorphic(dk.form(), dk2.form())?.ok_or(Error::GenusMismatch)?;
    let product2 = dt.form().direct_sum(dk2.form());
    let mut out = Vec::new();
    for d in enumerate_gluings(t, k, target)? {
        let images: Vec<FqfElement> = d.graph.images.iter().map(|y| phi.apply(dk2.form(), y)).collect();
        let graph = GluingGraph { gamma: d.graph.gamma.clone(), generators: d.graph.generators.clone(), images };
        let moved = GluingDatum::from_graph(dt.form(), &product2, graph)?;
        out.push((d, moved));
    }
    Ok(out)
}

/// Embeddings of the summands `T` (first `t_rank` basis vectors of `M`) and
/// `K` into a glued lattice.
pub fn summand_embeddings(result: &OverlatticeResult, t_rank: usize) -> Result<(Embedding, Embedding)> {
    let m = result.embedding.matrix();
    let r = m.rows();
    let t_cols: Vec<usize> = (0..t_rank).collect();
    let k_cols: Vec<usize> = (t_rank..r).collect();
    let t = Embedding::from_vectors(&result.lattice, &column_vectors(&m.select_columns(&t_cols)))?;
    let k = Embedding::from_vectors(&result.lattice, &column_vectors(&m.select_columns(&k_cols)))?;
    Ok((t, k))
}

fn column_vectors(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..m.cols()).map(|j| m.col(j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::is_isomorphic_definite;
    use crate::lattice::{standard_lattice, Signature};
    use num_traits::One;

    fn lat(rows: &[Vec<i64>]) -> Lattice {
        Lattice::from_rows(rows).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn glue_trivial_subgroup_is_identity() {
        let m = lat(&[vec![2, 4], vec![4, 0]]);
        let dm = discriminant_form(&m).unwrap();
        let res = glue(&dm, &dm.form().trivial_subgroup()).unwrap();
        assert_eq!(res.index, BigInt::one());
        assert_eq!(res.lattice.gram(), m.gram());
        assert!(classifying_subgroup(&dm, &res.embedding).unwrap().is_trivial());
    }

    #[test]
    fn glue_recovers_diag_two_two() {
        let m = lat(&[vec![8, 0], vec![0, 2]]);
        let dm = discriminant_form(&m).unwrap();
        let x = dm.class_of(&[r(1, 2), r(0, 1)]).unwrap();
        let h = dm.form().span(&[x]).unwrap();
        let res = glue(&dm, &h).unwrap();
        assert_eq!(res.index, BigInt::from(2));
        let target = lat(&[vec![2, 0], vec![0, 2]]);
        assert!(is_isomorphic_definite(&res.lattice, &target).unwrap().is_some());
        assert_eq!(classifying_subgroup(&dm, &res.embedding).unwrap(), h);
    }

    #[test]
    fn classifying_subgroup_of_the_worked_embedding() {
        // T = span(2e1), K = span(e2) in diag(2,2).
        let l = lat(&[vec![2, 0], vec![0, 2]]);
        let m = lat(&[vec![8, 0], vec![0, 2]]);
        let emb = Embedding::new(m.clone(), l, IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]])).unwrap();
        let dt = discriminant_form(&lat(&[vec![8]])).unwrap();
        let dk = discriminant_form(&lat(&[vec![2]])).unwrap();
        let dm = dt.direct_sum(&dk);
        let h = classifying_subgroup(&dm, &emb).unwrap();
        assert_eq!(h.order(), 2);
        let sp = split_projections(dt.form(), dk.form(), &h).unwrap();
        assert!(sp.t_injective);
        assert!(!sp.k_injective);
        assert!(sp.graph.is_none());
        let triv = split_projections(dt.form(), dk.form(), &dm.form().trivial_subgroup()).unwrap();
        assert!(triv.t_injective && triv.k_injective);
        assert!(triv.graph.unwrap().gamma.is_trivial());
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let u = standard_lattice("U").unwrap();
        let e = Embedding::from_vectors(&u, &[vec![BigInt::one(), BigInt::one()]]).unwrap();
        let dm = discriminant_form(e.domain()).unwrap();
        assert!(matches!(classifying_subgroup(&dm, &e), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn unimodular_gluing_of_two_and_minus_two() {
        let t = lat(&[vec![2]]);
        let k = lat(&[vec![-2]]);
        let gl = enumerate_gluings(&t, &k, &FiniteQuadraticForm::trivial()).unwrap();
        assert_eq!(gl.len(), 1);
        let res = glue_pair(&t, &k, &gl[0]).unwrap();
        assert_eq!(res.lattice.det(), BigInt::from(-1));
        assert_eq!(res.lattice.signature(), Signature { plus: 1, minus: 1 });
        let dt = discriminant_form(&t).unwrap();
        let dk = discriminant_form(&k).unwrap();
        let sp = split_projections(dt.form(), dk.form(), &gl[0].subgroup).unwrap();
        let graph = sp.graph.unwrap();
        assert_eq!(graph.gamma.order(), 2);
    }

    #[test]
    fn gluing_counts() {
        let triv = FiniteQuadraticForm::trivial();
        let g = enumerate_gluings(&lat(&[vec![4]]), &lat(&[vec![-4]]), &triv).unwrap();
        assert_eq!(g.len(), 2);
        assert!(enumerate_gluings(&lat(&[vec![2]]), &lat(&[vec![-4]]), &triv).unwrap().is_empty());
    }

    // kq by brute force: isotropic subgroups of the product with both
    // projections injective and the right quotient.
    fn brute_kq(t: &Lattice, k: &Lattice, target: &FiniteQuadraticForm) -> Vec<Vec<usize>> {
        let dt = discriminant_form(t).unwrap();
        let dk = discriminant_form(k).unwrap();
        let product = dt.form().direct_sum(dk.form());
        let mut out: Vec<Vec<usize>> = product
            .isotropic_subgroups()
            .unwrap()
            .into_iter()
            .filter(|h| {
                let sp = split_projections(dt.form(), dk.form(), h).unwrap();
                sp.t_injective && sp.k_injective && fqf_isomorphic(&product.quotient_form(h).unwrap(), target).unwrap().is_some()
            })
            .map(|h| h.indices().to_vec())
            .collect();
        out.sort();
        out
    }

    #[test]
    fn gluing_enumeration_matches_brute_force() {
        let cases: Vec<(Lattice, Lattice, FiniteQuadraticForm)> = vec![
            (lat(&[vec![4]]), lat(&[vec![-4]]), FiniteQuadraticForm::trivial()),
            (lat(&[vec![4, 0], vec![0, 2]]), lat(&[vec![-4, 0], vec![0, -2]]), FiniteQuadraticForm::trivial()),
            (
                lat(&[vec![4, 0], vec![0, 2]]),
                standard_lattice("<-4>+<-2>+<-6>").unwrap(),
                discriminant_form(&lat(&[vec![-6]])).unwrap().form().clone(),
            ),
            (lat(&[vec![8]]), lat(&[vec![2]]), discriminant_form(&lat(&[vec![2, 0], vec![0, 2]])).unwrap().form().clone()),
        ];
        for (t, k, q) in cases {
            let mut ours: Vec<Vec<usize>> =
                enumerate_gluings(&t, &k, &q).unwrap().iter().map(|d| d.subgroup.indices().to_vec()).collect();
            ours.sort();
            assert_eq!(ours, brute_kq(&t, &k, &q), "{t:?} {k:?}");
        }
    }

    #[test]
    fn glued_summands_are_primitive() {
        let t = lat(&[vec![4, 0], vec![0, 2]]);
        let k = standard_lattice("<-4>+<-2>+<-6>").unwrap();
        let q = discriminant_form(&lat(&[vec![-6]])).unwrap().form().clone();
        let gl = enumerate_gluings(&t, &k, &q).unwrap();
        assert!(!gl.is_empty());
        for d in &gl {
            let res = glue_pair(&t, &k, d).unwrap();
            let (te, ke) = summand_embeddings(&res, 2).unwrap();
            assert!(te.is_primitive() && ke.is_primitive());
            assert_eq!(res.lattice.discriminant(), BigInt::from(6));
        }
    }

    #[test]
    fn double_orbits() {
        let f = discriminant_form(&standard_lattice("L2d(6)").unwrap()).unwrap().form().clone();
        let group = f.orthogonal_group().unwrap();
        assert_eq!(double_orbit_count(&f, &group, &[], &[]).unwrap(), 4);
        assert_eq!(double_orbit_count(&f, &group, &group, &group).unwrap(), 1);
        let pm = [FqfMap::negation(&f)];
        assert_eq!(double_orbit_count(&f, &group, &pm, &pm).unwrap(), 2);
        let bogus = FqfMap::new(vec![f.element(&[5]).unwrap()]);
        assert_eq!(double_orbit_count(&f, &group[..1], &[bogus], &[]), Err(Error::NotClosed));
    }

    #[test]
    fn closure_of_generators() {
        let f = discriminant_form(&standard_lattice("L2d(6)").unwrap()).unwrap().form().clone();
        let all = f.orthogonal_group().unwrap();
        assert_eq!(group_closure(&f, &all).unwrap(), all);
        assert_eq!(group_closure(&f, &[]).unwrap(), vec![FqfMap::identity(&f)]);
    }

    #[test]
    fn unimodular_gluing_orbits_match_double_cosets() {
        // With trivial target, kq(T, K, 0) modulo G_T × O(K) matches
        // G_T × O(K) double cosets in O(D_K).
        let t = lat(&[vec![4, 0], vec![0, 12]]);
        let k = t.twist(-1).unwrap();
        let dt = discriminant_form(&t).unwrap();
        let dk = discriminant_form(&k).unwrap();
        let gl = enumerate_gluings(&t, &k, &FiniteQuadraticForm::trivial()).unwrap();
        let o_dt = dt.form().orthogonal_group().unwrap();
        assert_eq!(gl.len(), o_dt.len());
        let gt: Vec<FqfMap> = t.isometry_group_definite().unwrap().iter().map(|s| dt.push_forward(s).unwrap()).collect();
        let ok: Vec<FqfMap> = k.isometry_group_definite().unwrap().iter().map(|s| dk.push_forward(s).unwrap()).collect();
        let o_dk = dk.form().orthogonal_group().unwrap();
        let orbits = gluing_orbit_count(dt.form(), dk.form(), &gl, &gt, &ok).unwrap();
        assert_eq!(orbits, double_orbit_count(dk.form(), &o_dk, &ok, &ok).unwrap());
    }

    #[test]
    fn marked_orbits_reproduce_rank_one_count() {
        // K of rank 0: kq = {0}, one orbit; markings give |O(q)| / 2.
        for d in [2i64, 6, 10] {
            let l = standard_lattice(&format!("L2d({d})")).unwrap();
            let dt = discriminant_form(&l).unwrap();
            let dk = FiniteQuadraticForm::trivial();
            let q = dt.form().clone();
            let gl = enumerate_gluings_of_forms(dt.form(), &dk, &q, Execution::default()).unwrap();
            assert_eq!(gl.len(), 1);
            let pm = [FqfMap::negation(dt.form())];
            assert_eq!(gluing_orbit_count(dt.form(), &dk, &gl, &pm, &[]).unwrap(), 1);
            let tau = marked_gluing_orbit_count(dt.form(), &dk, &q, &gl, &pm, &[]).unwrap();
            assert_eq!(tau, dt.form().orthogonal_group().unwrap().len() / 2);
        }
    }

    #[test]
    fn transfer_between_unimodular_complements() {
        let t = standard_lattice("2U+<-4>").unwrap();
        let k = standard_lattice("2E8(-1)").unwrap();
        let k2 = standard_lattice("D16plus(-1)").unwrap();
        let q = discriminant_form(&t).unwrap().form().clone();
        let overl = standard_lattice("L2d(2)").unwrap();
        let pairs = transfer_gluings(&t, &k, &k2, &q, &overl).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].0.subgroup.is_trivial() && pairs[0].1.subgroup.is_trivial());
        let same = transfer_gluings(&t, &k, &k, &q, &overl).unwrap();
        assert!(same.iter().all(|(a, b)| a == b));
        let bad = transfer_gluings(&t, &k, &lat(&[vec![-2]]), &q, &overl);
        assert_eq!(bad.unwrap_err(), Error::GenusMismatch);
        let unknown = transfer_gluings(&t, &k, &k2, &q, &lat(&[vec![2, 1], vec![1, 12]]));
        assert_eq!(unknown.unwrap_err(), Error::UniquenessUnknown);
    }

    #[test]
    fn transfer_between_definite_genus_mates() {
        // D and E share a genus; their gluing sets with T = D(-1) have equal size.
        let d = lat(&[vec![2, 1], vec![1, 12]]);
        let e = lat(&[vec![4, 1], vec![1, 6]]);
        let t = d.twist(-1).unwrap();
        let overl = standard_lattice("U+U").unwrap();
        let pairs = transfer_gluings(&t, &d, &e, &FiniteQuadraticForm::trivial(), &overl).unwrap();
        let direct = enumerate_gluings(&t, &e, &FiniteQuadraticForm::trivial()).unwrap();
        assert_eq!(pairs.len(), direct.len());
        let mut moved: Vec<Vec<usize>> = pairs.iter().map(|(_, b)| b.subgroup.indices().to_vec()).collect();
        let mut want: Vec<Vec<usize>> = direct.iter().map(|g| g.subgroup.indices().to_vec()).collect();
        moved.sort();
        want.sort();
        assert_eq!(moved, want);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn glue_roundtrip_and_determinant_law(a in -3i64..4, b in -6i64..7, c in -3i64..4) {
                prop_assume!(4 * a * c - b * b != 0);
                let m = lat(&[vec![2 * a, b], vec![b, 2 * c]]);
                let dm = discriminant_form(&m).unwrap();
                prop_assume!(dm.form().order() <= 200);
                for h in dm.form().isotropic_subgroups().unwrap() {
                    let res = glue(&dm, &h).unwrap();
                    prop_assert_eq!(classifying_subgroup(&dm, &res.embedding).unwrap(), h.clone());
                    let hh = BigInt::from(h.order() * h.order());
                    prop_assert_eq!(res.lattice.discriminant() * hh, m.discriminant());
                    prop_assert_eq!(res.index.clone(), BigInt::from(h.order()));
                }
            }
        }
    }
}
