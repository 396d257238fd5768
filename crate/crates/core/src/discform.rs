//! Finite quadratic forms, in particular discriminant forms `q_L` on
//! `D_L = L^∨/L`.
//!
//! A form is stored on generators `g_i` of orders `n_i`, with the group being
//! `⊕ Z/n_i`. The presentation need not be in invariant-factor form (direct
//! sums keep the product presentation); [`FiniteQuadraticForm::invariant_factors`]
//! recovers the invariant factors. With `e` the exponent of the group every
//! value of `q` lies in `(1/e)Z / 2Z` and every value of `b` in `(1/e)Z / Z`,
//! so values are kept as machine integers in units of `1/e`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intlinalg::{hermite_normal_form, smith_normal_form, IntMatrix, RatMatrix};
use crate::lattice::Lattice;
use crate::par::{self, group_limit, Execution};

/// Largest generator order accepted, so that value arithmetic fits in `i128`.
pub const MAX_GENERATOR_ORDER: u64 = 1 << 31;

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteQuadraticForm {
    orders: Vec<u64>,
    exponent: u64,
    // q(g_i)·e in [0, 2e)
    q: Vec<i128>,
    // b(g_i, g_j)·e in [0, e)
    b: Vec<Vec<i128>>,
}

/// Element of a finite quadratic form, by coordinates reduced modulo the
/// generator orders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqfElement(Vec<u64>);

impl FqfElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for FqfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Element with its value and order, as listed by
/// [`FiniteQuadraticForm::element_table`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementInfo {
    pub element: FqfElement,
    pub q: BigRational,
    pub order: u64,
}

/// Homomorphism given by the images of the source generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqfMap {
    images: Vec<FqfElement>,
}

impl FqfMap {
    pub fn new(images: Vec<FqfElement>) -> Self {
        FqfMap { images }
    }

    pub fn images(&self) -> &[FqfElement] {
        &self.images
    }

    pub fn identity(form: &FiniteQuadraticForm) -> Self {
        FqfMap { images: (0..form.generator_count()).map(|i| form.generator(i)).collect() }
    }

    pub fn negation(form: &FiniteQuadraticForm) -> Self {
        FqfMap { images: (0..form.generator_count()).map(|i| form.neg(&form.generator(i))).collect() }
    }

    /// Image of `x`; `target` is the codomain.
    pub fn apply(&self, target: &FiniteQuadraticForm, x: &FqfElement) -> FqfElement {
        let mut acc = vec![0i128; target.generator_count()];
        for (c, img) in x.0.iter().zip(&self.images) {
            if *c == 0 {
                continue;
            }
            for (a, y) in acc.iter_mut().zip(&img.0) {
                *a += *c as i128 * *y as i128;
            }
        }
        target.reduce(&acc)
    }

    /// `self ∘ other` for endomorphisms of `form`.
    pub fn compose(&self, other: &FqfMap, form: &FiniteQuadraticForm) -> FqfMap {
        FqfMap { images: other.images.iter().map(|y| self.apply(form, y)).collect() }
    }
}

/// Subgroup of a finite quadratic form. Element indices refer to the
/// enumeration order of the form it was built from. Equality compares the
/// element sets, not the generators.
#[derive(Clone, Debug)]
pub struct FqfSubgroup {
    generators: Vec<FqfElement>,
    indices: Vec<usize>,
}

impl PartialEq for FqfSubgroup {
    fn eq(&self, other: &Self) -> bool {
        self.indices == other.indices
    }
}

impl Eq for FqfSubgroup {}

impl std::hash::Hash for FqfSubgroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.indices.hash(state);
    }
}

impl FqfSubgroup {
    pub fn generators(&self) -> &[FqfElement] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.indices.len() == 1
    }

    /// Sorted element indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, form: &FiniteQuadraticForm, x: &FqfElement) -> bool {
        self.indices.binary_search(&form.index_of(x)).is_ok()
    }

    pub fn elements(&self, form: &FiniteQuadraticForm) -> Vec<FqfElement> {
        self.indices.iter().map(|&i| form.element_at(i)).collect()
    }
}

// Subgroup under construction: membership bitmap plus element list.
struct SpanBuilder {
    member: Vec<bool>,
    elems: Vec<usize>,
}

impl SpanBuilder {
    fn new(size: usize) -> Self {
        let mut member = vec![false; size];
        member[0] = true;
        SpanBuilder { member, elems: vec![0] }
    }

    fn from_indices(size: usize, indices: &[usize]) -> Self {
        let mut member = vec![false; size];
        for &i in indices {
            member[i] = true;
        }
        SpanBuilder { member, elems: indices.to_vec() }
    }

    // Smallest t > 0 with t·g in the span.
    fn relative_order(&self, form: &FiniteQuadraticForm, g: usize) -> u64 {
        let mut t = 1;
        let mut m = g;
        while !self.member[m] {
            m = form.add_idx(m, g);
            t += 1;
        }
        t
    }

    // Adjoins g; returns the relative order of g.
    fn extend(&mut self, form: &FiniteQuadraticForm, g: usize) -> u64 {
        let t = self.relative_order(form, g);
        if t == 1 {
            return 1;
        }
        let base_len = self.elems.len();
        let mut shift = g;
        for _ in 1..t {
            for k in 0..base_len {
                let x = form.add_idx(self.elems[k], shift);
                self.member[x] = true;
                self.elems.push(x);
            }
            shift = form.add_idx(shift, g);
        }
        t
    }

    fn truncate(&mut self, len: usize) {
        for &x in &self.elems[len..] {
            self.member[x] = false;
        }
        self.elems.truncate(len);
    }

    fn key(&self) -> Vec<usize> {
        let mut k = self.elems.clone();
        k.sort_unstable();
        k
    }
}

/// `A/B` for subgroups `B ⊂ A` with `B` isotropic and orthogonal to `A`,
/// together with the projection `A → A/B`.
#[derive(Clone, Debug)]
pub struct Subquotient {
    form: FiniteQuadraticForm,
    lifts: Vec<FqfElement>,
    basis_inverse: RatMatrix,
    v: IntMatrix,
    kept: Vec<usize>,
}

impl Subquotient {
    pub fn form(&self) -> &FiniteQuadraticForm {
        &self.form
    }

    /// Representatives in the parent of the quotient generators.
    pub fn lifts(&self) -> &[FqfElement] {
        &self.lifts
    }

    /// Class of `x ∈ A` in `A/B`. `x` must lie in `A`.
    pub fn project(&self, x: &FqfElement) -> FqfElement {
        let k = x.0.len();
        // y = x·P⁻¹, then y' = y·V.
        let y: Vec<BigInt> = (0..k)
            .map(|j| {
                let s: BigRational =
                    (0..k).map(|i| BigRational::from_integer(BigInt::from(x.0[i])) * &self.basis_inverse[(i, j)]).sum();
                s.to_integer()
            })
            .collect();
        let coords: Vec<i128> = self
            .kept
            .iter()
            .map(|&j| {
                let s: BigInt = (0..k).map(|i| &y[i] * &self.v[(i, j)]).sum();
                s.mod_floor(&BigInt::from(self.form.orders[self.kept.iter().position(|&t| t == j).unwrap()])).to_i128().unwrap()
            })
            .collect();
        self.form.reduce(&coords)
    }
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    a / a.gcd(&b) * b
}

fn to_units(r: &BigRational, e: u64, modulus: i128) -> Option<i128> {
    let scaled = r.numer() * BigInt::from(e);
    if !scaled.is_multiple_of(r.denom()) {
        return None;
    }
    (scaled / r.denom()).mod_floor(&BigInt::from(modulus)).to_i128()
}

impl FiniteQuadraticForm {
    /// Builds a form from generator orders (each ≥ 2), values `q(g_i)` mod 2
    /// and the matrix `b(g_i, g_j)` mod 1. Values are normalised; the
    /// well-definedness conditions are checked.
    pub fn new(orders: Vec<u64>, q_values: Vec<BigRational>, bilinear: Vec<Vec<BigRational>>) -> Result<Self> {
        let k = orders.len();
        if q_values.len() != k || bilinear.len() != k || bilinear.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidForm("value tables do not match the number of generators".into()));
        }
        if let Some(n) = orders.iter().find(|&&n| !(2..=MAX_GENERATOR_ORDER).contains(&n)) {
            return Err(Error::InvalidForm(format!("generator order {n} out of range")));
        }
        let exponent = orders.iter().fold(1u64, |l, &n| lcm_u64(l, n));
        let e = exponent as i128;
        let mut q = Vec::with_capacity(k);
        for (i, v) in q_values.iter().enumerate() {
            q.push(
                to_units(v, exponent, 2 * e)
                    .ok_or_else(|| Error::InvalidForm(format!("q(g{i}) = {v} is not a multiple of 1/{exponent}")))?,
            );
        }
        let mut b = vec![vec![0i128; k]; k];
        for i in 0..k {
            for j in 0..k {
                b[i][j] = to_units(&bilinear[i][j], exponent, e).ok_or_else(|| {
                    Error::InvalidForm(format!("b(g{i}, g{j}) = {} is not a multiple of 1/{exponent}", bilinear[i][j]))
                })?;
            }
        }
        Self::from_units(orders, exponent, q, b)
    }

    fn from_units(orders: Vec<u64>, exponent: u64, q: Vec<i128>, b: Vec<Vec<i128>>) -> Result<Self> {
        let e = exponent as i128;
        let k = orders.len();
        for i in 0..k {
            let n = orders[i] as i128;
            if (n * n * q[i]) % (2 * e) != 0 {
                return Err(Error::InvalidForm(format!("n²·q(g{i}) is not 0 mod 2")));
            }
            if (q[i] - b[i][i]).rem_euclid(e) != 0 {
                return Err(Error::InvalidForm(format!("q(g{i}) and b(g{i}, g{i}) differ mod 1")));
            }
            for j in 0..k {
                if b[i][j] != b[j][i] {
                    return Err(Error::InvalidForm("bilinear form is not symmetric".into()));
                }
                if (n * b[i][j]) % e != 0 {
                    return Err(Error::InvalidForm(format!("n·b(g{i}, g{j}) is not 0 mod 1")));
                }
            }
        }
        Ok(FiniteQuadraticForm { orders, exponent, q, b })
    }

    pub fn trivial() -> Self {
        FiniteQuadraticForm { orders: Vec::new(), exponent: 1, q: Vec::new(), b: Vec::new() }
    }

    /// Cyclic form `Z/n` with `q(1) = value`.
    pub fn cyclic(n: u64, value: BigRational) -> Result<Self> {
        if n == 1 {
            return Ok(Self::trivial());
        }
        let bv = value.clone() - value.floor();
        Self::new(vec![n], vec![value], vec![vec![bv]])
    }

    pub fn generator_count(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// `|D|`, saturating at `u128::MAX`.
    pub fn order(&self) -> u128 {
        self.orders.iter().fold(1u128, |acc, &n| acc.saturating_mul(n as u128))
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    /// Invariant factors `d_1 | d_2 | …`, each > 1.
    pub fn invariant_factors(&self) -> Vec<u64> {
        let smith = smith_normal_form(&IntMatrix::diagonal(&self.orders));
        smith.invariant_factors().iter().filter_map(|d| d.to_u64()).filter(|&d| d > 1).collect()
    }

    /// `l(D)`, the minimal number of generators.
    pub fn min_generators(&self) -> usize {
        self.invariant_factors().len()
    }

    pub fn zero(&self) -> FqfElement {
        FqfElement(vec![0; self.orders.len()])
    }

    pub fn generator(&self, i: usize) -> FqfElement {
        let mut c = vec![0; self.orders.len()];
        c[i] = 1 % self.orders[i];
        FqfElement(c)
    }

    /// Element with the given (unreduced) coordinates.
    pub fn element(&self, coords: &[i64]) -> Result<FqfElement> {
        if coords.len() != self.orders.len() {
            return Err(Error::InvalidElement(format!("expected {} coordinates, got {}", self.orders.len(), coords.len())));
        }
        Ok(self.reduce(&coords.iter().map(|&c| c as i128).collect::<Vec<_>>()))
    }

    fn reduce(&self, coords: &[i128]) -> FqfElement {
        FqfElement(coords.iter().zip(&self.orders).map(|(c, &n)| c.rem_euclid(n as i128) as u64).collect())
    }

    pub fn add(&self, x: &FqfElement, y: &FqfElement) -> FqfElement {
        FqfElement(x.0.iter().zip(&y.0).zip(&self.orders).map(|((a, b), n)| (a + b) % n).collect())
    }

    pub fn neg(&self, x: &FqfElement) -> FqfElement {
        FqfElement(x.0.iter().zip(&self.orders).map(|(a, n)| (n - a) % n).collect())
    }

    pub fn scale(&self, k: i64, x: &FqfElement) -> FqfElement {
        self.reduce(&x.0.iter().map(|&c| c as i128 * k as i128).collect::<Vec<_>>())
    }

    pub fn element_order(&self, x: &FqfElement) -> u64 {
        x.0.iter().zip(&self.orders).fold(1u64, |l, (&c, &n)| lcm_u64(l, n / c.gcd(&n)))
    }

    /// `q(x)·e` in `[0, 2e)`.
    fn q_units(&self, x: &[u64]) -> i128 {
        let m = 2 * self.exponent as i128;
        let mut acc = 0i128;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            let ci = x[i] as i128;
            acc = (acc + (ci * ci % m) * self.q[i]) % m;
            for j in i + 1..x.len() {
                if x[j] != 0 {
                    acc = (acc + (2 * ci * x[j] as i128 % m) * self.b[i][j]) % m;
                }
            }
        }
        acc
    }

    /// `b(x, y)·e` in `[0, e)`.
    fn b_units(&self, x: &[u64], y: &[u64]) -> i128 {
        let e = self.exponent as i128;
        let mut acc = 0i128;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            for j in 0..y.len() {
                if y[j] != 0 {
                    acc = (acc + (x[i] as i128 * y[j] as i128 % e) * self.b[i][j]) % e;
                }
            }
        }
        acc
    }

    /// `q(x)` in `[0, 2)`.
    pub fn q(&self, x: &FqfElement) -> BigRational {
        BigRational::new(BigInt::from(self.q_units(&x.0)), BigInt::from(self.exponent))
    }

    /// `b(x, y)` in `[0, 1)`.
    pub fn b(&self, x: &FqfElement, y: &FqfElement) -> BigRational {
        BigRational::new(BigInt::from(self.b_units(&x.0, &y.0)), BigInt::from(self.exponent))
    }

    pub fn generator_q_values(&self) -> Vec<BigRational> {
        (0..self.orders.len()).map(|i| self.q(&self.generator(i))).collect()
    }

    pub fn bilinear_matrix(&self) -> Vec<Vec<BigRational>> {
        let k = self.orders.len();
        (0..k)
            .map(|i| (0..k).map(|j| BigRational::new(BigInt::from(self.b[i][j]), BigInt::from(self.exponent))).collect())
            .collect()
    }

    /// `(D, −q)`.
    pub fn negate(&self) -> Self {
        let e = self.exponent as i128;
        FiniteQuadraticForm {
            orders: self.orders.clone(),
            exponent: self.exponent,
            q: self.q.iter().map(|&v| (-v).rem_euclid(2 * e)).collect(),
            b: self.b.iter().map(|r| r.iter().map(|&v| (-v).rem_euclid(e)).collect()).collect(),
        }
    }

    /// Orthogonal direct sum; generators of `self` come first.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let exponent = lcm_u64(self.exponent, other.exponent);
        let s1 = (exponent / self.exponent) as i128;
        let s2 = (exponent / other.exponent) as i128;
        let k1 = self.orders.len();
        let k = k1 + other.orders.len();
        let mut orders = self.orders.clone();
        orders.extend(&other.orders);
        let mut q: Vec<i128> = self.q.iter().map(|v| v * s1).collect();
        q.extend(other.q.iter().map(|v| v * s2));
        let mut b = vec![vec![0i128; k]; k];
        for i in 0..k1 {
            for j in 0..k1 {
                b[i][j] = self.b[i][j] * s1;
            }
        }
        for i in 0..other.orders.len() {
            for j in 0..other.orders.len() {
                b[k1 + i][k1 + j] = other.b[i][j] * s2;
            }
        }
        FiniteQuadraticForm { orders, exponent, q, b }
    }

    fn check_limit(&self) -> Result<usize> {
        let order = self.order();
        let limit = group_limit();
        if order > limit as u128 {
            return Err(Error::GroupTooLarge { order, limit });
        }
        Ok(order as usize)
    }

    /// Mixed-radix index, first coordinate fastest.
    pub fn index_of(&self, x: &FqfElement) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (c, &n) in x.0.iter().zip(&self.orders) {
            idx += *c as usize * stride;
            stride *= n as usize;
        }
        idx
    }

    pub fn element_at(&self, mut idx: usize) -> FqfElement {
        FqfElement(
            self.orders
                .iter()
                .map(|&n| {
                    let c = (idx % n as usize) as u64;
                    idx /= n as usize;
                    c
                })
                .collect(),
        )
    }

    fn add_idx(&self, mut a: usize, mut b: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        for &n in &self.orders {
            let n = n as usize;
            out += ((a % n + b % n) % n) * stride;
            stride *= n;
            a /= n;
            b /= n;
        }
        out
    }

    /// All elements in index order.
    pub fn elements(&self) -> Result<Vec<FqfElement>> {
        let size = self.check_limit()?;
        Ok((0..size).map(|i| self.element_at(i)).collect())
    }

    /// All elements with their `q`-values and orders.
    pub fn element_table(&self) -> Result<Vec<ElementInfo>> {
        Ok(self
            .elements()?
            .into_iter()
            .map(|x| ElementInfo { q: self.q(&x), order: self.element_order(&x), element: x })
            .collect())
    }

    /// True iff `b(x, ·) = 0` forces `x = 0`.
    pub fn is_nondegenerate(&self) -> Result<bool> {
        let gens: Vec<FqfElement> = (0..self.orders.len()).map(|i| self.generator(i)).collect();
        Ok(self.elements()?.iter().skip(1).all(|x| gens.iter().any(|g| self.b_units(&x.0, &g.0) != 0)))
    }

    /// True iff `map` is a bijective endomorphism preserving `q`.
    pub fn is_automorphism(&self, map: &FqfMap) -> bool {
        self.is_isometry_to(self, map)
    }

    /// True iff `map: self → target` is a bijective homomorphism with
    /// `q_target ∘ map = q_self`.
    pub fn is_isometry_to(&self, target: &Self, map: &FqfMap) -> bool {
        let k = self.orders.len();
        if map.images.len() != k
            || map.images.iter().any(|y| y.0.len() != target.orders.len() || y.0.iter().zip(&target.orders).any(|(c, n)| c >= n))
            || self.order() != target.order()
        {
            return false;
        }
        let same = |a: i128, ea: u64, b: i128, eb: u64| a * eb as i128 == b * ea as i128;
        for i in 0..k {
            let y = &map.images[i];
            if target.scale(self.orders[i] as i64, y) != target.zero() {
                return false;
            }
            if !same(self.q[i], self.exponent, target.q_units(&y.0), target.exponent) {
                return false;
            }
            for j in 0..i {
                if !same(self.b[i][j], self.exponent, target.b_units(&y.0, &map.images[j].0), target.exponent) {
                    return false;
                }
            }
        }
        let Ok(size) = target.check_limit() else { return false };
        let mut span = SpanBuilder::new(size);
        for (i, y) in map.images.iter().enumerate() {
            if span.extend(target, target.index_of(y)) != self.orders[i] {
                return false;
            }
        }
        true
    }

    /// Subgroup generated by `gens`. Redundant generators are dropped.
    pub fn span(&self, gens: &[FqfElement]) -> Result<FqfSubgroup> {
        let size = self.check_limit()?;
        let mut sb = SpanBuilder::new(size);
        let mut kept = Vec::new();
        for g in gens {
            if g.0.len() != self.orders.len() || g.0.iter().zip(&self.orders).any(|(c, n)| c >= n) {
                return Err(Error::InvalidElement(format!("{g} is not an element of the group")));
            }
            if sb.extend(self, self.index_of(g)) > 1 {
                kept.push(g.clone());
            }
        }
        Ok(FqfSubgroup { generators: kept, indices: sb.key() })
    }

    pub fn trivial_subgroup(&self) -> FqfSubgroup {
        FqfSubgroup { generators: Vec::new(), indices: vec![0] }
    }

    /// Every subgroup exactly once, ordered by (order, element indices).
    pub fn all_subgroups(&self) -> Result<Vec<FqfSubgroup>> {
        self.subgroups_where(false)
    }

    /// Subgroups on which `q` vanishes.
    pub fn isotropic_subgroups(&self) -> Result<Vec<FqfSubgroup>> {
        self.subgroups_where(true)
    }

    // Breadth-first joins of cyclic subgroups. For the isotropic variant only
    // isotropic cyclic subgroups orthogonal to the current subgroup are
    // adjoined; every isotropic subgroup is reached through isotropic
    // intermediate subgroups.
    fn subgroups_where(&self, isotropic: bool) -> Result<Vec<FqfSubgroup>> {
        let size = self.check_limit()?;
        let mut cyclic_gens: Vec<usize> = Vec::new();
        let mut seen_cyclic: HashSet<Vec<usize>> = HashSet::new();
        for x in 1..size {
            let ex = self.element_at(x);
            if isotropic && self.q_units(&ex.0) != 0 {
                continue;
            }
            let mut sb = SpanBuilder::new(size);
            sb.extend(self, x);
            if seen_cyclic.insert(sb.key()) {
                cyclic_gens.push(x);
            }
        }
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(vec![0]);
        let mut out = vec![self.trivial_subgroup()];
        let mut head = 0;
        while head < out.len() {
            let current = out[head].clone();
            head += 1;
            let gen_coords: Vec<FqfElement> = current.generators.clone();
            let mut sb = SpanBuilder::from_indices(size, &current.indices);
            for &c in &cyclic_gens {
                if sb.member[c] {
                    continue;
                }
                let ec = self.element_at(c);
                if isotropic && gen_coords.iter().any(|g| self.b_units(&g.0, &ec.0) != 0) {
                    continue;
                }
                let len = sb.elems.len();
                sb.extend(self, c);
                let key = sb.key();
                sb.truncate(len);
                if seen.insert(key.clone()) {
                    let mut generators = current.generators.clone();
                    generators.push(ec);
                    out.push(FqfSubgroup { generators, indices: key });
                }
            }
        }
        out.sort_by(|a, b| a.indices.len().cmp(&b.indices.len()).then_with(|| a.indices.cmp(&b.indices)));
        Ok(out)
    }

    pub fn is_isotropic(&self, h: &FqfSubgroup) -> bool {
        h.indices.iter().all(|&i| self.q_units(&self.element_at(i).0) == 0)
    }

    /// `H^⊥ = {x : b(x, H) = 0}`.
    pub fn orthogonal_subgroup(&self, h: &FqfSubgroup) -> Result<FqfSubgroup> {
        let size = self.check_limit()?;
        let mut sb = SpanBuilder::new(size);
        let mut generators = Vec::new();
        for x in 1..size {
            if sb.member[x] {
                continue;
            }
            let ex = self.element_at(x);
            if h.generators.iter().all(|g| self.b_units(&g.0, &ex.0) == 0) {
                sb.extend(self, x);
                generators.push(ex);
            }
        }
        Ok(FqfSubgroup { generators, indices: sb.key() })
    }

    /// `H^⊥/H` with the induced form.
    pub fn quotient_form(&self, h: &FqfSubgroup) -> Result<FiniteQuadraticForm> {
        let perp = self.orthogonal_subgroup(h)?;
        Ok(self.subquotient(&perp, h)?.form)
    }

    /// `A/B` with its induced form and projection. Requires `B ⊂ A`,
    /// `b(A, B) = 0` and `q|_B = 0`.
    pub fn subquotient(&self, a: &FqfSubgroup, b: &FqfSubgroup) -> Result<Subquotient> {
        if !self.is_isotropic(b) || a.generators.iter().any(|x| b.generators.iter().any(|y| self.b_units(&x.0, &y.0) != 0)) {
            return Err(Error::NotIsotropic);
        }
        if !b.indices.iter().all(|i| a.indices.binary_search(i).is_ok()) {
            return Err(Error::InvalidElement("B is not contained in A".into()));
        }
        let k = self.orders.len();
        if k == 0 {
            return Ok(Subquotient {
                form: Self::trivial(),
                lifts: Vec::new(),
                basis_inverse: RatMatrix::zeros(0, 0),
                v: IntMatrix::zeros(0, 0),
                kept: Vec::new(),
            });
        }
        let relations: Vec<Vec<BigInt>> = (0..k)
            .map(|i| {
                let mut r = vec![BigInt::zero(); k];
                r[i] = BigInt::from(self.orders[i]);
                r
            })
            .collect();
        let as_rows = |gens: &[FqfElement]| -> Vec<Vec<BigInt>> {
            let mut rows: Vec<Vec<BigInt>> = gens.iter().map(|g| g.0.iter().map(|&c| BigInt::from(c)).collect()).collect();
            rows.extend(relations.iter().cloned());
            rows
        };
        // Basis P of the preimage of A in Z^k (rows).
        let hnf = hermite_normal_form(&IntMatrix::from_rows(&as_rows(&a.generators)));
        let p_rows: Vec<Vec<BigInt>> = (0..hnf.rank).map(|i| hnf.h.row(i)).collect();
        let p = IntMatrix::from_rows(&p_rows);
        let p_inv = p.to_rational().inverse().ok_or(Error::NoSolution)?;
        // Preimage of B in P-coordinates.
        let b_rows = as_rows(&b.generators);
        let x_rows: Vec<Vec<BigInt>> = b_rows
            .iter()
            .map(|r| {
                (0..k)
                    .map(|j| {
                        let s: BigRational = (0..k).map(|i| BigRational::from_integer(r[i].clone()) * &p_inv[(i, j)]).sum();
                        s.to_integer()
                    })
                    .collect()
            })
            .collect();
        let smith = smith_normal_form(&IntMatrix::from_rows(&x_rows));
        let v_inv = smith.v.inverse_unimodular().ok_or(Error::NoSolution)?;
        let new_gens = &v_inv * &p;
        let diag = smith.invariant_factors();
        let mut kept = Vec::new();
        let mut orders = Vec::new();
        let mut lifts = Vec::new();
        for (j, d) in diag.iter().enumerate() {
            if d > &BigInt::one() {
                kept.push(j);
                orders.push(d.to_u64().ok_or_else(|| Error::InvalidForm("quotient order too large".into()))?);
                let coords: Vec<i128> = new_gens.row(j).iter().map(|c| c.to_i128().unwrap()).collect();
                lifts.push(self.reduce(&coords));
            }
        }
        let q_values: Vec<BigRational> = lifts.iter().map(|w| self.q(w)).collect();
        let bilinear: Vec<Vec<BigRational>> = lifts.iter().map(|w| lifts.iter().map(|w2| self.b(w, w2)).collect()).collect();
        let form = Self::new(orders, q_values, bilinear)?;
        Ok(Subquotient { form, lifts, basis_inverse: p_inv, v: smith.v, kept })
    }

    /// Some isometry `self → other`, or `None`.
    pub fn isomorphism_to(&self, other: &Self) -> Result<Option<FqfMap>> {
        self.isomorphism_to_with(other, Execution::default())
    }

    pub fn isomorphism_to_with(&self, other: &Self, exec: Execution) -> Result<Option<FqfMap>> {
        self.check_limit()?;
        other.check_limit()?;
        if self.invariant_factors() != other.invariant_factors() || self.fingerprint()? != other.fingerprint()? {
            return Ok(None);
        }
        let found = isometry_search(self, other, true, exec)?;
        let map = found.into_iter().next();
        if let Some(m) = &map {
            for x in self.elements()? {
                if self.q(&x) != other.q(&m.apply(other, &x)) {
                    return Err(Error::NotAnAutomorphism("isomorphism search produced an invalid map".into()));
                }
            }
        }
        Ok(map)
    }

    // Multiset of (order, q) over all elements.
    fn fingerprint(&self) -> Result<Vec<(u64, BigRational, usize)>> {
        let mut counts: HashMap<(u64, BigRational), usize> = HashMap::new();
        for info in self.element_table()? {
            *counts.entry((info.order, info.q)).or_default() += 1;
        }
        let mut v: Vec<(u64, BigRational, usize)> = counts.into_iter().map(|((o, q), c)| (o, q, c)).collect();
        v.sort();
        Ok(v)
    }

    /// `O(q)`: all automorphisms preserving `q`, sorted.
    pub fn orthogonal_group(&self) -> Result<Vec<FqfMap>> {
        self.orthogonal_group_with(Execution::default())
    }

    pub fn orthogonal_group_with(&self, exec: Execution) -> Result<Vec<FqfMap>> {
        self.check_limit()?;
        let mut group = isometry_search(self, self, false, exec)?;
        group.sort();
        Ok(group)
    }
}

// Backtracking over images of the generators of `src` in `dst`: candidates
// are matched on (order, q); pairings with earlier images are compared; and
// injectivity is enforced by requiring each image to have the right order
// modulo the span of the previous ones.
fn isometry_search(
    src: &FiniteQuadraticForm,
    dst: &FiniteQuadraticForm,
    first_only: bool,
    exec: Execution,
) -> Result<Vec<FqfMap>> {
    let k = src.orders.len();
    if k == 0 {
        return Ok(if dst.is_trivial() { vec![FqfMap::new(Vec::new())] } else { Vec::new() });
    }
    let size = dst.check_limit()?;
    let limit = group_limit();
    let same = |a: i128, ea: u64, b: i128, eb: u64| a * eb as i128 == b * ea as i128;
    let elems: Vec<FqfElement> = (0..size).map(|i| dst.element_at(i)).collect();
    let orders: Vec<u64> = elems.iter().map(|x| dst.element_order(x)).collect();
    let qs: Vec<i128> = elems.iter().map(|x| dst.q_units(&x.0)).collect();
    let candidates: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..size).filter(|&y| orders[y] == src.orders[i] && same(src.q[i], src.exponent, qs[y], dst.exponent)).collect())
        .collect();

    struct Ctx<'a> {
        src: &'a FiniteQuadraticForm,
        dst: &'a FiniteQuadraticForm,
        elems: &'a [FqfElement],
        candidates: &'a [Vec<usize>],
        first_only: bool,
        limit: usize,
    }

    fn descend(ctx: &Ctx, chosen: &mut Vec<usize>, span: &mut SpanBuilder, out: &mut Vec<Vec<usize>>) -> Result<()> {
        let i = chosen.len();
        if i == ctx.candidates.len() {
            out.push(chosen.clone());
            if out.len() > ctx.limit {
                return Err(Error::GroupTooLarge { order: out.len() as u128, limit: ctx.limit });
            }
            return Ok(());
        }
        for &y in &ctx.candidates[i] {
            let ey = &ctx.elems[y].0;
            let compatible = chosen.iter().enumerate().all(|(j, &cj)| {
                ctx.src.b[i][j] * ctx.dst.exponent as i128 == ctx.dst.b_units(ey, &ctx.elems[cj].0) * ctx.src.exponent as i128
            });
            if !compatible || span.relative_order(ctx.dst, y) != ctx.src.orders[i] {
                continue;
            }
            let len = span.elems.len();
            span.extend(ctx.dst, y);
            chosen.push(y);
            descend(ctx, chosen, span, out)?;
            chosen.pop();
            span.truncate(len);
            if ctx.first_only && !out.is_empty() {
                return Ok(());
            }
        }
        Ok(())
    }

    let ctx = Ctx { src, dst, elems: &elems, candidates: &candidates, first_only, limit };
    let branch = |y0: usize| -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut span = SpanBuilder::new(size);
        span.extend(dst, y0);
        let mut chosen = vec![y0];
        descend(&ctx, &mut chosen, &mut span, &mut out)?;
        Ok(out)
    };
    let tops = candidates[0].clone();
    let mut found: Vec<Vec<usize>> = Vec::new();
    if first_only {
        if let Some(r) = par::find_map_first(exec, tops, |y0| match branch(y0) {
            Ok(v) if v.is_empty() => None,
            other => Some(other),
        }) {
            found = r?;
        }
    } else {
        for part in par::map(exec, tops, branch) {
            found.extend(part?);
            if found.len() > limit {
                return Err(Error::GroupTooLarge { order: found.len() as u128, limit });
            }
        }
    }
    Ok(found.into_iter().map(|idx| FqfMap::new(idx.into_iter().map(|y| elems[y].clone()).collect())).collect())
}

impl fmt::Debug for FiniteQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FiniteQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "trivial");
        }
        let groups: Vec<String> = self.orders.iter().map(|n| format!("Z/{n}")).collect();
        let qs: Vec<String> = self.generator_q_values().iter().map(|q| q.to_string()).collect();
        write!(f, "{}; q = [{}]", groups.join(" x "), qs.join(", "))
    }
}

/// Some isometry `q1 → q2`, or `None`.
pub fn fqf_isomorphic(q1: &FiniteQuadraticForm, q2: &FiniteQuadraticForm) -> Result<Option<FqfMap>> {
    q1.isomorphism_to(q2)
}

/// Discriminant form of a lattice together with rational lifts of its
/// generators and the map from `L^∨` back to classes.
#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    form: FiniteQuadraticForm,
    gram: IntMatrix,
    lifts: Vec<Vec<BigRational>>,
    // class_of(w) = (R · G·w) mod n_i
    class_map: IntMatrix,
}

/// `(D_L, q_L)` from the Smith normal form `U·G·V = diag(d_i)`: the
/// generators are the classes of `w_i = V·e_i / d_i` for `d_i > 1`.
pub fn discriminant_form(l: &Lattice) -> Result<DiscriminantForm> {
    let g = l.gram();
    let r = g.rows();
    let smith = smith_normal_form(g);
    let d = smith.invariant_factors();
    let vtgv = &(&smith.v.transpose() * g) * &smith.v;
    let mut idx = Vec::new();
    let mut orders = Vec::new();
    for (i, di) in d.iter().enumerate() {
        if di > &BigInt::one() {
            let n = di.to_u64().filter(|&n| n <= MAX_GENERATOR_ORDER).ok_or_else(|| {
                Error::BadParameter(format!("discriminant group has an invariant factor {di} beyond {MAX_GENERATOR_ORDER}"))
            })?;
            idx.push(i);
            orders.push(n);
        }
    }
    let lifts: Vec<Vec<BigRational>> =
        idx.iter().map(|&i| smith.v.col(i).into_iter().map(|x| BigRational::new(x, d[i].clone())).collect()).collect();
    let frac = |x: BigRational, m: i64| {
        let m = BigRational::from_integer(BigInt::from(m));
        let q = (&x / &m).floor();
        x - q * m
    };
    let q_values: Vec<BigRational> =
        idx.iter().map(|&i| frac(BigRational::new(vtgv[(i, i)].clone(), &d[i] * &d[i]), 2)).collect();
    let bilinear: Vec<Vec<BigRational>> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| frac(BigRational::new(vtgv[(i, j)].clone(), &d[i] * &d[j]), 1)).collect())
        .collect();
    let form = FiniteQuadraticForm::new(orders, q_values, bilinear)?;
    let rows: Vec<Vec<BigInt>> = idx.iter().map(|&i| smith.u.row(i)).collect();
    let class_map = if rows.is_empty() { IntMatrix::zeros(0, r) } else { IntMatrix::from_rows(&rows) };
    Ok(reduce_generators(DiscriminantForm { form, gram: g.clone(), lifts, class_map }))
}

// Largest number of candidates examined when reducing one generator.
const REDUCTION_CANDIDATES: u64 = 1 << 16;

// One pass over the generators replacing g_i by g_i + Σ_{j≠i} c_j g_j when
// that lowers q (taken in [0, 2)). The replacement keeps a basis exactly when
// its order is still n_i, i.e. n_j | n_i·c_j. Coordinates transform by
// x_j ↦ x_j − c_j·x_i, which is a row operation on the class map.
fn reduce_generators(mut dm: DiscriminantForm) -> DiscriminantForm {
    let orders = dm.form.orders().to_vec();
    let k = orders.len();
    if k < 2 {
        return dm;
    }
    // basis[i]: coordinates of the current i-th generator in the original presentation.
    let mut basis: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect();
    let original = dm.form.clone();
    let element = |c: &[i64]| original.element(c).expect("coordinates are in range");
    for i in 0..k {
        let steps: Vec<u64> = (0..k).map(|j| if j == i { 0 } else { orders[j] / orders[j].gcd(&orders[i]) }).collect();
        let choices: Vec<u64> = (0..k).map(|j| if j == i { 1 } else { orders[j] / steps[j] }).collect();
        if choices.iter().try_fold(1u64, |acc, &c| acc.checked_mul(c)).is_none_or(|n| n > REDUCTION_CANDIDATES) {
            continue;
        }
        let combine = |c: &[u64]| -> Vec<i64> {
            (0..k)
                .map(|t| {
                    let v = basis[i][t] + (0..k).filter(|&j| j != i).map(|j| c[j] as i64 * basis[j][t]).sum::<i64>();
                    v.rem_euclid(orders[t] as i64)
                })
                .collect()
        };
        let mut best_c = vec![0u64; k];
        let mut best_q = original.q(&element(&basis[i]));
        let mut c = vec![0u64; k];
        loop {
            let mut j = 0;
            while j < k {
                if j != i {
                    c[j] += steps[j];
                    if c[j] < orders[j] {
                        break;
                    }
                    c[j] = 0;
                }
                j += 1;
            }
            if j == k {
                break;
            }
            let q = original.q(&element(&combine(&c)));
            if q < best_q {
                best_q = q;
                best_c = c.clone();
            }
        }
        if best_c.iter().all(|&x| x == 0) {
            continue;
        }
        basis[i] = combine(&best_c);
        let mut lift = dm.lifts[i].clone();
        for j in (0..k).filter(|&j| j != i && best_c[j] != 0) {
            let cj = BigInt::from(best_c[j]);
            for (a, w) in lift.iter_mut().zip(&dm.lifts[j]) {
                *a += w * BigRational::from_integer(cj.clone());
            }
            for col in 0..dm.class_map.cols() {
                let v = &dm.class_map[(j, col)] - &cj * &dm.class_map[(i, col)];
                dm.class_map[(j, col)] = v;
            }
        }
        dm.lifts[i] = lift;
    }
    let gens: Vec<FqfElement> = basis.iter().map(|c| element(c)).collect();
    let q_values = gens.iter().map(|x| original.q(x)).collect();
    let bilinear = gens.iter().map(|x| gens.iter().map(|y| original.b(x, y)).collect()).collect();
    dm.form = FiniteQuadraticForm::new(orders, q_values, bilinear).expect("a basis change keeps the form well defined");
    dm
}

impl DiscriminantForm {
    pub fn form(&self) -> &FiniteQuadraticForm {
        &self.form
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    /// Lifts `w_i ∈ L ⊗ Q` of the generators, in lattice coordinates.
    pub fn lifts(&self) -> &[Vec<BigRational>] {
        &self.lifts
    }

    /// `Σ c_i w_i` for `x = Σ c_i g_i`.
    pub fn lift(&self, x: &FqfElement) -> Vec<BigRational> {
        let mut acc = vec![BigRational::zero(); self.gram.rows()];
        for (c, w) in x.0.iter().zip(&self.lifts) {
            if *c == 0 {
                continue;
            }
            let c = BigRational::from_integer(BigInt::from(*c));
            for (a, wi) in acc.iter_mut().zip(w) {
                *a += &c * wi;
            }
        }
        acc
    }

    /// Class of `w ∈ L^∨` (lattice coordinates) in `D_L`.
    pub fn class_of(&self, w: &[BigRational]) -> Result<FqfElement> {
        if w.len() != self.gram.rows() {
            return Err(Error::DimensionMismatch("vector length differs from lattice rank".into()));
        }
        let gw: Vec<BigInt> = (0..w.len())
            .map(|i| {
                let s: BigRational = (0..w.len()).map(|j| BigRational::from_integer(self.gram[(i, j)].clone()) * &w[j]).sum();
                if s.is_integer() {
                    Ok(s.to_integer())
                } else {
                    Err(Error::InvalidElement("vector is not in the dual lattice".into()))
                }
            })
            .collect::<Result<_>>()?;
        let coords: Vec<i128> = self
            .class_map
            .mul_vec(&gw)
            .into_iter()
            .zip(self.form.orders())
            .map(|(c, &n)| c.mod_floor(&BigInt::from(n)).to_i128().unwrap())
            .collect();
        Ok(self.form.reduce(&coords))
    }

    /// Class of an integer vector of `L ⊗ Q` given with a common denominator.
    pub fn class_of_integral(&self, v: &[BigInt]) -> Result<FqfElement> {
        self.class_of(&v.iter().map(|x| BigRational::from_integer(x.clone())).collect::<Vec<_>>())
    }

    /// Discriminant form of the orthogonal direct sum.
    pub fn direct_sum(&self, other: &DiscriminantForm) -> DiscriminantForm {
        let r1 = self.gram.rows();
        let r2 = other.gram.rows();
        let pad = |w: &Vec<BigRational>, before: usize, after: usize| {
            let mut v = vec![BigRational::zero(); before];
            v.extend(w.iter().cloned());
            v.extend(std::iter::repeat_n(BigRational::zero(), after));
            v
        };
        let mut lifts: Vec<Vec<BigRational>> = self.lifts.iter().map(|w| pad(w, 0, r2)).collect();
        lifts.extend(other.lifts.iter().map(|w| pad(w, r1, 0)));
        DiscriminantForm {
            form: self.form.direct_sum(&other.form),
            gram: self.gram.block_diag(&other.gram),
            lifts,
            class_map: self.class_map.block_diag(&other.class_map),
        }
    }

    /// Image in `O(D_L)` of an isometry `S` of `L` (columns = images of the
    /// basis vectors).
    pub fn push_forward(&self, s: &IntMatrix) -> Result<FqfMap> {
        if s.rows() != self.gram.rows() || s.cols() != self.gram.rows() {
            return Err(Error::DimensionMismatch("isometry has the wrong shape".into()));
        }
        if &(&s.transpose() * &self.gram) * s != self.gram {
            return Err(Error::NotAnAutomorphism("matrix does not preserve the Gram matrix".into()));
        }
        let images = self
            .lifts
            .iter()
            .map(|w| {
                let sw: Vec<BigRational> = (0..w.len())
                    .map(|i| (0..w.len()).map(|j| BigRational::from_integer(s[(i, j)].clone()) * &w[j]).sum())
                    .collect();
                self.class_of(&sw)
            })
            .collect::<Result<_>>()?;
        Ok(FqfMap::new(images))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::standard_lattice;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn lat(rows: &[Vec<i64>]) -> Lattice {
        Lattice::from_rows(rows).unwrap()
    }

    fn disc(rows: &[Vec<i64>]) -> DiscriminantForm {
        discriminant_form(&lat(rows)).unwrap()
    }

    fn a() -> DiscriminantForm {
        disc(&[vec![2, 4], vec![4, 0]])
    }

    fn c() -> DiscriminantForm {
        disc(&[vec![-2, 4], vec![4, 0]])
    }

    fn l2d(d: i64) -> FiniteQuadraticForm {
        discriminant_form(&standard_lattice(&format!("L2d({d})")).unwrap()).unwrap().form().clone()
    }

    #[test]
    fn binary_form_examples() {
        let da = a();
        assert_eq!(da.form().invariant_factors(), vec![2, 8]);
        let t1 = da.class_of(&[r(1, 2), r(0, 1)]).unwrap();
        let t2 = da.class_of(&[r(2, 8), r(1, 8)]).unwrap();
        assert_eq!(da.form().q(&t1), r(1, 2));
        assert_eq!(da.form().q(&t2), r(3, 8));

        let dc = c();
        let s1 = dc.class_of(&[r(1, 2), r(0, 1)]).unwrap();
        let s2 = dc.class_of(&[r(-2, 8), r(1, 8)]).unwrap();
        assert_eq!(dc.form().q(&s1), r(3, 2));
        assert_eq!(dc.form().q(&s2), r(13, 8));

        let db = disc(&[vec![0, 4], vec![4, 0]]);
        assert_eq!(db.form().invariant_factors(), vec![4, 4]);
        assert!(discriminant_form(&standard_lattice("U").unwrap()).unwrap().form().is_trivial());
    }

    #[test]
    fn lifts_reproduce_values() {
        for rows in [
            vec![vec![2, 4], vec![4, 0]],
            vec![vec![4, 1], vec![1, 6]],
            vec![vec![2, 1, 0], vec![1, 4, 1], vec![0, 1, -6]],
            vec![vec![2, 0, 0], vec![0, 4, 0], vec![0, 0, 8]],
            vec![vec![0, 4], vec![4, 0]],
        ] {
            let d = disc(&rows);
            let g = IntMatrix::from_rows(&rows);
            for (i, wi) in d.lifts().iter().enumerate() {
                let gi = d.form().generator(i);
                assert_eq!(d.class_of(wi).unwrap(), gi);
                let mut norm = BigRational::zero();
                for a in 0..wi.len() {
                    for b in 0..wi.len() {
                        norm += &wi[a] * BigRational::from_integer(g[(a, b)].clone()) * &wi[b];
                    }
                }
                let two = BigRational::from_integer(2.into());
                let reduced = &norm - (&norm / &two).floor() * &two;
                assert_eq!(d.form().q(&gi), reduced);
            }
        }
    }

    #[test]
    fn generators_are_reduced_by_the_others() {
        assert_eq!(a().form().generator_q_values(), vec![r(1, 2), r(3, 8)]);
        let d = disc(&[vec![2, 0, 0], vec![0, 4, 0], vec![0, 0, 8]]);
        let f = d.form();
        let elems = f.elements().unwrap();
        for i in 0..f.generator_count() {
            // no allowed replacement g_i + Σ c_j g_j has a smaller value
            let gi = f.generator(i);
            for x in &elems {
                let mut y = x.clone();
                for j in 0..f.generator_count() {
                    if j == i {
                        y = f.add(&f.scale(-(y.coords()[i] as i64), &f.generator(i)), &y);
                    }
                }
                let cand = f.add(&gi, &y);
                if f.element_order(&cand) == f.orders()[i] {
                    assert!(f.q(&cand) >= f.q(&gi));
                }
            }
        }
    }

    #[test]
    fn l2d_generator_value() {
        let f = l2d(7);
        assert_eq!(f.orders(), &[14]);
        assert_eq!(f.q(&f.generator(0)), r(27, 14));
        assert_eq!(f.min_generators(), 1);
    }

    #[test]
    fn order_two_values() {
        let da = a();
        let mut vals: Vec<BigRational> =
            da.form().element_table().unwrap().into_iter().filter(|e| e.order <= 2).map(|e| e.q).collect();
        vals.sort();
        assert_eq!(vals, vec![r(0, 1), r(0, 1), r(1, 2), r(1, 2)]);
        let dc = c();
        let vals: HashSet<BigRational> =
            dc.form().element_table().unwrap().into_iter().filter(|e| e.order <= 2).map(|e| e.q).collect();
        assert_eq!(vals, [r(0, 1), r(3, 2)].into_iter().collect());
    }

    #[test]
    fn isomorphism_examples() {
        let (da, dc) = (a(), c());
        assert_eq!(fqf_isomorphic(da.form(), dc.form()).unwrap(), None);
        let db = disc(&[vec![0, 4], vec![4, 0]]);
        assert_eq!(fqf_isomorphic(da.form(), db.form()).unwrap(), None);
        for d in [1, 2, 5, 6] {
            let two_d = discriminant_form(&lat(&[vec![2 * d]])).unwrap().form().clone();
            let m = fqf_isomorphic(&two_d, &l2d(d).negate()).unwrap().expect("isomorphic");
            assert!(two_d.is_isometry_to(&l2d(d).negate(), &m));
        }
        let dd = disc(&[vec![2, 1], vec![1, 12]]);
        let de = disc(&[vec![4, 1], vec![1, 6]]);
        assert!(fqf_isomorphic(dd.form(), de.form()).unwrap().is_some());
    }

    #[test]
    fn negation() {
        let qa = a().form().clone();
        let n = qa.negate();
        assert_eq!(n.negate(), qa);
        for x in qa.elements().unwrap() {
            assert_eq!(qa.q(&x) + n.q(&x) - (qa.q(&x) + n.q(&x)).floor() / r(2, 1) * r(2, 1), r(0, 1));
        }
        assert_eq!(FiniteQuadraticForm::trivial().negate(), FiniteQuadraticForm::trivial());
        let f = l2d(5);
        assert_eq!(f.negate().negate(), f);
    }

    // Units u of Z/n with u²·q(1) ≡ q(1) mod 2.
    fn cyclic_oracle(n: u64, q: &BigRational) -> usize {
        (1..n)
            .filter(|&u| u.gcd(&n) == 1)
            .filter(|&u| {
                let diff = BigRational::from_integer(BigInt::from(u * u - 1)) * q;
                (diff / r(2, 1)).is_integer()
            })
            .count()
    }

    #[test]
    fn orthogonal_groups_of_cyclic_forms() {
        assert_eq!(FiniteQuadraticForm::trivial().orthogonal_group().unwrap().len(), 1);
        assert_eq!(l2d(1).orthogonal_group().unwrap().len(), 1);
        let g4 = l2d(4).orthogonal_group().unwrap();
        let imgs: Vec<u64> = g4.iter().map(|m| m.images()[0].coords()[0]).collect();
        assert_eq!(imgs, vec![1, 7]);
        assert_eq!(l2d(6).orthogonal_group().unwrap().len(), 4);
        for d in 2..=12u64 {
            let f = l2d(d as i64);
            let q = f.q(&f.generator(0));
            assert_eq!(f.orthogonal_group().unwrap().len(), cyclic_oracle(2 * d, &q), "d = {d}");
        }
    }

    #[test]
    fn orthogonal_group_is_a_group() {
        let qa = a().form().clone();
        let g = qa.orthogonal_group().unwrap();
        assert!(g.contains(&FqfMap::identity(&qa)));
        for f in &g {
            assert!(qa.is_automorphism(f));
            for h in &g {
                assert!(g.contains(&f.compose(h, &qa)));
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = disc(&[vec![2, 1, 0], vec![1, 4, 0], vec![0, 0, 12]]).form().clone();
        assert_eq!(
            f.orthogonal_group_with(Execution::Sequential).unwrap(),
            f.orthogonal_group_with(Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn subgroup_counts() {
        let z2 = FiniteQuadraticForm::cyclic(2, r(1, 2)).unwrap();
        assert_eq!(z2.all_subgroups().unwrap().len(), 2);
        let klein = disc(&[vec![2, 0], vec![0, 2]]).form().clone();
        assert_eq!(klein.all_subgroups().unwrap().len(), 5);
        assert_eq!(a().form().all_subgroups().unwrap().len(), 11);
    }

    // Subgroups of a small group by brute force over element subsets closed
    // under addition.
    fn brute_subgroup_count(f: &FiniteQuadraticForm) -> usize {
        let elems = f.elements().unwrap();
        let n = elems.len();
        assert!(n <= 16);
        (0u32..1 << n)
            .filter(|mask| mask & 1 == 1)
            .filter(|mask| {
                let has = |i: usize| mask >> i & 1 == 1;
                (0..n)
                    .filter(|&i| has(i))
                    .all(|i| (0..n).filter(|&j| has(j)).all(|j| has(f.index_of(&f.add(&elems[i], &elems[j])))))
            })
            .count()
    }

    #[test]
    fn subgroup_enumeration_matches_brute_force() {
        for rows in
            [vec![vec![2, 4], vec![4, 0]], vec![vec![0, 4], vec![4, 0]], vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 4]]]
        {
            let f = disc(&rows).form().clone();
            assert_eq!(f.all_subgroups().unwrap().len(), brute_subgroup_count(&f), "{rows:?}");
        }
    }

    #[test]
    fn isotropic_subgroups() {
        assert_eq!(FiniteQuadraticForm::trivial().isotropic_subgroups().unwrap().len(), 1);
        let qa = a().form().clone();
        let t2 = a().class_of(&[r(2, 8), r(1, 8)]).unwrap();
        let h = qa.span(&[qa.scale(4, &t2)]).unwrap();
        let iso = qa.isotropic_subgroups().unwrap();
        assert!(iso.contains(&h));
        let brute = qa.all_subgroups().unwrap().into_iter().filter(|s| qa.is_isotropic(s)).count();
        assert_eq!(iso.len(), brute);
        assert_eq!(l2d(1).isotropic_subgroups().unwrap().len(), 1);
        let quotient = qa.quotient_form(&h).unwrap();
        assert_eq!(quotient.order(), 4);
        assert_eq!(qa.orthogonal_subgroup(&h).unwrap().order() * h.order(), 16);
    }

    #[test]
    fn trivial_quotient_is_the_form() {
        let qa = a().form().clone();
        let z = qa.trivial_subgroup();
        assert_eq!(qa.orthogonal_subgroup(&z).unwrap().order(), 16);
        let q = qa.quotient_form(&z).unwrap();
        assert!(fqf_isomorphic(&q, &qa).unwrap().is_some());
    }

    #[test]
    fn quotient_by_non_isotropic_fails() {
        let qa = a().form().clone();
        let t1 = a().class_of(&[r(1, 2), r(0, 1)]).unwrap();
        let h = qa.span(&[t1]).unwrap();
        assert_eq!(qa.quotient_form(&h), Err(Error::NotIsotropic));
    }

    #[test]
    fn quotient_of_glued_sum() {
        // <8> + <2> contains diag(2,2) with index 2 (basis 2e1, e2); the
        // quotient of the classifying subgroup recovers D of diag(2,2).
        let m = discriminant_form(&lat(&[vec![8, 0], vec![0, 2]])).unwrap();
        let h_elem = m.class_of(&[r(1, 2), r(0, 1)]).unwrap();
        let h = m.form().span(&[h_elem]).unwrap();
        assert!(m.form().is_isotropic(&h));
        let quotient = m.form().quotient_form(&h).unwrap();
        let target = disc(&[vec![2, 0], vec![0, 2]]);
        assert!(fqf_isomorphic(&quotient, target.form()).unwrap().is_some());
    }

    #[test]
    fn subquotient_projection_is_a_homomorphism() {
        let f = disc(&[vec![0, 4], vec![4, 0]]).form().clone();
        for h in f.isotropic_subgroups().unwrap() {
            let perp = f.orthogonal_subgroup(&h).unwrap();
            let sq = f.subquotient(&perp, &h).unwrap();
            assert_eq!(sq.form().order() as usize * h.order(), perp.order());
            let els = perp.elements(&f);
            for x in &els {
                assert_eq!(sq.form().q(&sq.project(x)), f.q(x));
                for y in &els {
                    assert_eq!(sq.project(&f.add(x, y)), sq.form().add(&sq.project(x), &sq.project(y)));
                }
            }
            for x in h.elements(&f) {
                assert!(sq.project(&x).is_zero());
            }
        }
    }

    #[test]
    fn push_forward_of_minus_identity() {
        let d = discriminant_form(&standard_lattice("L2d(3)").unwrap()).unwrap();
        let minus = IntMatrix::identity(21).scale(&BigInt::from(-1));
        assert_eq!(d.push_forward(&minus).unwrap(), FqfMap::negation(d.form()));
    }

    #[test]
    fn group_limit_is_enforced() {
        let big = FiniteQuadraticForm::cyclic(200_002, r(1, 200_002)).unwrap();
        assert!(matches!(big.elements(), Err(Error::GroupTooLarge { .. })));
    }

    #[test]
    fn invalid_forms_are_rejected() {
        assert!(FiniteQuadraticForm::cyclic(2, r(1, 3)).is_err());
        assert!(FiniteQuadraticForm::cyclic(4, r(1, 8)).is_err());
        assert!(FiniteQuadraticForm::cyclic(3, r(1, 3)).is_err());
        assert!(FiniteQuadraticForm::cyclic(4, r(1, 4)).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn even_gram() -> impl Strategy<Value = Lattice> {
            (-4i64..5, -6i64..7, -4i64..5, -6i64..7, -6i64..7, -4i64..5)
                .prop_filter_map("degenerate", |(a, b, c, d, e, f)| {
                    Lattice::from_rows(&[vec![2 * a, b, d], vec![b, 2 * c, e], vec![d, e, 2 * f]]).ok()
                })
                .prop_filter("large", |l| l.discriminant() <= BigInt::from(400))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn polarisation_identity_and_order_law(l in even_gram()) {
                let d = discriminant_form(&l).unwrap();
                let f = d.form();
                prop_assert_eq!(BigInt::from(f.order()), l.discriminant());
                prop_assert!(f.is_nondegenerate().unwrap());
                prop_assume!(f.order() <= 48);
                let els = f.elements().unwrap();
                for x in &els {
                    for y in &els {
                        let lhs = f.q(&f.add(x, y)) - f.q(x) - f.q(y) - f.b(x, y) * r(2, 1);
                        prop_assert!((lhs / r(2, 1)).is_integer());
                    }
                }
            }

            #[test]
            fn perp_order_law(l in even_gram()) {
                let f = discriminant_form(&l).unwrap().form().clone();
                prop_assume!(f.order() <= 64);
                for h in f.all_subgroups().unwrap() {
                    prop_assert_eq!(h.order() * f.orthogonal_subgroup(&h).unwrap().order(), f.order() as usize);
                }
            }

            #[test]
            fn unimodular_base_change_keeps_the_form(l in even_gram(), k in -3i64..4) {
                let s = IntMatrix::from_rows(&[vec![1, k, 0], vec![0, 1, 0], vec![1, 0, 1]]);
                let g2 = &(&s.transpose() * l.gram()) * &s;
                let l2 = Lattice::new(g2).unwrap();
                let f1 = discriminant_form(&l).unwrap().form().clone();
                let f2 = discriminant_form(&l2).unwrap().form().clone();
                prop_assert!(fqf_isomorphic(&f1, &f2).unwrap().is_some());
            }
        }
    }
}
