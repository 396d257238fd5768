//! Even lattices given by Gram matrices, embeddings between them, and the
//! enumeration tools needed for definite lattices.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intlinalg::{gcd_all, hermite_normal_form, integer_kernel_saturated, saturate_columns, smith_normal_form, IntMatrix};
use crate::par::{self, Execution};

/// Largest rank accepted by the definite isometry searches.
pub const DEFINITE_RANK_LIMIT: usize = 8;

/// Cap on the number of isometries a definite search may produce.
pub const ISOMETRY_LIMIT: usize = 1_000_000;

/// Even, nondegenerate, symmetric integral Gram matrix.
///
/// A lattice may carry a list of *marked hyperbolic planes*: basis index pairs
/// `(e, f)` with `e² = f² = 0`, `(e, f) = 1` spanning an orthogonal direct
/// summand. They are required by [`crate::k3::eichler_invariant`].
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    gram: IntMatrix,
    label: Option<String>,
    hyperbolic_planes: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.plus, self.minus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    Negative,
}

impl Lattice {
    /// Validates a Gram matrix: symmetric, nondegenerate, even diagonal.
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if let Some(index) = (0..gram.rows()).find(|&i| gram[(i, i)].is_odd()) {
            return Err(Error::NotEven { index });
        }
        if gram.det().is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(Lattice { gram, label: None, hyperbolic_planes: Vec::new() })
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> BigInt {
        self.gram.det()
    }

    /// `|det G|`, the order of the discriminant group.
    pub fn discriminant(&self) -> BigInt {
        self.det().abs()
    }

    pub fn pair(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        self.gram.bilinear(v, w)
    }

    pub fn norm(&self, v: &[BigInt]) -> BigInt {
        self.gram.bilinear(v, v)
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    pub fn hyperbolic_planes(&self) -> &[(usize, usize)] {
        &self.hyperbolic_planes
    }

    /// Marks basis vectors `e`, `f` as a hyperbolic plane that is an orthogonal
    /// summand.
    pub fn mark_hyperbolic_plane(mut self, e: usize, f: usize) -> Result<Self> {
        let n = self.rank();
        if e >= n || f >= n || e == f {
            return Err(Error::BadParameter("hyperbolic plane indices out of range".into()));
        }
        let g = &self.gram;
        let ok = g[(e, e)].is_zero()
            && g[(f, f)].is_zero()
            && g[(e, f)].is_one()
            && (0..n).filter(|&k| k != e && k != f).all(|k| g[(e, k)].is_zero() && g[(f, k)].is_zero());
        if !ok {
            return Err(Error::BadParameter(format!("basis vectors {e},{f} do not span a hyperbolic summand")));
        }
        self.hyperbolic_planes.push((e, f));
        Ok(self)
    }

    /// Orthogonal direct sum; marked planes of both summands are kept.
    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let shift = self.rank();
        let mut planes = self.hyperbolic_planes.clone();
        planes.extend(other.hyperbolic_planes.iter().map(|&(e, f)| (e + shift, f + shift)));
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(format!("{a}+{b}")),
            _ => None,
        };
        Lattice { gram: self.gram.block_diag(&other.gram), label, hyperbolic_planes: planes }
    }

    /// Direct sum of `copies` copies.
    pub fn repeat(&self, copies: usize) -> Lattice {
        let mut out = Lattice { gram: IntMatrix::zeros(0, 0), label: None, hyperbolic_planes: Vec::new() };
        for _ in 0..copies {
            out = out.direct_sum(self);
        }
        if let Some(l) = &self.label {
            out.label = Some(format!("{copies}{l}"));
        }
        out
    }

    /// Scales the form by `n`. Marked planes survive only for `n = 1`.
    pub fn twist(&self, n: i64) -> Result<Lattice> {
        if n == 0 {
            return Err(Error::BadParameter("twist factor must be nonzero".into()));
        }
        let mut l = Lattice::new(self.gram.scale(&BigInt::from(n)))?;
        if n == 1 {
            l.hyperbolic_planes = self.hyperbolic_planes.clone();
        }
        l.label = self.label.as_ref().map(|s| format!("{s}({n})"));
        Ok(l)
    }

    /// Signature by exact congruence diagonalisation over Q.
    pub fn signature(&self) -> Signature {
        signature_of(&self.gram)
    }

    pub fn definiteness(&self) -> Option<Definiteness> {
        let s = self.signature();
        match (s.plus, s.minus) {
            (_, 0) => Some(Definiteness::Positive),
            (0, _) => Some(Definiteness::Negative),
            _ => None,
        }
    }

    pub fn is_definite(&self) -> bool {
        self.definiteness().is_some()
    }

    /// Positive generator of the ideal `(v, L)`.
    pub fn divisor(&self, v: &[BigInt]) -> Result<BigInt> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch(format!("vector of length {} in rank {}", v.len(), self.rank())));
        }
        if v.iter().all(Zero::is_zero) {
            return Err(Error::ZeroVector);
        }
        Ok(gcd_all(&self.gram.mul_vec(v)))
    }

    /// All `v` with `vᵀGv = n` for a definite lattice, sorted lexicographically.
    pub fn short_vectors(&self, n: &BigInt) -> Result<Vec<Vec<BigInt>>> {
        self.short_vectors_with(n, Execution::default())
    }

    pub fn short_vectors_with(&self, n: &BigInt, exec: Execution) -> Result<Vec<Vec<BigInt>>> {
        let (gram, target) = match self.definiteness() {
            Some(Definiteness::Positive) => (self.gram.clone(), n.clone()),
            Some(Definiteness::Negative) => (self.gram.scale(&BigInt::from(-1)), -n),
            None => return Err(Error::IndefiniteInput),
        };
        let mut out = fincke_pohst(&gram, &target, exec);
        out.sort();
        Ok(out)
    }

    /// Every isometry of a definite lattice of rank at most
    /// [`DEFINITE_RANK_LIMIT`]. Matrices act on coordinate columns:
    /// `Sᵀ·G·S = G`.
    pub fn isometry_group_definite(&self) -> Result<Vec<IntMatrix>> {
        self.isometry_group_definite_with(Execution::default())
    }

    pub fn isometry_group_definite_with(&self, exec: Execution) -> Result<Vec<IntMatrix>> {
        search_isometries(self, &self.gram, false, exec)
    }

    /// Decides whether `n` is represented, with a guarantee attached to the
    /// negative answers. See [`Representation`].
    pub fn represents(&self, n: &BigInt, bound: u64) -> Result<Representation> {
        if self.is_definite() {
            let vs = self.short_vectors(n)?;
            let best = vs.into_iter().filter(|v| v.iter().any(|x| !x.is_zero())).min_by(|a, b| witness_order(a, b));
            return Ok(match best {
                Some(v) => Representation::witness(canonical_sign(v)),
                None => Representation::NotFoundUpToBound { bound, completeness: Completeness::DefiniteExhaustive },
            });
        }
        if let Some(v) = search_box(&self.gram, n, bound) {
            return Ok(Representation::witness(v));
        }
        if let Some(m) = congruence_obstruction(&self.gram, n, bound) {
            return Ok(Representation::ObstructedMod { modulus: m });
        }
        if let Some(found) = isotropic_binary_decision(&self.gram, n) {
            return Ok(match found {
                Some(v) => Representation::witness(v),
                None => Representation::NotFoundUpToBound { bound, completeness: Completeness::IsotropicBinaryExhaustive },
            });
        }
        Ok(Representation::NotFoundUpToBound { bound, completeness: Completeness::Partial })
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "Lattice({l}: {})", self.gram),
            None => write!(f, "Lattice({})", self.gram),
        }
    }
}

/// Outcome of [`Lattice::represents`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Representation {
    Witness {
        vector: Vec<BigInt>,
        primitive: bool,
    },
    /// No vector found. `completeness` says whether this proves
    /// non-representation.
    NotFoundUpToBound {
        bound: u64,
        completeness: Completeness,
    },
    /// `n mod modulus` is not a value of the form modulo `modulus`.
    ObstructedMod {
        modulus: u64,
    },
}

impl Representation {
    fn witness(vector: Vec<BigInt>) -> Self {
        let primitive = gcd_all(&vector).is_one();
        Representation::Witness { vector, primitive }
    }

    pub fn is_witness(&self) -> bool {
        matches!(self, Representation::Witness { .. })
    }

    /// True when the answer is a proof that `n` is not represented.
    pub fn proves_absence(&self) -> bool {
        match self {
            Representation::Witness { .. } => false,
            Representation::ObstructedMod { .. } => true,
            Representation::NotFoundUpToBound { completeness, .. } => *completeness != Completeness::Partial,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    /// Only the coordinate box was searched; nothing is proved.
    Partial,
    /// The lattice is definite and the whole ellipsoid was enumerated.
    DefiniteExhaustive,
    /// Binary lattice with an isotropic basis vector: `y` divides `n`, so all
    /// candidates were checked.
    IsotropicBinaryExhaustive,
}

// Witness preference: smallest sup-norm, then lexicographic.
fn witness_order(a: &[BigInt], b: &[BigInt]) -> std::cmp::Ordering {
    let sup = |v: &[BigInt]| v.iter().map(|x| x.abs()).max().unwrap_or_default();
    sup(a).cmp(&sup(b)).then_with(|| canonical_sign(a.to_vec()).cmp(&canonical_sign(b.to_vec())))
}

/// Flips `v` so that its first nonzero coordinate is positive.
fn canonical_sign(v: Vec<BigInt>) -> Vec<BigInt> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => v.into_iter().map(|x| -x).collect(),
        _ => v,
    }
}

/// Searches `|coords| ≤ bound` shell by shell (sup-norm), at most
/// [`BOX_SEARCH_BUDGET`] candidates.
fn search_box(gram: &IntMatrix, n: &BigInt, bound: u64) -> Option<Vec<BigInt>> {
    let r = gram.rows();
    if r == 0 {
        return None;
    }
    let g = small_gram(gram)?;
    let target = n.to_i128()?;
    let mut visited: u64 = 0;
    for radius in 1..=bound as i64 {
        let mut best: Option<Vec<i64>> = None;
        let mut v = vec![-radius; r];
        loop {
            visited += 1;
            if visited > BOX_SEARCH_BUDGET {
                return best.map(to_big);
            }
            // Canonical representatives on the shell: first nonzero coordinate positive.
            let on_shell = v.iter().any(|x| x.abs() == radius);
            let positive_first = v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0);
            if on_shell && positive_first && quad_i128(&g, &v) == target && best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v.clone());
            }
            if !odometer(&mut v, -radius, radius) {
                break;
            }
        }
        if best.is_some() {
            return best.map(to_big);
        }
    }
    None
}

const BOX_SEARCH_BUDGET: u64 = 20_000_000;
const CONGRUENCE_SCAN_BUDGET: u64 = 4_000_000;

fn to_big(v: Vec<i64>) -> Vec<BigInt> {
    v.into_iter().map(BigInt::from).collect()
}

fn odometer(v: &mut [i64], lo: i64, hi: i64) -> bool {
    for x in v.iter_mut() {
        if *x < hi {
            *x += 1;
            return true;
        }
        *x = lo;
    }
    false
}

fn small_gram(gram: &IntMatrix) -> Option<Vec<Vec<i128>>> {
    gram.to_rows().iter().map(|row| row.iter().map(|x| x.to_i128()).collect()).collect()
}

fn quad_i128(g: &[Vec<i128>], v: &[i64]) -> i128 {
    let mut acc = 0i128;
    for i in 0..v.len() {
        if v[i] == 0 {
            continue;
        }
        let mut row = 0i128;
        for j in 0..v.len() {
            row += g[i][j] * v[j] as i128;
        }
        acc += v[i] as i128 * row;
    }
    acc
}

/// Smallest modulus `m` in `2..=bound` or `m = 8·|det G|` such that `n` is not
/// a value of the form modulo `m`. Moduli with `m^rank` above the scan budget
/// are skipped.
fn congruence_obstruction(gram: &IntMatrix, n: &BigInt, bound: u64) -> Option<u64> {
    let r = gram.rows() as u32;
    let extra = (gram.det().abs() * 8u32).to_u64()?;
    let mut moduli: Vec<u64> = (2..=bound).collect();
    if extra > bound {
        moduli.push(extra);
    }
    let g = small_gram(gram)?;
    for m in moduli {
        let Some(size) = m.checked_pow(r) else { continue };
        if size > CONGRUENCE_SCAN_BUDGET {
            continue;
        }
        let target = n.mod_floor(&BigInt::from(m)).to_i128()?;
        let mut v = vec![0i64; r as usize];
        let mut hit = false;
        loop {
            if quad_i128(&g, &v).rem_euclid(m as i128) == target {
                hit = true;
                break;
            }
            if !odometer(&mut v, 0, m as i64 - 1) {
                break;
            }
        }
        if !hit {
            return Some(m);
        }
    }
    None
}

/// Exact decision for rank-2 lattices with an isotropic basis vector and
/// `n ≠ 0`: writing the form as `y·(2b·x + c·y)` forces `y | n`.
/// Returns `None` when not applicable.
fn isotropic_binary_decision(gram: &IntMatrix, n: &BigInt) -> Option<Option<Vec<BigInt>>> {
    if gram.rows() != 2 || n.is_zero() {
        return None;
    }
    let swap = if gram[(0, 0)].is_zero() {
        false
    } else if gram[(1, 1)].is_zero() {
        true
    } else {
        return None;
    };
    let (b, c) = if swap { (gram[(0, 1)].clone(), gram[(0, 0)].clone()) } else { (gram[(0, 1)].clone(), gram[(1, 1)].clone()) };
    // form = 2b·x·y + c·y²  with x the isotropic coordinate
    let nabs = n.abs();
    let limit = nabs.to_u64()?;
    let mut found: Vec<Vec<BigInt>> = Vec::new();
    let mut k: u64 = 1;
    while k * k <= limit {
        if limit % k == 0 {
            for d in [k, limit / k] {
                for y in [BigInt::from(d), -BigInt::from(d)] {
                    // 2b·x·y = n − c·y²
                    let rhs = n - &c * &y * &y;
                    let den = BigInt::from(2) * &b * &y;
                    if rhs.is_multiple_of(&den) {
                        let x = rhs / den;
                        found.push(if swap { vec![y.clone(), x] } else { vec![x, y.clone()] });
                    }
                }
            }
        }
        k += 1;
    }
    found.sort_by(|a, b| witness_order(a, b));
    Some(found.into_iter().next().map(canonical_sign))
}

/// Signature of a symmetric nondegenerate matrix by congruence
/// diagonalisation over Q. A zero pivot with a nonzero off-diagonal entry is
/// cleared as a hyperbolic 2×2 block contributing `(1, 1)`.
pub fn signature_of(gram: &IntMatrix) -> Signature {
    let n = gram.rows();
    let mut a: Vec<Vec<BigRational>> =
        gram.to_rows().into_iter().map(|r| r.into_iter().map(BigRational::from_integer).collect()).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut sig = Signature { plus: 0, minus: 0 };
    while let Some(&i) = alive.first() {
        if let Some(&p) = alive.iter().find(|&&k| !a[k][k].is_zero()) {
            let piv = a[p][p].clone();
            if piv.is_positive() {
                sig.plus += 1;
            } else {
                sig.minus += 1;
            }
            let others: Vec<usize> = alive.iter().copied().filter(|&k| k != p).collect();
            for &k in &others {
                if a[k][p].is_zero() {
                    continue;
                }
                let f = &a[k][p] / &piv;
                for &l in &alive {
                    let x = &f * &a[p][l];
                    a[k][l] -= x;
                }
                for &l in &alive {
                    let x = &f * &a[l][p];
                    a[l][k] -= x;
                }
            }
            alive.retain(|&k| k != p);
            continue;
        }
        // All remaining diagonal entries vanish.
        let Some(&j) = alive.iter().find(|&&k| k != i && !a[i][k].is_zero()) else {
            // Degenerate direction; callers guarantee this does not happen.
            alive.remove(0);
            continue;
        };
        sig.plus += 1;
        sig.minus += 1;
        let bij = a[i][j].clone();
        // Block [[0, b], [b, 0]]: row k -= (a_kj/b)·row i + (a_ki/b)·row j.
        let others: Vec<usize> = alive.iter().copied().filter(|&k| k != i && k != j).collect();
        for &k in &others {
            let ci = &a[k][j] / &bij;
            let cj = &a[k][i] / &bij;
            for &l in &alive {
                let x = &ci * &a[i][l] + &cj * &a[j][l];
                a[k][l] -= x;
            }
            for &l in &alive {
                let x = &ci * &a[l][i] + &cj * &a[l][j];
                a[l][k] -= x;
            }
        }
        alive.retain(|&k| k != i && k != j);
    }
    sig
}

fn rational_ceil_sqrt_bound(t: &BigRational) -> BigInt {
    // Integer s with s ≥ √t.
    if !t.is_positive() {
        return BigInt::zero();
    }
    t.ceil().to_integer().sqrt() + 1
}

/// Exact Fincke-Pohst enumeration of `{x : xᵀGx = n}` for positive definite
/// `G`. Candidates come from rational bounds; each is accepted only on exact
/// equality.
fn fincke_pohst(gram: &IntMatrix, n: &BigInt, exec: Execution) -> Vec<Vec<BigInt>> {
    let r = gram.rows();
    if n.is_negative() {
        return Vec::new();
    }
    if r == 0 || n.is_zero() {
        return vec![vec![BigInt::zero(); r]];
    }
    // q[i][i] diagonal, q[i][j] (j > i) the Gram-Schmidt coefficients.
    let mut q: Vec<Vec<BigRational>> =
        gram.to_rows().into_iter().map(|row| row.into_iter().map(BigRational::from_integer).collect()).collect();
    for i in 0..r {
        for j in i + 1..r {
            q[j][i] = q[i][j].clone();
            q[i][j] = &q[i][j] / &q[i][i];
        }
        for k in i + 1..r {
            for l in k..r {
                let x = &q[k][i] * &q[i][l];
                q[k][l] -= x;
            }
        }
    }
    let target = BigRational::from_integer(n.clone());
    let top = r - 1;
    let range = coordinate_range(&q, top, &vec![BigInt::zero(); r], &target);
    let firsts: Vec<BigInt> = range.collect();
    par::flat_map(exec, firsts, |x_top| {
        let mut x = vec![BigInt::zero(); r];
        x[top] = x_top;
        let c = BigRational::from_integer(x[top].clone());
        let used = &q[top][top] * &c * &c;
        let rest = &target - used;
        let mut out = Vec::new();
        if !rest.is_negative() {
            descend(&q, top, &mut x, rest, &mut out);
        }
        out
    })
}

fn centre(q: &[Vec<BigRational>], i: usize, x: &[BigInt]) -> BigRational {
    let mut c = BigRational::zero();
    for (j, xj) in x.iter().enumerate().skip(i + 1) {
        if !xj.is_zero() {
            c += &q[i][j] * BigRational::from_integer(xj.clone());
        }
    }
    c
}

fn coordinate_range(q: &[Vec<BigRational>], i: usize, x: &[BigInt], budget: &BigRational) -> impl Iterator<Item = BigInt> {
    let c = centre(q, i, x);
    let t = budget / &q[i][i];
    let s = rational_ceil_sqrt_bound(&t);
    let lo = (-&c).floor().to_integer() - &s;
    let hi = (-&c).ceil().to_integer() + &s;
    let mut k = lo;
    std::iter::from_fn(move || {
        if k > hi {
            return None;
        }
        let out = k.clone();
        k += 1;
        Some(out)
    })
}

// Fills coordinates below `level` given x[level..] and the remaining budget.
fn descend(q: &[Vec<BigRational>], level: usize, x: &mut Vec<BigInt>, budget: BigRational, out: &mut Vec<Vec<BigInt>>) {
    if level == 0 {
        if budget.is_zero() {
            out.push(x.clone());
        }
        return;
    }
    let i = level - 1;
    let c = centre(q, i, x);
    for xi in coordinate_range(q, i, x, &budget).collect::<Vec<_>>() {
        let shifted = BigRational::from_integer(xi.clone()) + &c;
        let used = &q[i][i] * &shifted * &shifted;
        if used > budget {
            continue;
        }
        x[i] = xi;
        descend(q, i, x, &budget - used, out);
    }
    x[i] = BigInt::zero();
}

/// Backtracking search for integer matrices `S` (columns = images of the
/// source basis in `target`) with `Sᵀ·G_target·S = source_gram`.
pub(crate) fn search_isometries(
    target: &Lattice,
    source_gram: &IntMatrix,
    first_only: bool,
    exec: Execution,
) -> Result<Vec<IntMatrix>> {
    let r = target.rank();
    if r > DEFINITE_RANK_LIMIT {
        return Err(Error::RankLimitExceeded { rank: r, limit: DEFINITE_RANK_LIMIT });
    }
    if source_gram.rows() != r {
        return Ok(Vec::new());
    }
    if target.definiteness().is_none() {
        return Err(Error::IndefiniteInput);
    }
    if r == 0 {
        return Ok(vec![IntMatrix::zeros(0, 0)]);
    }
    let g = small_gram(target.gram()).ok_or_else(|| Error::BadParameter("Gram entries too large".into()))?;
    let src = small_gram(source_gram).ok_or_else(|| Error::BadParameter("Gram entries too large".into()))?;

    let mut by_norm: HashMap<i128, Vec<Vec<i64>>> = HashMap::new();
    let mut candidates: Vec<Vec<Vec<i64>>> = Vec::with_capacity(r);
    for i in 0..r {
        let norm = src[i][i];
        if let std::collections::hash_map::Entry::Vacant(e) = by_norm.entry(norm) {
            let vs = target.short_vectors_with(&BigInt::from(norm), exec)?;
            let small: Option<Vec<Vec<i64>>> = vs.iter().map(|v| v.iter().map(|x| x.to_i64()).collect()).collect();
            e.insert(small.ok_or_else(|| Error::BadParameter("short vector too large".into()))?);
        }
        candidates.push(by_norm[&norm].clone());
    }
    // Precompute G·v for every candidate so inner products are dot products.
    let with_image: Vec<Vec<(Vec<i64>, Vec<i128>)>> = candidates
        .into_iter()
        .map(|cs| {
            cs.into_iter()
                .map(|v| {
                    let gv: Vec<i128> = (0..r).map(|a| (0..r).map(|b| g[a][b] * v[b] as i128).sum()).collect();
                    (v, gv)
                })
                .collect()
        })
        .collect();

    let firsts: Vec<usize> = (0..with_image[0].len()).collect();
    let search = |first: usize| -> std::result::Result<Vec<Vec<usize>>, Error> {
        let mut found = Vec::new();
        let mut chosen = vec![first];
        backtrack(&with_image, &src, &mut chosen, first_only, &mut found)?;
        Ok(found)
    };
    let mut all: Vec<Vec<usize>> = Vec::new();
    if first_only {
        let hit = par::find_map_first(exec, firsts, |f| match search(f) {
            Ok(v) if !v.is_empty() => Some(Ok(v)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        });
        if let Some(res) = hit {
            all = res?;
        }
    } else {
        for part in par::map(exec, firsts, search) {
            all.extend(part?);
            if all.len() > ISOMETRY_LIMIT {
                return Err(Error::TooManyIsometries { limit: ISOMETRY_LIMIT });
            }
        }
    }
    Ok(all
        .into_iter()
        .map(|idx| {
            let cols: Vec<Vec<BigInt>> =
                idx.iter().enumerate().map(|(i, &k)| with_image[i][k].0.iter().map(|&x| BigInt::from(x)).collect()).collect();
            IntMatrix::from_columns(r, &cols)
        })
        .collect())
}

fn backtrack(
    cands: &[Vec<(Vec<i64>, Vec<i128>)>],
    src: &[Vec<i128>],
    chosen: &mut Vec<usize>,
    first_only: bool,
    found: &mut Vec<Vec<usize>>,
) -> std::result::Result<(), Error> {
    let i = chosen.len();
    if i == cands.len() {
        found.push(chosen.clone());
        if found.len() > ISOMETRY_LIMIT {
            return Err(Error::TooManyIsometries { limit: ISOMETRY_LIMIT });
        }
        return Ok(());
    }
    for (k, (v, _)) in cands[i].iter().enumerate() {
        let ok = chosen.iter().enumerate().all(|(j, &cj)| {
            let gw = &cands[j][cj].1;
            let dot: i128 = v.iter().zip(gw).map(|(a, b)| *a as i128 * b).sum();
            dot == src[i][j]
        });
        if !ok {
            continue;
        }
        chosen.push(k);
        backtrack(cands, src, chosen, first_only, found)?;
        chosen.pop();
        if first_only && !found.is_empty() {
            return Ok(());
        }
    }
    Ok(())
}

/// HNF-canonical basis (as columns) of the column span of `m`.
pub fn canonical_columns(m: &IntMatrix) -> IntMatrix {
    let hnf = hermite_normal_form(&m.transpose());
    let rows: Vec<Vec<BigInt>> = (0..hnf.rank).map(|i| hnf.h.row(i)).collect();
    IntMatrix::from_columns(m.rows(), &rows)
}

/// Isometric embedding of `domain` into `ambient`; the columns of `matrix`
/// are the images of the domain basis in ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    domain: Lattice,
    ambient: Lattice,
    matrix: IntMatrix,
}

impl Embedding {
    pub fn new(domain: Lattice, ambient: Lattice, matrix: IntMatrix) -> Result<Self> {
        if matrix.rows() != ambient.rank() || matrix.cols() != domain.rank() {
            return Err(Error::DimensionMismatch("embedding matrix shape".into()));
        }
        let pulled = &(&matrix.transpose() * ambient.gram()) * &matrix;
        if &pulled != domain.gram() {
            return Err(Error::NotIsometric(format!("pulled back Gram {pulled} differs from {}", domain.gram())));
        }
        Ok(Embedding { domain, ambient, matrix })
    }

    /// Sublattice spanned by the given ambient vectors (which must be
    /// linearly independent and span a nondegenerate sublattice).
    pub fn from_vectors(ambient: &Lattice, vectors: &[Vec<BigInt>]) -> Result<Self> {
        let n = ambient.rank();
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("vector length differs from ambient rank".into()));
        }
        let matrix = IntMatrix::from_columns(n, vectors);
        if hermite_normal_form(&matrix.transpose()).rank != vectors.len() {
            return Err(Error::RankDeficient);
        }
        let gram = &(&matrix.transpose() * ambient.gram()) * &matrix;
        let domain = Lattice::new(gram)?;
        Ok(Embedding { domain, ambient: ambient.clone(), matrix })
    }

    pub fn domain(&self) -> &Lattice {
        &self.domain
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// Images of the domain basis vectors.
    pub fn image_vectors(&self) -> Vec<Vec<BigInt>> {
        (0..self.matrix.cols()).map(|j| self.matrix.col(j)).collect()
    }

    /// Embedding of `image^⊥`, with an HNF-canonical basis. The result is
    /// always primitive; it has rank 0 when the image has full rank.
    pub fn orthogonal_complement(&self) -> Embedding {
        let pairing = &self.matrix.transpose() * self.ambient.gram();
        let kernel = canonical_columns(&integer_kernel_saturated(&pairing));
        let gram = &(&kernel.transpose() * self.ambient.gram()) * &kernel;
        let domain = Lattice { gram, label: None, hyperbolic_planes: Vec::new() };
        Embedding { domain, ambient: self.ambient.clone(), matrix: kernel }
    }

    /// True iff `ambient / image` is torsion free.
    pub fn is_primitive(&self) -> bool {
        smith_normal_form(&self.matrix).invariant_factors().iter().all(One::is_one)
    }

    /// Embedding of the saturation of the image (HNF-canonical basis).
    pub fn primitive_hull(&self) -> Embedding {
        if self.matrix.cols() == 0 {
            return self.clone();
        }
        let hull = canonical_columns(&saturate_columns(&self.matrix));
        let gram = &(&hull.transpose() * self.ambient.gram()) * &hull;
        let domain = Lattice { gram, label: None, hyperbolic_planes: Vec::new() };
        Embedding { domain, ambient: self.ambient.clone(), matrix: hull }
    }

    /// Same image as `other` (as subgroups of the ambient lattice).
    pub fn same_image(&self, other: &Embedding) -> bool {
        self.matrix.rows() == other.matrix.rows() && canonical_columns(&self.matrix) == canonical_columns(&other.matrix)
    }

    /// Index of the image in its primitive hull.
    pub fn index_in_hull(&self) -> BigInt {
        smith_normal_form(&self.matrix).invariant_factors().iter().product()
    }
}

/// Standard lattices with frozen basis orderings.
///
/// * `U`: basis `e, f` with `e² = f² = 0`, `(e, f) = 1`.
/// * `E8`: simple roots `a0..a7` (positive definite Cartan matrix) of the
///   diagram `a0 - a1 - a2 - a3 - a4 - a5 - a6` with `a7` joined to `a4`.
/// * `E6`: the same shape `a0 - a1 - a2 - a3 - a4` with `a5` joined to `a2`;
///   it sits in `E8` as the roots `a2..a7`.
/// * `A2`: `[[2, -1], [-1, 2]]`.
/// * `D16plus`: HNF basis of `D16 + Z·(1/2, …, 1/2)` in halved coordinates.
/// * `<n>`: rank one with generator square `n` (even, nonzero).
/// * `K3`: `U ⊕ U ⊕ U ⊕ E8(-1) ⊕ E8(-1)` ordered `e1, f1, e2, f2, e3, f3`,
///   then the two `E8(-1)` blocks. The three planes are marked.
/// * `L2d(d)`: `U ⊕ U ⊕ <-2d> ⊕ E8(-1) ⊕ E8(-1)` ordered `e1, f1, e2, f2, l`,
///   then the `E8(-1)` blocks. The two planes are marked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StandardLattice {
    U,
    E8,
    E6,
    A2,
    D16Plus,
    Rank1(i64),
    K3,
    L2d(i64),
}

impl StandardLattice {
    pub fn lattice(&self) -> Result<Lattice> {
        Ok(match self {
            StandardLattice::U => Lattice::from_rows(&[vec![0, 1], vec![1, 0]])?.mark_hyperbolic_plane(0, 1)?.with_label("U"),
            StandardLattice::E8 => dynkin_gram(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)])?.with_label("E8"),
            StandardLattice::E6 => dynkin_gram(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5)])?.with_label("E6"),
            StandardLattice::A2 => dynkin_gram(2, &[(0, 1)])?.with_label("A2"),
            StandardLattice::D16Plus => d16_plus()?.with_label("D16plus"),
            StandardLattice::Rank1(n) => {
                if *n == 0 || n % 2 != 0 {
                    return Err(Error::BadParameter(format!("<{n}> must be even and nonzero")));
                }
                Lattice::from_rows(&[vec![*n]])?.with_label(format!("<{n}>"))
            }
            StandardLattice::K3 => {
                let u = StandardLattice::U.lattice()?;
                let e8m = StandardLattice::E8.lattice()?.twist(-1)?;
                u.repeat(3).direct_sum(&e8m.repeat(2)).with_label("K3")
            }
            StandardLattice::L2d(d) => {
                if *d < 1 {
                    return Err(Error::BadParameter(format!("L2d needs d >= 1, got {d}")));
                }
                let u = StandardLattice::U.lattice()?;
                let e8m = StandardLattice::E8.lattice()?.twist(-1)?;
                let l = StandardLattice::Rank1(-2 * d).lattice()?;
                u.repeat(2).direct_sum(&l).direct_sum(&e8m.repeat(2)).with_label(format!("L2d({d})"))
            }
        })
    }
}

fn dynkin_gram(n: usize, edges: &[(usize, usize)]) -> Result<Lattice> {
    let mut g = IntMatrix::diagonal(&vec![2; n]);
    for &(a, b) in edges {
        g[(a, b)] = BigInt::from(-1);
        g[(b, a)] = BigInt::from(-1);
    }
    Lattice::new(g)
}

fn d16_plus() -> Result<Lattice> {
    // Doubled coordinates: D16 roots e_i - e_{i+1}, e_15 + e_16 and the glue
    // vector (1/2, …, 1/2).
    let mut gens: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..15 {
        let mut v = vec![BigInt::zero(); 16];
        v[i] = BigInt::from(2);
        v[i + 1] = BigInt::from(-2);
        gens.push(v);
    }
    let mut v = vec![BigInt::zero(); 16];
    v[14] = BigInt::from(2);
    v[15] = BigInt::from(2);
    gens.push(v);
    gens.push(vec![BigInt::one(); 16]);
    let basis = crate::intlinalg::lattice_basis_rows(&gens, 16);
    let b = IntMatrix::from_columns(16, &basis);
    let gram4 = &b.transpose() * &b;
    let four = BigInt::from(4);
    let rows: Vec<Vec<BigInt>> = gram4.to_rows().into_iter().map(|r| r.into_iter().map(|x| x / &four).collect()).collect();
    Lattice::new(IntMatrix::try_from_rows(rows)?)
}

/// Parses a lattice expression: terms joined by `+` (or `⊕`), each an
/// optional multiplicity followed by a name with optional twist, e.g.
/// `2E8(-1)+2U+<-4>`, `K3`, `L2d(7)`, `A2(-1)`, `D16plus(-1)`.
pub fn standard_lattice(expr: &str) -> Result<Lattice> {
    let cleaned: String = expr.replace('−', "-").replace('⊕', "+").replace(['⟨'], "<").replace(['⟩'], ">");
    let cleaned: String = cleaned.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::UnknownName(expr.into()));
    }
    let terms = split_terms(&cleaned);
    let mut acc: Option<Lattice> = None;
    for term in &terms {
        let l = parse_term(term)?;
        acc = Some(match acc {
            None => l,
            Some(a) => a.direct_sum(&l),
        });
    }
    let mut l = acc.ok_or_else(|| Error::UnknownName(expr.into()))?;
    if terms.len() > 1 {
        l.label = Some(cleaned);
    }
    Ok(l)
}

// Splits on '+' outside parentheses / angle brackets.
fn split_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '<' => depth += 1,
            ')' | '>' => depth -= 1,
            _ => {}
        }
        if ch == '+' && depth == 0 && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_term(term: &str) -> Result<Lattice> {
    let unknown = || Error::UnknownName(term.to_string());
    let digits: String = term.chars().take_while(|c| c.is_ascii_digit()).collect();
    let (copies, rest) = if digits.is_empty() || term[digits.len()..].starts_with('>') {
        (1usize, term)
    } else {
        (digits.parse::<usize>().map_err(|_| unknown())?, &term[digits.len()..])
    };
    if copies == 0 {
        return Err(Error::BadParameter("multiplicity must be positive".into()));
    }
    let parse_int = |s: &str| s.parse::<i64>().map_err(|_| Error::BadParameter(format!("not an integer: {s}")));

    let (base, twist) = if let Some(inner) = rest.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
        (StandardLattice::Rank1(parse_int(inner)?), None)
    } else if let Some(inner) = rest.strip_prefix("L2d(").and_then(|r| r.strip_suffix(')')) {
        (StandardLattice::L2d(parse_int(inner)?), None)
    } else {
        let (name, tw) = match rest.find('(') {
            Some(p) => {
                let inner = rest[p + 1..].strip_suffix(')').ok_or_else(unknown)?;
                (&rest[..p], Some(parse_int(inner)?))
            }
            None => (rest, None),
        };
        let base = match name {
            "U" => StandardLattice::U,
            "E8" => StandardLattice::E8,
            "E6" => StandardLattice::E6,
            "A2" => StandardLattice::A2,
            "D16plus" | "D16+" => StandardLattice::D16Plus,
            "K3" => StandardLattice::K3,
            _ => return Err(unknown()),
        };
        (base, tw)
    };
    let mut l = base.lattice()?;
    if let Some(k) = twist {
        l = l.twist(k)?;
    }
    Ok(if copies == 1 { l } else { l.repeat(copies) })
}
