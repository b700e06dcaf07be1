//! Partition ideals, centralizers, and the maximal abelian ideals of the Lie
//! ring NT*(d, F), together with exact checks for each of their properties.

use std::collections::BTreeSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf::Fe;
use crate::linalg::{combinations, kernel, Subspace, Vector};
use crate::nt::{Nt, NtError, NtMat};

/// Default bound on the number of cosets the maximality oracle will visit.
pub const DEFAULT_COSET_BOUND: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("position ({i},{j}) out of range for d={d}")]
    IndexOutOfRange { i: usize, j: usize, d: usize },
    #[error("classification needs d >= 5, got d={0}")]
    DimensionTooSmall(usize),
    #[error("family (8) occurs only in characteristic 2, field has characteristic {0}")]
    WrongCharacteristic(u32),
    #[error("subspace is not closed under the group operation")]
    NotASubgroup,
    #[error("subspace is not an abelian Lie ideal")]
    NotAbelianIdeal,
    #[error("subspace does not match the shape of tag {0}")]
    ShapeMismatch(IdealTag),
    #[error("coset space of size {size} exceeds the bound {bound}")]
    TooLarge { size: u128, bound: u64 },
    #[error(transparent)]
    Nt(#[from] NtError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IdealTag {
    /// `N_{i,j}`: rows `≥ i`, columns `≤ j`.
    Partition { i: usize, j: usize },
    /// `N_{m+1,m−1} + {x(e_{m,1} + c e_{d,m})}`.
    Mab2 { m: usize, c: Fe },
    /// `N_{i+2,i−1} + {x(e_{i,1} + c e_{d,i+1})} + {x(e_{i+1,1} + c e_{d,i})}`, characteristic 2.
    Mab3 { i: usize, c: Fe },
    Custom,
}

impl fmt::Display for IdealTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealTag::Partition { i, j } => write!(f, "partition({i},{j})"),
            IdealTag::Mab2 { m, c } => write!(f, "mab2({m},{c})"),
            IdealTag::Mab3 { i, c } => write!(f, "mab3({i},{c})"),
            IdealTag::Custom => write!(f, "custom"),
        }
    }
}

/// A prime-field subspace of NT(d, F) with a shape tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealDesc {
    nt: Nt,
    space: Subspace,
    tag: IdealTag,
}

impl IdealDesc {
    pub fn nt(&self) -> &Nt {
        &self.nt
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn tag(&self) -> &IdealTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> Vec<NtMat> {
        self.nt.basis_mats(&self.space)
    }

    pub fn contains(&self, m: &NtMat) -> bool {
        self.space.contains(&self.nt.to_vector(m))
    }

    /// Same subspace, regardless of tag.
    pub fn same_space(&self, other: &IdealDesc) -> bool {
        self.space == other.space
    }

    /// Untagged subspace spanned by `mats`.
    pub fn custom<I: IntoIterator<Item = NtMat>>(nt: &Nt, mats: I) -> Result<IdealDesc, IdealError> {
        let mats: Vec<NtMat> = mats.into_iter().collect();
        for m in &mats {
            nt.check(m)?;
        }
        Ok(IdealDesc { nt: nt.clone(), space: nt.span(mats), tag: IdealTag::Custom })
    }

    pub fn from_space(nt: &Nt, space: Subspace) -> IdealDesc {
        IdealDesc { nt: nt.clone(), space, tag: IdealTag::Custom }
    }

    /// Γ_k as an untagged descriptor.
    pub fn gamma(nt: &Nt, k: usize) -> Result<IdealDesc, IdealError> {
        Ok(IdealDesc::from_space(nt, nt.gamma_subspace(k)?))
    }

    /// Re-tags a descriptor after checking that the tag's shape spans the same subspace.
    pub fn with_tag(self, tag: IdealTag) -> Result<IdealDesc, IdealError> {
        let shaped = match &tag {
            IdealTag::Custom => return Ok(IdealDesc { tag, ..self }),
            IdealTag::Partition { i, j } => partition(&self.nt, *i, *j)?,
            IdealTag::Mab2 { m, c } => mab2(&self.nt, *m, *c)?,
            IdealTag::Mab3 { i, c } => mab3(&self.nt, *i, *c)?,
        };
        if shaped.space == self.space {
            Ok(shaped)
        } else {
            Err(IdealError::ShapeMismatch(tag))
        }
    }
}

/// `x e_{r,s}` for every `x` in the prime basis.
fn prime_line(nt: &Nt, i: usize, j: usize) -> Vec<NtMat> {
    nt.field().prime_basis().into_iter().map(|b| nt.unit(i, j, b)).collect()
}

fn partition_mats(nt: &Nt, i: usize, j: usize) -> Vec<NtMat> {
    let d = nt.d();
    let mut out = Vec::new();
    for r in i..=d {
        for s in 1..=j.min(r - 1) {
            out.extend(prime_line(nt, r, s));
        }
    }
    out
}

/// `N_{i,j}`: matrices supported in rows `≥ i` and columns `≤ j`. A two-sided
/// ideal for every `2 ≤ i ≤ d`, `1 ≤ j < d`; abelian when `i > j`.
pub fn partition(nt: &Nt, i: usize, j: usize) -> Result<IdealDesc, IdealError> {
    let d = nt.d();
    if !((2..=d).contains(&i) && (1..d).contains(&j)) {
        return Err(IdealError::IndexOutOfRange { i, j, d });
    }
    Ok(IdealDesc { nt: nt.clone(), space: nt.span(partition_mats(nt, i, j)), tag: IdealTag::Partition { i, j } })
}

/// Family (7) at position `m ∈ 2..=d−1` with parameter `c`.
pub fn mab2(nt: &Nt, m: usize, c: Fe) -> Result<IdealDesc, IdealError> {
    let d = nt.d();
    if !(2..d).contains(&m) {
        return Err(IdealError::IndexOutOfRange { i: m, j: 1, d });
    }
    nt.root(d, m, c)?;
    let f = nt.field();
    let mut mats = partition_mats(nt, m + 1, m - 1);
    for b in f.prime_basis() {
        let mut v = nt.unit(m, 1, b);
        v.set(d, m, f.mul(b, c));
        mats.push(v);
    }
    Ok(IdealDesc { nt: nt.clone(), space: nt.span(mats), tag: IdealTag::Mab2 { m, c } })
}

/// Family (8) at position `i ∈ 2..=d−2` with parameter `c`; characteristic 2 only.
///
/// The `e_{i+1,1}` and `e_{d,i}` parts enter through the single line
/// `x(e_{i+1,1} + c e_{d,i})`, which is what bracketing `x(e_{i,1} + c e_{d,i+1})`
/// with `e_{i+1,i}` produces. Independent lines `F e_{i+1,1}` and `F e_{d,i}`
/// would not commute with `e_{i,1}` and `e_{d,i+1}`.
pub fn mab3(nt: &Nt, i: usize, c: Fe) -> Result<IdealDesc, IdealError> {
    let d = nt.d();
    let f = nt.field();
    if f.characteristic() != 2 {
        return Err(IdealError::WrongCharacteristic(f.characteristic()));
    }
    if !(2..=d.saturating_sub(2)).contains(&i) {
        return Err(IdealError::IndexOutOfRange { i, j: 1, d });
    }
    nt.root(d, i + 1, c)?;
    let mut mats = partition_mats(nt, i + 2, i - 1);
    for b in f.prime_basis() {
        let bc = f.mul(b, c);
        let mut v = nt.unit(i, 1, b);
        v.set(d, i + 1, bc);
        mats.push(v);
        let mut w = nt.unit(i + 1, 1, b);
        w.set(d, i, bc);
        mats.push(w);
    }
    Ok(IdealDesc { nt: nt.clone(), space: nt.span(mats), tag: IdealTag::Mab3 { i, c } })
}

/// Every family-(8) descriptor (all positions and parameters).
pub fn mab_family8(nt: &Nt) -> Result<Vec<IdealDesc>, IdealError> {
    if nt.d() < 5 {
        return Err(IdealError::DimensionTooSmall(nt.d()));
    }
    let mut out = Vec::new();
    for i in 2..=nt.d() - 2 {
        for c in nt.field().elements() {
            out.push(mab3(nt, i, c)?);
        }
    }
    Ok(out)
}

/// `{M : M∗B = 0 for every basis element B of s}`. The same set centralizes
/// `s` in the ring, the group and the Lie ring.
pub fn centralizer(s: &IdealDesc) -> IdealDesc {
    let nt = &s.nt;
    let basis = s.basis();
    let roots = nt.prime_root_basis();
    let m = nt.prime_dim() * basis.len();
    let images: Vec<Vector> = roots
        .iter()
        .map(|e| basis.iter().flat_map(|b| nt.to_vector(&nt.bracket_(e, b))).collect())
        .collect();
    let p = nt.field().p();
    IdealDesc::from_space(nt, Subspace::span(p, nt.prime_dim(), kernel(p, &images, m)))
}

pub fn is_abelian(s: &IdealDesc) -> bool {
    let basis = s.basis();
    let nt = &s.nt;
    basis.iter().enumerate().all(|(a, x)| basis[a + 1..].iter().all(|y| nt.bracket_(x, y).is_zero()))
}

/// Closed under bracketing with every `b_t e_{i,j}`.
pub fn is_lie_ideal(s: &IdealDesc) -> bool {
    let nt = &s.nt;
    let roots = nt.prime_root_basis();
    s.basis()
        .iter()
        .all(|b| roots.iter().all(|r| s.space.contains(&nt.to_vector(&nt.bracket_(b, r)))))
}

/// Closed under `·`: `a·b = a + b + ab`, so for a subspace this is closure under the ring product.
pub fn is_group_closed(s: &IdealDesc) -> bool {
    let nt = &s.nt;
    let basis = s.basis();
    basis.iter().all(|a| basis.iter().all(|b| s.space.contains(&nt.to_vector(&nt.mul_(a, b)))))
}

/// A `·`-closed subspace that is stable under inverses and under conjugation by every root element.
pub fn is_normal_subgroup(s: &IdealDesc) -> Result<bool, IdealError> {
    if !is_group_closed(s) {
        return Err(IdealError::NotASubgroup);
    }
    let nt = &s.nt;
    let basis = s.basis();
    if !basis.iter().all(|a| s.contains(&nt.ginv_(a))) {
        return Ok(false);
    }
    // Conjugation by a fixed root is additive in L, so the basis suffices.
    let f = nt.field();
    for (i, j) in nt.canonical_positions() {
        for x in f.prime_basis() {
            let r = nt.root(i, j, x)?;
            for a in &basis {
                if !s.contains(&nt.conj_by_root(a, &r)?) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// For an abelian subspace: a Lie ideal exactly when it is a `·`-closed normal subgroup.
pub fn correspondence_check(s: &IdealDesc) -> bool {
    let group_side = is_normal_subgroup(s).unwrap_or(false);
    is_lie_ideal(s) == group_side
}

/// Smallest Lie ideal containing `space` and `extra`; `None` as soon as it stops being abelian.
fn abelian_ideal_closure(nt: &Nt, space: &Subspace, extra: &NtMat, roots: &[NtMat]) -> Option<Subspace> {
    let mut span = space.clone();
    let mut members = nt.basis_mats(space);
    let mut queue = vec![extra.clone()];
    while let Some(w) = queue.pop() {
        if !span.insert(nt.to_vector(&w)) {
            continue;
        }
        if members.iter().any(|m| !nt.bracket_(m, &w).is_zero()) {
            return None;
        }
        members.push(w.clone());
        for r in roots {
            let b = nt.bracket_(&w, r);
            if !span.contains(&nt.to_vector(&b)) {
                queue.push(b);
            }
        }
    }
    Some(span)
}

/// Projective representatives: coefficient tuples whose first nonzero entry is 1.
fn projective_combinations(p: u32, gens: &[Vector], n: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    for lead in 0..gens.len() {
        let mut base = gens[lead].clone();
        base.truncate(n);
        for tail in combinations(p, &gens[lead + 1..], n) {
            let v: Vector = base.iter().zip(&tail).map(|(&a, &b)| ((a as u32 + b as u32) % p) as u8).collect();
            out.push(v);
        }
    }
    out
}

/// Exhaustive maximality test for an abelian Lie ideal `s`.
///
/// Any abelian ideal strictly containing `s` lies in `C(s)` and contains some
/// `v ∈ C(s) \ s`, hence the ideal generated by `s` and `v`. So `s` is maximal
/// iff every such generated ideal is non-abelian. Scalar multiples of `v`
/// generate the same ideal, so only projective coset representatives are visited.
pub fn maximality_oracle(s: &IdealDesc, bound: u64) -> Result<bool, IdealError> {
    if !(is_abelian(s) && is_lie_ideal(s)) {
        return Err(IdealError::NotAbelianIdeal);
    }
    let nt = &s.nt;
    let c = centralizer(s);
    let comp = c.space.complement_basis(&s.space);
    let p = nt.field().p();
    let size = (p as u128).pow(comp.len() as u32);
    if size > bound as u128 {
        return Err(IdealError::TooLarge { size, bound });
    }
    let roots = nt.prime_root_basis();
    for v in projective_combinations(p, &comp, nt.prime_dim()) {
        if abelian_ideal_closure(nt, &s.space, &nt.from_vector(&v), &roots).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Group-side maximality by brute force over the elements of UT(d, F).
///
/// The centralizer is found by testing every group element against the
/// generators of `s`, and for each `v` in it but outside `s` the normal
/// subgroup generated by `s` and `v` is generated by `s` together with the
/// conjugation orbit of `v`; that group is abelian iff those generators
/// pairwise commute. Independent of the linear machinery used by
/// [`maximality_oracle`].
pub fn group_maximality_oracle(s: &IdealDesc, max_order: u64) -> Result<bool, IdealError> {
    let nt = &s.nt;
    let order = nt.order();
    if order > max_order as u128 {
        return Err(IdealError::TooLarge { size: order, bound: max_order });
    }
    let gens = s.basis();
    let commutes = |a: &NtMat, b: &NtMat| nt.gmul_(a, b) == nt.gmul_(b, a);
    if !gens.iter().all(|a| gens.iter().all(|b| commutes(a, b))) {
        return Err(IdealError::NotAbelianIdeal);
    }
    let conjugators: Vec<NtMat> = nt.generators();
    for idx in 0..order as u64 {
        let v = nt.element(idx);
        if s.contains(&v) || !gens.iter().all(|g| commutes(g, &v)) {
            continue;
        }
        let mut orbit: BTreeSet<NtMat> = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(w) = stack.pop() {
            if !orbit.insert(w.clone()) {
                continue;
            }
            for g in &conjugators {
                let c = nt.conj_(&w, g);
                if !orbit.contains(&c) {
                    stack.push(c);
                }
            }
        }
        let all: Vec<&NtMat> = gens.iter().chain(orbit.iter()).collect();
        let abelian = all.iter().enumerate().all(|(i, a)| all[i + 1..].iter().all(|b| commutes(a, b)));
        if abelian {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Maximal,
    NotMaximal,
    TooLarge,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Maximal => "maximal",
            Verdict::NotMaximal => "not-maximal",
            Verdict::TooLarge => "too-large",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MabEntry {
    pub ideal: IdealDesc,
    pub abelian: bool,
    pub lie_ideal: bool,
    pub verdict: Verdict,
}

fn classify_one(ideal: IdealDesc) -> MabEntry {
    let abelian = is_abelian(&ideal);
    let lie_ideal = is_lie_ideal(&ideal);
    let verdict = if abelian && lie_ideal {
        match maximality_oracle(&ideal, DEFAULT_COSET_BOUND) {
            Ok(true) => Verdict::Maximal,
            Ok(false) => Verdict::NotMaximal,
            Err(_) => Verdict::TooLarge,
        }
    } else {
        Verdict::NotMaximal
    };
    MabEntry { ideal, abelian, lie_ideal, verdict }
}

/// Families (6), (7) and, in characteristic 2, (8), each with its oracle verdict.
/// Non-maximal instances are kept and flagged.
pub fn mab_enumerate(nt: &Nt) -> Result<Vec<MabEntry>, IdealError> {
    let d = nt.d();
    if d < 5 {
        return Err(IdealError::DimensionTooSmall(d));
    }
    let mut out = Vec::new();
    for i in 1..d {
        out.push(classify_one(partition(nt, i + 1, i)?));
    }
    for m in 2..d {
        for c in nt.field().elements() {
            out.push(classify_one(mab2(nt, m, c)?));
        }
    }
    if nt.field().characteristic() == 2 {
        for ideal in mab_family8(nt)? {
            out.push(classify_one(ideal));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lemma1Violation {
    /// `αβ` has support outside `(d, 1)`.
    SquareOutsideCorner { alpha: NtMat, beta: NtMat },
    /// `αβγ` or `γαβ` is nonzero.
    SquareNotAnnihilating { alpha: NtMat, beta: NtMat, gamma: NtMat },
    /// `αγβ + βγα ≠ 0`.
    SymmetricTriple { alpha: NtMat, beta: NtMat, gamma: NtMat },
}

#[derive(Clone, Debug, Default)]
pub struct Lemma1Report {
    pub checks: usize,
    pub violations: Vec<Lemma1Violation>,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `H² ⊆ N_{d,1}`, that `H²` annihilates NT on both sides, and
/// `αγβ + βγα = 0`. All three are multilinear, so the check over basis pairs
/// and prime-basis roots is complete; `samples` extra random triples are
/// drawn from `seed` as a cross-check.
pub fn lemma1_suite(s: &IdealDesc, samples: usize, seed: u64) -> Lemma1Report {
    let nt = &s.nt;
    let d = nt.d();
    let basis = s.basis();
    let roots = nt.prime_root_basis();
    let mut report = Lemma1Report::default();
    let check = |a: &NtMat, b: &NtMat, gammas: &[NtMat], report: &mut Lemma1Report| {
        let ab = nt.mul_(a, b);
        report.checks += 1;
        if ab.support().any(|(i, j, _)| (i, j) != (d, 1)) {
            report.violations.push(Lemma1Violation::SquareOutsideCorner { alpha: a.clone(), beta: b.clone() });
        }
        for g in gammas {
            report.checks += 2;
            if !nt.mul_(&ab, g).is_zero() || !nt.mul_(g, &ab).is_zero() {
                report.violations.push(Lemma1Violation::SquareNotAnnihilating {
                    alpha: a.clone(),
                    beta: b.clone(),
                    gamma: g.clone(),
                });
            }
            let t = nt.add_(&nt.mul_(&nt.mul_(a, g), b), &nt.mul_(&nt.mul_(b, g), a));
            if !t.is_zero() {
                report.violations.push(Lemma1Violation::SymmetricTriple {
                    alpha: a.clone(),
                    beta: b.clone(),
                    gamma: g.clone(),
                });
            }
        }
    };
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            check(a, b, &roots, &mut report);
        }
    }
    if samples > 0 && !basis.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elems = |rng: &mut ChaCha8Rng| {
            let p = nt.field().p();
            let mut v = vec![0u8; nt.prime_dim()];
            for row in s.space.basis() {
                let c = rand::Rng::gen_range(rng, 0..p);
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = ((*x as u32 + c * y as u32) % p) as u8;
                }
            }
            nt.from_vector(&v)
        };
        for _ in 0..samples {
            let a = elems(&mut rng);
            let b = elems(&mut rng);
            let g = nt.random(&mut rng);
            check(&a, &b, std::slice::from_ref(&g), &mut report);
        }
    }
    report
}
