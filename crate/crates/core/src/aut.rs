//! Automorphism candidates of UT(d, F) given by the images of the generators
//! `b_t e_{i+1,i}`, the six constructible families, extension to arbitrary
//! group elements, and verification.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf::{AdditiveMap, Fe, GfError};
use crate::linalg::{kernel, Subspace, Vector};
use crate::nt::{pos_index, Nt, NtError, NtMat};

/// Largest group order for which [`Policy::Exhaustive`] is accepted; all
/// ordered pairs are visited, so the work is the square of this.
pub const EXHAUSTIVE_MAX_ORDER: u128 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error("this family needs d >= {need}, got d={d}")]
    DimensionTooSmall { need: usize, d: usize },
    #[error("automorphisms act on different groups")]
    DimensionMismatch,
    #[error("expected {expected} values, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("diagonal entry {0} is zero")]
    ZeroDiagonalEntry(usize),
    #[error("Frobenius exponent {j} out of range for degree {k}")]
    ExponentOutOfRange { j: u32, k: u32 },
    #[error("odd extremal automorphisms need odd characteristic")]
    EvenCharacteristic,
    #[error("even extremal automorphisms exist only over GF(2)")]
    NotGF2,
    #[error("central map is not additive or has the wrong shape")]
    NonAdditiveMap,
    #[error("malformed automorphism: {0}")]
    MalformedAutMap(String),
    #[error("exhaustive verification refused: group order {order} exceeds {max}")]
    ExhaustiveTooLarge { order: u128, max: u128 },
    #[error(transparent)]
    Nt(#[from] NtError),
    #[error(transparent)]
    Gf(#[from] GfError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Abelianization and defining relations only.
    Relations,
    /// Relations plus every ordered pair of group elements.
    Exhaustive,
    /// Relations plus `samples` seeded random pairs.
    Sampled { samples: usize, seed: u64 },
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Relations => f.write_str("relations"),
            Policy::Exhaustive => f.write_str("exhaustive"),
            Policy::Sampled { samples, seed } => write!(f, "sampled:{samples}:{seed}"),
        }
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Policy, String> {
        match s {
            "relations" => Ok(Policy::Relations),
            "exhaustive" => Ok(Policy::Exhaustive),
            _ => {
                let rest = s.strip_prefix("sampled:").ok_or_else(|| format!("unknown policy `{s}`"))?;
                let (n, seed) = rest.split_once(':').ok_or_else(|| format!("bad sampled policy `{s}`"))?;
                Ok(Policy::Sampled {
                    samples: n.parse().map_err(|_| format!("bad sample count `{n}`"))?,
                    seed: seed.parse().map_err(|_| format!("bad seed `{seed}`"))?,
                })
            }
        }
    }
}

/// Evidence that a candidate is not an automorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `apply(a·b) ≠ apply(a)·apply(b)`.
    Pair { a: NtMat, b: NtMat },
    /// `g ∉ Γ_2` but `apply(g) ∈ Γ_2`, so the map is not onto.
    Singular { g: NtMat },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Pair { a, b } => write!(f, "pair a={a:?} b={b:?}"),
            Witness::Singular { g } => write!(f, "singular g={g:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verified {
    Unchecked,
    Passed(Policy),
    /// The witness is absent when the state was read back from a file.
    Failed(Option<Witness>),
}

impl fmt::Display for Verified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verified::Unchecked => f.write_str("unchecked"),
            Verified::Passed(p) => write!(f, "passed:{p}"),
            Verified::Failed(_) => f.write_str("failed"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub policy: Policy,
    pub abelianization_rank: usize,
    pub relations_checked: usize,
    pub pairs_checked: usize,
    pub witness: Option<Witness>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// An endomorphism candidate of UT(d, F), stored as the images of
/// `b_t e_{i+1,i}` at index `(i−1)·k + t`.
#[derive(Clone)]
pub struct AutMap {
    nt: Nt,
    images: Vec<NtMat>,
    verified: Verified,
    table: OnceLock<Vec<NtMat>>,
}

impl fmt::Debug for AutMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AutMap")
            .field("d", &self.nt.d())
            .field("field", self.nt.field())
            .field("images", &self.images)
            .field("verified", &self.verified)
            .finish()
    }
}

/// Equal as maps: same group and same generator images.
impl PartialEq for AutMap {
    fn eq(&self, other: &AutMap) -> bool {
        self.nt == other.nt && self.images == other.images
    }
}

impl Eq for AutMap {}

/// `aut_eq`: the two candidates agree on every generator, hence everywhere.
pub fn aut_eq(a: &AutMap, b: &AutMap) -> bool {
    a == b
}

impl AutMap {
    /// Candidate from raw generator images, unverified.
    pub fn from_images(nt: &Nt, images: Vec<NtMat>) -> Result<AutMap, AutError> {
        let expected = (nt.d() - 1) * nt.field().k() as usize;
        if images.len() != expected {
            return Err(AutError::WrongLength { expected, found: images.len() });
        }
        for m in &images {
            nt.check(m)?;
        }
        Ok(AutMap::raw(nt, images))
    }

    fn raw(nt: &Nt, images: Vec<NtMat>) -> AutMap {
        AutMap { nt: nt.clone(), images, verified: Verified::Unchecked, table: OnceLock::new() }
    }

    /// Builds images generator by generator from `f(i, b)` for `b` in the prime basis.
    fn from_fn(nt: &Nt, mut f: impl FnMut(usize, Fe) -> NtMat) -> AutMap {
        let basis = nt.field().prime_basis();
        let images = (1..nt.d()).flat_map(|i| basis.iter().map(move |&b| (i, b))).map(|(i, b)| f(i, b)).collect();
        AutMap::raw(nt, images)
    }

    pub fn nt(&self) -> &Nt {
        &self.nt
    }

    pub fn images(&self) -> &[NtMat] {
        &self.images
    }

    /// Image of `b_t e_{i+1,i}`.
    pub fn image(&self, i: usize, t: usize) -> &NtMat {
        &self.images[(i - 1) * self.nt.field().k() as usize + t]
    }

    pub fn verified(&self) -> &Verified {
        &self.verified
    }

    pub fn set_verified(&mut self, v: Verified) {
        self.verified = v;
    }

    pub fn identity(nt: &Nt) -> AutMap {
        AutMap::from_fn(nt, |i, b| nt.unit(i + 1, i, b))
    }

    /// `g ↦ J (g⁻¹)ᵀ J`; sends `x e_{i+1,i}` to `−x e_{d−i+1,d−i}`.
    pub fn flip(nt: &Nt) -> AutMap {
        let d = nt.d();
        let f = nt.field();
        AutMap::from_fn(nt, |i, b| nt.unit(d - i + 1, d - i, f.neg(b)))
    }

    /// Conjugation by `diag(d_1, …, d_d)`: `x e_{i,j} ↦ d_i⁻¹ x d_j e_{i,j}`.
    pub fn diag(nt: &Nt, entries: &[Fe]) -> Result<AutMap, AutError> {
        let f = nt.field();
        if entries.len() != nt.d() {
            return Err(AutError::WrongLength { expected: nt.d(), found: entries.len() });
        }
        let mut inv = Vec::with_capacity(entries.len());
        for (n, &x) in entries.iter().enumerate() {
            if !f.contains(x) {
                return Err(GfError::ElementOutOfRange(x.index(), f.q()).into());
            }
            inv.push(f.inv(x).map_err(|_| AutError::ZeroDiagonalEntry(n + 1))?);
        }
        Ok(AutMap::from_fn(nt, |i, b| nt.unit(i + 1, i, f.mul(f.mul(inv[i], b), entries[i - 1]))))
    }

    /// Entrywise `x ↦ x^{p^j}`.
    pub fn field(nt: &Nt, j: u32) -> Result<AutMap, AutError> {
        let f = nt.field();
        if j >= f.k() {
            return Err(AutError::ExponentOutOfRange { j, k: f.k() });
        }
        Ok(AutMap::from_fn(nt, |i, b| nt.unit(i + 1, i, f.frob(b, j))))
    }

    /// `x ↦ g⁻¹·x·g`.
    pub fn inner(nt: &Nt, g: &NtMat) -> Result<AutMap, AutError> {
        nt.check(g)?;
        Ok(AutMap::from_fn(nt, |i, b| nt.conj_(&nt.unit(i + 1, i, b), g)))
    }

    /// `x e_{i+1,i} ↦ x e_{i+1,i} + Λ_i(x) e_{d,1}`.
    pub fn central(nt: &Nt, lambda: &[AdditiveMap]) -> Result<AutMap, AutError> {
        let d = nt.d();
        let f = nt.field();
        if d < 3 {
            return Err(AutError::DimensionTooSmall { need: 3, d });
        }
        if lambda.len() != d - 1 {
            return Err(AutError::WrongLength { expected: d - 1, found: lambda.len() });
        }
        let well_formed =
            |l: &AdditiveMap| l.basis_images.len() == f.k() as usize && l.basis_images.iter().all(|&x| f.contains(x));
        if !lambda.iter().all(well_formed) {
            return Err(AutError::NonAdditiveMap);
        }
        Ok(AutMap::from_fn(nt, |i, b| {
            let mut m = nt.unit(i + 1, i, b);
            m.set(d, 1, lambda[i - 1].apply(f, b));
            m
        }))
    }

    /// Extremal automorphism in odd characteristic:
    /// `x e_{2,1} ↦ x e_{2,1} + a_1 x e_{d,2} + (a_1/2) x² e_{d,1}` and
    /// `x e_{d,d−1} ↦ x e_{d,d−1} + a_2 x e_{d−1,1} + (a_2/2) x² e_{d,1}`.
    pub fn extremal_odd(nt: &Nt, a1: Fe, a2: Fe) -> Result<AutMap, AutError> {
        let d = nt.d();
        let f = nt.field();
        if f.characteristic() == 2 {
            return Err(AutError::EvenCharacteristic);
        }
        if d < 5 {
            return Err(AutError::DimensionTooSmall { need: 5, d });
        }
        f.checked(a1, a2)?;
        let half = f.inv(f.from_int(2))?;
        let lam = |a: Fe, x: Fe| f.mul(f.mul(a, half), f.mul(x, x));
        Ok(AutMap::from_fn(nt, |i, b| {
            let mut m = nt.unit(i + 1, i, b);
            if i == 1 {
                m.set(d, 2, f.mul(a1, b));
                m.set(d, 1, lam(a1, b));
            } else if i == d - 1 {
                m.set(d - 1, 1, f.mul(a2, b));
                m.set(d, 1, lam(a2, b));
            }
            m
        }))
    }

    /// Extremal automorphism over GF(2): the composite of
    /// `e_{2,1} ↦ e_{2,1} + a_1 e_{d,3}` followed by
    /// `e_{d,d−1} ↦ e_{d,d−1} + a_2 e_{d−2,1}`, the second being the flip
    /// conjugate of the first, each fixing the other generators. For `d ≥ 6`
    /// this is the single assignment of both images; for `d = 5` the two
    /// factors do not commute and the assignment is not a homomorphism, so
    /// the composite is used throughout.
    pub fn extremal_even(nt: &Nt, a1: Fe, a2: Fe) -> Result<AutMap, AutError> {
        if nt.field().q() != 2 {
            return Err(AutError::NotGF2);
        }
        let first = AutMap::extremal_even_shape(nt, a1, Fe::ZERO)?;
        let second = AutMap::extremal_even_shape(nt, Fe::ZERO, a2)?;
        first.compose(&second)
    }

    /// The even extremal generator assignment `x e_{2,1} ↦ x e_{2,1} + a_1 x e_{d,3}`,
    /// `x e_{d,d−1} ↦ x e_{d,d−1} + a_2 x e_{d−2,1}` over any field, without
    /// checking that it is an automorphism. Over GF(2) it is one; over larger
    /// fields it fails verification.
    pub fn extremal_even_shape(nt: &Nt, a1: Fe, a2: Fe) -> Result<AutMap, AutError> {
        let d = nt.d();
        let f = nt.field();
        if d < 5 {
            return Err(AutError::DimensionTooSmall { need: 5, d });
        }
        f.checked(a1, a2)?;
        Ok(AutMap::from_fn(nt, |i, b| {
            let mut m = nt.unit(i + 1, i, b);
            if i == 1 {
                m.set(d, 3, f.mul(a1, b));
            } else if i == d - 1 {
                m.set(d - 2, 1, f.mul(a2, b));
            }
            m
        }))
    }

    /// Table of derived root images, `x e_{i,j}` at `pos_index(i,j)·q + x`.
    fn table(&self) -> &[NtMat] {
        self.table.get_or_init(|| {
            let nt = &self.nt;
            let f = nt.field();
            let q = f.q() as usize;
            let k = f.k() as usize;
            let mut table = vec![nt.zero(); nt.len() * q];
            for (i, j) in nt.canonical_positions() {
                let base = pos_index(i, j) * q;
                for x in f.elements() {
                    table[base + x.index() as usize] = if i == j + 1 {
                        let gens = &self.images[(j - 1) * k..j * k];
                        f.digits(x).iter().zip(gens).fold(nt.zero(), |acc, (&c, g)| nt.gmul_(&acc, &nt.gpow_(g, c)))
                    } else {
                        let upper = &table[pos_index(i, j + 1) * q + x.index() as usize];
                        let simple = &table[pos_index(j + 1, j) * q + 1];
                        nt.comm_(upper, simple)
                    };
                }
            }
            table
        })
    }

    fn root_image(&self, i: usize, j: usize, x: Fe) -> &NtMat {
        &self.table()[pos_index(i, j) * self.nt.field().q() as usize + x.index() as usize]
    }

    /// Image of the root element `x e_{i,j}` derived from the generator images.
    pub fn derived_root_image(&self, i: usize, j: usize, x: Fe) -> Result<NtMat, AutError> {
        self.nt.root(i, j, x)?;
        Ok(self.root_image(i, j, x).clone())
    }

    pub(crate) fn apply_(&self, g: &NtMat) -> NtMat {
        let nt = &self.nt;
        nt.factorize_(g).iter().fold(nt.zero(), |acc, r| nt.gmul_(&acc, self.root_image(r.i, r.j, r.x)))
    }

    /// Extension to all of UT(d, F) along the canonical root factorization.
    pub fn apply(&self, g: &NtMat) -> Result<NtMat, AutError> {
        self.nt.check(g)?;
        Ok(self.apply_(g))
    }

    /// `self` first, then `other`.
    pub fn compose(&self, other: &AutMap) -> Result<AutMap, AutError> {
        if self.nt != other.nt {
            return Err(AutError::DimensionMismatch);
        }
        Ok(AutMap::raw(&self.nt, self.images.iter().map(|m| other.apply_(m)).collect()))
    }

    /// Rows: generators `b_t e_{i+1,i}`; columns: first-subdiagonal digits of the image.
    pub fn abelianization(&self) -> Vec<Vector> {
        let nt = &self.nt;
        let f = nt.field();
        self.images
            .iter()
            .map(|m| (1..nt.d()).flat_map(|r| f.digits(m.get(r + 1, r))).map(|c| c as u8).collect())
            .collect()
    }

    /// Whether each generator image differs from the generator by an element of Γ_k.
    pub fn is_identity_mod_gamma(&self, k: usize) -> bool {
        let basis = self.nt.field().prime_basis();
        let kk = basis.len();
        self.images.iter().enumerate().all(|(n, m)| {
            let i = n / kk + 1;
            let diff = self.nt.sub_(m, &self.nt.unit(i + 1, i, basis[n % kk]));
            let ok = diff.support().all(|(r, c, _)| r - c >= k);
            ok
        })
    }

    /// For each `i`, the `j ∈ {i, d−i}` with `apply(N_{i+1,i}) = N_{j+1,j}`, if any.
    pub fn partition_images(&self) -> Vec<Option<usize>> {
        let nt = &self.nt;
        let d = nt.d();
        let basis = nt.field().prime_basis();
        (1..d)
            .map(|i| {
                let source: Vec<NtMat> =
                    (i + 1..=d).flat_map(|r| (1..=i).map(move |c| (r, c))).flat_map(|(r, c)| basis.iter().map(move |&b| nt.unit(r, c, b))).collect();
                let images: Vec<NtMat> = source.iter().map(|m| self.apply_(m)).collect();
                let span = nt.span(images.iter().cloned());
                [i, d - i].into_iter().find(|&j| {
                    let inside = images.iter().all(|m| m.support().all(|(r, c, _)| r > j && c <= j));
                    inside && span.dim() == source.len()
                })
            })
            .collect()
    }

    fn hom_fails(&self, a: &NtMat, b: &NtMat) -> bool {
        let nt = &self.nt;
        self.apply_(&nt.gmul_(a, b)) != nt.gmul_(&self.apply_(a), &self.apply_(b))
    }

    /// A pair on which the map is not multiplicative, given that the
    /// relation `[u, v]` fails: `[u,v]` is built from these five products.
    fn witness_for_commutator(&self, u: &NtMat, v: &NtMat) -> Option<Witness> {
        let nt = &self.nt;
        let ui = nt.ginv_(u);
        let vi = nt.ginv_(v);
        let a1 = nt.gmul_(&ui, &vi);
        let a2 = nt.gmul_(&a1, u);
        [(u.clone(), ui.clone()), (v.clone(), vi.clone()), (ui, vi), (a1, u.clone()), (a2, v.clone())]
            .into_iter()
            .find(|(a, b)| self.hom_fails(a, b))
            .map(|(a, b)| Witness::Pair { a, b })
    }

    fn check_abelianization(&self) -> (usize, Option<Witness>) {
        let nt = &self.nt;
        let p = nt.field().p();
        let rows = self.abelianization();
        let n = rows.len();
        let ker = kernel(p, &rows, n);
        let rank = n - ker.len();
        let witness = ker.first().map(|c| {
            // Coordinates of a generator combination, placed on the first subdiagonal.
            let mut v = vec![0u8; nt.prime_dim()];
            let k = nt.field().k() as usize;
            for (n, &x) in c.iter().enumerate() {
                let i = n / k + 1;
                v[pos_index(i + 1, i) * k + n % k] = x;
            }
            Witness::Singular { g: nt.from_vector(&v) }
        });
        (rank, witness)
    }

    /// Additivity of each root image and the commutator relations between
    /// root images, with one coefficient over all of F and the other over
    /// the prime basis.
    fn check_relations(&self) -> (usize, Option<Witness>) {
        let nt = &self.nt;
        let f = nt.field();
        let basis = f.prime_basis();
        let positions = nt.canonical_positions();
        let mut checked = 0;
        for &(i, j) in &positions {
            for x in f.elements() {
                for &y in &basis {
                    checked += 1;
                    let lhs = nt.gmul_(self.root_image(i, j, x), self.root_image(i, j, y));
                    if lhs != *self.root_image(i, j, f.add(x, y)) {
                        return (checked, Some(Witness::Pair { a: nt.unit(i, j, x), b: nt.unit(i, j, y) }));
                    }
                }
            }
        }
        for &(i, j) in &positions {
            for &(r, s) in &positions {
                for x in f.elements().filter(|x| !x.is_zero()) {
                    for &y in &basis {
                        checked += 1;
                        let u = nt.unit(i, j, x);
                        let v = nt.unit(r, s, y);
                        let expected = nt.bracket_(&u, &v);
                        let want = match expected.support().next() {
                            Some((a, b, z)) => self.root_image(a, b, z).clone(),
                            None => nt.zero(),
                        };
                        if nt.comm_(self.root_image(i, j, x), self.root_image(r, s, y)) != want {
                            let w = self.witness_for_commutator(&u, &v);
                            debug_assert!(w.is_some());
                            return (checked, w);
                        }
                    }
                }
            }
        }
        (checked, None)
    }

    fn check_pairs(&self, policy: Policy) -> Result<(usize, Option<Witness>), AutError> {
        let nt = &self.nt;
        match policy {
            Policy::Relations => Ok((0, None)),
            Policy::Exhaustive => {
                let order = nt.order();
                if order > EXHAUSTIVE_MAX_ORDER {
                    return Err(AutError::ExhaustiveTooLarge { order, max: EXHAUSTIVE_MAX_ORDER });
                }
                let elems: Vec<NtMat> = (0..order as u64).map(|n| nt.element(n)).collect();
                let imgs: Vec<NtMat> = elems.iter().map(|g| self.apply_(g)).collect();
                let mut count = 0;
                for (a, fa) in elems.iter().zip(&imgs) {
                    for (b, fb) in elems.iter().zip(&imgs) {
                        count += 1;
                        let ab = nt.element_index(&nt.gmul_(a, b)) as usize;
                        if imgs[ab] != nt.gmul_(fa, fb) {
                            return Ok((count, Some(Witness::Pair { a: a.clone(), b: b.clone() })));
                        }
                    }
                }
                Ok((count, None))
            }
            Policy::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for n in 0..samples {
                    let a = nt.random(&mut rng);
                    let b = nt.random(&mut rng);
                    if self.hom_fails(&a, &b) {
                        return Ok((n + 1, Some(Witness::Pair { a, b })));
                    }
                }
                Ok((samples, None))
            }
        }
    }

    /// Runs the checks of `policy` without touching the stored state.
    pub fn check(&self, policy: Policy) -> Result<VerifyReport, AutError> {
        let mut report = VerifyReport {
            policy,
            abelianization_rank: 0,
            relations_checked: 0,
            pairs_checked: 0,
            witness: None,
        };
        let (rank, w) = self.check_abelianization();
        report.abelianization_rank = rank;
        if w.is_some() {
            report.witness = w;
            return Ok(report);
        }
        let (n, w) = self.check_relations();
        report.relations_checked = n;
        if w.is_some() {
            report.witness = w;
            return Ok(report);
        }
        let (n, w) = self.check_pairs(policy)?;
        report.pairs_checked = n;
        report.witness = w;
        Ok(report)
    }

    /// Like [`AutMap::check`], recording the outcome in the verified state.
    pub fn verify(&mut self, policy: Policy) -> Result<VerifyReport, AutError> {
        let report = self.check(policy)?;
        self.verified = match &report.witness {
            None => Verified::Passed(policy),
            Some(w) => Verified::Failed(Some(w.clone())),
        };
        Ok(report)
    }
}

/// Which extremal family, if any, exists over the field of `nt` (for `d ≥ 5`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremalKind {
    Odd,
    Even,
    None,
}

pub fn extremal_kind(nt: &Nt) -> ExtremalKind {
    let f = nt.field();
    if nt.d() < 5 {
        ExtremalKind::None
    } else if f.characteristic() != 2 {
        ExtremalKind::Odd
    } else if f.q() == 2 {
        ExtremalKind::Even
    } else {
        ExtremalKind::None
    }
}

/// The extremal automorphism with parameters `(a1, a2)` for the field of `nt`.
pub fn extremal(nt: &Nt, a1: Fe, a2: Fe) -> Result<AutMap, AutError> {
    match extremal_kind(nt) {
        ExtremalKind::Odd => AutMap::extremal_odd(nt, a1, a2),
        ExtremalKind::Even => AutMap::extremal_even(nt, a1, a2),
        ExtremalKind::None if nt.d() < 5 => Err(AutError::DimensionTooSmall { need: 5, d: nt.d() }),
        ExtremalKind::None => Err(AutError::NotGF2),
    }
}

/// The subspace `apply(φ, S)` for a subspace `S` on which `·` is `+`.
pub fn image_of_abelian_subspace(phi: &AutMap, s: &Subspace) -> Subspace {
    let nt = phi.nt();
    nt.span(nt.basis_mats(s).iter().map(|m| phi.apply_(m)))
}
