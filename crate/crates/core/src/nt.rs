//! The niltriangular algebra NT(d, F), its associated group under
//! `a·b = a + b + ab`, and its Lie ring under `a∗b = ab − ba`.
//!
//! Group elements are never stored as `1 + L`; an [`NtMat`] is both an algebra
//! element and a group element, and the caller picks the operation.

use std::fmt;

use rand::Rng;
use smallvec::SmallVec;
use thiserror::Error;

use crate::gf::{Fe, Field, GfError};
use crate::linalg::{Subspace, Vector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NtError {
    #[error("matrix size {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected d={expected}, found d={found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry outside the field")]
    FieldMismatch,
    #[error("position ({i},{j}) is not strictly below the diagonal of a {d}x{d} matrix")]
    IndexOutOfRange { i: usize, j: usize, d: usize },
    #[error("filtration index {k} out of range 1..={d}")]
    GammaOutOfRange { k: usize, d: usize },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Packed index of the strictly lower position `(i, j)`, 1-based, `i > j`.
#[inline]
pub fn pos_index(i: usize, j: usize) -> usize {
    (i - 1) * (i - 2) / 2 + (j - 1)
}

/// Inverse of [`pos_index`].
pub fn index_pos(mut idx: usize) -> (usize, usize) {
    let mut i = 2;
    while idx >= i - 1 {
        idx -= i - 1;
        i += 1;
    }
    (i, idx + 1)
}

/// A strictly lower-triangular `d × d` matrix, packed row-major over the
/// positions `(i, j)` with `i > j`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NtMat {
    d: usize,
    entries: SmallVec<[Fe; 28]>,
}

impl NtMat {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[Fe] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.entries[pos_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Fe) {
        self.entries[pos_index(i, j)] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    /// Nonzero entries as `(i, j, x)`, row-major.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, Fe)> + '_ {
        self.entries.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(idx, &x)| {
            let (i, j) = index_pos(idx);
            (i, j, x)
        })
    }

    /// The smallest `i − j` over nonzero entries, or `d` for the zero matrix.
    pub fn level(&self) -> usize {
        self.support().map(|(i, j, _)| i - j).min().unwrap_or(self.d)
    }
}

impl fmt::Debug for NtMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.support().map(|(i, j, x)| format!("{x}e{i}{j}")).collect();
        write!(f, "{}", terms.join("+"))
    }
}

/// A root element `x·e_{i,j}` with `i > j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootElem {
    pub i: usize,
    pub j: usize,
    pub x: Fe,
}

impl RootElem {
    pub fn new(i: usize, j: usize, x: Fe) -> RootElem {
        RootElem { i, j, x }
    }

    pub fn height(&self) -> usize {
        self.i - self.j
    }
}

/// NT(d, F): a matrix size and a field, the context for all matrix operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nt {
    d: usize,
    field: Field,
}

impl Nt {
    pub fn new(d: usize, field: Field) -> Result<Nt, NtError> {
        if d < 2 {
            return Err(NtError::DimensionTooSmall(d));
        }
        Ok(Nt { d, field })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Number of stored entries, `d(d−1)/2`.
    pub fn len(&self) -> usize {
        self.d * (self.d - 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension over the prime field.
    pub fn prime_dim(&self) -> usize {
        self.len() * self.field.k() as usize
    }

    /// Positions in canonical order: subdiagonal `1..d` ascending, then row ascending.
    pub fn canonical_positions(&self) -> Vec<(usize, usize)> {
        (1..self.d).flat_map(|h| (h + 1..=self.d).map(move |i| (i, i - h))).collect()
    }

    pub fn check(&self, m: &NtMat) -> Result<(), NtError> {
        if m.d != self.d {
            return Err(NtError::DimensionMismatch { expected: self.d, found: m.d });
        }
        if m.entries.iter().any(|&x| !self.field.contains(x)) {
            return Err(NtError::FieldMismatch);
        }
        Ok(())
    }

    fn check_pos(&self, i: usize, j: usize) -> Result<(), NtError> {
        if j >= 1 && i > j && i <= self.d {
            Ok(())
        } else {
            Err(NtError::IndexOutOfRange { i, j, d: self.d })
        }
    }

    pub fn zero(&self) -> NtMat {
        NtMat { d: self.d, entries: SmallVec::from_elem(Fe::ZERO, self.len()) }
    }

    pub fn from_entries(&self, entries: &[Fe]) -> Result<NtMat, NtError> {
        if entries.len() != self.len() {
            return Err(NtError::DimensionMismatch {
                expected: self.len(),
                found: entries.len(),
            });
        }
        let m = NtMat { d: self.d, entries: SmallVec::from_slice(entries) };
        self.check(&m)?;
        Ok(m)
    }

    /// Matrix with the given `(i, j, x)` entries; later entries overwrite earlier ones.
    pub fn from_terms(&self, terms: &[(usize, usize, Fe)]) -> Result<NtMat, NtError> {
        let mut m = self.zero();
        for &(i, j, x) in terms {
            self.check_pos(i, j)?;
            if !self.field.contains(x) {
                return Err(NtError::FieldMismatch);
            }
            m.set(i, j, x);
        }
        Ok(m)
    }

    pub fn root(&self, i: usize, j: usize, x: Fe) -> Result<RootElem, NtError> {
        self.check_pos(i, j)?;
        if !self.field.contains(x) {
            return Err(NtError::FieldMismatch);
        }
        Ok(RootElem { i, j, x })
    }

    pub fn mat_from_root(&self, r: &RootElem) -> Result<NtMat, NtError> {
        self.check_pos(r.i, r.j)?;
        Ok(self.unit(r.i, r.j, r.x))
    }

    /// `x·e_{i,j}`; positions are trusted.
    #[inline]
    pub(crate) fn unit(&self, i: usize, j: usize, x: Fe) -> NtMat {
        let mut m = self.zero();
        m.set(i, j, x);
        m
    }

    /// `x·e_{i,j}`, panicking on an invalid position. Convenience for tests and examples.
    pub fn e(&self, i: usize, j: usize, x: u32) -> NtMat {
        self.check_pos(i, j).expect("valid position");
        self.unit(i, j, self.field.elem(x).expect("valid element"))
    }

    fn same(&self, a: &NtMat, b: &NtMat) -> Result<(), NtError> {
        self.check(a)?;
        self.check(b)
    }

    // Unchecked kernels; the public wrappers validate shapes first.

    pub(crate) fn add_(&self, a: &NtMat, b: &NtMat) -> NtMat {
        let f = &self.field;
        NtMat {
            d: self.d,
            entries: a.entries.iter().zip(&b.entries).map(|(&x, &y)| f.add(x, y)).collect(),
        }
    }

    pub(crate) fn neg_(&self, a: &NtMat) -> NtMat {
        NtMat { d: self.d, entries: a.entries.iter().map(|&x| self.field.neg(x)).collect() }
    }

    pub(crate) fn sub_(&self, a: &NtMat, b: &NtMat) -> NtMat {
        self.add_(a, &self.neg_(b))
    }

    pub(crate) fn scale_(&self, c: Fe, a: &NtMat) -> NtMat {
        NtMat { d: self.d, entries: a.entries.iter().map(|&x| self.field.mul(c, x)).collect() }
    }

    pub(crate) fn mul_(&self, a: &NtMat, b: &NtMat) -> NtMat {
        let f = &self.field;
        let mut out = self.zero();
        for i in 3..=self.d {
            let row = pos_index(i, 1);
            for l in 1..i - 1 {
                let mut acc = Fe::ZERO;
                for j in l + 1..i {
                    let x = a.entries[row + j - 1];
                    if x.is_zero() {
                        continue;
                    }
                    let y = b.entries[pos_index(j, l)];
                    if !y.is_zero() {
                        acc = f.add(acc, f.mul(x, y));
                    }
                }
                out.entries[row + l - 1] = acc;
            }
        }
        out
    }

    pub(crate) fn gmul_(&self, a: &NtMat, b: &NtMat) -> NtMat {
        let ab = self.mul_(a, b);
        let s = self.add_(a, b);
        self.add_(&s, &ab)
    }

    pub(crate) fn ginv_(&self, a: &NtMat) -> NtMat {
        // (1+a)^{-1} − 1 = Σ_{n≥1} (−a)^n, finite since a^d = 0.
        let m = self.neg_(a);
        let mut term = m.clone();
        let mut acc = m.clone();
        for _ in 2..self.d {
            term = self.mul_(&term, &m);
            if term.is_zero() {
                break;
            }
            acc = self.add_(&acc, &term);
        }
        acc
    }

    pub(crate) fn gpow_(&self, a: &NtMat, n: u32) -> NtMat {
        (0..n).fold(self.zero(), |acc, _| self.gmul_(&acc, a))
    }

    pub(crate) fn comm_(&self, a: &NtMat, b: &NtMat) -> NtMat {
        let ai = self.ginv_(a);
        let bi = self.ginv_(b);
        self.gmul_(&self.gmul_(&ai, &bi), &self.gmul_(a, b))
    }

    pub(crate) fn bracket_(&self, a: &NtMat, b: &NtMat) -> NtMat {
        self.sub_(&self.mul_(a, b), &self.mul_(b, a))
    }

    /// `g⁻¹·x·g`.
    pub(crate) fn conj_(&self, x: &NtMat, g: &NtMat) -> NtMat {
        self.gmul_(&self.gmul_(&self.ginv_(g), x), g)
    }

    pub fn mat_add(&self, a: &NtMat, b: &NtMat) -> Result<NtMat, NtError> {
        self.same(a, b)?;
        Ok(self.add_(a, b))
    }

    pub fn mat_sub(&self, a: &NtMat, b: &NtMat) -> Result<NtMat, NtError> {
        self.same(a, b)?;
        Ok(self.sub_(a, b))
    }

    pub fn mat_neg(&self, a: &NtMat) -> Result<NtMat, NtError> {
        self.check(a)?;
        Ok(self.neg_(a))
    }

    pub fn mat_scale(&self, c: Fe, a: &NtMat) -> Result<NtMat, NtError> {
        self.check(a)?;
        if !self.field.contains(c) {
            return Err(NtError::FieldMismatch);
        }
        Ok(self.scale_(c, a))
    }

    /// Ordinary matrix product.
    pub fn ring_mul(&self, a: &NtMat, b: &NtMat) -> Result<NtMat, NtError> {
        self.same(a, b)?;
        Ok(self.mul_(a, b))
    }

    /// `a·b = a + b + ab`.
    pub fn group_mul(&self, a: &NtMat, b: &NtMat) -> Result<NtMat, NtError> {
        self.same(a, b)?;
        Ok(self.gmul_(a, b))
    }

    pub fn group_inv(&self, a: &NtMat) -> Result<NtMat, NtError> {
        self.check(a)?;
        Ok(self.ginv_(a))
    }

    /// `a·a·…·a` (`n` factors).
    pub fn group_pow(&self, a: &NtMat, n: u32) -> Result<NtMat, NtError> {
        self.check(a)?;
        Ok(self.gpow_(a, n))
    }

    /// Ordered `·`-product of a sequence.
    pub fn group_product<'a, I: IntoIterator<Item = &'a NtMat>>(&self, it: I) -> NtMat {
        it.into_iter().fold(self.zero(), |acc, m| self.gmul_(&acc, m))
    }

    /// Group commutator `a⁻¹·b⁻¹·a·b`.
    pub fn commutator(&self, a: &NtMat, b: &NtMat) -> Result<NtMat, NtError> {
        self.same(a, b)?;
        Ok(self.comm_(a, b))
    }

    /// Lie bracket `ab − ba`.
    pub fn bracket(&self, a: &NtMat, b: &NtMat) -> Result<NtMat, NtError> {
        self.same(a, b)?;
        Ok(self.bracket_(a, b))
    }

    /// `g⁻¹·x·g` under the group operation.
    pub fn conjugate(&self, x: &NtMat, g: &NtMat) -> Result<NtMat, NtError> {
        self.same(x, g)?;
        Ok(self.conj_(x, g))
    }

    /// Conjugate of `l` by a root element; always equals `l + l∗r`, because
    /// `e_{ij} L e_{ij} = L_{ji} e_{ij}` and `L_{ji}` lies above the diagonal.
    pub fn conj_by_root(&self, l: &NtMat, r: &RootElem) -> Result<NtMat, NtError> {
        self.check(l)?;
        let rm = self.mat_from_root(r)?;
        let c = self.conj_(l, &rm);
        debug_assert_eq!(c, self.add_(l, &self.bracket_(l, &rm)));
        Ok(c)
    }

    /// `{e_{i,j} : i − j ≥ k}` over F.
    pub fn gamma_basis(&self, k: usize) -> Result<Vec<RootElem>, NtError> {
        if !(1..=self.d).contains(&k) {
            return Err(NtError::GammaOutOfRange { k, d: self.d });
        }
        Ok(self
            .canonical_positions()
            .into_iter()
            .filter(|&(i, j)| i - j >= k)
            .map(|(i, j)| RootElem::new(i, j, Fe::ONE))
            .collect())
    }

    pub fn gamma_member(&self, a: &NtMat, k: usize) -> Result<bool, NtError> {
        self.check(a)?;
        if !(1..=self.d).contains(&k) {
            return Err(NtError::GammaOutOfRange { k, d: self.d });
        }
        Ok(a.support().all(|(i, j, _)| i - j >= k))
    }

    /// Γ_k as a prime-field subspace.
    pub fn gamma_subspace(&self, k: usize) -> Result<Subspace, NtError> {
        let roots = self.gamma_basis(k)?;
        let basis = self.field.prime_basis();
        Ok(self.span(roots.iter().flat_map(|r| basis.iter().map(move |&b| self.unit(r.i, r.j, b)))))
    }

    /// Factors `g` as an ordered `·`-product of root elements in canonical
    /// order (subdiagonal ascending, then row ascending), omitting zeros.
    ///
    /// Peeling a root off on the left never disturbs lower subdiagonals or the
    /// other positions of its own subdiagonal, so each coefficient can be read
    /// from the residual directly.
    pub fn root_factorize(&self, g: &NtMat) -> Result<Vec<RootElem>, NtError> {
        self.check(g)?;
        Ok(self.factorize_(g))
    }

    pub(crate) fn factorize_(&self, g: &NtMat) -> Vec<RootElem> {
        let f = &self.field;
        let mut h = g.clone();
        let mut out = Vec::new();
        for (i, j) in self.canonical_positions() {
            let x = h.get(i, j);
            if x.is_zero() {
                continue;
            }
            out.push(RootElem::new(i, j, x));
            // h ← (−x e_ij)·h = h − x e_ij − x e_ij h; e_ij h moves row j of h into row i.
            let nx = f.neg(x);
            let mut next = h.clone();
            next.set(i, j, f.add(h.get(i, j), nx));
            for l in 1..j {
                let y = h.get(j, l);
                if !y.is_zero() {
                    next.set(i, l, f.add(next.get(i, l), f.mul(nx, y)));
                }
            }
            h = next;
        }
        debug_assert!(h.is_zero());
        out
    }

    /// Ordered `·`-product of root elements.
    pub fn root_product(&self, roots: &[RootElem]) -> Result<NtMat, NtError> {
        let mut acc = self.zero();
        for r in roots {
            acc = self.gmul_(&acc, &self.mat_from_root(r)?);
        }
        Ok(acc)
    }

    /// Coordinates over the prime field: entry `(i,j)` contributes its `k` digits.
    pub fn to_vector(&self, m: &NtMat) -> Vector {
        let f = &self.field;
        let mut v = Vec::with_capacity(self.prime_dim());
        for &x in m.entries.iter() {
            v.extend(f.digits(x).into_iter().map(|c| c as u8));
        }
        v
    }

    pub fn from_vector(&self, v: &[u8]) -> NtMat {
        let k = self.field.k() as usize;
        debug_assert_eq!(v.len(), self.prime_dim());
        let entries = v
            .chunks(k)
            .map(|c| self.field.from_digits(&c.iter().map(|&x| x as u32).collect::<Vec<_>>()))
            .collect();
        NtMat { d: self.d, entries }
    }

    /// `b_t e_{i,j}` over all positions (packed order) and prime-basis elements;
    /// the `n`-th element is the `n`-th coordinate vector.
    pub fn prime_root_basis(&self) -> Vec<NtMat> {
        let basis = self.field.prime_basis();
        (0..self.len())
            .flat_map(|idx| {
                let (i, j) = index_pos(idx);
                basis.iter().map(move |&b| (i, j, b))
            })
            .map(|(i, j, b)| self.unit(i, j, b))
            .collect()
    }

    pub fn span<I: IntoIterator<Item = NtMat>>(&self, mats: I) -> Subspace {
        Subspace::span(self.field.p(), self.prime_dim(), mats.into_iter().map(|m| self.to_vector(&m)))
    }

    pub fn full_space(&self) -> Subspace {
        Subspace::full(self.field.p(), self.prime_dim())
    }

    pub fn basis_mats(&self, s: &Subspace) -> Vec<NtMat> {
        s.basis().iter().map(|v| self.from_vector(v)).collect()
    }

    /// Group order `q^{d(d−1)/2}`, saturating.
    pub fn order(&self) -> u128 {
        (self.field.q() as u128).saturating_pow(self.len() as u32)
    }

    /// The element whose entries are the base-`q` digits of `idx` (packed order).
    pub fn element(&self, mut idx: u64) -> NtMat {
        let q = self.field.q() as u64;
        let mut m = self.zero();
        for e in m.entries.iter_mut() {
            *e = Fe::from_raw((idx % q) as u32);
            idx /= q;
        }
        m
    }

    pub fn element_index(&self, m: &NtMat) -> u64 {
        let q = self.field.q() as u64;
        m.entries.iter().rev().fold(0, |acc, x| acc * q + x.index() as u64)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> NtMat {
        let q = self.field.q();
        let mut m = self.zero();
        for e in m.entries.iter_mut() {
            *e = Fe::from_raw(rng.gen_range(0..q));
        }
        m
    }

    /// Generators `b_t e_{i+1,i}` in order `i = 1..d−1`, then `t = 0..k`.
    pub fn generators(&self) -> Vec<NtMat> {
        let basis = self.field.prime_basis();
        (1..self.d).flat_map(|i| basis.iter().map(move |&b| (i, b))).map(|(i, b)| self.unit(i + 1, i, b)).collect()
    }
}
