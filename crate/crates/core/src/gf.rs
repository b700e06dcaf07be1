//! Finite fields GF(p^k) with elements encoded as integers `0..q`.
//!
//! An element's base-`p` digits are the coefficients of its polynomial
//! representative, constant term least significant. Arithmetic is done once
//! by schoolbook multiplication and reduction when the field is built, and
//! cached in `q × q` tables afterwards.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 4;
/// Largest supported field order (elements are stored in a byte).
pub const MAX_ORDER: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("extension degree {0} out of range 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("field order {0} exceeds {MAX_ORDER}")]
    OrderTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("element index {0} out of range for a field of order {1}")]
    ElementOutOfRange(u32, u32),
    #[error("frobenius exponent {0} out of range for degree {1}")]
    ExponentOutOfRange(u32, u32),
    #[error("polynomial {0:?} is not a monic irreducible modulus of degree {1}")]
    BadModulus(Vec<u32>, u32),
}

/// A field element, identified by its canonical index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(u8);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub(crate) fn from_raw(i: u32) -> Fe {
        debug_assert!(i < MAX_ORDER);
        Fe(i as u8)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct FieldData {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus `c0..ck`, empty for prime fields.
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// A finite field GF(p^k). Cheap to clone; all clones share one set of tables.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.k)
    }
}

impl fmt::Display for Field {
    /// The textual field header, `p=<p> k=<k>` followed by `poly=<c0,..,ck>` when `k > 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} k={}", self.0.p, self.0.k)?;
        if self.0.k > 1 {
            let poly: Vec<String> = self.0.modulus.iter().map(u32::to_string).collect();
            write!(f, " poly={}", poly.join(","))?;
        }
        Ok(())
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomials over Z_p, coefficient vectors with constant term first.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        let shift = top - dm;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - c * mi % p) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut acc = 1u32;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn digits(mut idx: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let c = idx % p;
            idx /= p;
            c
        })
        .collect()
}

/// Irreducibility by trial division against every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() as u32 - 1;
    for dd in 1..=deg / 2 {
        for low in 0..p.pow(dd) {
            let mut div = digits(low, p, dd);
            div.push(1);
            if poly_rem(m, &div, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically least monic irreducible of degree `k`, comparing the
/// coefficient vectors from the leading term down (i.e. by integer encoding).
fn least_irreducible(p: u32, k: u32) -> Vec<u32> {
    for low in 0..p.pow(k) {
        let mut m = digits(low, p, k);
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    /// `GF(p^k)` with the least monic irreducible modulus of degree `k`.
    pub fn new(p: u32, k: u32) -> Result<Field, GfError> {
        Self::check_params(p, k)?;
        let modulus = if k == 1 { Vec::new() } else { least_irreducible(p, k) };
        Ok(Self::build(p, k, modulus))
    }

    /// Prime field `Z_p`.
    pub fn prime(p: u32) -> Result<Field, GfError> {
        Self::new(p, 1)
    }

    /// `GF(p^k)` with a caller-supplied monic modulus `c0..ck`.
    pub fn with_modulus(p: u32, k: u32, modulus: &[u32]) -> Result<Field, GfError> {
        Self::check_params(p, k)?;
        if k == 1 {
            // A linear modulus defines the prime field itself.
            if !(modulus.is_empty() || (modulus.len() == 2 && modulus[1] == 1 && modulus[0] < p)) {
                return Err(GfError::BadModulus(modulus.to_vec(), k));
            }
            return Ok(Self::build(p, 1, Vec::new()));
        }
        let ok = modulus.len() == k as usize + 1
            && modulus[k as usize] == 1
            && modulus.iter().all(|&c| c < p)
            && is_irreducible(modulus, p);
        if !ok {
            return Err(GfError::BadModulus(modulus.to_vec(), k));
        }
        Ok(Self::build(p, k, modulus.to_vec()))
    }

    fn check_params(p: u32, k: u32) -> Result<(), GfError> {
        if !is_prime(p) {
            return Err(GfError::NonPrime(p));
        }
        if !(1..=MAX_DEGREE).contains(&k) {
            return Err(GfError::DegreeOutOfRange(k));
        }
        let q = (p as u64).pow(k);
        if q > MAX_ORDER as u64 {
            return Err(GfError::OrderTooLarge(q));
        }
        Ok(())
    }

    fn build(p: u32, k: u32, modulus: Vec<u32>) -> Field {
        let q = p.pow(k);
        let qs = q as usize;
        let encode = |c: &[u32]| c.iter().rev().fold(0u32, |acc, &x| acc * p + x);
        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        for a in 0..q {
            let da = digits(a, p, k);
            for b in 0..q {
                let db = digits(b, p, k);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = encode(&s) as u8;
                let mut prod = vec![0u32; 2 * k as usize - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut r = if k == 1 { prod } else { poly_rem(&prod, &modulus, p) };
                r.resize(k as usize, 0);
                mul[(a * q + b) as usize] = encode(&r) as u8;
            }
        }
        let mut neg = vec![0u8; qs];
        let mut inv = vec![0u8; qs];
        for a in 0..q {
            for b in 0..q {
                if add[(a * q + b) as usize] == 0 {
                    neg[a as usize] = b as u8;
                }
                if mul[(a * q + b) as usize] == 1 {
                    inv[a as usize] = b as u8;
                }
            }
        }
        Field(Arc::new(FieldData { p, k, q, modulus, add, mul, neg, inv }))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.0.k
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    /// The monic modulus `c0..ck`; empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn elem(&self, idx: u32) -> Result<Fe, GfError> {
        if idx < self.0.q {
            Ok(Fe(idx as u8))
        } else {
            Err(GfError::ElementOutOfRange(idx, self.0.q))
        }
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.index() < self.0.q
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.0.q).map(Fe::from_raw)
    }

    /// The prime-field basis `1, t, .., t^(k-1)`; element `t^i` has index `p^i`.
    pub fn prime_basis(&self) -> Vec<Fe> {
        (0..self.0.k).map(|i| Fe::from_raw(self.0.p.pow(i))).collect()
    }

    /// Coordinates of `a` over the prime basis.
    pub fn digits(&self, a: Fe) -> Vec<u32> {
        digits(a.index(), self.0.p, self.0.k)
    }

    pub fn from_digits(&self, c: &[u32]) -> Fe {
        debug_assert_eq!(c.len(), self.0.k as usize);
        let p = self.0.p;
        Fe::from_raw(c.iter().rev().fold(0u32, |acc, &x| acc * p + x % p))
    }

    /// The prime-field integer `n mod p` as a field element.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe::from_raw(n.rem_euclid(self.0.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.0.add[a.0 as usize * self.0.q as usize + b.0 as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.0.mul[a.0 as usize * self.0.q as usize + b.0 as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.is_zero() {
            Err(GfError::DivisionByZero)
        } else {
            Ok(Fe(self.0.inv[a.0 as usize]))
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut acc = Fe::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Scalar multiple by an integer, `n·a`.
    pub fn scale(&self, a: Fe, n: u32) -> Fe {
        (0..n % self.0.p).fold(Fe::ZERO, |acc, _| self.add(acc, a))
    }

    /// `a^(p^j)`.
    pub fn frobenius(&self, a: Fe, j: u32) -> Result<Fe, GfError> {
        if j >= self.0.k {
            return Err(GfError::ExponentOutOfRange(j, self.0.k));
        }
        Ok(self.frob(a, j))
    }

    #[inline]
    pub(crate) fn frob(&self, a: Fe, j: u32) -> Fe {
        (0..j).fold(a, |x, _| self.pow(x, self.0.p as u64))
    }

    /// All field automorphisms, as Frobenius powers `j = 0..k`.
    pub fn automorphisms(&self) -> Vec<FieldAut> {
        (0..self.0.k).map(|j| FieldAut { field: self.clone(), j }).collect()
    }

    /// Checked binary operation on elements that may come from another field.
    pub fn checked(&self, a: Fe, b: Fe) -> Result<(Fe, Fe), GfError> {
        if self.contains(a) && self.contains(b) {
            Ok((a, b))
        } else {
            Err(GfError::FieldMismatch)
        }
    }
}

/// The automorphism `x ↦ x^(p^j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldAut {
    field: Field,
    j: u32,
}

impl FieldAut {
    pub fn exponent(&self) -> u32 {
        self.j
    }

    pub fn apply(&self, a: Fe) -> Fe {
        self.field.frob(a, self.j)
    }

    /// Value table over all elements.
    pub fn table(&self) -> Vec<Fe> {
        self.field.elements().map(|a| self.apply(a)).collect()
    }

    pub fn compose(&self, other: &FieldAut) -> FieldAut {
        FieldAut { field: self.field.clone(), j: (self.j + other.j) % self.field.k() }
    }
}

/// A map `F → F` that is additive, stored by its values on the prime basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdditiveMap {
    pub basis_images: Vec<Fe>,
}

impl AdditiveMap {
    pub fn zero(field: &Field) -> AdditiveMap {
        AdditiveMap { basis_images: vec![Fe::ZERO; field.k() as usize] }
    }

    pub fn identity(field: &Field) -> AdditiveMap {
        AdditiveMap { basis_images: field.prime_basis() }
    }

    pub fn apply(&self, field: &Field, x: Fe) -> Fe {
        field
            .digits(x)
            .iter()
            .zip(&self.basis_images)
            .fold(Fe::ZERO, |acc, (&c, &img)| field.add(acc, field.scale(img, c)))
    }

    pub fn add(&self, field: &Field, other: &AdditiveMap) -> AdditiveMap {
        AdditiveMap {
            basis_images: self
                .basis_images
                .iter()
                .zip(&other.basis_images)
                .map(|(&a, &b)| field.add(a, b))
                .collect(),
        }
    }

    /// Checks additivity of an arbitrary value table (indexed by element).
    pub fn from_table(field: &Field, table: &[Fe]) -> Option<AdditiveMap> {
        let map = AdditiveMap {
            basis_images: field.prime_basis().iter().map(|b| table[b.index() as usize]).collect(),
        };
        field.elements().all(|x| map.apply(field, x) == table[x.index() as usize]).then_some(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, k: u32) -> Field {
        Field::new(p, k).unwrap()
    }

    #[test]
    fn constructs_small_fields() {
        assert_eq!(gf(2, 1).modulus(), &[] as &[u32]);
        assert_eq!(gf(2, 2).modulus(), &[1, 1, 1]);
        assert_eq!(gf(2, 3).modulus(), &[1, 1, 0, 1]);
        assert_eq!(gf(2, 4).modulus(), &[1, 1, 0, 0, 1]);
        assert_eq!(gf(3, 4).q(), 81);
    }

    #[test]
    fn gf9_modulus_is_least_quadratic_without_roots() {
        // Oracle: the first monic quadratic (by encoding) with no root in Z_3.
        let mut expected = None;
        'outer: for c1 in 0..3u32 {
            for c0 in 0..3u32 {
                if (0..3u32).all(|x| (x * x + c1 * x + c0) % 3 != 0) {
                    expected = Some(vec![c0, c1, 1]);
                    break 'outer;
                }
            }
        }
        assert_eq!(gf(3, 2).modulus(), expected.unwrap().as_slice());
        assert_eq!(gf(3, 2).modulus(), &[1, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Field::new(4, 1).unwrap_err(), GfError::NonPrime(4));
        assert_eq!(Field::new(1, 1).unwrap_err(), GfError::NonPrime(1));
        assert_eq!(Field::new(2, 0).unwrap_err(), GfError::DegreeOutOfRange(0));
        assert_eq!(Field::new(2, 5).unwrap_err(), GfError::DegreeOutOfRange(5));
        assert!(matches!(Field::new(5, 4), Err(GfError::OrderTooLarge(625))));
        assert!(Field::with_modulus(2, 2, &[1, 0, 1]).is_err());
        assert!(Field::with_modulus(2, 2, &[1, 1, 1]).is_ok());
    }

    #[test]
    fn small_arithmetic() {
        let f2 = gf(2, 1);
        assert_eq!(f2.add(Fe::ONE, Fe::ONE), Fe::ZERO);
        let f3 = gf(3, 1);
        let two = f3.elem(2).unwrap();
        assert_eq!(f3.inv(two).unwrap(), two);
        let f4 = gf(2, 2);
        let t = f4.elem(2).unwrap();
        assert_eq!(f4.mul(t, t), f4.elem(3).unwrap());
        assert_eq!(f4.inv(Fe::ZERO), Err(GfError::DivisionByZero));
        assert_eq!(f4.elem(4), Err(GfError::ElementOutOfRange(4, 4)));
        assert_eq!(f4.checked(Fe::ONE, Fe::from_raw(7)), Err(GfError::FieldMismatch));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (p, k) in [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2), (2, 4), (7, 1), (5, 2), (3, 3)] {
            let f = gf(p, k);
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let f2 = gf(2, 1);
        assert_eq!(f2.automorphisms().len(), 1);
        let f4 = gf(2, 2);
        assert_eq!(f4.frobenius(f4.elem(2).unwrap(), 1).unwrap(), f4.elem(3).unwrap());
        assert!(f4.frobenius(Fe::ONE, 2).is_err());
        let f9 = gf(3, 2);
        for a in f9.elements() {
            let twice = f9.frobenius(f9.frobenius(a, 1).unwrap(), 1).unwrap();
            assert_eq!(twice, a);
        }
    }

    #[test]
    fn frobenius_maps_are_distinct_automorphisms() {
        for (p, k) in [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3)] {
            let f = gf(p, k);
            let auts = f.automorphisms();
            let tables: Vec<Vec<Fe>> = auts.iter().map(FieldAut::table).collect();
            for i in 0..tables.len() {
                for j in i + 1..tables.len() {
                    assert_ne!(tables[i], tables[j]);
                }
            }
            for s in &auts {
                for t in &auts {
                    let c = s.compose(t);
                    assert!(tables.contains(&c.table()));
                    for a in f.elements() {
                        assert_eq!(c.apply(a), s.apply(t.apply(a)));
                    }
                }
                for a in f.elements() {
                    for b in f.elements() {
                        assert_eq!(s.apply(f.add(a, b)), f.add(s.apply(a), s.apply(b)));
                        assert_eq!(s.apply(f.mul(a, b)), f.mul(s.apply(a), s.apply(b)));
                    }
                }
            }
        }
    }

    #[test]
    fn digits_round_trip() {
        let f = gf(3, 3);
        for a in f.elements() {
            assert_eq!(f.from_digits(&f.digits(a)), a);
        }
        assert_eq!(f.prime_basis().iter().map(|b| b.index()).collect::<Vec<_>>(), vec![1, 3, 9]);
    }

    #[test]
    fn additive_maps() {
        let f = gf(2, 2);
        let id = AdditiveMap::identity(&f);
        for x in f.elements() {
            assert_eq!(id.apply(&f, x), x);
        }
        let frob: Vec<Fe> = f.elements().map(|x| f.frob(x, 1)).collect();
        assert!(AdditiveMap::from_table(&f, &frob).is_some());
        let sq: Vec<Fe> = f.elements().map(|x| f.mul(x, x)).collect();
        assert!(AdditiveMap::from_table(&f, &sq).is_some());
        let f3 = gf(3, 1);
        let sq3: Vec<Fe> = f3.elements().map(|x| f3.mul(x, x)).collect();
        assert!(AdditiveMap::from_table(&f3, &sq3).is_none());
    }
}
