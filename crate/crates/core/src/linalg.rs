//! Row reduction over a prime field `Z_p`.
//!
//! Every subspace of NT(d, GF(p^k)) is handled through its coordinates over
//! the prime field, so a single echelon representation covers F-subspaces and
//! the merely additive ones alike.

use std::fmt;

/// A vector over `Z_p`, entries in `0..p`.
pub type Vector = Vec<u8>;

#[inline]
fn add_scaled(dst: &mut [u8], src: &[u8], c: u32, p: u32) {
    if c == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = ((*d as u32 + c * s as u32) % p) as u8;
    }
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
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

/// A subspace of `Z_p^n` in reduced row echelon form.
///
/// Rows are kept sorted by pivot column, pivots are 1, and every pivot column
/// is zero outside its own row, so two subspaces are equal iff their rows are.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    p: u32,
    n: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("p", &self.p)
            .field("n", &self.n)
            .field("dim", &self.rows.len())
            .field("rows", &self.rows)
            .finish()
    }
}

impl Subspace {
    pub fn zero(p: u32, n: usize) -> Subspace {
        Subspace { p, n, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(p: u32, n: usize) -> Subspace {
        let rows = (0..n)
            .map(|i| {
                let mut v = vec![0u8; n];
                v[i] = 1;
                v
            })
            .collect();
        Subspace { p, n, rows, pivots: (0..n).collect() }
    }

    pub fn span<I: IntoIterator<Item = Vector>>(p: u32, n: usize, vectors: I) -> Subspace {
        let mut s = Subspace::zero(p, n);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residue of `v` after elimination against the pivots.
    pub fn reduce(&self, v: &[u8]) -> Vector {
        let mut r = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = r[pc] as u32;
            if c != 0 {
                add_scaled(&mut r, row, self.p - c, self.p);
            }
        }
        r
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        debug_assert_eq!(v.len(), self.n);
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: Vector) -> bool {
        debug_assert_eq!(v.len(), self.n);
        let mut r = self.reduce(&v);
        let Some(pc) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let s = inv_mod(r[pc] as u32, self.p);
        for x in r.iter_mut() {
            *x = (*x as u32 * s % self.p) as u8;
        }
        for row in self.rows.iter_mut() {
            let c = row[pc] as u32;
            if c != 0 {
                add_scaled(row, &r, self.p - c, self.p);
            }
        }
        let at = self.pivots.partition_point(|&q| q < pc);
        self.rows.insert(at, r);
        self.pivots.insert(at, pc);
        true
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut s = self.clone();
        for r in &other.rows {
            s.insert(r.clone());
        }
        s
    }

    /// Vectors of `self` that together with `sub` span `self`, assuming `sub ⊆ self`.
    pub fn complement_basis(&self, sub: &Subspace) -> Vec<Vector> {
        let mut acc = sub.clone();
        let mut out = Vec::new();
        for r in &self.rows {
            if acc.insert(r.clone()) {
                out.push(r.clone());
            }
        }
        out
    }

    /// Every vector of the subspace, in a fixed order. Only for tiny spaces.
    pub fn elements(&self) -> Vec<Vector> {
        combinations(self.p, &self.rows, self.n)
    }
}

/// All `Z_p`-combinations of `gens` (with repetition-free coefficient tuples).
pub fn combinations(p: u32, gens: &[Vector], n: usize) -> Vec<Vector> {
    let mut out = vec![vec![0u8; n]];
    for g in gens {
        let mut next = Vec::with_capacity(out.len() * p as usize);
        for v in &out {
            for c in 0..p {
                let mut w = v.clone();
                add_scaled(&mut w, g, c, p);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Basis of `{c : Σ c_i images[i] = 0}` for a linear map given by the images of
/// the standard basis (all images of length `m`).
pub fn kernel(p: u32, images: &[Vector], m: usize) -> Vec<Vector> {
    let n = images.len();
    // Augmented rows [image | e_i]; eliminate on the image part.
    let mut rows: Vec<Vector> = images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            debug_assert_eq!(img.len(), m);
            let mut r = img.clone();
            r.resize(m + n, 0);
            r[m + i] = 1;
            r
        })
        .collect();
    let mut rank = 0;
    for col in 0..m {
        let Some(piv) = (rank..n).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let s = inv_mod(rows[rank][col] as u32, p);
        for x in rows[rank].iter_mut() {
            *x = (*x as u32 * s % p) as u8;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank {
                let c = row[col] as u32;
                if c != 0 {
                    add_scaled(row, &pivot_row, p - c, p);
                }
            }
        }
        rank += 1;
    }
    let kern = rows[rank..].iter().map(|r| r[m..].to_vec());
    Subspace::span(p, n, kern).basis().to_vec()
}

/// Solves `A x = b` for `A` given by columns; returns the solution with all free
/// variables zero (pivots chosen at the lowest column index), or `None`.
pub fn solve(p: u32, columns: &[Vector], b: &[u8]) -> Option<Vector> {
    let m = b.len();
    let n = columns.len();
    // Row-major augmented matrix [A | b].
    let mut a: Vec<Vector> = (0..m)
        .map(|r| {
            let mut row: Vector = columns.iter().map(|c| c[r]).collect();
            row.push(b[r]);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..m).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let s = inv_mod(a[rank][col] as u32, p);
        for x in a[rank].iter_mut() {
            *x = (*x as u32 * s % p) as u8;
        }
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank {
                let c = row[col] as u32;
                if c != 0 {
                    add_scaled(row, &pivot_row, p - c, p);
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if a[rank..].iter().any(|row| row[n] != 0) {
        return None;
    }
    let mut x = vec![0u8; n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = a[r][n];
    }
    Some(x)
}

/// Rank of the matrix with the given rows.
pub fn rank(p: u32, rows: &[Vector]) -> usize {
    let n = rows.first().map_or(0, Vec::len);
    Subspace::span(p, n, rows.iter().cloned()).dim()
}
