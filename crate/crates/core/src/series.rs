//! Lower and upper central series of UT(d, F), computed by prime-field linear algebra.

use crate::linalg::{kernel, Subspace};
use crate::nt::{Nt, NtError};

impl Nt {
    /// `G_1 ⊇ G_2 ⊇ … ⊇ 0` with `G_{k+1}` spanned by commutators of basis
    /// elements of `G_1` with basis elements of `G_k`. Ends with the zero term.
    pub fn lower_central_series(&self) -> Vec<Subspace> {
        let gens = self.prime_root_basis();
        let mut series = vec![self.full_space()];
        loop {
            let last = series.last().expect("nonempty");
            if last.is_zero() {
                break;
            }
            let current = self.basis_mats(last);
            let next = self.span(
                gens.iter().flat_map(|g| current.iter().map(move |c| (g, c))).map(|(g, c)| self.comm_(g, c)),
            );
            if &next == last {
                // Not nilpotent; cannot happen for NT.
                break;
            }
            series.push(next);
        }
        series
    }

    /// `0 = Z_0 ⊆ Z_1 ⊆ … ⊆ Z_c = G`.
    ///
    /// `Z_m` is a two-sided ring ideal, so `z·Z_m = z + Z_m` and the condition
    /// `[z, g] ∈ Z_m` becomes the linear condition `g⁻¹·z·g − z ∈ Z_m`; it is
    /// imposed for every generator `g = b_t e_{i+1,i}`.
    pub fn upper_central_series(&self) -> Vec<Subspace> {
        let n = self.prime_dim();
        let p = self.field().p();
        let gens = self.generators();
        let basis = self.prime_root_basis();
        let mut series = vec![Subspace::zero(p, n)];
        loop {
            let z = series.last().expect("nonempty");
            if z.dim() == n {
                break;
            }
            debug_assert!(self.is_ring_ideal(z));
            let images: Vec<Vec<u8>> = basis
                .iter()
                .map(|e| {
                    gens.iter()
                        .flat_map(|g| {
                            let delta = self.sub_(&self.conj_(e, g), e);
                            z.reduce(&self.to_vector(&delta))
                        })
                        .collect()
                })
                .collect();
            let next = Subspace::span(p, n, kernel(p, &images, n * gens.len()));
            if &next == z {
                break;
            }
            series.push(next);
        }
        series
    }

    /// Whether a subspace is closed under left and right multiplication by NT.
    pub fn is_ring_ideal(&self, s: &Subspace) -> bool {
        let roots = self.prime_root_basis();
        self.basis_mats(s).iter().all(|a| {
            roots.iter().all(|r| s.contains(&self.to_vector(&self.mul_(a, r))) && s.contains(&self.to_vector(&self.mul_(r, a))))
        })
    }

    /// Γ_1 ⊇ Γ_2 ⊇ … ⊇ Γ_d = 0.
    pub fn gamma_chain(&self) -> Vec<Subspace> {
        (1..=self.d()).map(|k| self.gamma_subspace(k).expect("k in range")).collect()
    }
}

/// Term-by-term comparison of both central series with the Γ chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesReport {
    /// Prime-field dimensions of the lower central series.
    pub lower_dims: Vec<usize>,
    /// Prime-field dimensions of the upper central series, from `Z_0`.
    pub upper_dims: Vec<usize>,
    pub gamma_dims: Vec<usize>,
    /// `G_k = Γ_k` for every `k`.
    pub lower_matches_gamma: bool,
    /// `Z_m = Γ_{d−m}` for every `m`.
    pub upper_matches_gamma: bool,
}

impl SeriesReport {
    pub fn all_equal(&self) -> bool {
        self.lower_matches_gamma && self.upper_matches_gamma
    }
}

pub fn compare_series(nt: &Nt) -> Result<SeriesReport, NtError> {
    let lower = nt.lower_central_series();
    let upper = nt.upper_central_series();
    let gamma = nt.gamma_chain();
    let d = nt.d();
    let lower_matches_gamma = lower.len() == gamma.len() && lower.iter().zip(&gamma).all(|(a, b)| a == b);
    let upper_matches_gamma =
        upper.len() == d && upper.iter().enumerate().all(|(m, z)| *z == gamma[d - m - 1]);
    Ok(SeriesReport {
        lower_dims: lower.iter().map(Subspace::dim).collect(),
        upper_dims: upper.iter().map(Subspace::dim).collect(),
        gamma_dims: gamma.iter().map(Subspace::dim).collect(),
        lower_matches_gamma,
        upper_matches_gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    #[test]
    fn d5_gf2_dimensions() {
        let nt = Nt::new(5, Field::prime(2).unwrap()).unwrap();
        let dims: Vec<usize> = nt.lower_central_series().iter().map(Subspace::dim).collect();
        // Oracle: count positions with i − j ≥ k.
        let expected: Vec<usize> =
            (1..=5).map(|k| (1..=5).flat_map(|i| (1..i).map(move |j| (i, j))).filter(|(i, j)| i - j >= k).count()).collect();
        assert_eq!(dims, expected);
        assert_eq!(dims, vec![10, 6, 3, 1, 0]);
    }

    #[test]
    fn upper_series_starts_with_centre() {
        let nt = Nt::new(5, Field::new(2, 2).unwrap()).unwrap();
        let upper = nt.upper_central_series();
        let centre = nt.span([nt.e(5, 1, 1), nt.e(5, 1, 2)]);
        assert_eq!(upper[1], centre);
        assert_eq!(upper.len(), 5);
    }

    #[test]
    fn series_agree_small() {
        for (d, p, k) in [(2, 2, 1), (3, 3, 1), (4, 2, 2), (5, 3, 1)] {
            let nt = Nt::new(d, Field::new(p, k).unwrap()).unwrap();
            let r = compare_series(&nt).unwrap();
            assert!(r.all_equal(), "{d} {p} {k}: {r:?}");
        }
    }
}
