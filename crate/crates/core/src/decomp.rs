//! Factoring an automorphism of UT(d, F) into flip, extremal, field,
//! diagonal, inner and central automorphisms, and seeded random words in
//! those families.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::aut::{extremal, extremal_kind, AutError, AutMap, ExtremalKind, Policy};
use crate::gf::{AdditiveMap, Fe};
use crate::linalg::{solve, Vector};
use crate::nt::{Nt, NtMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Verify,
    Flip,
    Extremal,
    FieldDiag,
    Inner,
    Central,
    Recompose,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Verify => "verify",
            Stage::Flip => "flip",
            Stage::Extremal => "extremal",
            Stage::FieldDiag => "field-diag",
            Stage::Inner => "inner",
            Stage::Central => "central",
            Stage::Recompose => "recompose",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompError {
    #[error("decomposition needs d >= 5, got d={0}")]
    DimensionTooSmall(usize),
    #[error("not an automorphism (stage {stage}): {reason}")]
    NotAnAutomorphism { stage: Stage, reason: String },
    #[error("residual is not central at generator {generator}")]
    ResidualNotCentral { generator: usize },
    #[error(transparent)]
    Aut(#[from] AutError),
}

fn reject(stage: Stage, reason: impl Into<String>) -> DecompError {
    DecompError::NotAnAutomorphism { stage, reason: reason.into() }
}

/// `φ = central ; inner ; field ; diag ; extremal ; flip`, each applied after the previous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompWord {
    pub nt: Nt,
    pub flip: bool,
    pub ext: (Fe, Fe),
    pub fld: u32,
    /// `d_1, …, d_d` with `d_1 = 1`.
    pub diag: Vec<Fe>,
    pub inner: NtMat,
    /// `Λ_1, …, Λ_{d−1}`.
    pub central: Vec<AdditiveMap>,
}

impl DecompWord {
    pub fn trivial(nt: &Nt) -> DecompWord {
        DecompWord {
            nt: nt.clone(),
            flip: false,
            ext: (Fe::ZERO, Fe::ZERO),
            fld: 0,
            diag: vec![Fe::ONE; nt.d()],
            inner: nt.zero(),
            central: vec![AdditiveMap::zero(nt.field()); nt.d() - 1],
        }
    }

    pub fn is_trivial(&self) -> bool {
        *self == DecompWord::trivial(&self.nt)
    }

    pub fn eval(&self) -> Result<AutMap, AutError> {
        let nt = &self.nt;
        let mut phi = AutMap::central(nt, &self.central)?;
        phi = phi.compose(&AutMap::inner(nt, &self.inner)?)?;
        phi = phi.compose(&AutMap::field(nt, self.fld)?)?;
        phi = phi.compose(&AutMap::diag(nt, &self.diag)?)?;
        if self.ext != (Fe::ZERO, Fe::ZERO) {
            phi = phi.compose(&extremal(nt, self.ext.0, self.ext.1)?)?;
        }
        if self.flip {
            phi = phi.compose(&AutMap::flip(nt))?;
        }
        Ok(phi)
    }
}

/// Postconditions observed along the way; all hold whenever `decompose` returns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageChecks {
    /// After removing flip and extremal parts every `N_{i+1,i}` is preserved.
    pub partitions_preserved: bool,
    /// After removing field and diagonal parts: identity mod Γ_2.
    pub identity_mod_gamma2: bool,
    /// After removing the inner part: identity mod Γ_{d−1}.
    pub identity_mod_last: bool,
    /// `eval(word)` equals the input on every generator.
    pub recomposed: bool,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub word: DecompWord,
    pub checks: StageChecks,
}

/// Whether the abelianization exchanges position `i` with `d − i`.
pub fn detect_flip(phi: &AutMap) -> Result<bool, DecompError> {
    let nt = phi.nt();
    let d = nt.d();
    let k = nt.field().k() as usize;
    let rows = phi.abelianization();
    let block_nonzero =
        |i: usize, r: usize| rows[(i - 1) * k..i * k].iter().any(|row| row[(r - 1) * k..r * k].iter().any(|&x| x != 0));
    let pattern_is = |target: &dyn Fn(usize) -> usize| {
        (1..d).all(|i| (1..d).all(|r| block_nonzero(i, r) == (r == target(i))))
    };
    if pattern_is(&|i| i) {
        Ok(false)
    } else if pattern_is(&|i| d - i) {
        Ok(true)
    } else {
        Err(reject(Stage::Flip, "abelianization is not block-diagonal or block-antidiagonal"))
    }
}

/// Image of generator `i` lies in `N_{i+1,i}`.
fn preserves_partitions(phi: &AutMap) -> bool {
    let nt = phi.nt();
    let k = nt.field().k() as usize;
    phi.images().iter().enumerate().all(|(n, m)| {
        let i = n / k + 1;
        m.support().all(|(r, c, _)| r > i && c <= i)
    })
}

/// Extremal parameters of a flip-free automorphism, read as ratios against the
/// leading coefficients of the images of `e_{2,1}` and `e_{d,d−1}`.
pub fn solve_extremal(phi: &AutMap) -> Result<(Fe, Fe), DecompError> {
    let nt = phi.nt();
    let d = nt.d();
    let f = nt.field();
    let first = phi.image(1, 0);
    let last = phi.image(d - 1, 0);
    let ratio = |m: &NtMat, at: (usize, usize), lead: (usize, usize)| {
        f.div(m.get(at.0, at.1), m.get(lead.0, lead.1)).map_err(|_| reject(Stage::Extremal, "zero leading coefficient"))
    };
    match extremal_kind(nt) {
        ExtremalKind::Odd => Ok((ratio(first, (d, 2), (2, 1))?, ratio(last, (d - 1, 1), (d, d - 1))?)),
        ExtremalKind::Even => Ok((ratio(first, (d, 3), (2, 1))?, ratio(last, (d - 2, 1), (d, d - 1))?)),
        ExtremalKind::None => Ok((Fe::ZERO, Fe::ZERO)),
    }
}

/// Field exponent `j` and diagonal `D` (with `d_1 = 1`) of an automorphism preserving every `N_{i+1,i}`.
pub fn solve_field_diag(phi: &AutMap) -> Result<(u32, Vec<Fe>), DecompError> {
    let nt = phi.nt();
    let d = nt.d();
    let f = nt.field();
    let k = f.k() as usize;
    let lambdas: Vec<AdditiveMap> = (1..d)
        .map(|i| AdditiveMap { basis_images: (0..k).map(|t| phi.image(i, t).get(i + 1, i)).collect() })
        .collect();
    let ks: Vec<Fe> = lambdas.iter().map(|l| l.apply(f, Fe::ONE)).collect();
    if let Some(i) = ks.iter().position(|x| x.is_zero()) {
        return Err(reject(Stage::FieldDiag, format!("λ_{}(1) = 0", i + 1)));
    }
    let mu: Vec<Fe> = f.elements().map(|x| f.div(lambdas[0].apply(f, x), ks[0]).expect("nonzero")).collect();
    let j = (0..f.k())
        .find(|&j| f.elements().all(|x| f.frob(x, j) == mu[x.index() as usize]))
        .ok_or_else(|| reject(Stage::FieldDiag, "μ is not a field automorphism"))?;
    for (i, l) in lambdas.iter().enumerate() {
        if !f.elements().all(|x| l.apply(f, x) == f.mul(ks[i], mu[x.index() as usize])) {
            return Err(reject(Stage::FieldDiag, format!("λ_{} is not a multiple of μ", i + 1)));
        }
    }
    let mut diag = vec![Fe::ONE];
    for kk in &ks {
        let last = *diag.last().expect("nonempty");
        diag.push(f.div(last, *kk).expect("nonzero"));
    }
    Ok((j, diag))
}

/// Conjugator `g` with `φ ; Inn(g⁻¹)` trivial mod Γ_{d−1}, for `φ` trivial mod Γ_2.
///
/// Subdiagonals are cleared in turn. Conjugating by `1 + H` with `H` on
/// subdiagonal `ℓ−1` changes the subdiagonal-`ℓ` part of the image of `x`
/// by exactly `xH − Hx` and leaves lower subdiagonals alone, so each step is
/// a linear system over the prime field.
pub fn solve_inner(phi: &AutMap) -> Result<NtMat, DecompError> {
    let nt = phi.nt();
    let d = nt.d();
    let f = nt.field();
    let p = f.p();
    let basis = f.prime_basis();
    let gens = nt.generators();
    let mut y = phi.clone();
    let mut acc = nt.zero();
    for level in 2..=d.saturating_sub(2) {
        let slice = |m: &NtMat| -> Vector {
            (level + 1..=d).flat_map(|i| f.digits(m.get(i, i - level))).map(|c| c as u8).collect()
        };
        let unknowns: Vec<NtMat> = (level..=d)
            .flat_map(|i| basis.iter().map(move |&b| (i, b)))
            .map(|(i, b)| nt.unit(i, i - level + 1, b))
            .collect();
        let columns: Vec<Vector> = unknowns
            .iter()
            .map(|u| gens.iter().flat_map(|x| slice(&nt.sub_(&nt.mul_(x, u), &nt.mul_(u, x)))).collect())
            .collect();
        let rhs: Vector = y
            .images()
            .iter()
            .zip(&gens)
            .flat_map(|(img, x)| slice(&nt.sub_(x, img)))
            .map(|c| (c as u32 % p) as u8)
            .collect();
        let sol = solve(p, &columns, &rhs)
            .ok_or_else(|| reject(Stage::Inner, format!("no conjugator clears subdiagonal {level}")))?;
        let h = nt.from_vector(&{
            let mut v = nt.to_vector(&nt.zero());
            for (u, &c) in unknowns.iter().zip(&sol) {
                for (slot, &x) in v.iter_mut().zip(&nt.to_vector(u)) {
                    *slot = ((*slot as u32 + c as u32 * x as u32) % p) as u8;
                }
            }
            v
        });
        y = y.compose(&AutMap::inner(nt, &h)?)?;
        if !y.is_identity_mod_gamma(level + 1) {
            return Err(reject(Stage::Inner, format!("subdiagonal {level} not cleared")));
        }
        acc = nt.gmul_(&acc, &h);
    }
    Ok(nt.ginv_(&acc))
}

/// `Λ` for a map that differs from the identity only in the `e_{d,1}` coefficients.
pub fn solve_central(phi: &AutMap) -> Result<Vec<AdditiveMap>, DecompError> {
    let nt = phi.nt();
    let d = nt.d();
    let k = nt.field().k() as usize;
    let gens = nt.generators();
    let mut out = Vec::with_capacity(d - 1);
    for i in 1..d {
        let mut images = Vec::with_capacity(k);
        for t in 0..k {
            let n = (i - 1) * k + t;
            let diff = nt.sub_(&phi.images()[n], &gens[n]);
            if diff.support().any(|(r, c, _)| (r, c) != (d, 1)) {
                return Err(DecompError::ResidualNotCentral { generator: n });
            }
            images.push(diff.get(d, 1));
        }
        out.push(AdditiveMap { basis_images: images });
    }
    Ok(out)
}

/// Factors `phi`, checking each stage's postcondition and the recomposition.
pub fn decompose(phi: &AutMap) -> Result<Decomposition, DecompError> {
    let nt = phi.nt();
    let d = nt.d();
    if d < 5 {
        return Err(DecompError::DimensionTooSmall(d));
    }
    let report = phi.check(Policy::Relations)?;
    if let Some(w) = report.witness {
        return Err(reject(Stage::Verify, format!("relation check failed: {w}")));
    }
    let mut word = DecompWord::trivial(nt);

    word.flip = detect_flip(phi)?;
    let phi1 = if word.flip { phi.compose(&AutMap::flip(nt))? } else { phi.clone() };

    let f = nt.field();
    let (a1, a2) = solve_extremal(&phi1)?;
    word.ext = (a1, a2);
    let phi2 = if (a1, a2) == (Fe::ZERO, Fe::ZERO) {
        phi1
    } else {
        // E(a1, a2) = E(a1, 0) ; E(0, a2), so peel the second factor first.
        phi1.compose(&extremal(nt, Fe::ZERO, f.neg(a2))?)?.compose(&extremal(nt, f.neg(a1), Fe::ZERO)?)?
    };
    let partitions_preserved = preserves_partitions(&phi2);
    if !partitions_preserved {
        return Err(reject(Stage::Extremal, "a generator image leaves its partition ideal"));
    }

    let (j, diag) = solve_field_diag(&phi2)?;
    word.fld = j;
    let inv_diag: Vec<Fe> = diag.iter().map(|&x| f.inv(x).expect("nonzero")).collect();
    word.diag = diag;
    let y = phi2.compose(&AutMap::diag(nt, &inv_diag)?)?.compose(&AutMap::field(nt, (f.k() - j) % f.k())?)?;
    let identity_mod_gamma2 = y.is_identity_mod_gamma(2);
    if !identity_mod_gamma2 {
        return Err(reject(Stage::FieldDiag, "residual is not the identity mod Γ_2"));
    }

    let g = solve_inner(&y)?;
    word.inner = g.clone();
    let z = y.compose(&AutMap::inner(nt, &nt.ginv_(&g))?)?;
    let identity_mod_last = z.is_identity_mod_gamma(d - 1);
    if !identity_mod_last {
        return Err(reject(Stage::Inner, "residual is not the identity mod Γ_{d-1}"));
    }

    word.central = solve_central(&z)?;
    let recomposed = word.eval()? == *phi;
    if !recomposed {
        return Err(reject(Stage::Recompose, "word does not recompose to the input"));
    }
    Ok(Decomposition {
        word,
        checks: StageChecks { partitions_preserved, identity_mod_gamma2, identity_mod_last, recomposed },
    })
}

/// One factor of a random word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyElem {
    Flip,
    Ext(Fe, Fe),
    Fld(u32),
    Diag(Vec<Fe>),
    Inner(NtMat),
    Central(Vec<AdditiveMap>),
}

impl FamilyElem {
    pub fn to_aut(&self, nt: &Nt) -> Result<AutMap, AutError> {
        match self {
            FamilyElem::Flip => Ok(AutMap::flip(nt)),
            FamilyElem::Ext(a1, a2) => extremal(nt, *a1, *a2),
            FamilyElem::Fld(j) => AutMap::field(nt, *j),
            FamilyElem::Diag(ds) => AutMap::diag(nt, ds),
            FamilyElem::Inner(g) => AutMap::inner(nt, g),
            FamilyElem::Central(l) => AutMap::central(nt, l),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyElem::Flip => "flip",
            FamilyElem::Ext(..) => "ext",
            FamilyElem::Fld(_) => "fld",
            FamilyElem::Diag(_) => "diag",
            FamilyElem::Inner(_) => "inner",
            FamilyElem::Central(_) => "central",
        }
    }
}

/// `len` factors, each family chosen uniformly among those available over
/// the field, with uniform parameters.
pub fn random_word<R: Rng + ?Sized>(nt: &Nt, len: usize, rng: &mut R) -> Vec<FamilyElem> {
    let f = nt.field();
    let q = f.q();
    let has_ext = extremal_kind(nt) != ExtremalKind::None;
    let families = if has_ext { 6 } else { 5 };
    let elem = |rng: &mut R| f.elem(rng.gen_range(0..q)).expect("in range");
    let nonzero = |rng: &mut R| f.elem(rng.gen_range(1..q)).expect("in range");
    (0..len)
        .map(|_| match rng.gen_range(0..families) {
            0 => FamilyElem::Flip,
            1 => FamilyElem::Fld(rng.gen_range(0..f.k())),
            2 => FamilyElem::Diag((0..nt.d()).map(|_| nonzero(rng)).collect()),
            3 => FamilyElem::Inner(nt.random(rng)),
            4 => FamilyElem::Central(
                (1..nt.d()).map(|_| AdditiveMap { basis_images: (0..f.k()).map(|_| elem(rng)).collect() }).collect(),
            ),
            _ => FamilyElem::Ext(elem(rng), elem(rng)),
        })
        .collect()
}

/// Composite of the factors, first factor applied first.
pub fn eval_word(nt: &Nt, word: &[FamilyElem]) -> Result<AutMap, AutError> {
    word.iter().try_fold(AutMap::identity(nt), |acc, e| acc.compose(&e.to_aut(nt)?))
}
