//! Exact computations in the niltriangular algebra NT(d, GF(q)), the
//! unitriangular group UT(d, GF(q)) and its Lie ring: central series,
//! partition and maximal abelian ideals, automorphism families, and the
//! factorization of an arbitrary automorphism into those families.

pub mod aut;
pub mod decomp;
pub mod format;
pub mod gf;
pub mod ideals;
pub mod linalg;
pub mod nt;
pub mod series;

pub use aut::{aut_eq, AutError, AutMap, Policy, Verified, VerifyReport, Witness};
pub use decomp::{decompose, DecompError, DecompWord, Decomposition, FamilyElem};
pub use gf::{AdditiveMap, Fe, Field, GfError};
pub use ideals::{IdealDesc, IdealError, IdealTag};
pub use linalg::Subspace;
pub use nt::{Nt, NtError, NtMat, RootElem};
