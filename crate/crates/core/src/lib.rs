//! Nichols algebras of braided vector spaces over finite fields of characteristic 2.

pub mod braided;
pub mod field;
pub mod freealg;
pub mod linalg;
pub mod nichols;
pub mod splitting;
pub mod symmetrizer;
pub mod verify;

pub use braided::{BasisLabel, BraidedError, BraidedSpace, Family, FamilyParams, Realization};
pub use field::{Field, FieldElement, FieldError, FieldSpec};
pub use freealg::{FreeAlgError, NcPoly};
pub use linalg::Matrix;
pub use nichols::{GradedBasis, HilbertSeries, NicholsError, Status};
pub use splitting::{check_k1_consistency, identity_degree, identity_suite, k1_for, Check, DynkinDiagram, K1Data, SplittingError};
pub use symmetrizer::symmetrizer_dim;
pub use verify::{bosonization_dim, pbw_hilbert, relation_suite, table1_check, PbwSpec, VerificationReport, VerifyError};
