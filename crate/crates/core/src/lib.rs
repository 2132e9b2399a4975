//! Sub-additive topological pressure for Z^d shift actions.
//!
//! The crate computes the cover-relative topological pressure of
//! sub-additive potential families on symbolic dynamical systems over the
//! integer lattice, estimates measure-theoretic entropies and Lyapunov
//! exponents for Bernoulli and Markov measures, and verifies the local
//! variational inequality between them at desk scale.
//!
//! Everything is exactly enumerable by construction: the group is Z^d with
//! the standard box Følner sequence, spaces are full shifts or subshifts of
//! finite type, covers are clopen pattern families on finite windows, and
//! potentials are generated by locally constant data. Exponential-size
//! enumerations are guarded by [`Budgets`] and fail loudly rather than
//! truncate.

#![forbid(unsafe_code)]

pub mod budget;
pub mod error;
pub mod lattice;
pub mod measure;
pub mod numeric;
pub mod potential;
pub mod pressure;
pub mod space;
pub mod subadd;
pub mod system;
pub mod variational;

pub use budget::Budgets;
pub use error::{Error, Result};
pub use lattice::{folner_box, FiniteSubset, FolnerBoxes, LatticePoint};
pub use measure::{EntropyReport, InvariantMeasure};
pub use potential::{Potential, PotentialConstants};
pub use pressure::{PressureReport, PressureTerm};
pub use space::{ClopenSet, Cover, Partition, ShiftSpace};
pub use subadd::{DeclaredProperties, OwEstimate, SetFunction};
pub use system::SystemDescription;
pub use variational::{EquilibriumCandidate, VariationalResult};
