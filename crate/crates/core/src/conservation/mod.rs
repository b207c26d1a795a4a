//! Detection and characterization of conservation laws.
//!
//! * [`finitary`]: the single-site perturbation identity over `B + B`, the
//!   basic decision procedure everything else is checked against.
//! * [`basis`]: the full solution space of that identity, over `Q` or `Z/m`.
//! * [`torus`]: brute force on finite toroidal quotients.
//! * [`sandwich`]: interior/closure window bounds for nonnegative quantities.
//! * [`cesaro`]: spatial averages on eventually periodic configurations.
//! * [`measure`]: the uniform-sum filter and the word-marginal test.

pub mod basis;
pub mod cesaro;
pub mod finitary;
pub mod measure;
pub mod sandwich;
pub mod torus;

pub use basis::{conservation_basis, ConservationBasis};
pub use cesaro::{cesaro_average, cesaro_average_torus, EventuallyPeriodic};
pub use finitary::{finitary_holds, Counterexample, FinitaryChecker, FinitaryReport, PatchGeometry};
pub use measure::{
    marginal_constraint_space, marginal_invariance_check, uniform_sum_filter, MarginalReport,
    MarginalSpace, UniformSumReport,
};
pub use sandwich::{sandwich_check, SandwichReport};
pub use torus::{torus_conserved, torus_invariant_dimension, TorusMode, TorusReport};
