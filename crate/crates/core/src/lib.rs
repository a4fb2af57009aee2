//! Exact arithmetic for generalized factorials and universal sets in the
//! rings of integers of quadratic number fields, together with the search,
//! construction, analytic-estimate and random-walk machinery built on them.

pub mod analytics;
pub mod construct;
pub mod error;
pub mod factorials;
pub mod field;
pub mod ideals;
pub mod lattice;
pub mod primes;
pub mod search;
pub mod universal;
pub mod walk;

pub use error::{Error, Result};
pub use field::{CoordPair, FieldCtx, QuadInt};
pub use ideals::{factor_element, FactoredIdeal, PrimeIdeal, SplitKind};
pub use lattice::{crt_solve, ideal_power_lattice, Congruence, IdealLattice};
