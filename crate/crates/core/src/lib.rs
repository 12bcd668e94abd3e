//! Exact computations for the type and stable type of the boundary action of
//! a free group `F_r` with its uniform Markov (Patterson–Sullivan) measure.
//!
//! Log-derivatives are integers on the lattice `ln(2r-1)·ℤ`, measures are
//! exact rationals, and floating point shows up only in report columns.
//!
//! * [`word`]: reduced words, word metric, spheres, four-point defect.
//! * [`boundary`]: cylinders, `ν`, the boundary action, `R(g, ξ)`, horofunctions.
//! * [`kernel`]: the kernel family `Υ_n`, the measures `ζ_n`, admissibility.
//! * [`ratio`]: ratio-set witness search, pmp products, the parity obstruction.
//! * [`maharam`]: orbits of the Maharam extension.
//! * [`counting`]: sphere/horoball slab counts.

pub mod boundary;
pub mod budget;
pub mod cli;
pub mod counting;
pub mod error;
pub mod kernel;
pub mod maharam;
pub mod ratio;
pub mod walk;
pub mod word;

pub use boundary::{BoundaryPrefix, Cylinder, CylinderUnion, LatticeLog, RationalMass};
pub use budget::Budget;
pub use error::{Error, Result};
pub use word::{Letter, Rank, Word};
