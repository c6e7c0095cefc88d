//! Exact diagonalization of a ring of Jaynes-Cummings cells in which every
//! qubit couples to its own resonator and to the resonator on its left.
//!
//! The total excitation number is conserved, so each sector N is built and
//! solved on its own: [`basis`] enumerates the sector, [`hamiltonian`]
//! assembles the sparse operator, [`eigensolver`] finds the lowest levels,
//! and [`observables`] / [`analysis`] turn ground states into correlation
//! functions, gaps, density staircases and Mott-lobe boundaries.

pub mod analysis;
pub mod basis;
pub mod eigensolver;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod observables;
pub mod session;

pub use basis::{enumerate_sector, sector_dimension, SectorBasis, SiteState, DEFAULT_DIMENSION_CAP};
pub use eigensolver::{lowest_eigenpairs, EigenConfig, GroundState, SolverMethod};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, build_ladder, LadderMap, LinearOperator, MatrixFreeHamiltonian, SparseOperator};
pub use model::{Boundary, LatticeParams};
pub use observables::{gaps, rho1, rho1_matrix, rho1_profile, GapRecord, Rho1Profile};
pub use session::{ground_energy, SectorSpectrum, Session};
