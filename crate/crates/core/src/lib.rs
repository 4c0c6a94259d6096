//! Port-Hamiltonian systems of two conservation laws on an interval, coupled
//! through a fixed or moving interface.
//!
//! The crate covers finite-dimensional Dirac structures and simulations
//! ([`findim`]), boundary ports of skew-symmetric differential operators
//! ([`boundary`]), interface-aware fields and operators ([`interface_ops`]),
//! transition-matrix analysis of resolvents, spectra and operator families
//! ([`analytic`]), an energy-consistent staggered discretization
//! ([`discretize`]) and time integration with port diagnostics ([`simulate`]).

pub mod analytic;
pub mod boundary;
pub mod discretize;
pub mod error;
pub mod findim;
pub mod interface_ops;
pub mod linalg;
pub mod path;
pub mod poly;
pub mod presets;
pub mod quadrature;
pub mod simulate;

pub use analytic::profile::{CoefficientProfile, Side, SideProfile};
pub use boundary::{
    build_p, build_rext, classify_conditions, factor_wb, kernel_basis, BoundaryConditionSpec, BoundaryPorts,
    Classification, OperatorSpec, TraceVector,
};
pub use error::{PhsError, Result};
pub use findim::{BondVector, IsoSystem, LinearSubspace, ResistiveRelation};
pub use interface_ops::{Component, InterfacePorts, InterfaceSpec, PiecewiseField};
pub use path::MovingPath;
