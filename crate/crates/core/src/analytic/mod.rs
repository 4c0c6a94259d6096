//! Transition-matrix analysis of the interface generator: resolvents,
//! characteristic matrices, spectra, the Hilbert-space adjoint and stability
//! constants of operator families.

pub mod adjoint;
pub mod family;
pub mod profile;
pub mod resolvent;
pub mod spectrum;
pub mod transition;
