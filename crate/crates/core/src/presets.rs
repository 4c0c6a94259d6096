//! Ready-made systems used by the examples, the CLI and the tests.

use nalgebra::Matrix2x4;
use serde::{Deserialize, Serialize};

use crate::analytic::family::FamilySpec;
use crate::analytic::profile::{CoefficientProfile, SideProfile};
use crate::boundary::{classify_conditions, transmission_line_wb, wb_from_trace_form, BoundaryConditionSpec};
use crate::error::Result;
use crate::interface_ops::InterfaceSpec;
use crate::path::MovingPath;
use crate::poly::Polynomial;

/// A coefficient profile with boundary conditions and a fixed interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSystem {
    pub profile: CoefficientProfile,
    pub bc: BoundaryConditionSpec,
    pub interface: InterfaceSpec,
}

impl InterfaceSystem {
    pub fn new(profile: CoefficientProfile, wb: &Matrix2x4<f64>, interface: InterfaceSpec) -> Result<Self> {
        interface.check_inside(profile.a, profile.b)?;
        let bc = classify_conditions(wb, interface.r)?;
        Ok(Self { profile, bc, interface })
    }
}

/// Lossless line on `[-1, 1]` shorted at `a` and terminated by `V(b) = R_b I(b)`,
/// with a resistive interface `f_I = e_I / r_i` at `z = 0`.
pub fn transmission_line(rb: f64, r_i: f64) -> Result<InterfaceSystem> {
    InterfaceSystem::new(
        CoefficientProfile::identity(-1.0, 1.0),
        &transmission_line_wb(rb),
        InterfaceSpec::new(0.0, 1.0 / r_i)?,
    )
}

/// `e1(a) = e1(b) = 0` with a lossless interface (`r = 0`) at `l`: every
/// solution conserves energy.
pub fn shorted_line(l: f64) -> Result<InterfaceSystem> {
    let wt = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    InterfaceSystem::new(CoefficientProfile::identity(-1.0, 1.0), &wb_from_trace_form(&wt), InterfaceSpec::new(l, 0.0)?)
}

/// `e1(a) = -R e2(a)` and `e1(b) = R e2(b)` on `[-1, 1]` with `r = 0` at `z = 0`.
///
/// Each half is a line shorted at the interface and matched through the
/// reflection coefficient `rho = (R - 1)/(R + 1)`, so the spectrum lies on
/// `Re lambda = ln|rho| / 2`.
pub fn resistive_ends(big_r: f64) -> Result<InterfaceSystem> {
    let wt = Matrix2x4::new(0.0, 0.0, 1.0, big_r, 1.0, -big_r, 0.0, 0.0);
    InterfaceSystem::new(
        CoefficientProfile::identity(-1.0, 1.0),
        &wb_from_trace_form(&wt),
        InterfaceSpec::new(0.0, 0.0)?,
    )
}

/// Exact spectral abscissa of [`resistive_ends`].
pub fn resistive_ends_abscissa(big_r: f64) -> f64 {
    ((big_r - 1.0) / (big_r + 1.0)).abs().ln() / 2.0
}

/// Family on `[-1, 1]` with `Q^- = I`, `Q^+ = (1 + eps z^2) I`, `r = 0`,
/// resistive ends and the given path; `l(0)` must be `0`.
pub fn moving_family(eps: f64, big_r: f64, path: MovingPath, tau: f64) -> Result<FamilySpec> {
    let p = Polynomial::new(0.0, vec![1.0, 0.0, eps]);
    let profile = CoefficientProfile::new(
        -1.0,
        1.0,
        SideProfile::identity(),
        SideProfile::DiagonalPoly { q11: p.clone(), q22: p },
    )?;
    let wt = Matrix2x4::new(0.0, 0.0, 1.0, big_r, 1.0, -big_r, 0.0, 0.0);
    let bc = classify_conditions(&wb_from_trace_form(&wt), 0.0)?;
    Ok(FamilySpec { profile, bc, path, r: 0.0, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Classification;

    #[test]
    fn classifications() {
        assert_eq!(transmission_line(1.0, 1.0).unwrap().bc.classification, Classification::Contraction);
        assert_eq!(shorted_line(0.0).unwrap().bc.classification, Classification::UnitaryCandidate);
        assert_eq!(resistive_ends(5.0).unwrap().bc.classification, Classification::ExponentiallyStableCandidate);
        assert!((resistive_ends_abscissa(5.0) - (2.0f64 / 3.0).ln() / 2.0).abs() < 1e-15);
    }
}
