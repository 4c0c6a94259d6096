//! The generator `A x = J_l Q_l x` and its adjoint `A* y = -J_l Q_l y`, both
//! applied to fields given by their effort `e = Q_l x` after checking domain
//! membership.

use crate::boundary::BoundaryConditionSpec;
use crate::error::{PhsError, Result};
use crate::interface_ops::{apply_j, boundary_rows, InterfaceSpec, PiecewiseField};

/// Relative tolerance of the membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

fn check_membership(e: &PiecewiseField, bc: &BoundaryConditionSpec, spec: &InterfaceSpec, adjoint: bool) -> Result<()> {
    if e.ncomp() != 2 {
        return Err(PhsError::DimensionMismatch("the generator acts on two-component efforts".into()));
    }
    if (e.l - spec.l).abs() > 1e-14 {
        return Err(PhsError::DomainViolation(format!("field is split at {} but the interface is at {}", e.l, spec.l)));
    }
    let scale = e.sup_norm().max(f64::MIN_POSITIVE);
    let which = if adjoint { "D(A*)" } else { "D(A)" };
    let (m, p) = (e.left_limit(1), e.right_limit(1));
    if (m - p).abs() > MEMBERSHIP_TOL * scale {
        return Err(PhsError::DomainViolation(format!(
            "not in {which}: e2 is discontinuous at l (jump {:.3e})",
            m - p
        )));
    }
    let f_i = 0.5 * (m + p);
    let e_i = e.left_limit(0) - e.right_limit(0);
    let sign = if adjoint { -1.0 } else { 1.0 };
    let rel = f_i - sign * spec.r * e_i;
    if rel.abs() > MEMBERSHIP_TOL * scale {
        let law = if adjoint { "f_I = -r e_I" } else { "f_I = r e_I" };
        return Err(PhsError::DomainViolation(format!(
            "not in {which}: interface relation {law} violated by {rel:.3e}"
        )));
    }
    let bnd = boundary_rows(bc, adjoint)? * e.trace();
    if bnd.norm() > MEMBERSHIP_TOL * scale {
        return Err(PhsError::DomainViolation(format!("not in {which}: boundary rows violated by {:.3e}", bnd.norm())));
    }
    Ok(())
}

/// `A x` for `x` in `D(A)` given by its effort.
pub fn generator_apply(e: &PiecewiseField, bc: &BoundaryConditionSpec, spec: &InterfaceSpec) -> Result<PiecewiseField> {
    check_membership(e, bc, spec, false)?;
    apply_j(e)
}

/// `A* y` for `y` in `D(A*)` given by its effort.
pub fn adjoint_apply(e: &PiecewiseField, bc: &BoundaryConditionSpec, spec: &InterfaceSpec) -> Result<PiecewiseField> {
    check_membership(e, bc, spec, true)?;
    let j = apply_j(e)?;
    Ok(PiecewiseField {
        a: j.a,
        l: j.l,
        b: j.b,
        left: j.left.iter().map(|c| c.scale(-1.0)).collect(),
        right: j.right.iter().map(|c| c.scale(-1.0)).collect(),
    })
}

/// `<A x, y>_{Q_l} - <x, A* y>_{Q_l}` for efforts `ex = Q_l x`, `ey = Q_l y`.
pub fn adjoint_duality_residual(
    ex: &PiecewiseField,
    ey: &PiecewiseField,
    bc: &BoundaryConditionSpec,
    spec: &InterfaceSpec,
) -> Result<crate::boundary::IdentityCheck> {
    let ax = generator_apply(ex, bc, spec)?;
    let ay = adjoint_apply(ey, bc, spec)?;
    let lhs = crate::interface_ops::integrate(&[ex, ey], |s, z| ax.eval2(s, z).dot(&ey.eval2(s, z)));
    let rhs = crate::interface_ops::integrate(&[ex, ey], |s, z| ex.eval2(s, z).dot(&ay.eval2(s, z)));
    let n = |f: &PiecewiseField| crate::interface_ops::integrate(&[f, f], |s, z| f.eval2(s, z).norm_squared()).sqrt();
    let scale = (n(&ax) * n(ey)).max(n(ex) * n(&ay)).max(lhs.abs()).max(rhs.abs());
    Ok(crate::boundary::IdentityCheck { lhs, rhs, residual: (lhs - rhs).abs(), scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::profile::CoefficientProfile;
    use crate::boundary::{classify_conditions, transmission_line_wb};
    use crate::interface_ops::sample_domain_element;

    #[test]
    fn duality_on_random_pairs() {
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let bc = classify_conditions(&transmission_line_wb(0.5), 1.0).unwrap();
        let spec = InterfaceSpec::new(0.2, 1.5).unwrap();
        for seed in 0..20 {
            let x = sample_domain_element(&bc, &spec, &p, seed, false).unwrap();
            let y = sample_domain_element(&bc, &spec, &p, 1000 + seed, true).unwrap();
            let chk = adjoint_duality_residual(&x.e, &y.e, &bc, &spec).unwrap();
            assert!(chk.residual <= 1e-9 * chk.scale.max(1.0), "{chk:?}");
        }
    }

    #[test]
    fn membership_failures_name_the_constraint() {
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let bc = classify_conditions(&transmission_line_wb(0.5), 1.0).unwrap();
        let spec = InterfaceSpec::new(0.2, 1.5).unwrap();
        let x = sample_domain_element(&bc, &spec, &p, 3, false).unwrap();
        let err = adjoint_apply(&x.e, &bc, &spec).unwrap_err().to_string();
        assert!(err.contains("D(A*)"), "{err}");
        let y = sample_domain_element(&bc, &spec, &p, 4, true).unwrap();
        assert!(generator_apply(&y.e, &bc, &spec).is_err());
    }
}
