//! Transition matrices of the resolvent ODE on one side of the interface.
//!
//! With the effort `e = Q x`, the equation `(lambda - A) x = y` reads
//! `e' = lambda P1 Q^{-1} e - P1 y` on each side, since `P1^{-1} = P1`. This
//! form needs no derivative of `Q`. The state transition matrix is recovered
//! as `Lambda(z, s) = Q(z)^{-1} Phi(z, s) Q(s)`, which solves
//! `x' = Q^{-1}(lambda P1 - Q') x`.
//!
//! Constant coefficients use the closed-form 2x2 exponential; variable
//! coefficients use an adaptive Dormand–Prince 5(4) integrator.

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::analytic::profile::{CoefficientProfile, Side, SideProfile};
use crate::error::{PhsError, Result};
use crate::linalg::{c2, expm2, mul2, mulv2, p1};
use crate::quadrature::GaussLegendre;

/// Complex 2x2 matrix as nested arrays.
pub type C2 = [[Complex64; 2]; 2];
/// Complex 2-vector.
pub type CV2 = [Complex64; 2];

/// Absolute tolerance of the adaptive integrator.
pub const RK_ATOL: f64 = 1e-12;
/// Relative tolerance of the adaptive integrator.
pub const RK_RTOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn identity2() -> C2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

/// `lambda P1 Q(z)^{-1}`.
fn effort_matrix(side: &SideProfile, lambda: Complex64, z: f64) -> C2 {
    let qi = side.q(z).try_inverse().expect("Q is positive definite");
    let m = c2(&(p1() * qi));
    [[m[0][0] * lambda, m[0][1] * lambda], [m[1][0] * lambda, m[1][1] * lambda]]
}

/// `-P1 y`.
fn forcing(y: Vector2<f64>) -> CV2 {
    let v = -(p1() * y);
    [Complex64::new(v[0], 0.0), Complex64::new(v[1], 0.0)]
}

/// Effort transition matrices `Phi(z_j, z_0)` and particular solutions
/// `p(z_j)` with `p(z_0) = 0` at the points `z_j`.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub z: Vec<f64>,
    pub phi: Vec<C2>,
    pub p: Vec<CV2>,
}

/// Source term of the resolvent equation, `y(z)` on one side.
pub type Source<'a> = &'a dyn Fn(f64) -> Vector2<f64>;

/// Propagates the effort equation through `points`, starting at `points[0]`.
pub fn propagate(side: &SideProfile, lambda: Complex64, points: &[f64], y: Option<Source<'_>>) -> Result<Propagation> {
    if points.is_empty() {
        return Err(PhsError::InvalidInput("no propagation points".into()));
    }
    if side.is_constant() {
        Ok(propagate_constant(side, lambda, points, y))
    } else {
        propagate_rk(side, lambda, points, y)
    }
}

fn propagate_constant(side: &SideProfile, lambda: Complex64, points: &[f64], y: Option<Source<'_>>) -> Propagation {
    let m = effort_matrix(side, lambda, points[0]);
    let exp_of = |dz: f64| expm2([[m[0][0] * dz, m[0][1] * dz], [m[1][0] * dz, m[1][1] * dz]]);
    let z0 = points[0];
    let mnorm = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let g = GaussLegendre::default_rule();
    let mut phi = Vec::with_capacity(points.len());
    let mut p = Vec::with_capacity(points.len());
    phi.push(identity2());
    p.push([ZERO; 2]);
    for j in 1..points.len() {
        let (zl, zr) = (points[j - 1], points[j]);
        phi.push(exp_of(zr - z0));
        let mut pj = mulv2(&exp_of(zr - zl), &p[j - 1]);
        if let Some(y) = y {
            let dz = zr - zl;
            let panels = ((mnorm * dz.abs()).ceil() as usize).max((dz.abs() / 0.25).ceil() as usize).max(1);
            let h = dz / panels as f64;
            for k in 0..panels {
                let lo = zl + k as f64 * h;
                for (t, w) in g.mapped(lo, lo + h) {
                    let v = mulv2(&exp_of(zr - t), &forcing(y(t)));
                    pj[0] += v[0] * w;
                    pj[1] += v[1] * w;
                }
            }
        }
        p.push(pj);
    }
    Propagation { z: points.to_vec(), phi, p }
}

/// State of the combined system: the two columns of `Phi` and `p`.
type State = [Complex64; 6];

fn rhs(side: &SideProfile, lambda: Complex64, y: Option<Source<'_>>, z: f64, s: &State) -> State {
    let m = effort_matrix(side, lambda, z);
    let c0 = mulv2(&m, &[s[0], s[1]]);
    let c1 = mulv2(&m, &[s[2], s[3]]);
    let mut pp = mulv2(&m, &[s[4], s[5]]);
    if let Some(y) = y {
        let f = forcing(y(z));
        pp[0] += f[0];
        pp[1] += f[1];
    }
    [c0[0], c0[1], c1[0], c1[1], pp[0], pp[1]]
}

fn axpy(s: &State, h: f64, ks: &[(&State, f64)]) -> State {
    let mut out = *s;
    for (k, c) in ks {
        for i in 0..6 {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

// Dormand–Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn propagate_rk(side: &SideProfile, lambda: Complex64, points: &[f64], y: Option<Source<'_>>) -> Result<Propagation> {
    let mut s: State = [ONE, ZERO, ZERO, ONE, ZERO, ZERO];
    let mut z = points[0];
    let mut phi = vec![identity2()];
    let mut p = vec![[ZERO; 2]];
    let span = (points[points.len() - 1] - points[0]).abs().max(1e-3);
    let mut h = span / 64.0;
    let f = |z: f64, s: &State| rhs(side, lambda, y, z, s);
    for &target in &points[1..] {
        let dir = if target >= z { 1.0 } else { -1.0 };
        let mut k1 = f(z, &s);
        while (target - z) * dir > 1e-15 * span {
            let mut step = h.min((target - z).abs());
            let last = step >= (target - z).abs();
            if step < 1e-14 * span {
                return Err(PhsError::NoConvergence(format!("step size underflow at z = {z}")));
            }
            let hs = step * dir;
            let k2 = f(z + A21 * hs, &axpy(&s, hs, &[(&k1, A21)]));
            let k3 = f(z + 0.3 * hs, &axpy(&s, hs, &[(&k1, A31), (&k2, A32)]));
            let k4 = f(z + 0.8 * hs, &axpy(&s, hs, &[(&k1, A41), (&k2, A42), (&k3, A43)]));
            let k5 = f(z + 8.0 / 9.0 * hs, &axpy(&s, hs, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]));
            let k6 = f(z + hs, &axpy(&s, hs, &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]));
            let snew = axpy(&s, hs, &[(&k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)]);
            let znew = if last { target } else { z + hs };
            let k7 = f(znew, &snew);
            let mut err: f64 = 0.0;
            for i in 0..6 {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
                let sc = RK_ATOL + RK_RTOL * s[i].norm().max(snew[i].norm());
                err = err.max(e.norm() / sc);
            }
            if err <= 1.0 {
                s = snew;
                z = znew;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = step * fac;
                if last {
                    break;
                }
            } else {
                step *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                h = step;
            }
        }
        z = target;
        phi.push([[s[0], s[2]], [s[1], s[3]]]);
        p.push([s[4], s[5]]);
    }
    Ok(Propagation { z: points.to_vec(), phi, p })
}

/// Effort transition matrix `Phi(z, s)` on one side.
pub fn effort_transition(side: &SideProfile, z: f64, s: f64, lambda: Complex64) -> Result<C2> {
    let pr = propagate(side, lambda, &[s, z], None)?;
    Ok(pr.phi[1])
}

/// State transition matrix `Lambda(z, s) = Q(z)^{-1} Phi(z, s) Q(s)`.
pub fn transition_matrix(profile: &CoefficientProfile, side: Side, z: f64, s: f64, lambda: Complex64) -> Result<C2> {
    for v in [z, s] {
        if v < profile.a - 1e-12 || v > profile.b + 1e-12 {
            return Err(PhsError::DomainViolation(format!("{v} outside [{}, {}]", profile.a, profile.b)));
        }
    }
    let sp = profile.side(side);
    let phi = effort_transition(sp, z, s, lambda)?;
    let qz_inv = c2(&sp.q(z).try_inverse().expect("Q is positive definite"));
    Ok(mul2(&mul2(&qz_inv, &phi), &c2(&sp.q(s))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn close(a: &C2, b: &C2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() <= tol))
    }

    #[test]
    fn identity_profile_matches_hyperbolic_form() {
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let d = 0.8;
        let l = transition_matrix(&p, Side::Minus, 0.3, 0.3 - d, ONE).unwrap();
        let e = (2.0 * d).exp();
        let f = 0.5 / d.exp();
        let expected = [
            [Complex64::new(f * (e + 1.0), 0.0), Complex64::new(f * (1.0 - e), 0.0)],
            [Complex64::new(f * (1.0 - e), 0.0), Complex64::new(f * (e + 1.0), 0.0)],
        ];
        assert!(close(&l, &expected, 1e-14));
        assert!(close(&transition_matrix(&p, Side::Plus, 0.2, 0.2, ONE).unwrap(), &identity2(), 0.0));
    }

    #[test]
    fn rk_agrees_with_exponential_for_constant_side() {
        let sp = SideProfile::constant_diagonal(2.0, 0.5);
        let lam = Complex64::new(0.7, 1.3);
        let exact = effort_transition(&sp, 0.9, -0.4, lam).unwrap();
        let rk = propagate_rk(&sp, lam, &[-0.4, 0.9], None).unwrap().phi[1];
        assert!(close(&exact, &rk, 1e-9));
    }

    #[test]
    fn variable_profile_inverse_property() {
        let sp = SideProfile::DiagonalPoly {
            q11: Polynomial::new(0.0, vec![1.0, 0.3, 0.2]),
            q22: Polynomial::new(0.0, vec![2.0, -0.4]),
        };
        let lam = Complex64::new(1.5, 0.5);
        let f = effort_transition(&sp, 0.8, -0.5, lam).unwrap();
        let g = effort_transition(&sp, -0.5, 0.8, lam).unwrap();
        assert!(close(&mul2(&f, &g), &identity2(), 1e-10));
    }

    #[test]
    fn particular_solution_matches_rk() {
        let sp = SideProfile::constant_diagonal(1.5, 0.7);
        let y = |z: f64| Vector2::new(1.0 + z * z, z - 0.5);
        let pts = [-1.0, -0.5, 0.25, 0.6];
        let a = propagate_constant(&sp, Complex64::new(2.0, 0.0), &pts, Some(&y));
        let b = propagate_rk(&sp, Complex64::new(2.0, 0.0), &pts, Some(&y)).unwrap();
        for j in 0..pts.len() {
            for k in 0..2 {
                assert!((a.p[j][k] - b.p[j][k]).norm() < 1e-9);
            }
        }
    }
}
