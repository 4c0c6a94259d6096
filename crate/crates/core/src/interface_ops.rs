//! Fields with a jump at the interface `l` and the operators acting on them.
//!
//! A [`PiecewiseField`] stores each component separately on `[a, l]` and
//! `[l, b]`. The first-order interface operator acts as `P1 d/dz` on each
//! side; its domain requires the second effort to be continuous at `l`, and
//! the interface ports are `f_I = e2(l)` and `e_I = e1(l-) - e1(l+)`.

use nalgebra::{DMatrix, DVector, Matrix2x4, Vector2, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analytic::profile::{CoefficientProfile, Side};
use crate::boundary::{rext_p1, BoundaryConditionSpec, BoundaryPorts, IdentityCheck};
use crate::error::{PhsError, Result};
use crate::linalg::{self, RANK_RTOL};
use crate::path::MovingPath;
use crate::poly::{ChebSeries, Polynomial};
use crate::quadrature::GaussLegendre;

/// Relative continuity tolerance for `d_l` inputs.
pub const DL_CONTINUITY_TOL: f64 = 1e-12;
/// Relative continuity tolerance for the privileged effort `e2` at `l`.
pub const E2_CONTINUITY_TOL: f64 = 1e-10;

/// One scalar function on one side of the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Poly(Polynomial),
    Cheb(ChebSeries),
    /// Samples on ascending points, linearly interpolated.
    Grid {
        z: Vec<f64>,
        v: Vec<f64>,
    },
}

impl Component {
    pub fn zero() -> Self {
        Component::Poly(Polynomial::zero())
    }

    /// Value at `z`. Grid components extrapolate quadratically from the first
    /// or last three samples when `z` lies outside the sampled range, so
    /// one-sided limits at cell-centred grids are second-order accurate.
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Component::Poly(p) => p.eval(z),
            Component::Cheb(c) => c.eval(z),
            Component::Grid { z: zs, v } => grid_eval(zs, v, z),
        }
    }

    pub fn derivative(&self) -> Component {
        match self {
            Component::Poly(p) => Component::Poly(p.derivative()),
            Component::Cheb(c) => Component::Cheb(c.derivative()),
            Component::Grid { z, v } => Component::Grid { z: z.clone(), v: grid_derivative(z, v) },
        }
    }

    pub fn scale(&self, f: f64) -> Component {
        match self {
            Component::Poly(p) => Component::Poly(p.scale(f)),
            Component::Cheb(c) => {
                Component::Cheb(ChebSeries { lo: c.lo, hi: c.hi, coeffs: c.coeffs.iter().map(|x| x * f).collect() })
            }
            Component::Grid { z, v } => Component::Grid { z: z.clone(), v: v.iter().map(|x| x * f).collect() },
        }
    }

    /// Polynomial degree, or `None` for grid samples.
    fn degree(&self) -> Option<usize> {
        match self {
            Component::Poly(p) => Some(p.degree()),
            Component::Cheb(c) => Some(c.coeffs.len().saturating_sub(1)),
            Component::Grid { .. } => None,
        }
    }

    fn grid_points(&self) -> Option<&[f64]> {
        match self {
            Component::Grid { z, .. } => Some(z),
            _ => None,
        }
    }
}

fn grid_eval(zs: &[f64], v: &[f64], z: f64) -> f64 {
    let n = zs.len();
    if n == 1 {
        return v[0];
    }
    let tol = 1e-14 * (zs[n - 1] - zs[0]).abs().max(1.0);
    if z < zs[0] - tol || z > zs[n - 1] + tol {
        let idx = if z < zs[0] { [0, 1, 2] } else { [n - 3, n - 2, n - 1] };
        if n < 3 {
            let (i, j) = if z < zs[0] { (0, 1) } else { (n - 2, n - 1) };
            return v[i] + (v[j] - v[i]) * (z - zs[i]) / (zs[j] - zs[i]);
        }
        return (0..3)
            .map(|p| {
                let mut w = 1.0;
                for q in 0..3 {
                    if q != p {
                        w *= (z - zs[idx[q]]) / (zs[idx[p]] - zs[idx[q]]);
                    }
                }
                w * v[idx[p]]
            })
            .sum();
    }
    let k = match zs.binary_search_by(|p| p.partial_cmp(&z).unwrap()) {
        Ok(k) => return v[k],
        Err(k) => k.clamp(1, n - 1),
    };
    let t = (z - zs[k - 1]) / (zs[k] - zs[k - 1]);
    v[k - 1] * (1.0 - t) + v[k] * t
}

/// Second-order finite differences on a possibly non-uniform grid.
fn grid_derivative(z: &[f64], v: &[f64]) -> Vec<f64> {
    let n = z.len();
    if n < 3 {
        let d = if n == 2 { (v[1] - v[0]) / (z[1] - z[0]) } else { 0.0 };
        return vec![d; n];
    }
    let three = |i0: usize, x: f64| -> f64 {
        // Derivative at x of the quadratic through points i0..i0+3.
        let (x0, x1, x2) = (z[i0], z[i0 + 1], z[i0 + 2]);
        let (y0, y1, y2) = (v[i0], v[i0 + 1], v[i0 + 2]);
        y0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2))
            + y1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2))
            + y2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1))
    };
    (0..n)
        .map(|i| {
            if i == 0 {
                three(0, z[0])
            } else if i == n - 1 {
                three(n - 3, z[n - 1])
            } else {
                three(i - 1, z[i])
            }
        })
        .collect()
}

/// Adds two polynomials expanded about the same origin.
pub fn poly_lincomb(a: f64, p: &Polynomial, b: f64, q: &Polynomial) -> Polynomial {
    let origin = if p.coeffs.is_empty() { q.origin } else { p.origin };
    assert!(
        p.coeffs.is_empty() || q.coeffs.is_empty() || p.origin == q.origin,
        "polynomials must share their expansion point"
    );
    let n = p.coeffs.len().max(q.coeffs.len());
    let c = (0..n)
        .map(|k| a * p.coeffs.get(k).copied().unwrap_or(0.0) + b * q.coeffs.get(k).copied().unwrap_or(0.0))
        .collect();
    Polynomial::new(origin, c)
}

/// A field on `[a, b]` with independent representations on `[a, l]` and `[l, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseField {
    pub a: f64,
    pub l: f64,
    pub b: f64,
    pub left: Vec<Component>,
    pub right: Vec<Component>,
}

impl PiecewiseField {
    pub fn new(a: f64, l: f64, b: f64, left: Vec<Component>, right: Vec<Component>) -> Result<Self> {
        if !(a < l && l < b) {
            return Err(PhsError::InvalidInput(format!("need a < l < b, got {a}, {l}, {b}")));
        }
        if left.len() != right.len() || left.is_empty() {
            return Err(PhsError::DimensionMismatch(format!(
                "sides have {} and {} components",
                left.len(),
                right.len()
            )));
        }
        Ok(Self { a, l, b, left, right })
    }

    /// Polynomial field with per-side, per-component coefficient lists in `z - l`.
    pub fn from_poly_coeffs(a: f64, l: f64, b: f64, left: &[Vec<f64>], right: &[Vec<f64>]) -> Result<Self> {
        let mk = |cs: &[Vec<f64>]| cs.iter().map(|c| Component::Poly(Polynomial::new(l, c.clone()))).collect();
        Self::new(a, l, b, mk(left), mk(right))
    }

    pub fn zeros(a: f64, l: f64, b: f64, ncomp: usize) -> Result<Self> {
        Self::new(a, l, b, vec![Component::zero(); ncomp], vec![Component::zero(); ncomp])
    }

    pub fn ncomp(&self) -> usize {
        self.left.len()
    }

    pub fn bounds(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Minus => (self.a, self.l),
            Side::Plus => (self.l, self.b),
        }
    }

    pub fn comps(&self, side: Side) -> &[Component] {
        match side {
            Side::Minus => &self.left,
            Side::Plus => &self.right,
        }
    }

    pub fn eval(&self, side: Side, k: usize, z: f64) -> f64 {
        self.comps(side)[k].eval(z)
    }

    /// Two-component value on a side.
    pub fn eval2(&self, side: Side, z: f64) -> Vector2<f64> {
        Vector2::new(self.eval(side, 0, z), self.eval(side, 1, z))
    }

    /// Value at `z`, choosing the side by position (`z < l` is the left side).
    pub fn eval_at(&self, k: usize, z: f64) -> f64 {
        let side = if z < self.l { Side::Minus } else { Side::Plus };
        self.eval(side, k, z)
    }

    pub fn left_limit(&self, k: usize) -> f64 {
        self.left[k].eval(self.l)
    }

    pub fn right_limit(&self, k: usize) -> f64 {
        self.right[k].eval(self.l)
    }

    pub fn at_a(&self, k: usize) -> f64 {
        self.left[k].eval(self.a)
    }

    pub fn at_b(&self, k: usize) -> f64 {
        self.right[k].eval(self.b)
    }

    /// Scalar field made of component `k`.
    pub fn component(&self, k: usize) -> PiecewiseField {
        PiecewiseField {
            a: self.a,
            l: self.l,
            b: self.b,
            left: vec![self.left[k].clone()],
            right: vec![self.right[k].clone()],
        }
    }

    /// Maximum absolute value over 65 points per side (including the end points).
    pub fn sup_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for side in [Side::Minus, Side::Plus] {
            let (lo, hi) = self.bounds(side);
            for c in self.comps(side) {
                for j in 0..=64 {
                    m = m.max(c.eval(lo + (hi - lo) * j as f64 / 64.0).abs());
                }
            }
        }
        m
    }

    /// Applies `f` to every component derivative with a per-component factor.
    fn derivative_scaled(&self, factor: f64) -> PiecewiseField {
        let d = |cs: &[Component]| cs.iter().map(|c| c.derivative().scale(factor)).collect();
        PiecewiseField { a: self.a, l: self.l, b: self.b, left: d(&self.left), right: d(&self.right) }
    }

    /// `(e(b); e(a))` for a two-component field.
    pub fn trace(&self) -> Vector4<f64> {
        Vector4::new(self.at_b(0), self.at_b(1), self.at_a(0), self.at_a(1))
    }

    /// Boundary ports `R_ext (e(b); e(a))` of a two-component effort.
    pub fn boundary_ports(&self) -> BoundaryPorts {
        let v = rext_p1() * self.trace();
        BoundaryPorts { f_boundary: vec![v[0], v[1]], e_boundary: vec![v[2], v[3]] }
    }

    /// L2 norm, `(sum_k int |component k|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        integrate(&[self], |side, z| (0..self.ncomp()).map(|k| self.eval(side, k, z).powi(2)).sum()).sqrt()
    }
}

/// Quadrature nodes suited to the given fields on one side.
///
/// Grid fields use 4-point Gauss rules on every grid cell; polynomial fields
/// use a single 16-point rule when the combined degree allows exactness and a
/// composite 64-point rule otherwise.
pub fn quadrature_nodes(fields: &[&PiecewiseField], side: Side) -> Vec<(f64, f64)> {
    let (lo, hi) = fields[0].bounds(side);
    let mut total_degree = 4usize;
    for f in fields {
        let mut deg = 0usize;
        for c in f.comps(side) {
            match c.degree() {
                Some(d) => deg = deg.max(d),
                None => {
                    let z = c.grid_points().expect("grid component");
                    let rule = GaussLegendre::new(4);
                    let mut breaks = vec![lo];
                    breaks.extend(z.iter().copied().filter(|&p| p > lo && p < hi));
                    breaks.push(hi);
                    return breaks.windows(2).flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>()).collect();
                }
            }
        }
        total_degree += deg;
    }
    if total_degree <= 31 {
        GaussLegendre::default_rule().mapped(lo, hi).collect()
    } else {
        let panels = total_degree.div_ceil(64).max(2);
        let rule = GaussLegendre::rule64();
        let h = (hi - lo) / panels as f64;
        (0..panels).flat_map(|p| rule.mapped(lo + p as f64 * h, lo + (p + 1) as f64 * h).collect::<Vec<_>>()).collect()
    }
}

/// Integral over `[a, b]` of `f(side, z)`, using nodes suited to `fields`.
pub fn integrate<F: FnMut(Side, f64) -> f64>(fields: &[&PiecewiseField], mut f: F) -> f64 {
    let mut s = 0.0;
    for side in [Side::Minus, Side::Plus] {
        for (z, w) in quadrature_nodes(fields, side) {
            s += w * f(side, z);
        }
    }
    s
}

fn require_scalar(x: &PiecewiseField) -> Result<()> {
    if x.ncomp() != 1 {
        return Err(PhsError::DimensionMismatch(format!("expected a scalar field, got {} components", x.ncomp())));
    }
    Ok(())
}

/// `d_l x = -dx/dz` on each side, for `x` continuous at `l`.
pub fn apply_dl(x: &PiecewiseField) -> Result<PiecewiseField> {
    require_scalar(x)?;
    let jump = (x.left_limit(0) - x.right_limit(0)).abs();
    if jump > DL_CONTINUITY_TOL * x.sup_norm() {
        return Err(PhsError::DomainViolation(format!("d_l needs a field continuous at l; jump is {jump:.3e}")));
    }
    Ok(x.derivative_scaled(-1.0))
}

/// `d_l^* y = dy/dz` on each side; `y` may jump at `l`.
pub fn apply_dl_star(y: &PiecewiseField) -> Result<PiecewiseField> {
    require_scalar(y)?;
    Ok(y.derivative_scaled(1.0))
}

/// Checks `<d_l x, y> + [x y]_a^b - x(l)(y(l+) - y(l-)) = <x, d_l^* y>`.
pub fn duality_residual(x: &PiecewiseField, y: &PiecewiseField) -> Result<IdentityCheck> {
    let dx = apply_dl(x)?;
    let dy = apply_dl_star(y)?;
    let t1 = integrate(&[x, y], |s, z| dx.eval(s, 0, z) * y.eval(s, 0, z));
    let t4 = integrate(&[x, y], |s, z| x.eval(s, 0, z) * dy.eval(s, 0, z));
    let boundary = x.at_b(0) * y.at_b(0) - x.at_a(0) * y.at_a(0);
    let xl = 0.5 * (x.left_limit(0) + x.right_limit(0));
    let jump = xl * (y.right_limit(0) - y.left_limit(0));
    let lhs = t1 + boundary - jump;
    Ok(IdentityCheck {
        lhs,
        rhs: t4,
        residual: (lhs - t4).abs(),
        scale: [t1, t4, boundary, jump].iter().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

/// Interface position and passivity constant of `f_I = r e_I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub l: f64,
    pub r: f64,
}

impl InterfaceSpec {
    pub fn new(l: f64, r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !l.is_finite() {
            return Err(PhsError::InvalidInput(format!("interface needs finite l and r >= 0, got l = {l}, r = {r}")));
        }
        Ok(Self { l, r })
    }

    pub fn check_inside(&self, a: f64, b: f64) -> Result<()> {
        if !(a < self.l && self.l < b) {
            return Err(PhsError::DomainViolation(format!("interface l = {} not in ({a}, {b})", self.l)));
        }
        Ok(())
    }
}

/// Flow and effort at the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfacePorts {
    pub f_i: f64,
    pub e_i: f64,
}

/// `f_I = e2(l)`, `e_I = e1(l-) - e1(l+)`; `e2` must be continuous at `l`.
pub fn interface_ports(e: &PiecewiseField) -> Result<InterfacePorts> {
    if e.ncomp() != 2 {
        return Err(PhsError::DimensionMismatch("interface ports need a two-component effort".into()));
    }
    let (m, p) = (e.left_limit(1), e.right_limit(1));
    if (m - p).abs() > E2_CONTINUITY_TOL * e.sup_norm() {
        return Err(PhsError::DomainViolation(format!("e2 jumps at the interface: e2(l-) = {m}, e2(l+) = {p}")));
    }
    Ok(InterfacePorts { f_i: 0.5 * (m + p), e_i: e.left_limit(0) - e.right_limit(0) })
}

/// `J_l e = P1 de/dz` on each side.
pub fn apply_j(e: &PiecewiseField) -> Result<PiecewiseField> {
    if e.ncomp() != 2 {
        return Err(PhsError::DimensionMismatch("J_l acts on two-component fields".into()));
    }
    let side = |cs: &[Component]| vec![cs[1].derivative().scale(-1.0), cs[0].derivative().scale(-1.0)];
    Ok(PiecewiseField { a: e.a, l: e.l, b: e.b, left: side(&e.left), right: side(&e.right) })
}

/// Checks `<J e1, e2> + <e1, J e2>` against its boundary and interface terms.
pub fn skew_identity_residual(e1: &PiecewiseField, e2: &PiecewiseField) -> Result<IdentityCheck> {
    let j1 = apply_j(e1)?;
    let j2 = apply_j(e2)?;
    let dot = |f: &PiecewiseField, g: &PiecewiseField, s: Side, z: f64| {
        f.eval(s, 0, z) * g.eval(s, 0, z) + f.eval(s, 1, z) * g.eval(s, 1, z)
    };
    let t1 = integrate(&[e1, e2], |s, z| dot(&j1, e2, s, z));
    let t2 = integrate(&[e1, e2], |s, z| dot(e1, &j2, s, z));
    let p1 = linalg::p1();
    let form = |u: Vector2<f64>, v: Vector2<f64>| u.dot(&(p1 * v));
    let vb = form(Vector2::new(e1.at_b(0), e1.at_b(1)), Vector2::new(e2.at_b(0), e2.at_b(1)));
    let va = form(Vector2::new(e1.at_a(0), e1.at_a(1)), Vector2::new(e2.at_a(0), e2.at_a(1)));
    let f1 = 0.5 * (e1.left_limit(1) + e1.right_limit(1));
    let f2 = 0.5 * (e2.left_limit(1) + e2.right_limit(1));
    let i1 = f1 * (e2.right_limit(0) - e2.left_limit(0));
    let i2 = f2 * (e1.right_limit(0) - e1.left_limit(0));
    let lhs = t1 + t2;
    let rhs = vb - va + i1 + i2;
    Ok(IdentityCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale: [t1, t2, vb, va, i1, i2].iter().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

/// Boundary and interface power of an effort: `<e_d, f_d>` and `e_I f_I`.
pub fn port_powers(e: &PiecewiseField) -> Result<(f64, f64)> {
    let ports = interface_ports(e)?;
    Ok((e.boundary_ports().power(), ports.e_i * ports.f_i))
}

/// An element of `D(A)` or `D(A*)` represented by its effort `e = Q_l x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSample {
    /// Piecewise-cubic effort, coefficients in `z - l`.
    pub e: PiecewiseField,
    pub profile: CoefficientProfile,
    pub interface: InterfaceSpec,
    pub adjoint: bool,
}

impl DomainSample {
    /// State `x = Q^{-1} e` at a point of a side.
    pub fn x(&self, side: Side, z: f64) -> Vector2<f64> {
        let q = self.profile.q(side, z);
        q.lu().solve(&self.e.eval2(side, z)).expect("Q is positive definite")
    }

    /// The state as a field: polynomial for constant `Q`, Chebyshev otherwise.
    pub fn x_field(&self) -> PiecewiseField {
        let mut out = self.e.clone();
        for side in [Side::Minus, Side::Plus] {
            let sp = self.profile.side(side);
            let comps: Vec<Component> = if sp.is_constant() {
                let qi = sp.q(0.0).try_inverse().expect("Q is positive definite");
                let (p0, p1) = match (&self.e.comps(side)[0], &self.e.comps(side)[1]) {
                    (Component::Poly(p0), Component::Poly(p1)) => (p0.clone(), p1.clone()),
                    _ => unreachable!("domain samples are polynomial"),
                };
                vec![
                    Component::Poly(poly_lincomb(qi[(0, 0)], &p0, qi[(0, 1)], &p1)),
                    Component::Poly(poly_lincomb(qi[(1, 0)], &p0, qi[(1, 1)], &p1)),
                ]
            } else {
                let (lo, hi) = self.e.bounds(side);
                let pts = ChebSeries::points(lo, hi, 96);
                let vals: Vec<Vector2<f64>> = pts.iter().map(|&z| self.x(side, z)).collect();
                (0..2)
                    .map(|k| {
                        let v: Vec<f64> = vals.iter().map(|x| x[k]).collect();
                        Component::Cheb(ChebSeries::from_values(lo, hi, &v))
                    })
                    .collect()
            };
            match side {
                Side::Minus => out.left = comps,
                Side::Plus => out.right = comps,
            }
        }
        out
    }

    /// `<x, x>_{Q_l} = int e^T Q_l^{-1} e`.
    pub fn energy_norm_sq(&self) -> f64 {
        integrate(&[&self.e, &self.e], |s, z| self.e.eval2(s, z).dot(&self.x(s, z)))
    }

    /// `<A x, x>_{Q_l} = <J_l e, e>`.
    pub fn dissipation(&self) -> Result<f64> {
        let je = apply_j(&self.e)?;
        Ok(integrate(&[&self.e, &self.e], |s, z| je.eval2(s, z).dot(&self.e.eval2(s, z))))
    }
}

/// The boundary rows acting on `(e(b); e(a))` for `D(A)` or `D(A*)`.
pub fn boundary_rows(bc: &BoundaryConditionSpec, adjoint: bool) -> Result<Matrix2x4<f64>> {
    Ok(if adjoint { bc.adjoint_wb()? * rext_p1() } else { bc.trace_form() })
}

/// Draws an element of `D(A)` (or of `D(A*)` when `adjoint`) whose effort is
/// cubic on each side. The 16 coefficients are constrained by continuity of
/// `e2`, the interface relation `f_I = r e_I` (`f_I = -r e_I` for the
/// adjoint) and the two boundary rows; the remaining 12 are standard normal.
pub fn sample_domain_element(
    bc: &BoundaryConditionSpec,
    interface: &InterfaceSpec,
    profile: &CoefficientProfile,
    seed: u64,
    adjoint: bool,
) -> Result<DomainSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_domain_element_with(bc, interface, profile, &mut rng, adjoint)
}

/// [`sample_domain_element`] drawing from a caller-owned generator.
pub fn sample_domain_element_with<R: rand::Rng>(
    bc: &BoundaryConditionSpec,
    interface: &InterfaceSpec,
    profile: &CoefficientProfile,
    rng: &mut R,
    adjoint: bool,
) -> Result<DomainSample> {
    let (a, b, l) = (profile.a, profile.b, interface.l);
    interface.check_inside(a, b)?;
    let w = boundary_rows(bc, adjoint)?;
    let idx = |side: usize, comp: usize, k: usize| side * 8 + comp * 4 + k;
    let mut c = DMatrix::zeros(4, 16);
    c[(0, idx(0, 1, 0))] = 1.0;
    c[(0, idx(1, 1, 0))] = -1.0;
    let sigma = if adjoint { -1.0 } else { 1.0 };
    c[(1, idx(0, 1, 0))] = 1.0;
    c[(1, idx(0, 0, 0))] -= sigma * interface.r;
    c[(1, idx(1, 0, 0))] += sigma * interface.r;
    // Trace order (e1(b), e2(b), e1(a), e2(a)).
    let slots = [(1usize, 0usize, b), (1, 1, b), (0, 0, a), (0, 1, a)];
    for row in 0..2 {
        for (col, &(side, comp, z)) in slots.iter().enumerate() {
            for k in 0..4 {
                c[(2 + row, idx(side, comp, k))] += w[(row, col)] * (z - l).powi(k as i32);
            }
        }
    }
    if linalg::rank(&c, RANK_RTOL) < 4 {
        return Err(PhsError::Singular("domain constraints are rank deficient".into()));
    }
    let ns = linalg::null_space(&c, RANK_RTOL);
    let xi = DVector::from_fn(ns.ncols(), |_, _| StandardNormal.sample(rng));
    let coef = ns * xi;
    let comp =
        |side: usize, k: usize| Component::Poly(Polynomial::new(l, (0..4).map(|j| coef[idx(side, k, j)]).collect()));
    let e = PiecewiseField::new(a, l, b, vec![comp(0, 0), comp(0, 1)], vec![comp(1, 0), comp(1, 1)])?;
    Ok(DomainSample { e, profile: profile.clone(), interface: *interface, adjoint })
}

/// Residuals of the three constraint groups of a domain sample:
/// `e2` continuity, interface relation and boundary rows.
pub fn domain_constraint_residuals(s: &DomainSample, bc: &BoundaryConditionSpec) -> Result<[f64; 3]> {
    let e = &s.e;
    let cont = (e.left_limit(1) - e.right_limit(1)).abs();
    let ports = interface_ports(e)?;
    let sigma = if s.adjoint { -1.0 } else { 1.0 };
    let rel = (ports.f_i - sigma * s.interface.r * ports.e_i).abs();
    let bnd = (boundary_rows(bc, s.adjoint)? * e.trace()).norm();
    Ok([cont, rel, bnd])
}

/// Test function `phi(z, t) = psi((z - z0)/wz) psi((t - t0)/wt)` with the
/// compactly supported bump `psi(s) = (1 - s^2)^4` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpTest {
    pub z0: f64,
    pub t0: f64,
    pub wz: f64,
    pub wt: f64,
    pub amplitude: f64,
}

fn psi(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(4)
    }
}

fn dpsi(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        -8.0 * s * (1.0 - s * s).powi(3)
    }
}

impl BumpTest {
    pub fn phi(&self, z: f64, t: f64) -> f64 {
        self.amplitude * psi((z - self.z0) / self.wz) * psi((t - self.t0) / self.wt)
    }

    pub fn dphi_dt(&self, z: f64, t: f64) -> f64 {
        self.amplitude * psi((z - self.z0) / self.wz) * dpsi((t - self.t0) / self.wt) / self.wt
    }
}

/// Both sides of the weak transport law of the colour function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakTransportCheck {
    /// `int int c_l d(phi)/dt dz dt`.
    pub lhs: f64,
    /// `-int l'(t) phi(l(t), t) dt`.
    pub rhs: f64,
    pub residual: f64,
}

/// Checks `int int c_l (d_t phi + l' d_z phi) dz dt = 0`, in the reduced form
/// `int int c_l d_t phi dz dt = -int l'(t) phi(l(t), t) dt`, with 64-point
/// Gauss rules in `z` and `t`.
pub fn color_transport_weak_residual(
    path: &MovingPath,
    a: f64,
    b: f64,
    tau: f64,
    phi: &BumpTest,
) -> Result<WeakTransportCheck> {
    path.check_inside(a, b, 0.0, tau)?;
    if phi.z0 - phi.wz < a || phi.z0 + phi.wz > b || phi.t0 - phi.wt < 0.0 || phi.t0 + phi.wt > tau {
        return Err(PhsError::InvalidInput("test function support must lie in (a, b) x (0, tau)".into()));
    }
    let g = GaussLegendre::rule64();
    let (t_lo, t_hi) = (phi.t0 - phi.wt, phi.t0 + phi.wt);
    let z_lo = phi.z0 - phi.wz;
    let lhs = g.integrate(t_lo, t_hi, |t| {
        let z_hi = path.l(t).min(phi.z0 + phi.wz);
        if z_hi <= z_lo {
            0.0
        } else {
            g.integrate(z_lo, z_hi, |z| phi.dphi_dt(z, t))
        }
    });
    let rhs = -g.integrate(t_lo, t_hi, |t| path.ldot(t) * phi.phi(path.l(t), t));
    Ok(WeakTransportCheck { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::profile::SideProfile;
    use crate::boundary::{classify_conditions, transmission_line_wb};

    fn scalar(l: f64, left: Vec<f64>, right: Vec<f64>) -> PiecewiseField {
        PiecewiseField::from_poly_coeffs(-1.0, l, 1.0, &[left], &[right]).unwrap()
    }

    #[test]
    fn dl_of_constant_and_linear() {
        let one = scalar(0.2, vec![1.0], vec![1.0]);
        assert_eq!(apply_dl(&one).unwrap().sup_norm(), 0.0);
        let z = scalar(0.2, vec![0.2, 1.0], vec![0.2, 1.0]);
        let d = apply_dl(&z).unwrap();
        assert_eq!(d.eval(Side::Minus, 0, -0.5), -1.0);
        assert_eq!(d.eval(Side::Plus, 0, 0.5), -1.0);
        let step = scalar(0.2, vec![1.0], vec![2.0]);
        assert!(matches!(apply_dl(&step), Err(PhsError::DomainViolation(_))));
        assert_eq!(apply_dl_star(&step).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn grid_derivative_is_second_order() {
        let err = |n: usize| {
            let z: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let v: Vec<f64> = z.iter().map(|x| x.sin()).collect();
            let d = grid_derivative(&z, &v);
            z.iter().zip(&d).map(|(x, d)| (x.cos() - d).abs()).fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 3.5, "ratio {ratio}");
    }

    #[test]
    fn duality_with_step() {
        let x = scalar(0.3, vec![0.0, 1.0], vec![0.0, 1.0]);
        let y = scalar(0.3, vec![0.0], vec![1.0]);
        assert!(duality_residual(&x, &y).unwrap().residual < 1e-14);
    }

    #[test]
    fn interface_ports_definition() {
        let e =
            PiecewiseField::from_poly_coeffs(-1.0, 0.0, 1.0, &[vec![2.0], vec![3.0]], &[vec![5.0], vec![3.0]]).unwrap();
        let p = interface_ports(&e).unwrap();
        assert_eq!((p.f_i, p.e_i), (3.0, -3.0));
        let bad =
            PiecewiseField::from_poly_coeffs(-1.0, 0.0, 1.0, &[vec![2.0], vec![3.0]], &[vec![5.0], vec![4.0]]).unwrap();
        assert!(interface_ports(&bad).is_err());
    }

    #[test]
    fn samples_satisfy_constraints() {
        let profile = CoefficientProfile::new(
            -1.0,
            1.0,
            SideProfile::constant_diagonal(1.0, 2.0),
            SideProfile::constant_diagonal(3.0, 0.5),
        )
        .unwrap();
        let bc = classify_conditions(&transmission_line_wb(1.0), 1.0).unwrap();
        for r in [0.0, 1.0] {
            let spec = InterfaceSpec::new(0.1, r).unwrap();
            for adjoint in [false, true] {
                let s = sample_domain_element(&bc, &spec, &profile, 0, adjoint).unwrap();
                let res = domain_constraint_residuals(&s, &bc).unwrap();
                assert!(res.iter().all(|v| *v < 1e-10), "{res:?}");
                if r == 0.0 {
                    assert!(s.e.left_limit(1).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn weak_transport_for_linear_path() {
        let path = MovingPath::Linear { l0: -0.3, v: 0.5 };
        let phi = BumpTest { z0: 0.0, t0: 0.5, wz: 0.6, wt: 0.4, amplitude: 1.0 };
        let c = color_transport_weak_residual(&path, -1.0, 1.0, 1.0, &phi).unwrap();
        assert!(c.lhs.abs() > 1e-3);
        assert!(c.residual < 1e-6, "{c:?}");
    }
}
