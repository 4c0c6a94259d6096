//! Boundary-port machinery for formally skew-symmetric operators
//! `J = sum_i P_i d^i/dz^i`.
//!
//! The trace ordering is `(e(b), e'(b), ..., e(a), e'(a), ...)`. The boundary
//! ports are `(f; e) = R_ext trace` with `R_ext = [[P, -P], [I, I]] / sqrt(2)`,
//! so that `R_ext^T Sigma R_ext = diag(P, -P)`.
//!
//! Boundary conditions for the first-order interface system are given by a
//! `2 x 4` matrix `W_B` acting on `(f; e)`. Full-rank conditions with
//! `W_B Sigma W_B^T >= 0` factor as `W_B = S [I + V, I - V]`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{PhsError, Result};
use crate::linalg::{self, RANK_RTOL};
use crate::poly::Polynomial;
use crate::quadrature::GaussLegendre;

/// Coefficients `P_0, ..., P_N` of a formally skew-symmetric operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub n: usize,
    pub order: usize,
    pub p: Vec<DMatrix<f64>>,
}

impl OperatorSpec {
    /// Validates `P_i = (-1)^{i+1} P_i^T` and invertibility of `P_N`.
    pub fn new(p: Vec<DMatrix<f64>>) -> Result<Self> {
        if p.len() < 2 {
            return Err(PhsError::InvalidInput("need P_0 and at least P_1".into()));
        }
        let n = p[0].nrows();
        for (i, pi) in p.iter().enumerate() {
            if pi.shape() != (n, n) {
                return Err(PhsError::DimensionMismatch(format!("P_{i} is not {n}x{n}")));
            }
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            let dev = (pi - pi.transpose() * sign).norm();
            if dev > 1e-12 * pi.norm().max(1.0) {
                return Err(PhsError::InvalidInput(format!(
                    "P_{i} must be {} (deviation {dev:.3e})",
                    if sign > 0.0 { "symmetric" } else { "skew-symmetric" }
                )));
            }
        }
        let order = p.len() - 1;
        if linalg::rank(&p[order], RANK_RTOL) < n {
            return Err(PhsError::Singular(format!("P_{order} is not invertible")));
        }
        Ok(Self { n, order, p })
    }

    /// The first-order interface operator `P_1 d/dz` with `P_1 = [[0,-1],[-1,0]]`.
    pub fn interface_first_order() -> Self {
        let p1 = linalg::p1();
        Self::new(vec![DMatrix::zeros(2, 2), DMatrix::from_column_slice(2, 2, p1.as_slice())])
            .expect("P1 is symmetric and invertible")
    }

    /// Applies `J e = sum_i P_i e^{(i)}` at `z` to a polynomial vector field.
    pub fn apply(&self, e: &[Polynomial], z: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (i, pi) in self.p.iter().enumerate() {
            let d = DVector::from_fn(self.n, |k, _| e[k].eval_derivative(i, z));
            out += pi * d;
        }
        out
    }
}

/// Builds the symmetric block matrix `P` whose `(i, j)` block is
/// `(-1)^i P_{i+j+1}` when `i + j + 1 <= N` and zero otherwise.
pub fn build_p(spec: &OperatorSpec) -> Result<DMatrix<f64>> {
    let (n, big_n) = (spec.n, spec.order);
    let mut p = DMatrix::zeros(n * big_n, n * big_n);
    for i in 0..big_n {
        for j in 0..big_n {
            let k = i + j + 1;
            if k <= big_n {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                p.view_mut((i * n, j * n), (n, n)).copy_from(&(&spec.p[k] * sign));
            }
        }
    }
    if linalg::rank(&p, RANK_RTOL) < n * big_n {
        return Err(PhsError::Singular("boundary matrix P".into()));
    }
    Ok(p)
}

/// `R_ext = [[P, -P], [I, I]] / sqrt(2)`.
pub fn build_rext(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = p.nrows();
    if !p.is_square() || (p - p.transpose()).norm() > 1e-12 * p.norm().max(1.0) {
        return Err(PhsError::InvalidInput("P must be square and symmetric".into()));
    }
    if linalg::rank(p, RANK_RTOL) < k {
        return Err(PhsError::Singular("P".into()));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut r = DMatrix::zeros(2 * k, 2 * k);
    r.view_mut((0, 0), (k, k)).copy_from(&(p * s));
    r.view_mut((0, k), (k, k)).copy_from(&(p * -s));
    r.view_mut((k, 0), (k, k)).fill_with_identity();
    r.view_mut((k, k), (k, k)).fill_with_identity();
    r.view_mut((k, 0), (k, 2 * k)).scale_mut(s);
    Ok(r)
}

/// Residual of `R_ext^T Sigma R_ext = diag(P, -P)` in the Frobenius norm.
pub fn rext_factorization_residual(p: &DMatrix<f64>, rext: &DMatrix<f64>) -> f64 {
    let k = p.nrows();
    let mut target = DMatrix::zeros(2 * k, 2 * k);
    target.view_mut((0, 0), (k, k)).copy_from(p);
    target.view_mut((k, k), (k, k)).copy_from(&(-p));
    (rext.transpose() * linalg::sigma(k) * rext - target).norm()
}

/// The `R_ext` of the first-order interface operator.
pub fn rext_p1() -> Matrix4<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::new(
        0.0, -s, 0.0, s, //
        -s, 0.0, s, 0.0, //
        s, 0.0, s, 0.0, //
        0.0, s, 0.0, s,
    )
}

/// Boundary trace `(e(b), ..., e^{(N-1)}(b), e(a), ..., e^{(N-1)}(a))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector {
    pub values: DVector<f64>,
}

impl TraceVector {
    /// Trace of a polynomial vector field for an operator of order `order`.
    pub fn of_polynomials(e: &[Polynomial], order: usize, a: f64, b: f64) -> Self {
        let n = e.len();
        let mut v = DVector::zeros(2 * n * order);
        for (side, z) in [(0usize, b), (1usize, a)] {
            for d in 0..order {
                for k in 0..n {
                    v[side * n * order + d * n + k] = e[k].eval_derivative(d, z);
                }
            }
        }
        Self { values: v }
    }

    /// First-order trace `(e(b); e(a))` of a two-component effort.
    pub fn first_order(eb: [f64; 2], ea: [f64; 2]) -> Self {
        Self { values: DVector::from_vec(vec![eb[0], eb[1], ea[0], ea[1]]) }
    }
}

/// Boundary flow and effort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPorts {
    pub f_boundary: Vec<f64>,
    pub e_boundary: Vec<f64>,
}

impl BoundaryPorts {
    /// `<e, f>`, the boundary power.
    pub fn power(&self) -> f64 {
        self.f_boundary.iter().zip(&self.e_boundary).map(|(f, e)| f * e).sum()
    }
}

/// `(f; e) = R_ext trace`.
pub fn boundary_ports(trace: &TraceVector, rext: &DMatrix<f64>) -> Result<BoundaryPorts> {
    if rext.ncols() != trace.values.len() || !rext.is_square() {
        return Err(PhsError::DimensionMismatch(format!(
            "R_ext is {}x{} but the trace has length {}",
            rext.nrows(),
            rext.ncols(),
            trace.values.len()
        )));
    }
    let v = rext * &trace.values;
    let k = v.len() / 2;
    Ok(BoundaryPorts {
        f_boundary: v.rows(0, k).iter().cloned().collect(),
        e_boundary: v.rows(k, k).iter().cloned().collect(),
    })
}

/// Both sides of an integral identity and the absolute residual between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Magnitude of the largest individual term, for relative comparisons.
    pub scale: f64,
}

/// Compares `<J e1, e2> + <e1, J e2>` with `[(e1, ...)^T P (e2, ...)]_a^b`.
///
/// Integrals use the 16-node Gauss–Legendre rule, exact for the polynomial
/// degrees used here (integrand degree at most 31).
pub fn stokes_identity_residual(
    spec: &OperatorSpec,
    e1: &[Polynomial],
    e2: &[Polynomial],
    a: f64,
    b: f64,
) -> Result<IdentityCheck> {
    if e1.len() != spec.n || e2.len() != spec.n {
        return Err(PhsError::DimensionMismatch("field components".into()));
    }
    let g = GaussLegendre::default_rule();
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for (z, w) in g.mapped(a, b) {
        let v1 = DVector::from_fn(spec.n, |k, _| e1[k].eval(z));
        let v2 = DVector::from_fn(spec.n, |k, _| e2[k].eval(z));
        t1 += w * spec.apply(e1, z).dot(&v2);
        t2 += w * v1.dot(&spec.apply(e2, z));
    }
    let p = build_p(spec)?;
    let tr1 = TraceVector::of_polynomials(e1, spec.order, a, b).values;
    let tr2 = TraceVector::of_polynomials(e2, spec.order, a, b).values;
    let k = spec.n * spec.order;
    let rb = tr1.rows(0, k).dot(&(&p * tr2.rows(0, k)));
    let ra = tr1.rows(k, k).dot(&(&p * tr2.rows(k, k)));
    let lhs = t1 + t2;
    let rhs = rb - ra;
    Ok(IdentityCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale: t1.abs().max(t2.abs()).max(rb.abs()).max(ra.abs()),
    })
}

/// Verdict of [`classify_conditions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `rank W_B != 2`.
    InvalidRank,
    /// `W_B Sigma W_B^T` has a negative eigenvalue: the conditions can feed energy in.
    Indefinite,
    /// `W_B Sigma W_B^T >= 0`.
    Contraction,
    /// `W_B Sigma W_B^T = 0` and `r = 0`.
    UnitaryCandidate,
    /// `W_B Sigma W_B^T > 0`.
    ExponentiallyStableCandidate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::InvalidRank => "invalid_rank",
            Classification::Indefinite => "indefinite",
            Classification::Contraction => "contraction",
            Classification::UnitaryCandidate => "unitary_candidate",
            Classification::ExponentiallyStableCandidate => "exponentially_stable_candidate",
        }
    }

    /// True for every verdict under which the generator is dissipative.
    pub fn is_dissipative(&self) -> bool {
        matches!(
            self,
            Classification::Contraction
                | Classification::UnitaryCandidate
                | Classification::ExponentiallyStableCandidate
        )
    }
}

/// A boundary-condition matrix with its derived data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditionSpec {
    pub wb: Matrix2x4<f64>,
    pub r: f64,
    pub rank: usize,
    pub sigma_form: Matrix2<f64>,
    /// `S` and `V` when `W_1 + W_2` is invertible.
    pub s: Option<Matrix2<f64>>,
    pub v: Option<Matrix2<f64>>,
    /// Whether `V V^T <= I` (within 1e-10), when `V` exists.
    pub vvt_le_identity: Option<bool>,
    pub classification: Classification,
}

/// PSD threshold: minimum eigenvalue `>= -1e-10 max(1, |M|)`.
pub const PSD_TOL: f64 = 1e-10;
/// Strict definiteness threshold: minimum eigenvalue `>= 1e-10`.
pub const PD_TOL: f64 = 1e-10;

/// `W_B Sigma W_B^T`.
pub fn sigma_form(wb: &Matrix2x4<f64>) -> Matrix2<f64> {
    let w1 = wb.fixed_view::<2, 2>(0, 0);
    let w2 = wb.fixed_view::<2, 2>(0, 2);
    w1 * w2.transpose() + w2 * w1.transpose()
}

/// `S = (W1 + W2)/2`, `V = S^{-1}(W1 - W2)/2`, so that `W_B = S [I + V, I - V]`.
pub fn factor_wb(wb: &Matrix2x4<f64>) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let w1: Matrix2<f64> = wb.fixed_view::<2, 2>(0, 0).into_owned();
    let w2: Matrix2<f64> = wb.fixed_view::<2, 2>(0, 2).into_owned();
    let s = (w1 + w2) * 0.5;
    let sv = s.svd(false, false).singular_values;
    if sv.max() == 0.0 || sv.min() <= RANK_RTOL * sv.max() {
        return Err(PhsError::Singular("no S[I+V, I-V] factorization with invertible S (W1 + W2 is singular)".into()));
    }
    let sinv = s.try_inverse().ok_or_else(|| PhsError::Singular("S".into()))?;
    let v = sinv * (w1 - w2) * 0.5;
    Ok((s, v))
}

/// Reassembly residual `|W_B - S [I + V, I - V]|`.
pub fn reassembly_residual(wb: &Matrix2x4<f64>, s: &Matrix2<f64>, v: &Matrix2<f64>) -> f64 {
    let i = Matrix2::identity();
    let mut m = Matrix2x4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(s * (i + v)));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(s * (i - v)));
    (wb - m).norm()
}

/// Classifies `W_B` together with the interface passivity constant `r`.
pub fn classify_conditions(wb: &Matrix2x4<f64>, r: f64) -> Result<BoundaryConditionSpec> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(PhsError::InvalidInput(format!("interface constant r = {r} must be finite and >= 0")));
    }
    let wd = DMatrix::from_column_slice(2, 4, wb.as_slice());
    let rank = linalg::rank(&wd, RANK_RTOL);
    let sf = sigma_form(wb);
    let (s, v) = match factor_wb(wb) {
        Ok((s, v)) => (Some(s), Some(v)),
        Err(_) => (None, None),
    };
    let vvt_le_identity = v.map(|v| {
        let m = Matrix2::identity() - v * v.transpose();
        m.symmetric_eigen().eigenvalues.min() >= -1e-10
    });
    let classification = if rank != 2 {
        Classification::InvalidRank
    } else {
        let ev = sf.symmetric_eigen().eigenvalues;
        let norm = sf.norm();
        if ev.min() < -PSD_TOL * norm.max(1.0) {
            Classification::Indefinite
        } else if r == 0.0 && norm <= PSD_TOL {
            Classification::UnitaryCandidate
        } else if ev.min() >= PD_TOL {
            Classification::ExponentiallyStableCandidate
        } else {
            Classification::Contraction
        }
    };
    Ok(BoundaryConditionSpec { wb: *wb, r, rank, sigma_form: sf, s, v, vvt_le_identity, classification })
}

impl BoundaryConditionSpec {
    fn require_v(&self) -> Result<Matrix2<f64>> {
        self.v.ok_or_else(|| PhsError::InvalidInput("boundary conditions have no S[I+V, I-V] factorization".into()))
    }

    /// `W_B R_ext`, the conditions written on the trace `(e(b); e(a))`.
    pub fn trace_form(&self) -> Matrix2x4<f64> {
        self.wb * rext_p1()
    }

    /// Boundary conditions of the Hilbert-space adjoint, `[-(I + V^T), I - V^T]`.
    pub fn adjoint_wb(&self) -> Result<Matrix2x4<f64>> {
        let v = self.require_v()?;
        let i = Matrix2::identity();
        let mut m = Matrix2x4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-(i + v.transpose())));
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(i - v.transpose()));
        Ok(m)
    }

    /// Residual `|W_B (f; e)|` for given boundary ports.
    pub fn port_residual(&self, ports: &BoundaryPorts) -> f64 {
        let v = Vector4::new(ports.f_boundary[0], ports.f_boundary[1], ports.e_boundary[0], ports.e_boundary[1]);
        (self.wb * v).norm()
    }
}

/// Columns `[[I - V], [-I - V]]` spanning `ker W_B`.
pub fn kernel_basis(spec: &BoundaryConditionSpec) -> Result<Matrix4x2<f64>> {
    let v = spec.require_v()?;
    let i = Matrix2::identity();
    let mut k = Matrix4x2::zeros();
    k.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i - v));
    k.fixed_view_mut::<2, 2>(2, 0).copy_from(&(-i - v));
    Ok(k)
}

/// Converts conditions written on the trace `(e1(b), e2(b), e1(a), e2(a))`
/// into port form `W_B = W_trace R_ext^{-1}`.
pub fn wb_from_trace_form(w_trace: &Matrix2x4<f64>) -> Matrix2x4<f64> {
    // R_ext for P1 is orthogonal: R_ext^T R_ext = I.
    w_trace * rext_p1().transpose()
}

/// Coupled transmission lines: `V(a) = 0` and `V(b) = R_b I(b)`, as
/// `W_B = [[0, 1, 1, 0], [-R_b, 1, -1, R_b]] / sqrt(2)`.
pub fn transmission_line_wb(rb: f64) -> Matrix2x4<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2x4::new(0.0, s, s, 0.0, -rb * s, s, -s, rb * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_for_first_order_is_p1() {
        let spec = OperatorSpec::interface_first_order();
        let p = build_p(&spec).unwrap();
        assert_eq!(p, DMatrix::from_column_slice(2, 2, linalg::p1().as_slice()));
    }

    #[test]
    fn p_scalar_first_order() {
        let spec = OperatorSpec::new(vec![DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, 1.0)]).unwrap();
        assert_eq!(build_p(&spec).unwrap(), DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn p_second_order_block_pattern() {
        // n = 2, N = 2: P = [[P1, P2], [-P2, 0]] with P2 skew.
        let p1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.0]);
        let p2 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let spec = OperatorSpec::new(vec![DMatrix::zeros(2, 2), p1.clone(), p2.clone()]).unwrap();
        let p = build_p(&spec).unwrap();
        assert_eq!(p.view((0, 0), (2, 2)), p1);
        assert_eq!(p.view((0, 2), (2, 2)), p2);
        assert_eq!(p.view((2, 0), (2, 2)), -&p2);
        assert_eq!(p.view((2, 2), (2, 2)).norm(), 0.0);
        assert!((&p - p.transpose()).norm() < 1e-15);
    }

    #[test]
    fn scalar_second_order_with_symmetric_p2_is_rejected() {
        let r = OperatorSpec::new(vec![DMatrix::zeros(1, 1), DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, 1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn rext_matches_closed_form_and_factorizes() {
        let p = DMatrix::from_column_slice(2, 2, linalg::p1().as_slice());
        let r = build_rext(&p).unwrap();
        let closed = rext_p1();
        assert!((r - DMatrix::from_column_slice(4, 4, closed.as_slice())).norm() < 1e-15);
        let r = build_rext(&p).unwrap();
        assert!(rext_factorization_residual(&p, &r) < 1e-14);
    }

    #[test]
    fn rext_identity_case() {
        let r = build_rext(&DMatrix::identity(2, 2)).unwrap();
        let rtr = r.transpose() * &r;
        assert!((rtr - DMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn ports_of_simple_traces() {
        let r = build_rext(&DMatrix::from_column_slice(2, 2, linalg::p1().as_slice())).unwrap();
        let c = boundary_ports(&TraceVector::first_order([1.0, 0.0], [1.0, 0.0]), &r).unwrap();
        assert!(c.f_boundary.iter().all(|v| v.abs() < 1e-15));
        assert!((c.e_boundary[0] - 2f64.sqrt()).abs() < 1e-15);
        let d = boundary_ports(&TraceVector::first_order([1.0, 0.0], [0.0, 0.0]), &r).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.f_boundary[0]).abs() < 1e-15 && (d.f_boundary[1] + s).abs() < 1e-15);
        assert!((d.e_boundary[0] - s).abs() < 1e-15 && d.e_boundary[1].abs() < 1e-15);
        let z = boundary_ports(&TraceVector::first_order([0.0; 2], [0.0; 2]), &r).unwrap();
        assert_eq!(z.power(), 0.0);
    }

    #[test]
    fn stokes_hand_computed_example() {
        // e1 = (z, 0), e2 = (0, z) on [0, 1] with J = P1 d/dz:
        // J e1 = (0, -1), J e2 = (-1, 0), so the left side is -1/2 - 1/2 = -1,
        // and [e1^T P1 e2]_0^1 = -(1 * 1) = -1.
        let spec = OperatorSpec::interface_first_order();
        let e1 = vec![Polynomial::new(0.0, vec![0.0, 1.0]), Polynomial::zero()];
        let e2 = vec![Polynomial::zero(), Polynomial::new(0.0, vec![0.0, 1.0])];
        let c = stokes_identity_residual(&spec, &e1, &e2, 0.0, 1.0).unwrap();
        assert!((c.lhs + 1.0).abs() < 1e-14);
        assert!((c.rhs + 1.0).abs() < 1e-14);
        assert!(c.residual < 1e-12);
    }

    #[test]
    fn factor_identity_conditions() {
        let wb = Matrix2x4::new(1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0);
        let (s, v) = factor_wb(&wb).unwrap();
        assert_eq!(s, Matrix2::identity());
        assert_eq!(v, Matrix2::zeros());
        let bad = Matrix2x4::new(1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0);
        assert!(factor_wb(&bad).is_err());
    }

    #[test]
    fn transmission_line_sigma_form() {
        for rb in [0.5, 1.0, 2.0] {
            let spec = classify_conditions(&transmission_line_wb(rb), 1.0).unwrap();
            let expected = Matrix2::new(0.0, 0.0, 0.0, 2.0 * rb);
            assert!((spec.sigma_form - expected).norm() < 1e-14);
            assert_eq!(spec.classification, Classification::Contraction);
            let (s, v) = (spec.s.unwrap(), spec.v.unwrap());
            assert!(reassembly_residual(&spec.wb, &s, &v) < 1e-12);
            assert_eq!(spec.vvt_le_identity, Some(true));
            let k = kernel_basis(&spec).unwrap();
            assert!((spec.wb * k).norm() < 1e-12);
        }
    }

    #[test]
    fn transmission_line_trace_form() {
        let spec = classify_conditions(&transmission_line_wb(1.5), 1.0).unwrap();
        let expected = Matrix2x4::new(0.0, 0.0, 1.0, 0.0, -1.0, 1.5, 0.0, 0.0);
        assert!((spec.trace_form() - expected).norm() < 1e-14);
        assert!((wb_from_trace_form(&expected) - spec.wb).norm() < 1e-14);
    }

    #[test]
    fn classification_examples() {
        let ii = Matrix2x4::new(1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0);
        let spec = classify_conditions(&ii, 0.0).unwrap();
        assert_eq!(spec.sigma_form, Matrix2::identity() * 2.0);
        assert_eq!(spec.classification, Classification::ExponentiallyStableCandidate);
        let k = kernel_basis(&spec).unwrap();
        let expected = Matrix4x2::new(1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0);
        assert_eq!(k, expected);
        let rank1 = Matrix2x4::new(1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0);
        assert_eq!(classify_conditions(&rank1, 0.0).unwrap().classification, Classification::InvalidRank);
        assert!(classify_conditions(&ii, -1.0).is_err());
    }

    #[test]
    fn shorted_line_is_unitary() {
        let wt = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let spec = classify_conditions(&wb_from_trace_form(&wt), 0.0).unwrap();
        assert_eq!(spec.classification, Classification::UnitaryCandidate);
        let v = spec.v.unwrap();
        assert!((v * v.transpose() - Matrix2::identity()).norm() < 1e-12);
    }
}
