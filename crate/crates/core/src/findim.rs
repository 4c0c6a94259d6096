//! Finite-dimensional port-Hamiltonian core.
//!
//! Bond vectors, Dirac subspaces of the bond space `F x E = R^n x R^n`,
//! linear resistive relations and input-state-output systems
//! `x' = (J - R) grad H(x) + G u`, `y = G^T grad H(x)` integrated by the
//! implicit midpoint rule with a per-step passivity ledger.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{PhsError, Result};
use crate::linalg::{self, RANK_RTOL};

/// Tolerance for the plus pairing to count as zero on a basis pair.
pub const PAIRING_TOL: f64 = 1e-10;

/// A flow/effort pair in a bond space of dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondVector {
    pub f: DVector<f64>,
    pub e: DVector<f64>,
}

impl BondVector {
    pub fn new(f: DVector<f64>, e: DVector<f64>) -> Result<Self> {
        if f.len() != e.len() {
            return Err(PhsError::DimensionMismatch(format!(
                "flow has length {} but effort has length {}",
                f.len(),
                e.len()
            )));
        }
        Ok(Self { f, e })
    }

    pub fn from_slices(f: &[f64], e: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(f), DVector::from_column_slice(e))
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// The stacked column `(f; e)` of length `2n`.
    pub fn stacked(&self) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(2 * n, |i, _| if i < n { self.f[i] } else { self.e[i - n] })
    }

    fn from_stacked(v: &DVector<f64>) -> Self {
        let n = v.len() / 2;
        Self { f: v.rows(0, n).into_owned(), e: v.rows(n, n).into_owned() }
    }
}

/// The plus pairing `<e1, f2> + <e2, f1>`.
pub fn plus_pairing(b1: &BondVector, b2: &BondVector) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return Err(PhsError::DimensionMismatch(format!("bond dimensions {} and {}", b1.dim(), b2.dim())));
    }
    Ok(b1.e.dot(&b2.f) + b2.e.dot(&b1.f))
}

/// A subspace of the bond space `R^{2n}` given by spanning columns `(f; e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSubspace {
    pub ambient_dim: usize,
    pub basis: DMatrix<f64>,
}

impl LinearSubspace {
    /// Validates that the ambient dimension is even and the columns are independent.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let ambient_dim = basis.nrows();
        if ambient_dim % 2 != 0 {
            return Err(PhsError::InvalidInput(format!("ambient dimension {ambient_dim} is odd")));
        }
        if basis.ncols() > 0 && linalg::rank(&basis, RANK_RTOL) != basis.ncols() {
            return Err(PhsError::InvalidInput("degenerate basis: columns are linearly dependent".into()));
        }
        Ok(Self { ambient_dim, basis })
    }

    /// The zero subspace of `R^{2n}`.
    pub fn zero(n: usize) -> Self {
        Self { ambient_dim: 2 * n, basis: DMatrix::zeros(2 * n, 0) }
    }

    pub fn bond_dim(&self) -> usize {
        self.ambient_dim / 2
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The member with coefficient vector `c` in the given basis.
    pub fn member(&self, c: &DVector<f64>) -> BondVector {
        BondVector::from_stacked(&(&self.basis * c))
    }

    pub fn basis_vector(&self, i: usize) -> BondVector {
        BondVector::from_stacked(&self.basis.column(i).into_owned())
    }
}

/// Outcome of [`dirac_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DiracVerdict {
    pub is_dirac: bool,
    pub dim_ok: bool,
    pub pairing_vanishes: bool,
}

/// Tests the characterization `dim D = n` and `<<b1, b2>> = 0` on all basis pairs.
pub fn dirac_check(d: &LinearSubspace) -> Result<DiracVerdict> {
    if d.ambient_dim % 2 != 0 {
        return Err(PhsError::InvalidInput("ambient dimension is odd".into()));
    }
    if d.dim() > 0 && linalg::rank(&d.basis, RANK_RTOL) != d.dim() {
        return Err(PhsError::InvalidInput("degenerate basis".into()));
    }
    let dim_ok = d.dim() == d.bond_dim();
    let mut pairing_vanishes = true;
    for i in 0..d.dim() {
        let bi = d.basis_vector(i);
        let ni = d.basis.column(i).norm();
        for j in i..d.dim() {
            let bj = d.basis_vector(j);
            let nj = d.basis.column(j).norm();
            if plus_pairing(&bi, &bj)?.abs() > PAIRING_TOL * ni * nj {
                pairing_vanishes = false;
            }
        }
    }
    Ok(DiracVerdict { is_dirac: dim_ok && pairing_vanishes, dim_ok, pairing_vanishes })
}

fn check_skew(j: &DMatrix<f64>, tol: f64) -> Result<()> {
    if !j.is_square() {
        return Err(PhsError::InvalidInput("J must be square".into()));
    }
    let asym = (j + j.transpose()).norm();
    if asym > tol * j.norm().max(1.0) {
        return Err(PhsError::InvalidInput(format!("matrix is not skew-symmetric: |J + J^T| = {asym:.3e}")));
    }
    Ok(())
}

/// The graph Dirac structure `span{(-J e_i, e_i)}` of a skew-symmetric map.
pub fn graph_dirac(j: &DMatrix<f64>) -> Result<LinearSubspace> {
    check_skew(j, 1e-12)?;
    let n = j.nrows();
    let mut basis = DMatrix::zeros(2 * n, n);
    basis.view_mut((0, 0), (n, n)).copy_from(&(-j));
    basis.view_mut((n, 0), (n, n)).fill_with_identity();
    LinearSubspace::new(basis)
}

/// The separable Dirac structure `K x K^perp` for a subspace `K` of the flow space.
///
/// `k` holds spanning columns of `K` in `R^n` (possibly zero columns).
pub fn separable_dirac(k: &DMatrix<f64>) -> Result<LinearSubspace> {
    let n = k.nrows();
    let kb = if k.ncols() == 0 || linalg::rank(k, RANK_RTOL) == 0 {
        DMatrix::zeros(n, 0)
    } else {
        let svd = k.clone().svd(true, false);
        let u = svd.u.expect("requested U");
        let smax = svd.singular_values.max();
        let cols: Vec<_> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > RANK_RTOL * smax)
            .map(|i| u.column(i).into_owned())
            .collect();
        DMatrix::from_columns(&cols)
    };
    let kperp = if kb.ncols() == 0 { DMatrix::identity(n, n) } else { linalg::orthogonal_complement(&kb, RANK_RTOL) };
    let mut basis = DMatrix::zeros(2 * n, kb.ncols() + kperp.ncols());
    basis.view_mut((0, 0), (n, kb.ncols())).copy_from(&kb);
    basis.view_mut((n, kb.ncols()), (n, kperp.ncols())).copy_from(&kperp);
    LinearSubspace::new(basis)
}

/// A linear resistive relation `Rf f + Re e = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistiveRelation {
    pub rf: DMatrix<f64>,
    pub re: DMatrix<f64>,
}

/// Outcome of [`resistive_check`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResistiveVerdict {
    /// `Rf Re^T` is symmetric and positive semidefinite.
    pub symmetric_psd: bool,
    /// `rank [Rf Re] = m`.
    pub full_rank: bool,
    /// Largest `<e, f>` over sampled relation members, normalized by `|f||e|`.
    pub max_power: f64,
    pub pass: bool,
}

/// Checks the two defining conditions of a resistive relation and certifies
/// `<e_R, f_R> <= 0` on members of the relation.
pub fn resistive_check(rel: &ResistiveRelation) -> Result<ResistiveVerdict> {
    let m = rel.rf.nrows();
    if !rel.rf.is_square() || rel.re.shape() != rel.rf.shape() {
        return Err(PhsError::DimensionMismatch("Rf and Re must be equal square matrices".into()));
    }
    let prod = &rel.rf * rel.re.transpose();
    let scale = prod.norm().max(1.0);
    let sym_ok = (&prod - prod.transpose()).norm() <= 1e-12 * scale;
    let psd_ok = linalg::sym_eigenvalues(&prod).first().map_or(true, |&l| l >= -1e-12 * scale);
    let mut stack = DMatrix::zeros(m, 2 * m);
    stack.view_mut((0, 0), (m, m)).copy_from(&rel.rf);
    stack.view_mut((0, m), (m, m)).copy_from(&rel.re);
    let full_rank = linalg::rank(&stack, RANK_RTOL) == m;
    // Members of the relation are the kernel of [Rf Re]; sample basis vectors
    // and pairwise sums, which span and probe the quadratic form.
    let ker = linalg::null_space(&stack, RANK_RTOL);
    let mut max_power = f64::NEG_INFINITY;
    let mut probe = |v: DVector<f64>| {
        let f = v.rows(0, m);
        let e = v.rows(m, m);
        let nrm = (f.norm() * e.norm()).max(f64::MIN_POSITIVE);
        max_power = max_power.max(e.dot(&f) / nrm);
    };
    for i in 0..ker.ncols() {
        probe(ker.column(i).into_owned());
        for j in i + 1..ker.ncols() {
            probe(ker.column(i) + ker.column(j));
            probe(ker.column(i) - ker.column(j));
        }
    }
    if ker.ncols() == 0 {
        max_power = 0.0;
    }
    let power_ok = max_power <= 1e-12;
    Ok(ResistiveVerdict {
        symmetric_psd: sym_ok && psd_ok,
        full_rank,
        max_power,
        pass: sym_ok && psd_ok && full_rank && power_ok,
    })
}

/// Scalar energy function.
pub type EnergyFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
/// Gradient of an energy function.
pub type GradientFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Time-dependent input signal.
pub type InputFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// An input-state-output port-Hamiltonian system with constant structure matrices.
#[derive(Clone)]
pub struct IsoSystem {
    pub j: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub hamiltonian: EnergyFn,
    pub grad: GradientFn,
}

impl std::fmt::Debug for IsoSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IsoSystem").field("j", &self.j).field("r", &self.r).field("g", &self.g).finish_non_exhaustive()
    }
}

impl IsoSystem {
    /// Validates `J` skew, `R` symmetric positive semidefinite and the shapes.
    pub fn new(
        j: DMatrix<f64>,
        r: DMatrix<f64>,
        g: DMatrix<f64>,
        hamiltonian: EnergyFn,
        grad: GradientFn,
    ) -> Result<Self> {
        let n = j.nrows();
        check_skew(&j, 1e-12)?;
        if r.shape() != (n, n) || g.nrows() != n {
            return Err(PhsError::DimensionMismatch("J, R and G must share the state dimension".into()));
        }
        let rn = r.norm();
        if (&r - r.transpose()).norm() > 1e-12 * rn.max(1.0) {
            return Err(PhsError::InvalidInput("R is not symmetric".into()));
        }
        if let Some(&l) = linalg::sym_eigenvalues(&r).first() {
            if l < -1e-12 * rn {
                return Err(PhsError::InvalidInput(format!("R is not positive semidefinite (min eigenvalue {l:.3e})")));
            }
        }
        Ok(Self { j, r, g, hamiltonian, grad })
    }

    /// Linear system with quadratic energy `H = x^T Q x / 2`.
    pub fn quadratic(j: DMatrix<f64>, r: DMatrix<f64>, g: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        let q1 = q.clone();
        let q2 = q;
        Self::new(
            j,
            r,
            g,
            Arc::new(move |x: &DVector<f64>| 0.5 * x.dot(&(&q1 * x))),
            Arc::new(move |x: &DVector<f64>| &q2 * x),
        )
    }

    pub fn state_dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.g.ncols()
    }

    fn vector_field(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        (&self.j - &self.r) * (self.grad)(x) + &self.g * u
    }

    /// Largest relative deviation between `grad` and central differences of `H` at `x`.
    pub fn gradient_consistency(&self, x: &DVector<f64>) -> f64 {
        let g = (self.grad)(x);
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            let h = 1e-6 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = ((self.hamiltonian)(&xp) - (self.hamiltonian)(&xm)) / (2.0 * h);
            let scale = g.amax().max(1.0);
            worst = worst.max((fd - g[i]).abs() / scale);
        }
        worst
    }
}

/// Mass-spring oscillator with `H = k q^2 / 2 + p^2 / (2 m)`.
pub fn mass_spring(mass: f64, stiffness: f64) -> Result<IsoSystem> {
    if mass <= 0.0 || stiffness <= 0.0 {
        return Err(PhsError::InvalidInput("mass and stiffness must be positive".into()));
    }
    let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let q = DMatrix::from_diagonal(&DVector::from_vec(vec![stiffness, 1.0 / mass]));
    IsoSystem::quadratic(j, DMatrix::zeros(2, 2), DMatrix::zeros(2, 1), q)
}

/// Parameters of the magnetically levitated ball.
///
/// The inductance law is `L(q) = l0 / (1 + (q / q0)^2)`, a smooth positive
/// profile that decays with the distance from the coil.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LevitatedBall {
    pub mass: f64,
    pub gravity: f64,
    pub coil_resistance: f64,
    pub l0: f64,
    pub q0: f64,
}

impl Default for LevitatedBall {
    fn default() -> Self {
        Self { mass: 0.1, gravity: 9.81, coil_resistance: 1.0, l0: 0.5, q0: 0.2 }
    }
}

impl LevitatedBall {
    pub fn inductance(&self, q: f64) -> f64 {
        self.l0 / (1.0 + (q / self.q0).powi(2))
    }

    fn inductance_derivative(&self, q: f64) -> f64 {
        let s = 1.0 + (q / self.q0).powi(2);
        -self.l0 * 2.0 * q / (self.q0 * self.q0 * s * s)
    }

    /// The system with state `(q, p, phi)`, `H = m g q + p^2/(2m) + phi^2/(2 L(q))`,
    /// `R = diag(0, 0, R_c)` and `G = (0, 0, 1)^T` (input voltage, output current).
    pub fn system(&self) -> Result<IsoSystem> {
        if self.mass <= 0.0 || self.l0 <= 0.0 || self.q0 <= 0.0 || self.coil_resistance < 0.0 {
            return Err(PhsError::InvalidInput("levitated-ball parameters out of range".into()));
        }
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let mut r = DMatrix::zeros(3, 3);
        r[(2, 2)] = self.coil_resistance;
        let g = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        let p1 = *self;
        let p2 = *self;
        IsoSystem::new(
            j,
            r,
            g,
            Arc::new(move |x: &DVector<f64>| {
                p1.mass * p1.gravity * x[0] + x[1] * x[1] / (2.0 * p1.mass) + x[2] * x[2] / (2.0 * p1.inductance(x[0]))
            }),
            Arc::new(move |x: &DVector<f64>| {
                let l = p2.inductance(x[0]);
                let dl = p2.inductance_derivative(x[0]);
                DVector::from_vec(vec![
                    p2.mass * p2.gravity - x[2] * x[2] * dl / (2.0 * l * l),
                    x[1] / p2.mass,
                    x[2] / l,
                ])
            }),
        )
    }
}

/// Output of [`iso_simulate`].
#[derive(Debug, Clone)]
pub struct IsoTrajectory {
    pub t: Vec<f64>,
    pub x: Vec<DVector<f64>>,
    /// Output `y = G^T grad H` evaluated at each step's midpoint state.
    pub y: Vec<DVector<f64>>,
    pub h: Vec<f64>,
    /// `dt * u^T y` per step (midpoint quadrature of the supplied energy).
    pub supplied_power: Vec<f64>,
    /// Per-step `H(x_{k+1}) - H(x_k) - dt u^T y`; passivity requires `<= tol`.
    pub ledger: Vec<f64>,
    /// True iff every ledger entry satisfies the passivity bound.
    pub ledger_ok: bool,
}

/// Newton iteration limit for the midpoint solve.
pub const NEWTON_MAX_ITER: usize = 50;
/// Newton step tolerance (relative to `1 + |x|`).
pub const NEWTON_TOL: f64 = 1e-12;

/// Integrates an [`IsoSystem`] with the implicit midpoint rule.
///
/// Each step solves `x1 = x0 + dt f((x0 + x1)/2, t + dt/2)` by Newton's method
/// with a finite-difference Jacobian. The passivity ledger compares the energy
/// increment with `dt u^T y` at the midpoint, with tolerance `1e-8 (1 + |H|)`.
pub fn iso_simulate(sys: &IsoSystem, x0: &DVector<f64>, u: InputFn, dt: f64, t_end: f64) -> Result<IsoTrajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(PhsError::InvalidInput("dt must be positive and t_end nonnegative".into()));
    }
    let n = sys.state_dim();
    if x0.len() != n {
        return Err(PhsError::DimensionMismatch("initial state".into()));
    }
    let consistency = sys.gradient_consistency(x0);
    if consistency > 1e-5 {
        return Err(PhsError::InvalidInput(format!(
            "gradient inconsistent with H at x0 (relative error {consistency:.3e})"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let mut traj = IsoTrajectory {
        t: vec![0.0],
        x: vec![x0.clone()],
        y: Vec::with_capacity(steps),
        h: vec![(sys.hamiltonian)(x0)],
        supplied_power: Vec::with_capacity(steps),
        ledger: Vec::with_capacity(steps),
        ledger_ok: true,
    };
    let mut x = x0.clone();
    for k in 0..steps {
        let t = k as f64 * dt;
        let um = u(t + 0.5 * dt);
        let x1 = midpoint_newton(sys, &x, &um, dt).map_err(|e| match e {
            PhsError::NoConvergence(msg) => PhsError::NoConvergence(format!("step {k}: {msg}")),
            other => other,
        })?;
        let xm = (&x + &x1) * 0.5;
        let ym = sys.g.transpose() * (sys.grad)(&xm);
        let supplied = dt * um.dot(&ym);
        let h0 = *traj.h.last().unwrap();
        let h1 = (sys.hamiltonian)(&x1);
        let excess = h1 - h0 - supplied;
        if excess > 1e-8 * (1.0 + h1.abs()) {
            traj.ledger_ok = false;
        }
        traj.t.push(t + dt);
        traj.x.push(x1.clone());
        traj.y.push(ym);
        traj.h.push(h1);
        traj.supplied_power.push(supplied);
        traj.ledger.push(excess);
        x = x1;
    }
    Ok(traj)
}

fn midpoint_newton(sys: &IsoSystem, x0: &DVector<f64>, u: &DVector<f64>, dt: f64) -> Result<DVector<f64>> {
    let n = x0.len();
    let residual = |x1: &DVector<f64>| -> DVector<f64> {
        let xm = (x0 + x1) * 0.5;
        x1 - x0 - sys.vector_field(&xm, u) * dt
    };
    let mut x1 = x0 + sys.vector_field(x0, u) * dt;
    for _ in 0..NEWTON_MAX_ITER {
        let r = residual(&x1);
        if r.amax() == 0.0 {
            return Ok(x1);
        }
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-7 * x1[j].abs().max(1.0);
            let mut xp = x1.clone();
            xp[j] += h;
            let mut xm = x1.clone();
            xm[j] -= h;
            let col = (residual(&xp) - residual(&xm)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let delta = jac.lu().solve(&(-&r)).ok_or_else(|| PhsError::Singular("midpoint Jacobian".into()))?;
        x1 += &delta;
        if delta.norm() <= NEWTON_TOL * (1.0 + x1.norm()) {
            return Ok(x1);
        }
    }
    Err(PhsError::NoConvergence(format!("implicit midpoint Newton did not converge in {NEWTON_MAX_ITER} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_pairing_examples() {
        let b1 = BondVector::from_slices(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let b2 = BondVector::from_slices(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(plus_pairing(&b1, &b1).unwrap(), 0.0);
        assert_eq!(plus_pairing(&b1, &b2).unwrap(), 2.0);
        let b3 = BondVector::from_slices(&[1.0], &[1.0]).unwrap();
        assert!(plus_pairing(&b1, &b3).is_err());
    }

    #[test]
    fn graph_of_zero_map() {
        let d = graph_dirac(&DMatrix::zeros(2, 2)).unwrap();
        let expected = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(d.basis, expected);
        assert!(dirac_check(&d).unwrap().is_dirac);
    }

    #[test]
    fn non_skew_graph_rejected() {
        assert!(graph_dirac(&DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn transformer_complement() {
        let k = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let d = separable_dirac(&k).unwrap();
        let perp = d.basis.view((2, 1), (2, 1)).into_owned();
        // Parallel to (-2, 1).
        assert!((perp[0] * 1.0 - perp[1] * (-2.0)).abs() < 1e-12);
        assert!(dirac_check(&d).unwrap().is_dirac);
    }

    #[test]
    fn full_flow_space_has_zero_complement() {
        let d = separable_dirac(&DMatrix::identity(3, 3)).unwrap();
        assert!(d.basis.view((3, 0), (3, 3)).norm() == 0.0);
        assert!(dirac_check(&d).unwrap().is_dirac);
    }

    #[test]
    fn zero_subspace_is_not_dirac() {
        let v = dirac_check(&LinearSubspace::zero(2)).unwrap();
        assert!(!v.is_dirac && !v.dim_ok && v.pairing_vanishes);
    }

    #[test]
    fn resistive_examples() {
        let damper = ResistiveRelation { rf: DMatrix::from_element(1, 1, 1.0), re: DMatrix::from_element(1, 1, 1.0) };
        assert!(resistive_check(&damper).unwrap().pass);
        let zero_flow = ResistiveRelation { rf: DMatrix::identity(2, 2), re: DMatrix::zeros(2, 2) };
        assert!(resistive_check(&zero_flow).unwrap().pass);
        let deficient = ResistiveRelation {
            rf: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]),
            re: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]),
        };
        let v = resistive_check(&deficient).unwrap();
        assert!(!v.full_rank && !v.pass);
    }

    #[test]
    fn equilibrium_stays_put() {
        let sys = mass_spring(1.0, 1.0).unwrap();
        let traj = iso_simulate(&sys, &DVector::zeros(2), Arc::new(|_| DVector::zeros(1)), 0.01, 1.0).unwrap();
        assert!(traj.x.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn levitated_ball_gradient_is_consistent() {
        let sys = LevitatedBall::default().system().unwrap();
        let x = DVector::from_vec(vec![0.05, 0.01, 0.3]);
        assert!(sys.gradient_consistency(&x) < 1e-7);
    }
}
