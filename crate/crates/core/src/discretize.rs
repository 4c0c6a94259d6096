//! Structure-preserving staggered discretization of the interface system.
//!
//! Each side carries `x1` at cell centres and `x2` at nodes, including the
//! nodes at `a`, `l-`, `l+` and `b`. The discrete system reads
//! `W dx/dt = K e + F eps` with `e = Q x`, diagonal weights `W` (cell width,
//! half a cell at end nodes), the difference operator `K` and the port efforts
//! `eps` supplied at end nodes:
//!
//! * interface: `eps(l-) = e_I/2`, `eps(l+) = -e_I/2` with `e_I = f_I/r` and
//!   `f_I` the mean of the two interface values of `e2`;
//! * boundary: `eps = (e1(b), e1(a))` solves the boundary rows in the least
//!   squares sense, and the remaining rows restrict `(e2(b), e2(a))`.
//!
//! Constrained node values are eliminated through a basis `Z` of the
//! admissible states, giving the reduced generator
//! `A_h = (Z^T M Z)^{-1} Z^T Q (K + F E) Q Z` with `M = W Q`. The energy
//! `H_h = x^T M x / 2` then satisfies `dH_h/dt = <e_d, f_d> - e_I f_I`
//! exactly.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix2x4, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::profile::{CoefficientProfile, Side};
use crate::boundary::{BoundaryConditionSpec, Classification};
use crate::error::{PhsError, Result};
use crate::interface_ops::{Component, InterfaceSpec, PiecewiseField};
use crate::linalg::{null_space, rank, RANK_RTOL};

/// Smallest cell count per side.
pub const MIN_CELLS: usize = 4;
/// Smallest admissible cell width.
pub const MIN_CELL_WIDTH: f64 = 1e-12;

/// Uniform cells on `[a, l]` and `[l, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaggeredGrid {
    pub a: f64,
    pub l: f64,
    pub b: f64,
    pub n_minus: usize,
    pub n_plus: usize,
}

impl StaggeredGrid {
    pub fn h(&self, side: Side) -> f64 {
        match side {
            Side::Minus => (self.l - self.a) / self.n_minus as f64,
            Side::Plus => (self.b - self.l) / self.n_plus as f64,
        }
    }

    pub fn cells(&self, side: Side) -> usize {
        match side {
            Side::Minus => self.n_minus,
            Side::Plus => self.n_plus,
        }
    }

    fn start(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.a,
            Side::Plus => self.l,
        }
    }

    pub fn center(&self, side: Side, i: usize) -> f64 {
        self.start(side) + (i as f64 + 0.5) * self.h(side)
    }

    pub fn node(&self, side: Side, j: usize) -> f64 {
        if j == self.cells(side) {
            // Exact end points avoid rounding drift at l and b.
            return match side {
                Side::Minus => self.l,
                Side::Plus => self.b,
            };
        }
        self.start(side) + j as f64 * self.h(side)
    }

    /// Largest cell width.
    pub fn h_max(&self) -> f64 {
        self.h(Side::Minus).max(self.h(Side::Plus))
    }

    /// Number of unreduced degrees of freedom.
    pub fn full_dim(&self) -> usize {
        2 * self.n_minus + 2 * self.n_plus + 2
    }

    /// Index of `x1` in cell `i` of a side.
    pub fn x1(&self, side: Side, i: usize) -> usize {
        match side {
            Side::Minus => i,
            Side::Plus => 2 * self.n_minus + self.n_plus + 2 + i,
        }
    }

    /// Index of `x2` at node `j` of a side.
    pub fn x2(&self, side: Side, j: usize) -> usize {
        match side {
            Side::Minus => self.n_minus + j,
            Side::Plus => 2 * self.n_minus + 1 + j,
        }
    }

    /// `(side, component, position)` of every unreduced degree of freedom.
    pub fn dofs(&self) -> Vec<(Side, usize, f64)> {
        let mut out = vec![(Side::Minus, 0, 0.0); self.full_dim()];
        for side in [Side::Minus, Side::Plus] {
            for i in 0..self.cells(side) {
                out[self.x1(side, i)] = (side, 0, self.center(side, i));
            }
            for j in 0..=self.cells(side) {
                out[self.x2(side, j)] = (side, 1, self.node(side, j));
            }
        }
        out
    }

    /// Quadrature weight of every unreduced degree of freedom.
    pub fn weights(&self) -> DVector<f64> {
        let mut w = DVector::zeros(self.full_dim());
        for side in [Side::Minus, Side::Plus] {
            let (h, n) = (self.h(side), self.cells(side));
            for i in 0..n {
                w[self.x1(side, i)] = h;
            }
            for j in 0..=n {
                w[self.x2(side, j)] = if j == 0 || j == n { 0.5 * h } else { h };
            }
        }
        w
    }
}

/// Validates and builds a staggered grid.
pub fn build_grid(a: f64, l: f64, b: f64, n_minus: usize, n_plus: usize) -> Result<StaggeredGrid> {
    if !(a < l && l < b) {
        return Err(PhsError::InvalidInput(format!("need a < l < b, got {a}, {l}, {b}")));
    }
    if n_minus < MIN_CELLS || n_plus < MIN_CELLS {
        return Err(PhsError::InvalidInput(format!(
            "need at least {MIN_CELLS} cells per side, got {n_minus} and {n_plus}"
        )));
    }
    let g = StaggeredGrid { a, l, b, n_minus, n_plus };
    let hmin = g.h(Side::Minus).min(g.h(Side::Plus));
    if hmin < MIN_CELL_WIDTH {
        return Err(PhsError::InvalidInput(format!("cell width {hmin:.3e} below {MIN_CELL_WIDTH:e}")));
    }
    Ok(g)
}

/// Port values of a discrete state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortSample {
    /// Canonical boundary flows `f_d`.
    pub f_boundary: [f64; 2],
    pub e_boundary: [f64; 2],
    pub f_i: f64,
    pub e_i: f64,
    /// `(e1(a), e2(a))`.
    pub trace_a: [f64; 2],
    /// `(e1(b), e2(b))`.
    pub trace_b: [f64; 2],
}

impl PortSample {
    /// `<e_d, f_d> - e_I f_I`.
    pub fn power(&self) -> f64 {
        self.boundary_power() - self.e_i * self.f_i
    }

    /// `e1(a) e2(a) - e1(b) e2(b)`.
    pub fn boundary_power(&self) -> f64 {
        self.trace_a[0] * self.trace_a[1] - self.trace_b[0] * self.trace_b[1]
    }
}

/// A sparse column of `Z`.
type SparseCol = Vec<(usize, f64)>;

/// The reduced discrete generator on a fixed grid.
#[derive(Debug, Clone)]
pub struct DiscreteGenerator {
    pub grid: StaggeredGrid,
    pub interface: InterfaceSpec,
    pub classification: Classification,
    /// Reduced generator `A_h`.
    pub a_h: DMatrix<f64>,
    /// Diagonal of the reduced mass `Z^T M Z`.
    pub mass: DVector<f64>,
    /// `Q` at every unreduced degree of freedom.
    pub q_diag: DVector<f64>,
    /// `W` at every unreduced degree of freedom.
    pub weights: DVector<f64>,
    z_cols: Vec<SparseCol>,
    /// `(eps_b, eps_a) = E (e2(b), e2(a))`.
    eps_map: nalgebra::Matrix2<f64>,
}

fn diag_q(profile: &CoefficientProfile, grid: &StaggeredGrid) -> DVector<f64> {
    let mut q = DVector::zeros(grid.full_dim());
    for (k, (side, comp, z)) in grid.dofs().into_iter().enumerate() {
        q[k] = profile.q(side, z)[(comp, comp)];
    }
    q
}

/// Port-effort map and the admissible `(e2(b), e2(a))` directions of a
/// boundary specification.
fn boundary_closure(bc: &BoundaryConditionSpec) -> Result<(nalgebra::Matrix2<f64>, DMatrix<f64>)> {
    let w: Matrix2x4<f64> = bc.trace_form();
    let w_eps = DMatrix::from_fn(2, 2, |i, j| w[(i, 2 * j)]);
    let w_e2 = DMatrix::from_fn(2, 2, |i, j| w[(i, 2 * j + 1)]);
    let pinv = w_eps
        .clone()
        .pseudo_inverse(1e-12 * w_eps.norm().max(1.0))
        .map_err(|e| PhsError::Singular(format!("boundary pseudo-inverse: {e}")))?;
    let e = -(&pinv * &w_e2);
    let left_null = null_space(&w_eps.transpose(), RANK_RTOL);
    let admissible = if left_null.ncols() == 0 {
        DMatrix::identity(2, 2)
    } else {
        let c = left_null.transpose() * &w_e2;
        if rank(&c, RANK_RTOL) < c.nrows() {
            return Err(PhsError::Singular("boundary rows do not constrain e2 consistently".into()));
        }
        null_space(&c, RANK_RTOL)
    };
    Ok((nalgebra::Matrix2::new(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]), admissible))
}

/// Assembles the reduced generator for a diagonal coefficient profile.
pub fn assemble_generator(
    grid: &StaggeredGrid,
    profile: &CoefficientProfile,
    bc: &BoundaryConditionSpec,
    interface: &InterfaceSpec,
) -> Result<DiscreteGenerator> {
    if !bc.classification.is_dissipative() {
        return Err(PhsError::InvalidInput(format!(
            "cannot discretize boundary conditions classified as {}",
            bc.classification.as_str()
        )));
    }
    if !profile.is_diagonal() {
        return Err(PhsError::Assumption("the staggered scheme needs diagonal Q^- and Q^+".into()));
    }
    if (grid.l - interface.l).abs() > 1e-14 || (grid.a - profile.a).abs() > 1e-14 || (grid.b - profile.b).abs() > 1e-14
    {
        return Err(PhsError::InvalidInput("grid, profile and interface disagree on a, l or b".into()));
    }
    let g = grid;
    let n = g.full_dim();
    let q = diag_q(profile, g);
    let w = g.weights();
    let (eps_map, admissible) = boundary_closure(bc)?;
    let (nm, np) = (g.n_minus, g.n_plus);
    let (node_a, node_lm, node_lp, node_b) =
        (g.x2(Side::Minus, 0), g.x2(Side::Minus, nm), g.x2(Side::Plus, 0), g.x2(Side::Plus, np));

    // K + F E acting on the unreduced effort.
    let mut k = DMatrix::zeros(n, n);
    for side in [Side::Minus, Side::Plus] {
        let nc = g.cells(side);
        for i in 0..nc {
            let row = g.x1(side, i);
            k[(row, g.x2(side, i + 1))] -= 1.0;
            k[(row, g.x2(side, i))] += 1.0;
        }
        for j in 1..nc {
            let row = g.x2(side, j);
            k[(row, g.x1(side, j))] -= 1.0;
            k[(row, g.x1(side, j - 1))] += 1.0;
        }
        k[(g.x2(side, 0), g.x1(side, 0))] -= 1.0;
        k[(g.x2(side, nc), g.x1(side, nc - 1))] += 1.0;
    }
    // Boundary: +eps_a at node a, -eps_b at node b, eps = E (e2(b), e2(a)).
    for (col, node) in [(0, node_b), (1, node_a)] {
        k[(node_a, node)] += eps_map[(1, col)];
        k[(node_b, node)] -= eps_map[(0, col)];
    }
    // Interface: -e_I/2 at l-, -e_I/2 at l+, e_I = (e2(l-) + e2(l+)) / (2 r).
    if interface.r > 0.0 {
        let c = 0.25 / interface.r;
        for row in [node_lm, node_lp] {
            k[(row, node_lm)] -= c;
            k[(row, node_lp)] -= c;
        }
    }

    // Basis of admissible states.
    let mut z_cols: Vec<SparseCol> = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        let nc = g.cells(side);
        for i in 0..nc {
            z_cols.push(vec![(g.x1(side, i), 1.0)]);
        }
        for j in 1..nc {
            z_cols.push(vec![(g.x2(side, j), 1.0)]);
        }
    }
    if interface.r > 0.0 {
        let (qm, qp) = (q[node_lm], q[node_lp]);
        let c = 2.0 / (1.0 / qm + 1.0 / qp);
        z_cols.push(vec![(node_lm, c / qm), (node_lp, c / qp)]);
    }
    for col in admissible.column_iter() {
        let (bb, ba) = (col[0], col[1]);
        let c = 1.0 / bb.abs().max(ba.abs());
        let mut entries = Vec::new();
        if bb != 0.0 {
            entries.push((node_b, c * bb / q[node_b]));
        }
        if ba != 0.0 {
            entries.push((node_a, c * ba / q[node_a]));
        }
        z_cols.push(entries);
    }
    z_cols.sort_by_key(|c| c[0].0);

    let m_full = w.component_mul(&q);
    let nr = z_cols.len();
    let mass =
        DVector::from_iterator(nr, z_cols.iter().map(|c| c.iter().map(|&(i, v)| v * v * m_full[i]).sum::<f64>()));
    let mut b = DMatrix::zeros(nr, nr);
    let mut g_col = DVector::zeros(n);
    for (jc, col) in z_cols.iter().enumerate() {
        g_col.fill(0.0);
        for &(i, v) in col {
            g_col.axpy(v * q[i], &k.column(i), 1.0);
        }
        for (ir, row) in z_cols.iter().enumerate() {
            let s: f64 = row.iter().map(|&(i, v)| v * q[i] * g_col[i]).sum();
            b[(ir, jc)] = s;
        }
    }
    let mut a_h = b;
    for (i, mut row) in a_h.row_iter_mut().enumerate() {
        row /= mass[i];
    }
    Ok(DiscreteGenerator {
        grid: *g,
        interface: *interface,
        classification: bc.classification,
        a_h,
        mass,
        q_diag: q,
        weights: w,
        z_cols,
        eps_map,
    })
}

impl DiscreteGenerator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// Unreduced state `Z xi`.
    pub fn full_state(&self, xi: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.grid.full_dim());
        for (j, col) in self.z_cols.iter().enumerate() {
            for &(i, v) in col {
                x[i] += v * xi[j];
            }
        }
        x
    }

    /// `M`-orthogonal projection of an unreduced state onto the admissible states.
    pub fn project_full(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.weights.component_mul(&self.q_diag);
        DVector::from_iterator(
            self.dim(),
            self.z_cols
                .iter()
                .zip(self.mass.iter())
                .map(|(col, &mj)| col.iter().map(|&(i, v)| v * m[i] * x[i]).sum::<f64>() / mj),
        )
    }

    /// Samples a state field at the degrees of freedom and projects it.
    pub fn project<F: Fn(Side, f64) -> Vector2<f64>>(&self, x: F) -> DVector<f64> {
        let full = DVector::from_iterator(
            self.grid.full_dim(),
            self.grid.dofs().into_iter().map(|(side, comp, z)| x(side, z)[comp]),
        );
        self.project_full(&full)
    }

    /// `H_h = xi^T (Z^T M Z) xi / 2`.
    pub fn energy(&self, xi: &DVector<f64>) -> f64 {
        0.5 * xi.iter().zip(self.mass.iter()).map(|(x, m)| m * x * x).sum::<f64>()
    }

    /// Gradient of `H_h` with respect to the reduced state.
    pub fn energy_gradient(&self, xi: &DVector<f64>) -> DVector<f64> {
        xi.component_mul(&self.mass)
    }

    /// Port values of a reduced state.
    pub fn ports(&self, xi: &DVector<f64>) -> PortSample {
        let g = &self.grid;
        let x = self.full_state(xi);
        let e = x.component_mul(&self.q_diag);
        let (nm, np) = (g.n_minus, g.n_plus);
        let e2a = e[g.x2(Side::Minus, 0)];
        let e2b = e[g.x2(Side::Plus, np)];
        let eps = self.eps_map * Vector2::new(e2b, e2a);
        let (e1b, e1a) = (eps[0], eps[1]);
        let (f_i, e_i) = if self.interface.r > 0.0 {
            let f = 0.5 * (e[g.x2(Side::Minus, nm)] + e[g.x2(Side::Plus, 0)]);
            (f, f / self.interface.r)
        } else {
            // e_I is not a state variable here; report the jump of the
            // linearly extrapolated cell values of e1.
            let left = 1.5 * e[g.x1(Side::Minus, nm - 1)] - 0.5 * e[g.x1(Side::Minus, nm - 2)];
            let right = 1.5 * e[g.x1(Side::Plus, 0)] - 0.5 * e[g.x1(Side::Plus, 1)];
            (0.0, left - right)
        };
        let ports = crate::boundary::rext_p1() * nalgebra::Vector4::new(e1b, e2b, e1a, e2a);
        PortSample {
            f_boundary: [ports[0], ports[1]],
            e_boundary: [ports[2], ports[3]],
            f_i,
            e_i,
            trace_a: [e1a, e2a],
            trace_b: [e1b, e2b],
        }
    }

    /// `<e_d, f_d> - e_I f_I`, which equals `dH_h/dt` along solutions.
    pub fn power(&self, xi: &DVector<f64>) -> f64 {
        let p = self.ports(xi);
        if self.interface.r > 0.0 {
            p.power()
        } else {
            p.boundary_power()
        }
    }

    /// `xi^T (Z^T M Z) A_h xi`.
    pub fn energy_rate(&self, xi: &DVector<f64>) -> f64 {
        let axi = &self.a_h * xi;
        xi.iter().zip(self.mass.iter()).zip(axi.iter()).map(|((x, m), a)| x * m * a).sum()
    }

    /// The reduced state as a field of grid functions.
    pub fn to_field(&self, xi: &DVector<f64>) -> Result<PiecewiseField> {
        let g = &self.grid;
        let x = self.full_state(xi);
        let side = |s: Side| {
            let n = g.cells(s);
            let zc: Vec<f64> = (0..n).map(|i| g.center(s, i)).collect();
            let vc: Vec<f64> = (0..n).map(|i| x[g.x1(s, i)]).collect();
            let zn: Vec<f64> = (0..=n).map(|j| g.node(s, j)).collect();
            let vn: Vec<f64> = (0..=n).map(|j| x[g.x2(s, j)]).collect();
            vec![Component::Grid { z: zc, v: vc }, Component::Grid { z: zn, v: vn }]
        };
        PiecewiseField::new(g.a, g.l, g.b, side(Side::Minus), side(Side::Plus))
    }

    /// Solves `(lambda - A_h) xi = P y` for the projection `P y` of a field.
    pub fn resolve<F: Fn(Side, f64) -> Vector2<f64>>(&self, lambda: f64, y: F) -> Result<DVector<f64>> {
        let rhs = self.project(y);
        let m = DMatrix::identity(self.dim(), self.dim()) * lambda - &self.a_h;
        m.lu().solve(&rhs).ok_or_else(|| PhsError::Singular(format!("lambda - A_h at lambda = {lambda}")))
    }

    /// Discrete `L2(Q)` distance between a reduced state and a field sampled at the dofs.
    pub fn error_against<F: Fn(Side, f64) -> Vector2<f64>>(&self, xi: &DVector<f64>, exact: F) -> (f64, f64) {
        let x = self.full_state(xi);
        let mut err = 0.0;
        let mut nrm = 0.0;
        for (k, (side, comp, z)) in self.grid.dofs().into_iter().enumerate() {
            let m = self.weights[k] * self.q_diag[k];
            let v = exact(side, z)[comp];
            err += m * (x[k] - v).powi(2);
            nrm += m * v * v;
        }
        (err.sqrt(), nrm.sqrt())
    }

    /// Eigenvalues of `A_h`.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.a_h.clone().complex_eigenvalues().iter().copied().collect()
    }

    /// Writes the nonzero entries of `A_h` as `row col value` lines.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "% {} {}", self.dim(), self.dim())?;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                let v = self.a_h[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v:.17e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Symmetric-part test of a discrete generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipativityVerdict {
    /// Largest eigenvalue of `sym(M^{1/2} A_h M^{-1/2})`.
    pub max_symmetric_eigenvalue: f64,
    pub tolerance: f64,
    /// Whether `I - A_h` is invertible.
    pub resolvent_solvable: bool,
    pub pass: bool,
}

/// Checks `sym(M A_h) <= 0` in the mass-weighted sense and solvability of `I - A_h`.
pub fn dissipativity_spectrum_check(gen: &DiscreteGenerator) -> DissipativityVerdict {
    let n = gen.dim();
    let s = gen.mass.map(f64::sqrt);
    let c = DMatrix::from_fn(n, n, |i, j| s[i] * gen.a_h[(i, j)] / s[j]);
    let sym = (&c + c.transpose()) * 0.5;
    let scale = c.norm().max(1.0);
    let ev = sym.symmetric_eigenvalues();
    let max_ev = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tolerance = 1e-10 * scale;
    let solvable = (DMatrix::identity(n, n) - &gen.a_h).lu().try_inverse().is_some();
    DissipativityVerdict {
        max_symmetric_eigenvalue: max_ev,
        tolerance,
        resolvent_solvable: solvable,
        pass: max_ev <= tolerance && solvable,
    }
}

/// Least-squares slope of `log(err)` against `log(h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when every error is at the rounding floor.
    pub order: Option<f64>,
    pub at_rounding_floor: bool,
}

/// Errors below this are treated as rounding.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Fits the observed order from `(h, error)` pairs.
pub fn convergence_order(samples: &[(f64, f64)]) -> Result<ConvergenceFit> {
    if samples.len() < 2 {
        return Err(PhsError::InvalidInput("need at least two refinement levels".into()));
    }
    let h: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let errors: Vec<f64> = samples.iter().map(|s| s.1).collect();
    if errors.iter().all(|&e| e <= ROUNDING_FLOOR) {
        return Ok(ConvergenceFit { h, errors, order: None, at_rounding_floor: true });
    }
    if samples.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0)) {
        return Err(PhsError::InvalidInput("cell widths and errors must be positive".into()));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(ConvergenceFit { h, errors, order: Some(sxy / sxx), at_rounding_floor: false })
}

/// Resolvent products of a moving-interface family on a common grid.
///
/// `[a, b]` carries `n_cells` uniform cells; at each time the interface is
/// snapped to the nearest interior node, so that every `A_h(t)` acts on the
/// same global grid functions (`x1` at cell centres, `x2` at nodes). Each
/// resolvent is embedded as `Z (lambda - A_h)^{-1} P_M` with `P_M` the
/// projection onto its admissible states, and norms are taken in the
/// reference mass of `Q_{l(0)}`.
#[derive(Debug, Clone)]
pub struct FamilyGrid {
    pub a: f64,
    pub b: f64,
    pub n_cells: usize,
    /// Reference mass on the global grid functions.
    pub mass0: DVector<f64>,
}

impl FamilyGrid {
    pub fn new(fam: &crate::analytic::family::FamilySpec, n_cells: usize) -> Result<Self> {
        let (a, b) = (fam.profile.a, fam.profile.b);
        if n_cells < 2 * MIN_CELLS {
            return Err(PhsError::InvalidInput(format!("need at least {} cells", 2 * MIN_CELLS)));
        }
        let h = (b - a) / n_cells as f64;
        let l0 = fam.path.l(0.0);
        let mut mass0 = DVector::zeros(2 * n_cells + 1);
        for i in 0..n_cells {
            let z = a + (i as f64 + 0.5) * h;
            mass0[i] = h * fam.profile.q_l(l0, z)[(0, 0)];
        }
        for j in 0..=n_cells {
            let z = a + j as f64 * h;
            let w = if j == 0 || j == n_cells { 0.5 * h } else { h };
            mass0[n_cells + j] = w * fam.profile.q_l(l0, z)[(1, 1)];
        }
        Ok(Self { a, b, n_cells, mass0 })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n_cells as f64
    }

    /// Node index nearest to `l`, kept `MIN_CELLS` away from the ends.
    pub fn snap(&self, l: f64) -> usize {
        let j = ((l - self.a) / self.h()).round() as usize;
        j.clamp(MIN_CELLS, self.n_cells - MIN_CELLS)
    }

    fn generator(&self, fam: &crate::analytic::family::FamilySpec, t: f64) -> Result<DiscreteGenerator> {
        let j = self.snap(fam.path.l(t));
        let l = self.a + j as f64 * self.h();
        let grid = build_grid(self.a, l, self.b, j, self.n_cells - j)?;
        assemble_generator(&grid, &fam.profile, &fam.bc, &InterfaceSpec::new(l, fam.r)?)
    }

    /// Maps a global grid function to the unreduced layout of `gen`.
    fn to_local(&self, gen: &DiscreteGenerator, x: &DVector<f64>) -> DVector<f64> {
        let g = &gen.grid;
        let n = self.n_cells;
        let j = g.n_minus;
        let mut out = DVector::zeros(g.full_dim());
        for i in 0..n {
            let (side, k) = if i < j { (Side::Minus, i) } else { (Side::Plus, i - j) };
            out[g.x1(side, k)] = x[i];
        }
        for k in 0..=n {
            if k <= j {
                out[g.x2(Side::Minus, k)] = x[n + k];
            }
            if k >= j {
                out[g.x2(Side::Plus, k - j)] = x[n + k];
            }
        }
        out
    }

    /// Maps an unreduced state of `gen` to a global grid function; the two
    /// interface values are averaged.
    fn to_global(&self, gen: &DiscreteGenerator, x: &DVector<f64>) -> DVector<f64> {
        let g = &gen.grid;
        let n = self.n_cells;
        let j = g.n_minus;
        let mut out = DVector::zeros(2 * n + 1);
        for i in 0..n {
            let (side, k) = if i < j { (Side::Minus, i) } else { (Side::Plus, i - j) };
            out[i] = x[g.x1(side, k)];
        }
        for k in 0..=n {
            out[n + k] = match k.cmp(&j) {
                std::cmp::Ordering::Less => x[g.x2(Side::Minus, k)],
                std::cmp::Ordering::Greater => x[g.x2(Side::Plus, k - j)],
                std::cmp::Ordering::Equal => 0.5 * (x[g.x2(Side::Minus, j)] + x[g.x2(Side::Plus, 0)]),
            };
        }
        out
    }

    /// `R(lambda, A_h(t))` as a matrix on global grid functions.
    pub fn resolvent(&self, fam: &crate::analytic::family::FamilySpec, t: f64, lambda: f64) -> Result<DMatrix<f64>> {
        let gen = self.generator(fam, t)?;
        let dim = 2 * self.n_cells + 1;
        let m = DMatrix::identity(gen.dim(), gen.dim()) * lambda - &gen.a_h;
        let lu = m.lu();
        let mut out = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut e = DVector::zeros(dim);
            e[c] = 1.0;
            let rhs = gen.project_full(&self.to_local(&gen, &e));
            let xi = lu.solve(&rhs).ok_or_else(|| PhsError::Singular(format!("lambda - A_h(t) at t = {t}")))?;
            out.set_column(c, &self.to_global(&gen, &gen.full_state(&xi)));
        }
        Ok(out)
    }

    /// Operator norm of a global matrix in the reference mass norm.
    pub fn norm(&self, op: &DMatrix<f64>) -> f64 {
        let s = self.mass0.map(f64::sqrt);
        let n = op.nrows();
        let c = DMatrix::from_fn(n, n, |i, j| s[i] * op[(i, j)] / s[j]);
        c.singular_values().max()
    }

    /// `|R(lambda, A(t_k)) ... R(lambda, A(t_1))|_{Q_0}` for `k = 1..=k_max`
    /// with `t_j = tau j / k`.
    pub fn product_norms(
        &self,
        fam: &crate::analytic::family::FamilySpec,
        lambda: f64,
        k_max: usize,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let mut prod = DMatrix::identity(2 * self.n_cells + 1, 2 * self.n_cells + 1);
            for j in 1..=k {
                let t = fam.tau * j as f64 / k as f64;
                prod = self.resolvent(fam, t, lambda)? * prod;
            }
            out.push(self.norm(&prod));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::profile::SideProfile;
    use crate::boundary::{classify_conditions, transmission_line_wb, wb_from_trace_form};
    use nalgebra::Matrix2x4;

    fn shorted() -> BoundaryConditionSpec {
        let wt = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        classify_conditions(&wb_from_trace_form(&wt), 0.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(build_grid(-1.0, 0.0, 1.0, 3, 8).is_err());
        assert!(build_grid(-1.0, -1.0 + 1e-13, 1.0, 4, 8).is_err());
        assert!(build_grid(-1.0, 0.0, 1.0, 4, 4).is_ok());
    }

    #[test]
    fn energy_of_constant_state() {
        let p = CoefficientProfile::new(
            -1.0,
            1.0,
            SideProfile::constant_diagonal(2.0, 2.0),
            SideProfile::constant_diagonal(2.0, 2.0),
        )
        .unwrap();
        let bc = classify_conditions(&transmission_line_wb(1.0), 1.0).unwrap();
        let spec = InterfaceSpec::new(0.0, 1.0).unwrap();
        let g = build_grid(-1.0, 0.0, 1.0, 8, 8).unwrap();
        let gen = assemble_generator(&g, &p, &bc, &spec).unwrap();
        let xi = gen.project(|_, _| Vector2::new(1.0, 1.0));
        let full = gen.full_state(&xi);
        let m = gen.weights.component_mul(&gen.q_diag);
        let h_full = 0.5 * full.iter().zip(m.iter()).map(|(x, m)| m * x * x).sum::<f64>();
        assert!((h_full - 4.0).abs() < 1e-12);
        assert!((gen.energy(&xi) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn energy_identity_is_exact() {
        let p = CoefficientProfile::new(
            -1.0,
            1.0,
            SideProfile::constant_diagonal(1.0, 2.0),
            SideProfile::DiagonalPoly {
                q11: crate::poly::Polynomial::new(0.0, vec![1.5, 0.2]),
                q22: crate::poly::Polynomial::new(0.0, vec![0.7, 0.0, 0.1]),
            },
        )
        .unwrap();
        for (bc, r) in [(classify_conditions(&transmission_line_wb(2.0), 0.5).unwrap(), 0.5), (shorted(), 0.0)] {
            let spec = InterfaceSpec::new(0.25, r).unwrap();
            let g = build_grid(-1.0, 0.25, 1.0, 10, 7).unwrap();
            let gen = assemble_generator(&g, &p, &bc, &spec).unwrap();
            let xi = DVector::from_fn(gen.dim(), |i, _| ((i * 37 % 11) as f64 - 5.0) / 3.0);
            let rate = gen.energy_rate(&xi);
            let power = gen.power(&xi);
            assert!((rate - power).abs() < 1e-12 * (1.0 + rate.abs()), "{rate} vs {power}");
            assert!(power <= 1e-12);
            assert!(dissipativity_spectrum_check(&gen).pass);
        }
    }

    #[test]
    fn shorted_generator_is_skew_in_energy() {
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let spec = InterfaceSpec::new(0.0, 0.0).unwrap();
        let g = build_grid(-1.0, 0.0, 1.0, 16, 16).unwrap();
        let gen = assemble_generator(&g, &p, &shorted(), &spec).unwrap();
        let v = dissipativity_spectrum_check(&gen);
        assert!(v.max_symmetric_eigenvalue.abs() < 1e-12);
        for z in gen.eigenvalues() {
            assert!(z.re.abs() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_conditions_are_rejected() {
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let wb = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0);
        let bc = classify_conditions(&wb, 0.0).unwrap();
        let spec = InterfaceSpec::new(0.0, 0.0).unwrap();
        let g = build_grid(-1.0, 0.0, 1.0, 8, 8).unwrap();
        assert!(assemble_generator(&g, &p, &bc, &spec).is_err());
    }

    #[test]
    fn full_profile_is_rejected() {
        let p = CoefficientProfile::new(
            -1.0,
            1.0,
            SideProfile::Constant(nalgebra::Matrix2::new(2.0, 0.5, 0.5, 1.0)),
            SideProfile::identity(),
        )
        .unwrap();
        let bc = classify_conditions(&transmission_line_wb(1.0), 1.0).unwrap();
        let spec = InterfaceSpec::new(0.0, 1.0).unwrap();
        let g = build_grid(-1.0, 0.0, 1.0, 8, 8).unwrap();
        assert!(matches!(assemble_generator(&g, &p, &bc, &spec), Err(PhsError::Assumption(_))));
    }

    #[test]
    fn order_fit() {
        let s: Vec<(f64, f64)> = (0..4)
            .map(|k| {
                let h = 0.1 / 2f64.powi(k);
                (h, 3.0 * h * h)
            })
            .collect();
        let fit = convergence_order(&s).unwrap();
        assert!((fit.order.unwrap() - 2.0).abs() < 1e-12);
        let flat = convergence_order(&[(0.1, 1e-15), (0.05, 2e-16)]).unwrap();
        assert!(flat.at_rounding_floor && flat.order.is_none());
    }
}
