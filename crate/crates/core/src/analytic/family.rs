//! Families `A(t)` generated by a moving interface `l(t)` with `r = 0`.
//!
//! All `A(t)` are measured in the fixed reference norm `|.|_{Q_0}` with
//! `Q_0 = Q_{l_ref}` and `l_ref = l(0)`. Between `l(t)` and `l_ref` the two
//! weights differ, and the quasi-dissipativity constant `omega` bounds the
//! resulting defect:
//! `<A(t) x, x>_{Q_0} <= omega |x|_{Q_0}^2` for every `t`.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::analytic::profile::{CoefficientProfile, Side};
use crate::boundary::{BoundaryConditionSpec, PSD_TOL};
use crate::error::{PhsError, Result};
use crate::interface_ops::{apply_j, DomainSample, PiecewiseField};
use crate::linalg::{max_generalized_eigenvalue, p1};
use crate::path::MovingPath;
use crate::quadrature::GaussLegendre;

/// Points per region on which the `omega` suprema are sampled.
pub const OMEGA_GRID: usize = 256;
/// Relative safety margin applied to the sampled `omega`.
pub const OMEGA_MARGIN: f64 = 0.01;
/// Number of times at which `eta^-` and `eta^+` are logged.
pub const ETA_SAMPLES: usize = 65;

/// A moving-interface family on `[0, tau]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub profile: CoefficientProfile,
    pub bc: BoundaryConditionSpec,
    pub path: MovingPath,
    pub r: f64,
    pub tau: f64,
}

/// Outcome of the structural checks on a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub diagonal: bool,
    /// `Q^+ = p(z) Q^-` with the same ratio `p` for both diagonal entries.
    pub common_ratio: bool,
    /// `p(l_ref) = 1`.
    pub ratio_one_at_reference: bool,
    pub r_zero: bool,
    pub boundary_ok: bool,
    pub path_inside: bool,
    pub violated: Vec<String>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.violated.is_empty()
    }
}

/// `omega` and the quantities it is assembled from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOmega {
    pub omega: f64,
    pub l_ref: f64,
    /// `(omega_1, omega_2)` for interfaces left of `l_ref`.
    pub minus_terms: (f64, f64),
    /// `(omega_1, omega_2)` for interfaces right of `l_ref`.
    pub plus_terms: (f64, f64),
    /// `(t, eta^-(t), eta^+(t))`.
    pub eta: Vec<(f64, f64, f64)>,
    /// Whether the energy-equality conditions hold
    /// (`r = 0` or `eta = 1` along the path). Reported, not required.
    pub energy_equality_conditions: bool,
}

fn sample_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

/// Checks the structural assumptions on a family.
pub fn check_assumptions(f: &FamilySpec) -> AssumptionReport {
    let p = &f.profile;
    let l_ref = f.path.l(0.0);
    let mut violated = Vec::new();
    let diagonal = p.is_diagonal();
    if !diagonal {
        violated.push("Q^- and Q^+ must be diagonal".to_string());
    }
    let ratio = |z: f64| {
        let (qm, qp) = (p.q(Side::Minus, z), p.q(Side::Plus, z));
        (qp[(0, 0)] / qm[(0, 0)], qp[(1, 1)] / qm[(1, 1)])
    };
    let common_ratio = diagonal
        && sample_points(p.a, p.b, OMEGA_GRID).all(|z| {
            let (r1, r2) = ratio(z);
            (r1 - r2).abs() <= 1e-12 * r1.abs().max(1.0)
        });
    if diagonal && !common_ratio {
        violated.push("Q^+_11/Q^-_11 and Q^+_22/Q^-_22 differ".to_string());
    }
    let (r1, r2) = ratio(l_ref);
    let ratio_one_at_reference = (r1 - 1.0).abs() <= 1e-12 && (r2 - 1.0).abs() <= 1e-12;
    if !ratio_one_at_reference {
        violated.push(format!("Q^+ / Q^- at l(0) = {l_ref} is ({r1}, {r2}), not 1"));
    }
    let r_zero = f.r == 0.0;
    if !r_zero {
        violated.push(format!("the family needs r = 0, got r = {}", f.r));
    }
    let boundary_ok = f.bc.rank == 2 && f.bc.sigma_form.symmetric_eigen().eigenvalues.min() >= -PSD_TOL;
    if !boundary_ok {
        violated.push("W_B must have rank 2 with W_B Sigma W_B^T >= 0".to_string());
    }
    let path_inside = f.path.check_inside(p.a, p.b, 0.0, f.tau).is_ok();
    if !path_inside {
        violated.push("l(t) leaves (a, b)".to_string());
    }
    AssumptionReport { diagonal, common_ratio, ratio_one_at_reference, r_zero, boundary_ok, path_inside, violated }
}

fn to_d(m: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// `(sup lambda_max(sym(D P1 Q'), W), sup lambda_max(-Qt', W))` on `[lo, hi]`,
/// where `Q` is the weight active under `A(t)`, `W` the reference weight,
/// `D = W - Q` and `Qt = D P1 Q`.
fn region_terms(
    lo: f64,
    hi: f64,
    reference: &dyn Fn(f64) -> (Matrix2<f64>, Matrix2<f64>),
    active: &dyn Fn(f64) -> (Matrix2<f64>, Matrix2<f64>),
) -> Result<(f64, f64)> {
    let p = p1();
    let mut w1 = f64::NEG_INFINITY;
    let mut w2 = f64::NEG_INFINITY;
    for z in sample_points(lo, hi, OMEGA_GRID) {
        let (w, dw) = reference(z);
        let (q, dq) = active(z);
        let d = w - q;
        let dd = dw - dq;
        let s1 = d * p * dq;
        let s1 = (s1 + s1.transpose()) * 0.5;
        let dqt = dd * p * q + d * p * dq;
        let s2 = -(dqt + dqt.transpose()) * 0.5;
        w1 = w1.max(max_generalized_eigenvalue(&to_d(&s1), &to_d(&w))?);
        w2 = w2.max(max_generalized_eigenvalue(&to_d(&s2), &to_d(&w))?);
    }
    Ok((w1, w2))
}

/// Computes `omega` from the suprema over the swept region. On the part of the
/// domain where the reference and active weights differ,
/// `<A x, x>_{Q_0}` picks up `int x^T (sym(D P1 Q') - Qt'/2) x`, so
/// `omega = max over regions of max(0, omega_1 + omega_2 / 2)` plus a 1% margin.
pub fn family_omega(f: &FamilySpec) -> Result<FamilyOmega> {
    let rep = check_assumptions(f);
    if !rep.holds() {
        return Err(PhsError::Assumption(format!("family assumptions violated: {}", rep.violated.join("; "))));
    }
    let pr = &f.profile;
    let l_ref = f.path.l(0.0);
    let (lmin, lmax) = f.path.range(f.tau);
    let minus = |z: f64| (pr.q(Side::Minus, z), pr.dq(Side::Minus, z));
    let plus = |z: f64| (pr.q(Side::Plus, z), pr.dq(Side::Plus, z));
    // l(t) < l_ref: on (l, l_ref) the reference weight is Q^- and A(t) uses Q^+.
    let minus_terms = if lmin < l_ref { region_terms(lmin, l_ref, &minus, &plus)? } else { (0.0, 0.0) };
    // l(t) > l_ref: on (l_ref, l) the reference weight is Q^+ and A(t) uses Q^-.
    let plus_terms = if lmax > l_ref { region_terms(l_ref, lmax, &plus, &minus)? } else { (0.0, 0.0) };
    let combine = |(a, b): (f64, f64)| (a + 0.5 * b).max(0.0);
    let raw = combine(minus_terms).max(combine(plus_terms));
    let omega = raw * (1.0 + OMEGA_MARGIN);
    if !omega.is_finite() {
        return Err(PhsError::NoConvergence("omega is not finite".into()));
    }
    let eta: Vec<(f64, f64, f64)> = sample_points(0.0, f.tau, ETA_SAMPLES)
        .map(|t| {
            let l = f.path.l(t);
            let (qm, qp) = (pr.q(Side::Minus, l), pr.q(Side::Plus, l));
            let em = 0.5 * (qm[(0, 0)] / qp[(0, 0)] + qm[(1, 1)] / qp[(1, 1)]);
            let ep = 0.5 * (qp[(0, 0)] / qm[(0, 0)] + qp[(1, 1)] / qm[(1, 1)]);
            (t, em, ep)
        })
        .collect();
    let energy_equality_conditions =
        f.r == 0.0 || eta.iter().all(|&(_, a, b)| (a - 1.0).abs() <= 1e-12 && (b - 1.0).abs() <= 1e-12);
    Ok(FamilyOmega { omega, l_ref, minus_terms, plus_terms, eta, energy_equality_conditions })
}

/// Gauss nodes on `[a, b]` with breakpoints at `l` and `l_ref`, tagged with
/// the side of `l` they lie on.
fn split_nodes(a: f64, b: f64, l: f64, l_ref: f64) -> Vec<(Side, f64, f64)> {
    let mut cuts = vec![a, l, l_ref, b];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let g = GaussLegendre::rule64();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo || lo < a || hi > b {
            continue;
        }
        let side = if hi <= l { Side::Minus } else { Side::Plus };
        let panels = 4;
        let h = (hi - lo) / panels as f64;
        for k in 0..panels {
            for (z, wt) in g.mapped(lo + k as f64 * h, lo + (k + 1) as f64 * h) {
                out.push((side, z, wt));
            }
        }
    }
    out
}

/// `|x|_{Q_{l_w}}^2` for a state field split at `x.l`.
pub fn weighted_norm_sq(x: &PiecewiseField, profile: &CoefficientProfile, l_w: f64) -> f64 {
    split_nodes(x.a, x.b, x.l, l_w)
        .into_iter()
        .map(|(side, z, w)| {
            let v = x.eval2(side, z);
            w * v.dot(&(profile.q_l(l_w, z) * v))
        })
        .sum()
}

/// `(<A(t) x, x>_{Q_0}, |x|_{Q_0}^2)` for a domain element of `A(t)` drawn at `l(t)`.
pub fn family_dissipation(sample: &DomainSample, l_ref: f64) -> Result<(f64, f64)> {
    let e = &sample.e;
    let je = apply_j(e)?;
    let p = &sample.profile;
    let nodes = split_nodes(e.a, e.b, e.l, l_ref);
    let mut form = 0.0;
    let mut norm = 0.0;
    for (side, z, w) in nodes {
        let x = sample.x(side, z);
        let q0x = p.q_l(l_ref, z) * x;
        form += w * je.eval2(side, z).dot(&q0x);
        norm += w * x.dot(&q0x);
    }
    Ok((form, norm))
}
