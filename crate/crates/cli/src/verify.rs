//! Property suites run by `phs verify`.
//!
//! Each suite draws its samples from a ChaCha stream seeded by the scenario
//! seed and the suite name, so a pinned seed reproduces the table exactly and
//! selecting one suite does not change the draws of another.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use phs_core::analytic::adjoint::adjoint_duality_residual;
use phs_core::analytic::family::{family_dissipation, family_omega, weighted_norm_sq};
use phs_core::analytic::resolvent::{energy_norm, resolve, weighted_norm};
use phs_core::boundary::{stokes_identity_residual, IdentityCheck, OperatorSpec};
use phs_core::discretize::FamilyGrid;
use phs_core::findim::{dirac_check, graph_dirac, iso_simulate, mass_spring, separable_dirac, LevitatedBall};
use phs_core::interface_ops::{duality_residual, sample_domain_element_with, skew_identity_residual, PiecewiseField};
use phs_core::poly::Polynomial;
use phs_core::{BoundaryConditionSpec, InterfaceSpec, LinearSubspace};

use crate::config::{Config, ConfigError};
use crate::CliError;

/// Suite names in the order they run.
pub const SUITES: [&str; 9] =
    ["dirac", "stokes", "duality", "dissipativity", "adjoint", "norm_equivalence", "resolvent", "family", "findim"];

/// Random draws per sampled check.
pub const SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub suite: String,
    pub check: String,
    pub status: Status,
    /// Worst observed value of the checked quantity.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyTable {
    pub name: String,
    pub seed: u64,
    pub rows: Vec<Row>,
}

impl VerifyTable {
    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.status == Status::Fail)
    }

    /// Fixed-width text rendering, one row per check.
    pub fn render(&self) -> String {
        let mut out = format!("# {} (seed {})\n", self.name, self.seed);
        let _ = writeln!(out, "{:<17} {:<42} {:<5} {:>11} {:>9}  detail", "suite", "check", "ok", "value", "tol");
        for r in &self.rows {
            let status = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "skip",
            };
            let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3e}"));
            let _ = writeln!(
                out,
                "{:<17} {:<42} {:<5} {:>11} {:>9}  {}",
                r.suite,
                r.check,
                status,
                num(r.value),
                num(r.tolerance),
                r.detail
            );
        }
        out
    }
}

struct Suite {
    name: &'static str,
    rows: Vec<Row>,
}

impl Suite {
    fn push(&mut self, check: &str, pass: bool, value: Option<f64>, tolerance: Option<f64>, detail: impl Into<String>) {
        self.rows.push(Row {
            suite: self.name.into(),
            check: check.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            value,
            tolerance,
            detail: detail.into(),
        });
    }

    fn skip(&mut self, check: &str, detail: impl Into<String>) {
        self.rows.push(Row {
            suite: self.name.into(),
            check: check.into(),
            status: Status::Skip,
            value: None,
            tolerance: None,
            detail: detail.into(),
        });
    }

    /// Records a failure when a computation errors instead of producing a value.
    fn error(&mut self, check: &str, e: impl std::fmt::Display) {
        self.push(check, false, None, None, format!("error: {e}"));
    }
}

fn suite_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let tag = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ tag)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// Worst relative residual `residual / max(1, scale)` over a batch of identity checks.
fn worst(checks: &[IdentityCheck]) -> f64 {
    checks.iter().map(|c| c.residual / c.scale.max(1.0)).fold(0.0, f64::max)
}

/// Two-component piecewise cubic with `e2` continuous at `l`.
fn random_effort(rng: &mut ChaCha8Rng, a: f64, l: f64, b: f64) -> PiecewiseField {
    let left = vec![coeffs(rng, 4), coeffs(rng, 4)];
    let mut right = vec![coeffs(rng, 4), coeffs(rng, 4)];
    right[1][0] = left[1][0];
    PiecewiseField::from_poly_coeffs(a, l, b, &left, &right).expect("a < l < b")
}

/// Runs the named suite, or every suite when `only` is `None`.
pub fn verify(cfg: &Config, only: Option<&str>) -> Result<VerifyTable, CliError> {
    if let Some(name) = only {
        if !SUITES.contains(&name) {
            return Err(ConfigError::new(
                "--suite",
                format!("unknown suite `{name}`; expected one of {}", SUITES.join(", ")),
            )
            .into());
        }
    }
    let bc = cfg.boundary()?;
    let mut rows = Vec::new();
    for name in SUITES {
        if only.is_some_and(|o| o != name) {
            continue;
        }
        let mut s = Suite { name, rows: Vec::new() };
        let mut rng = suite_rng(cfg.seed, name);
        match name {
            "dirac" => dirac(&mut s, &mut rng),
            "stokes" => stokes(&mut s, &mut rng, cfg),
            "duality" => duality(&mut s, &mut rng, cfg),
            "dissipativity" => dissipativity(&mut s, &mut rng, cfg, &bc),
            "adjoint" => adjoint(&mut s, &mut rng, cfg, &bc),
            "norm_equivalence" => norm_equivalence(&mut s, &mut rng, cfg),
            "resolvent" => resolvent(&mut s, &mut rng, cfg, &bc),
            "family" => family(&mut s, &mut rng, cfg),
            "findim" => findim(&mut s),
            _ => unreachable!("suite list is fixed"),
        }
        rows.extend(s.rows);
    }
    Ok(VerifyTable { name: cfg.name.clone(), seed: cfg.seed, rows })
}

fn dirac(s: &mut Suite, rng: &mut ChaCha8Rng) {
    let n = 3;
    let m = DMatrix::from_fn(n, n, |_, _| normal(rng));
    let j = &m - m.transpose();
    let graph = graph_dirac(&j);
    let k = DMatrix::from_fn(n, 1, |_, _| normal(rng));
    let sep = separable_dirac(&k);
    for (check, sub) in [("graph of skew J", graph.as_ref()), ("separable K x K^perp", sep.as_ref())] {
        match sub.map_err(|e| e.to_string()).and_then(|d| dirac_check(d).map_err(|e| e.to_string())) {
            Ok(v) => s.push(
                check,
                v.is_dirac,
                None,
                None,
                format!("dim_ok={} pairing_vanishes={}", v.dim_ok, v.pairing_vanishes),
            ),
            Err(e) => s.error(check, e),
        }
    }
    // Dropping one basis vector of a Dirac structure leaves an isotropic
    // subspace of dimension n - 1, which the check must reject.
    let deficient = graph.and_then(|g| LinearSubspace::new(g.basis.columns(0, n - 1).into_owned()));
    match deficient.and_then(|d| dirac_check(&d)) {
        Ok(v) => {
            s.push("dimension-deficient fixture rejected", !v.is_dirac, None, None, format!("dim_ok={}", v.dim_ok))
        }
        Err(e) => s.error("dimension-deficient fixture rejected", e),
    }
}

fn stokes(s: &mut Suite, rng: &mut ChaCha8Rng, cfg: &Config) {
    const TOL: f64 = 1e-9;
    let (a, b) = (cfg.profile.a, cfg.profile.b);
    let p1 = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
    let p2 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let specs = [
        ("first order (N = 1)", Ok(OperatorSpec::interface_first_order())),
        ("second order (N = 2)", OperatorSpec::new(vec![DMatrix::zeros(2, 2), p1, p2])),
    ];
    for (label, spec) in specs {
        let check = format!("Stokes identity, {label}");
        let spec = match spec {
            Ok(sp) => sp,
            Err(e) => {
                s.error(&check, e);
                continue;
            }
        };
        let mut out = Vec::with_capacity(SAMPLES);
        for _ in 0..SAMPLES {
            let e1: Vec<_> = (0..spec.n).map(|_| Polynomial::new(0.0, coeffs(rng, 5))).collect();
            let e2: Vec<_> = (0..spec.n).map(|_| Polynomial::new(0.0, coeffs(rng, 5))).collect();
            match stokes_identity_residual(&spec, &e1, &e2, a, b) {
                Ok(c) => out.push(c),
                Err(e) => return s.error(&check, e),
            }
        }
        let w = worst(&out);
        s.push(&check, w <= TOL, Some(w), Some(TOL), format!("{SAMPLES} polynomial pairs on [{a}, {b}]"));
    }
    let mut out = Vec::with_capacity(SAMPLES);
    for i in 0..SAMPLES {
        // Ten interface positions spread over the interior, plus the configured one.
        let l = if i % 11 == 10 { cfg.interface.l } else { a + (b - a) * ((i % 11) as f64 + 0.5) / 10.5 };
        let e1 = random_effort(rng, a, l, b);
        let e2 = random_effort(rng, a, l, b);
        match skew_identity_residual(&e1, &e2) {
            Ok(c) => out.push(c),
            Err(e) => return s.error("interface skew identity", e),
        }
    }
    let w = worst(&out);
    s.push(
        "interface skew identity",
        w <= TOL,
        Some(w),
        Some(TOL),
        format!("{SAMPLES} piecewise pairs, 11 interface positions"),
    );
}

fn duality(s: &mut Suite, rng: &mut ChaCha8Rng, cfg: &Config) {
    const TOL: f64 = 1e-10;
    let (a, l, b) = (cfg.profile.a, cfg.interface.l, cfg.profile.b);
    let mut out = Vec::with_capacity(SAMPLES);
    for _ in 0..SAMPLES {
        let xl = coeffs(rng, 4);
        let mut xr = coeffs(rng, 4);
        xr[0] = xl[0];
        let x = PiecewiseField::from_poly_coeffs(a, l, b, &[xl], &[xr]).expect("a < l < b");
        let y = PiecewiseField::from_poly_coeffs(a, l, b, &[coeffs(rng, 4)], &[coeffs(rng, 4)]).expect("a < l < b");
        match duality_residual(&x, &y) {
            Ok(c) => out.push(c),
            Err(e) => return s.error("d_l / d_l* duality", e),
        }
    }
    let w = worst(&out);
    s.push("d_l / d_l* duality", w <= TOL, Some(w), Some(TOL), format!("{SAMPLES} pairs at l = {l}"));
}

fn dissipativity(s: &mut Suite, rng: &mut ChaCha8Rng, cfg: &Config, bc: &BoundaryConditionSpec) {
    const TOL: f64 = 1e-10;
    let cls = bc.classification;
    s.push(
        "boundary classification is dissipative",
        cls.is_dissipative(),
        None,
        None,
        format!("classification {}", cls.as_str()),
    );
    let mut ratio: f64 = f64::NEG_INFINITY;
    for _ in 0..SAMPLES {
        let d = sample_domain_element_with(bc, &cfg.interface, &cfg.profile, rng, false)
            .and_then(|x| Ok((x.dissipation()?, x.energy_norm_sq())));
        match d {
            Ok((form, norm)) => ratio = ratio.max(form / norm),
            Err(e) => return s.error("<Ax, x> <= 0 on D(A)", e),
        }
    }
    s.push(
        "<Ax, x> <= 0 on D(A)",
        ratio <= TOL,
        Some(ratio),
        Some(TOL),
        format!("max <Ax,x>/|x|^2 over {SAMPLES} draws"),
    );
}

fn adjoint(s: &mut Suite, rng: &mut ChaCha8Rng, cfg: &Config, bc: &BoundaryConditionSpec) {
    const TOL: f64 = 1e-9;
    let mut out = Vec::with_capacity(SAMPLES);
    for _ in 0..SAMPLES {
        let r = sample_domain_element_with(bc, &cfg.interface, &cfg.profile, rng, false).and_then(|x| {
            let y = sample_domain_element_with(bc, &cfg.interface, &cfg.profile, rng, true)?;
            adjoint_duality_residual(&x.e, &y.e, bc, &cfg.interface)
        });
        match r {
            Ok(c) => out.push(c),
            Err(e) => return s.error("<Ax, y> = <x, A*y>", e),
        }
    }
    let w = worst(&out);
    s.push("<Ax, y> = <x, A*y>", w <= TOL, Some(w), Some(TOL), format!("{SAMPLES} pairs from D(A) x D(A*)"));
}

fn norm_equivalence(s: &mut Suite, rng: &mut ChaCha8Rng, cfg: &Config) {
    let p = &cfg.profile;
    let (lo, hi) = p.norm_equivalence_bounds();
    let (a, b) = (p.a, p.b);
    let mut worst_lo: f64 = f64::INFINITY;
    let mut worst_hi: f64 = 0.0;
    for _ in 0..SAMPLES {
        let l = a + (b - a) * rng.random_range(0.05..0.95);
        let l_ref = a + (b - a) * rng.random_range(0.05..0.95);
        let x = PiecewiseField::from_poly_coeffs(
            a,
            l,
            b,
            &[coeffs(rng, 4), coeffs(rng, 4)],
            &[coeffs(rng, 4), coeffs(rng, 4)],
        )
        .expect("a < l < b");
        let ratio = weighted_norm_sq(&x, p, l) / weighted_norm_sq(&x, p, l_ref);
        worst_lo = worst_lo.min(ratio / lo);
        worst_hi = worst_hi.max(ratio / hi);
    }
    let slack = 1e-12;
    s.push(
        "lower constant m/M",
        worst_lo >= 1.0 - slack,
        Some(worst_lo),
        Some(1.0),
        format!("min ratio/(m/M), m/M = {lo:.6}"),
    );
    s.push(
        "upper constant M/m",
        worst_hi <= 1.0 + slack,
        Some(worst_hi),
        Some(1.0),
        format!("max ratio/(M/m), M/m = {hi:.6}"),
    );
}

fn resolvent(s: &mut Suite, rng: &mut ChaCha8Rng, cfg: &Config, bc: &BoundaryConditionSpec) {
    const RES_TOL: f64 = 1e-8;
    let p = &cfg.profile;
    let spec = cfg.interface;
    let (a, l, b) = (p.a, spec.l, p.b);
    let draws = SAMPLES / 10;
    for lambda in [0.5, 1.0, 2.0, 10.0] {
        let mut res: f64 = 0.0;
        let mut bound: f64 = 0.0;
        for _ in 0..draws {
            let y = PiecewiseField::from_poly_coeffs(
                a,
                l,
                b,
                &[coeffs(rng, 3), coeffs(rng, 3)],
                &[coeffs(rng, 3), coeffs(rng, 3)],
            )
            .expect("a < l < b");
            match resolve(lambda, &y, p, bc, &spec) {
                Ok(sol) => {
                    res = res.max(sol.residual);
                    bound = bound.max(lambda * energy_norm(&sol, p) / weighted_norm(&y, p, l));
                }
                Err(e) => return s.error(&format!("resolve residual, lambda = {lambda}"), e),
            }
        }
        s.push(
            &format!("resolve residual, lambda = {lambda}"),
            res <= RES_TOL,
            Some(res),
            Some(RES_TOL),
            format!("{draws} right-hand sides"),
        );
        s.push(
            &format!("|R(lambda)y| <= |y|/lambda, lambda = {lambda}"),
            bound <= 1.0 + 1e-9,
            Some(bound),
            Some(1.0),
            "max lambda |phi| / |y|",
        );
    }
}

fn family(s: &mut Suite, rng: &mut ChaCha8Rng, cfg: &Config) {
    let fam = match cfg.family() {
        Ok(Some(f)) => f,
        Ok(None) => return s.skip("family omega", "no interface.path in the scenario"),
        Err(e) => return s.error("family omega", e),
    };
    let om = match family_omega(&fam) {
        Ok(o) => o,
        Err(e) => return s.error("family omega", e),
    };
    let omega = om.omega;
    s.push("family omega", omega.is_finite(), Some(omega), None, format!("l_ref = {}", om.l_ref));

    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..SAMPLES {
        let t = fam.tau * rng.random::<f64>();
        let r = InterfaceSpec::new(fam.path.l(t), fam.r)
            .and_then(|spec| sample_domain_element_with(&fam.bc, &spec, &fam.profile, rng, false))
            .and_then(|x| family_dissipation(&x, om.l_ref));
        match r {
            Ok((form, norm)) => worst_excess = worst_excess.max((form - omega * norm) / norm),
            Err(e) => return s.error("<A(t)x, x>_Q0 <= omega |x|^2", e),
        }
    }
    s.push(
        "<A(t)x, x>_Q0 <= omega |x|^2",
        worst_excess <= 1e-10,
        Some(worst_excess),
        Some(1e-10),
        format!("max (<A(t)x,x> - omega|x|^2)/|x|^2 over {SAMPLES} draws"),
    );

    let n = match cfg.cells() {
        Ok((nm, np)) => nm + np,
        Err(e) => return s.skip("resolvent products", format!("{e}")),
    };
    let grid = match FamilyGrid::new(&fam, n) {
        Ok(g) => g,
        Err(e) => return s.error("resolvent products", e),
    };
    for lambda in [omega + 0.5, omega + 2.0, 10.0_f64.max(omega + 0.5)] {
        let check = format!("resolvent products, lambda = {lambda:.4}");
        match grid.product_norms(&fam, lambda, 5) {
            Ok(norms) => {
                let excess = norms
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v - (lambda - omega).powi(-(i as i32 + 1)))
                    .fold(f64::NEG_INFINITY, f64::max);
                s.push(
                    &check,
                    excess <= 1e-6,
                    Some(excess),
                    Some(1e-6),
                    format!("max over k <= 5 of |prod R| - (lambda - omega)^-k, {n} cells"),
                );
            }
            Err(e) => s.error(&check, e),
        }
    }
}

fn findim(s: &mut Suite) {
    const TOL: f64 = 1e-10;
    let zero: phs_core::findim::InputFn = Arc::new(|_| DVector::zeros(1));
    let ms =
        mass_spring(1.0, 1.0).and_then(|sys| iso_simulate(&sys, &DVector::from_vec(vec![1.0, 0.0]), zero, 1e-2, 10.0));
    match ms {
        Ok(tr) => {
            let h0 = tr.h[0];
            let drift = tr.h.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max);
            s.push(
                "mass-spring energy conserved",
                drift <= TOL,
                Some(drift),
                Some(TOL),
                "max |H(t) - H(0)| over t in [0, 10]",
            );
        }
        Err(e) => s.error("mass-spring energy conserved", e),
    }
    let ball = LevitatedBall::default();
    let u: phs_core::findim::InputFn = Arc::new(|t: f64| DVector::from_vec(vec![2.0 + (3.0 * t).sin()]));
    let lb = ball.system().and_then(|sys| iso_simulate(&sys, &DVector::from_vec(vec![0.1, 0.0, 0.05]), u, 1e-3, 2.0));
    match lb {
        Ok(tr) => {
            let excess = tr.ledger.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            s.push(
                "levitated-ball passivity ledger",
                tr.ledger_ok,
                Some(excess),
                None,
                "max H(k+1) - H(k) - dt u.y per step",
            );
        }
        Err(e) => s.error("levitated-ball passivity ledger", e),
    }
}
