//! The `analyze`, `simulate` and `spectrum` commands and their JSON reports.

use nalgebra::{Matrix2, Matrix4x2};
use serde::{Deserialize, Serialize};

use phs_core::analytic::family::{check_assumptions, family_omega, AssumptionReport};
use phs_core::analytic::spectrum::{spectrum_scan, Region};
use phs_core::kernel_basis;
use phs_core::simulate::{decay_fit, simulate_fixed, simulate_moving, BoundCertificate, TimeSeries};

use crate::config::Config;
use crate::CliError;

fn rows2(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn rows4x2(m: &Matrix4x2<f64>) -> [[f64; 2]; 4] {
    std::array::from_fn(|i| [m[(i, 0)], m[(i, 1)]])
}

/// Family data reported by `analyze` when the interface moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub tau: f64,
    pub assumptions: AssumptionReport,
    /// Present only when every assumption holds.
    pub omega: Option<f64>,
    pub l_ref: Option<f64>,
    pub minus_terms: Option<(f64, f64)>,
    pub plus_terms: Option<(f64, f64)>,
    pub energy_equality_conditions: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub name: String,
    pub rank: usize,
    pub sigma_form: [[f64; 2]; 2],
    pub s: Option<[[f64; 2]; 2]>,
    pub v: Option<[[f64; 2]; 2]>,
    pub vvt_le_identity: Option<bool>,
    pub classification: String,
    /// Columns spanning the kernel of the boundary rows, as four rows of two.
    pub kernel_basis: Option<[[f64; 2]; 4]>,
    pub interface_l: f64,
    pub interface_r: f64,
    pub family: Option<FamilyReport>,
}

pub fn analyze(cfg: &Config) -> Result<AnalyzeReport, CliError> {
    let bc = cfg.boundary()?;
    let kernel = if bc.rank == 2 { Some(rows4x2(&kernel_basis(&bc)?)) } else { None };
    let family = match cfg.family()? {
        None => None,
        Some(fam) => {
            let assumptions = check_assumptions(&fam);
            let omega = if assumptions.holds() { Some(family_omega(&fam)?) } else { None };
            Some(FamilyReport {
                tau: fam.tau,
                assumptions,
                omega: omega.as_ref().map(|o| o.omega),
                l_ref: omega.as_ref().map(|o| o.l_ref),
                minus_terms: omega.as_ref().map(|o| o.minus_terms),
                plus_terms: omega.as_ref().map(|o| o.plus_terms),
                energy_equality_conditions: omega.as_ref().map(|o| o.energy_equality_conditions),
            })
        }
    };
    Ok(AnalyzeReport {
        name: cfg.name.clone(),
        rank: bc.rank,
        sigma_form: rows2(&bc.sigma_form),
        s: bc.s.as_ref().map(rows2),
        v: bc.v.as_ref().map(rows2),
        vvt_le_identity: bc.vvt_le_identity,
        classification: bc.classification.as_str().to_string(),
        kernel_basis: kernel,
        interface_l: cfg.interface.l,
        interface_r: cfg.interface.r,
        family,
    })
}

/// Summary of a simulation; the rows themselves go to the CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub name: String,
    /// `fixed` or `family approximation`.
    pub label: String,
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub n_minus: usize,
    pub n_plus: usize,
    pub h_max: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// `H(T)/H(0) - 1`, or 0 for a zero initial state.
    pub energy_drift: f64,
    /// True when the initial state is zero and the series stays at rest.
    pub empty_motion: bool,
    /// Slope of `ln(H)/2` over the second half of the run.
    pub decay_rate: Option<f64>,
    pub max_balance_residual: f64,
    pub bound_certificate: Option<BoundCertificate>,
    pub csv: String,
}

/// Runs the scenario and returns the series with its summary.
pub fn simulate(cfg: &Config) -> Result<(TimeSeries, SimulateSummary), CliError> {
    let scn = cfg.scenario()?;
    let series = if cfg.path.is_some() { simulate_moving(&scn)? } else { simulate_fixed(&scn)? };
    let h0 = series.initial_energy();
    let empty = h0 == 0.0;
    let summary = SimulateSummary {
        name: cfg.name.clone(),
        label: series.label.clone(),
        steps: series.records.len() - 1,
        dt: scn.dt,
        t_end: scn.t_end,
        n_minus: scn.n_minus,
        n_plus: scn.n_plus,
        h_max: series.h_max,
        initial_energy: h0,
        final_energy: series.final_energy(),
        energy_drift: if empty { 0.0 } else { series.energy_drift() },
        empty_motion: empty && series.records.iter().all(|r| r.h == 0.0),
        decay_rate: if empty { None } else { decay_fit(&series).ok() },
        max_balance_residual: series.max_balance_residual(),
        bound_certificate: series.bound_certificate,
        csv: format!("{}.csv", cfg.name),
    };
    Ok((series, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub name: String,
    pub region: Region,
    pub eigenvalues: Vec<Eigenvalue>,
    pub abscissa: Option<f64>,
    /// Largest distance between a root and the seed it was refined from.
    pub agreement: f64,
    pub dropped_seeds: usize,
    /// Largest real part of the discrete eigenvalues inside the region,
    /// when `numerics.n_minus` and `numerics.n_plus` are given.
    pub discrete_abscissa: Option<f64>,
}

pub fn spectrum(cfg: &Config) -> Result<SpectrumReport, CliError> {
    let bc = cfg.boundary()?;
    let region = cfg.region()?;
    let s = spectrum_scan(&cfg.profile, &bc, &cfg.interface, &region, &[])?;
    let discrete_abscissa = match cfg.cells() {
        Ok((nm, np)) if !region.is_empty() => {
            let grid = phs_core::discretize::build_grid(cfg.profile.a, cfg.interface.l, cfg.profile.b, nm, np)?;
            let gen = phs_core::discretize::assemble_generator(&grid, &cfg.profile, &bc, &cfg.interface)?;
            gen.eigenvalues().into_iter().filter(|z| region.contains(*z)).map(|z| z.re).reduce(f64::max)
        }
        _ => None,
    };
    Ok(SpectrumReport {
        name: cfg.name.clone(),
        region,
        eigenvalues: s.eigenvalues.iter().map(|z| Eigenvalue { re: z.re, im: z.im }).collect(),
        abscissa: s.abscissa,
        agreement: s.method_agreement,
        dropped_seeds: s.dropped_seeds,
        discrete_abscissa,
    })
}
