//! Eigenvalues as roots of `det G(lambda)` in a rectangle of the complex plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::profile::CoefficientProfile;
use crate::analytic::resolvent::characteristic_matrix;
use crate::boundary::BoundaryConditionSpec;
use crate::error::{PhsError, Result};
use crate::interface_ops::InterfaceSpec;
use crate::linalg::det_complex;

pub const NEWTON_MAX_ITER: usize = 60;
pub const NEWTON_STEP_TOL: f64 = 1e-10;
/// Largest Newton step relative to `max(1, |lambda|)`.
pub const NEWTON_MAX_STEP: f64 = 0.5;
/// Roots closer than this are the same eigenvalue.
pub const DEDUP_TOL: f64 = 1e-8;

/// Closed rectangle `[re_min, re_max] x [im_min, im_max]`; a rectangle of
/// zero area is allowed and contains no eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min <= re_max && im_min <= im_max) || ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(PhsError::InvalidInput(format!(
                "spectral region [{re_min}, {re_max}] x [{im_min}, {im_max}] is not a rectangle"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn is_empty(&self) -> bool {
        self.re_min == self.re_max || self.im_min == self.im_max
    }

    pub fn contains(&self, z: Complex64) -> bool {
        if self.is_empty() {
            return false;
        }
        let s = 1e-9 * (1.0 + z.norm());
        z.re >= self.re_min - s && z.re <= self.re_max + s && z.im >= self.im_min - s && z.im <= self.im_max + s
    }

    /// A uniform `nre x nim` grid of seeds.
    pub fn grid(&self, nre: usize, nim: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(nre * nim);
        for i in 0..nre {
            for j in 0..nim {
                let re = self.re_min + (self.re_max - self.re_min) * (i as f64 + 0.5) / nre as f64;
                let im = self.im_min + (self.im_max - self.im_min) * (j as f64 + 0.5) / nim as f64;
                out.push(Complex64::new(re, im));
            }
        }
        out
    }
}

/// Eigenvalues found in a region, sorted by decreasing real part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Largest real part, or `None` when no eigenvalue was found.
    pub abscissa: Option<f64>,
    /// Largest distance between a converged root and its seed.
    pub method_agreement: f64,
    /// Seeds whose Newton iteration failed or left the region.
    pub dropped_seeds: usize,
}

/// Newton's method on a holomorphic scalar function with a central-difference derivative.
pub fn newton_root<F: Fn(Complex64) -> Result<Complex64>>(f: F, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..NEWTON_MAX_ITER {
        let scale = z.norm().max(1.0);
        let h = 1e-7 * scale;
        let fz = f(z).ok()?;
        if fz == Complex64::new(0.0, 0.0) {
            return Some(z);
        }
        let d = (f(z + h).ok()? - f(z - h).ok()?) / (2.0 * h);
        if !d.is_finite() || d.norm() == 0.0 {
            return None;
        }
        let mut step = fz / d;
        let cap = NEWTON_MAX_STEP * scale;
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() <= NEWTON_STEP_TOL * scale {
            return Some(z);
        }
    }
    None
}

/// Refines each seed to a root of `det G`, keeps roots inside `region` and
/// merges duplicates. Without seeds a `16 x 64` grid over the region is used.
pub fn spectrum_scan(
    profile: &CoefficientProfile,
    bc: &BoundaryConditionSpec,
    spec: &InterfaceSpec,
    region: &Region,
    seeds: &[Complex64],
) -> Result<Spectrum> {
    // Validates the inputs once so that failures are not mistaken for dropped seeds.
    characteristic_matrix(Complex64::new(region.re_max, 0.0), profile, bc, spec)?;
    if region.is_empty() {
        return Ok(Spectrum { eigenvalues: vec![], abscissa: None, method_agreement: 0.0, dropped_seeds: 0 });
    }
    let grid;
    let seeds = if seeds.is_empty() {
        grid = region.grid(16, 64);
        &grid[..]
    } else {
        seeds
    };
    let det = |z: Complex64| characteristic_matrix(z, profile, bc, spec).map(|g| det_complex(&g));
    let mut roots: Vec<Complex64> = Vec::new();
    let mut agreement: f64 = 0.0;
    let mut dropped = 0;
    for &s in seeds {
        match newton_root(det, s) {
            Some(z) if region.contains(z) => {
                agreement = agreement.max((z - s).norm());
                if !roots.iter().any(|r| (r - z).norm() <= DEDUP_TOL * (1.0 + z.norm())) {
                    roots.push(z);
                }
            }
            _ => dropped += 1,
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let abscissa = roots.first().map(|z| z.re);
    Ok(Spectrum { eigenvalues: roots, abscissa, method_agreement: agreement, dropped_seeds: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{classify_conditions, wb_from_trace_form};
    use nalgebra::Matrix2x4;

    fn resistive_ends(ra: f64, rb: f64) -> BoundaryConditionSpec {
        let wt = Matrix2x4::new(0.0, 0.0, 1.0, ra, 1.0, -rb, 0.0, 0.0);
        classify_conditions(&wb_from_trace_form(&wt), 0.0).unwrap()
    }

    #[test]
    fn decoupled_sides_give_a_vertical_line() {
        // With r = 0 each half [-1, 0], [0, 1] reflects with coefficient
        // (R - 1)/(R + 1) at the outer end and is shorted at the interface, so
        // the eigenvalues are ln(rho)/(2 L) + i pi k / L (plus the pi/2 L shift).
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let bc = resistive_ends(5.0, 5.0);
        let spec = InterfaceSpec::new(0.0, 0.0).unwrap();
        let region = Region::new(-1.0, 1.0, -10.0, 10.0).unwrap();
        let s = spectrum_scan(&p, &bc, &spec, &region, &[]).unwrap();
        let expected = (2.0f64 / 3.0).ln() / 2.0;
        assert!(!s.eigenvalues.is_empty());
        for z in &s.eigenvalues {
            assert!((z.re - expected).abs() < 1e-8, "{z}");
        }
        assert!((s.abscissa.unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn shorted_line_has_imaginary_spectrum() {
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let wt = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let bc = classify_conditions(&wb_from_trace_form(&wt), 0.0).unwrap();
        let spec = InterfaceSpec::new(0.3, 0.0).unwrap();
        let region = Region::new(-0.5, 0.5, 0.1, 6.0).unwrap();
        let s = spectrum_scan(&p, &bc, &spec, &region, &[]).unwrap();
        assert!(!s.eigenvalues.is_empty());
        for z in &s.eigenvalues {
            assert!(z.re.abs() < 1e-8, "{z}");
        }
    }

    #[test]
    fn degenerate_regions() {
        assert!(Region::new(1.0, 0.0, -1.0, 1.0).is_err());
        let p = CoefficientProfile::identity(-1.0, 1.0);
        let region = Region::new(0.0, 0.0, -1.0, 1.0).unwrap();
        let s =
            spectrum_scan(&p, &resistive_ends(5.0, 5.0), &InterfaceSpec::new(0.0, 0.0).unwrap(), &region, &[]).unwrap();
        assert!(s.eigenvalues.is_empty() && s.abscissa.is_none());
    }
}
