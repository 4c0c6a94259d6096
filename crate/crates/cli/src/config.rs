//! Scenario files.
//!
//! A scenario is a TOML tree. It is first deserialized into optional raw
//! fields and then validated into core types; every failure carries the
//! dotted path of the field it concerns. Step sizes and grid sizes have no
//! defaults, the seed defaults to 0.

use std::fmt;
use std::path::Path;

use nalgebra::{Matrix2, Matrix2x4};
use serde::Deserialize;

use phs_core::analytic::family::FamilySpec;
use phs_core::analytic::spectrum::Region;
use phs_core::boundary::{classify_conditions, wb_from_trace_form, BoundaryConditionSpec};
use phs_core::poly::Polynomial;
use phs_core::simulate::{InitialState, Scenario};
use phs_core::{CoefficientProfile, InterfaceSpec, MovingPath, SideProfile};

/// A parse or validation failure at a field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }

    fn missing(path: &str) -> Self {
        Self::new(path, "required field is missing")
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    seed: Option<u64>,
    domain: Option<RawDomain>,
    profile: Option<RawProfile>,
    boundary: Option<RawBoundary>,
    interface: Option<RawInterface>,
    initial: Option<InitialState>,
    numerics: Option<RawNumerics>,
    spectrum: Option<RawRegion>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    a: Option<f64>,
    b: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    minus: Option<RawSide>,
    plus: Option<RawSide>,
}

/// Coefficient matrix on one side; polynomial coefficients are in `z`, lowest degree first.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSide {
    ConstantDiagonal { q: [f64; 2] },
    ConstantFull { q: [[f64; 2]; 2] },
    PolynomialDiagonal { q11: Vec<f64>, q22: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    /// Rows acting on `(f_boundary; e_boundary)`.
    wb: Option<[[f64; 4]; 2]>,
    /// Rows acting on the trace `(e1(b), e2(b), e1(a), e2(a))`.
    trace_form: Option<[[f64; 4]; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterface {
    l0: Option<f64>,
    r: Option<f64>,
    path: Option<RawPath>,
    /// Length of the family interval; defaults to `numerics.t_end`.
    tau: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawPath {
    Fixed,
    Linear { v: f64 },
    Sinusoidal { amp: f64, freq: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    n_minus: Option<usize>,
    n_plus: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    re_min: Option<f64>,
    re_max: Option<f64>,
    im_min: Option<f64>,
    im_max: Option<f64>,
}

/// Cell counts and time stepping, each checked only when a command needs it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    n_minus: Option<usize>,
    n_plus: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub name: String,
    pub seed: u64,
    pub profile: CoefficientProfile,
    pub wb: Matrix2x4<f64>,
    pub interface: InterfaceSpec,
    /// Interface path and family length, when the interface moves.
    pub path: Option<(MovingPath, f64)>,
    pub initial: Option<InitialState>,
    pub numerics: Numerics,
    pub region: Option<Region>,
}

fn req<T: Copy>(v: Option<T>, path: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::missing(path))
}

fn finite(v: f64, path: &str) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(path, format!("must be finite, got {v}")))
    }
}

fn side_profile(raw: &RawSide, path: &str) -> Result<SideProfile, ConfigError> {
    let check = |vals: &[f64], sub: &str| -> Result<(), ConfigError> {
        for v in vals {
            finite(*v, &format!("{path}.{sub}"))?;
        }
        Ok(())
    };
    Ok(match raw {
        RawSide::ConstantDiagonal { q } => {
            check(q, "q")?;
            SideProfile::constant_diagonal(q[0], q[1])
        }
        RawSide::ConstantFull { q } => {
            check(&[q[0][0], q[0][1], q[1][0], q[1][1]], "q")?;
            SideProfile::Constant(Matrix2::new(q[0][0], q[0][1], q[1][0], q[1][1]))
        }
        RawSide::PolynomialDiagonal { q11, q22 } => {
            for (name, c) in [("q11", q11), ("q22", q22)] {
                if c.is_empty() {
                    return Err(ConfigError::new(format!("{path}.{name}"), "needs at least one coefficient"));
                }
                check(c, name)?;
            }
            SideProfile::DiagonalPoly { q11: Polynomial::new(0.0, q11.clone()), q22: Polynomial::new(0.0, q22.clone()) }
        }
    })
}

fn rows(m: &[[f64; 4]; 2], path: &str) -> Result<Matrix2x4<f64>, ConfigError> {
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            finite(*v, &format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(Matrix2x4::from_fn(|i, j| m[i][j]))
}

impl Config {
    /// Parses and validates a scenario; `fallback_name` is used when the file has no `name`.
    pub fn parse(text: &str, fallback_name: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let path = e
                .span()
                .map(|s| key_path_at(text, s.start))
                .filter(|p| !p.is_empty())
                .unwrap_or_else(|| "<root>".into());
            ConfigError::new(path, msg)
        })?;
        Self::validate(raw, fallback_name)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::parse(&text, stem)
    }

    fn validate(raw: RawConfig, fallback_name: &str) -> Result<Self, ConfigError> {
        let name = raw.name.unwrap_or_else(|| fallback_name.to_string());
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(ConfigError::new("name", "must be a non-empty file-name-safe string"));
        }
        let domain = raw.domain.ok_or_else(|| ConfigError::missing("domain"))?;
        let a = finite(req(domain.a, "domain.a")?, "domain.a")?;
        let b = finite(req(domain.b, "domain.b")?, "domain.b")?;
        if !(a < b) {
            return Err(ConfigError::new("domain", format!("need a < b, got a = {a}, b = {b}")));
        }

        let prof = raw.profile.ok_or_else(|| ConfigError::missing("profile"))?;
        let minus =
            side_profile(prof.minus.as_ref().ok_or_else(|| ConfigError::missing("profile.minus"))?, "profile.minus")?;
        let plus =
            side_profile(prof.plus.as_ref().ok_or_else(|| ConfigError::missing("profile.plus"))?, "profile.plus")?;
        // Each side is validated on its own first so the error names the side.
        for (side, p) in [("profile.minus", &minus), ("profile.plus", &plus)] {
            CoefficientProfile::new(a, b, p.clone(), p.clone()).map_err(|e| ConfigError::new(side, e))?;
        }
        let profile = CoefficientProfile::new(a, b, minus, plus).map_err(|e| ConfigError::new("profile", e))?;

        let bnd = raw.boundary.ok_or_else(|| ConfigError::missing("boundary"))?;
        let wb = match (&bnd.wb, &bnd.trace_form) {
            (Some(w), None) => rows(w, "boundary.wb")?,
            (None, Some(w)) => wb_from_trace_form(&rows(w, "boundary.trace_form")?),
            (Some(_), Some(_)) => {
                return Err(ConfigError::new("boundary", "give exactly one of `wb` and `trace_form`, not both"))
            }
            (None, None) => return Err(ConfigError::new("boundary", "one of `wb` or `trace_form` is required")),
        };

        let ifc = raw.interface.ok_or_else(|| ConfigError::missing("interface"))?;
        let l0 = finite(req(ifc.l0, "interface.l0")?, "interface.l0")?;
        let r = finite(req(ifc.r, "interface.r")?, "interface.r")?;
        if r < 0.0 {
            return Err(ConfigError::new("interface.r", format!("must be >= 0, got {r}")));
        }
        if !(a < l0 && l0 < b) {
            return Err(ConfigError::new("interface.l0", format!("must lie in ({a}, {b}), got {l0}")));
        }
        let interface = InterfaceSpec::new(l0, r).map_err(|e| ConfigError::new("interface", e))?;

        let numerics = match raw.numerics {
            Some(n) => Numerics { n_minus: n.n_minus, n_plus: n.n_plus, dt: n.dt, t_end: n.t_end },
            None => Numerics { n_minus: None, n_plus: None, dt: None, t_end: None },
        };

        let path = match ifc.path {
            None => {
                if ifc.tau.is_some() {
                    return Err(ConfigError::new("interface.tau", "only meaningful together with interface.path"));
                }
                None
            }
            Some(p) => {
                let mp = match p {
                    RawPath::Fixed => MovingPath::Fixed { l0 },
                    RawPath::Linear { v } => MovingPath::Linear { l0, v: finite(v, "interface.path.v")? },
                    RawPath::Sinusoidal { amp, freq } => MovingPath::Sinusoidal {
                        l0,
                        amp: finite(amp, "interface.path.amp")?,
                        freq: finite(freq, "interface.path.freq")?,
                    },
                };
                let tau = match ifc.tau.or(numerics.t_end) {
                    Some(t) if t > 0.0 && t.is_finite() => t,
                    Some(t) => return Err(ConfigError::new("interface.tau", format!("must be positive, got {t}"))),
                    None => {
                        return Err(ConfigError::new(
                            "interface.tau",
                            "required with a path when numerics.t_end is absent",
                        ))
                    }
                };
                mp.check_inside(a, b, 0.0, tau).map_err(|e| ConfigError::new("interface.path", e))?;
                Some((mp, tau))
            }
        };

        if let Some(init) = &raw.initial {
            init.validate().map_err(|e| ConfigError::new("initial", e))?;
        }

        let region = match raw.spectrum {
            None => None,
            Some(s) => {
                let v = [
                    finite(req(s.re_min, "spectrum.re_min")?, "spectrum.re_min")?,
                    finite(req(s.re_max, "spectrum.re_max")?, "spectrum.re_max")?,
                    finite(req(s.im_min, "spectrum.im_min")?, "spectrum.im_min")?,
                    finite(req(s.im_max, "spectrum.im_max")?, "spectrum.im_max")?,
                ];
                Some(Region::new(v[0], v[1], v[2], v[3]).map_err(|e| ConfigError::new("spectrum", e))?)
            }
        };

        Ok(Self {
            name,
            seed: raw.seed.unwrap_or(0),
            profile,
            wb,
            interface,
            path,
            initial: raw.initial,
            numerics,
            region,
        })
    }

    /// Classified boundary conditions; a rank-deficient `W_B` is a verdict, not an error.
    pub fn boundary(&self) -> Result<BoundaryConditionSpec, ConfigError> {
        classify_conditions(&self.wb, self.interface.r).map_err(|e| ConfigError::new("boundary", e))
    }

    /// `(n_minus, n_plus)`.
    pub fn cells(&self) -> Result<(usize, usize), ConfigError> {
        let nm = req(self.numerics.n_minus, "numerics.n_minus")?;
        let np = req(self.numerics.n_plus, "numerics.n_plus")?;
        for (v, p) in [(nm, "numerics.n_minus"), (np, "numerics.n_plus")] {
            if v < phs_core::discretize::MIN_CELLS {
                return Err(ConfigError::new(
                    p,
                    format!("needs at least {} cells, got {v}", phs_core::discretize::MIN_CELLS),
                ));
            }
        }
        Ok((nm, np))
    }

    /// `(dt, t_end)`.
    pub fn stepping(&self) -> Result<(f64, f64), ConfigError> {
        let dt = req(self.numerics.dt, "numerics.dt")?;
        let t_end = req(self.numerics.t_end, "numerics.t_end")?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ConfigError::new("numerics.dt", format!("must be positive, got {dt}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(ConfigError::new("numerics.t_end", format!("must be positive, got {t_end}")));
        }
        let steps = t_end / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(ConfigError::new("numerics.t_end", format!("must be a whole number of steps of dt = {dt}")));
        }
        Ok((dt, t_end))
    }

    pub fn region(&self) -> Result<Region, ConfigError> {
        self.region.ok_or_else(|| ConfigError::missing("spectrum"))
    }

    /// The simulation scenario; a missing path means a fixed interface.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let bc = self.boundary()?;
        if !bc.classification.is_dissipative() {
            return Err(ConfigError::new(
                "boundary",
                format!("simulation needs dissipative conditions, classification is {}", bc.classification.as_str()),
            ));
        }
        let (n_minus, n_plus) = self.cells()?;
        let (dt, t_end) = self.stepping()?;
        let initial = self.initial.clone().ok_or_else(|| ConfigError::missing("initial"))?;
        let path = self.path.map_or(MovingPath::Fixed { l0: self.interface.l }, |(p, _)| p);
        let scn = Scenario {
            profile: self.profile.clone(),
            bc,
            path,
            r: self.interface.r,
            initial,
            n_minus,
            n_plus,
            dt,
            t_end,
            keep_states: false,
        };
        if path.range(t_end).0 <= self.profile.a || path.range(t_end).1 >= self.profile.b {
            return Err(ConfigError::new("interface.path", format!("leaves the domain before t_end = {t_end}")));
        }
        Ok(scn)
    }

    /// The moving-interface family, when a path is given.
    pub fn family(&self) -> Result<Option<FamilySpec>, ConfigError> {
        let Some((path, tau)) = self.path else { return Ok(None) };
        Ok(Some(FamilySpec { profile: self.profile.clone(), bc: self.boundary()?, path, r: self.interface.r, tau }))
    }
}

/// Dotted key path of the innermost table entry that contains byte `offset`.
fn key_path_at(text: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        let start = pos;
        pos += line.len();
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = t.split_once('=') {
            if !t.starts_with('#') {
                key = k.trim().trim_matches('"').to_string();
            }
        }
        if offset < pos && offset >= start {
            break;
        }
    }
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[domain]
a = -1.0
b = 1.0
[profile.minus]
kind = "constant_diagonal"
q = [1.0, 1.0]
[profile.plus]
kind = "constant_diagonal"
q = [1.0, 2.0]
[boundary]
trace_form = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]
[interface]
l0 = 0.0
r = 0.0
"#;

    #[test]
    fn minimal_config_parses_with_seed_zero() {
        let c = Config::parse(BASE, "base").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.name, "base");
        assert!(c.path.is_none());
    }

    #[test]
    fn missing_step_size_names_the_field() {
        let c = Config::parse(&format!("{BASE}[numerics]\nn_minus = 8\nn_plus = 8\nt_end = 1.0\n"), "x").unwrap();
        assert_eq!(c.stepping().unwrap_err().path, "numerics.dt");
        assert!(c.cells().is_ok());
    }

    #[test]
    fn invalid_side_names_the_side() {
        let text = BASE.replace("q = [1.0, 2.0]", "q = [1.0, -2.0]");
        assert_eq!(Config::parse(&text, "x").unwrap_err().path, "profile.plus");
    }

    #[test]
    fn type_errors_name_the_key() {
        let text = BASE.replace("l0 = 0.0", "l0 = \"left\"");
        assert_eq!(Config::parse(&text, "x").unwrap_err().path, "interface.l0");
    }

    #[test]
    fn interface_outside_domain() {
        let text = BASE.replace("l0 = 0.0", "l0 = 1.5");
        assert_eq!(Config::parse(&text, "x").unwrap_err().path, "interface.l0");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("r = 0.0", "r = 0.0\nresistance = 2.0");
        assert_eq!(Config::parse(&text, "x").unwrap_err().path, "interface.resistance");
    }
}
