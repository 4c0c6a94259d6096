//! Coercive coefficient profiles `Q_l = c_l Q^- + (1 - c_l) Q^+`.
//!
//! Each side profile is defined on the whole interval `[a, b]` so that the
//! interface can move; `Q^-` acts left of the interface and `Q^+` right of it.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{PhsError, Result};
use crate::poly::Polynomial;

/// Number of sample points used to check symmetry, definiteness and bounds.
pub const PROFILE_SAMPLES: usize = 64;

/// Which side of the interface a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `[a, l)`.
    Minus,
    /// `(l, b]`.
    Plus,
}

/// Coefficient matrix on one side of the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideProfile {
    /// A constant symmetric matrix.
    Constant(Matrix2<f64>),
    /// `diag(q11(z), q22(z))` with polynomial entries.
    DiagonalPoly { q11: Polynomial, q22: Polynomial },
}

impl SideProfile {
    pub fn identity() -> Self {
        SideProfile::Constant(Matrix2::identity())
    }

    pub fn constant_diagonal(q11: f64, q22: f64) -> Self {
        SideProfile::Constant(Matrix2::new(q11, 0.0, 0.0, q22))
    }

    pub fn q(&self, z: f64) -> Matrix2<f64> {
        match self {
            SideProfile::Constant(m) => *m,
            SideProfile::DiagonalPoly { q11, q22 } => Matrix2::new(q11.eval(z), 0.0, 0.0, q22.eval(z)),
        }
    }

    pub fn dq(&self, z: f64) -> Matrix2<f64> {
        match self {
            SideProfile::Constant(_) => Matrix2::zeros(),
            SideProfile::DiagonalPoly { q11, q22 } => {
                Matrix2::new(q11.eval_derivative(1, z), 0.0, 0.0, q22.eval_derivative(1, z))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            SideProfile::Constant(_) => true,
            SideProfile::DiagonalPoly { q11, q22 } => q11.degree() == 0 && q22.degree() == 0,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        match self {
            SideProfile::Constant(m) => m[(0, 1)] == 0.0 && m[(1, 0)] == 0.0,
            SideProfile::DiagonalPoly { .. } => true,
        }
    }
}

/// The pair `Q^-`, `Q^+` on `[a, b]` with coercivity bounds `m I <= Q <= M I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    pub a: f64,
    pub b: f64,
    pub minus: SideProfile,
    pub plus: SideProfile,
    pub m: f64,
    pub big_m: f64,
}

impl CoefficientProfile {
    /// Validates symmetry and positive definiteness at sample points and records `m`, `M`.
    pub fn new(a: f64, b: f64, minus: SideProfile, plus: SideProfile) -> Result<Self> {
        if !(a < b) {
            return Err(PhsError::InvalidInput(format!("need a < b, got [{a}, {b}]")));
        }
        let mut m = f64::INFINITY;
        let mut big_m: f64 = 0.0;
        for (name, side) in [("minus", &minus), ("plus", &plus)] {
            for k in 0..PROFILE_SAMPLES {
                let z = a + (b - a) * k as f64 / (PROFILE_SAMPLES - 1) as f64;
                let q = side.q(z);
                if (q[(0, 1)] - q[(1, 0)]).abs() > 1e-12 * q.norm().max(1.0) {
                    return Err(PhsError::InvalidInput(format!("Q^{name}({z}) is not symmetric")));
                }
                let ev = q.symmetric_eigen().eigenvalues;
                if ev.min() <= 0.0 {
                    return Err(PhsError::InvalidInput(format!(
                        "Q^{name}({z}) is not positive definite (min eigenvalue {:.3e})",
                        ev.min()
                    )));
                }
                m = m.min(ev.min());
                big_m = big_m.max(ev.max());
            }
        }
        Ok(Self { a, b, minus, plus, m, big_m })
    }

    /// `Q^- = Q^+ = I` on `[a, b]`.
    pub fn identity(a: f64, b: f64) -> Self {
        Self::new(a, b, SideProfile::identity(), SideProfile::identity()).expect("identity profile")
    }

    pub fn side(&self, side: Side) -> &SideProfile {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    pub fn q(&self, side: Side, z: f64) -> Matrix2<f64> {
        self.side(side).q(z)
    }

    pub fn dq(&self, side: Side, z: f64) -> Matrix2<f64> {
        self.side(side).dq(z)
    }

    /// `Q_l(z)`; points `z < l` use `Q^-`, the rest `Q^+`.
    pub fn q_l(&self, l: f64, z: f64) -> Matrix2<f64> {
        if z < l {
            self.minus.q(z)
        } else {
            self.plus.q(z)
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.minus.is_diagonal() && self.plus.is_diagonal()
    }

    pub fn is_constant(&self) -> bool {
        self.minus.is_constant() && self.plus.is_constant()
    }

    /// Polynomial entries are smooth, so every supported profile is C^1.
    pub fn is_c1(&self) -> bool {
        true
    }

    /// `(m/M, M/m)`, the constants relating `|x|_{Q_l}^2` and `|x|_{Q_0}^2`.
    pub fn norm_equivalence_bounds(&self) -> (f64, f64) {
        (self.m / self.big_m, self.big_m / self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_of_constant_profile() {
        let p = CoefficientProfile::new(
            -1.0,
            1.0,
            SideProfile::constant_diagonal(1.0, 2.0),
            SideProfile::constant_diagonal(4.0, 3.0),
        )
        .unwrap();
        assert_eq!((p.m, p.big_m), (1.0, 4.0));
        assert_eq!(p.norm_equivalence_bounds(), (0.25, 4.0));
        assert!(p.is_diagonal() && p.is_constant());
    }

    #[test]
    fn indefinite_profile_is_rejected() {
        let bad = SideProfile::Constant(Matrix2::new(1.0, 2.0, 2.0, 1.0));
        assert!(CoefficientProfile::new(0.0, 1.0, bad, SideProfile::identity()).is_err());
    }

    #[test]
    fn polynomial_side_derivative() {
        let s = SideProfile::DiagonalPoly {
            q11: Polynomial::new(0.0, vec![1.0, 0.0, 0.5]),
            q22: Polynomial::constant(2.0),
        };
        assert_eq!(s.q(2.0), Matrix2::new(3.0, 0.0, 0.0, 2.0));
        assert_eq!(s.dq(2.0), Matrix2::new(2.0, 0.0, 0.0, 0.0));
        assert!(!s.is_constant());
    }
}
