//! Interface trajectories `t -> l(t)` with analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{PhsError, Result};

/// A continuously differentiable interface path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MovingPath {
    /// `l(t) = l0`.
    Fixed { l0: f64 },
    /// `l(t) = l0 + v t`.
    Linear { l0: f64, v: f64 },
    /// `l(t) = l0 + amp sin(2 pi freq t)`.
    Sinusoidal { l0: f64, amp: f64, freq: f64 },
}

impl MovingPath {
    pub fn l(&self, t: f64) -> f64 {
        match *self {
            MovingPath::Fixed { l0 } => l0,
            MovingPath::Linear { l0, v } => l0 + v * t,
            MovingPath::Sinusoidal { l0, amp, freq } => l0 + amp * (2.0 * std::f64::consts::PI * freq * t).sin(),
        }
    }

    pub fn ldot(&self, t: f64) -> f64 {
        match *self {
            MovingPath::Fixed { .. } => 0.0,
            MovingPath::Linear { v, .. } => v,
            MovingPath::Sinusoidal { amp, freq, .. } => {
                let w = 2.0 * std::f64::consts::PI * freq;
                amp * w * (w * t).cos()
            }
        }
    }

    pub fn is_fixed(&self) -> bool {
        match *self {
            MovingPath::Fixed { .. } => true,
            MovingPath::Linear { v, .. } => v == 0.0,
            MovingPath::Sinusoidal { amp, freq, .. } => amp == 0.0 || freq == 0.0,
        }
    }

    /// `(min l, max l)` over `[0, tau]`.
    pub fn range(&self, tau: f64) -> (f64, f64) {
        match *self {
            MovingPath::Fixed { l0 } => (l0, l0),
            MovingPath::Linear { .. } => {
                let (u, v) = (self.l(0.0), self.l(tau));
                (u.min(v), u.max(v))
            }
            MovingPath::Sinusoidal { .. } => {
                let n = 2048;
                (0..=n)
                    .map(|k| self.l(tau * k as f64 / n as f64))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
        }
    }

    /// Checks that the path stays in `(a + margin, b - margin)` on `[0, tau]`.
    pub fn check_inside(&self, a: f64, b: f64, margin: f64, tau: f64) -> Result<()> {
        let (lo, hi) = self.range(tau);
        if lo <= a + margin || hi >= b - margin {
            return Err(PhsError::DomainViolation(format!(
                "interface path range [{lo}, {hi}] leaves ({}, {}) on [0, {tau}]",
                a + margin,
                b - margin
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let paths = [
            MovingPath::Fixed { l0: 0.1 },
            MovingPath::Linear { l0: -0.2, v: 0.3 },
            MovingPath::Sinusoidal { l0: 0.0, amp: 0.2, freq: 0.7 },
        ];
        for p in paths {
            for t in [0.0, 0.3, 1.1] {
                let h = 1e-6;
                let fd = (p.l(t + h) - p.l(t - h)) / (2.0 * h);
                assert!((fd - p.ldot(t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn range_and_containment() {
        let p = MovingPath::Linear { l0: -0.2, v: 0.4 };
        let (lo, hi) = p.range(1.0);
        assert!((lo + 0.2).abs() < 1e-15 && (hi - 0.2).abs() < 1e-15);
        assert!(p.check_inside(-1.0, 1.0, 0.1, 1.0).is_ok());
        assert!(p.check_inside(-1.0, 0.25, 0.1, 1.0).is_err());
    }
}
