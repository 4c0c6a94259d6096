//! Univariate polynomial and Chebyshev representations used for fields.

use serde::{Deserialize, Serialize};

/// Polynomial `sum_k c_k (z - origin)^k` with ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub origin: f64,
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(origin: f64, coeffs: Vec<f64>) -> Self {
        Self { origin, coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(0.0, vec![c])
    }

    pub fn zero() -> Self {
        Self::new(0.0, vec![])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: f64) -> f64 {
        let s = z - self.origin;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// Derivative polynomial with the same origin.
    pub fn derivative(&self) -> Polynomial {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        Polynomial::new(self.origin, coeffs)
    }

    /// Value of the `k`-th derivative at `z`.
    pub fn eval_derivative(&self, k: usize, z: f64) -> f64 {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.derivative();
        }
        p.eval(z)
    }

    pub fn scale(&self, f: f64) -> Polynomial {
        Polynomial::new(self.origin, self.coeffs.iter().map(|c| c * f).collect())
    }

    /// Largest absolute coefficient, a cheap size indicator.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Chebyshev series `sum_k c_k T_k(t)` with `t` the affine image of `[lo, hi]` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebSeries {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    /// Chebyshev points of the second kind on `[lo, hi]`, in ascending order.
    pub fn points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|j| {
                let t = -(std::f64::consts::PI * j as f64 / n as f64).cos();
                0.5 * (lo + hi) + 0.5 * (hi - lo) * t
            })
            .collect()
    }

    /// Interpolant through values at `points(lo, hi, n)` (ascending order).
    pub fn from_values(lo: f64, hi: f64, values: &[f64]) -> Self {
        let n = values.len() - 1;
        if n == 0 {
            return Self { lo, hi, coeffs: vec![values[0]] };
        }
        // Values at t_j = -cos(pi j / n); T_k(-x) = (-1)^k T_k(x), so use x_j = cos(pi j / n).
        let mut coeffs = vec![0.0; n + 1];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, &v) in values.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += w * v * (std::f64::consts::PI * (k * j) as f64 / n as f64).cos();
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *ck = sign * 2.0 * s / n as f64;
        }
        coeffs[0] *= 0.5;
        coeffs[n] *= 0.5;
        Self { lo, hi, coeffs }
    }

    fn t(&self, z: f64) -> f64 {
        (2.0 * z - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, z: f64) -> f64 {
        let t = self.t(z);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
    }

    /// Derivative series with respect to `z`.
    pub fn derivative(&self) -> ChebSeries {
        let n = self.coeffs.len();
        if n <= 1 {
            return ChebSeries { lo: self.lo, hi: self.hi, coeffs: vec![0.0] };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.hi - self.lo);
        ChebSeries { lo: self.lo, hi: self.hi, coeffs: d.into_iter().map(|c| c * scale).collect() }
    }

    /// Magnitude of the trailing coefficients relative to the largest one.
    pub fn tail_ratio(&self, k: usize) -> f64 {
        let m = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if m == 0.0 {
            return 0.0;
        }
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(k)..].iter().fold(0.0f64, |a, c| a.max(c.abs())) / m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_eval_and_derivative() {
        let p = Polynomial::new(1.0, vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 6.0);
        assert_eq!(p.derivative().eval(2.0), 8.0);
        assert_eq!(p.eval_derivative(2, 5.0), 6.0);
    }

    #[test]
    fn chebyshev_reproduces_exponential_and_derivative() {
        let pts = ChebSeries::points(-1.0, 0.5, 30);
        let vals: Vec<f64> = pts.iter().map(|&z| (2.0 * z).exp()).collect();
        let c = ChebSeries::from_values(-1.0, 0.5, &vals);
        for z in [-1.0, -0.3, 0.2, 0.5] {
            assert!((c.eval(z) - (2.0 * z).exp()).abs() < 1e-13);
            assert!((c.derivative().eval(z) - 2.0 * (2.0 * z).exp()).abs() < 1e-11);
        }
    }
}
