//! Truncated Taylor series around s = 0 with complex coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct JetSeries {
    coeffs: Vec<Complex64>,
}

impl JetSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        JetSeries { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        JetSeries { coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect() }
    }

    pub fn constant(c: Complex64, len: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        if len > 0 {
            coeffs[0] = c;
        }
        JetSeries { coeffs }
    }

    /// The identity series s.
    pub fn variable(len: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        if len > 1 {
            coeffs[1] = Complex64::new(1.0, 0.0);
        }
        JetSeries { coeffs }
    }

    /// Jet of e^{−(s+x)²}.
    pub fn gaussian_shifted(x: f64, len: usize) -> Self {
        let s = JetSeries::variable(len);
        let shifted = s + Complex64::new(x, 0.0);
        (-(shifted.clone() * shifted)).exp()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, k: usize) -> Option<Complex64> {
        self.coeffs.get(k).copied()
    }

    /// k-th derivative at the origin.
    pub fn derivative(&self, k: usize) -> Option<Complex64> {
        self.coefficient(k).map(|c| c * libm::tgamma(k as f64 + 1.0))
    }

    pub fn truncated(&self, len: usize) -> Self {
        JetSeries { coeffs: self.coeffs.iter().copied().take(len).collect() }
    }

    /// Value of the truncated polynomial at s.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        JetSeries { coeffs: self.coeffs.iter().map(|&a| a * c).collect() }
    }

    pub fn exp(&self) -> Self {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j] * j as f64;
            }
            out[k] = acc / k as f64;
        }
        JetSeries { coeffs: out }
    }

    /// Quotient by a series with nonzero constant term.
    pub fn div(&self, other: &JetSeries) -> Result<Self> {
        let n = self.len().min(other.len());
        let d0 = other.coeffs.first().copied().unwrap_or_default();
        if d0 == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid("jet division by a series vanishing at the origin"));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * out[k - j];
            }
            out[k] = acc / d0;
        }
        Ok(JetSeries { coeffs: out })
    }
}

impl Add for JetSeries {
    type Output = JetSeries;
    fn add(self, rhs: JetSeries) -> JetSeries {
        let n = self.len().min(rhs.len());
        JetSeries { coeffs: (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect() }
    }
}

impl Sub for JetSeries {
    type Output = JetSeries;
    fn sub(self, rhs: JetSeries) -> JetSeries {
        self + (-rhs)
    }
}

impl Neg for JetSeries {
    type Output = JetSeries;
    fn neg(self) -> JetSeries {
        JetSeries { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Add<Complex64> for JetSeries {
    type Output = JetSeries;
    fn add(mut self, rhs: Complex64) -> JetSeries {
        if let Some(c) = self.coeffs.first_mut() {
            *c += rhs;
        }
        self
    }
}

impl Mul for JetSeries {
    type Output = JetSeries;
    fn mul(self, rhs: JetSeries) -> JetSeries {
        let n = self.len().min(rhs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, &a) in self.coeffs.iter().take(n).enumerate() {
            for (j, &b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        JetSeries { coeffs: out }
    }
}

impl Mul<Complex64> for JetSeries {
    type Output = JetSeries;
    fn mul(self, rhs: Complex64) -> JetSeries {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exp_of_variable_is_factorial_series() {
        let e = JetSeries::variable(8).exp();
        for k in 0..8 {
            let want = 1.0 / libm::tgamma(k as f64 + 1.0);
            assert!((e.coefficient(k).unwrap() - c(want)).norm() < 1e-15);
        }
    }

    #[test]
    fn geometric_series_by_division() {
        let one = JetSeries::constant(c(1.0), 6);
        let denom = JetSeries::constant(c(1.0), 6) - JetSeries::variable(6);
        let q = one.div(&denom).unwrap();
        assert!(q.coefficients().iter().all(|&a| (a - c(1.0)).norm() < 1e-15));
        assert!(one.div(&JetSeries::variable(6)).is_err());
    }

    #[test]
    fn gaussian_jet_matches_hermite() {
        let x = 0.4;
        let g = JetSeries::gaussian_shifted(x, 10);
        for m in 0..10 {
            let want = (-1f64).powi(m as i32) * crate::special::hermite(m, x) * (-x * x).exp() / libm::tgamma(m as f64 + 1.0);
            assert!((g.coefficient(m).unwrap() - c(want)).norm() < 1e-14);
        }
    }
}
