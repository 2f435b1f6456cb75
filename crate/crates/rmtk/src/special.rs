//! Hermite polynomials, oscillator wave functions and their ε-convolutions.
//!
//! Wave functions are generated by the normalized three-term recursion with a
//! running log scale, so they stay finite for n ≤ 1000 and |z| ≤ 40.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::Result;
use crate::jet::JetSeries;
use crate::quad::QuadratureSpec;

const RESCALE: f64 = 1e150;

/// Physicists' Hermite polynomial H_n(z).
pub fn hermite(n: usize, z: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// H_0(z), …, H_nmax(z).
pub fn hermite_all(nmax: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax >= 1 {
        out.push(2.0 * z);
    }
    for k in 1..nmax {
        let next = 2.0 * z * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// ln √(2^n n! √π), the norm relating H_n e^{−z²/2} to φ_n.
pub fn ln_hermite_norm(n: usize) -> f64 {
    0.5 * (n as f64 * std::f64::consts::LN_2 + libm::lgamma(n as f64 + 1.0) + 0.5 * PI.ln())
}

fn apply_scale(v: f64, log_scale: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if log_scale > -700.0 && log_scale < 700.0 {
        v * log_scale.exp()
    } else {
        v.signum() * (v.abs().ln() + log_scale).exp()
    }
}

/// φ_0(z), …, φ_nmax(z).
pub fn osc_wavefunctions(nmax: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut log_scale = -0.5 * z * z - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(apply_scale(cur, log_scale));
    for n in 0..nmax {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * z * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(apply_scale(cur, log_scale));
    }
    out
}

/// Oscillator wave function φ_n(z) = (2^n n! √π)^{−1/2} H_n(z) e^{−z²/2}.
pub fn osc_wavefunction(n: usize, z: f64) -> f64 {
    osc_wavefunctions(n, z)[n]
}

/// φ_n'(z) from the ladder relation.
pub fn osc_derivative(n: usize, z: f64) -> f64 {
    let p = osc_wavefunctions(n + 1, z);
    osc_derivative_from(&p, n)
}

/// φ_n' given φ_0..=φ_{n+1} at the same point.
pub fn osc_derivative_from(phis: &[f64], n: usize) -> f64 {
    let nf = n as f64;
    let down = if n == 0 { 0.0 } else { (nf / 2.0).sqrt() * phis[n - 1] };
    down - ((nf + 1.0) / 2.0).sqrt() * phis[n + 1]
}

/// ½ sign(z), with eps(0) = 0.
pub fn eps(z: f64) -> f64 {
    if z > 0.0 {
        0.5
    } else if z < 0.0 {
        -0.5
    } else {
        0.0
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// I_0(x), …, I_nmax(x) with I_n(x) = ∫ ε(x−t) φ_n(t) dt.
pub fn eps_convolutions(nmax: usize, x: f64) -> Vec<f64> {
    let phis = osc_wavefunctions(nmax, x);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(0.5 * SQRT_2 * PI.powf(0.25) * erf(x / SQRT_2));
    if nmax >= 1 {
        out.push(-SQRT_2 * phis[0]);
    }
    for n in 1..nmax {
        let nf = n as f64;
        let next = ((nf / 2.0).sqrt() * out[n - 1] - phis[n]) / ((nf + 1.0) / 2.0).sqrt();
        out.push(next);
    }
    out
}

pub fn eps_convolution(n: usize, x: f64) -> f64 {
    eps_convolutions(n, x)[n]
}

/// I_n(x) by adaptive quadrature, independent of the recursion.
pub fn eps_convolution_quadrature(n: usize, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |t: f64| osc_wavefunction(n, t);
    let left = crate::quad::integrate(f, f64::NEG_INFINITY, x, spec)?.value;
    let right = crate::quad::integrate(f, x, f64::INFINITY, spec)?.value;
    Ok(0.5 * (left - right))
}

/// ∫ φ_n over the real line.
pub fn phi_integral(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let mut acc = SQRT_2 * PI.powf(0.25);
    for j in 1..=n / 2 {
        acc *= ((2 * j - 1) as f64 / (2 * j) as f64).sqrt();
    }
    acc
}

/// α_N(x): φ_{N−1}/∫φ_{N−1} for odd N, zero for even N.
pub fn alpha(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "alpha needs N >= 1");
    if n % 2 == 0 {
        0.0
    } else {
        osc_wavefunction(n - 1, x) / phi_integral(n - 1)
    }
}

/// ∫_0^x α_N.
pub fn alpha_antiderivative(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "alpha needs N >= 1");
    if n % 2 == 0 {
        0.0
    } else {
        // I_{N−1}(0) = 0 for even N−1
        eps_convolution(n - 1, x) / phi_integral(n - 1)
    }
}

/// H_N(x) from ((−1)^N N!/π) e^{x²} Im ∫ e^{−(ξ+x)²}/(ξ−i0)^{N+1} dξ, with the
/// pole integral taken as a distribution on the Taylor jet.
pub fn hermite_integral_repr(n: usize, x: f64) -> Result<f64> {
    let g = JetSeries::gaussian_shifted(x, n + 5);
    let pole = crate::superint::im_pole_functional(n + 1, &g)?;
    Ok(sign(n) * (libm::lgamma(n as f64 + 1.0) + x * x).exp() / PI * pole)
}

/// Same representation with the pole integral done at finite η and
/// extrapolated to η → 0 over `spec.eta_ladder`.
pub fn hermite_integral_repr_finite_eta(n: usize, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let g = |s: Complex64| (-(s + x) * (s + x)).exp();
    let pole = crate::superint::pole_functional_extrapolated(n + 1, g, spec)?;
    Ok(sign(n) * (libm::lgamma(n as f64 + 1.0) + x * x).exp() / PI * pole.value)
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
