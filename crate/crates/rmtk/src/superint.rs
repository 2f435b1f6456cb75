//! Reduced eigenvalue integrals L_N^(β) and their building blocks.
//!
//! Pole integrals ∫ g(s) Im (s − i0)^{−n} ds are taken as the distribution
//! π g^{(n−1)}(0)/(n−1)! on a Taylor jet. Finite-η quadrature with extrapolation
//! to η → 0 is kept alongside as an independent route.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::JetSeries;
use crate::kernels::{kernel, Beta, EnsembleSpec};
use crate::quad::{extrapolate_to_zero, integrate, integrate_with_points, try_integrate_with_points, QuadratureSpec};
use crate::special::{eps_convolution, eps_convolutions, hermite, ln_hermite_norm, osc_wavefunction, osc_wavefunctions};

const JET_GUARD: usize = 4;

/// ∫ g(s) Im (s − i0)^{−order} ds = π g^{(order−1)}(0)/(order−1)!, for complex g.
pub fn pole_functional(order: usize, g: &JetSeries) -> Result<Complex64> {
    if order == 0 {
        return Err(Error::invalid("pole order must be positive"));
    }
    g.coefficient(order - 1)
        .map(|c| c * PI)
        .ok_or(Error::InsufficientJetOrder { have: g.len(), need: order })
}

/// Real form of [`pole_functional`] for real-analytic g.
pub fn im_pole_functional(order: usize, g: &JetSeries) -> Result<f64> {
    pole_functional(order, g).map(|z| z.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
    pub rungs: Vec<(f64, f64)>,
}

fn extrapolate(ladder: &[f64], rung: impl Fn(f64) -> Result<f64>) -> Result<Extrapolated> {
    if ladder.len() < 2 {
        return Err(Error::invalid("eta ladder needs at least two rungs"));
    }
    let ys = ladder.iter().map(|&e| rung(e)).collect::<Result<Vec<_>>>()?;
    let (value, error) = extrapolate_to_zero(ladder, &ys);
    Ok(Extrapolated { value, error, rungs: ladder.iter().copied().zip(ys).collect() })
}

/// ∫ g(s) Im (s − iη)^{−order} ds at finite η for entire g. The two halves of
/// Im are integrated on the lines Im s = ∓1, away from the regularized pole.
pub fn pole_functional_finite_eta<G>(order: usize, g: G, eta: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    G: Fn(Complex64) -> Complex64,
{
    let n = -(order as i32);
    let c = 1.0;
    let lower = |s: f64| {
        let z = Complex64::new(s, -c);
        g(z) * (z - Complex64::new(0.0, eta)).powi(n)
    };
    let upper = |s: f64| {
        let z = Complex64::new(s, c);
        g(z) * (z + Complex64::new(0.0, eta)).powi(n)
    };
    let inf = f64::INFINITY;
    let a = integrate(lower, -inf, inf, spec)?.value;
    let b = integrate(upper, -inf, inf, spec)?.value;
    Ok((a - b) / Complex64::new(0.0, 2.0))
}

/// Finite-η rungs on `spec.eta_ladder` extrapolated to η → 0.
pub fn pole_functional_extrapolated<G>(order: usize, g: G, spec: &QuadratureSpec) -> Result<Extrapolated>
where
    G: Fn(Complex64) -> Complex64,
{
    spec.validate()?;
    extrapolate(&spec.eta_ladder, |eta| Ok(pole_functional_finite_eta(order, &g, eta, spec)?.re))
}

/// ∫ g(s) Im (s − iη)^{−order} ds directly on the real axis.
pub fn pole_functional_real_line<G>(order: usize, g: G, eta: f64, spec: &QuadratureSpec) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let n = -(order as i32);
    let f = |s: f64| g(s) * Complex64::new(s, -eta).powi(n).im;
    let pts = [-eta, 0.0, eta];
    Ok(integrate_with_points(f, f64::NEG_INFINITY, f64::INFINITY, &pts, spec)?.value)
}

/// Jet of a^n/(s − a) to order n − 1: coefficients −a^{n−1−k}, pole-free in a.
fn geometric_jet(n: usize, a: Complex64) -> JetSeries {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let mut p = Complex64::new(1.0, 0.0);
    for k in (0..n).rev() {
        coeffs[k] = -p;
        p *= a;
    }
    JetSeries::new(coeffs)
}

/// L_N^(2)(x_p, x_q) = −(1/π²) ∬ e^{−(s₁+x_p)²+(is₂+x_q)²} (is₂)^N/(s₁−is₂) Im (s₁−i0)^{−N}.
///
/// The s₁ pole is taken on the jet; the s₂ contour is moved to s₂ = t + i x_q
/// so that the remaining integrand is e^{−t²} times a polynomial.
pub fn l2_superint(n: usize, x_p: f64, x_q: f64, spec: &QuadratureSpec) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let g = JetSeries::gaussian_shifted(x_p, n + JET_GUARD).truncated(n);
    let f = |t: f64| -> Result<Complex64> {
        let a = Complex64::new(-x_q, t);
        let pole = pole_functional(n, &(g.clone() * geometric_jet(n, a)))?;
        Ok(-pole / (PI * PI) * (-t * t).exp())
    };
    let r = try_integrate_with_points(f, f64::NEG_INFINITY, f64::INFINITY, &[], spec)?;
    Ok(r.value.re)
}

/// ψ_N^(1)(x_q) = √π (−1)^{N−1} H_{N−1}(x_q)/2^{N−1}.
pub fn psi_goe(n: usize, x_q: f64) -> f64 {
    assert!(n >= 1, "N must be positive");
    let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
    PI.sqrt() * sign * hermite(n - 1, x_q) / 2f64.powi(n as i32 - 1)
}

/// ψ_N^(1) from its defining integral ∫ e^{(is+x_q)²}(is)^{N−1} ds, taken on
/// the line s = t + i x_q.
pub fn psi_goe_integral(n: usize, x_q: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |t: f64| Complex64::new(-x_q, t).powi(n as i32 - 1) * (-t * t).exp();
    Ok(integrate(f, f64::NEG_INFINITY, f64::INFINITY, spec)?.value.re)
}

pub fn double_factorial(n: usize) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

/// c_N^(1): zero for even N, −4π 2^{N/2}/N!! for odd N.
pub fn c_goe(n: usize) -> f64 {
    if n % 2 == 0 {
        0.0
    } else {
        -4.0 * PI * 2f64.powf(n as f64 / 2.0) / double_factorial(n)
    }
}

/// 4π(−1)^N/N! · √(2^N N! √π), the weight of I_N in ω_N^(1).
fn omega_goe_weight(n: usize) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    4.0 * PI * sign * (ln_hermite_norm(n) - libm::lgamma(n as f64 + 1.0)).exp()
}

/// ω_N^(1)(x) = −e^{−x²/2}(4π(−1)^N/N! ∫ε(x−t)H_N(t)e^{−t²/2}dt + c_N).
pub fn omega_goe(n: usize, x_p: f64) -> f64 {
    omega_goe_with_constant(n, x_p, c_goe(n))
}

pub fn omega_goe_with_constant(n: usize, x_p: f64, c: f64) -> f64 {
    -(-x_p * x_p / 2.0).exp() * (omega_goe_weight(n) * eps_convolution(n, x_p) + c)
}

/// Integration constant implied by a value of ω_N^(1) at x.
pub fn c_goe_from_omega(n: usize, x: f64, omega: f64) -> f64 {
    -omega * (x * x / 2.0).exp() - omega_goe_weight(n) * eps_convolution(n, x)
}

/// 2D integral ∬ |a−b| F(a, b) da db in rotated coordinates u = (a+b)/2,
/// v = (a−b)/2, folded onto u ≥ 0 with (u, v) → (−u, −v).
fn rotated_plane_integral<F>(f: F, x: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let span = 10.0;
    let umax = x.abs() + span;
    let g = |u: f64, v: f64| 2.0 * (2.0 * v).abs() * (f(u + v, u - v) + f(-u - v, -u + v));
    let outer = |u: f64| -> Result<f64> {
        let pts = [-u, 0.0, u];
        Ok(integrate_with_points(|v| g(u, v), -span, span, &pts, spec)?.value)
    };
    Ok(try_integrate_with_points(outer, 0.0, umax, &[], spec)?.value)
}

/// ω_N^(1)(0) in terms of b_N: 4π(−1)^N b_N/N! − c_N.
fn omega_goe_origin(n: usize, b: f64, c: f64) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    4.0 * PI * sign * b / libm::tgamma(n as f64 + 1.0) - c
}

/// Constants c_{n0}, c_{n0+2}, …, up to n_max, from c_{n0} by the second
/// recursion line at x = 0, with b_N by quadrature.
pub fn c_goe_by_recursion(n0: usize, c_start: f64, n_max: usize, spec: &QuadratureSpec) -> Result<Vec<(usize, f64)>> {
    let mut out = vec![(n0, c_start)];
    let mut n = n0;
    let mut c = c_start;
    while n + 2 <= n_max {
        let nf = n as f64;
        let w_n = omega_goe_origin(n, b_quadrature(n, spec)?, c);
        let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let source = 4.0 * PI * sign * hermite(n + 1, 0.0) / libm::tgamma(nf + 2.0);
        let w_next = (w_n - source) / (nf / 2.0 + 1.0);
        c = omega_goe_origin(n + 2, b_quadrature(n + 2, spec)?, 0.0) - w_next;
        n += 2;
        out.push((n, c));
    }
    Ok(out)
}

/// Bracket H_{N+1}(0) + (N+1) b_N − ½ b_{N+2}, zero for every N.
pub fn int_const_bracket(n: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(hermite(n + 1, 0.0) + (n as f64 + 1.0) * b_quadrature(n, spec)? - 0.5 * b_quadrature(n + 2, spec)?)
}

/// Residuals of the two ω recursion lines at x, derivatives by a five-point
/// stencil of step h:
/// −(N/2+1)(ω'_{N+2} + 2xω_{N+2}) − ω'_N and
/// ω_N − (N/2+1)ω_{N+2} − 4π(−1)^{N+1}H_{N+1}(x)e^{−x²}/(N+1)!.
pub fn omega_recursion_residuals(n: usize, x: f64, h: f64) -> (f64, f64) {
    let d = |m: usize| {
        let w = |t: f64| omega_goe(m, t);
        (w(x - 2.0 * h) - 8.0 * w(x - h) + 8.0 * w(x + h) - w(x + 2.0 * h)) / (12.0 * h)
    };
    let k = n as f64 / 2.0 + 1.0;
    let line1 = -k * (d(n + 2) + 2.0 * x * omega_goe(n + 2, x)) - d(n);
    let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let source = 4.0 * PI * sign * hermite(n + 1, x) * (-x * x).exp() / libm::tgamma(n as f64 + 2.0);
    let line2 = omega_goe(n, x) - k * omega_goe(n + 2, x) - source;
    (line1, line2)
}

/// ω_N^(1)(x) at finite η on the real plane:
/// ∬ |a−b| e^{−((a+x)²+(b+x)²)/2} Im[(a−iη)^λ (b−iη)^λ], λ = −(N/2+1).
pub fn omega_goe_finite_eta(n: usize, x: f64, eta: f64, spec: &QuadratureSpec) -> Result<f64> {
    let pow = power_fn(n);
    let f = |a: f64, b: f64| {
        let w = (-((a + x) * (a + x) + (b + x) * (b + x)) / 2.0).exp();
        w * (pow(Complex64::new(a, -eta)) * pow(Complex64::new(b, -eta))).im
    };
    rotated_plane_integral(f, x, spec)
}

/// ω_N^(1)(x) from finite-η rungs on `spec.eta_ladder`, extrapolated to η → 0.
pub fn omega_goe_extrapolated(n: usize, x: f64, spec: &QuadratureSpec) -> Result<Extrapolated> {
    spec.validate()?;
    extrapolate(&spec.eta_ladder, |eta| omega_goe_finite_eta(n, x, eta, spec))
}

/// ω_N^(1)(x) with both variables on the line Im = −c; exact for any c > 0.
pub fn omega_goe_contour(n: usize, x: f64, c: f64, spec: &QuadratureSpec) -> Result<f64> {
    let pow = power_fn(n);
    let f = |a: f64, b: f64| {
        let za = Complex64::new(a, -c);
        let zb = Complex64::new(b, -c);
        let w = (-((za + x) * (za + x) + (zb + x) * (zb + x)) / 2.0).exp();
        (w * pow(za) * pow(zb)).im
    };
    rotated_plane_integral(f, x, spec)
}

/// z ↦ z^{−(N/2+1)} on the principal branch.
fn power_fn(n: usize) -> impl Fn(Complex64) -> Complex64 {
    move |z: Complex64| {
        if n % 2 == 0 {
            z.powi(-(n as i32 / 2 + 1))
        } else {
            z.powf(-(n as f64 / 2.0 + 1.0))
        }
    }
}

/// M_N^(1)(x_p, x_q) = (N/8π²) ω_N^(1)(x_p) ψ_N^(1)(x_q).
pub fn m_goe(n: usize, x_p: f64, x_q: f64) -> f64 {
    n as f64 / (8.0 * PI * PI) * omega_goe(n, x_p) * psi_goe(n, x_q)
}

/// L_N^(1) = L_N^(2) + M_N^(1).
pub fn l1_superint(n: usize, x_p: f64, x_q: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(l2_superint(n, x_p, x_q, spec)? + m_goe(n, x_p, x_q))
}

/// ψ_N^(4)(x_q) = (π/(2N)!) e^{−2x_q²} H_{2N}(√2 x_q).
pub fn psi_gse(n: usize, x_q: f64) -> f64 {
    let z = SQRT_2 * x_q;
    let m = 2 * n;
    PI * osc_wavefunction(m, z) * (-z * z / 2.0).exp() * (ln_hermite_norm(m) - libm::lgamma(m as f64 + 1.0)).exp()
}

/// ψ_N^(4) from ∫ e^{−(s+√2x_q)²} Im (s−i0)^{−(2N+1)} ds on the jet.
pub fn psi_gse_integral(n: usize, x_q: f64) -> Result<f64> {
    let order = 2 * n + 1;
    im_pole_functional(order, &JetSeries::gaussian_shifted(SQRT_2 * x_q, order + JET_GUARD))
}

/// ω_N^(4)(x_p) = −(√π/2^{2N−3}) e^{x_p²} ∫ ε(√2x_p−t) e^{−t²/2} H_{2N−1}(t) dt.
pub fn omega_gse(n: usize, x_p: f64) -> f64 {
    assert!(n >= 1, "N must be positive");
    let m = 2 * n - 1;
    -PI.sqrt() * 2f64.powi(3 - 2 * n as i32) * (x_p * x_p + ln_hermite_norm(m)).exp() * eps_convolution(m, SQRT_2 * x_p)
}

/// ω_N^(4) from ∬ |s₁−s₂| e^{½(is₁+z)²+½(is₂+z)²}(is₁ is₂)^{N−1}, z = √2x_p,
/// with both contours moved to s = a + iz.
pub fn omega_gse_integral(n: usize, x_p: f64, spec: &QuadratureSpec) -> Result<f64> {
    let z = SQRT_2 * x_p;
    let k = n as i32 - 1;
    let f = |a: f64, b: f64| {
        let p = (Complex64::new(-z, a) * Complex64::new(-z, b)).powi(k);
        (-(a * a + b * b) / 2.0).exp() * p.re
    };
    rotated_plane_integral(f, 0.0, spec)
}

/// M_N^(4) = (2N/8π²) ω_N^(4)(x_p) ψ_N^(4)(x_q).
pub fn m_gse(n: usize, x_p: f64, x_q: f64) -> f64 {
    2.0 * n as f64 / (8.0 * PI * PI) * omega_gse(n, x_p) * psi_gse(n, x_q)
}

/// L_N^(4) = L_{2N}^(2)(√2x_q, √2x_p) − M_N^(4)(x_p, x_q).
pub fn l4_superint(n: usize, x_p: f64, x_q: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(l2_superint(2 * n, SQRT_2 * x_q, SQRT_2 * x_p, spec)? - m_gse(n, x_p, x_q))
}

/// L_N^(4) as a 2N-term sum plus the ε-term of order 2N−1.
pub fn l4_partial_sum_form(n: usize, x_p: f64, x_q: f64) -> f64 {
    let (a, b) = (SQRT_2 * x_p, SQRT_2 * x_q);
    let m = 2 * n;
    let pa = osc_wavefunctions(m, a);
    let pb = osc_wavefunctions(m, b);
    let sum: f64 = (0..m).map(|k| pa[k] * pb[k]).sum();
    let tail = (m as f64 / 2.0).sqrt() * pb[m] * eps_convolutions(m - 1, a)[m - 1];
    (x_p * x_p - x_q * x_q).exp() * (sum + tail)
}

/// L_N^(4) as K_{2N+1}^(2) plus the ε-term of order 2N+1.
pub fn l4_stepped_form(n: usize, x_p: f64, x_q: f64) -> f64 {
    let (a, b) = (SQRT_2 * x_p, SQRT_2 * x_q);
    let m = 2 * n + 1;
    let pa = osc_wavefunctions(m, a);
    let pb = osc_wavefunctions(m, b);
    let sum: f64 = (0..m).map(|k| pa[k] * pb[k]).sum();
    let tail = (m as f64 / 2.0).sqrt() * pb[m - 1] * eps_convolutions(m, a)[m];
    (x_p * x_p - x_q * x_q).exp() * (sum + tail)
}

/// L_N^(β)(x_p, x_q) by the reduced-integral route.
pub fn l_superint(ens: EnsembleSpec, x_p: f64, x_q: f64, spec: &QuadratureSpec) -> Result<f64> {
    match ens.beta {
        Beta::Orthogonal => l1_superint(ens.n, x_p, x_q, spec),
        Beta::Unitary => l2_superint(ens.n, x_p, x_q, spec),
        Beta::Symplectic => l4_superint(ens.n, x_p, x_q, spec),
    }
}

/// e^{γ(x_p²−x_q²)/2}/√|γ|, mapping L_N^(β)(x_p, x_q) to K_N^(β)(x_q, x_p).
pub fn superint_prefactor(beta: Beta, x_p: f64, x_q: f64) -> f64 {
    let g = beta.gamma() as f64;
    (g * (x_p * x_p - x_q * x_q) / 2.0).exp() / g.abs().sqrt()
}

/// K_N^(β)(x, y) from L_N^(β)(y, x).
pub fn kernel_superint(ens: EnsembleSpec, x: f64, y: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(superint_prefactor(ens.beta, y, x) * l_superint(ens, y, x, spec)?)
}

/// Closure residual of the superint route against the analytic kernel.
pub fn closure_residual(ens: EnsembleSpec, x: f64, y: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(kernel_superint(ens, x, y, spec)? - kernel(ens, x, y))
}

/// b_N = ∫ ε(t) e^{−t²/2} H_N(t) dt by quadrature.
pub fn b_quadrature(n: usize, spec: &QuadratureSpec) -> Result<f64> {
    let f = |t: f64| (-t * t / 2.0).exp() * hermite(n, t);
    let right = integrate(f, 0.0, f64::INFINITY, spec)?.value;
    let left = integrate(f, f64::NEG_INFINITY, 0.0, spec)?.value;
    Ok(0.5 * (right - left))
}

/// b_N = −√(2^N N! √π) I_N(0).
pub fn b_closed(n: usize) -> f64 {
    -ln_hermite_norm(n).exp() * eps_convolution(n, 0.0)
}
