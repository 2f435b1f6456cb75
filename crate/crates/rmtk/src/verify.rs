//! Verification suites comparing independent routes, collected into a
//! serializable report.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles_mc::{eigen_histogram, kernel_mc_many, z1_mc, MCConfig};
use crate::error::Result;
use crate::grid::Grid;
use crate::jet::JetSeries;
use crate::kernels::{kernel, kernel_gue, kernel_gue_christoffel_darboux, Beta, EnsembleSpec};
use crate::quad::QuadratureSpec;
use crate::special::{eps_convolution_quadrature, osc_wavefunction};
use crate::superint::*;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    /// Passes when |got − expected| ≤ tol.
    pub fn new(name: impl Into<String>, expected: f64, got: f64, tol: f64) -> Self {
        let pass = (got - expected).abs() <= tol;
        Check { name: name.into(), expected, got, tol, pass, error: None }
    }

    pub fn from_result(name: impl Into<String>, expected: f64, got: Result<f64>, tol: f64) -> Self {
        match got {
            Ok(v) => Check::new(name, expected, v, tol),
            Err(e) => Check { name: name.into(), expected, got: f64::NAN, tol, pass: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    pub fn new(suite: impl Into<String>, checks: Vec<Check>) -> Self {
        let failed = checks.iter().filter(|c| !c.pass).count();
        Report { schema: REPORT_SCHEMA, suite: suite.into(), summary: Summary { total: checks.len(), failed }, checks }
    }

    pub fn combine(suite: impl Into<String>, reports: Vec<Report>) -> Self {
        Report::new(suite, reports.into_iter().flat_map(|r| r.checks).collect())
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Worst |value| over fallible evaluations; the first error wins.
fn worst_abs(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in values {
        let v = v?;
        worst = if v.is_nan() { f64::NAN } else { worst.max(v.abs()) };
    }
    Ok(worst)
}

/// 2D validation integrals are run no tighter than 1e−10.
fn plane_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec { abs_tol: spec.abs_tol.max(1e-10), rel_tol: spec.rel_tol.max(1e-10), ..spec.clone() }
}

/// Integration constants c_N and ω_1(0) by independent finite-η quadrature.
pub fn constants_suite(spec: &QuadratureSpec) -> Report {
    let plane = plane_spec(spec);
    let mut checks = Vec::new();

    let c0 = worst_abs(spec.eta_ladder.iter().map(|&eta| {
        omega_goe_finite_eta(0, 0.0, eta, &plane).map(|w| c_goe_from_omega(0, 0.0, w))
    }));
    checks.push(Check::from_result("c_0 from finite-eta omega_0(0), all rungs", 0.0, c0, 0.0));

    let omega1 = omega_goe_extrapolated(1, 0.0, &plane).map(|e| e.value);
    let want_omega1 = -8.0 * PI + 4.0 * SQRT_2 * PI;
    let c1 = omega1.clone().map(|w| c_goe_from_omega(1, 0.0, w));
    checks.push(Check::from_result("omega_1(0) finite-eta extrapolated", want_omega1, omega1, 1e-6));
    checks.push(Check::from_result("c_1 from omega_1(0)", -4.0 * SQRT_2 * PI, c1.clone(), 1e-8));
    checks.push(Check::from_result(
        "omega_1(0) displaced contour",
        want_omega1,
        omega_goe_contour(1, 0.0, 1.0, &plane),
        1e-8,
    ));

    match c1.and_then(|c| c_goe_by_recursion(1, c, 7, spec)) {
        Ok(seq) => {
            for (n, c) in seq.into_iter().skip(1) {
                checks.push(Check::new(format!("c_{n} by recursion from c_1"), c_goe(n), c, 1e-8));
            }
        }
        Err(e) => {
            for n in [3, 5, 7] {
                checks.push(Check::from_result(format!("c_{n} by recursion from c_1"), c_goe(n), Err(e.clone()), 1e-8));
            }
        }
    }
    Report::new("constants", checks)
}

/// ω recursion lines, the integration-constant bracket and the c_N sequence.
pub fn recursion_suite(n_max: usize, spec: &QuadratureSpec) -> Report {
    let mut checks = Vec::new();
    let xs: Vec<f64> = (0..=12).map(|i| -1.5 + 0.25 * i as f64).collect();
    for n in 0..=n_max.saturating_sub(2) {
        let res: Vec<(f64, f64)> = xs.iter().map(|&x| omega_recursion_residuals(n, x, 1e-3)).collect();
        let w1 = res.iter().fold(0.0f64, |m, r| m.max(r.0.abs()));
        let w2 = res.iter().fold(0.0f64, |m, r| m.max(r.1.abs()));
        checks.push(Check::new(format!("omega recursion line 1, N={n}, max residual"), 0.0, w1, 1e-5));
        checks.push(Check::new(format!("omega recursion line 2, N={n}, max residual"), 0.0, w2, 1e-5));
    }
    for n in 0..=n_max {
        checks.push(Check::from_result(
            format!("integration-constant bracket N={n}"),
            0.0,
            int_const_bracket(n, spec),
            1e-8,
        ));
    }
    match c_goe_by_recursion(1, c_goe(1), n_max.max(1), spec) {
        Ok(seq) => {
            for (n, c) in seq.into_iter().skip(1) {
                checks.push(Check::new(format!("c_{n} recursion vs closed form"), c_goe(n), c, 1e-8));
            }
        }
        Err(e) => checks.push(Check::from_result("c_N recursion", 0.0, Err(e), 1e-8)),
    }
    Report::new("recursions", checks)
}

/// ε-convolution stepping identity against quadrature, and Christoffel–Darboux.
pub fn identity_suite(spec: &QuadratureSpec) -> Report {
    let mut checks = Vec::new();
    let xs = [-2.0, -0.7, 0.0, 0.3, 1.9, 4.0];
    for n in 1..40 {
        let nf = n as f64;
        let r = worst_abs(xs.iter().map(|&x| {
            let lo = eps_convolution_quadrature(n - 1, x, spec)?;
            let hi = eps_convolution_quadrature(n + 1, x, spec)?;
            Ok((nf / 2.0).sqrt() * lo - osc_wavefunction(n, x) - ((nf + 1.0) / 2.0).sqrt() * hi)
        }));
        checks.push(Check::from_result(format!("eps stepping identity n={n}, max residual"), 0.0, r, 1e-10));
    }
    let grid: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
    for n in 1..=30 {
        let mut worst: f64 = 0.0;
        for &x in &grid {
            for &y in &grid {
                if x != y {
                    worst = worst.max((kernel_gue(n, x, y) - kernel_gue_christoffel_darboux(n, x, y)).abs());
                }
            }
        }
        checks.push(Check::new(format!("Christoffel-Darboux N={n}, max residual"), 0.0, worst, 1e-9));
    }
    Report::new("identities", checks)
}

/// Off-diagonal points of the 5×5 grid on [−1.5, 1.5]².
pub fn closure_grid() -> Vec<(f64, f64)> {
    let g: Vec<f64> = (0..5).map(|i| -1.5 + 0.75 * i as f64).collect();
    g.iter().flat_map(|&x| g.iter().filter(move |&&y| y != x).map(move |&y| (x, y))).collect()
}

/// Largest N covered by the closure suite for each ensemble.
pub fn default_closure_n(beta: Beta) -> usize {
    match beta {
        Beta::Symplectic => 4,
        _ => 8,
    }
}

/// Superintegral route equals the analytic kernel on the closure grid.
pub fn closure_checks(ens: EnsembleSpec, spec: &QuadratureSpec) -> Check {
    let r = worst_abs(closure_grid().into_iter().map(|(x, y)| closure_residual(ens, x, y, spec)));
    Check::from_result(format!("closure beta={} N={}, max residual", ens.beta.index(), ens.n), 0.0, r, 1e-7)
}

/// e^{(x_p²−x_q²)/2} L_N^(2) = K_N^(2) at seeded random points.
pub fn gue_identity_checks(n_max: usize, points: usize, seed: u64, spec: &QuadratureSpec) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..points).map(|_| (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
    (1..=n_max)
        .map(|n| {
            let r = worst_abs(pts.iter().map(|&(xp, xq)| {
                Ok((0.5 * (xp * xp - xq * xq)).exp() * l2_superint(n, xp, xq, spec)? - kernel_gue(n, xp, xq))
            }));
            Check::from_result(format!("GUE reduced integral N={n}, max residual"), 0.0, r, 1e-8)
        })
        .collect()
}

/// Building-block checks of the superintegral route.
pub fn building_block_checks(spec: &QuadratureSpec) -> Vec<Check> {
    let mut checks = Vec::new();
    let x = 0.3;
    for order in 1..=9 {
        let jet = JetSeries::gaussian_shifted(x, order + 4);
        let exact = pole_functional(order, &jet).map(|v| v.re);
        let g = move |s: Complex64| (-(s + x) * (s + x)).exp();
        let ladder = pole_functional_extrapolated(order, g, spec).map(|e| e.value);
        let check = match exact {
            Ok(e) => Check::from_result(format!("pole functional order {order}, finite eta"), e, ladder, 1e-6),
            Err(err) => Check::from_result(format!("pole functional order {order}, finite eta"), 0.0, Err(err), 1e-6),
        };
        checks.push(check);
    }
    for n in 1..=6 {
        checks.push(Check::from_result(
            format!("psi GOE N={n} defining integral"),
            psi_goe(n, 0.7),
            psi_goe_integral(n, 0.7, spec),
            1e-8,
        ));
    }
    for n in 1..=4 {
        checks.push(Check::from_result(format!("psi GSE N={n} defining integral"), psi_gse(n, 0.4), psi_gse_integral(n, 0.4), 1e-8));
    }
    let plane = plane_spec(spec);
    for n in 1..=3 {
        checks.push(Check::from_result(
            format!("omega GSE N={n} 2D integral at 0"),
            omega_gse(n, 0.0),
            omega_gse_integral(n, 0.0, &plane),
            1e-6,
        ));
    }
    checks.push(Check::from_result("omega GSE N=1 2D integral at 1.2", omega_gse(1, 1.2), omega_gse_integral(1, 1.2, &plane), 1e-6));
    for n in 1..=4 {
        let mut worst: f64 = 0.0;
        for (x, y) in closure_grid() {
            worst = worst.max((l4_partial_sum_form(n, x, y) - l4_stepped_form(n, x, y)).abs());
        }
        checks.push(Check::new(format!("GSE partial-sum vs stepped form N={n}"), 0.0, worst, 1e-10));
    }
    checks
}

/// Superintegral closure for the given ensembles (all by default) plus
/// building blocks when no ensemble is singled out.
pub fn superint_suite(ensembles: Option<&[EnsembleSpec]>, spec: &QuadratureSpec) -> Report {
    let mut checks = Vec::new();
    match ensembles {
        Some(list) => checks.extend(list.iter().map(|&e| closure_checks(e, spec))),
        None => {
            for beta in [Beta::Orthogonal, Beta::Unitary, Beta::Symplectic] {
                for n in 1..=default_closure_n(beta) {
                    checks.push(closure_checks(EnsembleSpec { beta, n }, spec));
                }
            }
            checks.extend(gue_identity_checks(10, 10, 2024, spec));
            checks.extend(building_block_checks(spec));
        }
    }
    Report::new("superint", checks)
}

/// Point pairs used by the Monte Carlo suite.
pub const MC_PAIRS: [(f64, f64); 5] = [(0.5, -0.5), (-0.8, 0.4), (1.0, 0.0), (-0.3, 0.9), (0.2, -1.1)];

/// Monte Carlo kernels within 3 standard errors of the analytic values.
pub fn mc_suite(config: &MCConfig) -> Result<Report> {
    let ens = config.ensemble;
    let mut checks = Vec::new();
    let est = kernel_mc_many(config, &MC_PAIRS)?;
    for (&(x, y), v) in MC_PAIRS.iter().zip(&est) {
        checks.push(Check::new(
            format!("kernel_mc beta={} N={} ({x}, {y}) within 3 sigma", ens.beta.index(), ens.n),
            kernel(ens, x, y),
            v.value,
            3.0 * v.uncertainty,
        ));
    }
    let z = z1_mc(config, 0.3, 0.3)?;
    checks.push(Check::new("Z_1 at coincident arguments", 1.0, z.mean.re, 0.0));
    let h = eigen_histogram(config, &Grid::new(-3.0, 3.0, 0.25)?)?;
    checks.push(Check::new("histogram mass", ens.n as f64, h.mass(), 1e-12 * ens.n as f64));
    Ok(Report::new("mc", checks))
}
