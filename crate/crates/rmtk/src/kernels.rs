//! Analytic kernels of the Gaussian ensembles and the D, I, J operators.
//!
//! Argument order follows the correlation-function convention: `kernel_goe(n, x, y)`
//! carries the ε-convolution in its second argument and α in its first.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{alpha, alpha_antiderivative, eps, eps_convolutions, osc_derivative_from, osc_wavefunctions};

pub const DEFAULT_DEGENERACY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Beta {
    Orthogonal,
    Unitary,
    Symplectic,
}

impl Beta {
    pub fn from_index(beta: u32) -> Result<Self> {
        match beta {
            1 => Ok(Beta::Orthogonal),
            2 => Ok(Beta::Unitary),
            4 => Ok(Beta::Symplectic),
            _ => Err(Error::invalid(format!("beta must be 1, 2 or 4, got {beta}"))),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Beta::Orthogonal => 1,
            Beta::Unitary => 2,
            Beta::Symplectic => 4,
        }
    }

    pub fn gamma(self) -> i32 {
        match self {
            Beta::Symplectic => -2,
            _ => 1,
        }
    }

    pub fn gamma_abs(self) -> u32 {
        self.gamma().unsigned_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub beta: Beta,
    /// Level number; for the GSE the number of Kramers doublets.
    pub n: usize,
}

impl EnsembleSpec {
    pub fn new(beta: Beta, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("level number N must be positive"));
        }
        Ok(EnsembleSpec { beta, n })
    }

    pub fn from_index(beta: u32, n: usize) -> Result<Self> {
        EnsembleSpec::new(Beta::from_index(beta)?, n)
    }

    pub fn gamma(&self) -> i32 {
        self.beta.gamma()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyArgs {
    pub x_p: f64,
    pub x_q: f64,
    pub eta: f64,
}

impl EnergyArgs {
    pub fn new(x_p: f64, x_q: f64, eta: f64) -> Result<Self> {
        if !(x_p.is_finite() && x_q.is_finite()) {
            return Err(Error::invalid("energies must be finite"));
        }
        if !(eta > 0.0) {
            return Err(Error::invalid("eta must be positive"));
        }
        Ok(EnergyArgs { x_p, x_q, eta })
    }

    /// x_p − iη.
    pub fn x_p_minus(&self) -> Complex64 {
        Complex64::new(self.x_p, -self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Analytic,
    Mc,
    Superint,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Analytic => "analytic",
            Route::Mc => "mc",
            Route::Superint => "superint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub route: Route,
    pub uncertainty: f64,
}

impl KernelValue {
    pub fn exact(value: f64, route: Route) -> Self {
        debug_assert!(route != Route::Mc);
        KernelValue { value, route, uncertainty: 0.0 }
    }
}

/// Values of φ_k and I_k at one point, enough for kernels of order ≤ m.
struct Ladder {
    phi: Vec<f64>,
    conv: Vec<f64>,
}

impl Ladder {
    fn new(m: usize, z: f64) -> Self {
        Ladder { phi: osc_wavefunctions(m + 1, z), conv: eps_convolutions(m, z) }
    }

    fn dphi(&self, k: usize) -> f64 {
        osc_derivative_from(&self.phi, k)
    }
}

fn k2_sum(m: usize, lx: &Ladder, ly: &Ladder) -> f64 {
    (0..m).map(|k| lx.phi[k] * ly.phi[k]).sum()
}

/// Mehta's S_m(x, y) = K_m^(2)(x, y) + √(m/2) φ_{m−1}(x) I_m(y) and its pieces.
fn mehta_s(m: usize, lx: &Ladder, ly: &Ladder) -> f64 {
    k2_sum(m, lx, ly) + (m as f64 / 2.0).sqrt() * lx.phi[m - 1] * ly.conv[m]
}

fn mehta_s_dy(m: usize, lx: &Ladder, ly: &Ladder) -> f64 {
    let sum: f64 = (0..m).map(|k| lx.phi[k] * ly.dphi(k)).sum();
    sum + (m as f64 / 2.0).sqrt() * lx.phi[m - 1] * ly.phi[m]
}

fn mehta_s_eps(m: usize, lx: &Ladder, ly: &Ladder) -> f64 {
    let sum: f64 = (0..m).map(|k| lx.conv[k] * ly.phi[k]).sum();
    sum + (m as f64 / 2.0).sqrt() * lx.conv[m - 1] * ly.conv[m]
}

/// K_N^(2)(x, y) = Σ_{n<N} φ_n(x) φ_n(y).
pub fn kernel_gue(n: usize, x_p: f64, x_q: f64) -> f64 {
    assert!(n >= 1, "N must be positive");
    let a = osc_wavefunctions(n - 1, x_p);
    let b = osc_wavefunctions(n - 1, x_q);
    a.iter().zip(&b).map(|(u, v)| u * v).sum()
}

/// Christoffel–Darboux closed form of K_N^(2) off the diagonal.
pub fn kernel_gue_christoffel_darboux(n: usize, x_p: f64, x_q: f64) -> f64 {
    let a = osc_wavefunctions(n, x_p);
    let b = osc_wavefunctions(n, x_q);
    (n as f64 / 2.0).sqrt() * (a[n] * b[n - 1] - a[n - 1] * b[n]) / (x_p - x_q)
}

/// K_N^(1)(x, y) = K_N^(2)(x, y) + √(N/2) φ_{N−1}(x) I_N(y) + α_N(x).
pub fn kernel_goe(n: usize, x_p: f64, x_q: f64) -> f64 {
    s_mehta(n, x_p, x_q) + alpha(n, x_p)
}

/// S_N(x, y) = K_N^(1)(x, y) − α_N(x).
pub fn s_mehta(n: usize, x_p: f64, x_q: f64) -> f64 {
    assert!(n >= 1, "N must be positive");
    mehta_s(n, &Ladder::new(n, x_p), &Ladder::new(n, x_q))
}

/// K_N^(4)(x, y) = S_{2N+1}(√2x, √2y)/√2; no α term for any N.
pub fn kernel_gse(n: usize, x_p: f64, x_q: f64) -> f64 {
    assert!(n >= 1, "N must be positive");
    let m = 2 * n + 1;
    mehta_s(m, &Ladder::new(m, SQRT_2 * x_p), &Ladder::new(m, SQRT_2 * x_q)) / SQRT_2
}

pub fn kernel(ens: EnsembleSpec, x_p: f64, x_q: f64) -> f64 {
    match ens.beta {
        Beta::Orthogonal => kernel_goe(ens.n, x_p, x_q),
        Beta::Unitary => kernel_gue(ens.n, x_p, x_q),
        Beta::Symplectic => kernel_gse(ens.n, x_p, x_q),
    }
}

/// R_1(x) = K_N^(β)(x, x); GSE doublets counted once.
pub fn level_density(ens: EnsembleSpec, x: f64) -> f64 {
    kernel(ens, x, x)
}

/// A two-point kernel with the derivative and ε-integral needed by D and I.
pub trait KernelFn {
    fn value(&self, x: f64, y: f64) -> f64;
    /// ∂K(x, y)/∂y.
    fn d_second(&self, x: f64, y: f64) -> f64;
    /// ∫ ε(x − t) K(t, y) dt.
    fn eps_first(&self, x: f64, y: f64) -> f64;
}

/// The analytic kernels, plus Mehta's S_N for the GOE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Gue(usize),
    Goe(usize),
    Gse(usize),
    MehtaS(usize),
}

impl Kernel {
    pub fn of(ens: EnsembleSpec) -> Self {
        match ens.beta {
            Beta::Orthogonal => Kernel::Goe(ens.n),
            Beta::Unitary => Kernel::Gue(ens.n),
            Beta::Symplectic => Kernel::Gse(ens.n),
        }
    }

    fn order(self) -> usize {
        match self {
            Kernel::Gue(n) | Kernel::Goe(n) | Kernel::MehtaS(n) => n,
            Kernel::Gse(n) => 2 * n + 1,
        }
    }

    fn scale(self) -> f64 {
        match self {
            Kernel::Gse(_) => SQRT_2,
            _ => 1.0,
        }
    }

    fn ladders(self, x: f64, y: f64) -> (Ladder, Ladder) {
        let m = self.order();
        let c = self.scale();
        (Ladder::new(m, c * x), Ladder::new(m, c * y))
    }
}

impl KernelFn for Kernel {
    fn value(&self, x: f64, y: f64) -> f64 {
        let (lx, ly) = self.ladders(x, y);
        match *self {
            Kernel::Gue(n) => k2_sum(n, &lx, &ly),
            Kernel::Goe(n) => mehta_s(n, &lx, &ly) + alpha(n, x),
            Kernel::MehtaS(n) => mehta_s(n, &lx, &ly),
            Kernel::Gse(n) => mehta_s(2 * n + 1, &lx, &ly) / SQRT_2,
        }
    }

    fn d_second(&self, x: f64, y: f64) -> f64 {
        let (lx, ly) = self.ladders(x, y);
        match *self {
            Kernel::Gue(n) => (0..n).map(|k| lx.phi[k] * ly.dphi(k)).sum(),
            Kernel::Goe(n) | Kernel::MehtaS(n) => mehta_s_dy(n, &lx, &ly),
            // d/dy of S(√2x, √2y)/√2
            Kernel::Gse(n) => mehta_s_dy(2 * n + 1, &lx, &ly),
        }
    }

    fn eps_first(&self, x: f64, y: f64) -> f64 {
        let (lx, ly) = self.ladders(x, y);
        match *self {
            Kernel::Gue(n) => (0..n).map(|k| lx.conv[k] * ly.phi[k]).sum(),
            Kernel::MehtaS(n) => mehta_s_eps(n, &lx, &ly),
            Kernel::Goe(n) => mehta_s_eps(n, &lx, &ly) + alpha_antiderivative(n, x),
            // t = u/√2 turns the integral into ½ ∫ ε(√2x − u) S(u, √2y) du
            Kernel::Gse(n) => 0.5 * mehta_s_eps(2 * n + 1, &lx, &ly),
        }
    }
}

/// D K(x_p, x_q) = ½(∂_{x_p} K(x_q, x_p) − ∂_{x_q} K(x_p, x_q)).
#[allow(non_snake_case)]
pub fn op_D<K: KernelFn + ?Sized>(k: &K, x_p: f64, x_q: f64) -> f64 {
    0.5 * (k.d_second(x_q, x_p) - k.d_second(x_p, x_q))
}

/// I K(x_p, x_q) = ½(∫ε(x_p−t)K(t,x_q)dt − ∫ε(x_q−t)K(t,x_p)dt).
#[allow(non_snake_case)]
pub fn op_I<K: KernelFn + ?Sized>(k: &K, x_p: f64, x_q: f64) -> f64 {
    0.5 * (k.eps_first(x_p, x_q) - k.eps_first(x_q, x_p))
}

/// J K(x_p, x_q) = I K(x_p, x_q) − ε(x_p − x_q).
#[allow(non_snake_case)]
pub fn op_J<K: KernelFn + ?Sized>(k: &K, x_p: f64, x_q: f64) -> f64 {
    op_I(k, x_p, x_q) - eps(x_p - x_q)
}

/// Kernel from a generating-function value Z_1 by the difference quotient.
///
/// For β = 1, 2 the result is K(x_q, x_p); for β = 4 it is K(x_p, x_q). The
/// prefactor uses |γ|: (1/(|γ|π)) e^{|γ|(x_p²−x_q²)/2} Im(Z_1 − 1)/(x_q − x_p).
pub fn kernel_from_z1(beta: Beta, x_p: f64, x_q: f64, z1: Complex64, floor: f64) -> Result<f64> {
    if (x_p - x_q).abs() < floor {
        return Err(Error::DegenerateArguments { x_p, x_q, floor });
    }
    Ok(z1_prefactor(beta, x_p, x_q) * (z1 - 1.0).im / (x_q - x_p))
}

/// (1/(|γ|π)) e^{|γ|(x_p²−x_q²)/2}.
pub fn z1_prefactor(beta: Beta, x_p: f64, x_q: f64) -> f64 {
    let g = beta.gamma_abs() as f64;
    (g * (x_p * x_p - x_q * x_q) / 2.0).exp() / (g * PI)
}
