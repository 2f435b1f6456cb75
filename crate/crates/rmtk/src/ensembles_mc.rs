//! Sampling of GOE/GUE/GSE matrices and Monte Carlo averages of
//! characteristic-polynomial ratios.
//!
//! Every sample i draws from its own ChaCha stream keyed by (seed, i), and
//! samples are reduced in fixed blocks merged in index order, so results do
//! not depend on the worker count.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::{kernel_from_z1, level_density, z1_prefactor, Beta, EnsembleSpec, KernelValue, Route, DEFAULT_DEGENERACY_FLOOR};

pub const MIN_SAMPLES: usize = 100;
const BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub ensemble: EnsembleSpec,
    pub samples: usize,
    pub seed: u64,
    /// Imaginary increment; `None` picks 0.05 local spacings per point.
    pub eta: Option<f64>,
    pub workers: usize,
    /// Combine η and η/2 from the same samples to cancel the O(η) bias.
    pub eta_extrapolation: bool,
}

impl MCConfig {
    pub fn new(ensemble: EnsembleSpec, samples: usize, seed: u64) -> Self {
        MCConfig { ensemble, samples, seed, eta: None, workers: 1, eta_extrapolation: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InsufficientSamples { min: MIN_SAMPLES, got: self.samples });
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::invalid("eta must be positive"));
            }
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be positive"));
        }
        Ok(())
    }

    pub fn eta_for(&self, x_p: f64, x_q: f64) -> f64 {
        self.eta.unwrap_or_else(|| default_eta(self.ensemble, x_p, x_q))
    }
}

/// 0.05 × local mean level spacing at the midpoint, clamped to [1e−4, 0.1].
pub fn default_eta(ens: EnsembleSpec, x_p: f64, x_q: f64) -> f64 {
    let rho = level_density(ens, 0.5 * (x_p + x_q));
    if rho > 0.0 {
        (0.05 / rho).clamp(1e-4, 0.1)
    } else {
        0.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: Complex64,
    /// Standard error of the complex mean (both components).
    pub stderr: f64,
    /// Standard error of the imaginary component alone.
    pub stderr_im: f64,
    pub samples: usize,
    pub seed: u64,
    pub eta: f64,
}

/// Density estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// A sampled matrix; GSE matrices use the 2N×2N form [[A, B], [−B̄, Ā]].
#[derive(Debug, Clone, PartialEq)]
pub enum SampledMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Generator for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal<R: Rng>(rng: &mut R, sd: f64) -> f64 {
    sd * rng.sample::<f64, _>(StandardNormal)
}

/// Draws H with density ∝ exp(−(β/2) tr H²).
pub fn sample_matrix<R: Rng>(ens: EnsembleSpec, rng: &mut R) -> SampledMatrix {
    let n = ens.n;
    match ens.beta {
        Beta::Orthogonal => {
            let mut h = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = normal(rng, 1.0);
                for j in i + 1..n {
                    let v = normal(rng, std::f64::consts::FRAC_1_SQRT_2);
                    h[(i, j)] = v;
                    h[(j, i)] = v;
                }
            }
            SampledMatrix::Real(h)
        }
        Beta::Unitary => {
            let mut h = DMatrix::<Complex64>::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = Complex64::new(normal(rng, std::f64::consts::FRAC_1_SQRT_2), 0.0);
                for j in i + 1..n {
                    let v = Complex64::new(normal(rng, 0.5), normal(rng, 0.5));
                    h[(i, j)] = v;
                    h[(j, i)] = v.conj();
                }
            }
            SampledMatrix::Complex(h)
        }
        Beta::Symplectic => {
            let sd = (0.125f64).sqrt();
            let mut a = DMatrix::<Complex64>::zeros(n, n);
            let mut b = DMatrix::<Complex64>::zeros(n, n);
            for i in 0..n {
                a[(i, i)] = Complex64::new(normal(rng, 0.5), 0.0);
                for j in i + 1..n {
                    let v = Complex64::new(normal(rng, sd), normal(rng, sd));
                    a[(i, j)] = v;
                    a[(j, i)] = v.conj();
                    let w = Complex64::new(normal(rng, sd), normal(rng, sd));
                    b[(i, j)] = w;
                    b[(j, i)] = -w;
                }
            }
            let mut h = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] = a[(i, j)];
                    h[(i, j + n)] = b[(i, j)];
                    h[(i + n, j)] = -b[(i, j)].conj();
                    h[(i + n, j + n)] = a[(i, j)].conj();
                }
            }
            SampledMatrix::Complex(h)
        }
    }
}

impl SampledMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SampledMatrix::Real(m) => m.nrows(),
            SampledMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn trace_of_square(&self) -> f64 {
        match self {
            SampledMatrix::Real(m) => m.iter().map(|v| v * v).sum(),
            SampledMatrix::Complex(m) => m.iter().map(|v| v.norm_sqr()).sum(),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self {
            SampledMatrix::Real(m) => m.map(|v| Complex64::new(v, 0.0)),
            SampledMatrix::Complex(m) => m.clone(),
        }
    }

    /// ‖J Hᵀ J⁻¹ − H‖_max with J = [[0, 1], [−1, 0]] in N×N blocks.
    pub fn self_duality_defect(&self) -> f64 {
        let h = self.to_complex();
        let n = h.nrows() / 2;
        let mut worst: f64 = 0.0;
        for i in 0..2 * n {
            for j in 0..2 * n {
                // (J M J⁻¹) for M = Hᵀ: [[S, −R], [−Q, P]] with Hᵀ = [[P, Q], [R, S]]
                let (bi, ri) = (i / n, i % n);
                let (bj, rj) = (j / n, j % n);
                let t = |r: usize, c: usize| h[(c, r)];
                let v = match (bi, bj) {
                    (0, 0) => t(n + ri, n + rj),
                    (0, 1) => -t(n + ri, rj),
                    (1, 0) => -t(ri, n + rj),
                    _ => t(ri, rj),
                };
                worst = worst.max((v - h[(i, j)]).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order; GSE doublets returned once.
    pub fn eigenvalues(&self, beta: Beta) -> Result<Vec<f64>> {
        let mut ev: Vec<f64> = match self {
            SampledMatrix::Real(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
            SampledMatrix::Complex(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
        };
        if ev.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenFailure("non-finite eigenvalue".into()));
        }
        ev.sort_by(f64::total_cmp);
        if beta != Beta::Symplectic {
            return Ok(ev);
        }
        let scale = ev.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        ev.chunks(2)
            .map(|p| {
                if p.len() != 2 || (p[0] - p[1]).abs() > 1e-8 * scale {
                    Err(Error::EigenFailure("eigenvalues are not Kramers-paired".into()))
                } else {
                    Ok(0.5 * (p[0] + p[1]))
                }
            })
            .collect()
    }
}

/// Eigenvalues of sample `index`.
pub fn sample_eigenvalues(ens: EnsembleSpec, seed: u64, index: u64) -> Result<Vec<f64>> {
    let mut rng = sample_rng(seed, index);
    sample_matrix(ens, &mut rng).eigenvalues(ens.beta)
}

/// (det(H − x_q)/det(H − x_p + iη))^{|γ|} from the eigenvalues of H.
pub fn char_ratio(eigs: &[f64], x_p: f64, x_q: f64, eta: f64, gamma_abs: u32) -> Complex64 {
    const BIG: f64 = 1e100;
    let mut prod = Complex64::new(1.0, 0.0);
    let mut log = Complex64::new(0.0, 0.0);
    for &l in eigs {
        prod *= Complex64::new(l - x_q, 0.0) / Complex64::new(l - x_p, eta);
        let m = prod.norm();
        if m > BIG || (m < 1.0 / BIG && m > 0.0) {
            log += prod.ln();
            prod = Complex64::new(1.0, 0.0);
        }
    }
    let r = if log == Complex64::new(0.0, 0.0) { prod } else { prod * log.exp() };
    r.powu(gamma_abs)
}

/// Same ratio for a sampled matrix.
pub fn char_ratio_matrix(h: &SampledMatrix, beta: Beta, x_p: f64, x_q: f64, eta: f64) -> Result<Complex64> {
    if !(eta > 0.0) {
        return Err(Error::invalid("eta must be positive"));
    }
    Ok(char_ratio(&h.eigenvalues(beta)?, x_p, x_q, eta, beta.gamma_abs()))
}

/// Welford moments of a fixed-length real vector.
#[derive(Debug, Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    co: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Moments { n: 0.0, mean: vec![0.0; dim], co: vec![0.0; dim * dim] }
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn push(&mut self, x: &[f64]) {
        let d = self.dim();
        self.n += 1.0;
        let delta: Vec<f64> = (0..d).map(|i| x[i] - self.mean[i]).collect();
        for i in 0..d {
            self.mean[i] += delta[i] / self.n;
        }
        for i in 0..d {
            let after = x[i] - self.mean[i];
            for j in 0..d {
                self.co[i * d + j] += delta[j] * after;
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = other.clone();
            return;
        }
        let d = self.dim();
        let n = self.n + other.n;
        let delta: Vec<f64> = (0..d).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..d {
            for j in 0..d {
                self.co[i * d + j] += other.co[i * d + j] + delta[i] * delta[j] * self.n * other.n / n;
            }
        }
        for i in 0..d {
            self.mean[i] += delta[i] * other.n / n;
        }
        self.n = n;
    }

    /// Variance of gᵀx̄.
    fn var_of_mean(&self, g: &[f64]) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += g[i] * g[j] * self.co[i * d + j];
            }
        }
        (acc / (self.n - 1.0)).max(0.0) / self.n
    }
}

fn run_blocks<T, F, M>(samples: usize, workers: usize, per_block: F, merge: M) -> Result<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> Result<T> + Sync,
    M: Fn(&mut T, T),
{
    let blocks: Vec<std::ops::Range<usize>> =
        (0..samples).step_by(BLOCK).map(|s| s..(s + BLOCK).min(samples)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let parts: Vec<T> = pool.install(|| blocks.into_par_iter().map(&per_block).collect::<Result<Vec<T>>>())?;
    let mut it = parts.into_iter();
    let mut acc = it.next().ok_or_else(|| Error::invalid("no samples"))?;
    for p in it {
        merge(&mut acc, p);
    }
    Ok(acc)
}

/// Z_1 estimates for many (x_p, x_q) pairs from one set of samples.
///
/// Each pair is normalized by the same-sample mean at (x_p, x_p); with
/// `eta_extrapolation` the estimate is 2Z(η/2) − Z(η).
pub fn z1_mc_many(config: &MCConfig, pairs: &[(f64, f64)]) -> Result<Vec<MCEstimate>> {
    config.validate()?;
    let ens = config.ensemble;
    let g = ens.beta.gamma_abs();
    let etas: Vec<f64> = pairs.iter().map(|&(p, q)| config.eta_for(p, q)).collect();
    let levels: &[f64] = if config.eta_extrapolation { &[1.0, 0.5] } else { &[1.0] };
    let dim = 4 * levels.len();
    let per_block = |range: std::ops::Range<usize>| -> Result<Vec<Moments>> {
        let mut acc = vec![Moments::new(dim); pairs.len()];
        let mut buf = vec![0.0; dim];
        for i in range {
            let eigs = sample_eigenvalues(ens, config.seed, i as u64)?;
            for (k, &(xp, xq)) in pairs.iter().enumerate() {
                for (l, &f) in levels.iter().enumerate() {
                    let eta = etas[k] * f;
                    let a = char_ratio(&eigs, xp, xq, eta, g);
                    let b = char_ratio(&eigs, xp, xp, eta, g);
                    buf[4 * l..4 * l + 4].copy_from_slice(&[a.re, a.im, b.re, b.im]);
                }
                acc[k].push(&buf);
            }
        }
        Ok(acc)
    };
    let merge = |acc: &mut Vec<Moments>, other: Vec<Moments>| {
        for (a, o) in acc.iter_mut().zip(&other) {
            a.merge(o);
        }
    };
    let moments = run_blocks(config.samples, config.workers, per_block, merge)?;

    Ok(moments
        .iter()
        .zip(&etas)
        .map(|(m, &eta)| {
            let weights: &[f64] = if config.eta_extrapolation { &[-1.0, 2.0] } else { &[1.0] };
            let mut mean = Complex64::new(0.0, 0.0);
            let mut g_re = vec![0.0; dim];
            let mut g_im = vec![0.0; dim];
            for (l, &w) in weights.iter().enumerate() {
                let a = Complex64::new(m.mean[4 * l], m.mean[4 * l + 1]);
                let b = Complex64::new(m.mean[4 * l + 2], m.mean[4 * l + 3]);
                mean += a / b * w;
                // ∂(A/B) along Re A, Im A, Re B, Im B
                let i = Complex64::new(0.0, 1.0);
                let grads = [1.0 / b, i / b, -a / (b * b), -i * a / (b * b)];
                for (c, gr) in grads.iter().enumerate() {
                    g_re[4 * l + c] = w * gr.re;
                    g_im[4 * l + c] = w * gr.im;
                }
            }
            let var_re = m.var_of_mean(&g_re);
            let var_im = m.var_of_mean(&g_im);
            MCEstimate {
                mean,
                stderr: (var_re + var_im).sqrt(),
                stderr_im: var_im.sqrt(),
                samples: config.samples,
                seed: config.seed,
                eta,
            }
        })
        .collect())
}

pub fn z1_mc(config: &MCConfig, x_p: f64, x_q: f64) -> Result<MCEstimate> {
    Ok(z1_mc_many(config, &[(x_p, x_q)])?[0])
}

/// Arguments of Z_1 whose difference quotient yields K(x, y).
fn z1_arguments(beta: Beta, x: f64, y: f64) -> (f64, f64) {
    match beta {
        Beta::Symplectic => (x, y),
        _ => (y, x),
    }
}

/// Monte Carlo estimates of K_N^(β)(x, y) for many pairs.
pub fn kernel_mc_many(config: &MCConfig, points: &[(f64, f64)]) -> Result<Vec<KernelValue>> {
    let beta = config.ensemble.beta;
    for &(x, y) in points {
        if (x - y).abs() < DEFAULT_DEGENERACY_FLOOR {
            return Err(Error::DegenerateArguments { x_p: x, x_q: y, floor: DEFAULT_DEGENERACY_FLOOR });
        }
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| z1_arguments(beta, x, y)).collect();
    let est = z1_mc_many(config, &pairs)?;
    pairs
        .iter()
        .zip(&est)
        .map(|(&(xp, xq), e)| {
            let value = kernel_from_z1(beta, xp, xq, e.mean, DEFAULT_DEGENERACY_FLOOR)?;
            let uncertainty = z1_prefactor(beta, xp, xq).abs() * e.stderr_im / (xq - xp).abs();
            Ok(KernelValue { value, route: Route::Mc, uncertainty })
        })
        .collect()
}

/// Monte Carlo estimate of K_N^(β)(x, y).
pub fn kernel_mc(config: &MCConfig, x: f64, y: f64) -> Result<KernelValue> {
    Ok(kernel_mc_many(config, &[(x, y)])?[0])
}

/// Level density at x from (1/(2|γ|π)) Im(Z_1(x−h, x+h) − 1)/h.
pub fn source_derivative_check(config: &MCConfig, x: f64, h: f64) -> Result<DensityEstimate> {
    if !(h > 0.0) {
        return Err(Error::invalid("h must be positive"));
    }
    let e = z1_mc(config, x - h, x + h)?;
    let scale = 1.0 / (2.0 * config.ensemble.beta.gamma_abs() as f64 * PI * h);
    Ok(DensityEstimate { value: scale * (e.mean - 1.0).im, stderr: scale * e.stderr_im })
}

/// Histogram of eigenvalues with bins of width `step` centered on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub centers: Vec<f64>,
    pub width: f64,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub outside: f64,
    pub samples: usize,
}

impl Histogram {
    /// Eigenvalues per matrix, including those outside the bins.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.width + self.outside
    }
}

pub fn eigen_histogram(config: &MCConfig, grid: &Grid) -> Result<Histogram> {
    config.validate()?;
    let centers = grid.points();
    let nb = centers.len();
    let lo = centers[0] - grid.step / 2.0;
    let ens = config.ensemble;
    #[derive(Clone)]
    struct Acc {
        sum: Vec<f64>,
        sq: Vec<f64>,
        outside: f64,
    }
    let per_block = |range: std::ops::Range<usize>| -> Result<Acc> {
        let mut acc = Acc { sum: vec![0.0; nb], sq: vec![0.0; nb], outside: 0.0 };
        let mut counts = vec![0.0; nb];
        for i in range {
            counts.iter_mut().for_each(|c| *c = 0.0);
            for l in sample_eigenvalues(ens, config.seed, i as u64)? {
                let k = ((l - lo) / grid.step).floor();
                if k >= 0.0 && (k as usize) < nb {
                    counts[k as usize] += 1.0;
                } else {
                    acc.outside += 1.0;
                }
            }
            for b in 0..nb {
                acc.sum[b] += counts[b];
                acc.sq[b] += counts[b] * counts[b];
            }
        }
        Ok(acc)
    };
    let merge = |a: &mut Acc, o: Acc| {
        for b in 0..nb {
            a.sum[b] += o.sum[b];
            a.sq[b] += o.sq[b];
        }
        a.outside += o.outside;
    };
    let acc = run_blocks(config.samples, config.workers, per_block, merge)?;
    let s = config.samples as f64;
    let density = acc.sum.iter().map(|c| c / (s * grid.step)).collect();
    let stderr = acc
        .sum
        .iter()
        .zip(&acc.sq)
        .map(|(c, q)| {
            let mean = c / s;
            let var = (q / s - mean * mean).max(0.0) * s / (s - 1.0);
            (var / s).sqrt() / grid.step
        })
        .collect();
    Ok(Histogram { centers, width: grid.step, density, stderr, outside: acc.outside / s, samples: config.samples })
}

/// Pair density R_2(x, y) from counts of ordered eigenvalue pairs in the
/// squares of half-width h around (x, y).
pub fn pair_density_mc(config: &MCConfig, x: f64, y: f64, h: f64) -> Result<DensityEstimate> {
    config.validate()?;
    if !(h > 0.0) || (x - y).abs() < 2.0 * h {
        return Err(Error::invalid("cells must be disjoint with h > 0"));
    }
    let ens = config.ensemble;
    let per_block = |range: std::ops::Range<usize>| -> Result<Moments> {
        let mut m = Moments::new(1);
        for i in range {
            let eigs = sample_eigenvalues(ens, config.seed, i as u64)?;
            let nx = eigs.iter().filter(|&&l| (l - x).abs() < h).count();
            let ny = eigs.iter().filter(|&&l| (l - y).abs() < h).count();
            m.push(&[(nx * ny) as f64]);
        }
        Ok(m)
    };
    let m = run_blocks(config.samples, config.workers, per_block, |a: &mut Moments, o| a.merge(&o))?;
    let area = 4.0 * h * h;
    Ok(DensityEstimate { value: m.mean[0] / area, stderr: m.var_of_mean(&[1.0]).sqrt() / area })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_ratio() {
        let r = char_ratio(&[0.7], 0.2, -0.3, 0.05, 2);
        let want = (Complex64::new(1.0, 0.0) / Complex64::new(0.5, 0.05)).powu(2);
        assert!((r - want).norm() < 1e-14);
    }

    #[test]
    fn known_two_by_two_ratio() {
        let r = char_ratio(&[1.0, -1.0], 0.5, 0.0, 0.1, 1);
        let want = Complex64::new(-1.0, 0.0) / (Complex64::new(0.5, 0.1) * Complex64::new(-1.5, 0.1));
        assert!((r - want).norm() < 1e-14);
    }

    #[test]
    fn coincident_arguments_normalize_to_one() {
        let ens = EnsembleSpec::new(Beta::Unitary, 3).unwrap();
        let cfg = MCConfig::new(ens, 300, 11);
        let e = z1_mc(&cfg, 0.4, 0.4).unwrap();
        assert_eq!(e.mean, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn too_few_samples() {
        let ens = EnsembleSpec::new(Beta::Unitary, 3).unwrap();
        assert!(matches!(z1_mc(&MCConfig::new(ens, 10, 1), 0.0, 1.0), Err(Error::InsufficientSamples { .. })));
    }
}
