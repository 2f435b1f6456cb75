//! Globally adaptive Gauss–Kronrod (10/21) quadrature for real and complex
//! integrands, plus Gauss rules and zero-limit extrapolation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Values an integrand may return.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Tolerances and the η ladder used by finite-η validation paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub eta_ladder: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
            eta_ladder: vec![0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125],
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec { abs_tol, rel_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be positive"));
        }
        if self.eta_ladder.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::invalid("eta ladder entries must be positive"));
        }
        if self.eta_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("eta ladder must be strictly decreasing"));
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Finite,
    // x = base + (1−t)/t on t ∈ (0,1]
    Upper(f64),
    // x = base − (1−t)/t on t ∈ (0,1]
    Lower(f64),
}

impl Map {
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Map::Finite => (t, 1.0),
            Map::Upper(base) => (base + (1.0 - t) / t, 1.0 / (t * t)),
            Map::Lower(base) => (base - (1.0 - t) / t, 1.0 / (t * t)),
        }
    }
}

struct Piece<T> {
    map: Map,
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err;
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn kronrod<T, F>(f: &F, map: Map, lo: f64, hi: f64) -> Result<(T, f64)>
where
    T: Integrand,
    F: Fn(f64) -> Result<T>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |t: f64| -> Result<T> {
        let (x, jac) = map.apply(t);
        Ok(f(x)? * jac)
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = T::zero();
    let mut res_abs = fc.modulus() * WGK[10];
    let mut f1 = [T::zero(); 10];
    let mut f2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let a = eval(center - dx)?;
        let b = eval(center + dx)?;
        f1[j] = a;
        f2[j] = b;
        res_k = res_k + (a + b) * WGK[j];
        res_abs += (a.modulus() + b.modulus()) * WGK[j];
        if j % 2 == 1 {
            res_g = res_g + (a + b) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = (fc - mean).modulus() * WGK[10];
    for j in 0..10 {
        res_asc += ((f1[j] - mean).modulus() + (f2[j] - mean).modulus()) * WGK[j];
    }
    let scale = half.abs();
    let err = ((res_k - res_g) * half).modulus();
    Ok((res_k * half, rescale_error(err, res_abs * scale, res_asc * scale)))
}

/// Integrates a fallible integrand over [a, b] (either end may be infinite),
/// with extra breakpoints where the integrand has kinks or near-singularities.
pub fn try_integrate_with_points<T, F>(f: F, a: f64, b: f64, points: &[f64], spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: Integrand,
    F: Fn(f64) -> Result<T>,
{
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    if a > b {
        let r = try_integrate_with_points(f, b, a, points, spec)?;
        return Ok(Estimate { value: r.value * -1.0, ..r });
    }
    let mut breaks = vec![a];
    let mut inner: Vec<f64> = points.iter().copied().filter(|&p| p > a && p < b && p.is_finite()).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    if a.is_infinite() && b.is_infinite() && inner.is_empty() {
        inner.push(0.0);
    }
    breaks.extend(inner);
    breaks.push(b);

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (l, r) = (w[0], w[1]);
        let (map, lo, hi) = if l.is_infinite() {
            (Map::Lower(r), 0.0, 1.0)
        } else if r.is_infinite() {
            (Map::Upper(l), 0.0, 1.0)
        } else {
            (Map::Finite, l, r)
        };
        let (value, error) = kronrod(&f, map, lo, hi)?;
        evaluations += 21;
        heap.push(Piece { map, lo, hi, value, error });
    }

    let sum = |heap: &BinaryHeap<Piece<T>>, done: &[Piece<T>]| {
        let mut v = T::zero();
        let mut e = 0.0;
        for p in heap.iter().chain(done.iter()) {
            v = v + p.value;
            e += p.error;
        }
        (v, e)
    };

    let mut done: Vec<Piece<T>> = Vec::new();
    let (mut value, mut error) = sum(&heap, &done);
    let mut splits = 0;
    while error > spec.tolerance(value.modulus()) && splits < spec.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) < 4.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs()) {
            done.push(worst);
            continue;
        }
        let (v1, e1) = kronrod(&f, worst.map, worst.lo, mid)?;
        let (v2, e2) = kronrod(&f, worst.map, mid, worst.hi)?;
        evaluations += 42;
        splits += 1;
        value = value - worst.value + v1 + v2;
        error += e1 + e2 - worst.error;
        heap.push(Piece { map: worst.map, lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Piece { map: worst.map, lo: mid, hi: worst.hi, value: v2, error: e2 });
        if splits % 64 == 0 {
            let (v, e) = sum(&heap, &done);
            value = v;
            error = e;
        }
    }
    let (value, error) = sum(&heap, &done);
    let tol = spec.tolerance(value.modulus());
    if !(error <= tol) {
        return Err(Error::QuadratureFailure { error, tol });
    }
    Ok(Estimate { value, error, evaluations })
}

pub fn integrate_with_points<T, F>(f: F, a: f64, b: f64, points: &[f64], spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    try_integrate_with_points(|x| Ok(f(x)), a, b, points, spec)
}

pub fn integrate<T, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    integrate_with_points(f, a, b, &[], spec)
}

/// Golub–Welsch nodes and weights from a symmetric Jacobi matrix.
fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Gauss–Hermite rule for ∫ e^{−t²} f(t) dt.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    golub_welsch(&diag, &off, std::f64::consts::PI.sqrt())
}

/// Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&diag, &off, 2.0)
}

/// Neville extrapolation of samples y(h_i) to h = 0. Returns the value and
/// the change from the previous order as an error indicator.
pub fn extrapolate_to_zero(h: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(h.len(), y.len());
    assert!(!h.is_empty());
    let n = h.len();
    let mut p = y.to_vec();
    let mut diag = vec![p[n - 1]];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i] * p[i + 1] - h[i + m] * p[i]) / (h[i] - h[i + m]);
        }
        diag.push(p[0]);
    }
    let value = p[0];
    let error = if n > 1 { (diag[n - 1] - diag[n - 2]).abs() } else { f64::INFINITY };
    (value, error)
}
