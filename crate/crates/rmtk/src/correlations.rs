//! k-point correlation functions: determinants for the GUE, quaternion
//! determinants (Pfaffians) for the GOE and GSE.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{
    kernel_gue, op_D, op_I, op_J, Kernel, KernelFn, DEFAULT_DEGENERACY_FLOOR,
};
use crate::special::{alpha, alpha_antiderivative, eps};

/// Ordered energies, pairwise separated by more than the degeneracy floor.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTuple {
    xs: Vec<f64>,
}

impl EnergyTuple {
    pub fn new(xs: Vec<f64>) -> Result<Self> {
        Self::with_floor(xs, DEFAULT_DEGENERACY_FLOOR)
    }

    pub fn with_floor(xs: Vec<f64>, floor: f64) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::invalid("need at least one energy"));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("energies must be finite"));
        }
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                if (xs[i] - xs[j]).abs() < floor {
                    return Err(Error::DegenerateArguments { x_p: xs[i], x_q: xs[j], floor });
                }
            }
        }
        Ok(EnergyTuple { xs })
    }

    pub fn values(&self) -> &[f64] {
        &self.xs
    }

    pub fn k(&self) -> usize {
        self.xs.len()
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination with pivoting (Parlett–Reid).
pub fn pfaffian(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("pfaffian needs a square matrix"));
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let skew = (a + a.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if skew > 1e-10 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NotAntisymmetric);
    }
    let mut m = a.clone();
    let mut pf = Complex64::new(1.0, 0.0);
    for k in (0..n).step_by(2) {
        let (mut piv, mut best) = (k + 1, m[(k + 1, k)].norm());
        for i in k + 2..n {
            if m[(i, k)].norm() > best {
                piv = i;
                best = m[(i, k)].norm();
            }
        }
        if piv != k + 1 {
            m.swap_rows(k + 1, piv);
            m.swap_columns(k + 1, piv);
            pf = -pf;
        }
        let p = m[(k, k + 1)];
        if p == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        pf *= p;
        if k + 2 < n {
            // eliminate column k and row k below/right of the pivot
            let tau: Vec<Complex64> = (k + 2..n).map(|i| m[(k, i)] / p).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| m[(k + 1, i)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    let d = tau[ii] * col[jj] - col[ii] * tau[jj];
                    m[(i, j)] -= d;
                }
            }
        }
    }
    Ok(pf)
}

/// 2k×2k complex form of a k×k self-dual quaternion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfDualQuaternionMatrix {
    m: DMatrix<Complex64>,
}

fn symplectic_unit(k: usize) -> DMatrix<Complex64> {
    let mut z = DMatrix::zeros(2 * k, 2 * k);
    for p in 0..k {
        z[(2 * p, 2 * p + 1)] = Complex64::new(1.0, 0.0);
        z[(2 * p + 1, 2 * p)] = Complex64::new(-1.0, 0.0);
    }
    z
}

impl SelfDualQuaternionMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n % 2 == 1 {
            return Err(Error::OddDimension(n));
        }
        let z = symplectic_unit(n / 2);
        // Z Mᵀ Z⁻¹ with Z⁻¹ = −Z
        let dual = -(&z * m.transpose() * &z);
        let norm = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let diff = (&dual - &m).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if diff > 1e-10 * norm.max(1.0) {
            return Err(Error::SelfDualityViolated);
        }
        Ok(SelfDualQuaternionMatrix { m })
    }

    /// Builds the matrix from quaternion blocks [[a, b], [c, d]] per (p, q).
    pub fn from_blocks(k: usize, block: impl Fn(usize, usize) -> [[f64; 2]; 2]) -> Result<Self> {
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        for p in 0..k {
            for q in 0..k {
                let b = block(p, q);
                for r in 0..2 {
                    for c in 0..2 {
                        m[(2 * p + r, 2 * q + c)] = Complex64::new(b[r][c], 0.0);
                    }
                }
            }
        }
        Self::new(m)
    }

    pub fn identity(k: usize) -> Self {
        SelfDualQuaternionMatrix { m: DMatrix::identity(2 * k, 2 * k) }
    }

    pub fn dim_quaternion(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// qdet = Pf(Z M); a scalar 1×1 block [[s, 0], [0, s]] gives s.
    pub fn qdet_complex(&self) -> Result<Complex64> {
        let z = symplectic_unit(self.dim_quaternion());
        let a = &z * &self.m;
        // symmetrize away rounding so the antisymmetry check is exact
        let a = (&a - a.transpose()) * Complex64::new(0.5, 0.0);
        pfaffian(&a)
    }

    pub fn qdet(&self) -> Result<f64> {
        let q = self.qdet_complex()?;
        if q.im.abs() > 1e-9 * q.norm().max(1.0) {
            return Err(Error::invalid(format!("qdet has imaginary residue {:e}", q.im)));
        }
        Ok(q.re)
    }
}

/// R_k for the GUE: det[K_N^(2)(x_p, x_q)].
pub fn r_k_gue(n: usize, xs: &EnergyTuple) -> f64 {
    let x = xs.values();
    let k = x.len();
    let m = DMatrix::from_fn(k, k, |p, q| kernel_gue(n, x[p], x[q]));
    m.lu().determinant()
}

/// Quaternion blocks [[K_pq, D_pq], [J_pq, K_qp]].
fn qdet_assembly(
    xs: &EnergyTuple,
    k: impl Fn(f64, f64) -> f64,
    d: impl Fn(f64, f64) -> f64,
    j: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let x = xs.values();
    let q = SelfDualQuaternionMatrix::from_blocks(xs.k(), |p, q| {
        let (a, b) = (x[p], x[q]);
        if p == q {
            [[k(a, a), 0.0], [0.0, k(a, a)]]
        } else {
            [[k(a, b), d(a, b)], [j(a, b), k(b, a)]]
        }
    })?;
    q.qdet()
}

/// R_k for the GOE from S_N with Mehta's operators:
/// DS = −∂_y S, JS = ∫ε(x−t)S(t,y)dt + ∫_y^x α − ε(x−y).
pub fn r_k_goe(n: usize, xs: &EnergyTuple) -> Result<f64> {
    let s = Kernel::MehtaS(n);
    qdet_assembly(
        xs,
        |a, b| s.value(a, b) + alpha(n, a),
        |a, b| -s.d_second(a, b),
        |a, b| s.eps_first(a, b) + alpha_antiderivative(n, a) - alpha_antiderivative(n, b) - eps(a - b),
    )
}

/// R_k for the GOE from K_N^(1) with the antisymmetrized D, I, J operators.
/// Agrees with [`r_k_goe`] for even N only.
pub fn r_k_goe_kernel_assembly(n: usize, xs: &EnergyTuple) -> Result<f64> {
    let k = Kernel::Goe(n);
    qdet_assembly(xs, |a, b| k.value(a, b), |a, b| op_D(&k, a, b), |a, b| op_J(&k, a, b))
}

/// R_k for the GSE from K_N^(4) with the D and I operators.
pub fn r_k_gse(n: usize, xs: &EnergyTuple) -> Result<f64> {
    let k = Kernel::Gse(n);
    qdet_assembly(xs, |a, b| k.value(a, b), |a, b| op_D(&k, a, b), |a, b| op_I(&k, a, b))
}

/// R_k for the GSE from Mehta's S_{2N+1} at scaled energies, each block /√2.
pub fn r_k_gse_mehta(n: usize, xs: &EnergyTuple) -> Result<f64> {
    let s = Kernel::MehtaS(2 * n + 1);
    let c = SQRT_2;
    qdet_assembly(
        xs,
        |a, b| s.value(c * a, c * b) / c,
        |a, b| -s.d_second(c * a, c * b) / c,
        |a, b| s.eps_first(c * a, c * b) / c,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn two_by_two_pfaffian() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0), c(3.5), c(-3.5), c(0.0)]);
        assert_eq!(pfaffian(&a).unwrap(), c(3.5));
    }

    #[test]
    fn canonical_four_by_four() {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 1)] = c(2.0);
        a[(1, 0)] = c(-2.0);
        a[(2, 3)] = c(-1.5);
        a[(3, 2)] = c(1.5);
        assert!((pfaffian(&a).unwrap() - c(-3.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let a = DMatrix::from_element(3, 3, c(0.0));
        assert_eq!(pfaffian(&a), Err(Error::OddDimension(3)));
        let b = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert_eq!(pfaffian(&b), Err(Error::NotAntisymmetric));
    }

    #[test]
    fn qdet_of_identity() {
        assert!((SelfDualQuaternionMatrix::identity(3).qdet().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distinctness_floor() {
        assert!(EnergyTuple::new(vec![0.1, 0.1 + 1e-9]).is_err());
        assert!(EnergyTuple::new(vec![0.1, 0.2]).is_ok());
    }
}
