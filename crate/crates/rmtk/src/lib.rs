//! Correlation kernels of the Gaussian orthogonal, unitary and symplectic
//! ensembles, with three independent routes to each kernel: closed-form
//! oscillator sums, Monte Carlo averages of characteristic-polynomial ratios,
//! and superintegral representations evaluated by quadrature.

pub mod correlations;
pub mod ensembles_mc;
pub mod error;
pub mod grid;
pub mod jet;
pub mod kernels;
pub mod quad;
pub mod special;
pub mod superint;
pub mod verify;

pub use correlations::{
    pfaffian, r_k_goe, r_k_goe_kernel_assembly, r_k_gse, r_k_gse_mehta, r_k_gue, EnergyTuple,
    SelfDualQuaternionMatrix,
};
pub use ensembles_mc::{
    eigen_histogram, kernel_mc, kernel_mc_many, pair_density_mc, source_derivative_check, z1_mc, z1_mc_many,
    DensityEstimate, Histogram, MCConfig, MCEstimate,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use jet::JetSeries;
pub use kernels::{
    kernel, kernel_from_z1, kernel_goe, kernel_gse, kernel_gue, level_density, Beta, EnergyArgs, EnsembleSpec,
    Kernel, KernelFn, KernelValue, Route,
};
pub use quad::QuadratureSpec;
pub use verify::{Check, Report};
