//! Simulation and analysis toolkit for the Wick-ordered stochastic nonlinear
//! wave equation
//!
//! ```text
//!     ∂ₜ²u − Δu ± :uᵏ: = ξ   on 𝕋² = (ℝ/ℤ)²
//! ```
//!
//! driven by additive space-time white noise. The crate is organised
//! bottom-up:
//!
//! * [`lattice`]: spectral and grid fields on the torus, Dirichlet
//!   projections, Bessel potentials and norm estimators.
//! * [`hermite`]: variance-parameterised Hermite polynomials and Wick algebra.
//! * [`noise`]: keyed, counter-based Brownian drivers for every Fourier mode.
//! * [`convolution`]: exact simulation of the truncated stochastic convolution
//!   Ψ_N, its variance σ_N(t), Wick powers and chaos diagnostics.
//! * [`solver`]: the Da Prato–Debussche integrator for `v = u − Ψ`.
//! * [`strichartz`]: exact rational arithmetic for critical regularities and
//!   admissible exponent pairs.
//! * [`universality`]: the scaled microscopic model and its comparison with
//!   the Wick cubic limit.
//!
//! Frequencies follow the convention `e_n(x) = exp(2πi n·x)` for the spatial
//! basis while the wave frequency of mode `n` is `|n|` (no factor 2π).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convolution;
pub mod error;
pub mod hermite;
pub mod lattice;
pub mod noise;
pub mod solver;
pub mod stats;
pub mod strichartz;
pub mod universality;

pub use convolution::{gamma, sigma_exact, ConvolutionState, Dispersion, WickField};
pub use error::{Error, Result};
pub use lattice::{FrequencyLattice, GridField, SpectralField};
pub use noise::{ModePath, NoiseConfig};
pub use num::complex::Complex64;
pub use solver::{Sign, SolverConfig, SolverState};
pub use strichartz::{PairSpec, Rational};
pub use universality::{NonlinearitySpec, ScalingParams};
