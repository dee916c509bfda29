//! The truncated stochastic convolution `Ψ_N`, its variance `σ_N(t)` and
//! the Wick powers `:Ψ_N^ℓ: = H_ℓ(Ψ_N; σ_N)`.
//!
//! Mode `n` of `Ψ_N` solves the driven oscillator `X″ = −ω²X + β̃_n′` with zero
//! data, `ω = |n|` (or `⟨n⟩` for Klein–Gordon dispersion). Its law is
//! propagated exactly: over a step `h` the pair `(X, V)` is rotated and a
//! Gaussian increment with the analytically integrated covariance is added.
//! The increment is drawn jointly with the Brownian increment `Δβ̃_n`, so a
//! path refined by an integer factor produces the same trajectory.

use num::complex::Complex64;
use num::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermite::{self, hermite_unchecked};
use crate::lattice::{FrequencyLattice, GridField, SpectralField};
use crate::noise::{sample_path, ModePath, NoiseConfig, PathCursor, NORMALS_PER_STEP};
use crate::stats::{kahan_sum, MeanSe};

/// Largest Wick order handled by [`wick_monomial`].
pub const MAX_WICK_ORDER: usize = 8;
const SERIES_CUTOFF: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Dispersion {
    /// `ω_n = |n|`.
    #[default]
    Wave,
    /// `ω_n = ⟨n⟩`.
    KleinGordon,
}

impl Dispersion {
    pub fn omega(self, k: [i32; 2]) -> f64 {
        let sq = (k[0] as f64).powi(2) + (k[1] as f64).powi(2);
        match self {
            Dispersion::Wave => sq.sqrt(),
            Dispersion::KleinGordon => (1.0 + sq).sqrt(),
        }
    }

    pub fn frequencies(self, lattice: &FrequencyLattice) -> Vec<f64> {
        match self {
            Dispersion::Wave => lattice.abs().to_vec(),
            Dispersion::KleinGordon => lattice.bracket().to_vec(),
        }
    }
}

/// `(θ − sin θ)/θ³`.
fn c1(theta: f64) -> f64 {
    if theta.abs() < SERIES_CUTOFF {
        let t2 = theta * theta;
        horner(t2, &[1.0 / 6.0, -1.0 / 120.0, 1.0 / 5040.0, -1.0 / 362880.0, 1.0 / 39916800.0, -1.0 / 6227020800.0, 1.0 / 1307674368000.0])
    } else {
        (theta - theta.sin()) / theta.powi(3)
    }
}

/// `(1 − cos θ)/θ²`.
fn c2(theta: f64) -> f64 {
    if theta.abs() < SERIES_CUTOFF {
        let t2 = theta * theta;
        horner(t2, &[0.5, -1.0 / 24.0, 1.0 / 720.0, -1.0 / 40320.0, 1.0 / 3628800.0, -1.0 / 479001600.0, 1.0 / 87178291200.0])
    } else {
        (1.0 - theta.cos()) / (theta * theta)
    }
}

fn sinc(theta: f64) -> f64 {
    if theta == 0.0 {
        1.0
    } else {
        theta.sin() / theta
    }
}

fn horner(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `∫₀ᵗ (sin((t−τ)ω)/ω)² dτ`, with the `ω = 0` limit `t³/3`.
pub fn gamma_omega(omega: f64, t: f64) -> f64 {
    2.0 * t.powi(3) * c1(2.0 * omega * t)
}

/// `γ(n, t) = t/(2|n|²) − sin(2t|n|)/(4|n|³)` and `γ(0, t) = t³/3`.
pub fn gamma(k: [i32; 2], t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(gamma_omega(Dispersion::Wave.omega(k), t))
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

fn disc_sum(radius: usize, mut term: impl FnMut([i32; 2]) -> f64) -> f64 {
    let n = radius as i64;
    let mut values = Vec::new();
    for n1 in -n..=n {
        let span = ((n * n - n1 * n1) as f64).sqrt().floor() as i64;
        for n2 in -span..=span {
            values.push(term([n1 as i32, n2 as i32]));
        }
    }
    kahan_sum(values)
}

/// `σ_N(t) = Σ_{|n| ≤ N} γ(n, t)`, the pointwise variance of `Ψ_N(x, t)`.
pub fn sigma_exact(radius: usize, t: f64) -> Result<f64> {
    sigma_with(radius, t, Dispersion::Wave)
}

pub fn sigma_with(radius: usize, t: f64, dispersion: Dispersion) -> Result<f64> {
    check_time(t)?;
    Ok(disc_sum(radius, |k| gamma_omega(dispersion.omega(k), t)))
}

/// Variance of `ρ_N * Ψ`: `Σ_n |kernel_hat(n/N)|² γ(n, t)` over `|n| ≤ cutoff`.
pub fn sigma_mollified(scale: f64, cutoff: usize, t: f64, kernel_hat: impl Fn([f64; 2]) -> f64) -> Result<f64> {
    check_time(t)?;
    Ok(disc_sum(cutoff, |k| {
        let m = kernel_hat([k[0] as f64 / scale, k[1] as f64 / scale]);
        m * m * gamma_omega(Dispersion::Wave.omega(k), t)
    }))
}

/// `(t, σ_N(t))` on the given times.
pub fn variance_curve(radius: usize, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    times.iter().map(|&t| Ok((t, sigma_exact(radius, t)?))).collect()
}

/// `𝔼[Ψ_N(x, t) Ψ_N(y, t)] = Σ_n γ(n, t) cos(2π n·(x − y))`.
pub fn covariance_kernel(radius: usize, t: f64, dx: [f64; 2]) -> Result<f64> {
    check_time(t)?;
    Ok(disc_sum(radius, |k| {
        let phase = std::f64::consts::TAU * (k[0] as f64 * dx[0] + k[1] as f64 * dx[1]);
        gamma_omega(Dispersion::Wave.omega(k), t) * phase.cos()
    }))
}

/// `𝔼[X(t) X(s)]` for one real oscillator component driven by unit-intensity
/// noise, `s ≤ t`.
pub fn cross_covariance(omega: f64, t: f64, s: f64) -> f64 {
    let (t, s) = if s <= t { (t, s) } else { (s, t) };
    if omega == 0.0 {
        return t * s * s / 2.0 - s.powi(3) / 6.0;
    }
    let d = t - s;
    (s * (omega * d).cos() / 2.0 - ((omega * (t + s)).sin() - (omega * d).sin()) / (4.0 * omega)) / (omega * omega)
}

/// Covariance of `(Δβ, ΔX, ΔV)` over one step of length `h` for a real
/// oscillator of frequency `ω` driven by unit-intensity noise.
pub fn oscillator_covariance(omega: f64, h: f64) -> [[f64; 3]; 3] {
    let theta = omega * h;
    let q11 = 2.0 * h.powi(3) * c1(2.0 * theta);
    let q22 = 0.5 * h * (1.0 + sinc(2.0 * theta));
    let q12 = 0.5 * h * h * sinc(theta).powi(2);
    let q1b = h * h * c2(theta);
    let q2b = h * sinc(theta);
    [[h, q1b, q2b], [q1b, q11, q12], [q2b, q12, q22]]
}

/// One exact step of the driven oscillator: rotation plus a correlated
/// Gaussian increment, parameterised by a lower-triangular factor of
/// [`oscillator_covariance`] in the order `(Δβ, ΔX, ΔV)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorStep {
    pub cos: f64,
    /// `sin(ωh)/ω`, equal to `h` at `ω = 0`.
    pub sin_over_omega: f64,
    /// `ω sin(ωh)`.
    pub omega_sin: f64,
    /// `[L₁₁, L₂₁, L₃₁, L₂₂, L₃₂, L₃₃]`.
    pub factor: [f64; 6],
}

impl OscillatorStep {
    pub fn new(omega: f64, h: f64) -> Self {
        let theta = omega * h;
        let rh = h.sqrt();
        let (sxx, sxv, l33sq) = if theta < SERIES_CUTOFF {
            let t2 = theta * theta;
            let sxx = horner(t2, &[1.0 / 12.0, -1.0 / 40.0, 13.0 / 4032.0, -11.0 / 51840.0, 683.0 / 79833600.0, -19.0 / 80870400.0, 3781.0 / 804722688000.0]);
            let sxv = t2 * horner(t2, &[-1.0 / 24.0, 7.0 / 720.0, -107.0 / 120960.0, 163.0 / 3628800.0, -709.0 / 479001600.0, 15019.0 / 435891456000.0]);
            let l33 = t2 * t2 * horner(t2, &[1.0 / 720.0, 1.0 / 3360.0, 7.0 / 172800.0, 4841.0 / 1197504000.0, 573581.0 / 2179457280000.0]);
            (sxx * h.powi(3), sxv * h * h, l33 * h)
        } else {
            let q = oscillator_covariance(omega, h);
            let sxx = q[1][1] - q[0][1] * q[0][1] / h;
            let sxv = q[1][2] - q[0][1] * q[0][2] / h;
            let svv = q[2][2] - q[0][2] * q[0][2] / h;
            (sxx, sxv, (svv - sxv * sxv / sxx).max(0.0))
        };
        let l22 = sxx.sqrt();
        OscillatorStep {
            cos: theta.cos(),
            sin_over_omega: h * sinc(theta),
            omega_sin: omega * theta.sin(),
            factor: [rh, h * h * c2(theta) / rh, h * sinc(theta) / rh, l22, sxv / l22, l33sq.sqrt()],
        }
    }

    /// Free rotation of `(x, v)` over one step.
    #[inline]
    pub fn rotate<T>(&self, x: T, v: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
    {
        (x * self.cos + v * self.sin_over_omega, v * self.cos - x * self.omega_sin)
    }

    /// `(Δβ, ΔX, ΔV)` from three standard normals, scaled by `intensity`.
    #[inline]
    pub fn increment(&self, z: &[f64], intensity: f64) -> [f64; 3] {
        let l = &self.factor;
        [
            intensity * l[0] * z[0],
            intensity * (l[1] * z[0] + l[3] * z[1]),
            intensity * (l[2] * z[0] + l[4] * z[1] + l[5] * z[2]),
        ]
    }
}

/// Per-mode state `(Ψ̂_n(t), ∂ₜΨ̂_n(t))` driven by a [`ModePath`].
#[derive(Clone)]
pub struct ConvolutionState {
    lattice: FrequencyLattice,
    dispersion: Dispersion,
    noise: NoiseConfig,
    steps_done: usize,
    psi: Vec<Complex64>,
    psi_dot: Vec<Complex64>,
    increments: Vec<Complex64>,
    factors: Vec<OscillatorStep>,
    cursor: PathCursor,
    normals: Vec<[f64; NORMALS_PER_STEP]>,
}

impl std::fmt::Debug for ConvolutionState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvolutionState")
            .field("lattice", &self.lattice)
            .field("dispersion", &self.dispersion)
            .field("t", &self.time())
            .finish()
    }
}

impl ConvolutionState {
    /// Zero state on `lattice`, driven by the restriction of `path` to the
    /// lattice radius. The grid of `lattice` is used by [`realize`](Self::realize).
    pub fn new(path: &ModePath, lattice: &FrequencyLattice, dispersion: Dispersion) -> Result<Self> {
        let path = path.restrict(lattice.radius())?;
        let omega = dispersion.frequencies(lattice);
        let dt = path.dt();
        let factors = lattice.half().iter().map(|&p| OscillatorStep::new(omega[p], dt)).collect();
        Ok(ConvolutionState {
            lattice: lattice.clone(),
            dispersion,
            noise: *path.config(),
            steps_done: 0,
            psi: vec![Complex64::zero(); lattice.len()],
            psi_dot: vec![Complex64::zero(); lattice.len()],
            increments: vec![Complex64::zero(); lattice.len()],
            factors,
            cursor: path.cursor(),
            normals: Vec::with_capacity(lattice.half().len()),
        })
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }

    pub fn dt(&self) -> f64 {
        self.noise.dt
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    pub fn time(&self) -> f64 {
        self.steps_done as f64 * self.noise.dt
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn psi_dot(&self) -> &[Complex64] {
        &self.psi_dot
    }

    /// `Δβ̃_n` of the most recent step.
    pub fn last_increments(&self) -> &[Complex64] {
        &self.increments
    }

    pub fn psi_field(&self) -> SpectralField {
        SpectralField::from_coeffs(&self.lattice, self.psi.clone()).expect("sizes match")
    }

    /// Advances from step `j` to `j + 1`; `path` must be the driving path.
    pub fn step_exact(&mut self, path: &ModePath, step: usize) -> Result<()> {
        let cfg = path.config();
        if cfg.seed != self.noise.seed || cfg.replica != self.noise.replica || cfg.dt != self.noise.dt {
            return Err(Error::invalid("path does not drive this convolution state"));
        }
        if step != self.steps_done {
            return Err(Error::StepMismatch { expected: self.steps_done, got: step });
        }
        self.advance()
    }

    /// One exact step with the attached path.
    pub fn advance(&mut self) -> Result<()> {
        if self.steps_done >= self.noise.steps() {
            return Err(Error::invalid(format!(
                "noise horizon {} exhausted after {} steps",
                self.noise.horizon, self.steps_done
            )));
        }
        self.cursor.read(self.steps_done, &mut self.normals);
        let half = self.lattice.half();
        let mirror = self.lattice.mirror();
        let indices = self.lattice.indices();
        for (i, &p) in half.iter().enumerate() {
            let f = &self.factors[i];
            let z = &self.normals[i];
            let (x, v) = f.rotate(self.psi[p], self.psi_dot[p]);
            if indices[p] == [0, 0] {
                let [db, dx, dv] = f.increment(&z[..3], 1.0);
                self.psi[p] = Complex64::new(x.re + dx, 0.0);
                self.psi_dot[p] = Complex64::new(v.re + dv, 0.0);
                self.increments[p] = Complex64::new(db, 0.0);
            } else {
                let kappa = std::f64::consts::FRAC_1_SQRT_2;
                let re = f.increment(&z[..3], kappa);
                let im = f.increment(&z[3..], kappa);
                self.psi[p] = x + Complex64::new(re[1], im[1]);
                self.psi_dot[p] = v + Complex64::new(re[2], im[2]);
                self.increments[p] = Complex64::new(re[0], im[0]);
                let q = mirror[p];
                self.psi[q] = self.psi[p].conj();
                self.psi_dot[q] = self.psi_dot[p].conj();
                self.increments[q] = self.increments[p].conj();
            }
        }
        self.steps_done += 1;
        Ok(())
    }

    /// Advances until `time() ≥ t` (up to rounding of the step count).
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let target = (t / self.noise.dt - 1e-9).ceil().max(0.0) as usize;
        while self.steps_done < target {
            self.advance()?;
        }
        Ok(())
    }

    /// `Ψ_N(·, t)` on the lattice grid.
    pub fn realize(&self) -> GridField {
        self.psi_field().to_grid()
    }

    /// `Ψ_N(x, t)` at an arbitrary point.
    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        let phases = PointPhases::new(&self.lattice, x);
        phases.evaluate(&self.psi)
    }
}

/// Precomputed `e^{2πi n·x}` over the half lattice for repeated point evaluation.
#[derive(Clone, Debug)]
pub struct PointPhases {
    weights: Vec<(usize, Complex64)>,
}

impl PointPhases {
    pub fn new(lattice: &FrequencyLattice, x: [f64; 2]) -> Self {
        let weights = lattice
            .half()
            .iter()
            .map(|&p| {
                let k = lattice.indices()[p];
                let phase = std::f64::consts::TAU * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                let w = if k == [0, 0] { 1.0 } else { 2.0 };
                (p, Complex64::from_polar(w, phase))
            })
            .collect();
        PointPhases { weights }
    }

    /// `Σ_n ĉ(n) e^{2πi n·x}` for Hermitian `ĉ`.
    pub fn evaluate(&self, coeffs: &[Complex64]) -> f64 {
        kahan_sum(self.weights.iter().map(|(p, w)| (coeffs[*p] * w).re))
    }
}

/// A grid realisation of `:Ψ^ℓ:` with the variance used to build it.
#[derive(Clone, Debug)]
pub struct WickField {
    pub field: GridField,
    pub order: usize,
    pub sigma: f64,
    pub time: Option<f64>,
}

impl WickField {
    pub fn at_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }
}

/// Pointwise `H_ℓ(field; σ)`.
pub fn wick_monomial(field: &GridField, order: usize, sigma: f64) -> Result<WickField> {
    if order > MAX_WICK_ORDER {
        return Err(Error::OrderOutOfRange { order, max: MAX_WICK_ORDER });
    }
    if !(sigma >= 0.0) {
        return Err(Error::invalid(format!("variance must be nonnegative, got {sigma}")));
    }
    Ok(WickField { field: field.map(|x| hermite_unchecked(order, x, sigma)), order, sigma, time: None })
}

/// `:Ψ^ℓ:` for `ℓ = 0..=max_order` in one pass.
pub fn wick_powers(field: &GridField, max_order: usize, sigma: f64) -> Result<Vec<WickField>> {
    if max_order > MAX_WICK_ORDER {
        return Err(Error::OrderOutOfRange { order: max_order, max: MAX_WICK_ORDER });
    }
    let n = field.values().len();
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; n]; max_order + 1];
    let mut table = [0.0; MAX_WICK_ORDER + 1];
    for (i, &x) in field.values().iter().enumerate() {
        hermite::hermite_table(x, sigma, &mut table[..=max_order]);
        for (l, row) in out.iter_mut().enumerate() {
            row[i] = table[l];
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(order, values)| {
            Ok(WickField { field: GridField::from_values(field.lattice(), values)?, order, sigma, time: None })
        })
        .collect()
}

/// Samples `Ψ_N(·, t)` for replica `r` with a single exact step of length `t`.
pub fn sample_psi(seed: u64, replica: u64, radius: usize, t: f64, dispersion: Dispersion) -> Result<ConvolutionState> {
    let path = sample_path(NoiseConfig { seed, radius, dt: t, horizon: t, replica })?;
    let mut state = ConvolutionState::new(&path, &FrequencyLattice::new(radius), dispersion)?;
    state.advance()?;
    Ok(state)
}

/// `Ψ_N(x_i, t)` for every replica (rows) and point (columns).
pub fn sample_point_values(
    seed: u64,
    replicas: usize,
    radius: usize,
    t: f64,
    points: &[[f64; 2]],
) -> Result<Vec<Vec<f64>>> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(vec![vec![0.0; points.len()]; replicas]);
    }
    let lattice = FrequencyLattice::new(radius);
    let phases: Vec<PointPhases> = points.iter().map(|&x| PointPhases::new(&lattice, x)).collect();
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let state = sample_psi(seed, r, radius, t, Dispersion::Wave)?;
            Ok(phases.iter().map(|ph| ph.evaluate(state.psi())).collect())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct WickCheckReport {
    pub order: usize,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub empirical: MeanSe,
    pub closed_form: f64,
    pub z: f64,
}

/// Empirical `𝔼[:Ψ_N^ℓ(x,t): :Ψ_N^ℓ(y,t):]` against `ℓ!·K(x − y, t)^ℓ` for
/// every order and point pair, sharing one ensemble.
pub fn wick_covariance_suite(
    seed: u64,
    replicas: usize,
    radius: usize,
    t: f64,
    orders: &[usize],
    pairs: &[([f64; 2], [f64; 2])],
) -> Result<Vec<WickCheckReport>> {
    if replicas < 100 {
        return Err(Error::invalid(format!("need at least 100 replicas, got {replicas}")));
    }
    if let Some(&l) = orders.iter().find(|&&l| l > MAX_WICK_ORDER) {
        return Err(Error::OrderOutOfRange { order: l, max: MAX_WICK_ORDER });
    }
    let points: Vec<[f64; 2]> = pairs.iter().flat_map(|(x, y)| [*x, *y]).collect();
    let samples = sample_point_values(seed, replicas, radius, t, &points)?;
    let sigma = sigma_exact(radius, t)?;
    let mut out = Vec::new();
    for &order in orders {
        for (i, (x, y)) in pairs.iter().enumerate() {
            let products: Vec<f64> = samples
                .iter()
                .map(|row| hermite_unchecked(order, row[2 * i], sigma) * hermite_unchecked(order, row[2 * i + 1], sigma))
                .collect();
            let empirical = MeanSe::of(&products);
            let k = covariance_kernel(radius, t, [x[0] - y[0], x[1] - y[1]])?;
            let closed_form = hermite::wick_pair_expectation(order, order, k);
            let z = if empirical.se > 0.0 { empirical.z_score(closed_form) } else { 0.0 };
            out.push(WickCheckReport { order, x: *x, y: *y, empirical, closed_form, z });
        }
    }
    Ok(out)
}

pub fn wick_covariance_check(
    seed: u64,
    replicas: usize,
    radius: usize,
    order: usize,
    t: f64,
    x: [f64; 2],
    y: [f64; 2],
) -> Result<WickCheckReport> {
    Ok(wick_covariance_suite(seed, replicas, radius, t, &[order], &[(x, y)])?.remove(0))
}

#[derive(Clone, Debug)]
pub struct HypercontractivityReport {
    pub order: usize,
    pub p: f64,
    pub lp: MeanSe,
    pub l2: MeanSe,
    pub bound: f64,
    /// Empirical `L^p` minus the bound, in units of the `L^p` standard error.
    pub excess_se: f64,
}

/// Compares the empirical `L^p(Ω)` norm of `:Ψ_N^k(x, t):` with
/// `(p − 1)^{k/2}` times its empirical `L²(Ω)` norm.
pub fn hypercontractivity_check(
    seed: u64,
    replicas: usize,
    radius: usize,
    t: f64,
    x: [f64; 2],
    orders: &[usize],
    exponents: &[f64],
) -> Result<Vec<HypercontractivityReport>> {
    let samples = sample_point_values(seed, replicas, radius, t, &[x])?;
    let sigma = sigma_exact(radius, t)?;
    let mut out = Vec::new();
    for &order in orders {
        let values: Vec<f64> = samples.iter().map(|row| hermite_unchecked(order, row[0], sigma)).collect();
        let l2 = crate::stats::lp_norm(&values, 2.0);
        for &p in exponents {
            let lp = crate::stats::lp_norm(&values, p);
            let bound = hermite::hypercontractivity_bound(order, p, l2.mean)?;
            out.push(HypercontractivityReport { order, p, lp, l2, bound, excess_se: (lp.mean - bound) / lp.se });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CauchyGap {
    pub order: usize,
    pub low: usize,
    pub high: usize,
    /// `𝔼‖:Ψ_M^ℓ: − :Ψ_N^ℓ:‖²_{H^{−ε}}`.
    pub gap: MeanSe,
    /// `𝔼 max_x |⟨∇⟩^{−ε}(:Ψ_M^ℓ: − :Ψ_N^ℓ:)|` on the evaluation grid.
    pub winf: MeanSe,
    /// Exact value of the gap: the mode sum for `ℓ = 1`, the pairing formula otherwise.
    pub exact: f64,
    pub grid: usize,
}

/// `Σ_{N < |n| ≤ M} ⟨n⟩^{−2ε} γ(n, t)`.
pub fn first_chaos_gap(low: usize, high: usize, eps: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let low2 = (low * low) as i64;
    Ok(disc_sum(high, |k| {
        let sq = k[0] as i64 * k[0] as i64 + k[1] as i64 * k[1] as i64;
        if sq <= low2 {
            0.0
        } else {
            (1.0 + sq as f64).powf(-eps) * gamma_omega((sq as f64).sqrt(), t)
        }
    }))
}

/// Smallest evaluation grid on which `:Ψ_M^ℓ:` is represented without aliasing.
pub fn wick_grid(order: usize, high: usize) -> usize {
    crate::lattice::fft_friendly_size(2 * order.max(1) * high + 2)
}

/// Monte Carlo Cauchy gaps `:Ψ_M^ℓ: − :Ψ_N^ℓ:` in `H^{−ε}` at time `t` for each
/// `(N, M)` pair, with all levels driven by one nested path per replica.
pub fn cauchy_gaps(
    seed: u64,
    replicas: usize,
    order: usize,
    pairs: &[(usize, usize)],
    eps: f64,
    t: f64,
) -> Result<Vec<CauchyGap>> {
    if order > MAX_WICK_ORDER {
        return Err(Error::OrderOutOfRange { order, max: MAX_WICK_ORDER });
    }
    if let Some((n, m)) = pairs.iter().find(|(n, m)| m < n) {
        return Err(Error::invalid(format!("Cauchy pair needs M ≥ N, got ({n}, {m})")));
    }
    check_time(t)?;
    let top = pairs.iter().map(|p| p.1).max().unwrap_or(0);
    let per_replica: Vec<Vec<(f64, f64)>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            if t == 0.0 {
                return Ok(vec![(0.0, 0.0); pairs.len()]);
            }
            let state = sample_psi(seed, r, top, t, Dispersion::Wave)?;
            let psi = state.psi_field();
            pairs
                .iter()
                .map(|&(n, m)| {
                    if n == m {
                        return Ok((0.0, 0.0));
                    }
                    let grid = wick_grid(order, m);
                    let diff = wick_difference(&psi, order, n, m, t, grid)?;
                    Ok((
                        crate::lattice::h_norm_sq_grid(&diff, -eps),
                        crate::lattice::winf_estimate(&diff, -eps),
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(n, m))| {
            let gaps: Vec<f64> = per_replica.iter().map(|v| v[i].0).collect();
            let winf: Vec<f64> = per_replica.iter().map(|v| v[i].1).collect();
            let exact = if order == 1 { first_chaos_gap(n, m, eps, t)? } else { cauchy_gap_exact(order, n, m, eps, t)? };
            Ok(CauchyGap {
                order,
                low: n,
                high: m,
                gap: MeanSe::of(&gaps),
                winf: MeanSe::of(&winf),
                exact,
                grid: wick_grid(order, m),
            })
        })
        .collect()
}

pub fn cauchy_gap(seed: u64, replicas: usize, order: usize, low: usize, high: usize, eps: f64, t: f64) -> Result<CauchyGap> {
    if high <= low {
        return Err(Error::invalid(format!("Cauchy gap needs M > N, got N = {low}, M = {high}")));
    }
    Ok(cauchy_gaps(seed, replicas, order, &[(low, high)], eps, t)?.remove(0))
}

fn wick_difference(psi: &SpectralField, order: usize, low: usize, high: usize, t: f64, grid: usize) -> Result<GridField> {
    let fine_high = FrequencyLattice::with_grid(high, grid)?;
    let fine_low = FrequencyLattice::with_grid(low, grid)?;
    let a = psi.embed(&fine_high).to_grid();
    let b = psi.embed(&fine_low).to_grid();
    let (sa, sb) = (sigma_exact(high, t)?, sigma_exact(low, t)?);
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| hermite_unchecked(order, x, sa) - hermite_unchecked(order, y, sb))
        .collect();
    GridField::from_values(&fine_high, values)
}

/// `𝔼‖:Ψ_N^ℓ(t+h): − :Ψ_N^ℓ(t):‖²_{H^{−ε}}`, evaluated exactly from the
/// two-time covariance and the pairing rule (no sampling).
pub fn time_increment_moment(radius: usize, order: usize, t: f64, h: f64, eps: f64) -> Result<f64> {
    check_time(t)?;
    check_time(h)?;
    if order == 0 || order > MAX_WICK_ORDER {
        return Err(Error::OrderOutOfRange { order, max: MAX_WICK_ORDER });
    }
    let grid = wick_grid(order, radius);
    let lattice = FrequencyLattice::with_grid(radius, grid)?;
    let omega = Dispersion::Wave.frequencies(&lattice);
    let kernel = |f: &dyn Fn(f64) -> f64| -> Result<GridField> {
        let coeffs = omega.iter().map(|&w| Complex64::new(f(w), 0.0)).collect();
        Ok(SpectralField::from_coeffs(&lattice, coeffs)?.to_grid())
    };
    let s = t + h;
    let g_tt = kernel(&|w| gamma_omega(w, t))?;
    let g_ss = kernel(&|w| gamma_omega(w, s))?;
    let g_st = kernel(&|w| cross_covariance(w, s, t))?;
    let fact = hermite::factorial(order);
    let combined: Vec<f64> = g_tt
        .values()
        .iter()
        .zip(g_ss.values())
        .zip(g_st.values())
        .map(|((a, b), c)| fact * (a.powi(order as i32) + b.powi(order as i32) - 2.0 * c.powi(order as i32)))
        .collect();
    weighted_spectrum_sum(&lattice, combined, eps)
}

/// `𝔼‖:Ψ_M^ℓ: − :Ψ_N^ℓ:‖²_{H^{−ε}}` from the pairing rule: the difference has
/// covariance function `ℓ!(C_M^ℓ − C_N^ℓ)`, since the cross covariance of the
/// two levels is `C_N`.
pub fn cauchy_gap_exact(order: usize, low: usize, high: usize, eps: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if order == 0 || order > MAX_WICK_ORDER {
        return Err(Error::OrderOutOfRange { order, max: MAX_WICK_ORDER });
    }
    if high < low {
        return Err(Error::invalid(format!("Cauchy pair needs M ≥ N, got ({low}, {high})")));
    }
    let lattice = FrequencyLattice::with_grid(high, wick_grid(order, high))?;
    let low2 = (low * low) as i64;
    let covariance = |cut: bool| -> Result<GridField> {
        let coeffs = lattice
            .indices()
            .iter()
            .map(|k| {
                let sq = k[0] as i64 * k[0] as i64 + k[1] as i64 * k[1] as i64;
                let g = if cut && sq > low2 { 0.0 } else { gamma_omega((sq as f64).sqrt(), t) };
                Complex64::new(g, 0.0)
            })
            .collect();
        Ok(SpectralField::from_coeffs(&lattice, coeffs)?.to_grid())
    };
    let (c_high, c_low) = (covariance(false)?, covariance(true)?);
    let fact = hermite::factorial(order);
    let combined = c_high
        .values()
        .iter()
        .zip(c_low.values())
        .map(|(a, b)| fact * (a.powi(order as i32) - b.powi(order as i32)))
        .collect();
    weighted_spectrum_sum(&lattice, combined, eps)
}

/// `Σ_n ⟨n⟩^{−2ε} ĉ(n)` for a covariance function `c` given on the grid of
/// `lattice`. Its Fourier coefficients are the expected squared moduli of the
/// field's coefficients.
fn weighted_spectrum_sum(lattice: &FrequencyLattice, combined: Vec<f64>, eps: f64) -> Result<f64> {
    let cov = GridField::from_values(lattice, combined)?;
    let m = lattice.grid();
    let mut buf: Vec<Complex64> = cov.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    lattice.fft_forward(&mut buf);
    let norm = 1.0 / (m * m) as f64;
    let wrap = |j: usize| -> f64 { (if j > m / 2 { j as i64 - m as i64 } else { j as i64 }) as f64 };
    Ok(kahan_sum(buf.iter().enumerate().map(|(i, c)| {
        let (a, b) = (wrap(i / m), wrap(i % m));
        (1.0 + a * a + b * b).powf(-eps) * c.re * norm
    })))
}

/// Variance of `X(t)` for the Euler–Maruyama discretisation of
/// `dX = V dt, dV = −ω²X dt + dβ` with `steps` steps, propagated exactly
/// through the scheme's second-moment recursion.
pub fn euler_maruyama_variance(omega: f64, t: f64, steps: usize) -> f64 {
    let h = t / steps as f64;
    let w2 = omega * omega;
    let (mut pxx, mut pxv, mut pvv) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..steps {
        // (x, v) ↦ (x + h v, v − h ω² x) + (0, Δβ)
        let nxx = pxx + 2.0 * h * pxv + h * h * pvv;
        let nxv = pxv + h * pvv - h * w2 * pxx - h * h * w2 * pxv;
        let nvv = pvv - 2.0 * h * w2 * pxv + h * h * w2 * w2 * pxx + h;
        pxx = nxx;
        pxv = nxv;
        pvv = nvv;
    }
    pxx
}
