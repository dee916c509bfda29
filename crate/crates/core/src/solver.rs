//! Integrator for the truncated Wick-ordered wave equation
//!
//! ```text
//!     ∂ₜ²u_N + ω(∇)²u_N ± H_k(u_N; σ_N) = P_N ξ,      (u_N, ∂ₜu_N)(0) = (φ₀, φ₁),
//! ```
//!
//! written as `u_N = Ψ_N + v_N`. The stochastic convolution is stepped exactly
//! ([`ConvolutionState`]) and the remainder obeys
//! `∂ₜ²v + ω²v = G(Ψ, v)` with `G = ∓ Σ_ℓ C(k,ℓ) :Ψ^ℓ: v^{k−ℓ} = ∓ H_k(Ψ + v; σ)`.
//!
//! One step of length `h` applies the exact free propagator to `(v, ∂ₜv)` and
//! integrates the Duhamel term with the trapezoidal rule:
//!
//! ```text
//!     v⁺  = cos(ωh) v + sin(ωh)/ω ∂ₜv + (h/2)·sin(ωh)/ω · G(t)
//!     ∂ₜv⁺ = −ω sin(ωh) v + cos(ωh) ∂ₜv + (h/2)·(cos(ωh) G(t) + G(t+h))
//! ```
//!
//! where `G(t+h)` is evaluated at the new `v⁺`, so each step costs one
//! nonlinearity evaluation. Products are formed on a grid fine enough that
//! `P_N(u^k)` is exact.

use num::complex::Complex64;
use num::Zero;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::convolution::{gamma_omega, ConvolutionState, Dispersion, OscillatorStep, WickField};
use crate::error::{Error, Result};
use crate::hermite::{binomial, hermite_unchecked};
use crate::lattice::{h_norm, lr_norm, FrequencyLattice, GridField, SpectralField};
use crate::noise::ModePath;
use crate::stats::kahan_sum;

/// Field magnitude beyond which a run is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;
pub const MAX_DEGREE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// `+u^k` on the left-hand side.
    Defocusing,
    /// `−u^k` on the left-hand side.
    Focusing,
}

impl Sign {
    /// Factor multiplying the nonlinearity on the right-hand side.
    pub fn rhs_factor(self) -> f64 {
        match self {
            Sign::Defocusing => -1.0,
            Sign::Focusing => 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub degree: usize,
    pub sign: Sign,
    /// Positive multiplier of the nonlinearity.
    pub coupling: f64,
    pub radius: usize,
    pub dt: f64,
    pub horizon: f64,
    pub dispersion: Dispersion,
    /// Use `H_k(u; σ_N(t))`; otherwise the bare power `u^k`.
    pub renormalized: bool,
    /// Drive with the path; otherwise `Ψ ≡ 0` and `σ ≡ 0`.
    pub noise: bool,
    /// `(φ₀, φ₁)`, embedded into the solver lattice. `None` means zero data.
    pub initial: Option<(SpectralField, SpectralField)>,
    /// Record a sample every this many steps (and at the final time).
    pub sample_every: usize,
    /// Regularity `s` of the reported `‖v‖_{H^s}`.
    pub v_regularity: f64,
    /// `ε` of the reported `‖u‖_{H^{−ε}}`.
    pub u_smoothing: f64,
    /// `(q, r)` for a running `L^q_T L^r_x` norm of `v`.
    pub strichartz_pair: Option<(f64, f64)>,
    /// Keep spectral snapshots of `u` and `v` at sample times.
    pub keep_fields: bool,
}

impl SolverConfig {
    /// Renormalized, noise-driven, defocusing run with unit coupling and zero data.
    pub fn new(degree: usize, radius: usize, dt: f64, horizon: f64) -> Self {
        SolverConfig {
            degree,
            sign: Sign::Defocusing,
            coupling: 1.0,
            radius,
            dt,
            horizon,
            dispersion: Dispersion::Wave,
            renormalized: true,
            noise: true,
            initial: None,
            sample_every: 1,
            v_regularity: 0.5,
            u_smoothing: 0.25,
            strichartz_pair: None,
            keep_fields: false,
        }
    }

    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt) - 1e-9).ceil().max(0.0) as usize
    }

    pub fn max_frequency(&self) -> f64 {
        let n = self.radius as f64;
        match self.dispersion {
            Dispersion::Wave => n,
            Dispersion::KleinGordon => (1.0 + n * n).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 || self.degree > MAX_DEGREE {
            return Err(Error::OrderOutOfRange { order: self.degree, max: MAX_DEGREE });
        }
        if !(self.dt > 0.0) || !(self.horizon >= 0.0) {
            return Err(Error::invalid(format!("need dt > 0 and T ≥ 0, got dt = {}, T = {}", self.dt, self.horizon)));
        }
        let limit = 0.5 / self.max_frequency().max(1.0);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "dt = {} does not resolve the fastest mode; need dt ≤ {limit}",
                self.dt
            )));
        }
        if !(self.coupling >= 0.0) {
            return Err(Error::invalid("coupling must be nonnegative"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every must be positive"));
        }
        Ok(())
    }

    /// Grid on which `P_N(u^k)` is computed without aliasing.
    pub fn lattice(&self) -> FrequencyLattice {
        FrequencyLattice::for_degree(self.radius, self.degree)
    }
}

/// Right-hand side `G(Ψ, v)` of the remainder equation, evaluated pointwise on
/// the grid.
pub trait Forcing: Send + Sync {
    /// Writes `G` at time `t` into `out`; `sigma` is the renormalization
    /// constant in use (zero when renormalization or noise is off).
    fn apply(&self, t: f64, sigma: f64, psi: &[f64], v: &[f64], out: &mut [f64]);
}

/// `G = scale · H_k(Ψ + v; σ)`.
#[derive(Clone, Copy, Debug)]
pub struct WickForcing {
    pub degree: usize,
    pub scale: f64,
}

impl WickForcing {
    pub fn from_config(config: &SolverConfig) -> Self {
        WickForcing { degree: config.degree, scale: config.sign.rhs_factor() * config.coupling }
    }
}

impl Forcing for WickForcing {
    fn apply(&self, _t: f64, sigma: f64, psi: &[f64], v: &[f64], out: &mut [f64]) {
        for ((o, &p), &w) in out.iter_mut().zip(psi).zip(v) {
            *o = self.scale * hermite_unchecked(self.degree, p + w, sigma);
        }
    }
}

/// `∓ P_N Σ_ℓ C(k,ℓ) :Ψ^ℓ: v^{k−ℓ}` from explicit Wick powers `ℓ = 0..=k`.
pub fn wick_nonlinearity(v: &GridField, wick: &[WickField], degree: usize, sign: Sign) -> Result<GridField> {
    if wick.len() != degree + 1 {
        return Err(Error::invalid(format!("need Wick powers 0..={degree}, got {}", wick.len())));
    }
    let (sigma, time) = (wick[0].sigma, wick[0].time);
    for (l, w) in wick.iter().enumerate() {
        if w.order != l {
            return Err(Error::invalid(format!("Wick power at position {l} has order {}", w.order)));
        }
        if w.sigma != sigma || w.time != time {
            return Err(Error::invalid("Wick powers built from different variances or times"));
        }
        if w.field.lattice() != v.lattice() {
            return Err(Error::LatticeMismatch("Wick power and v live on different grids".into()));
        }
    }
    let factor = sign.rhs_factor();
    let values = (0..v.values().len())
        .map(|i| {
            let x = v.values()[i];
            factor * kahan_sum((0..=degree).map(|l| binomial(degree, l) * wick[l].field.values()[i] * x.powi((degree - l) as i32)))
        })
        .collect();
    Ok(GridField::from_values(v.lattice(), values)?.to_spectral().to_grid())
}

/// Pair `(v, ∂ₜv)` of the remainder together with the driving convolution.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub steps: usize,
    pub v: Vec<Complex64>,
    pub v_dot: Vec<Complex64>,
    pub conv: Option<ConvolutionState>,
    pub sigma: f64,
    forcing_hat: Vec<Complex64>,
    max_u: f64,
}

impl SolverState {
    pub fn v_field(&self, lattice: &FrequencyLattice) -> SpectralField {
        SpectralField::from_coeffs(lattice, self.v.clone()).expect("sizes match")
    }

    /// `û = Ψ̂ + v̂`.
    pub fn u_field(&self, lattice: &FrequencyLattice) -> SpectralField {
        let coeffs = match &self.conv {
            Some(c) => self.v.iter().zip(c.psi()).map(|(a, b)| a + b).collect(),
            None => self.v.clone(),
        };
        SpectralField::from_coeffs(lattice, coeffs).expect("sizes match")
    }

    /// Forcing `Ĝ` at the current time.
    pub fn forcing(&self) -> &[Complex64] {
        &self.forcing_hat
    }

    /// Grid maximum of `|u|` at the last forcing evaluation.
    pub fn max_u(&self) -> f64 {
        self.max_u
    }
}

/// Diagnostics recorded at one sample time.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub v_norm: f64,
    pub u_norm: f64,
    pub sigma: f64,
    /// Discrete energy, reported when the noise is off.
    pub energy: Option<f64>,
    pub max_u: f64,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub u: SpectralField,
    pub v: SpectralField,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    /// Time at which the blowup threshold was crossed.
    pub blowup: Option<f64>,
    pub renormalized: bool,
    /// `‖v‖_{L^q_T L^r_x}` over the samples, if requested.
    pub strichartz_norm: Option<f64>,
    pub final_state: SolverState,
}

pub struct Solver<F: Forcing = WickForcing> {
    config: SolverConfig,
    lattice: FrequencyLattice,
    omega: Vec<f64>,
    rotation: Vec<OscillatorStep>,
    substeps: usize,
    forcing: F,
    path: Option<ModePath>,
    buf: Vec<Complex64>,
    psi_grid: Vec<f64>,
    v_grid: Vec<f64>,
    out_grid: Vec<f64>,
}

impl Solver<WickForcing> {
    pub fn new(config: SolverConfig, path: Option<&ModePath>) -> Result<Self> {
        let forcing = WickForcing::from_config(&config);
        Solver::with_forcing(config, path, forcing)
    }
}

impl<F: Forcing> Solver<F> {
    /// A solver with a custom right-hand side. `path` is required when
    /// `config.noise` is set; its step must divide `config.dt`.
    pub fn with_forcing(config: SolverConfig, path: Option<&ModePath>, forcing: F) -> Result<Self> {
        config.validate()?;
        let lattice = config.lattice();
        let mut substeps = 1;
        let path = if config.noise {
            let path = path.ok_or_else(|| Error::invalid("noise is on but no path was given"))?;
            if path.radius() < config.radius {
                return Err(Error::invalid(format!(
                    "path radius {} is below the solver radius {}",
                    path.radius(),
                    config.radius
                )));
            }
            let ratio = config.dt / path.dt();
            substeps = ratio.round() as usize;
            if substeps == 0 || (substeps as f64 - ratio).abs() > 1e-9 * ratio {
                return Err(Error::invalid(format!(
                    "solver dt = {} is not a multiple of the path step {}",
                    config.dt,
                    path.dt()
                )));
            }
            if path.steps() < config.steps() * substeps {
                return Err(Error::invalid(format!(
                    "path horizon {} is shorter than T = {}",
                    path.config().horizon,
                    config.horizon
                )));
            }
            Some(path.restrict(config.radius)?)
        } else {
            None
        };
        let omega = config.dispersion.frequencies(&lattice);
        let rotation = omega.iter().map(|&w| OscillatorStep::new(w, config.dt)).collect();
        let m = lattice.grid();
        Ok(Solver {
            config,
            lattice,
            omega,
            rotation,
            substeps,
            forcing,
            path,
            buf: vec![Complex64::zero(); m * m],
            psi_grid: vec![0.0; m * m],
            v_grid: vec![0.0; m * m],
            out_grid: vec![0.0; m * m],
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    /// Path steps per solver step.
    pub fn substeps(&self) -> usize {
        self.substeps
    }

    fn sigma_at(&self, t: f64) -> f64 {
        if !(self.config.noise && self.config.renormalized) {
            return 0.0;
        }
        kahan_sum(self.omega.iter().map(|&w| gamma_omega(w, t)))
    }

    /// Initial state: `(φ₀, φ₁)`, zero convolution, forcing at `t = 0`.
    pub fn initial_state(&mut self) -> Result<SolverState> {
        let n = self.lattice.len();
        let (v, v_dot) = match &self.config.initial {
            Some((a, b)) => (a.embed(&self.lattice).into_coeffs(), b.embed(&self.lattice).into_coeffs()),
            None => (vec![Complex64::zero(); n], vec![Complex64::zero(); n]),
        };
        let conv = match &self.path {
            Some(p) => Some(ConvolutionState::new(p, &self.lattice, self.config.dispersion)?),
            None => None,
        };
        let mut state = SolverState {
            t: 0.0,
            steps: 0,
            v,
            v_dot,
            conv,
            sigma: 0.0,
            forcing_hat: vec![Complex64::zero(); n],
            max_u: 0.0,
        };
        let mut f = vec![Complex64::zero(); n];
        state.max_u = self.evaluate_forcing(&state, &mut f)?;
        state.forcing_hat = f;
        Ok(state)
    }

    /// `Ĝ(Ψ(t), v)` at the state's time and current `v`; returns `max |u|`.
    fn evaluate_forcing(&mut self, state: &SolverState, out: &mut [Complex64]) -> Result<f64> {
        let i = Complex64::i();
        let combined: Vec<Complex64> = match &state.conv {
            Some(c) => c.psi().iter().zip(&state.v).map(|(p, v)| p + i * v).collect(),
            None => state.v.iter().map(|v| i * v).collect(),
        };
        self.lattice.scatter(&combined, &mut self.buf);
        self.lattice.fft_inverse(&mut self.buf);
        let mut max_u = 0.0f64;
        for ((c, p), v) in self.buf.iter().zip(&mut self.psi_grid).zip(&mut self.v_grid) {
            *p = c.re;
            *v = c.im;
            let u = c.re + c.im;
            if !u.is_finite() || u.abs() > BLOWUP_THRESHOLD {
                return Err(Error::Blowup { t: state.t });
            }
            max_u = max_u.max(u.abs());
        }
        let sigma = self.sigma_at(state.t);
        self.forcing.apply(state.t, sigma, &self.psi_grid, &self.v_grid, &mut self.out_grid);
        for (c, &g) in self.buf.iter_mut().zip(&self.out_grid) {
            *c = Complex64::new(g, 0.0);
        }
        self.lattice.fft_forward(&mut self.buf);
        self.lattice.gather(&self.buf, out);
        Ok(max_u)
    }

    /// Advances the state by `dt`.
    pub fn step(&mut self, state: &mut SolverState) -> Result<()> {
        let h = self.config.dt;
        let half = 0.5 * h;
        let mut v_tilde = vec![Complex64::zero(); state.v.len()];
        for (p, r) in self.rotation.iter().enumerate() {
            let (x, v) = r.rotate(state.v[p], state.v_dot[p]);
            let f0 = state.forcing_hat[p];
            state.v[p] = x + f0 * (half * r.sin_over_omega);
            v_tilde[p] = v + f0 * (half * r.cos);
        }
        if let Some(conv) = state.conv.as_mut() {
            for _ in 0..self.substeps {
                conv.advance()?;
            }
        }
        state.steps += 1;
        state.t = state.steps as f64 * h;
        let mut f1 = vec![Complex64::zero(); state.v.len()];
        state.max_u = self.evaluate_forcing(state, &mut f1)?;
        for (p, vt) in v_tilde.into_iter().enumerate() {
            state.v_dot[p] = vt + f1[p] * half;
        }
        state.forcing_hat = f1;
        state.sigma = self.sigma_at(state.t);
        Ok(())
    }

    /// Discrete energy `½‖∂ₜv‖² + ½‖ω v‖² ± (c/(k+1)) ∫ v^{k+1}` of the
    /// noise-free system.
    pub fn energy(&self, state: &SolverState) -> f64 {
        let kinetic = kahan_sum(state.v_dot.iter().map(|c| c.norm_sqr()));
        let potential = kahan_sum(state.v.iter().zip(&self.omega).map(|(c, w)| w * w * c.norm_sqr()));
        let grid = state.v_field(&self.lattice).to_grid();
        let k = self.config.degree;
        let power = kahan_sum(grid.values().iter().map(|x| x.powi(k as i32 + 1))) / grid.values().len() as f64;
        let sign = -self.config.sign.rhs_factor();
        0.5 * kinetic + 0.5 * potential + sign * self.config.coupling * power / (k + 1) as f64
    }

    fn sample(&self, state: &SolverState) -> Sample {
        let v = state.v_field(&self.lattice);
        let u = state.u_field(&self.lattice);
        Sample {
            t: state.t,
            v_norm: h_norm(&v, self.config.v_regularity),
            u_norm: h_norm(&u, -self.config.u_smoothing),
            sigma: self.sigma_at(state.t),
            energy: (!self.config.noise).then(|| self.energy(state)),
            max_u: state.max_u,
        }
    }

    /// Runs to the horizon, sampling diagnostics; a blowup ends the run early
    /// and is reported in the trajectory.
    pub fn run(&mut self) -> Result<Trajectory> {
        let mut state = self.initial_state()?;
        let steps = self.config.steps();
        let mut samples = vec![self.sample(&state)];
        let mut snapshots = Vec::new();
        let mut lr_series = Vec::new();
        let keep = |solver: &Self, st: &SolverState, snaps: &mut Vec<Snapshot>, lr: &mut Vec<GridField>| {
            if solver.config.keep_fields {
                snaps.push(Snapshot { t: st.t, u: st.u_field(&solver.lattice), v: st.v_field(&solver.lattice) });
            }
            if solver.config.strichartz_pair.is_some() {
                lr.push(st.v_field(&solver.lattice).to_grid());
            }
        };
        keep(self, &state, &mut snapshots, &mut lr_series);
        let mut blowup = None;
        for j in 1..=steps {
            match self.step(&mut state) {
                Ok(()) => {}
                Err(Error::Blowup { t }) => {
                    blowup = Some(t);
                    break;
                }
                Err(e) => return Err(e),
            }
            if j % self.config.sample_every == 0 || j == steps {
                samples.push(self.sample(&state));
                keep(self, &state, &mut snapshots, &mut lr_series);
            }
        }
        let strichartz_norm = match self.config.strichartz_pair {
            Some((q, r)) if !lr_series.is_empty() => {
                let dt = self.config.dt * self.config.sample_every as f64;
                Some(crate::lattice::strichartz_norm(&lr_series, q, r, dt)?)
            }
            _ => None,
        };
        Ok(Trajectory {
            samples,
            snapshots,
            blowup,
            renormalized: self.config.renormalized,
            strichartz_norm,
            final_state: state,
        })
    }

    /// Runs until `t ≥ target`, returning the state there.
    pub fn run_to(&mut self, target: f64) -> Result<SolverState> {
        let mut state = self.initial_state()?;
        let steps = ((target / self.config.dt) - 1e-9).ceil().max(0.0) as usize;
        for _ in 0..steps {
            self.step(&mut state)?;
        }
        Ok(state)
    }
}

/// Solves with the Wick forcing of `config`.
pub fn solve(config: &SolverConfig, path: Option<&ModePath>) -> Result<Trajectory> {
    Solver::new(config.clone(), path)?.run()
}

/// `‖u_{N₂}(t*) − u_{N₁}(t*)‖_{H^{−ε}}` for two radii driven by the same path.
pub fn refinement_gap(config: &SolverConfig, path: Option<&ModePath>, low: usize, high: usize, eps: f64, t_star: f64) -> Result<f64> {
    let run = |radius: usize| -> Result<SpectralField> {
        let cfg = SolverConfig { radius, horizon: t_star.max(config.horizon), ..config.clone() };
        let mut solver = Solver::new(cfg, path)?;
        let state = solver.run_to(t_star)?;
        Ok(state.u_field(solver.lattice()))
    };
    if low == high {
        return Ok(0.0);
    }
    let a = run(low)?;
    let b = run(high)?;
    Ok(h_norm(&b.difference(&a), -eps))
}

/// Residual of the mild formulation
/// `v(t) − S(t)(φ₀, φ₁) − ∫₀ᵗ sin((t−τ)ω)/ω G(τ) dτ` in `H^{−1}` at `samples`
/// evenly spaced times, with the Duhamel integral evaluated by composite
/// Simpson quadrature of the recorded forcing.
pub fn mild_residual(config: &SolverConfig, path: Option<&ModePath>, samples: usize) -> Result<Vec<(f64, f64)>> {
    let mut solver = Solver::new(config.clone(), path)?;
    let steps = config.steps();
    if samples == 0 || steps < 2 * samples {
        return Err(Error::invalid("need at least two steps per residual sample"));
    }
    let mut state = solver.initial_state()?;
    let initial_v = state.v.clone();
    let initial_v_dot = state.v_dot.clone();
    let mut history = vec![state.forcing_hat.clone()];
    let mut vs = vec![state.v.clone()];
    for _ in 0..steps {
        solver.step(&mut state)?;
        history.push(state.forcing_hat.clone());
        vs.push(state.v.clone());
    }
    let lattice = solver.lattice().clone();
    let omega = solver.omega.clone();
    let h = config.dt;
    let mut out = Vec::new();
    for i in 1..=samples {
        let j = 2 * ((i * steps) / (2 * samples));
        let t = j as f64 * h;
        let mut residual = vec![Complex64::zero(); lattice.len()];
        for (p, &w) in omega.iter().enumerate() {
            let free = OscillatorStep::new(w, t).rotate(initial_v[p], initial_v_dot[p]).0;
            let duhamel: Complex64 = (0..=j)
                .map(|m| {
                    let weight = if m == 0 || m == j { 1.0 } else if m % 2 == 1 { 4.0 } else { 2.0 };
                    let kernel = OscillatorStep::new(w, (j - m) as f64 * h).sin_over_omega;
                    history[m][p] * (weight * kernel)
                })
                .sum::<Complex64>()
                * (h / 3.0);
            residual[p] = vs[j][p] - free - duhamel;
        }
        out.push((t, h_norm(&SpectralField::from_coeffs(&lattice, residual)?, -1.0)));
    }
    Ok(out)
}

/// Random data `û(n) = ⟨n⟩^{−(s+1)} g_n` with `g_n` standard complex
/// Gaussians (real at `n = 0`), Hermitian-symmetrised.
pub fn random_initial_data(lattice: &FrequencyLattice, s: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || {
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
        let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    SpectralField::from_half_fn(lattice, |k| {
        let weight = (1.0 + (k[0] as f64).powi(2) + (k[1] as f64).powi(2)).powf(-(s + 1.0) / 2.0);
        if k == [0, 0] {
            Complex64::new(weight * normal(), 0.0)
        } else {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            Complex64::new(r * normal(), r * normal()) * weight
        }
    })
}

/// `‖g‖_{L^r}` over a run's snapshots of `v`, useful for Strichartz-type logging.
pub fn snapshot_lr_norms(trajectory: &Trajectory, r: f64) -> Vec<(f64, f64)> {
    trajectory.snapshots.iter().map(|s| (s.t, lr_norm(&s.v.to_grid(), r))).collect()
}
