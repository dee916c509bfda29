//! Scaled microscopic model and its Wick-cubic limit.
//!
//! For a smooth odd bounded `f`, scale `ε ∈ (0, 1]` and noise truncated to
//! `|n| ≤ N_ε = ⌊1/ε⌋`, the remainder `v_ε = u_ε − Ψ_ε` is driven by
//!
//! ```text
//!     F_ε = ε^{−2}(f′(0) + a)u + λ(H₃(u; σ_ε) + 3σ_ε u) + Λ_ε u³,      u = Ψ_ε + v_ε,
//!     a   = −f′(0) − ε²σ_ε(t) f‴(0)/2,     λ = f‴(0)/6,
//!     Λ_ε = ∫₀¹ (1−τ)²/2 (f‴(τεu) − f‴(0)) dτ,
//! ```
//!
//! which is `ε^{−3}(f(εu) + ε a u)` rewritten around the cubic Taylor
//! polynomial. The limit is `∂ₜ²u − Δu = λ H₃(u; σ) + ξ`.

use rayon::prelude::*;

use crate::convolution::{sigma_exact, Dispersion};
use crate::error::{Error, Result};
use crate::hermite::hermite_unchecked;
use crate::lattice::{h_norm, SpectralField};
use crate::noise::{sample_path, ModePath, NoiseConfig};
use crate::solver::{Forcing, Sign, Solver, SolverConfig, Trajectory};
use crate::stats::median;

/// Gauss–Legendre nodes and weights on `[0, 1]`, eight points.
const GAUSS_LEGENDRE_8: [(f64, f64); 8] = {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_2];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    [
        (0.5 - 0.5 * X[3], 0.5 * W[3]),
        (0.5 - 0.5 * X[2], 0.5 * W[2]),
        (0.5 - 0.5 * X[1], 0.5 * W[1]),
        (0.5 - 0.5 * X[0], 0.5 * W[0]),
        (0.5 + 0.5 * X[0], 0.5 * W[0]),
        (0.5 + 0.5 * X[1], 0.5 * W[1]),
        (0.5 + 0.5 * X[2], 0.5 * W[2]),
        (0.5 + 0.5 * X[3], 0.5 * W[3]),
    ]
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Nonlinearity {
    Sin,
    Tanh,
    /// `x/(1 + x²)`.
    Lorentzian,
    /// `x³ e^{−x²}`.
    CubicGaussian,
    /// `f₁x + f₃x³/6`, the cubic Taylor polynomial of another entry.
    Cubic { f1: f64, f3: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearitySpec {
    pub name: String,
    pub kind: Nonlinearity,
}

impl NonlinearitySpec {
    pub const CATALOG: [&'static str; 4] = ["sin", "tanh", "lorentzian", "cubic-gaussian"];

    /// Catalog entry by name; a `-cubic` suffix selects its cubic Taylor polynomial.
    pub fn by_name(name: &str) -> Result<Self> {
        if let Some(base) = name.strip_suffix("-cubic") {
            return Ok(Self::by_name(base)?.cubic_taylor());
        }
        let kind = match name {
            "sin" => Nonlinearity::Sin,
            "tanh" => Nonlinearity::Tanh,
            "lorentzian" => Nonlinearity::Lorentzian,
            "cubic-gaussian" => Nonlinearity::CubicGaussian,
            other => return Err(Error::invalid(format!("unknown nonlinearity '{other}'"))),
        };
        Ok(NonlinearitySpec { name: name.to_string(), kind })
    }

    /// `f₁x + f₃x³/6` with `f₁ = f′(0)`, `f₃ = f‴(0)`.
    pub fn cubic_taylor(&self) -> Self {
        NonlinearitySpec {
            name: format!("{}-cubic", self.name),
            kind: Nonlinearity::Cubic { f1: self.derivative(1, 0.0), f3: self.derivative(3, 0.0) },
        }
    }

    /// `f^{(m)}(x)` for `m ≤ 4`.
    pub fn derivative(&self, m: usize, x: f64) -> f64 {
        assert!(m <= 4, "derivatives up to order 4 are provided");
        match self.kind {
            Nonlinearity::Sin => match m % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            Nonlinearity::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                match m {
                    0 => t,
                    1 => s,
                    2 => -2.0 * t * s,
                    3 => -2.0 * s * (1.0 - 3.0 * t * t),
                    _ => 8.0 * t * s * (2.0 - 3.0 * t * t),
                }
            }
            Nonlinearity::Lorentzian => {
                // x/(1+x²) = Re 1/(x − i)
                let z = num::complex::Complex64::new(x, -1.0);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                (sign * crate::hermite::factorial(m) / z.powu(m as u32 + 1)).re
            }
            Nonlinearity::CubicGaussian => {
                // d/dx [p e^{−x²}] = (p′ − 2x p) e^{−x²}
                let mut p = vec![0.0, 0.0, 0.0, 1.0];
                for _ in 0..m {
                    let mut next = vec![0.0; p.len() + 1];
                    for (i, &c) in p.iter().enumerate() {
                        if i > 0 {
                            next[i - 1] += i as f64 * c;
                        }
                        next[i + 1] -= 2.0 * c;
                    }
                    p = next;
                }
                let poly = p.iter().rev().fold(0.0, |acc, c| acc * x + c);
                poly * (-x * x).exp()
            }
            Nonlinearity::Cubic { f1, f3 } => match m {
                0 => f1 * x + f3 * x.powi(3) / 6.0,
                1 => f1 + f3 * x * x / 2.0,
                2 => f3 * x,
                3 => f3,
                _ => 0.0,
            },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `λ = f‴(0)/6`.
    pub fn lambda(&self) -> f64 {
        self.derivative(3, 0.0) / 6.0
    }

    /// `∫₀¹ (1−τ)²/2 (f‴(τy) − f‴(0)) dτ` by eight-point Gauss–Legendre.
    pub fn remainder_coefficient(&self, y: f64) -> f64 {
        if let Nonlinearity::Cubic { .. } = self.kind {
            return 0.0;
        }
        let f3 = self.derivative(3, 0.0);
        GAUSS_LEGENDRE_8
            .iter()
            .map(|&(tau, w)| w * 0.5 * (1.0 - tau) * (1.0 - tau) * (self.derivative(3, tau * y) - f3))
            .sum()
    }
}

/// `N_ε = ⌊1/ε⌋`.
pub fn scaled_radius(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("ε must lie in (0, 1], got {eps}")));
    }
    Ok((1.0 / eps + 1e-9).floor() as usize)
}

/// Constants of the scaled model at one `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingParams {
    pub eps: f64,
    pub radius: usize,
    pub f1: f64,
    pub f3: f64,
    pub lambda: f64,
}

impl ScalingParams {
    pub fn new(eps: f64, spec: &NonlinearitySpec) -> Result<Self> {
        Ok(ScalingParams {
            eps,
            radius: scaled_radius(eps)?,
            f1: spec.derivative(1, 0.0),
            f3: spec.derivative(3, 0.0),
            lambda: spec.lambda(),
        })
    }

    /// `γ = 1`.
    pub fn gamma_exponent(&self) -> f64 {
        1.0
    }

    /// `δ = ε^{γ + 1/2}`.
    pub fn delta(&self) -> f64 {
        self.eps.powf(self.gamma_exponent() + 0.5)
    }

    /// `σ_ε(t) = σ_{N_ε}(t)`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        sigma_exact(self.radius, t)
    }

    /// `a = −f′(0) − ε²σ f‴(0)/2` for a given variance `σ`.
    pub fn counter_term(&self, sigma: f64) -> f64 {
        -self.f1 - self.eps * self.eps * sigma * self.f3 / 2.0
    }
}

/// The scaled forcing `F_ε`, evaluated term by term.
#[derive(Clone, Debug)]
pub struct ScaledForcing {
    pub spec: NonlinearitySpec,
    pub params: ScalingParams,
}

impl ScaledForcing {
    pub fn new(spec: NonlinearitySpec, eps: f64) -> Result<Self> {
        let params = ScalingParams::new(eps, &spec)?;
        Ok(ScaledForcing { spec, params })
    }

    /// `(F_ε, Λ_ε)` at one point.
    pub fn evaluate(&self, u: f64, sigma: f64) -> (f64, f64) {
        let p = &self.params;
        let linear = (p.f1 + p.counter_term(sigma)) / (p.eps * p.eps) * u;
        let cubic = p.lambda * (hermite_unchecked(3, u, sigma) + 3.0 * sigma * u);
        let big_lambda = self.spec.remainder_coefficient(p.eps * u);
        (linear + cubic + big_lambda * u * u * u, big_lambda)
    }
}

impl Forcing for ScaledForcing {
    fn apply(&self, _t: f64, sigma: f64, psi: &[f64], v: &[f64], out: &mut [f64]) {
        for ((o, &p), &w) in out.iter_mut().zip(psi).zip(v) {
            *o = self.evaluate(p + w, sigma).0;
        }
    }
}

/// Solver settings shared by the scaled and limit arms.
#[derive(Clone, Debug)]
pub struct ScaledRun {
    pub dt: f64,
    pub horizon: f64,
    pub noise: bool,
    pub initial: Option<(SpectralField, SpectralField)>,
    pub keep_fields: bool,
}

/// Integrates the scaled model at `ε` on `|n| ≤ N_ε` from the given data.
pub fn run_scaled(eps: f64, spec: &NonlinearitySpec, path: Option<&ModePath>, run: &ScaledRun) -> Result<Trajectory> {
    let forcing = ScaledForcing::new(spec.clone(), eps)?;
    let mut cfg = SolverConfig::new(3, forcing.params.radius, run.dt, run.horizon);
    cfg.noise = run.noise;
    cfg.initial = run.initial.clone();
    cfg.keep_fields = run.keep_fields;
    cfg.dispersion = Dispersion::Wave;
    Solver::with_forcing(cfg, path, forcing)?.run()
}

/// The limit `∂ₜ²u − Δu = λ H₃(u; σ_N) + ξ` on `|n| ≤ N`.
pub fn run_limit(lambda: f64, radius: usize, path: Option<&ModePath>, run: &ScaledRun) -> Result<Trajectory> {
    let mut cfg = SolverConfig::new(3, radius, run.dt, run.horizon);
    cfg.sign = if lambda <= 0.0 { Sign::Defocusing } else { Sign::Focusing };
    cfg.coupling = lambda.abs();
    cfg.noise = run.noise;
    cfg.initial = run.initial.clone();
    cfg.keep_fields = run.keep_fields;
    Solver::new(cfg, path)?.run()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemainderSample {
    pub t: f64,
    /// `max_x |Λ_ε u³|`.
    pub sup_remainder: f64,
    /// `max_x |Λ_ε| / (ε(|Ψ_ε| + |v_ε|))`.
    pub ratio: f64,
}

/// Remainder diagnostics at each snapshot of a scaled run.
pub fn remainder_norm(trajectory: &Trajectory, spec: &NonlinearitySpec, eps: f64) -> Result<Vec<RemainderSample>> {
    if trajectory.snapshots.is_empty() && !trajectory.samples.is_empty() {
        return Err(Error::invalid("remainder diagnostics need a run with kept fields"));
    }
    scaled_radius(eps)?;
    Ok(trajectory
        .snapshots
        .iter()
        .map(|snap| {
            let u = snap.u.to_grid();
            let v = snap.v.to_grid();
            let mut sup = 0.0f64;
            let mut ratio = 0.0f64;
            for (&uu, &vv) in u.values().iter().zip(v.values()) {
                let big_lambda = spec.remainder_coefficient(eps * uu);
                sup = sup.max((big_lambda * uu.powi(3)).abs());
                let scale = eps * ((uu - vv).abs() + vv.abs());
                if scale > 0.0 {
                    ratio = ratio.max(big_lambda.abs() / scale);
                }
            }
            RemainderSample { t: snap.t, sup_remainder: sup, ratio }
        })
        .collect())
}

/// Settings for [`compare_to_limit`].
#[derive(Clone, Debug)]
pub struct LimitComparison {
    pub eps: Vec<f64>,
    pub seed: u64,
    pub replicas: usize,
    /// Regularity of the distance norm (negative).
    pub regularity: f64,
    pub horizon: f64,
    pub dt: f64,
    pub reference_radius: usize,
}

#[derive(Clone, Debug)]
pub struct ArmDistance {
    pub eps: f64,
    pub replica: u64,
    /// `sup_t ‖u_ε(t) − u(t)‖_{H^σ}`, `None` when either arm blew up.
    pub distance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct LimitTable {
    pub rows: Vec<ArmDistance>,
    /// Per-ε median over the replicas without blowup.
    pub medians: Vec<(f64, f64)>,
    pub blowups: usize,
}

fn sup_distance(a: &Trajectory, b: &Trajectory, s: f64) -> Option<f64> {
    if a.blowup.is_some() || b.blowup.is_some() {
        return None;
    }
    Some(
        a.snapshots
            .iter()
            .zip(&b.snapshots)
            .map(|(x, y)| h_norm(&x.u.difference(&y.u), s))
            .fold(0.0, f64::max),
    )
}

/// Distances between the scaled runs and the limit, all arms of one replica
/// sharing a nested path.
pub fn compare_to_limit(spec: &NonlinearitySpec, cfg: &LimitComparison) -> Result<LimitTable> {
    let radii: Vec<usize> = cfg.eps.iter().map(|&e| scaled_radius(e)).collect::<Result<_>>()?;
    let top = radii.iter().copied().chain([cfg.reference_radius]).max().unwrap_or(0);
    let run = ScaledRun { dt: cfg.dt, horizon: cfg.horizon, noise: true, initial: None, keep_fields: true };
    let per_replica: Vec<Vec<ArmDistance>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|replica| {
            let path = sample_path(NoiseConfig { seed: cfg.seed, radius: top, dt: cfg.dt, horizon: cfg.horizon, replica })?;
            let limit = run_limit(spec.lambda(), cfg.reference_radius, Some(&path), &run)?;
            cfg.eps
                .iter()
                .map(|&eps| {
                    let arm = run_scaled(eps, spec, Some(&path), &run)?;
                    Ok(ArmDistance { eps, replica, distance: sup_distance(&arm, &limit, cfg.regularity) })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ArmDistance> = per_replica.into_iter().flatten().collect();
    let blowups = rows.iter().filter(|r| r.distance.is_none()).count();
    let medians = cfg
        .eps
        .iter()
        .map(|&eps| {
            let d: Vec<f64> = rows.iter().filter(|r| r.eps == eps).filter_map(|r| r.distance).collect();
            (eps, median(&d))
        })
        .collect();
    Ok(LimitTable { rows, medians, blowups })
}
