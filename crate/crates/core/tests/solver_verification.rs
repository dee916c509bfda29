use snlw_core::lattice::{h_norm, FrequencyLattice, SpectralField};
use snlw_core::noise::{sample_path, NoiseConfig};
use snlw_core::solver::{mild_residual, random_initial_data, solve, Sign, Solver, SolverConfig};
use snlw_core::Complex64;

/// RK4 with a tiny step, for `x″ = −c x³`.
fn cubic_oscillator(x0: f64, c: f64, t: f64) -> f64 {
    let n = 100_000;
    let h = t / n as f64;
    let f = |x: f64| -c * x * x * x;
    let (mut x, mut y) = (x0, 0.0);
    for _ in 0..n {
        let (k1x, k1y) = (y, f(x));
        let (k2x, k2y) = (y + 0.5 * h * k1y, f(x + 0.5 * h * k1x));
        let (k3x, k3y) = (y + 0.5 * h * k2y, f(x + 0.5 * h * k2x));
        let (k4x, k4y) = (y + h * k3y, f(x + h * k3x));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    }
    x
}

fn constant_data(radius: usize, c: f64) -> (SpectralField, SpectralField) {
    let lat = FrequencyLattice::new(radius);
    let mut phi = SpectralField::zeros(&lat);
    phi.set_mode([0, 0], Complex64::new(c, 0.0));
    (phi, SpectralField::zeros(&lat))
}

#[test]
fn constant_data_reduces_to_the_cubic_ode() {
    for dt in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let mut cfg = SolverConfig::new(3, 4, dt, 1.0);
        cfg.noise = false;
        cfg.initial = Some(constant_data(4, 1.2));
        let traj = solve(&cfg, None).unwrap();
        let lat = cfg.lattice();
        let got = traj.final_state.v[lat.position([0, 0]).unwrap()];
        let want = cubic_oscillator(1.2, 1.0, 1.0);
        assert!((got.re - want).abs() <= 10.0 * dt * dt, "dt = {dt}: {} vs {want}", got.re);
        assert!(got.im.abs() < 1e-14);
        // other modes stay untouched
        let rest: f64 = traj.final_state.v.iter().map(|c| c.norm_sqr()).sum::<f64>() - got.norm_sqr();
        assert!(rest < 1e-24);
    }
}

#[test]
fn temporal_self_convergence_is_second_order() {
    let fine = 1.0 / 256.0;
    let path = sample_path(NoiseConfig { seed: 31, radius: 6, dt: fine, horizon: 0.5, replica: 0 }).unwrap();
    let run = |dt: f64| {
        let cfg = SolverConfig::new(3, 6, dt, 0.5);
        let mut solver = Solver::new(cfg, Some(&path)).unwrap();
        let st = solver.run_to(0.5).unwrap();
        st.u_field(solver.lattice())
    };
    let (a, b, c) = (run(4.0 * fine), run(2.0 * fine), run(fine));
    let e1 = h_norm(&a.difference(&b), 0.0);
    let e2 = h_norm(&b.difference(&c), 0.0);
    let order = (e1 / e2).log2();
    eprintln!("self-convergence: {e1:.3e} {e2:.3e} order {order:.3}");
    assert!((1.5..=2.5).contains(&order), "order {order}");
}

#[test]
fn energy_drift_scales_like_dt_squared() {
    let lat = FrequencyLattice::new(8);
    let data = (random_initial_data(&lat, 1.0, 5), random_initial_data(&lat, 0.0, 6));
    let drift = |dt: f64| {
        let mut cfg = SolverConfig::new(3, 8, dt, 1.0);
        cfg.noise = false;
        cfg.initial = Some(data.clone());
        let traj = solve(&cfg, None).unwrap();
        let e0 = traj.samples[0].energy.unwrap();
        traj.samples.iter().map(|s| (s.energy.unwrap() - e0).abs()).fold(0.0, f64::max)
    };
    let d: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0].iter().map(|&dt| drift(dt)).collect();
    eprintln!("energy drift {d:?}");
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((2.0..=8.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn mild_residual_is_second_order() {
    let fine = 1.0 / 128.0;
    let path = sample_path(NoiseConfig { seed: 8, radius: 6, dt: fine, horizon: 1.0, replica: 0 }).unwrap();
    let worst = |dt: f64| {
        let cfg = SolverConfig::new(3, 6, dt, 1.0);
        mild_residual(&cfg, Some(&path), 4).unwrap().iter().map(|r| r.1).fold(0.0, f64::max)
    };
    let (a, b) = (worst(2.0 * fine), worst(fine));
    let order = (a / b).log2();
    eprintln!("mild residual {a:.3e} {b:.3e} order {order:.3}");
    assert!((1.5..=2.5).contains(&order), "order {order}");
}

#[test]
fn focusing_sign_flips_the_ode() {
    let mut cfg = SolverConfig::new(3, 2, 1.0 / 64.0, 0.5);
    cfg.noise = false;
    cfg.sign = Sign::Focusing;
    cfg.initial = Some(constant_data(2, 0.8));
    let traj = solve(&cfg, None).unwrap();
    let got = traj.final_state.v[cfg.lattice().position([0, 0]).unwrap()].re;
    let want = cubic_oscillator(0.8, -1.0, 0.5);
    assert!((got - want).abs() < 10.0 / 64.0 / 64.0);
}
