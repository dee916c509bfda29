//! The experiments behind each subcommand.

use rayon::prelude::*;
use snlw_core::convolution::{
    cauchy_gaps, hypercontractivity_check, sample_psi, sigma_with, wick_covariance_suite, Dispersion,
};
use snlw_core::lattice::{h_norm, FrequencyLattice};
use snlw_core::noise::{sample_path, NoiseConfig, NORMALS_PER_STEP};
use snlw_core::solver::{random_initial_data, Sign, Solver, SolverConfig};
use snlw_core::stats::{median, MeanSe};
use snlw_core::strichartz::{choose_pair_f64, figure_data, s_crit_int, to_f64};
use snlw_core::universality::{compare_to_limit, scaled_radius, LimitComparison, NonlinearitySpec};
use snlw_core::Error as CoreError;

use crate::config::{optional, required, KeySpec, Params};
use crate::error::CliError;
use crate::table::{num, opt_num, Table};

/// Everything an experiment produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<(String, Table)>,
    pub replicas: usize,
    pub blowups: usize,
    pub normals_drawn: u64,
    /// Short human-readable result printed by the binary.
    pub summary: String,
}

impl Outcome {
    fn table(&mut self, name: &str, table: Table) {
        self.tables.push((name.to_string(), table));
    }

    /// More than half of the replicas ended in blowup.
    pub fn blowup_dominated(&self) -> bool {
        self.replicas > 0 && 2 * self.blowups > self.replicas
    }
}

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub schema: &'static [KeySpec],
    pub run: fn(&Params) -> Result<Outcome, CliError>,
}

const SIGMA: &[KeySpec] = &[
    required("N", "Dirichlet radii, list"),
    required("t", "times, list"),
    optional("dispersion", "wave", "wave | klein-gordon"),
];

const SAMPLE_PSI: &[KeySpec] = &[
    required("N", "Dirichlet radius"),
    required("t", "time"),
    required("seed", "master seed"),
    required("replicas", "number of realizations"),
    optional("dispersion", "wave", "wave | klein-gordon"),
];

const WICK: &[KeySpec] = &[
    required("suite", "covariance, cauchy, hypercontractivity; list"),
    required("N", "radii, list; the Cauchy suite pairs each N with 2N"),
    required("t", "time"),
    required("seed", "master seed"),
    required("replicas", "ensemble size"),
    required("orders", "Wick orders, list"),
    required("eps", "Sobolev smoothing of the Cauchy gap norm"),
    optional("p", "4, 6", "moment exponents of the hypercontractivity suite"),
    optional("point_pairs", "5", "number of (x, y) pairs of the covariance suite"),
];

const SOLVE: &[KeySpec] = &[
    required("k", "degree of the nonlinearity"),
    required("N", "Dirichlet radius"),
    required("dt", "time step"),
    required("T", "horizon"),
    required("seed", "master seed"),
    optional("replicas", "1", "number of independent runs"),
    optional("sign", "defocusing", "defocusing | focusing"),
    optional("coupling", "1", "multiplier of the nonlinearity"),
    optional("renormalized", "true", "Wick-ordered nonlinearity"),
    optional("noise", "true", "drive with space-time white noise"),
    optional("data", "zero", "zero | random"),
    optional("data_regularity", "0.5", "Sobolev regularity of random data"),
    optional("sample_every", "1", "steps between samples"),
    optional("dispersion", "wave", "wave | klein-gordon"),
];

const CONVERGE: &[KeySpec] = &[
    required("k", "degree of the nonlinearity"),
    required("N", "coarse radii, list; each is compared with 2N"),
    required("dt", "time step"),
    required("T", "comparison time"),
    required("seed", "master seed"),
    required("replicas", "ensemble size"),
    required("eps", "Sobolev smoothing of the gap norm"),
    optional("renormalized", "both", "true | false | both"),
    optional("sign", "defocusing", "defocusing | focusing"),
    optional("coupling", "1", "multiplier of the nonlinearity"),
];

const PAIRS: &[KeySpec] = &[
    required("k", "degrees, list or range a..b"),
    optional("s", "none", "regularities for pair selection, list"),
    optional("figure_points", "0", "samples of the s_crit curve over k in [2, 8]"),
];

const UNIVERSALITY: &[KeySpec] = &[
    required("f", "nonlinearity: sin, tanh, lorentzian, cubic-gaussian; suffix -cubic for its Taylor cubic"),
    required("eps", "scales, list"),
    required("seed", "master seed"),
    required("replicas", "ensemble size"),
    required("T", "horizon"),
    required("dt", "time step"),
    required("N_ref", "radius of the limit arm"),
    optional("regularity", "-0.25", "Sobolev index of the distance"),
];

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment { name: "sigma", about: "renormalization constants", schema: SIGMA, run: sigma },
    Experiment { name: "sample-psi", about: "stochastic convolution realizations", schema: SAMPLE_PSI, run: sample_psi_run },
    Experiment { name: "wick", about: "Wick covariance, Cauchy and hypercontractivity suites", schema: WICK, run: wick },
    Experiment { name: "solve", about: "remainder-equation trajectories", schema: SOLVE, run: solve },
    Experiment { name: "converge", about: "refinement gaps between radii N and 2N", schema: CONVERGE, run: converge },
    Experiment { name: "pairs", about: "critical regularity and Strichartz pairs", schema: PAIRS, run: pairs },
    Experiment { name: "universality", about: "scaled models against the Wick-cubic limit", schema: UNIVERSALITY, run: universality },
];

pub fn lookup(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

fn dispersion(p: &Params) -> Result<Dispersion, CliError> {
    match p.get::<String>("dispersion")?.as_str() {
        "wave" => Ok(Dispersion::Wave),
        "klein-gordon" => Ok(Dispersion::KleinGordon),
        other => Err(CliError::Config(format!("dispersion: unknown value '{other}'"))),
    }
}

fn sign(p: &Params) -> Result<Sign, CliError> {
    match p.get::<String>("sign")?.as_str() {
        "defocusing" => Ok(Sign::Defocusing),
        "focusing" => Ok(Sign::Focusing),
        other => Err(CliError::Config(format!("sign: unknown value '{other}'"))),
    }
}

fn radii(p: &Params, key: &str) -> Result<Vec<usize>, CliError> {
    Ok(p.integers(key)?.into_iter().map(|n| n as usize).collect())
}

fn half_modes(radius: usize) -> u64 {
    FrequencyLattice::new(radius).half().len() as u64
}

fn sigma(p: &Params) -> Result<Outcome, CliError> {
    let disp = dispersion(p)?;
    let mut table = Table::new(&["N", "t", "sigma"]);
    let mut summary = String::from("N,t,sigma\n");
    for n in radii(p, "N")? {
        for t in p.reals("t")? {
            let s = sigma_with(n, t, disp)?;
            table.push(vec![n.to_string(), num(t), num(s)]);
            summary.push_str(&format!("{n},{t},{s:.12}\n"));
        }
    }
    let mut out = Outcome { summary, ..Outcome::default() };
    out.table("sigma.csv", table);
    Ok(out)
}

fn sample_psi_run(p: &Params) -> Result<Outcome, CliError> {
    let (n, t, seed, replicas) = (p.get::<usize>("N")?, p.real("t")?, p.get::<u64>("seed")?, p.get::<usize>("replicas")?);
    let disp = dispersion(p)?;
    let states = (0..replicas as u64)
        .into_par_iter()
        .map(|r| sample_psi(seed, r, n, t, disp))
        .collect::<Result<Vec<_>, CoreError>>()?;
    let mut modes = Table::new(&["replica", "n1", "n2", "re", "im"]);
    let mut origin = Vec::with_capacity(replicas);
    let mut values = Table::new(&["replica", "psi_origin"]);
    for (r, st) in states.iter().enumerate() {
        let lat = st.lattice();
        for (&k, c) in lat.indices().iter().zip(st.psi()) {
            modes.push(vec![r.to_string(), k[0].to_string(), k[1].to_string(), num(c.re), num(c.im)]);
        }
        let v = st.value_at([0.0, 0.0]);
        origin.push(v * v);
        values.push(vec![r.to_string(), num(v)]);
    }
    let var = MeanSe::of(&origin);
    let exact = sigma_with(n, t, disp)?;
    let mut summary_table = Table::new(&["quantity", "value"]);
    for (q, v) in [("sigma_exact", exact), ("sample_variance", var.mean), ("sample_variance_se", var.se)] {
        summary_table.push(vec![q.into(), num(v)]);
    }
    let mut out = Outcome {
        replicas,
        normals_drawn: replicas as u64 * half_modes(n) * NORMALS_PER_STEP as u64,
        summary: format!("variance at the origin {:.6} ± {:.6} (exact {exact:.6})\n", var.mean, var.se),
        ..Outcome::default()
    };
    out.table("psi_modes.csv", modes);
    out.table("psi_origin.csv", values);
    out.table("psi_summary.csv", summary_table);
    Ok(out)
}

/// Deterministic, well-spread point pairs on the torus.
pub fn point_pairs(count: usize) -> Vec<([f64; 2], [f64; 2])> {
    let frac = |x: f64| x - x.floor();
    let (a, b) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_2);
    (1..=count)
        .map(|i| {
            let i = i as f64;
            ([frac(i * a), frac(i * b)], [frac((i + 0.5) * b), frac((i + 0.5) * a)])
        })
        .collect()
}

fn wick(p: &Params) -> Result<Outcome, CliError> {
    let suites: Vec<String> = p.list("suite")?;
    let (t, seed, replicas) = (p.real("t")?, p.get::<u64>("seed")?, p.get::<usize>("replicas")?);
    let orders: Vec<usize> = radii(p, "orders")?;
    let ns = radii(p, "N")?;
    let mut out = Outcome { replicas, ..Outcome::default() };
    for suite in &suites {
        match suite.as_str() {
            "covariance" => {
                let pairs = point_pairs(p.get("point_pairs")?);
                let mut table = Table::new(&["N", "order", "x1", "x2", "y1", "y2", "mean", "se", "closed_form", "z"]);
                for &n in &ns {
                    for r in wick_covariance_suite(seed, replicas, n, t, &orders, &pairs)? {
                        table.push(vec![
                            n.to_string(),
                            r.order.to_string(),
                            num(r.x[0]),
                            num(r.x[1]),
                            num(r.y[0]),
                            num(r.y[1]),
                            num(r.empirical.mean),
                            num(r.empirical.se),
                            num(r.closed_form),
                            num(r.z),
                        ]);
                    }
                    out.normals_drawn += replicas as u64 * half_modes(n) * NORMALS_PER_STEP as u64;
                }
                let worst = table.rows.iter().map(|r| r[9].parse::<f64>().unwrap_or(f64::NAN).abs()).fold(0.0, f64::max);
                out.summary.push_str(&format!("covariance: max |z| = {worst:.3}\n"));
                out.table("wick_covariance.csv", table);
            }
            "hypercontractivity" => {
                let exps = p.reals("p")?;
                let mut table = Table::new(&["N", "order", "p", "lp", "lp_se", "l2", "bound", "excess_se"]);
                for &n in &ns {
                    for r in hypercontractivity_check(seed, replicas, n, t, [0.0, 0.0], &orders, &exps)? {
                        table.push(vec![
                            n.to_string(),
                            r.order.to_string(),
                            num(r.p),
                            num(r.lp.mean),
                            num(r.lp.se),
                            num(r.l2.mean),
                            num(r.bound),
                            num(r.excess_se),
                        ]);
                    }
                    out.normals_drawn += replicas as u64 * half_modes(n) * NORMALS_PER_STEP as u64;
                }
                out.table("hypercontractivity.csv", table);
            }
            "cauchy" => {
                let eps = p.real("eps")?;
                let pairs: Vec<(usize, usize)> = ns.iter().map(|&n| (n, 2 * n)).collect();
                let mut table = Table::new(&["order", "low", "high", "gap", "se", "winf", "winf_se", "exact", "grid"]);
                for &order in &orders {
                    for g in cauchy_gaps(seed, replicas, order, &pairs, eps, t)? {
                        table.push(vec![
                            g.order.to_string(),
                            g.low.to_string(),
                            g.high.to_string(),
                            num(g.gap.mean),
                            num(g.gap.se),
                            num(g.winf.mean),
                            num(g.winf.se),
                            num(g.exact),
                            g.grid.to_string(),
                        ]);
                    }
                }
                let top = ns.iter().max().copied().unwrap_or(0);
                out.normals_drawn += replicas as u64 * half_modes(2 * top) * NORMALS_PER_STEP as u64;
                out.table("cauchy.csv", table);
            }
            other => return Err(CliError::Config(format!("suite: unknown value '{other}'"))),
        }
    }
    Ok(out)
}

fn solve(p: &Params) -> Result<Outcome, CliError> {
    let (k, n, dt, horizon, seed) = (p.get::<usize>("k")?, p.get::<usize>("N")?, p.real("dt")?, p.real("T")?, p.get::<u64>("seed")?);
    let replicas: usize = p.get("replicas")?;
    let mut cfg = SolverConfig::new(k, n, dt, horizon);
    cfg.sign = sign(p)?;
    cfg.coupling = p.real("coupling")?;
    cfg.renormalized = p.flag("renormalized")?;
    cfg.noise = p.flag("noise")?;
    cfg.sample_every = p.get("sample_every")?;
    cfg.dispersion = dispersion(p)?;
    let data = p.get::<String>("data")?;
    let s = p.real("data_regularity")?;
    if data != "zero" && data != "random" {
        return Err(CliError::Config(format!("data: unknown value '{data}'")));
    }
    cfg.validate()?;
    let runs = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            if data == "random" {
                let lat = FrequencyLattice::new(n);
                let stream = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * r);
                c.initial = Some((random_initial_data(&lat, s, stream), random_initial_data(&lat, s - 1.0, stream + 1)));
            }
            let path = if c.noise {
                Some(sample_path(NoiseConfig { seed, radius: n, dt, horizon, replica: r })?)
            } else {
                None
            };
            Solver::new(c, path.as_ref())?.run()
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let mut traj = Table::new(&["replica", "t", "v_norm", "u_norm", "sigma", "energy", "max_u"]);
    let mut status = Table::new(&["replica", "blowup_time"]);
    let mut blowups = 0;
    for (r, run) in runs.iter().enumerate() {
        for s in &run.samples {
            traj.push(vec![r.to_string(), num(s.t), num(s.v_norm), num(s.u_norm), num(s.sigma), opt_num(s.energy), num(s.max_u)]);
        }
        blowups += run.blowup.is_some() as usize;
        status.push(vec![r.to_string(), opt_num(run.blowup)]);
    }
    let steps = cfg.steps() as u64;
    let mut out = Outcome {
        replicas,
        blowups,
        normals_drawn: if cfg.noise { replicas as u64 * steps * half_modes(n) * NORMALS_PER_STEP as u64 } else { 0 },
        summary: format!("{replicas} runs, {blowups} blowups\n"),
        ..Outcome::default()
    };
    out.table("trajectory.csv", traj);
    out.table("blowups.csv", status);
    Ok(out)
}

fn converge(p: &Params) -> Result<Outcome, CliError> {
    let (k, dt, horizon, seed) = (p.get::<usize>("k")?, p.real("dt")?, p.real("T")?, p.get::<u64>("seed")?);
    let (replicas, eps) = (p.get::<usize>("replicas")?, p.real("eps")?);
    let ns = radii(p, "N")?;
    let arms: Vec<bool> = match p.get::<String>("renormalized")?.as_str() {
        "true" => vec![true],
        "false" => vec![false],
        "both" => vec![true, false],
        other => return Err(CliError::Config(format!("renormalized: unknown value '{other}'"))),
    };
    let mut levels: Vec<usize> = ns.iter().flat_map(|&n| [n, 2 * n]).collect();
    levels.sort_unstable();
    levels.dedup();
    let top = levels.last().copied().unwrap_or(0);
    let mut base = SolverConfig::new(k, top, dt, horizon);
    base.sign = sign(p)?;
    base.coupling = p.real("coupling")?;
    base.validate()?;
    // (replica, arm) -> gap per pair, None after a blowup
    let rows = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let path = sample_path(NoiseConfig { seed, radius: top, dt, horizon, replica: r })?;
            arms.iter()
                .map(|&renormalized| {
                    let fields = levels
                        .iter()
                        .map(|&radius| {
                            let cfg = SolverConfig { radius, renormalized, ..base.clone() };
                            let mut solver = Solver::new(cfg, Some(&path))?;
                            match solver.run_to(horizon) {
                                Ok(st) => Ok(Some(st.u_field(solver.lattice()))),
                                Err(CoreError::Blowup { .. }) => Ok(None),
                                Err(e) => Err(e),
                            }
                        })
                        .collect::<Result<Vec<_>, CoreError>>()?;
                    let at = |n: usize| &fields[levels.iter().position(|&l| l == n).expect("level present")];
                    Ok(ns
                        .iter()
                        .map(|&n| match (at(n), at(2 * n)) {
                            (Some(a), Some(b)) => Some(h_norm(&b.difference(a), -eps)),
                            _ => None,
                        })
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>, CoreError>>()
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let mut gaps = Table::new(&["replica", "renormalized", "low", "high", "gap"]);
    let mut summary = Table::new(&["renormalized", "low", "high", "median", "count"]);
    let mut blowups = 0;
    let mut text = String::new();
    for (a, &renormalized) in arms.iter().enumerate() {
        for (i, &n) in ns.iter().enumerate() {
            let values: Vec<f64> = rows.iter().filter_map(|row| row[a][i]).collect();
            let m = median(&values);
            summary.push(vec![renormalized.to_string(), n.to_string(), (2 * n).to_string(), num(m), values.len().to_string()]);
            text.push_str(&format!("renormalized={renormalized} N={n}: median gap {m:.6e} over {} replicas\n", values.len()));
        }
    }
    for (r, row) in rows.iter().enumerate() {
        let mut blew = false;
        for (a, &renormalized) in arms.iter().enumerate() {
            for (i, &n) in ns.iter().enumerate() {
                blew |= row[a][i].is_none();
                gaps.push(vec![r.to_string(), renormalized.to_string(), n.to_string(), (2 * n).to_string(), opt_num(row[a][i])]);
            }
        }
        blowups += blew as usize;
    }
    let steps = (horizon / dt - 1e-9).ceil() as u64;
    let mut out = Outcome {
        replicas,
        blowups,
        normals_drawn: replicas as u64 * steps * half_modes(top) * NORMALS_PER_STEP as u64,
        summary: text,
        ..Outcome::default()
    };
    out.table("gaps.csv", gaps);
    out.table("converge_summary.csv", summary);
    Ok(out)
}

fn pairs(p: &Params) -> Result<Outcome, CliError> {
    let ks = p.integers("k")?;
    let mut crit = Table::new(&["k", "s_crit", "s_crit_value"]);
    let mut text = String::from("k,s_crit\n");
    for &k in &ks {
        let s = s_crit_int(k as u32)?;
        crit.push(vec![k.to_string(), s.to_string(), num(to_f64(&s))]);
        text.push_str(&format!("{k},{s}\n"));
    }
    let mut out = Outcome { summary: text, ..Outcome::default() };
    out.table("s_crit.csv", crit);
    let s_values = p.list::<String>("s")?;
    if s_values != ["none"] {
        let mut table = Table::new(&["k", "s", "q", "r", "qd", "rd", "q_ratio", "r_ratio", "time_exponent", "status"]);
        for &k in &ks {
            for item in &s_values {
                let s = crate::config::parse_real("s", item)?;
                match choose_pair_f64(k as u32, s) {
                    Ok(choice) => {
                        let pr = &choice.pair;
                        let inf = || "inf".to_string();
                        table.push(vec![
                            k.to_string(),
                            pr.s.to_string(),
                            pr.q().map_or_else(inf, |q| q.to_string()),
                            pr.r.to_string(),
                            pr.qd().to_string(),
                            pr.rd.to_string(),
                            pr.q_ratio().map_or_else(inf, |q| q.to_string()),
                            pr.r_ratio().to_string(),
                            choice.time_exponent.to_string(),
                            "ok".into(),
                        ]);
                    }
                    Err(CoreError::Infeasible(_)) => {
                        let blank = String::new;
                        let mut row = vec![k.to_string(), num(s)];
                        row.extend((0..7).map(|_| blank()));
                        row.push("infeasible".into());
                        table.push(row);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        out.table("pairs.csv", table);
    }
    let points: usize = p.get("figure_points")?;
    if points > 0 {
        let mut fig = Table::new(&["k", "s_crit"]);
        for (k, s) in figure_data(points) {
            fig.push(vec![num(k), num(s)]);
        }
        out.table("figure.csv", fig);
    }
    Ok(out)
}

fn universality(p: &Params) -> Result<Outcome, CliError> {
    let spec = NonlinearitySpec::by_name(&p.get::<String>("f")?)?;
    let cfg = LimitComparison {
        eps: p.reals("eps")?,
        seed: p.get("seed")?,
        replicas: p.get("replicas")?,
        regularity: p.real("regularity")?,
        horizon: p.real("T")?,
        dt: p.real("dt")?,
        reference_radius: p.get("N_ref")?,
    };
    let table = compare_to_limit(&spec, &cfg)?;
    let mut rows = Table::new(&["replica", "eps", "distance"]);
    for r in &table.rows {
        rows.push(vec![r.replica.to_string(), num(r.eps), opt_num(r.distance)]);
    }
    let mut summary = Table::new(&["eps", "radius", "median", "count"]);
    let mut text = String::new();
    for &(eps, m) in &table.medians {
        let count = table.rows.iter().filter(|r| r.eps == eps && r.distance.is_some()).count();
        let radius = scaled_radius(eps)?;
        summary.push(vec![num(eps), radius.to_string(), num(m), count.to_string()]);
        text.push_str(&format!("eps={eps}: median distance {m:.6e} ({count} replicas)\n"));
    }
    let top = cfg.eps.iter().map(|&e| scaled_radius(e)).collect::<Result<Vec<_>, _>>()?.into_iter().chain([cfg.reference_radius]).max().unwrap_or(0);
    let steps = (cfg.horizon / cfg.dt - 1e-9).ceil() as u64;
    let mut blowups = 0;
    for r in 0..cfg.replicas as u64 {
        blowups += table.rows.iter().any(|row| row.replica == r && row.distance.is_none()) as usize;
    }
    let mut out = Outcome {
        replicas: cfg.replicas,
        blowups,
        normals_drawn: cfg.replicas as u64 * steps * half_modes(top) * NORMALS_PER_STEP as u64,
        summary: text,
        ..Outcome::default()
    };
    out.table("universality.csv", rows);
    out.table("universality_summary.csv", summary);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    fn params(exp: &str, text: &str) -> Params {
        let cfg = Config::parse(text).unwrap();
        Params::resolve(cfg.section("").unwrap(), lookup(exp).unwrap().schema).unwrap()
    }

    #[test]
    fn sigma_zero_mode() {
        let out = sigma(&params("sigma", "N = 0\nt = 1\n")).unwrap();
        let t = &out.tables[0].1;
        assert!((t.rows[0][2].parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pairs_table() {
        let out = pairs(&params("pairs", "k = 2..5\ns = 5/12\n")).unwrap();
        let crit: Vec<String> = out.tables[0].1.rows.iter().map(|r| r[1].clone()).collect();
        assert_eq!(crit, ["0", "1/4", "5/12", "1/2"]);
        let pr = &out.tables[1].1;
        let row = pr.rows.iter().find(|r| r[0] == "4").unwrap();
        assert_eq!(&row[2..8], ["36/5", "9/2", "36/29", "9/8", "29/5", "4"]);
        let row3 = pr.rows.iter().find(|r| r[0] == "3").unwrap();
        assert_eq!(row3[9], "ok");
    }

    #[test]
    fn point_pairs_are_distinct_and_inside_the_torus() {
        let pts = point_pairs(5);
        assert_eq!(pts.len(), 5);
        for (x, y) in &pts {
            assert!(x.iter().chain(y).all(|c| (0.0..1.0).contains(c)));
            assert_ne!(x, y);
        }
    }

    #[test]
    fn unknown_choices_are_config_errors() {
        let p = params("solve", "k = 3\nN = 4\ndt = 1/16\nT = 1/8\nseed = 1\nsign = sideways\n");
        assert!(matches!(solve(&p), Err(CliError::Config(_))));
    }

    #[test]
    fn focusing_blowup_dominates() {
        let p = params(
            "solve",
            "k = 3\nN = 2\ndt = 1/64\nT = 4\nseed = 1\nsign = focusing\ncoupling = 50\nnoise = false\ndata = random\ndata_regularity = -1\n",
        );
        let out = solve(&p).unwrap();
        assert_eq!(out.blowups, 1);
        assert!(out.blowup_dominated());
    }
}
