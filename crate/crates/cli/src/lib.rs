//! Command-line harness: configuration, experiment orchestration and
//! self-describing run directories.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod report;
pub mod table;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, Params, Section};
pub use crate::error::CliError;
use crate::experiments::{lookup, Outcome, EXPERIMENTS};
use crate::manifest::{sha256_hex, OutputFile, RngAccounting, RunManifest, CONFIG_FILE};

/// Environment variable naming the default parent directory of run outputs.
pub const ENV_OUT: &str = "SNLW_OUT";
/// Environment variable giving the default worker count.
pub const ENV_WORKERS: &str = "SNLW_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "snlw", version, about = "Stochastic nonlinear wave experiments on the 2-torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Renormalization constants σ_N(t)
    Sigma(RunArgs),
    /// Realizations of the truncated stochastic convolution
    SamplePsi(RunArgs),
    /// Wick covariance, Cauchy and hypercontractivity suites
    Wick(RunArgs),
    /// Trajectories of the renormalized equation
    Solve(RunArgs),
    /// Refinement gaps between radii N and 2N on shared noise
    Converge(RunArgs),
    /// Critical regularity and Strichartz pair tables
    Pairs(RunArgs),
    /// Scaled microscopic models against the Wick-cubic limit
    Universality(RunArgs),
    /// Re-executes a run from its manifest and compares outputs byte for byte
    Rerun(RerunArgs),
    /// Summarizes a completed run directory
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Configuration file (`key = value`, `[section]`, comma lists)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Worker threads; scheduling only, results do not depend on it
    #[arg(long)]
    pub workers: Option<usize>,
    /// Run directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parameter overrides as `--key value` pairs, e.g. `--N 8,16 --t 1`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// Directory of the original run
    pub dir: PathBuf,
    /// Directory for the re-executed outputs (default: `<dir>-rerun`)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: as recorded)
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    pub dir: PathBuf,
}

impl RunArgs {
    /// Moves harness flags that appeared among the trailing parameters
    /// (`--out`, `--workers`, `--config`) back into their fields.
    pub fn normalized(&self) -> Result<RunArgs, CliError> {
        let mut args = RunArgs { params: Vec::new(), ..self.clone() };
        for (k, v) in parse_overrides(&self.params)? {
            match k.as_str() {
                "out" => args.out = Some(PathBuf::from(v)),
                "config" => args.config = Some(PathBuf::from(v)),
                "workers" => {
                    args.workers = Some(v.parse().map_err(|_| CliError::Config(format!("workers: cannot parse '{v}'")))?)
                }
                _ => args.params.extend([format!("--{k}"), v]),
            }
        }
        Ok(args)
    }
}

impl Command {
    fn experiment(&self) -> Option<(&'static str, &RunArgs)> {
        Some(match self {
            Command::Sigma(a) => ("sigma", a),
            Command::SamplePsi(a) => ("sample-psi", a),
            Command::Wick(a) => ("wick", a),
            Command::Solve(a) => ("solve", a),
            Command::Converge(a) => ("converge", a),
            Command::Pairs(a) => ("pairs", a),
            Command::Universality(a) => ("universality", a),
            Command::Rerun(_) | Command::Report(_) => return None,
        })
    }
}

/// Result of a finished command.
#[derive(Debug)]
pub struct Completed {
    pub dir: PathBuf,
    pub summary: String,
}

/// Parses trailing `--key value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| CliError::Config(format!("expected '--key', got '{flag}'")))?;
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
            continue;
        }
        let value = it.next().ok_or_else(|| CliError::Config(format!("'--{key}' needs a value")))?;
        out.push((key.to_string(), value.clone()));
    }
    Ok(out)
}

/// Merges the root section and the experiment's own section of `config`;
/// sections of other experiments are ignored, unknown sections rejected.
pub fn experiment_section(config: &Config, experiment: &str) -> Result<Section, CliError> {
    let mut merged = Section::new();
    for (name, section) in &config.sections {
        if name.is_empty() || name == experiment {
            for (k, v) in section {
                if merged.insert(k.clone(), v.clone()).is_some() {
                    return Err(CliError::Config(format!("'{k}' is set both globally and in [{experiment}]")));
                }
            }
        } else if lookup(name).is_none() {
            return Err(CliError::Config(format!("unknown section [{name}]")));
        }
    }
    Ok(merged)
}

fn default_workers() -> usize {
    std::env::var(ENV_WORKERS)
        .ok()
        .and_then(|w| w.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn default_out(experiment: &str) -> PathBuf {
    let root = std::env::var_os(ENV_OUT).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
    root.join(experiment)
}

/// Resolves the configuration of `experiment` from a config file, flags and overrides.
pub fn resolve(experiment: &str, args: &RunArgs) -> Result<(Config, Params), CliError> {
    let exp = lookup(experiment).ok_or_else(|| CliError::Config(format!("unknown experiment '{experiment}'")))?;
    let mut config = match &args.config {
        Some(path) => Config::parse(&fs::read_to_string(path).map_err(CliError::io(path))?)?,
        None => Config::default(),
    };
    let mut overrides = parse_overrides(&args.params)?;
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(r) = args.replicas {
        overrides.push(("replicas".into(), r.to_string()));
    }
    let mut section = experiment_section(&config, experiment)?;
    for (k, v) in overrides {
        let mut tmp = Config::default();
        tmp.set("", &k, &v)?;
        let value = tmp.sections[""][&k].clone();
        section.insert(k, value);
    }
    let params = Params::resolve(&section, exp.schema)?;
    config.sections.clear();
    config.sections.insert(experiment.to_string(), params.section().clone());
    Ok((config, params))
}

/// Runs an experiment with fully resolved parameters and writes its run directory.
pub fn execute(experiment: &str, config: &Config, params: &Params, workers: usize, dir: &Path) -> Result<(RunManifest, Outcome), CliError> {
    let exp = lookup(experiment).ok_or_else(|| CliError::Config(format!("unknown experiment '{experiment}'")))?;
    if workers == 0 {
        return Err(CliError::Config("workers must be positive".into()));
    }
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let outcome = pool.install(|| (exp.run)(params))?;
    let config_text = config.serialize();
    let config_path = dir.join(CONFIG_FILE);
    fs::write(&config_path, &config_text).map_err(CliError::io(&config_path))?;
    let mut outputs = Vec::new();
    for (name, table) in &outcome.tables {
        let bytes = table.to_bytes()?;
        let path = dir.join(name);
        fs::write(&path, &bytes).map_err(CliError::io(&path))?;
        outputs.push(OutputFile { file: name.clone(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
    }
    let parameters: BTreeMap<String, String> = params.section().iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
    let manifest = RunManifest {
        experiment: experiment.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config_text,
        seed: params.get("seed").ok(),
        replicas: params.get("replicas").ok(),
        parameters,
        workers,
        outputs,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        rng: RngAccounting {
            generator: "chacha8".into(),
            normals_per_step: snlw_core::noise::NORMALS_PER_STEP,
            normals_drawn: outcome.normals_drawn,
        },
        blowups: outcome.blowups,
        complete: true,
    };
    manifest.write(dir)?;
    Ok((manifest, outcome))
}

/// Re-executes the run in `dir` into `out` and compares every output digest.
pub fn rerun(dir: &Path, out: &Path, workers: Option<usize>) -> Result<Vec<(String, bool)>, CliError> {
    let manifest = RunManifest::read(dir)?;
    manifest.verify(dir)?;
    let config = Config::parse(&manifest.config)?;
    let section = config
        .section(&manifest.experiment)
        .ok_or_else(|| CliError::Incomplete(format!("manifest config lacks [{}]", manifest.experiment)))?;
    let exp = lookup(&manifest.experiment).ok_or_else(|| CliError::Config(format!("unknown experiment '{}'", manifest.experiment)))?;
    let params = Params::resolve(section, exp.schema)?;
    let (fresh, _) = execute(&manifest.experiment, &config, &params, workers.unwrap_or(manifest.workers), out)?;
    Ok(manifest
        .outputs
        .iter()
        .map(|o| (o.file.clone(), fresh.outputs.iter().any(|f| f.file == o.file && f.sha256 == o.sha256)))
        .collect())
}

/// Entry point shared by the binary and tests.
pub fn run(cli: &Cli) -> Result<Completed, CliError> {
    if let Some((name, args)) = cli.command.experiment() {
        let args = &args.normalized()?;
        let (config, params) = resolve(name, args)?;
        let dir = args.out.clone().unwrap_or_else(|| default_out(name));
        let workers = args.workers.unwrap_or_else(default_workers);
        let (_, outcome) = execute(name, &config, &params, workers, &dir)?;
        if outcome.blowup_dominated() {
            return Err(CliError::BlowupDominated { blowups: outcome.blowups, replicas: outcome.replicas });
        }
        return Ok(Completed { dir, summary: outcome.summary });
    }
    match &cli.command {
        Command::Rerun(a) => {
            let out = a.out.clone().unwrap_or_else(|| {
                let mut s = a.dir.clone().into_os_string();
                s.push("-rerun");
                PathBuf::from(s)
            });
            let checks = rerun(&a.dir, &out, a.workers)?;
            let mut summary = String::new();
            for (file, same) in &checks {
                summary.push_str(&format!("{file}: {}\n", if *same { "identical" } else { "differs" }));
            }
            if let Some((file, _)) = checks.iter().find(|c| !c.1) {
                return Err(CliError::Mismatch(file.clone()));
            }
            Ok(Completed { dir: out, summary })
        }
        Command::Report(a) => {
            let summary = report::write_report(&a.dir)?;
            Ok(Completed { dir: a.dir.clone(), summary })
        }
        _ => unreachable!("experiment commands are handled above"),
    }
}

/// Names and one-line descriptions of all experiments.
pub fn experiment_list() -> Vec<(&'static str, &'static str)> {
    EXPERIMENTS.iter().map(|e| (e.name, e.about)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(params: &[&str]) -> RunArgs {
        RunArgs { params: params.iter().map(|s| s.to_string()).collect(), ..RunArgs::default() }
    }

    #[test]
    fn overrides_accept_both_forms() {
        let o = parse_overrides(&["--N".into(), "3".into(), "--t=1".into()]).unwrap();
        assert_eq!(o, vec![("N".into(), "3".into()), ("t".into(), "1".into())]);
        assert!(parse_overrides(&["N".into()]).is_err());
        assert!(parse_overrides(&["--N".into()]).is_err());
    }

    #[test]
    fn physics_parameters_have_no_defaults() {
        let err = resolve("solve", &args(&["--k", "3", "--N", "4", "--dt", "0.1", "--T", "1"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("seed"));
        let err = resolve("sigma", &args(&["--N", "3", "--t", "1", "--bogus", "1"])).unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn clap_accepts_trailing_parameters() {
        let cli = Cli::try_parse_from(["snlw", "sigma", "--out", "x", "--N", "0", "--t", "1"]).unwrap();
        let (name, a) = cli.command.experiment().unwrap();
        assert_eq!(name, "sigma");
        assert_eq!(a.out.as_deref(), Some(Path::new("x")));
        assert_eq!(a.params, ["--N", "0", "--t", "1"]);
        let late = Cli::try_parse_from(["snlw", "sigma", "--N", "0", "--out", "y", "--workers=2"]).unwrap();
        let a = late.command.experiment().unwrap().1.normalized().unwrap();
        assert_eq!((a.out.as_deref(), a.workers), (Some(Path::new("y")), Some(2)));
        assert_eq!(a.params, ["--N", "0"]);
    }

    #[test]
    fn sections_merge_and_conflict() {
        let cfg = Config::parse("seed = 1\n[solve]\nN = 4\n[sigma]\nN = 2\n").unwrap();
        let s = experiment_section(&cfg, "solve").unwrap();
        assert_eq!(s.len(), 2);
        let bad = Config::parse("N = 1\n[sigma]\nN = 2\n").unwrap();
        assert!(experiment_section(&bad, "sigma").is_err());
        let unknown = Config::parse("[nope]\nN = 2\n").unwrap();
        assert!(experiment_section(&unknown, "sigma").is_err());
    }
}
