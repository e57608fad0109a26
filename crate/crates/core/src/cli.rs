//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or check failure, 2 runtime failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{normalized_string, parse_config, ExperimentConfig, ParseError};
use crate::error::Error;
use crate::integrators::{simulate_trajectory, solve_qme, Measurement, Scheme, SimConfig};
use crate::linalg::fro_dist;
use crate::verify::{checkpoint_steps, closed_system_oracle, crosscheck_paths, ensemble_average, reduced_identity_defect};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const CROSSCHECK_TOL: f64 = 1e-10;
const REDUCED_IDENTITY_TOL: f64 = 1e-12;
const CLOSED_ORACLE_TOL: f64 = 1e-8;
const ENSEMBLE_BAND: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(name = "markov-embed", version, about = "Coupled block master equations for Markovian embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (defaults to run.output, then the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides sim.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress the report on stdout.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a configuration.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the explicit-form configuration to normalized.json.
        #[arg(long)]
        emit_normalized: bool,
    },
    /// Solve the coupled master equation (RK4) and write qme.csv.
    Qme {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Simulate one measured trajectory and write sme_record.csv and sme_observables.csv.
    Sme {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Average run.trajectories trajectories against the master equation.
    Ensemble {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the joint/block cross-check, the reduced-state identity and, for
    /// closed models, the exact propagator comparison.
    Crosscheck {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Validate { common, .. }
            | Command::Qme { common }
            | Command::Sme { common }
            | Command::Ensemble { common }
            | Command::Crosscheck { common } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Qme { .. } => "qme",
            Command::Sme { .. } => "sme",
            Command::Ensemble { .. } => "ensemble",
            Command::Crosscheck { .. } => "crosscheck",
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_RUNTIME
            } else {
                EXIT_OK
            }
        }
    }
}

enum Failure {
    Check(String),
    Runtime(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(format!("csv: {e}"))
    }
}

fn lib(op: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{op}: {e}"))
}

pub fn run(cli: &Cli) -> i32 {
    let common = cli.command.common();
    let mut cfg = match parse_config(&common.config) {
        Ok(cfg) => cfg,
        Err(e @ ParseError::Io { .. }) => {
            eprintln!("error: parse_config: {e}");
            return EXIT_RUNTIME;
        }
        Err(e) => {
            eprintln!("error: parse_config: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    if let Some(seed) = common.seed {
        cfg.sim.seed = seed;
    }
    let out = common.out.clone().or_else(|| cfg.run.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    let result = fs::create_dir_all(&out).map_err(Failure::from).and_then(|_| match &cli.command {
        Command::Validate { emit_normalized, .. } => validate(&cfg, &out, *emit_normalized),
        Command::Qme { .. } => qme(&cfg, &out),
        Command::Sme { .. } => sme(&cfg, &out),
        Command::Ensemble { .. } => ensemble(&cfg, &out),
        Command::Crosscheck { .. } => crosscheck(&cfg, &out),
    });
    let (report, code) = match result {
        Ok(report) => (report, EXIT_OK),
        Err(Failure::Check(report)) => (report, EXIT_CHECK_FAILED),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {}: {msg}", cli.command.name());
            return EXIT_RUNTIME;
        }
    };
    if !common.quiet {
        print!("{report}");
    }
    code
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn validate(cfg: &ExperimentConfig, out: &Path, emit: bool) -> Result<String, Failure> {
    let m = &cfg.model;
    let mut r = String::new();
    let _ = writeln!(r, "config valid");
    let _ = writeln!(r, "dims: principal {} aux {:?} (joint dimension {})", m.dims.principal, m.dims.aux, m.dims.total());
    let _ = writeln!(r, "probe: {}", if m.probe.is_some() { "present" } else { "absent" });
    for (l, b) in m.baths.iter().enumerate() {
        let _ = writeln!(r, "bath {l}: {} principal-aux couplings, {} aux-only couplings", b.l1.len(), b.l2.len());
    }
    let _ = writeln!(r, "steps: {} of dt = {}", cfg.sim.n_steps(), num(cfg.sim.dt));
    if emit {
        let path = out.join("normalized.json");
        fs::write(&path, normalized_string(cfg))?;
        let _ = writeln!(r, "wrote {}", path.display());
    }
    Ok(r)
}

fn observable_header(cfg: &ExperimentConfig) -> Vec<String> {
    std::iter::once("t".to_string()).chain(cfg.run.observables.iter().map(|o| o.name.clone())).collect()
}

fn qme(cfg: &ExperimentConfig, out: &Path) -> Result<String, Failure> {
    let series = solve_qme(&cfg.model, &cfg.initial_state().to_blocks(), &cfg.sim).map_err(lib("solve_qme"))?;
    let path = out.join("qme.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(observable_header(cfg))?;
    for s in &series {
        let row = std::iter::once(num(s.t)).chain(cfg.run.observables.iter().map(|o| num(o.expect(&s.reduced))));
        w.write_record(row)?;
    }
    w.flush()?;
    let last = series.last().expect("initial sample");
    let drift = (last.blocks.total_trace().re - 1.0).abs();
    Ok(format!("wrote {} ({} rows)\nfinal trace drift: {:e}\n", path.display(), series.len(), drift))
}

fn sme(cfg: &ExperimentConfig, out: &Path) -> Result<String, Failure> {
    let rec = simulate_trajectory(&cfg.model, &cfg.initial_state(), &cfg.sim, cfg.representation)
        .map_err(lib("simulate_trajectory"))?;
    let record_path = out.join("sme_record.csv");
    let mut w = csv::Writer::from_path(&record_path)?;
    w.write_record(["t", "dY", "dI", "mval"])?;
    for n in 0..rec.dy.len() {
        w.write_record([num(rec.times[n]), num(rec.dy[n]), num(rec.di[n]), num(rec.mvals[n])])?;
    }
    w.flush()?;
    let obs_path = out.join("sme_observables.csv");
    let mut w = csv::Writer::from_path(&obs_path)?;
    w.write_record(observable_header(cfg))?;
    for s in &rec.snapshots {
        let rho = s.state.reduced();
        w.write_record(std::iter::once(num(s.t)).chain(cfg.run.observables.iter().map(|o| num(o.expect(&rho)))))?;
    }
    w.flush()?;
    Ok(format!(
        "wrote {} ({} steps) and {} ({} snapshots)\n",
        record_path.display(),
        rec.dy.len(),
        obs_path.display(),
        rec.snapshots.len()
    ))
}

fn ensemble(cfg: &ExperimentConfig, out: &Path) -> Result<String, Failure> {
    let sim = SimConfig { scheme: Scheme::EulerMaruyama, ..cfg.sim.clone() };
    if sim.measurement == Measurement::None {
        return Err(Failure::Runtime("ensemble_average: sim.measurement must be amplitude or phase".into()));
    }
    let s = ensemble_average(&cfg.model, &cfg.initial_state(), &sim, cfg.run.trajectories, &cfg.run.observables)
        .map_err(lib("ensemble_average"))?;
    let path = out.join("ensemble.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["t".to_string()];
    for name in &s.observables {
        header.extend([format!("{name}_mean"), format!("{name}_stderr"), format!("{name}_qme")]);
    }
    w.write_record(&header)?;
    for (c, t) in s.checkpoints.iter().enumerate() {
        let mut row = vec![num(*t)];
        for o in 0..s.observables.len() {
            row.extend([num(s.mean_obs[c][o]), num(s.stderr_obs[c][o]), num(s.qme_obs[c][o])]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    let means_ok = s.means_within(ENSEMBLE_BAND);
    let innov_ok = s.innovation_within(ENSEMBLE_BAND);
    let mut r = String::new();
    let _ = writeln!(r, "trajectories: {}", s.n);
    let _ = writeln!(r, "max |mean - qme| / stderr: {}", num(s.max_z_score()));
    let _ = writeln!(r, "terminal innovation mean: {} variance: {}", num(s.innovation_mean), num(s.innovation_var));
    let _ = writeln!(r, "{} observable means within {ENSEMBLE_BAND} stderr of the master equation", verdict(means_ok));
    let _ = writeln!(
        r,
        "{} innovation mean within {ENSEMBLE_BAND} sqrt(t_end/N) = {}",
        verdict(innov_ok),
        num(ENSEMBLE_BAND * (s.t_end / s.n as f64).sqrt())
    );
    fs::write(out.join("ensemble_summary.txt"), &r)?;
    let _ = writeln!(r, "wrote {}", path.display());
    if means_ok && innov_ok {
        Ok(r)
    } else {
        Err(Failure::Check(r))
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn crosscheck(cfg: &ExperimentConfig, out: &Path) -> Result<String, Failure> {
    let mut r = String::new();
    let mut all = true;

    let dev = crosscheck_paths(&cfg.model, &cfg.initial, &cfg.sim).map_err(lib("crosscheck_paths"))?;
    let ok = dev <= CROSSCHECK_TOL;
    all &= ok;
    let _ = writeln!(r, "{} crosscheck_paths: max deviation {:e} (tolerance {CROSSCHECK_TOL:e})", verdict(ok), dev);

    let defect = reduced_identity_defect(&cfg.initial).map_err(lib("reduced_identity"))?;
    let ok = defect <= REDUCED_IDENTITY_TOL;
    all &= ok;
    let _ = writeln!(r, "{} reduced-state identity: defect {:e} (tolerance {REDUCED_IDENTITY_TOL:e})", verdict(ok), defect);

    if cfg.model.is_closed() {
        let qme_cfg = SimConfig { snapshot_stride: 1, ..cfg.sim.clone() };
        let series = solve_qme(&cfg.model, &cfg.initial_state().to_blocks(), &qme_cfg).map_err(lib("solve_qme"))?;
        let steps = checkpoint_steps(qme_cfg.n_steps());
        let times: Vec<f64> = steps.iter().map(|&s| qme_cfg.time(s)).collect();
        let oracle = closed_system_oracle(&cfg.model, &cfg.initial, &times).map_err(lib("closed_system_oracle"))?;
        let mut worst = 0.0_f64;
        for (&s, o) in steps.iter().zip(&oracle) {
            worst = worst.max(fro_dist(&series[s].reduced, o).map_err(lib("fro_dist"))?);
        }
        let ok = worst <= CLOSED_ORACLE_TOL;
        all &= ok;
        let _ = writeln!(r, "{} closed-system oracle: max deviation {:e} (tolerance {CLOSED_ORACLE_TOL:e})", verdict(ok), worst);
    } else {
        let _ = writeln!(r, "SKIP closed-system oracle: model has field couplings");
    }

    fs::write(out.join("crosscheck_report.txt"), &r)?;
    if all {
        Ok(r)
    } else {
        Err(Failure::Check(r))
    }
}
