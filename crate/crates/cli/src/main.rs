//! `shrink`: runs the shrinkage experiments, tests and audits from a TOML config.
//!
//! Every run writes `<command>.csv`, `<command>.json`, `resolved_config.toml`
//! and `manifest.json` into the output directory. Exit status is 0 on
//! success, 1 for invalid input or IO failures and 2 for numerical failures.

mod commands;
mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use config::Config;
use shrinkage_core::error::ShrinkError;
use shrinkage_core::experiments::{MnRule, QRule, TauRule};
use shrinkage_core::report::write_report;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(ShrinkError),
}

impl From<ShrinkError> for CliError {
    fn from(e: ShrinkError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "shrink", version, about = "Global-local shrinkage experiments and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "shrink-out")]
    out: PathBuf,
    /// Root seed (overrides SHRINK_SEED and the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// Prior family: horseshoe, tpbn, neg, half-t, inverse-gamma, gdp
    #[arg(long)]
    family: Option<String>,
    /// Family parameter as key=value; repeatable
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated sample sizes
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    /// `sqrtlog` or `power:<alpha>`
    #[arg(long, value_parser = parse_tau_rule)]
    tau_rule: Option<TauRule>,
    /// Fixed number of signals
    #[arg(long, conflicts_with = "q_power")]
    q: Option<u64>,
    /// q = ceil(n^gamma)
    #[arg(long)]
    q_power: Option<f64>,
    #[arg(long)]
    magnitude: Option<f64>,
    /// `log-n` or `n`
    #[arg(long, value_parser = parse_mn)]
    mn: Option<MnRule>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    psi_sq: Option<f64>,
    /// Number of tests
    #[arg(long)]
    n: Option<u64>,
    /// Limit constant C for the asymptotic oracle columns
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean squared error of the posterior mean against the minimax rate
    EstimateRisk {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Total posterior variance against its rate forms
    Spread {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Posterior mass outside the contraction ball
    Contract {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Bayes risk of the induced rule over the oracle risk along a sparse sequence
    Abos {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        /// Use tpbn(a, 0.5) as the prior
        #[arg(long, conflicts_with = "family")]
        a: Option<f64>,
        /// tau = tau_scale * p^alpha
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
        #[arg(long)]
        tau_scale: Option<f64>,
    },
    /// Bayes oracle threshold and errors for one two-groups model
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Exact errors of the induced decision rule
    InducedTest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<f64>>,
    },
    /// Monte Carlo risk of the empirical Bayes induced rule
    EbTest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
        #[arg(long)]
        datasets: Option<usize>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
    },
    /// Checks the analytic envelopes against the posterior on random points
    BoundsAudit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<f64>>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Regularity diagnostics for a prior family
    FamilyCheck {
        #[command(flatten)]
        common: Common,
        /// Family name
        name: Option<String>,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_tau_rule(s: &str) -> Result<TauRule, String> {
    match s.split_once(':') {
        None if s == "sqrtlog" => Ok(TauRule::SqrtLog),
        Some(("power", a)) => a
            .parse()
            .map(|alpha| TauRule::Power { alpha })
            .map_err(|_| format!("`{a}` is not a number")),
        _ => Err(format!("expected `sqrtlog` or `power:<alpha>`, got `{s}`")),
    }
}

fn parse_mn(s: &str) -> Result<MnRule, String> {
    match s {
        "log-n" => Ok(MnRule::LogN),
        "n" => Ok(MnRule::N),
        _ => Err(format!("expected `log-n` or `n`, got `{s}`")),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl FamilyArgs {
    fn apply(self, cfg: &mut Config) {
        if let Some(name) = self.family {
            cfg.family.name = name;
            cfg.family.params.clear();
        }
        cfg.family.params.extend(self.params);
    }
}

impl SweepArgs {
    fn apply(self, cfg: &mut Config) {
        let s = &mut cfg.sweep;
        set(&mut s.n, self.n);
        set(&mut s.replications, self.replications);
        set(&mut s.posterior_draws, self.draws);
        set(&mut s.tau, self.tau_rule);
        set(&mut s.q, self.q.map(|q| QRule::Fixed { q }));
        set(&mut s.q, self.q_power.map(|gamma| QRule::Power { gamma }));
        if self.magnitude.is_some() {
            s.magnitude = self.magnitude;
        }
        set(&mut s.m_n, self.mn);
    }
}

impl ModelArgs {
    fn apply(self, cfg: &mut Config) {
        let m = &mut cfg.model;
        set(&mut m.p, self.p);
        set(&mut m.psi_sq, self.psi_sq);
        set(&mut m.n, self.n);
        if self.c.is_some() {
            m.c = self.c;
        }
    }
}

/// Loads the config and folds in the environment and flags.
fn resolve(command: Command) -> Result<(commands::Job, Common, Config), CliError> {
    use commands::Job;
    let (job, common, apply): (Job, Common, Box<dyn FnOnce(&mut Config)>) = match command {
        Command::EstimateRisk { common, family, sweep } => (
            Job::EstimateRisk,
            common,
            Box::new(move |c| {
                family.apply(c);
                sweep.apply(c)
            }),
        ),
        Command::Spread { common, family, sweep } => (
            Job::Spread,
            common,
            Box::new(move |c| {
                family.apply(c);
                sweep.apply(c)
            }),
        ),
        Command::Contract { common, family, sweep } => (
            Job::Contract,
            common,
            Box::new(move |c| {
                family.apply(c);
                sweep.apply(c)
            }),
        ),
        Command::Abos { common, family, a, alpha, c, beta, n, tau_scale } => (
            Job::Abos,
            common,
            Box::new(move |cfg| {
                family.apply(cfg);
                if let Some(a) = a {
                    cfg.family.name = "tpbn".into();
                    cfg.family.params = [("a_shape".to_string(), a), ("b_shape".to_string(), 0.5)].into();
                }
                let s = &mut cfg.abos;
                set(&mut s.alpha, alpha);
                set(&mut s.c, c);
                set(&mut s.beta, beta);
                set(&mut s.n, n);
                set(&mut s.tau_scale, tau_scale);
            }),
        ),
        Command::Oracle { common, model } => (Job::Oracle, common, Box::new(move |c| model.apply(c))),
        Command::InducedTest { common, family, model, tau } => (
            Job::InducedTest,
            common,
            Box::new(move |c| {
                family.apply(c);
                model.apply(c);
                set(&mut c.model.tau, tau);
            }),
        ),
        Command::EbTest { common, family, c, beta, n, datasets, c1, c2 } => (
            Job::EbTest,
            common,
            Box::new(move |cfg| {
                family.apply(cfg);
                let s = &mut cfg.eb;
                set(&mut s.c, c);
                set(&mut s.beta, beta);
                set(&mut s.n, n);
                set(&mut s.datasets, datasets);
                set(&mut s.c1, c1);
                set(&mut s.c2, c2);
            }),
        ),
        Command::BoundsAudit { common, family, eta, delta, slack, tau, points } => (
            Job::BoundsAudit,
            common,
            Box::new(move |cfg| {
                family.apply(cfg);
                let b = &mut cfg.bounds;
                set(&mut b.eta, eta);
                set(&mut b.delta, delta);
                set(&mut b.slack, slack);
                set(&mut b.tau, tau);
                set(&mut b.points, points);
            }),
        ),
        Command::FamilyCheck { common, name, params } => (
            Job::FamilyCheck,
            common,
            Box::new(move |cfg| {
                FamilyArgs { family: name, params }.apply(cfg);
            }),
        ),
    };
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_env()?;
    apply(&mut cfg);
    set(&mut cfg.run.root_seed, common.seed);
    if common.workers.is_some() {
        cfg.run.workers = common.workers;
    }
    Ok((job, common, cfg))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (job, common, cfg) = resolve(cli.command)?;
    let resolved = cfg.to_toml()?;
    let started = chrono::Utc::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.run.workers {
        if w == 0 {
            return Err(CliError::Input("workers must be at least 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    eprintln!("shrink {}: running", job.name());
    let (table, summary) = pool.install(|| commands::execute(job, &cfg))?;

    let out = &common.out;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Input(format!("cannot create output directory {}: {e}", out.display())))?;
    let (csv, json) = write_report(&table, summary, &out.join(job.name()))?;
    let config_path = out.join("resolved_config.toml");
    std::fs::write(&config_path, &resolved)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", config_path.display())))?;
    let manifest = manifest::RunManifest {
        command: job.name().to_string(),
        config_digest: manifest::digest(&resolved),
        root_seed: cfg.run.root_seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        outputs: [&csv, &json, &config_path]
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
    };
    let manifest_path = out.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, body + "\n")
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", manifest_path.display())))?;
    eprintln!("shrink {}: wrote {}", job.name(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
