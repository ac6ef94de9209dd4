use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spectrum_lease::config::Config;
use spectrum_lease::experiments::{run_experiment, RunOptions};
use spectrum_lease::output::{fmt_g12, write_csv, CsvMeta};
use spectrum_lease::validate::validate_market;
use spectrum_lease::{
    compute_beta_table, solve_homogeneous, solve_sweep, LeaseError, QuadratureConfig, RevenueModel, SolveResult,
};

#[derive(Parser)]
#[command(name = "spectrum-lease", version, about = "Optimal spectrum lease durations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the optimum.
    Solve(Common),
    /// Run the config's [experiment] sweep and write CSV rows.
    Experiment(Common),
    /// Cross-check analytic revenues against Monte-Carlo sampling.
    Validate(ValidateArgs),
    /// Dump the homogeneous order-statistic table for the configured market.
    BetaTable(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Finite cap substituted for unbounded maximum lease durations.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    mc_epochs: usize,
    #[arg(long, default_value_t = 64)]
    quad_nodes: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Test hook: scale sigma on the analytic side only.
    #[arg(long, hide = true, default_value_t = 1.0)]
    corrupt_sigma: f64,
}

enum Failure {
    Validation(String),
    Config(String),
    Runtime(String),
}

impl From<LeaseError> for Failure {
    fn from(e: LeaseError) -> Self {
        match e {
            LeaseError::InvalidParameter { .. }
            | LeaseError::MarketShape { .. }
            | LeaseError::UnboundedHorizon
            | LeaseError::NotHomogeneous(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(c) => cmd_solve(&c),
        Command::Experiment(c) => cmd_experiment(&c),
        Command::Validate(v) => cmd_validate(&v),
        Command::BetaTable(c) => cmd_beta_table(&c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn quad(c: &Common) -> QuadratureConfig {
    QuadratureConfig {
        nodes: c.quad_nodes,
        mc_samples: c.mc_epochs,
        ..QuadratureConfig::default()
    }
}

fn load(c: &Common) -> Result<(Config, QuadratureConfig), Failure> {
    let cfg = Config::load(&c.config)?;
    let q = quad(c);
    q.validate()?;
    Ok((cfg, q))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_solve(c: &Common) -> Result<(), Failure> {
    let (cfg, q) = load(c)?;
    let market = cfg.market()?;
    let horizon = c.horizon.or(cfg.market.horizon);
    let (res, method) = if market.is_homogeneous() && market.is_complete_info() {
        let beta = compute_beta_table(market.len(), market.channels(), &q)?;
        (
            solve_homogeneous(&market.true_params()[0], market.len(), &beta)?,
            "homogeneous",
        )
    } else {
        let model = RevenueModel::new(&market, q)?;
        (solve_sweep(&model, horizon)?, "sweep")
    };
    print_result(&res, method);
    if let Some(path) = &c.out {
        let header = [
            "method",
            "t_star",
            "u_perceived",
            "u_true",
            "entrants_perceived",
            "entrants_true",
            "eval_count",
        ];
        let row = vec![
            method.to_string(),
            res.t_star.to_string(),
            fmt_g12(res.u_perceived),
            fmt_g12(res.u_true),
            res.entrants_perceived.to_string(),
            res.entrants_true.to_string(),
            res.eval_count.to_string(),
        ];
        let meta = CsvMeta {
            kind: "solve".into(),
            seed: c.seed.unwrap_or(0),
            extra: vec![],
        };
        write_csv(sink(Some(path))?, &meta, &header, &[row])?;
    }
    Ok(())
}

fn print_result(res: &SolveResult, method: &str) {
    println!("method: {method}");
    println!("T*: {}", res.t_star);
    println!("U* perceived: {}", fmt_g12(res.u_perceived));
    println!("U* true: {}", fmt_g12(res.u_true));
    println!("entrants perceived: {}", res.entrants_perceived);
    println!("entrants true: {}", res.entrants_true);
    println!("revenue evaluations: {}", res.eval_count);
}

fn cmd_experiment(c: &Common) -> Result<(), Failure> {
    let (mut cfg, q) = load(c)?;
    let spec = cfg
        .experiment
        .as_mut()
        .ok_or_else(|| Failure::Config("config has no [experiment] section".into()))?;
    if let Some(seed) = c.seed {
        spec.seed = seed;
    }
    let seed = spec.seed;
    let opts = RunOptions {
        quad: q,
        horizon: c.horizon,
        mc_epochs: c.mc_epochs,
    };
    let out = run_experiment(&cfg, &opts)?;
    let meta = CsvMeta {
        kind: out.kind.name().into(),
        seed,
        extra: vec![(
            "parameter".into(),
            cfg.experiment.as_ref().map(|e| e.parameter.clone()).unwrap_or_default(),
        )],
    };
    write_csv(sink(c.out.as_deref())?, &meta, &out.header, &out.rows)?;
    Ok(())
}

fn cmd_validate(v: &ValidateArgs) -> Result<(), Failure> {
    let c = &v.common;
    let (cfg, q) = load(c)?;
    if c.mc_epochs < 1000 {
        return Err(Failure::Config("--mc-epochs must be >= 1000".into()));
    }
    let market = cfg.market()?;
    let seed = c.seed.unwrap_or(0);
    let report = validate_market(&market, &q, c.mc_epochs, seed, v.corrupt_sigma)?;
    let header = [
        "check", "operator", "t", "analytic", "sampled", "std_err", "z", "exact", "pass",
    ];
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|ch| {
            vec![
                ch.name.clone(),
                (ch.operator + 1).to_string(),
                ch.t.to_string(),
                fmt_g12(ch.analytic),
                fmt_g12(ch.sampled),
                fmt_g12(ch.std_err),
                fmt_g12(ch.z()),
                ch.exact.to_string(),
                ch.pass.to_string(),
            ]
        })
        .collect();
    let meta = CsvMeta {
        kind: "validate".into(),
        seed,
        extra: vec![("epochs".into(), c.mc_epochs.to_string())],
    };
    write_csv(sink(c.out.as_deref())?, &meta, &header, &rows)?;
    let failed = report.checks.iter().filter(|ch| !ch.pass).count();
    if failed > 0 {
        return Err(Failure::Validation(format!(
            "{failed} of {} checks outside tolerance",
            report.checks.len()
        )));
    }
    eprintln!("all {} checks passed", report.checks.len());
    Ok(())
}

fn cmd_beta_table(c: &Common) -> Result<(), Failure> {
    let (cfg, q) = load(c)?;
    let market = cfg.market()?;
    let table = compute_beta_table(market.len(), market.channels(), &q)?;
    let rows: Vec<Vec<String>> = (1..=table.n_max())
        .map(|s| {
            vec![
                s.to_string(),
                fmt_g12(table.beta(s).unwrap_or(f64::NAN)),
                fmt_g12(table.alpha(s).unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    let meta = CsvMeta {
        kind: "beta-table".into(),
        seed: c.seed.unwrap_or(0),
        extra: vec![
            ("channels".into(), table.channels().to_string()),
            ("hermite_nodes".into(), table.nodes_used().to_string()),
        ],
    };
    write_csv(sink(c.out.as_deref())?, &meta, &["s", "beta", "alpha"], &rows)?;
    Ok(())
}
