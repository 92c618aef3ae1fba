use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsbm_core::experiment::{resolve_parameters, run_sweep, write_csv, RawConfig, SweepConfig};
use gsbm_core::{threshold_curve, GsbmError, Prob};

#[derive(Parser)]
#[command(name = "gsbm-lab", version, about = "Exact-recovery experiments on geometric block models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded trial per grid point and print the CSV.
    Trial(ModelArgs),
    /// Run a full sweep; grid flags take comma-separated lists.
    Sweep(ModelArgs),
    /// Print the critical intensity for (a, b, d).
    Threshold {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Print the derived algorithm constants for one point.
    Params(ModelArgs),
}

#[derive(Args, Default)]
struct ModelArgs {
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `theory`, `practical` or a number.
    #[arg(long)]
    chi: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// `two-phase`, `genie` or `phase1-only`.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record wall-clock columns (otherwise written as zero).
    #[arg(long)]
    timing: bool,
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<GsbmError> for Failure {
    fn from(e: GsbmError) -> Self {
        match e {
            GsbmError::Io(e) => Failure::Run(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl ModelArgs {
    fn into_config(self) -> Result<SweepConfig, Failure> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                RawConfig::parse(&text)?
            }
            None => RawConfig::default(),
        };
        let flags = [
            ("lambda", &self.lambda),
            ("n", &self.n),
            ("a", &self.a),
            ("b", &self.b),
            ("d", &self.d),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("chi", &self.chi),
            ("delta", &self.delta),
            ("estimator", &self.estimator),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v)?;
            }
        }
        if let Some(out) = &self.out {
            raw.set("out", &out.to_string_lossy())?;
        }
        if self.timing {
            raw.set("timing", "true")?;
        }
        Ok(raw.into_sweep()?)
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sweep(mut config: SweepConfig, single: bool) -> Result<(), Failure> {
    if single {
        config.trials = 1;
    }
    let grouped = run_sweep(&config)?;
    let out = output(config.out.as_ref())?;
    write_csv(&grouped, out).map_err(|e| Failure::Run(e.to_string()))
}

fn params(config: SweepConfig) -> Result<(), Failure> {
    let mut out = output(config.out.as_ref())?;
    for point in config.points()? {
        let p = &point.params;
        let dp = resolve_parameters(&point)?;
        let gamma = dp.gamma_prime.map_or_else(|| "none".to_string(), |g| g.to_string());
        let text = format!(
            "lambda = {}\nd = {}\na = {}\nb = {}\nregime = {}\nch_value = {}\nchi = {}\npractical_chi = {}\n\
             delta = {}\ndelta_fallback = {}\nm_budget = {}\neta = {}\nrho = {}\nkappa = {}\n\
             gamma_prime = {gamma}\nr_d = {}\nk_visible = {}\n\n",
            p.lambda,
            p.d,
            p.a,
            p.b,
            dp.regime.as_str(),
            dp.ch_value,
            dp.chi,
            dp.practical_chi,
            dp.delta,
            dp.delta_fallback,
            dp.m_budget,
            dp.eta,
            dp.rho,
            dp.kappa,
            dp.r_d,
            dp.k_visible,
        );
        out.write_all(text.as_bytes()).map_err(|e| Failure::Run(e.to_string()))?;
    }
    out.flush().map_err(|e| Failure::Run(e.to_string()))
}

fn threshold(a: &str, b: &str, d: usize) -> Result<(), Failure> {
    let a: Prob = a.parse()?;
    let b: Prob = b.parse()?;
    if d == 0 {
        return Err(Failure::Config("d must be at least 1".into()));
    }
    if a == b {
        return Err(Failure::Config("a and b must differ".into()));
    }
    let t = threshold_curve(a.value(), b.value(), d)?;
    println!("critical_lambda = {}", t.critical);
    println!("achievable_above = {}", t.achievable_above);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Trial(args) => args.into_config().and_then(|c| sweep(c, true)),
        Command::Sweep(args) => args.into_config().and_then(|c| sweep(c, false)),
        Command::Params(args) => args.into_config().and_then(params),
        Command::Threshold { a, b, d } => threshold(&a, &b, d),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("gsbm-lab: config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("gsbm-lab: {msg}");
            ExitCode::FAILURE
        }
    }
}
