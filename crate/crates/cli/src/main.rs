use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use latfrac::energy::{energy, EnergyParams, Variant};
use latfrac::harness::{run_sweep, run_verify, write_csv, ExperimentConfig, Mode};
use latfrac::lattice::io::FieldFile;
use latfrac::reduce::{self, Reduction};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Lattice phase-field fracture energies: evaluation, minimization, ε-sweeps.
#[derive(Parser, Debug)]
#[command(name = "latfrac", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Experiment configuration (TOML, `version = 1`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Combine parallel partial sums in a fixed pairwise order.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the energy of a field pair and print the breakdown as JSON.
    Evaluate(EvaluateArgs),
    /// Run the staggered solver for every ε of the config.
    Minimize,
    /// Run the ε-sweep of the config and write the CSV table.
    Sweep,
    /// Run self-check suites and print a JSON report; exit 1 on failure.
    Verify(VerifyArgs),
    /// Write recovery field pairs for every ε of the config.
    Recovery,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Displacement field file.
    #[arg(long)]
    u: PathBuf,
    /// Phase field file.
    #[arg(long)]
    v: PathBuf,
    /// Boundary datum (Dirichlet variant; sampled from the config target when omitted).
    #[arg(long)]
    datum: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// plain, dirichlet or ni.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    max_norm: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suites to run (matrix1, split, freudenthal, profile, monotone); all by default.
    suites: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(global: &Global) -> Result<ExperimentConfig> {
    let path = global.config.as_ref().context("this subcommand needs --config <path>")?;
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    cfg.solver.deterministic = global.deterministic;
    Ok(cfg)
}

fn out_dir(global: &Global, cfg: &ExperimentConfig) -> Result<PathBuf> {
    global
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .context("no output directory: pass --out <dir> or set output.dir")
}

fn parse_variant(s: &str) -> Result<Variant> {
    Ok(match s {
        "plain" => Variant::Plain,
        "dirichlet" => Variant::Dirichlet,
        "ni" => Variant::Ni,
        other => bail!("unknown variant `{other}` (plain, dirichlet, ni)"),
    })
}

fn evaluate(global: &Global, args: &EvaluateArgs) -> Result<()> {
    let u_file = FieldFile::load(&args.u).with_context(|| format!("reading {}", args.u.display()))?;
    let v_file = FieldFile::load(&args.v).with_context(|| format!("reading {}", args.v.display()))?;
    let cfg = global.config.as_ref().map(|_| load_config(global)).transpose()?;
    let eps = args
        .eps
        .or_else(|| cfg.as_ref().map(|c| c.schedule.eps[0]))
        .context("evaluate needs --eps or a config")?;
    let (domain, mut params) = match &cfg {
        Some(cfg) => {
            let domain = cfg.domain(cfg.schedule.delta(eps)?)?;
            (domain, cfg.energy_params(eps)?)
        }
        None => (u_file.domain()?, EnergyParams::new(1.0, 1.0, eps)),
    };
    for (name, f) in [("u", &u_file), ("v", &v_file)] {
        if !f.matches(&domain) {
            bail!("{name} field does not match the lattice ({:?} nodes, δ = {})", domain.extents(), domain.spacing());
        }
    }
    if let Some(l) = args.lambda {
        params.lambda = l;
    }
    if let Some(t) = args.theta {
        params.theta = t;
    }
    if let Some(v) = &args.variant {
        params.variant = parse_variant(v)?;
    }
    if args.max_norm.is_some() {
        params.max_norm = args.max_norm;
    }
    let datum = match (&args.datum, &cfg) {
        (Some(p), _) => Some(FieldFile::load(p)?.into_vector()?),
        (None, Some(cfg)) => Some(cfg.datum(&domain)?),
        (None, None) => None,
    };
    let b = energy(&domain, &u_file.into_vector()?, &v_file.into_scalar()?, &params, datum.as_ref())?;
    let json = serde_json::to_string_pretty(&b)?;
    if let Some(dir) = &global.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("breakdown.json"), &json)?;
    }
    println!("{json}");
    Ok(())
}

fn sweep_with(global: &Global, mode: Option<Mode>, fields: bool) -> Result<()> {
    let mut cfg = load_config(global)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    cfg.output.fields |= fields;
    let dir = if fields { Some(out_dir(global, &cfg)?) } else { global.out.clone().or(cfg.output.dir.clone()) };
    let rows = run_sweep(&cfg, dir.as_deref())?;
    if dir.is_none() {
        write_csv(&rows, std::io::stdout().lock())?;
    } else {
        report_paths(dir.as_deref().unwrap(), &cfg);
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} rows failed", rows.len());
    }
    Ok(())
}

fn report_paths(dir: &Path, cfg: &ExperimentConfig) {
    eprintln!("wrote {}", dir.join(cfg.output.csv_name()).display());
}

fn verify(global: &Global, args: &VerifyArgs) -> Result<bool> {
    let cfg = global.config.as_ref().map(|_| load_config(global)).transpose()?;
    let suites = if args.suites.is_empty() {
        cfg.as_ref().map(|c| c.verify.suites.clone()).unwrap_or_default()
    } else {
        args.suites.clone()
    };
    let seed = args.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let report = run_verify(&suites, seed)?;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(dir) = &global.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verify.json"), &json)?;
    }
    println!("{json}");
    Ok(report.passed)
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    reduce::set_mode(if g.deterministic { Reduction::Deterministic } else { Reduction::Free });
    if let Some(n) = g.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Evaluate(args) => evaluate(g, args)?,
        Command::Minimize => sweep_with(g, Some(Mode::Minimize), true)?,
        Command::Sweep => sweep_with(g, None, false)?,
        Command::Recovery => sweep_with(g, Some(Mode::EvaluateRecovery), true)?,
        Command::Verify(args) => return verify(g, args),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
