use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tailored_cc::hamio::fixture::{list_fixtures, verify_fixture, HF_TOLERANCE};
use tailored_cc::pipeline::{self, parse_mode, ConfigFile, Method, Overrides, PipelineError, RunConfig, Solver};

type Driver = fn(&RunConfig) -> Result<u8, PipelineError>;

const EXIT_PARTIAL: u8 = 2;
const EXIT_FATAL: u8 = 1;

#[derive(Parser)]
#[command(
    name = "tcc",
    version,
    about = "Tailored coupled cluster from simulated quantum measurements"
)]
struct Cli {
    /// Log level filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One pipeline run on a single FCIDUMP.
    Run(Common),
    /// One run per FCIDUMP of a geometry series.
    Scan(Common),
    /// Repeated tomography over shot budgets.
    Stats(Common),
    /// Fixture maintenance.
    Fixtures {
        #[command(subcommand)]
        command: FixtureCommand,
    },
}

#[derive(Subcommand)]
enum FixtureCommand {
    /// Parse fixtures and compare recomputed HF energies with their sidecars.
    Verify {
        /// Fixture files or directories.
        #[arg(default_value = "fixtures")]
        paths: Vec<PathBuf>,
        /// Print one JSON record per fixture.
        #[arg(long)]
        json: bool,
    },
}

fn pair(s: &str) -> Result<(usize, usize), String> {
    let v: Vec<&str> = s.split(',').collect();
    match v.as_slice() {
        [a, b] => Ok((
            a.trim().parse().map_err(|e| format!("{a}: {e}"))?,
            b.trim().parse().map_err(|e| format!("{b}: {e}"))?,
        )),
        _ => Err(format!("expected N_ORB,N_ELEC, got '{s}'")),
    }
}

fn triple(s: &str) -> Result<(u64, u64, u64), String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|e| format!("{x}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match v.as_slice() {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => Err(format!("expected NSAMPLE,NU,NV, got '{s}'")),
    }
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// FCIDUMP input; repeat or comma-separate for scans.
    #[arg(long, value_delimiter = ',')]
    fcidump: Vec<PathBuf>,
    /// Active space as N_ORB,N_ELEC.
    #[arg(long, value_parser = pair)]
    active: Option<(usize, usize)>,
    #[arg(long, value_parser = |s: &str| s.parse::<Solver>())]
    solver: Option<Solver>,
    #[arg(long = "cbt-mode", value_parser = parse_mode)]
    cbt_mode: Option<tailored_cc::cbt::Mode>,
    /// Shot budget as NSAMPLE,NU,NV.
    #[arg(long, value_parser = triple)]
    shots: Option<(u64, u64, u64)>,
    /// Number of determinants kept after sampling.
    #[arg(long)]
    r: Option<usize>,
    /// Comma-separated methods: hf, casci, vqe, ccsd, ccsd_t, tcc, tcc_c, tcc_t_c.
    #[arg(long, value_delimiter = ',', value_parser = |s: &str| s.parse::<Method>())]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Repetitions per budget for `stats`.
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn resolve(self) -> Result<RunConfig, PipelineError> {
        let file = self.config.as_deref().map(ConfigFile::load).transpose()?;
        RunConfig::resolve(
            file,
            Overrides {
                fcidump: self.fcidump,
                active: self.active,
                solver: self.solver,
                cbt_mode: self.cbt_mode,
                shots: self.shots,
                r: self.r,
                methods: self.methods,
                seed: self.seed,
                repetitions: self.reps,
                threads: self.threads,
                out: self.out,
            },
        )
    }
}

fn single_input(cfg: &RunConfig) -> Result<&Path, PipelineError> {
    match cfg.fcidumps.as_slice() {
        [p] => Ok(p),
        [] => Err(PipelineError::new(
            pipeline::Stage::Config,
            "fcidump",
            "no FCIDUMP given".into(),
        )),
        _ => Err(PipelineError::new(
            pipeline::Stage::Config,
            "fcidump",
            "this command takes exactly one FCIDUMP; use `scan` for series".into(),
        )),
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn cmd_run(cfg: &RunConfig) -> Result<u8, PipelineError> {
    let path = single_input(cfg)?;
    let (prepared, tail) = pipeline::run_prepared(cfg, path)?;
    let report = prepared.report(tail.as_ref());
    let traces = if cfg.write_trace {
        prepared.traces(tail.as_ref())
    } else {
        Vec::new()
    };
    print_paths(&pipeline::write_report(&cfg.out, &report, &traces)?);
    Ok(0)
}

fn cmd_scan(cfg: &RunConfig) -> Result<u8, PipelineError> {
    let rows = pipeline::run_scan(cfg)?;
    print_paths(&pipeline::write_scan(&cfg.out, &rows, &cfg.methods)?);
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} geometries failed", rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn cmd_stats(cfg: &RunConfig) -> Result<u8, PipelineError> {
    let out = pipeline::run_statistics(cfg, single_input(cfg)?)?;
    print_paths(&pipeline::write_stats(&cfg.out, &out)?);
    let failed = out.n_failed();
    if failed > 0 {
        log::warn!("{failed} repetitions failed and were excluded");
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn cmd_verify(paths: &[PathBuf], json: bool) -> u8 {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            match list_fixtures(p) {
                Ok(list) => files.extend(list),
                Err(e) => {
                    eprintln!("{e}");
                    return EXIT_FATAL;
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        eprintln!("no fixtures found");
        return EXIT_FATAL;
    }
    let mut n_bad = 0;
    for f in &files {
        let check = verify_fixture(f);
        if !check.ok {
            n_bad += 1;
        }
        if json {
            println!("{}", serde_json::to_string(&check).expect("serializable"));
        } else {
            let detail = match (&check.error, check.deviation) {
                (Some(e), _) => e.clone(),
                (None, Some(d)) => format!("e_hf={:.10} |Δ|={d:.2e}", check.e_hf),
                (None, None) => format!("e_hf={:.10} (no sidecar)", check.e_hf),
            };
            println!("{} {} {detail}", if check.ok { "ok  " } else { "FAIL" }, check.path);
        }
    }
    if !json {
        println!(
            "{} fixtures, {n_bad} failed (tolerance {HF_TOLERANCE:e} Eh)",
            files.len()
        );
    }
    if n_bad > 0 {
        EXIT_FATAL
    } else {
        0
    }
}

fn fatal(err: &PipelineError, out: Option<&Path>) -> ExitCode {
    eprintln!("error: {err}");
    if let Some(dir) = out {
        if let Err(e) = pipeline::write_error(dir, err) {
            eprintln!("error: {e}");
        }
    }
    ExitCode::from(EXIT_FATAL)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    let (common, driver): (Common, Driver) = match cli.command {
        Command::Fixtures {
            command: FixtureCommand::Verify { paths, json },
        } => return ExitCode::from(cmd_verify(&paths, json)),
        Command::Run(c) => (c, cmd_run),
        Command::Scan(c) => (c, cmd_scan),
        Command::Stats(c) => (c, cmd_stats),
    };
    let out_hint = common.out.clone();
    let cfg = match common.resolve() {
        Ok(cfg) => cfg,
        Err(e) => return fatal(&e, out_hint.as_deref()),
    };
    match driver(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fatal(&e, Some(&cfg.out)),
    }
}
