//! `gmlab`: runs configured walk experiments and writes CSV tables plus a
//! re-runnable manifest.
//!
//! Exit codes: 0 success, 1 a check failed or the input is degenerate,
//! 2 invalid configuration, 3 a resource guard tripped.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gmlab::{catalog, Error, Exact, Mode};

use config::{mode_name, parse_config, Overrides};
use experiments::Outcome;
use output::RunInfo;

#[derive(Parser)]
#[command(name = "gmlab", version, about = "Random walks driven by Gibbs-Markov cocycles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment named by `experiment.kind` in the config.
    Run(Common),
    /// Ratio limit of return masses.
    Ratio(Common),
    /// Cross ratio against a second target.
    CrossRatio(Common),
    /// Ratio of window masses on an embedded real lattice.
    Stone(Common),
    /// Mass of a translated window.
    Window(Common),
    /// Cylinder conditions D, C and CM.
    Conditions(Common),
    /// Leading eigenvalue of the twisted transfer matrix on a grid.
    SpectralScan(Common),
    /// Fourier inversion of a point mass.
    FourierInvert(Common),
    /// Local limit normalisation.
    LocalLimit(Common),
    /// Mixing on a finite group and return-time tails.
    Mixing(Common),
    /// Periodic-sum pressure with its Fekete bracket.
    Pressure(Common),
    /// Spectral radius of the convolved law against the minimised transform.
    Kesten(Common),
    /// Superadditivity of return masses.
    Fekete(Common),
    /// Fast tables against brute-force enumeration.
    OracleCompare(Common),
    /// List the built-in examples.
    Examples,
}

#[derive(Args)]
struct Common {
    /// TOML configuration (a previous manifest.txt also works).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Arithmetic, overriding `system.mode`.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rational,
    Float,
}

impl Cmd {
    fn split(self) -> Option<(Option<&'static str>, Common)> {
        use Cmd::*;
        Some(match self {
            Run(c) => (None, c),
            Ratio(c) => (Some("ratio"), c),
            CrossRatio(c) => (Some("cross-ratio"), c),
            Stone(c) => (Some("stone"), c),
            Window(c) => (Some("window"), c),
            Conditions(c) => (Some("conditions"), c),
            SpectralScan(c) => (Some("spectral-scan"), c),
            FourierInvert(c) => (Some("fourier-invert"), c),
            LocalLimit(c) => (Some("local-limit"), c),
            Mixing(c) => (Some("mixing"), c),
            Pressure(c) => (Some("pressure"), c),
            Kesten(c) => (Some("kesten"), c),
            Fekete(c) => (Some("fekete"), c),
            OracleCompare(c) => (Some("oracle-compare"), c),
            Examples => return None,
        })
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::Encoding(_) | Error::Unsupported(_) => 2,
        Error::Resource { .. } => 3,
        Error::Consistency(_) | Error::Degenerate(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some((kind, common)) = cli.cmd.split() else {
        for name in catalog::NAMES {
            let ex = catalog::example(name).expect("catalogue names resolve");
            println!("{name:<22} {}", ex.summary);
        }
        return ExitCode::SUCCESS;
    };
    if let Some(n) = common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("gmlab: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("gmlab: cannot read {}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        kind: kind.map(String::from),
        mode: common.mode.map(|m| match m {
            ModeArg::Rational => Mode::Rational,
            ModeArg::Float => Mode::Float,
        }),
        out_dir: common.out,
    };
    let cfg = match parse_config(&text, &overrides) {
        Ok(c) => c,
        Err(errs) => {
            for e in &errs.0 {
                eprintln!("gmlab: {e}");
            }
            return ExitCode::from(2);
        }
    };

    let start = Instant::now();
    let result = match cfg.mode {
        Mode::Rational => experiments::run::<Exact>(&cfg),
        Mode::Float => experiments::run::<f64>(&cfg),
    };
    let wall = start.elapsed().as_secs_f64();
    let (outcome, error) = match result {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e)),
    };
    let code = match &error {
        Some(e) => exit_code(e),
        None if outcome.checks.iter().any(|c| !c.passed) => 1,
        None => 0,
    };

    if let Err(e) = std::fs::create_dir_all(&cfg.out_dir) {
        eprintln!("gmlab: cannot create {}: {e}", cfg.out_dir.display());
        return ExitCode::from(2);
    }
    let mut files = Vec::new();
    for t in &outcome.tables {
        match output::write_csv(&cfg.out_dir, &cfg.echo, t) {
            Ok(p) => files.push(p.file_name().unwrap().to_string_lossy().into_owned()),
            Err(e) => {
                eprintln!("gmlab: cannot write {}.csv: {e}", t.name);
                return ExitCode::from(2);
            }
        }
    }
    let info = RunInfo {
        kind: &cfg.kind,
        mode: mode_name(cfg.mode),
        workers: rayon::current_num_threads(),
        wall_time_s: wall,
        exit_code: code as i32,
        error: error.as_ref().map(|e| e.to_string()),
    };
    if let Err(e) = output::write_manifest(&cfg.out_dir, &info, &files, &outcome.checks, &outcome.notes, &cfg.echo) {
        eprintln!("gmlab: cannot write manifest: {e}");
        return ExitCode::from(2);
    }

    for n in &outcome.notes {
        println!("{n}");
    }
    for c in &outcome.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.label, c.detail);
    }
    for f in &files {
        println!("wrote {}", cfg.out_dir.join(f).display());
    }
    if let Some(e) = error {
        eprintln!("gmlab: {e}");
    }
    ExitCode::from(code)
}
