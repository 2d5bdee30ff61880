//! `qks`: verification driver for homogeneous quaternionic Kähler structures.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 when a
//! tensor given to `decompose` is not in `𝒱`, 64 for usage errors, 65 for
//! unreadable tensor files.

mod report;
mod suites;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qks::classification::{class_ranks, dim_v, formula_dims, is_in_v, label_of, project_unchecked, PRESENCE_THRESHOLD};
use qks::qh_space::make_qh_space;
use qks::tensor3::{Tensor3, MEMBERSHIP_TOL};
use qks::QksError;

use report::{write_json, DecomposeReport, DimRow, DimsReport, MembershipRow, VerifyReport, SCHEMA};

/// Seed used when neither `--seed` nor `QKS_SEED` is set.
const DEFAULT_SEED: u64 = 7;

const EXIT_FAILED: u8 = 1;
const EXIT_NOT_MEMBER: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "qks", version, about = "Checks for homogeneous quaternionic Kähler structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Quaternionic dimension n of V = ℍ^n.
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,
    /// Seed for every random sample.
    #[arg(long, global = true, env = "QKS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Relative membership tolerance used by `decompose`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Projector ranks against the closed-form dimensions (n in 2..=4).
    Dims,
    /// Split a tensor file into its five classes.
    Decompose { file: PathBuf },
    /// Run a verification suite.
    Verify { suite: Suite },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Classification,
    Models,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_dims(cli: &Cli) -> anyhow::Result<u8> {
    let n = cli.n;
    let computed = class_ranks(n)?;
    let formula = formula_dims(n);
    let classes: Vec<DimRow> =
        (0..5).map(|i| DimRow { class: i + 1, computed: computed[i], formula: formula[i] }).collect();
    let total = computed.iter().sum();
    let passed = computed == formula && total == dim_v(n);
    let report = DimsReport { schema: SCHEMA, command: "dims", n, classes, total, dim_v: dim_v(n), passed };
    let w = sink(&cli.out)?;
    match cli.format {
        Format::Json => write_json(w, &report)?,
        Format::Csv => report.write_csv(w)?,
    }
    Ok(if passed { 0 } else { EXIT_FAILED })
}

fn read_tensor(path: &Path) -> std::result::Result<Tensor3, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Tensor3::from_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_decompose(cli: &Cli, file: &Path) -> anyhow::Result<u8> {
    let s = match read_tensor(file) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Ok(EXIT_DATA);
        }
    };
    let space = make_qh_space(s.n())?;
    let tolerance = cli.tol.unwrap_or(MEMBERSHIP_TOL);
    let m = is_in_v(&s, &space)?;
    let member = m.relative <= tolerance;
    let membership = MembershipRow { residual: m.residual, relative: m.relative, tolerance, member };
    let (label, decomposition) = if member {
        let dec = project_unchecked(&s, &space);
        (Some(label_of(&dec, PRESENCE_THRESHOLD).indices()), Some(dec.report(&s)))
    } else {
        (None, None)
    };
    let report = DecomposeReport { schema: SCHEMA, command: "decompose", n: s.n(), membership, label, decomposition };
    let w = sink(&cli.out)?;
    match cli.format {
        Format::Json => write_json(w, &report)?,
        Format::Csv => report.write_csv(w)?,
    }
    if !member {
        eprintln!("{}", QksError::NotMember { space: "V", residual: m.relative });
        return Ok(EXIT_NOT_MEMBER);
    }
    Ok(0)
}

fn run_verify(cli: &Cli, suite: Suite) -> anyhow::Result<u8> {
    let (name, checks) = match suite {
        Suite::Classification => ("classification", suites::classification(cli.n, cli.seed)?),
        Suite::Models => ("models", suites::models(cli.n)?),
        Suite::Ball => ("ball", suites::ball(cli.n, cli.seed)?),
    };
    let report = VerifyReport::new(name, cli.n, cli.seed, checks);
    let w = sink(&cli.out)?;
    match cli.format {
        Format::Json => write_json(w, &report)?,
        Format::Csv => report.write_csv(w)?,
    }
    Ok(if report.passed { 0 } else { EXIT_FAILED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Dims if !(2..=4).contains(&cli.n) => return usage(&format!("dims needs --n in 2..=4, got {}", cli.n)),
        Command::Verify { suite: Suite::Ball } if cli.n == 0 => return usage("--n must be positive"),
        Command::Verify { suite: Suite::Classification | Suite::Models } if cli.n < 2 => {
            return usage(&format!("this suite needs --n >= 2, got {}", cli.n))
        }
        _ => {}
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return usage(&format!("--tol must be positive, got {t}"));
        }
    }
    let result = match &cli.command {
        Command::Dims => run_dims(&cli),
        Command::Decompose { file } => run_decompose(&cli, file),
        Command::Verify { suite } => run_verify(&cli, *suite),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
