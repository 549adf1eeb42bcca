use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use folstab_core::config::{parse_kv, Format, RunConfig};
use folstab_core::report::Report;
use folstab_core::suites::run;
use folstab_core::FolstabError;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "folstab", version, about = "Stability checks for harmonic Riemannian foliations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a report.
    Run(RunArgs),
    /// Classify catalog records against the list of unstable symmetric spaces.
    Classify(ClassifyArgs),
    /// List built-in spaces and foliations.
    ListSpaces,
    /// Re-emit a saved JSON report as JSON or CSV.
    Emit(EmitArgs),
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    foliation: Option<String>,
    /// Comma-separated suites or `all`.
    #[arg(long)]
    suite: Option<String>,
    /// `16` or per axis `16x16x8`; at least 8 per axis.
    #[arg(long)]
    res: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "tolerance-scale")]
    tolerance_scale: Option<String>,
    /// Seeded smooth sections per identity check.
    #[arg(long)]
    sections: Option<String>,
    #[arg(long)]
    eigenvalues: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Catalog file; the built-in catalog when omitted.
    #[arg(long)]
    catalog: Option<String>,
    /// Record name; repeat for several (products are evaluated when more than one).
    #[arg(long)]
    name: Vec<String>,
    #[arg(long, default_value = "16")]
    res: String,
    #[arg(long, default_value = "0")]
    seed: String,
    #[arg(long = "tolerance-scale", default_value = "1")]
    tolerance_scale: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EmitArgs {
    /// Saved JSON report.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<FolstabError> for Failure {
    fn from(e: FolstabError) -> Self {
        match e {
            FolstabError::Io(m) => Failure::Io(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format(output: &Output) -> Result<Format, Failure> {
    Ok(output.format.parse()?)
}

fn run_config(pairs: &BTreeMap<String, String>, output: &Output) -> Result<bool, Failure> {
    let fmt = format(output)?;
    let cfg = RunConfig::from_pairs(pairs)?;
    let start = Instant::now();
    let report = run(&cfg)?;
    eprintln!("wall time: {:.2} s", start.elapsed().as_secs_f64());
    for s in &report.suites {
        let failed: Vec<&str> = s.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let mut line = format!("{}: {:?}", s.suite, s.status).to_lowercase();
        if !failed.is_empty() {
            line.push_str(&format!(" (failed: {})", failed.join(", ")));
        }
        if let Some(e) = &s.error {
            line.push_str(&format!(" [{e}]"));
        }
        eprintln!("{line}");
    }
    write(output, &report.emit(fmt))?;
    Ok(report.passed)
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Run(a) => {
            let mut pairs = match &a.config {
                Some(p) => parse_kv(&read(p)?)?,
                None => BTreeMap::new(),
            };
            let flags = [
                ("space", &a.space),
                ("foliation", &a.foliation),
                ("suite", &a.suite),
                ("res", &a.res),
                ("seed", &a.seed),
                ("tolerance-scale", &a.tolerance_scale),
                ("sections", &a.sections),
                ("eigenvalues", &a.eigenvalues),
            ];
            for (k, v) in flags {
                if let Some(v) = v {
                    pairs.insert(k.to_string(), v.clone());
                }
            }
            run_config(&pairs, &a.output)
        }
        Command::Classify(a) => {
            let mut pairs = BTreeMap::new();
            pairs.insert("suite".to_string(), "classify".to_string());
            pairs.insert("res".to_string(), a.res.clone());
            pairs.insert("seed".to_string(), a.seed.clone());
            pairs.insert("tolerance-scale".to_string(), a.tolerance_scale.clone());
            if let Some(c) = &a.catalog {
                read(Path::new(c))?;
                pairs.insert("catalog".to_string(), c.clone());
            }
            if !a.name.is_empty() {
                pairs.insert("name".to_string(), a.name.join(";"));
            }
            run_config(&pairs, &a.output)
        }
        Command::ListSpaces => {
            print!("{SPACES}");
            Ok(true)
        }
        Command::Emit(a) => {
            let fmt = format(&a.output)?;
            let report = Report::from_json(&read(&a.input)?)?;
            write(&a.output, &report.emit(fmt))?;
            Ok(true)
        }
    }
}

const SPACES: &str = "\
space                                         foliations (whole and points on every space)
flat_torus:extents=AxB[x...]                  linear[:slope=s], complex_lines (even dimension)
round_sphere:n=N[,radius=r][,lift=h]          hopf (n = 3)
hopf_s3_fibration                             hopf
hopf_complex:n=N[,lambda=l][,bump=b]          fibration
cpn_fubini_study:n=N                          -
warped_torus[:amplitude=a]                    warped_circles
A * B                                         F * G, one foliation per factor
";

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
