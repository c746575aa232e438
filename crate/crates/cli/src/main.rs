//! `fracineq` command-line interface.
//!
//! Exit codes: 0 success (holds / certified / no counterexample), 1 violated
//! or counterexample found, 2 usage or computation error, 3 inconclusive.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fracineq::fracint::QuadMethod;
use fracineq::report::to_json_sig17;
use fracineq::verify::TheoremId;

use commands::{document, Outcome, CSV_HEADER};
use config::{Format, Property, RunConfig, Side};

#[derive(Parser)]
#[command(name = "fracineq", version, about = "Fractional Hermite–Hadamard integrals and inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Riemann–Liouville integral of f at x.
    Integrate(IntegrateArgs),
    /// Check one inequality instance.
    Verify(CaseArgs),
    /// Certify a convexity-type property or an η identity on samples.
    Certify(CertifyArgs),
    /// Verify one case over a grid of α values.
    Scan(ScanArgs),
    /// Seeded counterexample search over a parametric family.
    Search(SearchArgs),
    /// Re-execute a JSON report and check that it reproduces exactly.
    Report { path: PathBuf },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report to this file (atomically).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct QuadArgs {
    /// Gauss–Legendre nodes per panel.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    max_panels: Option<usize>,
    #[arg(long, value_parser = parse_method)]
    method: Option<QuadMethod>,
}

fn parse_method(s: &str) -> Result<QuadMethod, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| "expected desingularized-gauss or adaptive-bisection".to_string())
}

fn parse_theorem(s: &str) -> Result<TheoremId, String> {
    s.parse().map_err(|e: fracineq::verify::VerifyError| e.to_string())
}

fn parse_domain(s: &str) -> Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim()));
    Ok([p(lo)?, p(hi)?])
}

#[derive(Args)]
struct IntegrateArgs {
    #[arg(long)]
    f: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Right endpoint for `--side right`.
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    side: Option<Side>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CaseArgs {
    #[arg(long, value_parser = parse_theorem)]
    theorem: Option<TheoremId>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// η(y, x) expression or built-in (linear, zero, scaled(k), shifted-linear(c)).
    #[arg(long)]
    eta: Option<String>,
    /// Invex set `LO,HI` for the η hypotheses.
    #[arg(long, value_parser = parse_domain, allow_hyphen_values = true)]
    domain: Option<[f64; 2]>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_parser = parse_theorem)]
    remark_base: Option<TheoremId>,
    /// Verdict tolerance on the margin.
    #[arg(long)]
    tol: Option<f64>,
    /// Skip the hypothesis certifications.
    #[arg(long)]
    no_hypotheses: bool,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    property: Option<Property>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, value_parser = parse_domain, allow_hyphen_values = true)]
    domain: Option<[f64; 2]>,
    /// Certify |f'|^Q instead of f.
    #[arg(long)]
    derivative_power: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    alpha_grid: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// `quadratic` or `EXPR | name=lo:hi, ...`.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
}

fn quad_fields(q: QuadArgs, c: RunConfig) -> RunConfig {
    RunConfig { nodes: q.nodes, max_panels: q.max_panels, method: q.method, ..c }
}

fn common_fields(c: &Common, cfg: RunConfig) -> RunConfig {
    RunConfig { out: c.out.clone(), format: c.format, seed: c.seed, ..cfg }
}

fn case_fields(a: CaseArgs, command: &str) -> (Common, RunConfig) {
    let cfg = RunConfig {
        command: Some(command.into()),
        theorem: a.theorem,
        f: a.f,
        a: a.a,
        b: a.b,
        eta: a.eta,
        domain: a.domain,
        alpha: a.alpha,
        p: a.p,
        q: a.q,
        remark_base: a.remark_base,
        tol: a.tol,
        check_hypotheses: a.no_hypotheses.then_some(false),
        grid_points: a.grid_points,
        samples: a.samples,
        ..Default::default()
    };
    let cfg = common_fields(&a.common, quad_fields(a.quad, cfg));
    (a.common, cfg)
}

/// Flags as a partial configuration, plus the optional config file path.
fn flags(cmd: Command) -> (Option<PathBuf>, RunConfig) {
    let (common, cfg) = match cmd {
        Command::Integrate(a) => {
            let cfg = RunConfig {
                command: Some("integrate".into()),
                f: a.f,
                a: a.a,
                b: a.b,
                x: a.x,
                alpha: a.alpha,
                side: a.side,
                tol: a.tol,
                ..Default::default()
            };
            let cfg = common_fields(&a.common, quad_fields(a.quad, cfg));
            (a.common, cfg)
        }
        Command::Verify(a) => case_fields(a, "verify"),
        Command::Certify(a) => {
            let cfg = RunConfig {
                command: Some("certify".into()),
                property: a.property,
                f: a.f,
                eta: a.eta,
                a: a.a,
                b: a.b,
                domain: a.domain,
                derivative_power: a.derivative_power,
                tol: a.tol,
                grid_points: a.grid_points,
                samples: a.samples,
                ..Default::default()
            };
            let cfg = common_fields(&a.common, cfg);
            (a.common, cfg)
        }
        Command::Scan(a) => {
            let grid = a.alpha_grid;
            let (common, cfg) = case_fields(a.case, "scan");
            (common, RunConfig { alpha_grid: grid, ..cfg })
        }
        Command::Search(a) => {
            let (family, budget) = (a.family, a.budget);
            let (common, cfg) = case_fields(a.case, "search");
            (common, RunConfig { family, budget, ..cfg })
        }
        Command::Report { .. } => unreachable!("handled separately"),
    };
    (common.config, cfg)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn csv_bytes(rows: &[[String; 6]]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(w.into_inner()?)
}

fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let format = cfg.format.unwrap_or(Format::Json);
    if let Some(path) = &cfg.out {
        let bytes = match format {
            Format::Json => to_json_sig17(&document(cfg, &outcome.result))?.into_bytes(),
            Format::Csv => match &outcome.csv {
                Some(rows) => csv_bytes(rows)?,
                None => bail!("--format csv is not available for this command"),
            },
        };
        write_atomic(path, &bytes)?;
    } else if cfg.format == Some(Format::Json) {
        println!("{}", serde_json::to_string_pretty(&document(cfg, &outcome.result))?);
    } else if cfg.format == Some(Format::Csv) {
        let rows = outcome.csv.as_ref().context("--format csv is not available for this command")?;
        print!("{}", String::from_utf8(csv_bytes(rows)?)?);
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<u8> {
    if let Command::Report { path } = cmd {
        return replay(&path);
    }
    let (config_path, overrides) = flags(cmd);
    let base = match &config_path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = commands::resolve(base.overlay(overrides));
    let outcome = commands::run(&cfg)?;
    if cfg.format != Some(Format::Json) || cfg.out.is_some() {
        print!("{}", outcome.summary);
    }
    emit(&cfg, &outcome)?;
    Ok(outcome.exit)
}

fn replay(path: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: serde_json::Value = serde_json::from_str(&text).context("report is not JSON")?;
    let cfg: RunConfig =
        serde_json::from_value(doc.get("config").cloned().context("report has no `config`")?).context("report config")?;
    let outcome = commands::run(&cfg)?;
    let again = to_json_sig17(&document(&cfg, &outcome.result))?;
    if again == text {
        println!("reproduced: {} matches byte for byte", path.display());
        Ok(0)
    } else {
        let line = text.lines().zip(again.lines()).position(|(x, y)| x != y).map_or(0, |i| i + 1);
        println!("{} does not reproduce (first difference near line {line})", path.display());
        Ok(1)
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FRACINEQ_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("FRACINEQ_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("FRACINEQ_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| execute(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
