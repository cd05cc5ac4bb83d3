//! `tentkit`: norms of stored fields, kernel extension, and the verification suites.
//!
//! Exit codes: 0 when everything passes, 1 when a suite or merged report holds a failure,
//! 2 for usage, file, or parameter errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tentkit::dyadic::{dyadic_tent_norm, local_means};
use tentkit::harness::report::{read_jsonl, write_csv, write_jsonl};
use tentkit::harness::{run, HarnessConfig, Record, Status, Suite};
use tentkit::io::{load_boundary_hsf1, load_hsf1, save_hsf1};
use tentkit::kernels::{extend, KernelSpec};
use tentkit::tent::{beyond_infinity_norm, change_of_angle_norm, jn_norm, tent_norm, z_norm};
use tentkit::{AverageSpec, Domain, Exponent, ExponentTuple, Field};

#[derive(Parser)]
#[command(name = "tentkit", version, about = "Weighted tent-space norms on sampled half-space fields")]
struct Cli {
    /// Worker threads (overrides TENTKIT_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one norm of an HSF1 field and print it.
    Norm(NormArgs),
    /// Extend boundary data to the upper half-space with a kernel family.
    Extend(ExtendArgs),
    /// Run verification suites and write JSON-lines reports.
    Suite(SuiteArgs),
    /// Merge report files into one CSV or JSON-lines file.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Tent,
    Z,
    /// Endpoint John-Nirenberg form (p = inf, uses --alpha).
    Jn,
    /// T^{inf,q} with outer weight t^{-alpha} (uses --alpha).
    Beyond,
    /// Discrete norm over dyadic cubes; needs a power-of-two grid.
    Dyadic,
    /// Inner ball of radius lambda t (uses --lambda).
    Angle,
}

#[derive(clap::Args)]
struct NormArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: Exponent,
    #[arg(long, allow_hyphen_values = true)]
    q: Exponent,
    #[arg(long, allow_hyphen_values = true)]
    r: Exponent,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, value_enum, default_value = "tent")]
    variant: Variant,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Whitney window (a t, b t] x B(x, c t).
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"])]
    window: Option<Vec<f64>>,
    /// Print the full result as JSON instead of the bare value.
    #[arg(long)]
    json: bool,
    field: PathBuf,
}

#[derive(clap::Args)]
struct ExtendArgs {
    /// heat, gw:N (|s w|^N e^{-|s w|^2}), or lp (Littlewood-Paley block).
    #[arg(long, default_value = "heat", value_parser = parse_kernel)]
    kernel: KernelSpec,
    #[arg(long)]
    s_min: f64,
    #[arg(long)]
    s_max: f64,
    /// Scale samples per octave.
    #[arg(long, default_value_t = 8)]
    m_scale: usize,
    input: PathBuf,
    output: PathBuf,
}

#[derive(clap::Args)]
struct SuiteArgs {
    /// Comma-separated suite names, or `all`.
    suites: String,
    /// TOML configuration; defaults apply when omitted.
    config: Option<PathBuf>,
    /// Report destination (JSON lines); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a flat CSV export.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_kernel(s: &str) -> std::result::Result<KernelSpec, String> {
    match s {
        "heat" => Ok(KernelSpec::HEAT),
        "lp" => Ok(KernelSpec::LpBlock),
        _ => match s.strip_prefix("gw:").map(str::parse::<u32>) {
            Some(Ok(order)) => Ok(KernelSpec::GaussWeierstrass { order }),
            _ => Err(format!("unknown kernel '{s}' (expected heat, gw:N, or lp)")),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = init_threads(cli.threads) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(Status::Fail) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("TENTKIT_THREADS") {
            Ok(v) => v.trim().parse().with_context(|| format!("TENTKIT_THREADS = '{v}' is not a count"))?,
            Err(_) => return Ok(()),
        },
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn dispatch(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Norm(a) => norm(a).map(|_| Status::Pass),
        Command::Extend(a) => extend_cmd(a).map(|_| Status::Pass),
        Command::Suite(a) => suite(a),
        Command::Report(a) => report(a),
    }
}

fn norm(a: NormArgs) -> Result<()> {
    let f: Field = load_hsf1(&a.field).with_context(|| format!("reading {}", a.field.display()))?;
    let e = ExponentTuple::new(a.p, a.q, a.r, a.beta)?;
    let spec = match a.window.as_deref() {
        Some(&[wa, wb, wc]) => AverageSpec::new(wa, wb, wc)?,
        _ => AverageSpec::STANDARD,
    };
    let res = match a.variant {
        Variant::Tent => tent_norm(&f, &e, &spec)?,
        Variant::Z => z_norm(&f, &e, &spec)?,
        Variant::Jn => jn_norm(&f, &e, a.alpha)?,
        Variant::Beyond => beyond_infinity_norm(&f, e.q, e.beta, a.alpha)?,
        Variant::Angle => change_of_angle_norm(&f, &e, a.lambda)?,
        Variant::Dyadic => {
            let (k0, k1) = f.domain().data_generations();
            dyadic_tent_norm(&local_means(&f, e.r, k0, k1)?, &e)?
        }
    };
    if a.json {
        println!("{}", serde_json::to_string(&res)?);
    } else {
        println!("{:.17e}", res.value);
    }
    Ok(())
}

fn extend_cmd(a: ExtendArgs) -> Result<()> {
    let b = load_boundary_hsf1::<f64>(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let bd = b.domain();
    let dom = Domain::new(bd.d(), bd.side(), bd.n_space(), a.s_min, a.s_max, a.m_scale)?;
    let f = extend(&b, &a.kernel, &dom)?;
    save_hsf1(&f, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(())
}

fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    let out: Vec<Suite> = s.split(',').map(|n| n.trim().parse()).collect::<tentkit::Result<_>>()?;
    if out.is_empty() {
        bail!("no suites named");
    }
    Ok(out)
}

/// Worst status over the records: any failure wins, then any pass.
fn overall(records: &[Record]) -> Status {
    if records.iter().any(|r| r.status() == Status::Fail) {
        Status::Fail
    } else if records.iter().any(|r| r.status() == Status::Pass) {
        Status::Pass
    } else {
        Status::Degenerate
    }
}

fn print_summaries(records: &[Record]) {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    for r in records {
        if let Record::Band(b) = r {
            let lo = b.resolutions.iter().filter_map(|x| x.lo).reduce(f64::min);
            let hi = b.resolutions.iter().filter_map(|x| x.hi).reduce(f64::max);
            eprintln!(
                "{:<10} {}/{}  band [{}, {}]  drift {}  failures {}",
                format!("{:?}", b.status).to_uppercase(),
                b.suite,
                b.experiment,
                opt(lo),
                opt(hi),
                opt(b.drift),
                b.failures
            );
        }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn suite(a: SuiteArgs) -> Result<Status> {
    let suites = parse_suites(&a.suites)?;
    let cfg = match &a.config {
        Some(p) => HarnessConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => HarnessConfig::default(),
    };
    let records = run(&cfg, &suites)?;
    write_jsonl(&records, sink(&a.out)?)?;
    if let Some(p) = &a.csv {
        write_csv(&records, File::create(p).with_context(|| format!("creating {}", p.display()))?)?;
    }
    print_summaries(&records);
    Ok(overall(&records))
}

fn read_reports(path: &Path) -> Result<Vec<Record>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_jsonl(BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

fn report(a: ReportArgs) -> Result<Status> {
    let mut records = Vec::new();
    for p in &a.inputs {
        records.extend(read_reports(p)?);
    }
    let mut w = sink(&a.out)?;
    match a.format {
        Format::Csv => write_csv(&records, &mut w)?,
        Format::Json => write_jsonl(&records, &mut w)?,
    }
    w.flush()?;
    print_summaries(&records);
    Ok(overall(&records))
}
