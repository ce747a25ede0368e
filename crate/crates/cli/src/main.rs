use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heilbronn::bench::{bench_all_triples, bench_single_f, BenchReport, Task};
use heilbronn::fermat::{fermat_f_naive, fermat_table, FermatResult, SpectralEngine};
use heilbronn::heilbronn::{spectrum, SpectrumRecord};
use heilbronn::modarith::{check_odd_prime, odd_primes_up_to, PrimeContext};
use heilbronn::verify::{verify_prime, Depth};
use heilbronn::{DoubleDouble, Error, Precision};
use serde::{Deserialize, Serialize};

mod exit {
    pub const OK: u8 = 0;
    pub const INVARIANT: u8 = 1;
    pub const INVALID_INPUT: u8 = 2;
    pub const PRECISION: u8 = 3;
    pub const DISAGREEMENT: u8 = 4;
    pub const GOLDEN_MISMATCH: u8 = 5;
}

#[derive(Parser)]
#[command(
    name = "heilbronn",
    version,
    about = "Heilbronn sums, supercharacters and Fermat congruences mod p^2"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Emit JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Write to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Working precision: `double` (53 bits) or `double-double` (106 bits).
    #[arg(
        long,
        global = true,
        env = "HEILBRONN_PRECISION",
        default_value = "double"
    )]
    precision: Precision,
    /// Worker threads used across primes.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// H_p(g^l) for l = 1..p with error bounds.
    Spectrum {
        #[arg(short)]
        p: u64,
    },
    /// F(p; a, b, c) and the solution count p^3 (p-1) F.
    Fermat {
        #[arg(short)]
        p: u64,
        #[arg(short, default_value_t = 1)]
        a: u64,
        #[arg(short, default_value_t = 1)]
        b: u64,
        #[arg(short, default_value_t = 1)]
        c: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Spectral)]
        method: MethodArg,
    },
    /// F(p; 1, 1, 1) for all odd primes up to pmax, against the published table.
    Table {
        #[arg(long, default_value_t = 1039)]
        pmax: u64,
    },
    /// Run the invariant suites for one prime.
    Verify {
        #[arg(short)]
        p: u64,
        /// Spectral checks only.
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        /// Add enumeration and brute-force oracles.
        #[arg(long)]
        full: bool,
    },
    /// Time naive counting against the spectral method.
    Bench {
        #[arg(long, default_value = "single-F")]
        task: Task,
        #[arg(long, default_value_t = 31)]
        pmin: u64,
        /// Defaults to 199 for single-F and 61 for all-triples.
        #[arg(long)]
        pmax: Option<u64>,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(3..))]
        reps: u64,
        /// Also write a gnuplot data file.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Naive,
    Spectral,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Json,
}

/// Output of `fermat --method both`.
#[derive(Debug, Serialize, Deserialize)]
struct FermatComparison {
    spectral: FermatResult,
    naive: FermatResult,
    #[serde(rename = "match")]
    matches: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PrecisionTooLow { .. }
            | Error::RoundingResidual { .. }
            | Error::PrecisionEscalationFailed { .. } => exit::PRECISION,
            Error::Mismatch(_) => exit::DISAGREEMENT,
            _ => exit::INVALID_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: exit::INVALID_INPUT,
            message: format!("output: {e}"),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: exit::INVALID_INPUT,
            message: format!("output: {e}"),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let g = cli.global;
    // clap groups do not apply to global flags given after the subcommand
    let format = match (g.csv, g.json) {
        (true, true) => {
            return Err(
                Error::InvalidInput("--csv and --json are mutually exclusive".into()).into(),
            )
        }
        (true, false) => Format::Csv,
        (false, true) => Format::Json,
        (false, false) => Format::Text,
    };
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(Error::InvalidInput("--jobs must be positive".into()).into());
        }
        // ignore the error if a pool already exists; only happens in-process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let mut out: Box<dyn Write> = match &g.output {
        Some(path) => Box::new(io::BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    let code = match cli.command {
        Command::Spectrum { p } => cmd_spectrum(&mut out, format, g.precision, p),
        Command::Fermat { p, a, b, c, method } => {
            cmd_fermat(&mut out, format, g.precision, p, (a, b, c), method)
        }
        Command::Table { pmax } => cmd_table(&mut out, format, g.precision, pmax),
        Command::Verify { p, full, .. } => cmd_verify(
            &mut out,
            format,
            p,
            if full { Depth::Full } else { Depth::Quick },
        ),
        Command::Bench {
            task,
            pmin,
            pmax,
            reps,
            gnuplot,
        } => cmd_bench(&mut out, format, task, pmin, pmax, reps as usize, gnuplot),
    }?;
    out.flush()?;
    Ok(code)
}

fn cmd_spectrum(out: &mut dyn Write, format: Format, precision: Precision, p: u64) -> Outcome {
    let ctx = PrimeContext::new(p)?;
    let record: SpectrumRecord = match precision {
        Precision::Double => spectrum::<f64>(&ctx, None)?.to_record(),
        Precision::DoubleDouble => spectrum::<DoubleDouble>(&ctx, None)?.to_record(),
    };
    match format {
        Format::Csv => record.write_csv(out)?,
        Format::Json => writeln!(out, "{}", record.to_json())?,
        Format::Text => {
            writeln!(
                out,
                "p = {}, g = {}, {} bits, error bound {:e}",
                record.p, record.g, record.precision_bits, record.err_bound
            )?;
            for row in &record.rows {
                writeln!(out, "H(g^{:<5}) = {:>24.17}", row.ell, row.value)?;
            }
        }
    }
    Ok(exit::OK)
}

fn fermat_csv(out: &mut dyn Write, rows: &[&FermatResult], matches: Option<bool>) -> Outcome {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "p",
        "a",
        "b",
        "c",
        "method",
        "F",
        "solution_count",
        "residual",
    ];
    if matches.is_some() {
        header.push("match");
    }
    w.write_record(&header)?;
    for r in rows {
        let method = serde_json::to_value(r.method).expect("method serializes");
        let mut rec = vec![
            r.p.to_string(),
            r.a.to_string(),
            r.b.to_string(),
            r.c.to_string(),
            method.as_str().unwrap_or_default().to_string(),
            r.f.to_string(),
            r.solution_count.to_string(),
            format!("{:e}", r.residual),
        ];
        if let Some(m) = matches {
            rec.push(m.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(exit::OK)
}

fn fermat_text(out: &mut dyn Write, r: &FermatResult) -> io::Result<()> {
    let method = serde_json::to_value(r.method).expect("method serializes");
    writeln!(out, "p = {}, (a, b, c) = ({}, {}, {})", r.p, r.a, r.b, r.c)?;
    writeln!(
        out,
        "method         {}",
        method.as_str().unwrap_or_default()
    )?;
    writeln!(out, "F              {}", r.f)?;
    writeln!(out, "solution_count {}", r.solution_count)?;
    writeln!(out, "residual       {:e}", r.residual)
}

fn cmd_fermat(
    out: &mut dyn Write,
    format: Format,
    precision: Precision,
    p: u64,
    abc: (u64, u64, u64),
    method: MethodArg,
) -> Outcome {
    let ctx = PrimeContext::new(p)?;
    let (a, b, c) = abc;
    let naive = || fermat_f_naive(&ctx, a, b, c);
    let spectral = || SpectralEngine::new(ctx.clone(), precision).fermat(a, b, c);
    match method {
        MethodArg::Naive | MethodArg::Spectral => {
            let r = if method == MethodArg::Naive {
                naive()?
            } else {
                spectral()?
            };
            match format {
                Format::Csv => return fermat_csv(out, &[&r], None),
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&r).expect("result serializes")
                )?,
                Format::Text => fermat_text(out, &r)?,
            }
            Ok(exit::OK)
        }
        MethodArg::Both => {
            let both = FermatComparison {
                spectral: spectral()?,
                naive: naive()?,
                matches: false,
            };
            let both = FermatComparison {
                matches: both.spectral.f == both.naive.f,
                ..both
            };
            match format {
                Format::Csv => {
                    fermat_csv(out, &[&both.spectral, &both.naive], Some(both.matches))?;
                }
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&both).expect("result serializes")
                )?,
                Format::Text => {
                    fermat_text(out, &both.spectral)?;
                    fermat_text(out, &both.naive)?;
                    writeln!(out, "match          {}", both.matches)?;
                }
            }
            if both.matches {
                Ok(exit::OK)
            } else {
                Err(Failure {
                    code: exit::DISAGREEMENT,
                    message: format!(
                        "spectral F = {} but naive F = {}",
                        both.spectral.f, both.naive.f
                    ),
                })
            }
        }
    }
}

fn cmd_table(out: &mut dyn Write, format: Format, precision: Precision, pmax: u64) -> Outcome {
    if pmax < 3 {
        return Err(Error::InvalidInput(format!("--pmax must be at least 3, got {pmax}")).into());
    }
    let report = fermat_table(pmax, precision)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["p", "F", "golden", "match"])?;
            for r in &report.rows {
                let golden = r.golden.map(|g| g.to_string()).unwrap_or_default();
                w.write_record([
                    r.p.to_string(),
                    r.f.to_string(),
                    golden,
                    r.matches.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        )?,
        Format::Text => {
            writeln!(out, "{:>6} {:>4} {:>7}  match", "p", "F", "golden")?;
            for r in &report.rows {
                let golden = r
                    .golden
                    .map(|g| g.to_string())
                    .unwrap_or_else(|| "-".into());
                writeln!(out, "{:>6} {:>4} {:>7}  {}", r.p, r.f, golden, r.matches)?;
            }
            let compared = report.rows.iter().filter(|r| r.golden.is_some()).count();
            let matched = report
                .rows
                .iter()
                .filter(|r| r.golden.is_some() && r.matches)
                .count();
            writeln!(out, "{matched}/{compared} published values reproduced")?;
        }
    }
    let first = report.mismatches().next().copied();
    match first {
        None => Ok(exit::OK),
        Some(r) => Err(Failure {
            code: exit::GOLDEN_MISMATCH,
            message: format!(
                "p = {}: computed F = {}, published {}",
                r.p,
                r.f,
                r.golden.unwrap_or_default()
            ),
        }),
    }
}

fn cmd_verify(out: &mut dyn Write, format: Format, p: u64, depth: Depth) -> Outcome {
    check_odd_prime(p)?;
    let report = verify_prime(p, depth)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["suite", "pass", "detail"])?;
            for s in &report.suites {
                w.write_record([
                    s.name.as_str(),
                    if s.pass { "true" } else { "false" },
                    s.detail.as_str(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        )?,
        Format::Text => {
            for s in &report.suites {
                writeln!(
                    out,
                    "{:4}  {:<24} {}",
                    if s.pass { "pass" } else { "FAIL" },
                    s.name,
                    s.detail
                )?;
            }
        }
    }
    match report.first_failure() {
        None => Ok(exit::OK),
        Some(s) => Err(Failure {
            code: exit::INVARIANT,
            message: format!("{} failed: {}", s.name, s.detail),
        }),
    }
}

fn cmd_bench(
    out: &mut dyn Write,
    format: Format,
    task: Task,
    pmin: u64,
    pmax: Option<u64>,
    reps: usize,
    gnuplot: Option<PathBuf>,
) -> Outcome {
    let pmax = pmax.unwrap_or(match task {
        Task::SingleF => 199,
        Task::AllTriples => 61,
    });
    if pmin > pmax {
        return Err(
            Error::InvalidInput(format!("empty range: --pmin {pmin} > --pmax {pmax}")).into(),
        );
    }
    let primes: Vec<u64> = odd_primes_up_to(pmax)
        .into_iter()
        .filter(|&p| p >= pmin)
        .collect();
    let report: BenchReport = match task {
        Task::SingleF => bench_single_f(&primes, reps)?,
        Task::AllTriples => bench_all_triples(&primes, reps)?,
    };
    if let Some(path) = gnuplot {
        std::fs::write(path, report.gnuplot_data())?;
    }
    match format {
        Format::Csv => report.write_csv(&mut *out)?,
        Format::Json => writeln!(out, "{}", report.to_json())?,
        Format::Text => {
            writeln!(
                out,
                "{} benchmark, {} primes in [{pmin}, {pmax}], min of {reps}",
                report.task,
                primes.len()
            )?;
            writeln!(out, "{:>6} {:>14} {:>14}", "p", "naive (s)", "spectral (s)")?;
            for pair in report.samples.chunks(2) {
                writeln!(
                    out,
                    "{:>6} {:>14.3e} {:>14.3e}",
                    pair[0].p, pair[0].seconds, pair[1].seconds
                )?;
            }
            let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.2}"));
            writeln!(
                out,
                "slope naive {}, spectral {}",
                slope(report.naive_slope),
                slope(report.spectral_slope)
            )?;
            match report.crossover_p {
                Some(p) if report.crossover_observed => {
                    writeln!(out, "spectral faster from p = {p}")?
                }
                Some(_) => writeln!(out, "spectral faster at every sampled p")?,
                None => writeln!(out, "no crossover in range")?,
            }
            writeln!(out, "{}", report.note)?;
        }
    }
    Ok(exit::OK)
}
