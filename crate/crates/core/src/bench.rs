//! Wall-clock comparison of naive counting against the spectral method,
//! with least-squares slopes of `ln t` against `ln p`.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermat::{
    count_reduced_with_powers, fermat_f_value, structure_constants_naive_all, SpectralEngine,
    StructureTensorP,
};
use crate::heilbronn::{spectrum, spectrum_from_powers};
use crate::modarith::{check_odd_prime, primitive_root_mod_p2, pth_powers, PrimeContext};

pub const MIN_REPS: usize = 3;
pub const SINGLE_F_NAIVE_MAX_P: u64 = 199;
pub const ALL_TRIPLES_NAIVE_MAX_P: u64 = 61;

/// Each timed repetition runs the method often enough to last this long.
const MIN_BATCH_TIME: Duration = Duration::from_millis(2);

const NOTE: &str =
    "Slopes are fitted to wall-clock time and absorb the log factors of the bit-operation \
counts. With classical matrix products the all-triples spectral path is cubic in p; its advantage \
over the quartic naive count is one exponent, not the sub-cubic exponent of fast multiplication.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "single-F")]
    SingleF,
    #[serde(rename = "all-triples")]
    AllTriples,
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single-f" | "single" => Ok(Task::SingleF),
            "all-triples" | "all" => Ok(Task::AllTriples),
            _ => Err(Error::InvalidInput(format!("unknown bench task {s:?}"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::SingleF => "single-F",
            Task::AllTriples => "all-triples",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMethod {
    Naive,
    Spectral,
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMethod::Naive => "naive",
            BenchMethod::Spectral => "spectral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub p: u64,
    pub method: BenchMethod,
    /// Minimum over repetitions of the per-call time.
    pub seconds: f64,
    pub reps: usize,
    /// Calls per repetition.
    pub batch: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub task: Task,
    pub samples: Vec<Sample>,
    pub naive_slope: Option<f64>,
    pub spectral_slope: Option<f64>,
    /// Smallest sampled `p` from which the spectral method is faster at
    /// every larger sample.
    pub crossover_p: Option<u64>,
    /// Whether the naive method was faster at some sample below the
    /// crossover.
    pub crossover_observed: bool,
    /// Minimum times are nondecreasing in `p`, up to one inversion per method.
    pub monotonic: bool,
    pub note: String,
}

/// Ordinary least-squares slope through `(x, y)`; `None` below two points.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn time_min<R>(reps: usize, mut f: impl FnMut() -> R) -> (f64, u64) {
    let start = Instant::now();
    black_box(f());
    let once = start.elapsed().max(Duration::from_nanos(1));
    let batch = (MIN_BATCH_TIME.as_secs_f64() / once.as_secs_f64())
        .ceil()
        .max(1.0) as u64;
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let start = Instant::now();
        for _ in 0..batch {
            black_box(f());
        }
        best = best.min(start.elapsed().as_secs_f64() / batch as f64);
    }
    (best, batch)
}

impl BenchReport {
    fn assemble(task: Task, samples: Vec<Sample>) -> Self {
        let mut report = BenchReport {
            task,
            samples,
            naive_slope: None,
            spectral_slope: None,
            crossover_p: None,
            crossover_observed: false,
            monotonic: true,
            note: NOTE.to_string(),
        };
        report.naive_slope = report.slope_over(BenchMethod::Naive, 0, u64::MAX);
        report.spectral_slope = report.slope_over(BenchMethod::Spectral, 0, u64::MAX);
        let pairs = report.paired_times();
        let first_win = pairs
            .iter()
            .rposition(|&(_, n, s)| s >= n)
            .map_or(0, |i| i + 1);
        report.crossover_p = pairs.get(first_win).map(|&(p, _, _)| p);
        report.crossover_observed = first_win > 0 && first_win < pairs.len();
        report.monotonic = [BenchMethod::Naive, BenchMethod::Spectral]
            .iter()
            .all(|&m| {
                let times = report.times(m);
                times.windows(2).filter(|w| w[1].1 < w[0].1).count() <= 1
            });
        report
    }

    fn times(&self, method: BenchMethod) -> Vec<(u64, f64)> {
        self.samples
            .iter()
            .filter(|s| s.method == method)
            .map(|s| (s.p, s.seconds))
            .collect()
    }

    fn paired_times(&self) -> Vec<(u64, f64, f64)> {
        let spectral = self.times(BenchMethod::Spectral);
        self.times(BenchMethod::Naive)
            .into_iter()
            .filter_map(|(p, n)| spectral.iter().find(|s| s.0 == p).map(|s| (p, n, s.1)))
            .collect()
    }

    /// Slope of `ln t` against `ln p` over samples with `lo <= p <= hi`.
    pub fn slope_over(&self, method: BenchMethod, lo: u64, hi: u64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .times(method)
            .into_iter()
            .filter(|&(p, _)| (lo..=hi).contains(&p))
            .map(|(p, t)| ((p as f64).ln(), t.ln()))
            .collect();
        ols_slope(&pts)
    }

    /// CSV with header `p,method,seconds`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["p", "method", "seconds"])?;
        for s in &self.samples {
            out.write_record([
                s.p.to_string(),
                s.method.to_string(),
                format!("{:e}", s.seconds),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench report serializes")
    }

    /// Whitespace-separated columns `p naive spectral` for gnuplot.
    pub fn gnuplot_data(&self) -> String {
        let mut out = format!("# {} timings in seconds\n# p naive spectral\n", self.task);
        for (p, n, s) in self.paired_times() {
            out.push_str(&format!("{p} {n:e} {s:e}\n"));
        }
        out
    }
}

fn validate(primes: &[u64], reps: usize, naive_max: u64) -> Result<()> {
    if reps < MIN_REPS {
        return Err(Error::InvalidInput(format!(
            "at least {MIN_REPS} repetitions are required, got {reps}"
        )));
    }
    if primes.is_empty() {
        return Err(Error::InvalidInput("no primes to benchmark".into()));
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "primes must be strictly ascending".into(),
        ));
    }
    for &p in primes {
        check_odd_prime(p)?;
        if p > naive_max {
            return Err(Error::Scale { p, max: naive_max });
        }
    }
    Ok(())
}

fn spectral_single_f(p: u64) -> u64 {
    let pth = pth_powers(p);
    let g = primitive_root_mod_p2(p).expect("validated prime");
    let s = spectrum_from_powers::<f64>(p, g, &pth);
    let pu = p as usize;
    fermat_f_value(&s, pu, pu, pu).round() as u64
}

/// Naive reduced count against spectrum plus spectral `F`, both for
/// `(a, b, c) = (1, 1, 1)` and both including the `l^p` precompute.
pub fn bench_single_f(primes: &[u64], reps: usize) -> Result<BenchReport> {
    validate(primes, reps, SINGLE_F_NAIVE_MAX_P)?;
    let mut samples = Vec::new();
    for &p in primes {
        let engine = SpectralEngine::for_prime(p)?;
        let expected = engine.fermat(1, 1, 1)?.f;
        let naive = count_reduced_with_powers(p, 1, 1, 1, &pth_powers(p));
        if naive != (p - 1) * expected || spectral_single_f(p) != expected {
            return Err(Error::Mismatch(format!(
                "single-F methods disagree at p = {p}"
            )));
        }
        let (t, batch) = time_min(reps, || {
            let pth = pth_powers(black_box(p));
            count_reduced_with_powers(p, 1, 1, 1, &pth)
        });
        samples.push(Sample {
            p,
            method: BenchMethod::Naive,
            seconds: t,
            reps,
            batch,
        });
        let (t, batch) = time_min(reps, || spectral_single_f(black_box(p)));
        samples.push(Sample {
            p,
            method: BenchMethod::Spectral,
            seconds: t,
            reps,
            batch,
        });
    }
    Ok(BenchReport::assemble(Task::SingleF, samples))
}

fn spectral_all(p: u64) -> StructureTensorP {
    let ctx = PrimeContext::new(p).expect("validated prime");
    let s = spectrum::<f64>(&ctx, None).expect("f64 meets the precision floor");
    StructureTensorP::spectral_all(&s, false).expect("f64 rounding suffices at bench scale")
}

/// Exhaustive `(x, y, i, j)` count against one product `U D_p U`.
pub fn bench_all_triples(primes: &[u64], reps: usize) -> Result<BenchReport> {
    validate(primes, reps, ALL_TRIPLES_NAIVE_MAX_P)?;
    let mut samples = Vec::new();
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        let spectral = SpectralEngine::new(ctx.clone(), crate::Precision::Double).tensor(true)?;
        if !spectral.matches_dense(&structure_constants_naive_all(&ctx)) {
            return Err(Error::Mismatch(format!(
                "all-triples tensors disagree at p = {p}"
            )));
        }
        let (t, batch) = time_min(reps, || {
            let ctx = PrimeContext::new(black_box(p)).expect("validated prime");
            structure_constants_naive_all(&ctx)
        });
        samples.push(Sample {
            p,
            method: BenchMethod::Naive,
            seconds: t,
            reps,
            batch,
        });
        let (t, batch) = time_min(reps, || spectral_all(black_box(p)));
        samples.push(Sample {
            p,
            method: BenchMethod::Spectral,
            seconds: t,
            reps,
            batch,
        });
    }
    Ok(BenchReport::assemble(Task::AllTriples, samples))
}
