//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use heilbronn::bench::{bench_single_f, BenchMethod};
use heilbronn::fermat::{
    ciik_report, fermat_count_full_naive, fermat_count_naive_reduced, fermat_table,
    fourth_moment_check, golden_table, quartic_check, third_moment_check, SpectralEngine,
    StructureTensorP,
};
use heilbronn::heilbronn::{
    heilbronn_partition, sigma_matrix, spectrum, u_matrix, verify_spectrum_identities,
};
use heilbronn::modarith::{
    binomial_log_identity_holds, functional_log_identity_holds, inverses_mod_p, log_level_sets,
    next_primitive_root_mod_p2, odd_primes_up_to,
};
use heilbronn::sctheory::{structure_constant_all_representatives, StructureTensor};
use heilbronn::{Precision, PrimeContext};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn engine(p: u64) -> SpectralEngine {
    SpectralEngine::for_prime(p).expect("odd prime")
}

fn golden_table_reproduction() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = pool
        .install(|| fermat_table(1039, Precision::Double))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let golden = golden_table();
    ensure(report.rows.len() == golden.len(), || {
        format!("{} rows, expected {}", report.rows.len(), golden.len())
    })?;
    for (row, &(p, f)) in report.rows.iter().zip(&golden) {
        ensure(row.p == p && row.f == f, || {
            format!("p = {p}: computed {}, published {f}", row.f)
        })?;
    }
    ensure(secs < 120.0, || format!("took {secs:.1} s single-threaded"))?;
    Ok(format!(
        "174/174 entries match, {secs:.2} s single-threaded"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut pairs = 0usize;
    for p in odd_primes_up_to(61) {
        let e = engine(p);
        let ctx = e.context();
        for j in 1..=p as i64 {
            for k in 1..=p as i64 {
                let (b, c) = (ctx.g_pow(j), ctx.g_pow(k));
                let f = e.fermat(1, b, c).map_err(|e| e.to_string())?.f;
                let naive = fermat_count_naive_reduced(ctx, 1, b, c).map_err(|e| e.to_string())?;
                ensure(naive == (p - 1) * f, || {
                    format!("p = {p}, (j, k) = ({j}, {k}): naive {naive}, spectral {f}")
                })?;
                pairs += 1;
            }
        }
    }
    for p in [3u64, 5, 7, 11] {
        let e = engine(p);
        let r = e.fermat(1, 1, 1).map_err(|e| e.to_string())?;
        let full = fermat_count_full_naive(e.context(), 1, 1, 1).map_err(|e| e.to_string())?;
        ensure(full == r.solution_count, || {
            format!(
                "p = {p}: full count {full}, p^3 (p-1) F = {}",
                r.solution_count
            )
        })?;
    }
    Ok(format!(
        "{pairs} class pairs for p <= 61; full counts at p = 3, 5, 7, 11"
    ))
}

fn spectrum_identities() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for p in odd_primes_up_to(499) {
        let r = verify_spectrum_identities(engine(p).spectrum64());
        let pf = p as f64;
        ensure(r.sum_residual < 1e-6, || {
            format!("p = {p}: |sum H| = {:e}", r.sum_residual)
        })?;
        ensure(r.norm_residual < 1e-5 * pf, || {
            format!("p = {p}: norm residual {:e}", r.norm_residual)
        })?;
        ensure(r.dot_residual < 1e-5 * pf, || {
            format!("p = {p}: shifted residual {:e}", r.dot_residual)
        })?;
        worst = (
            worst.0.max(r.sum_residual),
            worst.1.max(r.norm_residual / pf),
            worst.2.max(r.dot_residual / pf),
        );
    }
    Ok(format!(
        "p <= 499: max |sum H| {:.1e}, max norm/p {:.1e}, max shifted/p {:.1e}",
        worst.0, worst.1, worst.2
    ))
}

fn diagonalization() -> Outcome {
    let (mut diag, mut unit) = (0.0f64, 0.0f64);
    for p in odd_primes_up_to(101) {
        let ctx = PrimeContext::new(p).map_err(|e| e.to_string())?;
        let s = spectrum::<f64>(&ctx, None).map_err(|e| e.to_string())?;
        let (u, sigma) = (u_matrix(&s), sigma_matrix(&s));
        let tensor = StructureTensorP::enumerate(&ctx);
        for i in 1..=p as usize + 2 {
            let r = tensor
                .t_matrix::<f64>(i)
                .matmul(&u)
                .max_abs_diff(&u.scale_columns(sigma.row(i - 1)));
            ensure(r < 1e-7, || {
                format!("p = {p}, i = {i}: |T_i U - U D_i| = {r:e}")
            })?;
            diag = diag.max(r);
        }
        let (orth, sym) = (u.orthogonality_residual(), u.symmetry_residual());
        ensure(orth < 1e-8 && sym < 1e-8, || {
            format!("p = {p}: unitarity {orth:e}, symmetry {sym:e}")
        })?;
        unit = unit.max(orth.max(sym));
    }
    Ok(format!(
        "p <= 101: max |T_i U - U D_i| {diag:.1e}, max unitarity/symmetry residual {unit:.1e}"
    ))
}

fn tensor_laws() -> Outcome {
    for p in odd_primes_up_to(31) {
        let ctx = PrimeContext::new(p).map_err(|e| e.to_string())?;
        let part = heilbronn_partition(&ctx);
        let generic = StructureTensor::enumerate(&part);
        let t = StructureTensorP::from_generic(p, &generic);
        ensure(t.matches_generic(&generic), || {
            format!("p = {p}: border formulas disagree with enumeration")
        })?;
        ensure(t.permutation_symmetry_violation().is_none(), || {
            format!("p = {p}: permutation symmetry")
        })?;
        ensure(t.row_sum_violation().is_none(), || {
            format!("p = {p}: row sums")
        })?;
        ensure(t.diagonal_sums().iter().all(|&s| s == p - 2), || {
            format!("p = {p}: diagonal sums")
        })?;
        let n = part.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let reps = structure_constant_all_representatives(&part, i, j, k);
                    ensure(reps.windows(2).all(|w| w[0] == w[1]), || {
                        format!(
                            "p = {p}: c({}, {}, {}) depends on the representative",
                            i + 1,
                            j + 1,
                            k + 1
                        )
                    })?;
                }
            }
        }
    }
    for p in odd_primes_up_to(101).into_iter().filter(|&p| p > 31) {
        let ctx = PrimeContext::new(p).map_err(|e| e.to_string())?;
        let t = StructureTensorP::enumerate(&ctx);
        let pu = p as usize;
        ensure(
            t.permutation_symmetry_violation_for([1, pu / 2, pu])
                .is_none(),
            || format!("p = {p}: symmetry"),
        )?;
        ensure(t.row_sum_violation().is_none(), || {
            format!("p = {p}: row sums")
        })?;
        ensure(t.diagonal_sums().iter().all(|&s| s == p - 2), || {
            format!("p = {p}: diagonal sums")
        })?;
        let part = heilbronn_partition(&ctx);
        for (i, j, k) in [(pu - 1, 0, 1), (2, 5, pu - 1), (pu, pu + 1, 3)] {
            let reps = structure_constant_all_representatives(&part, i, j, k);
            ensure(reps.windows(2).all(|w| w[0] == w[1]), || {
                format!("p = {p}: representative dependence")
            })?;
            ensure(reps[0] == t.get(i + 1, j + 1, k + 1), || {
                format!("p = {p}: spot value at ({i}, {j}, {k})")
            })?;
        }
    }
    Ok("exhaustive for p <= 31, spot checks for 31 < p <= 101".into())
}

fn moment_identities() -> Outcome {
    let mut worst = 0.0f64;
    let mut check =
        |m: heilbronn::fermat::MomentCheck, what: &dyn Fn() -> String| -> Result<(), String> {
            worst = worst.max(m.residual);
            ensure(m.residual < 1e-3 && m.pass, || {
                format!("{}: lhs {} rhs {}", what(), m.lhs, m.rhs)
            })
        };
    for p in odd_primes_up_to(31) {
        let ctx = PrimeContext::new(p).map_err(|e| e.to_string())?;
        let s = spectrum::<f64>(&ctx, None).map_err(|e| e.to_string())?;
        let t = StructureTensorP::enumerate(&ctx);
        let pu = p as usize;
        for i in 1..=pu {
            for j in 1..=pu {
                for k in 1..=pu {
                    check(third_moment_check(&s, &t, i, j, k), &|| {
                        format!("third p={p} ({i},{j},{k})")
                    })?;
                    for l in 1..=pu {
                        check(fourth_moment_check(&s, &t, i, j, k, l), &|| {
                            format!("fourth p={p} ({i},{j},{k},{l})")
                        })?;
                    }
                }
            }
            check(quartic_check(&s, &t, i), &|| format!("quartic p={p} i={i}"))?;
        }
    }
    for p in odd_primes_up_to(199).into_iter().filter(|&p| p > 31) {
        let e = engine(p);
        let s = e.spectrum64();
        let t = e.tensor(false).map_err(|e| e.to_string())?;
        let pu = p as usize;
        let sample: Vec<usize> = (1..=pu).step_by(pu / 8).collect();
        for j in 1..=pu {
            for k in 1..=pu {
                check(third_moment_check(s, &t, pu, j, k), &|| {
                    format!("third p={p} ({pu},{j},{k})")
                })?;
            }
        }
        for &j in &sample {
            for &k in &sample {
                for &l in &sample {
                    check(fourth_moment_check(s, &t, pu, j, k, l), &|| {
                        format!("fourth p={p} ({pu},{j},{k},{l})")
                    })?;
                }
            }
        }
        check(quartic_check(s, &t, pu), &|| format!("quartic p={p}"))?;
    }
    Ok(format!(
        "enumerated tensors for p <= 31, spectral for p <= 199; worst residual {worst:.1e}"
    ))
}

fn bound_checks() -> Outcome {
    let mut worst_ratio = 0.0f64;
    for p in odd_primes_up_to(199) {
        let r = ciik_report(&StructureTensorP::enumerate(
            &PrimeContext::new(p).map_err(|e| e.to_string())?,
        ));
        ensure(r.pass, || format!("p = {p}: {r:?}"))?;
        worst_ratio = worst_ratio.max(r.max_c as f64 / r.bound);
    }
    Ok(format!(
        "p <= 199: max c(i,i,k) / 44 p^(2/3) = {worst_ratio:.3}; level counts below p^(1-alpha)"
    ))
}

fn truncated_log() -> Outcome {
    let mut worst = 0.0f64;
    for p in odd_primes_up_to(199) {
        let inv = inverses_mod_p(p);
        ensure((2..p).all(|u| binomial_log_identity_holds(p, u)), || {
            format!("p = {p}: binomial identity")
        })?;
        ensure(
            (1..p).all(|u| functional_log_identity_holds(p, u, &inv)),
            || format!("p = {p}: inversion identity"),
        )?;
        let table = log_level_sets(p).map_err(|e| e.to_string())?;
        let total: usize = table.level_sets.iter().map(Vec::len).sum();
        ensure(total as u64 == p - 1, || {
            format!("p = {p}: level sets cover {total}")
        })?;
        ensure(table.within_bound(), || {
            format!("p = {p}: max level {}", table.max_level())
        })?;
        worst = worst.max(table.max_level() as f64 / table.level_bound());
    }
    Ok(format!(
        "p <= 199: both identities exact, max |N_r| / 44 p^(2/3) = {worst:.3}"
    ))
}

fn benchmark_separation() -> Outcome {
    let mut primes = vec![3u64, 5, 7, 11, 13, 17, 19, 23];
    primes.extend(odd_primes_up_to(199).into_iter().filter(|&p| p >= 31));
    let r = bench_single_f(&primes, 5).map_err(|e| e.to_string())?;
    let naive = r
        .slope_over(BenchMethod::Naive, 31, 199)
        .ok_or("no naive slope")?;
    let spectral = r
        .slope_over(BenchMethod::Spectral, 31, 199)
        .ok_or("no spectral slope")?;
    let summary = format!(
        "slopes over [31, 199]: naive {naive:.2}, spectral {spectral:.2}, gap {:.2}; crossover {:?}",
        naive - spectral,
        r.crossover_p
    );
    ensure(naive - spectral >= 0.5, || summary.clone())?;
    ensure(r.crossover_observed, || {
        format!("{summary}; naive never faster")
    })?;
    Ok(summary)
}

fn g_independence() -> Outcome {
    for p in odd_primes_up_to(199) {
        let ctx = PrimeContext::new(p).map_err(|e| e.to_string())?;
        let g2 = next_primitive_root_mod_p2(p, ctx.g()).map_err(|e| e.to_string())?;
        let other = PrimeContext::with_generator(p, g2).map_err(|e| e.to_string())?;
        let f1 = SpectralEngine::new(ctx.clone(), Precision::Double)
            .fermat(1, 1, 1)
            .map_err(|e| e.to_string())?
            .f;
        let f2 = SpectralEngine::new(other, Precision::Double)
            .fermat(1, 1, 1)
            .map_err(|e| e.to_string())?
            .f;
        ensure(f1 == f2, || {
            format!("p = {p}: F = {f1} with g = {}, {f2} with g = {g2}", ctx.g())
        })?;
    }
    Ok("p <= 199: F(p; 1, 1, 1) equal under the two smallest primitive roots".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("golden-table reproduction", golden_table_reproduction),
        ("oracle equivalence", oracle_equivalence),
        ("spectrum identities", spectrum_identities),
        ("diagonalization law", diagonalization),
        ("tensor laws", tensor_laws),
        ("moment identities", moment_identities),
        ("bound checks", bound_checks),
        ("truncated-log identities", truncated_log),
        ("benchmark separation", benchmark_separation),
        ("g-independence", g_independence),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
