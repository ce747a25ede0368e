//! Invariant suites for a single prime.
//!
//! `Quick` runs only spectral checks and scales to `p` around 1000; `Full`
//! adds the enumeration and brute-force oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermat::{
    ciik_report, fermat_count_full_naive, fermat_count_naive_reduced, fourth_moment_check,
    quartic_check, third_moment_check, SpectralEngine, StructureTensorP, FULL_NAIVE_MAX_P,
};
use crate::heilbronn::{heilbronn_table, sigma_matrix, u_matrix, verify_spectrum_identities};
use crate::modarith::{
    binomial_log_identity_holds, functional_log_identity_holds, inverses_mod_p, log_level_sets,
    next_primitive_root_mod_p2, PrimeContext,
};
use crate::scalar::Precision;

/// Largest `p` for which `Full` compares every class pair against the
/// reduced naive count.
pub const ORACLE_ALL_PAIRS_MAX_P: u64 = 61;
/// Largest `p` for which `Full` runs any naive count at all.
pub const ORACLE_MAX_P: u64 = 199;
/// Largest `p` for which `Full` builds the generic table (quadratic in `p^2`).
pub const GENERIC_MAX_P: u64 = 101;
/// Largest `p` for which every fourth-moment quadruple is checked.
pub const FOURTH_ALL_MAX_P: u64 = 31;

pub const UNITARITY_TOL: f64 = 1e-8;
pub const DIAGONALIZATION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Depth {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub p: u64,
    pub depth: Depth,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| !s.pass)
    }
}

struct Runner {
    suites: Vec<SuiteResult>,
}

impl Runner {
    fn run(&mut self, name: &str, check: impl FnOnce() -> Result<(bool, String)>) {
        let (pass, detail) = check().unwrap_or_else(|e| (false, e.to_string()));
        self.suites.push(SuiteResult {
            name: name.to_string(),
            pass,
            detail,
        });
    }
}

/// About `n` evenly spaced labels in `1..=p`, always including `p`.
fn sample_labels(p: usize, n: usize) -> Vec<usize> {
    let step = (p / n).max(1);
    let mut v: Vec<usize> = (1..=p).step_by(step).collect();
    if v.last() != Some(&p) {
        v.push(p);
    }
    v
}

pub fn verify_prime(p: u64, depth: Depth) -> Result<VerifyReport> {
    let engine = SpectralEngine::new(PrimeContext::new(p)?, Precision::Double);
    let ctx = engine.context();
    let s = engine.spectrum64();
    let pu = p as usize;
    let full = depth == Depth::Full;
    let mut r = Runner { suites: Vec::new() };

    r.run("spectrum identities", || {
        let rep = verify_spectrum_identities(s);
        Ok((
            rep.pass,
            format!(
                "sum {:.1e}, norm {:.1e}, shifted {:.1e}",
                rep.sum_residual, rep.norm_residual, rep.dot_residual
            ),
        ))
    });

    let u = u_matrix(s);
    let sigma = sigma_matrix(s);
    r.run("unitarity", || {
        let (orth, sym) = (u.orthogonality_residual(), u.symmetry_residual());
        Ok((
            orth < UNITARITY_TOL && sym < UNITARITY_TOL,
            format!("U U^T - I {orth:.1e}, U - U^T {sym:.1e}"),
        ))
    });

    let tensor = engine.tensor(full);
    r.run("spectral tensor", || match &tensor {
        Ok(_) => Ok((true, "all entries within 0.25 of an integer".into())),
        Err(e) => Ok((false, e.to_string())),
    });
    let tensor = tensor?;

    r.run("diagonalization", || {
        let labels: Vec<usize> = if full {
            (1..=pu + 2).collect()
        } else {
            vec![pu, pu + 1, pu + 2]
        };
        let worst = labels
            .iter()
            .map(|&i| {
                tensor
                    .t_matrix::<f64>(i)
                    .matmul(&u)
                    .max_abs_diff(&u.scale_columns(sigma.row(i - 1)))
            })
            .fold(0.0, f64::max);
        Ok((
            worst < DIAGONALIZATION_TOL,
            format!(
                "max |T_i U - U D_i| {worst:.1e} over {} values of i",
                labels.len()
            ),
        ))
    });

    r.run("tensor laws", || {
        let labels = if full { (1..=pu).collect() } else { vec![pu] };
        if let Some(t) = tensor.permutation_symmetry_violation_for(labels) {
            return Ok((false, format!("permutation symmetry fails at {t:?}")));
        }
        if let Some(t) = tensor.row_sum_violation() {
            return Ok((false, format!("row sum fails at {t:?}")));
        }
        if let Some(i) = tensor.diagonal_sums().iter().position(|&x| x != p - 2) {
            return Ok((false, format!("diagonal sum fails at i = {}", i + 1)));
        }
        Ok((true, "symmetry, row sums, diagonal sums".into()))
    });

    r.run("moments", || {
        let js = if full && pu <= ORACLE_MAX_P as usize {
            (1..=pu).collect()
        } else {
            sample_labels(pu, 12)
        };
        let mut worst = 0.0f64;
        let mut checks = Vec::new();
        for &j in &js {
            for &k in &js {
                checks.push(third_moment_check(s, &tensor, pu, j, k));
            }
        }
        let (is, rest) = if full && p <= FOURTH_ALL_MAX_P {
            ((1..=pu).collect(), (1..=pu).collect())
        } else {
            (vec![pu], sample_labels(pu, 4))
        };
        let mut quads = Vec::new();
        for &i in &is {
            for &j in &rest {
                for &k in &rest {
                    for &l in &rest {
                        quads.push([i, j, k, l]);
                    }
                }
            }
        }
        for [i, j, k, l] in quads {
            checks.push(fourth_moment_check(s, &tensor, i, j, k, l));
        }
        checks.push(quartic_check(s, &tensor, pu));
        let mut pass = true;
        for c in &checks {
            worst = worst.max(c.residual);
            pass &= c.pass;
        }
        Ok((
            pass,
            format!("{} identities, worst residual {worst:.1e}", checks.len()),
        ))
    });

    r.run("c(i,i,k) bounds", || {
        let rep = ciik_report(&tensor);
        let levels: Vec<String> = rep
            .levels
            .iter()
            .map(|l| format!("alpha {}: {} < {:.2}", l.alpha, l.count, l.limit))
            .collect();
        Ok((
            rep.pass,
            format!(
                "max {} <= {:.1}; {}",
                rep.max_c,
                rep.bound,
                levels.join(", ")
            ),
        ))
    });

    r.run("truncated log", || {
        let inv = inverses_mod_p(p);
        let bad_binomial = (2..p).find(|&u| !binomial_log_identity_holds(p, u));
        let bad_functional = (1..p).find(|&u| !functional_log_identity_holds(p, u, &inv));
        let table = log_level_sets(p)?;
        let total: usize = table.level_sets.iter().map(Vec::len).sum();
        let pass = bad_binomial.is_none()
            && bad_functional.is_none()
            && total as u64 == p - 1
            && table.within_bound();
        Ok((
            pass,
            format!(
                "max |N_r| = {} <= {:.1}",
                table.max_level(),
                table.level_bound()
            ),
        ))
    });

    r.run("generator independence", || {
        let g2 = next_primitive_root_mod_p2(p, ctx.g())?;
        let other = SpectralEngine::new(PrimeContext::with_generator(p, g2)?, Precision::Double);
        let (f1, f2) = (engine.fermat(1, 1, 1)?.f, other.fermat(1, 1, 1)?.f);
        Ok((
            f1 == f2,
            format!("F = {f1} with g = {}, F = {f2} with g = {g2}", ctx.g()),
        ))
    });

    if full {
        r.run("enumeration oracle", || {
            let e = StructureTensorP::enumerate(ctx);
            Ok((
                same_values(&e, &tensor),
                "spectral tensor equals enumeration".into(),
            ))
        });

        r.run("counting oracle", || {
            if p > ORACLE_MAX_P {
                return Ok((true, format!("skipped above p = {ORACLE_MAX_P}")));
            }
            let labels = if p <= ORACLE_ALL_PAIRS_MAX_P {
                (1..=pu).collect()
            } else {
                sample_labels(pu, 6)
            };
            for &j in &labels {
                for &k in &labels {
                    let (b, c) = (ctx.g_pow(j as i64), ctx.g_pow(k as i64));
                    let naive = fermat_count_naive_reduced(ctx, 1, b, c)?;
                    let f = engine.fermat(1, b, c)?.f;
                    if naive != (p - 1) * f {
                        return Ok((false, format!("(p, {j}, {k}): naive {naive}, spectral {f}")));
                    }
                }
            }
            let mut detail = format!("{} class pairs", labels.len().pow(2));
            if p <= FULL_NAIVE_MAX_P {
                let full_count = fermat_count_full_naive(ctx, 1, 1, 1)?;
                let expected = engine.fermat(1, 1, 1)?.solution_count;
                if full_count != expected {
                    return Ok((
                        false,
                        format!("full count {full_count}, expected {expected}"),
                    ));
                }
                detail.push_str(", full count over (Z/p^2Z)^3");
            }
            Ok((true, detail))
        });

        r.run("generic engine", || {
            if p > GENERIC_MAX_P {
                return Ok((true, format!("skipped above p = {GENERIC_MAX_P}")));
            }
            match heilbronn_table(ctx, s) {
                Ok(_) => Ok((true, "labeled table equals the generic build".into())),
                Err(Error::Mismatch(m)) => Ok((false, m)),
                Err(e) => Err(e),
            }
        });
    }

    let pass = r.suites.iter().all(|s| s.pass);
    Ok(VerifyReport {
        p,
        depth,
        suites: r.suites,
        pass,
    })
}

fn same_values(a: &StructureTensorP, b: &StructureTensorP) -> bool {
    let p = a.p() as usize;
    a.p() == b.p() && (1..=p).all(|j| (1..=p).all(|k| a.get(p, j, k) == b.get(p, j, k)))
}
