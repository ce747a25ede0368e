//! Heilbronn sums `H_p(a) = sum_{l=1}^{p-1} e(a l^p / p^2)` and the
//! supercharacter table they populate on `Z/p^2Z`.
//!
//! Classes use the labels `1..=p+2`: `X_k = g^k A` for `k = 1..=p` (so
//! `X_p = A`), `X_{p+1}` the nonzero multiples of `p`, and `X_{p+2} = {0}`.
//! Matrix index `label - 1`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::modarith::{mul_mod, PrimeContext};
use crate::scalar::Real;
use crate::sctheory::{build_u, supercharacter_table, SuperclassPartition};

/// A value with a certified absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub err_bound: f64,
}

/// Certified bound on `|H~ - H|` for one Heilbronn sum evaluated in `T`.
///
/// `(p-1)/2` phases are summed (the terms for `l` and `p - l` coincide) and
/// doubled. Each phase is off by at most `PHASE_ULPS` units of roundoff and
/// recursive summation of `m` terms of modulus `<= 1` adds at most
/// `1.01 m^2 u`.
pub fn certified_error_bound<T: Real>(p: u64) -> f64 {
    let m = ((p - 1) / 2) as f64;
    2.0 * T::unit_roundoff() * m * (T::PHASE_ULPS + 1.01 * m)
}

/// Ceiling any certified bound must respect at a given working precision:
/// `(p-1) 2^-(bits - ceil(4 log2 p))`.
pub fn error_bound_ceiling(p: u64, bits: u32) -> f64 {
    let guard = (4.0 * (p as f64).log2()).ceil();
    (p - 1) as f64 * (guard - bits as f64).exp2()
}

fn half_sum<T: Real>(p: u64, a: u64, pth: &[u64]) -> T {
    let m = p * p;
    let a = a % m;
    let mut acc = T::zero();
    for l in 1..=(p - 1) / 2 {
        acc += T::cos_turn(mul_mod(a, pth[l as usize], m), m);
    }
    acc + acc
}

/// `H_p(a)` in the working precision of `T` with its certified error bound.
/// Fails if `T` carries fewer than 53 bits or if the bound exceeds `cap`.
pub fn heilbronn_sum<T: Real>(ctx: &PrimeContext, a: u64, cap: Option<f64>) -> Result<Estimate<T>> {
    let p = ctx.p();
    check_precision::<T>(p, cap)?;
    Ok(Estimate {
        value: half_sum(p, a, ctx.pth_powers()),
        err_bound: certified_error_bound::<T>(p),
    })
}

fn check_precision<T: Real>(p: u64, cap: Option<f64>) -> Result<()> {
    if T::MANTISSA_BITS < 53 {
        return Err(Error::InvalidInput(format!(
            "Heilbronn sums need at least 53 bits, got {}",
            T::MANTISSA_BITS
        )));
    }
    let bound = certified_error_bound::<T>(p);
    match cap {
        Some(cap) if bound > cap => Err(Error::PrecisionTooLow {
            bound,
            cap,
            bits: T::MANTISSA_BITS,
        }),
        _ => Ok(()),
    }
}

/// `(H_p(g^1), ..., H_p(g^p))` with a uniform error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    p: u64,
    g: u64,
    values: Vec<T>,
    err_bound: f64,
}

impl<T: Real> Spectrum<T> {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn err_bound(&self) -> f64 {
        self.err_bound
    }

    pub fn precision_bits(&self) -> u32 {
        T::MANTISSA_BITS
    }

    /// Values for `l = 1..=p` in order.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `H_p(g^k)` for any integer `k`; periodic mod `p`.
    pub fn at(&self, k: i64) -> T {
        self.values[(k - 1).rem_euclid(self.p as i64) as usize]
    }

    pub fn to_record(&self) -> SpectrumRecord {
        SpectrumRecord {
            p: self.p,
            g: self.g,
            precision_bits: T::MANTISSA_BITS,
            err_bound: self.err_bound,
            rows: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| SpectrumRow {
                    ell: i as u64 + 1,
                    value: v.as_f64(),
                    err_bound: self.err_bound,
                })
                .collect(),
        }
    }
}

/// Serializable form of a [`Spectrum`]; values are rounded to `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub p: u64,
    pub g: u64,
    pub precision_bits: u32,
    pub err_bound: f64,
    pub rows: Vec<SpectrumRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub ell: u64,
    pub value: f64,
    pub err_bound: f64,
}

impl SpectrumRecord {
    /// CSV with header `ell,value,err_bound`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum record serializes")
    }
}

/// Spectrum from a root and a precomputed `l^p` table, without validation.
pub fn spectrum_from_powers<T: Real>(p: u64, g: u64, pth: &[u64]) -> Spectrum<T> {
    let m = p * p;
    let mut values = Vec::with_capacity(p as usize);
    let mut a = 1u64;
    for _ in 1..=p {
        a = mul_mod(a, g, m);
        values.push(half_sum(p, a, pth));
    }
    Spectrum {
        p,
        g,
        values,
        err_bound: certified_error_bound::<T>(p),
    }
}

pub fn spectrum<T: Real>(ctx: &PrimeContext, cap: Option<f64>) -> Result<Spectrum<T>> {
    check_precision::<T>(ctx.p(), cap)?;
    Ok(spectrum_from_powers(ctx.p(), ctx.g(), ctx.pth_powers()))
}

/// `sum_l H(g^l) H(g^(l+i))`.
pub fn shifted_dot<T: Real>(s: &Spectrum<T>, shift: i64) -> T {
    (1..=s.p as i64).map(|l| s.at(l) * s.at(l + shift)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub p: u64,
    /// `|sum H|`
    pub sum_residual: f64,
    /// `|sum H^2 - p(p-1)|`
    pub norm_residual: f64,
    /// `max_{i != 0 mod p} |sum H(g^l) H(g^(l+i)) + p|`
    pub dot_residual: f64,
    pub sum_tolerance: f64,
    pub norm_tolerance: f64,
    pub dot_tolerance: f64,
    pub pass: bool,
}

pub fn verify_spectrum_identities<T: Real>(s: &Spectrum<T>) -> IdentityReport {
    let p = s.p;
    let pf = p as f64;
    let big = (p - 1) as f64;
    let e = s.err_bound;
    let u = T::unit_roundoff();

    let sum: T = s.values.iter().copied().sum();
    let norm = shifted_dot(s, 0);
    let target_norm = T::from_u64(p * (p - 1)).unwrap();
    let target_dot = T::from_u64(p).unwrap();
    let dot_residual = (1..p as i64)
        .map(|i| (shifted_dot(s, i) + target_dot).abs().as_f64())
        .fold(0.0, f64::max);

    let sum_tolerance = pf * e + pf * pf * big * u;
    let product_tolerance = pf * (2.0 * big + e) * e + (pf + 1.0) * pf * big * big * u;
    let report = IdentityReport {
        p,
        sum_residual: sum.abs().as_f64(),
        norm_residual: (norm - target_norm).abs().as_f64(),
        dot_residual,
        sum_tolerance,
        norm_tolerance: product_tolerance,
        dot_tolerance: product_tolerance,
        pass: false,
    };
    IdentityReport {
        pass: report.sum_residual <= sum_tolerance
            && report.norm_residual <= product_tolerance
            && report.dot_residual <= product_tolerance,
        ..report
    }
}

/// `A = {1^p, ..., (p-1)^p}` mod `p^2`, sorted.
pub fn pth_power_subgroup(ctx: &PrimeContext) -> Vec<u64> {
    let mut a: Vec<u64> = ctx.pth_powers()[1..].to_vec();
    a.sort_unstable();
    a
}

/// The labeled orbit partition `X_1, ..., X_{p+2}`.
pub fn heilbronn_partition(ctx: &PrimeContext) -> SuperclassPartition {
    let p = ctx.p();
    let m = ctx.modulus();
    let a = pth_power_subgroup(ctx);
    let mut classes: Vec<Vec<u64>> = (1..=p as i64)
        .map(|k| {
            let gk = ctx.g_pow(k);
            a.iter().map(|&x| mul_mod(gk, x, m)).collect()
        })
        .collect();
    classes.push((1..p).map(|r| r * p).collect());
    classes.push(vec![0]);
    SuperclassPartition::from_classes(m, classes).expect("labeled classes partition Z/p^2Z")
}

/// Supercharacter table and unitary matrix for one prime.
#[derive(Debug, Clone)]
pub struct HeilbronnTable<T> {
    pub partition: SuperclassPartition,
    pub sigma: Matrix<T>,
    pub u: Matrix<T>,
}

/// Table entries from the spectrum: a Hankel block `H(g^(i+j))` bordered by
/// the `-1`, `p-1` and all-ones rows and columns.
pub fn sigma_matrix<T: Real>(s: &Spectrum<T>) -> Matrix<T> {
    let p = s.p as usize;
    let n = p + 2;
    let minus_one = -T::one();
    let pm1 = T::from_u64(s.p - 1).unwrap();
    Matrix::from_fn(n, n, |i, j| {
        let (li, lj) = (i + 1, j + 1);
        match (li <= p, lj <= p) {
            (true, true) => s.at((li + lj) as i64),
            (true, false) => {
                if lj == p + 1 {
                    minus_one
                } else {
                    pm1
                }
            }
            (false, _) if li == p + 2 => T::one(),
            (false, true) => minus_one,
            (false, false) => pm1,
        }
    })
}

/// `U = (1/p) [[H(g^(i+j)), -1, sqrt(p-1)], [-1, p-1, sqrt(p-1)], [sqrt(p-1), sqrt(p-1), 1]]`.
pub fn u_matrix<T: Real>(s: &Spectrum<T>) -> Matrix<T> {
    let p = s.p as usize;
    let n = p + 2;
    let pf = T::from_u64(s.p).unwrap();
    let root = T::from_u64(s.p - 1).unwrap().sqrt();
    let sigma = sigma_matrix(s);
    Matrix::from_fn(n, n, |i, j| {
        let raw = if i == n - 1 && j == n - 1 {
            T::one()
        } else if i == n - 1 || j == n - 1 {
            root
        } else {
            sigma[(i, j)]
        };
        raw / pf
    })
}

impl<T: Real> HeilbronnTable<T> {
    /// Pattern assembly only; no cross-check against the generic engine.
    pub fn assemble(ctx: &PrimeContext, s: &Spectrum<T>) -> Self {
        HeilbronnTable {
            partition: heilbronn_partition(ctx),
            sigma: sigma_matrix(s),
            u: u_matrix(s),
        }
    }

    /// `D_label` as the diagonal vector (row `label - 1` of the table).
    pub fn d(&self, label: usize) -> Vec<T> {
        self.sigma.row(label - 1).to_vec()
    }
}

/// Assembles the table and checks it against the generic supercharacter
/// engine run on the same labeled partition.
pub fn heilbronn_table<T: Real>(ctx: &PrimeContext, s: &Spectrum<T>) -> Result<HeilbronnTable<T>> {
    if s.p != ctx.p() || s.g != ctx.g() {
        return Err(Error::InvalidInput(
            "spectrum was computed for a different context".into(),
        ));
    }
    let table = HeilbronnTable::assemble(ctx, s);
    let generic = build_u::<T>(&table.partition);
    let imag = generic.sigma.max_imag();
    let sigma_diff = generic.sigma.real_part().max_abs_diff(&table.sigma);
    let u_diff = generic.u.real_part().max_abs_diff(&table.u);
    if imag >= 1e-10 || sigma_diff >= 1e-8 || u_diff >= 1e-8 {
        return Err(Error::Mismatch(format!(
            "generic engine disagrees: imag {imag:e}, sigma {sigma_diff:e}, U {u_diff:e}"
        )));
    }
    Ok(table)
}

/// Max deviation between the spectrum and the generic engine's
/// `sigma_p(X_l)` on the labeled classes.
pub fn spectrum_vs_generic<T: Real>(ctx: &PrimeContext, s: &Spectrum<T>) -> f64 {
    let sigma = supercharacter_table::<T>(&heilbronn_partition(ctx));
    let p = ctx.p() as usize;
    (1..=p)
        .map(|l| (sigma[(p - 1, l - 1)].re - s.at(l as i64)).abs().as_f64())
        .fold(0.0, f64::max)
}
