//! Counting solutions of `a x^p + b y^p = c z^p (mod p^2)` with `p` not
//! dividing `xyz`.
//!
//! With `a = g^i u`, `b = g^j v`, `c = g^k w` for `u, v, w` in `A`,
//! `F(p; a, b, c) = 1 - 2/p + p^-2 sum_l H(g^(i+l)) H(g^(j+l)) H(g^(k+l))`
//! equals `c(i, j, k)` and the solution count over `(Z/p^2Z)^3` is
//! `p^3 (p - 1) F`.

mod bounds;
mod moments;
mod table;
mod tensor;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use bounds::{ciik_report, CiikReport, LevelCount};
pub use moments::{
    fourth_moment_check, fourth_moment_correction, quartic_check, third_moment_check, MomentCheck,
};
pub use table::{fermat_table, golden_table, TableReport, TableRow};
pub use tensor::{structure_constants_naive_all, StructureTensorP};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::heilbronn::{spectrum, Spectrum};
use crate::modarith::PrimeContext;
use crate::scalar::{Precision, Real};

/// Residual above which a rounded value is not trusted.
pub const ROUNDING_THRESHOLD: f64 = 0.25;

/// Largest prime accepted by [`fermat_count_full_naive`].
pub const FULL_NAIVE_MAX_P: u64 = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermatResult {
    pub p: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub f: u64,
    /// Distance of the unrounded value from `f`; zero for exact methods.
    pub residual: f64,
    pub method: Method,
    pub solution_count: u128,
    /// Working precision of the spectral path; absent for exact counts.
    pub precision_bits: Option<u32>,
}

impl FermatResult {
    fn new(
        p: u64,
        (a, b, c): (u64, u64, u64),
        f: u64,
        residual: f64,
        method: Method,
        bits: Option<u32>,
    ) -> Self {
        let solution_count = (p as u128).pow(3) * (p as u128 - 1) * f as u128;
        FermatResult {
            p,
            a,
            b,
            c,
            f,
            residual,
            method,
            solution_count,
            precision_bits: bits,
        }
    }
}

fn check_coprime(ctx: &PrimeContext, a: u64, b: u64, c: u64) -> Result<()> {
    let p = ctx.p();
    if a.is_multiple_of(p) || b.is_multiple_of(p) || c.is_multiple_of(p) {
        return Err(Error::Divisibility { p, a, b, c });
    }
    Ok(())
}

/// Label `k` in `1..=p` of the class `X_k = g^k A` containing the unit `a`.
pub fn class_label(ctx: &PrimeContext, a: u64) -> Result<usize> {
    let p = ctx.p();
    let e = ctx
        .dlog(a % ctx.modulus())
        .ok_or_else(|| Error::InvalidInput(format!("{a} is not a unit mod {}", ctx.modulus())))?;
    Ok(match e % p {
        0 => p as usize,
        r => r as usize,
    })
}

/// `sum_l H(g^(i+l)) H(g^(j+l)) H(g^(k+l))` over `l = 1..=p`.
pub fn third_moment<T: Real>(s: &Spectrum<T>, i: i64, j: i64, k: i64) -> T {
    (1..=s.p() as i64)
        .map(|l| s.at(i + l) * s.at(j + l) * s.at(k + l))
        .sum()
}

/// Unrounded `F` from the spectrum.
pub fn fermat_f_value<T: Real>(s: &Spectrum<T>, i: usize, j: usize, k: usize) -> T {
    let p = T::from_u64(s.p()).unwrap();
    let m = third_moment(s, i as i64, j as i64, k as i64);
    T::one() - T::lit(2.0) / p + m / (p * p)
}

fn round_checked<T: Real>(value: T) -> Result<(u64, f64)> {
    let v = value.as_f64();
    let f = v.round();
    let residual = (value - T::lit(f)).abs().as_f64();
    if residual >= ROUNDING_THRESHOLD || f < 0.0 {
        return Err(Error::RoundingResidual {
            residual,
            bits: T::MANTISSA_BITS,
        });
    }
    Ok((f as u64, residual))
}

/// Spectral `F(p; a, b, c)` at the precision of `s`. Fails with
/// [`Error::RoundingResidual`] when the value is not within 0.25 of an
/// integer.
pub fn fermat_f_spectral<T: Real>(
    ctx: &PrimeContext,
    s: &Spectrum<T>,
    a: u64,
    b: u64,
    c: u64,
) -> Result<FermatResult> {
    check_coprime(ctx, a, b, c)?;
    if s.p() != ctx.p() || s.g() != ctx.g() {
        return Err(Error::InvalidInput(
            "spectrum was computed for a different context".into(),
        ));
    }
    let (i, j, k) = (
        class_label(ctx, a)?,
        class_label(ctx, b)?,
        class_label(ctx, c)?,
    );
    let (f, residual) = round_checked(fermat_f_value(s, i, j, k))?;
    Ok(FermatResult::new(
        ctx.p(),
        (a, b, c),
        f,
        residual,
        Method::Spectral,
        Some(T::MANTISSA_BITS),
    ))
}

/// A prime context with cached spectra. Starts at the requested precision
/// and retries in double-double whenever a rounding residual is too large.
pub struct SpectralEngine {
    ctx: PrimeContext,
    start: Precision,
    double: OnceLock<Spectrum<f64>>,
    extended: OnceLock<Spectrum<DoubleDouble>>,
}

impl SpectralEngine {
    pub fn new(ctx: PrimeContext, start: Precision) -> Self {
        SpectralEngine {
            ctx,
            start,
            double: OnceLock::new(),
            extended: OnceLock::new(),
        }
    }

    pub fn for_prime(p: u64) -> Result<Self> {
        Ok(Self::new(PrimeContext::new(p)?, Precision::Double))
    }

    pub fn context(&self) -> &PrimeContext {
        &self.ctx
    }

    pub fn spectrum64(&self) -> &Spectrum<f64> {
        self.double
            .get_or_init(|| spectrum(&self.ctx, None).expect("f64 meets the precision floor"))
    }

    pub fn spectrum_dd(&self) -> &Spectrum<DoubleDouble> {
        self.extended.get_or_init(|| {
            spectrum(&self.ctx, None).expect("double-double meets the precision floor")
        })
    }

    fn escalate<R>(
        &self,
        at_double: impl FnOnce(&Spectrum<f64>) -> Result<R>,
        at_extended: impl FnOnce(&Spectrum<DoubleDouble>) -> Result<R>,
    ) -> Result<R> {
        if self.start == Precision::Double {
            match at_double(self.spectrum64()) {
                Err(Error::RoundingResidual { .. }) => {}
                other => return other,
            }
        }
        match at_extended(self.spectrum_dd()) {
            Err(Error::RoundingResidual { residual, .. }) => {
                Err(Error::PrecisionEscalationFailed { residual })
            }
            other => other,
        }
    }

    pub fn fermat(&self, a: u64, b: u64, c: u64) -> Result<FermatResult> {
        self.escalate(
            |s| fermat_f_spectral(&self.ctx, s, a, b, c),
            |s| fermat_f_spectral(&self.ctx, s, a, b, c),
        )
    }

    /// All structure constants from one matrix product.
    pub fn tensor(&self, cross_check: bool) -> Result<StructureTensorP> {
        self.escalate(
            |s| StructureTensorP::spectral_all(s, cross_check),
            |s| StructureTensorP::spectral_all(s, cross_check),
        )
    }
}

/// `#{1 <= x, y, z <= p-1 : a x^p + b y^p = c z^p (mod p^2)}` from a table of
/// `l^p mod p^2`. Plain triple loop.
pub fn count_reduced_with_powers(p: u64, a: u64, b: u64, c: u64, pth: &[u64]) -> u64 {
    let m = p * p;
    let scaled =
        |coef: u64| -> Vec<u64> { (1..p).map(|l| coef % m * pth[l as usize] % m).collect() };
    let (ax, by, cz) = (scaled(a), scaled(b), scaled(c));
    let mut count = 0u64;
    for &u in &ax {
        for &v in &by {
            let lhs = (u + v) % m;
            for &w in &cz {
                count += (lhs == w) as u64;
            }
        }
    }
    count
}

pub fn fermat_count_naive_reduced(ctx: &PrimeContext, a: u64, b: u64, c: u64) -> Result<u64> {
    check_coprime(ctx, a, b, c)?;
    Ok(count_reduced_with_powers(
        ctx.p(),
        a,
        b,
        c,
        ctx.pth_powers(),
    ))
}

/// Exhaustive count over all `(x, y, z)` in `(Z/p^2Z)^3` with `p` not dividing
/// `xyz`. Only for `p <= 11`.
pub fn fermat_count_full_naive(ctx: &PrimeContext, a: u64, b: u64, c: u64) -> Result<u128> {
    check_coprime(ctx, a, b, c)?;
    let p = ctx.p();
    if p > FULL_NAIVE_MAX_P {
        return Err(Error::Scale {
            p,
            max: FULL_NAIVE_MAX_P,
        });
    }
    let m = p * p;
    let units: Vec<u64> = (1..m)
        .filter(|x| x % p != 0)
        .map(|x| ctx.pth_power(x % p))
        .collect();
    let scaled = |coef: u64| -> Vec<u64> { units.iter().map(|&w| coef % m * w % m).collect() };
    let (ax, by, cz) = (scaled(a), scaled(b), scaled(c));
    let mut hits = vec![0u128; m as usize];
    for &w in &cz {
        hits[w as usize] += 1;
    }
    let mut count = 0u128;
    for &u in &ax {
        for &v in &by {
            count += hits[((u + v) % m) as usize];
        }
    }
    Ok(count)
}

/// `F` from the reduced exhaustive count.
pub fn fermat_f_naive(ctx: &PrimeContext, a: u64, b: u64, c: u64) -> Result<FermatResult> {
    let count = fermat_count_naive_reduced(ctx, a, b, c)?;
    let p = ctx.p();
    if count % (p - 1) != 0 {
        return Err(Error::Mismatch(format!(
            "reduced count {count} is not a multiple of p - 1"
        )));
    }
    Ok(FermatResult::new(
        p,
        (a, b, c),
        count / (p - 1),
        0.0,
        Method::Naive,
        None,
    ))
}
