use serde::{Deserialize, Serialize};

use crate::heilbronn::Spectrum;
use crate::scalar::Real;

use super::{third_moment, StructureTensorP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl MomentCheck {
    fn new(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        MomentCheck {
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

/// Bound on the error of a `p`-term sum of `d`-fold products of spectrum
/// entries: perturbation of each factor plus rounding of products and sum.
fn product_sum_tolerance<T: Real>(s: &Spectrum<T>, d: i32) -> f64 {
    let p = s.p() as f64;
    let big = p - 1.0;
    let e = s.err_bound();
    let perturb = (big + e).powi(d) - big.powi(d);
    p * perturb + (p + d as f64) * p * big.powi(d) * T::unit_roundoff() * 1.01
}

/// `sum_l H(g^(i+l)) H(g^(j+l)) H(g^(k+l)) = p^2 (c(i,j,k) - 1) + 2p`.
pub fn third_moment_check<T: Real>(
    s: &Spectrum<T>,
    t: &StructureTensorP,
    i: usize,
    j: usize,
    k: usize,
) -> MomentCheck {
    let p = s.p() as f64;
    let lhs = third_moment(s, i as i64, j as i64, k as i64).as_f64();
    let rhs = p * p * (t.get(i, j, k) as f64 - 1.0) + 2.0 * p;
    MomentCheck::new(lhs, rhs, product_sum_tolerance(s, 3))
}

/// Constant added to the quartic spectral sum: `-2p^2 + 3p` when `i = k`
/// and `j = l`, `p^3 - 4p^2 + 3p` when `i != k` and `j != l`, and
/// `p^3 - 3p^2 + 3p` when exactly one of the pairs coincides.
pub fn fourth_moment_correction(p: u64, i: usize, j: usize, k: usize, l: usize) -> i128 {
    let p = p as i128;
    match (i == k, j == l) {
        (true, true) => -2 * p * p + 3 * p,
        (false, false) => p * p * p - 4 * p * p + 3 * p,
        _ => p * p * p - 3 * p * p + 3 * p,
    }
}

/// `p^2 sum_r c(i,k,r) c(j,l,r) = sum_r H(g^(i+r)) H(g^(j+r)) H(g^(k+r)) H(g^(l+r))
/// + correction`, sums over `r = 1..=p`.
pub fn fourth_moment_check<T: Real>(
    s: &Spectrum<T>,
    t: &StructureTensorP,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> MomentCheck {
    let pu = s.p() as usize;
    let p2 = (s.p() * s.p()) as i128;
    let exact: i128 = (1..=pu)
        .map(|r| t.get(i, k, r) as i128 * t.get(j, l, r) as i128)
        .sum();
    let lhs = (p2 * exact) as f64;
    let quartic: T = (1..=pu as i64)
        .map(|r| s.at(i as i64 + r) * s.at(j as i64 + r) * s.at(k as i64 + r) * s.at(l as i64 + r))
        .sum();
    let rhs = quartic.as_f64() + fourth_moment_correction(s.p(), i, j, k, l) as f64;
    MomentCheck::new(lhs, rhs, product_sum_tolerance(s, 4))
}

/// `sum_l H(g^l)^4 = p^2 sum_l c(i,i,l)^2 + 2p^2 - 3p`.
pub fn quartic_check<T: Real>(s: &Spectrum<T>, t: &StructureTensorP, i: usize) -> MomentCheck {
    let p = s.p() as i128;
    let lhs: T = s.values().iter().map(|&h| h * h * h * h).sum();
    let squares: i128 = (1..=s.p() as usize)
        .map(|l| (t.get(i, i, l) as i128).pow(2))
        .sum();
    let rhs = p * p * squares + 2 * p * p - 3 * p;
    MomentCheck::new(lhs.as_f64(), rhs as f64, product_sum_tolerance(s, 4))
}
