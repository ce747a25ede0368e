use serde::{Deserialize, Serialize};

use super::StructureTensorP;

/// Exponents used for the level counts `#{k : c(i,i,k) >= p^alpha}`.
pub const LEVEL_ALPHAS: [f64; 2] = [0.25, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub alpha: f64,
    /// Largest count over `i`.
    pub count: usize,
    /// `p^(1 - alpha)`; the count must stay strictly below it.
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiikReport {
    pub p: u64,
    /// `max_{i,k} c(i,i,k)`.
    pub max_c: u64,
    /// `44 p^(2/3)`.
    pub bound: f64,
    pub max_within_bound: bool,
    /// `sum_k c(i,i,k) = p - 2` for every `i`.
    pub diagonal_sums_ok: bool,
    pub levels: Vec<LevelCount>,
    pub pass: bool,
}

pub fn ciik_report(t: &StructureTensorP) -> CiikReport {
    let p = t.p();
    let pu = p as usize;
    let pf = p as f64;
    let rows: Vec<Vec<u64>> = (1..=pu)
        .map(|i| (1..=pu).map(|k| t.get(i, i, k)).collect())
        .collect();
    let max_c = rows.iter().flatten().copied().max().unwrap_or(0);
    let bound = 44.0 * pf.powf(2.0 / 3.0);
    let diagonal_sums_ok = rows.iter().all(|r| r.iter().sum::<u64>() == p - 2);
    let levels: Vec<LevelCount> = LEVEL_ALPHAS
        .iter()
        .map(|&alpha| {
            let threshold = pf.powf(alpha);
            let count = rows
                .iter()
                .map(|r| r.iter().filter(|&&c| c as f64 >= threshold).count())
                .max()
                .unwrap_or(0);
            let limit = pf.powf(1.0 - alpha);
            LevelCount {
                alpha,
                count,
                limit,
                pass: (count as f64) < limit,
            }
        })
        .collect();
    let max_within_bound = max_c as f64 <= bound;
    let pass = max_within_bound && diagonal_sums_ok && levels.iter().all(|l| l.pass);
    CiikReport {
        p,
        max_c,
        bound,
        max_within_bound,
        diagonal_sums_ok,
        levels,
        pass,
    }
}
