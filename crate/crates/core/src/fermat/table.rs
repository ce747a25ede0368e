use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::modarith::{odd_primes_up_to, PrimeContext};
use crate::scalar::Precision;

use super::SpectralEngine;

const GOLDEN_CSV: &str = include_str!("../../data/golden_f.csv");

/// The 174 published `(p, F(p; 1, 1, 1))` pairs for `3 <= p <= 1039`.
pub fn golden_table() -> Vec<(u64, u64)> {
    let mut reader = csv::Reader::from_reader(GOLDEN_CSV.as_bytes());
    reader
        .deserialize()
        .map(|row| row.expect("golden fixture is well formed"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub p: u64,
    #[serde(rename = "F")]
    pub f: u64,
    /// Published value, if `p` is in the fixture.
    pub golden: Option<u64>,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: Vec<TableRow>,
    pub all_match: bool,
}

impl TableReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(|r| !r.matches)
    }
}

/// `F(p; 1, 1, 1)` for every odd prime `p <= p_max`, spectrally, compared
/// with the golden fixture. Primes are processed on the current rayon pool.
pub fn fermat_table(p_max: u64, start: Precision) -> Result<TableReport> {
    let golden = golden_table();
    let rows = odd_primes_up_to(p_max)
        .into_par_iter()
        .map(|p| {
            let f = SpectralEngine::new(PrimeContext::new(p)?, start)
                .fermat(1, 1, 1)?
                .f;
            let expected = golden.iter().find(|&&(q, _)| q == p).map(|&(_, f)| f);
            Ok(TableRow {
                p,
                f,
                golden: expected,
                matches: expected.is_none_or(|g| g == f),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_match = rows.iter().all(|r| r.matches);
    Ok(TableReport { rows, all_match })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let g = golden_table();
        assert_eq!(g.len(), 174);
        assert_eq!(g[0], (3, 0));
        assert_eq!(g[2], (7, 2));
        assert_eq!(g[173], (1039, 8));
        assert!(g.contains(&(59, 12)) && g.contains(&(701, 12)));
        assert_eq!(
            g.iter().map(|r| r.0).collect::<Vec<_>>(),
            odd_primes_up_to(1039)
        );
    }

    #[test]
    fn small_table() {
        let r = fermat_table(100, Precision::Double).unwrap();
        assert_eq!(r.rows.len(), 24);
        assert!(r.all_match);
        assert!(r.rows.iter().any(|row| row.p == 59 && row.f == 12));
        let one = fermat_table(3, Precision::DoubleDouble).unwrap();
        assert_eq!(
            one.rows,
            vec![TableRow {
                p: 3,
                f: 0,
                golden: Some(0),
                matches: true
            }]
        );
    }
}
