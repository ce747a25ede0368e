use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heilbronn::{sigma_matrix, u_matrix, Spectrum};
use crate::matrix::Matrix;
use crate::modarith::PrimeContext;
use crate::scalar::Real;
use crate::sctheory::{Origin, StructureTensor};

use super::{class_label, ROUNDING_THRESHOLD};

/// Structure constants `c(i, j, k)` for the labels `1..=p+2`.
///
/// Only `c(p, j, k)` for `j, k <= p` is stored; other unit-class entries
/// follow from `c(i, j, k) = c(p, j - i, k - i)` and the border classes
/// `X_{p+1}`, `X_{p+2}` have closed forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureTensorP {
    p: u64,
    /// `base[(j mod p) * p + (k mod p)] = c(p, j, k)`.
    base: Vec<u64>,
    origin: Origin,
}

impl StructureTensorP {
    fn from_base(p: u64, base: Vec<u64>, origin: Origin) -> Self {
        StructureTensorP { p, base, origin }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    fn unit(&self, i: usize, j: usize, k: usize) -> u64 {
        let p = self.p as usize;
        let (j, k) = ((j + p - i % p) % p, (k + p - i % p) % p);
        self.base[j * p + k]
    }

    /// `c(i, j, k)` for labels in `1..=p+2`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        let p = self.p as usize;
        let (zero, mult) = (p + 2, p + 1);
        assert!((1..=zero).contains(&i) && (1..=zero).contains(&j) && (1..=zero).contains(&k));
        // x + y is symmetric, so put any border class second
        let (i, j) = if i > p && j <= p { (j, i) } else { (i, j) };
        let b = |cond: bool| cond as u64;
        if i == zero {
            return b(j == k);
        }
        if j == zero {
            return b(i == k);
        }
        match (i <= p, j <= p, k) {
            (true, true, k) if k <= p => self.unit(i, j, k),
            (true, true, k) if k == mult => b(i != j),
            (true, true, _) => (self.p - 1) * b(i == j),
            (true, false, k) => b(k <= p && k != i),
            (false, false, k) if k <= p => 0,
            (false, false, k) if k == mult => self.p - 2,
            (false, false, _) => self.p - 1,
            (false, true, _) => unreachable!(),
        }
    }

    /// `O(p^2)` count: for `x` in `A = X_p` and each representative
    /// `z = g^k`, the class of `z - x` gives one unit of `c(p, j, k)`.
    pub fn enumerate(ctx: &PrimeContext) -> Self {
        let p = ctx.p();
        let m = ctx.modulus();
        let mut base = vec![0u64; (p * p) as usize];
        let a: Vec<u64> = ctx.pth_powers()[1..].to_vec();
        for k in 1..=p {
            let z = ctx.g_pow(k as i64);
            for &x in &a {
                let y = (z + m - x) % m;
                if !y.is_multiple_of(p) {
                    let j = class_label(ctx, y).expect("unit") as u64;
                    base[((j % p) * p + k % p) as usize] += 1;
                }
            }
        }
        Self::from_base(p, base, Origin::Enumeration)
    }

    /// Restriction of a generic tensor built on the labeled partition
    /// (class index `label - 1`).
    pub fn from_generic(p: u64, t: &StructureTensor) -> Self {
        let pu = p as usize;
        let mut base = vec![0u64; pu * pu];
        for j in 1..=pu {
            for k in 1..=pu {
                base[(j % pu) * pu + k % pu] = t.get(pu - 1, j - 1, k - 1);
            }
        }
        Self::from_base(p, base, t.origin())
    }

    /// All constants from `T_p = U D_p U`, one classical matrix product.
    /// With `cross_check`, `T_1` is computed as well and must agree with the
    /// shifted values.
    pub fn spectral_all<T: Real>(s: &Spectrum<T>, cross_check: bool) -> Result<Self> {
        let p = s.p() as usize;
        let u = u_matrix(s);
        let sigma = sigma_matrix(s);
        let rounded = |label: usize| -> Result<Vec<u64>> {
            let t = u.scale_columns(sigma.row(label - 1)).matmul(&u);
            let mut out = vec![0u64; p * p];
            for j in 1..=p {
                for k in 1..=p {
                    let v = t[(j - 1, k - 1)];
                    let r = v.as_f64().round();
                    let residual = (v - T::lit(r)).abs().as_f64();
                    if residual >= ROUNDING_THRESHOLD || r < 0.0 {
                        return Err(Error::RoundingResidual {
                            residual,
                            bits: T::MANTISSA_BITS,
                        });
                    }
                    out[(j - 1) * p + k - 1] = r as u64;
                }
            }
            Ok(out)
        };
        let tp = rounded(p)?;
        let mut base = vec![0u64; p * p];
        for j in 1..=p {
            for k in 1..=p {
                base[(j % p) * p + k % p] = tp[(j - 1) * p + k - 1];
            }
        }
        let tensor = Self::from_base(s.p(), base, Origin::Spectral);
        if cross_check {
            let t1 = rounded(1)?;
            for j in 1..=p {
                for k in 1..=p {
                    if t1[(j - 1) * p + k - 1] != tensor.get(1, j, k) {
                        return Err(Error::Mismatch(format!(
                            "shift invariance fails at (1, {j}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(tensor)
    }

    /// First failing permutation of `(i, j, k)` over unit labels.
    pub fn permutation_symmetry_violation(&self) -> Option<(usize, usize, usize)> {
        self.permutation_symmetry_violation_for(1..=self.p as usize)
    }

    /// As [`Self::permutation_symmetry_violation`] with `i` restricted.
    pub fn permutation_symmetry_violation_for(
        &self,
        labels: impl IntoIterator<Item = usize>,
    ) -> Option<(usize, usize, usize)> {
        let p = self.p as usize;
        for i in labels {
            for j in 1..=p {
                for k in 1..=p {
                    let c = self.get(i, j, k);
                    let perms = [(i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)];
                    if perms.iter().any(|&(a, b, d)| self.get(a, b, d) != c) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// `sum_{k=1}^{p+2} c(i, j, k) = p - 1` for `i != j`.
    pub fn row_sum_violation(&self) -> Option<(usize, usize)> {
        let p = self.p as usize;
        (1..=p)
            .flat_map(|i| (1..=p).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .find(|&(i, j)| (1..=p + 2).map(|k| self.get(i, j, k)).sum::<u64>() != self.p - 1)
    }

    /// `sum_{k=1}^p c(i, i, k)` for each `i`.
    pub fn diagonal_sums(&self) -> Vec<u64> {
        let p = self.p as usize;
        (1..=p)
            .map(|i| (1..=p).map(|k| self.get(i, i, k)).sum())
            .collect()
    }

    /// `[T_i]_{j,k} = c(i,j,k) sqrt(|X_k| / |X_j|)` over all `p + 2` labels.
    pub fn t_matrix<T: Real>(&self, i: usize) -> Matrix<T> {
        let n = self.p as usize + 2;
        let root = T::from_u64(self.p - 1).unwrap().sqrt();
        Matrix::from_fn(n, n, |j, k| {
            let c = T::from_u64(self.get(i, j + 1, k + 1)).unwrap();
            match (j + 1 == n, k + 1 == n) {
                (false, true) => c / root,
                (true, false) => c * root,
                _ => c,
            }
        })
    }

    /// Compares every label triple against a generic tensor on the labeled
    /// partition.
    pub fn matches_generic(&self, t: &StructureTensor) -> bool {
        let n = self.p as usize + 2;
        t.n_classes() == n
            && (1..=n).all(|i| {
                (1..=n).all(|j| (1..=n).all(|k| self.get(i, j, k) == t.get(i - 1, j - 1, k - 1)))
            })
    }

    /// Compares against a dense `p^3` array indexed `((i-1) p + j-1) p + k-1`.
    pub fn matches_dense(&self, dense: &[u64]) -> bool {
        let p = self.p as usize;
        dense.len() == p * p * p
            && (1..=p).all(|i| {
                (1..=p).all(|j| {
                    (1..=p).all(|k| self.get(i, j, k) == dense[((i - 1) * p + j - 1) * p + k - 1])
                })
            })
    }
}

/// Every `c(i, j, k)` with `i, j, k <= p` by exhaustion over `(x, y, i, j)`:
/// each pair `x` in `X_i`, `y` in `X_j` with `x + y` a unit adds to the class
/// of `x + y`, and each class has `p - 1` representatives.
pub fn structure_constants_naive_all(ctx: &PrimeContext) -> Vec<u64> {
    let p = ctx.p() as usize;
    let m = ctx.modulus();
    let a: Vec<u64> = ctx.pth_powers()[1..].to_vec();
    let classes: Vec<Vec<u64>> = (1..=p as i64)
        .map(|k| {
            let gk = ctx.g_pow(k);
            a.iter().map(|&x| gk * x % m).collect()
        })
        .collect();
    let mut label = vec![0usize; m as usize];
    for (idx, class) in classes.iter().enumerate() {
        for &x in class {
            label[x as usize] = idx + 1;
        }
    }
    let mut dense = vec![0u64; p * p * p];
    for i in 0..p {
        for j in 0..p {
            let row = &mut dense[(i * p + j) * p..(i * p + j + 1) * p];
            for &x in &classes[i] {
                for &y in &classes[j] {
                    let k = label[((x + y) % m) as usize];
                    if k != 0 {
                        row[k - 1] += 1;
                    }
                }
            }
        }
    }
    let per_class = (p - 1) as u64;
    dense.iter_mut().for_each(|c| *c /= per_class);
    dense
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heilbronn::{heilbronn_partition, spectrum};
    use crate::modarith::odd_primes_up_to;
    use crate::sctheory::structure_constant_all_representatives;
    use crate::DoubleDouble;

    fn generic(ctx: &PrimeContext) -> StructureTensor {
        StructureTensor::enumerate(&heilbronn_partition(ctx))
    }

    #[test]
    fn enumeration_matches_generic_engine_including_borders() {
        for p in odd_primes_up_to(31) {
            let ctx = PrimeContext::new(p).unwrap();
            let g = generic(&ctx);
            let t = StructureTensorP::enumerate(&ctx);
            assert!(t.matches_generic(&g), "p = {p}");
            assert_eq!(StructureTensorP::from_generic(p, &g).base, t.base);
        }
    }

    #[test]
    fn p3_values() {
        let ctx = PrimeContext::new(3).unwrap();
        let t = StructureTensorP::enumerate(&ctx);
        assert_eq!(t.get(3, 3, 1), 1);
        assert_eq!((1..=3).map(|k| t.get(3, 3, k)).max(), Some(1));
        let s = spectrum::<f64>(&ctx, None).unwrap();
        assert!(StructureTensorP::spectral_all(&s, true)
            .unwrap()
            .matches_generic(&generic(&ctx)));
    }

    #[test]
    fn spectral_matches_enumeration() {
        for p in odd_primes_up_to(61) {
            let ctx = PrimeContext::new(p).unwrap();
            let e = StructureTensorP::enumerate(&ctx);
            let s = spectrum::<f64>(&ctx, None).unwrap();
            let t = StructureTensorP::spectral_all(&s, true).unwrap();
            assert_eq!(t.base, e.base, "p = {p}");
            assert_eq!(t.origin(), Origin::Spectral);
        }
        let ctx = PrimeContext::new(13).unwrap();
        let sdd = spectrum::<DoubleDouble>(&ctx, None).unwrap();
        assert_eq!(
            StructureTensorP::spectral_all(&sdd, true).unwrap().base,
            StructureTensorP::enumerate(&ctx).base
        );
    }

    #[test]
    fn laws_hold() {
        for p in odd_primes_up_to(31) {
            let t = StructureTensorP::enumerate(&PrimeContext::new(p).unwrap());
            assert_eq!(t.permutation_symmetry_violation(), None, "p = {p}");
            assert_eq!(t.row_sum_violation(), None, "p = {p}");
            assert!(t.diagonal_sums().iter().all(|&s| s == p - 2));
        }
    }

    #[test]
    fn representative_independence() {
        for p in [3u64, 5, 7] {
            let part = heilbronn_partition(&PrimeContext::new(p).unwrap());
            let n = part.len();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let all = structure_constant_all_representatives(&part, i, j, k);
                        assert!(all.windows(2).all(|w| w[0] == w[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn t_matrix_matches_generic_build() {
        use crate::sctheory::build_t;
        for p in [5u64, 11] {
            let ctx = PrimeContext::new(p).unwrap();
            let part = heilbronn_partition(&ctx);
            let g = StructureTensor::enumerate(&part);
            let t = StructureTensorP::enumerate(&ctx);
            for i in 1..=p as usize + 2 {
                assert!(
                    t.t_matrix::<f64>(i)
                        .max_abs_diff(&build_t::<f64>(&part, &g, i - 1))
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn naive_all_matches() {
        for p in [3u64, 5, 7, 11, 13] {
            let ctx = PrimeContext::new(p).unwrap();
            assert!(StructureTensorP::enumerate(&ctx)
                .matches_dense(&structure_constants_naive_all(&ctx)));
        }
    }

    #[test]
    fn spectral_values_are_close_to_integers() {
        let ctx = PrimeContext::new(101).unwrap();
        let s = spectrum::<f64>(&ctx, None).unwrap();
        let u = u_matrix(&s);
        let t = u.scale_columns(sigma_matrix(&s).row(100)).matmul(&u);
        let worst = (0..101)
            .flat_map(|j| (0..101).map(move |k| (j, k)))
            .map(|(j, k)| (t[(j, k)] - t[(j, k)].round()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }
}
