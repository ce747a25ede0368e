//! Supercharacter theory of `Z/nZ` under multiplication by a subgroup `A` of
//! the units.
//!
//! Class indices are 0-based throughout this module. Generic partitions are
//! ordered by minimal representative with the zero class last; callers that
//! need a different labeling build the partition with
//! [`SuperclassPartition::from_classes`].

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::modarith::{gcd, mul_mod};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitAction {
    n: u64,
    generators: Vec<u64>,
}

impl UnitAction {
    pub fn new(n: u64, generators: impl IntoIterator<Item = u64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "modulus {n} must be at least 2"
            )));
        }
        let generators: Vec<u64> = generators.into_iter().map(|g| g % n).collect();
        if let Some(&g) = generators.iter().find(|&&g| gcd(g, n) != 1) {
            return Err(Error::InvalidInput(format!(
                "generator {g} is not a unit mod {n}"
            )));
        }
        Ok(UnitAction { n, generators })
    }

    /// The whole unit group; its orbits are the divisor classes.
    pub fn full_unit_group(n: u64) -> Result<Self> {
        Self::new(n, (1..n).filter(|&x| gcd(x, n) == 1))
    }

    pub fn trivial(n: u64) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    /// Closure of the generators, sorted.
    pub fn subgroup(&self) -> Vec<u64> {
        let n = self.n;
        let mut seen = vec![false; n as usize];
        let mut stack = vec![1 % n];
        seen[(1 % n) as usize] = true;
        while let Some(x) = stack.pop() {
            for &g in &self.generators {
                let y = mul_mod(x, g, n);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        (0..n).filter(|&x| seen[x as usize]).collect()
    }

    pub fn is_negation_closed(&self) -> bool {
        let a = self.subgroup();
        a.binary_search(&(self.n - 1)).is_ok() || self.n == 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperclassPartition {
    n: u64,
    classes: Vec<Vec<u64>>,
    class_of: Vec<usize>,
}

impl SuperclassPartition {
    /// Validates that `classes` partitions `Z/nZ` and that `{0}` is a class.
    /// Each class is stored sorted.
    pub fn from_classes(n: u64, classes: Vec<Vec<u64>>) -> Result<Self> {
        let mut class_of = vec![usize::MAX; n as usize];
        let mut classes = classes;
        for (i, class) in classes.iter_mut().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidInput(format!("class {i} is empty")));
            }
            class.sort_unstable();
            for &x in class.iter() {
                if x >= n {
                    return Err(Error::InvalidInput(format!(
                        "residue {x} out of range mod {n}"
                    )));
                }
                if class_of[x as usize] != usize::MAX {
                    return Err(Error::InvalidInput(format!("residue {x} appears twice")));
                }
                class_of[x as usize] = i;
            }
        }
        if let Some(x) = class_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidInput(format!("residue {x} is not covered")));
        }
        if classes[class_of[0]].len() != 1 {
            return Err(Error::InvalidInput("0 must be a singleton class".into()));
        }
        Ok(SuperclassPartition {
            n,
            classes,
            class_of,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[Vec<u64>] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &[u64] {
        &self.classes[i]
    }

    pub fn size(&self, i: usize) -> usize {
        self.classes[i].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// Canonical representative: the smallest residue in the class.
    pub fn representative(&self, i: usize) -> u64 {
        self.classes[i][0]
    }

    pub fn class_of(&self, x: u64) -> usize {
        self.class_of[(x % self.n) as usize]
    }

    pub fn zero_class(&self) -> usize {
        self.class_of[0]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Whether the classes are exactly the orbits of `action`, in any order.
    pub fn is_orbit_partition_of(&self, action: &UnitAction) -> bool {
        let mut mine = self.classes.clone();
        let mut theirs = superclasses(action).classes;
        mine.sort();
        theirs.sort();
        mine == theirs
    }
}

/// Orbits of `Z/nZ` under multiplication by the subgroup generated by the
/// action's generators.
pub fn superclasses(action: &UnitAction) -> SuperclassPartition {
    let n = action.n;
    let a = action.subgroup();
    let mut assigned = vec![false; n as usize];
    let mut classes = Vec::new();
    for x in 1..n {
        if assigned[x as usize] {
            continue;
        }
        let mut orbit: Vec<u64> = a.iter().map(|&s| mul_mod(s, x, n)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &y in &orbit {
            assigned[y as usize] = true;
        }
        classes.push(orbit);
    }
    classes.push(vec![0]);
    SuperclassPartition::from_classes(n, classes).expect("orbits partition Z/nZ")
}

fn phase_sum<T: Real>(partition: &SuperclassPartition, i: usize, y: u64) -> Complex<T> {
    let n = partition.n;
    let mut acc = Complex::new(T::zero(), T::zero());
    for &x in partition.class(i) {
        let (c, s) = T::cos_sin_turn(mul_mod(x, y, n), n);
        acc.re += c;
        acc.im += s;
    }
    acc
}

/// `sigma_i(X_j) = sum_{x in X_i} e(x y / n)` for any `y` in `X_j`.
pub fn supercharacter_value<T: Real>(
    partition: &SuperclassPartition,
    i: usize,
    j: usize,
) -> Result<Complex<T>> {
    partition.check_index(i)?;
    partition.check_index(j)?;
    let class_j = partition.class(j);
    let value = phase_sum::<T>(partition, i, class_j[0]);
    if cfg!(debug_assertions) && class_j.len() > 1 {
        let other = phase_sum::<T>(partition, i, class_j[class_j.len() - 1]);
        let tol = 1e3 * T::unit_roundoff() * partition.size(i) as f64;
        debug_assert!(
            (other - value).norm_sqr().as_f64().sqrt() <= tol.max(1e-5),
            "supercharacter value depends on the representative"
        );
    }
    Ok(value)
}

pub fn supercharacter_table<T: Real>(partition: &SuperclassPartition) -> Matrix<Complex<T>> {
    let n = partition.len();
    Matrix::from_fn(n, n, |i, j| {
        phase_sum::<T>(partition, i, partition.representative(j))
    })
}

#[derive(Debug, Clone)]
pub struct SupercharacterMatrices<T> {
    /// `sigma[(i, j)] = sigma_i(X_j)`.
    pub sigma: Matrix<Complex<T>>,
    pub u: Matrix<Complex<T>>,
}

impl<T: Real> SupercharacterMatrices<T> {
    /// Diagonal of `D_i`, i.e. row `i` of the table.
    pub fn d(&self, i: usize) -> Vec<Complex<T>> {
        self.sigma.row(i).to_vec()
    }
}

/// `U[i][j] = sigma_i(X_j) sqrt|X_j| / (sqrt n sqrt|X_i|)`.
pub fn build_u<T: Real>(partition: &SuperclassPartition) -> SupercharacterMatrices<T> {
    let sigma = supercharacter_table::<T>(partition);
    let sqrt_sizes: Vec<T> = partition
        .sizes()
        .iter()
        .map(|&s| T::from_usize(s).unwrap().sqrt())
        .collect();
    let sqrt_n = T::from_u64(partition.n).unwrap().sqrt();
    let u = Matrix::from_fn(sigma.rows(), sigma.cols(), |i, j| {
        sigma[(i, j)] * (sqrt_sizes[j] / (sqrt_n * sqrt_sizes[i]))
    });
    SupercharacterMatrices { sigma, u }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Enumeration,
    Spectral,
}

fn count_pairs(partition: &SuperclassPartition, i: usize, j: usize, z: u64) -> u64 {
    let n = partition.n;
    partition
        .class(i)
        .iter()
        .filter(|&&x| partition.class_of((z + n - x) % n) == j)
        .count() as u64
}

/// Number of `(x, y)` in `X_i x X_j` with `x + y = z`, `z` the canonical
/// representative of `X_k`.
pub fn structure_constant(
    partition: &SuperclassPartition,
    i: usize,
    j: usize,
    k: usize,
) -> Result<u64> {
    partition.check_index(i)?;
    partition.check_index(j)?;
    partition.check_index(k)?;
    let class_k = partition.class(k);
    let c = count_pairs(partition, i, j, class_k[0]);
    debug_assert_eq!(c, count_pairs(partition, i, j, class_k[class_k.len() - 1]));
    Ok(c)
}

/// `c(i, j, k)` evaluated at every representative of `X_k`; all equal when
/// the partition comes from a group action.
pub fn structure_constant_all_representatives(
    partition: &SuperclassPartition,
    i: usize,
    j: usize,
    k: usize,
) -> Vec<u64> {
    partition
        .class(k)
        .iter()
        .map(|&z| count_pairs(partition, i, j, z))
        .collect()
}

/// Dense `N x N x N` structure constants of a generic partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureTensor {
    n_classes: usize,
    c: Vec<u64>,
    origin: Origin,
}

impl StructureTensor {
    pub fn enumerate(partition: &SuperclassPartition) -> Self {
        let n_classes = partition.len();
        let n = partition.n;
        let mut c = vec![0u64; n_classes.pow(3)];
        // one pass per (i, k): classify z - x for x in X_i
        for k in 0..n_classes {
            let z = partition.representative(k);
            for i in 0..n_classes {
                for &x in partition.class(i) {
                    let j = partition.class_of((z + n - x) % n);
                    c[(i * n_classes + j) * n_classes + k] += 1;
                }
            }
        }
        StructureTensor {
            n_classes,
            c,
            origin: Origin::Enumeration,
        }
    }

    pub fn from_fn(
        n_classes: usize,
        origin: Origin,
        mut f: impl FnMut(usize, usize, usize) -> u64,
    ) -> Self {
        let mut c = Vec::with_capacity(n_classes.pow(3));
        for i in 0..n_classes {
            for j in 0..n_classes {
                for k in 0..n_classes {
                    c.push(f(i, j, k));
                }
            }
        }
        StructureTensor {
            n_classes,
            c,
            origin,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        self.c[(i * self.n_classes + j) * self.n_classes + k]
    }
}

/// `[T_i]_{j,k} = c(i,j,k) sqrt|X_k| / sqrt|X_j|`.
pub fn build_t<T: Real>(
    partition: &SuperclassPartition,
    tensor: &StructureTensor,
    i: usize,
) -> Matrix<T> {
    let sqrt_sizes: Vec<T> = partition
        .sizes()
        .iter()
        .map(|&s| T::from_usize(s).unwrap().sqrt())
        .collect();
    let n = partition.len();
    Matrix::from_fn(n, n, |j, k| {
        T::from_u64(tensor.get(i, j, k)).unwrap() * sqrt_sizes[k] / sqrt_sizes[j]
    })
}

/// `max_l |sigma_i(X_l) sigma_j(X_l) - sum_k c(i,j,k) sigma_k(X_l)|`.
pub fn product_identity_residual<T: Real>(
    sigma: &Matrix<Complex<T>>,
    tensor: &StructureTensor,
    i: usize,
    j: usize,
) -> f64 {
    let n = sigma.rows();
    (0..n)
        .map(|l| {
            let lhs = sigma[(i, l)] * sigma[(j, l)];
            let mut rhs = Complex::zero();
            for k in 0..n {
                rhs += sigma[(k, l)] * T::from_u64(tensor.get(i, j, k)).unwrap();
            }
            let d = lhs - rhs;
            (d.re * d.re + d.im * d.im).sqrt().as_f64()
        })
        .fold(0.0, f64::max)
}

/// `max |T_i U - U D_i|` for the complex `U`.
pub fn diagonalization_residual<T: Real>(
    t: &Matrix<T>,
    m: &SupercharacterMatrices<T>,
    i: usize,
) -> f64 {
    let lhs = t.to_complex().matmul(&m.u);
    let rhs = m.u.scale_columns(&m.d(i));
    lhs.max_abs_diff(&rhs)
}

/// Exact normality test for `T_i` over the rationals.
///
/// With `s_j = |X_j|`, `(T^T T)_{jk} sqrt(s_j s_k) = sum_r c(i,r,j) c(i,r,k) s_j s_k / s_r`
/// and `(T T^T)_{jk} sqrt(s_j s_k) = sum_r c(i,j,r) c(i,k,r) s_r`, so the square
/// roots cancel and both sides are rational.
pub fn t_is_normal_exact(
    partition: &SuperclassPartition,
    tensor: &StructureTensor,
    i: usize,
) -> bool {
    let n = partition.len();
    let s: Vec<i128> = partition.sizes().iter().map(|&x| x as i128).collect();
    for j in 0..n {
        for k in j..n {
            let mut lhs = Ratio::<i128>::zero();
            let mut rhs = Ratio::<i128>::zero();
            for r in 0..n {
                let a = tensor.get(i, r, j) as i128 * tensor.get(i, r, k) as i128;
                if a != 0 {
                    lhs += Ratio::new(a * s[j] * s[k], s[r]);
                }
                rhs += Ratio::from_integer(
                    tensor.get(i, j, r) as i128 * tensor.get(i, k, r) as i128 * s[r],
                );
            }
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heil9() -> SuperclassPartition {
        superclasses(&UnitAction::new(9, [8]).unwrap())
    }

    fn sorted_classes(p: &SuperclassPartition) -> Vec<Vec<u64>> {
        let mut c = p.classes().to_vec();
        c.sort();
        c
    }

    #[test]
    fn orbits_mod_9() {
        let part = heil9();
        let mut expected = vec![vec![1, 8], vec![2, 7], vec![4, 5], vec![3, 6], vec![0]];
        expected.sort();
        assert_eq!(sorted_classes(&part), expected);
        // min-representative order, zero last
        assert_eq!(
            part.classes(),
            &[vec![1, 8], vec![2, 7], vec![3, 6], vec![4, 5], vec![0]]
        );
        assert_eq!(part.zero_class(), 4);
        assert_eq!(part.class_of(7), 1);
    }

    #[test]
    fn trivial_action_gives_singletons() {
        for n in [2u64, 5, 12] {
            let part = superclasses(&UnitAction::trivial(n).unwrap());
            assert_eq!(part.len(), n as usize);
            assert!(part.classes().iter().all(|c| c.len() == 1));
        }
    }

    #[test]
    fn full_unit_group_gives_divisor_classes() {
        let part = superclasses(&UnitAction::full_unit_group(6).unwrap());
        assert_eq!(part.classes(), &[vec![1, 5], vec![2, 4], vec![3], vec![0]]);
    }

    #[test]
    fn rejects_non_unit_generator() {
        assert!(UnitAction::new(9, [3]).is_err());
        assert!(UnitAction::new(1, []).is_err());
    }

    #[test]
    fn from_classes_validation() {
        assert!(SuperclassPartition::from_classes(4, vec![vec![1, 2], vec![3]]).is_err());
        assert!(
            SuperclassPartition::from_classes(4, vec![vec![1, 2], vec![2, 3], vec![0]]).is_err()
        );
        assert!(SuperclassPartition::from_classes(4, vec![vec![0, 1], vec![2, 3]]).is_err());
        assert!(SuperclassPartition::from_classes(4, vec![vec![3, 1], vec![2], vec![0]]).is_ok());
    }

    #[test]
    fn partitions_cover_everything() {
        for n in 2..=121u64 {
            for action in [
                UnitAction::full_unit_group(n).unwrap(),
                UnitAction::new(n, [n - 1]).unwrap(),
            ] {
                let part = superclasses(&action);
                assert_eq!(part.sizes().iter().sum::<usize>(), n as usize);
            }
        }
    }

    #[test]
    fn values_at_zero_class_are_sizes() {
        let part = heil9();
        for i in 0..part.len() {
            let v: Complex<f64> = supercharacter_value(&part, i, part.zero_class()).unwrap();
            assert!((v.re - part.size(i) as f64).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn heilbronn_value_mod_9() {
        // class of A = {1, 8}: e(1/9) + e(8/9) = 2 cos(2 pi / 9)
        let part = heil9();
        let v: Complex<f64> = supercharacter_value(&part, 0, 0).unwrap();
        assert!((v.re - 1.532088886237956).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn negation_closed_values_are_real() {
        let action = UnitAction::new(49, [48, 18]).unwrap();
        assert!(action.is_negation_closed());
        let m = build_u::<f64>(&superclasses(&action));
        assert!(m.sigma.max_imag() < 1e-10);
        let odd = UnitAction::new(7, [2]).unwrap();
        assert!(!odd.is_negation_closed());
        assert!(build_u::<f64>(&superclasses(&odd)).sigma.max_imag() > 0.1);
    }

    #[test]
    fn index_errors() {
        let part = heil9();
        assert_eq!(
            supercharacter_value::<f64>(&part, 5, 0),
            Err(Error::IndexOutOfRange { index: 5, len: 5 })
        );
        assert!(structure_constant(&part, 0, 0, 9).is_err());
    }

    #[test]
    fn structure_constant_examples() {
        let part = heil9();
        let a = part.class_of(1);
        assert_eq!(
            structure_constant(&part, a, a, part.class_of(2)).unwrap(),
            1
        );
        assert_eq!(
            structure_constant(&part, a, a, part.class_of(4)).unwrap(),
            0
        );
        let zero = part.zero_class();
        for i in 0..part.len() {
            for k in 0..part.len() {
                assert_eq!(
                    structure_constant(&part, i, zero, k).unwrap(),
                    u64::from(i == k)
                );
            }
        }
    }

    #[test]
    fn unitary_and_symmetric_in_f32_and_f64() {
        let part = superclasses(&UnitAction::new(49, [18]).unwrap());
        let m = build_u::<f64>(&part);
        let eye = Matrix::identity(part.len());
        assert!(m.u.matmul(&m.u.conj_transpose()).max_abs_diff(&eye) < 1e-10);
        assert!(m.u.symmetry_residual() < 1e-10);
        let m32 = build_u::<f32>(&part);
        let eye32 = Matrix::identity(part.len());
        assert!(m32.u.matmul(&m32.u.conj_transpose()).max_abs_diff(&eye32) < 1e-4);
    }

    #[test]
    fn zero_class_row_of_u() {
        let part = heil9();
        let m = build_u::<f64>(&part);
        let z = part.zero_class();
        for j in 0..part.len() {
            let expect = (part.size(j) as f64).sqrt() / 3.0;
            assert!((m.u[(z, j)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn t_matrices_diagonalize_and_commute() {
        let part = superclasses(&UnitAction::new(49, [18]).unwrap());
        let tensor = StructureTensor::enumerate(&part);
        let m = build_u::<f64>(&part);
        let ts: Vec<Matrix<f64>> = (0..part.len())
            .map(|i| build_t(&part, &tensor, i))
            .collect();
        for (i, t) in ts.iter().enumerate() {
            assert!(diagonalization_residual(t, &m, i) < 1e-8, "i = {i}");
        }
        assert_eq!(ts[part.zero_class()], Matrix::identity(part.len()));
        for i in 0..part.len() {
            for j in 0..part.len() {
                assert!(ts[i].matmul(&ts[j]).max_abs_diff(&ts[j].matmul(&ts[i])) < 1e-8);
            }
        }
    }

    #[test]
    fn generic_laws_for_small_moduli() {
        for n in 2..=40u64 {
            let actions = [
                UnitAction::full_unit_group(n).unwrap(),
                UnitAction::new(n, [n - 1]).unwrap(),
                UnitAction::trivial(n).unwrap(),
            ];
            for action in actions {
                let part = superclasses(&action);
                let tensor = StructureTensor::enumerate(&part);
                let m = build_u::<f64>(&part);
                let nc = part.len();
                for i in 0..nc {
                    assert!(
                        t_is_normal_exact(&part, &tensor, i),
                        "normality n={n} i={i}"
                    );
                    for j in 0..nc {
                        assert!(product_identity_residual(&m.sigma, &tensor, i, j) < 1e-8);
                        for k in 0..nc {
                            let reps = structure_constant_all_representatives(&part, i, j, k);
                            assert!(reps.iter().all(|&c| c == tensor.get(i, j, k)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn exact_normality_detects_non_normal() {
        // partition that is not an orbit partition: c(i,j,k) depends on z
        let part =
            SuperclassPartition::from_classes(5, vec![vec![1], vec![2, 3, 4], vec![0]]).unwrap();
        let tensor = StructureTensor::enumerate(&part);
        assert!((0..part.len()).any(|i| !t_is_normal_exact(&part, &tensor, i)));
    }

    // classical Ramanujan sum by the divisor formula sum_{d | gcd(n, y)} mu(n/d) d
    fn ramanujan(n: u64, y: u64) -> i64 {
        fn mobius(mut m: u64) -> i64 {
            let mut sign = 1;
            let mut d = 2;
            while d * d <= m {
                if m.is_multiple_of(d) {
                    m /= d;
                    if m.is_multiple_of(d) {
                        return 0;
                    }
                    sign = -sign;
                }
                d += 1;
            }
            if m > 1 {
                sign = -sign;
            }
            sign
        }
        let g = gcd(n, y);
        (1..=g)
            .filter(|d| g.is_multiple_of(*d))
            .map(|d| mobius(n / d) * d as i64)
            .sum()
    }

    #[test]
    fn full_unit_group_values_are_ramanujan_sums() {
        for n in [6u64, 10, 12] {
            let part = superclasses(&UnitAction::full_unit_group(n).unwrap());
            let units = part.class_of(1);
            for j in 0..part.len() {
                let v: Complex<f64> = supercharacter_value(&part, units, j).unwrap();
                let expect = ramanujan(n, part.representative(j)) as f64;
                assert!(
                    (v.re - expect).abs() < 1e-12 && v.im.abs() < 1e-12,
                    "n={n} j={j}"
                );
            }
        }
    }
}
