//! Exact modular arithmetic modulo `p` and `p^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime accepted by [`PrimeContext`]; `p^4` still fits in `u128`
/// intermediates and `p^2` indexes the dense tables.
pub const MAX_PRIME: u64 = 1 << 20;

/// `base^exponent mod modulus` by square-and-multiply.
pub fn pow_mod(base: u64, mut exponent: u64, modulus: u64) -> u64 {
    assert!(modulus >= 2, "modulus must be at least 2");
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exponent > 0 {
        if exponent & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exponent >>= 1;
    }
    acc as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, modulus: u64) -> u64 {
    (a as u128 * b as u128 % modulus as u128) as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn odd_primes_up_to(n: u64) -> Vec<u64> {
    (3..=n).step_by(2).filter(|&k| is_prime(k)).collect()
}

pub fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if p > MAX_PRIME {
        return Err(Error::PrimeTooLarge { p, max: MAX_PRIME });
    }
    Ok(())
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_primitive_root_mod_p(h: u64, p: u64, factors: &[u64]) -> bool {
    !h.is_multiple_of(p) && factors.iter().all(|&q| pow_mod(h, (p - 1) / q, p) != 1)
}

/// Whether `g` has multiplicative order `p(p-1)` modulo `p^2`.
pub fn is_primitive_root_mod_p2(g: u64, p: u64) -> bool {
    let factors = prime_factors(p - 1);
    is_primitive_root_mod_p(g % p, p, &factors) && pow_mod(g, p - 1, p * p) != 1
}

/// Smallest primitive root `h` mod `p`, lifted to `h + p` if `h^(p-1) = 1`
/// mod `p^2`.
pub fn primitive_root_mod_p2(p: u64) -> Result<u64> {
    check_odd_prime(p)?;
    let factors = prime_factors(p - 1);
    let h = (2..p)
        .find(|&h| is_primitive_root_mod_p(h, p, &factors))
        .expect("every prime has a primitive root");
    Ok(if pow_mod(h, p - 1, p * p) == 1 {
        h + p
    } else {
        h
    })
}

/// The next primitive root mod `p^2` strictly above `after`.
pub fn next_primitive_root_mod_p2(p: u64, after: u64) -> Result<u64> {
    check_odd_prime(p)?;
    (after + 1..p * p)
        .find(|&g| is_primitive_root_mod_p2(g, p))
        .ok_or_else(|| Error::InvalidInput(format!("no primitive root mod {}^2 above {after}", p)))
}

/// Immutable per-prime tables: the primitive root `g`, a dense discrete-log
/// table over residues mod `p^2`, and the `p`-th powers `l^p mod p^2`.
#[derive(Debug, Clone)]
pub struct PrimeContext {
    p: u64,
    modulus: u64,
    g: u64,
    // dlog[u] in 1..=p(p-1) for units, 0 for non-units.
    dlog: Vec<u64>,
    // pth[l] = l^p mod p^2 for l in 0..p.
    pth: Vec<u64>,
}

impl PrimeContext {
    pub fn new(p: u64) -> Result<Self> {
        let g = primitive_root_mod_p2(p)?;
        Self::with_generator(p, g)
    }

    pub fn with_generator(p: u64, g: u64) -> Result<Self> {
        check_odd_prime(p)?;
        let modulus = p * p;
        let g = g % modulus;
        if !is_primitive_root_mod_p2(g, p) {
            return Err(Error::InvalidInput(format!(
                "{g} is not a primitive root mod {p}^2"
            )));
        }
        let order = p * (p - 1);
        let mut dlog = vec![0u64; modulus as usize];
        let mut x = 1u64;
        for e in 1..=order {
            x = mul_mod(x, g, modulus);
            dlog[x as usize] = e;
        }
        debug_assert_eq!(x, 1);
        Ok(PrimeContext {
            p,
            modulus,
            g,
            dlog,
            pth: pth_powers(p),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn order(&self) -> u64 {
        self.p * (self.p - 1)
    }

    /// Exponent `e` in `1..=p(p-1)` with `g^e = u`, or `None` if `p | u`.
    pub fn dlog(&self, u: u64) -> Option<u64> {
        match self.dlog[(u % self.modulus) as usize] {
            0 => None,
            e => Some(e),
        }
    }

    pub fn dlog_table_len(&self) -> usize {
        self.dlog.iter().filter(|&&e| e != 0).count()
    }

    /// `g^k mod p^2` for any integer `k`.
    pub fn g_pow(&self, k: i64) -> u64 {
        let e = k.rem_euclid(self.order() as i64) as u64;
        pow_mod(self.g, e, self.modulus)
    }

    /// `l^p mod p^2`; depends only on `l mod p`.
    pub fn pth_power(&self, l: u64) -> u64 {
        self.pth[(l % self.p) as usize]
    }

    /// `l^p mod p^2` for `l = 0..p`.
    pub fn pth_powers(&self) -> &[u64] {
        &self.pth
    }
}

/// `l^p mod p^2` for `l = 0..p`.
pub fn pth_powers(p: u64) -> Vec<u64> {
    let m = p * p;
    (0..p).map(|l| pow_mod(l, p, m)).collect()
}

/// Inverses of `1..p` modulo `p`; index 0 is unused.
pub fn inverses_mod_p(p: u64) -> Vec<u64> {
    let mut inv = vec![0u64; p as usize];
    if p > 1 {
        inv[1] = 1;
    }
    for k in 2..p as usize {
        let q = p / k as u64;
        let r = (p % k as u64) as usize;
        inv[k] = (p - q) * inv[r] % p;
    }
    inv
}

fn truncated_log_with(p: u64, u: u64, inv: &[u64]) -> u64 {
    let u = u % p;
    // u (1/1 + u (1/2 + ... + u (1/(p-1)))) by Horner
    let mut acc = 0u64;
    for k in (1..p).rev() {
        acc = (acc + inv[k as usize]) % p * u % p;
    }
    acc
}

/// `L_p(u) = u + u^2/2 + ... + u^(p-1)/(p-1) mod p`.
pub fn truncated_log(p: u64, u: u64) -> Result<u64> {
    check_odd_prime(p)?;
    if u.is_multiple_of(p) {
        return Err(Error::InvalidInput(format!("{p} divides {u}")));
    }
    Ok(truncated_log_with(p, u, &inverses_mod_p(p)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedLogTable {
    pub p: u64,
    /// `values[u] = L_p(u)` for `u = 1..p`; index 0 holds `L_p(0) = 0`.
    pub values: Vec<u64>,
    /// `level_sets[r] = {2 <= x <= p : L_p(x) = r}`.
    pub level_sets: Vec<Vec<u64>>,
}

impl TruncatedLogTable {
    pub fn max_level(&self) -> usize {
        self.level_sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn level_bound(&self) -> f64 {
        44.0 * (self.p as f64).powf(2.0 / 3.0)
    }

    pub fn within_bound(&self) -> bool {
        self.max_level() as f64 <= self.level_bound()
    }
}

pub fn log_level_sets(p: u64) -> Result<TruncatedLogTable> {
    check_odd_prime(p)?;
    let inv = inverses_mod_p(p);
    let values: Vec<u64> = (0..p).map(|u| truncated_log_with(p, u, &inv)).collect();
    let mut level_sets = vec![Vec::new(); p as usize];
    for x in 2..=p {
        level_sets[values[(x % p) as usize] as usize].push(x);
    }
    Ok(TruncatedLogTable {
        p,
        values,
        level_sets,
    })
}

/// `1 - (1-u)^p == u^p + p L_p(u) (mod p^2)` for `u` not 0 or 1 mod `p`.
pub fn binomial_log_identity_holds(p: u64, u: u64) -> bool {
    let m = p * p;
    let u = u % p;
    let lhs = (1 + m - pow_mod((1 + p - u) % p, p, m)) % m;
    let rhs = (pow_mod(u, p, m) + p * truncated_log_with(p, u, &inverses_mod_p(p))) % m;
    lhs == rhs
}

/// `L_p(u) == -u^p L_p(1/u) (mod p)`.
pub fn functional_log_identity_holds(p: u64, u: u64, inv: &[u64]) -> bool {
    let u = u % p;
    let lhs = truncated_log_with(p, u, inv);
    let rhs = (p - pow_mod(u, p, p) * truncated_log_with(p, inv[u as usize], inv) % p) % p;
    lhs == rhs
}
