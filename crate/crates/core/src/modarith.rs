//! Integer and modular arithmetic on 63-bit moduli.
//!
//! Everything here is a pure function. Residues are always returned in
//! `[0, m)`; signed inputs are reduced on entry.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted anywhere in the crate.
pub const MAX_MODULUS: u64 = (1 << 63) - 1;

const TRIAL_DIVISION_BOUND: u64 = 1 << 12;

// Deterministic Miller-Rabin witness set, valid for every n < 2^64.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `gcd(a, b, c)`, the common divisor used by the Weil bound.
pub fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    gcd(gcd(a, b), c)
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn reduce(x: i64, m: u64) -> u64 {
    debug_assert!(m > 0);
    (x as i128).rem_euclid(m as i128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    let a = a % m;
    let b = b % m;
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    result
}

/// Multiplicative inverse of `x` modulo `m`.
pub fn mod_inv(x: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::BadInput("modulus must be positive".into()));
    }
    if m == 1 {
        return Ok(0);
    }
    let a = reduce(x, m);
    match inv_raw(a, m) {
        Some(y) => Ok(y),
        None => Err(Error::NotInvertible { value: x, modulus: m }),
    }
}

/// Inverse of an already reduced residue, `None` when `gcd(a, m) > 1`.
pub(crate) fn inv_raw(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Inverses of every residue modulo `m`, with `0` marking non-units.
///
/// Linear-time recurrence `inv[i] = -(m / i) * inv[m % i]` only works for a
/// prime modulus, so composite moduli fall back to extended Euclid.
pub fn inverse_table(m: u64) -> Vec<u64> {
    let n = m as usize;
    let mut inv = vec![0u64; n.max(1)];
    if m == 1 {
        return inv;
    }
    if is_prime(m) {
        inv[1] = 1;
        for i in 2..n {
            let q = m / i as u64;
            let r = (m % i as u64) as usize;
            inv[i] = mul_mod(m - q, inv[r], m);
        }
    } else {
        for (i, slot) in inv.iter_mut().enumerate().skip(1) {
            *slot = inv_raw(i as u64, m).unwrap_or(0);
        }
    }
    inv
}

/// Jacobi symbol `(a / n)` for odd `n >= 1`.
pub fn jacobi(a: i64, n: u64) -> Result<i8> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenModulus(n));
    }
    Ok(jacobi_raw(reduce(a, n), n))
}

pub(crate) fn jacobi_raw(a: u64, n: u64) -> i8 {
    let mut a = a % n;
    let mut n = n;
    let mut result = 1i8;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Deterministic primality test for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_DIVISION_BOUND))
}

/// All primes `<= n` by a plain Eratosthenes sieve.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest prime `>= n`.
pub fn next_prime(mut n: u64) -> u64 {
    if n <= 2 {
        return 2;
    }
    if n.is_multiple_of(2) {
        n += 1;
    }
    while !is_prime(n) {
        n += 2;
    }
    n
}

// Brent's variant of Pollard rho. The polynomial constant walks 1, 2, 3, ...
// so the factor found is a deterministic function of n.
fn pollard_brent(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let f = |x: u64, c: u64| add_mod(mul_mod(x, x, n), c, n);
    for c in 1u64.. {
        let m = 128u64;
        let mut y = 2u64;
        let mut g = 1u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y, c);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys, c);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// A positive integer with its prime-power factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredModulus {
    q: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredModulus {
    /// Factor `n`; panics on `n == 0` or `n >= 2^63`.
    pub fn new(n: u64) -> Self {
        factorize(n)
    }

    /// Build from an explicit factor list, checking every invariant.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut q: u64 = 1;
        let mut last = 1u64;
        for &(p, j) in &factors {
            if p <= last || j == 0 || !is_prime(p) {
                return Err(Error::BadInput(format!("invalid factor ({p}, {j})")));
            }
            last = p;
            for _ in 0..j {
                q = q
                    .checked_mul(p)
                    .filter(|&v| v <= MAX_MODULUS)
                    .ok_or_else(|| Error::TooLarge("modulus exceeds 63 bits".into()))?;
            }
        }
        Ok(Self { q, factors })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Prime powers `p^j` in increasing order of `p`.
    pub fn prime_powers(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, j)| p.pow(j))
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    pub fn is_odd(&self) -> bool {
        self.q % 2 == 1
    }

    /// Euler's totient.
    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, j)| (p - 1) * p.pow(j - 1))
            .product()
    }

    /// Möbius function of `q`.
    pub fn mobius(&self) -> i8 {
        if self.factors.iter().any(|&(_, j)| j > 1) {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Number of divisors `d(q)`.
    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, j)| j as u64 + 1).product()
    }

    /// All divisors, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, j) in &self.factors {
            let current = divs.clone();
            let mut pk = 1u64;
            for _ in 0..j {
                pk *= p;
                divs.extend(current.iter().map(|d| d * pk));
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Squarefree divisors paired with their Möbius value.
    pub fn squarefree_divisors(&self) -> Vec<(u64, i8)> {
        let mut out = vec![(1u64, 1i8)];
        for &(p, _) in &self.factors {
            let current = out.clone();
            out.extend(current.into_iter().map(|(d, mu)| (d * p, -mu)));
        }
        out.sort_unstable();
        out
    }

    pub fn smallest_prime(&self) -> Option<u64> {
        self.factors.first().map(|&(p, _)| p)
    }
}

/// Complete, deterministic factorization of `1 <= n < 2^63`.
pub fn factorize(n: u64) -> FactoredModulus {
    assert!((1..=MAX_MODULUS).contains(&n), "factorize: {n} outside [1, 2^63)");
    let mut rest = n;
    let mut primes = Vec::new();
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        while rest.is_multiple_of(p) {
            primes.push(p);
            rest /= p;
        }
    }
    split_into(rest, &mut primes);
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((last, j)) if *last == p => *j += 1,
            _ => factors.push((p, 1)),
        }
    }
    FactoredModulus { q: n, factors }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).phi()
}

pub fn mobius(n: u64) -> i8 {
    factorize(n).mobius()
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n).divisor_count()
}

/// Tonelli-Shanks square root modulo an odd prime, `None` for non-residues.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2u64;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// A square root of `a` modulo `p^j` for odd prime `p` with `p ∤ a`.
///
/// Lifts a Tonelli-Shanks root mod `p` by Newton iteration. Returns the
/// smaller of the two roots, or `None` when `a` is a non-residue.
pub fn sqrt_mod_prime_power(a: i64, p: u64, j: u32) -> Result<Option<u64>> {
    if p.is_multiple_of(2) {
        return Err(Error::EvenModulus(p));
    }
    if j == 0 {
        return Err(Error::BadInput("exponent must be positive".into()));
    }
    let pj = p
        .checked_pow(j)
        .filter(|&v| v <= MAX_MODULUS)
        .ok_or_else(|| Error::TooLarge(format!("{p}^{j} exceeds 63 bits")))?;
    let a = reduce(a, pj);
    if a.is_multiple_of(p) {
        return Err(Error::BadInput(format!("{p} divides the radicand")));
    }
    let Some(mut root) = sqrt_mod_prime(a % p, p) else {
        return Ok(None);
    };
    let mut modulus = p;
    while modulus < pj {
        modulus = modulus.saturating_mul(modulus).min(pj);
        // root <- root - (root^2 - a) / (2 root)
        let f = sub_mod(mul_mod(root, root, modulus), a % modulus, modulus);
        let inv = inv_raw(mul_mod(2, root, modulus), modulus).expect("2l is a unit mod p^k");
        root = sub_mod(root, mul_mod(f, inv, modulus), modulus);
    }
    Ok(Some(root.min(pj - root)))
}

/// The unique `x mod m1*m2` with `x ≡ r1 (m1)` and `x ≡ r2 (m2)`.
pub fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> Result<u64> {
    if gcd(m1, m2) != 1 {
        return Err(Error::NonCoprime(m1, m2));
    }
    let m = m1
        .checked_mul(m2)
        .filter(|&v| v <= MAX_MODULUS)
        .ok_or_else(|| Error::TooLarge("product of moduli exceeds 63 bits".into()))?;
    let r1 = r1 % m1;
    let r2 = r2 % m2;
    // x = r1 + m1 * ((r2 - r1) * m1^{-1} mod m2)
    let inv = inv_raw(m1 % m2, m2).unwrap_or(0);
    let t = mul_mod(sub_mod(r2, r1 % m2, m2), inv, m2);
    Ok(add_mod(r1, mul_mod(m1, t, m), m))
}
