//! Counting functions for reciprocal differences and the additive and
//! multiplicative counts used for sums over arbitrary sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::modarith::{gcd, inv_raw, inverse_table, is_prime, mul_mod, reduce, FactoredModulus};

/// Parameters of `J_q(a, K)` and of its restricted form `J_q(a, K; r, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountQuery {
    pub q: FactoredModulus,
    pub a: u64,
    pub k: u64,
    pub restriction: Option<(u64, u64)>,
}

impl CountQuery {
    pub fn new(q: &FactoredModulus, a: i64, k: u64) -> Result<Self> {
        if k == 0 || k > q.q() {
            return Err(Error::OutOfRange(format!("K = {k} must satisfy 1 <= K <= q = {}", q.q())));
        }
        Ok(Self { q: q.clone(), a: reduce(a, q.q()), k, restriction: None })
    }

    /// Attach the restriction `<c k>_r <= K`.
    pub fn restricted(mut self, r: u64, c: i64) -> Result<Self> {
        if r == 0 || !self.q.q().is_multiple_of(r) {
            return Err(Error::BadInput(format!("r = {r} does not divide q = {}", self.q.q())));
        }
        let c = reduce(c, r);
        if gcd(c, r) != 1 && r != 1 {
            return Err(Error::NonCoprime(c, r));
        }
        if self.k > r {
            return Err(Error::OutOfRange(format!("K = {} exceeds r = {r}", self.k)));
        }
        self.restriction = Some((r, c));
        Ok(self)
    }
}

/// `J_q(a, K)` by a double loop over `[1, K]²`.
pub fn j_count_brute(query: &CountQuery) -> u64 {
    let q = query.q.q();
    let inv: Vec<Option<u64>> = (1..=query.k).map(|k| inv_raw(k % q, q)).collect();
    let mut count = 0;
    for i1 in inv.iter().flatten() {
        for i2 in inv.iter().flatten() {
            if (i1 + q - i2) % q == query.a {
                count += 1;
            }
        }
    }
    count
}

/// Reusable `J_q(a, K)` counter for one modulus.
///
/// Since inversion is an involution on the units, `k_2 = (k_1^{-1} - a)^{-1}`
/// is determined by `k_1`, which makes each count a single pass over `[1, K]`.
#[derive(Debug, Clone)]
pub struct JCounter {
    q: u64,
    inv: Vec<u64>,
}

impl JCounter {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1);
        let inv = if q == 1 { vec![0] } else { inverse_table(q) };
        Self { q, inv }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Inverse of `k` modulo `q`, `None` for non-units.
    fn inverse(&self, k: u64) -> Option<u64> {
        if self.q == 1 {
            return Some(0);
        }
        match self.inv[k as usize] {
            0 => None,
            v => Some(v),
        }
    }

    /// `J_q(a, K)` for reduced `a`.
    pub fn count(&self, a: u64, k: u64) -> u64 {
        let q = self.q;
        let mut n = 0;
        for k1 in 1..=k {
            let Some(i1) = self.inverse(k1 % q) else { continue };
            let t = (i1 + q - a % q) % q;
            if let Some(k2) = self.inverse(t) {
                // k2 is the representative in [0, q); K <= q so k2 = 0 only for q = 1
                let k2 = if k2 == 0 { q } else { k2 };
                if k2 <= k {
                    n += 1;
                }
            }
        }
        n
    }

    /// `J_q(a, K; r, c)`: pairs of units mod `q` with `<c k_i>_r <= K`.
    pub fn count_restricted(&self, a: u64, k: u64, r: u64, c: u64) -> u64 {
        let q = self.q;
        let admissible = |x: u64| {
            let v = mul_mod(c % r, x % r, r);
            let v = if v == 0 { r } else { v };
            v <= k
        };
        let mut n = 0;
        for k1 in 0..q {
            if !admissible(k1) {
                continue;
            }
            let Some(i1) = self.inverse(k1) else { continue };
            let t = (i1 + q - a % q) % q;
            if let Some(k2) = self.inverse(t) {
                if admissible(k2) {
                    n += 1;
                }
            }
        }
        n
    }

    /// `J_q(a, K)` for `K = 1, ..., q` (index `K - 1`) in one `O(q)` pass.
    ///
    /// Going from `K - 1` to `K` adds the pairs with `max(k_1, k_2) = K`.
    pub fn counts_up_to(&self, a: u64) -> Vec<u64> {
        let q = self.q;
        let a = a % q;
        let rep = |k: u64| if k == 0 { q } else { k };
        let mut out = Vec::with_capacity(q as usize);
        let mut total = 0;
        for k in 1..=q {
            if let Some(ik) = self.inverse(k % q) {
                // k_1 = k: k_2 = (k^{-1} - a)^{-1}
                if let Some(k2) = self.inverse((ik + q - a) % q) {
                    if rep(k2) <= k {
                        total += 1;
                    }
                }
                // k_2 = k: k_1 = (k^{-1} + a)^{-1}, strictly below k
                if let Some(k1) = self.inverse((ik + a) % q) {
                    if rep(k1) < k {
                        total += 1;
                    }
                }
            }
            out.push(total);
        }
        out
    }

    /// `Σ_{1 <= n <= N} J_q(a n, K)`.
    pub fn average_sum(&self, a: u64, n: u64, k: u64) -> u64 {
        (1..=n).map(|i| self.count(mul_mod(a % self.q.max(1), i % self.q, self.q), k)).sum()
    }
}

/// `J_q(a, K)` in `O(K)` after an `O(q)` inverse table.
pub fn j_count_fast(query: &CountQuery) -> u64 {
    JCounter::new(query.q.q()).count(query.a, query.k)
}

/// `J_q(a, K; r, c)`; the query must carry a restriction.
pub fn j_count_restricted(query: &CountQuery) -> Result<u64> {
    let (r, c) = query
        .restriction
        .ok_or_else(|| Error::BadInput("query has no (r, c) restriction".into()))?;
    Ok(JCounter::new(query.q.q()).count_restricted(query.a, query.k, r, c))
}

/// `K^{3/2} q^{-1/2} + K² gcd(a, q) / q + 1`.
pub fn bound_j_hb(q: u64, a: u64, k: u64) -> f64 {
    let g = gcd(a % q, q) as f64;
    let (q, k) = (q as f64, k as f64);
    k.powf(1.5) / q.sqrt() + k * k * g / q + 1.0
}

/// `K² / q + K gcd(a, q)^{1/2} q^{-1/2} + q^{1/2}`.
pub fn bound_j_new(q: u64, a: u64, k: u64) -> f64 {
    let g = gcd(a % q, q) as f64;
    let (q, k) = (q as f64, k as f64);
    k * k / q + k * (g / q).sqrt() + q.sqrt()
}

/// `K² N^{1/2} q^{-1/2} + K`, bounding `Σ_{n <= N} J_q(a n, K)`.
pub fn bound_j_avg(q: u64, n: u64, k: u64) -> f64 {
    let (q, n, k) = (q as f64, n as f64, k as f64);
    k * k * (n / q).sqrt() + k
}

fn residue_set(a: &[u64], p: u64) -> Vec<u64> {
    a.iter().map(|&x| x % p).collect::<BTreeSet<_>>().into_iter().collect()
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::BadInput(format!("{p} is not prime")));
    }
    Ok(())
}

/// Additive energy `E(A, B) = #{a_1 - a_2 = b_1 - b_2}` of two subsets of `F_p`.
///
/// Inputs are reduced mod `p` and deduplicated.
pub fn additive_energy(a: &[u64], b: &[u64], p: u64) -> Result<u64> {
    check_prime(p)?;
    let (a, b) = (residue_set(a, p), residue_set(b, p));
    // a_1 + b_2 = a_2 + b_1: square the representation counts of A + B.
    let mut r = vec![0u64; p as usize];
    for &x in &a {
        for &y in &b {
            r[((x + y) % p) as usize] += 1;
        }
    }
    Ok(r.iter().map(|v| v * v).sum())
}

/// Largest set accepted by [`dp_count`].
pub const DP_COUNT_CAP: usize = 200;

/// `D_p(A) = #{(a_1, ..., a_8) ∈ A^8 : (a_1 - a_2)(a_3 - a_4) = (a_5 - a_6)(a_7 - a_8)}`.
pub fn dp_count(a: &[u64], p: u64) -> Result<u128> {
    check_prime(p)?;
    let a = residue_set(a, p);
    if a.len() > DP_COUNT_CAP {
        return Err(Error::TooLarge(format!(
            "|A| = {} exceeds the cap {DP_COUNT_CAP}",
            a.len()
        )));
    }
    let mut diffs = vec![0u64; p as usize];
    for &x in &a {
        for &y in &a {
            diffs[((x + p - y) % p) as usize] += 1;
        }
    }
    let support: Vec<(u64, u64)> = diffs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| (d as u64, c))
        .collect();
    let n2 = (a.len() * a.len()) as u128;
    let zero = diffs[0] as u128;
    let mut f = vec![0u128; p as usize];
    // products with a zero factor
    f[0] = 2 * zero * n2 - zero * zero;
    for &(d1, c1) in &support {
        for &(d2, c2) in &support {
            f[mul_mod(d1, d2, p) as usize] += (c1 * c2) as u128;
        }
    }
    Ok(f.iter().map(|v| v * v).sum())
}

fn check_in_units(i: &Interval, p: u64, name: &str) -> Result<()> {
    if i.len() >= p || i.hits_zero_mod(p) {
        return Err(Error::OutOfRange(format!("interval {name} must lie inside F_p^*")));
    }
    Ok(())
}

/// `#{(a_1, a_2, b_1, b_2) ∈ A² × B² : a_1 b_1 = a_2 b_2}` for intervals in `F_p^*`.
pub fn product_congruence_count(a: &Interval, b: &Interval, p: u64) -> Result<u64> {
    check_prime(p)?;
    check_in_units(a, p, "A")?;
    check_in_units(b, p, "B")?;
    let mut r = vec![0u64; p as usize];
    for x in a.points() {
        let x = reduce(x, p);
        for y in b.points() {
            r[mul_mod(x, reduce(y, p), p) as usize] += 1;
        }
    }
    Ok(r.iter().map(|v| v * v).sum())
}

/// `#{(a_1, a_2, c_1, ..., c_4) ∈ A² × C⁴ : a_1 (c_1 - c_2) = a_2 (c_3 - c_4) ∈ F_p^*}`.
pub fn mixed_count(a: &Interval, c: &[u64], p: u64) -> Result<u64> {
    check_prime(p)?;
    a.check_fits(p)?;
    let c = residue_set(c, p);
    let mut diffs = vec![0u64; p as usize];
    for &x in &c {
        for &y in &c {
            if x != y {
                diffs[((x + p - y) % p) as usize] += 1;
            }
        }
    }
    let mut g = vec![0u64; p as usize];
    for x in a.points() {
        let x = reduce(x, p);
        if x == 0 {
            continue;
        }
        for (d, &cnt) in diffs.iter().enumerate() {
            if cnt > 0 {
                g[mul_mod(x, d as u64, p) as usize] += cnt;
            }
        }
    }
    Ok(g.iter().skip(1).map(|v| v * v).sum())
}

/// `|A|^{84/13}`.
pub fn dp_bound(size: usize) -> f64 {
    (size as f64).powf(84.0 / 13.0)
}

/// `(A B / p + 1) A B`.
pub fn product_congruence_bound(a: u64, b: u64, p: u64) -> f64 {
    let ab = (a * b) as f64;
    (ab / p as f64 + 1.0) * ab
}

/// Main term `A² C⁴ / p` of [`mixed_count`].
pub fn mixed_main_term(a: u64, c: u64, p: u64) -> f64 {
    (a as f64).powi(2) * (c as f64).powi(4) / p as f64
}

/// Error scale `A C^{42/13}` of [`mixed_count`].
pub fn mixed_error_scale(a: u64, c: u64) -> f64 {
    a as f64 * (c as f64).powf(42.0 / 13.0)
}
