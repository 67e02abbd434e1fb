use num_complex::Complex64;

use super::{Method, SumValue};
use crate::dft::ExpTable;
use crate::modarith::{
    factorize, gcd, inv_raw, jacobi_raw, mul_mod, reduce, sqrt_mod_prime_power, FactoredModulus,
};

/// Units of `Z_m` with their inverses and a root-of-unity table.
#[derive(Debug, Clone)]
pub(crate) struct UnitTable {
    m: u64,
    units: Vec<(u64, u64)>,
    exp: ExpTable,
}

impl UnitTable {
    pub(crate) fn new(m: u64) -> Self {
        let units = if m == 1 {
            vec![(0, 0)]
        } else {
            let inv = crate::modarith::inverse_table(m);
            (1..m)
                .filter(|&x| inv[x as usize] != 0)
                .map(|x| (x, inv[x as usize]))
                .collect()
        };
        Self { m, units, exp: ExpTable::new(m) }
    }

    /// `Σ_{x ∈ Z_m^*} e_m(a x + b x^{-1})` for reduced `a, b`.
    pub(crate) fn kloosterman(&self, a: u64, b: u64) -> Complex64 {
        let m = self.m;
        let mut acc = Complex64::default();
        if m < (1 << 31) {
            for &(x, xi) in &self.units {
                acc += self.exp.at((a * x + b * xi) % m);
            }
        } else {
            for &(x, xi) in &self.units {
                acc += self.exp.at(((a as u128 * x as u128 + b as u128 * xi as u128) % m as u128) as u64);
            }
        }
        acc
    }

    pub(crate) fn len(&self) -> u64 {
        self.units.len() as u64
    }
}

/// Reference evaluator: direct summation over the units of `Z_q`.
#[derive(Debug, Clone)]
pub struct BruteKloosterman {
    table: UnitTable,
}

impl BruteKloosterman {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1);
        Self { table: UnitTable::new(q) }
    }

    pub fn eval(&self, m: i64, n: i64) -> SumValue {
        let q = self.table.m;
        let v = self.table.kloosterman(reduce(m, q), reduce(n, q));
        SumValue::new(v, Method::Brute, self.table.len())
    }
}

/// `K_q(m, n)` by direct summation over all `φ(q)` units.
pub fn kloosterman_brute(m: i64, n: i64, q: &FactoredModulus) -> SumValue {
    BruteKloosterman::new(q.q()).eval(m, n)
}

#[derive(Debug, Clone)]
enum PartKind {
    /// Primes and powers of two: direct summation.
    Direct(UnitTable),
    /// Odd `p^j` with `j >= 2`; the table serves the terminal modulus `p`.
    OddPower { prime: UnitTable },
}

#[derive(Debug, Clone)]
struct Part {
    p: u64,
    j: u32,
    pj: u64,
    /// `(q / p^j)^{-1} mod p^j`.
    twist: u64,
    kind: PartKind,
}

/// Fast Kloosterman evaluator for a fixed modulus.
///
/// Uses twisted multiplicativity over the prime-power factors, then on each
/// odd `p^j` (`j >= 2`) pulls out the common `p`-power, detects the vanishing
/// cases and applies the square-root closed form. Primes and powers of two are
/// summed directly.
#[derive(Debug, Clone)]
pub struct Kloosterman {
    modulus: FactoredModulus,
    parts: Vec<Part>,
}

impl Kloosterman {
    pub fn new(modulus: &FactoredModulus) -> Self {
        let q = modulus.q();
        let parts = modulus
            .factors()
            .iter()
            .map(|&(p, j)| {
                let pj = p.pow(j);
                let twist = inv_raw((q / pj) % pj, pj).expect("coprime cofactor");
                let kind = if j == 1 || p == 2 {
                    PartKind::Direct(UnitTable::new(pj))
                } else {
                    PartKind::OddPower { prime: UnitTable::new(p) }
                };
                Part { p, j, pj, twist, kind }
            })
            .collect();
        Self { modulus: modulus.clone(), parts }
    }

    pub fn for_modulus(q: u64) -> Self {
        Self::new(&factorize(q))
    }

    pub fn modulus(&self) -> &FactoredModulus {
        &self.modulus
    }

    pub fn eval(&self, m: i64, n: i64) -> SumValue {
        let q = self.modulus.q();
        self.eval_reduced(reduce(m, q), reduce(n, q))
    }

    /// Evaluate with `m, n` already reduced modulo `q`.
    pub fn eval_reduced(&self, m: u64, n: u64) -> SumValue {
        match self.parts.len() {
            0 => SumValue::new(Complex64::new(1.0, 0.0), Method::ClosedForm, 1),
            1 => {
                let part = &self.parts[0];
                eval_part(part, m % part.pj, n % part.pj)
            }
            _ => {
                let mut value = Complex64::new(1.0, 0.0);
                let mut terms = 0;
                for part in &self.parts {
                    let a = mul_mod(m % part.pj, part.twist, part.pj);
                    let b = mul_mod(n % part.pj, part.twist, part.pj);
                    let v = eval_part(part, a, b);
                    value *= v.value;
                    terms += v.terms;
                }
                SumValue::new(value, Method::Crt, terms)
            }
        }
    }
}

fn eval_part(part: &Part, m: u64, n: u64) -> SumValue {
    match &part.kind {
        PartKind::Direct(table) => {
            SumValue::new(table.kloosterman(m, n), Method::Brute, table.len())
        }
        PartKind::OddPower { prime } => odd_prime_power(part.p, part.j, part.pj, prime, m, n),
    }
}

fn odd_prime_power(p: u64, j: u32, pj: u64, prime: &UnitTable, m: u64, n: u64) -> SumValue {
    let phi = pj / p * (p - 1);
    if m == 0 && n == 0 {
        return SumValue::new(Complex64::new(phi as f64, 0.0), Method::ClosedForm, 1);
    }
    // Pull out d = gcd(m, n, p^j) = p^s with s < j.
    let mut s = 0u32;
    let (mut m, mut n) = (m, n);
    while m % p == 0 && n % p == 0 {
        m /= p;
        n /= p;
        s += 1;
    }
    let d = p.pow(s);
    let k = j - s;
    let qs = pj / d;
    let method = if s > 0 { Method::Reduced } else { Method::ClosedForm };
    let scale = d as f64;

    if k == 1 {
        let v = prime.kloosterman(m % p, n % p);
        let method = if s > 0 { Method::Reduced } else { Method::Brute };
        return SumValue::new(v * scale, method, prime.len());
    }
    let m = m % qs;
    let n = n % qs;
    if m == 0 || n == 0 {
        let c = ramanujan_prime_power(p, k, if m == 0 { n } else { m });
        return SumValue::new(Complex64::new(scale * c as f64, 0.0), method, 1);
    }
    if m.is_multiple_of(p) != n.is_multiple_of(p) {
        return SumValue::new(Complex64::default(), method, 1);
    }
    // Both are units: K vanishes unless m ≡ l² n.
    let t = mul_mod(m, inv_raw(n, qs).expect("unit"), qs);
    let v = match sqrt_mod_prime_power(t as i64, p, k).expect("odd prime, unit radicand") {
        None => 0.0,
        Some(l) => closed_form_value(m, n, qs, l),
    };
    SumValue::new(Complex64::new(scale * v, 0.0), method, 1)
}

/// `c_{p^k}(a)` for `p^k ∤ a` or `a = 0`.
fn ramanujan_prime_power(p: u64, k: u32, a: u64) -> i64 {
    let pk = p.pow(k);
    let pk1 = pk / p;
    if a.is_multiple_of(pk) {
        (pk - pk1) as i64
    } else if a.is_multiple_of(pk1) {
        -(pk1 as i64)
    } else {
        0
    }
}

fn closed_form_value(_m: u64, n: u64, q: u64, l: u64) -> f64 {
    // With L = l n we have m n ≡ L²; K = 2 (L/q) √q Re(ε_q e_q(2L)).
    let big_l = mul_mod(l, n, q);
    let sym = jacobi_raw(big_l, q) as f64;
    let angle = 2.0 * std::f64::consts::PI * (mul_mod(2, big_l, q) as f64) / q as f64;
    let re = if q % 4 == 1 { angle.cos() } else { -angle.sin() };
    2.0 * sym * (q as f64).sqrt() * re
}

/// Closed form of `K_q(m, n)` for odd `q = p^j`, `j >= 2`, `gcd(mn, q) = 1`,
/// evaluated at a caller-chosen root `l` of `m ≡ l² n (mod q)`.
///
/// Returns `None` when `l` is not such a root or the preconditions fail.
pub fn kloosterman_closed_form(m: i64, n: i64, p: u64, j: u32, l: u64) -> Option<f64> {
    if p.is_multiple_of(2) || j < 2 {
        return None;
    }
    let q = p.pow(j);
    let (m, n) = (reduce(m, q), reduce(n, q));
    if gcd(m, q) != 1 || gcd(n, q) != 1 {
        return None;
    }
    if mul_mod(mul_mod(l, l, q), n, q) != m {
        return None;
    }
    Some(closed_form_value(m, n, q, l % q))
}

/// Fast `K_q(m, n)`; builds a one-off [`Kloosterman`] evaluator.
pub fn kloosterman_fast(m: i64, n: i64, q: &FactoredModulus) -> SumValue {
    Kloosterman::new(q).eval(m, n)
}

/// Ramanujan sum `c_q(m) = Σ_{d | gcd(m, q)} d μ(q/d)`, exact.
pub fn ramanujan(m: i64, q: &FactoredModulus) -> i64 {
    let g = gcd(reduce(m, q.q()), q.q());
    // q % q == 0, so g == 0 only when q == 1
    let g = if g == 0 { q.q() } else { g };
    q.divisors()
        .into_iter()
        .filter(|d| g % d == 0)
        .map(|d| d as i64 * crate::modarith::mobius(q.q() / d) as i64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(q: u64) -> FactoredModulus {
        factorize(q)
    }

    #[test]
    fn brute_examples() {
        let q = fm(12);
        assert!((kloosterman_brute(0, 0, &q).re() - 4.0).abs() < 1e-12);
        let k = kloosterman_brute(1, 1, &fm(5)).value;
        let expect = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
        assert!((k.re - expect).abs() < 1e-12 && k.im.abs() < 1e-12);
        assert!((expect - 0.381966).abs() < 1e-6);
        for m in -5..20 {
            let r = kloosterman_brute(m, 0, &fm(18)).re();
            assert!((r - ramanujan(m, &fm(18)) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn fast_matches_brute_on_prime_powers() {
        for q in [9u64, 25, 27, 49, 81, 121, 125, 243, 343, 16, 32, 45, 98, 2 * 3 * 49] {
            let fast = Kloosterman::for_modulus(q);
            let brute = BruteKloosterman::new(q);
            for m in 0..q.min(40) as i64 {
                for n in [0i64, 1, 2, 3, 5, 7, 9, 14, 27, 49, q as i64 - 1] {
                    let a = fast.eval(m, n).value;
                    let b = brute.eval(m, n).value;
                    assert!((a - b).norm() < 1e-6 * q as f64, "q={q} m={m} n={n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn lemma_vanishing_and_pullout() {
        // p | m, j >= 2: K_q(m, 1) = 0
        for (p, j) in [(3u64, 2u32), (5, 3), (7, 2)] {
            let q = fm(p.pow(j));
            for m1 in 1..6 {
                assert!(kloosterman_fast(p as i64 * m1, 1, &q).norm() < 1e-9);
                assert!(kloosterman_brute(p as i64 * m1, 1, &q).norm() < 1e-9);
            }
        }
        // d = gcd < p^j: K = d K_{q/d}(m/d, n/d)
        let q = fm(125);
        let lhs = kloosterman_brute(5 * 3, 5 * 7, &q).re();
        let rhs = 5.0 * kloosterman_brute(3, 7, &fm(25)).re();
        assert!((lhs - rhs).abs() < 1e-9);
        assert!((kloosterman_fast(15, 35, &q).re() - lhs).abs() < 1e-9);
        assert_eq!(kloosterman_fast(15, 35, &q).method, Method::Reduced);
    }

    #[test]
    fn closed_form_root_invariance() {
        for (p, j) in [(3u64, 2u32), (3, 3), (5, 2), (7, 2), (11, 2), (13, 3)] {
            let q = p.pow(j);
            for m in 1..q as i64 {
                let n = 1 + (m % 3);
                if (m as u64).is_multiple_of(p) || (n as u64).is_multiple_of(p) {
                    continue;
                }
                let t = mul_mod(reduce(m, q), inv_raw(n as u64, q).unwrap(), q);
                if let Some(l) = sqrt_mod_prime_power(t as i64, p, j).unwrap() {
                    let a = kloosterman_closed_form(m, n, p, j, l).unwrap();
                    let b = kloosterman_closed_form(m, n, p, j, q - l).unwrap();
                    assert!((a - b).abs() < 1e-10 * (q as f64).sqrt());
                    assert!((a - kloosterman_brute(m, n, &fm(q)).re()).abs() < 1e-8);
                }
            }
        }
        assert_eq!(kloosterman_closed_form(1, 1, 5, 2, 2), None);
    }

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan(0, &fm(12)), 4);
        assert_eq!(ramanujan(4, &fm(6)), -1);
        assert_eq!(ramanujan(5, &fm(1)), 1);
        for q in 1..60u64 {
            for m in 0..70i64 {
                let c = ramanujan(m, &fm(q));
                assert!(c.unsigned_abs() <= gcd(m as u64, q).max(if m == 0 { q } else { 0 }));
            }
        }
    }

    #[test]
    fn trivial_modulus() {
        let one = fm(1);
        assert_eq!(kloosterman_fast(3, 4, &one).re(), 1.0);
        assert!((kloosterman_brute(3, 4, &one).re() - 1.0).abs() < 1e-15);
    }
}
