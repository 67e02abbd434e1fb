//! The divisor function in arithmetic progressions.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::modarith::{gcd, reduce, FactoredModulus};

/// Euler–Mascheroni constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577215664901532860606;

/// Largest `X` accepted by [`TauTable::new`].
pub const TAU_CAP: u64 = 100_000_000;

/// `τ(n)` for `1 <= n <= X`.
#[derive(Debug, Clone)]
pub struct TauTable {
    x: u64,
    tau: Vec<u16>,
}

impl TauTable {
    pub fn new(x: u64) -> Result<Self> {
        if x > TAU_CAP {
            return Err(Error::TooLarge(format!("X = {x} exceeds the sieve cap {TAU_CAP}")));
        }
        let mut tau = vec![0u16; x as usize + 1];
        for d in 1..=x as usize {
            for m in (d..=x as usize).step_by(d) {
                tau[m] += 1;
            }
        }
        Ok(Self { x, tau })
    }

    pub fn limit(&self) -> u64 {
        self.x
    }

    pub fn tau(&self, n: u64) -> u32 {
        self.tau[n as usize] as u32
    }

    /// `Σ_{n <= X} τ(n)`.
    pub fn total(&self) -> u64 {
        self.tau.iter().map(|&t| t as u64).sum()
    }

    /// `Σ_{n <= X, n ≡ b (mod q)} τ(n)` for every class `b`.
    pub fn class_sums(&self, q: u64) -> Vec<u64> {
        let mut out = vec![0u64; q as usize];
        for n in 1..=self.x {
            out[(n % q) as usize] += self.tau[n as usize] as u64;
        }
        out
    }

    /// `S(X; a, q)`, requiring `gcd(a, q) = 1`.
    pub fn sum_ap(&self, a: i64, q: u64) -> Result<u64> {
        let a = reduce(a, q);
        if gcd(a, q) != 1 && q > 1 {
            return Err(Error::NonCoprime(a, q));
        }
        let start = if a == 0 { q } else { a };
        Ok((start..=self.x).step_by(q as usize).map(|n| self.tau[n as usize] as u64).sum())
    }
}

/// `(φ(q)/q²) X (log X + 2γ - 1) - (2/q) X Σ_{d | q} μ(d) log d / d`.
pub fn main_term(x: u64, q: &FactoredModulus) -> f64 {
    let (xf, qf) = (x as f64, q.q() as f64);
    let first = q.phi() as f64 / (qf * qf) * xf * (xf.ln() + 2.0 * EULER_GAMMA - 1.0);
    let s: f64 = q
        .squarefree_divisors()
        .into_iter()
        .map(|(d, mu)| mu as f64 * (d as f64).ln() / d as f64)
        .sum();
    first - 2.0 / qf * xf * s
}

/// `R(X; a, q) = S(X; a, q) - M(X; a, q)`.
pub fn error_term(tau: &TauTable, a: i64, q: &FactoredModulus) -> Result<f64> {
    Ok(tau.sum_ap(a, q.q())? as f64 - main_term(tau.limit(), q))
}

/// `Σ_{a ∈ I, gcd(a, q) = 1} R(X; a, q)` for an interval `I` of length `< q`.
pub fn family_error(tau: &TauTable, family: &Interval, q: &FactoredModulus) -> Result<f64> {
    let qv = q.q();
    if family.len() >= qv {
        return Err(Error::OutOfRange(format!("family length {} must be below q = {qv}", family.len())));
    }
    let classes = tau.class_sums(qv);
    let m = main_term(tau.limit(), q);
    Ok(family
        .points()
        .map(|a| reduce(a, qv))
        .filter(|&a| gcd(a, qv) == 1)
        .map(|a| classes[a as usize] as f64 - m)
        .sum())
}

/// `X^{0.99} / q`, the scale of `R(X; a, q)` for `q <= X^{2/3 - ε}`.
pub fn hooley_scale(x: u64, q: u64) -> f64 {
    (x as f64).powf(0.99) / q as f64
}

/// `min{q^{1/2} X^{1/4} + X^{1/2}, X^{1/2}(A^{1/4} + A q^{-1/2}), X^{1/2}(1 + A q^{-1/4})}`.
pub fn family_saving(x: u64, a: u64, q: u64) -> f64 {
    let (x, a, q) = (x as f64, a as f64, q as f64);
    let b1 = q.sqrt() * x.powf(0.25) + x.sqrt();
    let b2 = x.sqrt() * (a.powf(0.25) + a / q.sqrt());
    let b3 = x.sqrt() * (1.0 + a * q.powf(-0.25));
    b1.min(b2).min(b3)
}

/// `C (E + A^{2/3} X^{1/3}) X^ε`, valid for `X >= q` and `q³ < A X² / 8`.
pub fn thm33_rhs(x: u64, a: u64, q: u64, epsilon: f64, constant: f64) -> Result<f64> {
    if x < q {
        return Err(Error::OutOfRange("X ≥ q".into()));
    }
    if 8 * (q as u128).pow(3) >= a as u128 * (x as u128).pow(2) {
        return Err(Error::OutOfRange("q³ < AX²/8".into()));
    }
    let (xf, af) = (x as f64, a as f64);
    Ok(constant * (family_saving(x, a, q) + af.powf(2.0 / 3.0) * xf.powf(1.0 / 3.0)) * xf.powf(epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::factorize;

    #[test]
    fn sieve_values() {
        let t = TauTable::new(100).unwrap();
        assert_eq!(t.tau(1), 1);
        assert_eq!(t.tau(12), 6);
        let direct: u64 = (1..=100u64).map(|n| (1..=n).filter(|d| n % d == 0).count() as u64).sum();
        assert_eq!(direct, 482);
        assert_eq!(t.total(), 482);
        assert!(TauTable::new(TAU_CAP + 1).is_err());
    }

    #[test]
    fn progressions() {
        let t = TauTable::new(100).unwrap();
        let direct: u64 = (1..=100u64).filter(|n| n % 3 == 1).map(|n| t.tau(n) as u64).sum();
        assert_eq!(t.sum_ap(1, 3).unwrap(), direct);
        assert_eq!(t.sum_ap(-2, 3).unwrap(), direct);
        assert!(t.sum_ap(3, 6).is_err());
        let classes = t.class_sums(7);
        assert_eq!(classes.iter().sum::<u64>(), t.total());
    }

    #[test]
    fn main_term_collapse_and_scale() {
        let one = factorize(1);
        let x = 1000u64;
        let xf = x as f64;
        assert!((main_term(x, &one) - xf * (xf.ln() + 2.0 * EULER_GAMMA - 1.0)).abs() < 1e-9);
        let t = TauTable::new(100_000).unwrap();
        let q = factorize(101);
        let avg: f64 = (1..101).map(|a| t.sum_ap(a, 101).unwrap() as f64).sum::<f64>() / 100.0;
        let m = main_term(100_000, &q);
        assert!((avg / m - 1.0).abs() < 0.01, "{avg} vs {m}");
    }

    #[test]
    fn family_edges() {
        let t = TauTable::new(5000).unwrap();
        let q = factorize(30);
        // {6} has no units
        let empty = Interval::new(5, 1).unwrap();
        assert_eq!(family_error(&t, &empty, &q).unwrap(), 0.0);
        let fam = Interval::new(0, 29).unwrap();
        let direct: f64 = (1..30).filter(|a| gcd(*a, 30) == 1).map(|a| error_term(&t, a as i64, &q).unwrap()).sum();
        assert!((family_error(&t, &fam, &q).unwrap() - direct).abs() < 1e-6);
        assert!(family_error(&t, &Interval::new(0, 30).unwrap(), &q).is_err());
    }

    #[test]
    fn thm33_ranges() {
        assert!(thm33_rhs(1000, 5, 2000, 0.05, 1.0).is_err());
        // q³ = 8e9 ≥ A X²/8 = 1e9
        assert!(thm33_rhs(100_000, 1, 2000, 0.05, 1.0).is_err());
        let v = thm33_rhs(1_000_000, 30, 10_000, 0.0, 1.0).unwrap();
        let expect = family_saving(1_000_000, 30, 10_000) + 30f64.powf(2.0 / 3.0) * 100.0;
        assert!((v - expect).abs() < 1e-6);
        // first branch wins at X = q³ scale with A = q - 1
        let (x, q) = (1_000_000_000u64, 1000u64);
        let b1 = (q as f64).sqrt() * (x as f64).powf(0.25) + (x as f64).sqrt();
        assert!((family_saving(x, q - 1, q) - b1).abs() < 1e-6);
    }
}
