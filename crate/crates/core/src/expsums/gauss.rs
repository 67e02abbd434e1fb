use num_complex::Complex64;

use super::{Method, SumValue};
use crate::dft::ExpTable;
use crate::error::{Error, Result};
use crate::modarith::{gcd, inverse_table, jacobi_raw, reduce, FactoredModulus};

/// Salié sum `Σ_{x ∈ Z_q^*} (x/q) e_q(m x + n x^{-1})` for odd `q`.
pub fn salie(m: i64, n: i64, q: &FactoredModulus) -> Result<SumValue> {
    let qv = q.q();
    if qv.is_multiple_of(2) {
        return Err(Error::EvenModulus(qv));
    }
    let (m, n) = (reduce(m, qv) as u128, reduce(n, qv) as u128);
    let exp = ExpTable::new(qv);
    let inv = inverse_table(qv);
    let mut acc = Complex64::default();
    let mut terms = 0;
    if qv == 1 {
        return Ok(SumValue::new(Complex64::new(1.0, 0.0), Method::Brute, 1));
    }
    for x in 1..qv {
        let xi = inv[x as usize];
        if xi == 0 {
            continue;
        }
        terms += 1;
        let chi = jacobi_raw(x, qv) as f64;
        let k = ((m * x as u128 + n * xi as u128) % qv as u128) as u64;
        acc += exp.at(k) * chi;
    }
    Ok(SumValue::new(acc, Method::Brute, terms))
}

fn quadratic_sum(m: u64, n: u64, q: u64, units_only: bool) -> (Complex64, u64) {
    let exp = ExpTable::new(q);
    let (m, n, qw) = (m as u128, n as u128, q as u128);
    let mut acc = Complex64::default();
    let mut terms = 0;
    for a in 0..q {
        if units_only && gcd(a, q) != 1 {
            continue;
        }
        let a = a as u128;
        let k = ((m * (a * a % qw) + n * a) % qw) as u64;
        acc += exp.at(k);
        terms += 1;
    }
    (acc, terms)
}

/// Quadratic Gauss sum `G(m, n; q) = Σ_{a ∈ Z_q} e_q(m a² + n a)`.
pub fn gauss(m: i64, n: i64, q: u64) -> SumValue {
    assert!(q >= 1);
    let (v, t) = quadratic_sum(reduce(m, q), reduce(n, q), q, false);
    SumValue::new(v, Method::Brute, t)
}

/// `G*(m, n; q) = Σ_{a ∈ Z_q^*} e_q(m a² + n a)`.
pub fn gauss_star(m: i64, n: i64, q: u64) -> SumValue {
    assert!(q >= 1);
    let (v, t) = quadratic_sum(reduce(m, q), reduce(n, q), q, true);
    SumValue::new(v, Method::Brute, t)
}

/// `G*` through the Möbius expansion `Σ_{d | q} μ(d) G(m d, n; q/d)`.
pub fn gauss_star_mobius(m: i64, n: i64, q: &FactoredModulus) -> SumValue {
    let mut acc = Complex64::default();
    let mut terms = 0;
    for (d, mu) in q.squarefree_divisors() {
        let md = (reduce(m, q.q()) as i128 * d as i128 % (q.q() / d) as i128) as i64;
        let g = gauss(md, n, q.q() / d);
        acc += g.value * mu as f64;
        terms += g.terms;
    }
    SumValue::new(acc, Method::Reduced, terms)
}
