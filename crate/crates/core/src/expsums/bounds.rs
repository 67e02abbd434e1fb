use crate::modarith::{gcd, gcd3, reduce, FactoredModulus};

/// `d(q) gcd(m, n, q)^{1/2} q^{1/2}`: the Weil bound with an explicit constant.
pub fn weil_bound_rhs(m: i64, n: i64, q: &FactoredModulus) -> f64 {
    let qv = q.q();
    let g = gcd3(reduce(m, qv), reduce(n, qv), qv);
    q.divisor_count() as f64 * ((g as f64) * (qv as f64)).sqrt()
}

/// Structured right-hand side `d(q) q^{1/2} gcd(m, n, q)^{1/2}` for `|G*(m, n; q)|`.
pub fn lemma_a2_rhs(m: i64, n: i64, q: &FactoredModulus) -> f64 {
    weil_bound_rhs(m, n, q)
}

/// Structured right-hand side for `|T(x, y, z; q)|`:
/// `d(q)² gcd(x, y, q)^{1/2} gcd(x - y, z, q / gcd(x, y, q))^{1/2} q^{1/2}`.
pub fn lemma_t_rhs(x: i64, y: i64, z: i64, q: &FactoredModulus) -> f64 {
    let qv = q.q();
    let g1 = gcd3(reduce(x, qv), reduce(y, qv), qv);
    let rest = qv / g1;
    let g2 = gcd(gcd(reduce(x.wrapping_sub(y), rest), reduce(z, rest)), rest);
    let d = q.divisor_count() as f64;
    d * d * ((g1 as f64) * (g2 as f64) * (qv as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::factorize;

    #[test]
    fn weil_examples() {
        let q = factorize(36);
        assert!((weil_bound_rhs(0, 0, &q) - 9.0 * 36.0).abs() < 1e-9);
        let p = factorize(101);
        assert!((weil_bound_rhs(1, 1, &p) - 2.0 * 101f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn t_rhs_structure() {
        let q = factorize(9);
        // gcd(3, 6, 9) = 3, then gcd(-3, 0, 3) = 3
        assert!((lemma_t_rhs(3, 6, 0, &q) - 9.0 * (3.0f64 * 3.0 * 9.0).sqrt()).abs() < 1e-9);
        assert!((lemma_t_rhs(1, 2, 1, &q) - 9.0 * 3.0).abs() < 1e-9);
    }
}
