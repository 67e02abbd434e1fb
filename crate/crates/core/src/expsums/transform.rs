use num_complex::Complex64;

use super::kloosterman::{ramanujan, Kloosterman};
use super::{Method, SumValue};
use crate::dft::{DftPlan, ExpTable, Sign};
use crate::modarith::{factorize, inv_raw, mul_mod, reduce, FactoredModulus};

/// `T(x, y, z; q) = q^{-1} Σ_{t ∈ Z_q} K_q(x, t) K_q(y, t) e_q(-z t)` by direct
/// summation over `t`, with the inner sums from the fast Kloosterman path.
pub fn t_transform_brute(x: i64, y: i64, z: i64, q: &FactoredModulus) -> SumValue {
    let k = Kloosterman::new(q);
    brute_with(&k, x, y, z)
}

fn brute_with(k: &Kloosterman, x: i64, y: i64, z: i64) -> SumValue {
    let q = k.modulus().q();
    let exp = ExpTable::new(q);
    let (x, y) = (reduce(x, q), reduce(y, q));
    let z = reduce(z, q);
    let mut acc = Complex64::default();
    for t in 0..q {
        let kx = k.eval_reduced(x, t).value;
        let ky = k.eval_reduced(y, t).value;
        acc += kx * ky * exp.at((q - mul_mod(z, t, q)) % q);
    }
    SumValue::new(acc / q as f64, Method::Brute, q)
}

#[derive(Debug, Clone)]
struct TPart {
    pj: u64,
    twist: u64,
    prime: bool,
    k: Kloosterman,
}

/// Fast evaluator for `T(x, y, z; q)` at a fixed modulus.
///
/// Splits `q` into prime powers (`x`, `y` are twisted by the cofactor
/// inverse, `z` is not), uses `T(x,y,z;p) = K_p(x z̄, y z̄) e_p((x+y) z̄) - 1`
/// for primes with `p ∤ z` and `c_p(x - y)` for `p | z`, and direct
/// summation over `t` on higher prime powers.
#[derive(Debug, Clone)]
pub struct TTransform {
    modulus: FactoredModulus,
    whole: Kloosterman,
    parts: Vec<TPart>,
}

impl TTransform {
    pub fn new(modulus: &FactoredModulus) -> Self {
        let q = modulus.q();
        let parts = modulus
            .factors()
            .iter()
            .map(|&(p, j)| {
                let pj = p.pow(j);
                TPart {
                    pj,
                    twist: inv_raw((q / pj) % pj, pj).expect("coprime cofactor"),
                    prime: j == 1,
                    k: Kloosterman::for_modulus(pj),
                }
            })
            .collect();
        Self { modulus: modulus.clone(), whole: Kloosterman::new(modulus), parts }
    }

    pub fn for_modulus(q: u64) -> Self {
        Self::new(&factorize(q))
    }

    pub fn modulus(&self) -> &FactoredModulus {
        &self.modulus
    }

    pub fn eval(&self, x: i64, y: i64, z: i64) -> SumValue {
        let q = self.modulus.q();
        let (x, y, z) = (reduce(x, q), reduce(y, q), reduce(z, q));
        if self.parts.is_empty() {
            return SumValue::new(Complex64::new(1.0, 0.0), Method::ClosedForm, 1);
        }
        let mut value = Complex64::new(1.0, 0.0);
        let mut terms = 0;
        let mut all_closed = true;
        for part in &self.parts {
            let m = part.pj;
            let xs = mul_mod(x % m, part.twist, m);
            let ys = mul_mod(y % m, part.twist, m);
            let v = if part.prime {
                prime_t(&part.k, xs, ys, z % m)
            } else {
                all_closed = false;
                brute_with(&part.k, xs as i64, ys as i64, (z % m) as i64)
            };
            value *= v.value;
            terms += v.terms;
        }
        let method = if self.parts.len() > 1 {
            Method::Crt
        } else if all_closed {
            Method::ClosedForm
        } else {
            Method::Brute
        };
        SumValue::new(value, method, terms)
    }

    /// `T(x, y, z; q)` for every `z ∈ Z_q` at once, via one DFT of the products
    /// `K_q(x, t) K_q(y, t)`.
    pub fn row(&self, x: i64, y: i64) -> Vec<Complex64> {
        let q = self.modulus.q();
        let (x, y) = (reduce(x, q), reduce(y, q));
        let mut buf: Vec<Complex64> = (0..q)
            .map(|t| self.whole.eval_reduced(x, t).value * self.whole.eval_reduced(y, t).value)
            .collect();
        DftPlan::new(q as usize).process(&mut buf, Sign::Minus);
        let inv = 1.0 / q as f64;
        buf.iter_mut().for_each(|v| *v *= inv);
        buf
    }
}

fn prime_t(k: &Kloosterman, x: u64, y: u64, z: u64) -> SumValue {
    let p = k.modulus().q();
    if z == 0 {
        let c = ramanujan((x as i64) - (y as i64), k.modulus());
        return SumValue::new(Complex64::new(c as f64, 0.0), Method::ClosedForm, 1);
    }
    let zi = inv_raw(z, p).expect("prime modulus");
    let a = mul_mod(x, zi, p);
    let b = mul_mod(y, zi, p);
    let kv = k.eval_reduced(a, b);
    let phase = crate::dft::e_frac(mul_mod((x + y) % p, zi, p) as i64, p);
    SumValue::new(kv.value * phase - 1.0, Method::ClosedForm, kv.terms)
}

/// `T(x, y, z; q)` through [`TTransform`]; builds a one-off evaluator.
pub fn t_transform_fast(x: i64, y: i64, z: i64, q: &FactoredModulus) -> SumValue {
    TTransform::new(q).eval(x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_is_ramanujan() {
        for q in [5u64, 6, 9, 12, 25, 30] {
            let f = factorize(q);
            for (x, y) in [(1, 1), (2, 5), (0, 3), (4, 4), (7, 1)] {
                let t = t_transform_brute(x, y, 0, &f).value;
                assert!((t.re - ramanujan(x - y, &f) as f64).abs() < 1e-8);
                assert!(t.im.abs() < 1e-8);
            }
        }
        let t = t_transform_brute(1, 1, 0, &factorize(5));
        assert!((t.re() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn fast_matches_brute() {
        for q in [2u64, 3, 4, 5, 6, 7, 8, 9, 12, 15, 18, 25, 27, 30, 36, 45, 49, 60, 77] {
            let f = factorize(q);
            let fast = TTransform::new(&f);
            for x in 0..q.min(9) as i64 {
                for y in [0i64, 1, 2, 5] {
                    let row = fast.row(x, y);
                    for z in 0..q as i64 {
                        let b = t_transform_brute(x, y, z, &f).value;
                        let a = fast.eval(x, y, z).value;
                        let tol = 1e-6 * (q as f64).powf(1.5);
                        assert!((a - b).norm() < tol, "q={q} ({x},{y},{z}): {a} vs {b}");
                        assert!((row[z as usize] - b).norm() < tol);
                    }
                }
            }
        }
    }

    #[test]
    fn six_is_product_of_two_and_three() {
        let (x, y, z) = (1i64, 4, 5);
        let t6 = t_transform_brute(x, y, z, &factorize(6)).value;
        // Cofactor inverses: 3^{-1} mod 2 = 1, 2^{-1} mod 3 = 2.
        let t2 = t_transform_brute(x, y, z, &factorize(2)).value;
        let t3 = t_transform_brute(2 * x, 2 * y, z, &factorize(3)).value;
        assert!((t6 - t2 * t3).norm() < 1e-10);
    }
}
