//! Arbitrary-length DFTs and closed-form character sums over intervals.
//!
//! Transforms are delegated to `rustfft`, which covers every length in
//! `O(L log L)` (mixed radix, Rader and Bluestein). A [`DftPlan`] is immutable
//! once built and can be shared across threads.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::interval::Interval;
use crate::modarith::reduce;

/// Direction of the transform: `out[k] = Σ v[j] e(sign * jk / L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Precomputed forward and backward transforms of one length.
#[derive(Clone)]
pub struct DftPlan {
    len: usize,
    plus: Arc<dyn Fft<f64>>,
    minus: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan").field("len", &self.len).finish()
    }
}

impl DftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "DFT length must be positive");
        let mut planner = FftPlanner::new();
        // rustfft's "forward" is e^{-2πi jk/L}, its "inverse" is e^{+2πi jk/L}.
        let minus = planner.plan_fft_forward(len);
        let plus = planner.plan_fft_inverse(len);
        Self { len, plus, minus }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transform in place; `buf.len()` must equal the plan length.
    pub fn process(&self, buf: &mut [Complex64], sign: Sign) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match sign {
            Sign::Plus => self.plus.process(buf),
            Sign::Minus => self.minus.process(buf),
        }
    }

    pub fn transform(&self, v: &[Complex64], sign: Sign) -> Vec<Complex64> {
        let mut buf = v.to_vec();
        self.process(&mut buf, sign);
        buf
    }
}

/// One-shot DFT of any positive length.
pub fn dft(v: &[Complex64], sign: Sign) -> Vec<Complex64> {
    DftPlan::new(v.len()).transform(v, sign)
}

/// `e(k / m) = exp(2πi k / m)` for an integer numerator.
#[inline]
pub fn e_frac(k: i64, m: u64) -> Complex64 {
    let r = reduce(k, m);
    Complex64::from_polar(1.0, 2.0 * PI * (r as f64) / (m as f64))
}

/// Table of `e_m(k)` for `k` in `[0, m)`.
#[derive(Debug, Clone)]
pub struct ExpTable {
    m: u64,
    roots: Vec<Complex64>,
}

impl ExpTable {
    pub fn new(m: u64) -> Self {
        let step = 2.0 * PI / m as f64;
        let roots = (0..m)
            .map(|k| Complex64::from_polar(1.0, step * k as f64))
            .collect();
        Self { m, roots }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    /// `e_m(k)` for `k` already reduced into `[0, m)`.
    #[inline]
    pub fn at(&self, k: u64) -> Complex64 {
        self.roots[k as usize]
    }

    #[inline]
    pub fn at_signed(&self, k: i64) -> Complex64 {
        self.roots[reduce(k, self.m) as usize]
    }
}

/// `Σ_{n ∈ J} e_q(n y)` via the geometric-series closed form.
///
/// Returns exactly `len(J)` when `y ≡ 0 (mod q)`.
pub fn interval_character_sum(j: &Interval, y: i64, q: u64) -> Complex64 {
    assert!(q >= 1);
    let y = reduce(y, q);
    if y == 0 {
        return Complex64::new(j.len() as f64, 0.0);
    }
    let two_q = 2 * q as u128;
    let first = reduce(j.first(), q) as u128;
    let len = j.len() as u128;
    let y = y as u128;
    // Phase of the midpoint: π/q * (2 y (N0+1) + y (N-1)).
    let mid = (2 * y * first + y * ((len - 1) % two_q)) % two_q;
    let phase = PI * mid as f64 / q as f64;
    let num_arg = (len % two_q * y) % two_q;
    let num = (PI * num_arg as f64 / q as f64).sin();
    let den = (PI * y as f64 / q as f64).sin();
    Complex64::from_polar(num / den, phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(v: &[Complex64], sign: Sign) -> Vec<Complex64> {
        let l = v.len();
        let s = if sign == Sign::Plus { 1.0 } else { -1.0 };
        (0..l)
            .map(|k| {
                v.iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let jk = ((j * k) % l) as f64;
                        x * Complex64::from_polar(1.0, s * 2.0 * PI * jk / l as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn ones_and_delta() {
        for l in [1usize, 2, 7, 12, 17] {
            let ones = vec![Complex64::new(1.0, 0.0); l];
            let out = dft(&ones, Sign::Plus);
            assert!((out[0] - Complex64::new(l as f64, 0.0)).norm() < 1e-9);
            assert!(out[1..].iter().all(|z| z.norm() < 1e-9));
            let mut delta = vec![Complex64::default(); l];
            delta[0] = Complex64::new(1.0, 0.0);
            let out = dft(&delta, Sign::Minus);
            assert!(out.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        }
    }

    #[test]
    fn matches_naive_length_17() {
        let v: Vec<Complex64> = (0..17)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        for sign in [Sign::Plus, Sign::Minus] {
            let fast = dft(&v, sign);
            let slow = naive(&v, sign);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn interval_sum_examples() {
        let j = Interval::new(0, 3).unwrap();
        let expect = e_frac(1, 7) + e_frac(2, 7) + e_frac(3, 7);
        assert!((interval_character_sum(&j, 1, 7) - expect).norm() < 1e-12);
        assert_eq!(interval_character_sum(&j, 14, 7), Complex64::new(3.0, 0.0));
        let full = Interval::new(5, 11).unwrap();
        assert!(interval_character_sum(&full, 3, 11).norm() < 1e-12);
        let neg = Interval::new(-20, 9).unwrap();
        let direct: Complex64 = neg.points().map(|n| e_frac(n * -4, 13)).sum();
        assert!((interval_character_sum(&neg, -4, 13) - direct).norm() < 1e-12);
    }
}
