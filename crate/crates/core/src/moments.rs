//! Short averages `𝔪(λ) = Σ_{n ∈ J} K_p(λ, n)` of Kloosterman sums and their
//! moments `Σ_λ |𝔪(λ)|^{2α}`.

use num_complex::Complex64;

use crate::dft::{interval_character_sum, DftPlan, Sign};
use crate::error::{Error, Result};
use crate::expsums::Kloosterman;
use crate::interval::Interval;
use crate::modarith::{inverse_table, is_prime};

/// Magnitudes `|𝔪(λ)|` for `λ ∈ F_p^*`, plus `|𝔪(0)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProfile {
    p: u64,
    interval: Interval,
    zero: f64,
    values: Vec<f64>,
}

impl MomentProfile {
    /// Build from magnitudes at `λ = 0, 1, ..., p - 1`.
    pub fn from_magnitudes(p: u64, interval: Interval, all: Vec<f64>) -> Result<Self> {
        if all.len() as u64 != p {
            return Err(Error::BadInput(format!("expected {p} magnitudes, got {}", all.len())));
        }
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::BadInput("magnitudes must be finite and non-negative".into()));
        }
        Ok(Self { p, interval, zero: all[0], values: all[1..].to_vec() })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    /// `|𝔪(λ)|` for `λ = 1, ..., p - 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at_zero(&self) -> f64 {
        self.zero
    }

    /// `Σ_{λ ∈ F_p} |𝔪(λ)|²`, including `λ = 0`.
    pub fn full_square_sum(&self) -> f64 {
        let mut s = Neumaier::default();
        s.add(self.zero * self.zero);
        for v in &self.values {
            s.add(v * v);
        }
        s.total()
    }
}

fn check_inputs(p: u64, j: &Interval) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::BadInput(format!("{p} is not prime")));
    }
    if j.len() >= p || j.hits_zero_mod(p) {
        return Err(Error::OutOfRange("J must lie inside F_p^*".into()));
    }
    Ok(())
}

/// All `𝔪(λ)` at once: `𝔪(λ) = Σ_{x ∈ F_p^*} e_p(λ x) g(x)` with
/// `g(x) = Σ_{n ∈ J} e_p(n x^{-1})`, one length-`p` transform.
pub fn m_values(p: u64, j: &Interval) -> Result<Vec<Complex64>> {
    check_inputs(p, j)?;
    let inv = inverse_table(p);
    let mut g: Vec<Complex64> = (0..p)
        .map(|x| {
            if x == 0 {
                Complex64::default()
            } else {
                interval_character_sum(j, inv[x as usize] as i64, p)
            }
        })
        .collect();
    DftPlan::new(p as usize).process(&mut g, Sign::Plus);
    Ok(g)
}

/// [`MomentProfile`] through [`m_values`].
pub fn m_profile(p: u64, j: &Interval) -> Result<MomentProfile> {
    let all = m_values(p, j)?.iter().map(|z| z.norm()).collect();
    MomentProfile::from_magnitudes(p, *j, all)
}

/// `𝔪(λ)` for every `λ` by summing Kloosterman sums one at a time.
pub fn m_values_direct(p: u64, j: &Interval) -> Result<Vec<Complex64>> {
    check_inputs(p, j)?;
    let k = Kloosterman::for_modulus(p);
    Ok((0..p as i64)
        .map(|lambda| j.points().map(|n| k.eval(lambda, n).value).sum())
        .collect())
}

/// [`MomentProfile`] through [`m_values_direct`].
pub fn m_profile_direct(p: u64, j: &Interval) -> Result<MomentProfile> {
    let all = m_values_direct(p, j)?.iter().map(|z| z.norm()).collect();
    MomentProfile::from_magnitudes(p, *j, all)
}

/// Magnitudes below this are treated as exact zeros.
pub const ZERO_FLOOR: f64 = 1e-12;

#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `Σ_{λ ∈ F_p^*} |𝔪(λ)|^{2α}` with compensated summation.
pub fn moment(profile: &MomentProfile, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange(format!("alpha = {alpha} must be at least 1")));
    }
    let mut s = Neumaier::default();
    for &v in profile.values() {
        if v >= ZERO_FLOOR {
            s.add((2.0 * alpha * v.ln()).exp());
        }
    }
    Ok(s.total())
}

/// `N^r <= p^{r-1}` in exact arithmetic.
pub fn interval_short_enough(n: u64, p: u64, r: u32) -> bool {
    let lhs = (n as u128).checked_pow(r);
    let rhs = (p as u128).checked_pow(r - 1);
    match (lhs, rhs) {
        (Some(a), Some(b)) => a <= b,
        (None, _) => false,
        (Some(_), None) => true,
    }
}

/// `C p^{2α+ε} N^{(12r-7α)/(12r-7)} (1 + N²/p^{1-1/r})^{7(α-1)/(12r-7)}`.
pub fn thm32_rhs(p: u64, n: u64, r: u32, alpha: f64, epsilon: f64, constant: f64) -> Result<f64> {
    if r == 0 {
        return Err(Error::BadInput("r must be positive".into()));
    }
    let rf = r as f64;
    if !(1.0..=12.0 * rf / 7.0 + 1e-12).contains(&alpha) {
        return Err(Error::OutOfRange("1 ≤ α ≤ 12r/7".into()));
    }
    if !interval_short_enough(n, p, r) {
        return Err(Error::OutOfRange("N ≤ p^{1−1/r}".into()));
    }
    let (pf, nf) = (p as f64, n as f64);
    let den = 12.0 * rf - 7.0;
    let main = pf.powf(2.0 * alpha + epsilon) * nf.powf((12.0 * rf - 7.0 * alpha) / den);
    let corr = (1.0 + nf * nf / pf.powf(1.0 - 1.0 / rf)).powf(7.0 * (alpha - 1.0) / den);
    Ok(constant * main * corr)
}

/// Interpolation exponents `(α₁, α₂)` with `α₁ + α₂ = α` and `α₁ + 7α₂/(12r) = 1`.
pub fn holder_exponents(r: u32, alpha: f64) -> (f64, f64) {
    let rf = r as f64;
    let den = 12.0 * rf - 7.0;
    ((12.0 * rf - 7.0 * alpha) / den, 12.0 * rf * (alpha - 1.0) / den)
}

/// `𝔐₁^{α₁} 𝔐_{12r/7}^{7α₂/12r}`, an upper bound for `𝔐_α` by Hölder.
pub fn holder_rhs(profile: &MomentProfile, r: u32, alpha: f64) -> Result<f64> {
    let (a1, a2) = holder_exponents(r, alpha);
    let top = 12.0 * r as f64 / 7.0;
    let m1 = moment(profile, 1.0)?;
    let mt = moment(profile, top)?;
    Ok(m1.powf(a1) * mt.powf(7.0 * a2 / (12.0 * r as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_profile_matches_direct() {
        for (p, j) in [(101u64, Interval::new(0, 10).unwrap()), (211, Interval::new(30, 14).unwrap())] {
            let fast = m_values(p, &j).unwrap();
            let slow = m_values_direct(p, &j).unwrap();
            let tol = 1e-6 * p as f64 * j.len() as f64;
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < tol);
            }
        }
    }

    #[test]
    fn full_interval_collapse() {
        // Σ_{n=1}^{p-1} K_p(λ, n) = Σ_x e_p(λ x) (Σ_{n ≠ 0} e_p(n x̄)) = -c_p(λ)
        let p = 101;
        let j = Interval::new(0, p - 1).unwrap();
        let v = m_values(p, &j).unwrap();
        assert!((v[0].re - (-(p as f64 - 1.0))).abs() < 1e-8);
        for z in &v[1..] {
            assert!((z.re - 1.0).abs() < 1e-8 && z.im.abs() < 1e-8);
        }
    }

    #[test]
    fn square_sum_is_exact() {
        let p = 211;
        let n = 14;
        let j = Interval::new(0, n).unwrap();
        let prof = m_profile(p, &j).unwrap();
        let exact = (p * p * n - p * n * n) as f64;
        assert!((prof.full_square_sum() / exact - 1.0).abs() < 1e-9);
        let m1 = moment(&prof, 1.0).unwrap();
        assert!(m1 <= (p * p * n) as f64);
    }

    #[test]
    fn moment_edges() {
        let j = Interval::new(0, 3).unwrap();
        let zero = MomentProfile::from_magnitudes(7, j, vec![0.0; 7]).unwrap();
        assert_eq!(moment(&zero, 1.5).unwrap(), 0.0);
        assert!(moment(&zero, 0.5).is_err());
        let prof = MomentProfile::from_magnitudes(7, j, vec![0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 3.0]).unwrap();
        assert!((moment(&prof, 1.0).unwrap() - 14.0).abs() < 1e-12);
        assert!((moment(&prof, 1.5).unwrap() - (1.0 + 8.0 + 27.0)).abs() < 1e-9);
    }

    #[test]
    fn thm32_shapes() {
        let p = 1009u64;
        let n = 20;
        let a1 = thm32_rhs(p, n, 2, 1.0, 0.05, 1.0).unwrap();
        assert!((a1 / ((p as f64).powf(2.05) * n as f64) - 1.0).abs() < 1e-12);
        let top = 24.0 / 7.0;
        let v = thm32_rhs(p, n, 2, top, 0.05, 1.0).unwrap();
        let expect = (p as f64).powf(2.0 * top + 0.05) * (1.0 + 400.0 / (p as f64).sqrt());
        assert!((v / expect - 1.0).abs() < 1e-9);
        assert!(thm32_rhs(p, 32, 2, 1.0, 0.05, 1.0).is_err());
        assert!(thm32_rhs(p, 2, 1, 1.0, 0.05, 1.0).is_err());
        assert!(thm32_rhs(p, 20, 2, 3.5, 0.05, 1.0).is_err());
    }

    #[test]
    fn holder_holds() {
        let p = 211;
        let prof = m_profile(p, &Interval::new(0, 14).unwrap()).unwrap();
        for r in 1..=3 {
            let (a1, a2) = holder_exponents(r, 1.3);
            assert!((a1 + a2 - 1.3).abs() < 1e-12);
            assert!((a1 + 7.0 * a2 / (12.0 * r as f64) - 1.0).abs() < 1e-12);
            let lhs = moment(&prof, 1.3).unwrap();
            assert!(lhs <= holder_rhs(&prof, r, 1.3).unwrap() * (1.0 + 1e-9));
        }
    }
}
