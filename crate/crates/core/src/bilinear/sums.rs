use num_complex::Complex64;

use super::weights::WeightVector;
use crate::dft::{interval_character_sum, DftPlan, ExpTable, Sign};
use crate::error::{Error, Result};
use crate::expsums::{Kloosterman, Method, SumValue};
use crate::interval::Interval;
use crate::modarith::{gcd, inverse_table, is_prime, mul_mod, reduce, FactoredModulus};

/// Evaluation route for a bilinear sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    /// Term by term, with every Kloosterman sum evaluated separately.
    Direct,
    /// Through length-`q` transforms of the weights.
    Dft,
}

/// Per-modulus tables shared by all bilinear sums modulo `q`.
#[derive(Debug, Clone)]
pub struct Bilinear {
    q: u64,
    kloosterman: Kloosterman,
    plan: DftPlan,
    /// `inv[x]` is `x^{-1}` for units, 0 otherwise; `q = 1` treats 0 as a unit.
    inv: Vec<u64>,
    units: Vec<u64>,
    exp: ExpTable,
}

impl Bilinear {
    pub fn new(modulus: &FactoredModulus) -> Self {
        let q = modulus.q();
        let (inv, units) = if q == 1 {
            (vec![0], vec![0])
        } else {
            let inv = inverse_table(q);
            let units = (1..q).filter(|&x| inv[x as usize] != 0).collect();
            (inv, units)
        };
        Self {
            q,
            kloosterman: Kloosterman::new(modulus),
            plan: DftPlan::new(q as usize),
            inv,
            units,
            exp: ExpTable::new(q),
        }
    }

    pub fn for_modulus(q: u64) -> Self {
        Self::new(&crate::modarith::factorize(q))
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    fn dft_terms(&self, extra: usize) -> u64 {
        let q = self.q;
        q * (64 - q.leading_zeros() as u64).max(1) + extra as u64
    }

    /// `Â(y) = Σ_m α_m e_q(m y)` for all `y ∈ Z_q`.
    pub fn transform(&self, w: &WeightVector) -> Result<Vec<Complex64>> {
        w.check_fits(self.q)?;
        let mut buf = w.dense(self.q);
        self.plan.process(&mut buf, Sign::Plus);
        Ok(buf)
    }

    /// `S_{q,a}(α, β) = Σ_m Σ_n α_m β_n K_q(m, a n)`.
    pub fn type2(&self, alpha: &WeightVector, beta: &WeightVector, a: i64, path: Path) -> Result<SumValue> {
        alpha.check_fits(self.q)?;
        beta.check_fits(self.q)?;
        let q = self.q;
        let a = reduce(a, q);
        match path {
            Path::Direct => {
                let mut acc = Complex64::default();
                for (m, am) in alpha.iter() {
                    for (n, bn) in beta.iter() {
                        let k = self.kloosterman.eval_reduced(reduce(m, q), mul_mod(a, reduce(n, q), q));
                        acc += am * bn * k.value;
                    }
                }
                Ok(SumValue::new(acc, Method::Brute, (alpha.len() * beta.len()) as u64 * q))
            }
            Path::Dft => {
                let ah = self.transform(alpha)?;
                let bh = self.transform(beta)?;
                let acc = self
                    .units
                    .iter()
                    .map(|&x| ah[x as usize] * bh[mul_mod(a, self.inv[x as usize], q) as usize])
                    .sum();
                Ok(SumValue::new(acc, Method::Reduced, self.dft_terms(alpha.len() + beta.len())))
            }
        }
    }

    /// `S_{q,a}(α) = Σ_m Σ_{n ∈ J} α_m K_q(m, a n)`.
    pub fn type1(&self, alpha: &WeightVector, j: &Interval, a: i64, path: Path) -> Result<SumValue> {
        match path {
            Path::Direct => self.type2(alpha, &WeightVector::ones(*j), a, Path::Direct),
            Path::Dft => {
                j.check_fits(self.q)?;
                let q = self.q;
                let a = reduce(a, q);
                let ah = self.transform(alpha)?;
                let acc = self
                    .units
                    .iter()
                    .map(|&x| {
                        let y = mul_mod(a, self.inv[x as usize], q);
                        ah[x as usize] * interval_character_sum(j, y as i64, q)
                    })
                    .sum();
                Ok(SumValue::new(acc, Method::Reduced, self.dft_terms(alpha.len())))
            }
        }
    }

    /// `Σ_m Σ_{n ∈ J} α_m K_q(m n, a)`.
    pub fn type1_product(&self, alpha: &WeightVector, j: &Interval, a: i64, path: Path) -> Result<SumValue> {
        alpha.check_fits(self.q)?;
        j.check_fits(self.q)?;
        let q = self.q;
        let a = reduce(a, q);
        match path {
            Path::Direct => {
                let mut acc = Complex64::default();
                for (m, am) in alpha.iter() {
                    let m = reduce(m, q);
                    for n in j.points() {
                        acc += am * self.kloosterman.eval_reduced(mul_mod(m, reduce(n, q), q), a).value;
                    }
                }
                Ok(SumValue::new(acc, Method::Brute, alpha.len() as u64 * j.len() * q))
            }
            Path::Dft => {
                // Fold α over the products m n, then pair with the row K_q(t, a) for all t.
                let mut folded = vec![Complex64::default(); q as usize];
                for (m, am) in alpha.iter() {
                    let m = reduce(m, q);
                    for n in j.points() {
                        folded[mul_mod(m, reduce(n, q), q) as usize] += am;
                    }
                }
                let mut row = vec![Complex64::default(); q as usize];
                for &x in &self.units {
                    row[x as usize] = self.exp.at(mul_mod(a, self.inv[x as usize], q));
                }
                self.plan.process(&mut row, Sign::Plus);
                let acc = folded.iter().zip(&row).map(|(f, k)| f * k).sum();
                Ok(SumValue::new(acc, Method::Reduced, self.dft_terms(alpha.len() * j.len() as usize)))
            }
        }
    }

    /// Units `k` of `Z_q` with `<c k>_r <= K`, in increasing order.
    pub fn admissible(&self, r: u64, c: i64, k: u64) -> Result<Vec<u64>> {
        let q = self.q;
        if r == 0 || !q.is_multiple_of(r) {
            return Err(Error::BadInput(format!("r = {r} does not divide q = {q}")));
        }
        let c = reduce(c, r);
        if r > 1 && gcd(c, r) != 1 {
            return Err(Error::NonCoprime(c, r));
        }
        if k > r {
            return Err(Error::OutOfRange(format!("K = {k} exceeds r = {r}")));
        }
        Ok(self
            .units
            .iter()
            .copied()
            .filter(|&x| {
                let v = mul_mod(c, x % r, r);
                (if v == 0 { r } else { v }) <= k
            })
            .collect())
    }

    /// `W_{q,a}(α, γ; r, c) = Σ_m Σ_{k ∈ Z_q^*, <ck>_r <= K} α_m γ_k e_q(a m k^{-1})`.
    ///
    /// `gamma` is read modulo `q`; its values at non-admissible residues are ignored.
    #[allow(clippy::too_many_arguments)]
    pub fn w(
        &self,
        alpha: &WeightVector,
        gamma: &WeightVector,
        r: u64,
        c: i64,
        k: u64,
        a: i64,
        path: Path,
    ) -> Result<SumValue> {
        let q = self.q;
        let a = reduce(a, q);
        if gcd(a, q) != 1 && q > 1 {
            return Err(Error::NonCoprime(a, q));
        }
        alpha.check_fits(q)?;
        gamma.check_fits(q)?;
        let adm = self.admissible(r, c, k)?;
        let g = gamma.dense(q);
        self.fractional(alpha, &adm, &g, a, path)
    }

    /// `Σ_m Σ_{k ∈ ks} α_m g[k] e_q(a m k^{-1})` over units `ks`.
    fn fractional(&self, alpha: &WeightVector, ks: &[u64], g: &[Complex64], a: u64, path: Path) -> Result<SumValue> {
        let q = self.q;
        match path {
            Path::Direct => {
                let mut acc = Complex64::default();
                for (m, am) in alpha.iter() {
                    let am_a = mul_mod(a, reduce(m, q), q);
                    for &k in ks {
                        acc += am * g[k as usize] * self.exp.at(mul_mod(am_a, self.inv[k as usize], q));
                    }
                }
                Ok(SumValue::new(acc, Method::Brute, (alpha.len() * ks.len()) as u64))
            }
            Path::Dft => {
                let ah = self.transform(alpha)?;
                let acc = ks
                    .iter()
                    .map(|&k| g[k as usize] * ah[mul_mod(a, self.inv[k as usize], q) as usize])
                    .sum();
                Ok(SumValue::new(acc, Method::Reduced, self.dft_terms(alpha.len() + ks.len())))
            }
        }
    }

    fn require_prime(&self) -> Result<()> {
        if !is_prime(self.q) {
            return Err(Error::BadInput(format!("{} is not prime", self.q)));
        }
        Ok(())
    }

    /// `W♯_{p,a}(α, γ) = Σ_{m ∈ M} Σ_{k ∈ K} α_m γ_k e_p(a m k^{-1})` for `γ` on an interval.
    pub fn wsharp(&self, alpha: &WeightVector, gamma: &WeightVector, a: i64, path: Path) -> Result<SumValue> {
        self.require_prime()?;
        let p = self.q;
        let interval = match gamma.support() {
            super::Support::Interval(i) => *i,
            super::Support::Set(_) => {
                return Err(Error::BadInput("γ must be supported on an interval".into()))
            }
        };
        if interval.hits_zero_mod(p) {
            return Err(Error::ZeroInSupport(p));
        }
        let ks: Vec<u64> = interval.points().map(|k| reduce(k, p)).collect();
        let mut g = vec![Complex64::default(); p as usize];
        for (k, v) in gamma.iter() {
            g[reduce(k, p) as usize] += v;
        }
        self.fractional(alpha, &ks, &g, reduce(a, p), path)
    }

    /// `S♯_p(α) = Σ_{m ∈ M} Σ_{n ∈ J} α_m K_p(m, n)`.
    pub fn ssharp(&self, alpha: &WeightVector, j: &Interval, path: Path) -> Result<SumValue> {
        self.require_prime()?;
        self.type1(alpha, j, 1, path)
    }
}

/// [`Bilinear::type2`] with a one-off context.
pub fn type2_sum(alpha: &WeightVector, beta: &WeightVector, a: i64, q: &FactoredModulus, path: Path) -> Result<SumValue> {
    Bilinear::new(q).type2(alpha, beta, a, path)
}

/// [`Bilinear::type1`] with a one-off context.
pub fn type1_sum(alpha: &WeightVector, j: &Interval, a: i64, q: &FactoredModulus, path: Path) -> Result<SumValue> {
    Bilinear::new(q).type1(alpha, j, a, path)
}

/// [`Bilinear::w`] with a one-off context.
#[allow(clippy::too_many_arguments)]
pub fn w_sum(
    alpha: &WeightVector,
    gamma: &WeightVector,
    r: u64,
    c: i64,
    k: u64,
    a: i64,
    q: &FactoredModulus,
    path: Path,
) -> Result<SumValue> {
    Bilinear::new(q).w(alpha, gamma, r, c, k, a, path)
}

/// [`Bilinear::wsharp`] with a one-off context.
pub fn wsharp_sum(alpha: &WeightVector, gamma: &WeightVector, a: i64, p: u64, path: Path) -> Result<SumValue> {
    Bilinear::for_modulus(p).wsharp(alpha, gamma, a, path)
}

/// [`Bilinear::ssharp`] with a one-off context.
pub fn ssharp_sum(alpha: &WeightVector, j: &Interval, p: u64, path: Path) -> Result<SumValue> {
    Bilinear::for_modulus(p).ssharp(alpha, j, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsums::kloosterman_brute;
    use crate::modarith::factorize;

    fn signs(i: Interval, seed: u64) -> WeightVector {
        let vals = (0..i.len())
            .map(|t| {
                let bit = (t.wrapping_mul(2654435761).wrapping_add(seed) >> 3) & 1;
                Complex64::new(if bit == 1 { 1.0 } else { -1.0 }, 0.0)
            })
            .collect();
        WeightVector::on_interval(i, vals).unwrap()
    }

    #[test]
    fn single_term_and_zero() {
        let f = factorize(101);
        let one = WeightVector::ones(Interval::new(4, 1).unwrap());
        let two = WeightVector::ones(Interval::new(6, 1).unwrap());
        for path in [Path::Direct, Path::Dft] {
            let s = type2_sum(&one, &two, 3, &f, path).unwrap();
            assert!((s.value - kloosterman_brute(5, 21, &f).value).norm() < 1e-9);
        }
        let zero = one.scaled(Complex64::default());
        assert_eq!(type2_sum(&zero, &two, 3, &f, Path::Dft).unwrap().value.norm(), 0.0);
    }

    #[test]
    fn paths_agree() {
        for q in [1u64, 2, 12, 49, 60, 101, 105] {
            let b = Bilinear::for_modulus(q);
            let tol = 1e-6 * (q as f64).powf(1.5);
            let i = Interval::new(-3, 10.min(q)).unwrap();
            let j = Interval::new(7, 9.min(q)).unwrap();
            let alpha = signs(i, q);
            let beta = signs(j, q + 1);
            for a in [1i64, 2, 7] {
                let d = b.type2(&alpha, &beta, a, Path::Direct).unwrap().value;
                let f = b.type2(&alpha, &beta, a, Path::Dft).unwrap().value;
                assert!((d - f).norm() < tol, "type2 q={q}");
                let d = b.type1(&alpha, &j, a, Path::Direct).unwrap().value;
                let f = b.type1(&alpha, &j, a, Path::Dft).unwrap().value;
                assert!((d - f).norm() < tol, "type1 q={q}");
                let d = b.type1_product(&alpha, &j, a, Path::Direct).unwrap().value;
                let f = b.type1_product(&alpha, &j, a, Path::Dft).unwrap().value;
                assert!((d - f).norm() < tol, "product q={q}");
            }
        }
    }

    #[test]
    fn full_period_type1() {
        let q = 30;
        let b = Bilinear::for_modulus(q);
        let alpha = signs(Interval::new(0, 8).unwrap(), 3);
        let j = Interval::new(0, q).unwrap();
        let d = b.type1(&alpha, &j, 7, Path::Direct).unwrap().value;
        let f = b.type1(&alpha, &j, 7, Path::Dft).unwrap().value;
        assert!((d - f).norm() < 1e-8);
        assert!(b.type1(&alpha, &Interval::new(0, q + 1).unwrap(), 1, Path::Dft).is_err());
    }

    #[test]
    fn w_admissible_set() {
        let b = Bilinear::for_modulus(60);
        let adm = b.admissible(6, 5, 2).unwrap();
        let direct: Vec<u64> = (1..60)
            .filter(|&k| gcd(k, 60) == 1)
            .filter(|&k| {
                let v = (5 * k) % 6;
                let v = if v == 0 { 6 } else { v };
                v <= 2
            })
            .collect();
        assert_eq!(adm, direct);
        let alpha = signs(Interval::new(0, 7).unwrap(), 1);
        let gamma = WeightVector::on_set(
            (0..60).collect(),
            (0..60).map(|k| Complex64::from_polar(1.0, k as f64)).collect(),
        )
        .unwrap();
        let d = b.w(&alpha, &gamma, 6, 5, 2, 7, Path::Direct).unwrap();
        let f = b.w(&alpha, &gamma, 6, 5, 2, 7, Path::Dft).unwrap();
        assert!((d.value - f.value).norm() < 1e-9);
        let ceiling = alpha.norm_2() * gamma.norm_inf() * 7f64.sqrt() * adm.len() as f64;
        assert!(d.norm() <= ceiling + 1e-9);
        assert!(b.w(&alpha, &gamma, 6, 5, 2, 6, Path::Dft).is_err());
    }

    #[test]
    fn sharp_sums() {
        let p = 211;
        let b = Bilinear::for_modulus(p);
        let pts: Vec<i64> = (0..30).map(|i| (i * i * 13 + 5) % 211).collect();
        let mut uniq = pts.clone();
        uniq.sort();
        uniq.dedup();
        let alpha = WeightVector::on_set(uniq.clone(), vec![Complex64::new(1.0, 0.5); uniq.len()]).unwrap();
        let gamma = signs(Interval::new(3, 40).unwrap(), 9);
        let d = b.wsharp(&alpha, &gamma, 17, Path::Direct).unwrap();
        let f = b.wsharp(&alpha, &gamma, 17, Path::Dft).unwrap();
        assert!((d.value - f.value).norm() < 1e-8);
        let bad = signs(Interval::new(-2, 5).unwrap(), 1);
        assert_eq!(b.wsharp(&alpha, &bad, 1, Path::Dft), Err(Error::ZeroInSupport(211)));
        let j = Interval::new(0, 15).unwrap();
        let d = b.ssharp(&alpha, &j, Path::Direct).unwrap().value;
        let f = b.ssharp(&alpha, &j, Path::Dft).unwrap().value;
        assert!((d - f).norm() < 1e-6 * 211f64.powf(1.5));
        assert!(Bilinear::for_modulus(12).ssharp(&alpha, &j, Path::Dft).is_err());
    }
}
