use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::modarith::reduce;

/// Where a weight vector lives: an interval or an explicit list of integers.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Interval(Interval),
    Set(Vec<i64>),
}

/// Complex coefficients indexed by a [`Support`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    support: Support,
    values: Vec<Complex64>,
}

impl WeightVector {
    pub fn on_interval(interval: Interval, values: Vec<Complex64>) -> Result<Self> {
        if values.len() as u64 != interval.len() {
            return Err(Error::BadInput(format!(
                "{} weights for an interval of length {}",
                values.len(),
                interval.len()
            )));
        }
        Self::checked(Support::Interval(interval), values)
    }

    /// Weights on distinct integer points.
    pub fn on_set(points: Vec<i64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != points.len() {
            return Err(Error::BadInput("weights and points differ in length".into()));
        }
        let mut sorted = points.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadInput("support points must be distinct".into()));
        }
        Self::checked(Support::Set(points), values)
    }

    fn checked(support: Support, values: Vec<Complex64>) -> Result<Self> {
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::BadInput("weights must be finite".into()));
        }
        Ok(Self { support, values })
    }

    /// The indicator of an interval.
    pub fn ones(interval: Interval) -> Self {
        let values = vec![Complex64::new(1.0, 0.0); interval.len() as usize];
        Self { support: Support::Interval(interval), values }
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(point, weight)` pairs.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (i64, Complex64)> + '_> {
        match &self.support {
            Support::Interval(i) => Box::new(i.points().zip(self.values.iter().copied())),
            Support::Set(s) => Box::new(s.iter().copied().zip(self.values.iter().copied())),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm_1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn norm_2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { support: self.support.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Interval supports must not be longer than `m`.
    pub fn check_fits(&self, m: u64) -> Result<()> {
        match &self.support {
            Support::Interval(i) => i.check_fits(m),
            Support::Set(_) => Ok(()),
        }
    }

    /// Fold the weights into a length-`m` array indexed by residues.
    pub fn dense(&self, m: u64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); m as usize];
        for (x, v) in self.iter() {
            out[reduce(x, m) as usize] += v;
        }
        out
    }
}

/// How sweep weights are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// Independent random signs.
    Rademacher,
    Ones,
    /// Random points on the unit circle.
    Phase,
}

impl WeightScheme {
    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<Complex64> {
        (0..len)
            .map(|_| match self {
                WeightScheme::Ones => Complex64::new(1.0, 0.0),
                WeightScheme::Rademacher => {
                    Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
                }
                WeightScheme::Phase => {
                    Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>())
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn norms_and_dense() {
        let i = Interval::new(3, 3).unwrap();
        let w = WeightVector::on_interval(
            i,
            vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, -4.0), Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        assert_eq!(w.norm_inf(), 4.0);
        assert_eq!(w.norm_1(), 8.0);
        assert!((w.norm_2() - 26f64.sqrt()).abs() < 1e-15);
        let d = w.dense(5);
        assert_eq!(d[4], Complex64::new(3.0, 0.0));
        assert_eq!(d[0], Complex64::new(0.0, -4.0));
        assert_eq!(d[1], Complex64::new(1.0, 0.0));
        assert!(WeightVector::on_set(vec![1, 1], vec![Complex64::default(); 2]).is_err());
        assert!(WeightVector::on_interval(i, vec![Complex64::default(); 2]).is_err());
    }

    #[test]
    fn schemes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let r = WeightScheme::Rademacher.sample(100, &mut rng);
        assert!(r.iter().all(|v| v.im == 0.0 && v.re.abs() == 1.0));
        assert!(r.iter().any(|v| v.re < 0.0) && r.iter().any(|v| v.re > 0.0));
        let p = WeightScheme::Phase.sample(50, &mut rng);
        assert!(p.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }
}
