use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::reduce;

/// The block of consecutive integers `{offset + 1, ..., offset + len}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    offset: i64,
    len: u64,
}

impl Interval {
    pub fn new(offset: i64, len: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::BadInput("interval length must be at least 1".into()));
        }
        if (offset as i128) + (len as i128) > i64::MAX as i128 {
            return Err(Error::TooLarge("interval end overflows i64".into()));
        }
        Ok(Self { offset, len })
    }

    /// `{1, ..., len}`.
    pub fn initial(len: u64) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> i64 {
        self.offset + 1
    }

    pub fn last(&self) -> i64 {
        self.offset + self.len as i64
    }

    pub fn points(&self) -> impl Iterator<Item = i64> + Clone {
        self.first()..=self.last()
    }

    /// True when some point is `≡ 0 (mod m)`.
    pub fn hits_zero_mod(&self, m: u64) -> bool {
        if self.len >= m {
            return true;
        }
        let start = reduce(self.first(), m);
        start == 0 || start + self.len > m
    }

    /// Reject supports that would alias under reduction modulo `m`.
    pub fn check_fits(&self, m: u64) -> Result<()> {
        if self.len > m {
            return Err(Error::OutOfRange(format!(
                "interval of length {} is longer than the modulus {m}",
                self.len
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_zero_hits() {
        let j = Interval::new(-2, 4).unwrap();
        assert_eq!(j.points().collect::<Vec<_>>(), vec![-1, 0, 1, 2]);
        assert!(j.hits_zero_mod(7));
        let k = Interval::new(0, 6).unwrap();
        assert!(!k.hits_zero_mod(7));
        assert!(Interval::new(0, 7).unwrap().hits_zero_mod(7));
        assert!(Interval::new(5, 3).unwrap().hits_zero_mod(7));
        assert!(!Interval::new(7, 6).unwrap().hits_zero_mod(7));
        assert!(Interval::new(0, 0).is_err());
    }
}
