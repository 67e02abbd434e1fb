//! Sweep records and their CSV / JSON renderings.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the JSON report and calibration layouts.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Violated,
    Skipped,
}

/// One grid point of a sweep.
///
/// Field meaning depends on the target; unused parameters are 0. The
/// T-transform records carry `(x, y, z)` in `(m, n, k)`, the divisor records
/// carry `X` in `n` and the family length `A` in `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub target: String,
    pub q: u64,
    pub m: u64,
    pub n: u64,
    pub k: u64,
    pub r: u64,
    pub c: u64,
    pub a: u64,
    pub variant: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub status: Status,
    pub reason: String,
}

impl RatioRecord {
    pub(crate) fn key(&self) -> (&str, u64, u64, u64, u64, u64, u64, u64, &str) {
        (&self.target, self.q, self.m, self.n, self.k, self.r, self.c, self.a, &self.variant)
    }

    /// Fill in a measurement; `violated` iff the ratio exceeds 1.
    pub(crate) fn measured(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        self.status = if self.ratio > 1.0 { Status::Violated } else { Status::Ok };
        self.reason.clear();
        self
    }

    pub(crate) fn skipped(mut self, reason: impl Into<String>) -> Self {
        self.lhs = 0.0;
        self.rhs = 0.0;
        self.ratio = 0.0;
        self.status = Status::Skipped;
        self.reason = reason.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub points: u64,
    pub ok: u64,
    pub violated: u64,
    pub skipped: u64,
    pub max_ratio: f64,
}

/// Records in parameter order plus a per-target summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub seed: u64,
    pub epsilon: f64,
    pub summary: BTreeMap<String, TargetSummary>,
    pub records: Vec<RatioRecord>,
}

impl SweepReport {
    pub fn new(seed: u64, epsilon: f64, mut records: Vec<RatioRecord>) -> Self {
        records.sort_by(|x, y| x.key().cmp(&y.key()));
        let mut summary: BTreeMap<String, TargetSummary> = BTreeMap::new();
        for r in &records {
            let s = summary.entry(r.target.clone()).or_default();
            s.points += 1;
            match r.status {
                Status::Ok => s.ok += 1,
                Status::Violated => s.violated += 1,
                Status::Skipped => s.skipped += 1,
            }
            if r.status != Status::Skipped {
                s.max_ratio = s.max_ratio.max(r.ratio);
            }
        }
        Self { schema_version: SCHEMA_VERSION, seed, epsilon, summary, records }
    }

    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Violated).count()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        if self.records.is_empty() {
            // keep the header even without rows
            w.write_record([
                "target", "q", "m", "n", "k", "r", "c", "a", "variant", "lhs", "rhs", "ratio", "status", "reason",
            ])
            .map_err(csv_err)?;
        }
        for r in &self.records {
            w.serialize(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_file(&dir.join(format!("{stem}.csv")), &self.to_csv()?)?;
        write_file(&dir.join(format!("{stem}.json")), &self.to_json()?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub(crate) fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(target: &str, q: u64) -> RatioRecord {
        RatioRecord {
            target: target.into(),
            q,
            m: 1,
            n: 2,
            k: 0,
            r: 0,
            c: 0,
            a: 1,
            variant: "a".into(),
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            status: Status::Ok,
            reason: String::new(),
        }
    }

    #[test]
    fn status_follows_ratio() {
        let r = rec("t", 5).measured(2.0, 4.0);
        assert_eq!((r.ratio, r.status), (0.5, Status::Ok));
        let r = rec("t", 5).measured(4.0, 2.0);
        assert_eq!(r.status, Status::Violated);
        let r = rec("t", 5).measured(2.0, 2.0);
        assert_eq!(r.status, Status::Ok);
        let r = rec("t", 5).skipped("K ≤ r");
        assert_eq!((r.status, r.reason.as_str()), (Status::Skipped, "K ≤ r"));
    }

    #[test]
    fn reports_sort_and_render() {
        let rep = SweepReport::new(1, 0.05, vec![rec("b", 3).measured(1.0, 2.0), rec("a", 7).measured(3.0, 1.0)]);
        assert_eq!(rep.records[0].target, "a");
        assert_eq!(rep.violations(), 1);
        let csv = rep.to_csv().unwrap();
        assert!(csv.starts_with("target,q,m,n,k,r,c,a,variant,lhs,rhs,ratio,status,reason\n"));
        assert!(!csv.contains('\r'));
        let json = rep.to_json().unwrap();
        assert!(json.find("\"epsilon\"").unwrap() < json.find("\"records\"").unwrap());
        let empty = SweepReport::new(1, 0.05, vec![]);
        assert_eq!(empty.to_csv().unwrap().lines().count(), 1);
        assert!(empty.summary.is_empty());
    }
}
