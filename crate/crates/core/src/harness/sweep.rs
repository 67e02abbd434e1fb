//! Bound sweeps over a parameter grid.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use super::calibration::CalibrationFile;
use super::report::SweepReport;
use super::targets::{evaluate, grid_points, EvalCtx, Grid, Outcome, Target};
use crate::bilinear::WeightScheme;
use crate::error::{Error, Result};

fn default_weights() -> WeightScheme {
    WeightScheme::Rademacher
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_workers() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

/// A sweep description, usually read from TOML.
///
/// ```toml
/// target = ["thm2.1a", "thm2.4"]
/// seed = 7
/// [grid]
/// primes_near = [1000, 10000]
/// exponents = [[0.5, 0.5], [0.0, 1.0]]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Target tags; family tags without `-r` expand over `grid.r`.
    #[serde(deserialize_with = "one_or_many")]
    pub target: Vec<String>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "default_weights")]
    pub weights: WeightScheme,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Targets after expanding family tags.
    pub fn targets(&self) -> Result<Vec<Target>> {
        let mut out = Vec::new();
        for tag in &self.target {
            for t in Target::expand(tag, &self.grid.r)? {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        Ok(out)
    }
}

/// Run every grid point of `config` and collect the report.
///
/// Refuses to start if a target has no calibration entry or was calibrated
/// with a different `ε`.
pub fn run_sweep(config: &SweepConfig, calibration: &CalibrationFile) -> Result<SweepReport> {
    if config.workers == 0 {
        return Err(Error::Config("workers must be positive".into()));
    }
    if !(0.0..=0.25).contains(&config.epsilon) {
        return Err(Error::Config(format!("epsilon = {} must lie in [0, 0.25]", config.epsilon)));
    }
    let targets = config.targets()?;
    let mut constants = Vec::with_capacity(targets.len());
    for &t in &targets {
        let c = match t.explicit_constant() {
            Some(c) => c,
            None => {
                let entry = calibration.get(&t.tag())?;
                if t.uses_epsilon() && (entry.epsilon - config.epsilon).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "{} was calibrated with epsilon = {}, sweep uses {}",
                        t, entry.epsilon, config.epsilon
                    )));
                }
                entry.constant
            }
        };
        constants.push(c);
    }
    let mut jobs = Vec::new();
    for (&t, &c) in targets.iter().zip(&constants) {
        jobs.extend(grid_points(t, &config.grid, config.seed).into_iter().map(|p| (p, c)));
    }
    let ctx = EvalCtx {
        seed: config.seed,
        epsilon: config.epsilon,
        scheme: config.weights,
        draws: config.grid.draws,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let records = pool.install(|| {
        jobs.par_iter()
            .map(|(p, c)| {
                let (rec, outcome) = evaluate(p, &ctx);
                match outcome {
                    Outcome::Measured { lhs, scale } => rec.measured(lhs, c * scale),
                    Outcome::Skipped(reason) => rec.skipped(reason),
                }
            })
            .collect()
    });
    Ok(SweepReport::new(config.seed, config.epsilon, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::calibration::CalibrationEntry;
    use crate::harness::report::Status;

    fn cal_for(tags: &[&str]) -> CalibrationFile {
        let mut f = CalibrationFile::default();
        for t in tags {
            f.upsert(CalibrationEntry {
                target: t.to_string(),
                epsilon: 0.05,
                constant: 4.0,
                cap: 100,
                seed: 0,
                date: "2026-01-01".into(),
                max_ratio: 3.0,
                points: 1,
            });
        }
        f
    }

    #[test]
    fn config_parsing() {
        let c = SweepConfig::from_toml("target = \"thm2.1a\"\n[grid]\nmoduli = [101]\n").unwrap();
        assert_eq!(c.target, vec!["thm2.1a"]);
        assert_eq!((c.epsilon, c.workers, c.seed), (0.05, 1, 0));
        assert!(SweepConfig::from_toml("target = \"thm2.1a\"\nbogus = 1\n").is_err());
        assert!(SweepConfig::from_toml("target = \"x\"\n[grid]\nmodulii = [3]\n").is_err());
        let c = SweepConfig::from_toml("target = [\"thm2.4\", \"thm2.4-r2\"]\n[grid]\nr = [1, 2]\n").unwrap();
        assert_eq!(c.targets().unwrap().len(), 2);
    }

    #[test]
    fn missing_calibration_names_target() {
        let c = SweepConfig::from_toml("target = [\"thm2.1a\", \"thm2.1b\"]").unwrap();
        let err = run_sweep(&c, &cal_for(&["thm2.1a"])).unwrap_err();
        assert_eq!(err, Error::MissingCalibration("thm2.1b".into()));
    }

    #[test]
    fn empty_grid_is_empty_report() {
        let c = SweepConfig::from_toml("target = \"thm2.1a\"").unwrap();
        let rep = run_sweep(&c, &cal_for(&["thm2.1a"])).unwrap();
        assert!(rep.records.is_empty());
        assert_eq!(rep.violations(), 0);
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        let text = "target = [\"thm2.1a\", \"thm2.6\", \"weil\"]\nseed = 11\n[grid]\nprimes_near = [200, 400]\nmoduli = [210]\nexponents = [[0.5, 0.5], [0.2, 0.9], [1.0, 0.0]]\na = [\"one\", \"unit\"]\nr = [2]\n";
        let mut c = SweepConfig::from_toml(text).unwrap();
        let cal = cal_for(&["thm2.1a", "thm2.6-r2"]);
        let one = run_sweep(&c, &cal).unwrap();
        c.workers = 4;
        let four = run_sweep(&c, &cal).unwrap();
        assert_eq!(one.to_csv().unwrap(), four.to_csv().unwrap());
        assert_eq!(one.to_json().unwrap(), four.to_json().unwrap());
        assert!(one.records.iter().any(|r| r.status == Status::Skipped && r.reason == "N ≤ p^{1−1/r}"));
        assert!(one.records.iter().any(|r| r.status == Status::Skipped && r.reason == "p prime"));
    }
}
