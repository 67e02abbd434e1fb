//! What each sweep target measures at a grid point and which structured
//! right-hand side it is compared with.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::report::{RatioRecord, Status};
use super::rng::point_rng;
use crate::bilinear::{
    check_preconditions, structured_rhs, Bilinear, BoundParams, Path, Theorem, WeightScheme, WeightVector,
};
use crate::counting::{
    bound_j_avg, bound_j_hb, bound_j_new, dp_bound, dp_count, mixed_count, mixed_error_scale, mixed_main_term,
    product_congruence_bound, product_congruence_count, JCounter,
};
use crate::divisor::{family_error, hooley_scale, main_term, thm33_rhs, TauTable};
use crate::error::{Error, Result};
use crate::expsums::{gauss_star, kloosterman_fast, lemma_a2_rhs, lemma_t_rhs, t_transform_fast, weil_bound_rhs};
use crate::interval::Interval;
use crate::modarith::{factorize, gcd, is_prime, next_prime, FactoredModulus};
use crate::moments::{interval_short_enough, m_profile, moment, thm32_rhs};

/// A bound that sweeps and calibration runs can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// `|K_q(m, n)| <= d(q) gcd(m, n, q)^{1/2} q^{1/2}`, explicit constant 1.
    Weil,
    /// `|G*(m, n; q)|` against `d(q) q^{1/2} gcd(m, n, q)^{1/2}`.
    GaussStar,
    /// `|T(x, y, z; q)|` against `d(q)² gcd(x, y, q)^{1/2} gcd(x - y, z, q / gcd(x, y, q))^{1/2} q^{1/2}`.
    TTransform,
    /// `J_q(a, K)` against `K^{3/2} q^{-1/2} + K² gcd(a, q) / q + 1`.
    JCountHb,
    /// `J_q(a, K)` against `K² / q + K gcd(a, q)^{1/2} q^{-1/2} + q^{1/2}`.
    JCountNew,
    /// `Σ_{n <= N} J_q(a n, K)` against `K² N^{1/2} q^{-1/2} + K`.
    JAverage,
    /// `D_p(A)` against `|A|^{84/13}`.
    Dp,
    /// Product congruences against `(AB/p + 1) AB`.
    ProductCongruence,
    /// `|N - A² C⁴ / p|` against `A C^{42/13}`.
    Mixed,
    /// A bilinear bound family, with `r` for the families that depend on it (0 otherwise).
    Bilinear(Theorem, u32),
    /// Moments of short Kloosterman sums for the given `r`.
    Moments(u32),
    /// Family error `|E(X; A, q)|` against the divisor-problem bound.
    Divisor,
    /// `|R(X; a, q)|` against `X^{0.99} / q` for `q <= X^{2/3 - 0.05}`.
    Hooley,
}

/// `r` values with their own calibration entry.
pub const R_VALUES: [u32; 3] = [1, 2, 3];

impl Target {
    pub fn tag(&self) -> String {
        match self {
            Target::Weil => "weil".into(),
            Target::GaussStar => "lemma-a2".into(),
            Target::TTransform => "lemma-4.1".into(),
            Target::JCountHb => "lemma-5.1".into(),
            Target::JCountNew => "lemma-5.2".into(),
            Target::JAverage => "lemma-5.3".into(),
            Target::Dp => "lemma-6.3".into(),
            Target::ProductCongruence => "lemma-6.4".into(),
            Target::Mixed => "lemma-6.6".into(),
            Target::Bilinear(t, r) if t.uses_r() => format!("{}-r{r}", t.tag()),
            Target::Bilinear(t, _) => t.tag(),
            Target::Moments(r) => format!("thm3.2-r{r}"),
            Target::Divisor => "thm3.3".into(),
            Target::Hooley => "hooley".into(),
        }
    }

    /// Every target, with the `r`-dependent ones expanded over [`R_VALUES`].
    pub fn all() -> Vec<Target> {
        let mut out = vec![
            Target::Weil,
            Target::GaussStar,
            Target::TTransform,
            Target::JCountHb,
            Target::JCountNew,
            Target::JAverage,
            Target::Dp,
            Target::ProductCongruence,
            Target::Mixed,
        ];
        for t in Theorem::all() {
            if t.uses_r() {
                out.extend(R_VALUES.iter().map(|&r| Target::Bilinear(t, r)));
            } else {
                out.push(Target::Bilinear(t, 0));
            }
        }
        out.extend(R_VALUES.iter().map(|&r| Target::Moments(r)));
        out.extend([Target::Divisor, Target::Hooley]);
        out
    }

    /// Parse a tag; a family tag without `-r` expands to every `r` in `rs`.
    pub fn expand(tag: &str, rs: &[u32]) -> Result<Vec<Target>> {
        if let Ok(t) = tag.parse::<Target>() {
            return Ok(vec![t]);
        }
        if tag == "thm3.2" {
            return Ok(rs.iter().map(|&r| Target::Moments(r)).collect());
        }
        match tag.parse::<Theorem>() {
            Ok(th) if th.uses_r() => Ok(rs.iter().map(|&r| Target::Bilinear(th, r)).collect()),
            _ => Err(Error::BadInput(format!("unknown target '{tag}'"))),
        }
    }

    /// The fixed constant of a bound that needs no calibration.
    pub fn explicit_constant(&self) -> Option<f64> {
        match self {
            Target::Weil => Some(1.0),
            _ => None,
        }
    }

    /// Whether the structured right-hand side carries a `q^ε` factor.
    pub fn uses_epsilon(&self) -> bool {
        !matches!(self, Target::Weil | Target::GaussStar | Target::TTransform | Target::Mixed | Target::Hooley)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::all()
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| Error::BadInput(format!("unknown target '{s}'")))
    }
}

/// How the shift `a` of a bilinear sum is chosen at each modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AMode {
    /// `a = 1`.
    One,
    /// A random unit.
    Unit,
    /// The smallest prime factor of a composite `q`, and 0 for prime `q`.
    Shared,
    /// `a = 0`.
    Zero,
}

fn default_a() -> Vec<AMode> {
    vec![AMode::One]
}
fn default_r() -> Vec<u32> {
    R_VALUES.to_vec()
}
fn default_r_exponents() -> Vec<f64> {
    vec![0.5, 0.75]
}
fn default_alphas() -> u32 {
    5
}
fn default_n_fractions() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_family_exponents() -> Vec<f64> {
    vec![0.4, 0.45, 0.6]
}
fn default_q_exponents() -> Vec<f64> {
    vec![2.0 / 3.0]
}
fn default_hooley_exponents() -> Vec<f64> {
    vec![0.3, 0.45, 0.6]
}
fn default_samples() -> u32 {
    10
}
fn default_draws() -> u32 {
    1
}

/// Grid axes. Each target reads the axes it needs and ignores the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Moduli used as given.
    #[serde(default)]
    pub moduli: Vec<u64>,
    /// Each entry is replaced by the smallest prime at or above it.
    #[serde(default)]
    pub primes_near: Vec<u64>,
    /// `(μ, ν)` pairs with `M = ⌈q^μ⌉` and `N = ⌈q^ν⌉`.
    #[serde(default)]
    pub exponents: Vec<[f64; 2]>,
    #[serde(default = "default_a")]
    pub a: Vec<AMode>,
    /// `r` values for family tags given without `-r`.
    #[serde(default = "default_r")]
    pub r: Vec<u32>,
    /// Incomplete sums: `r` is the largest proper divisor of `q` below `q^ρ`, and `K = ⌈r^ν⌉`.
    #[serde(default = "default_r_exponents")]
    pub r_exponents: Vec<f64>,
    /// Number of evenly spaced `α` in `[1, 12r/7]`.
    #[serde(default = "default_alphas")]
    pub alphas: u32,
    /// Moments: `N = ⌊p^{t (1 - 1/r)}⌋` for each `t`.
    #[serde(default = "default_n_fractions")]
    pub n_fractions: Vec<f64>,
    /// Divisor targets: values of `X`.
    #[serde(default)]
    pub x: Vec<u64>,
    /// Family length `A = ⌈q^θ⌉`.
    #[serde(default = "default_family_exponents")]
    pub family_exponents: Vec<f64>,
    /// Divisor family: `q` is the largest prime `<= X^θ`.
    #[serde(default = "default_q_exponents")]
    pub q_exponents: Vec<f64>,
    /// Single progressions: `q` is the largest prime `<= X^θ`.
    #[serde(default = "default_hooley_exponents")]
    pub hooley_exponents: Vec<f64>,
    /// Sampled instances per modulus for pointwise targets.
    #[serde(default = "default_samples")]
    pub samples: u32,
    /// Independent weight draws per point; the worst one is reported.
    #[serde(default = "default_draws")]
    pub draws: u32,
}

impl Default for Grid {
    fn default() -> Self {
        toml::from_str("").expect("every grid field has a default")
    }
}

impl Grid {
    /// Moduli after resolving `primes_near`, sorted and deduplicated.
    pub fn resolved_moduli(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.moduli.iter().copied().chain(self.primes_near.iter().map(|&x| next_prime(x))).collect();
        out.sort_unstable();
        out.dedup();
        out.retain(|&q| q >= 2);
        out
    }
}

/// Parameters of one grid point before evaluation; the record layout plus
/// the real parameter `alpha` of the moment targets.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GridPoint {
    pub target: Target,
    pub q: u64,
    pub m: u64,
    pub n: u64,
    pub k: u64,
    pub r: u64,
    pub c: u64,
    pub a: u64,
    pub variant: String,
    pub alpha: f64,
}

impl GridPoint {
    fn new(target: Target, q: u64) -> Self {
        Self { target, q, m: 0, n: 0, k: 0, r: 0, c: 0, a: 0, variant: String::new(), alpha: 0.0 }
    }

    fn key(&self) -> (u64, u64, u64, u64, u64, u64, u64, &str) {
        (self.q, self.m, self.n, self.k, self.r, self.c, self.a, &self.variant)
    }

    fn params(&self) -> [u64; 7] {
        [self.q, self.m, self.n, self.k, self.r, self.c, self.a]
    }

    fn record(&self) -> RatioRecord {
        RatioRecord {
            target: self.target.tag(),
            q: self.q,
            m: self.m,
            n: self.n,
            k: self.k,
            r: self.r,
            c: self.c,
            a: self.a,
            variant: self.variant.clone(),
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            status: Status::Ok,
            reason: String::new(),
        }
    }
}

/// Shared settings for evaluating grid points.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EvalCtx {
    pub seed: u64,
    pub epsilon: f64,
    pub scheme: WeightScheme,
    pub draws: u32,
}

/// A measured point: `lhs` and the structured right-hand side `scale`
/// (already including `q^ε` where the target uses it).
pub(crate) enum Outcome {
    Measured { lhs: f64, scale: f64 },
    Skipped(String),
}

fn ceil_pow(q: u64, e: f64) -> u64 {
    // guard against 10^{0.5 * 2} = 10.000000000000002 style rounding
    let v = (q as f64).powf(e);
    let r = v.round();
    if (v - r).abs() < 1e-9 * v.max(1.0) {
        r as u64
    } else {
        v.ceil() as u64
    }
}

fn floor_pow(q: u64, e: f64) -> u64 {
    let v = (q as f64).powf(e);
    let r = v.round();
    if (v - r).abs() < 1e-9 * v.max(1.0) {
        r as u64
    } else {
        v.floor() as u64
    }
}

pub(crate) fn prev_prime(n: u64) -> Option<u64> {
    (2..=n).rev().find(|&p| is_prime(p))
}

fn variant_of(th: Theorem) -> String {
    match th {
        Theorem::TypeI(v) | Theorem::TypeIProduct(v) | Theorem::Incomplete(v) => v.to_string(),
        _ => String::new(),
    }
}

fn resolve_a(mode: AMode, q: u64, seed: u64) -> u64 {
    match mode {
        AMode::One => 1 % q,
        AMode::Zero => 0,
        AMode::Shared => {
            let f = factorize(q);
            if f.is_prime() {
                0
            } else {
                f.smallest_prime().unwrap_or(0)
            }
        }
        AMode::Unit => {
            let mut rng = point_rng(seed, "a-unit", &[q]);
            loop {
                let a = rng.random_range(1..q.max(2));
                if gcd(a, q) == 1 {
                    break a;
                }
            }
        }
    }
}

/// Largest divisor of `q` that is `< q` and `<= q^ρ`.
fn divisor_below(f: &FactoredModulus, rho: f64) -> u64 {
    let q = f.q();
    let cap = (q as f64).powf(rho) * (1.0 + 1e-12);
    f.divisors().into_iter().filter(|&d| d < q && (d as f64) <= cap).max().unwrap_or(1)
}

/// Representatives of the gcd strata `1, p, p^j, q` of a modulus.
fn strata(f: &FactoredModulus) -> Vec<u64> {
    let mut out = vec![1];
    if let Some(&(p, j)) = f.factors().first() {
        out.push(p);
        out.push(p.pow(j));
    }
    out.push(f.q());
    out.dedup();
    out
}

fn random_set(rng: &mut ChaCha8Rng, universe: u64, size: u64, offset: u64) -> Vec<i64> {
    let mut v: Vec<i64> = sample(rng, universe as usize, size as usize).into_iter().map(|x| (x as u64 + offset) as i64).collect();
    v.sort_unstable();
    v
}

/// Grid points of `target` over `grid`. Points are sorted and deduplicated.
pub(crate) fn grid_points(target: Target, grid: &Grid, seed: u64) -> Vec<GridPoint> {
    let moduli = grid.resolved_moduli();
    let mut out = Vec::new();
    match target {
        Target::Weil | Target::GaussStar | Target::TTransform => {
            for &q in &moduli {
                let f = factorize(q);
                let st = strata(&f);
                let mut rng = point_rng(seed, &target.tag(), &[q]);
                for s in 0..grid.samples as usize {
                    let g = st[s % st.len()];
                    let h = st[(s / st.len()) % st.len()];
                    let mut pt = GridPoint::new(target, q);
                    let u = rng.random_range(0..q);
                    let v = rng.random_range(0..q);
                    let w = rng.random_range(0..q);
                    pt.m = (g * u) % q;
                    pt.n = (g * v) % q;
                    if target == Target::TTransform {
                        pt.n = (pt.m + h * v) % q;
                        pt.k = (h * w) % q;
                    }
                    out.push(pt);
                }
            }
        }
        Target::JCountHb | Target::JCountNew => {
            out.extend(moduli.iter().map(|&q| GridPoint::new(target, q)));
        }
        Target::JAverage => {
            for &q in &moduli {
                let mut rng = point_rng(seed, "lemma-5.3", &[q]);
                for s in 0..grid.samples.max(1) {
                    let mut pt = GridPoint::new(target, q);
                    pt.a = if s == 0 {
                        1 % q
                    } else {
                        loop {
                            let a = rng.random_range(1..q.max(2));
                            if gcd(a, q) == 1 {
                                break a;
                            }
                        }
                    };
                    out.push(pt);
                }
            }
        }
        Target::Dp | Target::ProductCongruence | Target::Mixed => {
            for &p in &moduli {
                for &[mu, nu] in &grid.exponents {
                    let mut pt = GridPoint::new(target, p);
                    pt.m = ceil_pow(p, mu).clamp(1, p - 1);
                    if target != Target::Dp {
                        pt.n = ceil_pow(p, nu).clamp(1, p - 1);
                    }
                    out.push(pt);
                }
            }
        }
        Target::Bilinear(th, r) => {
            for &q in &moduli {
                let f = factorize(q);
                for &[mu, nu] in &grid.exponents {
                    for &mode in &grid.a {
                        let mut pt = GridPoint::new(target, q);
                        pt.variant = variant_of(th);
                        pt.a = resolve_a(mode, q, seed);
                        match th {
                            Theorem::Incomplete(_) => {
                                pt.m = ceil_pow(q, mu).clamp(1, q);
                                for &rho in &grid.r_exponents {
                                    let mut p2 = pt.clone();
                                    p2.r = divisor_below(&f, rho);
                                    p2.k = ceil_pow(p2.r, nu).clamp(1, p2.r);
                                    p2.c = if p2.r == 1 {
                                        0
                                    } else {
                                        let mut rng = point_rng(seed, "c-unit", &[q, p2.r]);
                                        loop {
                                            let c = rng.random_range(1..p2.r);
                                            if gcd(c, p2.r) == 1 {
                                                break c;
                                            }
                                        }
                                    };
                                    out.push(p2);
                                }
                                continue;
                            }
                            Theorem::SharpW1 | Theorem::SharpW2 => {
                                pt.r = r as u64;
                                pt.m = ceil_pow(q, mu).clamp(1, q);
                                pt.k = ceil_pow(q, nu).clamp(1, q - 1);
                            }
                            Theorem::SharpS1 | Theorem::SharpS2 => {
                                pt.r = r as u64;
                                pt.a = 1;
                                pt.m = ceil_pow(q, mu).clamp(1, q);
                                pt.n = ceil_pow(q, nu).clamp(1, q - 1);
                            }
                            _ => {
                                pt.m = ceil_pow(q, mu).clamp(1, q);
                                pt.n = ceil_pow(q, nu).clamp(1, q);
                            }
                        }
                        out.push(pt);
                    }
                }
            }
        }
        Target::Moments(r) => {
            let top = 12.0 * r as f64 / 7.0;
            let count = grid.alphas.max(1);
            for &p in &moduli {
                let mut ns: Vec<u64> = grid
                    .n_fractions
                    .iter()
                    .map(|&t| {
                        let mut n = floor_pow(p, t * (1.0 - 1.0 / r as f64)).max(1);
                        while n > 1 && !interval_short_enough(n, p, r) {
                            n -= 1;
                        }
                        n
                    })
                    .collect();
                ns.sort_unstable();
                ns.dedup();
                for n in ns {
                    for i in 0..count {
                        let alpha = if count == 1 { 1.0 } else { 1.0 + (top - 1.0) * i as f64 / (count - 1) as f64 };
                        let mut pt = GridPoint::new(target, p);
                        pt.n = n;
                        pt.r = r as u64;
                        pt.alpha = alpha;
                        pt.variant = format!("alpha={alpha:.4}");
                        out.push(pt);
                    }
                }
            }
        }
        Target::Divisor => {
            for &x in &grid.x {
                for &theta in &grid.q_exponents {
                    let Some(q) = prev_prime(floor_pow(x, theta)) else { continue };
                    for &e in &grid.family_exponents {
                        let mut pt = GridPoint::new(target, q);
                        pt.n = x;
                        pt.m = ceil_pow(q, e).clamp(1, q - 1);
                        out.push(pt);
                    }
                }
            }
        }
        Target::Hooley => {
            for &x in &grid.x {
                for &theta in &grid.hooley_exponents {
                    let Some(q) = prev_prime(floor_pow(x, theta)) else { continue };
                    let mut pt = GridPoint::new(target, q);
                    pt.n = x;
                    out.push(pt);
                }
            }
        }
    }
    out.sort_by(|x, y| x.key().cmp(&y.key()).then(x.alpha.total_cmp(&y.alpha)));
    out.dedup_by(|x, y| x.key() == y.key());
    out
}

fn skip_reason(e: Error) -> String {
    match e {
        Error::OutOfRange(s) => s,
        other => other.to_string(),
    }
}

/// Evaluate a point; returns the record with parameters filled in (some
/// targets report the worst parameters found) and the measurement.
pub(crate) fn evaluate(pt: &GridPoint, ctx: &EvalCtx) -> (RatioRecord, Outcome) {
    let mut pt = pt.clone();
    let outcome = match eval_inner(&mut pt, ctx) {
        Ok(o) => o,
        Err(e) => Outcome::Skipped(skip_reason(e)),
    };
    (pt.record(), outcome)
}

fn eps_factor(target: Target, base: f64, eps: f64) -> f64 {
    if target.uses_epsilon() {
        base.powf(eps)
    } else {
        1.0
    }
}

fn eval_inner(pt: &mut GridPoint, ctx: &EvalCtx) -> Result<Outcome> {
    let q = pt.q;
    let qe = eps_factor(pt.target, q as f64, ctx.epsilon);
    match pt.target {
        Target::Weil => {
            let f = factorize(q);
            let v = kloosterman_fast(pt.m as i64, pt.n as i64, &f);
            Ok(Outcome::Measured { lhs: v.norm(), scale: weil_bound_rhs(pt.m as i64, pt.n as i64, &f) })
        }
        Target::GaussStar => {
            let f = factorize(q);
            let v = gauss_star(pt.m as i64, pt.n as i64, q);
            Ok(Outcome::Measured { lhs: v.norm(), scale: lemma_a2_rhs(pt.m as i64, pt.n as i64, &f) })
        }
        Target::TTransform => {
            let f = factorize(q);
            let (x, y, z) = (pt.m as i64, pt.n as i64, pt.k as i64);
            let v = t_transform_fast(x, y, z, &f);
            Ok(Outcome::Measured { lhs: v.norm(), scale: lemma_t_rhs(x, y, z, &f) })
        }
        Target::JCountHb | Target::JCountNew => {
            let counter = JCounter::new(q);
            let bound = if pt.target == Target::JCountHb { bound_j_hb } else { bound_j_new };
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0, 0);
            for a in 0..q {
                let counts = counter.counts_up_to(a);
                for (i, &j) in counts.iter().enumerate() {
                    let k = i as u64 + 1;
                    let scale = bound(q, a, k) * qe;
                    let ratio = j as f64 / scale;
                    if ratio > best.0 {
                        best = (ratio, j as f64, scale, a, k);
                    }
                }
            }
            pt.a = best.3;
            pt.k = best.4;
            Ok(Outcome::Measured { lhs: best.1, scale: best.2 })
        }
        Target::JAverage => {
            let counter = JCounter::new(q);
            let mut sums = vec![0u64; q as usize];
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0, 0);
            for n in 1..=q {
                let counts = counter.counts_up_to(crate::modarith::mul_mod(pt.a, n % q, q));
                for (i, (s, c)) in sums.iter_mut().zip(&counts).enumerate() {
                    *s += c;
                    let k = i as u64 + 1;
                    let scale = bound_j_avg(q, n, k) * qe;
                    let ratio = *s as f64 / scale;
                    if ratio > best.0 {
                        best = (ratio, *s as f64, scale, n, k);
                    }
                }
            }
            pt.n = best.3;
            pt.k = best.4;
            Ok(Outcome::Measured { lhs: best.1, scale: best.2 })
        }
        Target::Dp => {
            if pt.m * pt.m > q {
                return Ok(Outcome::Skipped("|A| ≤ p^{1/2}".into()));
            }
            if !is_prime(q) {
                return Ok(Outcome::Skipped("p prime".into()));
            }
            let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
            for d in 0..ctx.draws.max(1) {
                let mut rng = point_rng(ctx.seed, &pt.target.tag(), &[q, pt.m, d as u64]);
                let set: Vec<u64> = random_set(&mut rng, q, pt.m, 0).into_iter().map(|x| x as u64).collect();
                let lhs = dp_count(&set, q)? as f64;
                let scale = dp_bound(set.len()) * qe;
                if lhs / scale > worst.0 {
                    worst = (lhs / scale, lhs, scale);
                }
            }
            Ok(Outcome::Measured { lhs: worst.1, scale: worst.2 })
        }
        Target::ProductCongruence => {
            if !is_prime(q) {
                return Ok(Outcome::Skipped("p prime".into()));
            }
            let lhs = product_congruence_count(&Interval::initial(pt.m)?, &Interval::initial(pt.n)?, q)? as f64;
            Ok(Outcome::Measured { lhs, scale: product_congruence_bound(pt.m, pt.n, q) * qe })
        }
        Target::Mixed => {
            if !is_prime(q) {
                return Ok(Outcome::Skipped("p prime".into()));
            }
            if pt.n * pt.n > q {
                return Ok(Outcome::Skipped("|C| ≤ p^{1/2}".into()));
            }
            let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
            for d in 0..ctx.draws.max(1) {
                let mut rng = point_rng(ctx.seed, &pt.target.tag(), &[q, pt.m, pt.n, d as u64]);
                let set: Vec<u64> = random_set(&mut rng, q, pt.n, 0).into_iter().map(|x| x as u64).collect();
                let count = mixed_count(&Interval::initial(pt.m)?, &set, q)? as f64;
                let lhs = (count - mixed_main_term(pt.m, pt.n, q)).abs();
                let scale = mixed_error_scale(pt.m, pt.n);
                if lhs / scale > worst.0 {
                    worst = (lhs / scale, lhs, scale);
                }
            }
            Ok(Outcome::Measured { lhs: worst.1, scale: worst.2 })
        }
        Target::Bilinear(th, _) => eval_bilinear(th, pt, ctx, qe),
        Target::Moments(r) => {
            if !is_prime(q) {
                return Ok(Outcome::Skipped("p prime".into()));
            }
            let scale = thm32_rhs(q, pt.n, r, pt.alpha, ctx.epsilon, 1.0)?;
            let profile = m_profile(q, &Interval::initial(pt.n)?)?;
            Ok(Outcome::Measured { lhs: moment(&profile, pt.alpha)?, scale })
        }
        Target::Divisor => {
            let x = pt.n;
            let scale = thm33_rhs(x, pt.m, q, ctx.epsilon, 1.0)?;
            let tau = TauTable::new(x)?;
            let lhs = family_error(&tau, &Interval::initial(pt.m)?, &factorize(q))?.abs();
            Ok(Outcome::Measured { lhs, scale })
        }
        Target::Hooley => {
            let x = pt.n;
            if (q as f64) > (x as f64).powf(2.0 / 3.0 - 0.05) {
                return Ok(Outcome::Skipped("q ≤ X^{2/3−ε}".into()));
            }
            let f = factorize(q);
            let tau = TauTable::new(x)?;
            let classes = tau.class_sums(q);
            let main = main_term(x, &f);
            let (a, lhs) = (1..q)
                .filter(|&a| gcd(a, q) == 1)
                .map(|a| (a, (classes[a as usize] as f64 - main).abs()))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            pt.a = a;
            Ok(Outcome::Measured { lhs, scale: hooley_scale(x, q) })
        }
    }
}

fn eval_bilinear(th: Theorem, pt: &mut GridPoint, ctx: &EvalCtx, qe: f64) -> Result<Outcome> {
    let q = pt.q;
    let d = if pt.a == 0 { q } else { gcd(pt.a, q) };
    let length = match th {
        Theorem::Incomplete(_) | Theorem::SharpW1 | Theorem::SharpW2 => pt.k,
        _ => pt.n,
    };
    let mut params = BoundParams {
        q,
        m: pt.m,
        n: length,
        d,
        r: pt.r.max(1),
        norm_alpha_2: 0.0,
        norm_alpha_inf: 0.0,
        norm_beta_inf: 0.0,
    };
    if let Theorem::Incomplete(_) = th {
        params.r = pt.r;
    }
    check_preconditions(th, &params)?;
    let needs_unit = matches!(th, Theorem::Incomplete(_) | Theorem::SharpW1 | Theorem::SharpW2);
    if needs_unit && d != 1 {
        return Ok(Outcome::Skipped("gcd(a, q) = 1".into()));
    }
    let f = factorize(q);
    let ctx_q = Bilinear::new(&f);
    let a = pt.a as i64;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    for draw in 0..ctx.draws.max(1) {
        let mut key = pt.params().to_vec();
        key.push(draw as u64);
        let mut rng = point_rng(ctx.seed, &pt.target.tag(), &key);
        let lhs = match th {
            Theorem::TypeI(_) | Theorem::TypeIProduct(_) => {
                let alpha = WeightVector::on_interval(Interval::initial(pt.m)?, ctx.scheme.sample(pt.m as usize, &mut rng))?;
                params.norm_alpha_2 = alpha.norm_2();
                params.norm_alpha_inf = alpha.norm_inf();
                let j = Interval::initial(pt.n)?;
                if let Theorem::TypeI(_) = th {
                    ctx_q.type1(&alpha, &j, a, Path::Dft)?.norm()
                } else {
                    ctx_q.type1_product(&alpha, &j, a, Path::Dft)?.norm()
                }
            }
            Theorem::Incomplete(_) => {
                let alpha = WeightVector::on_interval(Interval::initial(pt.m)?, ctx.scheme.sample(pt.m as usize, &mut rng))?;
                let gamma = WeightVector::on_interval(Interval::new(-1, q)?, ctx.scheme.sample(q as usize, &mut rng))?;
                params.norm_alpha_2 = alpha.norm_2();
                params.norm_alpha_inf = alpha.norm_inf();
                params.norm_beta_inf = gamma.norm_inf();
                ctx_q.w(&alpha, &gamma, pt.r, pt.c as i64, pt.k, a, Path::Dft)?.norm()
            }
            Theorem::SharpW1 | Theorem::SharpW2 => {
                let set = random_set(&mut rng, q, pt.m, 0);
                let alpha = WeightVector::on_set(set, ctx.scheme.sample(pt.m as usize, &mut rng))?;
                let gamma = WeightVector::on_interval(Interval::initial(pt.k)?, ctx.scheme.sample(pt.k as usize, &mut rng))?;
                params.norm_alpha_inf = alpha.norm_inf();
                params.norm_beta_inf = gamma.norm_inf();
                ctx_q.wsharp(&alpha, &gamma, a, Path::Dft)?.norm()
            }
            Theorem::SharpS1 | Theorem::SharpS2 => {
                let set = random_set(&mut rng, q, pt.m, 0);
                let alpha = WeightVector::on_set(set, ctx.scheme.sample(pt.m as usize, &mut rng))?;
                params.norm_alpha_inf = alpha.norm_inf();
                ctx_q.ssharp(&alpha, &Interval::initial(pt.n)?, Path::Dft)?.norm()
            }
            Theorem::Trivial | Theorem::PolyaVinogradov => {
                let alpha = WeightVector::on_interval(Interval::initial(pt.m)?, ctx.scheme.sample(pt.m as usize, &mut rng))?;
                let beta = WeightVector::on_interval(Interval::initial(pt.n)?, ctx.scheme.sample(pt.n as usize, &mut rng))?;
                params.norm_alpha_inf = alpha.norm_inf();
                params.norm_beta_inf = beta.norm_inf();
                ctx_q.type2(&alpha, &beta, a, Path::Dft)?.norm()
            }
        };
        let scale = structured_rhs(th, &params) * qe;
        if lhs / scale > worst.0 {
            worst = (lhs / scale, lhs, scale);
        }
    }
    Ok(Outcome::Measured { lhs: worst.1, scale: worst.2 })
}
