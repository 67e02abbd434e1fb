//! Identity suite: exact identities and explicit-constant bounds checked on
//! every modulus up to a budget.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::report::SCHEMA_VERSION;
use super::rng::point_rng;
use crate::bilinear::{Bilinear, Path, WeightVector};
use crate::counting::{additive_energy, j_count_brute, CountQuery, JCounter};
use crate::divisor::TauTable;
use crate::error::{Error, Result};
use crate::expsums::{gauss_star, gauss_star_mobius, ramanujan, weil_bound_rhs, BruteKloosterman, Kloosterman};
use crate::interval::Interval;
use crate::modarith::{factorize, gcd, gcd3, inv_raw, is_prime, mul_mod, primes_up_to, FactoredModulus};
use crate::moments::{m_profile, m_values, m_values_direct, moment, holder_rhs};

/// Module names accepted by the suite filter.
pub const SUITE_MODULES: [&str; 5] = ["expsums", "counting", "bilinear", "moments", "divisor"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Restrict to one module of [`SUITE_MODULES`].
    pub module: Option<String>,
    /// Largest modulus tested.
    pub budget: u64,
    pub seed: u64,
    /// Negate the fast Kloosterman value in its oracle comparison, to prove
    /// the suite notices.
    pub fault: bool,
}

impl SuiteOptions {
    pub fn new(budget: u64) -> Self {
        Self { module: None, budget, seed: 0, fault: false }
    }
}

/// Outcome of one identity: `worst_ratio` is the largest observed
/// deviation divided by its allowance, so the identity passes iff it is `<= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub module: String,
    pub identity: String,
    pub cases: u64,
    pub failures: u64,
    pub worst_deviation: f64,
    pub worst_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub budget: u64,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<IdentityCheck>,
}

impl SuiteReport {
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

struct Tally {
    module: &'static str,
    identity: &'static str,
    cases: u64,
    failures: u64,
    worst_deviation: f64,
    worst_ratio: f64,
}

impl Tally {
    fn new(module: &'static str, identity: &'static str) -> Self {
        Self { module, identity, cases: 0, failures: 0, worst_deviation: 0.0, worst_ratio: 0.0 }
    }

    /// Record a deviation against its allowance.
    fn check(&mut self, deviation: f64, allowance: f64) {
        self.cases += 1;
        let ratio = if allowance > 0.0 {
            deviation / allowance
        } else if deviation > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio.is_nan() || ratio > 1.0 {
            self.failures += 1;
        }
        if ratio > self.worst_ratio || ratio.is_nan() {
            self.worst_ratio = ratio;
            self.worst_deviation = deviation;
        }
    }

    fn exact(&mut self, ok: bool) {
        self.check(if ok { 0.0 } else { 1.0 }, 0.5);
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            module: self.module.into(),
            identity: self.identity.into(),
            cases: self.cases,
            failures: self.failures,
            worst_deviation: self.worst_deviation,
            worst_ratio: self.worst_ratio,
            passed: self.failures == 0,
        }
    }
}

/// Run the suite. A budget below 2 runs nothing and passes.
pub fn run_identity_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    if let Some(m) = &opts.module {
        if !SUITE_MODULES.contains(&m.as_str()) {
            return Err(Error::BadInput(format!("unknown module '{m}' (expected one of {SUITE_MODULES:?})")));
        }
    }
    let wanted = |m: &str| opts.module.as_deref().is_none_or(|f| f == m);
    let mut checks = Vec::new();
    if opts.budget >= 2 {
        if wanted("expsums") {
            checks.extend(expsums_checks(opts));
        }
        if wanted("counting") {
            checks.extend(counting_checks(opts));
        }
        if wanted("bilinear") {
            checks.extend(bilinear_checks(opts));
        }
        if wanted("moments") {
            checks.extend(moments_checks(opts));
        }
        if wanted("divisor") {
            checks.extend(divisor_checks(opts));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { schema_version: SCHEMA_VERSION, budget: opts.budget, seed: opts.seed, passed, checks })
}

/// Sample `(m, n)` with `gcd(m, n, q)` in each stratum `1, p, p^j, q`.
fn stratified_pairs(f: &FactoredModulus, count: usize, rng: &mut impl Rng) -> Vec<(u64, u64)> {
    let q = f.q();
    let mut strata = vec![1];
    if let Some(&(p, j)) = f.factors().first() {
        strata.push(p);
        strata.push(p.pow(j));
    }
    strata.push(q);
    (0..count)
        .map(|i| {
            let g = strata[i % strata.len()];
            (g * rng.random_range(0..q) % q, g * rng.random_range(0..q) % q)
        })
        .collect()
}

fn random_unit(q: u64, rng: &mut impl Rng) -> u64 {
    loop {
        let c = rng.random_range(1..q.max(2)) % q;
        if gcd(c, q) == 1 {
            return c;
        }
    }
}

fn expsums_checks(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut oracle = Tally::new("expsums", "kloosterman fast = brute");
    let mut weil = Tally::new("expsums", "weil bound");
    let mut symmetry = Tally::new("expsums", "symmetry");
    let mut scaling = Tally::new("expsums", "scaling");
    let mut reality = Tally::new("expsums", "reality");
    let mut sk = Tally::new("expsums", "selberg-kuznetsov");
    let mut twisted = Tally::new("expsums", "twisted multiplicativity");
    let mut ram = Tally::new("expsums", "ramanujan bound");
    let mut mobius = Tally::new("expsums", "gauss star mobius");
    let mut a3 = Tally::new("expsums", "vanishing p | m");
    let mut a4 = Tally::new("expsums", "vanishing unequal gcds");
    let mut a5 = Tally::new("expsums", "pull-out");
    for q in 2..=opts.budget {
        let f = factorize(q);
        let qf = q as f64;
        let tol = 1e-6 * qf;
        let brute = BruteKloosterman::new(q);
        let fast = Kloosterman::new(&f);
        let mut rng = point_rng(opts.seed, "suite-expsums", &[q]);
        let k = |m: u64, n: u64| brute.eval(m as i64, n as i64).value;
        for (m, n) in stratified_pairs(&f, 8, &mut rng) {
            let b = k(m, n);
            let mut v = fast.eval_reduced(m, n).value;
            if opts.fault {
                v = -v;
            }
            oracle.check((v - b).norm(), tol);
            weil.check(b.norm(), weil_bound_rhs(m as i64, n as i64, &f) * (1.0 + 1e-9) + 1e-9);
            symmetry.check((b - k(n, m)).norm(), tol);
            reality.check(b.im.abs(), tol);
            let c = random_unit(q, &mut rng);
            scaling.check((k(mul_mod(c, m, q), n) - k(m, mul_mod(c, n, q))).norm(), tol);

            let g = gcd3(m, n, q);
            let mut rhs = Complex64::default();
            for d in factorize(g).divisors() {
                let sub = BruteKloosterman::new(q / d);
                rhs += sub.eval(((m / d) * (n / d) % (q / d)) as i64, 1).value * d as f64;
            }
            sk.check((b - rhs).norm(), tol);

            let c_q = ramanujan(m as i64, &f);
            ram.check((c_q as f64 - k(m, 0).re).abs(), tol);
            ram.check(c_q.unsigned_abs() as f64, gcd(m, q) as f64 + 0.5);

            let gs = gauss_star(m as i64, n as i64, q).value;
            mobius.check((gs - gauss_star_mobius(m as i64, n as i64, &f).value).norm(), tol);
        }
        if f.factors().len() > 1 {
            let (p, j) = f.factors()[0];
            let q1 = p.pow(j);
            let q2 = q / q1;
            let (b1, b2) = (BruteKloosterman::new(q1), BruteKloosterman::new(q2));
            let (i1, i2) = (inv_raw(q1 % q2, q2).unwrap_or(0), inv_raw(q2 % q1, q1).unwrap_or(0));
            for (m, n) in stratified_pairs(&f, 4, &mut rng) {
                let left = b1.eval(mul_mod(m % q1, i2, q1) as i64, mul_mod(n % q1, i2, q1) as i64).value;
                let right = b2.eval(mul_mod(m % q2, i1, q2) as i64, mul_mod(n % q2, i1, q2) as i64).value;
                twisted.check((k(m, n) - left * right).norm(), tol);
            }
        }
        if let [(p, j)] = f.factors() {
            let (p, j) = (*p, *j);
            if j >= 2 && p > 2 {
                for _ in 0..4 {
                    let m = p * rng.random_range(0..q / p);
                    a3.check(k(m, 1).norm(), tol);
                    // gcd(m, q) = p^s ≠ gcd(n, q) = p^t, neither divisible by q
                    let s = rng.random_range(0..j);
                    let t = (s + 1 + rng.random_range(0..j - 1)) % j;
                    let u = random_unit(q, &mut rng);
                    let w = random_unit(q, &mut rng);
                    a4.check(k(u * p.pow(s) % q, w * p.pow(t) % q).norm(), tol);
                    // pull out d = p^s with s < j
                    let d = p.pow(s.max(1));
                    if d < q {
                        let sub = BruteKloosterman::new(q / d);
                        let (ms, ns) = (rng.random_range(0..q / d), rng.random_range(0..q / d));
                        let lhs = k(d * ms % q, d * ns % q);
                        a5.check((lhs - sub.eval(ms as i64, ns as i64).value * d as f64).norm(), tol);
                    }
                }
            }
        }
    }
    [oracle, weil, symmetry, scaling, reality, sk, twisted, ram, mobius, a3, a4, a5].map(Tally::finish).to_vec()
}

fn counting_checks(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut oracle = Tally::new("counting", "j count fast = brute");
    let mut restricted = Tally::new("counting", "restricted count bound");
    let mut reflection = Tally::new("counting", "j count reflection");
    let mut energy = Tally::new("counting", "energy cauchy-schwarz");
    for q in 2..=opts.budget.min(48) {
        let f = factorize(q);
        let counter = JCounter::new(q);
        let mut rng = point_rng(opts.seed, "suite-counting", &[q]);
        for a in 0..q {
            let all = counter.counts_up_to(a);
            let neg = counter.counts_up_to((q - a) % q);
            for k in [1, 2.min(q), q / 3 + 1, q / 2 + 1, q] {
                let brute = CountQuery::new(&f, a as i64, k).map(|query| j_count_brute(&query));
                oracle.exact(brute.map(|b| b == all[k as usize - 1]).unwrap_or(false));
            }
            for k in 1..=q {
                reflection.exact(all[k as usize - 1] == neg[k as usize - 1]);
            }
        }
        for r in f.divisors() {
            let sub = JCounter::new(r);
            for _ in 0..4 {
                let a = rng.random_range(0..q);
                let k = rng.random_range(1..=r);
                let c = if r == 1 { 0 } else { random_unit(r, &mut rng) };
                let lhs = counter.count_restricted(a, k, r, c);
                let ci = if r == 1 { 0 } else { inv_raw(c, r).unwrap_or(0) };
                let rhs = (q / r) * sub.count(mul_mod(ci, a % r, r), k);
                restricted.exact(lhs <= rhs);
            }
        }
    }
    for p in primes_up_to(opts.budget.min(211)) {
        let mut rng = point_rng(opts.seed, "suite-energy", &[p]);
        let size = (p / 4).max(1) as usize;
        let a: Vec<u64> = (0..size).map(|_| rng.random_range(0..p)).collect();
        let b: Vec<u64> = (0..size).map(|_| rng.random_range(0..p)).collect();
        let (Ok(eab), Ok(ea), Ok(eb)) = (additive_energy(&a, &b, p), additive_energy(&a, &a, p), additive_energy(&b, &b, p))
        else {
            continue;
        };
        energy.exact((eab as u128).pow(2) <= ea as u128 * eb as u128);
    }
    [oracle, restricted, reflection, energy].map(Tally::finish).to_vec()
}

fn weights(len: u64, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)).collect()
}

fn bilinear_checks(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut t2 = Tally::new("bilinear", "type II direct = dft");
    let mut t1 = Tally::new("bilinear", "type I direct = dft");
    let mut prod = Tally::new("bilinear", "product form direct = dft");
    let mut inc = Tally::new("bilinear", "incomplete direct = dft");
    let mut sharp = Tally::new("bilinear", "sharp direct = dft");
    for q in 2..=opts.budget.min(120) {
        let f = factorize(q);
        let ctx = Bilinear::new(&f);
        let mut rng = point_rng(opts.seed, "suite-bilinear", &[q]);
        let tol = 1e-6 * (q as f64).powf(1.5);
        let m = rng.random_range(1..=q.min(12));
        let n = rng.random_range(1..=q.min(12));
        let off = rng.random_range(0..q) as i64;
        let (Ok(im), Ok(jn)) = (Interval::new(off, m), Interval::new(-off, n)) else { continue };
        let (Ok(alpha), Ok(beta)) = (
            WeightVector::on_interval(im, weights(m, &mut rng)),
            WeightVector::on_interval(jn, weights(n, &mut rng)),
        ) else {
            continue;
        };
        let a = rng.random_range(0..q) as i64;
        let pair = |x: Result<crate::SumValue>, y: Result<crate::SumValue>| match (x, y) {
            (Ok(x), Ok(y)) => (x.value - y.value).norm(),
            _ => f64::INFINITY,
        };
        t2.check(pair(ctx.type2(&alpha, &beta, a, Path::Direct), ctx.type2(&alpha, &beta, a, Path::Dft)), tol);
        t1.check(pair(ctx.type1(&alpha, &jn, a, Path::Direct), ctx.type1(&alpha, &jn, a, Path::Dft)), tol);
        prod.check(pair(ctx.type1_product(&alpha, &jn, a, Path::Direct), ctx.type1_product(&alpha, &jn, a, Path::Dft)), tol);
        let divisors = f.divisors();
        let r = divisors[rng.random_range(0..divisors.len())];
        let c = if r == 1 { 0 } else { random_unit(r, &mut rng) as i64 };
        let k = rng.random_range(1..=r);
        let au = random_unit(q, &mut rng) as i64;
        let Ok(gamma) = WeightVector::on_interval(Interval::new(-1, q).expect("q >= 1"), weights(q, &mut rng)) else {
            continue;
        };
        inc.check(
            pair(ctx.w(&alpha, &gamma, r, c, k, au, Path::Direct), ctx.w(&alpha, &gamma, r, c, k, au, Path::Dft)),
            tol,
        );
        if is_prime(q) && q > 2 {
            let kk = rng.random_range(1..q);
            let Ok(g2) = WeightVector::on_interval(Interval::initial(kk).expect("positive"), weights(kk, &mut rng)) else {
                continue;
            };
            sharp.check(pair(ctx.wsharp(&alpha, &g2, au, Path::Direct), ctx.wsharp(&alpha, &g2, au, Path::Dft)), tol);
            let j = Interval::initial(kk).expect("positive");
            sharp.check(pair(ctx.ssharp(&alpha, &j, Path::Direct), ctx.ssharp(&alpha, &j, Path::Dft)), tol);
        }
    }
    [t2, t1, prod, inc, sharp].map(Tally::finish).to_vec()
}

fn moments_checks(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut oracle = Tally::new("moments", "profile dft = direct");
    let mut square = Tally::new("moments", "full square sum");
    let mut holder = Tally::new("moments", "holder interpolation");
    let primes: Vec<u64> = primes_up_to(opts.budget.min(400)).into_iter().filter(|&p| p > 3).collect();
    for &p in primes.iter().step_by(4) {
        let n = ((p as f64).sqrt() as u64).max(1);
        let Ok(j) = Interval::initial(n) else { continue };
        match (m_values(p, &j), m_values_direct(p, &j)) {
            (Ok(a), Ok(b)) => {
                let dev = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                oracle.check(dev, 1e-6 * (p * n) as f64);
            }
            _ => oracle.exact(false),
        }
        let Ok(profile) = m_profile(p, &j) else {
            square.exact(false);
            continue;
        };
        let exact = (p * p * n - p * n * n) as f64;
        square.check((profile.full_square_sum() - exact).abs(), 1e-6 * exact);
        for r in 1..=3 {
            let alpha = 1.0 + 6.0 * r as f64 / 7.0 / 2.0;
            match (moment(&profile, alpha), holder_rhs(&profile, r, alpha)) {
                (Ok(lhs), Ok(rhs)) => holder.check(lhs, rhs * (1.0 + 1e-9)),
                _ => holder.exact(false),
            }
        }
    }
    [oracle, square, holder].map(Tally::finish).to_vec()
}

fn divisor_checks(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut partition = Tally::new("divisor", "class sums partition");
    let mut progression = Tally::new("divisor", "progression sums");
    let x = (20 * opts.budget).min(100_000);
    let Ok(tau) = TauTable::new(x) else {
        return vec![partition.finish(), progression.finish()];
    };
    let total = tau.total();
    for q in 2..=opts.budget.min(60) {
        let classes = tau.class_sums(q);
        partition.exact(classes.iter().sum::<u64>() == total);
        for a in (1..q).filter(|&a| gcd(a, q) == 1) {
            progression.exact(tau.sum_ap(a as i64, q).ok() == Some(classes[a as usize]));
        }
    }
    vec![partition.finish(), progression.finish()]
}
