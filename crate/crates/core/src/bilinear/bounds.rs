use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::is_prime;

/// Which of the three alternative saving factors to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    A,
    B,
    C,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::A, Variant::B, Variant::C];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
        })
    }
}

/// Saving factor for Type I sums of complete Kloosterman sums, `d = gcd(a, q)`.
pub fn delta1(m: f64, n: f64, q: f64, d: f64, variant: Variant) -> f64 {
    match variant {
        Variant::A => {
            m.powf(-0.25) / n * q.sqrt() * d.powf(-0.25) + q.sqrt() / (n * m.sqrt()) + n.powf(-0.5)
        }
        Variant::B => m.powf(-0.5) * (n.powf(-0.75) * q.sqrt() + d.sqrt()) + n.powf(-0.5),
        Variant::C => m.powf(-0.5) * (q.sqrt() / n + (q * d).powf(0.25)) + n.powf(-0.5),
    }
}

/// Saving factor for bilinear forms with incomplete Kloosterman sums.
pub fn delta2(m: f64, k: f64, q: f64, r: f64, variant: Variant) -> f64 {
    let tail = (k * q / r).powf(-0.5);
    match variant {
        Variant::A => (m * q / r).powf(-0.25) + m.powf(-0.5) + tail,
        Variant::B => m.powf(-0.5) * (1.0 + (k / r).powf(-0.25) + r.sqrt() / k) + tail,
        Variant::C => m.powf(-0.5) * (1.0 + k.powf(-0.5) * r.powf(0.25) + r.powf(0.75) / k) + tail,
    }
}

/// A bound family whose right-hand side can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    /// `S_{q,a}(α)`, saving `Δ₁(M, N, q, gcd(a, q))`.
    TypeI(Variant),
    /// `Σ α_m K_q(mn, a)`, saving `Δ₁(M, N, q, 1)`.
    TypeIProduct(Variant),
    /// `W_{q,a}(α, γ; r, c)`, saving `Δ₂(M, K, q, r)`.
    Incomplete(Variant),
    /// `W♯` with exponent `7/24r`.
    SharpW1,
    /// `W♯` for `M <= p^{1/2}`, exponent `1/4r`.
    SharpW2,
    /// `S♯`, first form.
    SharpS1,
    /// `S♯` for `M <= p^{1/2}`.
    SharpS2,
    /// `‖α‖∞ ‖β‖∞ M N q^{1/2}`.
    Trivial,
    /// Completion bound for Type II sums.
    PolyaVinogradov,
}

impl Theorem {
    /// Short stable name used in reports and calibration files.
    pub fn tag(&self) -> String {
        match self {
            Theorem::TypeI(v) => format!("thm2.1{v}"),
            Theorem::TypeIProduct(v) => format!("cor2.2{v}"),
            Theorem::Incomplete(v) => format!("thm2.3{v}"),
            Theorem::SharpW1 => "thm2.4".into(),
            Theorem::SharpW2 => "thm2.5".into(),
            Theorem::SharpS1 => "thm2.6".into(),
            Theorem::SharpS2 => "thm2.7".into(),
            Theorem::Trivial => "trivial".into(),
            Theorem::PolyaVinogradov => "polya-vinogradov".into(),
        }
    }

    pub fn all() -> Vec<Theorem> {
        let mut out = Vec::new();
        for v in Variant::ALL {
            out.push(Theorem::TypeI(v));
        }
        for v in Variant::ALL {
            out.push(Theorem::TypeIProduct(v));
        }
        for v in Variant::ALL {
            out.push(Theorem::Incomplete(v));
        }
        out.extend([
            Theorem::SharpW1,
            Theorem::SharpW2,
            Theorem::SharpS1,
            Theorem::SharpS2,
            Theorem::Trivial,
            Theorem::PolyaVinogradov,
        ]);
        out
    }

    /// Whether the constant depends on `r`.
    pub fn uses_r(&self) -> bool {
        matches!(self, Theorem::SharpW1 | Theorem::SharpW2 | Theorem::SharpS1 | Theorem::SharpS2)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::all()
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| Error::BadInput(format!("unknown bound family '{s}'")))
    }
}

/// A bound family with its `q^{o(1)}` stand-in exponent and calibrated constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub theorem: Theorem,
    pub epsilon: f64,
    pub constant: f64,
}

impl BoundSpec {
    pub fn new(theorem: Theorem, epsilon: f64, constant: f64) -> Result<Self> {
        if !(0.0..=0.25).contains(&epsilon) {
            return Err(Error::BadInput(format!("epsilon {epsilon} outside [0, 0.25]")));
        }
        if !(constant > 0.0 && constant.is_finite()) {
            return Err(Error::BadInput(format!("constant {constant} must be positive")));
        }
        Ok(Self { theorem, epsilon, constant })
    }
}

/// Sizes and norms entering a bound.
///
/// `n` is the length of the second variable (`N` or `K`); `d = gcd(a, q)`.
/// `norm_alpha_2` is only used by the Type I and incomplete families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub q: u64,
    pub m: u64,
    pub n: u64,
    pub d: u64,
    pub r: u64,
    pub norm_alpha_2: f64,
    pub norm_alpha_inf: f64,
    pub norm_beta_inf: f64,
}

impl BoundParams {
    /// Unit weights of the given sizes.
    pub fn unit(q: u64, m: u64, n: u64) -> Self {
        Self {
            q,
            m,
            n,
            d: 1,
            r: 1,
            norm_alpha_2: (m as f64).sqrt(),
            norm_alpha_inf: 1.0,
            norm_beta_inf: 1.0,
        }
    }
}

fn pow_u128(b: u64, e: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(b as u128)?;
    }
    Some(acc)
}

/// `K^r >= p`.
fn long_enough(k: u64, p: u64, r: u64) -> bool {
    pow_u128(k, r).is_none_or(|v| v >= p as u128)
}

/// `N^r <= p^{r-1}`.
fn short_enough(n: u64, p: u64, r: u64) -> bool {
    match (pow_u128(n, r), pow_u128(p, r - 1)) {
        (Some(a), Some(b)) => a <= b,
        (None, _) => false,
        (Some(_), None) => true,
    }
}

fn violated(what: &str) -> Error {
    Error::OutOfRange(what.to_string())
}

/// Precondition text for every family, exactly as reported on skipped points.
pub const PRE_R_DIVIDES_Q: &str = "r | q";
pub const PRE_K_AT_MOST_R: &str = "K ≤ r";
pub const PRE_K_LONG: &str = "K ≥ p^{1/r}";
pub const PRE_N_SHORT: &str = "N ≤ p^{1−1/r}";
pub const PRE_M_SMALL: &str = "M ≤ p^{1/2}";
pub const PRE_PRIME: &str = "p prime";
pub const PRE_POSITIVE: &str = "M, N ≥ 1";

/// Check the stated range of `theorem` at `params`.
pub fn check_preconditions(theorem: Theorem, params: &BoundParams) -> Result<()> {
    let BoundParams { q, m, n, r, .. } = *params;
    if m == 0 || n == 0 || q == 0 {
        return Err(violated(PRE_POSITIVE));
    }
    let sharp = |need_m: bool| -> Result<()> {
        if !is_prime(q) {
            return Err(violated(PRE_PRIME));
        }
        if r == 0 {
            return Err(Error::BadInput("r must be positive".into()));
        }
        if need_m && (m as u128) * (m as u128) > q as u128 {
            return Err(violated(PRE_M_SMALL));
        }
        Ok(())
    };
    match theorem {
        Theorem::Incomplete(_) => {
            if r == 0 || q % r != 0 {
                return Err(violated(PRE_R_DIVIDES_Q));
            }
            if n > r {
                return Err(violated(PRE_K_AT_MOST_R));
            }
        }
        Theorem::SharpW1 | Theorem::SharpW2 => {
            sharp(theorem == Theorem::SharpW2)?;
            if !long_enough(n, q, r) {
                return Err(violated(PRE_K_LONG));
            }
        }
        Theorem::SharpS1 | Theorem::SharpS2 => {
            sharp(theorem == Theorem::SharpS2)?;
            if !short_enough(n, q, r) {
                return Err(violated(PRE_N_SHORT));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Right-hand side of `spec.theorem` with `q^{o(1)}` replaced by `q^ε`,
/// times the constant. Fails with the violated precondition named.
pub fn bound_rhs(spec: &BoundSpec, params: &BoundParams) -> Result<f64> {
    check_preconditions(spec.theorem, params)?;
    Ok(spec.constant * structured_rhs(spec.theorem, params) * (params.q as f64).powf(spec.epsilon))
}

/// The right-hand side without constant and without the `q^ε` factor.
pub fn structured_rhs(theorem: Theorem, params: &BoundParams) -> f64 {
    let q = params.q as f64;
    let m = params.m as f64;
    let n = params.n as f64;
    let d = params.d.max(1) as f64;
    let r = params.r as f64;
    let a2 = params.norm_alpha_2;
    let ainf = params.norm_alpha_inf;
    let binf = params.norm_beta_inf;
    match theorem {
        Theorem::TypeI(v) => a2 * m.sqrt() * n * q.sqrt() * delta1(m, n, q, d, v),
        Theorem::TypeIProduct(v) => a2 * m.sqrt() * n * q.sqrt() * delta1(m, n, q, 1.0, v),
        Theorem::Incomplete(v) => a2 * binf * m.sqrt() * n * q / r * delta2(m, n, q, r, v),
        Theorem::SharpW1 => {
            let inner = 1.0 / m + q.powf(1.0 + 1.0 / r) / (m * n * n);
            ainf * binf * m * n * inner.powf(7.0 / (24.0 * r))
        }
        Theorem::SharpW2 => {
            let inner = m.powf(-2.0 * r) + 1.0 / n + q.powf(1.0 + 1.0 / r) / (m.powf(10.0 / 13.0) * n * n);
            ainf * binf * m * n * inner.powf(1.0 / (4.0 * r))
        }
        Theorem::SharpS1 => {
            let e = 7.0 / (24.0 * r);
            let inner = q.sqrt() / (m.powf(e) * n)
                + q.powf(0.5 - 7.0 * (r - 1.0) / (24.0 * r * r)) / (m.powf(e) * n.powf(1.0 - 7.0 / (12.0 * r)));
            ainf * m * n * q.sqrt() * inner
        }
        Theorem::SharpS2 => {
            let inner = q.sqrt() / (m.sqrt() * n)
                + q.powf(0.5 - 1.0 / (4.0 * r)) / n.powf(1.0 - 1.0 / (4.0 * r))
                + q.powf(0.5 - (r - 1.0) / (4.0 * r * r))
                    / (m.powf(13.0 / (40.0 * r)) * n.powf(1.0 - 1.0 / (2.0 * r)));
            ainf * m * n * q.sqrt() * inner
        }
        Theorem::Trivial => ainf * binf * m * n * q.sqrt(),
        Theorem::PolyaVinogradov => {
            ainf * binf * m * n * q.sqrt() * (q.powf(0.25) / m.sqrt() + q.powf(-0.25) + n.powf(-0.5))
        }
    }
}
