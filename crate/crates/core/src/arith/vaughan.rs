use std::collections::BTreeMap;

use super::SieveTables;
use crate::error::{Error, Result};

/// Cutoffs `U`, `V` of the Vaughan decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VaughanParams {
    pub u: f64,
    pub v: f64,
}

impl VaughanParams {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u >= 1.0 && v >= 1.0 && u.is_finite() && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("Vaughan cutoffs U={u}, V={v} must be finite and >= 1")));
        }
        Ok(VaughanParams { u, v })
    }

    /// `U = V = N^{δ_1}` with `δ_1 = 1 / (48 d)`.
    pub fn default_for(n: f64, d: u32) -> Self {
        let x = n.powf(1.0 / (48.0 * d as f64)).max(1.0);
        VaughanParams { u: x, v: x }
    }

    pub fn uv(&self) -> f64 {
        self.u * self.v
    }
}

fn le(x: u64, bound: f64) -> bool {
    (x as f64) <= bound
}

fn check_arg(t: &SieveTables, x: u64) -> Result<()> {
    if x == 0 || x > t.limit() {
        return Err(Error::InvalidArgument(format!("argument {x} outside 1..={}", t.limit())));
    }
    Ok(())
}

/// `ν_2(s) = -Σ_{cd = s, c ≤ V, d ≤ U} μ(c) Λ(d)`.
pub fn nu2(t: &SieveTables, s: u64, p: VaughanParams) -> Result<f64> {
    check_arg(t, s)?;
    Ok(nu2_unchecked(t, s, p))
}

fn nu2_unchecked(t: &SieveTables, s: u64, p: VaughanParams) -> f64 {
    let mut acc = 0.0;
    for c in t.divisors(s) {
        let d = s / c;
        if le(c, p.v) && le(d, p.u) {
            acc -= t.mu(c) as f64 * t.lambda(d);
        }
    }
    acc
}

/// `ν_3(t) = -Σ_{c | t, c ≤ V} μ(c)`.
pub fn nu3(t: &SieveTables, x: u64, p: VaughanParams) -> Result<i64> {
    check_arg(t, x)?;
    Ok(nu3_unchecked(t, x, p))
}

fn nu3_unchecked(t: &SieveTables, x: u64, p: VaughanParams) -> i64 {
    -t.divisors(x).into_iter().filter(|&c| le(c, p.v)).map(|c| t.mu(c) as i64).sum::<i64>()
}

/// The four pieces of the decomposition of `Λ(x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VaughanTerms {
    /// `Λ(x) 1_{x ≤ U}`
    pub small: f64,
    /// `Σ_{st = x, s ≤ V} μ(s) log t`
    pub type_one: f64,
    /// `Σ_{st = x, s ≤ UV} ν_2(s)`
    pub type_one_prime: f64,
    /// `Σ_{st = x, s > U, t > V} Λ(s) ν_3(t)`
    pub type_two: f64,
}

impl VaughanTerms {
    pub fn sum(&self) -> f64 {
        self.small + self.type_one + self.type_one_prime + self.type_two
    }
}

pub fn vaughan_terms(t: &SieveTables, x: u64, p: VaughanParams) -> Result<VaughanTerms> {
    check_arg(t, x)?;
    let mut out = VaughanTerms::default();
    if le(x, p.u) {
        out.small = t.lambda(x);
    }
    for s in t.divisors(x) {
        let r = x / s;
        if le(s, p.v) {
            out.type_one += t.mu(s) as f64 * (r as f64).ln();
        }
        if le(s, p.uv()) {
            out.type_one_prime += nu2_unchecked(t, s, p);
        }
        if !le(s, p.u) && !le(r, p.v) {
            let l = t.lambda(s);
            if l != 0.0 {
                out.type_two += l * nu3_unchecked(t, r, p) as f64;
            }
        }
    }
    Ok(out)
}

/// `Λ(x)` minus the sum of the four pieces.
pub fn vaughan_residual(t: &SieveTables, x: u64, p: VaughanParams) -> Result<f64> {
    let terms = vaughan_terms(t, x, p)?;
    Ok(t.lambda(x) - terms.sum())
}

/// The residual as an integer combination of `log p`; empty iff the
/// identity holds exactly at `x`.
pub fn vaughan_residual_exact(t: &SieveTables, x: u64, p: VaughanParams) -> Result<BTreeMap<u64, i64>> {
    check_arg(t, x)?;
    let mut acc: BTreeMap<u64, i64> = BTreeMap::new();
    let add_log = |acc: &mut BTreeMap<u64, i64>, y: u64, k: i64| {
        for (q, e) in t.factor(y) {
            *acc.entry(q).or_default() += k * e as i64;
        }
    };
    let add_lambda = |acc: &mut BTreeMap<u64, i64>, y: u64, k: i64| {
        if let Some(q) = t.prime_base(y) {
            *acc.entry(q as u64).or_default() += k;
        }
    };
    add_lambda(&mut acc, x, 1);
    if le(x, p.u) {
        add_lambda(&mut acc, x, -1);
    }
    for s in t.divisors(x) {
        let r = x / s;
        if le(s, p.v) {
            add_log(&mut acc, r, -(t.mu(s) as i64));
        }
        if le(s, p.uv()) {
            // -ν_2(s) = Σ μ(c) Λ(d)
            for c in t.divisors(s) {
                let d = s / c;
                if le(c, p.v) && le(d, p.u) {
                    add_lambda(&mut acc, d, t.mu(c) as i64);
                }
            }
        }
        if !le(s, p.u) && !le(r, p.v) {
            add_lambda(&mut acc, s, -nu3_unchecked(t, r, p));
        }
    }
    acc.retain(|_, v| *v != 0);
    Ok(acc)
}

/// Largest `|residual|` over `2..=limit`.
pub fn max_vaughan_residual(t: &SieveTables, limit: u64, p: VaughanParams) -> Result<f64> {
    if limit > t.limit() {
        return Err(Error::InvalidArgument(format!("limit {limit} exceeds sieve {}", t.limit())));
    }
    let chunks = crate::par::map_range(limit.max(1).div_ceil(1024) as usize, |c| {
        let lo = (c as u64 * 1024).max(2);
        let hi = ((c as u64 + 1) * 1024 - 1).min(limit);
        let mut m: f64 = 0.0;
        for x in lo..=hi {
            m = m.max(vaughan_residual(t, x, p).map(f64::abs).unwrap_or(f64::INFINITY));
        }
        m
    });
    Ok(chunks.into_iter().fold(0.0, f64::max))
}
