//! p-adic densities, the singular series and Hensel witnesses.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{euler_phi, factor_u64, is_prime, mobius, primes_up_to};
use crate::error::{Error, Result};
use crate::expsums::unit_value_histogram;
use crate::forms::{Form, ModEvaluator};
use crate::par;

/// Default cutoff of the singular series.
pub const DEFAULT_SERIES_CUTOFF: u64 = 200;
/// Default prime bound of the Euler product.
pub const DEFAULT_EULER_PRIMES: u64 = 50;
/// Largest exponent tried when looking for a stable local factor.
pub const MAX_STABILIZATION_EXPONENT: u32 = 8;
/// Search budget (tuples) for Hensel witnesses.
pub const WITNESS_SEARCH_LIMIT: u64 = 1_000_000_000;

fn checked_pow(p: u64, k: u32) -> Result<u64> {
    p.checked_pow(k)
        .ok_or_else(|| Error::InvalidArgument(format!("{p}^{k} overflows")))
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    Ok(())
}

/// `#{h ∈ ((Z/p^k)^*)^n : F(h) ≡ 0 mod p^k}`.
pub fn unit_solutions(f: &Form, p: u64, k: u32) -> Result<u128> {
    check_prime(p)?;
    let q = checked_pow(p, k)?;
    Ok(unit_value_histogram(f, q)?[0])
}

/// Local factor at `p^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalDensity {
    pub p: u64,
    pub k: u32,
    pub m_star: u128,
    /// `M*(p^k) p^k / φ(p^k)^n`
    pub sigma: BigRational,
}

impl LocalDensity {
    pub fn sigma_f64(&self) -> f64 {
        self.sigma.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn sigma_p(f: &Form, p: u64, k: u32) -> Result<LocalDensity> {
    let m_star = unit_solutions(f, p, k)?;
    let q = checked_pow(p, k)?;
    let phi = BigInt::from(euler_phi(q));
    let den = num_traits::pow(phi, f.n_vars());
    let sigma = BigRational::new(BigInt::from(m_star) * BigInt::from(q), den);
    Ok(LocalDensity { p, k, m_star, sigma })
}

/// Ramanujan sum `c_q(r) = Σ_{gcd(a,q)=1} e(a r / q)`.
pub fn ramanujan_sum(q: u64, r: u64) -> i64 {
    let g = if r.is_multiple_of(q) { q } else { (r % q).gcd(&q) };
    divisors(g).into_iter().map(|d| mobius(q / d) * d as i64).sum()
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `B(q) = φ(q)^{-n} Σ_{gcd(a,q)=1} 𝒜(q, a)`, exactly.
pub fn series_term(f: &Form, q: u64) -> Result<BigRational> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let hist = unit_value_histogram(f, q)?;
    let mut num = BigInt::zero();
    for (r, &c) in hist.iter().enumerate() {
        if c != 0 {
            num += BigInt::from(c) * ramanujan_sum(q, r as u64);
        }
    }
    let den = num_traits::pow(BigInt::from(euler_phi(q)), f.n_vars());
    Ok(BigRational::new(num, den))
}

#[derive(Clone, Debug)]
pub struct SingularSeries {
    pub cutoff: u64,
    /// `(q, B(q))` for `1 ≤ q ≤ Q`.
    pub terms: Vec<(u64, BigRational)>,
    /// `𝔖(Q')` for `Q' = 1..=Q`.
    pub partial: Vec<f64>,
    pub value: f64,
    /// Least-squares slope of `log |B(q)|` against `log q` over nonzero terms with `q > Q/4`.
    pub tail_slope: Option<f64>,
}

impl SingularSeries {
    /// `|𝔖(2Q') - 𝔖(Q')|` for `Q' = 1, 2, 4, …` with `2Q' ≤ Q`.
    pub fn dyadic_increments(&self) -> Vec<(u64, f64)> {
        let mut out = vec![];
        let mut q = 1u64;
        while 2 * q <= self.cutoff {
            out.push((q, (self.partial[(2 * q - 1) as usize] - self.partial[(q - 1) as usize]).abs()));
            q *= 2;
        }
        out
    }
}

pub fn singular_series(f: &Form, cutoff: u64) -> Result<SingularSeries> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("series cutoff must be positive".into()));
    }
    let qs: Vec<u64> = (1..=cutoff).collect();
    let terms = par::map_collect(&qs, |&q| series_term(f, q).map(|b| (q, b)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut partial = Vec::with_capacity(terms.len());
    let mut exact = BigRational::zero();
    for (_, b) in &terms {
        exact += b;
        partial.push(exact.to_f64().unwrap_or(f64::NAN));
    }
    let pts: Vec<(f64, f64)> = terms
        .iter()
        .filter(|(q, b)| 4 * q > cutoff && !b.is_zero())
        .map(|(q, b)| ((*q as f64).ln(), b.abs().to_f64().unwrap_or(f64::NAN).ln()))
        .collect();
    let tail_slope = fit_slope(&pts);
    Ok(SingularSeries { cutoff, value: *partial.last().unwrap(), partial, terms, tail_slope })
}

pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Stable local factor at one prime.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerFactor {
    pub density: LocalDensity,
    /// True when `σ_p(k) = σ_p(k+1)` was observed.
    pub stabilized: bool,
}

#[derive(Clone, Debug)]
pub struct EulerProduct {
    pub factors: Vec<EulerFactor>,
    pub value: f64,
}

/// `σ_p(k)` for the least `k` with `σ_p(k) = σ_p(k+1)`, within the budget.
pub fn stable_local_factor(f: &Form, p: u64) -> Result<EulerFactor> {
    let mut prev = sigma_p(f, p, 1)?;
    for k in 2..=MAX_STABILIZATION_EXPONENT {
        let next = match sigma_p(f, p, k) {
            Ok(v) => v,
            Err(Error::Budget { .. }) | Err(Error::InvalidArgument(_)) => break,
            Err(e) => return Err(e),
        };
        if next.sigma == prev.sigma {
            return Ok(EulerFactor { density: prev, stabilized: true });
        }
        prev = next;
    }
    Ok(EulerFactor { density: prev, stabilized: false })
}

pub fn euler_product(f: &Form, pmax: u64) -> Result<EulerProduct> {
    let primes = primes_up_to(pmax);
    let factors = par::map_collect(&primes, |&p| stable_local_factor(f, p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let value = factors.iter().map(|e| e.density.sigma_f64()).product();
    Ok(EulerProduct { factors, value })
}

/// Outcome of the unit-coordinate Hensel search at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HenselVerdict {
    /// `F(h) ≡ 0 mod p^k` with `2 v_p(∇F(h)) < k`, so `h` lifts to `Z_p`.
    Witness { level: u32, h: Vec<u64>, gradient_valuation: u32 },
    /// No unit solution modulo `p^level`.
    Obstruction { level: u32 },
    /// Unit solutions exist up to the searched level but none certifies a lift.
    Inconclusive { level: u32 },
}

impl HenselVerdict {
    pub fn is_obstruction(&self) -> bool {
        matches!(self, HenselVerdict::Obstruction { .. })
    }
}

impl fmt::Display for HenselVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HenselVerdict::Witness { level, h, gradient_valuation } => {
                let hs: Vec<String> = h.iter().map(|v| v.to_string()).collect();
                write!(f, "witness mod p^{level} h=({}) v_p(grad)={gradient_valuation}", hs.join(","))
            }
            HenselVerdict::Obstruction { level } => write!(f, "obstruction mod p^{level}"),
            HenselVerdict::Inconclusive { level } => write!(f, "inconclusive up to p^{level}"),
        }
    }
}

fn valuation(mut x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    while x.is_multiple_of(p) && v < cap {
        x /= p;
        v += 1;
    }
    v
}

/// Search modulo `p^k` for a unit solution with small gradient valuation.
/// Returns the first witness in lexicographic order and whether any unit
/// solution was seen.
fn search_level(f: &Form, grad: &[Form], p: u64, k: u32) -> Result<(Option<(Vec<u64>, u32)>, bool)> {
    let q = checked_pow(p, k)?;
    let n = f.n_vars();
    let units: Vec<u64> = (1..q).filter(|x| x % p != 0).collect();
    let total = (units.len() as f64).powi(n as i32);
    let eval = ModEvaluator::new(f, q);
    let grads: Vec<ModEvaluator> = grad.iter().map(|g| ModEvaluator::new(g, q)).collect();
    let mut idx = vec![0usize; n];
    let mut x: Vec<u64> = vec![units[0]; n];
    let mut seen = false;
    let mut visited: u64 = 0;
    if n == 0 {
        return Ok((None, false));
    }
    loop {
        visited += 1;
        if visited > WITNESS_SEARCH_LIMIT {
            return Err(Error::Budget {
                what: "Hensel witness search",
                needed: total,
                limit: WITNESS_SEARCH_LIMIT as f64,
            });
        }
        if eval.eval(&x) == 0 {
            seen = true;
            let v = grads.iter().map(|g| valuation(g.eval(&x), p, k)).min().unwrap_or(k);
            if 2 * v < k {
                return Ok((Some((x, v)), true));
            }
        }
        let mut j = n;
        loop {
            if j == 0 {
                return Ok((None, seen));
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < units.len() {
                x[j] = units[idx[j]];
                break;
            }
            idx[j] = 0;
            x[j] = units[0];
        }
    }
}

/// Nonsingular unit solution modulo `p`, escalating to `p^2`, `p^3` for `p ≤ 7`.
pub fn hensel_unit_witness(f: &Form, p: u64) -> Result<HenselVerdict> {
    check_prime(p)?;
    let grad = f.gradient();
    let max_level = if p <= 7 { 3 } else { 1 };
    for k in 1..=max_level {
        // cheap existence check before the ordered search
        if unit_solutions(f, p, k).map(|c| c == 0).unwrap_or(false) {
            return Ok(HenselVerdict::Obstruction { level: k });
        }
        let (w, seen) = search_level(f, &grad, p, k)?;
        if let Some((h, v)) = w {
            return Ok(HenselVerdict::Witness { level: k, h, gradient_valuation: v });
        }
        if !seen {
            return Ok(HenselVerdict::Obstruction { level: k });
        }
    }
    Ok(HenselVerdict::Inconclusive { level: max_level })
}

#[derive(Clone, Debug)]
pub struct LocalCheckRow {
    pub p: u64,
    pub verdict: HenselVerdict,
    /// `σ_p(1)`, when the count fits the enumeration budget.
    pub sigma1: Option<BigRational>,
}

/// Hensel verdicts and `σ_p(1)` for every prime `p ≤ pmax`.
pub fn local_check(f: &Form, pmax: u64) -> Result<Vec<LocalCheckRow>> {
    let primes = primes_up_to(pmax);
    par::map_collect(&primes, |&p| {
        Ok(LocalCheckRow { p, verdict: hensel_unit_witness(f, p)?, sigma1: sigma_p(f, p, 1).ok().map(|d| d.sigma) })
    })
    .into_iter()
    .collect()
}

/// Exact rational as a decimal string.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
