use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::GaussLegendre;
use crate::arith::SieveTables;
use crate::error::{Error, Result};
use crate::expsums::{s_alpha, Alpha, WindowedBox};
use crate::forms::Form;
use crate::par::{self, KahanSum};

/// Default major-arc exponent `ϑ_0 = 1/12`.
pub fn default_theta() -> BigRational {
    BigRational::new(1.into(), 12.into())
}

/// Major arc `|α - a/q| ≤ N^{ϑ_0 - d} / q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub q: u64,
    pub a: u64,
    pub center: f64,
    pub radius: f64,
}

impl Arc {
    /// The arc clipped to `[0, 1]`.
    pub fn clipped(&self) -> (f64, f64) {
        ((self.center - self.radius).max(0.0), (self.center + self.radius).min(1.0))
    }

    /// Length of the clipped arc.
    pub fn length(&self) -> f64 {
        self.radius.min(self.center) + self.radius.min(1.0 - self.center)
    }

    pub fn contains(&self, alpha: f64) -> bool {
        (alpha - self.center).abs() <= self.radius
    }
}

#[derive(Clone, Debug)]
pub struct ArcDissection {
    pub n: u64,
    pub d: u32,
    pub theta: BigRational,
    /// Largest `q` with `q ≤ N^{ϑ_0}`.
    pub q_max: u64,
    /// Sorted by centre.
    pub arcs: Vec<Arc>,
    pub major_measure: f64,
}

impl ArcDissection {
    pub fn arc_containing(&self, alpha: f64) -> Option<&Arc> {
        let i = self.arcs.partition_point(|a| a.center < alpha);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|k| self.arcs.get(k))
            .find(|a| a.contains(alpha))
    }

    pub fn is_major(&self, alpha: f64) -> bool {
        self.arc_containing(alpha).is_some()
    }

    pub fn minor_measure(&self) -> f64 {
        1.0 - self.major_measure
    }
}

fn big_pow(b: u64, e: u64) -> BigInt {
    num_traits::pow(BigInt::from(b), e as usize)
}

/// Largest `q` with `q^den ≤ N^num`.
fn floor_power(n: u64, num: u64, den: u64) -> u64 {
    let target = big_pow(n, num);
    let mut q = (n as f64).powf(num as f64 / den as f64).floor().max(1.0) as u64;
    while q > 1 && big_pow(q, den) > target {
        q -= 1;
    }
    while big_pow(q + 1, den) <= target {
        q += 1;
    }
    q
}

/// Reduced fractions `a/q`, `q ≤ N^{ϑ_0}`, `0 ≤ a ≤ q`, with their arcs.
/// Disjointness of neighbouring arcs is verified in exact arithmetic.
pub fn major_arcs(n: u64, d: u32, theta: &BigRational) -> Result<ArcDissection> {
    if n < 2 {
        return Err(Error::InvalidArgument("scale N must be at least 2".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("degree must be positive".into()));
    }
    if !(theta.is_positive() && theta < &BigRational::one()) {
        return Err(Error::InvalidArgument(format!("ϑ0 = {theta} must lie in (0, 1)")));
    }
    let num = theta.numer().to_u64().expect("positive numerator");
    let den = theta.denom().to_u64().ok_or_else(|| Error::InvalidArgument("ϑ0 denominator too large".into()))?;
    let q_max = floor_power(n, num, den);
    let mut fracs: Vec<(u64, u64)> = vec![];
    for q in 1..=q_max {
        for a in 0..=q {
            if a.gcd(&q) == 1 {
                fracs.push((a, q));
            }
        }
    }
    fracs.sort_by(|x, y| (x.0 as u128 * y.1 as u128).cmp(&(y.0 as u128 * x.1 as u128)));
    // |a/q - a'/q'| > N^{ϑ0-d} (1/q + 1/q')  ⇔  |aq' - a'q|^den N^{d·den - num} > (q + q')^den
    let scale = big_pow(n, d as u64 * den - num);
    for w in fracs.windows(2) {
        let (a, q) = w[0];
        let (b, r) = w[1];
        let gap = BigInt::from(b as i128 * q as i128 - a as i128 * r as i128).abs();
        if num_traits::pow(gap, den as usize) * &scale <= big_pow(q + r, den) {
            return Err(Error::OverlappingArcs { first: format!("{a}/{q}"), second: format!("{b}/{r}") });
        }
    }
    let base = (n as f64).powf(theta.to_f64().unwrap() - d as f64);
    let arcs: Vec<Arc> = fracs
        .into_iter()
        .map(|(a, q)| Arc { q, a, center: a as f64 / q as f64, radius: base / q as f64 })
        .collect();
    let mut m = KahanSum::new();
    for arc in &arcs {
        m.add(arc.length());
    }
    Ok(ArcDissection { n, d, theta: theta.clone(), q_max, arcs, major_measure: m.value() })
}

#[derive(Clone, Debug)]
pub struct ArcMass {
    pub q: u64,
    pub a: u64,
    /// `∫ |S(α)| dα` over the clipped arc.
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct ArcMassReport {
    pub s0: f64,
    pub arcs: Vec<ArcMass>,
    pub major_mass: f64,
    /// Monte Carlo estimate of `∫_minor |S(α)| dα`.
    pub minor_mass: f64,
    pub minor_std_error: f64,
    pub minor_mean_abs: f64,
    pub minor_samples: usize,
    pub ratio: f64,
}

/// Upper bound for `|F|` on the box.
fn value_bound(f: &Form, b: &WindowedBox) -> f64 {
    f.terms()
        .map(|(e, c)| {
            let mut v = c.abs().to_f64().unwrap_or(f64::INFINITY);
            for (j, &k) in e.iter().enumerate() {
                v *= (b.support(j).1 as f64).powi(k as i32);
            }
            v
        })
        .sum()
}

/// `∫|S|` over each major arc by Gauss–Legendre panels sized to the phase
/// variation, and over the minor arcs by seeded Monte Carlo.
pub fn arc_mass_report(
    f: &Form,
    b: &WindowedBox,
    tables: &SieveTables,
    dis: &ArcDissection,
    minor_samples: usize,
    seed: u64,
) -> Result<ArcMassReport> {
    let s = |alpha: f64| -> Result<Complex64> { s_alpha(f, b, tables, Alpha::real(alpha)?) };
    let s0 = s(0.0)?.norm();
    let gl = GaussLegendre::new(8);
    let bound = value_bound(f, b);
    let arcs = par::map_collect(&dis.arcs, |arc| -> Result<ArcMass> {
        let (l, h) = arc.clipped();
        let cycles = (h - l) * bound;
        let panels = ((cycles / 2.0).ceil() as usize).clamp(4, 4096);
        let (xs, ws) = gl.composite(l, h, panels);
        let mut acc = KahanSum::new();
        for (x, w) in xs.iter().zip(&ws) {
            acc.add(w * s(*x)?.norm());
        }
        Ok(ArcMass { q: arc.q, a: arc.a, mass: acc.value() })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut major = KahanSum::new();
    for a in &arcs {
        major.add(a.mass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(minor_samples);
    while points.len() < minor_samples {
        let alpha: f64 = rng.random();
        if !dis.is_major(alpha) {
            points.push(alpha);
        }
    }
    let vals = par::map_collect(&points, |&a| s(a).map(|z| z.norm()))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let k = vals.len().max(1) as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    let measure = dis.minor_measure();
    let minor_mass = mean * measure;
    Ok(ArcMassReport {
        s0,
        major_mass: major.value(),
        minor_mass,
        minor_std_error: (var / k).sqrt() * measure,
        minor_mean_abs: mean,
        minor_samples: vals.len(),
        ratio: minor_mass / major.value(),
        arcs,
    })
}
