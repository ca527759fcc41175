use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::analytic::SmoothWeight;
use crate::arith::SieveTables;
use crate::error::{Error, Result};

/// Smooth box `ϖ(x) = Π ω(x_j / N - x_{0,j})` with its integer supports.
#[derive(Clone, Debug)]
pub struct WindowedBox {
    scale: f64,
    x0: Vec<f64>,
    weight: SmoothWeight,
    lo: Vec<u64>,
    hi: Vec<u64>,
}

impl WindowedBox {
    pub fn new(scale: f64, x0: Vec<f64>, weight: SmoothWeight) -> Result<Self> {
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale N = {scale} must be finite and >= 1")));
        }
        let d = weight.delta();
        let mut lo = Vec::with_capacity(x0.len());
        let mut hi = Vec::with_capacity(x0.len());
        for (j, &c) in x0.iter().enumerate() {
            if !(c - d > 0.0 && c + d < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "window x0[{}] = {c} ± {d} is not inside (0, 1)",
                    j + 1
                )));
            }
            // integers strictly inside the open support
            let l = ((c - d) * scale).floor() as u64 + 1;
            let h = ((c + d) * scale).ceil() as u64 - 1;
            lo.push(l.max(1));
            hi.push(h);
        }
        let mut b = WindowedBox { scale, x0, weight, lo, hi };
        for j in 0..b.x0.len() {
            while b.lo[j] <= b.hi[j] && b.coordinate_weight(j, b.lo[j]) == 0.0 {
                b.lo[j] += 1;
            }
            while b.hi[j] >= b.lo[j] && b.coordinate_weight(j, b.hi[j]) == 0.0 {
                b.hi[j] -= 1;
            }
        }
        Ok(b)
    }

    pub fn n_vars(&self) -> usize {
        self.x0.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn weight(&self) -> &SmoothWeight {
        &self.weight
    }

    /// Inclusive integer range of coordinate `j` (may be empty when `lo > hi`).
    pub fn support(&self, j: usize) -> (u64, u64) {
        (self.lo[j], self.hi[j])
    }

    pub fn lower_edge(&self) -> u64 {
        self.lo.iter().copied().min().unwrap_or(0)
    }

    pub fn upper_edge(&self) -> u64 {
        self.hi.iter().copied().max().unwrap_or(0)
    }

    /// `ϖ_j(x) = ω(x / N - x_{0,j})`.
    pub fn coordinate_weight(&self, j: usize, x: u64) -> f64 {
        self.weight.eval(x as f64 / self.scale - self.x0[j])
    }

    pub fn weight_at(&self, x: &[u64]) -> f64 {
        x.iter().enumerate().map(|(j, &v)| self.coordinate_weight(j, v)).product()
    }

    pub(crate) fn check_tables(&self, tables: &SieveTables) -> Result<()> {
        if self.upper_edge() > tables.limit() {
            return Err(Error::InvalidArgument(format!(
                "window reaches {} beyond the sieve limit {}",
                self.upper_edge(),
                tables.limit()
            )));
        }
        Ok(())
    }

    /// Nonzero `(x, ϖ_j(x) · a(x))` on coordinate `j` for an arithmetic weight `a`.
    pub(crate) fn weighted_support<A: Fn(u64) -> f64>(&self, j: usize, a: A) -> Vec<(u64, f64)> {
        let (l, h) = self.support(j);
        (l..=h)
            .filter_map(|x| {
                let v = self.coordinate_weight(j, x) * a(x);
                (v != 0.0).then_some((x, v))
            })
            .collect()
    }
}

/// Arithmetic weight attached to each coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithWeight {
    /// von Mangoldt `Λ`.
    VonMangoldt,
    /// `Λ*`: `log p` on primes only.
    PrimesOnly,
}

impl ArithWeight {
    pub(crate) fn value(self, t: &SieveTables, x: u64) -> f64 {
        match self {
            ArithWeight::VonMangoldt => t.lambda(x),
            ArithWeight::PrimesOnly => t.lambda_star(x),
        }
    }
}

/// Frequency `α`, either an exact fraction or a binary floating value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    Rational { num: i64, den: u64 },
    Real(f64),
}

impl Alpha {
    pub fn rational(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let g = num.unsigned_abs().gcd(&den).max(1);
        Ok(Alpha::Rational { num: num / g as i64, den: den / g })
    }

    pub fn real(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha = {x} is not finite")));
        }
        Ok(Alpha::Real(x))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Alpha::Rational { num, den } => num as f64 / den as f64,
            Alpha::Real(x) => x,
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, q)) = s.split_once('/') {
            let num: i64 = a.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad numerator in {s}")))?;
            let den: u64 = q.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad denominator in {s}")))?;
            return Alpha::rational(num, den);
        }
        let x: f64 = s.parse().map_err(|_| Error::InvalidArgument(format!("cannot parse alpha {s}")))?;
        Alpha::real(x)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Rational { num, den } => write!(f, "{num}/{den}"),
            Alpha::Real(x) => write!(f, "{x}"),
        }
    }
}

const ROOT_TABLE_LIMIT: u64 = 1 << 22;

/// Maps exact values `F(x)` to `e(α F(x))`.
#[derive(Clone, Debug)]
pub(crate) enum PhaseMap {
    Rational { num: u64, q: u64, table: Option<Vec<Complex64>> },
    /// `α = mant · 2^{-shift}` with `shift > 0`.
    Dyadic { mant: i128, shift: u32 },
    Integer,
}

fn unit(frac: f64) -> Complex64 {
    let a = TAU * frac;
    Complex64::new(a.cos(), a.sin())
}

impl PhaseMap {
    pub fn new(alpha: Alpha) -> Self {
        match alpha {
            Alpha::Rational { num, den } => {
                let q = den;
                let numr = num.rem_euclid(q as i64) as u64;
                let table = (q <= ROOT_TABLE_LIMIT).then(|| (0..q).map(|k| unit(k as f64 / q as f64)).collect());
                PhaseMap::Rational { num: numr, q, table }
            }
            Alpha::Real(x) => {
                if x == 0.0 {
                    return PhaseMap::Integer;
                }
                let bits = x.to_bits();
                let sign = if bits >> 63 == 0 { 1i128 } else { -1 };
                let exp = ((bits >> 52) & 0x7ff) as i32;
                let frac = (bits & ((1u64 << 52) - 1)) as i128;
                let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
                if e >= 0 {
                    PhaseMap::Integer
                } else {
                    PhaseMap::Dyadic { mant: sign * mant, shift: (-e) as u32 }
                }
            }
        }
    }

    pub fn rational_index(&self, f: i128) -> Option<u64> {
        match self {
            PhaseMap::Rational { num, q, .. } => {
                let r = f.rem_euclid(*q as i128) as u128;
                Some((r * *num as u128 % *q as u128) as u64)
            }
            _ => None,
        }
    }

    pub fn root(&self, k: u64) -> Complex64 {
        match self {
            PhaseMap::Rational { q, table: Some(t), .. } => t[(k % q) as usize],
            PhaseMap::Rational { q, .. } => unit((k % q) as f64 / *q as f64),
            _ => Complex64::new(1.0, 0.0),
        }
    }

    /// `e(α f)`.
    pub fn eval(&self, f: i128) -> Complex64 {
        match self {
            PhaseMap::Integer => Complex64::new(1.0, 0.0),
            PhaseMap::Rational { .. } => self.root(self.rational_index(f).expect("rational")),
            PhaseMap::Dyadic { mant, shift } => match mant.checked_mul(f) {
                Some(prod) => {
                    if *shift >= 127 {
                        unit((prod as f64 * 2f64.powi(-(*shift as i32))).rem_euclid(1.0))
                    } else {
                        let m = 1i128 << shift;
                        unit(prod.rem_euclid(m) as f64 / m as f64)
                    }
                }
                None => self.eval_big(&BigInt::from(f)),
            },
        }
    }

    pub fn eval_big(&self, f: &BigInt) -> Complex64 {
        match self {
            PhaseMap::Integer => Complex64::new(1.0, 0.0),
            PhaseMap::Rational { num, q, .. } => {
                let r = f.mod_floor(&BigInt::from(*q)).to_u64().expect("reduced");
                self.root((r as u128 * *num as u128 % *q as u128) as u64)
            }
            PhaseMap::Dyadic { mant, shift } => {
                let m = BigInt::from(1) << *shift as usize;
                let r = (BigInt::from(*mant) * f).mod_floor(&m);
                let frac = if r.is_zero() {
                    0.0
                } else {
                    // keep the top 64 bits of the residue
                    let bits = r.bits();
                    let drop = bits.saturating_sub(64);
                    let top = (&r >> drop as usize).to_f64().unwrap_or(0.0);
                    top * 2f64.powi(drop as i32 - *shift as i32)
                };
                unit(frac)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_supports() {
        let w = SmoothWeight::bump(0.2, 1).unwrap();
        let b = WindowedBox::new(60.0, vec![0.5, 0.5], w.clone()).unwrap();
        assert_eq!(b.support(0), (19, 41));
        assert!(b.coordinate_weight(0, 18) == 0.0 && b.coordinate_weight(0, 19) > 0.0);
        assert!(WindowedBox::new(60.0, vec![0.1], w).is_err());
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("6/4".parse::<Alpha>().unwrap(), Alpha::Rational { num: 3, den: 2 });
        assert_eq!("0.25".parse::<Alpha>().unwrap(), Alpha::Real(0.25));
        assert!("NaN".parse::<Alpha>().is_err());
        assert!("1/0".parse::<Alpha>().is_err());
    }

    #[test]
    fn dyadic_phases_are_exact() {
        let p = PhaseMap::new(Alpha::Real(0.375));
        let z = p.eval(8);
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let z = p.eval(3);
        assert!((z - unit(0.125)).norm() < 1e-15);
        // huge arguments reduce without loss
        let big = (1i128 << 100) + 3;
        assert!((p.eval(big) - unit(0.125)).norm() < 1e-15);
        assert!((p.eval_big(&BigInt::from(big)) - unit(0.125)).norm() < 1e-15);
        let r = PhaseMap::new(Alpha::rational(2, 7).unwrap());
        assert!((r.eval(-1) - unit(5.0 / 7.0)).norm() < 1e-15);
        assert!((r.eval_big(&BigInt::from(-1)) - unit(5.0 / 7.0)).norm() < 1e-15);
    }
}
