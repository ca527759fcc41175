//! Sparse polynomials over `F_p` and an exact zero counter for small
//! polynomial systems.
//!
//! Monomials are packed four bits per variable into a `u64`, so systems
//! are limited to 16 variables and total degree 15.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::forms::Form;
use crate::par;

pub(crate) const MAX_VARS: usize = 16;
const MAX_DEGREE: u32 = 15;

#[inline]
fn exp_of(key: u64, v: usize) -> u32 {
    ((key >> (4 * v)) & 0xF) as u32
}

#[inline]
fn clear_var(key: u64, v: usize) -> u64 {
    key & !(0xF << (4 * v))
}

fn key_degree(key: u64) -> u32 {
    (0..MAX_VARS).map(|v| exp_of(key, v)).sum()
}

fn key_mask(key: u64) -> u32 {
    (0..MAX_VARS)
        .filter(|&v| exp_of(key, v) > 0)
        .fold(0, |m, v| m | (1 << v))
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        Fp { p }
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    pub fn reduce(self, c: &BigInt) -> u64 {
        c.mod_floor(&BigInt::from(self.p)).to_u64().expect("reduced below p")
    }
}

/// Polynomial with sorted, merged, nonzero terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct ModPoly {
    terms: Vec<(u64, u64)>,
}

impl ModPoly {
    fn normalized(mut raw: Vec<(u64, u64)>, fp: Fp) -> Self {
        raw.sort_unstable_by_key(|t| t.0);
        let mut terms: Vec<(u64, u64)> = Vec::with_capacity(raw.len());
        for (k, c) in raw {
            match terms.last_mut() {
                Some(last) if last.0 == k => last.1 = fp.add(last.1, c),
                _ => terms.push((k, c)),
            }
        }
        terms.retain(|t| t.1 != 0);
        ModPoly { terms }
    }

    pub fn from_form(f: &Form, fp: Fp) -> Result<Self> {
        if f.n_vars() > MAX_VARS {
            return Err(Error::InvalidArgument(format!(
                "finite-field solver supports at most {MAX_VARS} variables, got {}",
                f.n_vars()
            )));
        }
        if f.degree() > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "finite-field solver supports total degree at most {MAX_DEGREE}"
            )));
        }
        let raw = f
            .terms()
            .map(|(e, c)| {
                let key = e
                    .iter()
                    .enumerate()
                    .fold(0u64, |k, (i, &a)| k | ((a as u64) << (4 * i)));
                (key, fp.reduce(c))
            })
            .collect();
        Ok(Self::normalized(raw, fp))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_nonzero_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| key_degree(t.0)).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.iter().map(|t| key_degree(t.0));
        match it.next() {
            Some(d) => it.all(|e| e == d),
            None => true,
        }
    }

    pub fn var_mask(&self) -> u32 {
        self.terms.iter().fold(0, |m, t| m | key_mask(t.0))
    }

    fn monic(self, fp: Fp) -> Self {
        match self.terms.last() {
            Some(&(_, lead)) if lead != 1 => {
                let inv = fp.inv(lead);
                ModPoly {
                    terms: self.terms.into_iter().map(|(k, c)| (k, fp.mul(c, inv))).collect(),
                }
            }
            _ => self,
        }
    }

    /// Substitute `x_v = a`.
    pub fn eval_var(&self, v: usize, a: u64, fp: Fp) -> Self {
        let raw = self
            .terms
            .iter()
            .map(|&(k, c)| {
                let e = exp_of(k, v);
                (clear_var(k, v), fp.mul(c, fp.pow(a, e as u64)))
            })
            .collect();
        Self::normalized(raw, fp)
    }

    fn mul(&self, other: &ModPoly, fp: Fp) -> Self {
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(k1, c1) in &self.terms {
            for &(k2, c2) in &other.terms {
                raw.push((k1 + k2, fp.mul(c1, c2)));
            }
        }
        Self::normalized(raw, fp)
    }

    /// Substitute `x_v = lin` where `lin` does not involve `x_v`.
    pub fn substitute(&self, v: usize, lin: &ModPoly, fp: Fp) -> Self {
        let max_e = self.terms.iter().map(|t| exp_of(t.0, v)).max().unwrap_or(0);
        if max_e == 0 {
            return self.clone();
        }
        let mut powers = vec![ModPoly { terms: vec![(0, 1)] }];
        for i in 1..=max_e as usize {
            let next = powers[i - 1].mul(lin, fp);
            powers.push(next);
        }
        let mut raw = Vec::new();
        for &(k, c) in &self.terms {
            let e = exp_of(k, v) as usize;
            let rest = clear_var(k, v);
            for &(k2, c2) in &powers[e].terms {
                raw.push((rest + k2, fp.mul(c, c2)));
            }
        }
        Self::normalized(raw, fp)
    }

    /// For a degree-one polynomial, solve for its lowest variable.
    fn solve_linear(&self, fp: Fp) -> (usize, ModPoly) {
        let v = self.var_mask().trailing_zeros() as usize;
        let key_v = 1u64 << (4 * v);
        let c = self.terms.iter().find(|t| t.0 == key_v).expect("linear in v").1;
        let neg_inv = fp.neg(fp.inv(c));
        let raw = self
            .terms
            .iter()
            .filter(|t| t.0 != key_v)
            .map(|&(k, a)| (k, fp.mul(a, neg_inv)))
            .collect();
        (v, Self::normalized(raw, fp))
    }
}

/// Exact count of common zeros in `F_p^n` of a polynomial system.
pub(crate) struct ZeroCounter {
    fp: Fp,
    node_limit: u64,
    nodes: AtomicU64,
}

const PARALLEL_DEPTH: u32 = 2;

impl ZeroCounter {
    pub fn new(p: u64, node_limit: u64) -> Self {
        ZeroCounter { fp: Fp::new(p), node_limit, nodes: AtomicU64::new(0) }
    }

    pub fn count(&self, polys: Vec<ModPoly>, n_vars: usize) -> Result<u128> {
        let free: u32 = if n_vars == 32 { u32::MAX } else { (1u32 << n_vars) - 1 };
        let homogeneous = polys.iter().all(|q| q.is_homogeneous() && (q.is_zero() || q.degree() > 0));
        if !homogeneous || n_vars == 0 {
            return self.solve(polys, free, 0);
        }
        // Zeros form a cone: count the origin plus one chart per leading
        // nonzero coordinate, each scaled by the units.
        let charts = par::map_range(n_vars, |i| {
            let sys: Vec<ModPoly> = polys
                .iter()
                .map(|q| {
                    let mut q = q.clone();
                    for j in 0..i {
                        q = q.eval_var(j, 0, self.fp);
                    }
                    q.eval_var(i, 1, self.fp)
                })
                .collect();
            let rest = free & !((1u32 << (i + 1)) - 1);
            self.solve(sys, rest, 1)
        });
        let mut projective: u128 = 0;
        for c in charts {
            projective = checked_add(projective, c?)?;
        }
        checked_add(1, checked_mul(projective, (self.fp.p - 1) as u128)?)
    }

    fn tick(&self) -> Result<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.node_limit {
            return Err(Error::Budget {
                what: "finite-field elimination nodes",
                needed: n as f64,
                limit: self.node_limit as f64,
            });
        }
        Ok(())
    }

    fn solve(&self, polys: Vec<ModPoly>, free: u32, depth: u32) -> Result<u128> {
        self.tick()?;
        let fp = self.fp;
        let mut sys = Vec::with_capacity(polys.len());
        for q in polys {
            if q.is_zero() {
                continue;
            }
            if q.is_nonzero_constant() {
                return Ok(0);
            }
            sys.push(q.monic(fp));
        }
        sys.sort_unstable();
        sys.dedup();
        let involved = sys.iter().fold(0u32, |m, q| m | q.var_mask());
        let idle = (free & !involved).count_ones();
        let factor = checked_pow(fp.p as u128, idle)?;
        let free = free & involved;
        if sys.is_empty() {
            return Ok(factor);
        }

        if let Some(pos) = sys.iter().position(|q| q.degree() == 1) {
            let pivot = sys.swap_remove(pos);
            let (v, lin) = pivot.solve_linear(fp);
            let rest = sys.iter().map(|q| q.substitute(v, &lin, fp)).collect();
            return checked_mul(factor, self.solve(rest, free & !(1 << v), depth)?);
        }

        if let Some(q) = sys.iter().find(|q| q.var_mask().count_ones() == 1) {
            let v = q.var_mask().trailing_zeros() as usize;
            let roots: Vec<u64> = (0..fp.p).filter(|&a| q.eval_var(v, a, fp).is_zero()).collect();
            let sub = self.branch(&sys, v, &roots, free, depth)?;
            return checked_mul(factor, sub);
        }

        let mut best = (0usize, 0usize);
        for v in 0..MAX_VARS {
            if free & (1 << v) == 0 {
                continue;
            }
            let occ = sys.iter().filter(|q| q.var_mask() & (1 << v) != 0).count();
            if occ > best.1 {
                best = (v, occ);
            }
        }
        let values: Vec<u64> = (0..fp.p).collect();
        let sub = self.branch(&sys, best.0, &values, free, depth)?;
        checked_mul(factor, sub)
    }

    fn branch(&self, sys: &[ModPoly], v: usize, values: &[u64], free: u32, depth: u32) -> Result<u128> {
        let run = |a: &u64| {
            let next = sys.iter().map(|q| q.eval_var(v, *a, self.fp)).collect();
            self.solve(next, free & !(1 << v), depth + 1)
        };
        let parts: Vec<Result<u128>> = if depth < PARALLEL_DEPTH {
            par::map_collect(values, run)
        } else {
            values.iter().map(run).collect()
        };
        let mut total = 0u128;
        for part in parts {
            total = checked_add(total, part?)?;
        }
        Ok(total)
    }
}

fn overflow() -> Error {
    Error::Budget { what: "zero count exceeds u128", needed: f64::INFINITY, limit: u128::MAX as f64 }
}

fn checked_add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or_else(overflow)
}

fn checked_mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or_else(overflow)
}

fn checked_pow(a: u128, e: u32) -> Result<u128> {
    a.checked_pow(e).ok_or_else(overflow)
}
