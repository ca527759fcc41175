use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::direct::{product_fold, ComplexKahan, ENUMERATION_LIMIT};
use super::window::{Alpha, PhaseMap};
use crate::arith::DirichletCharacter;
use crate::error::{budget, Error, Result};
use crate::forms::{Form, ModEvaluator};

/// Parameters of `Σ_{h ∈ (Z/q)^{*n}} χ_1(h_1)⋯χ_n(h_n) e(a F(h) / q)`.
#[derive(Clone, Debug)]
pub struct CompleteSumSpec {
    q: u64,
    a: u64,
    chars: Option<Vec<DirichletCharacter>>,
}

impl CompleteSumSpec {
    pub fn new(q: u64, a: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        if (a.rem_euclid(q as i64) as u64).gcd(&q) != 1 {
            return Err(Error::NotCoprime { a, q });
        }
        Ok(CompleteSumSpec { q, a: a.rem_euclid(q as i64) as u64, chars: None })
    }

    pub fn with_characters(mut self, chars: Vec<DirichletCharacter>) -> Result<Self> {
        if let Some(c) = chars.iter().find(|c| c.modulus() != self.q) {
            return Err(Error::InvalidArgument(format!(
                "character of modulus {} in a complete sum modulo {}",
                c.modulus(),
                self.q
            )));
        }
        self.chars = Some(chars);
        Ok(self)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn characters(&self) -> Option<&[DirichletCharacter]> {
        self.chars.as_deref()
    }
}

fn units(q: u64) -> Vec<u64> {
    if q == 1 {
        return vec![0];
    }
    (1..q).filter(|x| x.gcd(&q) == 1).collect()
}

/// Histogram over `(F_b(h) mod q, character phase index mod l)` for one block.
fn block_histogram(
    fb: &Form,
    block: &[usize],
    q: u64,
    l: u64,
    chars: Option<&[DirichletCharacter]>,
) -> Vec<u64> {
    let eval = ModEvaluator::new(fb, q);
    let us = units(q);
    let n = fb.n_vars();
    let lists: Vec<Vec<u64>> = block.iter().map(|_| us.clone()).collect();
    let char_idx: Vec<Vec<u64>> = match chars {
        Some(cs) => block
            .iter()
            .map(|&j| {
                let c = &cs[j];
                let scale = l / c.denominator() as u64;
                let vals = c.values();
                (0..q).map(|x| vals[x as usize].map(|k| k as u64 * scale).unwrap_or(0)).collect()
            })
            .collect(),
        None => vec![],
    };
    let shards = product_fold(&lists, vec![0u64; (q * l) as usize], |acc, tuple| {
        let mut x = vec![0u64; n];
        let mut k = 0u64;
        for (i, &j) in block.iter().enumerate() {
            x[j] = tuple[i];
            if !char_idx.is_empty() {
                k += char_idx[i][tuple[i] as usize];
            }
        }
        let r = eval.eval(&x);
        acc[(r * l + k % l) as usize] += 1;
    });
    let mut out = vec![0u64; (q * l) as usize];
    for s in shards {
        for (o, v) in out.iter_mut().zip(s) {
            *o += v;
        }
    }
    out
}

fn enumeration_size(q: u64, n_vars: usize) -> f64 {
    (units(q).len() as f64).powi(n_vars as i32)
}

/// `𝒜(q, a; χ)`, exact up to the final root-of-unity lookups.
pub fn complete_sum(f: &Form, spec: &CompleteSumSpec) -> Result<Complex64> {
    let n = f.n_vars();
    if let Some(cs) = &spec.chars {
        if cs.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: cs.len() });
        }
    }
    let q = spec.q;
    let blocks = f.additive_blocks();
    let largest = blocks.iter().map(|b| b.len()).max().unwrap_or(0);
    budget("complete sum tuples", enumeration_size(q, largest), ENUMERATION_LIMIT)?;
    let l = spec
        .chars
        .as_ref()
        .map(|cs| cs.iter().fold(1u64, |acc, c| acc.lcm(&(c.denominator() as u64))))
        .unwrap_or(1);
    let (parts, constant) = f.split_by_blocks(&blocks);
    let ql = q.checked_mul(l).ok_or_else(|| Error::InvalidArgument("modulus too large".into()))?;
    let roots = PhaseMap::new(Alpha::Rational { num: 1, den: ql });
    let c_res = constant.mod_floor(&q.into()).to_u64().expect("reduced");
    let mut total = roots.root((spec.a as u128 * c_res as u128 % q as u128) as u64 * l);
    // unused variables contribute a factor φ(q) each, or a character sum over units
    let used: Vec<bool> = {
        let mut u = vec![false; n];
        for b in &blocks {
            for &j in b {
                u[j] = true;
            }
        }
        u
    };
    for j in (0..n).filter(|&j| !used[j]) {
        let factor = match &spec.chars {
            Some(cs) if !cs[j].is_principal() => 0.0,
            _ => units(q).len() as f64,
        };
        total *= factor;
    }
    for (b, fb) in blocks.iter().zip(&parts) {
        let hist = block_histogram(fb, b, q, l, spec.chars.as_deref());
        let mut acc = ComplexKahan::default();
        for (idx, &count) in hist.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let (r, k) = (idx as u64 / l, idx as u64 % l);
            let e = ((spec.a as u128 * r as u128 % q as u128) as u64 * l + k * q) % ql;
            acc.add(roots.root(e) * count as f64);
        }
        total *= acc.value();
    }
    Ok(total)
}

/// Number of unit tuples `h ∈ (Z/q)^{*n}` with `F(h) ≡ r (mod q)`, for each `r`.
pub fn unit_value_histogram(f: &Form, q: u64) -> Result<Vec<u128>> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let n = f.n_vars();
    let blocks = f.additive_blocks();
    let largest = blocks.iter().map(|b| b.len()).max().unwrap_or(0);
    budget("unit histogram tuples", enumeration_size(q, largest), ENUMERATION_LIMIT)?;
    budget("histogram convolution", (q as f64).powi(2) * blocks.len() as f64, ENUMERATION_LIMIT)?;
    let (parts, constant) = f.split_by_blocks(&blocks);
    let c_res = constant.mod_floor(&q.into()).to_u64().expect("reduced");
    let mut hist = vec![0u128; q as usize];
    let used: usize = blocks.iter().map(|b| b.len()).sum();
    let free = (units(q).len() as u128)
        .checked_pow((n - used) as u32)
        .ok_or(Error::Budget { what: "unit histogram counts", needed: f64::INFINITY, limit: u128::MAX as f64 })?;
    hist[c_res as usize] = free;
    for (b, fb) in blocks.iter().zip(&parts) {
        let h = block_histogram(fb, b, q, 1, None);
        let mut next = vec![0u128; q as usize];
        for (r1, &c1) in hist.iter().enumerate() {
            if c1 == 0 {
                continue;
            }
            for (r2, &c2) in h.iter().enumerate() {
                if c2 != 0 {
                    next[(r1 + r2) % q as usize] += c1 * c2 as u128;
                }
            }
        }
        hist = next;
    }
    Ok(hist)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub q: u64,
    pub abs: f64,
    /// `log|𝒜| / log q`; `-inf` when the sum vanishes.
    pub fit: f64,
    /// `n - codim / (2 (2d-1) 4^d) + 0.1`
    pub threshold: f64,
    pub flagged: bool,
}

/// `|𝒜(q, 1)|` against the power saving predicted from the singular locus codimension.
pub fn complete_sum_bound_report(f: &Form, qs: &[u64], codim: usize) -> Result<Vec<BoundRow>> {
    let d = f.degree() as i32;
    let n = f.n_vars() as f64;
    let threshold = n - codim as f64 / (2.0 * (2 * d - 1) as f64 * 4f64.powi(d)) + 0.1;
    let mut rows = Vec::with_capacity(qs.len());
    for &q in qs {
        let spec = CompleteSumSpec::new(q, 1)?;
        let abs = complete_sum(f, &spec)?.norm();
        let fit = if q <= 1 {
            0.0
        } else if abs < 1e-9 {
            f64::NEG_INFINITY
        } else {
            abs.ln() / (q as f64).ln()
        };
        rows.push(BoundRow { q, abs, fit, threshold, flagged: q > 1 && fit > threshold });
    }
    Ok(rows)
}
