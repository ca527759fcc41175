//! Birch rank `codim V_F*` and the structural dichotomy.
//!
//! `V_F* = {z : ∇F(z) = 0}`. For quadratics the codimension is the rank of
//! the Hessian; otherwise it is estimated from point counts over several
//! finite fields, using `#V*(F_p) ≈ p^{dim}`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::is_prime;
use crate::error::{budget, Error, Result};
use crate::forms::{Form, ModEvaluator, VariablePartition};
use crate::modpoly::{Fp, ModPoly, ZeroCounter};
use crate::par;

/// Largest `p^n` accepted by the enumeration counter.
pub const BRUTE_FORCE_LIMIT: f64 = 1e9;
/// Default node budget for the elimination counter.
pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;
/// Slopes further than this from an integer are reported as unreliable.
pub const CONFIDENCE_RESIDUAL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RankMethod {
    HessianExact,
    FpSlope,
    ZeroForm,
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankMethod::HessianExact => "hessian-exact",
            RankMethod::FpSlope => "fp-slope",
            RankMethod::ZeroForm => "zero-form",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankEstimate {
    pub codim: usize,
    pub n_vars: usize,
    pub method: RankMethod,
    pub primes_used: Vec<u64>,
    pub counts: Vec<u128>,
    /// Fitted `dim` of the locus in the reduced variables.
    pub slope: f64,
    pub residual: f64,
    pub confident: bool,
}

impl RankEstimate {
    fn exact(codim: usize, n_vars: usize, method: RankMethod) -> Self {
        RankEstimate {
            codim,
            n_vars,
            method,
            primes_used: Vec::new(),
            counts: Vec::new(),
            slope: (n_vars - codim) as f64,
            residual: 0.0,
            confident: true,
        }
    }
}

/// Rank of an integer matrix over the rationals (fraction-free elimination).
pub fn rational_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..n_cols {
        let Some(piv) = (rank..n_rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..n_rows {
            for c in col + 1..n_cols {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    rank
}

/// Symmetric matrix of second derivatives of a quadratic form.
pub fn hessian_matrix(f: &Form) -> Vec<Vec<BigInt>> {
    let n = f.n_vars();
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for (e, c) in f.terms() {
        let vars: Vec<usize> = (0..n).filter(|&i| e[i] > 0).collect();
        match vars.as_slice() {
            [i] => m[*i][*i] += c * 2,
            [i, j] => {
                m[*i][*j] += c;
                m[*j][*i] += c;
            }
            _ => {}
        }
    }
    m
}

/// Exact codimension of `V_F*` for a homogeneous quadratic.
pub fn hessian_codim(f: &Form) -> Result<RankEstimate> {
    let n = f.n_vars();
    if f.is_zero() {
        return Ok(RankEstimate::exact(0, n, RankMethod::ZeroForm));
    }
    if f.degree() != 2 {
        return Err(Error::DegreeMismatch { expected: 2, found: f.degree() });
    }
    if !f.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    let rank = rational_rank(&hessian_matrix(f));
    Ok(RankEstimate::exact(rank, n, RankMethod::HessianExact))
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if p >= 1 << 31 {
        return Err(Error::InvalidArgument(format!("prime {p} too large")));
    }
    Ok(())
}

/// `#{x ∈ F_p^n : f_i(x) = 0 for all i}` for forms in a common set of variables.
pub fn fp_common_zeros(polys: &[Form], n_vars: usize, p: u64, node_limit: u64) -> Result<u128> {
    check_prime(p)?;
    for f in polys {
        if f.n_vars() != n_vars {
            return Err(Error::LengthMismatch { expected: n_vars, got: f.n_vars() });
        }
    }
    let fp = Fp::new(p);
    let mp = polys.iter().map(|f| ModPoly::from_form(f, fp)).collect::<Result<Vec<_>>>()?;
    ZeroCounter::new(p, node_limit).count(mp, n_vars)
}

/// `#{x ∈ F_p^n : ∇F(x) ≡ 0 mod p}`.
pub fn fp_singular_count(f: &Form, p: u64) -> Result<u128> {
    fp_common_zeros(&f.gradient(), f.n_vars(), p, DEFAULT_NODE_LIMIT)
}

/// The same count by direct enumeration of `F_p^n`.
pub fn fp_singular_count_brute(f: &Form, p: u64) -> Result<u128> {
    check_prime(p)?;
    let n = f.n_vars();
    budget("p^n enumeration", (p as f64).powi(n as i32), BRUTE_FORCE_LIMIT)?;
    if n == 0 {
        return Ok(1);
    }
    let grad: Vec<ModEvaluator> = f.gradient().iter().map(|g| ModEvaluator::new(g, p)).collect();
    let counts = par::map_range(p as usize, |first| {
        let mut x = vec![0u64; n];
        x[0] = first as u64;
        let mut count = 0u128;
        loop {
            if grad.iter().all(|g| g.eval(&x) == 0) {
                count += 1;
            }
            let mut i = 1;
            loop {
                if i == n {
                    return count;
                }
                x[i] += 1;
                if x[i] < p {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    });
    Ok(counts.into_iter().sum())
}

/// Least-squares slope of `log count` against `log p` (with intercept).
fn fit_slope(primes: &[u64], counts: &[u128]) -> f64 {
    let xs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn slope_estimate(n_vars: usize, primes: &[u64], counts: Vec<u128>) -> RankEstimate {
    let mut confident = true;
    let (slope, dim) = if counts.iter().all(|&c| c == 0) {
        (f64::NEG_INFINITY, 0usize)
    } else {
        if counts.contains(&0) {
            confident = false;
        }
        let s = fit_slope(primes, &counts);
        (s, s.round().clamp(0.0, n_vars as f64) as usize)
    };
    let residual = if slope.is_finite() { (slope - slope.round()).abs() } else { 0.0 };
    let codim = if slope.is_finite() { n_vars - dim } else { n_vars };
    RankEstimate {
        codim,
        n_vars,
        method: RankMethod::FpSlope,
        primes_used: primes.to_vec(),
        counts,
        slope,
        residual,
        confident: confident && residual < CONFIDENCE_RESIDUAL,
    }
}

fn check_primes(primes: &[u64]) -> Result<()> {
    if primes.len() < 3 {
        return Err(Error::InvalidArgument("slope estimation needs at least three primes".into()));
    }
    let distinct: BTreeSet<u64> = primes.iter().copied().collect();
    if distinct.len() != primes.len() {
        return Err(Error::InvalidArgument("primes must be distinct".into()));
    }
    primes.iter().try_for_each(|&p| check_prime(p))
}

/// Drop variables the form does not involve. The codimension of `V_F*`
/// does not depend on the ambient space.
fn reduce(f: &Form) -> Form {
    let used: Vec<usize> = f.used_vars().into_iter().collect();
    f.project(&used).expect("projection onto used variables")
}

/// Estimate `codim V_F*` from point counts over the given primes.
pub fn estimate_codim(f: &Form, primes: &[u64]) -> Result<RankEstimate> {
    estimate_codim_with(f, primes, DEFAULT_NODE_LIMIT)
}

pub fn estimate_codim_with(f: &Form, primes: &[u64], node_limit: u64) -> Result<RankEstimate> {
    check_primes(primes)?;
    let n = f.n_vars();
    if f.is_zero() {
        return Ok(RankEstimate::exact(0, n, RankMethod::ZeroForm));
    }
    let r = reduce(f);
    let grad = r.gradient();
    let counts = primes
        .iter()
        .map(|&p| fp_common_zeros(&grad, r.n_vars(), p, node_limit))
        .collect::<Result<Vec<_>>>()?;
    let mut est = slope_estimate(r.n_vars(), primes, counts);
    est.n_vars = n;
    Ok(est)
}

/// Estimated codimension of the common zero locus of `polys` in `F^n`.
pub fn estimate_locus_codim(polys: &[Form], n_vars: usize, primes: &[u64]) -> Result<RankEstimate> {
    check_primes(primes)?;
    let counts = primes
        .iter()
        .map(|&p| fp_common_zeros(polys, n_vars, p, DEFAULT_NODE_LIMIT))
        .collect::<Result<Vec<_>>>()?;
    Ok(slope_estimate(n_vars, primes, counts))
}

/// Codimension oracle used by the structural routines: exact for
/// quadratics, point-count slopes otherwise.
#[derive(Clone, Debug)]
pub struct CodimEstimator {
    pub primes: Vec<u64>,
    pub node_limit: u64,
}

impl Default for CodimEstimator {
    fn default() -> Self {
        CodimEstimator { primes: vec![101, 211, 401], node_limit: DEFAULT_NODE_LIMIT }
    }
}

impl CodimEstimator {
    pub fn new(primes: Vec<u64>) -> Self {
        CodimEstimator { primes, node_limit: DEFAULT_NODE_LIMIT }
    }

    pub fn estimate(&self, f: &Form) -> Result<RankEstimate> {
        if f.is_zero() {
            return Ok(RankEstimate::exact(0, f.n_vars(), RankMethod::ZeroForm));
        }
        if f.degree() == 2 && f.is_homogeneous() {
            return hessian_codim(f);
        }
        estimate_codim_with(f, &self.primes, self.node_limit)
    }
}

/// Least integer strictly greater than `8 d (d-1) 2^d / theta0`.
pub fn c0_threshold(d: u32, theta0: &BigRational) -> Result<BigInt> {
    if !theta0.is_positive() || *theta0 >= BigRational::one() {
        return Err(Error::InvalidArgument(format!("theta0 = {theta0} must lie in (0, 1)")));
    }
    let d_big = BigInt::from(d);
    let numer = BigInt::from(8) * &d_big * (&d_big - 1) * (BigInt::one() << d as usize);
    let bound = BigRational::from_integer(numer) / theta0;
    Ok(bound.floor().to_integer() + 1)
}

/// `2^8 3^4 5^2 d^3 (2d-1)^2 4^d`.
pub fn codim_threshold(d: u32) -> Result<BigInt> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("degree {d} < 2")));
    }
    let d_big = BigInt::from(d);
    let two_d_1 = BigInt::from(2 * d - 1);
    Ok(BigInt::from(256 * 81 * 25) * d_big.pow(3) * two_d_1.pow(2) * (BigInt::one() << (2 * d as usize)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionReport {
    pub s: usize,
    pub codim_full: usize,
    pub codim_restricted: usize,
    /// `codim F - 2s <= codim 𝔉`
    pub lower_ok: bool,
    /// `codim 𝔉 <= codim F`
    pub upper_ok: bool,
    pub confident: bool,
}

/// Compare `codim V_F*` with the codimension after zeroing the first `s` variables.
pub fn check_restriction_bounds(f: &Form, s: usize, est: &CodimEstimator) -> Result<RestrictionReport> {
    let n = f.n_vars();
    if s > n {
        return Err(Error::IndexOutOfRange { index: s, n_vars: n });
    }
    let zeroed: Vec<usize> = (0..s).collect();
    let kept: Vec<usize> = (s..n).collect();
    let restricted = f.restrict_zero(&zeroed)?.project(&kept)?;
    let full = est.estimate(f)?;
    let part = est.estimate(&restricted)?;
    Ok(RestrictionReport {
        s,
        codim_full: full.codim,
        codim_restricted: part.codim,
        lower_ok: full.codim as i64 - 2 * s as i64 <= part.codim as i64,
        upper_ok: part.codim <= full.codim,
        confident: full.confident && part.confident,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubadditivityReport {
    pub codim_f: usize,
    pub codim_u: usize,
    pub codim_cross: usize,
    pub codim_v: usize,
    pub holds: bool,
    pub confident: bool,
}

/// Check `codim V_F* <= codim V_{F_u}* + codim V_𝔊* + codim V_{F_v}*`.
pub fn check_subadditivity(f: &Form, u: &[usize], v: &[usize], est: &CodimEstimator) -> Result<SubadditivityReport> {
    VariablePartition::new(f.n_vars(), vec![u.to_vec(), v.to_vec()])?;
    let parts = [f.clone(), f.restrict_to(u)?, f.cross_part(u, v)?, f.restrict_to(v)?];
    let e = parts.iter().map(|g| est.estimate(g)).collect::<Result<Vec<_>>>()?;
    Ok(SubadditivityReport {
        codim_f: e[0].codim,
        codim_u: e[1].codim,
        codim_cross: e[2].codim,
        codim_v: e[3].codim,
        holds: e[0].codim <= e[1].codim + e[2].codim + e[3].codim,
        confident: e.iter().all(|r| r.confident),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionPolicy {
    /// Every split `x = (z, w)`, `z = (u, v)` up to swapping `u` and `v`.
    Exhaustive,
    /// A seeded random sample of splits.
    Randomized { samples: usize, seed: u64 },
}

pub const EXHAUSTIVE_MAX_VARS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DichotomyCase {
    I,
    II,
}

impl fmt::Display for DichotomyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DichotomyCase::I => "I",
            DichotomyCase::II => "II",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyWitness {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub w: Vec<usize>,
    pub codim_cross: usize,
}

impl DichotomyWitness {
    /// The split `x = (z, w)`.
    pub fn zw(&self, n_vars: usize) -> VariablePartition {
        let mut z: Vec<usize> = self.u.iter().chain(&self.v).copied().collect();
        z.sort_unstable();
        VariablePartition::new(n_vars, vec![z, self.w.clone()]).expect("valid split")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyVerdict {
    pub case: DichotomyCase,
    pub witness: Option<DichotomyWitness>,
    pub c0: u64,
    pub partitions_scanned: usize,
    pub policy: PartitionPolicy,
}

/// Canonical split: labels 0 = w, 1 = u, 2 = v; the first variable of `z` lies in `u`.
fn canonical(labels: &mut [u8]) {
    if let Some(first) = labels.iter().position(|&l| l != 0) {
        if labels[first] == 2 {
            for l in labels.iter_mut() {
                *l = match *l {
                    1 => 2,
                    2 => 1,
                    x => x,
                };
            }
        }
    }
}

fn blocks_of(labels: &[u8]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let pick = |t: u8| labels.iter().enumerate().filter(|(_, &l)| l == t).map(|(i, _)| i).collect();
    (pick(1), pick(2), pick(0))
}

/// Search for a split whose cross form `𝔊` has `codim V_𝔊* > c0`.
pub fn dichotomy_classify(
    f: &Form,
    c0: u64,
    policy: &PartitionPolicy,
    est: &CodimEstimator,
) -> Result<DichotomyVerdict> {
    let n = f.n_vars();
    let splits: Vec<Vec<u8>> = match policy {
        PartitionPolicy::Exhaustive => {
            if n > EXHAUSTIVE_MAX_VARS {
                return Err(Error::InvalidArgument(format!(
                    "exhaustive scan supports at most {EXHAUSTIVE_MAX_VARS} variables"
                )));
            }
            let mut out = Vec::new();
            for code in 0..3usize.pow(n as u32) {
                let mut labels: Vec<u8> = (0..n).map(|i| ((code / 3usize.pow(i as u32)) % 3) as u8).collect();
                let before = labels.clone();
                canonical(&mut labels);
                if labels == before {
                    out.push(labels);
                }
            }
            out
        }
        PartitionPolicy::Randomized { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for _ in 0..*samples {
                let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..3u8)).collect();
                canonical(&mut labels);
                if seen.insert(labels.clone()) {
                    out.push(labels);
                }
            }
            out
        }
    };

    let mut cache: HashMap<Form, usize> = HashMap::new();
    for labels in &splits {
        let (u, v, w) = blocks_of(labels);
        if u.is_empty() || v.is_empty() {
            continue;
        }
        let cross = reduce(&f.cross_part(&u, &v)?);
        if cross.n_vars() as u64 <= c0 {
            continue;
        }
        let codim = match cache.get(&cross) {
            Some(&c) => c,
            None => {
                let c = est.estimate(&cross)?.codim;
                cache.insert(cross, c);
                c
            }
        };
        if codim as u64 > c0 {
            return Ok(DichotomyVerdict {
                case: DichotomyCase::I,
                witness: Some(DichotomyWitness { u, v, w, codim_cross: codim }),
                c0,
                partitions_scanned: splits.len(),
                policy: policy.clone(),
            });
        }
    }
    Ok(DichotomyVerdict {
        case: DichotomyCase::II,
        witness: None,
        c0,
        partitions_scanned: splits.len(),
        policy: policy.clone(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationResult {
    pub block: usize,
    pub codim_f: usize,
    pub block_codims: Vec<usize>,
    /// `(codim F - (k-1) c0) / k`
    pub bound: BigRational,
    pub satisfied: bool,
}

/// Find a block `j` with `codim V_{F_j}* >= (codim V_F* - (k-1) c0) / k`.
pub fn rank_concentration(
    f: &Form,
    partition: &VariablePartition,
    c0: u64,
    est: &CodimEstimator,
) -> Result<ConcentrationResult> {
    if partition.n_vars() != f.n_vars() {
        return Err(Error::LengthMismatch { expected: f.n_vars(), got: partition.n_vars() });
    }
    let k = partition.len();
    if k == 0 {
        return Err(Error::InvalidArgument("partition has no blocks".into()));
    }
    let codim_f = est.estimate(f)?.codim;
    let block_codims = partition
        .blocks()
        .iter()
        .map(|b| Ok(est.estimate(&f.restrict_to(b)?)?.codim))
        .collect::<Result<Vec<_>>>()?;
    let rhs = BigInt::from(codim_f) - BigInt::from(k as u64 - 1) * BigInt::from(c0);
    let bound = BigRational::new(rhs.clone(), BigInt::from(k));
    let ok = |c: usize| BigInt::from(c) * BigInt::from(k) >= rhs;
    let (block, satisfied) = match block_codims.iter().position(|&c| ok(c)) {
        Some(j) => (j, true),
        None => {
            let j = (0..k).max_by_key(|&j| (block_codims[j], std::cmp::Reverse(j))).expect("k > 0");
            (j, false)
        }
    };
    Ok(ConcentrationResult { block, codim_f, block_codims, bound, satisfied })
}

/// Estimated codimensions of the loci where the `u`-gradient, resp. the
/// `v`-gradient, of `𝔉(u_1 v_1, …, u_m v_m)` vanishes.
pub fn bihomogeneous_loci(f: &Form, primes: &[u64]) -> Result<(RankEstimate, RankEstimate)> {
    let m = f.n_vars();
    let g = f.substitute_diagonal();
    let du: Vec<Form> = (0..m).map(|i| g.partial(i)).collect();
    let dv: Vec<Form> = (m..2 * m).map(|i| g.partial(i)).collect();
    Ok((
        estimate_locus_codim(&du, 2 * m, primes)?,
        estimate_locus_codim(&dv, 2 * m, primes)?,
    ))
}

/// Smallest integer `>= a / b` for `b > 0`.
pub fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}
