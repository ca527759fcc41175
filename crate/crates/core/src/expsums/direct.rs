use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;

use super::window::{Alpha, ArithWeight, PhaseMap, WindowedBox};
use crate::arith::SieveTables;
use crate::error::{budget, Error, Result};
use crate::forms::{CompiledForm, Form};
use crate::par::{self, KahanSum};

/// Largest number of tuples enumerated by a single sum.
pub const ENUMERATION_LIMIT: f64 = 1e9;

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ComplexKahan {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahan {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Exact value of `F` at a nonnegative integer point.
pub(crate) enum ExactValue {
    Small(i128),
    Big(BigInt),
}

pub(crate) fn exact_value(c: &CompiledForm, f: &Form, x: &[i64]) -> ExactValue {
    match c.eval_i128(x) {
        Some(v) => ExactValue::Small(v),
        None => ExactValue::Big(f.evaluate_i64(x).expect("length checked")),
    }
}

pub(crate) fn phase(map: &PhaseMap, v: &ExactValue) -> Complex64 {
    match v {
        ExactValue::Small(s) => map.eval(*s),
        ExactValue::Big(b) => map.eval_big(b),
    }
}

/// Visit every tuple of the product of `lists`, sharded by the first list.
/// Each shard folds into its own accumulator; shards are returned in order.
pub(crate) fn product_fold<T, A, F>(lists: &[Vec<T>], init: A, visit: F) -> Vec<A>
where
    T: Copy + Sync + Default,
    A: Clone + Send + Sync,
    F: Fn(&mut A, &[T]) + Sync + Send,
{
    let n = lists.len();
    if n == 0 || lists.iter().any(|l| l.is_empty()) {
        return vec![];
    }
    par::map_range(lists[0].len(), |i0| {
        let mut acc = init.clone();
        let mut idx = vec![0usize; n];
        let mut tuple: Vec<T> = lists.iter().map(|l| l[0]).collect();
        tuple[0] = lists[0][i0];
        loop {
            visit(&mut acc, &tuple);
            let mut k = 1;
            loop {
                if k == n {
                    return acc;
                }
                idx[k] += 1;
                if idx[k] < lists[k].len() {
                    tuple[k] = lists[k][idx[k]];
                    break;
                }
                idx[k] = 0;
                tuple[k] = lists[k][0];
                k += 1;
            }
        }
    })
}

fn check_form(f: &Form, b: &WindowedBox, tables: &SieveTables) -> Result<()> {
    if f.n_vars() != b.n_vars() {
        return Err(Error::LengthMismatch { expected: b.n_vars(), got: f.n_vars() });
    }
    b.check_tables(tables)
}

fn support_lists(b: &WindowedBox, tables: &SieveTables, w: ArithWeight) -> Result<Vec<Vec<(u64, f64)>>> {
    let lists: Vec<Vec<(u64, f64)>> = (0..b.n_vars()).map(|j| b.weighted_support(j, |x| w.value(tables, x))).collect();
    let size: f64 = lists.iter().map(|l| l.len() as f64).product();
    budget("exponential sum tuples", size, ENUMERATION_LIMIT)?;
    Ok(lists)
}

/// `S(α) = Σ ϖ(x) Λ(x) e(α F(x))`.
pub fn s_alpha(f: &Form, b: &WindowedBox, tables: &SieveTables, alpha: Alpha) -> Result<Complex64> {
    s_alpha_weighted(f, b, tables, alpha, ArithWeight::VonMangoldt)
}

/// `S(α)` with a chosen arithmetic weight on each coordinate.
pub fn s_alpha_weighted(
    f: &Form,
    b: &WindowedBox,
    tables: &SieveTables,
    alpha: Alpha,
    weight: ArithWeight,
) -> Result<Complex64> {
    check_form(f, b, tables)?;
    let lists = support_lists(b, tables, weight)?;
    let map = PhaseMap::new(alpha);
    let compiled = f.compile();
    let n = f.n_vars();
    let shards = product_fold(&lists, ComplexKahan::default(), |acc, tuple| {
        let mut x = [0i64; 16];
        let mut xs = Vec::new();
        let point: &[i64] = if n <= 16 {
            for (k, &(v, _)) in tuple.iter().enumerate() {
                x[k] = v as i64;
            }
            &x[..n]
        } else {
            xs.extend(tuple.iter().map(|&(v, _)| v as i64));
            &xs
        };
        let w: f64 = tuple.iter().map(|&(_, w)| w).product();
        acc.add(phase(&map, &exact_value(&compiled, f, point)) * w);
    });
    let mut total = ComplexKahan::default();
    for s in shards {
        total.add(s.value());
    }
    Ok(total.value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactMean {
    pub value: f64,
    pub imag_residual: f64,
    /// `max |F|` over the weighted support.
    pub bound: u128,
    /// Number of sample points `M = 2B + 1`.
    pub samples: u128,
}

/// `(1/M) Σ_{j<M} S(j/M)` with `M = 2 max|F| + 1`, which equals the
/// weighted count of zeros of `F` in the window.
pub fn exact_mean(f: &Form, b: &WindowedBox, tables: &SieveTables) -> Result<ExactMean> {
    check_form(f, b, tables)?;
    let lists = support_lists(b, tables, ArithWeight::VonMangoldt)?;
    let compiled = f.compile();
    let shards = product_fold(&lists, (BTreeMap::<i128, KahanSum>::new(), false), |acc, tuple| {
        let x: Vec<i64> = tuple.iter().map(|&(v, _)| v as i64).collect();
        let w: f64 = tuple.iter().map(|&(_, w)| w).product();
        match compiled.eval_i128(&x) {
            Some(v) => acc.0.entry(v).or_default().add(w),
            None => acc.1 = true,
        }
    });
    let mut hist: BTreeMap<i128, KahanSum> = BTreeMap::new();
    for (h, overflow) in shards {
        if overflow {
            return Err(Error::Budget { what: "form values for mean extraction", needed: f64::INFINITY, limit: i128::MAX as f64 });
        }
        for (v, w) in h {
            hist.entry(v).or_default().add(w.value());
        }
    }
    let values: Vec<(i128, f64)> = hist.into_iter().map(|(v, w)| (v, w.value())).collect();
    let bound = values.iter().map(|v| v.0.unsigned_abs()).max().unwrap_or(0);
    let m = 2 * bound + 1;
    budget("mean extraction evaluations", m as f64 * values.len() as f64, 4.0 * ENUMERATION_LIMIT)?;
    let m64 = u64::try_from(m).map_err(|_| Error::Budget { what: "mean sample count", needed: m as f64, limit: u64::MAX as f64 })?;
    let roots = PhaseMap::new(Alpha::Rational { num: 1, den: m64 });
    let residues: Vec<(u128, f64)> = values.iter().map(|&(v, w)| (v.rem_euclid(m as i128) as u128, w)).collect();
    let samples = par::map_range(m64 as usize, |j| {
        let mut acc = ComplexKahan::default();
        for &(r, w) in &residues {
            acc.add(roots.root((r * j as u128 % m) as u64) * w);
        }
        acc.value()
    });
    let mut total = ComplexKahan::default();
    for s in samples {
        total.add(s);
    }
    let mean = total.value() / m as f64;
    Ok(ExactMean { value: mean.re, imag_residual: mean.im.abs(), bound, samples: m })
}

/// Weighted zero count `Σ_{F(x)=0} ϖ(x) a(x)` by direct enumeration.
pub fn windowed_zero_mass(f: &Form, b: &WindowedBox, tables: &SieveTables, weight: ArithWeight) -> Result<f64> {
    check_form(f, b, tables)?;
    let lists = support_lists(b, tables, weight)?;
    let shards = product_fold(&lists, KahanSum::new(), |acc, tuple| {
        let x: Vec<i64> = tuple.iter().map(|&(v, _)| v as i64).collect();
        if f.evaluate_i64(&x).map(|v| v == BigInt::from(0)).unwrap_or(false) {
            acc.add(tuple.iter().map(|&(_, w)| w).product());
        }
    });
    let mut total = KahanSum::new();
    for s in shards {
        total.add(s.value());
    }
    Ok(total.value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchySchwarzCheck {
    /// `|S(α)|^4`
    pub lhs: f64,
    /// `(Σ a(u)^2)^2 (Σ b(v)^2)^2 D`
    pub rhs: f64,
    /// `D = Σ_{v,v'} |Σ_u e(α (F(u,v) - F(u,v')))|^2`
    pub differenced: f64,
    pub holds: bool,
}

/// Two applications of Cauchy–Schwarz to `S(α)`, over the `u` variables
/// and then over the pairs `(v, v')`.
pub fn cauchy_schwarz_check(
    f: &Form,
    b: &WindowedBox,
    tables: &SieveTables,
    alpha: Alpha,
    u_vars: &[usize],
) -> Result<CauchySchwarzCheck> {
    check_form(f, b, tables)?;
    let n = f.n_vars();
    if u_vars.is_empty() || u_vars.len() >= n || u_vars.iter().any(|&i| i >= n) {
        return Err(Error::InvalidArgument("u must be a nonempty proper subset of the variables".into()));
    }
    let v_vars: Vec<usize> = (0..n).filter(|i| !u_vars.contains(i)).collect();
    let lists = support_lists(b, tables, ArithWeight::VonMangoldt)?;
    let tuples = |vars: &[usize]| -> Vec<Vec<(u64, f64)>> {
        let mut out: Vec<Vec<(u64, f64)>> = vec![vec![]];
        for &j in vars {
            out = out
                .into_iter()
                .flat_map(|t| {
                    lists[j].iter().map(move |&e| {
                        let mut t2 = t.clone();
                        t2.push(e);
                        t2
                    })
                })
                .collect();
        }
        out
    };
    let us = tuples(u_vars);
    let vs = tuples(&v_vars);
    budget("differenced sum", (us.len() * vs.len() * vs.len()) as f64, ENUMERATION_LIMIT)?;
    let map = PhaseMap::new(alpha);
    let compiled = f.compile();
    // E[v][u] = e(α F(u, v))
    let table: Vec<Vec<Complex64>> = par::map_collect(&vs, |v| {
        us.iter()
            .map(|u| {
                let mut x = vec![0i64; n];
                for (k, &j) in u_vars.iter().enumerate() {
                    x[j] = u[k].0 as i64;
                }
                for (k, &j) in v_vars.iter().enumerate() {
                    x[j] = v[k].0 as i64;
                }
                phase(&map, &exact_value(&compiled, f, &x))
            })
            .collect()
    });
    let weight = |t: &Vec<(u64, f64)>| -> f64 { t.iter().map(|e| e.1).product() };
    let mut s = ComplexKahan::default();
    for (vi, v) in vs.iter().enumerate() {
        for (ui, u) in us.iter().enumerate() {
            s.add(table[vi][ui] * (weight(u) * weight(v)));
        }
    }
    let a2: f64 = us.iter().map(|u| weight(u).powi(2)).sum();
    let b2: f64 = vs.iter().map(|v| weight(v).powi(2)).sum();
    let rows = par::map_range(vs.len(), |i| {
        let mut acc = KahanSum::new();
        for j in 0..vs.len() {
            let t: Complex64 = table[i].iter().zip(&table[j]).map(|(x, y)| x * y.conj()).sum();
            acc.add(t.norm_sqr());
        }
        acc.value()
    });
    let differenced: f64 = rows.into_iter().sum();
    let lhs = s.value().norm_sqr().powi(2);
    let rhs = a2 * a2 * b2 * b2 * differenced;
    Ok(CauchySchwarzCheck { lhs, rhs, differenced, holds: lhs <= rhs * (1.0 + 1e-9) })
}
