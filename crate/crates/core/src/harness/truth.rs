use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::arith::SieveTables;
use crate::error::{budget, Error, Result};
use crate::expsums::{product_fold, ArithWeight, WindowedBox};
use crate::forms::{CompiledForm, Form};
use crate::par::KahanSum;

/// Tuples enumerated by a truth count.
pub const TRUTH_LIMIT: f64 = 1e9;
/// Entries of a meet-in-the-middle table.
pub const TABLE_LIMIT: f64 = 5e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthMode {
    /// Number of prime points.
    Primes,
    /// `Σ Λ*(x_1)⋯Λ*(x_n)` over prime points.
    LambdaStar,
    /// `Σ Λ(x_1)⋯Λ(x_n)` over prime-power points.
    Lambda,
}

impl TruthMode {
    fn weight(self) -> ArithWeight {
        match self {
            TruthMode::Primes | TruthMode::LambdaStar => ArithWeight::PrimesOnly,
            TruthMode::Lambda => ArithWeight::VonMangoldt,
        }
    }
}

impl FromStr for TruthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primes" => Ok(TruthMode::Primes),
            "lambda_star" | "lambda-star" => Ok(TruthMode::LambdaStar),
            "lambda" => Ok(TruthMode::Lambda),
            _ => Err(Error::InvalidArgument(format!("unknown truth mode {s:?}"))),
        }
    }
}

impl fmt::Display for TruthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthMode::Primes => "primes",
            TruthMode::LambdaStar => "lambda_star",
            TruthMode::Lambda => "lambda",
        })
    }
}

/// How the zero set is enumerated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStrategy {
    /// `F = G(others) + c x_j^e`: solve for `x_j` by an exact root.
    Power { var: usize, coef: i128, exp: u32 },
    /// `F = A(others) x_j + B(others)`.
    Linear { var: usize },
    /// `F = G(head) + H(tail)`: hash the tail values.
    Split { head: Vec<usize>, tail: Vec<usize> },
    Brute,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ZeroMass {
    /// Number of support points on `V(F)`.
    pub points: u128,
    /// Sum of the coordinate weight products over those points.
    pub mass: f64,
}

impl ZeroMass {
    pub fn value(&self, mode: TruthMode) -> f64 {
        match mode {
            TruthMode::Primes => self.points as f64,
            _ => self.mass,
        }
    }
}

#[derive(Clone, Default)]
struct Acc {
    points: u128,
    mass: KahanSum,
}

fn merge(shards: Vec<Acc>) -> ZeroMass {
    let mut points = 0;
    let mut mass = KahanSum::new();
    for s in shards {
        points += s.points;
        mass.add(s.mass.value());
    }
    ZeroMass { points, mass: mass.value() }
}

fn size(lists: &[Vec<(u64, f64)>], vars: impl Iterator<Item = usize>) -> f64 {
    vars.map(|j| lists[j].len() as f64).product()
}

/// Exact `e`-th root of `t > 0` when it is an integer.
fn exact_root(t: i128, e: u32) -> Option<u64> {
    if t <= 0 {
        return None;
    }
    let guess = (t as f64).powf(1.0 / e as f64).round() as i128;
    for r in [guess - 1, guess, guess + 1] {
        if r > 0 && r.checked_pow(e) == Some(t) {
            return u64::try_from(r).ok();
        }
    }
    None
}

/// Pick the cheapest applicable enumeration strategy.
pub fn choose_strategy(f: &Form, lists: &[Vec<(u64, f64)>]) -> SolveStrategy {
    let n = f.n_vars();
    let mut best = (size(lists, 0..n), SolveStrategy::Brute);
    for j in 0..n {
        let cost = size(lists, (0..n).filter(|&k| k != j));
        if cost >= best.0 {
            continue;
        }
        let with_j: Vec<(&[u32], _)> = f.terms().filter(|(e, _)| e[j] > 0).collect();
        if with_j.len() == 1 {
            let (e, c) = with_j[0];
            if e.iter().enumerate().all(|(k, &x)| k == j || x == 0) {
                if let Ok(coef) = i128::try_from(c.clone()) {
                    best = (cost, SolveStrategy::Power { var: j, coef, exp: e[j] });
                    continue;
                }
            }
        }
        if !with_j.is_empty() && with_j.iter().all(|(e, _)| e[j] == 1) {
            best = (cost, SolveStrategy::Linear { var: j });
        }
    }
    let blocks = f.additive_blocks();
    if blocks.len() >= 2 {
        let mut sized: Vec<(f64, Vec<usize>)> = blocks.into_iter().map(|b| (size(lists, b.iter().copied()), b)).collect();
        sized.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let (mut head, mut tail) = (vec![], vec![]);
        let (mut sh, mut st) = (1.0, 1.0);
        for (s, b) in sized {
            if sh <= st {
                head.extend(b);
                sh *= s;
            } else {
                tail.extend(b);
                st *= s;
            }
        }
        // unused variables ride along with the head
        for j in 0..n {
            if !head.contains(&j) && !tail.contains(&j) {
                head.push(j);
                sh *= lists[j].len() as f64;
            }
        }
        head.sort_unstable();
        tail.sort_unstable();
        if sh + st < best.0 && st <= TABLE_LIMIT {
            best = (sh + st, SolveStrategy::Split { head, tail });
        }
    }
    best.1
}

fn overflow() -> Error {
    Error::Budget { what: "form values in i128", needed: f64::INFINITY, limit: i128::MAX as f64 }
}

/// `Σ_{x ∈ L_1 × ⋯ × L_n, F(x) = 0} Π w_j(x_j)` for weighted coordinate lists.
pub fn zero_mass(f: &Form, lists: &[Vec<(u64, f64)>]) -> Result<ZeroMass> {
    let n = f.n_vars();
    if lists.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: lists.len() });
    }
    if n == 0 || lists.iter().any(|l| l.is_empty()) {
        return Ok(ZeroMass::default());
    }
    let strategy = choose_strategy(f, lists);
    let compiled = f.compile();
    match strategy {
        SolveStrategy::Power { var, coef, exp } => {
            let lookup: HashMap<u64, f64> = lists[var].iter().copied().collect();
            solve_last(&compiled, lists, var, |g, _| {
                if g % coef != 0 {
                    return None;
                }
                exact_root(-g / coef, exp).and_then(|x| lookup.get(&x).map(|w| (1, *w)))
            })
        }
        SolveStrategy::Linear { var } => {
            let lookup: HashMap<u64, f64> = lists[var].iter().copied().collect();
            let all: (u128, f64) = (lists[var].len() as u128, lists[var].iter().map(|e| e.1).sum());
            solve_last(&compiled, lists, var, |b, a| {
                let a = a?;
                if a == 0 {
                    return (b == 0).then_some(all);
                }
                if b % a != 0 || -b / a <= 0 {
                    return None;
                }
                lookup.get(&((-b / a) as u64)).map(|w| (1, *w))
            })
        }
        SolveStrategy::Split { head, tail } => split_count(f, lists, &head, &tail),
        SolveStrategy::Brute => {
            budget("truth enumeration", size(lists, 0..n), TRUTH_LIMIT)?;
            let shards = product_fold(lists, (Acc::default(), false), |acc, tuple| {
                let x: Vec<i64> = tuple.iter().map(|e| e.0 as i64).collect();
                match compiled.eval_i128(&x) {
                    Some(0) => {
                        acc.0.points += 1;
                        acc.0.mass.add(tuple.iter().map(|e| e.1).product());
                    }
                    Some(_) => {}
                    None => acc.1 = true,
                }
            });
            if shards.iter().any(|s| s.1) {
                return Err(overflow());
            }
            Ok(merge(shards.into_iter().map(|s| s.0).collect()))
        }
    }
}

/// Enumerate all coordinates except `var`; `solve(F(x_var = 0), F(x_var = 1) - F(x_var = 0))`
/// returns the matched `(points, weight)` for `var`.
fn solve_last<S>(c: &CompiledForm, lists: &[Vec<(u64, f64)>], var: usize, solve: S) -> Result<ZeroMass>
where
    S: Fn(i128, Option<i128>) -> Option<(u128, f64)> + Sync + Send,
{
    let n = lists.len();
    let others: Vec<usize> = (0..n).filter(|&k| k != var).collect();
    budget("truth enumeration", size(lists, others.iter().copied()), TRUTH_LIMIT)?;
    let sub: Vec<Vec<(u64, f64)>> = others.iter().map(|&k| lists[k].clone()).collect();
    let fold = |acc: &mut (Acc, bool), tuple: &[(u64, f64)]| {
        let mut x = vec![0i64; n];
        for (i, &k) in others.iter().enumerate() {
            x[k] = tuple[i].0 as i64;
        }
        let Some(b) = c.eval_i128(&x) else {
            acc.1 = true;
            return;
        };
        x[var] = 1;
        let a = c.eval_i128(&x).map(|v| v - b);
        if let Some((pts, w)) = solve(b, a) {
            acc.0.points += pts;
            acc.0.mass.add(w * tuple.iter().map(|e| e.1).product::<f64>());
        }
    };
    let shards = if sub.is_empty() {
        let mut acc = (Acc::default(), false);
        fold(&mut acc, &[]);
        vec![acc]
    } else {
        product_fold(&sub, (Acc::default(), false), fold)
    };
    if shards.iter().any(|s| s.1) {
        return Err(overflow());
    }
    Ok(merge(shards.into_iter().map(|s| s.0).collect()))
}

fn split_count(f: &Form, lists: &[Vec<(u64, f64)>], head: &[usize], tail: &[usize]) -> Result<ZeroMass> {
    let n = f.n_vars();
    budget("truth enumeration", size(lists, head.iter().copied()), TRUTH_LIMIT)?;
    budget("meet-in-the-middle table", size(lists, tail.iter().copied()), TABLE_LIMIT)?;
    let tail_form = f.restrict_zero(head)?;
    let head_form = f.restrict_zero(tail)?;
    let (hc, tc) = (head_form.compile(), tail_form.compile());
    // the constant term sits in both restrictions
    let constant = i128::try_from(f.coefficient(&vec![0; n])).map_err(|_| overflow())?;
    let tail_lists: Vec<Vec<(u64, f64)>> = tail.iter().map(|&k| lists[k].clone()).collect();
    let tables = product_fold(&tail_lists, (HashMap::<i128, (u128, KahanSum)>::new(), false), |acc, tuple| {
        let mut x = vec![0i64; n];
        for (i, &k) in tail.iter().enumerate() {
            x[k] = tuple[i].0 as i64;
        }
        match tc.eval_i128(&x) {
            Some(v) => {
                let e = acc.0.entry(v - constant).or_default();
                e.0 += 1;
                e.1.add(tuple.iter().map(|t| t.1).product());
            }
            None => acc.1 = true,
        }
    });
    let mut table: HashMap<i128, (u128, f64)> = HashMap::new();
    for (t, bad) in tables {
        if bad {
            return Err(overflow());
        }
        let mut keys: Vec<_> = t.into_iter().collect();
        keys.sort_by_key(|e| e.0);
        for (k, (c, w)) in keys {
            let e = table.entry(k).or_insert((0, 0.0));
            e.0 += c;
            e.1 += w.value();
        }
    }
    let head_lists: Vec<Vec<(u64, f64)>> = head.iter().map(|&k| lists[k].clone()).collect();
    let shards = product_fold(&head_lists, (Acc::default(), false), |acc, tuple| {
        let mut x = vec![0i64; n];
        for (i, &k) in head.iter().enumerate() {
            x[k] = tuple[i].0 as i64;
        }
        let Some(g) = hc.eval_i128(&x) else {
            acc.1 = true;
            return;
        };
        if let Some(&(c, w)) = table.get(&-g) {
            acc.0.points += c;
            acc.0.mass.add(w * tuple.iter().map(|t| t.1).product::<f64>());
        }
    });
    if shards.iter().any(|s| s.1) {
        return Err(overflow());
    }
    Ok(merge(shards.into_iter().map(|s| s.0).collect()))
}

/// Coordinate lists `{(x, a(x)) : 1 ≤ x ≤ X}` for the support of the mode.
pub fn support_lists(tables: &SieveTables, n: usize, x_max: u64, mode: TruthMode) -> Result<Vec<Vec<(u64, f64)>>> {
    if x_max > tables.limit() {
        return Err(Error::InvalidArgument(format!("X = {x_max} exceeds the sieve limit {}", tables.limit())));
    }
    let w = mode.weight();
    let list: Vec<(u64, f64)> = (2..=x_max)
        .filter_map(|x| {
            let v = match w {
                ArithWeight::PrimesOnly => tables.lambda_star(x),
                ArithWeight::VonMangoldt => tables.lambda(x),
            };
            (v != 0.0).then_some((x, v))
        })
        .collect();
    Ok(vec![list; n])
}

/// Prime (or prime-power) points of `V(F)` in `[1, X]^n`.
pub fn truth_count(f: &Form, x_max: u64, tables: &SieveTables, mode: TruthMode) -> Result<ZeroMass> {
    zero_mass(f, &support_lists(tables, f.n_vars(), x_max, mode)?)
}

/// `Σ ϖ(x) a(x_1)⋯a(x_n) 1_{F(x)=0}` over the window.
pub fn truth_count_window(f: &Form, b: &WindowedBox, tables: &SieveTables, mode: TruthMode) -> Result<ZeroMass> {
    if f.n_vars() != b.n_vars() {
        return Err(Error::LengthMismatch { expected: b.n_vars(), got: f.n_vars() });
    }
    if b.upper_edge() > tables.limit() {
        return Err(Error::InvalidArgument(format!(
            "window reaches {} beyond the sieve limit {}",
            b.upper_edge(),
            tables.limit()
        )));
    }
    let w = mode.weight();
    let lists: Vec<Vec<(u64, f64)>> = (0..b.n_vars())
        .map(|j| {
            let (l, h) = b.support(j);
            (l..=h)
                .filter_map(|x| {
                    let a = match w {
                        ArithWeight::PrimesOnly => tables.lambda_star(x),
                        ArithWeight::VonMangoldt => tables.lambda(x),
                    };
                    let v = a * b.coordinate_weight(j, x);
                    (v != 0.0).then_some((x, v))
                })
                .collect()
        })
        .collect();
    zero_mass(f, &lists)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimePowerGap {
    pub x: u64,
    pub truth_lambda: f64,
    pub truth_lambda_star: f64,
    pub gap: f64,
    /// `(log X)^n X^{n - 1 - d + 1/2}`
    pub bound_scale: f64,
    pub normalized: f64,
}

/// Contribution of points with a proper prime-power coordinate.
pub fn prime_power_gap(f: &Form, x_max: u64, tables: &SieveTables) -> Result<PrimePowerGap> {
    let lam = truth_count(f, x_max, tables, TruthMode::Lambda)?.mass;
    let star = truth_count(f, x_max, tables, TruthMode::LambdaStar)?.mass;
    let n = f.n_vars() as f64;
    let d = f.degree() as f64;
    let x = x_max as f64;
    let bound_scale = x.ln().powf(n) * x.powf(n - 1.0 - d + 0.5);
    let gap = (lam - star).max(0.0);
    Ok(PrimePowerGap { x: x_max, truth_lambda: lam, truth_lambda_star: star, gap, bound_scale, normalized: gap / bound_scale })
}
