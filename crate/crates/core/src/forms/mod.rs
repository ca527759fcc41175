//! Exact multivariate integer polynomials.
//!
//! A [`Form`] stores dense exponent vectors against arbitrary-precision
//! coefficients. Variables are indexed from 0 in the API; the text format
//! and the `Display` impl render them as `x1..xn`.

mod compiled;
mod multilinear;
mod partition;

pub use compiled::{CompiledForm, ModEvaluator};
pub use multilinear::MultilinearTable;
pub use partition::VariablePartition;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Sparse multivariate polynomial with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Form {
    pub fn zero(n_vars: usize) -> Self {
        Form { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, c: impl Into<BigInt>) -> Self {
        let mut f = Form::zero(n_vars);
        f.add_term(vec![0; n_vars], c.into());
        f
    }

    /// The coordinate function `x_i`.
    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = 1;
        let mut f = Form::zero(n_vars);
        f.add_term(e, BigInt::one());
        f
    }

    /// Build from `(coefficient, exponents)` pairs, summing duplicates.
    pub fn from_terms<C, I>(n_vars: usize, terms: I) -> Result<Self>
    where
        C: Into<BigInt>,
        I: IntoIterator<Item = (C, Vec<u32>)>,
    {
        let mut f = Form::zero(n_vars);
        for (c, e) in terms {
            if e.len() != n_vars {
                return Err(Error::LengthMismatch { expected: n_vars, got: e.len() });
            }
            f.add_term(e, c.into());
        }
        Ok(f)
    }

    /// Diagonal form `sum a_i x_i^d`.
    pub fn diagonal(coeffs: &[i64], d: u32) -> Self {
        let n = coeffs.len();
        let mut f = Form::zero(n);
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = d;
            f.add_term(e, BigInt::from(c));
        }
        f
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    /// Maximum total degree; the zero form has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d0) => degs.all(|d| d == d0),
        }
    }

    /// Largest exponent any single variable carries.
    pub fn max_exponent(&self) -> u32 {
        self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0)
    }

    /// Indices of variables that occur in at least one term.
    pub fn used_vars(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    s.insert(i);
                }
            }
        }
        s
    }

    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n_vars {
            return Err(Error::LengthMismatch { expected: self.n_vars, got });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n_vars {
            return Err(Error::IndexOutOfRange { index: i, n_vars: self.n_vars });
        }
        Ok(())
    }

    /// Exact value at an integer point.
    pub fn evaluate(&self, x: &[BigInt]) -> Result<BigInt> {
        self.check_len(x.len())?;
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn evaluate_i64(&self, x: &[i64]) -> Result<BigInt> {
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.evaluate(&big)
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self.terms.iter().fold(0.0, |acc, (e, c)| {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (xi, &k) in x.iter().zip(e) {
                t *= xi.powi(k as i32);
            }
            acc + t
        }))
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Form {
        let mut out = Form::zero(self.n_vars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, c * BigInt::from(e[i]));
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Form> {
        (0..self.n_vars).map(|i| self.partial(i)).collect()
    }

    /// Terms of total degree exactly `j`.
    pub fn homogeneous_part(&self, j: u32) -> Form {
        Form {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == j)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Set the listed variables to zero; the ambient dimension is kept.
    pub fn restrict_zero(&self, zeroed: &[usize]) -> Result<Form> {
        for &i in zeroed {
            self.check_index(i)?;
        }
        Ok(Form {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| zeroed.iter().all(|&i| e[i] == 0))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        })
    }

    /// Keep only the listed variables, setting every other one to zero.
    pub fn restrict_to(&self, keep: &[usize]) -> Result<Form> {
        for &i in keep {
            self.check_index(i)?;
        }
        let keep: BTreeSet<usize> = keep.iter().copied().collect();
        let zeroed: Vec<usize> = (0..self.n_vars).filter(|i| !keep.contains(i)).collect();
        self.restrict_zero(&zeroed)
    }

    /// Cross part `F_z(u, v) - F_z(u, 0) - F_z(0, v)` for `z = u ∪ v`.
    pub fn cross_part(&self, u: &[usize], v: &[usize]) -> Result<Form> {
        for &i in u.iter().chain(v) {
            self.check_index(i)?;
        }
        let us: BTreeSet<usize> = u.iter().copied().collect();
        let vs: BTreeSet<usize> = v.iter().copied().collect();
        if let Some(&i) = us.intersection(&vs).next() {
            return Err(Error::Overlap(i));
        }
        let mut out = Form::zero(self.n_vars);
        for (e, c) in &self.terms {
            let mut in_u = false;
            let mut in_v = false;
            let mut outside = false;
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if us.contains(&i) {
                    in_u = true;
                } else if vs.contains(&i) {
                    in_v = true;
                } else {
                    outside = true;
                }
            }
            if in_u && in_v && !outside {
                out.add_term(e.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// `F(u_1 v_1, …, u_m v_m)` as a form in `2m` variables (`u` first).
    pub fn substitute_diagonal(&self) -> Form {
        let m = self.n_vars;
        let mut out = Form::zero(2 * m);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.extend_from_slice(e);
            out.add_term(e2, c.clone());
        }
        out
    }

    /// `F(a_1 x_1, …, a_n x_n)`.
    pub fn rescale(&self, a: &[BigInt]) -> Result<Form> {
        self.check_len(a.len())?;
        let mut out = Form::zero(self.n_vars);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (ai, &k) in a.iter().zip(e) {
                t *= num_traits::pow(ai.clone(), k as usize);
            }
            out.add_term(e.clone(), t);
        }
        Ok(out)
    }

    /// Same polynomial viewed in `n_vars + extra` variables.
    pub fn with_extra_vars(&self, extra: usize) -> Form {
        Form {
            n_vars: self.n_vars + extra,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.resize(self.n_vars + extra, 0);
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Re-index onto the listed variables (in order). Fails when the form
    /// involves a variable outside the list.
    pub fn project(&self, vars: &[usize]) -> Result<Form> {
        for &i in vars {
            self.check_index(i)?;
        }
        let mut out = Form::zero(vars.len());
        for (e, c) in &self.terms {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 && !vars.contains(&i) {
                    return Err(Error::InvalidArgument(format!(
                        "form involves x{} outside the projection",
                        i + 1
                    )));
                }
            }
            out.add_term(vars.iter().map(|&i| e[i]).collect(), c.clone());
        }
        Ok(out)
    }

    /// Reorder variables: new variable `j` is old variable `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Form> {
        self.check_len(perm.len())?;
        let mut seen = vec![false; self.n_vars];
        for &p in perm {
            self.check_index(p)?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("permutation repeats an index".into()));
            }
        }
        let mut out = Form::zero(self.n_vars);
        for (e, c) in &self.terms {
            out.add_term(perm.iter().map(|&p| e[p]).collect(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigInt) -> Form {
        let mut out = Form::zero(self.n_vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn compile(&self) -> CompiledForm {
        CompiledForm::new(self)
    }

    /// Serialise in the line-oriented form-file format.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.terms {
            s.push_str(&c.to_string());
            for k in e {
                s.push(' ');
                s.push_str(&k.to_string());
            }
            s.push('\n');
        }
        s
    }

    /// Connected components of the variable co-occurrence graph. Each
    /// term lives in exactly one component; variables not in any term
    /// are omitted.
    pub fn additive_blocks(&self) -> Vec<Vec<usize>> {
        let n = self.n_vars;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut j = i;
            while p[j] != r {
                let next = p[j];
                p[j] = r;
                j = next;
            }
            r
        }
        for e in self.terms.keys() {
            let vars: Vec<usize> = (0..n).filter(|&i| e[i] > 0).collect();
            for w in vars.windows(2) {
                let a = find(&mut parent, w[0]);
                let b = find(&mut parent, w[1]);
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let used = self.used_vars();
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &used {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut blocks: Vec<Vec<usize>> = groups.into_values().collect();
        blocks.sort();
        blocks
    }

    /// Split into per-block forms (full ambient dimension) plus the
    /// constant term; their sum is `self`.
    pub fn split_by_blocks(&self, blocks: &[Vec<usize>]) -> (Vec<Form>, BigInt) {
        let mut parts = vec![Form::zero(self.n_vars); blocks.len()];
        let mut constant = BigInt::zero();
        for (e, c) in &self.terms {
            match blocks
                .iter()
                .position(|b| e.iter().enumerate().any(|(i, &k)| k > 0 && b.contains(&i)))
            {
                Some(j) => parts[j].add_term(e.clone(), c.clone()),
                None => constant += c,
            }
        }
        (parts, constant)
    }
}

impl std::ops::Add for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl std::ops::Mul for &Form {
    type Output = Form;
    fn mul(self, rhs: &Form) -> Form {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        let mut out = Form::zero(self.n_vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl std::ops::Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(&BigInt::from(-1))
    }
}

impl FromStr for Form {
    type Err = Error;

    /// Parse the form-file format: one term `c e1 … en` per line, `#`
    /// comments, blank lines ignored.
    fn from_str(text: &str) -> Result<Form> {
        let mut n_vars: Option<usize> = None;
        let mut raw: Vec<(BigInt, Vec<u32>)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut toks = body.split_whitespace();
            let ctok = toks.next().unwrap_or_default();
            let c: BigInt = ctok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("coefficient `{ctok}` is not an integer"),
            })?;
            let mut exps = Vec::new();
            for t in toks {
                let k: u32 = t.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("exponent `{t}` is not a nonnegative integer"),
                })?;
                exps.push(k);
            }
            match n_vars {
                None => n_vars = Some(exps.len()),
                Some(n) if n != exps.len() => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected {n} exponents, found {}", exps.len()),
                    })
                }
                _ => {}
            }
            raw.push((c, exps));
        }
        let n = n_vars.ok_or(Error::EmptyForm)?;
        if n == 0 {
            return Err(Error::Parse { line: 1, msg: "terms need at least one exponent".into() });
        }
        Form::from_terms(n, raw)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (e, c)) in items.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| if p == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, p) })
                .collect();
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}
