use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::Form;
use crate::error::{Error, Result};

/// Symmetric coefficients of `g(x; y) = F(x_1 y_1, …, x_m y_m)`.
///
/// `g = Σ_j Σ_k G_{j,k} x_{j_1}⋯x_{j_d} y_{k_1}⋯y_{k_d}` over ordered
/// index tuples, with `G` symmetric within each tuple. Entries are keyed
/// by the sorted tuples and store the integer `(d!)^2 G_{j,k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearTable {
    m: usize,
    d: usize,
    entries: BTreeMap<(Vec<usize>, Vec<usize>), BigInt>,
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn multiset_of(exps: &[u32]) -> Vec<usize> {
    exps.iter()
        .enumerate()
        .flat_map(|(i, &a)| std::iter::repeat_n(i, a as usize))
        .collect()
}

/// Product of factorials of the multiplicities in a sorted tuple.
fn multiplicity_weight(sorted: &[usize]) -> BigInt {
    let mut w = BigInt::one();
    let mut run = 0usize;
    for (i, v) in sorted.iter().enumerate() {
        run = if i > 0 && sorted[i - 1] == *v { run + 1 } else { 1 };
        w *= BigInt::from(run);
    }
    w
}

/// All distinct orderings of a sorted multiset.
fn distinct_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = sorted.to_vec();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).expect("exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

impl MultilinearTable {
    /// Table for `g(x; y) = F(x_1 y_1, …)` where `F` is homogeneous.
    pub fn from_form(f: &Form) -> Result<Self> {
        if !f.is_homogeneous() {
            return Err(Error::NotHomogeneous);
        }
        let d = f.degree() as usize;
        let mut entries = BTreeMap::new();
        for (e, c) in f.terms() {
            let j = multiset_of(e);
            let w = multiplicity_weight(&j);
            entries.insert((j.clone(), j), c * &w * &w);
        }
        Ok(MultilinearTable { m: f.n_vars(), d, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Vec<usize>, Vec<usize>), &BigInt)> {
        self.entries.iter()
    }

    /// `(d!)^2 G_{j,k}` for ordered tuples (0-based indices).
    pub fn entry(&self, j: &[usize], k: &[usize]) -> BigInt {
        let mut js = j.to_vec();
        let mut ks = k.to_vec();
        js.sort_unstable();
        ks.sort_unstable();
        self.entries.get(&(js, ks)).cloned().unwrap_or_default()
    }

    /// Rebuild `g(x; y)` as a form in `2m` variables (`x` first).
    pub fn reconstruct(&self) -> Form {
        let dfact = factorial(self.d);
        let denom = &dfact * &dfact;
        let mut terms = Vec::new();
        for ((j, k), val) in &self.entries {
            let mult_j = &dfact / multiplicity_weight(j);
            let mult_k = &dfact / multiplicity_weight(k);
            let num = val * mult_j * mult_k;
            let (q, r) = num.div_rem(&denom);
            debug_assert!(r.is_zero());
            let mut e = vec![0u32; 2 * self.m];
            for &i in j {
                e[i] += 1;
            }
            for &i in k {
                e[self.m + i] += 1;
            }
            terms.push((q, e));
        }
        Form::from_terms(2 * self.m, terms).expect("lengths are consistent")
    }

    /// The multilinear form `Γ(x_1..x_d; y_1..y_d)`.
    pub fn gamma_eval(&self, xs: &[Vec<BigInt>], ys: &[Vec<BigInt>]) -> Result<BigInt> {
        for side in [xs, ys] {
            if side.len() != self.d {
                return Err(Error::LengthMismatch { expected: self.d, got: side.len() });
            }
            for v in side {
                if v.len() != self.m {
                    return Err(Error::LengthMismatch { expected: self.m, got: v.len() });
                }
            }
        }
        let slot_sum = |vecs: &[Vec<BigInt>], tuple: &[usize]| -> BigInt {
            distinct_permutations(tuple)
                .into_iter()
                .map(|perm| {
                    perm.iter()
                        .enumerate()
                        .fold(BigInt::one(), |acc, (slot, &idx)| acc * &vecs[slot][idx])
                })
                .sum()
        };
        let mut total = BigInt::zero();
        for ((j, k), val) in &self.entries {
            let sx = slot_sum(xs, j);
            if sx.is_zero() {
                continue;
            }
            total += val * sx * slot_sum(ys, k);
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(m: usize, i: usize) -> Vec<BigInt> {
        (0..m).map(|k| BigInt::from((k == i) as i64)).collect()
    }

    /// Independent oracle: expand g(x;y) symbolically and recover G_{j,k}
    /// for an ordered pair of tuples by coefficient matching.
    fn oracle_scaled_g(f: &Form, j: &[usize], k: &[usize]) -> BigInt {
        let m = f.n_vars();
        let d = j.len();
        let mut g = Form::constant(2 * m, 0);
        for (e, c) in f.terms() {
            let mut t = Form::constant(2 * m, c.clone());
            for (i, &a) in e.iter().enumerate() {
                for _ in 0..a {
                    t = &t * &(&Form::var(2 * m, i) * &Form::var(2 * m, m + i));
                }
            }
            g = &g + &t;
        }
        let mut ex = vec![0u32; 2 * m];
        for &i in j {
            ex[i] += 1;
        }
        for &i in k {
            ex[m + i] += 1;
        }
        let coeff = g.coefficient(&ex);
        // coefficient spreads evenly over the ordered arrangements
        let arr_j = distinct_permutations(&sorted(j)).len();
        let arr_k = distinct_permutations(&sorted(k)).len();
        let df = factorial(d);
        coeff * &df * &df / BigInt::from(arr_j * arr_k)
    }

    fn sorted(v: &[usize]) -> Vec<usize> {
        let mut s = v.to_vec();
        s.sort_unstable();
        s
    }

    #[test]
    fn product_example() {
        let f: Form = "1 1 1".parse().unwrap();
        let t = MultilinearTable::from_form(&f).unwrap();
        assert_eq!(t.entry(&[0, 1], &[0, 1]), BigInt::from(1));
        assert_eq!(t.entry(&[1, 0], &[0, 1]), BigInt::from(1));
        assert_eq!(oracle_scaled_g(&f, &[0, 1], &[1, 0]), BigInt::from(1));
        let g = t.gamma_eval(&[unit(2, 0), unit(2, 1)], &[unit(2, 0), unit(2, 1)]).unwrap();
        assert_eq!(g, BigInt::from(1));
        let swapped = t.gamma_eval(&[unit(2, 1), unit(2, 0)], &[unit(2, 0), unit(2, 1)]).unwrap();
        assert_eq!(swapped, g);
    }

    #[test]
    fn square_example() {
        let f: Form = "1 2 0".parse().unwrap();
        let t = MultilinearTable::from_form(&f).unwrap();
        assert_eq!(t.entry(&[0, 0], &[0, 0]), BigInt::from(4));
        assert_eq!(oracle_scaled_g(&f, &[0, 0], &[0, 0]), BigInt::from(4));
    }

    #[test]
    fn vanishing_rule_and_oracle_agreement() {
        let f: Form = "2 2 1 0\n-3 0 1 2\n5 1 1 1\n1 3 0 0".parse().unwrap();
        let t = MultilinearTable::from_form(&f).unwrap();
        for ((j, k), _) in t.entries() {
            assert_eq!(j, k);
        }
        let tuples: Vec<Vec<usize>> = (0..27).map(|c| vec![c % 3, (c / 3) % 3, c / 9]).collect();
        for j in &tuples {
            for k in &tuples {
                assert_eq!(t.entry(j, k), oracle_scaled_g(&f, j, k), "j={j:?} k={k:?}");
            }
        }
    }

    #[test]
    fn reconstruct_round_trip() {
        let f: Form = "2 2 1 0\n-3 0 1 2\n5 1 1 1\n1 3 0 0".parse().unwrap();
        let t = MultilinearTable::from_form(&f).unwrap();
        assert_eq!(t.reconstruct(), f.substitute_diagonal());
    }

    #[test]
    fn zero_argument_kills_gamma() {
        let f: Form = "2 2 1 0\n-3 0 1 2\n5 1 1 1".parse().unwrap();
        let t = MultilinearTable::from_form(&f).unwrap();
        let z = vec![BigInt::zero(); 3];
        let a: Vec<BigInt> = [1, 2, 3].iter().map(|&v| BigInt::from(v)).collect();
        let val = t.gamma_eval(&[a.clone(), z, a.clone()], &[a.clone(), a.clone(), a]).unwrap();
        assert!(val.is_zero());
    }

    #[test]
    fn rejects_bad_inputs() {
        let f: Form = "1 2 0\n1 1 0".parse().unwrap();
        assert_eq!(MultilinearTable::from_form(&f), Err(Error::NotHomogeneous));
        let t = MultilinearTable::from_form(&"1 1 1".parse().unwrap()).unwrap();
        assert!(t.gamma_eval(&[unit(2, 0)], &[unit(2, 0), unit(2, 1)]).is_err());
        assert!(t.gamma_eval(&[unit(3, 0), unit(3, 0)], &[unit(2, 0), unit(2, 1)]).is_err());
    }
}
