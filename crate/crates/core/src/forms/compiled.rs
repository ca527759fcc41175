use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::Form;

#[derive(Clone, Debug)]
struct Term {
    coef_f64: f64,
    coef_i128: Option<i128>,
    // (variable, exponent) pairs with exponent > 0
    factors: Vec<(usize, u32)>,
}

/// Flattened form for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledForm {
    n_vars: usize,
    terms: Vec<Term>,
}

impl CompiledForm {
    pub fn new(f: &Form) -> Self {
        let terms = f
            .terms()
            .map(|(e, c)| Term {
                coef_f64: c.to_f64().unwrap_or(f64::NAN),
                coef_i128: c.to_i128(),
                factors: e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (i, k))
                    .collect(),
            })
            .collect();
        CompiledForm { n_vars: f.n_vars(), terms }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coef_f64;
            for &(i, k) in &t.factors {
                v *= x[i].powi(k as i32);
            }
            acc += v;
        }
        acc
    }

    /// Exact evaluation in `i128`; `None` on overflow.
    pub fn eval_i128(&self, x: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for t in &self.terms {
            let mut v = t.coef_i128?;
            for &(i, k) in &t.factors {
                let b = x[i] as i128;
                for _ in 0..k {
                    v = v.checked_mul(b)?;
                }
            }
            acc = acc.checked_add(v)?;
        }
        Some(acc)
    }

    /// Exact evaluation with an arbitrary-precision fallback.
    pub fn eval_exact(&self, x: &[i64], form: &Form) -> BigInt {
        match self.eval_i128(x) {
            Some(v) => BigInt::from(v),
            None => form.evaluate_i64(x).expect("length checked by caller"),
        }
    }
}

/// Evaluates a form modulo a fixed modulus `m < 2^63`.
#[derive(Clone, Debug)]
pub struct ModEvaluator {
    modulus: u64,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl ModEvaluator {
    pub fn new(f: &Form, modulus: u64) -> Self {
        assert!(modulus >= 1);
        let m = BigInt::from(modulus);
        let terms = f
            .terms()
            .filter_map(|(e, c)| {
                let r = c.mod_floor(&m).to_u64().expect("reduced residue fits");
                (r != 0).then(|| {
                    (
                        r,
                        e.iter()
                            .enumerate()
                            .filter(|(_, &k)| k > 0)
                            .map(|(i, &k)| (i, k))
                            .collect(),
                    )
                })
            })
            .collect();
        ModEvaluator { modulus, terms }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Value at residues `x` (each already reduced).
    pub fn eval(&self, x: &[u64]) -> u64 {
        let m = self.modulus as u128;
        let mut acc: u128 = 0;
        for (c, factors) in &self.terms {
            let mut v = *c as u128;
            for &(i, k) in factors {
                let b = x[i] as u128;
                for _ in 0..k {
                    v = v * b % m;
                }
            }
            acc += v;
            if acc >= m {
                acc -= m;
            }
        }
        acc as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compiled_matches_exact() {
        let f: Form = "3 2 1 0\n-7 0 1 2\n5 0 0 3\n-1 1 1 1".parse().unwrap();
        let c = f.compile();
        for x in [[1i64, 2, 3], [-4, 9, 11], [100, -37, 2]] {
            let exact = f.evaluate_i64(&x).unwrap();
            assert_eq!(BigInt::from(c.eval_i128(&x).unwrap()), exact);
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            assert!((c.eval_f64(&xf) - exact.to_f64().unwrap()).abs() < 1e-6);
            for m in [2u64, 7, 97, 1_000_003] {
                let r: Vec<u64> = x.iter().map(|&v| v.rem_euclid(m as i64) as u64).collect();
                let got = ModEvaluator::new(&f, m).eval(&r);
                let want = exact.mod_floor(&BigInt::from(m)).to_u64().unwrap();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn i128_overflow_falls_back() {
        let f: Form = "1 9".parse().unwrap();
        let c = f.compile();
        let x = [1i64 << 40];
        assert!(c.eval_i128(&x).is_none());
        assert_eq!(c.eval_exact(&x, &f), BigInt::from(1u8) << 360);
    }
}
