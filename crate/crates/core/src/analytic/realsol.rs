use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{CompiledForm, Form};

pub const VALUE_TOL: f64 = 1e-12;
pub const GRADIENT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RealSolution {
    pub point: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RealSearch {
    Found(RealSolution),
    NotFound { attempts: usize },
}

impl RealSearch {
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            RealSearch::Found(s) => Some(&s.point),
            RealSearch::NotFound { .. } => None,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Bisection for a sign change of `F` on the segment `a → b`.
fn bisect(f: &CompiledForm, a: &[f64], b: &[f64]) -> Vec<f64> {
    let at = |s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect() };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let f_lo = f.eval_f64(a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f.eval_f64(&at(mid));
        if v == 0.0 {
            return at(mid);
        }
        if (v > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    let x_lo = at(lo);
    let x_hi = at(hi);
    if f.eval_f64(&x_lo).abs() <= f.eval_f64(&x_hi).abs() {
        x_lo
    } else {
        x_hi
    }
}

/// Search `(margin, 1 - margin)^n` for a point with `F = 0` and `∇F ≠ 0`
/// by bisecting seeded random segments whose ends have opposite signs.
pub fn real_nonsingular_solution(f: &Form, margin: f64, seed: u64, attempts: usize) -> RealSearch {
    let n = f.n_vars();
    let compiled = f.compile();
    let grad: Vec<CompiledForm> = f.gradient().iter().map(|g| g.compile()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = margin;
    let hi = 1.0 - margin;
    if n == 0 || lo >= hi {
        return RealSearch::NotFound { attempts: 0 };
    }
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(lo..hi)).collect() };
    let mut best: Option<RealSolution> = None;
    for attempt in 1..=attempts {
        let a = sample(&mut rng);
        let b = sample(&mut rng);
        let (fa, fb) = (compiled.eval_f64(&a), compiled.eval_f64(&b));
        if fa == 0.0 || fb == 0.0 || (fa > 0.0) == (fb > 0.0) {
            continue;
        }
        let x = bisect(&compiled, &a, &b);
        let value = compiled.eval_f64(&x);
        let g: Vec<f64> = grad.iter().map(|d| d.eval_f64(&x)).collect();
        let gradient_norm = norm(&g);
        if value.abs() <= VALUE_TOL && gradient_norm > GRADIENT_TOL {
            let cand = RealSolution { point: x, value, gradient_norm };
            // a few extra tries to prefer well-conditioned, central points
            let better = best.as_ref().is_none_or(|b| cand.gradient_norm > b.gradient_norm);
            if better {
                best = Some(cand);
            }
            if attempt >= 8 || best.as_ref().is_some_and(|b| b.gradient_norm > 0.5) {
                break;
            }
        }
    }
    match best {
        Some(s) => RealSearch::Found(s),
        None => RealSearch::NotFound { attempts },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowCheck {
    pub gradient_at_center: f64,
    pub min_gradient: f64,
    /// The gradient varies by more than half its central size over the window.
    pub marginal: bool,
}

/// Compare `|∇F|` over the window `x0 ± δ` with its value at `x0`.
pub fn window_check(f: &Form, x0: &[f64], delta: f64) -> WindowCheck {
    const PTS: usize = 5;
    let n = f.n_vars();
    let grad: Vec<CompiledForm> = f.gradient().iter().map(|g| g.compile()).collect();
    let gnorm = |x: &[f64]| norm(&grad.iter().map(|d| d.eval_f64(x)).collect::<Vec<_>>());
    let center = gnorm(x0);
    let mut min_g = f64::INFINITY;
    let mut x = vec![0.0; n];
    let total = PTS.pow(n.min(8) as u32);
    for code in 0..total {
        let mut c = code;
        for j in 0..n {
            let s = if j < 8 { (c % PTS) as f64 / (PTS - 1) as f64 } else { 0.5 };
            if j < 8 {
                c /= PTS;
            }
            x[j] = x0[j] - delta + 2.0 * delta * s;
        }
        min_g = min_g.min(gnorm(&x));
    }
    WindowCheck { gradient_at_center: center, min_gradient: min_g, marginal: min_g < 0.5 * center }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_nonsingular_zero() {
        for text in ["1 2 0 0\n1 0 2 0\n-2 0 0 2", "1 1 1 0 0\n-1 0 0 1 1"] {
            let f: Form = text.parse().unwrap();
            let RealSearch::Found(s) = real_nonsingular_solution(&f, 0.15, 1, 10_000) else {
                panic!("no solution for {text}");
            };
            assert!(s.value.abs() <= VALUE_TOL);
            let v = f.evaluate_f64(&s.point).unwrap();
            assert!(v.abs() <= VALUE_TOL);
            assert!(s.gradient_norm > GRADIENT_TOL);
            assert!(s.point.iter().all(|&x| x > 0.15 && x < 0.85));
        }
    }

    #[test]
    fn definite_form_fails() {
        let f = Form::diagonal(&[1, 1, 1], 2);
        assert_eq!(real_nonsingular_solution(&f, 0.1, 1, 500), RealSearch::NotFound { attempts: 500 });
    }

    #[test]
    fn window_check_flags_degenerate_windows() {
        let f: Form = "1 2 0\n-1 0 2".parse().unwrap();
        assert!(!window_check(&f, &[0.5, 0.5], 0.1).marginal);
        assert!(window_check(&f, &[0.1, 0.1], 0.1).marginal);
    }
}
