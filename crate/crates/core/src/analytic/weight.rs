use crate::error::{Error, Result};

use super::quadrature::GaussLegendre;

/// Points used to certify derivative bounds.
pub const CERTIFY_GRID: usize = 10_000;

/// Scaled standard mollifier `ω(t) = A exp(1 - 1/(1 - (t/δ)^2))` on `|t| < δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothWeight {
    delta: f64,
    amplitude: f64,
    m0: usize,
    /// `P_k` with `d^k/du^k exp(1 - 1/w) = P_k(u) w^{-2k} exp(1 - 1/w)`, `w = 1 - u^2`.
    polys: Vec<Vec<f64>>,
    sup_bound: f64,
}

fn poly_eval(p: &[f64], u: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn poly_deriv(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn derivative_polys(m0: usize) -> Vec<Vec<f64>> {
    let w = vec![1.0, 0.0, -1.0];
    let w2 = poly_mul(&w, &w);
    let mut polys = vec![vec![1.0]];
    for k in 0..m0 {
        let p = &polys[k];
        // P_{k+1} = P_k' w^2 + 4k u w P_k - 2u P_k
        let t1 = poly_mul(&poly_deriv(p), &w2);
        let t2 = poly_mul(&poly_mul(&[0.0, 4.0 * k as f64], &w), p);
        let t3 = poly_mul(&[0.0, -2.0], p);
        polys.push(poly_add(&poly_add(&t1, &t2), &t3));
    }
    polys
}

impl SmoothWeight {
    /// The mollifier with `ω(0) = 1`, tracking derivatives up to order `m0`.
    pub fn bump(delta: f64, m0: usize) -> Result<Self> {
        if !(delta > 0.0 && delta <= 0.25) {
            return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1/4]")));
        }
        let mut w = SmoothWeight { delta, amplitude: 1.0, m0, polys: derivative_polys(m0), sup_bound: 0.0 };
        w.sup_bound = w.grid_sup();
        Ok(w)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    /// Certified `max_{k ≤ M0} sup |ω^{(k)}|` on the grid.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// The same shape multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut w = self.clone();
        w.amplitude *= factor;
        w.sup_bound *= factor.abs();
        w
    }

    /// Rescaled so that `∫ ω = 1`.
    pub fn unit_mass(&self) -> Self {
        self.scaled(1.0 / self.mass())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `ω^{(k)}(t)` for `k ≤ M0`.
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        assert!(k <= self.m0, "derivative order {k} exceeds tracked order {}", self.m0);
        let u = t / self.delta;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        let e = (1.0 - 1.0 / w).exp();
        if e == 0.0 {
            return 0.0;
        }
        self.amplitude * poly_eval(&self.polys[k], u) * e / w.powi(2 * k as i32) / self.delta.powi(k as i32)
    }

    /// `∫ ω`.
    pub fn mass(&self) -> f64 {
        GaussLegendre::new(40).integrate(|t| self.eval(t), -self.delta, self.delta, 16)
    }

    /// `∫ ω(t) g(t) dt`.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        GaussLegendre::new(40).integrate(|t| self.eval(t) * g(t), -self.delta, self.delta, 16)
    }

    fn grid_sup(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..=CERTIFY_GRID {
            let t = -self.delta + 2.0 * self.delta * i as f64 / CERTIFY_GRID as f64;
            for k in 0..=self.m0 {
                best = best.max(self.derivative(k, t).abs());
            }
        }
        best
    }

    /// Check the support and positivity conditions on the grid.
    pub fn check_class(&self) -> bool {
        let mut ok = true;
        for i in 0..=CERTIFY_GRID {
            let t = -1.5 * self.delta + 3.0 * self.delta * i as f64 / CERTIFY_GRID as f64;
            let v = self.eval(t);
            ok &= v >= 0.0;
            if t.abs() >= self.delta {
                ok &= v == 0.0;
            }
            if t.abs() <= self.delta / 2.0 {
                ok &= v > 0.0;
            }
        }
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let w = SmoothWeight::bump(0.1, 3).unwrap();
        assert_eq!(w.eval(0.0), 1.0);
        assert!((w.eval(0.05) - (1.0f64 - 4.0 / 3.0).exp()).abs() < 1e-15);
        assert_eq!(w.eval(0.1), 0.0);
        assert_eq!(w.eval(0.101), 0.0);
        assert!(w.check_class());
        assert!(SmoothWeight::bump(0.0, 1).is_err());
        assert!(SmoothWeight::bump(0.3, 1).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let w = SmoothWeight::bump(0.2, 4).unwrap();
        let h = 1e-5;
        for &t in &[-0.15, -0.07, 0.0, 0.03, 0.12, 0.19] {
            for k in 0..4 {
                let fd = (w.derivative(k, t + h) - w.derivative(k, t - h)) / (2.0 * h);
                let exact = w.derivative(k + 1, t);
                assert!((fd - exact).abs() < 1e-4 * (1.0 + exact.abs()), "k={k} t={t}: {fd} vs {exact}");
            }
        }
        assert!(w.sup_bound() >= w.eval(0.0));
    }

    #[test]
    fn unit_mass_normalisation() {
        let w = SmoothWeight::bump(0.1, 2).unwrap().unit_mass();
        assert!((w.mass() - 1.0).abs() < 1e-12);
        let reference = super::super::quadrature::adaptive_simpson(&|t| w.eval(t), -0.1, 0.1, 1e-13);
        assert!((reference - 1.0).abs() < 1e-9);
    }
}
