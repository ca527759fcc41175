use std::f64::consts::TAU;

use num_complex::Complex64;

use super::quadrature::GaussLegendre;
use super::weight::SmoothWeight;
use crate::error::{Error, Result};
use crate::forms::{CompiledForm, Form};
use crate::par;

/// Exponents `r_j + i t_j` of the twist `Π x_j^{r_j + i t_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistSpec {
    pub r: Vec<f64>,
    pub t: Vec<f64>,
}

impl TwistSpec {
    pub fn new(r: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if r.len() != t.len() {
            return Err(Error::LengthMismatch { expected: r.len(), got: t.len() });
        }
        if let Some(bad) = r.iter().find(|&&x| !(-1.0..=0.0).contains(&x)) {
            return Err(Error::InvalidArgument(format!("twist exponent r = {bad} outside [-1, 0]")));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("twist frequencies must be finite".into()));
        }
        Ok(TwistSpec { r, t })
    }

    pub fn zero(n: usize) -> Self {
        TwistSpec { r: vec![0.0; n], t: vec![0.0; n] }
    }

    /// Pure frequency twist `x^{i t}`.
    pub fn frequencies(t: Vec<f64>) -> Self {
        TwistSpec { r: vec![0.0; t.len()], t }
    }

    pub fn is_zero(&self) -> bool {
        self.r.iter().chain(&self.t).all(|&x| x == 0.0)
    }

    fn factor(&self, j: usize, x: f64) -> Complex64 {
        let (r, t) = (self.r[j], self.t[j]);
        if r == 0.0 && t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let l = x.ln();
        Complex64::from_polar((r * l).exp(), t * l)
    }
}

#[derive(Clone, Debug)]
pub struct QuadOptions {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    pub min_panels: usize,
    /// Nodes per oscillation of the integrand along each axis.
    pub nodes_per_cycle: f64,
    pub max_nodes: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { order: 16, min_panels: 4, nodes_per_cycle: 10.0, max_nodes: 20_000_000 }
    }
}

#[derive(Clone, Debug)]
struct Block {
    weights: Vec<Complex64>,
    phases: Vec<f64>,
}

impl Block {
    fn eval(&self, tau: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, &p) in self.weights.iter().zip(&self.phases) {
            let arg = TAU * ((tau * p) % 1.0);
            acc += w * Complex64::new(arg.cos(), arg.sin());
        }
        acc
    }
}

/// `τ ↦ ∫ Π ω(x_ℓ / s - x_{0,ℓ}) Π x_j^{r_j + i t_j} e(τ F(x)) dx`, with
/// the integrand split over the additive blocks of `F` and discretised
/// once for all `|τ| ≤ τ_max`.
#[derive(Clone, Debug)]
pub struct OscillatoryIntegral {
    blocks: Vec<Block>,
    constant: f64,
    lone: Complex64,
    nodes: usize,
}

fn check_window(w: &SmoothWeight, x0: &[f64], n: usize) -> Result<()> {
    if x0.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: x0.len() });
    }
    for (j, &c) in x0.iter().enumerate() {
        if !(c - w.delta() > 0.0 && c + w.delta() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "window around x0[{}] = {c} with half-width {} leaves (0, 1)",
                j + 1,
                w.delta()
            )));
        }
    }
    Ok(())
}

/// Largest `|∂_j F|` on a coarse grid over the box.
fn gradient_scale(grad: &[CompiledForm], vars: &[usize], lo: &[f64], hi: &[f64], n: usize) -> Vec<f64> {
    const PTS: usize = 5;
    let k = vars.len();
    let mut best = vec![0.0f64; k];
    let mut x = vec![0.0; n];
    for code in 0..PTS.pow(k as u32) {
        let mut c = code;
        for &v in vars {
            let s = (c % PTS) as f64 / (PTS - 1) as f64;
            c /= PTS;
            x[v] = lo[v] + s * (hi[v] - lo[v]);
        }
        for (i, &v) in vars.iter().enumerate() {
            best[i] = best[i].max(grad[v].eval_f64(&x).abs());
        }
    }
    best
}

impl OscillatoryIntegral {
    /// Discretise for `|τ| ≤ tau_max`; `refine` multiplies every panel count.
    pub fn build(
        f: &Form,
        w: &SmoothWeight,
        x0: &[f64],
        scale: f64,
        twist: &TwistSpec,
        tau_max: f64,
        opts: &QuadOptions,
        refine: usize,
    ) -> Result<Self> {
        let n = f.n_vars();
        check_window(w, x0, n)?;
        if twist.r.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: twist.r.len() });
        }
        let gl = GaussLegendre::new(opts.order);
        let lo: Vec<f64> = x0.iter().map(|c| scale * (c - w.delta())).collect();
        let hi: Vec<f64> = x0.iter().map(|c| scale * (c + w.delta())).collect();
        let grad: Vec<CompiledForm> = f.gradient().iter().map(|g| g.compile()).collect();

        let axis = |j: usize, grad_bound: f64| -> (Vec<f64>, Vec<Complex64>) {
            let cycles = tau_max.abs() * grad_bound * (hi[j] - lo[j]) + twist.t[j].abs() * (hi[j] / lo[j]).ln() / TAU;
            let want = (opts.nodes_per_cycle * cycles).ceil() as usize;
            let panels = (want.div_ceil(opts.order)).max(opts.min_panels) * refine.max(1);
            let (xs, ws) = gl.composite(lo[j], hi[j], panels);
            let vals = xs
                .iter()
                .zip(&ws)
                .map(|(&x, &q)| twist.factor(j, x) * (q * w.eval(x / scale - x0[j])))
                .collect();
            (xs, vals)
        };

        let blocks_idx = f.additive_blocks();
        let (parts, constant) = f.split_by_blocks(&blocks_idx);
        let mut in_block = vec![false; n];
        let mut blocks = Vec::new();
        let mut total_nodes = 0usize;
        for (vars, part) in blocks_idx.iter().zip(&parts) {
            for &v in vars {
                in_block[v] = true;
            }
            let gb = gradient_scale(&grad, vars, &lo, &hi, n);
            let axes: Vec<(Vec<f64>, Vec<Complex64>)> = vars.iter().zip(&gb).map(|(&v, &g)| axis(v, g)).collect();
            let count: f64 = axes.iter().map(|a| a.0.len() as f64).product();
            if count > opts.max_nodes as f64 {
                return Err(Error::Budget { what: "oscillatory quadrature nodes", needed: count, limit: opts.max_nodes as f64 });
            }
            total_nodes += count as usize;
            let compiled = part.compile();
            let lens: Vec<usize> = axes.iter().map(|a| a.0.len()).collect();
            let outer = lens[0];
            let inner: usize = lens[1..].iter().product();
            // shard by the first axis, concatenate in order
            let chunks = par::map_range(outer, |i0| {
                let mut x = vec![0.0; n];
                let mut ws = Vec::with_capacity(inner);
                let mut ps = Vec::with_capacity(inner);
                for code in 0..inner {
                    let mut c = code;
                    x[vars[0]] = axes[0].0[i0];
                    let mut weight = axes[0].1[i0];
                    for (k, &v) in vars.iter().enumerate().skip(1) {
                        let idx = c % lens[k];
                        c /= lens[k];
                        x[v] = axes[k].0[idx];
                        weight *= axes[k].1[idx];
                    }
                    if weight == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    ws.push(weight);
                    ps.push(compiled.eval_f64(&x));
                }
                (ws, ps)
            });
            let mut block = Block { weights: Vec::new(), phases: Vec::new() };
            for (ws, ps) in chunks {
                block.weights.extend(ws);
                block.phases.extend(ps);
            }
            blocks.push(block);
        }
        let mut lone = Complex64::new(1.0, 0.0);
        for j in (0..n).filter(|&j| !in_block[j]) {
            let (_, vals) = axis(j, 0.0);
            lone *= vals.iter().sum::<Complex64>();
        }
        Ok(OscillatoryIntegral {
            blocks,
            constant: num_traits::ToPrimitive::to_f64(&constant).unwrap_or(f64::NAN),
            lone,
            nodes: total_nodes,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn eval(&self, tau: f64) -> Complex64 {
        let arg = TAU * ((tau * self.constant) % 1.0);
        let mut v = self.lone * Complex64::new(arg.cos(), arg.sin());
        for b in &self.blocks {
            v *= b.eval(tau);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscValue {
    pub value: Complex64,
    /// Difference between the refined and the base discretisation.
    pub error: f64,
    pub nodes: usize,
}

/// `I(τ; r, t) = ∫ Π ω(x_ℓ - x_{0,ℓ}) Π x_j^{r_j + i t_j} e(τ F(x)) dx`.
pub fn oscillatory_i(
    f: &Form,
    w: &SmoothWeight,
    x0: &[f64],
    tau: f64,
    twist: &TwistSpec,
    opts: &QuadOptions,
) -> Result<OscValue> {
    let coarse = OscillatoryIntegral::build(f, w, x0, 1.0, twist, tau, opts, 1)?;
    let fine = OscillatoryIntegral::build(f, w, x0, 1.0, twist, tau, opts, 2)?;
    let a = coarse.eval(tau);
    let b = fine.eval(tau);
    Ok(OscValue { value: b, error: (b - a).norm(), nodes: fine.nodes() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub tau: f64,
    pub t: Vec<f64>,
    pub abs_value: f64,
    /// `|I| max(1, |τ|)`
    pub scaled: f64,
    /// `scaled` over the `(τ = 1, t = 0)` baseline.
    pub ratio: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub baseline: f64,
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

pub const DECAY_FLAG_RATIO: f64 = 3.0;

/// `|I(τ; t)| max(1, |τ|)` over a grid of `τ` and frequency vectors `t`.
pub fn decay_uniformity_report(
    f: &Form,
    w: &SmoothWeight,
    x0: &[f64],
    taus: &[f64],
    ts: &[Vec<f64>],
    opts: &QuadOptions,
) -> Result<DecayReport> {
    let n = f.n_vars();
    let baseline = oscillatory_i(f, w, x0, 1.0, &TwistSpec::zero(n), opts)?.value.norm();
    let mut cases = Vec::new();
    for &tau in taus {
        for t in ts {
            if t.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: t.len() });
            }
            cases.push((tau, t.clone()));
        }
    }
    let values = cases
        .iter()
        .map(|(tau, t)| oscillatory_i(f, w, x0, *tau, &TwistSpec::frequencies(t.clone()), opts))
        .collect::<Result<Vec<_>>>()?;
    let rows = cases
        .into_iter()
        .zip(values)
        .map(|((tau, t), v)| {
            let abs_value = v.value.norm();
            let scaled = abs_value * tau.abs().max(1.0);
            let ratio = scaled / baseline;
            DecayRow { tau, t, abs_value, scaled, ratio, flagged: ratio > DECAY_FLAG_RATIO }
        })
        .collect();
    Ok(DecayReport { baseline, rows })
}

#[cfg(test)]
mod tests {
    use super::super::quadrature::adaptive_simpson;
    use super::*;

    fn corpus() -> Form {
        "1 2 0 0\n1 0 2 0\n-2 0 0 2".parse().unwrap()
    }

    #[test]
    fn tau_zero_is_product_of_masses() {
        let w = SmoothWeight::bump(0.1, 2).unwrap();
        let f = corpus();
        let x0 = [0.5, 0.5, 0.5];
        let v = oscillatory_i(&f, &w, &x0, 0.0, &TwistSpec::zero(3), &QuadOptions::default()).unwrap();
        assert!((v.value.re - w.mass().powi(3)).abs() < 1e-12);
        assert!(v.value.im.abs() < 1e-15);
    }

    #[test]
    fn real_twist_matches_one_dimensional_reference() {
        let w = SmoothWeight::bump(0.1, 2).unwrap();
        let f = corpus();
        let x0 = [0.4, 0.5, 0.45];
        let r = vec![-0.5, -1.0, -0.25];
        let twist = TwistSpec::new(r.clone(), vec![0.0; 3]).unwrap();
        let v = oscillatory_i(&f, &w, &x0, 0.0, &twist, &QuadOptions::default()).unwrap();
        let mut expected = 1.0;
        for j in 0..3 {
            let g = |x: f64| w.eval(x - x0[j]) * x.powf(r[j]);
            expected *= adaptive_simpson(&g, x0[j] - 0.1, x0[j] + 0.1, 1e-13);
        }
        assert!((v.value.re - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn conjugation_symmetry() {
        let w = SmoothWeight::bump(0.1, 2).unwrap();
        let f: Form = "1 1 1 0 0\n-1 0 0 1 1".parse().unwrap();
        let x0 = [0.5, 0.5, 0.5, 0.5];
        let opts = QuadOptions::default();
        let a = oscillatory_i(&f, &w, &x0, 7.3, &TwistSpec::zero(4), &opts).unwrap();
        let b = oscillatory_i(&f, &w, &x0, -7.3, &TwistSpec::zero(4), &opts).unwrap();
        assert!((a.value - b.value.conj()).norm() < 1e-12);
        assert!(a.error < 1e-9);
    }

    #[test]
    fn rejects_bad_windows_and_twists() {
        let w = SmoothWeight::bump(0.2, 1).unwrap();
        let f = corpus();
        let opts = QuadOptions::default();
        assert!(oscillatory_i(&f, &w, &[0.1, 0.5, 0.5], 1.0, &TwistSpec::zero(3), &opts).is_err());
        assert!(TwistSpec::new(vec![0.5], vec![0.0]).is_err());
    }

    #[test]
    fn decay_table_shape() {
        let w = SmoothWeight::bump(0.1, 2).unwrap();
        let f = corpus();
        let x0 = [0.5, 0.5, 0.5];
        let ts = vec![vec![0.0; 3], vec![100.0, 0.0, 0.0]];
        let rep = decay_uniformity_report(&f, &w, &x0, &[0.0, 1.0, 10.0], &ts, &QuadOptions::default()).unwrap();
        assert_eq!(rep.rows.len(), 6);
        assert!((rep.rows[0].abs_value - w.mass().powi(3)).abs() < 1e-12);
        for row in &rep.rows {
            assert!(row.abs_value <= w.mass().powi(3) + 1e-12);
        }
    }
}
