use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oscillatory::{OscillatoryIntegral, QuadOptions, TwistSpec};
use super::quadrature::GaussLegendre;
use super::weight::SmoothWeight;
use crate::error::{Error, Result};
use crate::forms::Form;
use crate::par::{self, KahanSum};

#[derive(Clone, Debug)]
pub struct SingularIntegralOptions {
    pub t_start: f64,
    pub t_max: f64,
    /// Stop once the last doubling changed the value by less than this fraction.
    pub rel_tol: f64,
    /// Width of the `τ` panels.
    pub tau_panel: f64,
    pub tau_order: usize,
    pub quad: QuadOptions,
}

impl Default for SingularIntegralOptions {
    fn default() -> Self {
        SingularIntegralOptions {
            t_start: 8.0,
            t_max: 4096.0,
            rel_tol: 1e-3,
            tau_panel: 0.5,
            tau_order: 16,
            quad: QuadOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularIntegral {
    pub value: f64,
    pub imag_residual: f64,
    /// Size of the last doubling increment.
    pub tail_bound: f64,
    pub cutoff: f64,
    pub doublings: usize,
}

/// `∫_{|τ| < T} I(τ) dτ` with `T` doubled until the increment is small.
pub fn singular_integral(f: &Form, w: &SmoothWeight, x0: &[f64], opts: &SingularIntegralOptions) -> Result<SingularIntegral> {
    let n = f.n_vars();
    let twist = TwistSpec::zero(n);
    let gl = GaussLegendre::new(opts.tau_order);
    let floor = 1e-10 * w.mass().abs().powi(n as i32);
    let range = |osc: &OscillatoryIntegral, a: f64, b: f64| -> Complex64 {
        let panels = ((b - a) / opts.tau_panel).ceil().max(1.0) as usize;
        let (ts, ws) = gl.composite(a, b, panels);
        let vals = par::map_range(ts.len(), |i| osc.eval(ts[i]) * ws[i]);
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for v in vals {
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value())
    };
    let mut t = opts.t_start;
    let osc = OscillatoryIntegral::build(f, w, x0, 1.0, &twist, t, &opts.quad, 1)?;
    let mut total = range(&osc, -t, t);
    let mut doublings = 0;
    loop {
        let next = 2.0 * t;
        if next > opts.t_max {
            return Err(Error::Precondition(format!(
                "τ-integral has not settled by T = {t}; the window may contain singular points"
            )));
        }
        let osc = OscillatoryIntegral::build(f, w, x0, 1.0, &twist, next, &opts.quad, 1)?;
        let inc = range(&osc, t, next) + range(&osc, -next, -t);
        total += inc;
        t = next;
        doublings += 1;
        if doublings >= 2 && inc.norm() < opts.rel_tol * total.norm().max(floor) {
            return Ok(SingularIntegral {
                value: total.re,
                imag_residual: total.im.abs(),
                tail_bound: inc.norm(),
                cutoff: t,
                doublings,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonDensity {
    pub epsilon: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub estimate_half: f64,
    pub std_error_half: f64,
    /// `(4 D(ε/2) - D(ε)) / 3`
    pub richardson: f64,
    pub samples: usize,
}

const BATCH: usize = 1 << 16;

/// Monte Carlo estimate of `(2ε)^{-1} ∫ Π ω(x_ℓ - x_{0,ℓ}) 1_{|F(x)| < ε} dx`.
///
/// Coordinates are drawn from the normalised weight by rejection; batch
/// `b` uses stream `b` of a ChaCha generator keyed by `seed`.
pub fn epsilon_density(
    f: &Form,
    w: &SmoothWeight,
    x0: &[f64],
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<EpsilonDensity> {
    let n = f.n_vars();
    if x0.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: x0.len() });
    }
    if !(eps > 0.0) || samples == 0 {
        return Err(Error::InvalidArgument("need eps > 0 and at least one sample".into()));
    }
    let mass = w.mass();
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("weight has zero mass".into()));
    }
    let peak = w.eval(0.0);
    let delta = w.delta();
    let compiled = f.compile();
    let batches = samples.div_ceil(BATCH);
    let counts = par::map_range(batches, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let size = BATCH.min(samples - b * BATCH);
        let mut x = vec![0.0; n];
        let (mut hits, mut hits_half) = (0u64, 0u64);
        for _ in 0..size {
            for j in 0..n {
                x[j] = loop {
                    let u: f64 = rng.random_range(-delta..delta);
                    if rng.random::<f64>() * peak < w.eval(u) {
                        break x0[j] + u;
                    }
                };
            }
            let v = compiled.eval_f64(&x).abs();
            if v < eps {
                hits += 1;
                if v < eps / 2.0 {
                    hits_half += 1;
                }
            }
        }
        (hits, hits_half)
    });
    let (hits, hits_half) = counts.into_iter().fold((0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));
    let total = mass.powi(n as i32);
    let est = |h: u64, e: f64| -> (f64, f64) {
        let p = h as f64 / samples as f64;
        let scale = total / (2.0 * e);
        (scale * p, scale * (p * (1.0 - p) / samples as f64).sqrt())
    };
    let (d1, s1) = est(hits, eps);
    let (d2, s2) = est(hits_half, eps / 2.0);
    Ok(EpsilonDensity {
        epsilon: eps,
        estimate: d1,
        std_error: s1,
        estimate_half: d2,
        std_error_half: s2,
        richardson: (4.0 * d2 - d1) / 3.0,
        samples,
    })
}
