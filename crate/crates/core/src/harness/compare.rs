use std::fmt::Write as _;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::truth::{prime_power_gap, truth_count, truth_count_window, TruthMode};
use crate::analytic::{
    oscillatory_i, real_nonsingular_solution, singular_integral, OscillatoryIntegral, QuadOptions, RealSearch,
    SingularIntegralOptions, SmoothWeight, TwistSpec,
};
use crate::arith::{euler_phi, SieveTables, VaughanParams};
use crate::error::{Error, Result};
use crate::expsums::{complete_sum, s_alpha, Alpha, CompleteSumSpec, WindowedBox};
use crate::forms::Form;
use crate::local::{fit_slope, hensel_unit_witness, singular_series, HenselVerdict};

/// `∫ ϖ(x) e(τ F(x)) dx` over the window, computed in the original coordinates.
pub fn w_main(f: &Form, b: &WindowedBox, tau: f64) -> Result<Complex64> {
    let twist = TwistSpec::zero(f.n_vars());
    let osc = OscillatoryIntegral::build(f, b.weight(), b.x0(), b.scale(), &twist, tau.abs(), &QuadOptions::default(), 2)?;
    Ok(osc.eval(tau))
}

/// `N^n I(N^d τ)` through the unit-scale integral.
pub fn w_main_rescaled(f: &Form, b: &WindowedBox, tau: f64) -> Result<Complex64> {
    let n = b.scale();
    let i = oscillatory_i(f, b.weight(), b.x0(), n.powi(f.degree() as i32) * tau, &TwistSpec::zero(f.n_vars()), &QuadOptions::default())?;
    Ok(i.value * n.powi(f.n_vars() as i32))
}

/// Checks the lower support edge against `U·V` and `N^{ϑ_0}`.
pub fn validate_window(b: &WindowedBox, params: VaughanParams, theta: &BigRational) -> Result<()> {
    let lo = b.lower_edge() as f64;
    if lo <= params.uv() {
        return Err(Error::Precondition(format!("window lower edge {lo} must exceed U·V = {}", params.uv())));
    }
    let q_bound = b.scale().powf(theta.to_f64().unwrap_or(1.0));
    if lo <= q_bound {
        return Err(Error::Precondition(format!("window lower edge {lo} must exceed N^ϑ0 = {q_bound}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MajorArcRow {
    pub q: u64,
    pub a: i64,
    pub tau: f64,
    pub s: Complex64,
    /// `φ(q)^{-n} 𝒜(q, a) 𝒲(τ)`
    pub main: Complex64,
    pub rel_error: f64,
}

/// `S(a/q + τ)` against its major-arc main term.
pub fn major_arc_approx_check(
    f: &Form,
    b: &WindowedBox,
    tables: &SieveTables,
    q: u64,
    a: i64,
    tau: f64,
) -> Result<MajorArcRow> {
    if b.lower_edge() <= q {
        return Err(Error::Precondition(format!(
            "window lower edge {} must exceed q = {q} so that every coordinate is a unit mod q",
            b.lower_edge()
        )));
    }
    let spec = CompleteSumSpec::new(q, a)?;
    let alpha = if tau == 0.0 { Alpha::rational(a, q)? } else { Alpha::real(a as f64 / q as f64 + tau)? };
    let s = s_alpha(f, b, tables, alpha)?;
    let phi = (euler_phi(q) as f64).powi(f.n_vars() as i32);
    let main = complete_sum(f, &spec)? / phi * w_main(f, b, tau)?;
    let rel_error = (s - main).norm() / main.norm();
    Ok(MajorArcRow { q, a, tau, s, main, rel_error })
}

#[derive(Clone, Debug)]
pub struct CompareConfig {
    pub weight: SmoothWeight,
    /// Window centre; searched for when absent.
    pub x0: Option<Vec<f64>>,
    pub xs: Vec<u64>,
    pub series_cutoff: u64,
    pub integral: SingularIntegralOptions,
    /// Primes up to this bound are checked for local obstructions.
    pub local_pmax: u64,
    pub seed: u64,
}

impl CompareConfig {
    pub fn new(weight: SmoothWeight, xs: Vec<u64>) -> Self {
        CompareConfig {
            weight,
            x0: None,
            xs,
            series_cutoff: crate::local::DEFAULT_SERIES_CUTOFF,
            integral: SingularIntegralOptions::default(),
            local_pmax: crate::local::DEFAULT_EULER_PRIMES,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub x: u64,
    /// Prime points of `V(F)` in `[1, X]^n`.
    pub truth_primes: u128,
    /// Windowed `Λ*` mass at `N = X`.
    pub truth_lstar: f64,
    /// Windowed `Λ` mass at `N = X`.
    pub truth_lambda: f64,
    pub sigma_infty: f64,
    pub series: f64,
    pub c: f64,
    /// `truth_lstar / (c X^{n-d})` when `c > 0`.
    pub ratio: Option<f64>,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct PredictionReport {
    pub x0: Vec<f64>,
    pub sigma_infty: f64,
    pub series: f64,
    pub c: f64,
    pub obstructions: Vec<(u64, HenselVerdict)>,
    pub notes: Vec<String>,
    pub rows: Vec<CompareRow>,
}

pub const CSV_HEADER: &str = "X,truth_primes,truth_lstar,truth_lambda,sigma_infty,series_Q,c,ratio,gap";

impl PredictionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let ratio = r.ratio.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.x, r.truth_primes, r.truth_lstar, r.truth_lambda, r.sigma_infty, r.series, r.c, ratio, r.gap
            )
            .unwrap();
        }
        out
    }

    /// Least-squares slope of `log truth_primes` against `log X`.
    pub fn unweighted_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.truth_primes > 0)
            .map(|r| ((r.x as f64).ln(), (r.truth_primes as f64).ln()))
            .collect();
        fit_slope(&pts)
    }

    /// `(max - min) / median` of the ratio column.
    pub fn ratio_spread(&self) -> Option<f64> {
        let mut r: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        if r.is_empty() {
            return None;
        }
        r.sort_by(f64::total_cmp);
        let m = r.len();
        let median = if m % 2 == 1 { r[m / 2] } else { 0.5 * (r[m / 2 - 1] + r[m / 2]) };
        Some((r[m - 1] - r[0]) / median)
    }
}

/// Predicted `c(F; ω, x_0) = σ_∞ 𝔖` against windowed prime counts.
pub fn predict_and_compare(f: &Form, cfg: &CompareConfig) -> Result<PredictionReport> {
    let n = f.n_vars();
    if cfg.xs.is_empty() {
        return Err(Error::InvalidArgument("no X values".into()));
    }
    let w = cfg.weight.unit_mass();
    let mut notes = vec![];
    let x0 = match &cfg.x0 {
        Some(x) => {
            if x.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: x.len() });
            }
            Some(x.clone())
        }
        None => match real_nonsingular_solution(f, w.delta() + 0.02, cfg.seed, 2000) {
            RealSearch::Found(s) => Some(s.point),
            RealSearch::NotFound { attempts } => {
                notes.push(format!("no real nonsingular zero found in {attempts} attempts; σ_∞ taken as 0"));
                None
            }
        },
    };
    let mut obstructions = vec![];
    for p in crate::arith::primes_up_to(cfg.local_pmax) {
        match hensel_unit_witness(f, p) {
            Ok(v @ HenselVerdict::Obstruction { .. }) => obstructions.push((p, v)),
            Ok(_) => {}
            Err(Error::Budget { .. }) => notes.push(format!("p = {p}: local search over budget, unchecked")),
            Err(e) => return Err(e),
        }
    }
    let series = singular_series(f, cfg.series_cutoff)?.value;
    let sigma_infty = match &x0 {
        Some(x) => singular_integral(f, &w, x, &cfg.integral)?.value,
        None => 0.0,
    };
    let c = if obstructions.is_empty() { sigma_infty * series } else { 0.0 };
    let centre = x0.clone().unwrap_or_else(|| vec![0.5; n]);
    let x_max = *cfg.xs.iter().max().unwrap();
    let tables = SieveTables::build(x_max)?;
    let nd = n as f64 - f.degree() as f64;
    let theta = super::default_theta();
    let mut rows = Vec::with_capacity(cfg.xs.len());
    for &x in &cfg.xs {
        let b = WindowedBox::new(x as f64, centre.clone(), w.clone())?;
        validate_window(&b, VaughanParams::default_for(x as f64, f.degree()), &theta)?;
        let primes = truth_count(f, x, &tables, TruthMode::Primes)?.points;
        let lstar = truth_count_window(f, &b, &tables, TruthMode::LambdaStar)?.mass;
        let lambda = truth_count_window(f, &b, &tables, TruthMode::Lambda)?.mass;
        let ratio = (c > 0.0).then(|| lstar / (c * (x as f64).powf(nd)));
        rows.push(CompareRow {
            x,
            truth_primes: primes,
            truth_lstar: lstar,
            truth_lambda: lambda,
            sigma_infty,
            series,
            c,
            ratio,
            gap: (lambda - lstar).max(0.0),
        });
    }
    Ok(PredictionReport { x0: centre, sigma_infty, series, c, obstructions, notes, rows })
}

/// Normalised prime-power gaps along a sequence of `X`.
pub fn gap_series(f: &Form, xs: &[u64]) -> Result<Vec<super::PrimePowerGap>> {
    let tables = SieveTables::build(*xs.iter().max().unwrap_or(&2))?;
    xs.iter().map(|&x| prime_power_gap(f, x, &tables)).collect()
}
