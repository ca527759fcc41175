use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use circlelab::analytic::{
    epsilon_density, real_nonsingular_solution, singular_integral, window_check, RealSearch, SingularIntegralOptions,
    SmoothWeight,
};
use circlelab::arith::{max_vaughan_residual, SieveTables, VaughanParams};
use circlelab::expsums::{s_alpha, s_vaughan, Alpha, WindowedBox};
use circlelab::harness::{
    major_arcs, predict_and_compare, truth_count, truth_count_window, CompareConfig, TruthMode,
};
use circlelab::local::{euler_product, local_check, rational_to_string, singular_series};
use circlelab::singular_locus::{
    c0_threshold, codim_threshold, dichotomy_classify, estimate_codim, hessian_codim, CodimEstimator, PartitionPolicy,
};
use circlelab::{par, Form};

#[derive(Parser)]
#[command(name = "circlelab", version, about = "Circle-method experiments for prime points on hypersurfaces")]
struct Cli {
    /// Form file: one term `c e1 … en` per line
    #[arg(long, global = true)]
    form: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct WindowArgs {
    /// Window centre: `auto` or comma-separated coordinates in (0, 1)
    #[arg(long, default_value = "auto")]
    x0: String,
    /// Half-width of the bump weight
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Summary of a form: shape, blocks, rank data and thresholds
    AnalyzeForm {
        #[arg(long, default_value = "1/12")]
        theta: String,
    },
    /// Codimension of the singular locus
    Rank {
        #[arg(long, value_delimiter = ',', default_value = "101,211,401")]
        primes: Vec<u64>,
    },
    /// Structural dichotomy over variable splits
    Dichotomy {
        #[arg(long, value_delimiter = ',', default_value = "101,211,401")]
        primes: Vec<u64>,
        /// Cross-rank threshold; defaults to the value implied by --theta
        #[arg(long)]
        c0: Option<u64>,
        #[arg(long, default_value = "1/12")]
        theta: String,
        /// `exhaustive` or `random:SAMPLES`
        #[arg(long, default_value = "exhaustive")]
        policy: String,
    },
    /// Arithmetic tables up to a limit
    Sieve {
        #[arg(long)]
        limit: u64,
    },
    /// Largest residual of the Vaughan decomposition of Λ
    VaughanVerify {
        #[arg(long)]
        limit: u64,
        #[arg(long = "U")]
        u: f64,
        #[arg(long = "V")]
        v: f64,
    },
    /// Weighted exponential sum S(α)
    Expsum {
        #[arg(long = "N")]
        n: f64,
        #[command(flatten)]
        window: WindowArgs,
        /// `p/q` or a decimal
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// `direct` or `vaughan`
        #[arg(long, default_value = "direct")]
        mode: String,
        #[arg(long = "U")]
        u: Option<f64>,
        #[arg(long = "V")]
        v: Option<f64>,
    },
    /// Major arcs and their measure
    Arcs {
        #[arg(long = "N")]
        n: u64,
        /// Degree; taken from --form when omitted
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, default_value = "1/12")]
        theta: String,
    },
    /// Singular series partial sums and the Euler product
    SigmaSeries {
        #[arg(long = "Q", default_value_t = 200)]
        q: u64,
        /// Prime bound for the Euler product
        #[arg(long, default_value_t = 50)]
        primes: u64,
    },
    /// Singular integral and its Monte Carlo cross-check
    SigmaInfty {
        #[command(flatten)]
        window: WindowArgs,
        /// Largest τ cutoff
        #[arg(long = "T", default_value_t = 4096.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Prime points on V(F), in a box or in the window
    Count {
        #[arg(long = "X")]
        x: u64,
        /// `primes`, `lambda_star` or `lambda`
        #[arg(long, default_value = "primes")]
        mode: String,
        /// Weight by the window at N = X instead of counting [1, X]^n
        #[arg(long)]
        windowed: bool,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Predicted main term against brute-force truth
    Compare {
        #[arg(long = "X", value_delimiter = ',', default_value = "200,400,800")]
        x: Vec<u64>,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long = "Q", default_value_t = 200)]
        q: u64,
        /// Prime bound for the local obstruction check
        #[arg(long, default_value_t = 50)]
        pmax: u64,
    },
    /// Hensel witnesses or obstructions at small primes
    LocalCheck {
        #[arg(long, default_value_t = 50)]
        pmax: u64,
    },
}

fn load_form(path: &Option<PathBuf>) -> Result<Form> {
    let path = path.as_ref().ok_or_else(|| anyhow!("--form FILE is required"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse::<Form>().with_context(|| format!("parsing {}", path.display()))
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let num: i64 = a.trim().parse().context("rational numerator")?;
    let den: i64 = b.trim().parse().context("rational denominator")?;
    if den == 0 {
        bail!("zero denominator in {s}");
    }
    Ok(BigRational::new(num.into(), den.into()))
}

fn parse_x0(s: &str, f: &Form, margin: f64, seed: u64) -> Result<Option<Vec<f64>>> {
    if s == "auto" {
        return Ok(match real_nonsingular_solution(f, margin, seed, 2000) {
            RealSearch::Found(sol) => Some(sol.point),
            RealSearch::NotFound { .. } => None,
        });
    }
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()?;
    if v.len() != f.n_vars() {
        bail!("--x0 has {} coordinates, the form has {} variables", v.len(), f.n_vars());
    }
    Ok(Some(v))
}

fn require_x0(s: &str, f: &Form, margin: f64, seed: u64) -> Result<Vec<f64>> {
    parse_x0(s, f, margin, seed)?.ok_or_else(|| anyhow!("no real nonsingular zero found; pass --x0 explicitly"))
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn run(cli: &Cli) -> Result<String> {
    let mut out = String::new();
    match &cli.cmd {
        Cmd::AnalyzeForm { theta } => {
            let f = load_form(&cli.form)?;
            let theta = parse_rational(theta)?;
            let d = f.degree();
            writeln!(out, "form,{f}")?;
            writeln!(out, "variables,{}", f.n_vars())?;
            writeln!(out, "degree,{d}")?;
            writeln!(out, "terms,{}", f.n_terms())?;
            writeln!(out, "homogeneous,{}", f.is_homogeneous())?;
            let blocks: Vec<String> = f.additive_blocks().iter().map(|b| join(&b.iter().map(|i| i + 1).collect::<Vec<_>>(), " ")).collect();
            writeln!(out, "additive_blocks,{}", blocks.join(" | "))?;
            if d == 2 {
                writeln!(out, "hessian_codim,{}", hessian_codim(&f)?.codim)?;
            }
            match CodimEstimator::default().estimate(&f) {
                Ok(r) => writeln!(out, "singular_codim,{},{},confident={}", r.codim, r.method, r.confident)?,
                Err(e) => writeln!(out, "singular_codim,unavailable,{e}")?,
            }
            writeln!(out, "c0_threshold,{}", c0_threshold(d, &theta)?)?;
            writeln!(out, "codim_threshold,{}", codim_threshold(d)?)?;
        }
        Cmd::Rank { primes } => {
            let f = load_form(&cli.form)?;
            let r = estimate_codim(&f, primes)?;
            writeln!(out, "method,codim,n_vars,primes,counts,slope,residual,confident")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.method,
                r.codim,
                r.n_vars,
                join(&r.primes_used, " "),
                join(&r.counts, " "),
                r.slope,
                r.residual,
                r.confident
            )?;
        }
        Cmd::Dichotomy { primes, c0, theta, policy } => {
            let f = load_form(&cli.form)?;
            let c0 = match c0 {
                Some(c) => *c,
                None => c0_threshold(f.degree(), &parse_rational(theta)?)?
                    .try_into()
                    .map_err(|_| anyhow!("threshold does not fit in u64"))?,
            };
            let policy = match policy.split_once(':') {
                None if policy == "exhaustive" => PartitionPolicy::Exhaustive,
                Some(("random", k)) => PartitionPolicy::Randomized { samples: k.parse()?, seed: cli.seed },
                _ => bail!("unknown policy {policy}"),
            };
            let v = dichotomy_classify(&f, c0, &policy, &CodimEstimator::new(primes.clone()))?;
            writeln!(out, "case,c0,partitions_scanned,u,v,w,codim_cross")?;
            match &v.witness {
                Some(w) => {
                    let one = |s: &[usize]| join(&s.iter().map(|i| i + 1).collect::<Vec<_>>(), " ");
                    writeln!(out, "{},{},{},{},{},{},{}", v.case, v.c0, v.partitions_scanned, one(&w.u), one(&w.v), one(&w.w), w.codim_cross)?
                }
                None => writeln!(out, "{},{},{},,,,", v.case, v.c0, v.partitions_scanned)?,
            }
        }
        Cmd::Sieve { limit } => {
            let t = SieveTables::build(*limit)?;
            writeln!(out, "x,mu,lambda,lambda_star,sigma0,spf")?;
            for x in 1..=*limit {
                writeln!(out, "{x},{},{},{},{},{}", t.mu(x), t.lambda(x), t.lambda_star(x), t.sigma0(x), t.smallest_prime_factor(x))?;
            }
        }
        Cmd::VaughanVerify { limit, u, v } => {
            let t = SieveTables::build(*limit)?;
            let r = max_vaughan_residual(&t, *limit, VaughanParams::new(*u, *v)?)?;
            writeln!(out, "limit,U,V,max_residual")?;
            writeln!(out, "{limit},{u},{v},{r}")?;
        }
        Cmd::Expsum { n, window, alpha, mode, u, v } => {
            let f = load_form(&cli.form)?;
            let x0 = require_x0(&window.x0, &f, window.delta + 0.02, cli.seed)?;
            let w = SmoothWeight::bump(window.delta, 2)?;
            let b = WindowedBox::new(*n, x0, w)?;
            let t = SieveTables::build(b.upper_edge().max(2))?;
            let a: Alpha = alpha.parse()?;
            match mode.as_str() {
                "direct" => {
                    let s = s_alpha(&f, &b, &t, a)?;
                    writeln!(out, "alpha,re,im,abs")?;
                    writeln!(out, "{a},{},{},{}", s.re, s.im, s.norm())?;
                }
                "vaughan" => {
                    let def = VaughanParams::default_for(*n, f.degree());
                    let p = VaughanParams::new(u.unwrap_or(def.u), v.unwrap_or(def.v))?;
                    let split = s_vaughan(&f, &b, &t, a, p)?;
                    writeln!(out, "pieces,re,im")?;
                    for (asg, z) in &split.pieces {
                        let label: Vec<String> = asg.iter().map(|p| format!("{p:?}")).collect();
                        writeln!(out, "{},{},{}", label.join(" "), z.re, z.im)?;
                    }
                    writeln!(out, "total,{},{}", split.total.re, split.total.im)?;
                }
                m => bail!("unknown mode {m}"),
            }
        }
        Cmd::Arcs { n, d, theta } => {
            let d = match d {
                Some(d) => *d,
                None => load_form(&cli.form)?.degree(),
            };
            let dis = major_arcs(*n, d, &parse_rational(theta)?)?;
            writeln!(out, "q,a,center,radius")?;
            for a in &dis.arcs {
                writeln!(out, "{},{},{},{}", a.q, a.a, a.center, a.radius)?;
            }
            eprintln!("q_max {} arcs {} major measure {}", dis.q_max, dis.arcs.len(), dis.major_measure);
        }
        Cmd::SigmaSeries { q, primes } => {
            let f = load_form(&cli.form)?;
            let s = singular_series(&f, *q)?;
            writeln!(out, "q,term,partial")?;
            for ((q, b), p) in s.terms.iter().zip(&s.partial) {
                writeln!(out, "{q},{},{p}", rational_to_string(b))?;
            }
            let e = euler_product(&f, *primes)?;
            for fac in &e.factors {
                eprintln!(
                    "p {} k {} sigma {} stabilized {}",
                    fac.density.p,
                    fac.density.k,
                    rational_to_string(&fac.density.sigma),
                    fac.stabilized
                );
            }
            eprintln!("series {} euler product {} tail slope {:?}", s.value, e.value, s.tail_slope);
        }
        Cmd::SigmaInfty { window, t, eps, samples } => {
            let f = load_form(&cli.form)?;
            let x0 = require_x0(&window.x0, &f, window.delta + 0.02, cli.seed)?;
            let w = SmoothWeight::bump(window.delta, 2)?.unit_mass();
            let check = window_check(&f, &x0, window.delta);
            if check.marginal {
                eprintln!("warning: gradient varies strongly over the window; consider a smaller --delta");
            }
            let opts = SingularIntegralOptions { t_max: *t, ..Default::default() };
            let si = singular_integral(&f, &w, &x0, &opts)?;
            let ed = epsilon_density(&f, &w, &x0, *eps, *samples, cli.seed)?;
            writeln!(out, "method,value,error")?;
            writeln!(out, "singular_integral,{},{}", si.value, si.tail_bound)?;
            writeln!(out, "epsilon_density,{},{}", ed.richardson, ed.std_error)?;
            eprintln!("x0 {}", join(&x0, ","));
        }
        Cmd::Count { x, mode, windowed, window } => {
            let f = load_form(&cli.form)?;
            let mode: TruthMode = mode.parse()?;
            let t = SieveTables::build((*x).max(2))?;
            let z = if *windowed {
                let x0 = require_x0(&window.x0, &f, window.delta + 0.02, cli.seed)?;
                let b = WindowedBox::new(*x as f64, x0, SmoothWeight::bump(window.delta, 2)?.unit_mass())?;
                truth_count_window(&f, &b, &t, mode)?
            } else {
                truth_count(&f, *x, &t, mode)?
            };
            writeln!(out, "X,mode,points,value")?;
            writeln!(out, "{x},{mode},{},{}", z.points, z.value(mode))?;
        }
        Cmd::Compare { x, window, q, pmax } => {
            let f = load_form(&cli.form)?;
            let mut cfg = CompareConfig::new(SmoothWeight::bump(window.delta, 2)?, x.clone());
            cfg.x0 = if window.x0 == "auto" { None } else { parse_x0(&window.x0, &f, 0.0, cli.seed)? };
            cfg.series_cutoff = *q;
            cfg.local_pmax = *pmax;
            cfg.seed = cli.seed;
            let r = predict_and_compare(&f, &cfg)?;
            out.push_str(&r.to_csv());
            for (p, v) in &r.obstructions {
                eprintln!("local obstruction at p = {p}: {v}");
            }
            for n in &r.notes {
                eprintln!("note: {n}");
            }
            if let Some(s) = r.unweighted_slope() {
                eprintln!("log-log slope of truth_primes {s}");
            }
        }
        Cmd::LocalCheck { pmax } => {
            let f = load_form(&cli.form)?;
            writeln!(out, "p,verdict,sigma1")?;
            for r in local_check(&f, *pmax)? {
                let s = r.sigma1.as_ref().map(rational_to_string).unwrap_or_default();
                writeln!(out, "{},{},{s}", r.p, r.verdict)?;
            }
        }
    }
    Ok(out)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 && !par::init_threads(cli.threads) && par::is_parallel() {
        eprintln!("warning: thread pool already initialised");
    }
    let text = run(&cli)?;
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
