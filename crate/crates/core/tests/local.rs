use circlelab::expsums::{complete_sum, CompleteSumSpec};
use circlelab::local::*;
use circlelab::Form;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn brute_units(f: &Form, q: u64) -> u128 {
    let n = f.n_vars();
    let units: Vec<i64> = (1..q as i64).filter(|x| num_integer::gcd(*x as u64, q) == 1).collect();
    let mut count = 0;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<i64> = idx.iter().map(|&i| units[i]).collect();
        let v: i128 = f.evaluate_i64(&x).unwrap().try_into().unwrap();
        if v.rem_euclid(q as i128) == 0 {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == n {
                return count;
            }
            idx[k] += 1;
            if idx[k] < units.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn corpus() -> Vec<Form> {
    vec![
        "1 2 0 0\n1 0 2 0\n-2 0 0 2".parse().unwrap(),
        "1 1 1 0 0\n-1 0 0 1 1".parse().unwrap(),
        "1 2 0 0\n2 1 1 0\n-3 0 1 1\n-1 0 0 2".parse().unwrap(),
    ]
}

#[test]
fn unit_solution_examples() {
    let sum_sq = Form::diagonal(&[1, 1], 2);
    let diff_sq = Form::diagonal(&[1, -1], 2);
    assert_eq!(unit_solutions(&sum_sq, 3, 1).unwrap(), 0);
    assert_eq!(unit_solutions(&diff_sq, 3, 1).unwrap(), 4);
    assert_eq!(unit_solutions(&diff_sq, 3, 2).unwrap(), 12);
    for f in corpus() {
        for q in [(2u64, 3u32), (3, 2), (5, 1), (7, 1)] {
            assert_eq!(unit_solutions(&f, q.0, q.1).unwrap(), brute_units(&f, q.0.pow(q.1)));
        }
    }
}

#[test]
fn sigma_examples() {
    let diff_sq = Form::diagonal(&[1, -1], 2);
    let s1 = sigma_p(&diff_sq, 3, 1).unwrap();
    let s2 = sigma_p(&diff_sq, 3, 2).unwrap();
    assert_eq!(s1.sigma, BigRational::from_integer(3.into()));
    assert_eq!(s2.sigma, BigRational::from_integer(3.into()));
    let sum_sq = Form::diagonal(&[1, 1], 2);
    for k in 1..=3 {
        assert!(sigma_p(&sum_sq, 3, k).unwrap().sigma.is_zero());
    }
}

#[test]
fn q_sum_matches_local_factor() {
    for f in corpus() {
        for p in [3u64, 5, 7] {
            for k in 1..=2u32 {
                let mut acc = 0.0;
                for j in 0..=k {
                    let q = p.pow(j);
                    let phi = if j == 0 { 1.0 } else { (q - q / p) as f64 };
                    for a in 0..q {
                        if q > 1 && a % p == 0 {
                            continue;
                        }
                        let z = complete_sum(&f, &CompleteSumSpec::new(q, a as i64).unwrap()).unwrap();
                        acc += z.re / phi.powi(f.n_vars() as i32);
                    }
                }
                let want = sigma_p(&f, p, k).unwrap().sigma_f64();
                assert!((acc - want).abs() < 1e-9, "p={p} k={k}: {acc} vs {want}");
            }
        }
    }
}

#[test]
fn series_terms_multiplicative() {
    for f in corpus() {
        for (a, b) in [(3u64, 5u64), (5, 7), (4, 9)] {
            let ab = series_term(&f, a * b).unwrap();
            assert_eq!(ab, series_term(&f, a).unwrap() * series_term(&f, b).unwrap());
        }
    }
}

#[test]
fn ramanujan_sums_match_definition() {
    for q in 1u64..40 {
        for r in 0..q {
            let direct: f64 = (0..q)
                .filter(|a| num_integer::gcd(*a, q) == 1)
                .map(|a| (std::f64::consts::TAU * (a * r) as f64 / q as f64).cos())
                .sum();
            assert!((ramanujan_sum(q, r) as f64 - direct).abs() < 1e-9);
        }
    }
}

#[test]
fn series_cutoff_one_is_one() {
    let s = singular_series(&corpus()[0], 1).unwrap();
    assert_eq!(s.value, 1.0);
}

#[test]
fn euler_product_tracks_series() {
    let f = corpus()[0].clone();
    let s = singular_series(&f, DEFAULT_SERIES_CUTOFF).unwrap();
    let e = euler_product(&f, DEFAULT_EULER_PRIMES).unwrap();
    assert!(e.factors.iter().all(|x| x.stabilized));
    let rel = (s.value - e.value).abs() / e.value;
    assert!(rel < 0.1, "series {} vs product {}", s.value, e.value);
}

#[test]
fn euler_product_is_divisor_sum_of_series_terms() {
    // Π_{p ≤ P} σ_p(k_p) = Σ_{q | Π p^{k_p}} B(q) by multiplicativity
    let f = Form::diagonal(&[1, -1], 2);
    let e = euler_product(&f, 7).unwrap();
    let mut prod = BigRational::from_integer(1.into());
    let mut modulus = 1u64;
    for x in &e.factors {
        prod *= x.density.sigma.clone();
        modulus *= x.density.p.pow(x.density.k);
    }
    let mut sum = BigRational::zero();
    for q in (1..=modulus).filter(|q| modulus.is_multiple_of(*q)) {
        sum += series_term(&f, q).unwrap();
    }
    assert_eq!(sum, prod);
}

fn hessian(f: &Form) -> Vec<Vec<i64>> {
    let n = f.n_vars();
    let zero = vec![0i64; n];
    (0..n)
        .map(|i| (0..n).map(|j| f.partial(i).partial(j).evaluate_i64(&zero).unwrap().try_into().unwrap()).collect())
        .collect()
}

fn det(m: &[Vec<i64>]) -> i64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det(&minor)
        })
        .sum()
}

#[test]
fn hensel_stability_at_good_primes() {
    for f in corpus() {
        let det = det(&hessian(&f));
        assert_ne!(det, 0);
        for p in [5u64, 7, 11] {
            if det % p as i64 == 0 {
                continue;
            }
            let s1 = sigma_p(&f, p, 1).unwrap().sigma;
            let s2 = sigma_p(&f, p, 2).unwrap().sigma;
            assert_eq!(s1, s2, "p={p}");
        }
    }
}

#[test]
fn series_increments_shrink() {
    let f = corpus()[0].clone();
    let s = singular_series(&f, 128).unwrap();
    let inc = s.dyadic_increments();
    assert!(inc.last().unwrap().1 <= inc[1].1, "{inc:?}");
}

#[test]
fn hensel_examples() {
    let f = corpus()[0].clone();
    match hensel_unit_witness(&f, 5).unwrap() {
        HenselVerdict::Witness { level, h, .. } => {
            assert_eq!(level, 1);
            assert_eq!(h, vec![1, 1, 1]);
        }
        v => panic!("{v}"),
    }
    let sum_sq = Form::diagonal(&[1, 1], 2);
    assert_eq!(hensel_unit_witness(&sum_sq, 3).unwrap(), HenselVerdict::Obstruction { level: 1 });
    let diff_sq = Form::diagonal(&[1, -1], 2);
    match hensel_unit_witness(&diff_sq, 2).unwrap() {
        HenselVerdict::Witness { level, gradient_valuation, .. } => {
            assert_eq!(level, 3);
            assert_eq!(gradient_valuation, 1);
        }
        v => panic!("{v}"),
    }
}

#[test]
fn local_check_flags_obstruction() {
    let f = Form::diagonal(&[1, 1, -3], 2);
    let rows = local_check(&f, 11).unwrap();
    let r3 = rows.iter().find(|r| r.p == 3).unwrap();
    assert!(r3.verdict.is_obstruction());
    assert!(r3.sigma1.as_ref().unwrap().is_zero());
    assert!(rows.iter().filter(|r| r.p > 3).all(|r| !r.verdict.is_obstruction()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn unit_count_matches_brute(c in proptest::collection::vec(-5i64..=5, 4), p in prop::sample::select(vec![2u64, 3, 5, 7]), k in 1u32..=2) {
        let f = Form::from_terms(3, vec![
            (c[0], vec![2u32, 0, 0]), (c[1], vec![0, 1, 1]), (c[2], vec![1, 0, 1]), (c[3], vec![0, 0, 2]),
        ]).unwrap();
        let got = unit_solutions(&f, p, k).unwrap();
        prop_assert_eq!(got, brute_units(&f, p.pow(k)));
        let s = sigma_p(&f, p, k).unwrap();
        prop_assert!(s.sigma.to_f64().unwrap() >= 0.0);
    }
}
