use circlelab::arith::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// trial division: list of (prime, exponent)
fn trial_factor(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        let mut k = 0;
        while x.is_multiple_of(p) {
            x /= p;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
        p += 1;
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

#[test]
fn sieve_matches_trial_division() {
    let t = SieveTables::build(3000).unwrap();
    for x in 2..=3000u64 {
        let fac = trial_factor(x);
        let mu = if fac.iter().any(|&(_, k)| k > 1) { 0 } else if fac.len().is_multiple_of(2) { 1 } else { -1 };
        assert_eq!(t.mu(x) as i64, mu, "mu({x})");
        assert_eq!(mobius(x), mu);
        let lambda = if fac.len() == 1 { (fac[0].0 as f64).ln() } else { 0.0 };
        assert_eq!(t.lambda(x), lambda, "lambda({x})");
        let star = if fac.len() == 1 && fac[0].1 == 1 { lambda } else { 0.0 };
        assert_eq!(t.lambda_star(x), star);
        assert_eq!(t.sigma0(x), fac.iter().map(|&(_, k)| k + 1).product::<u32>());
        assert_eq!(t.smallest_prime_factor(x) as u64, fac[0].0);
        assert_eq!(t.factor(x), fac);
        assert_eq!(factor_u64(x), fac);
        assert_eq!(t.is_prime(x), is_prime(x));
        let phi = (1..=x).filter(|&a| gcd(a, x) == 1).count() as u64;
        assert_eq!(euler_phi(x), phi);
    }
    assert_eq!(primes_up_to(3000).len(), t.prime_count(3000));
    assert_eq!(t.mu(1), 1);
    assert_eq!(t.lambda(1), 0.0);
}

#[test]
fn chebyshev_psi_is_sum_of_lambda() {
    let t = SieveTables::build(5000).unwrap();
    let direct: f64 = (1..=5000).map(|x| t.lambda(x)).sum();
    assert!((t.psi(5000) - direct).abs() < 1e-9);
    // ψ(x) ~ x
    assert!((t.psi(5000) / 5000.0 - 1.0).abs() < 0.05);
}

#[test]
fn divisors_are_complete() {
    let t = SieveTables::build(500).unwrap();
    for x in 1..=500u64 {
        let mut d = t.divisors(x);
        d.sort_unstable();
        let want: Vec<u64> = (1..=x).filter(|k| x % k == 0).collect();
        assert_eq!(d, want);
    }
}

#[test]
fn characters_form_the_dual_group() {
    for q in [1u64, 2, 3, 4, 8, 9, 12, 15, 16, 25, 36, 63, 64, 77, 100] {
        let chars = characters_mod(q).unwrap();
        assert_eq!(chars.len() as u64, euler_phi(q), "q = {q}");
        assert!(orthogonality_defect(&chars) < 1e-9, "q = {q}");
        assert_eq!(chars.iter().filter(|c| c.is_principal()).count(), 1);
        for c in &chars {
            // completely multiplicative on units, zero off units
            for a in 0..q {
                for b in 0..q {
                    let lhs = c.value(a * b % q);
                    let rhs = c.value(a) * c.value(b);
                    assert!((lhs - rhs).norm() < 1e-9);
                }
                if gcd(a, q) != 1 {
                    assert_eq!(c.value(a), Complex64::new(0.0, 0.0));
                }
            }
        }
    }
}

#[test]
fn vaughan_exact_residual_vanishes() {
    let t = SieveTables::build(3000).unwrap();
    for (u, v) in [(2.0, 2.0), (3.5, 7.0), (30.0, 4.0), (1.0, 1.0)] {
        let p = VaughanParams::new(u, v).unwrap();
        for x in 2..=3000 {
            assert!(vaughan_residual_exact(&t, x, p).unwrap().is_empty(), "x = {x}, U = {u}, V = {v}");
        }
    }
}

#[test]
fn vaughan_terms_reduce_to_lambda_below_u() {
    let t = SieveTables::build(100).unwrap();
    let p = VaughanParams::new(50.0, 50.0).unwrap();
    for x in 2..=50 {
        let s = vaughan_terms(&t, x, p).unwrap();
        assert_eq!(s.small, t.lambda(x));
        assert!((s.type_one + s.type_one_prime + s.type_two).abs() < 1e-9);
    }
}

#[test]
fn sieve_rejects_out_of_range() {
    let t = SieveTables::build(10).unwrap();
    assert!(vaughan_terms(&t, 11, VaughanParams::new(2.0, 2.0).unwrap()).is_err());
    assert!(VaughanParams::new(0.5, 2.0).is_err());
}

proptest! {
    #[test]
    fn vaughan_identity_for_random_cutoffs(u in 1.0f64..60.0, v in 1.0f64..60.0, x in 2u64..20_000) {
        let t = SieveTables::build(20_000).unwrap();
        let p = VaughanParams::new(u, v).unwrap();
        prop_assert!(vaughan_residual(&t, x, p).unwrap().abs() < 1e-9);
    }

    #[test]
    fn factorisation_multiplies_back(x in 1u64..1_000_000_000_000) {
        let f = factor_u64(x);
        prop_assert_eq!(f.iter().map(|&(p, k)| p.pow(k)).product::<u64>(), x);
        prop_assert!(f.iter().all(|&(p, _)| is_prime(p)));
        prop_assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn mobius_sums_over_divisors(x in 2u64..5000) {
        let t = SieveTables::build(5000).unwrap();
        let s: i64 = t.divisors(x).iter().map(|&d| t.mu(d) as i64).sum();
        prop_assert_eq!(s, 0);
        let l: f64 = t.divisors(x).iter().map(|&d| t.lambda(d)).sum();
        prop_assert!((l - (x as f64).ln()).abs() < 1e-9);
    }
}
