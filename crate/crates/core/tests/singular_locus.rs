use circlelab::singular_locus::*;
use circlelab::Form;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

// rank over F_p of an integer matrix, p prime
fn rank_mod_p(mut m: Vec<Vec<i64>>, p: i64) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c].rem_euclid(p) != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = (1..p).find(|&k| (m[rank][c].rem_euclid(p) * k) % p == 1).unwrap();
        for r in 0..m.len() {
            if r != rank {
                let f = m[r][c].rem_euclid(p) * inv % p;
                for k in 0..cols {
                    m[r][k] = (m[r][k] - f * m[rank][k]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn quadratic(n: usize, sym: &[i64]) -> (Form, Vec<Vec<i64>>) {
    // sym gives the upper triangle of a symmetric matrix A; F = xᵀAx
    let mut a = vec![vec![0i64; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            a[i][j] = sym[k];
            a[j][i] = sym[k];
            k += 1;
        }
    }
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i..n {
            let c = if i == j { a[i][i] } else { 2 * a[i][j] };
            if c != 0 {
                let mut e = vec![0u32; n];
                e[i] += 1;
                e[j] += 1;
                terms.push((c, e));
            }
        }
    }
    (Form::from_terms(n, terms).unwrap(), a)
}

fn quadratics() -> impl Strategy<Value = (Form, Vec<Vec<i64>>)> {
    (1usize..=4).prop_flat_map(|n| {
        prop::collection::vec(-3i64..=3, n * (n + 1) / 2)
            .prop_filter("nonzero", |v| v.iter().any(|&c| c != 0))
            .prop_map(move |v| quadratic(n, &v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn singular_count_of_quadratic_is_kernel_size((f, a) in quadratics(), pi in 0usize..3) {
        // ∇F = 2Ax, so over odd p the singular locus is ker A
        let p = [5u64, 7, 11][pi];
        let r = rank_mod_p(a.clone(), p as i64);
        let want = (p as u128).pow((a.len() - r) as u32);
        prop_assert_eq!(fp_singular_count(&f, p).unwrap(), want);
        prop_assert_eq!(fp_singular_count_brute(&f, p).unwrap(), want);
    }

    #[test]
    fn hessian_codim_is_rational_rank((f, a) in quadratics()) {
        let rows: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        prop_assert_eq!(hessian_codim(&f).unwrap().codim, rational_rank(&rows));
        // over a large prime the rank agrees for these small entries unless p divides a minor
        let rp = rank_mod_p(a.clone(), 1_000_003);
        prop_assert_eq!(rp, rational_rank(&rows));
    }

    #[test]
    fn elimination_counter_matches_enumeration(cs in prop::collection::vec(-2i64..=2, 10), pi in 0usize..3) {
        // random cubic in three variables
        let monos: [[u32; 3]; 10] = [
            [3, 0, 0], [0, 3, 0], [0, 0, 3], [2, 1, 0], [2, 0, 1],
            [1, 2, 0], [0, 2, 1], [1, 0, 2], [0, 1, 2], [1, 1, 1],
        ];
        let terms: Vec<(i64, Vec<u32>)> =
            cs.iter().zip(monos).filter(|(c, _)| **c != 0).map(|(c, m)| (*c, m.to_vec())).collect();
        prop_assume!(!terms.is_empty());
        let f = Form::from_terms(3, terms).unwrap();
        let p = [5u64, 7, 13][pi];
        prop_assert_eq!(fp_singular_count(&f, p).unwrap(), fp_singular_count_brute(&f, p).unwrap());
    }
}

#[test]
fn point_count_codims_of_standard_forms() {
    let primes = [101, 211, 401];
    let cases: [(&str, usize); 5] = [
        ("1 1 1 1", 2),
        ("1 3 0 0\n1 0 3 0\n1 0 0 3", 3),
        ("1 2 0 0", 1),
        ("1 1 1 0 0\n-1 0 0 1 1", 4),
        ("1 2 1 0\n1 0 1 2", 2),
    ];
    for (s, want) in cases {
        let f: Form = s.parse().unwrap();
        let r = estimate_codim(&f, &primes).unwrap();
        assert_eq!(r.codim, want, "{f}: {r:?}");
        assert!(r.confident);
    }
}

#[test]
fn unused_variables_do_not_change_codim() {
    let f: Form = "1 2 0\n1 0 2".parse().unwrap();
    let g = f.with_extra_vars(3);
    let primes = [101, 211, 401];
    assert_eq!(estimate_codim(&f, &primes).unwrap().codim, 2);
    let r = estimate_codim(&g, &primes).unwrap();
    assert_eq!((r.codim, r.n_vars), (2, 5));
}

#[test]
fn thresholds_follow_closed_forms() {
    for d in 2u32..=5 {
        // 2^8 3^4 5^2 d^3 (2d-1)^2 4^d
        let d64 = d as u64;
        let want = BigInt::from(256u64 * 81 * 25) * BigInt::from(d64.pow(3) * (2 * d64 - 1).pow(2) * 4u64.pow(d));
        assert_eq!(codim_threshold(d).unwrap(), want);
    }
    for (d, num, den) in [(2u32, 1i64, 12i64), (3, 1, 12), (2, 1, 10), (4, 1, 7)] {
        // least integer strictly above 8 d (d-1) 2^d / θ
        let bound = BigRational::new(BigInt::from(8 * d * (d - 1) * 2u32.pow(d)) * den, BigInt::from(num));
        let want = bound.floor().to_integer() + 1;
        assert_eq!(c0_threshold(d, &BigRational::new(num.into(), den.into())).unwrap(), want);
    }
    assert_eq!(c0_threshold(2, &BigRational::new(1.into(), 12.into())).unwrap(), BigInt::from(769));
}

#[test]
fn dichotomy_cases() {
    let est = CodimEstimator::default();
    let diag = Form::diagonal(&[1, 2, 3, 4, 5], 2);
    let v = dichotomy_classify(&diag, 0, &PartitionPolicy::Exhaustive, &est).unwrap();
    assert_eq!(v.case, DichotomyCase::II);
    assert!(v.witness.is_none());

    let bil: Form = "1 1 0 0 1 0 0\n1 0 1 0 0 1 0\n1 0 0 1 0 0 1".parse().unwrap();
    let v = dichotomy_classify(&bil, 4, &PartitionPolicy::Exhaustive, &est).unwrap();
    assert_eq!(v.case, DichotomyCase::I);
    let w = v.witness.unwrap();
    assert!(w.codim_cross > 4);
    let cross = bil.cross_part(&w.u, &w.v).unwrap();
    assert_eq!(est.estimate(&cross).unwrap().codim, w.codim_cross);
}

#[test]
fn subadditivity_and_restriction_hold_on_samples() {
    let est = CodimEstimator::default();
    let f: Form = "1 2 0 0 0\n2 1 1 0 0\n-3 0 1 1 0\n1 0 0 1 1\n-1 0 0 0 2".parse().unwrap();
    for s in 0..=4 {
        let r = check_restriction_bounds(&f, s, &est).unwrap();
        assert!(r.lower_ok && r.upper_ok, "s = {s}: {r:?}");
    }
    for (u, v) in [(vec![0, 1], vec![2, 3]), (vec![0, 2], vec![1, 3]), (vec![1], vec![0, 2, 3])] {
        assert!(check_subadditivity(&f, &u, &v, &est).unwrap().holds);
    }
}
