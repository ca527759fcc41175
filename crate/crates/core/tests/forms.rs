use circlelab::forms::MultilinearTable;
use circlelab::Form;
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

// evaluation straight from the term list, in i128
fn naive_eval(f: &Form, x: &[i64]) -> i128 {
    f.terms()
        .map(|(e, c)| {
            let c: i128 = c.try_into().unwrap();
            e.iter().zip(x).fold(c, |acc, (&k, &v)| acc * (v as i128).pow(k))
        })
        .sum()
}

fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for k in 0..=d {
        for mut rest in monomials(n - 1, d - k) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

fn homogeneous_form(n: usize, d: u32) -> impl Strategy<Value = Form> {
    let monos = monomials(n, d);
    prop::collection::vec(-5i64..=5, monos.len()).prop_filter_map("zero form", move |cs| {
        let terms: Vec<(i64, Vec<u32>)> =
            cs.iter().zip(&monos).filter(|(c, _)| **c != 0).map(|(c, m)| (*c, m.clone())).collect();
        (!terms.is_empty()).then(|| Form::from_terms(n, terms).unwrap())
    })
}

fn form_and_point() -> impl Strategy<Value = (Form, Vec<i64>)> {
    (1usize..=4, 1u32..=3).prop_flat_map(|(n, d)| (homogeneous_form(n, d), prop::collection::vec(-20i64..=20, n)))
}

proptest! {
    #[test]
    fn evaluation_matches_term_list((f, x) in form_and_point()) {
        let want = naive_eval(&f, &x);
        prop_assert_eq!(f.evaluate_i64(&x).unwrap(), BigInt::from(want));
        prop_assert_eq!(f.compile().eval_i128(&x), Some(want));
    }

    #[test]
    fn file_format_round_trips((f, _) in form_and_point()) {
        let g: Form = f.to_file_string().parse().unwrap();
        prop_assert_eq!(f, g);
    }

    #[test]
    fn euler_identity((f, x) in form_and_point()) {
        // Σ xᵢ ∂ᵢF = d F for homogeneous F
        let d = f.degree() as i128;
        let lhs: i128 = f.gradient().iter().zip(&x).map(|(g, &v)| naive_eval(g, &x) * v as i128).sum();
        prop_assert_eq!(lhs, d * naive_eval(&f, &x));
    }

    #[test]
    fn restriction_is_evaluation_at_zero((f, x) in form_and_point(), mask in any::<u8>()) {
        let n = f.n_vars();
        let zeroed: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let g = f.restrict_zero(&zeroed).unwrap();
        let mut y = x.clone();
        for &i in &zeroed {
            y[i] = 0;
        }
        prop_assert_eq!(naive_eval(&g, &x), naive_eval(&f, &y));
    }

    #[test]
    fn additive_split_reassembles((f, x) in form_and_point()) {
        let blocks = f.additive_blocks();
        let (parts, constant) = f.split_by_blocks(&blocks);
        let total: BigInt = parts.iter().map(|p| p.evaluate_i64(&x).unwrap()).sum::<BigInt>() + constant;
        prop_assert_eq!(total, f.evaluate_i64(&x).unwrap());
        // every term lives in one block
        for (e, _) in f.terms() {
            let used: Vec<usize> = (0..e.len()).filter(|&i| e[i] > 0).collect();
            prop_assert!(blocks.iter().any(|b| used.iter().all(|i| b.contains(i))));
        }
    }

    #[test]
    fn permutation_relabels_variables((f, x) in form_and_point(), shift in 0usize..4) {
        let n = f.n_vars();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let g = f.permute(&perm).unwrap();
        // new variable j is old variable perm[j]
        let mut y = vec![0i64; n];
        for j in 0..n {
            y[j] = x[perm[j]];
        }
        prop_assert_eq!(naive_eval(&g, &y), naive_eval(&f, &x));
    }

    #[test]
    fn multilinear_table_reconstructs((f, x) in form_and_point(), y in prop::collection::vec(-9i64..=9, 4)) {
        // g(x; y) = F(x₁y₁, …, x_m y_m)
        let m = f.n_vars();
        let g = MultilinearTable::from_form(&f).unwrap().reconstruct();
        let xy: Vec<i64> = x.iter().chain(&y[..m]).copied().collect();
        let prod: Vec<i64> = (0..m).map(|i| x[i] * y[i]).collect();
        prop_assert_eq!(naive_eval(&g, &xy), naive_eval(&f, &prod));
    }
}

#[test]
fn cross_part_of_split_form() {
    let f: Form = "1 1 1 0 0\n-1 0 0 1 1\n3 2 0 0 0".parse().unwrap();
    // with u = {x1, x3}, v = {x2, x4} only the two mixed monomials survive
    let c = f.cross_part(&[0, 2], &[1, 3]).unwrap();
    let want: Form = "1 1 1 0 0\n-1 0 0 1 1".parse().unwrap();
    assert_eq!(c, want);
    assert!(f.cross_part(&[0, 1], &[2, 3]).unwrap().is_zero());
    assert!(f.cross_part(&[0], &[0]).is_err());
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = "1 2 0\n1 x 0".parse::<Form>().unwrap_err().to_string();
    assert!(err.contains('2'), "{err}");
    assert!("1 2 0\n1 1".parse::<Form>().is_err());
    assert!("# only a comment\n".parse::<Form>().is_err());
}

#[test]
fn diagonal_constructor() {
    let f = Form::diagonal(&[1, -2, 0, 5], 3);
    assert_eq!(f.n_vars(), 4);
    assert_eq!(f.n_terms(), 3);
    assert_eq!(f.coefficient(&[0, 3, 0, 0]), BigInt::from(-2));
    assert!(f.coefficient(&[0, 0, 3, 0]).is_zero());
    assert_eq!(f.additive_blocks(), vec![vec![0], vec![1], vec![3]]);
}
