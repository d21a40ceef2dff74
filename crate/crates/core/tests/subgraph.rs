use proptest::prelude::*;

use lowdeg::models::SymMatrix;
use lowdeg::subgraph::{chi_many, chi_theta, chi_theta_generic, make_pattern, GraphPattern};

fn matrix(n: usize, vals: &[f64]) -> SymMatrix {
    SymMatrix::from_upper(n, &vals[..n * (n + 1) / 2]).unwrap()
}

fn motifs() -> Vec<GraphPattern> {
    vec![GraphPattern::edge(), GraphPattern::two_path(), GraphPattern::triangle(), GraphPattern::four_cycle()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_are_relabeling_invariant(
        n in 4usize..10,
        vals in prop::collection::vec(-2.0f64..2.0, 55),
        perm in Just((0..10).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let m = matrix(n, &vals);
        let perm: Vec<usize> = perm.into_iter().filter(|&i| i < n).collect();
        let a = chi_many(&m, &motifs()).unwrap();
        let b = chi_many(&m.permuted(&perm), &motifs()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn closed_forms_agree_with_enumeration(n in 4usize..9, vals in prop::collection::vec(-2.0f64..2.0, 45)) {
        let m = matrix(n, &vals);
        for p in motifs() {
            let fast = chi_theta(&m, &p).unwrap();
            let slow = chi_theta_generic(&m, &p).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1.0), "{p}: {fast} vs {slow}");
        }
    }

    #[test]
    fn counts_ignore_the_diagonal(n in 4usize..9, vals in prop::collection::vec(-2.0f64..2.0, 45), d in -5.0f64..5.0) {
        let m = matrix(n, &vals);
        let mut shifted = m.clone();
        for i in 0..n {
            shifted.set(i, i, d);
        }
        let star = make_pattern(&[(0, 1), (0, 2), (0, 3)]).unwrap();
        let a = chi_many(&m, &[motifs(), vec![star.clone()]].concat()).unwrap();
        let b = chi_many(&shifted, &[motifs(), vec![star]].concat()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}

#[test]
fn rejects_disconnected_patterns() {
    assert!(make_pattern(&[(0, 1), (2, 3)]).is_err());
    assert!(make_pattern(&[(0, 0)]).is_err());
}
