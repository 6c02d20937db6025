mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use starforge::eval::rmse;
use starforge::features::{build_vocabulary, freq_vector, FeatureMethod, TermCount, Vocabulary};
use starforge::regress::{fit_linear, fit_svr, fit_tree, SvrParams, TreeParams};

#[test]
fn ols_matches_gaussian_elimination() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, 50, 5, -1.0, 1.0);
        let y: Vec<f64> = (0..50).map(|_| r.random_range(1.0..5.0)).collect();
        let model = fit_linear(&x, &y).unwrap();
        assert_eq!(model.ridge, 0.0);
        let oracle = ols_oracle(&x, &y);
        for (w, o) in model.weights.iter().chain([&model.intercept]).zip(&oracle) {
            assert!((w - o).abs() <= 1e-8, "seed {seed}: {w} vs {o}");
        }
    }
}

#[test]
fn tree_matches_exhaustive_search() {
    for seed in 0..10 {
        let mut r = rng(100 + seed);
        let x = random_matrix(&mut r, 30, 3, 0.0, 1.0);
        let y: Vec<f64> = (0..30).map(|_| r.random_range(1.0..5.0)).collect();
        let params = TreeParams {
            max_depth: 2,
            min_leaf: 1,
        };
        let model = fit_tree(&x, &y, &params).unwrap();
        let rows: Vec<usize> = (0..30).collect();
        let oracle = tree_oracle(&x, &y, &rows, 0, 2, 1);
        assert!(
            same_tree(&model, 0, &oracle, 1e-12),
            "seed {seed}\n{model:#?}\n{oracle:#?}"
        );
    }
}

#[test]
fn tree_matches_oracle_with_min_leaf() {
    for seed in 0..5 {
        let mut r = rng(200 + seed);
        let x = random_matrix(&mut r, 60, 4, 0.0, 1.0);
        let y: Vec<f64> = (0..60).map(|_| r.random_range(1.0..5.0)).collect();
        let model = fit_tree(
            &x,
            &y,
            &TreeParams {
                max_depth: 4,
                min_leaf: 5,
            },
        )
        .unwrap();
        let rows: Vec<usize> = (0..60).collect();
        assert!(same_tree(
            &model,
            0,
            &tree_oracle(&x, &y, &rows, 0, 4, 5),
            1e-12
        ));
    }
}

#[test]
fn svr_within_two_percent_of_projected_gradient() {
    for seed in 0..10 {
        let mut r = rng(300 + seed);
        let x = random_matrix(&mut r, 6, 1, -2.0, 2.0);
        let y: Vec<f64> = (0..6).map(|_| r.random_range(1.0..5.0)).collect();
        let params = SvrParams {
            seed,
            ..SvrParams::default()
        };
        let model = fit_svr(&x, &y, &params, false).unwrap();
        let ours = svr_primal(&x, &y, &model.weights, model.bias, params.c, params.epsilon);
        assert!((ours - model.objective()).abs() <= 1e-9 * ours.max(1.0));
        let oracle = svr_oracle_objective(&x, &y, params.c, params.epsilon, 100_000);
        assert!(
            (ours - oracle).abs() <= 0.02 * oracle,
            "seed {seed}: {ours} vs {oracle}"
        );
        for pair in model.trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9);
        }
    }
}

fn vocab_of(counts: &std::collections::HashMap<String, u64>) -> Vocabulary {
    let mut terms: Vec<&String> = counts.keys().collect();
    terms.sort();
    Vocabulary {
        method: FeatureMethod::Baseline,
        k: terms.len(),
        terms: terms
            .into_iter()
            .map(|t| TermCount {
                term: t.clone(),
                count: 1,
            })
            .collect(),
        total_tokens: 0,
    }
}

#[test]
fn frequency_rows_sum_to_one_or_zero() {
    let mut r = rng(7);
    for _ in 0..1000 {
        let counts = random_counts(&mut r, 12, 50);
        let mut vocab = vocab_of(&counts);
        // Drop some terms so the vocabulary only partly covers the counts.
        let keep = r.random_range(0..=vocab.terms.len());
        vocab.terms.truncate(keep);
        let v = freq_vector(&counts, &vocab);
        let s: f64 = v.iter().sum();
        if vocab.terms.is_empty() {
            assert!(v.is_empty());
        } else {
            assert!((s - 1.0).abs() <= 1e-12 || s == 0.0, "{s}");
        }
    }
}

#[test]
fn rmse_matches_direct_formula() {
    assert!((rmse(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 2.5f64.sqrt()).abs() <= 1e-12);
    let mut r = rng(8);
    for _ in 0..200 {
        let n = r.random_range(1..40);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(1.0..5.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| r.random_range(1.0..5.0)).collect();
        let mut direct = 0.0;
        for i in 0..n {
            direct += (y[i] - p[i]) * (y[i] - p[i]);
        }
        direct = (direct / n as f64).sqrt();
        assert!((rmse(&y, &p).unwrap() - direct).abs() <= 1e-12);
    }
}

proptest! {
    #[test]
    fn top_k_matches_full_sort(seed in any::<u64>(), k in 1usize..30) {
        let mut r = rng(seed);
        let counts = random_counts(&mut r, 60, 8);
        let v = build_vocabulary(&counts, FeatureMethod::Baseline, k).unwrap();
        let got: Vec<(String, u64)> = v.terms.iter().map(|t| (t.term.clone(), t.count)).collect();
        prop_assert_eq!(got, top_k_oracle(&counts, k));
        for smaller in 1..=k {
            let direct = build_vocabulary(&counts, FeatureMethod::Baseline, smaller).unwrap();
            prop_assert_eq!(&direct.terms, &v.prefix(smaller).terms);
        }
    }
}
