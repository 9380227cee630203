mod common;

use bgcn::data::Interactions;
use bgcn::eval::{evaluate, ndcg_at_k, rank_bundles, recall_at_k, EvalOptions};
use bgcn::numeric::DenseMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_rankings_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = rng.gen_range(1..40u32);
        let mut ranked: Vec<u32> = (0..n).collect();
        ranked.shuffle(&mut rng);
        let mut truth: Vec<u32> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        if truth.is_empty() {
            truth.push(0);
        }
        for k in [1, 5, 20, 80] {
            let (r, d) = common::reference_metrics(&ranked, &truth, k);
            assert!((recall_at_k(&ranked, &truth, k) - r).abs() < 1e-12);
            assert!((ndcg_at_k(&ranked, &truth, k) - d).abs() < 1e-12);
        }
    }
}

#[test]
fn random_scores_give_expected_recall() {
    // With uniformly random scores E[Recall@K] = K / candidates.
    let (users, bundles, k) = (4000usize, 50usize, 10usize);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scores = DenseMatrix::from_vec(
        users,
        bundles,
        (0..users * bundles).map(|_| rng.gen::<f64>()).collect(),
    )
    .unwrap();
    let mut pairs = Vec::new();
    for u in 0..users as u32 {
        let picks: Vec<u32> = (0..bundles as u32)
            .collect::<Vec<_>>()
            .choose_multiple(&mut rng, 5)
            .copied()
            .collect();
        pairs.extend(picks.into_iter().map(|b| (u, b)));
    }
    let truth = Interactions::from_pairs(users, bundles, &pairs);
    let empty = Interactions::from_pairs(users, bundles, &[]);
    let report = evaluate(
        &scores,
        &truth,
        &empty,
        EvalOptions {
            ks: &[k],
            ..Default::default()
        },
    )
    .unwrap();
    let expected = k as f64 / bundles as f64;
    assert!(
        (report.recall(k).unwrap() - expected).abs() < 0.01,
        "{}",
        report.recall(k).unwrap()
    );
}

#[test]
fn ties_rank_lower_id_first() {
    assert_eq!(rank_bundles(&[0.5, 0.5, 0.9, 0.5], &[]), vec![2, 0, 1, 3]);
    assert_eq!(rank_bundles(&[0.5, 0.5, 0.9, 0.5], &[0, 2]), vec![1, 3]);
}

#[test]
fn threaded_evaluation_is_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scores = DenseMatrix::from_vec(
        300,
        40,
        (0..12000)
            .map(|_| (rng.gen_range(0..5) as f64) / 4.0)
            .collect(),
    )
    .unwrap();
    let pairs: Vec<(u32, u32)> = (0..300u32)
        .flat_map(|u| [(u, u % 40), (u, (u * 7) % 40)])
        .collect();
    let truth = Interactions::from_pairs(300, 40, &pairs);
    let excl = Interactions::from_pairs(300, 40, &[(0, 1), (5, 3)]);
    let a = evaluate(
        &scores,
        &truth,
        &excl,
        EvalOptions {
            ks: &[3, 10],
            ..Default::default()
        },
    )
    .unwrap();
    let b = evaluate(
        &scores,
        &truth,
        &excl,
        EvalOptions {
            ks: &[3, 10],
            threads: 4,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(a, b);
}
