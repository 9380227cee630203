//! Ranking metrics on hand-made scores, including per-group breakdowns.

use bgcn::data::Interactions;
use bgcn::eval::{evaluate, ndcg_at_k, rank_bundles, recall_at_k, EvalOptions};
use bgcn::graph::{SparsityGroups, TripartiteGraph};
use bgcn::numeric::DenseMatrix;

fn main() -> bgcn::Result<()> {
    let scores = [0.1, 0.9, 0.4, 0.9, 0.2];
    let ranked = rank_bundles(&scores, &[2]);
    println!("ranking (bundle 2 excluded, ties by id): {ranked:?}");
    let truth = [0, 3];
    for k in [1, 2, 4] {
        println!(
            "K={k}: Recall {:.4}  NDCG {:.4}",
            recall_at_k(&ranked, &truth, k),
            ndcg_at_k(&ranked, &truth, k)
        );
    }

    let ub = [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)];
    let graph = TripartiteGraph::build(&ub, &[(0, 0)], &[(0, 0), (1, 0), (2, 0), (3, 0)], 3, 4, 1)?;
    let groups = SparsityGroups::new(&graph, &[2])?;
    let scores = DenseMatrix::from_rows(&[
        vec![0.0, 0.3, 0.2, 0.9],
        vec![0.1, 0.0, 0.8, 0.4],
        vec![0.5, 0.6, 0.7, 0.1],
    ])?;
    let test = Interactions::from_pairs(3, 4, &[(0, 3), (1, 2), (2, 3)]);
    let train = Interactions::from_pairs(3, 4, &ub);
    let report = evaluate(
        &scores,
        &test,
        &train,
        EvalOptions {
            ks: &[1, 2],
            groups: Some(&groups),
            threads: 1,
        },
    )?;
    print!("{}", report.to_table());
    print!("{}", report.to_tsv());
    Ok(())
}
