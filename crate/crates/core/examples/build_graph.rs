//! Builds the tripartite graph for a tiny catalogue and prints the
//! normalized adjacencies and bundle-bundle overlap weights.

use bgcn::graph::{OverlapKind, OverlapWeights, SparsityGroups, TripartiteGraph};
use bgcn::numeric::SparseMatrix;

fn show(name: &str, m: &SparseMatrix) {
    println!("{name} ({}x{}, {} nonzeros)", m.rows(), m.cols(), m.nnz());
    for r in 0..m.rows() {
        let (lo, hi) = (m.indptr()[r], m.indptr()[r + 1]);
        let row: Vec<String> = (lo..hi)
            .map(|j| format!("{}:{:.3}", m.indices()[j], m.values()[j]))
            .collect();
        println!("  {r}: {}", row.join(" "));
    }
}

fn main() -> bgcn::Result<()> {
    let user_bundle = [(0, 0), (0, 1), (1, 1), (2, 2)];
    let user_item = [(0, 0), (0, 1), (1, 2), (2, 3), (2, 4)];
    let bundle_item = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3), (2, 4)];
    let g = TripartiteGraph::build(&user_bundle, &user_item, &bundle_item, 3, 3, 5)?;

    show("user -> item (mean)", g.norm_user_item());
    show("bundle -> item (mean)", g.norm_bundle_item());
    show("user -> bundle (mean)", g.norm_user_bundle());

    let ov = OverlapWeights::build(&g);
    show("shared-item counts", ov.counts());
    show("overlap weights", ov.weights());
    show("uniform weights", &ov.uniform());
    let jaccard = OverlapWeights::build_with(&g, OverlapKind::Jaccard);
    show("jaccard weights", jaccard.weights());

    let groups = SparsityGroups::new(&g, &[2])?;
    for gi in 0..groups.num_groups() {
        println!("group {}: users {:?}", groups.label(gi), groups.members(gi));
    }
    Ok(())
}
