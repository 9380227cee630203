//! Runs the two-level propagation on a small graph and prints the
//! score matrix, with and without message dropout.

use bgcn::graph::{OverlapWeights, TripartiteGraph};
use bgcn::model::{
    forward, AblationSwitches, BgcnParams, DropoutMasks, PropagationGraph, DEFAULT_LEAKY_SLOPE,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn print_scores(title: &str, emb: &bgcn::model::PropagatedEmbeddings) {
    println!("{title}");
    for u in 0..emb.num_users() {
        let row: Vec<String> = (0..emb.num_bundles())
            .map(|b| format!("{:+.4}", emb.predict(u, b)))
            .collect();
        println!("  user {u}: {}", row.join("  "));
    }
}

fn main() -> bgcn::Result<()> {
    let ub = [(0, 0), (1, 1), (2, 2), (3, 0)];
    let ui = [(0, 0), (0, 1), (1, 2), (2, 3), (3, 1)];
    let bi = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 3), (2, 4)];
    let graph = TripartiteGraph::build(&ub, &ui, &bi, 4, 3, 5)?;
    let overlap = OverlapWeights::build(&graph);
    let params = BgcnParams::init(4, 3, 5, 8, 2, 7);

    for (label, sw) in [
        ("both levels", AblationSwitches::default()),
        (
            "item level only",
            AblationSwitches {
                bundle_level: false,
                ..Default::default()
            },
        ),
        (
            "bundle level only",
            AblationSwitches {
                item_level: false,
                ..Default::default()
            },
        ),
    ] {
        let adj = PropagationGraph::new(&graph, Some(&overlap), &sw)?;
        let emb = forward(&params, &adj, &sw, None, DEFAULT_LEAKY_SLOPE)?;
        print_scores(label, &emb);
    }

    let sw = AblationSwitches::default();
    let adj = PropagationGraph::new(&graph, Some(&overlap), &sw)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let masks = DropoutMasks::sample(4, 5, 3, 8, 2, 0.3, &mut rng);
    let emb = forward(&params, &adj, &sw, Some(&masks), DEFAULT_LEAKY_SLOPE)?;
    print_scores("both levels, message dropout 0.3", &emb);
    Ok(())
}
