//! Inspects the hard-negative candidate index on a synthetic dataset and
//! draws a few negatives.

use bgcn::data::{split, synth_generate, SplitSpec, SynthSpec};
use bgcn::graph::OverlapWeights;
use bgcn::train::{sample_hard, train_graph, HardCandidateIndex, HardFamilies};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bgcn::Result<()> {
    let ds = synth_generate(&SynthSpec::default())?.dataset;
    let sp = split(&ds, &SplitSpec::default())?;
    let graph = train_graph(&ds, &sp.train)?;
    let overlap = OverlapWeights::build(&graph);

    for tau in [0.3, 0.5, 0.8] {
        let index = HardCandidateIndex::build(&graph, &overlap, &sp.train, tau, 1);
        let cov: usize = (0..ds.num_users)
            .map(|u| index.coverage_candidates(u).len())
            .sum();
        let ovl: usize = (0..ds.num_bundles)
            .map(|b| index.overlap_candidates(b).len())
            .sum();
        println!(
            "tau {tau}: {:.2} coverage candidates per user, {:.2} overlap candidates per bundle",
            cov as f64 / ds.num_users as f64,
            ovl as f64 / ds.num_bundles as f64
        );
    }

    let index = HardCandidateIndex::build(&graph, &overlap, &sp.train, 0.5, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let user = 0;
    let pos = sp.train.of_user(user)[0] as usize;
    println!(
        "user {user}, positive {pos}, candidates {:?}",
        index.candidates(user, pos, HardFamilies::Both, &sp.train)
    );
    for _ in 0..5 {
        if let Some((neg, hard)) = sample_hard(
            user,
            pos,
            &index,
            HardFamilies::Both,
            0.8,
            &sp.train,
            &mut rng,
        ) {
            println!(
                "  negative {neg} ({})",
                if hard { "hard" } else { "uniform" }
            );
        }
    }
    Ok(())
}
