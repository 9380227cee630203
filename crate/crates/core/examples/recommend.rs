//! Top-K recommendations for a few users from a briefly trained model.

use bgcn::data::{split, synth_generate, SplitSpec, SynthSpec};
use bgcn::eval::{rank_bundles, Scorer};
use bgcn::train::{freeze, train, train_graph, TrainConfig};

fn main() -> bgcn::Result<()> {
    let ds = synth_generate(&SynthSpec::default())?.dataset;
    let sp = split(&ds, &SplitSpec::default())?;
    let cfg = TrainConfig {
        dim: 32,
        lr: 5e-3,
        max_epochs: 20,
        ..Default::default()
    };
    let out = train(&cfg, &ds, &sp)?;
    let model = freeze(&out.model, &train_graph(&ds, &sp.train)?, &cfg)?;
    let mut scores = vec![0.0; ds.num_bundles];
    for user in 0..3 {
        model.score_user(user, &mut scores);
        let top: Vec<String> = rank_bundles(&scores, sp.train.of_user(user))
            .iter()
            .take(5)
            .map(|&b| format!("{b} ({:.3})", scores[b as usize]))
            .collect();
        println!(
            "user {user}: {}  | held out {:?}",
            top.join(", "),
            sp.test.of_user(user)
        );
    }
    Ok(())
}
