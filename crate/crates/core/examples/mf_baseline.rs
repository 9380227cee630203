//! Trains the matrix-factorization baseline and compares it with BGCN
//! under the same budget.

use bgcn::data::{split, synth_generate, SplitSpec, SynthSpec};
use bgcn::eval::{evaluate, EvalOptions};
use bgcn::train::{freeze, train, train_graph, ModelKind, TrainConfig};

fn main() -> bgcn::Result<()> {
    let ds = synth_generate(&SynthSpec::default())?.dataset;
    let sp = split(&ds, &SplitSpec::default())?;
    let graph = train_graph(&ds, &sp.train)?;
    let exclude = sp.train.union(&sp.val);
    for model in [ModelKind::MfBpr, ModelKind::Bgcn] {
        let cfg = TrainConfig {
            model,
            dim: 32,
            lr: 5e-3,
            lambda: 1e-4,
            batch_size: 256,
            patience: 10,
            max_epochs: 200,
            ..Default::default()
        };
        let out = train(&cfg, &ds, &sp)?;
        let frozen = freeze(&out.model, &graph, &cfg)?;
        let r = evaluate(
            &frozen,
            &sp.test,
            &exclude,
            EvalOptions {
                ks: &[5, 20],
                ..Default::default()
            },
        )?;
        println!(
            "{model:?}: best epoch {:?}, Recall@5 {:.4}, Recall@20 {:.4}",
            out.best_epoch,
            r.recall(5).unwrap(),
            r.recall(20).unwrap()
        );
    }
    Ok(())
}
